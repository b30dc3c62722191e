use std::process::{Command, ExitCode};

use ifl_core::selftest::{run_one, Status};

const CAP: u64 = 2_000_000;

/// Runs `ifl` three times per worker count and requires identical stdout everywhere.
fn binary_determinism() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let ring = dir.path().join("z9t2.ring");
    let group = dir.path().join("gm.grp");
    std::fs::write(&ring, "kind=trunc_iwasawa\np=3\na=2\nb=2\n").map_err(|e| e.to_string())?;
    std::fs::write(&group, "1,3;0,1\n1,0;3,1\n1,T;0,1\n1,0;T,1\n4,0;0,7\n1+T,0;0,1+8*T\n").map_err(|e| e.to_string())?;
    let (ring, group) = (ring.to_str().unwrap(), group.to_str().unwrap());
    let mut outputs = Vec::new();
    for workers in ["1", "4"] {
        for _ in 0..3 {
            for args in [
                vec!["pink", "--ring", ring, "--group", group],
                vec!["fullness", "--ring", ring, "--group", group, "--j", "1,0;0,8"],
            ] {
                let o = Command::new(env!("CARGO_BIN_EXE_ifl"))
                    .args(["--workers", workers])
                    .args(&args)
                    .env_remove("IFL_CAP")
                    .output()
                    .map_err(|e| e.to_string())?;
                if !o.status.success() {
                    return Err(format!("{} exited {:?}", args[0], o.status.code()));
                }
                outputs.push((args[0], o.stdout));
            }
        }
    }
    for (name, out) in &outputs {
        let first = &outputs.iter().find(|(n, _)| n == name).unwrap().1;
        if out != first {
            return Err(format!("{name} output differs between runs"));
        }
    }
    Ok(format!("binary: {} runs byte-identical across --workers 1 and 4", outputs.len()))
}

fn main() -> ExitCode {
    let mut failed = 0;
    for id in 1..=11 {
        let mut r = run_one(id, CAP, None);
        if id == 11 && r.status == Status::Pass {
            match binary_determinism() {
                Ok(d) => r.detail = format!("{}; {d}", r.detail),
                Err(e) => {
                    r.status = Status::Fail;
                    r.detail = format!("{}; {e}", r.detail);
                }
            }
        }
        if r.status != Status::Pass {
            failed += 1;
        }
        println!("{}", r.line());
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
