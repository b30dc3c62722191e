use std::io::Write;

fn main() {
    let out = ifl_core::cli::run(std::env::args_os());
    if !out.report.is_empty() {
        let mut stdout = std::io::stdout().lock();
        let _ = stdout.write_all(out.report.as_bytes());
        let _ = stdout.flush();
    }
    if !out.stderr.is_empty() {
        eprint!("{}", out.stderr);
    }
    std::process::exit(out.code);
}
