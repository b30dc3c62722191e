//! Command-line front end: argument parsing, command dispatch, JSON reports and exit codes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{IflError, Result};
use crate::fullness::{fullness_with_trace, TraceStep};
use crate::group_theory::obstruction::{q8_example, s3_example};
use crate::group_theory::product::{apply_entrywise, sigma_table};
use crate::group_theory::{
    exhaustive_extensions, extend_rep, goursat, merzljakov_search, merzljakov_verify, obstruction_class,
    teichmuller_matrix_limit, ProductSubgroup,
};
use crate::hecke::characters::DirichletCharacter;
use crate::hecke::qexp::{eta_product_expand, QExpansion};
use crate::hecke::twist::detect_self_twists;
use crate::ideals::{enumerate_ideals, maximal_ideal};
use crate::io::{parse_group_file, parse_ring_spec, read_text, to_json};
use crate::matrix::{self as mx, M2};
use crate::pink::{enumerate_subgroup, pink_tower, verify_with_tower, MatrixGroup, DEFAULT_CAP};
use crate::rings::{kappa, ring_automorphisms, Ring, RingKind};

#[derive(Parser, Debug)]
#[command(name = "ifl", version, about = "Finite-scale SL2 image, Lie tower and twist computations")]
pub struct Cli {
    /// Enumeration and search cap.
    #[arg(long, global = true, env = "IFL_CAP", default_value_t = DEFAULT_CAP as u64)]
    pub cap: u64,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Ring summary: size, units, automorphisms, kappa values.
    RingInfo(RingArgs),
    /// Lie tower L_n, H_n and the Pink theorem verdicts for a matrix group.
    Pink(PinkArgs),
    /// Fullness certificate with pipeline trace.
    Fullness(FullnessArgs),
    /// Graphs of ring-automorphism isomorphisms, Goursat and Merzljakov recovery.
    Goursat(GoursatArgs),
    /// Extension obstruction for a bundled example.
    Obstruction(ObstructionArgs),
    /// q-expansion operators.
    Qexp(QexpArgs),
    /// Conjugate self-twist detection.
    TwistDetect(TwistArgs),
    /// Run the acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
pub struct RingArgs {
    #[arg(long)]
    pub ring: PathBuf,
}

#[derive(Args, Debug)]
pub struct PinkArgs {
    #[arg(long)]
    pub ring: PathBuf,
    #[arg(long)]
    pub group: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
}

#[derive(Args, Debug)]
pub struct FullnessArgs {
    #[arg(long)]
    pub ring: PathBuf,
    #[arg(long)]
    pub group: PathBuf,
    /// Diagonal matrix `a,0;0,d`.
    #[arg(long)]
    pub j: Option<String>,
    /// Upper triangular element whose Teichmuller limit gives j.
    #[arg(long, conflicts_with = "j")]
    pub regular: Option<String>,
}

#[derive(Args, Debug)]
pub struct GoursatArgs {
    #[arg(long)]
    pub ring: PathBuf,
    #[arg(long)]
    pub group: PathBuf,
}

#[derive(Args, Debug)]
pub struct ObstructionArgs {
    /// s3 or q8.
    #[arg(long, default_value = "s3")]
    pub example: String,
}

#[derive(Args, Debug, Clone)]
pub struct FormSource {
    /// q-expansion CSV.
    #[arg(long)]
    pub qexp: Option<PathBuf>,
    /// Eta product `d:e,d:e,...`.
    #[arg(long, conflicts_with = "qexp")]
    pub eta: Option<String>,
    #[arg(long, default_value_t = 200)]
    pub precision: usize,
}

#[derive(Args, Debug)]
pub struct QexpArgs {
    #[command(flatten)]
    pub source: FormSource,
    /// Apply T(l), in order.
    #[arg(long)]
    pub hecke: Vec<u64>,
    /// Twist by the Kronecker character of this discriminant.
    #[arg(long, allow_negative_numbers = true)]
    pub twist: Option<i64>,
    /// Level for --twist (default: the least admissible).
    #[arg(long)]
    pub level: Option<u64>,
    /// Build f_M at this level.
    #[arg(long)]
    pub fm: Option<u64>,
    /// Coefficients shown in the report.
    #[arg(long, default_value_t = 20)]
    pub show: usize,
    /// Emit the resulting form as CSV instead of JSON.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Args, Debug)]
pub struct TwistArgs {
    #[command(flatten)]
    pub source: FormSource,
    /// Largest conductor of eta.
    #[arg(long, default_value_t = 8)]
    pub bound: u64,
    /// Number of primes used for verification.
    #[arg(long, default_value_t = 25)]
    pub primes: usize,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    /// CSV of the weight 12 level 1 cusp form compared against the eta-product expansion.
    #[arg(long)]
    pub golden: Option<PathBuf>,
}

/// What a command produced: exit code, report body and diagnostic lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub report: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(report: String) -> Self {
        Outcome { code: 0, report, stderr: String::new() }
    }

    fn fail(code: i32, report: String, msg: &str) -> Self {
        Outcome { code, report, stderr: format!("error: {msg}\n") }
    }
}

fn input_error(e: &IflError) -> Outcome {
    Outcome::fail(1, String::new(), &e.to_string())
}

fn load_ring(path: &Path) -> Result<Arc<Ring>> {
    parse_ring_spec(&read_text(path)?)
}

fn load_group(ring: &Arc<Ring>, path: &Path, cap: usize) -> Result<MatrixGroup> {
    let gens = parse_group_file(ring, &read_text(path)?)?;
    enumerate_subgroup(ring, &gens, cap)
}

fn cap_usize(cap: u64) -> usize {
    usize::try_from(cap).unwrap_or(usize::MAX)
}

#[derive(Serialize)]
struct RingInfo {
    ring: String,
    kind: RingKind,
    p: u64,
    a: u32,
    b: usize,
    d: usize,
    size: String,
    residue_field_size: u64,
    units: Option<usize>,
    maximal_ideal: Vec<String>,
    ideal_count: Option<usize>,
    automorphisms: Vec<String>,
    kappa: BTreeMap<u64, String>,
}

pub fn ring_info_report(ring: &Arc<Ring>, cap: u64) -> Result<String> {
    let enumerable = ring.size() <= cap as u128;
    let units = if enumerable {
        let o = ring.ops()?;
        Some(o.all().filter(|&u| o.is_unit(u)).count())
    } else {
        None
    };
    let ideal_count = if enumerable && ring.kind != RingKind::FiniteField {
        enumerate_ideals(ring, cap as u128).ok().map(|v| v.len())
    } else {
        None
    };
    let automorphisms = ring_automorphisms(ring, cap as u128)?.into_iter().map(|m| m.label).collect();
    let mut kap = BTreeMap::new();
    if ring.kind == RingKind::TruncIwasawa && ring.quotient.is_none() {
        for l in crate::arith::first_primes(6).into_iter().filter(|&l| l != ring.p).take(4) {
            kap.insert(l, ring.format(&kappa(l, ring)?));
        }
    }
    let info = RingInfo {
        ring: ring.label(),
        kind: ring.kind,
        p: ring.p,
        a: ring.a,
        b: ring.b,
        d: ring.d,
        size: ring.size().to_string(),
        residue_field_size: ring.p.pow(ring.residue_degree() as u32),
        units,
        maximal_ideal: if enumerable { maximal_ideal(ring).generators() } else { Vec::new() },
        ideal_count,
        automorphisms,
        kappa: kap,
    };
    Ok(to_json(&info))
}

#[derive(Serialize)]
struct TowerLevel {
    n: usize,
    l_basis: Vec<Vec<u64>>,
    l_log_size: u32,
    h_order: usize,
}

#[derive(Serialize)]
struct PinkReport {
    ring: String,
    generators: Vec<String>,
    group_order: usize,
    is_pgroup: bool,
    l1_basis: Vec<Vec<u64>>,
    l2_basis: Vec<Vec<u64>>,
    c_basis: Vec<Vec<u64>>,
    tower: Vec<TowerLevel>,
    verdict: crate::pink::PinkVerdict,
}

/// JSON report and the theorem verdict.
pub fn pink_report(g: &MatrixGroup, depth: usize, cap: usize) -> Result<(String, bool)> {
    let depth = depth.max(2);
    let data = pink_tower(g, depth, cap)?;
    let verdict = verify_with_tower(g, &data, depth, cap)?;
    let o = g.ops();
    let tower = (1..=depth)
        .map(|n| TowerLevel {
            n,
            l_basis: data.l(n).rows.clone(),
            l_log_size: data.l(n).log_size(),
            h_order: data.h(n).order(),
        })
        .collect();
    let passed = verdict.passed;
    let rep = PinkReport {
        ring: g.ring.label(),
        generators: g.generators.iter().map(|x| mx::format(&o, x)).collect(),
        group_order: g.order(),
        is_pgroup: g.is_pgroup(),
        l1_basis: data.l(1).rows.clone(),
        l2_basis: data.l(2).rows.clone(),
        c_basis: data.c_trace.rows.clone(),
        tower,
        verdict,
    };
    Ok((to_json(&rep), passed))
}

#[derive(Serialize)]
struct FullnessReport {
    ring: String,
    group_order: usize,
    j: Option<String>,
    j_source: String,
    certificate: Option<crate::fullness::CertificateReport>,
    failed_stage: Option<String>,
    error: Option<String>,
    pipeline_trace: Vec<TraceStep>,
}

/// Upper triangular elements of G in order; the first whose Teichmuller limit is a regular diagonal j.
fn find_regular_j(g: &MatrixGroup) -> Option<(M2, M2)> {
    let o = g.ops();
    let q = g.ring.p.pow(g.ring.residue_degree() as u32);
    g.elements.iter().filter(|x| x[2] == o.zero()).find_map(|x| {
        let t = teichmuller_matrix_limit(&g.ring, x, q).ok()?;
        (t.j[0] != t.j[3]).then_some((*x, t.j))
    })
}

/// Report, exit code and the failing stage, if any.
pub fn fullness_report(g: &MatrixGroup, j: Option<&str>, regular: Option<&str>, cap: usize) -> Result<Outcome> {
    let o = g.ops();
    let ring = &g.ring;
    let q = ring.p.pow(ring.residue_degree() as u32);
    let mut trace = Vec::new();
    let (j, source) = match (j, regular) {
        (Some(s), _) => (Some(mx::parse(&o, s)?), "given".to_string()),
        (None, Some(s)) => {
            let x = mx::parse(&o, s)?;
            match teichmuller_matrix_limit(ring, &x, q) {
                Ok(t) => (Some(t.j), format!("teichmuller limit of {}", mx::format(&o, &x))),
                Err(e) => {
                    trace.push(TraceStep { stage: "teichmuller_matrix_limit".into(), outcome: format!("error: {e}") });
                    (None, "teichmuller limit".to_string())
                }
            }
        }
        (None, None) => match find_regular_j(g) {
            Some((x, j)) => (Some(j), format!("teichmuller limit of {}", mx::format(&o, &x))),
            None => {
                trace.push(TraceStep {
                    stage: "teichmuller_matrix_limit".into(),
                    outcome: "error: no j given and no regular upper triangular element in the group".into(),
                });
                (None, "teichmuller limit".to_string())
            }
        },
    };
    let Some(j) = j else {
        let msg = trace.last().map(|t| t.outcome.trim_start_matches("error: ").to_string()).unwrap_or_default();
        let rep = FullnessReport {
            ring: ring.label(),
            group_order: g.order(),
            j: None,
            j_source: source,
            certificate: None,
            failed_stage: Some("teichmuller_matrix_limit".into()),
            error: Some(msg.clone()),
            pipeline_trace: trace,
        };
        return Ok(Outcome::fail(2, to_json(&rep), &format!("stage teichmuller_matrix_limit: {msg}")));
    };
    let js = mx::format(&o, &j);
    match fullness_with_trace(g, &j, cap) {
        Ok(cert) => {
            let report = cert.report();
            trace.extend(report.pipeline_trace.iter().cloned());
            let verified = cert.verified;
            let rep = FullnessReport {
                ring: ring.label(),
                group_order: g.order(),
                j: Some(js),
                j_source: source,
                certificate: Some(report),
                failed_stage: None,
                error: None,
                pipeline_trace: trace,
            };
            if verified {
                Ok(Outcome::ok(to_json(&rep)))
            } else {
                Ok(Outcome::fail(2, to_json(&rep), "certificate not verified"))
            }
        }
        Err(f) => {
            let stage = f.error.stage().map(str::to_string);
            trace.extend(f.pipeline_trace);
            let rep = FullnessReport {
                ring: ring.label(),
                group_order: g.order(),
                j: Some(js),
                j_source: source,
                certificate: None,
                failed_stage: stage.clone(),
                error: Some(f.error.to_string()),
                pipeline_trace: trace,
            };
            match stage {
                Some(s) => Ok(Outcome::fail(2, to_json(&rep), &format!("stage {s}: {}", f.error))),
                None => Ok(Outcome::fail(1, to_json(&rep), &f.error.to_string())),
            }
        }
    }
}

#[derive(Serialize)]
struct GoursatCase {
    automorphism: String,
    graph_order: usize,
    n1_order: usize,
    n2_order: usize,
    iso_recovered: bool,
    merzljakov_y: String,
    merzljakov_sigma: String,
    merzljakov_verified: bool,
}

pub fn goursat_report(g: &MatrixGroup, cap: u64) -> Result<(String, bool)> {
    let ring = &g.ring;
    let o = g.ops();
    let mut cases = Vec::new();
    let mut all_ok = true;
    for sigma in ring_automorphisms(ring, cap as u128)? {
        let st = sigma_table(&o, &sigma);
        let image = enumerate_subgroup(ring, &g.elements.iter().map(|x| apply_entrywise(&st, x)).collect::<Vec<_>>(), cap_usize(cap))?;
        if image != *g {
            return Err(IflError::BadInput(format!("automorphism {} does not preserve the group", sigma.label)));
        }
        let graph = ProductSubgroup::graph(g, g, |x| apply_entrywise(&st, x), cap_usize(cap))?;
        let res = goursat(&graph)?;
        let iso = res.iso.clone().unwrap_or_default();
        let recovered = res.iso.is_some()
            && iso.len() == g.order()
            && iso.iter().all(|(x, y)| *y == apply_entrywise(&st, x));
        let m = merzljakov_search(ring, &iso, cap as u128)?;
        let verified = merzljakov_verify(ring, &iso, &m.eta, &m.y, &m.sigma)?;
        let ok = recovered && verified && res.n1.order() == 1 && res.n2.order() == 1;
        all_ok &= ok;
        cases.push(GoursatCase {
            automorphism: sigma.label.clone(),
            graph_order: graph.order(),
            n1_order: res.n1.order(),
            n2_order: res.n2.order(),
            iso_recovered: recovered,
            merzljakov_y: mx::format(&o, &m.y),
            merzljakov_sigma: m.sigma.label.clone(),
            merzljakov_verified: verified,
        });
    }
    #[derive(Serialize)]
    struct R {
        ring: String,
        group_order: usize,
        cases: Vec<GoursatCase>,
        all_recovered: bool,
    }
    Ok((to_json(&R { ring: ring.label(), group_order: g.order(), cases, all_recovered: all_ok }), all_ok))
}

pub fn obstruction_report(example: &str) -> Result<String> {
    let (k, g, h, r) = match example {
        "s3" => s3_example()?,
        "q8" => q8_example()?,
        other => return Err(IflError::BadInput(format!("unknown example '{other}' (use s3 or q8)"))),
    };
    let o = k.ops()?;
    let ob = obstruction_class(&k, &g, &h, &r)?;
    let brute = exhaustive_extensions(&k, &g, &h, &r)?;
    let ext = if ob.vanishes() { Some(extend_rep(&k, &g, &r, &ob)?) } else { None };
    #[derive(Serialize)]
    struct R {
        example: String,
        field: String,
        group_order: usize,
        subgroup_order: usize,
        obstruction: crate::group_theory::obstruction::ObstructionReport,
        extensions_constructed: usize,
        extension_trace_classes: usize,
        exhaustive_extension_count: usize,
        consistent: bool,
    }
    let constructed = ext.as_ref().map(|e| e.maps.len()).unwrap_or(0);
    let consistent = ob.vanishes() == !brute.is_empty()
        && ext.as_ref().map(|e| e.maps.iter().all(|m| brute.contains(m))).unwrap_or(true);
    Ok(to_json(&R {
        example: example.to_string(),
        field: k.label(),
        group_order: g.order(),
        subgroup_order: h.len(),
        obstruction: ob.report(&o),
        extensions_constructed: constructed,
        extension_trace_classes: ext.as_ref().map(|e| e.trace_classes).unwrap_or(0),
        exhaustive_extension_count: brute.len(),
        consistent,
    }))
}

pub fn parse_eta_spec(s: &str) -> Result<Vec<(u64, i64)>> {
    s.split(',')
        .map(|t| {
            let (d, e) = t.trim().split_once(':').ok_or_else(|| IflError::Parse(format!("eta factor '{t}' is not d:e")))?;
            Ok((
                d.trim().parse().map_err(|_| IflError::Parse(format!("bad d in '{t}'")))?,
                e.trim().parse().map_err(|_| IflError::Parse(format!("bad exponent in '{t}'")))?,
            ))
        })
        .collect()
}

pub fn load_form(src: &FormSource) -> Result<QExpansion> {
    match (&src.qexp, &src.eta) {
        (Some(p), _) => QExpansion::parse_csv(&read_text(p)?),
        (None, Some(e)) => eta_product_expand(&parse_eta_spec(e)?, src.precision),
        (None, None) => Err(IflError::BadInput("give --qexp or --eta".into())),
    }
}

fn kronecker_primitive(d: i64) -> Result<DirichletCharacter> {
    let m = d.unsigned_abs().max(1);
    let m = if d.rem_euclid(4) == 1 || d % 4 == 0 { m } else { 4 * m };
    Ok(DirichletCharacter::kronecker(d, m)?.primitive_part())
}

pub fn qexp_report(f: &QExpansion, a: &QexpArgs) -> Result<String> {
    let mut g = f.clone();
    let mut steps = Vec::new();
    for &l in &a.hecke {
        g = g.hecke_t(l)?;
        steps.push(format!("T({l}) -> precision {}", g.prec()));
    }
    if let Some(d) = a.twist {
        let eta = kronecker_primitive(d)?;
        let m = a.level.unwrap_or_else(|| crate::hecke::qexp::twist_level(&g.nebentypus, &eta, g.level));
        g = g.twist_map(&eta, m)?;
        steps.push(format!("twist by {} at level {m}", eta.label()));
    }
    if let Some(m) = a.fm {
        g = g.build_fm(m)?;
        steps.push(format!("f_M at level {m}"));
    }
    if a.csv {
        return Ok(g.to_csv());
    }
    #[derive(Serialize)]
    struct R {
        input: crate::hecke::qexp::QExpansionSummary,
        steps: Vec<String>,
        output: crate::hecke::qexp::QExpansionSummary,
    }
    Ok(to_json(&R { input: f.summary(a.show.min(f.prec())), steps, output: g.summary(a.show.min(g.prec())) }))
}

pub fn twist_report(f: &QExpansion, bound: u64, nprimes: usize, cap: u64) -> Result<String> {
    let primes: Vec<u64> = crate::arith::primes_up_to(f.prec() as u64).into_iter().take(nprimes).collect();
    let rep = detect_self_twists(f, bound, &primes, cap as u128)?;
    Ok(to_json(&rep))
}

fn finish(res: Result<(String, bool)>) -> Outcome {
    match res {
        Ok((r, true)) => Outcome::ok(r),
        Ok((r, false)) => Outcome::fail(2, r, "verification failed"),
        Err(e) => input_error(&e),
    }
}

pub fn dispatch(cli: &Cli) -> Outcome {
    let cap = cli.cap;
    if cap == 0 {
        return Outcome::fail(1, String::new(), "--cap must be positive");
    }
    let capu = cap_usize(cap);
    match &cli.command {
        Command::RingInfo(a) => finish(load_ring(&a.ring).and_then(|r| ring_info_report(&r, cap)).map(|s| (s, true))),
        Command::Pink(a) => finish(
            load_ring(&a.ring).and_then(|r| load_group(&r, &a.group, capu)).and_then(|g| pink_report(&g, a.depth, capu)),
        ),
        Command::Fullness(a) => {
            match load_ring(&a.ring)
                .and_then(|r| load_group(&r, &a.group, capu))
                .and_then(|g| fullness_report(&g, a.j.as_deref(), a.regular.as_deref(), capu))
            {
                Ok(o) => o,
                Err(e) => input_error(&e),
            }
        }
        Command::Goursat(a) => {
            finish(load_ring(&a.ring).and_then(|r| load_group(&r, &a.group, capu)).and_then(|g| goursat_report(&g, cap)))
        }
        Command::Obstruction(a) => finish(obstruction_report(&a.example).map(|s| (s, true))),
        Command::Qexp(a) => finish(load_form(&a.source).and_then(|f| qexp_report(&f, a)).map(|s| (s, true))),
        Command::TwistDetect(a) => {
            finish(load_form(&a.source).and_then(|f| twist_report(&f, a.bound, a.primes, cap)).map(|s| (s, true)))
        }
        Command::Selftest(a) => {
            let golden = match a.golden.as_ref().map(|p| read_text(p)) {
                Some(Err(e)) => return input_error(&e),
                Some(Ok(t)) => Some(t),
                None => None,
            };
            let results = crate::selftest::run_all(cap, golden.as_deref());
            let lines: String = results.iter().map(|r| format!("{}\n", r.line())).collect();
            let failed: Vec<String> =
                results.iter().filter(|r| r.status == crate::selftest::Status::Fail).map(|r| r.id.to_string()).collect();
            let mut out = Outcome::ok(lines);
            if !failed.is_empty() {
                out.code = 2;
                out.stderr = format!("error: failed criteria {}\n", failed.join(","));
            }
            out
        }
    }
}

/// Parse arguments, run inside a pool of `--workers` threads and write the report.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome::ok(e.to_string()),
                _ => {
                    let first = e.to_string().lines().next().unwrap_or("bad arguments").trim_start_matches("error: ").to_string();
                    Outcome::fail(1, String::new(), &first)
                }
            };
        }
    };
    if cli.workers == 0 {
        return Outcome::fail(1, String::new(), "--workers must be positive");
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build() {
        Ok(p) => p,
        Err(e) => return Outcome::fail(1, String::new(), &format!("thread pool: {e}")),
    };
    let mut out = pool.install(|| dispatch(&cli));
    if let Some(path) = &cli.out {
        if !out.report.is_empty() {
            if let Err(e) = std::fs::write(path, &out.report) {
                return Outcome::fail(1, String::new(), &format!("{}: {e}", path.display()));
            }
            out.report.clear();
        }
    }
    out
}
