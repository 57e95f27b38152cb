//! `apsq` — exact minimum distances between arithmetic progressions and
//! perfect squares, with regime classification, extremal-family certificates,
//! exponential-sum evaluation, and a deterministic sweep engine.
//!
//! Exit codes: 0 success, 1 verification/assertion failure (including
//! regime-mismatch errors), 2 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use apsq::analytic::{
    huxley_count_raw, huxley_hypotheses, huxley_lower_bound, huxley_verify, poisson_check,
    AnalyticSetup, HuxleySetup,
};
use apsq::delta::{delta, Algorithm, ProgressionParams};
use apsq::exactint::isqrt;
use apsq::expsums::{
    conjecture3_bound, gauss_sum_closed, gauss_sum_direct, salie_sum, GaussSumArgs, SalieParams,
};
use apsq::families::{certify_epsilons, family_instance, valid_n_range, verify_lower_bound};
use apsq::regimes::classify;
use apsq::sweep::{run_sweep, snapshot, GridSpec, SweepOptions, Task};
use apsq::{Nat, Result};

#[derive(Parser)]
#[command(
    name = "apsq",
    version,
    about = "Distances between arithmetic progressions and perfect squares",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact δ(a,d,N) with its witness (n*, m*).
    Delta(DeltaArgs),
    /// Which theorem/conjecture hypotheses (a,d,N) satisfies, decided exactly.
    Classify(ClassifyArgs),
    /// The extremal family member at (d′, X): parameters, δ, certificates.
    Family(FamilyArgs),
    /// Twisted incomplete Salié sum and its conjectured bound.
    Salie(SalieArgs),
    /// Complete quadratic Gauss sum, direct and closed-form.
    Gauss(GaussArgs),
    /// Count of integer points near a curve vs the proven lower bound.
    Huxley(HuxleyArgs),
    /// Truncated Poisson identity check with explicit tail bound.
    Poisson(PoissonArgs),
    /// Deterministic parallel sweep over a parameter grid.
    Sweep(SweepArgs),
    /// Record or check the ratio maxima of a grid.
    Snapshot(SnapshotArgs),
}

fn nat_arg(s: &str) -> std::result::Result<Nat, String> {
    s.parse::<Nat>()
        .map_err(|_| format!("`{s}` is not a nonnegative integer"))
}

#[derive(Args)]
struct DeltaArgs {
    #[arg(long, value_parser = nat_arg)]
    a: Nat,
    #[arg(long, value_parser = nat_arg)]
    d: Nat,
    #[arg(long = "N", value_parser = nat_arg)]
    n: Nat,
    /// Emit a JSON object instead of key=value text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, value_parser = nat_arg)]
    a: Nat,
    #[arg(long, value_parser = nat_arg)]
    d: Nat,
    #[arg(long = "N", value_parser = nat_arg)]
    n: Nat,
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long, value_parser = nat_arg)]
    dprime: Nat,
    #[arg(long, value_parser = nat_arg)]
    x: Nat,
    /// Progression length N to evaluate δ over.
    #[arg(long, value_parser = nat_arg, conflicts_with = "scan_n")]
    n: Option<Nat>,
    /// Check the certified lower bound 1800·δ ≥ d at --n.
    #[arg(long, requires = "n")]
    verify: bool,
    /// Evaluate every N in the valid range 25N²d ≤ a ≤ N²d².
    #[arg(long)]
    scan_n: bool,
}

#[derive(Args)]
struct SalieArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    a: u64,
    #[arg(long = "H")]
    h: u64,
    #[arg(long = "K")]
    k: u64,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    /// Exponent ε in the q^ε factor of the bound.
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
}

#[derive(Args)]
struct GaussArgs {
    #[arg(long, allow_hyphen_values = true)]
    a: i64,
    #[arg(long, allow_hyphen_values = true)]
    b: i64,
    #[arg(long)]
    q: u64,
}

#[derive(Copy, Clone, ValueEnum)]
enum CurveArg {
    Parabola,
    Root,
}

#[derive(Args)]
struct HuxleyArgs {
    #[arg(long, value_enum)]
    curve: CurveArg,
    #[arg(long, value_parser = nat_arg)]
    a: Nat,
    #[arg(long, value_parser = nat_arg)]
    d: Nat,
    /// Progression length; the parabola interval is [√a, √(a+nd)], the root
    /// interval [0, n].
    #[arg(long, value_parser = nat_arg)]
    n: Nat,
    #[arg(long)]
    eps: f64,
}

#[derive(Args)]
struct PoissonArgs {
    #[arg(long, value_parser = nat_arg)]
    a: Nat,
    #[arg(long, value_parser = nat_arg)]
    d: Nat,
    /// Window half-width M.
    #[arg(long, value_parser = nat_arg)]
    m_window: Nat,
    /// Fourier frequency of the inner sum.
    #[arg(long, allow_hyphen_values = true)]
    h: i64,
    #[arg(long)]
    kmax: u64,
    /// Window center A (default ⌊√a⌋).
    #[arg(long, value_parser = nat_arg)]
    a_center: Option<Nat>,
    /// Detector width Δ ∈ (0, 1/2).
    #[arg(long, default_value_t = 0.25)]
    threshold: f64,
}

#[derive(Args)]
struct SweepArgs {
    /// Grid description file.
    #[arg(long)]
    spec: PathBuf,
    /// Output file (CSV, or JSONL with --json).
    #[arg(long)]
    out: PathBuf,
    /// Worker count (default: APSQ_JOBS, else 1).
    #[arg(long)]
    jobs: Option<usize>,
    /// Checkpoint file for resumable runs.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Write JSONL instead of CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SnapshotArgs {
    /// Task the snapshot belongs to; must match the grid file.
    #[arg(long, value_parser = task_arg)]
    task: Task,
    /// Grid description file.
    #[arg(long)]
    grid: PathBuf,
    /// Record the current maxima.
    #[arg(long, conflicts_with = "check")]
    write: bool,
    /// Compare against the recorded maxima (the default).
    #[arg(long)]
    check: bool,
    /// Snapshot path (default snapshots/<task>.json).
    #[arg(long)]
    file: Option<PathBuf>,
    /// Worker count (default: APSQ_JOBS, else 1).
    #[arg(long)]
    jobs: Option<usize>,
}

fn task_arg(s: &str) -> std::result::Result<Task, String> {
    s.parse::<Task>().map_err(|e| e.to_string())
}

fn default_jobs() -> usize {
    std::env::var("APSQ_JOBS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&j| j >= 1)
        .unwrap_or(1)
}

fn algorithm_name(alg: Algorithm) -> &'static str {
    match alg {
        Algorithm::TermScan => "term_scan",
        Algorithm::SquareScan => "square_scan",
    }
}

fn main() -> ExitCode {
    // The Rust runtime masks SIGPIPE, turning `apsq … | head` into a panic
    // inside println!; restore the default disposition so truncated pipes
    // end the process quietly like any other Unix tool.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }

    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Cmd) -> Result<u8> {
    match cmd {
        Cmd::Delta(args) => cmd_delta(args),
        Cmd::Classify(args) => cmd_classify(args),
        Cmd::Family(args) => cmd_family(args),
        Cmd::Salie(args) => cmd_salie(args),
        Cmd::Gauss(args) => cmd_gauss(args),
        Cmd::Huxley(args) => cmd_huxley(args),
        Cmd::Poisson(args) => cmd_poisson(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Snapshot(args) => cmd_snapshot(args),
    }
}

fn cmd_delta(args: DeltaArgs) -> Result<u8> {
    let p = ProgressionParams::new(args.a, args.d, args.n)?;
    let dv = delta(&p);
    if args.json {
        println!(
            "{{\"a\":\"{}\",\"d\":\"{}\",\"N\":\"{}\",\"delta\":\"{}\",\"n\":\"{}\",\"m\":\"{}\",\"algorithm\":\"{}\"}}",
            p.a, p.d, p.n, dv.delta, dv.n_star, dv.m_star, algorithm_name(dv.algorithm)
        );
    } else {
        println!("delta={} n={} m={}", dv.delta, dv.n_star, dv.m_star);
    }
    Ok(0)
}

fn cmd_classify(args: ClassifyArgs) -> Result<u8> {
    let p = ProgressionParams::new(args.a, args.d, args.n)?;
    let rep = classify(&p);
    println!(
        "admissible={} contains_square={} m_upper={} conj1={} conj2={} thm1={} thm1_boundary={} thm2={} note_range={}",
        rep.admissible,
        rep.contains_square,
        rep.m_upper,
        rep.conj1_applicable,
        rep.conj2_applicable,
        rep.thm1_case,
        rep.thm1_boundary,
        rep.thm2_case,
        rep.note_range
    );
    Ok(0)
}

fn cmd_family(args: FamilyArgs) -> Result<u8> {
    if args.scan_n {
        let probe = family_instance(&args.dprime, &args.x, &Nat::from(1u32))?;
        print!("d={} a={}", probe.d, probe.a);
        let Some((lo, hi)) = valid_n_range(&probe) else {
            println!(" valid_N=none");
            return Ok(0);
        };
        println!(" valid_N={lo}..{hi}");
        let mut failures = 0u32;
        let mut n = lo;
        while n <= hi {
            let inst = family_instance(&args.dprime, &args.x, &n)?;
            let dv = delta(&inst.progression());
            let bound_ok = verify_lower_bound(&inst, &n)?;
            let eps_ok = certify_epsilons(&inst).all_ok();
            println!(
                "N={} delta={} bound_ok={} eps_ok={}",
                n, dv.delta, bound_ok, eps_ok
            );
            if !bound_ok || !eps_ok {
                failures += 1;
            }
            n += 1u32;
        }
        return Ok(if failures == 0 { 0 } else { 1 });
    }

    let n = args.n.clone().unwrap_or_else(|| Nat::from(1u32));
    let inst = family_instance(&args.dprime, &args.x, &n)?;
    let mut line = format!("d={} a={}", inst.d, inst.a);
    let mut ok = true;
    if args.n.is_some() {
        let dv = delta(&inst.progression());
        line.push_str(&format!(" delta={}", dv.delta));
        if args.verify {
            let bound_ok = verify_lower_bound(&inst, &n)?;
            line.push_str(&format!(" bound_ok={bound_ok}"));
            ok = bound_ok;
        }
    }
    println!("{line}");
    Ok(if ok { 0 } else { 1 })
}

fn cmd_salie(args: SalieArgs) -> Result<u8> {
    let params = SalieParams::new(
        args.a,
        args.q,
        args.h,
        args.k,
        args.lambda,
        args.mu,
        args.epsilon,
    )?;
    let sum = salie_sum(&params)?;
    let bound = conjecture3_bound(&params);
    println!(
        "abs_sum={:.12e} bound={:.12e} ratio={:.12e}",
        sum.abs(),
        bound,
        sum.abs() / bound
    );
    Ok(0)
}

fn cmd_gauss(args: GaussArgs) -> Result<u8> {
    let g = GaussSumArgs::new(args.a, args.b, args.q)?;
    let direct = gauss_sum_direct(&g);
    let mut line = format!(
        "re={:.12e} im={:.12e} abs={:.12e}",
        direct.re,
        direct.im,
        direct.abs()
    );
    let mut ok = true;
    if let Ok(closed) = gauss_sum_closed(&g) {
        let diff = ((direct.re - closed.re).powi(2) + (direct.im - closed.im).powi(2)).sqrt();
        let tol = direct.abs_error_bound + closed.abs_error_bound + 1e-9;
        ok = diff <= tol;
        line.push_str(&format!(
            " closed_re={:.12e} closed_im={:.12e} closed_ok={ok}",
            closed.re, closed.im
        ));
    }
    println!("{line}");
    Ok(if ok { 0 } else { 1 })
}

fn cmd_huxley(args: HuxleyArgs) -> Result<u8> {
    let p = ProgressionParams::new(args.a, args.d, args.n)?;
    let setup = match args.curve {
        CurveArg::Parabola => HuxleySetup::parabola_for(&p, args.eps)?,
        CurveArg::Root => HuxleySetup::root_for(&p, args.eps)?,
    };
    huxley_hypotheses(&setup)?;
    let count = huxley_count_raw(&setup)?;
    let bound = huxley_lower_bound(&setup);
    let ok = huxley_verify(&setup)?;
    println!(
        "curve={} M={} C={} Delta={:.12e} eps={} count={} lower_bound={:.12e} ok={}",
        setup.curve,
        setup.m_count(),
        setup.c_param(),
        setup.delta_f64(),
        setup.eps,
        count,
        bound,
        ok
    );
    Ok(if ok { 0 } else { 1 })
}

fn cmd_poisson(args: PoissonArgs) -> Result<u8> {
    let a_center = args.a_center.unwrap_or_else(|| isqrt(&args.a));
    let setup = AnalyticSetup::explicit(args.a, args.d, a_center, args.m_window, args.threshold)?;
    let chk = poisson_check(&setup, args.h, args.kmax)?;
    let ok = chk.ok(1e-8);
    println!(
        "A={} M={} lhs_re={:.12e} lhs_im={:.12e} rhs_re={:.12e} rhs_im={:.12e} abs_diff={:.3e} tail_bound={:.3e} ok={}",
        setup.a_center,
        setup.m_window,
        chk.lhs.re,
        chk.lhs.im,
        chk.rhs.re,
        chk.rhs.im,
        chk.abs_diff(),
        chk.tail_bound,
        ok
    );
    Ok(if ok { 0 } else { 1 })
}

fn cmd_sweep(args: SweepArgs) -> Result<u8> {
    let spec = GridSpec::from_path(&args.spec)?;
    let opts = SweepOptions {
        jobs: args.jobs.unwrap_or_else(default_jobs),
        json: args.json,
        checkpoint: args.checkpoint,
        block_limit: None,
    };
    let summary = run_sweep(&spec, Some(&args.out), &opts)?;
    println!(
        "task={} points={} rows={} bytes={} blocks={}/{} completed={}",
        summary.task,
        summary.total_points,
        summary.rows_written,
        summary.bytes_written,
        summary.blocks_done,
        summary.total_blocks,
        summary.completed
    );
    for m in &summary.maxima {
        let at: Vec<String> = m.argmax.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!("max[{}]={:.12e} at {}", m.case, m.max_ratio, at.join(","));
    }
    Ok(0)
}

fn cmd_snapshot(args: SnapshotArgs) -> Result<u8> {
    let spec = GridSpec::from_path(&args.grid)?;
    if spec.task != args.task {
        return Err(apsq::Error::InvalidArgument(format!(
            "--task {} does not match the grid file's task {}",
            args.task, spec.task
        )));
    }
    let jobs = args.jobs.unwrap_or_else(default_jobs);
    let path = args
        .file
        .unwrap_or_else(|| PathBuf::from(format!("snapshots/{}.json", args.task)));
    if args.write {
        let snap = snapshot::write_snapshot(&spec, jobs, &path)?;
        println!("wrote {} ({} cases)", path.display(), snap.maxima.len());
        for m in &snap.maxima {
            let at: Vec<String> = m.argmax.iter().map(|(k, v)| format!("{k}={v}")).collect();
            println!("max[{}]={:.12e} at {}", m.case, m.max_ratio, at.join(","));
        }
        Ok(0)
    } else {
        let check = snapshot::check_snapshot(&spec, jobs, &path)?;
        println!("{}", check.report);
        println!(
            "snapshot {}: {}",
            path.display(),
            if check.ok { "ok" } else { "MISMATCH" }
        );
        Ok(if check.ok { 0 } else { 1 })
    }
}
