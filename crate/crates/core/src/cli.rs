//! Command-line front end: convergence tables, the self-check suite and the
//! FitzHugh-Nagumo driver.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 a check failed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::frac_ops::{build_frac_operator, riesz_coefficients};
use crate::grid::{DomainSpec, Field2D, Grid2D};
use crate::output::{
    csv_string, fmt_rate, write_manifest, write_snapshot_file, CsvRow, SnapshotHeader,
};
use crate::problems::{FhnParams, FhnSimulation, ManufacturedProblem};
use crate::stepper::SigmaSchedule;
use crate::verify::{
    convergence_study, operator_property_suite, oracle_step_check, truncation_order_probe,
    validate_ladder, ConvergenceReport, LadderMode, Level, ProbeKind, DEFAULT_SEED,
    ORACLE_MAX_UNKNOWNS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_CHECK: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(Error),
    #[error("{0} check(s) failed")]
    CheckFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::CheckFailed(_) => EXIT_CHECK,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFinite { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::MissingHistory(_) => CliError::Numerical(e),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fracadi",
    version,
    about = "Compact ADI solver for 2D space-fractional reaction-diffusion"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error/order tables on the manufactured benchmark.
    Convergence(ConvergenceArgs),
    /// Operator properties, ADI-versus-dense oracle and truncation probes.
    Check(CheckArgs),
    /// FitzHugh-Nagumo simulation with snapshot export.
    Fhn(FhnArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Spatial,
    Temporal,
    Joint,
}

impl From<ModeArg> for LadderMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Spatial => LadderMode::Spatial,
            ModeArg::Temporal => LadderMode::Temporal,
            ModeArg::Joint => LadderMode::Joint,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ConvergenceArgs {
    /// table-4.1 | table-4.2 | table-4.3 | table-4.4
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, conflicts_with = "preset")]
    pub alpha: Option<f64>,
    #[arg(long, conflicts_with = "preset")]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub kappa1: f64,
    #[arg(long, default_value_t = 4.0)]
    pub kappa2: f64,
    #[arg(long, value_enum, default_value = "spatial")]
    pub mode: ModeArg,
    /// Comma-separated `M:N` pairs, e.g. `8:64,16:256`.
    #[arg(long)]
    pub levels: Option<String>,
    /// CSV destination; the CSV goes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Interior size per axis of the dense oracle.
    #[arg(long, default_value_t = 7)]
    pub oracle_size: usize,
    /// Random fields per property.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FhnPreset {
    /// M=50, N=200, T=100
    Desk,
    /// M=200, N=2000, T=1000
    #[value(alias = "paper")]
    Full,
}

#[derive(Debug, Clone, Args)]
pub struct FhnArgs {
    #[arg(long, value_enum, default_value = "desk")]
    pub preset: FhnPreset,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Sets both diffusion coefficients.
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Steps between snapshots (default: only the initial and final states).
    #[arg(long)]
    pub snapshot_every: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the recovery variable.
    #[arg(long)]
    pub write_w: bool,
    /// Start from u = w = 0 instead of the standard excitation.
    #[arg(long)]
    pub zero_initial: bool,
    #[arg(long)]
    pub workers: Option<usize>,
}

/// A named convergence ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub mode: LadderMode,
    pub kappa1: f64,
    pub kappa2: f64,
    pub pairs: Vec<(f64, f64)>,
    pub levels: Vec<Level>,
}

fn levels(pairs: &[(usize, usize)]) -> Vec<Level> {
    pairs.iter().map(|&(m, steps)| Level { m, steps }).collect()
}

pub fn preset(name: &str) -> Option<Preset> {
    let p = match name {
        "table-4.1" => Preset {
            name: "table-4.1",
            mode: LadderMode::Spatial,
            kappa1: 2.0,
            kappa2: 4.0,
            pairs: vec![(1.1, 1.5), (1.3, 1.7), (1.5, 1.9), (1.8, 1.8)],
            levels: levels(&[(8, 64), (16, 256), (32, 1024), (64, 4096)]),
        },
        "table-4.2" => Preset {
            name: "table-4.2",
            mode: LadderMode::Temporal,
            kappa1: 2.0,
            kappa2: 4.0,
            pairs: vec![(1.1, 1.5), (1.3, 1.7), (1.5, 1.9), (1.8, 1.8)],
            levels: levels(&[(200, 10), (200, 20), (200, 40), (200, 80)]),
        },
        "table-4.3" => Preset {
            name: "table-4.3",
            mode: LadderMode::Joint,
            kappa1: 0.5,
            kappa2: 0.5,
            pairs: vec![(1.1, 1.1), (1.5, 1.5), (1.9, 1.9)],
            levels: levels(&[(40, 40), (80, 80), (160, 160), (320, 320)]),
        },
        "table-4.4" => Preset {
            name: "table-4.4",
            mode: LadderMode::Spatial,
            kappa1: 1.5,
            kappa2: 1.5,
            pairs: vec![(1.1, 1.1), (1.5, 1.5), (1.9, 1.9)],
            levels: levels(&[(5, 25), (10, 100), (20, 400), (40, 1600)]),
        },
        _ => return None,
    };
    Some(p)
}

pub const PRESET_NAMES: [&str; 4] = ["table-4.1", "table-4.2", "table-4.3", "table-4.4"];

/// Parses `M:N,M:N,...`.
pub fn parse_levels(s: &str) -> Result<Vec<Level>, CliError> {
    s.split(',')
        .map(|item| {
            let (m, n) = item
                .trim()
                .split_once(':')
                .ok_or_else(|| CliError::Config(format!("level {item:?} is not M:N")))?;
            let parse = |v: &str| {
                v.trim().parse::<usize>().map_err(|_| {
                    CliError::Config(format!("level {item:?}: {v:?} is not an integer"))
                })
            };
            Ok(Level {
                m: parse(m)?,
                steps: parse(n)?,
            })
        })
        .collect()
}

/// Resolves a convergence invocation into a preset-shaped plan, validating it
/// before any compute.
pub fn convergence_plan(args: &ConvergenceArgs) -> Result<Preset, CliError> {
    let plan = match &args.preset {
        Some(name) => preset(name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown preset {name:?}; known: {}",
                PRESET_NAMES.join(", ")
            ))
        })?,
        None => {
            let (alpha, beta) = match (args.alpha, args.beta) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(CliError::Config(
                        "give --preset or both --alpha and --beta".into(),
                    ))
                }
            };
            let lv = args
                .levels
                .as_deref()
                .ok_or_else(|| CliError::Config("--levels is required without --preset".into()))?;
            Preset {
                name: "custom",
                mode: args.mode.into(),
                kappa1: args.kappa1,
                kappa2: args.kappa2,
                pairs: vec![(alpha, beta)],
                levels: parse_levels(lv)?,
            }
        }
    };
    validate_ladder(&plan.levels, plan.mode)?;
    for &(a, b) in &plan.pairs {
        DomainSpec::unit_square(a, b, plan.kappa1, plan.kappa2, 1.0)?;
    }
    Ok(plan)
}

/// Runs every `(alpha, beta)` ladder of the plan.
pub fn run_plan(plan: &Preset) -> Result<Vec<ConvergenceReport>, Error> {
    plan.pairs
        .iter()
        .map(|&(a, b)| {
            let problem = ManufacturedProblem::new(a, b, plan.kappa1, plan.kappa2);
            convergence_study(&problem, &plan.levels, plan.mode)
        })
        .collect()
}

pub fn report_rows(reports: &[ConvergenceReport]) -> Vec<CsvRow> {
    reports
        .iter()
        .flat_map(|r| r.rows.iter().map(CsvRow::from))
        .collect()
}

fn with_workers<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| CliError::Config(e.to_string()))?;
    pool.install(f)
}

pub fn cmd_convergence(args: &ConvergenceArgs) -> Result<(), CliError> {
    let plan = convergence_plan(args)?;
    let reports = with_workers(args.workers, || Ok(run_plan(&plan)?))?;
    for rep in &reports {
        for r in &rep.rows {
            eprintln!(
                "alpha={} beta={} M={} N={} wall={:.3}s",
                r.alpha, r.beta, r.m, r.steps, r.seconds
            );
        }
    }
    let rows = report_rows(&reports);
    let csv = csv_string(&rows)?;
    match &args.out {
        Some(path) => {
            fs::write(path, &csv)?;
            print_table(&rows);
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn print_table(rows: &[CsvRow]) {
    println!(
        "{:>5} {:>5} {:>10} {:>10} {:>12} {:>7} {:>12} {:>7}",
        "alpha", "beta", "h", "tau", "max", "rate", "l2", "rate"
    );
    for r in rows {
        println!(
            "{:>5} {:>5} {:>10.4e} {:>10.4e} {:>12.4e} {:>7} {:>12.4e} {:>7}",
            r.alpha,
            r.beta,
            r.h,
            r.tau,
            r.max_error,
            fmt_rate(r.rate_max),
            r.l2_error,
            fmt_rate(r.rate_l2)
        );
    }
}

/// One line of the check report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn line(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> CheckLine {
    CheckLine {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

/// Oracle tolerance on the ADI-versus-dense max difference.
pub const ORACLE_TOLERANCE: f64 = 1e-12;

/// Runs the full self-check suite and returns one line per item.
pub fn run_checks(args: &CheckArgs) -> Result<Vec<CheckLine>, CliError> {
    let n = args.oracle_size;
    if n == 0 || n * n > ORACLE_MAX_UNKNOWNS {
        return Err(CliError::Config(format!(
            "oracle size {n}x{n} = {} unknowns exceeds the dense limit of {ORACLE_MAX_UNKNOWNS}",
            n * n
        )));
    }
    let mut out = Vec::new();

    // coefficients
    let c2 = riesz_coefficients(2.0, 8)?;
    out.push(line(
        "coefficients: classical limit [2, -1, 0, ...]",
        c2.g[0] == 2.0 && c2.g[1] == -1.0 && c2.g[2..].iter().all(|&g| g == 0.0),
        format!("{:?}", &c2.g[..4]),
    ));
    for gamma in [1.1, 1.5, 1.9] {
        let c = riesz_coefficients(gamma, 1000)?;
        let sym = (1..=1000).all(|k| c.at(k) == c.at(-k));
        let rec = (1..=1000).all(|k| {
            let want = (1.0 - (gamma + 1.0) / (gamma / 2.0 + k as f64)) * c.g[k - 1];
            c.g[k] == want
        });
        let signs = c.g[0] > 0.0 && c.g[1..].iter().all(|&g| g < 0.0);
        out.push(line(
            format!("coefficients: symmetry, recurrence, signs (gamma={gamma}, K=1000)"),
            sym && rec && signs,
            format!("g0={:e} g1000={:e}", c.g[0], c.g[1000]),
        ));
    }
    let lap = build_frac_operator(2.0, 1.0, 0.25, 3)?;
    let classical = lap.toeplitz_col == [-32.0, 16.0, 0.0];
    out.push(line(
        "operator: classical Laplacian limit",
        classical,
        format!("{:?}", lap.toeplitz_col),
    ));

    // operator properties
    for (alpha, beta) in [(1.5, 1.5), (1.1, 1.9), (1.9, 1.1)] {
        let domain = DomainSpec::unit_square(alpha, beta, 1.0, 1.0, 1.0)?;
        let grid = Grid2D::new(&domain, 16, 16)?;
        let rep = operator_property_suite(&domain, &grid, args.samples, args.seed)?;
        for item in rep.items {
            out.push(line(
                format!("property (alpha={alpha}, beta={beta}): {}", item.name),
                item.passed,
                format!(
                    "worst margin {:e} over {} fields",
                    item.worst_margin, rep.samples
                ),
            ));
        }
    }

    // oracle
    for alpha in [1.1, 1.5, 1.9] {
        for beta in [1.1, 1.5, 1.9] {
            for schedule in [SigmaSchedule::First, SigmaSchedule::Bdf2] {
                let r = oracle_step_check(alpha, beta, schedule, n, 0.05, args.seed)?;
                out.push(line(
                    format!(
                        "oracle {n}x{n} (alpha={alpha}, beta={beta}, sigma={:.4})",
                        r.sigma
                    ),
                    r.max_diff <= ORACLE_TOLERANCE,
                    format!("max diff {:e}", r.max_diff),
                ));
            }
        }
    }

    // truncation probes
    let bands = [
        (ProbeKind::Bdf2Interior, 1.5, 1.9..=2.1),
        (ProbeKind::Bdf2FirstStep, 1.5, 0.9..=1.1),
        (ProbeKind::CompactSpace, 1.1, 3.8..=4.2),
        (ProbeKind::CompactSpace, 1.5, 3.8..=4.2),
        (ProbeKind::CompactSpace, 1.9, 3.8..=4.2),
    ];
    for (kind, gamma, band) in bands {
        let p = truncation_order_probe(kind, gamma)?;
        let name = match kind {
            ProbeKind::CompactSpace => format!("probe {kind:?} (gamma={gamma})"),
            _ => format!("probe {kind:?}"),
        };
        out.push(line(
            name,
            band.contains(&p.slope),
            format!("slope {:.3} in [{}, {}]", p.slope, band.start(), band.end()),
        ));
    }
    Ok(out)
}

pub fn cmd_check(args: &CheckArgs) -> Result<(), CliError> {
    let lines = with_workers(args.workers, || run_checks(args))?;
    let mut failed = 0;
    for l in &lines {
        println!(
            "{} {}: {}",
            if l.passed { "PASS" } else { "FAIL" },
            l.name,
            l.detail
        );
        failed += usize::from(!l.passed);
    }
    println!("{} passed, {} failed", lines.len() - failed, failed);
    if failed > 0 {
        return Err(CliError::CheckFailed(failed));
    }
    Ok(())
}

/// Resolved FitzHugh-Nagumo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FhnConfig {
    pub m: usize,
    pub steps: usize,
    pub t_final: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub snapshot_every: usize,
    pub write_w: bool,
    pub zero_initial: bool,
    pub params: FhnParams,
}

pub fn fhn_config(args: &FhnArgs) -> Result<FhnConfig, CliError> {
    let (m, steps, t_final) = match args.preset {
        FhnPreset::Desk => (50, 200, 100.0),
        FhnPreset::Full => (200, 2000, 1000.0),
    };
    let steps = args.n.unwrap_or(steps);
    let kappa = args.kappa.unwrap_or(1e-4);
    let cfg = FhnConfig {
        m: args.m.unwrap_or(m),
        steps,
        t_final: args.t_final.unwrap_or(t_final),
        kappa1: kappa,
        kappa2: kappa,
        alpha: args.alpha.unwrap_or(1.7),
        beta: args.beta.unwrap_or(1.7),
        snapshot_every: args.snapshot_every.unwrap_or(steps),
        write_w: args.write_w,
        zero_initial: args.zero_initial,
        params: FhnParams::default(),
    };
    if cfg.snapshot_every == 0 {
        return Err(CliError::Config(
            "--snapshot-every must be at least 1".into(),
        ));
    }
    if cfg.m < 2 || cfg.steps == 0 {
        return Err(CliError::Config("need --m >= 2 and --n >= 1".into()));
    }
    DomainSpec::unit_square(cfg.alpha, cfg.beta, cfg.kappa1, cfg.kappa2, cfg.t_final)?;
    Ok(cfg)
}

/// Steps at which a snapshot is written: 0, every multiple of the cadence,
/// and the final step.
pub fn snapshot_steps(steps: usize, every: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..=steps).step_by(every.max(1)).collect();
    if v.last() != Some(&steps) {
        v.push(steps);
    }
    v
}

#[derive(Debug, Clone, Serialize)]
struct SnapshotEntry {
    step: usize,
    t: f64,
    u: String,
    w: Option<String>,
    u_max_abs: f64,
}

#[derive(Debug, Clone, Serialize)]
struct FhnManifest {
    program: &'static str,
    version: &'static str,
    domain: [f64; 4],
    config: FhnConfig,
    tau: f64,
    snapshots: Vec<SnapshotEntry>,
}

/// Runs the simulation and writes snapshots plus `manifest.json` into `out`.
/// Returns the number of snapshots written.
pub fn run_fhn(cfg: &FhnConfig, out: &Path) -> Result<usize, CliError> {
    fs::create_dir_all(out)?;
    let initial = if cfg.zero_initial {
        let n = cfg.m - 1;
        Some((Field2D::zeros(n, n), Field2D::zeros(n, n)))
    } else {
        None
    };
    let mut sim = FhnSimulation::new(
        cfg.alpha,
        cfg.beta,
        cfg.kappa1,
        cfg.kappa2,
        cfg.m,
        cfg.steps,
        cfg.t_final,
        cfg.params,
        initial,
    )?;
    let wanted = snapshot_steps(cfg.steps, cfg.snapshot_every);
    let mut entries = Vec::with_capacity(wanted.len());
    let mut write = |sim: &FhnSimulation, n: usize| -> Result<(), CliError> {
        let t = sim.time.t(n);
        let (u, w) = sim.fields();
        let header = SnapshotHeader {
            m1: cfg.m,
            m2: cfg.m,
            t,
            alpha: cfg.alpha,
            beta: cfg.beta,
        };
        let u_name = format!("u_{n:06}.txt");
        write_snapshot_file(&out.join(&u_name), &header, u, &sim.grid)?;
        let w_name = if cfg.write_w {
            let name = format!("w_{n:06}.txt");
            write_snapshot_file(&out.join(&name), &header, w, &sim.grid)?;
            Some(name)
        } else {
            None
        };
        entries.push(SnapshotEntry {
            step: n,
            t,
            u: u_name,
            w: w_name,
            u_max_abs: u.max_abs(),
        });
        Ok(())
    };
    let mut next = wanted.iter().copied().peekable();
    if next.peek() == Some(&0) {
        write(&sim, 0)?;
        next.next();
    }
    while sim.next_step() <= cfg.steps {
        let n = sim.next_step();
        sim.step()?;
        if next.peek() == Some(&n) {
            write(&sim, n)?;
            next.next();
        }
    }
    let count = entries.len();
    let manifest = FhnManifest {
        program: "fracadi fhn",
        version: env!("CARGO_PKG_VERSION"),
        domain: [sim.domain.a, sim.domain.b, sim.domain.c, sim.domain.d],
        config: *cfg,
        tau: sim.time.tau,
        snapshots: entries,
    };
    write_manifest(&out.join("manifest.json"), &manifest)?;
    Ok(count)
}

pub fn cmd_fhn(args: &FhnArgs) -> Result<(), CliError> {
    let cfg = fhn_config(args)?;
    let count = with_workers(args.workers, || run_fhn(&cfg, &args.out))?;
    println!("wrote {count} snapshot(s) to {}", args.out.display());
    Ok(())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Convergence(a) => cmd_convergence(a),
        Command::Check(a) => cmd_check(a),
        Command::Fhn(a) => cmd_fhn(a),
    }
}

/// Parses `args`, runs the command, reports errors and wall time on stderr,
/// and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let start = Instant::now();
    let result = run(&cli);
    let _ = std::io::stdout().flush();
    eprintln!("wall time {:.3}s", start.elapsed().as_secs_f64());
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conv(extra: &[&str]) -> ConvergenceArgs {
        let mut argv = vec!["fracadi", "convergence"];
        argv.extend_from_slice(extra);
        match Cli::try_parse_from(argv).unwrap().command {
            Command::Convergence(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn presets_are_valid_ladders() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            assert!(validate_ladder(&p.levels, p.mode).is_ok(), "{name}");
        }
        assert!(preset("table-9").is_none());
    }

    #[test]
    fn level_parsing() {
        assert_eq!(
            parse_levels("8:64, 16:256").unwrap(),
            vec![Level { m: 8, steps: 64 }, Level { m: 16, steps: 256 }]
        );
        assert!(parse_levels("8-64").is_err());
        assert!(parse_levels("8:x").is_err());
    }

    #[test]
    fn plan_resolution() {
        let p = convergence_plan(&conv(&["--preset", "table-4.2"])).unwrap();
        assert_eq!(p.mode, LadderMode::Temporal);
        let e = convergence_plan(&conv(&["--preset", "nope"])).unwrap_err();
        assert_eq!(e.exit_code(), EXIT_CONFIG);
        let e = convergence_plan(&conv(&["--alpha", "1.5", "--beta", "1.5"])).unwrap_err();
        assert_eq!(e.exit_code(), EXIT_CONFIG);
        let e = convergence_plan(&conv(&[
            "--alpha", "2.5", "--beta", "1.5", "--levels", "4:4,8:16",
        ]))
        .unwrap_err();
        assert_eq!(e.exit_code(), EXIT_CONFIG);
        let e = convergence_plan(&conv(&[
            "--alpha", "1.5", "--beta", "1.5", "--levels", "4:4,8:8",
        ]))
        .unwrap_err();
        assert_eq!(e.exit_code(), EXIT_CONFIG);
        let ok = convergence_plan(&conv(&[
            "--alpha", "1.5", "--beta", "1.5", "--mode", "joint", "--levels", "4:4,8:8",
        ]))
        .unwrap();
        assert_eq!(ok.pairs, vec![(1.5, 1.5)]);
    }

    #[test]
    fn error_classification() {
        let num: CliError = Error::NonFinite {
            step: 3,
            x: 0.0,
            y: 0.0,
        }
        .into();
        assert_eq!(num.exit_code(), EXIT_NUMERICAL);
        let cfg: CliError = Error::InvalidParameter("x".into()).into();
        assert_eq!(cfg.exit_code(), EXIT_CONFIG);
        assert_eq!(CliError::CheckFailed(1).exit_code(), EXIT_CHECK);
    }

    #[test]
    fn snapshot_schedule() {
        assert_eq!(snapshot_steps(10, 5), vec![0, 5, 10]);
        assert_eq!(snapshot_steps(10, 4), vec![0, 4, 8, 10]);
        assert_eq!(snapshot_steps(3, 3), vec![0, 3]);
        assert_eq!(snapshot_steps(3, 100), vec![0, 3]);
    }
}
