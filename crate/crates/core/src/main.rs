//! `lifshitz`: IDS simulation and bound verification for the 1D
//! Anderson-Bernoulli operator.
//!
//! Exit codes: 0 success, 1 invalid input, 2 a verified bound failed,
//! 3 oracle or I/O failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use lifshitz::bounds::BoundsCurve;
use lifshitz::cli::{
    bounds_csv, intervals_csv, load_experiment_config, parse_eps_grid, sandwich_csv,
    simulate_csv, spectrum_csv, RunManifest,
};
use lifshitz::experiments::{
    estimate_dos, run_length_experiment, theorem21_audit, verify_sandwich, Ensemble,
    ExperimentConfig,
};
use lifshitz::model::{ModelParams, PotentialRealization, TridiagonalOperator};
use lifshitz::spectral::{dense_spectrum_with_limit, lowest_eigenvalues, DEFAULT_ORACLE_LIMIT};
use lifshitz::Error;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "lifshitz",
    version,
    about = "Integrated density of states and Lifshitz-tail bound checks \
             for the 1D Anderson-Bernoulli operator"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Worker threads for realization-level parallelism
    #[arg(long, global = true, env = "SIM_WORKERS")]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate the IDS over an energy grid, with bound columns
    Simulate(SimArgs),
    /// Estimate the IDS and check it against the closed-form envelopes
    VerifyBounds(SimArgs),
    /// Check dense-oracle eigenvalues against the sine-mode bounds E_k <= U_k
    AuditTheorem21(AuditArgs),
    /// Longest-zero-run experiment against the 1 - e^{-y} law
    Intervals(IntervalsArgs),
    /// Lowest eigenvalues of a single sampled realization
    Spectrum(SpectrumArgs),
    /// Closed-form envelope table, no simulation
    Bounds(BoundsArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EnsembleArg {
    FixedL,
    FixedN,
}

impl From<EnsembleArg> for Ensemble {
    fn from(e: EnsembleArg) -> Ensemble {
        match e {
            EnsembleArg::FixedL => Ensemble::FixedL,
            EnsembleArg::FixedN => Ensemble::FixedN,
        }
    }
}

#[derive(Args)]
struct SimArgs {
    /// JSON config: a bare experiment config or a previous run's manifest
    #[arg(long)]
    config: Option<PathBuf>,
    /// Interior lattice sites
    #[arg(long = "L")]
    sites: Option<usize>,
    /// Probability of a zero-potential site
    #[arg(long)]
    p: Option<f64>,
    /// Potential height at occupied sites
    #[arg(long)]
    b: Option<f64>,
    /// Energy grid: comma list or lo:hi:n geometric
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    ensemble: Option<EnsembleArg>,
    /// Interval count for the fixed-n ensemble
    #[arg(long)]
    n: Option<usize>,
    /// Correction constant for the upper envelope
    #[arg(long = "C")]
    c_corr: Option<f64>,
    /// Data file; a sibling <out>.manifest.json records provenance
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long = "L", default_value_t = 500)]
    sites: usize,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 200)]
    realizations: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Largest size the dense oracle will factor
    #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
    oracle_limit: usize,
    /// Allowed slack in E_k <= U_k + tol
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct IntervalsArgs {
    /// Zero intervals per sample
    #[arg(long, default_value_t = 100_000)]
    n: u64,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long = "L", default_value_t = 100)]
    sites: usize,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Realization index within the seed's family
    #[arg(long, default_value_t = 0)]
    index: u64,
    /// How many of the lowest eigenvalues to report
    #[arg(short = 'k', long = "k", default_value_t = 10)]
    k: usize,
    /// Bisection tolerance
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Use the dense reference solver instead of bisection
    #[arg(long)]
    dense: bool,
    #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
    oracle_limit: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct BoundsArgs {
    /// Energy grid: comma list or lo:hi:n geometric
    #[arg(long, default_value = "0.01:1:16")]
    eps: String,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long = "C", default_value_t = 0.0)]
    c_corr: f64,
    /// Longest zero run for the finite-volume coefficient
    #[arg(long, conflicts_with = "sites")]
    ell0: Option<f64>,
    /// Derive ell0 as the typical longest run of an L-site lattice
    #[arg(long = "L")]
    sites: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap exits 2 for usage errors by default; this tool reserves
            // 2 for verification failures, so usage problems map to 1.
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::InvalidInput(_) | Error::OracleLimit { .. } => 1,
                Error::AuditFailure(_) => 2,
                Error::OracleFailure(_) | Error::Io(_) => 3,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.cmd {
        Cmd::Simulate(a) => cmd_simulate(a, cli.workers, false),
        Cmd::VerifyBounds(a) => cmd_simulate(a, cli.workers, true),
        Cmd::AuditTheorem21(a) => cmd_audit(a),
        Cmd::Intervals(a) => cmd_intervals(a),
        Cmd::Spectrum(a) => cmd_spectrum(a),
        Cmd::Bounds(a) => cmd_bounds(a),
    }
}

/// Writes `data` to --out (plus a manifest sibling) or to stdout (manifest
/// as one JSON line on stderr).
fn emit(out: &Option<PathBuf>, data: &str, mut manifest: RunManifest) -> Result<(), Error> {
    match out {
        Some(path) => {
            std::fs::write(path, data).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let mpath = PathBuf::from(format!("{}.manifest.json", path.display()));
            manifest.outputs = vec![path.display().to_string()];
            let text = serde_json::to_string_pretty(&manifest)?;
            std::fs::write(&mpath, text + "\n")
                .map_err(|e| Error::Io(format!("{}: {e}", mpath.display())))?;
            eprintln!("wrote {} and {}", path.display(), mpath.display());
        }
        None => {
            print!("{data}");
            eprintln!("{}", serde_json::to_string(&manifest)?);
        }
    }
    Ok(())
}

fn resolve_sim_config(a: &SimArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &a.config {
        Some(path) => load_experiment_config(path)?,
        None => ExperimentConfig {
            model: ModelParams::new(100_000, 0.5, 1.0)?,
            epsilons: parse_eps_grid("0.05:0.5:8")?,
            realizations: 30,
            seed: 42,
            ensemble: Ensemble::FixedL,
            n: None,
            c_corr: 0.0,
            oracle_limit: DEFAULT_ORACLE_LIMIT,
        },
    };
    if let Some(l) = a.sites {
        cfg.model.sites = l;
    }
    if let Some(p) = a.p {
        cfg.model.p = p;
    }
    if let Some(b) = a.b {
        cfg.model.b = b;
    }
    if let Some(eps) = &a.eps {
        cfg.epsilons = parse_eps_grid(eps)?;
    }
    if let Some(r) = a.realizations {
        cfg.realizations = r;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(e) = a.ensemble {
        cfg.ensemble = e.into();
    }
    if let Some(n) = a.n {
        cfg.n = Some(n);
    }
    if let Some(c) = a.c_corr {
        cfg.c_corr = c;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_simulate(a: SimArgs, workers: Option<usize>, check: bool) -> Result<u8, Error> {
    let cfg = resolve_sim_config(&a)?;
    let command = if check { "verify-bounds" } else { "simulate" };
    let mut manifest = RunManifest::new(command, serde_json::to_value(&cfg)?);
    let t0 = Instant::now();
    let est = estimate_dos(&cfg, workers)?;
    let report = check.then(|| verify_sandwich(&est));
    manifest.wall_time_secs = t0.elapsed().as_secs_f64();

    let data = match (&report, a.format) {
        (None, Format::Csv) => simulate_csv(&est),
        (None, Format::Json) => serde_json::to_string_pretty(&est)? + "\n",
        (Some(r), Format::Csv) => sandwich_csv(r),
        (Some(r), Format::Json) => serde_json::to_string_pretty(r)? + "\n",
    };
    emit(&a.out, &data, manifest)?;

    if let Some(r) = report {
        if !r.applicable {
            eprintln!(
                "envelopes not applicable: {}",
                r.reason.as_deref().unwrap_or("unknown")
            );
        } else if !r.all_contained {
            eprintln!("envelope containment FAILED");
            return Ok(2);
        } else {
            eprintln!("envelope containment ok at every grid point");
        }
    }
    Ok(0)
}

fn cmd_audit(a: AuditArgs) -> Result<u8, Error> {
    let params = ModelParams::new(a.sites, a.p, a.b)?;
    let mut manifest = RunManifest::new(
        "audit-theorem21",
        json!({
            "L": a.sites, "p": a.p, "b": a.b,
            "realizations": a.realizations, "seed": a.seed,
            "oracle_limit": a.oracle_limit, "tol": a.tol,
        }),
    );
    let t0 = Instant::now();
    let report = theorem21_audit(&params, a.realizations, a.seed, a.oracle_limit, a.tol)?;
    manifest.wall_time_secs = t0.elapsed().as_secs_f64();

    let data = match a.format {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Csv => format!(
            "realizations,sites,checked_pairs,max_gap,violations,tol\n{},{},{},{},{},{}\n",
            report.realizations,
            report.sites,
            report.checked_pairs,
            lifshitz::cli::fmt_f64(report.max_gap),
            report.violations,
            lifshitz::cli::fmt_f64(report.tol),
        ),
    };
    emit(&a.out, &data, manifest)?;
    if report.violations > 0 {
        eprintln!(
            "audit FAILED: {} of {} pairs exceed the bound (max gap {:.3e})",
            report.violations, report.checked_pairs, report.max_gap
        );
        return Ok(2);
    }
    eprintln!(
        "audit ok: {} pairs, max gap {:.3e}",
        report.checked_pairs, report.max_gap
    );
    Ok(0)
}

fn cmd_intervals(a: IntervalsArgs) -> Result<u8, Error> {
    let mut manifest = RunManifest::new(
        "intervals",
        json!({ "n": a.n, "p": a.p, "samples": a.samples, "seed": a.seed }),
    );
    let t0 = Instant::now();
    let report = run_length_experiment(a.n, a.p, a.samples, a.seed)?;
    manifest.wall_time_secs = t0.elapsed().as_secs_f64();
    let data = match a.format {
        Format::Csv => intervals_csv(&report),
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
    };
    emit(&a.out, &data, manifest)
        .map(|_| 0)
}

fn cmd_spectrum(a: SpectrumArgs) -> Result<u8, Error> {
    let params = ModelParams::new(a.sites, a.p, a.b)?;
    let mut manifest = RunManifest::new(
        "spectrum",
        json!({
            "L": a.sites, "p": a.p, "b": a.b, "seed": a.seed, "index": a.index,
            "k": a.k, "tol": a.tol, "dense": a.dense,
        }),
    );
    let t0 = Instant::now();
    let realization = PotentialRealization::sample(&params, a.seed, a.index);
    let h = TridiagonalOperator::from_potential(&realization);
    let k = a.k.min(a.sites);
    let slice = if a.dense {
        let mut s = dense_spectrum_with_limit(&h, a.oracle_limit)?;
        s.eigenvalues.truncate(k);
        s
    } else {
        lowest_eigenvalues(&h, k, a.tol)?
    };
    manifest.wall_time_secs = t0.elapsed().as_secs_f64();

    let data = match a.format {
        Format::Csv => spectrum_csv(&slice),
        Format::Json => {
            let method = if a.dense { "dense" } else { "bisection" };
            serde_json::to_string_pretty(&json!({
                "eigenvalues": slice.eigenvalues,
                "tolerance": slice.tolerance,
                "method": method,
                "L": a.sites, "p": a.p, "b": a.b, "seed": a.seed, "index": a.index,
            }))? + "\n"
        }
    };
    emit(&a.out, &data, manifest).map(|_| 0)
}

fn cmd_bounds(a: BoundsArgs) -> Result<u8, Error> {
    let grid = parse_eps_grid(&a.eps)?;
    // Without a run to measure, ell0 defaults to the infinite-volume
    // limit; --L substitutes the typical longest run of an L-site
    // lattice, ln(pqL)/ln(1/p).
    let ell0 = match (a.ell0, a.sites) {
        (Some(e), _) => e,
        (None, Some(l)) => {
            if !(a.p > 0.0 && a.p < 1.0) {
                return Err(Error::invalid("deriving ell0 from L needs 0 < p < 1"));
            }
            let pq_l = a.p * (1.0 - a.p) * l as f64;
            if pq_l <= 1.0 {
                return Err(Error::invalid(format!(
                    "L = {l} is too small to host zero runs at p = {}",
                    a.p
                )));
            }
            pq_l.ln() / (1.0 / a.p).ln()
        }
        (None, None) => f64::INFINITY,
    };
    let mut manifest = RunManifest::new(
        "bounds",
        json!({ "eps": grid, "p": a.p, "b": a.b, "C": a.c_corr, "ell0": ell0 }),
    );
    let t0 = Instant::now();
    let curve = BoundsCurve::compute(&grid, a.p, a.b, a.c_corr, ell0)?;
    manifest.wall_time_secs = t0.elapsed().as_secs_f64();
    let data = match a.format {
        Format::Csv => bounds_csv(&curve),
        Format::Json => serde_json::to_string_pretty(&curve)? + "\n",
    };
    emit(&a.out, &data, manifest).map(|_| 0)
}
