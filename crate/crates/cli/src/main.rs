//! `mqnmr`: coherence spectra, Fisher-information sweeps, and entanglement
//! certification for clusters of equivalent spins-1/2.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage/config error,
//! 3 numerical failure.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mqnmr::blocks::{BlockSet, MutationFixture};
use mqnmr::dynamics::{SpectrumEngine, SpectrumKind};
use mqnmr::entanglement::{certificate_for, certify};
use mqnmr::params::SystemParams;
use mqnmr::thermo::ThermoContext;
use mqnmr::validate::{run_validation, ValidationOptions, ValidationReport};

use config::RunConfig;
use output::{KcurveRow, SpectrumRow, SweepRow};

/// Log-weight window for `--prune-blocks`: sectors more than this far below
/// the dominant weight contribute less than ~4e-18 per trace.
const PRUNE_LOG_CUT: f64 = 40.0;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(2, message)
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(1, message)
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self::new(3, message)
    }
}

fn from_core(err: mqnmr::Error) -> CliError {
    match err {
        mqnmr::Error::InvalidParameter(_)
        | mqnmr::Error::InvalidBlockLabel { .. }
        | mqnmr::Error::GridTooSmall { .. }
        | mqnmr::Error::OracleTooLarge(..) => CliError::usage(err.to_string()),
        _ => CliError::numerical(err.to_string()),
    }
}

#[derive(Parser)]
#[command(
    name = "mqnmr",
    version,
    about = "Multiple-quantum coherence spectra and entanglement certification for equivalent spin clusters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coherence-order intensities over a time grid
    Spectrum(RunArgs),
    /// Second moment, F_Q lower bound, and certified cluster per time point
    Sweep(RunArgs),
    /// Maximum certified cluster over the time grid, one row per b
    Kcurve(RunArgs),
    /// Entanglement depth certified by a given F_Q lower bound
    Certify(CertifyArgs),
    /// Self-validation suite (closed forms, brute-force equivalence, invariants)
    Validate(ValidateArgs),
}

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// Number of spins N
    #[arg(long)]
    spins: Option<u32>,
    /// Comma-separated dimensionless inverse temperatures b
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    b: Option<Vec<f64>>,
    /// Comma-separated temperatures in kelvin (needs --larmor)
    #[arg(long = "temperature-k", value_delimiter = ',')]
    temperature_k: Option<Vec<f64>>,
    /// Larmor frequency in rad/s for the temperature conversion
    #[arg(long)]
    larmor: Option<f64>,
    /// Dimensionless time grid START:STOP:STEPS (default 0:6:600)
    #[arg(long)]
    dtau: Option<String>,
    /// standard | reduced
    #[arg(long)]
    kind: Option<String>,
    /// Output path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json (default csv)
    #[arg(long)]
    format: Option<String>,
    /// Skip sectors whose log weight trails the maximum by more than 40
    #[arg(long)]
    prune_blocks: bool,
    /// Worker threads; 0 = all cores (never changes output bytes)
    #[arg(long)]
    threads: Option<usize>,
    /// key=value config file; flags win over file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Coupling constant D; with D != 1 a tau_s column is added
    #[arg(long)]
    coupling: Option<f64>,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    /// Number of spins N
    #[arg(long)]
    spins: u32,
    /// Quantum Fisher information lower bound (2 M_2)
    #[arg(long, allow_hyphen_values = true)]
    fq: f64,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Run against the documented broken-Hamiltonian fixture (a sign error
    /// in the coupling formula); validation must then fail with exit 1
    #[arg(long)]
    inject_sign_error: bool,
    /// text | json (default text)
    #[arg(long)]
    format: Option<String>,
    /// Report path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Spectrum(args) => cmd_spectrum(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Kcurve(args) => cmd_kcurve(&args),
        Command::Certify(args) => cmd_certify(&args),
        Command::Validate(args) => cmd_validate(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if !err.message.is_empty() {
                eprintln!("error: {}", err.message);
            }
            ExitCode::from(err.code)
        }
    }
}

fn with_thread_pool<T: Send>(
    threads: usize,
    job: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    if threads == 0 {
        return job();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::usage(format!("cannot build thread pool: {e}")))?;
    pool.install(job)
}

fn echo_temperature_conversions(cfg: &RunConfig) {
    for bv in &cfg.b_values {
        if let Some(t) = bv.from_temperature_k {
            eprintln!(
                "# temperature_k={t} larmor_rad_s={} -> b={}",
                cfg.larmor_rad_s.unwrap_or(f64::NAN),
                bv.b
            );
        }
    }
}

fn build_blocks(cfg: &RunConfig) -> Result<BlockSet, CliError> {
    let params = SystemParams::new(
        cfg.n_spins,
        cfg.coupling,
        cfg.b_values[0].b,
        cfg.tau_grid(),
    )
    .map_err(from_core)?;
    BlockSet::build(&params).map_err(from_core)
}

/// Per-b reduced sweeps, shared by `sweep` and `kcurve`.
fn reduced_sweeps(
    cfg: &RunConfig,
) -> Result<Vec<(f64, Vec<mqnmr::entanglement::EntanglementCertificate>)>, CliError> {
    let blocks = build_blocks(cfg)?;
    let taus = cfg.tau_grid();
    let cut = cfg.prune_blocks.then_some(PRUNE_LOG_CUT);
    let mut out = Vec::new();
    for bv in &cfg.b_values {
        let ctx = ThermoContext::new(cfg.n_spins, bv.b).map_err(from_core)?;
        let engine = SpectrumEngine::with_pruning(&blocks, &ctx, SpectrumKind::Reduced, cut)
            .map_err(from_core)?;
        let spectra = engine.sweep(&taus).map_err(from_core)?;
        let certs = spectra
            .iter()
            .map(certificate_for)
            .collect::<mqnmr::Result<Vec<_>>>()
            .map_err(from_core)?;
        out.push((bv.b, certs));
    }
    Ok(out)
}

fn tau_seconds(cfg: &RunConfig, d_tau: f64) -> Option<f64> {
    (cfg.coupling != 1.0).then(|| d_tau / cfg.coupling)
}

fn cmd_spectrum(args: &RunArgs) -> Result<(), CliError> {
    let cfg = config::resolve(args, SpectrumKind::Standard)?;
    echo_temperature_conversions(&cfg);
    let rows = with_thread_pool(cfg.threads, || {
        let blocks = build_blocks(&cfg)?;
        let taus = cfg.tau_grid();
        let cut = cfg.prune_blocks.then_some(PRUNE_LOG_CUT);
        let mut rows = Vec::new();
        for bv in &cfg.b_values {
            let ctx = ThermoContext::new(cfg.n_spins, bv.b).map_err(from_core)?;
            let engine = SpectrumEngine::with_pruning(&blocks, &ctx, cfg.kind, cut)
                .map_err(from_core)?;
            for spec in engine.sweep(&taus).map_err(from_core)? {
                for (order, intensity) in spec.orders() {
                    if order.rem_euclid(2) == 0 {
                        rows.push(SpectrumRow {
                            b: bv.b,
                            d_tau: spec.tau(),
                            n: order,
                            intensity,
                            tau_s: tau_seconds(&cfg, spec.tau()),
                        });
                    }
                }
            }
        }
        Ok(rows)
    })?;
    output::write_rows(&cfg, &rows)
}

fn cmd_sweep(args: &RunArgs) -> Result<(), CliError> {
    let cfg = resolve_reduced(args)?;
    echo_temperature_conversions(&cfg);
    let rows = with_thread_pool(cfg.threads, || {
        let mut rows = Vec::new();
        for (b, certs) in reduced_sweeps(&cfg)? {
            for cert in certs {
                rows.push(SweepRow {
                    b,
                    d_tau: cert.tau,
                    m2: cert.second_moment,
                    fq_lower_bound: cert.fq_lower_bound,
                    certified_k: cert.certified_k,
                    certified_cluster: cert.certified_cluster,
                    tau_s: tau_seconds(&cfg, cert.tau),
                });
            }
        }
        Ok(rows)
    })?;
    output::write_rows(&cfg, &rows)
}

fn cmd_kcurve(args: &RunArgs) -> Result<(), CliError> {
    let cfg = resolve_reduced(args)?;
    echo_temperature_conversions(&cfg);
    let rows = with_thread_pool(cfg.threads, || {
        let mut rows = Vec::new();
        for (b, certs) in reduced_sweeps(&cfg)? {
            let max_cluster = certs.iter().map(|c| c.certified_cluster).max().unwrap_or(1);
            rows.push(KcurveRow {
                b,
                max_certified_cluster: max_cluster,
            });
        }
        Ok(rows)
    })?;
    output::write_rows(&cfg, &rows)
}

/// Sweep and kcurve are defined on reduced spectra only.
fn resolve_reduced(args: &RunArgs) -> Result<RunConfig, CliError> {
    let cfg = config::resolve(args, SpectrumKind::Reduced)?;
    if cfg.kind != SpectrumKind::Reduced {
        return Err(CliError::usage(
            "this command works on reduced spectra; drop --kind or use --kind reduced",
        ));
    }
    Ok(cfg)
}

fn cmd_certify(args: &CertifyArgs) -> Result<(), CliError> {
    if args.spins < 1 {
        return Err(CliError::usage("--spins must be >= 1"));
    }
    if !(args.fq >= 0.0) || !args.fq.is_finite() {
        return Err(CliError::usage(format!(
            "--fq must be nonnegative and finite, got {}",
            args.fq
        )));
    }
    let k = certify(args.fq, args.spins);
    let cluster = if k >= 1 { k + 1 } else { 1 };
    println!("certified_k={k} certified_cluster={cluster}");
    Ok(())
}

fn render_text_report(report: &ValidationReport) -> String {
    let mut text = String::new();
    for check in &report.checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        text.push_str(&format!(
            "{status} {:<34} worst {:>10.3e}  tol {:>8.1e}  {}\n",
            check.name, check.worst, check.tolerance, check.detail
        ));
    }
    let passed = report.checks.iter().filter(|c| c.passed).count();
    text.push_str(&format!(
        "validation: {} ({passed}/{} checks passed)\n",
        if report.passed { "PASS" } else { "FAIL" },
        report.checks.len()
    ));
    text
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), CliError> {
    let options = ValidationOptions {
        mutation: args
            .inject_sign_error
            .then_some(MutationFixture::CouplingSignError),
    };
    let report = run_validation(options).map_err(from_core)?;

    let body = match args.format.as_deref() {
        None | Some("text") => render_text_report(&report),
        Some("json") => {
            let mut json = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::numerical(e.to_string()))?;
            json.push('\n');
            json
        }
        Some(other) => {
            return Err(CliError::usage(format!(
                "format must be 'text' or 'json', got '{other}'"
            )))
        }
    };
    match &args.out {
        Some(path) => std::fs::write(path, &body)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{body}"),
    }

    if report.passed {
        Ok(())
    } else {
        let first = report
            .checks
            .iter()
            .find(|c| !c.passed)
            .map(|c| c.name.clone())
            .unwrap_or_default();
        Err(CliError::validation(format!(
            "validation failed; first failing check: {first}"
        )))
    }
}
