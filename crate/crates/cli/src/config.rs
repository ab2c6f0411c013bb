//! Run configuration: defaults, overridden by a key=value config file,
//! overridden by command-line flags.

use std::path::{Path, PathBuf};

use mqnmr::dynamics::SpectrumKind;
use mqnmr::thermo::b_from_temperature;

use crate::{CliError, RunArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// One resolved b value, remembering the temperature it came from.
#[derive(Debug, Clone, Copy)]
pub struct BValue {
    pub b: f64,
    pub from_temperature_k: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n_spins: u32,
    pub coupling: f64,
    pub b_values: Vec<BValue>,
    pub larmor_rad_s: Option<f64>,
    pub tau_start: f64,
    pub tau_stop: f64,
    pub tau_steps: usize,
    pub kind: SpectrumKind,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub prune_blocks: bool,
    pub threads: usize,
}

impl RunConfig {
    pub fn tau_grid(&self) -> Vec<f64> {
        mqnmr::params::linspace(self.tau_start, self.tau_stop, self.tau_steps)
    }
}

fn usage<T>(message: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::usage(message))
}

/// Raw values from a config file; `None` = key absent.
#[derive(Debug, Default)]
struct FileConfig {
    spins: Option<u32>,
    coupling: Option<f64>,
    b: Option<Vec<f64>>,
    temperature_k: Option<Vec<f64>>,
    larmor: Option<f64>,
    dtau: Option<String>,
    kind: Option<String>,
    out: Option<PathBuf>,
    format: Option<String>,
    prune_blocks: Option<bool>,
    threads: Option<usize>,
}

fn parse_list(value: &str, key: &str) -> Result<Vec<f64>, CliError> {
    value
        .split(',')
        .map(|item| {
            item.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("config key '{key}': bad number '{item}'")))
        })
        .collect()
}

fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg = FileConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return usage(format!(
                "config {} line {}: expected key=value, got '{line}'",
                path.display(),
                lineno + 1
            ));
        };
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| CliError::usage(format!("config key '{key}': bad {what} '{value}'"));
        match key {
            "spins" => cfg.spins = Some(value.parse().map_err(|_| bad("integer"))?),
            "coupling" => cfg.coupling = Some(value.parse().map_err(|_| bad("number"))?),
            "b" => cfg.b = Some(parse_list(value, key)?),
            "temperature_k" => cfg.temperature_k = Some(parse_list(value, key)?),
            "larmor" => cfg.larmor = Some(value.parse().map_err(|_| bad("number"))?),
            "dtau" => cfg.dtau = Some(value.to_string()),
            "kind" => cfg.kind = Some(value.to_string()),
            "out" => cfg.out = Some(PathBuf::from(value)),
            "format" => cfg.format = Some(value.to_string()),
            "prune_blocks" => {
                cfg.prune_blocks = Some(match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return usage(format!("config key 'prune_blocks': bad bool '{value}'")),
                })
            }
            "threads" => cfg.threads = Some(value.parse().map_err(|_| bad("integer"))?),
            _ => return usage(format!("unknown config key '{key}'")),
        }
    }
    Ok(cfg)
}

fn parse_dtau(spec: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return usage(format!("--dtau wants START:STOP:STEPS, got '{spec}'"));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::usage(format!("--dtau: bad start '{}'", parts[0])))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::usage(format!("--dtau: bad stop '{}'", parts[1])))?;
    let steps: usize = parts[2]
        .parse()
        .map_err(|_| CliError::usage(format!("--dtau: bad steps '{}'", parts[2])))?;
    if steps < 2 {
        return usage(format!("--dtau: steps must be >= 2, got {steps}"));
    }
    if !(start >= 0.0) || !(stop > start) || !stop.is_finite() {
        return usage(format!(
            "--dtau: need stop > start >= 0, got start={start} stop={stop}"
        ));
    }
    Ok((start, stop, steps))
}

fn parse_kind(value: &str) -> Result<SpectrumKind, CliError> {
    match value {
        "standard" => Ok(SpectrumKind::Standard),
        "reduced" => Ok(SpectrumKind::Reduced),
        _ => usage(format!("kind must be 'standard' or 'reduced', got '{value}'")),
    }
}

fn parse_format(value: &str) -> Result<OutputFormat, CliError> {
    match value {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        _ => usage(format!("format must be 'csv' or 'json', got '{value}'")),
    }
}

/// Merge defaults, config file, and flags (flags win) into a run config.
pub fn resolve(args: &RunArgs, default_kind: SpectrumKind) -> Result<RunConfig, CliError> {
    let file = match &args.config {
        Some(path) => load_file(path)?,
        None => FileConfig::default(),
    };

    let n_spins = args
        .spins
        .or(file.spins)
        .ok_or_else(|| CliError::usage("number of spins required (--spins or config 'spins')"))?;
    if n_spins < 1 {
        return usage("--spins must be >= 1");
    }

    let coupling = args.coupling.or(file.coupling).unwrap_or(1.0);
    if !(coupling > 0.0) || !coupling.is_finite() {
        return usage(format!("coupling must be positive, got {coupling}"));
    }

    // b and temperature lists are alternatives; a flag-level choice replaces
    // whatever the config file said.
    let (b_list, temperature_list) = if args.b.is_some() || args.temperature_k.is_some() {
        (args.b.clone(), args.temperature_k.clone())
    } else {
        (file.b, file.temperature_k)
    };
    let larmor = args.larmor.or(file.larmor);
    let b_values = match (b_list, temperature_list) {
        (Some(_), Some(_)) => {
            return usage("give either b values or temperatures, not both");
        }
        (Some(bs), None) => {
            if bs.is_empty() {
                return usage("--b list is empty");
            }
            for &b in &bs {
                if !(b >= 0.0) || !b.is_finite() {
                    return usage(format!("b must be nonnegative and finite, got {b}"));
                }
            }
            bs.into_iter()
                .map(|b| BValue {
                    b,
                    from_temperature_k: None,
                })
                .collect()
        }
        (None, Some(temps)) => {
            if temps.is_empty() {
                return usage("--temperature-k list is empty");
            }
            let larmor = larmor.ok_or_else(|| {
                CliError::usage("--temperature-k needs --larmor (rad/s) for the conversion")
            })?;
            temps
                .into_iter()
                .map(|t| {
                    b_from_temperature(larmor, t)
                        .map(|b| BValue {
                            b,
                            from_temperature_k: Some(t),
                        })
                        .map_err(|e| CliError::usage(e.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        (None, None) => {
            return usage("inverse temperatures required (--b, --temperature-k, or config)");
        }
    };

    let dtau_spec = args.dtau.clone().or(file.dtau).unwrap_or_else(|| "0:6:600".to_string());
    let (tau_start, tau_stop, tau_steps) = parse_dtau(&dtau_spec)?;

    let kind = match args.kind.as_deref().or(file.kind.as_deref()) {
        Some(value) => parse_kind(value)?,
        None => default_kind,
    };

    let format = match args.format.as_deref().or(file.format.as_deref()) {
        Some(value) => parse_format(value)?,
        None => OutputFormat::Csv,
    };

    Ok(RunConfig {
        n_spins,
        coupling,
        b_values,
        larmor_rad_s: larmor,
        tau_start,
        tau_stop,
        tau_steps,
        kind,
        out: args.out.clone().or(file.out),
        format,
        prune_blocks: args.prune_blocks || file.prune_blocks.unwrap_or(false),
        threads: args.threads.or(file.threads).unwrap_or(0),
    })
}
