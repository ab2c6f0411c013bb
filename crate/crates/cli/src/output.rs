//! Row types and CSV/JSON writers.
//!
//! CSV floats use Rust's shortest round-trip formatting; JSON mirrors the
//! CSV rows as an array of objects. Identical config and build produce
//! byte-identical output.

use std::fs::File;
use std::io::{BufWriter, Write};

use serde::Serialize;

use crate::config::{OutputFormat, RunConfig};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRow {
    pub b: f64,
    pub d_tau: f64,
    pub n: i64,
    pub intensity: f64,
    /// Time in seconds; only present when the coupling is not 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_s: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub b: f64,
    pub d_tau: f64,
    pub m2: f64,
    pub fq_lower_bound: f64,
    pub certified_k: u32,
    pub certified_cluster: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_s: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KcurveRow {
    pub b: f64,
    pub max_certified_cluster: u32,
}

pub trait CsvRow {
    const HEADER: &'static str;
    fn has_tau_s(&self) -> bool {
        false
    }
    fn csv_line(&self) -> String;
}

impl CsvRow for SpectrumRow {
    const HEADER: &'static str = "b,d_tau,n,intensity";
    fn has_tau_s(&self) -> bool {
        self.tau_s.is_some()
    }
    fn csv_line(&self) -> String {
        let mut line = format!("{},{},{},{}", self.b, self.d_tau, self.n, self.intensity);
        if let Some(t) = self.tau_s {
            line.push_str(&format!(",{t}"));
        }
        line
    }
}

impl CsvRow for SweepRow {
    const HEADER: &'static str = "b,d_tau,m2,fq_lower_bound,certified_k,certified_cluster";
    fn has_tau_s(&self) -> bool {
        self.tau_s.is_some()
    }
    fn csv_line(&self) -> String {
        let mut line = format!(
            "{},{},{},{},{},{}",
            self.b, self.d_tau, self.m2, self.fq_lower_bound, self.certified_k, self.certified_cluster
        );
        if let Some(t) = self.tau_s {
            line.push_str(&format!(",{t}"));
        }
        line
    }
}

impl CsvRow for KcurveRow {
    const HEADER: &'static str = "b,max_certified_cluster";
    fn csv_line(&self) -> String {
        format!("{},{}", self.b, self.max_certified_cluster)
    }
}

fn open_sink(config: &RunConfig) -> Result<Box<dyn Write>, CliError> {
    match &config.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| {
                CliError::usage(format!("cannot write {}: {e}", path.display()))
            })?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(std::io::stdout()))),
    }
}

pub fn write_rows<R: CsvRow + Serialize>(config: &RunConfig, rows: &[R]) -> Result<(), CliError> {
    let mut sink = open_sink(config)?;
    let io_err = |e: std::io::Error| CliError::usage(format!("write failed: {e}"));
    match config.format {
        OutputFormat::Csv => {
            let mut header = R::HEADER.to_string();
            if rows.first().is_some_and(|r| r.has_tau_s()) {
                header.push_str(",tau_s");
            }
            writeln!(sink, "{header}").map_err(io_err)?;
            for row in rows {
                writeln!(sink, "{}", row.csv_line()).map_err(io_err)?;
            }
        }
        OutputFormat::Json => {
            serde_json::to_writer(&mut sink, rows)
                .map_err(|e| CliError::usage(format!("write failed: {e}")))?;
            writeln!(sink).map_err(io_err)?;
        }
    }
    sink.flush().map_err(io_err)
}
