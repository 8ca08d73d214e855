//! Experiment manifests. A JSON config supplies defaults; explicit flags win.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub m: Option<usize>,
    pub coeffs: Option<Vec<f64>>,
    pub emin: Option<f64>,
    pub emax: Option<f64>,
    /// Newton-step tolerance for eigenvalues.
    pub tol: Option<f64>,
    /// Integrator relative tolerance.
    pub rel_tol: Option<f64>,
    /// Fixed initialization radius for every ray.
    pub radius: Option<f64>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// `self` with every field that `flags` sets replaced.
    pub fn merged(&self, flags: &RunConfig) -> RunConfig {
        RunConfig {
            m: flags.m.or(self.m),
            coeffs: flags.coeffs.clone().or_else(|| self.coeffs.clone()),
            emin: flags.emin.or(self.emin),
            emax: flags.emax.or(self.emax),
            tol: flags.tol.or(self.tol),
            rel_tol: flags.rel_tol.or(self.rel_tol),
            radius: flags.radius.or(self.radius),
            format: flags.format.or(self.format),
            out: flags.out.clone().or_else(|| self.out.clone()),
            threads: flags.threads.or(self.threads),
        }
    }
}

/// Parses `a1,a2,...`; an empty string is the empty list.
pub fn parse_coeffs(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad coefficient '{t}': {e}"))).collect()
}
