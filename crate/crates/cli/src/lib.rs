//! Batch verification suites and machine-readable reports for `minstab`.
//!
//! Every command is a pure function of a [`SuiteConfig`]; identical configs
//! give identical reports apart from the `timing` section.

pub mod config;
pub mod report;
pub mod suites;

use std::time::Instant;

use thiserror::Error;

pub use config::{ConfigError, SuiteConfig};
pub use report::RunReport;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] minstab::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Numerical(_) => EXIT_FAILURE,
        }
    }
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    VerifyIdentities,
    SignScan,
    Classify,
    GeodesicIndex,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::VerifyIdentities => "verify-identities",
            Self::SignScan => "sign-scan",
            Self::Classify => "classify",
            Self::GeodesicIndex => "geodesic-index",
        }
    }
}

pub fn run(command: Command, config: &SuiteConfig) -> Result<RunReport, RunError> {
    config.validate()?;
    let start = Instant::now();
    let mut report = RunReport::new(command.name(), config.seed, config.samples);
    let (suites, spectra) = match command {
        Command::VerifyIdentities => (vec![suites::verify_identities(config)?], Vec::new()),
        Command::SignScan => (vec![suites::sign_scan(config)?], Vec::new()),
        Command::Classify => (suites::classify(config)?, Vec::new()),
        Command::GeodesicIndex => {
            let (suite, runs) = suites::geodesic_index(config)?;
            (vec![suite], runs)
        }
    };
    push_all(&mut report, suites, start.elapsed().as_secs_f64());
    report.timing.spectra = spectra
        .into_iter()
        .map(|(name, seconds)| report::SuiteTiming { name, seconds })
        .collect();
    for s in &report.suites {
        log::info!("{}: {}", s.name, if s.passed { "pass" } else { "FAIL" });
        for c in s.checks.iter().filter(|c| !c.passed) {
            log::warn!("  {} failed: worst {:e} vs {:e} ({} of {})", c.name, c.worst, c.threshold, c.failures, c.count);
        }
    }
    report.timing.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Suites run together share one timing entry, split evenly.
fn push_all(report: &mut RunReport, suites: Vec<report::SuiteReport>, seconds: f64) {
    let share = seconds / suites.len().max(1) as f64;
    for s in suites {
        report.push(s, share);
    }
}
