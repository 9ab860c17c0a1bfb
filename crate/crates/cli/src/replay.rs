//! Offline verification of a snapshot log.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use otexplore_core::sim::replay::{verify, ReplayReport};
use otexplore_core::sim::headline_wub;
use thiserror::Error;

use crate::output::read_log;

/// Recorded and recomputed bounds must agree to this absolute tolerance.
pub const WUB_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("{path}: {source}")]
    Open { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
}

/// Reads and checks a log. A readable but inconsistent log is returned as a
/// failing report; an unreadable one is an error. Both exit with code 1.
pub fn replay(path: &Path) -> Result<ReplayReport, ReplayError> {
    let file = File::open(path).map_err(|source| ReplayError::Open { path: path.to_path_buf(), source })?;
    let log = read_log(BufReader::new(file))
        .map_err(|(line, message)| ReplayError::Corrupt { path: path.to_path_buf(), line, message })?;
    let mut report = verify(&log.header, &log.records, WUB_TOLERANCE);
    if let (Some(m), Some(last)) = (&log.metrics, log.records.last()) {
        let agrees = m.termination_step == last.step && (m.final_wub - headline_wub(last)).abs() <= WUB_TOLERANCE;
        report.checks.push(otexplore_core::sim::replay::Check {
            name: "metrics match final snapshot",
            passed: agrees,
            detail: (!agrees).then(|| {
                format!("metrics end at step {} with {}, last snapshot is step {}", m.termination_step, m.final_wub, last.step)
            }),
        });
    }
    Ok(report)
}
