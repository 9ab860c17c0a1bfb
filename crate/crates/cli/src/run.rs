//! Batch execution over seeds.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use otexplore_core::sim::{drive, Scenario, SimError};
use otexplore_core::RunMetrics;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigDoc, ConfigFileError};
use crate::output::{trajectories_svg, write_line, write_metrics, LogLine, Manifest, MetricsRow};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigFileError),
    #[error("seed {seed}: {source}")]
    Sim { seed: u64, source: SimError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl RunError {
    /// Process exit code: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub svg: bool,
}

#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub metrics: RunMetrics,
    pub wall_ms: f64,
    pub files: Vec<String>,
}

/// File name for `stem.ext`, suffixed with the seed when a batch has more
/// than one seed.
fn per_seed(stem: &str, ext: &str, seed: u64, batch: bool) -> String {
    if batch {
        format!("{stem}_seed{seed}.{ext}")
    } else {
        format!("{stem}.{ext}")
    }
}

/// Runs `doc` once per seed (in parallel) and writes all outputs to
/// `opts.out`. The configuration is checked before anything is written.
pub fn run_batch(doc: &ConfigDoc, seeds: &[u64], opts: &RunOptions) -> Result<Vec<SeedOutcome>, RunError> {
    if seeds.is_empty() {
        return Err(ConfigFileError { field: Some("seed".into()), message: "no seeds selected".into() }.into());
    }
    let base = doc.scenario()?;
    fs::create_dir_all(&opts.out).map_err(io_err(&opts.out))?;
    let batch = seeds.len() > 1;

    let mut outcomes = seeds
        .par_iter()
        .map(|&seed| {
            let mut cfg = base.clone();
            cfg.seed = seed;
            run_one(cfg, batch, opts)
        })
        .collect::<Result<Vec<_>, _>>()?;
    outcomes.sort_by_key(|o| o.metrics.seed);

    let mut files = Vec::new();
    let config_path = opts.out.join("config.toml");
    let mut copy = doc.clone();
    if !batch {
        copy.set_value("seed", seeds[0] as i64);
    }
    fs::write(&config_path, copy.to_toml()).map_err(io_err(&config_path))?;
    files.push("config.toml".to_string());

    let metrics_path = opts.out.join("metrics.csv");
    let rows: Vec<MetricsRow> = outcomes.iter().map(|o| MetricsRow::new(&o.metrics, o.wall_ms)).collect();
    let f = File::create(&metrics_path).map_err(io_err(&metrics_path))?;
    write_metrics(BufWriter::new(f), &rows)
        .map_err(|e| RunError::Io { path: metrics_path.clone(), source: io::Error::other(e) })?;
    files.push("metrics.csv".to_string());
    files.extend(outcomes.iter().flat_map(|o| o.files.iter().cloned()));

    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: doc.hash(),
        mode: base.mode.as_str().to_string(),
        seeds: outcomes.iter().map(|o| o.metrics.seed).collect(),
        files,
    };
    let manifest_path = opts.out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&manifest_path, text + "\n").map_err(io_err(&manifest_path))?;
    Ok(outcomes)
}

fn run_one(cfg: otexplore_core::ScenarioConfig, batch: bool, opts: &RunOptions) -> Result<SeedOutcome, RunError> {
    let seed = cfg.seed;
    let sim_err = |source| RunError::Sim { seed, source };
    let start = Instant::now();
    let mut sim = Scenario::new(cfg).map_err(sim_err)?;

    let log_name = per_seed("snapshots", "jsonl", seed, batch);
    let log_path = opts.out.join(&log_name);
    let mut log = BufWriter::new(File::create(&log_path).map_err(io_err(&log_path))?);
    write_line(&mut log, &LogLine::Header(sim.header())).map_err(io_err(&log_path))?;
    let mut failed = None;
    let metrics = drive(&mut sim, |rec| {
        if failed.is_none() {
            // The record is cloned into the enum only for tagging.
            if let Err(e) = write_line(&mut log, &LogLine::Snapshot(rec.clone())) {
                failed = Some(e);
            }
        }
    })
    .map_err(sim_err)?;
    if let Some(e) = failed {
        return Err(io_err(&log_path)(e));
    }
    write_line(&mut log, &LogLine::Metrics(metrics.clone())).map_err(io_err(&log_path))?;
    log.flush().map_err(io_err(&log_path))?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;

    let mut files = vec![log_name];
    if opts.svg {
        let svg_name = per_seed("trajectories", "svg", seed, batch);
        let svg_path = opts.out.join(&svg_name);
        let paths: Vec<&[_]> = sim.views().iter().map(|v| v.trajectory()).collect();
        let svg = trajectories_svg(&sim.config().domain, sim.sample_points(), sim.targets(), &paths);
        fs::write(&svg_path, svg).map_err(io_err(&svg_path))?;
        files.push(svg_name);
    }
    Ok(SeedOutcome { metrics, wall_ms, files })
}
