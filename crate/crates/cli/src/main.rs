use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use otexplore::config::ConfigDoc;
use otexplore::replay::replay;
use otexplore::run::{run_batch, RunError, RunOptions};

/// Simulate optimal-transport exploration by a team of energy-limited robots.
///
/// Exit codes: 0 success, 1 runtime failure or failed replay, 2 invalid
/// configuration or usage.
#[derive(Parser, Debug)]
#[command(name = "otexplore", version)]
struct Cli {
    /// Scenario file (TOML).
    #[arg(long, required_unless_present = "replay")]
    config: Option<PathBuf>,

    /// Run a single seed, overriding the file's `seed`.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,

    /// Run an inclusive seed range, for example `0..9`.
    #[arg(long, value_parser = parse_range)]
    seeds: Option<(u64, u64)>,

    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Snapshot cadence in rounds.
    #[arg(long)]
    snapshot_every: Option<u64>,

    /// Also write trajectories.svg.
    #[arg(long)]
    svg: bool,

    /// Override a config key, `key=value` in TOML syntax. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Verify a snapshot log instead of running.
    #[arg(long, conflicts_with_all = ["config", "seed", "seeds", "svg", "overrides"])]
    replay: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once("..").ok_or("expected START..END")?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: u64 = a.trim().parse().map_err(|e| format!("start: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("end: {e}"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok((a, b))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(path) = &cli.replay {
        return match replay(path) {
            Ok(report) => {
                for c in &report.checks {
                    let status = if c.passed { "ok" } else { "FAILED" };
                    match &c.detail {
                        Some(d) => println!("{status:<6} {}: {d}", c.name),
                        None => println!("{status:<6} {}", c.name),
                    }
                }
                println!("{} snapshots, max bound error {:e}", report.records, report.max_wub_error);
                if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        };
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<(), RunError> {
    let path = cli.config.as_ref().expect("clap requires --config without --replay");
    let mut doc = ConfigDoc::load(path)?;
    for o in &cli.overrides {
        doc.set(o)?;
    }
    if let Some(k) = cli.snapshot_every {
        doc.set_value("snapshot_every", k as i64);
    }
    let seeds: Vec<u64> = match (cli.seed, cli.seeds) {
        (Some(s), _) => vec![s],
        (None, Some((a, b))) => (a..=b).collect(),
        (None, None) => vec![doc.scenario()?.seed],
    };
    let outcomes = run_batch(&doc, &seeds, &RunOptions { out: cli.out.clone(), svg: cli.svg })?;
    for o in &outcomes {
        let m = &o.metrics;
        let rate = m.detection_rate.map_or_else(|| "n/a".to_string(), |r| format!("{r:.4}"));
        println!(
            "seed {:>4}  T {:>5}  detection {rate}  W_UB {:.3} -> {:.3}  ({:.0} ms)",
            m.seed, m.termination_step, m.initial_wub, m.final_wub, o.wall_ms
        );
    }
    println!("wrote {}", cli.out.display());
    Ok(())
}
