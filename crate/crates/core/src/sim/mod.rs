//! Scenario execution: targets and sensing, the per-round driver for each
//! coordination scheme, snapshot records and run metrics.

mod config;
pub mod replay;

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use config::{ConfigError, Mode, ScenarioConfig};

use crate::coordination::{
    centralized_round_ordered, decentralized_bound, decentralized_round_ordered, exchange_in_range, AgentView, CoordError,
};
use crate::density::{random_walk_step_samples, random_walk_step_targets, sample_mixture, DensityError, SampleEnsemble};
use crate::geometry::Point2;
use crate::motion::FirstOrder;
use crate::ot::{upper_bound_centralized, upper_bound_single, BoundLedger, OtError, ResidualMode};
use crate::planner::{plan_step, PlanError, PlannerParams};
use crate::rng::{stream, Stream};

/// A hidden target `z^k`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Target {
    pub position: Point2,
    detection_step: Option<u64>,
}

impl Target {
    pub fn new(position: Point2) -> Self {
        Self { position, detection_step: None }
    }

    pub fn detected(&self) -> bool {
        self.detection_step.is_some()
    }

    pub fn detection_step(&self) -> Option<u64> {
        self.detection_step
    }

    /// Records the first detection; later calls are ignored.
    pub fn mark_detected(&mut self, step: u64) {
        self.detection_step.get_or_insert(step);
    }
}

/// Marks every undetected target within `r_sensing` (inclusive) of some
/// agent. Returns the number of new detections.
pub fn detect_targets(agents: &[Point2], targets: &mut [Target], r_sensing: f64, step: u64) -> usize {
    let mut fresh = 0;
    for t in targets.iter_mut().filter(|t| !t.detected()) {
        if agents.iter().any(|a| a.dist(t.position) <= r_sensing) {
            t.mark_detected(step);
            fresh += 1;
        }
    }
    fresh
}

/// Like [`detect_targets`] but senses along each straight motion segment.
pub fn detect_targets_along(segments: &[(Point2, Point2)], targets: &mut [Target], r_sensing: f64, step: u64) -> usize {
    let mut fresh = 0;
    for t in targets.iter_mut().filter(|t| !t.detected()) {
        if segments.iter().any(|&(a, b)| t.position.dist_to_segment(a, b) <= r_sensing) {
            t.mark_detected(step);
            fresh += 1;
        }
    }
    fresh
}

/// Fraction of targets detected, or `None` when there are no targets.
pub fn detection_rate(targets: &[Target]) -> Option<f64> {
    if targets.is_empty() {
        return None;
    }
    let hit = targets.iter().filter(|t| t.detected()).count();
    Some(hit as f64 / targets.len() as f64)
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Coordination(#[from] CoordError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Transport(#[from] OtError),
}

/// Static facts about a run, written once ahead of its snapshots.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunHeader {
    pub mode: Mode,
    pub seed: u64,
    pub budget: u64,
    pub n_agents: usize,
    pub n_samples: usize,
    pub n_targets: usize,
    pub r_comm: Option<f64>,
    pub residual: ResidualMode,
    pub time_varying: bool,
    pub sample_points: Vec<Point2>,
    pub targets: Vec<Point2>,
}

/// State of a run after `step` rounds.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SnapshotRecord {
    pub step: u64,
    pub positions: Vec<Point2>,
    pub ledgers: Vec<BoundLedger>,
    /// One vector for single and centralized runs, one per agent otherwise.
    pub weights: Vec<Vec<f64>>,
    /// Closed neighbor sets the bound of each agent is taken over
    /// (decentralized only).
    pub neighbors: Vec<Vec<usize>>,
    pub wub: Vec<f64>,
    pub detections: usize,
    pub shortfall: bool,
    /// Current sample positions when they move.
    pub sample_points: Option<Vec<Point2>>,
}

/// Summary of a finished run.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunMetrics {
    pub seed: u64,
    pub mode: Mode,
    pub termination_step: u64,
    pub detection_rate: Option<f64>,
    pub detections: usize,
    pub n_targets: usize,
    pub initial_wub: f64,
    pub final_wub: f64,
    pub shortfall: bool,
}

/// A running scenario. Call [`Scenario::advance`] until it returns `false`.
#[derive(Clone, Debug)]
pub struct Scenario {
    cfg: ScenarioConfig,
    params: PlannerParams,
    motion: FirstOrder,
    ensemble: SampleEnsemble,
    views: Vec<AgentView>,
    targets: Vec<Target>,
    target_walk: ChaCha8Rng,
    sample_walk: ChaCha8Rng,
    round: u64,
    finished: bool,
}

impl Scenario {
    pub fn new(cfg: ScenarioConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let params = cfg.planner_params();
        let ensemble = sample_mixture(&cfg.mixture, cfg.n_samples, &mut stream(cfg.seed, Stream::Sampling))?;
        let targets: Vec<Target> = cfg
            .mixture
            .sample_points(cfg.n_targets, &mut stream(cfg.seed, Stream::Targets))
            .into_iter()
            .map(Target::new)
            .collect();
        let starts = match &cfg.initial_positions {
            Some(p) => p.clone(),
            None => {
                let mut rng = stream(cfg.seed, Stream::InitialPositions);
                (0..cfg.n_agents).map(|_| cfg.domain.sample_uniform(&mut rng)).collect()
            }
        };
        let views = starts
            .iter()
            .enumerate()
            .map(|(k, &p)| AgentView::new(k, p, ensemble.weights.clone()))
            .collect();
        let mut sim = Self {
            motion: FirstOrder(cfg.motion),
            target_walk: stream(cfg.seed, Stream::TargetWalk),
            sample_walk: stream(cfg.seed, Stream::SampleWalk),
            params,
            ensemble,
            views,
            targets,
            round: 0,
            finished: false,
            cfg,
        };
        let starts = sim.positions();
        detect_targets(&starts, &mut sim.targets, sim.cfg.r_sensing, 0);
        Ok(sim)
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn planner_params(&self) -> &PlannerParams {
        &self.params
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn views(&self) -> &[AgentView] {
        &self.views
    }

    pub fn targets(&self) -> &[Target] {
        &self.targets
    }

    pub fn sample_points(&self) -> &[Point2] {
        &self.ensemble.points
    }

    pub fn positions(&self) -> Vec<Point2> {
        self.views.iter().map(|v| v.position()).collect()
    }

    pub fn detections(&self) -> usize {
        self.targets.iter().filter(|t| t.detected()).count()
    }

    pub fn header(&self) -> RunHeader {
        RunHeader {
            mode: self.cfg.mode,
            seed: self.cfg.seed,
            budget: self.cfg.budget,
            n_agents: self.cfg.n_agents,
            n_samples: self.cfg.n_samples,
            n_targets: self.cfg.n_targets,
            r_comm: self.cfg.r_comm,
            residual: self.cfg.residual,
            time_varying: self.cfg.time_varying,
            sample_points: self.ensemble.points.clone(),
            targets: self.targets.iter().map(|t| t.position).collect(),
        }
    }

    /// Runs one round. Returns `false`, without changing anything that a
    /// snapshot records, once the run has terminated.
    pub fn advance(&mut self) -> Result<bool, SimError> {
        if self.finished {
            return Ok(false);
        }
        let moved: Vec<(Point2, Point2)> = match self.cfg.mode {
            Mode::Single => {
                let view = &mut self.views[0];
                if !view.is_active(self.params.budget) {
                    return self.finish();
                }
                let r = plan_step(view, &self.ensemble.points, &self.params, &self.motion)?;
                vec![(r.previous, r.arrived)]
            }
            Mode::Centralized => {
                if self.round >= self.cfg.rounds_budget() || self.views[0].is_depleted() {
                    return self.finish();
                }
                let r = centralized_round_ordered(
                    &mut self.views,
                    &self.ensemble.points,
                    &self.params,
                    &self.motion,
                    self.cfg.round_order,
                )?;
                r.reports.iter().map(|s| (s.previous, s.arrived)).collect()
            }
            Mode::Decentralized => {
                let r_comm = self.cfg.r_comm.unwrap_or(0.0);
                let mut next = self.views.clone();
                let r = decentralized_round_ordered(
                    &mut next,
                    &self.ensemble.points,
                    &self.params,
                    &self.motion,
                    r_comm,
                    self.cfg.round_order,
                )?;
                if r.active_agents() == 0 {
                    return self.finish();
                }
                self.views = next;
                r.reports.iter().flatten().map(|s| (s.previous, s.arrived)).collect()
            }
        };
        self.round += 1;
        if self.cfg.sweep_sensing {
            detect_targets_along(&moved, &mut self.targets, self.cfg.r_sensing, self.round);
        } else {
            let ends: Vec<Point2> = moved.iter().map(|m| m.1).collect();
            detect_targets(&ends, &mut self.targets, self.cfg.r_sensing, self.round);
        }
        if self.cfg.time_varying {
            random_walk_step_samples(&mut self.ensemble, self.cfg.diffusion, &mut self.sample_walk);
        }
        random_walk_step_targets(&mut self.targets, self.cfg.diffusion, &mut self.target_walk);
        Ok(true)
    }

    fn finish(&mut self) -> Result<bool, SimError> {
        self.finished = true;
        Ok(false)
    }

    /// Records the current state together with the bound of every view.
    pub fn snapshot(&self) -> Result<SnapshotRecord, SimError> {
        let points = &self.ensemble.points;
        let positions = self.positions();
        let ledgers: Vec<BoundLedger> = self.views.iter().map(|v| *v.ledger()).collect();
        let (weights, neighbors, wub) = match self.cfg.mode {
            Mode::Single => {
                let v = &self.views[0];
                let w = upper_bound_single(v.ledger(), v.position(), points, v.weights());
                (vec![v.weights().to_vec()], Vec::new(), vec![w])
            }
            Mode::Centralized => {
                let common = self.views[0].weights();
                let w = upper_bound_centralized(&ledgers, &positions, points, common, self.cfg.residual)?;
                (vec![common.to_vec()], Vec::new(), vec![w])
            }
            Mode::Decentralized => {
                // The exchange that opens the next round is what each agent
                // knows right now.
                let mut seen = self.views.clone();
                let sets = exchange_in_range(&mut seen, self.cfg.r_comm.unwrap_or(0.0))?;
                let wub = (0..seen.len()).map(|k| decentralized_bound(&seen, k, &sets[k], points)).collect();
                (seen.iter().map(|v| v.weights().to_vec()).collect(), sets, wub)
            }
        };
        Ok(SnapshotRecord {
            step: self.round,
            positions,
            ledgers,
            weights,
            neighbors,
            wub,
            detections: self.detections(),
            shortfall: self.views.iter().any(|v| v.shortfall()),
            sample_points: self.cfg.time_varying.then(|| points.clone()),
        })
    }

    pub fn metrics(&self, initial_wub: f64, final_wub: f64) -> RunMetrics {
        RunMetrics {
            seed: self.cfg.seed,
            mode: self.cfg.mode,
            termination_step: self.round,
            detection_rate: detection_rate(&self.targets),
            detections: self.detections(),
            n_targets: self.targets.len(),
            initial_wub,
            final_wub,
            shortfall: self.views.iter().any(|v| v.shortfall()),
        }
    }
}

/// Headline bound of a snapshot: the single value, or the largest per-agent
/// value in a decentralized run.
pub fn headline_wub(record: &SnapshotRecord) -> f64 {
    record.wub.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Runs `cfg` to completion, handing each snapshot to `sink` as it is taken
/// (round 0, every `snapshot_every` rounds, and the final round).
pub fn run_scenario_with<F>(cfg: ScenarioConfig, sink: F) -> Result<(RunHeader, RunMetrics), SimError>
where
    F: FnMut(&SnapshotRecord),
{
    let mut sim = Scenario::new(cfg)?;
    let header = sim.header();
    let metrics = drive(&mut sim, sink)?;
    Ok((header, metrics))
}

/// Advances `sim` until it finishes, snapshotting on the configured cadence.
/// The scenario is left in its final state so trajectories can be read back.
pub fn drive<F>(sim: &mut Scenario, mut sink: F) -> Result<RunMetrics, SimError>
where
    F: FnMut(&SnapshotRecord),
{
    let every = sim.config().snapshot_every.max(1);
    let first = sim.snapshot()?;
    let initial = headline_wub(&first);
    let mut last_step = first.step;
    let mut last_wub = initial;
    sink(&first);
    while sim.advance()? {
        if sim.round().is_multiple_of(every) {
            let rec = sim.snapshot()?;
            last_step = rec.step;
            last_wub = headline_wub(&rec);
            sink(&rec);
        }
    }
    if last_step != sim.round() {
        let rec = sim.snapshot()?;
        last_wub = headline_wub(&rec);
        sink(&rec);
    }
    Ok(sim.metrics(initial, last_wub))
}

/// Runs `cfg` to completion and collects every snapshot.
pub fn run_scenario(cfg: ScenarioConfig) -> Result<(RunHeader, Vec<SnapshotRecord>, RunMetrics), SimError> {
    let mut records = Vec::new();
    let (header, metrics) = run_scenario_with(cfg, |r| records.push(r.clone()))?;
    Ok((header, records, metrics))
}
