use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::coordination::RoundOrder;
use crate::density::{Domain, GaussianMixture};
use crate::geometry::Point2;
use crate::motion::FirstOrderParams;
use crate::ot::ResidualMode;
use crate::planner::{PlannerParams, MAX_HORIZON};

/// Which coordination scheme a scenario runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Mode {
    Single,
    Centralized,
    Decentralized,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Single => "single",
            Mode::Centralized => "centralized",
            Mode::Decentralized => "decentralized",
        }
    }
}

/// A configuration problem, tagged with the offending field.
#[derive(Clone, Debug, Error, PartialEq)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

/// Everything needed to reproduce one run.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub domain: Domain,
    pub mixture: GaussianMixture,
    /// Sample points `N`.
    pub n_samples: usize,
    /// Robot points `M`.
    pub budget: u64,
    /// Agents `n_a`.
    pub n_agents: usize,
    /// Per-agent rounds `t_e` (centralized). Derived as `M / n_a` when absent.
    pub effective_steps: Option<u64>,
    /// Fixed start positions; uniform in the domain when absent.
    pub initial_positions: Option<Vec<Point2>>,
    pub motion: FirstOrderParams,
    pub r_sensing: f64,
    pub r_comm: Option<f64>,
    pub horizon: usize,
    pub r0: Option<f64>,
    pub delta: Option<f64>,
    /// Random-walk rate `v` for targets (and samples when `time_varying`).
    pub diffusion: f64,
    /// Targets `N_h`.
    pub n_targets: usize,
    pub time_varying: bool,
    pub seed: u64,
    pub snapshot_every: u64,
    /// Detect along the whole motion segment instead of at its end point.
    pub sweep_sensing: bool,
    pub residual: ResidualMode,
    /// Intra-round order of multi-agent rounds.
    pub round_order: RoundOrder,
}

impl ScenarioConfig {
    /// Minimal configuration with the defaults used throughout: `h = 3`,
    /// `Δt = 1`, `r_sensing = 15`, snapshots every 10 rounds.
    pub fn new(
        mode: Mode,
        domain: Domain,
        mixture: GaussianMixture,
        n_samples: usize,
        budget: u64,
        n_agents: usize,
        u_max: f64,
    ) -> Self {
        Self {
            mode,
            domain,
            mixture,
            n_samples,
            budget,
            n_agents,
            effective_steps: None,
            initial_positions: None,
            motion: FirstOrderParams { u_max, dt: 1.0 },
            r_sensing: 15.0,
            r_comm: None,
            horizon: 3,
            r0: None,
            delta: None,
            diffusion: 0.0,
            n_targets: 0,
            time_varying: false,
            seed: 0,
            snapshot_every: 10,
            sweep_sensing: false,
            residual: ResidualMode::Verbatim,
            round_order: RoundOrder::Sequential,
        }
    }

    /// Centralized round budget `t_e`.
    pub fn rounds_budget(&self) -> u64 {
        self.effective_steps.unwrap_or(self.budget / self.n_agents.max(1) as u64)
    }

    /// Radius schedule defaults to a hundredth of the domain diagonal.
    pub fn planner_params(&self) -> PlannerParams {
        let step = self.domain.diagonal() / 100.0;
        PlannerParams {
            horizon: self.horizon,
            r0: self.r0.unwrap_or(step),
            delta: self.delta.unwrap_or(step),
            budget: self.budget,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if self.n_samples == 0 {
            return Err(ConfigError::new("N", "must be at least 1"));
        }
        if self.budget == 0 {
            return Err(ConfigError::new("M", "must be at least 1"));
        }
        if self.n_agents == 0 {
            return Err(ConfigError::new("n_a", "must be at least 1"));
        }
        if self.mode == Mode::Single && self.n_agents != 1 {
            return Err(ConfigError::new("n_a", "single mode runs exactly one agent"));
        }
        if self.mode == Mode::Centralized {
            let t_e = self.rounds_budget();
            if t_e == 0 || t_e * self.n_agents as u64 != self.budget {
                return Err(ConfigError::new(
                    "t_e",
                    format!("centralized runs need M = n_a * t_e (M = {}, n_a = {}, t_e = {t_e})", self.budget, self.n_agents),
                ));
            }
        }
        if self.mode == Mode::Decentralized && !self.r_comm.is_some_and(positive) {
            return Err(ConfigError::new("r_comm", "decentralized runs need a positive communication range"));
        }
        if let Some(r) = self.r_comm {
            if !positive(r) {
                return Err(ConfigError::new("r_comm", "must be positive"));
            }
        }
        if let Some(pos) = &self.initial_positions {
            if pos.len() != self.n_agents {
                return Err(ConfigError::new(
                    "initial_positions",
                    format!("expected {} positions (one per agent), got {}", self.n_agents, pos.len()),
                ));
            }
            if let Some(i) = pos.iter().position(|p| !p.is_finite()) {
                return Err(ConfigError::new(format!("initial_positions[{i}]"), "not finite"));
            }
        }
        if !positive(self.motion.u_max) {
            return Err(ConfigError::new("u_max", "must be positive"));
        }
        if !positive(self.motion.dt) {
            return Err(ConfigError::new("dt", "must be positive"));
        }
        if self.horizon == 0 || self.horizon > MAX_HORIZON {
            return Err(ConfigError::new("h", format!("must be in 1..={MAX_HORIZON}")));
        }
        if self.r0.is_some_and(|r| !positive(r)) {
            return Err(ConfigError::new("r0", "must be positive"));
        }
        if self.delta.is_some_and(|d| !positive(d)) {
            return Err(ConfigError::new("delta", "must be positive"));
        }
        if !(self.diffusion >= 0.0 && self.diffusion.is_finite()) {
            return Err(ConfigError::new("v", "must be nonnegative"));
        }
        if self.n_targets > 0 && !positive(self.r_sensing) {
            return Err(ConfigError::new("r_sensing", "must be positive when targets are present"));
        }
        if self.snapshot_every == 0 {
            return Err(ConfigError::new("snapshot_every", "must be at least 1"));
        }
        Ok(())
    }
}
