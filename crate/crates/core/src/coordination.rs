//! Multi-agent coordination.
//!
//! Every agent keeps a private copy of the sample weights. In the
//! centralized scheme a supervisor fuses the copies with a componentwise
//! minimum after each round and hands the result back to everyone. In the
//! decentralized scheme agents only merge views (again by componentwise
//! minimum) with agents inside the communication range.
//!
//! Rounds are the synchronization unit. In [`RoundOrder::Simultaneous`]
//! rounds per-agent planning reads nothing but the agent's own view of the
//! round-start state, so it can run in any order. In
//! [`RoundOrder::Sequential`] rounds agents take turns in index order and
//! later agents see what earlier ones deposited.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::geometry::Point2;
use crate::motion::MotionController;
use crate::ot::{upper_bound_decentralized, BoundLedger};
use crate::planner::{plan_step, PlanError, PlannerParams, StepReport};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum CoordError {
    #[error("weight views disagree in dimension: expected {expected}, found {found}")]
    InvalidViews { expected: usize, found: usize },
    #[error("no agents")]
    NoAgents,
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// One agent's state and knowledge.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentView {
    pub(crate) id: usize,
    pub(crate) position: Point2,
    pub(crate) weights: Vec<f64>,
    pub(crate) ledger: BoundLedger,
    pub(crate) trajectory: Vec<Point2>,
    pub(crate) steps_taken: u64,
    pub(crate) peer_ledgers: BTreeMap<usize, BoundLedger>,
    pub(crate) shortfall: bool,
}

impl AgentView {
    pub fn new(id: usize, position: Point2, weights: Vec<f64>) -> Self {
        Self {
            id,
            position,
            weights,
            ledger: BoundLedger::new(),
            trajectory: vec![position],
            steps_taken: 0,
            peer_ledgers: BTreeMap::new(),
            shortfall: false,
        }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn position(&self) -> Point2 {
        self.position
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn ledger(&self) -> &BoundLedger {
        &self.ledger
    }

    pub fn trajectory(&self) -> &[Point2] {
        &self.trajectory
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    /// True once any deposit could not be placed in full.
    pub fn shortfall(&self) -> bool {
        self.shortfall
    }

    /// Latest ledger this agent knows for `agent`.
    pub fn known_ledger(&self, agent: usize) -> BoundLedger {
        if agent == self.id {
            self.ledger
        } else {
            self.peer_ledgers.get(&agent).copied().unwrap_or_default()
        }
    }

    pub fn remaining_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_depleted(&self) -> bool {
        self.weights.iter().all(|w| *w <= 0.0)
    }

    /// Still has budget and something left to cover.
    pub fn is_active(&self, budget: u64) -> bool {
        self.steps_taken < budget && !self.is_depleted()
    }

    /// Replaces the weight view; used when restoring state from a log or
    /// seeding tests.
    pub fn set_weights(&mut self, weights: Vec<f64>) {
        self.weights = weights;
    }

    fn merge_ledgers_from(&mut self, other_id: usize, other_ledger: BoundLedger, other_peers: &BTreeMap<usize, BoundLedger>) {
        let mut absorb = |id: usize, l: BoundLedger| {
            if id != self.id {
                let e = self.peer_ledgers.entry(id).or_default();
                *e = e.fresher(l);
            }
        };
        absorb(other_id, other_ledger);
        for (&id, &l) in other_peers {
            absorb(id, l);
        }
    }
}

/// Communication and budget settings of a multi-agent run.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CommConfig {
    pub r_comm: f64,
    pub n_agents: usize,
    /// Per-agent step budget in the centralized scheme; `M = n_a · t_e`.
    pub effective_steps: u64,
}

impl CommConfig {
    pub fn total_points(&self) -> u64 {
        self.n_agents as u64 * self.effective_steps
    }
}

fn check_dims(views: &[AgentView]) -> Result<usize, CoordError> {
    let first = views.first().ok_or(CoordError::NoAgents)?;
    let n = first.weights.len();
    match views.iter().find(|v| v.weights.len() != n) {
        Some(v) => Err(CoordError::InvalidViews { expected: n, found: v.weights.len() }),
        None => Ok(n),
    }
}

/// `n_t(y_j) = min_k n_t^k(y_j)`.
pub fn fuse_common_weights(views: &[AgentView]) -> Result<Vec<f64>, CoordError> {
    let n = check_dims(views)?;
    let mut common = vec![f64::INFINITY; n];
    for v in views {
        for (c, w) in common.iter_mut().zip(&v.weights) {
            *c = c.min(*w);
        }
    }
    Ok(common)
}

/// `n_t^k ← n_t` for every agent.
pub fn broadcast_common(views: &mut [AgentView], common: &[f64]) -> Result<(), CoordError> {
    for v in views.iter_mut() {
        if v.weights.len() != common.len() {
            return Err(CoordError::InvalidViews { expected: common.len(), found: v.weights.len() });
        }
        v.weights.copy_from_slice(common);
    }
    Ok(())
}

/// Unordered pairs `(k, q)`, `k < q`, with `‖x^k − x^q‖ ≤ r_comm`.
pub fn comm_pairs(positions: &[Point2], r_comm: f64) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for k in 0..positions.len() {
        for q in (k + 1)..positions.len() {
            if positions[k].dist(positions[q]) <= r_comm {
                pairs.push((k, q));
            }
        }
    }
    pairs
}

/// Closed neighbor sets: `N_k` = `{k}` plus every agent within range, ascending.
pub fn neighbor_sets(positions: &[Point2], r_comm: f64) -> Vec<Vec<usize>> {
    let mut sets: Vec<Vec<usize>> = (0..positions.len()).map(|k| vec![k]).collect();
    for (k, q) in comm_pairs(positions, r_comm) {
        sets[k].push(q);
        sets[q].push(k);
    }
    for s in sets.iter_mut() {
        s.sort_unstable();
    }
    sets
}

/// Two agents in contact adopt the componentwise minimum of their weight
/// views and learn each other's deposit ledgers.
pub fn pairwise_exchange(a: &mut AgentView, b: &mut AgentView) -> Result<(), CoordError> {
    if a.weights.len() != b.weights.len() {
        return Err(CoordError::InvalidViews { expected: a.weights.len(), found: b.weights.len() });
    }
    for (x, y) in a.weights.iter_mut().zip(b.weights.iter_mut()) {
        let m = x.min(*y);
        *x = m;
        *y = m;
    }
    let a_peers = a.peer_ledgers.clone();
    let (a_id, a_ledger) = (a.id, a.ledger);
    a.merge_ledgers_from(b.id, b.ledger, &b.peer_ledgers);
    b.merge_ledgers_from(a_id, a_ledger, &a_peers);
    Ok(())
}

/// Synchronous exchange among all agents: each agent's new view is the
/// minimum over its closed neighbor set of the views held at the start of
/// the exchange. Returns the neighbor sets used.
pub fn exchange_in_range(views: &mut [AgentView], r_comm: f64) -> Result<Vec<Vec<usize>>, CoordError> {
    check_dims(views)?;
    let positions: Vec<Point2> = views.iter().map(|v| v.position).collect();
    let sets = neighbor_sets(&positions, r_comm);
    if sets.iter().all(|s| s.len() == 1) {
        return Ok(sets);
    }
    let before: Vec<AgentView> = views.to_vec();
    for (k, view) in views.iter_mut().enumerate() {
        for &q in &sets[k] {
            if q == k {
                continue;
            }
            let other = &before[q];
            for (w, o) in view.weights.iter_mut().zip(&other.weights) {
                *w = w.min(*o);
            }
            view.merge_ledgers_from(other.id, other.ledger, &other.peer_ledgers);
        }
    }
    Ok(sets)
}

/// Bound of agent `k` over its neighbor set, using its own weight view and
/// the ledgers it knows.
pub fn decentralized_bound(views: &[AgentView], k: usize, neighbors: &[usize], points: &[Point2]) -> f64 {
    let me = &views[k];
    let ledgers: Vec<BoundLedger> = neighbors.iter().map(|&q| me.known_ledger(views[q].id)).collect();
    let positions: Vec<Point2> = neighbors.iter().map(|&q| views[q].position).collect();
    upper_bound_decentralized(&ledgers, &positions, points, &me.weights)
}

/// Result of one centralized round.
#[derive(Clone, Debug, PartialEq)]
pub struct CentralRound {
    pub common: Vec<f64>,
    pub reports: Vec<StepReport>,
}

/// Intra-round ordering of a round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum RoundOrder {
    /// Every agent plans on its own copy of the round-start weights.
    Simultaneous,
    /// Agents plan in index order, each starting from the copy left by the
    /// previous agent, so later agents see earlier deposits of the round.
    #[default]
    Sequential,
}

/// Every agent plans and deposits on its own copy of the round-start common
/// weights; the supervisor then fuses and broadcasts.
pub fn centralized_round<C: MotionController + ?Sized>(
    views: &mut [AgentView],
    points: &[Point2],
    params: &PlannerParams,
    motion: &C,
) -> Result<CentralRound, CoordError> {
    centralized_round_ordered(views, points, params, motion, RoundOrder::Simultaneous)
}

/// [`centralized_round`] with an explicit intra-round order. Fusion is the
/// componentwise minimum in both cases; under [`RoundOrder::Sequential`]
/// the copies form a chain and the minimum is the last agent's copy.
pub fn centralized_round_ordered<C: MotionController + ?Sized>(
    views: &mut [AgentView],
    points: &[Point2],
    params: &PlannerParams,
    motion: &C,
    order: RoundOrder,
) -> Result<CentralRound, CoordError> {
    check_dims(views)?;
    if views.iter().all(|v| v.is_depleted()) {
        return Err(PlanError::Exhausted.into());
    }
    let mut reports = Vec::with_capacity(views.len());
    let mut carry: Option<Vec<f64>> = None;
    for view in views.iter_mut() {
        if let Some(w) = carry.take() {
            view.weights = w;
        }
        if view.is_depleted() {
            // Sequential order only: earlier agents of the round used up the
            // last weight, so the remaining agents stay put.
            break;
        }
        reports.push(plan_step(view, points, params, motion)?);
        if order == RoundOrder::Sequential {
            carry = Some(view.weights.clone());
        }
    }
    let common = fuse_common_weights(views)?;
    broadcast_common(views, &common)?;
    Ok(CentralRound { common, reports })
}

/// Result of one decentralized round.
#[derive(Clone, Debug, PartialEq)]
pub struct DecentralRound {
    /// Neighbor sets used for the exchange at the start of the round.
    pub neighbors: Vec<Vec<usize>>,
    /// One entry per agent; `None` for agents that were halted.
    pub reports: Vec<Option<StepReport>>,
}

impl DecentralRound {
    pub fn active_agents(&self) -> usize {
        self.reports.iter().filter(|r| r.is_some()).count()
    }
}

/// Exchange with in-range neighbors, then one planning step for every agent
/// that still has budget and a non-empty view.
pub fn decentralized_round<C: MotionController + ?Sized>(
    views: &mut [AgentView],
    points: &[Point2],
    params: &PlannerParams,
    motion: &C,
    r_comm: f64,
) -> Result<DecentralRound, CoordError> {
    decentralized_round_ordered(views, points, params, motion, r_comm, RoundOrder::Simultaneous)
}

/// [`decentralized_round`] with an explicit intra-round order.
///
/// Simultaneous: one synchronous exchange over the round-start positions,
/// then every active agent plans. Sequential: agents take turns in index
/// order; on its turn an agent exchanges pairwise with everyone currently in
/// range (both sides adopt the minimum) and then plans, so it sees deposits
/// made earlier in the round by agents it can reach.
pub fn decentralized_round_ordered<C: MotionController + ?Sized>(
    views: &mut [AgentView],
    points: &[Point2],
    params: &PlannerParams,
    motion: &C,
    r_comm: f64,
    order: RoundOrder,
) -> Result<DecentralRound, CoordError> {
    if order == RoundOrder::Simultaneous {
        let neighbors = exchange_in_range(views, r_comm)?;
        let mut reports = Vec::with_capacity(views.len());
        for view in views.iter_mut() {
            if view.is_active(params.budget) {
                reports.push(Some(plan_step(view, points, params, motion)?));
            } else {
                reports.push(None);
            }
        }
        return Ok(DecentralRound { neighbors, reports });
    }
    check_dims(views)?;
    let n = views.len();
    let mut neighbors = Vec::with_capacity(n);
    let mut reports = Vec::with_capacity(n);
    for k in 0..n {
        let mut set = vec![k];
        for q in 0..n {
            if q != k && views[k].position.dist(views[q].position) <= r_comm {
                let (a, b) = pair_mut(views, k, q);
                pairwise_exchange(a, b)?;
                set.push(q);
            }
        }
        set.sort_unstable();
        neighbors.push(set);
        let view = &mut views[k];
        if view.is_active(params.budget) {
            reports.push(Some(plan_step(view, points, params, motion)?));
        } else {
            reports.push(None);
        }
    }
    Ok(DecentralRound { neighbors, reports })
}

fn pair_mut<T>(items: &mut [T], a: usize, b: usize) -> (&mut T, &mut T) {
    debug_assert!(a != b);
    if a < b {
        let (lo, hi) = items.split_at_mut(b);
        (&mut lo[a], &mut hi[0])
    } else {
        let (lo, hi) = items.split_at_mut(a);
        (&mut hi[0], &mut lo[b])
    }
}
