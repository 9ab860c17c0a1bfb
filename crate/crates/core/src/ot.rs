//! Discrete optimal transport between weighted point sets.
//!
//! Three pieces live here:
//!
//! * an exact solver for the balanced transportation problem (successive
//!   shortest paths with node potentials), together with an independent
//!   optimality check based on negative-cycle detection in the residual graph;
//! * the closed-form plan for a single source point, which ships as much mass
//!   as allowed to the nearest sink with positive mass, then the next nearest,
//!   until the source is empty;
//! * [`BoundLedger`] and the upper bounds on the Wasserstein distance built
//!   from per-step deposit costs plus the cost of moving all undelivered
//!   reference mass to the current robot positions.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use thiserror::Error;

use crate::geometry::Point2;

/// Masses at or below this value count as depleted and are clamped to zero.
pub const ZERO_MASS: f64 = 1e-12;

/// Allowed gap between the totals of two measures handed to the exact solver.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum OtError {
    #[error("total masses differ: {source_total} vs {sink_total}")]
    MassMismatch { source_total: f64, sink_total: f64 },
    #[error("point set is empty")]
    EmptyInput,
    #[error("invalid mass {value} at index {index}")]
    InvalidMass { index: usize, value: f64 },
    #[error("points and masses differ in length: {points} vs {masses}")]
    LengthMismatch { points: usize, masses: usize },
    #[error("plan entry ({source_index}, {sink_index}) is out of range")]
    InvalidPlan { source_index: usize, sink_index: usize },
    #[error("transport order must be >= 1, got {0}")]
    InvalidOrder(f64),
}

/// Positions with nonnegative masses.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightedPointSet {
    points: Vec<Point2>,
    masses: Vec<f64>,
}

impl WeightedPointSet {
    pub fn new(points: Vec<Point2>, masses: Vec<f64>) -> Result<Self, OtError> {
        if points.len() != masses.len() {
            return Err(OtError::LengthMismatch { points: points.len(), masses: masses.len() });
        }
        check_masses(&masses)?;
        Ok(Self { points, masses })
    }

    /// Equal masses summing to one.
    pub fn uniform(points: Vec<Point2>) -> Self {
        let m = 1.0 / points.len().max(1) as f64;
        let masses = vec![m; points.len()];
        Self { points, masses }
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn into_parts(self) -> (Vec<Point2>, Vec<f64>) {
        (self.points, self.masses)
    }
}

fn check_masses(masses: &[f64]) -> Result<(), OtError> {
    match masses.iter().position(|m| !(m.is_finite() && *m >= 0.0)) {
        Some(index) => Err(OtError::InvalidMass { index, value: masses[index] }),
        None => Ok(()),
    }
}

/// One shipment of a transport plan.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlanEntry {
    pub source: usize,
    pub sink: usize,
    pub mass: f64,
}

/// Sparse transport plan between a source set of `source_len` points and a
/// sink set of `sink_len` points. Zero shipments are never stored.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TransportPlan {
    entries: Vec<PlanEntry>,
    source_len: usize,
    sink_len: usize,
}

impl TransportPlan {
    pub fn empty(source_len: usize, sink_len: usize) -> Self {
        Self { entries: Vec::new(), source_len, sink_len }
    }

    /// Builds a plan, dropping non-positive entries.
    pub fn from_entries(
        source_len: usize,
        sink_len: usize,
        entries: impl IntoIterator<Item = PlanEntry>,
    ) -> Result<Self, OtError> {
        let mut plan = Self::empty(source_len, sink_len);
        for e in entries {
            if e.source >= source_len || e.sink >= sink_len {
                return Err(OtError::InvalidPlan { source_index: e.source, sink_index: e.sink });
            }
            if !e.mass.is_finite() || e.mass < 0.0 {
                return Err(OtError::InvalidMass { index: e.sink, value: e.mass });
            }
            if e.mass > 0.0 {
                plan.entries.push(e);
            }
        }
        Ok(plan)
    }

    pub fn entries(&self) -> &[PlanEntry] {
        &self.entries
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn sink_len(&self) -> usize {
        self.sink_len
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.mass).sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut rows = vec![0.0; self.source_len];
        for e in &self.entries {
            rows[e.source] += e.mass;
        }
        rows
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut cols = vec![0.0; self.sink_len];
        for e in &self.entries {
            cols[e.sink] += e.mass;
        }
        cols
    }

    /// Row sums bounded by the source masses and column sums by the sink
    /// masses, each up to `tol`.
    pub fn respects_marginals(&self, source: &[f64], sink: &[f64], tol: f64) -> bool {
        source.len() == self.source_len
            && sink.len() == self.sink_len
            && self.row_sums().iter().zip(source).all(|(r, s)| *r <= s + tol)
            && self.column_sums().iter().zip(sink).all(|(c, s)| *c <= s + tol)
    }
}

/// `‖a − b‖^p`. Exact Euclidean distance when `p == 1`.
#[inline]
pub fn ground_cost(a: Point2, b: Point2, p: f64) -> f64 {
    let d = a.dist(b);
    if p == 1.0 {
        d
    } else {
        libm::pow(d, p)
    }
}

/// `Σ mass · ‖x_source − y_sink‖^p` over the plan entries.
pub fn plan_cost(
    plan: &TransportPlan,
    mu: &WeightedPointSet,
    nu: &WeightedPointSet,
    p: f64,
) -> Result<f64, OtError> {
    let mut total = 0.0;
    for e in plan.entries() {
        let (Some(x), Some(y)) = (mu.points.get(e.source), nu.points.get(e.sink)) else {
            return Err(OtError::InvalidPlan { source_index: e.source, sink_index: e.sink });
        };
        total += e.mass * ground_cost(*x, *y, p);
    }
    Ok(total)
}

/// Dense row-major cost matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn between(mu: &[Point2], nu: &[Point2], p: f64) -> Self {
        Self::from_fn(mu.len(), nu.len(), |i, j| ground_cost(mu[i], nu[j], p))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }
}

/// Exact optimal transport between two measures of equal total mass.
pub fn solve_transportation_exact(
    mu: &WeightedPointSet,
    nu: &WeightedPointSet,
    p: f64,
) -> Result<(TransportPlan, f64), OtError> {
    if !(p >= 1.0) {
        return Err(OtError::InvalidOrder(p));
    }
    let cost = CostMatrix::between(&mu.points, &nu.points, p);
    solve_transportation(&mu.masses, &nu.masses, &cost)
}

/// Balanced transportation problem on an explicit cost matrix. Costs must be
/// finite and nonnegative.
pub fn solve_transportation(
    supply: &[f64],
    demand: &[f64],
    cost: &CostMatrix,
) -> Result<(TransportPlan, f64), OtError> {
    if supply.is_empty() || demand.is_empty() {
        return Err(OtError::EmptyInput);
    }
    if cost.rows != supply.len() || cost.cols != demand.len() {
        return Err(OtError::LengthMismatch { points: cost.rows * cost.cols, masses: supply.len() * demand.len() });
    }
    check_masses(supply)?;
    check_masses(demand)?;
    let source_total: f64 = supply.iter().sum();
    let sink_total: f64 = demand.iter().sum();
    if libm::fabs(source_total - sink_total) > MASS_TOLERANCE {
        return Err(OtError::MassMismatch { source_total, sink_total });
    }

    let flows = SuccessiveShortestPaths::new(supply, demand, cost).run();
    let m = supply.len();
    let n = demand.len();
    let mut entries = Vec::new();
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..n {
            let f = flows[i * n + j];
            if f > 0.0 {
                entries.push(PlanEntry { source: i, sink: j, mass: f });
                total += f * cost.get(i, j);
            }
        }
    }
    Ok((TransportPlan { entries, source_len: m, sink_len: n }, total))
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Min-cost flow on the bipartite network `S → sources → sinks → T`.
///
/// Node layout: sources `0..m`, sinks `m..m+n`, super source `m+n`,
/// super sink `m+n+1`. Source→sink arcs are uncapacitated; their reverse
/// residual capacity is the current flow.
struct SuccessiveShortestPaths<'a> {
    supply_left: Vec<f64>,
    demand_left: Vec<f64>,
    cost: &'a CostMatrix,
    flow: Vec<f64>,
    potential: Vec<f64>,
    eps: f64,
}

#[derive(Clone, Copy)]
enum Pred {
    None,
    FromSuper,
    Forward(usize),
    Backward(usize),
    FromSink(usize),
}

impl<'a> SuccessiveShortestPaths<'a> {
    fn new(supply: &[f64], demand: &[f64], cost: &'a CostMatrix) -> Self {
        let total: f64 = supply.iter().sum();
        let m = supply.len();
        let n = demand.len();
        Self {
            supply_left: supply.to_vec(),
            demand_left: demand.to_vec(),
            cost,
            flow: vec![0.0; m * n],
            potential: vec![0.0; m + n + 2],
            eps: 1e-14 * total.max(f64::MIN_POSITIVE),
        }
    }

    fn run(mut self) -> Vec<f64> {
        let m = self.supply_left.len();
        let n = self.demand_left.len();
        let s = m + n;
        let t = m + n + 1;
        let nodes = m + n + 2;
        let mut dist = vec![f64::INFINITY; nodes];
        let mut pred = vec![Pred::None; nodes];
        let mut done = vec![false; nodes];

        loop {
            dist.iter_mut().for_each(|d| *d = f64::INFINITY);
            pred.iter_mut().for_each(|p| *p = Pred::None);
            done.iter_mut().for_each(|d| *d = false);
            let mut heap = BinaryHeap::new();
            dist[s] = 0.0;
            heap.push(HeapItem { dist: 0.0, node: s });

            while let Some(HeapItem { dist: d, node: u }) = heap.pop() {
                if done[u] {
                    continue;
                }
                done[u] = true;
                if u == t {
                    break;
                }
                let mut relax = |v: usize, rc: f64, via: Pred, heap: &mut BinaryHeap<HeapItem>| {
                    let nd = d + rc.max(0.0);
                    if nd < dist[v] {
                        dist[v] = nd;
                        pred[v] = via;
                        heap.push(HeapItem { dist: nd, node: v });
                    }
                };
                if u == s {
                    for i in 0..m {
                        if self.supply_left[i] > self.eps {
                            let rc = self.potential[s] - self.potential[i];
                            relax(i, rc, Pred::FromSuper, &mut heap);
                        }
                    }
                } else if u < m {
                    let i = u;
                    for j in 0..n {
                        let rc = self.cost.get(i, j) + self.potential[i] - self.potential[m + j];
                        relax(m + j, rc, Pred::Forward(i), &mut heap);
                    }
                } else if u < m + n {
                    let j = u - m;
                    if self.demand_left[j] > self.eps {
                        let rc = self.potential[u] - self.potential[t];
                        relax(t, rc, Pred::FromSink(j), &mut heap);
                    }
                    for i in 0..m {
                        if self.flow[i * n + j] > self.eps {
                            let rc = -self.cost.get(i, j) + self.potential[u] - self.potential[i];
                            relax(i, rc, Pred::Backward(j), &mut heap);
                        }
                    }
                }
            }

            if !dist[t].is_finite() {
                break;
            }
            let dt = dist[t];
            for (p, d) in self.potential.iter_mut().zip(&dist) {
                *p += d.min(dt);
            }

            // Bottleneck along the path T ← ... ← S.
            let mut bottleneck = f64::INFINITY;
            let mut v = t;
            loop {
                match pred[v] {
                    Pred::FromSink(j) => {
                        bottleneck = bottleneck.min(self.demand_left[j]);
                        v = m + j;
                    }
                    Pred::Forward(i) => v = i,
                    Pred::Backward(j) => {
                        let i = v;
                        bottleneck = bottleneck.min(self.flow[i * n + j]);
                        v = m + j;
                    }
                    Pred::FromSuper => {
                        bottleneck = bottleneck.min(self.supply_left[v]);
                        break;
                    }
                    Pred::None => unreachable!("broken augmenting path"),
                }
            }
            if !(bottleneck > self.eps) {
                break;
            }

            let mut v = t;
            loop {
                match pred[v] {
                    Pred::FromSink(j) => {
                        self.demand_left[j] -= bottleneck;
                        v = m + j;
                    }
                    Pred::Forward(i) => {
                        let j = v - m;
                        self.flow[i * n + j] += bottleneck;
                        v = i;
                    }
                    Pred::Backward(j) => {
                        let i = v;
                        let f = &mut self.flow[i * n + j];
                        *f -= bottleneck;
                        if *f <= self.eps {
                            *f = 0.0;
                        }
                        v = m + j;
                    }
                    Pred::FromSuper => {
                        self.supply_left[v] -= bottleneck;
                        break;
                    }
                    Pred::None => unreachable!("broken augmenting path"),
                }
            }
        }
        self.flow
    }
}

/// True when no negative-cost cycle exists in the residual graph of a
/// balanced plan, i.e. the plan is optimal for `cost` up to `tol`.
///
/// Independent of how the plan was produced: forward arcs `i → j` always
/// exist with cost `c_ij`, reverse arcs `j → i` with cost `−c_ij` exist where
/// the plan ships mass.
pub fn residual_is_optimal(plan: &TransportPlan, cost: &CostMatrix, tol: f64) -> bool {
    let m = cost.rows;
    let n = cost.cols;
    let mut arcs: Vec<(usize, usize, f64)> = Vec::with_capacity(m * n + plan.entries.len());
    for i in 0..m {
        for j in 0..n {
            arcs.push((i, m + j, cost.get(i, j)));
        }
    }
    for e in &plan.entries {
        arcs.push((m + e.sink, e.source, -cost.get(e.source, e.sink)));
    }
    // Bellman-Ford from a virtual root connected to every node at cost 0.
    let mut dist = vec![0.0f64; m + n];
    for _ in 0..(m + n) {
        let mut changed = false;
        for &(u, v, c) in &arcs {
            if dist[u] + c < dist[v] - tol {
                dist[v] = dist[u] + c;
                changed = true;
            }
        }
        if !changed {
            return true;
        }
    }
    false
}

/// Outcome of the single-source plan.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyDeposit {
    /// Shipments from source `0` to the sinks.
    pub plan: TransportPlan,
    /// `Σ π_j ‖x − y_j‖`.
    pub cost: f64,
    /// Source mass that found no sink with positive mass (terminal shortfall).
    pub undelivered: f64,
}

impl GreedyDeposit {
    pub fn shortfall(&self) -> bool {
        self.undelivered > ZERO_MASS
    }
}

/// Ships `source_mass` from `source` into `sink_masses` in place, nearest
/// positive sink first (lowest index on distance ties), each time moving
/// `min(remaining source mass, sink mass)`.
///
/// Sinks left with at most [`ZERO_MASS`] are clamped to zero. When the sinks
/// run dry first, the rest is reported as `undelivered`.
pub fn deposit_greedy(
    source: Point2,
    source_mass: f64,
    sink_points: &[Point2],
    sink_masses: &mut [f64],
) -> Result<GreedyDeposit, OtError> {
    if sink_points.len() != sink_masses.len() {
        return Err(OtError::LengthMismatch { points: sink_points.len(), masses: sink_masses.len() });
    }
    if !(source_mass.is_finite() && source_mass >= 0.0) {
        return Err(OtError::InvalidMass { index: 0, value: source_mass });
    }
    check_masses(sink_masses)?;

    let mut entries = Vec::new();
    let mut cost = 0.0;
    let mut remaining = source_mass;
    while remaining > ZERO_MASS {
        let mut best: Option<(usize, f64)> = None;
        for (j, (y, &w)) in sink_points.iter().zip(sink_masses.iter()).enumerate() {
            if w > 0.0 {
                let d = source.dist(*y);
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
        }
        let Some((j, d)) = best else { break };
        let w = sink_masses[j];
        let shipped = if w <= remaining {
            sink_masses[j] = 0.0;
            remaining -= w;
            w
        } else {
            let left = w - remaining;
            sink_masses[j] = if left <= ZERO_MASS { 0.0 } else { left };
            let r = remaining;
            remaining = 0.0;
            r
        };
        cost += shipped * d;
        entries.push(PlanEntry { source: 0, sink: j, mass: shipped });
    }
    let undelivered = if remaining > ZERO_MASS { remaining } else { 0.0 };
    Ok(GreedyDeposit {
        plan: TransportPlan { entries, source_len: 1, sink_len: sink_points.len() },
        cost,
        undelivered,
    })
}

/// Non-mutating form of [`deposit_greedy`]; returns the updated sink masses.
pub fn single_source_greedy_plan(
    source: Point2,
    source_mass: f64,
    sinks: &WeightedPointSet,
) -> Result<(GreedyDeposit, Vec<f64>), OtError> {
    let mut masses = sinks.masses.clone();
    let deposit = deposit_greedy(source, source_mass, &sinks.points, &mut masses)?;
    Ok((deposit, masses))
}

/// Running sum of the optimal per-step deposit costs of one agent.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundLedger {
    accumulated: f64,
    steps: u64,
}

impl BoundLedger {
    pub const fn new() -> Self {
        Self { accumulated: 0.0, steps: 0 }
    }

    /// Restores a ledger from recorded values.
    pub fn from_parts(accumulated: f64, steps: u64) -> Self {
        Self { accumulated, steps }
    }

    /// Appends one step's deposit cost. Negative or non-finite costs are
    /// rejected so the total never decreases.
    pub fn record(&mut self, deposit_cost: f64) {
        debug_assert!(deposit_cost >= 0.0, "negative deposit cost {deposit_cost}");
        if deposit_cost.is_finite() && deposit_cost > 0.0 {
            self.accumulated += deposit_cost;
        }
        self.steps += 1;
    }

    pub fn accumulated(&self) -> f64 {
        self.accumulated
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// The ledger that has seen more steps (ties keep `self`).
    pub fn fresher(self, other: BoundLedger) -> BoundLedger {
        if other.steps > self.steps {
            other
        } else {
            self
        }
    }
}

/// `Σ_j w_j ‖x − y_j‖`: cost of sending all undelivered reference mass to `x`.
pub fn residual_cost(position: Point2, points: &[Point2], weights: &[f64]) -> f64 {
    points
        .iter()
        .zip(weights)
        .filter(|(_, w)| **w > 0.0)
        .map(|(y, w)| w * position.dist(*y))
        .sum()
}

/// Single-agent bound: ledger total plus the residual cost at `position`.
pub fn upper_bound_single(
    ledger: &BoundLedger,
    position: Point2,
    points: &[Point2],
    weights: &[f64],
) -> f64 {
    ledger.accumulated + residual_cost(position, points, weights)
}

/// How the residual term of the multi-agent bound is aggregated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ResidualMode {
    /// Every agent's distance term is weighted by the full common weight.
    #[default]
    Verbatim,
    /// The summed residual is divided by the number of agents.
    AgentAverage,
}

/// Centralized bound: `Σ_k ledger_k + Σ_k Σ_j n_j ‖x^k − y_j‖`.
pub fn upper_bound_centralized(
    ledgers: &[BoundLedger],
    positions: &[Point2],
    points: &[Point2],
    common_weights: &[f64],
    mode: ResidualMode,
) -> Result<f64, OtError> {
    if ledgers.is_empty() || positions.is_empty() {
        return Err(OtError::EmptyInput);
    }
    if ledgers.len() != positions.len() {
        return Err(OtError::LengthMismatch { points: positions.len(), masses: ledgers.len() });
    }
    let deposits: f64 = ledgers.iter().map(|l| l.accumulated).sum();
    let residual: f64 = positions
        .iter()
        .map(|x| residual_cost(*x, points, common_weights))
        .sum();
    Ok(match mode {
        ResidualMode::Verbatim => deposits + residual,
        ResidualMode::AgentAverage => deposits + residual / positions.len() as f64,
    })
}

/// Decentralized bound for one agent. `ledgers` and `positions` describe the
/// agent's neighbor set, which includes the agent itself; `view_weights` is
/// the querying agent's own weight vector.
pub fn upper_bound_decentralized(
    ledgers: &[BoundLedger],
    positions: &[Point2],
    points: &[Point2],
    view_weights: &[f64],
) -> f64 {
    let deposits: f64 = ledgers.iter().map(|l| l.accumulated).sum();
    let residual: f64 = positions
        .iter()
        .map(|x| residual_cost(*x, points, view_weights))
        .sum();
    deposits + residual
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec;

    fn set(points: &[(f64, f64)], masses: &[f64]) -> WeightedPointSet {
        WeightedPointSet::new(
            points.iter().map(|&(x, y)| Point2::new(x, y)).collect(),
            masses.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn single_pairing() {
        let mu = set(&[(0.0, 0.0)], &[1.0]);
        let nu = set(&[(3.0, 4.0)], &[1.0]);
        let (plan, cost) = solve_transportation_exact(&mu, &nu, 1.0).unwrap();
        assert_eq!(cost, 5.0);
        assert_eq!(plan.entries(), &[PlanEntry { source: 0, sink: 0, mass: 1.0 }]);
    }

    #[test]
    fn identical_sets_cost_nothing() {
        let mu = set(&[(0.0, 0.0), (1.0, 2.0), (5.0, -1.0)], &[0.2, 0.5, 0.3]);
        let (plan, cost) = solve_transportation_exact(&mu, &mu, 1.0).unwrap();
        assert!(cost.abs() < 1e-12);
        for e in plan.entries() {
            assert_eq!(e.source, e.sink);
        }
    }

    #[test]
    fn two_by_two_matches_vertex_enumeration() {
        let mu = set(&[(0.0, 0.0), (10.0, 0.0)], &[0.5, 0.5]);
        let nu = set(&[(1.0, 0.0), (9.0, 0.0)], &[0.5, 0.5]);
        // The 2×2 polytope is a segment in π_00 ∈ [max(0, a0 − b1), min(a0, b0)].
        let c = CostMatrix::between(mu.points(), nu.points(), 1.0);
        let lo: f64 = 0.0;
        let hi: f64 = 0.5;
        let vertex_cost = |p00: f64| {
            let p01 = 0.5 - p00;
            let p10 = 0.5 - p00;
            let p11 = p00;
            p00 * c.get(0, 0) + p01 * c.get(0, 1) + p10 * c.get(1, 0) + p11 * c.get(1, 1)
        };
        let oracle = vertex_cost(lo).min(vertex_cost(hi));
        assert!((oracle - 1.0).abs() < 1e-12);
        let (_, cost) = solve_transportation_exact(&mu, &nu, 1.0).unwrap();
        assert!((cost - oracle).abs() < 1e-12);
    }

    #[test]
    fn mass_mismatch_and_empty() {
        let mu = set(&[(0.0, 0.0)], &[1.0]);
        let nu = set(&[(0.0, 0.0)], &[0.5]);
        assert!(matches!(
            solve_transportation_exact(&mu, &nu, 1.0),
            Err(OtError::MassMismatch { .. })
        ));
        let empty = set(&[], &[]);
        assert_eq!(solve_transportation_exact(&empty, &mu, 1.0), Err(OtError::EmptyInput));
        assert_eq!(solve_transportation_exact(&mu, &mu, 0.5), Err(OtError::InvalidOrder(0.5)));
    }

    #[test]
    fn negative_mass_rejected() {
        assert!(matches!(
            WeightedPointSet::new(vec![Point2::ORIGIN], vec![-0.1]),
            Err(OtError::InvalidMass { index: 0, .. })
        ));
    }

    #[test]
    fn greedy_forced_order() {
        let sinks = set(&[(1.0, 0.0), (2.0, 0.0)], &[0.3, 0.4]);
        let (dep, left) = single_source_greedy_plan(Point2::ORIGIN, 0.5, &sinks).unwrap();
        assert_eq!(dep.plan.entries().len(), 2);
        assert_eq!(dep.plan.entries()[0].mass, 0.3);
        assert!((dep.plan.entries()[1].mass - 0.2).abs() < 1e-15);
        assert!((dep.cost - 0.7).abs() < 1e-15);
        assert_eq!(left[0], 0.0);
        assert!((left[1] - 0.2).abs() < 1e-15);
        assert!(!dep.shortfall());
    }

    #[test]
    fn greedy_zero_source() {
        let sinks = set(&[(1.0, 0.0)], &[0.3]);
        let (dep, left) = single_source_greedy_plan(Point2::ORIGIN, 0.0, &sinks).unwrap();
        assert!(dep.plan.is_empty());
        assert_eq!(dep.cost, 0.0);
        assert_eq!(left, vec![0.3]);
    }

    #[test]
    fn greedy_shortfall_ships_everything() {
        let sinks = set(&[(1.0, 0.0), (0.0, 2.0)], &[0.1, 0.2]);
        let (dep, left) = single_source_greedy_plan(Point2::ORIGIN, 0.5, &sinks).unwrap();
        assert!(dep.shortfall());
        assert!((dep.undelivered - 0.2).abs() < 1e-15);
        assert_eq!(left, vec![0.0, 0.0]);
        assert!((dep.cost - (0.1 + 0.4)).abs() < 1e-15);
    }

    #[test]
    fn greedy_tie_breaks_to_lowest_index() {
        let sinks = set(&[(0.0, 1.0), (1.0, 0.0)], &[0.5, 0.5]);
        let (dep, _) = single_source_greedy_plan(Point2::ORIGIN, 0.25, &sinks).unwrap();
        assert_eq!(dep.plan.entries()[0].sink, 0);
    }

    #[test]
    fn greedy_negative_source() {
        let sinks = set(&[(0.0, 1.0)], &[0.5]);
        assert!(matches!(
            single_source_greedy_plan(Point2::ORIGIN, -1.0, &sinks),
            Err(OtError::InvalidMass { .. })
        ));
    }

    #[test]
    fn plan_cost_cases() {
        let mu = set(&[(0.0, 0.0)], &[1.0]);
        let nu = set(&[(3.0, 4.0)], &[1.0]);
        assert_eq!(plan_cost(&TransportPlan::empty(1, 1), &mu, &nu, 1.0).unwrap(), 0.0);
        let plan = TransportPlan::from_entries(1, 1, [PlanEntry { source: 0, sink: 0, mass: 1.0 }]).unwrap();
        assert_eq!(plan_cost(&plan, &mu, &nu, 1.0).unwrap(), 5.0);
        let bad = TransportPlan { entries: vec![PlanEntry { source: 3, sink: 0, mass: 1.0 }], source_len: 4, sink_len: 1 };
        assert!(matches!(plan_cost(&bad, &mu, &nu, 1.0), Err(OtError::InvalidPlan { .. })));
    }

    #[test]
    fn ledger_is_monotone() {
        let mut l = BoundLedger::new();
        l.record(0.5);
        l.record(0.0);
        l.record(0.25);
        assert_eq!(l.accumulated(), 0.75);
        assert_eq!(l.steps(), 3);
    }

    #[test]
    fn bound_reductions() {
        let pts = [Point2::new(3.0, 4.0), Point2::new(0.0, 1.0)];
        let w = [0.5, 0.5];
        let ledger = BoundLedger::new();
        let single = upper_bound_single(&ledger, Point2::ORIGIN, &pts, &w);
        assert_eq!(single, 0.5 * 5.0 + 0.5 * 1.0);
        let central =
            upper_bound_centralized(&[ledger], &[Point2::ORIGIN], &pts, &w, ResidualMode::Verbatim).unwrap();
        assert_eq!(central, single);
        let decentral = upper_bound_decentralized(&[ledger], &[Point2::ORIGIN], &pts, &w);
        assert_eq!(decentral, single);

        let mut l2 = BoundLedger::new();
        l2.record(2.0);
        let zeros = [0.0, 0.0];
        assert_eq!(upper_bound_single(&l2, Point2::ORIGIN, &pts, &zeros), 2.0);
        let both = upper_bound_centralized(
            &[l2, l2],
            &[Point2::ORIGIN, Point2::new(9.0, 9.0)],
            &pts,
            &zeros,
            ResidualMode::Verbatim,
        )
        .unwrap();
        assert_eq!(both, 4.0);
        assert_eq!(upper_bound_decentralized(&[l2, l2], &[Point2::ORIGIN, Point2::ORIGIN], &pts, &zeros), 4.0);
        assert_eq!(
            upper_bound_centralized(&[], &[], &pts, &w, ResidualMode::Verbatim),
            Err(OtError::EmptyInput)
        );
    }
}
