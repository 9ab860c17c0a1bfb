//! Single-agent receding-horizon planner.
//!
//! One planning step:
//!
//! 1. grow a circle around the robot from `r0` in increments of `delta` until
//!    it holds `h` sample points with positive weight (or every remaining one);
//! 2. score every visiting order of those points, charging each leg its
//!    length divided by the weight of the point it arrives at;
//! 3. head for the first point of the cheapest order;
//! 4. after the motion step, deposit one robot point's mass `1/M` from the
//!    position actually reached, nearest weight first.

use alloc::vec::Vec;
use core::cmp::Ordering;

use itertools::Itertools;
use thiserror::Error;

use crate::coordination::AgentView;
use crate::geometry::Point2;
use crate::motion::MotionController;
use crate::ot::{deposit_greedy, GreedyDeposit, OtError};

/// Largest supported horizon; `h!` candidates are scored each step.
pub const MAX_HORIZON: usize = 6;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("no sample point has positive weight")]
    Exhausted,
    #[error("energy budget of {0} robot points is spent")]
    BudgetSpent(u64),
    #[error("neighborhood point {0} has zero weight")]
    InvalidNeighborhood(usize),
    #[error("invalid planner parameter: {0}")]
    InvalidParams(&'static str),
    #[error(transparent)]
    Transport(#[from] OtError),
}

/// Horizon, radius schedule and energy budget.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlannerParams {
    /// Number of nearby points ordered per step (`h`).
    pub horizon: usize,
    /// Initial search radius.
    pub r0: f64,
    /// Radius increment.
    pub delta: f64,
    /// Total robot points `M`; each deposit carries `1/M`.
    pub budget: u64,
}

impl PlannerParams {
    pub fn new(horizon: usize, r0: f64, delta: f64, budget: u64) -> Result<Self, PlanError> {
        let p = Self { horizon, r0, delta, budget };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        if self.horizon == 0 || self.horizon > MAX_HORIZON {
            return Err(PlanError::InvalidParams("horizon must be in 1..=6"));
        }
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return Err(PlanError::InvalidParams("r0 must be positive"));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(PlanError::InvalidParams("delta must be positive"));
        }
        if self.budget == 0 {
            return Err(PlanError::InvalidParams("budget M must be at least 1"));
        }
        Ok(())
    }

    pub fn deposit_mass(&self) -> f64 {
        1.0 / self.budget as f64
    }
}

/// Positive-weight sample points selected around the robot.
#[derive(Clone, Debug, PartialEq)]
pub struct Neighborhood {
    /// Sample indices, ascending.
    pub indices: Vec<usize>,
    /// Final search radius.
    pub radius: f64,
}

/// A visiting order of the neighborhood and its cost.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidatePath {
    pub order: Vec<usize>,
    pub cost: f64,
}

/// Smallest `r0 + n·delta` (n ≥ 0) that reaches `distance`.
pub fn grown_radius(r0: f64, delta: f64, distance: f64) -> f64 {
    if distance <= r0 {
        return r0;
    }
    let mut n = libm::ceil((distance - r0) / delta);
    while r0 + n * delta < distance {
        n += 1.0;
    }
    while n > 0.0 && r0 + (n - 1.0) * delta >= distance {
        n -= 1.0;
    }
    r0 + n * delta
}

fn by_distance_then_index(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Grows the search circle until it holds `min(h, #positive)` positive-weight
/// points and returns those nearest ones (distance ties by lower index).
pub fn find_neighborhood(
    position: Point2,
    points: &[Point2],
    weights: &[f64],
    params: &PlannerParams,
) -> Result<Neighborhood, PlanError> {
    let mut candidates: Vec<(f64, usize)> = points
        .iter()
        .zip(weights)
        .enumerate()
        .filter(|(_, (_, w))| **w > 0.0)
        .map(|(j, (y, _))| (position.dist(*y), j))
        .collect();
    if candidates.is_empty() {
        return Err(PlanError::Exhausted);
    }
    let k = params.horizon.min(candidates.len());
    candidates.select_nth_unstable_by(k - 1, by_distance_then_index);
    let kth = candidates[k - 1].0;
    let radius = grown_radius(params.r0, params.delta, kth);
    let mut indices: Vec<usize> = candidates[..k].iter().map(|c| c.1).collect();
    indices.sort_unstable();
    Ok(Neighborhood { indices, radius })
}

/// Cost of visiting `order` starting from `position`.
pub fn path_cost(position: Point2, order: &[usize], points: &[Point2], weights: &[f64]) -> f64 {
    let mut cost = 0.0;
    let mut from = position;
    for &j in order {
        cost += from.dist(points[j]) / weights[j];
        from = points[j];
    }
    cost
}

/// All `k!` visiting orders of the neighborhood, in lexicographic order of
/// their index sequences.
pub fn enumerate_candidates(
    position: Point2,
    nbhd: &Neighborhood,
    points: &[Point2],
    weights: &[f64],
) -> Result<Vec<CandidatePath>, PlanError> {
    if let Some(&j) = nbhd.indices.iter().find(|&&j| !(weights[j] > 0.0)) {
        return Err(PlanError::InvalidNeighborhood(j));
    }
    let k = nbhd.indices.len();
    Ok(nbhd
        .indices
        .iter()
        .copied()
        .permutations(k)
        .map(|order| {
            let cost = path_cost(position, &order, points, weights);
            CandidatePath { order, cost }
        })
        .collect())
}

/// Cheapest candidate; equal costs resolve to the lexicographically smallest
/// index sequence.
pub fn select_goal(candidates: &[CandidatePath]) -> Option<&CandidatePath> {
    candidates.iter().min_by(|a, b| a.cost.total_cmp(&b.cost).then_with(|| a.order.cmp(&b.order)))
}

/// Deposits `deposit_mass` from `arrived` into `weights`, nearest positive
/// weight first. The returned cost is the step's ledger entry.
pub fn deposit_weight(
    arrived: Point2,
    points: &[Point2],
    weights: &mut [f64],
    deposit_mass: f64,
) -> Result<GreedyDeposit, PlanError> {
    if !(deposit_mass > 0.0) {
        return Err(PlanError::InvalidParams("deposit mass must be positive"));
    }
    Ok(deposit_greedy(arrived, deposit_mass, points, weights)?)
}

/// What one planning step did.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub neighborhood: Neighborhood,
    pub goal_index: usize,
    pub goal: Point2,
    pub previous: Point2,
    pub arrived: Point2,
    pub deposit: GreedyDeposit,
}

/// Runs neighborhood search, candidate scoring, goal selection, one motion
/// step and the deposit, updating the agent's weights, ledger and trajectory.
pub fn plan_step<C: MotionController + ?Sized>(
    view: &mut AgentView,
    points: &[Point2],
    params: &PlannerParams,
    motion: &C,
) -> Result<StepReport, PlanError> {
    if view.steps_taken >= params.budget {
        return Err(PlanError::BudgetSpent(params.budget));
    }
    let neighborhood = find_neighborhood(view.position, points, &view.weights, params)?;
    let candidates = enumerate_candidates(view.position, &neighborhood, points, &view.weights)?;
    let best = select_goal(&candidates).ok_or(PlanError::Exhausted)?;
    let goal_index = best.order[0];
    let goal = points[goal_index];
    let previous = view.position;
    let arrived = motion.step(previous, goal);
    let deposit = deposit_weight(arrived, points, &mut view.weights, params.deposit_mass())?;

    view.ledger.record(deposit.cost);
    view.position = arrived;
    view.trajectory.push(arrived);
    view.steps_taken += 1;
    view.shortfall |= deposit.shortfall();

    Ok(StepReport { neighborhood, goal_index, goal, previous, arrived, deposit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::{FirstOrder, FirstOrderParams};
    use crate::ot::WeightedPointSet;
    use std::vec;
    use std::vec::Vec;

    fn params(h: usize, r0: f64, delta: f64, m: u64) -> PlannerParams {
        PlannerParams::new(h, r0, delta, m).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(PlannerParams::new(0, 1.0, 1.0, 1).is_err());
        assert!(PlannerParams::new(7, 1.0, 1.0, 1).is_err());
        assert!(PlannerParams::new(3, 0.0, 1.0, 1).is_err());
        assert!(PlannerParams::new(3, 1.0, -1.0, 1).is_err());
        assert!(PlannerParams::new(3, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn radius_grows_to_single_point() {
        let pts = [Point2::new(3.0, 0.0)];
        let n = find_neighborhood(Point2::ORIGIN, &pts, &[1.0], &params(1, 1.0, 1.0, 10)).unwrap();
        assert_eq!(n.radius, 3.0);
        assert_eq!(n.indices, vec![0]);
    }

    #[test]
    fn radius_schedule() {
        assert_eq!(grown_radius(1.0, 1.0, 0.5), 1.0);
        assert_eq!(grown_radius(1.0, 0.5, 2.2), 2.5);
        assert_eq!(grown_radius(0.1, 0.1, 0.3), 0.30000000000000004);
    }

    #[test]
    fn fewer_positive_points_than_horizon() {
        let pts = [Point2::new(1.0, 0.0), Point2::new(2.0, 0.0), Point2::new(3.0, 0.0)];
        let w = [0.2, 0.0, 0.3];
        let n = find_neighborhood(Point2::ORIGIN, &pts, &w, &params(3, 0.5, 0.5, 10)).unwrap();
        assert_eq!(n.indices, vec![0, 2]);
    }

    #[test]
    fn exhausted_when_no_weight() {
        let pts = [Point2::new(1.0, 0.0)];
        assert_eq!(
            find_neighborhood(Point2::ORIGIN, &pts, &[0.0], &params(3, 0.5, 0.5, 10)),
            Err(PlanError::Exhausted)
        );
    }

    #[test]
    fn single_candidate_cost() {
        let pts = [Point2::new(3.0, 4.0)];
        let nb = Neighborhood { indices: vec![0], radius: 5.0 };
        let c = enumerate_candidates(Point2::ORIGIN, &nb, &pts, &[0.5]).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].cost, 10.0);
        assert_eq!(select_goal(&c).unwrap().order[0], 0);
    }

    #[test]
    fn three_points_give_six_orders() {
        let pts = [Point2::new(1.0, 0.0), Point2::new(0.0, 1.0), Point2::new(1.0, 1.0)];
        let nb = Neighborhood { indices: vec![0, 1, 2], radius: 2.0 };
        let c = enumerate_candidates(Point2::ORIGIN, &nb, &pts, &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(c.len(), 6);
        assert_eq!(c[0].order, vec![0, 1, 2]);
        assert_eq!(c[5].order, vec![2, 1, 0]);
    }

    #[test]
    fn zero_weight_neighbor_rejected() {
        let pts = [Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        let nb = Neighborhood { indices: vec![0, 1], radius: 2.0 };
        assert_eq!(
            enumerate_candidates(Point2::ORIGIN, &nb, &pts, &[0.1, 0.0]),
            Err(PlanError::InvalidNeighborhood(1))
        );
    }

    #[test]
    fn argmin_selection() {
        let c = vec![
            CandidatePath { order: vec![4, 2], cost: 0.9 },
            CandidatePath { order: vec![2, 4], cost: 0.7 },
        ];
        assert_eq!(select_goal(&c).unwrap().order[0], 2);
        let tie = vec![
            CandidatePath { order: vec![4, 2], cost: 0.7 },
            CandidatePath { order: vec![2, 4], cost: 0.7 },
        ];
        assert_eq!(select_goal(&tie).unwrap().order, vec![2, 4]);
        assert!(select_goal(&[]).is_none());
    }

    #[test]
    fn deposit_into_heavy_nearest_point() {
        let pts = [Point2::new(2.0, 0.0), Point2::new(5.0, 0.0)];
        let mut w = vec![0.5, 0.5];
        let d = deposit_weight(Point2::ORIGIN, &pts, &mut w, 0.1).unwrap();
        assert!((d.cost - 0.2).abs() < 1e-15);
        assert!((w[0] - 0.4).abs() < 1e-15);
        assert_eq!(w[1], 0.5);
    }

    #[test]
    fn deposit_with_nothing_left() {
        let pts = [Point2::new(2.0, 0.0)];
        let mut w = vec![0.0];
        let d = deposit_weight(Point2::ORIGIN, &pts, &mut w, 0.1).unwrap();
        assert!(d.shortfall());
        assert!(d.plan.is_empty());
        assert_eq!(d.cost, 0.0);
    }

    #[test]
    fn deposit_matches_single_row_plan() {
        let pts: Vec<Point2> = (0..20).map(|i| Point2::new((i * 7 % 13) as f64, (i * 5 % 11) as f64 * 1.3)).collect();
        let mut w: Vec<f64> = (0..20).map(|i| 0.01 + 0.004 * (i % 5) as f64).collect();
        let sinks = WeightedPointSet::new(pts.clone(), w.clone()).unwrap();
        let (greedy, expected) = crate::ot::single_source_greedy_plan(Point2::new(4.2, 3.1), 0.07, &sinks).unwrap();
        let d = deposit_weight(Point2::new(4.2, 3.1), &pts, &mut w, 0.07).unwrap();
        assert_eq!(d, greedy);
        assert_eq!(w, expected);
    }

    #[test]
    fn single_reachable_point() {
        let pts = [Point2::new(50.0, 0.0)];
        let mut view = AgentView::new(0, Point2::ORIGIN, vec![0.3]);
        let motion = FirstOrder(FirstOrderParams::new(100.0, 1.0).unwrap());
        let p = params(3, 10.0, 10.0, 5);
        let r = plan_step(&mut view, &pts, &p, &motion).unwrap();
        assert_eq!(r.arrived, pts[0]);
        assert!((view.weights()[0] - (0.3 - 0.2)).abs() < 1e-15);
        assert_eq!(view.steps_taken(), 1);
        assert_eq!(view.trajectory().len(), 2);
        assert_eq!(view.ledger().accumulated(), 0.0);
    }

    #[test]
    fn budget_is_enforced() {
        let pts = [Point2::new(50.0, 0.0)];
        let mut view = AgentView::new(0, Point2::ORIGIN, vec![1.0]);
        let motion = FirstOrder(FirstOrderParams::new(100.0, 1.0).unwrap());
        let p = params(1, 10.0, 10.0, 2);
        plan_step(&mut view, &pts, &p, &motion).unwrap();
        plan_step(&mut view, &pts, &p, &motion).unwrap();
        assert_eq!(plan_step(&mut view, &pts, &p, &motion), Err(PlanError::BudgetSpent(2)));
    }
}
