#![allow(dead_code)]

use otexplore_core::density::{Domain, GaussianMixture};
use otexplore_core::ot::{solve_transportation, CostMatrix};
use otexplore_core::{Mode, Point2, ScenarioConfig};

pub fn blob(cov: f64) -> GaussianMixture {
    GaussianMixture::new([(1.0, Point2::ORIGIN, [cov, 0.0, 0.0, cov])]).unwrap()
}

pub fn square(half: f64) -> Domain {
    Domain::new([-half, half], [-half, half]).unwrap()
}

/// Small scenario on a 200 x 200 square around a single Gaussian blob.
pub fn small_config(mode: Mode, n_samples: usize, budget: u64, n_agents: usize, seed: u64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(mode, square(100.0), blob(900.0), n_samples, budget, n_agents, 15.0);
    cfg.seed = seed;
    cfg.snapshot_every = 1;
    cfg.r_comm = Some(30.0);
    cfg
}

/// Exact W1 between weighted point sets of equal mass.
pub fn exact_w1(a: &[(Point2, f64)], b: &[(Point2, f64)]) -> f64 {
    let supply: Vec<f64> = a.iter().map(|p| p.1).collect();
    let demand: Vec<f64> = b.iter().map(|p| p.1).collect();
    let cost = CostMatrix::from_fn(a.len(), b.len(), |i, j| a[i].0.dist(b[j].0));
    solve_transportation(&supply, &demand, &cost).unwrap().1
}

/// Minimum-cost perfect matching by exhaustive search over permutations.
pub fn brute_force_assignment(cost: &[Vec<f64>]) -> f64 {
    fn go(row: usize, used: &mut Vec<bool>, cost: &[Vec<f64>], acc: f64, best: &mut f64) {
        if acc >= *best {
            return;
        }
        if row == cost.len() {
            *best = acc;
            return;
        }
        for j in 0..cost.len() {
            if !used[j] {
                used[j] = true;
                go(row + 1, used, cost, acc + cost[row][j], best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(0, &mut vec![false; cost.len()], cost, 0.0, &mut best);
    best
}
