mod common;

use common::{exact_w1, small_config};
use otexplore_core::ot::ResidualMode;
use otexplore_core::sim::Scenario;
use otexplore_core::{Mode, Point2, RoundOrder};

/// Past robot points carry `1/M` each; the unspent mass sits at the current
/// position of each agent.
fn robot_measure(sim: &Scenario, per_agent_budget: u64) -> Vec<(Point2, f64)> {
    let m = sim.config().budget as f64;
    let mut out = Vec::new();
    for v in sim.views() {
        for p in &v.trajectory()[1..] {
            out.push((*p, 1.0 / m));
        }
        let future = (per_agent_budget - v.steps_taken()) as f64 / m;
        if future > 0.0 {
            out.push((v.position(), future));
        }
    }
    out
}

fn reference(sim: &Scenario) -> Vec<(Point2, f64)> {
    let n = sim.sample_points().len() as f64;
    sim.sample_points().iter().map(|p| (*p, 1.0 / n)).collect()
}

#[test]
fn single_agent_bound_dominates_exact_distance() {
    for seed in 0..20 {
        let mut sim = Scenario::new(small_config(Mode::Single, 30, 20, 1, seed)).unwrap();
        let y = reference(&sim);
        loop {
            let snap = sim.snapshot().unwrap();
            let w = exact_w1(&robot_measure(&sim, 20), &y);
            assert!(w <= snap.wub[0] + 1e-9, "seed {seed} step {}: W = {w} > W_UB = {}", snap.step, snap.wub[0]);
            if snap.step == 0 {
                assert!((w - snap.wub[0]).abs() < 1e-9, "all mass at the start: bound is tight");
            }
            if !sim.advance().unwrap() {
                break;
            }
        }
        assert_eq!(sim.round(), 20);
    }
}

#[test]
fn centralized_bound_dominates_pooled_exact_distance() {
    for residual in [ResidualMode::Verbatim, ResidualMode::AgentAverage] {
        for seed in 0..8 {
            let mut cfg = small_config(Mode::Centralized, 30, 20, 2, seed);
            cfg.residual = residual;
            let mut sim = Scenario::new(cfg).unwrap();
            let y = reference(&sim);
            let t_e = sim.config().rounds_budget();
            loop {
                let snap = sim.snapshot().unwrap();
                let w = exact_w1(&robot_measure(&sim, t_e), &y);
                assert!(w <= snap.wub[0] + 1e-9, "{residual:?} seed {seed} step {}: {w} > {}", snap.step, snap.wub[0]);
                if !sim.advance().unwrap() {
                    break;
                }
            }
        }
    }
}

#[test]
fn full_range_decentralized_tracks_centralized() {
    for order in [RoundOrder::Simultaneous, RoundOrder::Sequential] {
        for seed in 0..5 {
            let mut c = small_config(Mode::Centralized, 60, 40, 2, seed);
            c.round_order = order;
            let mut d = c.clone();
            d.mode = Mode::Decentralized;
            d.r_comm = Some(c.domain.diagonal());
            let mut cen = Scenario::new(c).unwrap();
            let mut dec = Scenario::new(d).unwrap();
            for _ in 0..20 {
                assert!(cen.advance().unwrap());
                assert!(dec.advance().unwrap());
                let common = cen.snapshot().unwrap().weights.remove(0);
                let seen = dec.snapshot().unwrap();
                for view in &seen.weights {
                    let gap = view.iter().zip(&common).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    assert!(gap <= 1e-9, "{order:?} seed {seed} round {}: gap {gap}", seen.step);
                }
                assert_eq!(cen.positions(), dec.positions());
            }
        }
    }
}

#[test]
fn full_range_bounds_agree_for_two_agents() {
    let mut c = small_config(Mode::Centralized, 40, 30, 2, 3);
    c.round_order = RoundOrder::Sequential;
    let mut d = c.clone();
    d.mode = Mode::Decentralized;
    d.r_comm = Some(1e6);
    let mut cen = Scenario::new(c).unwrap();
    let mut dec = Scenario::new(d).unwrap();
    for _ in 0..15 {
        cen.advance().unwrap();
        dec.advance().unwrap();
        let a = cen.snapshot().unwrap().wub[0];
        for b in dec.snapshot().unwrap().wub {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn no_contact_matches_isolated_single_runs() {
    for order in [RoundOrder::Simultaneous, RoundOrder::Sequential] {
        let mut d = small_config(Mode::Decentralized, 40, 25, 3, 9);
        d.r_comm = Some(1e-9);
        d.round_order = order;
        d.initial_positions = Some(vec![Point2::new(-80.0, -80.0), Point2::new(80.0, -80.0), Point2::new(0.0, 80.0)]);
        let mut dec = Scenario::new(d.clone()).unwrap();
        while dec.advance().unwrap() {}
        for k in 0..3 {
            let mut s = d.clone();
            s.mode = Mode::Single;
            s.n_agents = 1;
            s.initial_positions = Some(vec![d.initial_positions.as_ref().unwrap()[k]]);
            let mut single = Scenario::new(s).unwrap();
            while single.advance().unwrap() {}
            let (a, b) = (&dec.views()[k], &single.views()[0]);
            assert_eq!(a.trajectory(), b.trajectory(), "{order:?} agent {k}");
            assert_eq!(a.weights(), b.weights());
            assert_eq!(a.ledger(), b.ledger());
        }
    }
}
