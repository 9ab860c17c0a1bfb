//! Offline checks over a recorded run.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Mode, RunHeader, SnapshotRecord};
use crate::geometry::Point2;
use crate::ot::{upper_bound_centralized, upper_bound_decentralized, upper_bound_single, BoundLedger};

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// First violation found, if any.
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayReport {
    pub records: usize,
    pub checks: Vec<Check>,
    /// Largest difference between a recorded and a recomputed bound.
    pub max_wub_error: f64,
}

impl ReplayReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Recomputes the bound(s) of `record` from its own state.
pub fn recompute_wub(header: &RunHeader, record: &SnapshotRecord) -> Result<Vec<f64>, String> {
    let points: &[Point2] = record.sample_points.as_deref().unwrap_or(&header.sample_points);
    let need_views = if header.mode == Mode::Decentralized { header.n_agents } else { 1 };
    if record.positions.len() != header.n_agents || record.ledgers.len() != header.n_agents {
        return Err(format!("step {}: expected {} agents", record.step, header.n_agents));
    }
    if record.weights.len() != need_views || record.weights.iter().any(|w| w.len() != points.len()) {
        return Err(format!("step {}: weight vectors do not match the sample set", record.step));
    }
    match header.mode {
        Mode::Single => Ok(alloc::vec![upper_bound_single(
            &record.ledgers[0],
            record.positions[0],
            points,
            &record.weights[0],
        )]),
        Mode::Centralized => upper_bound_centralized(
            &record.ledgers,
            &record.positions,
            points,
            &record.weights[0],
            header.residual,
        )
        .map(|w| alloc::vec![w])
        .map_err(|e| format!("step {}: {e}", record.step)),
        Mode::Decentralized => {
            if record.neighbors.len() != header.n_agents {
                return Err(format!("step {}: missing neighbor sets", record.step));
            }
            let mut out = Vec::with_capacity(header.n_agents);
            for (k, set) in record.neighbors.iter().enumerate() {
                if set.iter().any(|&q| q >= header.n_agents) || !set.contains(&k) {
                    return Err(format!("step {}: bad neighbor set for agent {k}", record.step));
                }
                let ledgers: Vec<BoundLedger> = set.iter().map(|&q| record.ledgers[q]).collect();
                let positions: Vec<Point2> = set.iter().map(|&q| record.positions[q]).collect();
                out.push(upper_bound_decentralized(&ledgers, &positions, points, &record.weights[k]));
            }
            Ok(out)
        }
    }
}

fn check(name: &'static str, failure: Option<String>) -> Check {
    Check { name, passed: failure.is_none(), detail: failure }
}

/// Verifies step ordering, bound consistency (within `tol`), nonnegative
/// and non-increasing weights, mass conservation and ledger monotonicity.
///
/// Single-agent runs must hold exactly `1 - t/M` before any shortfall. Fused
/// and exchanged views can only hold more, since overlapping deposits by
/// different agents are merged by a minimum.
pub fn verify(header: &RunHeader, records: &[SnapshotRecord], tol: f64) -> ReplayReport {
    let mut order = None;
    let mut wub = None;
    let mut nonneg = None;
    let mut mono = None;
    let mut mass = None;
    let mut ledgers = None;
    let mut max_err = 0.0f64;
    let deposit = 1.0 / header.budget as f64;

    if records.is_empty() {
        order = Some(String::from("no snapshots"));
    }
    for (i, rec) in records.iter().enumerate() {
        match recompute_wub(header, rec) {
            Ok(again) if again.len() == rec.wub.len() => {
                for (a, b) in again.iter().zip(&rec.wub) {
                    let err = (a - b).abs();
                    max_err = max_err.max(err);
                    if !(err <= tol) && wub.is_none() {
                        wub = Some(format!("step {}: recorded {b}, recomputed {a}", rec.step));
                    }
                }
            }
            Ok(_) => {
                wub.get_or_insert_with(|| format!("step {}: wrong number of bound values", rec.step));
            }
            Err(e) => {
                wub.get_or_insert(e);
            }
        }
        if nonneg.is_none() {
            if let Some(w) = rec.weights.iter().flatten().find(|w| !(**w >= 0.0)) {
                nonneg = Some(format!("step {}: weight {w}", rec.step));
            }
        }
        let total_steps: u64 = rec.ledgers.iter().map(|l| l.steps()).sum();
        let floor = (1.0 - total_steps as f64 * deposit).max(0.0);
        for (k, w) in rec.weights.iter().enumerate() {
            let sum: f64 = w.iter().sum();
            let exact = header.mode == Mode::Single && !rec.shortfall;
            let bad = if exact { (sum - floor).abs() > tol } else { sum < floor - tol };
            if bad && mass.is_none() {
                mass = Some(format!("step {}: view {k} holds {sum}, expected {floor}", rec.step));
            }
        }
        if i == 0 {
            continue;
        }
        let prev = &records[i - 1];
        if rec.step <= prev.step && order.is_none() {
            order = Some(format!("step {} follows {}", rec.step, prev.step));
        }
        if mono.is_none() && rec.weights.len() == prev.weights.len() {
            'outer: for (k, (now, before)) in rec.weights.iter().zip(&prev.weights).enumerate() {
                for (j, (a, b)) in now.iter().zip(before).enumerate() {
                    if a > b {
                        mono = Some(format!("step {}: view {k} point {j} rose from {b} to {a}", rec.step));
                        break 'outer;
                    }
                }
            }
        }
        if ledgers.is_none() {
            for (k, (a, b)) in rec.ledgers.iter().zip(&prev.ledgers).enumerate() {
                if a.accumulated() < b.accumulated() || a.steps() < b.steps() {
                    ledgers = Some(format!("step {}: ledger of agent {k} went backwards", rec.step));
                    break;
                }
            }
        }
    }

    ReplayReport {
        records: records.len(),
        checks: alloc::vec![
            check("steps increasing", order),
            check("bound consistency", wub),
            check("weights nonnegative", nonneg),
            check("weights non-increasing", mono),
            check("mass conservation", mass),
            check("ledgers monotone", ledgers),
        ],
        max_wub_error: max_err,
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;
    use crate::density::{Domain, GaussianMixture};

    fn cfg(mode: Mode) -> ScenarioConfig {
        let mix = GaussianMixture::new([(1.0, Point2::ORIGIN, [900.0, 0.0, 0.0, 900.0])]).unwrap();
        let domain = Domain::new([-100.0, 100.0], [-100.0, 100.0]).unwrap();
        let n_a = if mode == Mode::Single { 1 } else { 3 };
        let mut c = ScenarioConfig::new(mode, domain, mix, 30, if mode == Mode::Centralized { 21 } else { 20 }, n_a, 12.0);
        c.r_comm = Some(40.0);
        c.snapshot_every = 1;
        c.seed = 11;
        c
    }

    #[test]
    fn clean_runs_verify() {
        for mode in [Mode::Single, Mode::Centralized, Mode::Decentralized] {
            let (h, recs, _) = run_scenario(cfg(mode)).unwrap();
            let rep = verify(&h, &recs, 1e-9);
            assert!(rep.passed(), "{mode:?}: {:?}", rep.checks);
            assert_eq!(rep.max_wub_error, 0.0);
        }
    }

    #[test]
    fn tampering_is_caught() {
        let (h, mut recs, _) = run_scenario(cfg(Mode::Single)).unwrap();
        recs[3].wub[0] += 1e-6;
        recs[5].weights[0][0] = 2.0;
        let rep = verify(&h, &recs, 1e-9);
        let failed: Vec<&str> = rep.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        assert!(failed.contains(&"bound consistency"));
        assert!(failed.contains(&"weights non-increasing"));
        assert!(failed.contains(&"mass conservation"));
    }

    #[test]
    fn time_varying_uses_recorded_points() {
        let mut c = cfg(Mode::Single);
        c.time_varying = true;
        c.diffusion = 3.0;
        let (h, recs, _) = run_scenario(c).unwrap();
        assert!(recs[1].sample_points.as_ref().unwrap() != &h.sample_points);
        assert!(verify(&h, &recs, 1e-9).passed());
    }
}
