//! Randomized check that the five firm valuations agree.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mm_engine::random::{feasible_trajectory, trajectory_rng, FuzzRanges};

/// Outcome for one random trajectory. `(seed, index)` replays it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzCase {
    pub index: u64,
    pub horizon: usize,
    pub rate: f64,
    pub interior_t: usize,
    pub deviation_t0: f64,
    pub deviation_interior: f64,
    /// Infeasible draws discarded before this trajectory.
    pub rejected: u32,
    pub passed: bool,
}

impl FuzzCase {
    pub fn max_deviation(&self) -> f64 {
        self.deviation_t0.max(self.deviation_interior)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzSummary {
    pub count: u64,
    pub seed: u64,
    pub tol: f64,
    pub max_deviation: f64,
    pub rejected: u64,
    /// Rejected draws over all draws.
    pub rejection_rate: f64,
    pub failures: Vec<u64>,
    pub cases: Vec<FuzzCase>,
}

fn run_case(seed: u64, index: u64, tol: f64, ranges: &FuzzRanges) -> Result<FuzzCase> {
    let mut rng = trajectory_rng(seed, index);
    let sampled = feasible_trajectory(&mut rng, ranges)?;
    let traj = sampled.trajectory;
    let horizon = traj.horizon();
    let interior_t = rng.gen_range(1..=horizon.saturating_sub(1).max(1));
    let at0 = traj.check_equivalence(0, tol)?;
    let inner = traj.check_equivalence(interior_t, tol)?;
    Ok(FuzzCase {
        index,
        horizon,
        rate: traj.rate().value(),
        interior_t,
        deviation_t0: at0.max_rel_deviation,
        deviation_interior: inner.max_rel_deviation,
        rejected: sampled.rejected,
        passed: at0.passed && inner.passed,
    })
}

/// Check `count` random feasible trajectories at `t = 0` and one random
/// interior date each. Trajectories are generated independently from
/// `(seed, index)` and may be evaluated in parallel; results are ordered by
/// index.
pub fn fuzz_equivalence(count: u64, seed: u64, tol: f64, ranges: &FuzzRanges) -> Result<FuzzSummary> {
    if count < 1 {
        return Err(Error::validation("count", "must be >= 1"));
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::validation("tol", "must be finite and >= 0"));
    }
    ranges.validate()?;
    let cases: Vec<FuzzCase> = (0..count)
        .into_par_iter()
        .map(|i| run_case(seed, i, tol, ranges))
        .collect::<Result<_>>()?;
    let rejected: u64 = cases.iter().map(|c| u64::from(c.rejected)).sum();
    Ok(FuzzSummary {
        count,
        seed,
        tol,
        max_deviation: cases.iter().map(FuzzCase::max_deviation).fold(0.0, f64::max),
        rejected,
        rejection_rate: rejected as f64 / (rejected + count) as f64,
        failures: cases.iter().filter(|c| !c.passed).map(|c| c.index).collect(),
        cases,
    })
}
