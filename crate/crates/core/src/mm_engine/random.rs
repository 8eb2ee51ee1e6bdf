//! Seeded generation of random feasible firm trajectories.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{FirmPrimitives, FirmTrajectory, TerminalCondition};
use crate::error::{Error, Result};
use crate::fincore::Rate;

/// Sampling ranges for random firms. Fractions are relative to the NAV of
/// the period they apply to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FuzzRanges {
    pub horizon_min: usize,
    pub horizon_max: usize,
    pub rate_min: f64,
    pub rate_max: f64,
    pub nav_min: f64,
    pub nav_max: f64,
    pub shares_min: f64,
    pub shares_max: f64,
    /// |pure profit| is at most this fraction of NAV.
    pub pure_profit_frac: f64,
    pub investment_min_frac: f64,
    pub investment_max_frac: f64,
    pub depreciation_max_frac: f64,
    pub cogs_max_frac: f64,
    /// Probability of closing with an explicit terminal value instead of
    /// zero horizon goodwill.
    pub explicit_terminal_prob: f64,
    /// Attempts per trajectory before giving up on feasibility.
    pub max_attempts: u32,
}

impl Default for FuzzRanges {
    fn default() -> Self {
        FuzzRanges {
            horizon_min: 2,
            horizon_max: 40,
            rate_min: 0.01,
            rate_max: 0.30,
            nav_min: 100.0,
            nav_max: 10_000.0,
            shares_min: 1.0,
            shares_max: 1_000.0,
            pure_profit_frac: 0.5,
            investment_min_frac: -0.2,
            investment_max_frac: 0.3,
            depreciation_max_frac: 0.1,
            cogs_max_frac: 2.0,
            explicit_terminal_prob: 0.25,
            max_attempts: 1_000,
        }
    }
}

impl FuzzRanges {
    pub fn validate(&self) -> Result<()> {
        let ordered = [
            ("horizon", self.horizon_min as f64, self.horizon_max as f64),
            ("rate", self.rate_min, self.rate_max),
            ("nav", self.nav_min, self.nav_max),
            ("shares", self.shares_min, self.shares_max),
            ("investment_frac", self.investment_min_frac, self.investment_max_frac),
        ];
        for (name, lo, hi) in ordered {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::validation(
                    format!("ranges.{name}"),
                    format!("need finite min <= max, got {lo}..{hi}"),
                ));
            }
        }
        if self.horizon_min < 1 {
            return Err(Error::validation("ranges.horizon_min", "must be >= 1"));
        }
        if self.rate_min <= 0.0 {
            return Err(Error::validation("ranges.rate_min", "must be > 0"));
        }
        if self.nav_min <= 0.0 || self.shares_min <= 0.0 {
            return Err(Error::validation("ranges", "nav_min and shares_min must be > 0"));
        }
        if self.investment_min_frac <= -1.0 {
            return Err(Error::validation("ranges.investment_min_frac", "must be > -1"));
        }
        for (name, v) in [
            ("pure_profit_frac", self.pure_profit_frac),
            ("depreciation_max_frac", self.depreciation_max_frac),
            ("cogs_max_frac", self.cogs_max_frac),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::validation(format!("ranges.{name}"), "must be >= 0"));
            }
        }
        if !(0.0..=1.0).contains(&self.explicit_terminal_prob) {
            return Err(Error::validation("ranges.explicit_terminal_prob", "must be in [0, 1]"));
        }
        if self.max_attempts == 0 {
            return Err(Error::validation("ranges.max_attempts", "must be >= 1"));
        }
        Ok(())
    }
}

/// Independent generator for trajectory `index` under master `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Draw one set of primitives. The result always validates but may still be
/// infeasible (non-positive prices or share counts).
pub fn random_primitives<R: Rng>(rng: &mut R, ranges: &FuzzRanges) -> (FirmPrimitives, TerminalCondition) {
    let horizon = rng.gen_range(ranges.horizon_min..=ranges.horizon_max);
    let r = uniform(rng, ranges.rate_min, ranges.rate_max);
    let nav0 = uniform(rng, ranges.nav_min, ranges.nav_max);
    let shares0 = uniform(rng, ranges.shares_min, ranges.shares_max);

    let mut p = FirmPrimitives::new(
        Rate::new(r).expect("rate_min > 0"),
        nav0,
        shares0,
        Vec::with_capacity(horizon),
        Vec::with_capacity(horizon),
    );
    p.depreciation.clear();
    p.cogs.clear();
    p.dividends.clear();
    p.debt.clear();

    let mut nav = nav0;
    for _ in 0..horizon {
        let pi = uniform(rng, -ranges.pure_profit_frac, ranges.pure_profit_frac) * nav;
        let a = r * nav + pi;
        let inv = uniform(rng, ranges.investment_min_frac, ranges.investment_max_frac) * nav;
        let div = uniform(rng, 0.0, 1.0) * (a.max(0.0) + 0.05 * nav);
        p.profit.push(a);
        p.investment.push(inv);
        p.dividends.push(div);
        p.depreciation.push(uniform(rng, 0.0, ranges.depreciation_max_frac) * nav);
        p.cogs.push(uniform(rng, 0.0, ranges.cogs_max_frac) * nav);
        p.debt.push(uniform(rng, 0.0, 1.0) * nav);
        nav += inv;
    }
    let terminal = if rng.gen_bool(ranges.explicit_terminal_prob) {
        TerminalCondition::ExplicitValue(nav * uniform(rng, 0.8, 1.5))
    } else {
        TerminalCondition::ZeroGoodwill
    };
    (p, terminal)
}

/// A feasible trajectory and the number of infeasible draws rejected on the
/// way to it.
#[derive(Debug, Clone)]
pub struct Sampled {
    pub trajectory: FirmTrajectory,
    pub rejected: u32,
}

/// Draw until a feasible trajectory comes up.
pub fn feasible_trajectory<R: Rng>(rng: &mut R, ranges: &FuzzRanges) -> Result<Sampled> {
    let mut rejected = 0;
    loop {
        let (p, terminal) = random_primitives(rng, ranges);
        match FirmTrajectory::build(p, terminal) {
            Ok(trajectory) => return Ok(Sampled { trajectory, rejected }),
            Err(Error::InfeasibleTrajectory { .. }) => {
                rejected += 1;
                if rejected >= ranges.max_attempts {
                    return Err(Error::validation(
                        "ranges",
                        format!("no feasible trajectory after {rejected} draws"),
                    ));
                }
            }
            Err(e) => return Err(e),
        }
    }
}

/// Rebuild `traj` with a freshly drawn dividend policy, retrying until the
/// new share path is feasible. `None` if no feasible policy was found.
pub fn redraw_dividends<R: Rng>(
    rng: &mut R,
    traj: &FirmTrajectory,
    max_attempts: u32,
) -> Option<FirmTrajectory> {
    let p = traj.primitives();
    for _ in 0..max_attempts {
        let divs = p
            .profit
            .iter()
            .zip(traj.nav())
            .map(|(a, nav)| uniform(rng, 0.0, 1.5) * (a.max(0.0) + 0.05 * nav))
            .collect();
        let candidate = p.clone().with_dividends(divs);
        if let Ok(t) = FirmTrajectory::build(candidate, traj.terminal()) {
            return Some(t);
        }
    }
    None
}

/// Nonnegative series of length `len`, each entry up to `max`.
pub fn nonneg_series<R: Rng>(rng: &mut R, len: usize, max: f64) -> Vec<f64> {
    (0..len).map(|_| uniform(rng, 0.0, max)).collect()
}
