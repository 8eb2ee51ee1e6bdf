//! Exact rational reference computations shared by the integration tests.
//!
//! Every f64 input converts to a rational exactly, so the values here are the
//! true results for the inputs the engine actually saw.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use coopval::mm_engine::{FirmPrimitives, TerminalCondition};

pub type Q = BigRational;

pub fn q(x: f64) -> Q {
    BigRational::from_float(x).expect("finite input")
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn f(x: &Q) -> f64 {
    x.to_f64().expect("representable")
}

/// |a - b| / max(|a|, |b|, 1) with `b` exact.
pub fn rel_err(a: f64, b: &Q) -> f64 {
    let diff = (q(a) - b).abs();
    let scale = q(a.abs()).max(b.abs()).max(Q::one());
    f(&(diff / scale))
}

pub fn discount(r: &Q, k: u32) -> Q {
    (Q::one() + r).pow(-(k as i32))
}

/// Sum of `d^k` for k = 1..=n, term by term.
pub fn annuity(n: u32, r: &Q) -> Q {
    let d = (Q::one() + r).recip();
    let mut acc = Q::zero();
    let mut p = Q::one();
    for _ in 0..n {
        p *= &d;
        acc += &p;
    }
    acc
}

/// Flow `k` (0-based) discounted `k + 1` periods.
pub fn present_value(flows: &[Q], r: &Q) -> Q {
    let d = (Q::one() + r).recip();
    let mut acc = Q::zero();
    let mut p = Q::one();
    for x in flows {
        p *= &d;
        acc += x * &p;
    }
    acc
}

/// 1 minus the discounted coupons `r` for K periods.
pub fn perpetuity_residual(r: &Q, periods: u32) -> Q {
    Q::one() - present_value(&vec![r.clone(); periods as usize], r)
}

/// A firm trajectory in exact arithmetic. NAV and value are computed up
/// front; the share path is costly (its rationals grow with every period)
/// and only built on request.
pub struct ExactTrajectory {
    pub r: Q,
    pub nav: Vec<Q>,
    pub value: Vec<Q>,
    pub profit: Vec<Q>,
    pub investment: Vec<Q>,
    pub dividends: Vec<Q>,
    pub shares0: Q,
}

/// Shares outstanding, price per share and dividend per share by period.
pub struct SharePath {
    pub shares: Vec<Q>,
    pub price: Vec<Q>,
    pub div_per_share: Vec<Q>,
}

impl ExactTrajectory {
    pub fn build(p: &FirmPrimitives, terminal: TerminalCondition) -> Self {
        let r = q(p.rate.value());
        let big_t = p.horizon();
        let profit: Vec<Q> = p.profit.iter().map(|&x| q(x)).collect();
        let investment: Vec<Q> = p.investment.iter().map(|&x| q(x)).collect();
        let dividends: Vec<Q> = if p.dividends.is_empty() {
            vec![Q::zero(); big_t]
        } else {
            p.dividends.iter().map(|&x| q(x)).collect()
        };

        let mut nav = vec![q(p.nav0)];
        for i in &investment {
            let next = nav.last().unwrap() + i;
            nav.push(next);
        }
        let g = Q::one() + &r;
        let mut value = vec![Q::zero(); big_t + 1];
        value[big_t] = match terminal {
            TerminalCondition::ZeroGoodwill => nav[big_t].clone(),
            TerminalCondition::ExplicitValue(v) => q(v),
        };
        for t in (0..big_t).rev() {
            value[t] = (&profit[t] - &investment[t] + &value[t + 1]) / &g;
        }
        ExactTrajectory {
            r,
            nav,
            value,
            profit,
            investment,
            dividends,
            shares0: q(p.shares0),
        }
    }

    pub fn horizon(&self) -> usize {
        self.nav.len() - 1
    }

    pub fn share_path(&self) -> SharePath {
        let big_t = self.horizon();
        let mut shares = vec![self.shares0.clone()];
        let mut price = vec![&self.value[0] / &shares[0]];
        let mut div_per_share = Vec::with_capacity(big_t);
        for t in 0..big_t {
            let n = shares[t].clone();
            div_per_share.push(&self.dividends[t] / &n);
            let sub = &self.investment[t] - (&self.profit[t] - &self.dividends[t]);
            let v = (&self.value[t + 1] - &sub) / &n;
            let m = &sub / &v;
            shares.push(n + m);
            price.push(v);
        }
        SharePath {
            shares,
            price,
            div_per_share,
        }
    }

    /// Dividends on the shares outstanding at `t`, plus their terminal price.
    pub fn dividend_stream(&self, path: &SharePath, t: usize) -> Q {
        let big_t = self.horizon();
        let mut per_share = present_value(&path.div_per_share[t..], &self.r);
        per_share += &path.price[big_t] * discount(&self.r, (big_t - t) as u32);
        &path.shares[t] * per_share
    }

    /// Profit less investment, discounted, plus the terminal value.
    pub fn earnings_recursion(&self, t: usize) -> Q {
        let big_t = self.horizon();
        let flows: Vec<Q> = (t..big_t)
            .map(|k| &self.profit[k] - &self.investment[k])
            .collect();
        present_value(&flows, &self.r) + &self.value[big_t] * discount(&self.r, (big_t - t) as u32)
    }

    pub fn goodwill(&self, t: usize) -> Q {
        let big_t = self.horizon();
        let pi: Vec<Q> = (t..big_t)
            .map(|k| &self.profit[k] - &self.r * &self.nav[k])
            .collect();
        present_value(&pi, &self.r)
            + (&self.value[big_t] - &self.nav[big_t]) * discount(&self.r, (big_t - t) as u32)
    }

    /// Every closed form must agree with the backward recursion exactly.
    pub fn assert_identities(&self, t: usize) {
        let v = &self.value[t];
        let path = self.share_path();
        assert_eq!(&self.dividend_stream(&path, t), v, "dividend stream at t={t}");
        assert_eq!(&self.earnings_recursion(t), v, "earnings recursion at t={t}");
        assert_eq!(&(&self.nav[t] + self.goodwill(t)), v, "NAV + goodwill at t={t}");
    }
}

/// Two-period firm from the worked example: r = 10%, NAV 1000, 100 shares,
/// profit 150 a year, no investment.
pub fn two_period_firm(dividends: [f64; 2]) -> FirmPrimitives {
    FirmPrimitives::new(
        coopval::Rate::new(0.10).unwrap(),
        1000.0,
        100.0,
        vec![150.0, 150.0],
        vec![0.0, 0.0],
    )
    .with_dividends(dividends.to_vec())
}
