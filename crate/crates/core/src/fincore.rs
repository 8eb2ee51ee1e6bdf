//! Discounting primitives at a single flat per-period rate.
//!
//! Every stream is finite. Payments are made at the end of each period, so
//! the amount at position `k` (1-based) is discounted by `(1+r)^-k`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A per-period interest rate. Always finite and strictly above -1.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Rate(f64);

impl Rate {
    pub fn new(r: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::domain(format!("rate must be finite, got {r}")));
        }
        if r <= -1.0 {
            return Err(Error::domain(format!("rate must exceed -1, got {r}")));
        }
        Ok(Rate(r))
    }

    /// A rate usable for perpetuities and anything that divides by `r`.
    pub fn positive(r: f64) -> Result<Self> {
        let rate = Rate::new(r)?;
        rate.require_positive()?;
        Ok(rate)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn require_positive(self) -> Result<()> {
        if self.0 > 0.0 {
            Ok(())
        } else {
            Err(Error::domain(format!("rate must be > 0, got {}", self.0)))
        }
    }

    /// Growth factor `1 + r`.
    pub fn growth(self) -> f64 {
        1.0 + self.0
    }
}

impl TryFrom<f64> for Rate {
    type Error = Error;

    fn try_from(r: f64) -> Result<Self> {
        Rate::new(r)
    }
}

impl From<Rate> for f64 {
    fn from(r: Rate) -> f64 {
        r.0
    }
}

/// Amounts paid at the end of periods `1..=T`. Outlays are negative.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CashStream {
    amounts: Vec<f64>,
}

impl CashStream {
    pub fn new(amounts: Vec<f64>) -> Self {
        CashStream { amounts }
    }

    /// `amount` repeated for `periods` periods.
    pub fn level(amount: f64, periods: usize) -> Self {
        CashStream::new(vec![amount; periods])
    }

    pub fn amounts(&self) -> &[f64] {
        &self.amounts
    }

    pub fn len(&self) -> usize {
        self.amounts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amounts.is_empty()
    }

    /// Element-wise sum; the shorter stream is padded with zeros.
    pub fn add(&self, other: &CashStream) -> CashStream {
        let n = self.len().max(other.len());
        let at = |s: &CashStream, i: usize| s.amounts.get(i).copied().unwrap_or(0.0);
        CashStream::new((0..n).map(|i| at(self, i) + at(other, i)).collect())
    }
}

impl From<Vec<f64>> for CashStream {
    fn from(amounts: Vec<f64>) -> Self {
        CashStream::new(amounts)
    }
}

/// `(1+r)^-k`.
pub fn discount_factor(r: Rate, k: u32) -> f64 {
    let k = i32::try_from(k).unwrap_or(i32::MAX);
    r.growth().powi(-k)
}

/// Present value of an ordinary annuity of one: `sum_{k=1..n} (1+r)^-k`.
///
/// Evaluated in closed form `(1 - (1+r)^-n) / r`, rearranged through
/// `expm1`/`ln_1p` so that small rates do not lose digits to cancellation.
/// `a(n, 0) = n`.
pub fn annuity_pv(n: u32, r: Rate) -> f64 {
    let rv = r.value();
    if n == 0 {
        return 0.0;
    }
    if rv == 0.0 {
        return f64::from(n);
    }
    -(-f64::from(n) * rv.ln_1p()).exp_m1() / rv
}

/// `sum_k stream[k] / (1+r)^k`, evaluated by backward nesting.
pub fn present_value(stream: &CashStream, r: Rate) -> f64 {
    pv_with_terminal(stream.amounts(), 0.0, r)
}

/// Present value of `flows` (end of periods 1..=N) plus `terminal` received
/// at the end of period N.
pub(crate) fn pv_with_terminal(flows: &[f64], terminal: f64, r: Rate) -> f64 {
    let g = r.growth();
    flows.iter().rev().fold(terminal, |acc, &x| (acc + x) / g)
}

/// What remains of one unit of principal after subtracting the discounted
/// interest coupons `r/(1+r)^k` for `k = 1..=periods`.
///
/// The residual equals `(1+r)^-periods` and is far smaller than the coupons it
/// is the difference of, so a floating-point sum would return only rounding
/// noise for long horizons. The difference is instead formed exactly over the
/// binary value of `r` and rounded once.
pub fn perpetuity_identity_residual(r: Rate, periods: u32) -> Result<f64> {
    r.require_positive()?;
    let rv = BigRational::from_float(r.value())
        .ok_or_else(|| Error::domain("rate is not representable"))?;
    let (p, q) = (rv.numer().clone(), rv.denom().clone());
    let g = &q + &p;
    // scale everything by (q+p)^K: coupon k contributes p·q^(k-1)·(q+p)^(K-k)
    let mut coupons = BigInt::zero();
    let mut q_pow = BigInt::one();
    for _ in 0..periods {
        coupons = coupons * &g + &p * &q_pow;
        q_pow *= &q;
    }
    let denom = num_traits::pow(g, periods as usize);
    let residual = BigRational::new(&denom - coupons, denom);
    residual
        .to_f64()
        .ok_or_else(|| Error::domain("residual not representable as f64"))
}
