//! Firm valuation under certainty and no-arbitrage share pricing.
//!
//! A [`FirmTrajectory`] is built from exogenous accounting series (profit,
//! net investment, dividends, ...) over a finite horizon `T` closed by a
//! [`TerminalCondition`]. The firm value is fixed by the backward recursion
//! `V[t] = (A[t] - I[t] + V[t+1]) / (1+r)`; share counts and prices follow
//! forward from the subscription needed to fund investment not covered by
//! retained profit.
//!
//! The trajectory can then be valued five ways (dividend stream, discounted
//! cashflow, earnings recursion, NAV plus goodwill, and the recursion itself)
//! and the results compared with [`FirmTrajectory::check_equivalence`].
//!
//! Every formula that is an infinite sum in the textbook form carries a
//! terminal term here: `V[T]` (or `V[T] - NAV[T]` for goodwill) discounted
//! from the horizon. Under [`TerminalCondition::ZeroGoodwill`] that is the
//! unique closure under which the truncated sums equal their infinite limits
//! when no pure profit is earned after `T`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fincore::{discount_factor, pv_with_terminal, Rate};

pub mod random;

/// How the firm is valued at the horizon.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum TerminalCondition {
    /// `V[T] = NAV[T]`: no pure profit after the horizon.
    #[default]
    ZeroGoodwill,
    /// A given terminal equity value `V[T] >= 0`.
    ExplicitValue(f64),
}

/// `GAV = D + NAV` at one date.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceSheet {
    pub gross_assets: f64,
    pub debt: f64,
    pub nav: f64,
}

impl BalanceSheet {
    pub fn from_nav_and_debt(nav: f64, debt: f64) -> Self {
        BalanceSheet {
            gross_assets: debt + nav,
            debt,
            nav,
        }
    }
}

/// Exogenous inputs of a firm trajectory. Every series has one entry per
/// period `t = 0..T-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirmPrimitives {
    pub rate: Rate,
    pub nav0: f64,
    pub shares0: f64,
    /// Net accounting profit A[t].
    pub profit: Vec<f64>,
    /// Net investment I[t].
    pub investment: Vec<f64>,
    #[serde(default)]
    pub depreciation: Vec<f64>,
    #[serde(default)]
    pub cogs: Vec<f64>,
    /// Total dividends Div[t], paid at t+1 to holders of record at t.
    #[serde(default)]
    pub dividends: Vec<f64>,
    /// Debt D[t]; only enters the balance sheet.
    #[serde(default)]
    pub debt: Vec<f64>,
}

impl FirmPrimitives {
    /// Primitives with zero depreciation, COGS, dividends and debt.
    pub fn new(rate: Rate, nav0: f64, shares0: f64, profit: Vec<f64>, investment: Vec<f64>) -> Self {
        let t = profit.len();
        FirmPrimitives {
            rate,
            nav0,
            shares0,
            profit,
            investment,
            depreciation: vec![0.0; t],
            cogs: vec![0.0; t],
            dividends: vec![0.0; t],
            debt: vec![0.0; t],
        }
    }

    pub fn horizon(&self) -> usize {
        self.profit.len()
    }

    pub fn with_dividends(mut self, dividends: Vec<f64>) -> Self {
        self.dividends = dividends;
        self
    }

    pub fn with_depreciation(mut self, depreciation: Vec<f64>) -> Self {
        self.depreciation = depreciation;
        self
    }

    pub fn with_cogs(mut self, cogs: Vec<f64>) -> Self {
        self.cogs = cogs;
        self
    }

    pub fn with_debt(mut self, debt: Vec<f64>) -> Self {
        self.debt = debt;
        self
    }

    /// Fill optional series left empty with zeros, then check every invariant.
    pub fn normalized(mut self) -> Result<Self> {
        let t = self.horizon();
        for s in [
            &mut self.depreciation,
            &mut self.cogs,
            &mut self.dividends,
            &mut self.debt,
        ] {
            if s.is_empty() {
                *s = vec![0.0; t];
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.rate.require_positive()?;
        let t = self.horizon();
        if !(self.nav0.is_finite() && self.nav0 > 0.0) {
            return Err(Error::validation("nav0", "must be finite and > 0"));
        }
        if !(self.shares0.is_finite() && self.shares0 > 0.0) {
            return Err(Error::validation("shares0", "must be finite and > 0"));
        }
        let series: [(&str, &[f64], bool); 6] = [
            ("profit", &self.profit, false),
            ("investment", &self.investment, false),
            ("depreciation", &self.depreciation, true),
            ("cogs", &self.cogs, true),
            ("dividends", &self.dividends, true),
            ("debt", &self.debt, true),
        ];
        for (name, s, nonneg) in series {
            if s.len() != t {
                return Err(Error::validation(
                    name,
                    format!("length {} does not match horizon {t}", s.len()),
                ));
            }
            for (i, &x) in s.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::validation(format!("{name}[{i}]"), "must be finite"));
                }
                if nonneg && x < 0.0 {
                    return Err(Error::validation(format!("{name}[{i}]"), "must be >= 0"));
                }
            }
        }
        let mut nav = self.nav0;
        for (i, &inv) in self.investment.iter().enumerate() {
            nav += inv;
            if nav <= 0.0 {
                return Err(Error::validation(
                    format!("investment[{i}]"),
                    format!("book equity falls to {nav} at t={}", i + 1),
                ));
            }
        }
        Ok(())
    }
}

/// A firm's full path: balance sheet, market value, share count and price.
///
/// Stock variables (`nav`, `value`, `shares`, `price`) have `T+1` entries
/// for `t = 0..=T`. Flow variables (`div_per_share`, `receipts`, `outlays`)
/// have `T` entries. `subscription` and `new_shares` have `T+1` entries with
/// index 0 unused (zero); entry `t` is the issue made at date `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirmTrajectory {
    primitives: FirmPrimitives,
    terminal: TerminalCondition,
    nav: Vec<f64>,
    value: Vec<f64>,
    subscription: Vec<f64>,
    new_shares: Vec<f64>,
    shares: Vec<f64>,
    price: Vec<f64>,
    div_per_share: Vec<f64>,
    receipts: Vec<f64>,
    outlays: Vec<f64>,
}

/// The five valuations of one date side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub t: usize,
    pub dividend_stream: f64,
    pub discounted_cashflow: f64,
    pub earnings_recursion: f64,
    pub nav_plus_goodwill: f64,
    pub backward_recursion: f64,
    /// Largest `|a-b| / max(|a|,|b|)` over all pairs.
    pub max_rel_deviation: f64,
    pub tol: f64,
    pub passed: bool,
}

impl EquivalenceReport {
    pub fn values(&self) -> [f64; 5] {
        [
            self.dividend_stream,
            self.discounted_cashflow,
            self.earnings_recursion,
            self.nav_plus_goodwill,
            self.backward_recursion,
        ]
    }
}

/// Relative gap between two numbers; 0 when both are zero.
pub fn rel_deviation(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Largest pairwise relative deviation among `values`.
pub fn max_pairwise_deviation(values: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for (i, &a) in values.iter().enumerate() {
        for &b in &values[i + 1..] {
            worst = worst.max(rel_deviation(a, b));
        }
    }
    worst
}

/// Per-term comparison of the goodwill double sum against the discounted
/// net investment it collapses to.
///
/// Term `j` collects every occurrence of `dNAV[t+j]` in
/// `sum_{k=2..N} d^k · r · sum_{i=0..k-2} dNAV[t+i]` plus its share of the
/// horizon correction `(NAV[T] - NAV[t])·d^N`; it should equal
/// `I[t+j]·d^(j+1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TelescopingCheck {
    pub t: usize,
    pub double_sum_terms: Vec<f64>,
    pub investment_terms: Vec<f64>,
    pub double_sum: f64,
    pub terminal_correction: f64,
    pub discounted_investment: f64,
}

impl TelescopingCheck {
    pub fn max_term_deviation(&self) -> f64 {
        self.double_sum_terms
            .iter()
            .zip(&self.investment_terms)
            .map(|(&a, &b)| rel_deviation(a, b))
            .fold(0.0, f64::max)
    }

    pub fn total_deviation(&self) -> f64 {
        rel_deviation(
            self.double_sum + self.terminal_correction,
            self.discounted_investment,
        )
    }
}

/// Present value of a coupon `r·nav` for `periods` periods plus the
/// principal `nav` returned at the end: always `nav`.
pub fn passive_nav_value(nav: f64, r: Rate, periods: u32) -> Result<f64> {
    r.require_positive()?;
    let coupons = vec![r.value() * nav; periods as usize];
    Ok(pv_with_terminal(&coupons, nav, r))
}

impl FirmTrajectory {
    /// Build the trajectory implied by `primitives` and the horizon closure.
    pub fn build(primitives: FirmPrimitives, terminal: TerminalCondition) -> Result<Self> {
        let p = primitives.normalized()?;
        let horizon = p.horizon();
        let g = p.rate.growth();

        let mut nav = Vec::with_capacity(horizon + 1);
        nav.push(p.nav0);
        for t in 0..horizon {
            nav.push(nav[t] + p.investment[t]);
        }

        let terminal_value = match terminal {
            TerminalCondition::ZeroGoodwill => nav[horizon],
            TerminalCondition::ExplicitValue(v) => {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::validation("terminal.value", "must be finite and >= 0"));
                }
                v
            }
        };
        let mut value = vec![0.0; horizon + 1];
        value[horizon] = terminal_value;
        for t in (0..horizon).rev() {
            value[t] = (p.profit[t] - p.investment[t] + value[t + 1]) / g;
        }

        let mut subscription = vec![0.0; horizon + 1];
        let mut new_shares = vec![0.0; horizon + 1];
        let mut shares = Vec::with_capacity(horizon + 1);
        let mut price = Vec::with_capacity(horizon + 1);
        shares.push(p.shares0);
        price.push(value[0] / p.shares0);
        if price[0] <= 0.0 {
            return Err(Error::InfeasibleTrajectory {
                period: 0,
                reason: format!("share price {} is not positive", price[0]),
            });
        }
        for t in 0..horizon {
            // Investment not covered by retained profit is raised from new
            // shares sold at the ex-dividend price; a negative amount is a
            // pro-rata buyback at that price.
            let sub = p.investment[t] - (p.profit[t] - p.dividends[t]);
            subscription[t + 1] = sub;
            let v_next = (value[t + 1] - sub) / shares[t];
            if v_next.is_nan() || v_next <= 0.0 {
                return Err(Error::InfeasibleTrajectory {
                    period: t + 1,
                    reason: format!("share price {v_next} is not positive"),
                });
            }
            let m = sub / v_next;
            let n_next = shares[t] + m;
            if n_next.is_nan() || n_next <= 0.0 {
                return Err(Error::InfeasibleTrajectory {
                    period: t + 1,
                    reason: format!("share count {n_next} is not positive"),
                });
            }
            new_shares[t + 1] = m;
            shares.push(n_next);
            price.push(v_next);
        }

        let div_per_share = (0..horizon).map(|t| p.dividends[t] / shares[t]).collect();
        let receipts = (0..horizon)
            .map(|t| p.profit[t] + p.depreciation[t] + p.cogs[t])
            .collect();
        let outlays = (0..horizon)
            .map(|t| p.investment[t] + p.depreciation[t] + p.cogs[t])
            .collect();

        Ok(FirmTrajectory {
            primitives: p,
            terminal,
            nav,
            value,
            subscription,
            new_shares,
            shares,
            price,
            div_per_share,
            receipts,
            outlays,
        })
    }

    pub fn primitives(&self) -> &FirmPrimitives {
        &self.primitives
    }

    pub fn terminal(&self) -> TerminalCondition {
        self.terminal
    }

    pub fn horizon(&self) -> usize {
        self.primitives.horizon()
    }

    pub fn rate(&self) -> Rate {
        self.primitives.rate
    }

    pub fn nav(&self) -> &[f64] {
        &self.nav
    }

    /// Total equity value `V[t]` from the backward recursion.
    pub fn value(&self) -> &[f64] {
        &self.value
    }

    pub fn subscription(&self) -> &[f64] {
        &self.subscription
    }

    pub fn new_shares(&self) -> &[f64] {
        &self.new_shares
    }

    pub fn shares(&self) -> &[f64] {
        &self.shares
    }

    pub fn price(&self) -> &[f64] {
        &self.price
    }

    pub fn div_per_share(&self) -> &[f64] {
        &self.div_per_share
    }

    pub fn receipts(&self) -> &[f64] {
        &self.receipts
    }

    pub fn outlays(&self) -> &[f64] {
        &self.outlays
    }

    /// Balance sheet at `t < T` (debt is a flow-indexed series).
    pub fn balance_sheet(&self, t: usize) -> Option<BalanceSheet> {
        let debt = *self.primitives.debt.get(t)?;
        Some(BalanceSheet::from_nav_and_debt(self.nav[t], debt))
    }

    fn check_t(&self, t: usize) -> Result<()> {
        if t > self.horizon() {
            Err(Error::domain(format!(
                "period {t} outside 0..={}",
                self.horizon()
            )))
        } else {
            Ok(())
        }
    }

    fn terminal_value(&self) -> f64 {
        self.value[self.horizon()]
    }

    /// Dividends accruing to the shares of record at `t`, plus those shares'
    /// terminal value. Later issues dilute nothing here: only `n[t]` shares
    /// are counted.
    pub fn value_dividend_stream(&self, t: usize) -> Result<f64> {
        self.check_t(t)?;
        let horizon = self.horizon();
        let n_t = self.shares[t];
        let per_share = pv_with_terminal(&self.div_per_share[t..], self.price[horizon], self.rate());
        Ok(n_t * per_share)
    }

    /// Discounted receipts minus outlays, plus the discounted terminal value.
    pub fn value_discounted_cashflow(&self, t: usize) -> Result<f64> {
        self.check_t(t)?;
        let net: Vec<f64> = self.receipts[t..]
            .iter()
            .zip(&self.outlays[t..])
            .map(|(rec, out)| rec - out)
            .collect();
        Ok(pv_with_terminal(&net, self.terminal_value(), self.rate()))
    }

    /// Discounted `A - I`, plus the discounted terminal value.
    pub fn value_earnings_recursion(&self, t: usize) -> Result<f64> {
        self.check_t(t)?;
        let p = &self.primitives;
        let net: Vec<f64> = p.profit[t..]
            .iter()
            .zip(&p.investment[t..])
            .map(|(a, i)| a - i)
            .collect();
        Ok(pv_with_terminal(&net, self.terminal_value(), self.rate()))
    }

    /// `pi[t] = A[t] - r·NAV[t]` for `t = 0..T-1`.
    pub fn pure_profit_series(&self) -> Vec<f64> {
        let r = self.rate().value();
        self.primitives
            .profit
            .iter()
            .zip(&self.nav)
            .map(|(a, nav)| a - r * nav)
            .collect()
    }

    /// Discounted pure profit from `t` on, plus discounted horizon goodwill
    /// `V[T] - NAV[T]` (zero under [`TerminalCondition::ZeroGoodwill`]).
    pub fn goodwill(&self, t: usize) -> Result<f64> {
        self.check_t(t)?;
        let pi = self.pure_profit_series();
        let horizon = self.horizon();
        let terminal_gw = self.terminal_value() - self.nav[horizon];
        Ok(pv_with_terminal(&pi[t..], terminal_gw, self.rate()))
    }

    pub fn value_nav_plus_goodwill(&self, t: usize) -> Result<f64> {
        let gw = self.goodwill(t)?;
        Ok(self.nav[t] + gw)
    }

    /// All five valuations at `t`; `passed` iff the largest pairwise relative
    /// deviation is within `tol`.
    pub fn check_equivalence(&self, t: usize, tol: f64) -> Result<EquivalenceReport> {
        self.check_t(t)?;
        let dividend_stream = self.value_dividend_stream(t)?;
        let discounted_cashflow = self.value_discounted_cashflow(t)?;
        let earnings_recursion = self.value_earnings_recursion(t)?;
        let nav_plus_goodwill = self.value_nav_plus_goodwill(t)?;
        let backward_recursion = self.value[t];
        let dev = max_pairwise_deviation(&[
            dividend_stream,
            discounted_cashflow,
            earnings_recursion,
            nav_plus_goodwill,
            backward_recursion,
        ]);
        Ok(EquivalenceReport {
            t,
            dividend_stream,
            discounted_cashflow,
            earnings_recursion,
            nav_plus_goodwill,
            backward_recursion,
            max_rel_deviation: dev,
            tol,
            passed: dev <= tol,
        })
    }

    /// `|r·v[t] - div[t] - v[t+1] + v[t]|` for each `t < T`.
    pub fn arbitrage_residuals(&self) -> Vec<f64> {
        let r = self.rate().value();
        (0..self.horizon())
            .map(|t| {
                (r * self.price[t] - self.div_per_share[t] - self.price[t + 1] + self.price[t]).abs()
            })
            .collect()
    }

    /// Evaluate the goodwill double sum literally, term by term, from `t`.
    pub fn telescoping_check(&self, t: usize) -> Result<TelescopingCheck> {
        self.check_t(t)?;
        let r = self.rate();
        let rv = r.value();
        let n = self.horizon() - t;
        // dNAV[s] = I[s] by construction of the NAV path
        let dnav = &self.primitives.investment[t..];
        let d = |k: usize| discount_factor(r, k as u32);

        // every appearance of dNAV[t+j] across the double sum, plus its share
        // of the horizon correction
        let mut double_sum_terms = Vec::with_capacity(n);
        let mut double_sum = 0.0;
        for (j, &x) in dnav.iter().enumerate() {
            let coupons: f64 = (j + 2..=n).map(|k| rv * d(k)).sum();
            double_sum += x * coupons;
            double_sum_terms.push(x * (coupons + d(n)));
        }
        let terminal_correction = (self.nav[self.horizon()] - self.nav[t]) * d(n);
        let investment_terms: Vec<f64> = self.primitives.investment[t..]
            .iter()
            .enumerate()
            .map(|(j, &i)| i * d(j + 1))
            .collect();
        let discounted_investment = investment_terms.iter().sum();
        Ok(TelescopingCheck {
            t,
            double_sum_terms,
            investment_terms,
            double_sum,
            terminal_correction,
            discounted_investment,
        })
    }
}
