//! Single-machine valuation: the rental (passive) value, the going-concern
//! (active) value, and the pure profit that separates them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fincore::{annuity_pv, discount_factor, Rate};

/// One capital asset and the going concern built around it.
///
/// No depreciation: the asset yields `capital_services` every year for
/// `lifetime` years and is then sold for `salvage`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetSpec {
    /// Market cost of the asset (C).
    pub cost: f64,
    /// Capital services per year (K).
    pub capital_services: f64,
    /// Rental rate per unit of capital service (R).
    pub rental_rate: f64,
    /// Salvage value at end of life (S).
    pub salvage: f64,
    /// Years of service (n).
    pub lifetime: u32,
    /// Output price (P).
    pub price: f64,
    /// Output per year (Q).
    pub output: f64,
    /// Other inputs per year (VC).
    pub variable_cost: f64,
    /// Wage per labor unit (W).
    pub wage_rate: f64,
    /// Labor hired per year (L).
    pub labor: f64,
}

impl AssetSpec {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("cost", self.cost),
            ("capital_services", self.capital_services),
            ("rental_rate", self.rental_rate),
            ("salvage", self.salvage),
            ("price", self.price),
            ("output", self.output),
            ("variable_cost", self.variable_cost),
            ("wage_rate", self.wage_rate),
            ("labor", self.labor),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::validation(name, "must be finite"));
            }
        }
        for (name, v) in [
            ("cost", self.cost),
            ("salvage", self.salvage),
            ("capital_services", self.capital_services),
            ("output", self.output),
            ("labor", self.labor),
        ] {
            if v < 0.0 {
                return Err(Error::validation(name, "must be >= 0"));
            }
        }
        if self.lifetime == 0 {
            return Err(Error::validation("lifetime", "must be >= 1"));
        }
        Ok(())
    }

    /// Annual rent the asset would earn on the lease market (RK).
    pub fn rent(&self) -> f64 {
        self.rental_rate * self.capital_services
    }

    pub fn revenue(&self) -> f64 {
        self.price * self.output
    }

    pub fn wage_bill(&self) -> f64 {
        self.wage_rate * self.labor
    }

    /// Cash the going concern throws off each year: `PQ - VC - WL`.
    pub fn operating_cashflow(&self) -> f64 {
        self.revenue() - self.variable_cost - self.wage_bill()
    }
}

/// All four values of the single-asset model, plus the arbitrage gap between
/// the quoted cost and the lease-market value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssetValuation {
    pub passive_value: f64,
    pub active_value: f64,
    pub pure_profit_per_year: f64,
    pub goodwill_simple: f64,
    /// `cost - passive_value`; zero when the buy and lease markets agree.
    pub arbitrage_gap: f64,
}

/// Value of renting the asset out: `RK·a(n,r) + S/(1+r)^n`.
pub fn passive_value(a: &AssetSpec, r: Rate) -> Result<f64> {
    a.validate()?;
    Ok(a.rent() * annuity_pv(a.lifetime, r) + a.salvage * discount_factor(r, a.lifetime))
}

/// `PQ - RK - VC - WL`; negative for a loss-making operation.
pub fn pure_profit(a: &AssetSpec) -> f64 {
    a.revenue() - a.rent() - a.variable_cost - a.wage_bill()
}

/// Value of operating the asset: `(PQ - VC - WL)·a(n,r) + S/(1+r)^n`.
pub fn active_value(a: &AssetSpec, r: Rate) -> Result<f64> {
    a.validate()?;
    Ok(a.operating_cashflow() * annuity_pv(a.lifetime, r)
        + a.salvage * discount_factor(r, a.lifetime))
}

/// Split the active value into the lease-market value and the capitalized
/// pure profit (`V = C + V0` once arbitrage sets `C`).
pub fn decompose(a: &AssetSpec, r: Rate) -> Result<AssetValuation> {
    let passive = passive_value(a, r)?;
    let active = active_value(a, r)?;
    let pi = pure_profit(a);
    Ok(AssetValuation {
        passive_value: passive,
        active_value: active,
        pure_profit_per_year: pi,
        goodwill_simple: pi * annuity_pv(a.lifetime, r),
        arbitrage_gap: a.cost - passive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const A3: f64 = 3310.0 / 1331.0;

    fn rate(r: f64) -> Rate {
        Rate::new(r).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    /// RK = 100 via K = 10 units at R = 10.
    fn machine(price: f64, output: f64, vc: f64, wl: f64, salvage: f64) -> AssetSpec {
        AssetSpec {
            cost: 0.0,
            capital_services: 10.0,
            rental_rate: 10.0,
            salvage,
            lifetime: 3,
            price,
            output,
            variable_cost: vc,
            wage_rate: 1.0,
            labor: wl,
        }
    }

    #[test]
    fn passive_examples() {
        let r = rate(0.10);
        assert!(close(passive_value(&machine(0., 0., 0., 0., 0.), r).unwrap(), 100.0 * A3, 1e-12));
        let mut salvage_only = machine(0., 0., 0., 0., 1331.0);
        salvage_only.rental_rate = 0.0;
        assert!(close(passive_value(&salvage_only, r).unwrap(), 1000.0, 1e-12));
        let both = machine(0., 0., 0., 0., 1331.0);
        assert!(close(passive_value(&both, r).unwrap(), 1000.0 + 100.0 * A3, 1e-12));
    }

    #[test]
    fn pure_profit_examples() {
        assert_eq!(pure_profit(&machine(10., 100., 850., 50., 0.)), 0.0);
        assert_eq!(pure_profit(&machine(10., 100., 800., 50., 0.)), 50.0);
        assert_eq!(pure_profit(&machine(1., 1., 0., 0., 0.)), -99.0);
    }

    #[test]
    fn active_examples() {
        let r = rate(0.10);
        let even = machine(10., 100., 850., 50., 0.);
        assert!(close(
            active_value(&even, r).unwrap(),
            passive_value(&even, r).unwrap(),
            1e-12
        ));
        let profitable = machine(10., 100., 800., 50., 0.);
        assert!(close(active_value(&profitable, r).unwrap(), 150.0 * A3, 1e-12));
        let zero = AssetSpec {
            cost: 0.,
            capital_services: 0.,
            rental_rate: 0.,
            salvage: 0.,
            lifetime: 1,
            price: 0.,
            output: 0.,
            variable_cost: 0.,
            wage_rate: 0.,
            labor: 0.,
        };
        assert_eq!(active_value(&zero, r).unwrap(), 0.0);
    }

    #[test]
    fn decompose_examples() {
        let r = rate(0.10);
        let even = decompose(&machine(10., 100., 850., 50., 0.), r).unwrap();
        assert_eq!(even.goodwill_simple, 0.0);
        let profitable = decompose(&machine(10., 100., 800., 50., 0.), r).unwrap();
        assert!(close(profitable.goodwill_simple, 50.0 * A3, 1e-12));
        assert!(close(
            profitable.active_value - profitable.passive_value,
            profitable.goodwill_simple,
            1e-9
        ));

        // raising the wage bill by 20 lowers goodwill by 20·a(3, 0.1)
        let dearer = decompose(&machine(10., 100., 800., 70., 0.), r).unwrap();
        assert!(close(
            profitable.goodwill_simple - dearer.goodwill_simple,
            20.0 * A3,
            1e-12
        ));
    }

    #[test]
    fn arbitrage_gap_is_reported_not_rejected() {
        let r = rate(0.10);
        let mut a = machine(10., 100., 800., 50., 0.);
        a.cost = 300.0;
        let v = decompose(&a, r).unwrap();
        assert!(close(v.arbitrage_gap, 300.0 - 100.0 * A3, 1e-12));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let r = rate(0.10);
        let mut a = machine(10., 100., 800., 50., 0.);
        a.lifetime = 0;
        assert!(matches!(decompose(&a, r), Err(Error::Validation { .. })));
        let mut a = machine(10., 100., 800., 50., 0.);
        a.labor = -1.0;
        assert!(passive_value(&a, r).is_err());
    }
}
