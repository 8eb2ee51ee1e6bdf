//! Valuation engine contrasting market value with net asset value, and an
//! internal-capital-account ledger for employee-owned firms and partnerships.
//!
//! * [`fincore`]: discount factors, annuities, present values.
//! * [`asset_model`]: one machine, rented out or operated.
//! * [`mm_engine`]: firm trajectories under no-arbitrage pricing and the five
//!   equivalent ways of valuing them.
//! * [`ledger`]: event-sourced member capital accounts.
//! * [`scenario`]: scenario files, reports and the equivalence fuzzer behind
//!   the `coopval` binary.

pub mod asset_model;
pub mod error;
pub mod fincore;
pub mod ledger;
pub mod mm_engine;
pub mod scenario;

pub use error::{Error, Result};
pub use fincore::{CashStream, Rate};
