//! C interface to `coopval`.
//!
//! Conventions:
//! - every fallible function returns a [`CoopStatus`] and writes its result
//!   through an out pointer, which is left untouched on failure;
//! - trajectories and books are opaque handles created by `*_new`/`*_build`
//!   functions and released with the matching `*_free`;
//! - strings passed in are NUL-terminated UTF-8; strings handed out are
//!   owned by the caller and released with [`coop_string_free`];
//! - after a failure, [`coop_last_error_message`] describes it. The message
//!   belongs to the calling thread and stays valid until that thread's next
//!   failing call.
//!
//! Structured inputs (firm primitives, ledger events) cross the boundary as
//! JSON text with the same field names as the scenario files.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use coopval::asset_model::{self, AssetSpec};
use coopval::fincore;
use coopval::ledger::{FirmBook, LedgerEvent, Money};
use coopval::mm_engine::{FirmPrimitives, FirmTrajectory, TerminalCondition};
use coopval::{CashStream, Error, Rate};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoopStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON input.
    ParseError = 3,
    DomainError = 4,
    ValidationError = 5,
    InfeasibleTrajectory = 6,
    /// Member or denomination errors from the ledger.
    LedgerError = 7,
    /// An internal panic was caught at the boundary.
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(CoopStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Domain(_) => CoopStatus::DomainError,
            Error::Validation { .. } => CoopStatus::ValidationError,
            Error::InfeasibleTrajectory { .. } => CoopStatus::InfeasibleTrajectory,
            _ => CoopStatus::LedgerError,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CoopStatus::NullPointer, format!("{what} is null"))
}

fn parse_err(e: serde_json::Error) -> Failure {
    Failure(CoopStatus::ParseError, e.to_string())
}

/// Run `f` behind a panic guard and translate its outcome to a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CoopStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CoopStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CoopStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(CoopStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no NUL bytes").into_raw()
}

fn rate(r: f64) -> Result<Rate, Failure> {
    Ok(Rate::new(r)?)
}

/// Message for the calling thread's most recent failure, or null if none.
#[no_mangle]
pub extern "C" fn coop_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn coop_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn coop_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---- discounting ----

/// `(1+r)^-k`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coop_discount_factor(r: f64, k: u32, out: *mut f64) -> CoopStatus {
    guard(|| {
        let v = fincore::discount_factor(rate(r)?, k);
        *self::out(out, "out")? = v;
        Ok(())
    })
}

/// Present value of 1 a period for `n` periods.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coop_annuity_pv(n: u32, r: f64, out: *mut f64) -> CoopStatus {
    guard(|| {
        let v = fincore::annuity_pv(n, rate(r)?);
        *self::out(out, "out")? = v;
        Ok(())
    })
}

/// Present value of `len` end-of-period flows.
///
/// # Safety
/// `flows` must point to `len` doubles (or be null with `len == 0`); `out`
/// must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coop_present_value(flows: *const f64, len: usize, r: f64, out: *mut f64) -> CoopStatus {
    guard(|| {
        let amounts = if len == 0 {
            Vec::new()
        } else if flows.is_null() {
            return Err(null("flows"));
        } else {
            std::slice::from_raw_parts(flows, len).to_vec()
        };
        let v = fincore::present_value(&CashStream::new(amounts), rate(r)?);
        *self::out(out, "out")? = v;
        Ok(())
    })
}

/// `1 - sum_{k=1..K} r/(1+r)^k`, evaluated exactly then rounded.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coop_perpetuity_identity_residual(r: f64, periods: u32, out: *mut f64) -> CoopStatus {
    guard(|| {
        let v = fincore::perpetuity_identity_residual(rate(r)?, periods)?;
        *self::out(out, "out")? = v;
        Ok(())
    })
}

// ---- single asset ----

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoopAssetSpec {
    pub cost: f64,
    pub capital_services: f64,
    pub rental_rate: f64,
    pub salvage: f64,
    pub lifetime: u32,
    pub price: f64,
    pub output: f64,
    pub variable_cost: f64,
    pub wage_rate: f64,
    pub labor: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CoopAssetValuation {
    pub passive_value: f64,
    pub active_value: f64,
    pub pure_profit_per_year: f64,
    pub goodwill_simple: f64,
    pub arbitrage_gap: f64,
}

/// Passive and active value of one asset and the goodwill between them.
///
/// # Safety
/// `spec` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coop_asset_decompose(
    spec: *const CoopAssetSpec,
    r: f64,
    out: *mut CoopAssetValuation,
) -> CoopStatus {
    guard(|| {
        let s = spec.as_ref().ok_or_else(|| null("spec"))?;
        let a = AssetSpec {
            cost: s.cost,
            capital_services: s.capital_services,
            rental_rate: s.rental_rate,
            salvage: s.salvage,
            lifetime: s.lifetime,
            price: s.price,
            output: s.output,
            variable_cost: s.variable_cost,
            wage_rate: s.wage_rate,
            labor: s.labor,
        };
        let v = asset_model::decompose(&a, rate(r)?)?;
        *self::out(out, "out")? = CoopAssetValuation {
            passive_value: v.passive_value,
            active_value: v.active_value,
            pure_profit_per_year: v.pure_profit_per_year,
            goodwill_simple: v.goodwill_simple,
            arbitrage_gap: v.arbitrage_gap,
        };
        Ok(())
    })
}

// ---- firm trajectories ----

/// Opaque handle to a built firm trajectory.
pub struct CoopTrajectory(FirmTrajectory);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CoopEquivalence {
    pub dividend_stream: f64,
    pub discounted_cashflow: f64,
    pub earnings_recursion: f64,
    pub nav_plus_goodwill: f64,
    pub backward_recursion: f64,
    pub max_rel_deviation: f64,
    pub passed: bool,
}

/// Build a trajectory from firm primitives given as JSON, e.g.
/// `{"rate":0.1,"nav0":1000,"shares0":100,"profit":[150,150],"investment":[0,0]}`.
/// `terminal_json` may be null for zero horizon goodwill, or e.g.
/// `{"type":"explicit_value","value":1200}`.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coop_trajectory_build(
    primitives_json: *const c_char,
    terminal_json: *const c_char,
    out: *mut *mut CoopTrajectory,
) -> CoopStatus {
    guard(|| {
        let p: FirmPrimitives = serde_json::from_str(str_arg(primitives_json, "primitives_json")?).map_err(parse_err)?;
        let terminal: TerminalCondition = if terminal_json.is_null() {
            TerminalCondition::ZeroGoodwill
        } else {
            serde_json::from_str(str_arg(terminal_json, "terminal_json")?).map_err(parse_err)?
        };
        let slot = self::out(out, "out")?;
        let traj = FirmTrajectory::build(p.normalized()?, terminal)?;
        *slot = Box::into_raw(Box::new(CoopTrajectory(traj)));
        Ok(())
    })
}

/// Release a trajectory. Null is ignored.
///
/// # Safety
/// `traj` must come from [`coop_trajectory_build`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn coop_trajectory_free(traj: *mut CoopTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

unsafe fn traj_ref<'a>(p: *const CoopTrajectory) -> Result<&'a FirmTrajectory, Failure> {
    p.as_ref().map(|t| &t.0).ok_or_else(|| null("trajectory"))
}

fn at(series: &[f64], t: usize) -> Result<f64, Failure> {
    series.get(t).copied().ok_or_else(|| {
        Failure(
            CoopStatus::DomainError,
            format!("t = {t} is past the horizon {}", series.len().saturating_sub(1)),
        )
    })
}

/// Number of periods `T`.
///
/// # Safety
/// `traj` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coop_trajectory_horizon(traj: *const CoopTrajectory, out: *mut usize) -> CoopStatus {
    guard(|| {
        let h = traj_ref(traj)?.horizon();
        *self::out(out, "out")? = h;
        Ok(())
    })
}

/// Firm value `V[t]` from the backward recursion.
///
/// # Safety
/// `traj` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coop_trajectory_value(traj: *const CoopTrajectory, t: usize, out: *mut f64) -> CoopStatus {
    guard(|| {
        let v = at(traj_ref(traj)?.value(), t)?;
        *self::out(out, "out")? = v;
        Ok(())
    })
}

/// Net asset value `NAV[t]`.
///
/// # Safety
/// `traj` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coop_trajectory_nav(traj: *const CoopTrajectory, t: usize, out: *mut f64) -> CoopStatus {
    guard(|| {
        let v = at(traj_ref(traj)?.nav(), t)?;
        *self::out(out, "out")? = v;
        Ok(())
    })
}

/// Goodwill `GW[t]`: discounted pure profit plus horizon goodwill.
///
/// # Safety
/// `traj` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coop_trajectory_goodwill(traj: *const CoopTrajectory, t: usize, out: *mut f64) -> CoopStatus {
    guard(|| {
        let v = traj_ref(traj)?.goodwill(t)?;
        *self::out(out, "out")? = v;
        Ok(())
    })
}

/// All five valuations at `t` and whether they agree within `tol`.
///
/// # Safety
/// `traj` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coop_trajectory_check_equivalence(
    traj: *const CoopTrajectory,
    t: usize,
    tol: f64,
    out: *mut CoopEquivalence,
) -> CoopStatus {
    guard(|| {
        let r = traj_ref(traj)?.check_equivalence(t, tol)?;
        *self::out(out, "out")? = CoopEquivalence {
            dividend_stream: r.dividend_stream,
            discounted_cashflow: r.discounted_cashflow,
            earnings_recursion: r.earnings_recursion,
            nav_plus_goodwill: r.nav_plus_goodwill,
            backward_recursion: r.backward_recursion,
            max_rel_deviation: r.max_rel_deviation,
            passed: r.passed,
        };
        Ok(())
    })
}

// ---- ledger ----

/// Opaque handle to a member-account book.
pub struct CoopBook(FirmBook);

unsafe fn book_ref<'a>(p: *const CoopBook) -> Result<&'a FirmBook, Failure> {
    p.as_ref().map(|b| &b.0).ok_or_else(|| null("book"))
}

unsafe fn book_mut<'a>(p: *mut CoopBook) -> Result<&'a mut FirmBook, Failure> {
    p.as_mut().map(|b| &mut b.0).ok_or_else(|| null("book"))
}

/// Empty value-denominated book (internal capital accounts).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coop_book_new_value(ica_interest_rate: f64, out: *mut *mut CoopBook) -> CoopStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        let book = FirmBook::value_book(ica_interest_rate)?;
        *slot = Box::into_raw(Box::new(CoopBook(book)));
        Ok(())
    })
}

/// Empty share-denominated book at an internal price given in cents.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coop_book_new_shares(
    share_price_cents: i64,
    ica_interest_rate: f64,
    out: *mut *mut CoopBook,
) -> CoopStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        let book = FirmBook::share_book(Money::from_cents(share_price_cents), ica_interest_rate)?;
        *slot = Box::into_raw(Box::new(CoopBook(book)));
        Ok(())
    })
}

/// Release a book. Null is ignored.
///
/// # Safety
/// `book` must come from a `coop_book_new_*` call and not be used again.
#[no_mangle]
pub unsafe extern "C" fn coop_book_free(book: *mut CoopBook) {
    if !book.is_null() {
        drop(Box::from_raw(book));
    }
}

/// Apply one event given as JSON, e.g.
/// `{"kind":"Contribution","payload":{"member":"a","amount":"100.00"}}`.
/// On failure the book is unchanged. If `outcome_json` is not null it
/// receives the payout, revaluation and flags as JSON.
///
/// # Safety
/// `book` must be a live handle; `event_json` NUL-terminated;
/// `outcome_json` null or writable.
#[no_mangle]
pub unsafe extern "C" fn coop_book_apply_event(
    book: *mut CoopBook,
    event_json: *const c_char,
    outcome_json: *mut *mut c_char,
) -> CoopStatus {
    guard(|| {
        let b = book_mut(book)?;
        let event: LedgerEvent = serde_json::from_str(str_arg(event_json, "event_json")?).map_err(parse_err)?;
        let outcome = b.apply(&event)?;
        if !outcome_json.is_null() {
            *outcome_json = c_string(serde_json::to_string(&outcome).expect("outcomes serialize"));
        }
        Ok(())
    })
}

/// Canonical JSON snapshot of the book.
///
/// # Safety
/// `book` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coop_book_to_json(book: *const CoopBook, out: *mut *mut c_char) -> CoopStatus {
    guard(|| {
        let s = coopval::ledger::events::snapshot(book_ref(book)?);
        *self::out(out, "out")? = c_string(s);
        Ok(())
    })
}

/// Company NAV in cents.
///
/// # Safety
/// `book` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coop_book_company_nav_cents(book: *const CoopBook, out: *mut i64) -> CoopStatus {
    guard(|| {
        let v = book_ref(book)?.company_nav().cents();
        *self::out(out, "out")? = v;
        Ok(())
    })
}

/// Per-member market-rule versus NAV-rule payouts at `market_value_cents`,
/// as JSON.
///
/// # Safety
/// `book` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coop_book_sellout_incentive(
    book: *const CoopBook,
    market_value_cents: i64,
    out: *mut *mut c_char,
) -> CoopStatus {
    guard(|| {
        let rep = book_ref(book)?.sellout_incentive(Money::from_cents(market_value_cents))?;
        *self::out(out, "out")? = c_string(serde_json::to_string(&rep).expect("reports serialize"));
        Ok(())
    })
}

/// Verify the book's conservation invariants.
///
/// # Safety
/// `book` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn coop_book_check_invariants(book: *const CoopBook) -> CoopStatus {
    guard(|| Ok(book_ref(book)?.check_invariants()?))
}
