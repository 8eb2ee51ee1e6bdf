use std::ffi::{CStr, CString};
use std::ptr;

use coopval_ffi::*;

fn cs(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = coop_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

unsafe fn take(p: *mut std::ffi::c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_owned();
    coop_string_free(p);
    s
}

const TWO_PERIOD: &str = r#"{"rate":0.1,"nav0":1000,"shares0":100,"profit":[150,150],"investment":[0,0],"dividends":[150,150]}"#;

#[test]
fn discounting() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(coop_discount_factor(0.1, 3, &mut v), CoopStatus::Ok);
        assert!((v - 1000.0 / 1331.0).abs() < 1e-15);
        assert_eq!(coop_annuity_pv(3, 0.1, &mut v), CoopStatus::Ok);
        assert!((v - 3310.0 / 1331.0).abs() < 1e-14);
        let flows = [100.0, 100.0, 100.0];
        assert_eq!(coop_present_value(flows.as_ptr(), 3, 0.1, &mut v), CoopStatus::Ok);
        assert!((v - 331_000.0 / 1331.0).abs() < 1e-12);
        assert_eq!(coop_present_value(ptr::null(), 0, 0.1, &mut v), CoopStatus::Ok);
        assert_eq!(v, 0.0);
        assert_eq!(coop_perpetuity_identity_residual(0.25, 4, &mut v), CoopStatus::Ok);
        assert!((v - 256.0 / 625.0).abs() < 1e-16);
    }
}

#[test]
fn errors_leave_output_untouched() {
    let mut v = 7.0;
    unsafe {
        assert_eq!(coop_discount_factor(-1.0, 1, &mut v), CoopStatus::DomainError);
        assert_eq!(v, 7.0);
        assert!(!last_error().is_empty());
        assert_eq!(coop_discount_factor(0.1, 1, ptr::null_mut()), CoopStatus::NullPointer);
        assert!(last_error().contains("null"));
        assert_eq!(coop_present_value(ptr::null(), 2, 0.1, &mut v), CoopStatus::NullPointer);
    }
}

#[test]
fn asset_break_even_has_no_goodwill() {
    // running the machine earns exactly its rent
    let spec = CoopAssetSpec {
        cost: 1000.0,
        capital_services: 1.0,
        rental_rate: 100.0,
        salvage: 1000.0,
        lifetime: 10,
        price: 10.0,
        output: 50.0,
        variable_cost: 150.0,
        wage_rate: 25.0,
        labor: 10.0,
    };
    let mut out = CoopAssetValuation::default();
    unsafe {
        assert_eq!(coop_asset_decompose(&spec, 0.1, &mut out), CoopStatus::Ok);
    }
    assert!((out.passive_value - 1000.0).abs() < 1e-9);
    assert!(out.pure_profit_per_year.abs() < 1e-12);
    assert!(out.goodwill_simple.abs() < 1e-9);
    assert!(out.arbitrage_gap.abs() < 1e-9);
}

#[test]
fn trajectory_handle() {
    let p = cs(TWO_PERIOD);
    let mut traj = ptr::null_mut();
    unsafe {
        assert_eq!(coop_trajectory_build(p.as_ptr(), ptr::null(), &mut traj), CoopStatus::Ok);
        let mut h = 0usize;
        assert_eq!(coop_trajectory_horizon(traj, &mut h), CoopStatus::Ok);
        assert_eq!(h, 2);
        let mut v = 0.0;
        assert_eq!(coop_trajectory_value(traj, 0, &mut v), CoopStatus::Ok);
        assert!((v - 131_500.0 / 121.0).abs() < 1e-9);
        assert_eq!(coop_trajectory_nav(traj, 2, &mut v), CoopStatus::Ok);
        assert_eq!(v, 1000.0);
        assert_eq!(coop_trajectory_goodwill(traj, 0, &mut v), CoopStatus::Ok);
        assert!((v - 10_500.0 / 121.0).abs() < 1e-9);
        assert_eq!(coop_trajectory_value(traj, 3, &mut v), CoopStatus::DomainError);

        let mut eq = CoopEquivalence::default();
        assert_eq!(coop_trajectory_check_equivalence(traj, 0, 1e-9, &mut eq), CoopStatus::Ok);
        assert!(eq.passed);
        assert!(eq.max_rel_deviation <= 1e-9);
        coop_trajectory_free(traj);
    }
}

#[test]
fn explicit_terminal_value() {
    let p = cs(r#"{"rate":0.1,"nav0":1000,"shares0":100,"profit":[100],"investment":[0]}"#);
    let t = cs(r#"{"type":"explicit_value","value":1210}"#);
    let mut traj = ptr::null_mut();
    unsafe {
        assert_eq!(coop_trajectory_build(p.as_ptr(), t.as_ptr(), &mut traj), CoopStatus::Ok);
        let mut v = 0.0;
        assert_eq!(coop_trajectory_value(traj, 0, &mut v), CoopStatus::Ok);
        // (V[1] + A - I) / (1+r) whatever the payout
        assert!((v - 1310.0 / 1.1).abs() < 1e-9);
        coop_trajectory_free(traj);
    }
}

#[test]
fn trajectory_errors() {
    let mut traj = ptr::null_mut();
    unsafe {
        let bad = cs("{not json");
        assert_eq!(coop_trajectory_build(bad.as_ptr(), ptr::null(), &mut traj), CoopStatus::ParseError);
        let infeasible = cs(r#"{"rate":0.1,"nav0":100,"shares0":10,"profit":[-500],"investment":[0]}"#);
        assert_eq!(
            coop_trajectory_build(infeasible.as_ptr(), ptr::null(), &mut traj),
            CoopStatus::InfeasibleTrajectory
        );
        let short = cs(r#"{"rate":0.1,"nav0":100,"shares0":10,"profit":[1,2],"investment":[0]}"#);
        assert_eq!(
            coop_trajectory_build(short.as_ptr(), ptr::null(), &mut traj),
            CoopStatus::ValidationError
        );
        assert!(traj.is_null());
        let invalid = [0xffu8, 0];
        assert_eq!(
            coop_trajectory_build(invalid.as_ptr().cast(), ptr::null(), &mut traj),
            CoopStatus::InvalidUtf8
        );
        coop_trajectory_free(ptr::null_mut());
    }
}

#[test]
fn share_book_sellout() {
    let mut book = ptr::null_mut();
    unsafe {
        assert_eq!(coop_book_new_shares(1000, 0.0, &mut book), CoopStatus::Ok);
        for m in ["dee", "eli", "fay"] {
            let ev = cs(&format!(r#"{{"kind":"Contribution","payload":{{"member":"{m}","amount":"0.00"}}}}"#));
            assert_eq!(coop_book_apply_event(book, ev.as_ptr(), ptr::null_mut()), CoopStatus::Ok);
        }
        let ev = cs(r#"{"kind":"EsopPrincipalAllocation","payload":{"shares":100,"weights":{"dee":5,"eli":3,"fay":2}}}"#);
        let mut outcome = ptr::null_mut();
        assert_eq!(coop_book_apply_event(book, ev.as_ptr(), &mut outcome), CoopStatus::Ok);
        assert!(!outcome.is_null());
        take(outcome);

        let mut nav = 0i64;
        assert_eq!(coop_book_company_nav_cents(book, &mut nav), CoopStatus::Ok);
        assert_eq!(nav, 100_000);
        assert_eq!(coop_book_check_invariants(book), CoopStatus::Ok);

        let mut rep = ptr::null_mut();
        assert_eq!(coop_book_sellout_incentive(book, 108_678, &mut rep), CoopStatus::Ok);
        let rep: serde_json::Value = serde_json::from_str(&take(rep)).unwrap();
        assert_eq!(rep["aggregate_delta"], "86.78", "{rep}");

        let mut snap = ptr::null_mut();
        assert_eq!(coop_book_to_json(book, &mut snap), CoopStatus::Ok);
        assert!(take(snap).contains("\"dee\""));
        coop_book_free(book);
    }
}

#[test]
fn failed_event_leaves_book_unchanged() {
    let mut book = ptr::null_mut();
    unsafe {
        assert_eq!(coop_book_new_value(0.05, &mut book), CoopStatus::Ok);
        let open = cs(r#"{"kind":"Contribution","payload":{"member":"a","amount":"50.00"}}"#);
        assert_eq!(coop_book_apply_event(book, open.as_ptr(), ptr::null_mut()), CoopStatus::Ok);
        let mut before = ptr::null_mut();
        coop_book_to_json(book, &mut before);
        let before = take(before);

        let overdraw = cs(r#"{"kind":"Withdrawal","payload":{"member":"a","amount":"80.00"}}"#);
        assert_ne!(coop_book_apply_event(book, overdraw.as_ptr(), ptr::null_mut()), CoopStatus::Ok);
        let ghost = cs(r#"{"kind":"Withdrawal","payload":{"member":"zz","amount":"1.00"}}"#);
        assert_eq!(coop_book_apply_event(book, ghost.as_ptr(), ptr::null_mut()), CoopStatus::LedgerError);
        assert!(last_error().contains("zz"));

        let mut after = ptr::null_mut();
        coop_book_to_json(book, &mut after);
        assert_eq!(take(after), before);

        // ESOP operations need a share book
        let esop = cs(r#"{"kind":"EsopPrincipalAllocation","payload":{"shares":1,"weights":{"a":1}}}"#);
        assert_eq!(coop_book_apply_event(book, esop.as_ptr(), ptr::null_mut()), CoopStatus::LedgerError);
        coop_book_free(book);
    }
}

#[test]
fn errors_are_per_thread() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(coop_discount_factor(-2.0, 1, &mut v), CoopStatus::DomainError);
    }
    let here = last_error();
    std::thread::spawn(|| assert!(coop_last_error_message().is_null()))
        .join()
        .unwrap();
    assert_eq!(last_error(), here);
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(coop_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
