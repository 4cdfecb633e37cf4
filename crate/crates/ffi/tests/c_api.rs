use std::ffi::{CStr, CString};
use std::ptr;

use pedal_core::dsl::{FIXTURE_SOURCE, FIXTURE_UNCONDITIONAL_SOURCE};
use pedal_core::mucalc::{DEADLOCK_FREE, START_CONDITION_BLOCKS};
use pedal_ffi::*;

fn load(src: &str) -> *mut PedalModel {
    let src = CString::new(src).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { pedal_model_load(src.as_ptr(), &mut m) }, PedalStatus::Ok);
    m
}

fn build(m: *const PedalModel, mode: PedalMode) -> *mut PedalLts {
    let mut l = ptr::null_mut();
    assert_eq!(unsafe { pedal_lts_build(m, mode as u32, &mut l) }, PedalStatus::Ok);
    l
}

fn last_error() -> String {
    let p = pedal_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn fixture_sizes_and_equivalences() {
    let m = load(FIXTURE_SOURCE);
    assert_eq!(unsafe { pedal_model_num_actions(m) }, 4);
    let r = build(m, PedalMode::Reference);
    let t = build(m, PedalMode::Tau);
    let c = build(m, PedalMode::Compiled);
    unsafe {
        assert_eq!((pedal_lts_num_states(r), pedal_lts_num_transitions(r)), (12, 18));
        assert_eq!((pedal_lts_num_states(t), pedal_lts_num_transitions(t)), (14, 20));
        let mut eq = false;
        assert_eq!(pedal_equivalent(r, c, PedalEquivKind::Strong as u32, &mut eq), PedalStatus::Ok);
        assert!(eq);
        assert_eq!(pedal_equivalent(r, t, PedalEquivKind::Strong as u32, &mut eq), PedalStatus::Ok);
        assert!(!eq);
        assert_eq!(pedal_equivalent(r, t, PedalEquivKind::Branching as u32, &mut eq), PedalStatus::Ok);
        assert!(eq);
        for l in [r, t, c] {
            pedal_lts_free(l);
        }
        pedal_model_free(m);
    }
}

#[test]
fn aut_round_trip() {
    let m = load(FIXTURE_SOURCE);
    let r = build(m, PedalMode::Reference);
    unsafe {
        let mut text = ptr::null_mut();
        assert_eq!(pedal_lts_to_aut(r, &mut text), PedalStatus::Ok);
        assert!(CStr::from_ptr(text).to_str().unwrap().starts_with("des (0,18,12)\n"));
        let mut back = ptr::null_mut();
        assert_eq!(pedal_lts_from_aut(text, &mut back), PedalStatus::Ok);
        assert_eq!(pedal_lts_num_states(back), 12);
        pedal_string_free(text);
        pedal_lts_free(back);
        pedal_lts_free(r);
        pedal_model_free(m);
    }
}

#[test]
fn property_checks() {
    let good = load(FIXTURE_SOURCE);
    let bad = load(FIXTURE_UNCONDITIONAL_SOURCE);
    let (g, b) = (build(good, PedalMode::Reference), build(bad, PedalMode::Reference));
    let prop = CString::new(START_CONDITION_BLOCKS).unwrap();
    let deadlock = CString::new(DEADLOCK_FREE).unwrap();
    let mut holds = false;
    unsafe {
        assert_eq!(pedal_check(g, prop.as_ptr(), &mut holds), PedalStatus::Ok);
        assert!(holds);
        assert_eq!(pedal_check(b, prop.as_ptr(), &mut holds), PedalStatus::Ok);
        assert!(!holds);
        assert_eq!(pedal_check(b, deadlock.as_ptr(), &mut holds), PedalStatus::Ok);
        assert!(holds);
        let unknown = CString::new("[Pedal]false").unwrap();
        assert_eq!(pedal_check(g, unknown.as_ptr(), &mut holds), PedalStatus::UnknownAction);
        let broken = CString::new("nu X(f:Bool=false). X(f, true)").unwrap();
        assert_eq!(pedal_check(g, broken.as_ptr(), &mut holds), PedalStatus::FormulaError);
        assert!(last_error().contains("argument"));
        for l in [g, b] {
            pedal_lts_free(l);
        }
        pedal_model_free(good);
        pedal_model_free(bad);
    }
}

#[test]
fn error_codes() {
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(pedal_model_load(ptr::null(), &mut m), PedalStatus::NullArgument);
        let empty = CString::new("").unwrap();
        assert_eq!(pedal_model_load(empty.as_ptr(), &mut m), PedalStatus::SyntaxError);
        assert!(m.is_null());
        let dup = CString::new(FIXTURE_SOURCE.to_string() + "\nRule StartCond\n  Guard: FRFluoOK == true\n  Do:\nEnd\n").unwrap();
        assert_eq!(pedal_model_load(dup.as_ptr(), &mut m), PedalStatus::ValidationError);
        assert!(last_error().contains("StartCond"));
        let bytes = [0xffu8, 0];
        assert_eq!(pedal_model_load(bytes.as_ptr().cast(), &mut m), PedalStatus::InvalidUtf8);

        let model = load(FIXTURE_SOURCE);
        let mut l = ptr::null_mut();
        assert_eq!(pedal_lts_build(model, 7, &mut l), PedalStatus::InvalidArgument);
        assert_eq!(pedal_lts_build(model, 0, ptr::null_mut()), PedalStatus::NullArgument);
        let r = build(model, PedalMode::Reference);
        let mut eq = false;
        assert_eq!(pedal_equivalent(r, r, 9, &mut eq), PedalStatus::InvalidArgument);
        let garbage = CString::new("des (0,1,1)\n(0,\"a\"\n").unwrap();
        assert_eq!(pedal_lts_from_aut(garbage.as_ptr(), &mut l), PedalStatus::AutError);
        assert_eq!(pedal_lts_num_states(ptr::null()), 0);
        assert_eq!(pedal_lts_build(model, 0, &mut l), PedalStatus::Ok);
        assert!(pedal_last_error().is_null());
        pedal_lts_free(l);
        pedal_lts_free(r);
        pedal_model_free(model);
        pedal_model_free(ptr::null_mut());
    }
}
