//! C interface to `pedal-core`.
//!
//! Objects are opaque handles created by `*_new`/`*_load`/`*_build` style
//! functions and released with the matching `*_free`. Every fallible call
//! returns a [`PedalStatus`]; the message of the last failure on the calling
//! thread is available from [`pedal_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pedal_core::dsl::{self, ModelError, ValidatedModel};
use pedal_core::equivalence::{self, Kind};
use pedal_core::lts::Lts;
use pedal_core::mucalc::{self, CheckError};
use pedal_core::process_ir;
use pedal_core::semantics::{self, Mode};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PedalStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    SyntaxError = 3,
    ValidationError = 4,
    StateLimit = 5,
    FormulaError = 6,
    UnknownAction = 7,
    AutError = 8,
    InvalidArgument = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PedalMode {
    Reference = 0,
    Tau = 1,
    Compiled = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PedalEquivKind {
    Strong = 0,
    Branching = 1,
}

/// A parsed and validated model.
pub struct PedalModel(ValidatedModel);

/// A labeled transition system.
pub struct PedalLts(Lts);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Fail(PedalStatus, String);

impl From<ModelError> for Fail {
    fn from(e: ModelError) -> Self {
        let status = match e {
            ModelError::Syntax(_) => PedalStatus::SyntaxError,
            ModelError::Validation(_) => PedalStatus::ValidationError,
        };
        Fail(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PedalStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PedalStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PedalStatus::Panic
        }
    }
}

fn null() -> Fail {
    Fail(PedalStatus::NullArgument, "null pointer argument".into())
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(PedalStatus::InvalidUtf8, e.to_string()))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn get<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(null)
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn pedal_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses and validates model source text.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pedal_model_load(source: *const c_char, out: *mut *mut PedalModel) -> PedalStatus {
    guard(|| {
        let model = dsl::load(text(source)?)?;
        put(out, PedalModel(model))
    })
}

/// # Safety
/// `model` must come from [`pedal_model_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pedal_model_free(model: *mut PedalModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of declared input actions.
///
/// # Safety
/// `model` must be a live handle or NULL (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn pedal_model_num_actions(model: *const PedalModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.actions().len())
}

// Enum arguments cross the boundary as integers so that out-of-range values
// from C are rejected instead of being undefined behavior.
const REFERENCE: u32 = PedalMode::Reference as u32;
const TAU: u32 = PedalMode::Tau as u32;
const COMPILED: u32 = PedalMode::Compiled as u32;
const STRONG: u32 = PedalEquivKind::Strong as u32;
const BRANCHING: u32 = PedalEquivKind::Branching as u32;

fn bad_enum(what: &str, v: u32) -> Fail {
    Fail(PedalStatus::InvalidArgument, format!("invalid {what} {v}"))
}

/// Builds the LTS of a model; `mode` is a [`PedalMode`] value.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pedal_lts_build(model: *const PedalModel, mode: u32, out: *mut *mut PedalLts) -> PedalStatus {
    guard(|| {
        let m = &get(model)?.0;
        let limit = |e: &dyn std::fmt::Display| Fail(PedalStatus::StateLimit, e.to_string());
        let lts = match mode {
            REFERENCE => semantics::build_lts(m, Mode::Reference).map_err(|e| limit(&e))?,
            TAU => semantics::build_lts(m, Mode::TauConditional).map_err(|e| limit(&e))?,
            COMPILED => process_ir::build_lts_compiled(m).map_err(|e| limit(&e))?,
            other => return Err(bad_enum("mode", other)),
        };
        put(out, PedalLts(lts))
    })
}

/// Parses Aldebaran text.
///
/// # Safety
/// `aut` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pedal_lts_from_aut(aut: *const c_char, out: *mut *mut PedalLts) -> PedalStatus {
    guard(|| {
        let lts = Lts::from_aut(text(aut)?).map_err(|e| Fail(PedalStatus::AutError, e.to_string()))?;
        put(out, PedalLts(lts))
    })
}

/// # Safety
/// `lts` must be a live handle or NULL (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn pedal_lts_num_states(lts: *const PedalLts) -> usize {
    lts.as_ref().map_or(0, |l| l.0.num_states())
}

/// # Safety
/// `lts` must be a live handle or NULL (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn pedal_lts_num_transitions(lts: *const PedalLts) -> usize {
    lts.as_ref().map_or(0, |l| l.0.num_transitions())
}

/// Canonical Aldebaran text; release it with [`pedal_string_free`].
///
/// # Safety
/// `lts` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pedal_lts_to_aut(lts: *const PedalLts, out: *mut *mut c_char) -> PedalStatus {
    guard(|| {
        let aut = get(lts)?.0.to_aut();
        if out.is_null() {
            return Err(null());
        }
        *out = CString::new(aut)
            .map_err(|e| Fail(PedalStatus::InvalidArgument, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `lts` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pedal_lts_free(lts: *mut PedalLts) {
    if !lts.is_null() {
        drop(Box::from_raw(lts));
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pedal_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Decides bisimilarity of two LTSs; `kind` is a [`PedalEquivKind`] value.
///
/// # Safety
/// `a` and `b` must be live handles; `equivalent` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pedal_equivalent(
    a: *const PedalLts,
    b: *const PedalLts,
    kind: u32,
    equivalent: *mut bool,
) -> PedalStatus {
    guard(|| {
        let kind = match kind {
            STRONG => Kind::Strong,
            BRANCHING => Kind::Branching,
            other => return Err(bad_enum("equivalence kind", other)),
        };
        let r = equivalence::equivalent(&get(a)?.0, &get(b)?.0, kind);
        *equivalent.as_mut().ok_or_else(null)? = r.equivalent;
        Ok(())
    })
}

/// Checks a property file (optional `bind` lines, then one formula).
///
/// # Safety
/// `lts` must be a live handle, `property` a NUL-terminated string and
/// `holds` writable.
#[no_mangle]
pub unsafe extern "C" fn pedal_check(lts: *const PedalLts, property: *const c_char, holds: *mut bool) -> PedalStatus {
    guard(|| {
        let lts = &get(lts)?.0;
        let prop = mucalc::parse_property_file(text(property)?).map_err(|e| Fail(PedalStatus::FormulaError, e.to_string()))?;
        let r = mucalc::check(lts, &prop.formula).map_err(|e| match e {
            CheckError::UnknownAction(_) => Fail(PedalStatus::UnknownAction, e.to_string()),
            CheckError::Formula(_) => Fail(PedalStatus::FormulaError, e.to_string()),
        })?;
        *holds.as_mut().ok_or_else(null)? = r.holds;
        Ok(())
    })
}
