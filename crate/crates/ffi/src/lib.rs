//! C interface to addlab.
//!
//! Groups and sets are opaque handles created by `addlab_*_new` style functions
//! and released with the matching `_free`. Every fallible call returns an
//! [`AddlabStatus`]; on failure [`addlab_last_error_message`] describes the
//! error for the calling thread. Strings returned to the caller are released
//! with [`addlab_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use addlab::dissociation::{additive_dimension, is_dissociated, DimensionConfig};
use addlab::energy::{energy, t_energy_uniform};
use addlab::extract::{extract_energy_subset, ExtractorConfig};
use addlab::report::{analyze, Report, RunConfig, SetDocument};
use addlab::{Error, GSet, GroupSpec};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AddlabStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed input: bad group, element, argument or document.
    InvalidInput = 2,
    /// A size cap was exceeded.
    CapExceeded = 3,
    /// A precondition of the algorithm does not hold.
    Precondition = 4,
    /// Internal inconsistency or a caught panic.
    Internal = 5,
}

/// A finite abelian group.
pub struct AddlabGroup(GroupSpec);

/// A subset of a group.
pub struct AddlabSet(GSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AddlabStatus {
    match e.exit_code() {
        2 => AddlabStatus::InvalidInput,
        3 => match e {
            Error::Precondition(_) => AddlabStatus::Precondition,
            _ => AddlabStatus::CapExceeded,
        },
        _ => AddlabStatus::Internal,
    }
}

struct Null;

enum Failure {
    Null,
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<Null> for Failure {
    fn from(_: Null) -> Self {
        Failure::Null
    }
}

/// Runs `f`, turning errors and panics into a status and the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AddlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            AddlabStatus::Ok
        }
        Ok(Err(Failure::Null)) => {
            set_error("null pointer argument".into());
            AddlabStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            AddlabStatus::Internal
        }
    }
}

unsafe fn get<'a, T>(p: *const T) -> Result<&'a T, Null> {
    p.as_ref().ok_or(Null)
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Null> {
    p.as_mut().ok_or(Null)
}

unsafe fn slice<'a, T>(p: *const T, len: usize) -> Result<&'a [T], Null> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(Null)
    } else {
        Ok(std::slice::from_raw_parts(p, len))
    }
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(|e| Failure::Lib(Error::Parse(e.to_string())))
}

/// Message for the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn addlab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn addlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `factors` points to `len` readable values; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn addlab_group_new(factors: *const usize, len: usize, out_group: *mut *mut AddlabGroup) -> AddlabStatus {
    guard(|| {
        let out_group = out(out_group)?;
        let g = GroupSpec::new(slice(factors, len)?.to_vec())?;
        *out_group = Box::into_raw(Box::new(AddlabGroup(g)));
        Ok(())
    })
}

/// # Safety
/// `group` is null or a live handle from [`addlab_group_new`].
#[no_mangle]
pub unsafe extern "C" fn addlab_group_free(group: *mut AddlabGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

/// # Safety
/// `group` is a live handle; `order` is writable.
#[no_mangle]
pub unsafe extern "C" fn addlab_group_order(group: *const AddlabGroup, order: *mut usize) -> AddlabStatus {
    guard(|| {
        *out(order)? = get(group)?.0.order();
        Ok(())
    })
}

/// Builds a set from element ranks (mixed-radix, last coordinate fastest).
///
/// # Safety
/// `group` is a live handle, `ranks` points to `len` values, `out_set` is writable.
#[no_mangle]
pub unsafe extern "C" fn addlab_set_from_ranks(
    group: *const AddlabGroup,
    ranks: *const usize,
    len: usize,
    out_set: *mut *mut AddlabSet,
) -> AddlabStatus {
    guard(|| {
        let out_set = out(out_set)?;
        let s = GSet::from_ranks(&get(group)?.0, slice(ranks, len)?.iter().copied())?;
        *out_set = Box::into_raw(Box::new(AddlabSet(s)));
        Ok(())
    })
}

/// Parses a set document (`{"group": [...], "elements": [[...], ...]}`).
///
/// # Safety
/// `json` is a NUL-terminated string; `out_set` is writable.
#[no_mangle]
pub unsafe extern "C" fn addlab_set_from_json(json: *const c_char, out_set: *mut *mut AddlabSet) -> AddlabStatus {
    guard(|| {
        let out_set = out(out_set)?;
        if json.is_null() {
            return Err(Failure::Null);
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| Error::Parse(e.to_string()))?;
        let s = SetDocument::parse(text)?.to_set(addlab::group::DEFAULT_MAX_ORDER)?;
        *out_set = Box::into_raw(Box::new(AddlabSet(s)));
        Ok(())
    })
}

/// Emits the set as a set document; free the string with [`addlab_string_free`].
///
/// # Safety
/// `set` is a live handle; `out_json` is writable.
#[no_mangle]
pub unsafe extern "C" fn addlab_set_to_json(set: *const AddlabSet, out_json: *mut *mut c_char) -> AddlabStatus {
    guard(|| {
        let out_json = out(out_json)?;
        *out_json = into_c_string(SetDocument::from_set(&get(set)?.0, None).to_json()?)?;
        Ok(())
    })
}

/// # Safety
/// `set` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn addlab_set_free(set: *mut AddlabSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// # Safety
/// `s` is null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn addlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `set` is a live handle; `len` is writable.
#[no_mangle]
pub unsafe extern "C" fn addlab_set_len(set: *const AddlabSet, len: *mut usize) -> AddlabStatus {
    guard(|| {
        *out(len)? = get(set)?.0.len();
        Ok(())
    })
}

/// Copies up to `cap` element ranks into `ranks` and stores the set size in `len`.
///
/// # Safety
/// `ranks` has room for `cap` values (may be null when `cap` is 0).
#[no_mangle]
pub unsafe extern "C" fn addlab_set_ranks(
    set: *const AddlabSet,
    ranks: *mut usize,
    cap: usize,
    len: *mut usize,
) -> AddlabStatus {
    guard(|| {
        let s = &get(set)?.0;
        *out(len)? = s.len();
        let n = cap.min(s.len());
        if n > 0 {
            if ranks.is_null() {
                return Err(Failure::Null);
            }
            std::slice::from_raw_parts_mut(ranks, n).copy_from_slice(&s.elements()[..n]);
        }
        Ok(())
    })
}

/// `E(A, B)`.
///
/// # Safety
/// `a`, `b` are live handles; `value` is writable.
#[no_mangle]
pub unsafe extern "C" fn addlab_energy(a: *const AddlabSet, b: *const AddlabSet, value: *mut u64) -> AddlabStatus {
    guard(|| {
        *out(value)? = energy(&get(a)?.0, &get(b)?.0)?;
        Ok(())
    })
}

/// `T_k(A)`.
///
/// # Safety
/// `a` is a live handle; `value` is writable.
#[no_mangle]
pub unsafe extern "C" fn addlab_t_energy(a: *const AddlabSet, k: usize, value: *mut u64) -> AddlabStatus {
    guard(|| {
        *out(value)? = t_energy_uniform(&get(a)?.0, k)?;
        Ok(())
    })
}

/// # Safety
/// `a` is a live handle; `result` is writable.
#[no_mangle]
pub unsafe extern "C" fn addlab_is_dissociated(a: *const AddlabSet, result: *mut bool) -> AddlabStatus {
    guard(|| {
        *out(result)? = is_dissociated(&get(a)?.0)?.is_dissociated();
        Ok(())
    })
}

/// `dim(A)`; `exact` is false when `|A|` exceeds `exact_cap` or the search budget ran out.
///
/// # Safety
/// `a` is a live handle; `value` and `exact` are writable.
#[no_mangle]
pub unsafe extern "C" fn addlab_dimension(
    a: *const AddlabSet,
    exact_cap: usize,
    value: *mut usize,
    exact: *mut bool,
) -> AddlabStatus {
    guard(|| {
        let a = &get(a)?.0;
        let (value, exact) = (out(value)?, out(exact)?);
        let d = additive_dimension(a, &DimensionConfig { exact_cap, ..DimensionConfig::default() });
        *value = d.value;
        *exact = d.exact;
        Ok(())
    })
}

/// Runs the energy extractor on `(A, B)`, storing `B_*` and whether
/// `E(A, B_*) >= E(A, B) / 4` was confirmed by recount.
///
/// # Safety
/// `a`, `b` are live handles; `out_set` and `postcondition` are writable.
#[no_mangle]
pub unsafe extern "C" fn addlab_extract_energy_subset(
    a: *const AddlabSet,
    b: *const AddlabSet,
    epsilon: f64,
    out_set: *mut *mut AddlabSet,
    postcondition: *mut bool,
) -> AddlabStatus {
    guard(|| {
        let (out_set, postcondition) = (out(out_set)?, out(postcondition)?);
        let r = extract_energy_subset(&get(a)?.0, &get(b)?.0, &ExtractorConfig::new(epsilon)?)?;
        *postcondition = r.postcondition_ok;
        *out_set = Box::into_raw(Box::new(AddlabSet(r.subset)));
        Ok(())
    })
}

/// Full analysis report as JSON, with the default run configuration.
///
/// # Safety
/// `a` is a live handle; `out_json` is writable.
#[no_mangle]
pub unsafe extern "C" fn addlab_analyze_json(a: *const AddlabSet, out_json: *mut *mut c_char) -> AddlabStatus {
    guard(|| {
        let out_json = out(out_json)?;
        let cfg = RunConfig::default();
        let result = analyze(&get(a)?.0, None, &cfg)?;
        *out_json = into_c_string(Report::new("analyze", &cfg, result).to_json()?)?;
        Ok(())
    })
}
