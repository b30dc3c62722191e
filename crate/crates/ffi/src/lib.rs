//! C ABI over `ifl_core`.
//!
//! Every fallible call returns an [`IflStatus`]; on failure the message is available from
//! [`ifl_last_error`] until the next call on the same thread. Handles are opaque and must be
//! released with the matching `_free`. Strings returned through `out` parameters are owned by
//! the caller and released with [`ifl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use ifl_core::cli::{fullness_report, parse_eta_spec, pink_report, twist_report};
use ifl_core::hecke::qexp::{eta_product_expand, QExpansion};
use ifl_core::io::{parse_group_file, parse_ring_spec};
use ifl_core::pink::{enumerate_subgroup, MatrixGroup};
use ifl_core::rings::Ring;
use ifl_core::selftest::{run_one, Status};
use ifl_core::IflError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IflStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    BadInput = 4,
    CapExceeded = 5,
    Unverified = 6,
    Failed = 7,
    Panic = 8,
}

/// Opaque coefficient ring.
pub struct IflRing(Arc<Ring>);

/// Opaque finite subgroup of SL2 over a ring.
pub struct IflGroup(MatrixGroup);

/// Opaque truncated q-expansion.
pub struct IflQExpansion(QExpansion);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &IflError) -> IflStatus {
    match e {
        IflError::Parse(_) | IflError::Io(_) => IflStatus::Parse,
        IflError::TooLarge { .. } | IflError::CapExceeded { .. } => IflStatus::CapExceeded,
        IflError::Degenerate { .. } | IflError::Unverified { .. } => IflStatus::Unverified,
        IflError::BadInput(_) | IflError::BadDomain(_) | IflError::BadJ(_) | IflError::BadLevel(_) => IflStatus::BadInput,
        _ => IflStatus::Failed,
    }
}

enum Fail {
    Status(IflStatus, String),
    Core(IflError),
}

impl From<IflError> for Fail {
    fn from(e: IflError) -> Self {
        Fail::Core(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> IflStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            IflStatus::Ok
        }
        Ok(Err(Fail::Status(s, m))) => {
            set_error(&m);
            s
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            IflStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Status(IflStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Status(IflStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail::Status(IflStatus::NullPointer, format!("{name} is null")))
}

fn check_out<T>(out: *mut T) -> Result<(), Fail> {
    if out.is_null() {
        Err(Fail::Status(IflStatus::NullPointer, "out is null".into()))
    } else {
        Ok(())
    }
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

fn cap_usize(cap: u64) -> usize {
    usize::try_from(cap).unwrap_or(usize::MAX)
}

/// Message of the last failed call on this thread; empty after a success. Borrowed, do not free.
#[no_mangle]
pub extern "C" fn ifl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ifl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a `key=value` ring description.
///
/// # Safety
/// `spec` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ifl_ring_parse(spec: *const c_char, out: *mut *mut IflRing) -> IflStatus {
    guard(|| {
        check_out(out)?;
        let r = parse_ring_spec(str_arg(spec, "spec")?)?;
        *out = Box::into_raw(Box::new(IflRing(r)));
        Ok(())
    })
}

/// (Z/p^a)[T]/(T^b).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ifl_ring_trunc_iwasawa(p: u64, a: u32, b: usize, out: *mut *mut IflRing) -> IflStatus {
    guard(|| {
        check_out(out)?;
        let r = Ring::trunc_iwasawa(p, a, b)?;
        *out = Box::into_raw(Box::new(IflRing(r)));
        Ok(())
    })
}

/// Number of elements; saturates at `u64::MAX`.
///
/// # Safety
/// `ring` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ifl_ring_size(ring: *const IflRing, out: *mut u64) -> IflStatus {
    guard(|| {
        check_out(out)?;
        *out = u64::try_from(handle(ring, "ring")?.0.size()).unwrap_or(u64::MAX);
        Ok(())
    })
}

/// Human-readable label such as `(Z/3)[T]/(T^3)`.
///
/// # Safety
/// `ring` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ifl_ring_label(ring: *const IflRing, out: *mut *mut c_char) -> IflStatus {
    guard(|| {
        check_out(out)?;
        *out = to_c(handle(ring, "ring")?.0.label());
        Ok(())
    })
}

/// # Safety
/// `ring` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ifl_ring_free(ring: *mut IflRing) {
    if !ring.is_null() {
        drop(Box::from_raw(ring));
    }
}

/// Subgroup generated by the matrices in `text` (one `a,b;c,d` per line).
///
/// # Safety
/// `ring` live, `text` a valid C string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ifl_group_generate(
    ring: *const IflRing,
    text: *const c_char,
    cap: u64,
    out: *mut *mut IflGroup,
) -> IflStatus {
    guard(|| {
        check_out(out)?;
        let r = &handle(ring, "ring")?.0;
        let gens = parse_group_file(r, str_arg(text, "text")?)?;
        let g = enumerate_subgroup(r, &gens, cap_usize(cap))?;
        *out = Box::into_raw(Box::new(IflGroup(g)));
        Ok(())
    })
}

/// # Safety
/// `group` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ifl_group_order(group: *const IflGroup, out: *mut u64) -> IflStatus {
    guard(|| {
        check_out(out)?;
        *out = handle(group, "group")?.0.order() as u64;
        Ok(())
    })
}

/// # Safety
/// `group` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ifl_group_free(group: *mut IflGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

/// JSON Pink tower report. Returns `Unverified` (with the report still written) if a check fails.
///
/// # Safety
/// `group` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ifl_pink_report(group: *const IflGroup, depth: usize, cap: u64, out: *mut *mut c_char) -> IflStatus {
    guard(|| {
        check_out(out)?;
        let (json, passed) = pink_report(&handle(group, "group")?.0, depth, cap_usize(cap))?;
        *out = to_c(json);
        if passed {
            Ok(())
        } else {
            Err(Fail::Status(IflStatus::Unverified, "pink checks failed".into()))
        }
    })
}

/// JSON fullness certificate for `j` (`a,b;c,d`), or for an automatically found regular element
/// when `j` is null. A report is written on `Ok` and `Unverified`.
///
/// # Safety
/// `group` live; `j` null or a valid C string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ifl_fullness_report(
    group: *const IflGroup,
    j: *const c_char,
    cap: u64,
    out: *mut *mut c_char,
) -> IflStatus {
    guard(|| {
        check_out(out)?;
        let j = if j.is_null() { None } else { Some(str_arg(j, "j")?) };
        let o = fullness_report(&handle(group, "group")?.0, j, None, cap_usize(cap))?;
        *out = to_c(o.report);
        match o.code {
            0 => Ok(()),
            2 => Err(Fail::Status(IflStatus::Unverified, o.stderr.trim().trim_start_matches("error: ").to_string())),
            _ => Err(Fail::Status(IflStatus::Failed, o.stderr.trim().trim_start_matches("error: ").to_string())),
        }
    })
}

/// Eta quotient `d:e,d:e,...` expanded to `precision` coefficients.
///
/// # Safety
/// `spec` a valid C string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ifl_qexp_eta(spec: *const c_char, precision: usize, out: *mut *mut IflQExpansion) -> IflStatus {
    guard(|| {
        check_out(out)?;
        let f = eta_product_expand(&parse_eta_spec(str_arg(spec, "spec")?)?, precision)?;
        *out = Box::into_raw(Box::new(IflQExpansion(f)));
        Ok(())
    })
}

/// q-expansion from CSV text (header `key=value` lines, then `n,value` rows).
///
/// # Safety
/// `text` a valid C string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ifl_qexp_parse_csv(text: *const c_char, out: *mut *mut IflQExpansion) -> IflStatus {
    guard(|| {
        check_out(out)?;
        let f = QExpansion::parse_csv(str_arg(text, "text")?)?;
        *out = Box::into_raw(Box::new(IflQExpansion(f)));
        Ok(())
    })
}

/// Highest known coefficient index.
///
/// # Safety
/// `f` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ifl_qexp_precision(f: *const IflQExpansion, out: *mut usize) -> IflStatus {
    guard(|| {
        check_out(out)?;
        *out = handle(f, "f")?.0.prec();
        Ok(())
    })
}

/// a(n) as text, e.g. `-24` or `2*z4`.
///
/// # Safety
/// `f` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ifl_qexp_coefficient(f: *const IflQExpansion, n: usize, out: *mut *mut c_char) -> IflStatus {
    guard(|| {
        check_out(out)?;
        let f = &handle(f, "f")?.0;
        if n > f.prec() {
            return Err(Fail::Status(IflStatus::BadInput, format!("n = {n} beyond precision {}", f.prec())));
        }
        *out = to_c(f.a(n).to_string());
        Ok(())
    })
}

/// Hecke operator T(l) (U(l) when l divides the level). Writes a new handle.
///
/// # Safety
/// `f` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ifl_qexp_hecke(f: *const IflQExpansion, l: u64, out: *mut *mut IflQExpansion) -> IflStatus {
    guard(|| {
        check_out(out)?;
        let g = handle(f, "f")?.0.hecke_t(l)?;
        *out = Box::into_raw(Box::new(IflQExpansion(g)));
        Ok(())
    })
}

/// CSV serialization.
///
/// # Safety
/// `f` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ifl_qexp_to_csv(f: *const IflQExpansion, out: *mut *mut c_char) -> IflStatus {
    guard(|| {
        check_out(out)?;
        *out = to_c(handle(f, "f")?.0.to_csv());
        Ok(())
    })
}

/// JSON self-twist report over primitive characters of conductor at most `bound`.
///
/// # Safety
/// `f` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ifl_twist_detect(
    f: *const IflQExpansion,
    bound: u64,
    nprimes: usize,
    cap: u64,
    out: *mut *mut c_char,
) -> IflStatus {
    guard(|| {
        check_out(out)?;
        *out = to_c(twist_report(&handle(f, "f")?.0, bound, nprimes, cap)?);
        Ok(())
    })
}

/// # Safety
/// `f` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ifl_qexp_free(f: *mut IflQExpansion) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Run one built-in acceptance check (1..=11). `Ok` on pass, `Unverified` on failure or skip;
/// `detail` (optional) receives the one-line summary.
///
/// # Safety
/// `detail` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ifl_selftest_criterion(id: u32, cap: u64, detail: *mut *mut c_char) -> IflStatus {
    guard(|| {
        if !(1..=11).contains(&id) {
            return Err(Fail::Status(IflStatus::BadInput, format!("criterion {id} out of range 1..=11")));
        }
        let r = run_one(id, cap, None);
        if !detail.is_null() {
            *detail = to_c(r.line());
        }
        match r.status {
            Status::Pass => Ok(()),
            _ => Err(Fail::Status(IflStatus::Unverified, r.line())),
        }
    })
}
