//! C ABI over `parcx`.
//!
//! Every fallible function returns a [`ParcxStatus`] and writes its result
//! through an out-pointer. Handles are opaque and must be released with the
//! matching `*_free` function. After a non-OK status,
//! [`parcx_last_error`] describes the failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use parcx::complexes::{order_complex, partition_poset, GComplex};
use parcx::exactalg::FGAbGroup;
use parcx::verify::{pointed_partition_complex, steinberg, verify_all, verify_main_theorem, Status};
use parcx::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParcxStatus {
    Ok = 0,
    /// The computation ran and the verification did not pass.
    VerificationFailed = 1,
    Usage = 2,
    Capacity = 3,
    Domain = 4,
    Containment = 5,
    Integrity = 6,
    NullPointer = 7,
    InvalidUtf8 = 8,
    Panic = 9,
}

/// A simplicial complex with a symmetric group action.
pub struct ParcxComplex {
    inner: GComplex,
}

/// Graded homology groups.
pub struct ParcxHomology {
    groups: Vec<FGAbGroup>,
}

/// A verification report, kept as JSON with its verdict.
pub struct ParcxReport {
    json: CString,
    passed: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ParcxStatus {
    match e {
        Error::Capacity(_) => ParcxStatus::Capacity,
        Error::Containment(_) => ParcxStatus::Containment,
        Error::Domain(_) => ParcxStatus::Domain,
        Error::Integrity(_) => ParcxStatus::Integrity,
        Error::Usage(_) => ParcxStatus::Usage,
    }
}

fn guard(f: impl FnOnce() -> Result<ParcxStatus, (ParcxStatus, String)>) -> ParcxStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            ParcxStatus::Panic
        }
    }
}

fn lib(e: Error) -> (ParcxStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (ParcxStatus, String) {
    (ParcxStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (ParcxStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| (ParcxStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), (ParcxStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(v);
    Ok(())
}

fn report(json: String, passed: bool) -> Result<*mut ParcxReport, (ParcxStatus, String)> {
    let json = CString::new(json).map_err(|_| (ParcxStatus::Integrity, "report contains a nul byte".to_string()))?;
    Ok(Box::into_raw(Box::new(ParcxReport { json, passed })))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn parcx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn parcx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds the order complex of proper nontrivial partitions of `{1..n}`, or
/// its suspension pointed at the south pole when `suspended` is set.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn parcx_partition_complex(n: usize, suspended: bool, out: *mut *mut ParcxComplex) -> ParcxStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let x = if suspended {
            pointed_partition_complex(n).map_err(lib)?
        } else {
            order_complex(&partition_poset(n).map_err(lib)?).map_err(lib)?
        };
        write_out(out, Box::into_raw(Box::new(ParcxComplex { inner: x })))?;
        Ok(ParcxStatus::Ok)
    })
}

/// Number of `q`-simplices; zero above the dimension.
///
/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn parcx_complex_count(c: *const ParcxComplex, q: usize, out: *mut usize) -> ParcxStatus {
    guard(|| {
        let c = c.as_ref().ok_or_else(|| null("complex"))?;
        write_out(out, c.inner.count(q))?;
        Ok(ParcxStatus::Ok)
    })
}

/// Order of the acting group.
///
/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn parcx_complex_group_order(c: *const ParcxComplex, out: *mut usize) -> ParcxStatus {
    guard(|| {
        let c = c.as_ref().ok_or_else(|| null("complex"))?;
        write_out(out, c.inner.group.order())?;
        Ok(ParcxStatus::Ok)
    })
}

/// # Safety
/// `c` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn parcx_complex_free(c: *mut ParcxComplex) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Bredon homology (or cohomology when `cohomology` is set) of the partition
/// complex with coefficients named as on the command line, for example
/// `"fp-sign"` or `"borel:4,2,1,6"`.
///
/// # Safety
/// `coeff` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn parcx_bredon(
    n: usize,
    p: usize,
    coeff: *const c_char,
    degree: usize,
    reduced: bool,
    cohomology: bool,
    out: *mut *mut ParcxHomology,
) -> ParcxStatus {
    guard(|| {
        let coeff_str = read_str(coeff, "coeff")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let g = parcx::cli::parse_coefficients(coeff_str, n, p).map_err(lib)?;
        let x = if reduced {
            pointed_partition_complex(n).map_err(lib)?
        } else {
            order_complex(&partition_poset(n).map_err(lib)?).map_err(lib)?
        };
        let groups = if cohomology {
            parcx::bredon::bredon_cohomology(&x, g.as_ref(), degree, reduced).map_err(lib)?
        } else {
            parcx::bredon::bredon_homology(&x, g.as_ref(), degree, reduced).map_err(lib)?
        };
        write_out(out, Box::into_raw(Box::new(ParcxHomology { groups })))?;
        Ok(ParcxStatus::Ok)
    })
}

/// Number of degrees in the table.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn parcx_homology_len(h: *const ParcxHomology, out: *mut usize) -> ParcxStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("homology"))?;
        write_out(out, h.groups.len())?;
        Ok(ParcxStatus::Ok)
    })
}

/// Free rank and number of torsion factors in degree `q`.
///
/// # Safety
/// `h` must be a live handle; `rank` and `torsion_len` writable.
#[no_mangle]
pub unsafe extern "C" fn parcx_homology_degree(
    h: *const ParcxHomology,
    q: usize,
    rank: *mut usize,
    torsion_len: *mut usize,
) -> ParcxStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("homology"))?;
        let g = h.groups.get(q).ok_or_else(|| (ParcxStatus::Usage, format!("degree {q} out of range")))?;
        write_out(rank, g.rank)?;
        write_out(torsion_len, g.torsion.len())?;
        Ok(ParcxStatus::Ok)
    })
}

/// The `i`-th torsion factor in degree `q`.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn parcx_homology_torsion(h: *const ParcxHomology, q: usize, i: usize, out: *mut u64) -> ParcxStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("homology"))?;
        let t = h
            .groups
            .get(q)
            .and_then(|g| g.torsion.get(i))
            .ok_or_else(|| (ParcxStatus::Usage, format!("torsion factor {i} in degree {q} out of range")))?;
        write_out(out, *t)?;
        Ok(ParcxStatus::Ok)
    })
}

/// # Safety
/// `h` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn parcx_homology_free(h: *mut ParcxHomology) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Rank of the Steinberg module of `GL_k(F_p)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn parcx_steinberg_rank(k: usize, p: usize, out: *mut usize) -> ParcxStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let st = steinberg(k, p).map_err(lib)?;
        write_out(out, st.rank)?;
        Ok(ParcxStatus::Ok)
    })
}

/// Compares both sides of the main statement. A report is produced whether or
/// not it passes; the status is `VerificationFailed` when it does not.
///
/// # Safety
/// `coeff` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn parcx_verify_main_theorem(
    n: usize,
    p: usize,
    coeff: *const c_char,
    out: *mut *mut ParcxReport,
) -> ParcxStatus {
    guard(|| {
        let coeff_str = read_str(coeff, "coeff")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let g = parcx::cli::parse_coefficients(coeff_str, n, p).map_err(lib)?;
        let r = verify_main_theorem(n, p, g.as_ref()).map_err(lib)?;
        let passed = r.status != Status::Fail;
        write_out(out, report(r.deterministic_json(), passed)?)?;
        Ok(if passed { ParcxStatus::Ok } else { ParcxStatus::VerificationFailed })
    })
}

/// Runs the acceptance suite for `n ≤ max_n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn parcx_verify_all(max_n: usize, out: *mut *mut ParcxReport) -> ParcxStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let s = verify_all(max_n).map_err(lib)?;
        write_out(out, report(s.deterministic_json(), s.passed)?)?;
        Ok(if s.passed { ParcxStatus::Ok } else { ParcxStatus::VerificationFailed })
    })
}

/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn parcx_report_passed(r: *const ParcxReport, out: *mut bool) -> ParcxStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(|| null("report"))?;
        write_out(out, r.passed)?;
        Ok(ParcxStatus::Ok)
    })
}

/// JSON text of the report, borrowed from the handle.
///
/// # Safety
/// `r` must be a live handle. The string is valid until the handle is freed.
#[no_mangle]
pub unsafe extern "C" fn parcx_report_json(r: *const ParcxReport) -> *const c_char {
    r.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// # Safety
/// `r` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn parcx_report_free(r: *mut ParcxReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
