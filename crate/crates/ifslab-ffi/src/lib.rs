//! C ABI for ifslab.
//!
//! Systems and compact-set approximations travel as opaque handles; every
//! fallible call returns an [`IfslabStatus`] and stores a message readable
//! through [`ifslab_last_error`]. Points cross the boundary as parallel
//! `x` / `y` / `infinity` arrays (`y` null on 1-D charts, `infinity` null
//! when no point at infinity occurs).
//!
//! The header is generated into `include/ifslab.h` by the build script.

use ifslab::analysis::{pointwise_test, strict_refute};
use ifslab::experiment::{preset, PresetBundle};
use ifslab::hutchinson::{apply_operator, iterate_orbit};
use ifslab::maps::IfsSystem;
use ifslab::sets::{hausdorff_distance, SetApprox};
use ifslab::space::{Point, Space, SpaceKind};
use ifslab::Verdict;
use libc::{c_char, size_t};
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IfslabStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    RuntimeError = 4,
    Unsupported = 5,
}

/// Opaque system handle: the map family, its space, an optional target set
/// and, for presets, the canonical refutation recipe.
pub struct IfslabSystem {
    system: IfsSystem,
    bundle: Option<PresetBundle>,
}

/// Opaque compact-set approximation.
pub struct IfslabSet {
    set: SetApprox,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|c| *c != '\0').collect();
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(e: &ifslab::IfsError) -> IfslabStatus {
    if e.is_usage() {
        IfslabStatus::ParseError
    } else {
        IfslabStatus::RuntimeError
    }
}

fn guarded<F: FnOnce() -> IfslabStatus>(f: F) -> IfslabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            IfslabStatus::RuntimeError
        }
    }
}

unsafe fn read_utf8<'a>(ptr: *const c_char) -> Result<&'a str, IfslabStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(IfslabStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        IfslabStatus::InvalidUtf8
    })
}

fn make_point(space: &Space, x: f64, y: Option<f64>, infinity: bool) -> Result<Point, String> {
    let p = if infinity {
        Point::Infinity
    } else {
        match (space.kind(), y) {
            (SpaceKind::Circle, None) => Point::angle(x),
            (_, None) => Point::Line(x),
            (_, Some(y)) => Point::Plane(x, y),
        }
    };
    if space.admits(&p) {
        Ok(p)
    } else {
        Err(format!("point {p} does not belong to the {space} chart"))
    }
}

/// Crate version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ifslab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `cap`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must point to `cap` writable bytes, or be null (length query).
#[no_mangle]
pub unsafe extern "C" fn ifslab_last_error(buf: *mut c_char, cap: size_t) -> size_t {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Build a system from a gallery preset name (`cantor`,
/// `cantor-simplified`, `sierpinski-carpet`, `sierpinski-triangle`,
/// `kwietniak`, `circle:<json>`, `line:<json>`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be a valid pointer.
/// A returned handle must be released with [`ifslab_system_free`].
#[no_mangle]
pub unsafe extern "C" fn ifslab_system_preset(
    name: *const c_char,
    out: *mut *mut IfslabSystem,
) -> IfslabStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return IfslabStatus::NullArgument;
        }
        let name = match read_utf8(name) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match preset(name) {
            Ok(bundle) => {
                let handle = Box::new(IfslabSystem {
                    system: bundle.system.clone(),
                    bundle: Some(bundle),
                });
                *out = Box::into_raw(handle);
                IfslabStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Build a system from an inline JSON descriptor (the same schema the
/// experiment configs use under `"inline"`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ifslab_system_from_json(
    json: *const c_char,
    out: *mut *mut IfslabSystem,
) -> IfslabStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return IfslabStatus::NullArgument;
        }
        let json = match read_utf8(json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match ifslab::descriptor::system_from_json(json) {
            Ok(system) => {
                *out = Box::into_raw(Box::new(IfslabSystem {
                    system,
                    bundle: None,
                }));
                IfslabStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// # Safety
/// `sys` must come from a constructor of this library and not already be
/// freed; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ifslab_system_free(sys: *mut IfslabSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Chart dimension of the system's space (1 or 2), or 0 for null.
///
/// # Safety
/// `sys` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ifslab_system_dim(sys: *const IfslabSystem) -> i32 {
    if sys.is_null() {
        return 0;
    }
    (*sys).system.space().dim() as i32
}

/// Number of maps in the family, or 0 for null.
///
/// # Safety
/// `sys` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ifslab_system_map_count(sys: *const IfslabSystem) -> size_t {
    if sys.is_null() {
        return 0;
    }
    (*sys).system.maps().len()
}

/// Clone the system's designated target set into a new handle.
///
/// # Safety
/// `sys` must be a live handle; `out` a valid pointer. Free the result with
/// [`ifslab_set_free`].
#[no_mangle]
pub unsafe extern "C" fn ifslab_system_target(
    sys: *const IfslabSystem,
    out: *mut *mut IfslabSet,
) -> IfslabStatus {
    guarded(|| {
        if sys.is_null() || out.is_null() {
            set_error("null argument");
            return IfslabStatus::NullArgument;
        }
        match (*sys).system.target() {
            Some(t) => {
                *out = Box::into_raw(Box::new(IfslabSet { set: t.clone() }));
                IfslabStatus::Ok
            }
            None => {
                set_error("system has no target set");
                IfslabStatus::Unsupported
            }
        }
    })
}

/// Build a compact-set approximation on the system's space from parallel
/// coordinate arrays. `ys` may be null on 1-D charts; `infinity` may be
/// null when no point at infinity occurs.
///
/// # Safety
/// `xs` (and `ys`/`infinity` when non-null) must point to `n` readable
/// elements; `out` must be valid. Free the result with [`ifslab_set_free`].
#[no_mangle]
pub unsafe extern "C" fn ifslab_set_new(
    sys: *const IfslabSystem,
    xs: *const f64,
    ys: *const f64,
    infinity: *const u8,
    n: size_t,
    epsilon: f64,
    out: *mut *mut IfslabSet,
) -> IfslabStatus {
    guarded(|| {
        if sys.is_null() || xs.is_null() || out.is_null() {
            set_error("null argument");
            return IfslabStatus::NullArgument;
        }
        let space = (*sys).system.space().clone();
        let mut pts = Vec::with_capacity(n);
        for i in 0..n {
            let x = *xs.add(i);
            let y = if ys.is_null() { None } else { Some(*ys.add(i)) };
            let inf = !infinity.is_null() && *infinity.add(i) != 0;
            match make_point(&space, x, y, inf) {
                Ok(p) => pts.push(p),
                Err(msg) => {
                    set_error(&msg);
                    return IfslabStatus::ParseError;
                }
            }
        }
        match SetApprox::new(space, pts, epsilon) {
            Ok(set) => {
                *out = Box::into_raw(Box::new(IfslabSet { set }));
                IfslabStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// # Safety
/// `set` must come from this library and not already be freed; null is a
/// no-op.
#[no_mangle]
pub unsafe extern "C" fn ifslab_set_free(set: *mut IfslabSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Number of points, or 0 for null.
///
/// # Safety
/// `set` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ifslab_set_len(set: *const IfslabSet) -> size_t {
    if set.is_null() {
        return 0;
    }
    (*set).set.len()
}

/// Resolution of the approximation, or NaN for null.
///
/// # Safety
/// `set` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ifslab_set_resolution(set: *const IfslabSet) -> f64 {
    if set.is_null() {
        return f64::NAN;
    }
    (*set).set.resolution()
}

/// Copy up to `cap` points into the provided arrays (any of which may be
/// null to skip that column). Returns the number of points written.
///
/// # Safety
/// Non-null output arrays must have room for `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn ifslab_set_points(
    set: *const IfslabSet,
    xs: *mut f64,
    ys: *mut f64,
    infinity: *mut u8,
    cap: size_t,
) -> size_t {
    if set.is_null() {
        return 0;
    }
    let pts = (*set).set.points();
    let n = pts.len().min(cap);
    for (i, p) in pts.iter().take(n).enumerate() {
        if !xs.is_null() {
            *xs.add(i) = p.coord_x();
        }
        if !ys.is_null() {
            *ys.add(i) = p.coord_y().unwrap_or(0.0);
        }
        if !infinity.is_null() {
            *infinity.add(i) = p.is_infinity() as u8;
        }
    }
    n
}

/// Hausdorff distance between two clouds on the same space.
///
/// # Safety
/// `a`, `b` must be live handles; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ifslab_hausdorff_distance(
    a: *const IfslabSet,
    b: *const IfslabSet,
    out: *mut f64,
) -> IfslabStatus {
    guarded(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            set_error("null argument");
            return IfslabStatus::NullArgument;
        }
        match hausdorff_distance(&(*a).set, &(*b).set) {
            Ok(d) => {
                *out = d;
                IfslabStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// One application of the Barnsley-Hutchinson operator at resolution
/// `epsilon`.
///
/// # Safety
/// `sys`, `s` must be live handles; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ifslab_apply_operator(
    sys: *const IfslabSystem,
    s: *const IfslabSet,
    epsilon: f64,
    out: *mut *mut IfslabSet,
) -> IfslabStatus {
    guarded(|| {
        if sys.is_null() || s.is_null() || out.is_null() {
            set_error("null argument");
            return IfslabStatus::NullArgument;
        }
        match apply_operator(&(*sys).system, &(*s).set, epsilon) {
            Ok(set) => {
                *out = Box::into_raw(Box::new(IfslabSet { set }));
                IfslabStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Iterate the operator `n` steps from `s0`. When the system carries a
/// target and `out_distances` is non-null it receives `n + 1` per-step
/// Hausdorff distances; `out_final` (if non-null) receives the final step.
///
/// # Safety
/// `out_distances`, when non-null, must have room for `n + 1` doubles.
#[no_mangle]
pub unsafe extern "C" fn ifslab_iterate_orbit(
    sys: *const IfslabSystem,
    s0: *const IfslabSet,
    n: size_t,
    epsilon: f64,
    out_distances: *mut f64,
    out_final: *mut *mut IfslabSet,
) -> IfslabStatus {
    guarded(|| {
        if sys.is_null() || s0.is_null() {
            set_error("null argument");
            return IfslabStatus::NullArgument;
        }
        if !out_distances.is_null() && (*sys).system.target().is_none() {
            set_error("distance output requested but the system has no target");
            return IfslabStatus::Unsupported;
        }
        match iterate_orbit(&(*sys).system, &(*s0).set, n, epsilon) {
            Ok(orbit) => {
                if !out_distances.is_null() {
                    let ds = orbit
                        .distances_to_target
                        .as_ref()
                        .expect("target checked above");
                    for (i, d) in ds.iter().enumerate() {
                        *out_distances.add(i) = *d;
                    }
                    for i in ds.len()..=n {
                        *out_distances.add(i) = f64::NAN;
                    }
                }
                if !out_final.is_null() {
                    *out_final = Box::into_raw(Box::new(IfslabSet {
                        set: orbit.final_step().clone(),
                    }));
                }
                IfslabStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Classify convergence of the singleton orbit of `(x, y)` toward the
/// system target: 0 converged, 1 diverged, 2 inconclusive.
///
/// # Safety
/// `sys` must be a live handle; `out_verdict` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ifslab_pointwise_test(
    sys: *const IfslabSystem,
    x: f64,
    y: f64,
    use_y: u8,
    infinity: u8,
    n_max: size_t,
    tol: f64,
    epsilon: f64,
    out_verdict: *mut i32,
) -> IfslabStatus {
    guarded(|| {
        if sys.is_null() || out_verdict.is_null() {
            set_error("null argument");
            return IfslabStatus::NullArgument;
        }
        let system = &(*sys).system;
        let target = match system.target() {
            Some(t) => t.clone(),
            None => {
                set_error("system has no target set");
                return IfslabStatus::Unsupported;
            }
        };
        let point = match make_point(
            system.space(),
            x,
            if use_y != 0 { Some(y) } else { None },
            infinity != 0,
        ) {
            Ok(p) => p,
            Err(msg) => {
                set_error(&msg);
                return IfslabStatus::ParseError;
            }
        };
        match pointwise_test(system, point, &target, n_max, tol, epsilon) {
            Ok(report) => {
                *out_verdict = match report.verdict {
                    Verdict::Converged => 0,
                    Verdict::Diverged => 1,
                    Verdict::Inconclusive => 2,
                };
                IfslabStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Run the canonical strict-attraction refutation of a preset system:
/// builds the witnessing sequence into the `10 * epsilon` neighborhood of
/// the repellor and iterates the operator on the witness tail. Only preset
/// handles carry a witness recipe.
///
/// # Safety
/// `sys` must be a live handle; output pointers may be null to skip.
#[no_mangle]
pub unsafe extern "C" fn ifslab_refute_strict(
    sys: *const IfslabSystem,
    n_max: size_t,
    epsilon: f64,
    out_refuted: *mut u8,
    out_x0_distance: *mut f64,
    out_min_distance: *mut f64,
) -> IfslabStatus {
    guarded(|| {
        if sys.is_null() {
            set_error("null argument");
            return IfslabStatus::NullArgument;
        }
        let handle = &*sys;
        let bundle = match &handle.bundle {
            Some(b) => b,
            None => {
                set_error("refutation recipes are preset-only");
                return IfslabStatus::Unsupported;
            }
        };
        let target = match handle.system.target() {
            Some(t) => t.clone(),
            None => {
                set_error("system has no target set");
                return IfslabStatus::Unsupported;
            }
        };
        let run = || -> ifslab::Result<ifslab::RefuteReport> {
            let witness = bundle.build_witness(epsilon, None)?;
            strict_refute(&handle.system, &target, &witness, None, n_max, epsilon)
        };
        match run() {
            Ok(report) => {
                if !out_refuted.is_null() {
                    *out_refuted = report.refuted as u8;
                }
                if !out_x0_distance.is_null() {
                    *out_x0_distance = report.x0_to_target;
                }
                if !out_min_distance.is_null() {
                    *out_min_distance = report.min_distance;
                }
                IfslabStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}
