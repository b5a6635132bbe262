//! C ABI for the viscowave toolkit: opaque handles, integer status codes and
//! a thread-local last-error message. All entry points catch panics and
//! translate them into [`VwStatus::RuntimeError`].
//!
//! The generated header lives in `include/viscowave.h`. Field buffers are
//! exchanged as interleaved little-endian doubles, `3` components ×
//! `n³` points × `(re, im)`, x-fastest ordering (the same payload layout as
//! the snapshot format).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;

use viscowave::duhamel::{NonlinearityForm, NonlinearSolver};
use viscowave::lattice::{FrequencyLattice, Representation, VectorField};
use viscowave::metrology::{lp_norm, Lp};
use viscowave::propagator::LinearFlow;
use viscowave::snapshot;
use viscowave::symbols::{diffusion_multipliers, kernel_multipliers, MaterialParams};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VwStatus {
    Ok = 0,
    /// One or more verification verdicts failed (run entry points only).
    VerdictFailed = 1,
    RuntimeError = 2,
    InvalidArgument = 3,
    NullPointer = 4,
}

/// Opaque periodic lattice handle.
pub struct VwLattice {
    inner: Arc<FrequencyLattice>,
}

/// Opaque three-component field handle.
pub struct VwField {
    inner: VectorField,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(msg).unwrap_or_default();
    });
}

fn guard<F: FnOnce() -> VwStatus>(f: F) -> VwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("panic inside viscowave");
            VwStatus::RuntimeError
        }
    }
}

fn to_status(err: &viscowave::Error) -> VwStatus {
    set_error(err.to_string());
    match err {
        viscowave::Error::InvalidParameter(_)
        | viscowave::Error::InvalidLp(_)
        | viscowave::Error::RepresentationMismatch(_)
        | viscowave::Error::LatticeMismatch(_, _)
        | viscowave::Error::ConfigParse { .. }
        | viscowave::Error::ConfigValidation(_) => VwStatus::InvalidArgument,
        _ => VwStatus::RuntimeError,
    }
}

/// Version string of the underlying library; static storage, do not free.
#[no_mangle]
pub extern "C" fn vw_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Message of the last error on this thread; valid until the next failing
/// call from the same thread. Do not free.
#[no_mangle]
pub extern "C" fn vw_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

// ---------------------------------------------------------------------------
// Lattice
// ---------------------------------------------------------------------------

/// Create a lattice with `n` points per axis (even, >= 8) on a box of side
/// `box_length`. Returns null on invalid arguments (see `vw_last_error`).
#[no_mangle]
pub extern "C" fn vw_lattice_new(n: u32, box_length: f64) -> *mut VwLattice {
    match FrequencyLattice::new(n as usize, box_length) {
        Ok(inner) => Box::into_raw(Box::new(VwLattice { inner })),
        Err(err) => {
            set_error(err.to_string());
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `lattice` must be a pointer returned by [`vw_lattice_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vw_lattice_free(lattice: *mut VwLattice) {
    if !lattice.is_null() {
        drop(Box::from_raw(lattice));
    }
}

/// Number of lattice points (`n³`), or 0 for a null handle.
///
/// # Safety
/// `lattice` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn vw_lattice_len(lattice: *const VwLattice) -> u64 {
    if lattice.is_null() {
        return 0;
    }
    (*lattice).inner.len() as u64
}

// ---------------------------------------------------------------------------
// Fields
// ---------------------------------------------------------------------------

/// Representation selector: 0 = physical, 1 = spectral.
fn repr_of(value: i32) -> Option<Representation> {
    match value {
        0 => Some(Representation::Physical),
        1 => Some(Representation::Spectral),
        _ => None,
    }
}

/// Create a zero field on the lattice. `spectral`: 0 physical, 1 spectral.
///
/// # Safety
/// `lattice` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn vw_field_zeros(lattice: *const VwLattice, spectral: i32) -> *mut VwField {
    if lattice.is_null() {
        set_error("null lattice");
        return std::ptr::null_mut();
    }
    let Some(repr) = repr_of(spectral) else {
        set_error("representation must be 0 (physical) or 1 (spectral)");
        return std::ptr::null_mut();
    };
    let field = VectorField::zeros(&(*lattice).inner, repr);
    Box::into_raw(Box::new(VwField { inner: field }))
}

/// Create a field from an interleaved buffer of `3 * n³ * 2` doubles
/// (component-major, x-fastest, `(re, im)` pairs).
///
/// # Safety
/// `lattice` must be valid; `data` must point to `3 * n³ * 2` readable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn vw_field_from_interleaved(
    lattice: *const VwLattice,
    spectral: i32,
    data: *const f64,
) -> *mut VwField {
    if lattice.is_null() || data.is_null() {
        set_error("null pointer");
        return std::ptr::null_mut();
    }
    let Some(repr) = repr_of(spectral) else {
        set_error("representation must be 0 (physical) or 1 (spectral)");
        return std::ptr::null_mut();
    };
    let lat = &(*lattice).inner;
    let len = lat.len();
    let mut field = VectorField::zeros(lat, repr);
    for k in 0..3 {
        let src = std::slice::from_raw_parts(data.add(2 * k * len), 2 * len);
        let dst = field.component_mut(k);
        for (i, v) in dst.iter_mut().enumerate() {
            *v = viscowave::lattice::Complex64::new(src[2 * i], src[2 * i + 1]);
        }
    }
    Box::into_raw(Box::new(VwField { inner: field }))
}

/// Copy a field into an interleaved buffer of `3 * n³ * 2` doubles.
///
/// # Safety
/// `field` must be valid; `out` must point to `3 * n³ * 2` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn vw_field_copy_interleaved(
    field: *const VwField,
    out: *mut f64,
) -> VwStatus {
    guard(|| {
        if field.is_null() || out.is_null() {
            set_error("null pointer");
            return VwStatus::NullPointer;
        }
        let f = &(*field).inner;
        let len = f.lattice().len();
        for k in 0..3 {
            let dst = std::slice::from_raw_parts_mut(out.add(2 * k * len), 2 * len);
            for (i, v) in f.component(k).iter().enumerate() {
                dst[2 * i] = v.re;
                dst[2 * i + 1] = v.im;
            }
        }
        VwStatus::Ok
    })
}

/// # Safety
/// `field` must be a pointer returned by a `vw_field_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn vw_field_free(field: *mut VwField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Current representation: 0 physical, 1 spectral, -1 on null.
///
/// # Safety
/// `field` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn vw_field_representation(field: *const VwField) -> i32 {
    if field.is_null() {
        return -1;
    }
    match (*field).inner.representation() {
        Representation::Physical => 0,
        Representation::Spectral => 1,
    }
}

/// Transform a field in place to the spectral representation.
///
/// # Safety
/// `field` must be a valid, uniquely owned handle.
#[no_mangle]
pub unsafe extern "C" fn vw_field_to_spectral(field: *mut VwField) -> VwStatus {
    guard(|| {
        if field.is_null() {
            set_error("null field");
            return VwStatus::NullPointer;
        }
        match (*field).inner.to_spectral() {
            Ok(f) => {
                (*field).inner = f;
                VwStatus::Ok
            }
            Err(err) => to_status(&err),
        }
    })
}

/// Transform a field in place to the physical representation.
///
/// # Safety
/// `field` must be a valid, uniquely owned handle.
#[no_mangle]
pub unsafe extern "C" fn vw_field_to_physical(field: *mut VwField) -> VwStatus {
    guard(|| {
        if field.is_null() {
            set_error("null field");
            return VwStatus::NullPointer;
        }
        match (*field).inner.to_physical() {
            Ok(f) => {
                (*field).inner = f;
                VwStatus::Ok
            }
            Err(err) => to_status(&err),
        }
    })
}

/// `L^p` norm of a field (`p = INFINITY` for the sup norm).
///
/// # Safety
/// `field` must be valid; `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn vw_field_lp_norm(
    field: *const VwField,
    p: f64,
    out: *mut f64,
) -> VwStatus {
    guard(|| {
        if field.is_null() || out.is_null() {
            set_error("null pointer");
            return VwStatus::NullPointer;
        }
        let lp = match Lp::new(p) {
            Ok(lp) => lp,
            Err(err) => return to_status(&err),
        };
        match lp_norm(&(*field).inner, lp) {
            Ok(v) => {
                *out = v;
                VwStatus::Ok
            }
            Err(err) => to_status(&err),
        }
    })
}

// ---------------------------------------------------------------------------
// Kernels and evolution
// ---------------------------------------------------------------------------

/// Damped-wave kernel values `(K0, K1, dtK0, dtK1)` for one mode.
///
/// # Safety
/// `out` must point to four writable doubles.
#[no_mangle]
pub unsafe extern "C" fn vw_kernel_multipliers(
    nu: f64,
    beta: f64,
    r: f64,
    t: f64,
    out: *mut f64,
) -> VwStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output");
            return VwStatus::NullPointer;
        }
        if !(nu > 0.0 && beta > 0.0 && r >= 0.0 && t >= 0.0) {
            set_error("kernel arguments need nu > 0, beta > 0, r >= 0, t >= 0");
            return VwStatus::InvalidArgument;
        }
        let k = kernel_multipliers(nu, beta, r, t);
        let dst = std::slice::from_raw_parts_mut(out, 4);
        dst.copy_from_slice(&[k.k0, k.k1, k.dt_k0, k.dt_k1]);
        VwStatus::Ok
    })
}

/// Diffusion-wave multiplier values `(G0, G1)` for one mode.
///
/// # Safety
/// `out` must point to two writable doubles.
#[no_mangle]
pub unsafe extern "C" fn vw_diffusion_multipliers(
    nu: f64,
    beta: f64,
    r: f64,
    t: f64,
    out: *mut f64,
) -> VwStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output");
            return VwStatus::NullPointer;
        }
        if !(nu > 0.0 && beta > 0.0 && r >= 0.0 && t >= 0.0) {
            set_error("multiplier arguments need nu > 0, beta > 0, r >= 0, t >= 0");
            return VwStatus::InvalidArgument;
        }
        let (g0, g1) = diffusion_multipliers(nu, beta, r, t);
        let dst = std::slice::from_raw_parts_mut(out, 2);
        dst.copy_from_slice(&[g0, g1]);
        VwStatus::Ok
    })
}

/// Evolve linear initial data `(f0, f1)` to time `t`; on success the outputs
/// receive newly allocated spectral fields (free with `vw_field_free`).
///
/// # Safety
/// `f0`, `f1` must be valid handles on the same lattice; `u_out`, `ut_out`
/// must be writable pointer slots.
#[no_mangle]
pub unsafe extern "C" fn vw_linear_evolve(
    lambda: f64,
    mu: f64,
    nu: f64,
    f0: *const VwField,
    f1: *const VwField,
    t: f64,
    u_out: *mut *mut VwField,
    ut_out: *mut *mut VwField,
) -> VwStatus {
    guard(|| {
        if f0.is_null() || f1.is_null() || u_out.is_null() || ut_out.is_null() {
            set_error("null pointer");
            return VwStatus::NullPointer;
        }
        let material = match MaterialParams::new(lambda, mu, nu) {
            Ok(m) => m,
            Err(err) => return to_status(&err),
        };
        if !(t >= 0.0) {
            set_error("time must be >= 0");
            return VwStatus::InvalidArgument;
        }
        let f0 = &(*f0).inner;
        let f1 = &(*f1).inner;
        let flow = LinearFlow::new(material, f0.lattice());
        match flow.evolve(f0, f1, t) {
            Ok((u, ut)) => {
                *u_out = Box::into_raw(Box::new(VwField { inner: u }));
                *ut_out = Box::into_raw(Box::new(VwField { inner: ut }));
                VwStatus::Ok
            }
            Err(err) => to_status(&err),
        }
    })
}

/// Run the nonlinear solver from `(f0, f1)` to a single output time,
/// returning the final `(u, ut)` as new spectral fields.
/// `form`: 0 = linear, 1 = grad_grad2, 2 = grad_gradt. `step <= 0` selects
/// the default step size.
///
/// # Safety
/// Pointer arguments as in [`vw_linear_evolve`].
#[no_mangle]
pub unsafe extern "C" fn vw_nonlinear_run(
    lambda: f64,
    mu: f64,
    nu: f64,
    form: i32,
    step: f64,
    f0: *const VwField,
    f1: *const VwField,
    t: f64,
    u_out: *mut *mut VwField,
    ut_out: *mut *mut VwField,
) -> VwStatus {
    guard(|| {
        if f0.is_null() || f1.is_null() || u_out.is_null() || ut_out.is_null() {
            set_error("null pointer");
            return VwStatus::NullPointer;
        }
        let material = match MaterialParams::new(lambda, mu, nu) {
            Ok(m) => m,
            Err(err) => return to_status(&err),
        };
        let form = match form {
            0 => NonlinearityForm::None,
            1 => NonlinearityForm::grad_grad2(),
            2 => NonlinearityForm::grad_gradt(),
            _ => {
                set_error("form must be 0 (none), 1 (grad_grad2) or 2 (grad_gradt)");
                return VwStatus::InvalidArgument;
            }
        };
        let f0 = &(*f0).inner;
        let f1 = &(*f1).inner;
        let mut solver = NonlinearSolver::new(material, f0.lattice(), form);
        if step > 0.0 {
            solver = solver.with_step(step);
        }
        match solver.run(f0, f1, &[t]) {
            Ok(traj) => match traj.samples.last().map(|s| s.load()) {
                Some(Ok((u, ut))) => {
                    *u_out = Box::into_raw(Box::new(VwField { inner: u }));
                    *ut_out = Box::into_raw(Box::new(VwField { inner: ut }));
                    VwStatus::Ok
                }
                _ => {
                    set_error("empty trajectory");
                    VwStatus::RuntimeError
                }
            },
            Err(err) => to_status(&err),
        }
    })
}

// ---------------------------------------------------------------------------
// Snapshots and experiments
// ---------------------------------------------------------------------------

unsafe fn cstr_to_path(ptr: *const c_char) -> Option<PathBuf> {
    if ptr.is_null() {
        return None;
    }
    CStr::from_ptr(ptr).to_str().ok().map(PathBuf::from)
}

/// Write a field snapshot in the binary EWSP format.
///
/// # Safety
/// `field` must be valid; `path` must be a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn vw_field_save(
    field: *const VwField,
    lambda: f64,
    mu: f64,
    nu: f64,
    time: f64,
    path: *const c_char,
) -> VwStatus {
    guard(|| {
        let Some(path) = cstr_to_path(path) else {
            set_error("null or non-UTF-8 path");
            return VwStatus::InvalidArgument;
        };
        if field.is_null() {
            set_error("null field");
            return VwStatus::NullPointer;
        }
        let material = match MaterialParams::new(lambda, mu, nu) {
            Ok(m) => m,
            Err(err) => return to_status(&err),
        };
        match snapshot::write_field(path, &(*field).inner, &material, time) {
            Ok(()) => VwStatus::Ok,
            Err(err) => to_status(&err),
        }
    })
}

/// Read a field snapshot; on success `out` receives a new handle and
/// `time_out` (when non-null) the stored time.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out` must be a writable
/// pointer slot.
#[no_mangle]
pub unsafe extern "C" fn vw_field_load(
    path: *const c_char,
    out: *mut *mut VwField,
    time_out: *mut f64,
) -> VwStatus {
    guard(|| {
        let Some(path) = cstr_to_path(path) else {
            set_error("null or non-UTF-8 path");
            return VwStatus::InvalidArgument;
        };
        if out.is_null() {
            set_error("null output");
            return VwStatus::NullPointer;
        }
        match snapshot::read_field(path) {
            Ok((field, header)) => {
                *out = Box::into_raw(Box::new(VwField { inner: field }));
                if !time_out.is_null() {
                    *time_out = header.time;
                }
                VwStatus::Ok
            }
            Err(err) => to_status(&err),
        }
    })
}

/// Run a full experiment from a config file (or bundled preset name), with
/// an optional output-directory override. Mirrors the CLI exit semantics:
/// `Ok` when every verdict passes, `VerdictFailed` when any fails.
///
/// # Safety
/// `config` must be a NUL-terminated UTF-8 string; `output_dir` may be null.
#[no_mangle]
pub unsafe extern "C" fn vw_run_experiment(
    config: *const c_char,
    output_dir: *const c_char,
) -> VwStatus {
    guard(|| {
        let Some(config_path) = cstr_to_path(config) else {
            set_error("null or non-UTF-8 config path");
            return VwStatus::InvalidArgument;
        };
        let text = if config_path.exists() {
            match std::fs::read_to_string(&config_path) {
                Ok(t) => t,
                Err(err) => {
                    set_error(err.to_string());
                    return VwStatus::RuntimeError;
                }
            }
        } else if let Some(preset) =
            viscowave::harness::presets::preset(&config_path.display().to_string())
        {
            preset.to_string()
        } else {
            set_error(format!("no config file or preset named {config_path:?}"));
            return VwStatus::InvalidArgument;
        };
        let out = cstr_to_path(output_dir);
        match viscowave::harness::execute_config_text(&text, out) {
            Ok(artifacts) if artifacts.all_pass => VwStatus::Ok,
            Ok(_) => {
                set_error("one or more verification verdicts failed");
                VwStatus::VerdictFailed
            }
            Err(err) => to_status(&err),
        }
    })
}

#[cfg(test)]
mod tests;
