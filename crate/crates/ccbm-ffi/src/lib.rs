//! C ABI over the free-boundary solver: run scenarios, read the iteration
//! history and the final boundary, and evaluate the closed-form anchors.
//!
//! Conventions:
//! - every call returns a `CcbmStatus`; outputs go through pointers;
//! - a run is an opaque `CcbmRun` handle, released with `ccbm_run_free`;
//! - on failure, `ccbm_last_error` returns a thread-local message valid
//!   until the next failing call on the same thread;
//! - panics never cross the boundary; they turn into `CCBM_PANIC`.

use ccbm::descent::StopReason;
use ccbm::error::ScenarioError;
use ccbm::scenario::{apply_config_pair, parse_config, preset, radial_exact_solution};
use ccbm::scenario::{lambda_annulus_2d, lambda_annulus_3d, run_scenario, RunArtifacts};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status code of every ABI call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum CcbmStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8, unknown name, or malformed config text.
    BadArgument = 1,
    /// Mesh generation or deformation failed.
    MeshError = 2,
    /// A linear solve failed its residual contract.
    SolveError = 3,
    /// The descent loop failed (step collapse).
    DescentError = 4,
    /// A panic was caught at the boundary.
    Panic = 5,
}

/// Why a finished run stopped.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum CcbmStopReason {
    Converged = 0,
    Plateau = 1,
    IterBudget = 2,
}

/// Opaque handle to a completed run.
pub struct CcbmRun {
    artifacts: RunArtifacts,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &ScenarioError) -> CcbmStatus {
    match err {
        ScenarioError::Mesh(_) => CcbmStatus::MeshError,
        ScenarioError::Solve(_) => CcbmStatus::SolveError,
        ScenarioError::Descent(_) => CcbmStatus::DescentError,
        _ => CcbmStatus::BadArgument,
    }
}

fn guarded(f: impl FnOnce() -> CcbmStatus) -> CcbmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&msg);
            CcbmStatus::Panic
        }
    }
}

/// Message for the most recent failure on this thread. Never null; empty
/// before any failure. Valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn ccbm_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Flux constant for concentric circles (plane). Fails for r >= R or r <= 0.
#[no_mangle]
pub extern "C" fn ccbm_lambda_annulus_2d(r: f64, big_r: f64, out: *mut f64) -> CcbmStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out is null");
            return CcbmStatus::BadArgument;
        }
        match lambda_annulus_2d(r, big_r) {
            Ok(v) => {
                unsafe { *out = v };
                CcbmStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                CcbmStatus::BadArgument
            }
        }
    })
}

/// Flux constant for concentric spheres (space). Fails for r >= R or r <= 0.
#[no_mangle]
pub extern "C" fn ccbm_lambda_annulus_3d(r: f64, big_r: f64, out: *mut f64) -> CcbmStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out is null");
            return CcbmStatus::BadArgument;
        }
        match lambda_annulus_3d(r, big_r) {
            Ok(v) => {
                unsafe { *out = v };
                CcbmStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                CcbmStatus::BadArgument
            }
        }
    })
}

/// Closed-form complex potential between concentric circles of radii r < R,
/// evaluated at radius rho.
#[no_mangle]
pub extern "C" fn ccbm_radial_solution(
    r: f64,
    big_r: f64,
    lambda: f64,
    rho: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> CcbmStatus {
    guarded(|| {
        if out_re.is_null() || out_im.is_null() {
            set_error("output pointer is null");
            return CcbmStatus::BadArgument;
        }
        if !(r > 0.0 && big_r > r && rho > 0.0) {
            set_error("need 0 < r < R and rho > 0");
            return CcbmStatus::BadArgument;
        }
        let (re, im) = radial_exact_solution(r, big_r, lambda, rho);
        unsafe {
            *out_re = re;
            *out_im = im;
        }
        CcbmStatus::Ok
    })
}

/// Run a named scenario to completion in memory.
///
/// `config` may be null or point to flat `key = value` lines overriding the
/// preset (same keys as the CLI config file). On success `*out` owns the
/// run; release it with `ccbm_run_free`.
#[no_mangle]
pub extern "C" fn ccbm_run_preset(
    name: *const c_char,
    config: *const c_char,
    out: *mut *mut CcbmRun,
) -> CcbmStatus {
    guarded(|| {
        if name.is_null() || out.is_null() {
            set_error("name or out is null");
            return CcbmStatus::BadArgument;
        }
        unsafe { *out = ptr::null_mut() };
        let name = match unsafe { CStr::from_ptr(name) }.to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("name is not UTF-8");
                return CcbmStatus::BadArgument;
            }
        };
        let mut scn = match preset(name) {
            Ok(s) => s,
            Err(e) => {
                set_error(&e.to_string());
                return CcbmStatus::BadArgument;
            }
        };
        if !config.is_null() {
            let text = match unsafe { CStr::from_ptr(config) }.to_str() {
                Ok(s) => s,
                Err(_) => {
                    set_error("config is not UTF-8");
                    return CcbmStatus::BadArgument;
                }
            };
            let pairs = match parse_config(text) {
                Ok(p) => p,
                Err(e) => {
                    set_error(&e.to_string());
                    return CcbmStatus::BadArgument;
                }
            };
            for (k, v) in pairs {
                if let Err(e) = apply_config_pair(&mut scn, &k, &v) {
                    set_error(&e.to_string());
                    return CcbmStatus::BadArgument;
                }
            }
        }
        match run_scenario(&scn, None, 0) {
            Ok(artifacts) => {
                let run = Box::new(CcbmRun { artifacts });
                unsafe { *out = Box::into_raw(run) };
                CcbmStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Release a run handle. Null is a no-op.
#[no_mangle]
pub extern "C" fn ccbm_run_free(run: *mut CcbmRun) {
    if !run.is_null() {
        drop(unsafe { Box::from_raw(run) });
    }
}

/// Number of history rows (accepted moves plus the stopping row).
#[no_mangle]
pub extern "C" fn ccbm_run_rows(run: *const CcbmRun) -> usize {
    if run.is_null() {
        return 0;
    }
    unsafe { &*run }.artifacts.outcome.records.len()
}

/// Why the run stopped.
#[no_mangle]
pub extern "C" fn ccbm_run_stop_reason(
    run: *const CcbmRun,
    out: *mut CcbmStopReason,
) -> CcbmStatus {
    guarded(|| {
        if run.is_null() || out.is_null() {
            set_error("run or out is null");
            return CcbmStatus::BadArgument;
        }
        let reason = match unsafe { &*run }.artifacts.outcome.reason {
            StopReason::Converged => CcbmStopReason::Converged,
            StopReason::Plateau => CcbmStopReason::Plateau,
            StopReason::IterBudget => CcbmStopReason::IterBudget,
        };
        unsafe { *out = reason };
        CcbmStatus::Ok
    })
}

/// Copy one history row as 8 doubles:
/// k, J, J_KV, grad_norm, v_inf_sigma, t, d_H, wall_ms.
#[no_mangle]
pub extern "C" fn ccbm_run_row(run: *const CcbmRun, row: usize, out: *mut f64) -> CcbmStatus {
    guarded(|| {
        if run.is_null() || out.is_null() {
            set_error("run or out is null");
            return CcbmStatus::BadArgument;
        }
        let records = &unsafe { &*run }.artifacts.outcome.records;
        let Some(r) = records.get(row) else {
            set_error("row out of range");
            return CcbmStatus::BadArgument;
        };
        let vals = [r.k as f64, r.j, r.j_kv, r.grad_norm, r.v_inf_sigma, r.t, r.d_h, r.wall_ms];
        unsafe { ptr::copy_nonoverlapping(vals.as_ptr(), out, 8) };
        CcbmStatus::Ok
    })
}

/// Number of vertices on the final free boundary.
#[no_mangle]
pub extern "C" fn ccbm_run_boundary_len(run: *const CcbmRun) -> usize {
    if run.is_null() {
        return 0;
    }
    unsafe { &*run }.artifacts.outcome.mesh.free_loop.len()
}

/// Copy the final free boundary as interleaved x, y pairs (CCW, not
/// closed). `cap` counts doubles; needs 2 * boundary_len.
#[no_mangle]
pub extern "C" fn ccbm_run_boundary(run: *const CcbmRun, out: *mut f64, cap: usize) -> CcbmStatus {
    guarded(|| {
        if run.is_null() || out.is_null() {
            set_error("run or out is null");
            return CcbmStatus::BadArgument;
        }
        let mesh = &unsafe { &*run }.artifacts.outcome.mesh;
        let need = 2 * mesh.free_loop.len();
        if cap < need {
            set_error("buffer too small");
            return CcbmStatus::BadArgument;
        }
        for (j, &v) in mesh.free_loop.iter().enumerate() {
            let p = mesh.vertices[v];
            unsafe {
                *out.add(2 * j) = p.x;
                *out.add(2 * j + 1) = p.y;
            }
        }
        CcbmStatus::Ok
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    #[test]
    fn lambda_roundtrip() {
        let mut v = 0.0;
        assert!(ccbm_lambda_annulus_2d(0.5, 0.7, &mut v) == CcbmStatus::Ok);
        assert!((v - -4.24573).abs() < 5e-6);
        assert!(ccbm_lambda_annulus_2d(0.7, 0.5, &mut v) == CcbmStatus::BadArgument);
        let msg = unsafe { CStr::from_ptr(ccbm_last_error()) };
        assert!(!msg.to_bytes().is_empty());
    }

    #[test]
    fn radial_solution_inner_value() {
        let (mut re, mut im) = (0.0, 0.0);
        assert!(ccbm_radial_solution(0.5, 1.0, -3.0, 0.5, &mut re, &mut im) == CcbmStatus::Ok);
        assert!((re - 1.0).abs() < 1e-14 && im.abs() < 1e-14);
    }

    #[test]
    fn full_run_through_the_abi() {
        let name = CString::new("example2d1").unwrap();
        // Tiny run: coarse mesh, few iterations.
        let cfg = CString::new("h = 0.2\nmax_iters = 3\ntol = 1e-12\nplateau_tol = 0\n").unwrap();
        let mut run: *mut CcbmRun = ptr::null_mut();
        let st = ccbm_run_preset(name.as_ptr(), cfg.as_ptr(), &mut run);
        assert!(st == CcbmStatus::Ok, "run failed: {:?}", unsafe {
            CStr::from_ptr(ccbm_last_error())
        });
        assert!(!run.is_null());

        let rows = ccbm_run_rows(run);
        assert_eq!(rows, 4);
        let mut row = [0.0; 8];
        assert!(ccbm_run_row(run, 0, row.as_mut_ptr()) == CcbmStatus::Ok);
        assert_eq!(row[0], 0.0);
        assert!(row[1] > 0.0);
        assert!(ccbm_run_row(run, rows, row.as_mut_ptr()) == CcbmStatus::BadArgument);

        let n = ccbm_run_boundary_len(run);
        assert!(n >= 3);
        let mut xy = vec![0.0; 2 * n];
        assert!(ccbm_run_boundary(run, xy.as_mut_ptr(), xy.len()) == CcbmStatus::Ok);
        // Boundary should still be near the initial circle after 3 steps.
        for pair in xy.chunks(2) {
            let rho = (pair[0] * pair[0] + pair[1] * pair[1]).sqrt();
            assert!(rho > 0.5 && rho < 1.3);
        }

        let mut reason = CcbmStopReason::Converged;
        assert!(ccbm_run_stop_reason(run, &mut reason) == CcbmStatus::Ok);
        assert!(reason == CcbmStopReason::IterBudget);
        ccbm_run_free(run);
    }

    #[test]
    fn bad_arguments_are_reported() {
        let mut run: *mut CcbmRun = ptr::null_mut();
        let name = CString::new("nope").unwrap();
        assert!(ccbm_run_preset(name.as_ptr(), ptr::null(), &mut run) == CcbmStatus::BadArgument);
        assert!(run.is_null());
        assert!(ccbm_run_preset(ptr::null(), ptr::null(), &mut run) == CcbmStatus::BadArgument);
    }
}
