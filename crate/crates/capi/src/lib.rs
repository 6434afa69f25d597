//! C ABI for the sensemix library.
//!
//! The surface is deliberately small: an opaque scenario handle, the
//! detection-curve landmarks, the optimal power plan, and the budgeted
//! design-grid solver. Every function returns a status code; outputs are
//! written through caller-provided pointers. Panics are caught at the
//! boundary and reported as `SMX_STATUS_NUMERIC_FAILURE`.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;

use sensemix::grid::DesignGrid;
use sensemix::linalg::CMatrix;
use sensemix::lp::{solve_lp, LpError};
use sensemix::radar::{
    pd_closed_form, principal_eigen, sensing_optimal_distribution, DetectionCurve, RadarError,
    RadarScenario,
};

/// Status code returned by every fallible entry point.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Infeasible = 3,
    NumericFailure = 4,
    BufferTooSmall = 5,
}

/// One atom of an optimal randomized power plan.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SmxPlanAtom {
    /// Probability of transmitting this atom's covariance in a block.
    pub weight: f64,
    /// Transmit power spent by the atom.
    pub power: f64,
    /// Post-processing SNR the atom achieves.
    pub rho: f64,
    /// Detection probability at that SNR.
    pub pd: f64,
}

/// Opaque detection scenario handle. Create with `smx_scenario_new`, release
/// with `smx_scenario_free`.
pub struct SmxScenario {
    inner: RadarScenario,
}

fn radar_status(e: &RadarError) -> SmxStatus {
    match e {
        RadarError::TangentBracketFailure { .. } => SmxStatus::NumericFailure,
        RadarError::TargetUnobservable => SmxStatus::Infeasible,
        _ => SmxStatus::InvalidArgument,
    }
}

fn lp_status(e: &LpError) -> SmxStatus {
    match e {
        LpError::InfeasibleBudget { .. } => SmxStatus::Infeasible,
        _ => SmxStatus::InvalidArgument,
    }
}

fn guarded(body: impl FnOnce() -> SmxStatus) -> SmxStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => SmxStatus::NumericFailure,
    }
}

/// Human-readable description of a status code. The pointer is static and
/// must not be freed.
#[no_mangle]
pub extern "C" fn smx_status_message(status: SmxStatus) -> *const c_char {
    let text: &'static [u8] = match status {
        SmxStatus::Ok => b"ok\0",
        SmxStatus::NullPointer => b"required pointer was null\0",
        SmxStatus::InvalidArgument => b"invalid argument\0",
        SmxStatus::Infeasible => b"problem is infeasible\0",
        SmxStatus::NumericFailure => b"numeric failure\0",
        SmxStatus::BufferTooSmall => b"output buffer too small\0",
    };
    text.as_ptr() as *const c_char
}

/// Create a detection scenario from a row-major Hermitian gram matrix.
///
/// `gram_re` points at `dim * dim` real parts; `gram_im` may be null for a
/// real matrix, otherwise it points at `dim * dim` imaginary parts.
///
/// # Safety
/// `gram_re` (and `gram_im` when non-null) must be readable for
/// `dim * dim` doubles; `out` must be writable. The returned handle must be
/// released with `smx_scenario_free` exactly once.
#[no_mangle]
pub unsafe extern "C" fn smx_scenario_new(
    gram_re: *const f64,
    gram_im: *const f64,
    dim: usize,
    mean_square_amp: f64,
    snapshots: usize,
    noise_psd: f64,
    pfa: f64,
    power_budget: f64,
    out: *mut *mut SmxScenario,
) -> SmxStatus {
    if gram_re.is_null() || out.is_null() {
        return SmxStatus::NullPointer;
    }
    if dim == 0 || dim > 64 {
        return SmxStatus::InvalidArgument;
    }
    let re = std::slice::from_raw_parts(gram_re, dim * dim);
    let im = if gram_im.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(gram_im, dim * dim))
    };
    guarded(|| {
        let entries: Vec<Complex64> = re
            .iter()
            .enumerate()
            .map(|(k, &r)| Complex64::new(r, im.map_or(0.0, |im| im[k])))
            .collect();
        let scenario = RadarScenario {
            gram: CMatrix::from_rows(dim, dim, &entries),
            mean_square_amp,
            snapshots,
            noise_psd,
            pfa,
            power_budget,
        };
        if let Err(e) = scenario.validate() {
            return radar_status(&e);
        }
        *out = Box::into_raw(Box::new(SmxScenario { inner: scenario }));
        SmxStatus::Ok
    })
}

/// Release a scenario handle. Null is ignored.
///
/// # Safety
/// `scenario` must be null or a handle from `smx_scenario_new` that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn smx_scenario_free(scenario: *mut SmxScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Detection scale of a scenario: snr_scale times the top gram eigenvalue.
///
/// # Safety
/// `scenario` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn smx_scenario_alpha(
    scenario: *const SmxScenario,
    out: *mut f64,
) -> SmxStatus {
    if scenario.is_null() || out.is_null() {
        return SmxStatus::NullPointer;
    }
    let scenario = &*scenario;
    guarded(|| match principal_eigen(&scenario.inner.gram) {
        Ok(eigen) => {
            *out = scenario.inner.snr_scale() * eigen.lambda_max;
            SmxStatus::Ok
        }
        Err(e) => radar_status(&e),
    })
}

/// Detection probability of the threshold detector at SNR `rho` and false
/// alarm rate `pfa`. Returns NaN for out-of-range inputs.
#[no_mangle]
pub extern "C" fn smx_pd_closed_form(rho: f64, pfa: f64) -> f64 {
    if !(rho >= 0.0) || !(pfa > 0.0 && pfa < 1.0) {
        return f64::NAN;
    }
    pd_closed_form(rho, pfa)
}

fn curve_landmark(
    alpha: f64,
    pfa: f64,
    out: *mut f64,
    pick: impl Fn(&DetectionCurve) -> f64,
) -> SmxStatus {
    if out.is_null() {
        return SmxStatus::NullPointer;
    }
    guarded(|| match DetectionCurve::new(alpha, pfa) {
        Ok(curve) => {
            unsafe { *out = pick(&curve) };
            SmxStatus::Ok
        }
        Err(e) => radar_status(&e),
    })
}

/// Power where the detection curve switches from convex to concave; 0 when
/// it is concave everywhere.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn smx_inflection_power(
    alpha: f64,
    pfa: f64,
    out: *mut f64,
) -> SmxStatus {
    curve_landmark(alpha, pfa, out, DetectionCurve::inflection_power)
}

/// Power where the chord from zero touches the detection curve tangentially;
/// 0 when the curve is concave everywhere.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn smx_tangent_power(alpha: f64, pfa: f64, out: *mut f64) -> SmxStatus {
    curve_landmark(alpha, pfa, out, DetectionCurve::tangent_power)
}

/// Optimal randomized power plan for the scenario at `budget`.
///
/// On success `*len` holds the number of atoms written (1 or 2) and
/// `*expected_pd` the plan's expected detection probability. When `cap` is
/// too small, returns `SMX_STATUS_BUFFER_TOO_SMALL` with `*len` set to the
/// required count and nothing written.
///
/// # Safety
/// `scenario` must be a live handle; `atoms` must be writable for `cap`
/// entries; `len` and `expected_pd` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn smx_plan(
    scenario: *const SmxScenario,
    budget: f64,
    atoms: *mut SmxPlanAtom,
    cap: usize,
    len: *mut usize,
    expected_pd: *mut f64,
) -> SmxStatus {
    if scenario.is_null() || atoms.is_null() || len.is_null() || expected_pd.is_null() {
        return SmxStatus::NullPointer;
    }
    let scenario = &*scenario;
    guarded(|| {
        let mut s = scenario.inner.clone();
        s.power_budget = budget;
        let mixture = match sensing_optimal_distribution(&s) {
            Ok(m) => m,
            Err(e) => return radar_status(&e),
        };
        *len = mixture.atoms.len();
        if mixture.atoms.len() > cap {
            return SmxStatus::BufferTooSmall;
        }
        for (k, atom) in mixture.atoms.iter().enumerate() {
            *atoms.add(k) = SmxPlanAtom {
                weight: atom.weight,
                power: atom.power,
                rho: atom.rho,
                pd: atom.pd,
            };
        }
        *expected_pd = mixture.expected_pd;
        SmxStatus::Ok
    })
}

/// Minimize expected performance over a design grid subject to a mean-cost
/// budget. `costs` and `perfs` are parallel arrays of length `n`. At most
/// two designs carry weight: `out_index`/`out_weight` must have room for two
/// entries, `*out_atoms` reports how many are used, and `*out_value` the
/// optimal expected performance.
///
/// # Safety
/// `costs` and `perfs` must be readable for `n` doubles; `out_index` and
/// `out_weight` writable for two entries; `out_value` and `out_atoms` valid.
#[no_mangle]
pub unsafe extern "C" fn smx_solve_budget(
    costs: *const f64,
    perfs: *const f64,
    n: usize,
    budget: f64,
    out_value: *mut f64,
    out_index: *mut usize,
    out_weight: *mut f64,
    out_atoms: *mut usize,
) -> SmxStatus {
    if costs.is_null()
        || perfs.is_null()
        || out_value.is_null()
        || out_index.is_null()
        || out_weight.is_null()
        || out_atoms.is_null()
    {
        return SmxStatus::NullPointer;
    }
    if n == 0 {
        return SmxStatus::InvalidArgument;
    }
    let costs = std::slice::from_raw_parts(costs, n);
    let perfs = std::slice::from_raw_parts(perfs, n);
    guarded(|| {
        let mut grid = DesignGrid::default();
        for (k, (&c, &e)) in costs.iter().zip(perfs).enumerate() {
            grid.push(format!("d{k}"), c, e);
        }
        let solution = match solve_lp(&grid, budget) {
            Ok(s) => s,
            Err(e) => return lp_status(&e),
        };
        *out_value = solution.value;
        *out_atoms = solution.atoms.len();
        for (k, &(idx, w)) in solution.atoms.iter().take(2).enumerate() {
            *out_index.add(k) = idx;
            *out_weight.add(k) = w;
        }
        SmxStatus::Ok
    })
}
