//! C ABI for the sparse-resilience library.
//!
//! Handles are opaque pointers created and destroyed by this library; every
//! function returns an [`SrStatus`] (or null on constructors) instead of
//! panicking across the boundary. Matrix arguments are row-major `double`
//! arrays; trajectory arrays follow the CSV convention of one time step per
//! row. The generated header lives at `include/sparse_resilience.h`.

use nalgebra::DMatrix;

use sparse_resilience::datadriven::{dispatch_rho_max, ResilienceReport};
use sparse_resilience::numlin::NumericalConfig;
use sparse_resilience::oracle::sparse_obs_index_eig;
use sparse_resilience::sysmodel::{
    build_data_matrices, pendulum_system, LtiSystem, ScenarioTag,
};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Dimensions or tolerance values are invalid.
    InvalidArgument = 2,
    /// The eigensolver failed to converge on the given data.
    EigenSolverFailed = 3,
    /// Any other internal failure.
    Internal = 4,
}

/// Numerical tolerances; obtain defaults from [`sr_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SrConfig {
    pub rank_rtol: f64,
    pub zero_atol: f64,
    pub zero_rtol: f64,
    pub eig_cluster_tol: f64,
}

impl SrConfig {
    fn to_numerical(self) -> NumericalConfig {
        NumericalConfig {
            rank_rtol: self.rank_rtol,
            zero_atol: self.zero_atol,
            zero_rtol: self.zero_rtol,
            eig_cluster_tol: self.eig_cluster_tol,
        }
    }
}

/// Opaque system handle (`(A, C)` pair).
pub struct SrSystem(LtiSystem);

/// Opaque report handle; query it with the `sr_report_*` accessors.
pub struct SrReport(ResilienceReport);

/// Default tolerances.
#[no_mangle]
pub extern "C" fn sr_config_default() -> SrConfig {
    let cfg = NumericalConfig::default();
    SrConfig {
        rank_rtol: cfg.rank_rtol,
        zero_atol: cfg.zero_atol,
        zero_rtol: cfg.zero_rtol,
        eig_cluster_tol: cfg.eig_cluster_tol,
    }
}

unsafe fn config_or_default(cfg: *const SrConfig) -> Option<NumericalConfig> {
    let numerical = if cfg.is_null() {
        NumericalConfig::default()
    } else {
        (*cfg).to_numerical()
    };
    numerical.validate().ok().map(|_| numerical)
}

/// Create a system from row-major `A` (`n x n`) and `C` (`q x n`).
/// Returns null when a pointer is null or a dimension is zero.
///
/// # Safety
/// `a` must point to at least `n * n` readable doubles and `c` to at least
/// `q * n`; both must remain valid for the duration of the call.
#[no_mangle]
pub unsafe extern "C" fn sr_system_new(
    n: usize,
    q: usize,
    a: *const f64,
    c: *const f64,
) -> *mut SrSystem {
    if a.is_null() || c.is_null() || n == 0 || q == 0 {
        return std::ptr::null_mut();
    }
    let a_slice = std::slice::from_raw_parts(a, n * n);
    let c_slice = std::slice::from_raw_parts(c, q * n);
    let a_mat = DMatrix::from_row_slice(n, n, a_slice);
    let c_mat = DMatrix::from_row_slice(q, n, c_slice);
    match LtiSystem::new(a_mat, c_mat) {
        Ok(sys) => Box::into_raw(Box::new(SrSystem(sys))),
        Err(_) => std::ptr::null_mut(),
    }
}

/// The built-in discretized pendulum benchmark system (n = 2, q = 3).
#[no_mangle]
pub extern "C" fn sr_system_pendulum() -> *mut SrSystem {
    Box::into_raw(Box::new(SrSystem(pendulum_system())))
}

/// Release a system handle. Null is accepted and ignored.
///
/// # Safety
/// `sys` must be null or a pointer obtained from `sr_system_new` /
/// `sr_system_pendulum` that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn sr_system_free(sys: *mut SrSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Model-based sparse observability index of the system, written to
/// `out_index` (`-1` when the system is unobservable with all sensors).
///
/// # Safety
/// `sys` and `out_index` must be valid; `cfg` may be null for defaults.
#[no_mangle]
pub unsafe extern "C" fn sr_delta_max(
    sys: *const SrSystem,
    cfg: *const SrConfig,
    out_index: *mut i64,
) -> SrStatus {
    if sys.is_null() || out_index.is_null() {
        return SrStatus::NullArgument;
    }
    let Some(numerical) = config_or_default(cfg) else {
        return SrStatus::InvalidArgument;
    };
    match sparse_obs_index_eig(&(*sys).0, &numerical) {
        Ok(result) => {
            *out_index = result.index;
            SrStatus::Ok
        }
        Err(_) => SrStatus::EigenSolverFailed,
    }
}

#[allow(clippy::too_many_arguments)]
unsafe fn rho_max_from_raw(
    n: usize,
    q: usize,
    t: usize,
    x: *const f64,
    y: *const f64,
    scenario: ScenarioTag,
    assumed_l: Option<usize>,
    cfg: *const SrConfig,
    out_report: *mut *mut SrReport,
) -> SrStatus {
    if x.is_null() || y.is_null() || out_report.is_null() {
        return SrStatus::NullArgument;
    }
    if n == 0 || q == 0 || t == 0 {
        return SrStatus::InvalidArgument;
    }
    let Some(numerical) = config_or_default(cfg) else {
        return SrStatus::InvalidArgument;
    };
    // Row-major with one time step per row, as in the CSV files.
    let x_slice = std::slice::from_raw_parts(x, (t + 1) * n);
    let y_slice = std::slice::from_raw_parts(y, t * q);
    let states = DMatrix::from_fn(n, t + 1, |i, k| x_slice[k * n + i]);
    let outputs = DMatrix::from_fn(q, t, |i, k| y_slice[k * q + i]);
    let data = match build_data_matrices(&states, &outputs, scenario) {
        Ok(d) => d,
        Err(_) => return SrStatus::InvalidArgument,
    };
    match dispatch_rho_max(&data, assumed_l, &numerical) {
        Ok(report) => {
            *out_report = Box::into_raw(Box::new(SrReport(report)));
            SrStatus::Ok
        }
        Err(sparse_resilience::datadriven::DataDrivenError::Numerics(_)) => {
            SrStatus::EigenSolverFailed
        }
        Err(_) => SrStatus::Internal,
    }
}

/// Data-driven index from attack-free data. `x` is `(t+1) x n` row-major
/// (one state per row), `y` is `t x q` row-major. On success `*out_report`
/// owns a report handle; free it with `sr_report_free`.
///
/// # Safety
/// `x` must point to `(t+1)*n` readable doubles, `y` to `t*q`; `out_report`
/// must be a valid destination pointer; `cfg` may be null for defaults.
#[no_mangle]
pub unsafe extern "C" fn sr_rho_max_attack_free(
    n: usize,
    q: usize,
    t: usize,
    x: *const f64,
    y: *const f64,
    cfg: *const SrConfig,
    out_report: *mut *mut SrReport,
) -> SrStatus {
    rho_max_from_raw(n, q, t, x, y, ScenarioTag::AttackFree, None, cfg, out_report)
}

/// Data-driven index from poisoned data. `assumed_l` is the attack budget
/// the caller assumes; pass a negative value to leave it unspecified.
///
/// # Safety
/// Same as [`sr_rho_max_attack_free`].
#[no_mangle]
pub unsafe extern "C" fn sr_rho_max_poisoned(
    n: usize,
    q: usize,
    t: usize,
    x: *const f64,
    y: *const f64,
    assumed_l: i64,
    cfg: *const SrConfig,
    out_report: *mut *mut SrReport,
) -> SrStatus {
    let l = if assumed_l < 0 {
        None
    } else {
        Some(assumed_l as usize)
    };
    rho_max_from_raw(n, q, t, x, y, ScenarioTag::Poisoned, l, cfg, out_report)
}

/// The computed index (`-1` when the data are not informative for any rho).
///
/// # Safety
/// `report` must be a live handle from an `sr_rho_max_*` call.
#[no_mangle]
pub unsafe extern "C" fn sr_report_rho_max(report: *const SrReport) -> i64 {
    if report.is_null() {
        return -1;
    }
    (*report).0.rho_max
}

/// Whether the multiplicity-one polynomial path produced the result.
///
/// # Safety
/// `report` must be a live handle from an `sr_rho_max_*` call.
#[no_mangle]
pub unsafe extern "C" fn sr_report_fast_path_used(report: *const SrReport) -> bool {
    !report.is_null() && (*report).0.fast_path_used
}

/// Whether `X^-` lacked full row rank (data not informative for any rho).
///
/// # Safety
/// `report` must be a live handle from an `sr_rho_max_*` call.
#[no_mangle]
pub unsafe extern "C" fn sr_report_rank_deficient(report: *const SrReport) -> bool {
    !report.is_null() && (*report).0.rank_deficient_xminus
}

/// Admissibility of the assumed attack budget: 1 if `l <= rho_max`, 0 if
/// not, -1 when no budget was supplied.
///
/// # Safety
/// `report` must be a live handle from an `sr_rho_max_*` call.
#[no_mangle]
pub unsafe extern "C" fn sr_report_l_admissible(report: *const SrReport) -> i32 {
    if report.is_null() {
        return -1;
    }
    match (*report).0.l_admissible {
        Some(true) => 1,
        Some(false) => 0,
        None => -1,
    }
}

/// Release a report handle. Null is accepted and ignored.
///
/// # Safety
/// `report` must be null or a pointer obtained from an `sr_rho_max_*` call
/// that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn sr_report_free(report: *mut SrReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use sparse_resilience::sysmodel::{inject_attack, simulate, AttackSpec, AttackStrategy};

    /// Flatten a column-per-step matrix into the row-major time-steps layout
    /// the FFI expects.
    fn to_time_rows(m: &DMatrix<f64>) -> Vec<f64> {
        let mut out = Vec::with_capacity(m.nrows() * m.ncols());
        for k in 0..m.ncols() {
            for i in 0..m.nrows() {
                out.push(m[(i, k)]);
            }
        }
        out
    }

    #[test]
    fn pendulum_golden_values_through_the_c_abi() {
        let sys = sr_system_pendulum();
        let mut delta = 0_i64;
        let status = unsafe { sr_delta_max(sys, std::ptr::null(), &mut delta) };
        assert_eq!(status, SrStatus::Ok);
        assert_eq!(delta, 2);

        let traj = simulate(
            &pendulum_system(),
            &DVector::from_vec(vec![0.1, 0.0]),
            100,
        )
        .unwrap();
        let x = to_time_rows(traj.states());
        let y = to_time_rows(traj.nominal_outputs());
        let mut report: *mut SrReport = std::ptr::null_mut();
        let status = unsafe {
            sr_rho_max_attack_free(
                2,
                3,
                100,
                x.as_ptr(),
                y.as_ptr(),
                std::ptr::null(),
                &mut report,
            )
        };
        assert_eq!(status, SrStatus::Ok);
        unsafe {
            assert_eq!(sr_report_rho_max(report), 2);
            assert!(sr_report_fast_path_used(report));
            assert!(!sr_report_rank_deficient(report));
            assert_eq!(sr_report_l_admissible(report), -1);
            sr_report_free(report);
        }

        let spec = AttackSpec::new(vec![1], 1, AttackStrategy::Zeroing).unwrap();
        let (poisoned, _) = inject_attack(&traj, &pendulum_system(), &spec).unwrap();
        let y_pois = to_time_rows(&poisoned);
        let mut report: *mut SrReport = std::ptr::null_mut();
        let status = unsafe {
            sr_rho_max_poisoned(
                2,
                3,
                100,
                x.as_ptr(),
                y_pois.as_ptr(),
                1,
                std::ptr::null(),
                &mut report,
            )
        };
        assert_eq!(status, SrStatus::Ok);
        unsafe {
            assert_eq!(sr_report_rho_max(report), 0);
            assert_eq!(sr_report_l_admissible(report), 0);
            sr_report_free(report);
        }

        unsafe { sr_system_free(sys) };
    }

    #[test]
    fn null_arguments_are_rejected() {
        let mut delta = 0_i64;
        let status = unsafe { sr_delta_max(std::ptr::null(), std::ptr::null(), &mut delta) };
        assert_eq!(status, SrStatus::NullArgument);

        let status = unsafe {
            sr_rho_max_attack_free(
                2,
                3,
                10,
                std::ptr::null(),
                std::ptr::null(),
                std::ptr::null(),
                std::ptr::null_mut(),
            )
        };
        assert_eq!(status, SrStatus::NullArgument);

        let sys = unsafe { sr_system_new(0, 0, std::ptr::null(), std::ptr::null()) };
        assert!(sys.is_null());
        unsafe {
            sr_system_free(std::ptr::null_mut());
            sr_report_free(std::ptr::null_mut());
        }
    }

    #[test]
    fn invalid_tolerances_are_rejected() {
        let sys = sr_system_pendulum();
        let mut bad = sr_config_default();
        bad.rank_rtol = -1.0;
        let mut delta = 0_i64;
        let status = unsafe { sr_delta_max(sys, &bad, &mut delta) };
        assert_eq!(status, SrStatus::InvalidArgument);
        unsafe { sr_system_free(sys) };
    }

    #[test]
    fn custom_system_round_trips() {
        // Eigenvectors e1, e2; C e1 = (1,0,1), C e2 = (0,1,1): two nonzeros
        // each, so the index is 1.
        let a = [0.5, 0.0, 0.0, 0.25];
        let c = [1.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let sys = unsafe { sr_system_new(2, 3, a.as_ptr(), c.as_ptr()) };
        assert!(!sys.is_null());
        let mut delta = -7_i64;
        let status = unsafe { sr_delta_max(sys, std::ptr::null(), &mut delta) };
        assert_eq!(status, SrStatus::Ok);
        assert_eq!(delta, 1);
        unsafe { sr_system_free(sys) };
    }

    #[test]
    fn rank_deficient_data_flag_crosses_the_boundary() {
        // diag(2,3) from an eigenvector: rank-1 state data.
        let a = [2.0, 0.0, 0.0, 3.0];
        let c = [1.0, 0.0, 0.0, 1.0];
        let sys = unsafe { sr_system_new(2, 2, a.as_ptr(), c.as_ptr()) };
        assert!(!sys.is_null());
        let sys_rust = LtiSystem::new(
            DMatrix::from_row_slice(2, 2, &a),
            DMatrix::from_row_slice(2, 2, &c),
        )
        .unwrap();
        let traj = simulate(&sys_rust, &DVector::from_vec(vec![1.0, 0.0]), 8).unwrap();
        let x = to_time_rows(traj.states());
        let y = to_time_rows(traj.nominal_outputs());
        let mut report: *mut SrReport = std::ptr::null_mut();
        let status = unsafe {
            sr_rho_max_attack_free(
                2,
                2,
                8,
                x.as_ptr(),
                y.as_ptr(),
                std::ptr::null(),
                &mut report,
            )
        };
        assert_eq!(status, SrStatus::Ok);
        unsafe {
            assert!(sr_report_rank_deficient(report));
            assert_eq!(sr_report_rho_max(report), -1);
            sr_report_free(report);
            sr_system_free(sys);
        }
    }
}
