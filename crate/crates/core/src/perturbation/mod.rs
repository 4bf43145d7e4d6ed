//! Sensitivities, allowable perturbations, and optimality certification
//! relative to a fixed reference optimum.

mod bounds;
mod certify;
mod critical;
mod sensitivity;

pub use bounds::{
    allowable_bound, allowable_bound_with_cap, halfspace_intervals, verify_allowable,
    AllowableBound, Interval, IntervalTable, Perturbation, DEFAULT_SATURATION_CAP,
};
pub use certify::{certify_optimal, ErrorBounds};
pub use critical::{
    critical_search, default_stop_tol, is_critical, CriticalIterate, CriticalOptions,
    CriticalSearchReport, DEFAULT_MAX_ITERS, DEFAULT_RELATIVE_STOP_TOL, MIN_STOP_TOL,
};
pub use sensitivity::{
    elementwise_sensitivities, elementwise_sensitivities_with, SensitivityMatrix,
    SensitivityOptions,
};
