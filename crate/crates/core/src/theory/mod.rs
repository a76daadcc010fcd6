//! Limit variances, covariances and the point-correlation function.

mod correlation;
mod disk;
mod monte_carlo;
mod surrogate;
mod variance;

pub use correlation::{g_disk_arclength, g_disk_closed, g_general, g_series, g_smoothed, CorrelationQuery, CorrelationValue, SINGULAR_RADIUS};
pub use disk::{activation_window, pair_integral, DiskHarmonic, DiskSolver, DISK_MODES, DISK_SAMPLES};
pub use monte_carlo::{lateness_covariance_mc, poisson_extend, McEstimate};
pub use surrogate::GridSurrogate;
pub use variance::{
    covariance_fixed_time, covariance_lateness, covariance_lateness_general, variance_fixed_time, variance_lateness,
    LatenessForm, TheoryOptions, TheoryValue, VarianceSpec,
};
