//! Fluctuation fields, seeded ensembles and their diagnostics.

mod ensemble;
mod fields;
mod fluctuation;
mod martingale;
mod normality;
mod test_functions;

pub use ensemble::{run_ensemble, run_ensemble_with, EnsembleConfig, EnsembleResult, Reference, SeedSample, TestStatistics};
pub use fields::{error_field, inner_product, inner_product_with, lateness_field, FieldKind, MassField, ScalarField};
pub use fluctuation::{fluctuation_report, sandpile_fluctuation, tentacle_ratio, FluctuationReport};
pub use martingale::{martingale_diagnostics, MartingaleTrace};
pub use normality::{
    bootstrap_se_covariance, bootstrap_se_paired, bootstrap_se_variance, covariance, kolmogorov_q, ks_normal, normal_cdf,
    normality_report, NormalityReport, Summary, MIN_NORMALITY_SAMPLES,
};
pub use test_functions::{NamedTest, Scaled, Smoothness, Support, TestFunction};
