//! Config-driven experiment runner behind the `growthlab` binary.
//!
//! Each command validates an [`ExperimentConfig`], writes into a fresh
//! directory `<verb>-<unixsecs>-<hash8>` and records a [`RunManifest`] that
//! [`replay`] turns back into byte-identical data files.

mod commands;
mod config;
mod output;

pub use commands::{
    correlation_grid, fit_band_constant, lateness_oracle, log_log_fit, replay, run_command, z_score, CommandOutcome, Verb,
    BAND_EXPONENT,
};
pub use config::{
    builtin_tests, default_q, CorrelationConfig, DomainConfig, ExperimentConfig, OutputConfig, Overrides, RunConfig, SmashConfig,
    Tolerances,
};
pub use output::{
    config_hash, field_text, parse_snapshot, snapshot_text, svg_polar_map, svg_sites, Csv, RunDir, RunManifest, SeedStatus,
    MANIFEST_FILE,
};
