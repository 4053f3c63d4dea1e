//! Closed-form constants, sampling and residual reports for the identities.

pub mod constants;
pub mod report;
pub mod residuals;
pub mod sampling;
pub mod suites;

pub use constants::*;
pub use report::{ResidualReport, SampleRecord, SuiteReport};
pub use residuals::{
    residual_cor1, residual_cor2, residual_cor3, residual_duality, residual_prop1, Dressing, Residual,
    DEGENERACY_THRESHOLD,
};
pub use sampling::{derive_seed, draw_configuration, random_lambda, random_mass, rng_for, sample_configurations, Sample};
pub use suites::{run_suite, Suite, SuiteOptions, SuiteParams};
