//! Independent checks: numeric minimizers, goodness-of-fit statistics and
//! quadrature-based risk evaluation.

mod golden;
mod ks;
mod quadrature;

pub use golden::{
    golden_section_by, minimize_affine_risk, minimize_shift_risk, minimize_squared_error_affine,
};
pub use ks::{
    gamma_cdf, ks_critical_value, ks_statistic, ks_two_sample, ks_two_sample_critical_value,
};
pub use quadrature::{brute_force_risk, gauss_laguerre, gauss_legendre};
