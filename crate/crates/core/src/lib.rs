//! Order-restricted estimation of exponential location parameters under Linex loss.
//!
//! The crate covers the point estimators for ordered scales and for ordered
//! locations with known, equal or unequal unknown scales, data generation
//! under complete, Type-II, progressively censored and record-value schemes,
//! closed-form and Monte Carlo risks, and numerical oracles for checking them.

#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimators;
pub mod model;
pub mod oracle;
pub mod risk;
pub mod sampling;

pub use error::{Error, Result};
pub use model::{
    validate, BleeVariant, BoundExponent, EstimatorId, LossSpec, Population, PriResult,
    RiskEstimate, Scenario, ScenarioKind, SchemeConfig, SufficientStats, ValidationReport,
};
pub use risk::{mc_risk, mc_risks, GridPoint};
