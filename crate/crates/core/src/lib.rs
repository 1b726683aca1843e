//! Operator quality measurement from inspection tallies.
//!
//! The pipeline fits a Plateau learning curve `μ(n) = A + B·n^(−C)` to a cohort
//! of operators by beta-binomial maximum likelihood, turns the fitted curve
//! into an experience-dependent beta prior per operator, and updates that
//! prior with the operator's own inspection results. A Jeffreys
//! `Beta(½, ½)` baseline is computed alongside for comparison.

pub mod bayes;
pub mod cohort;
pub mod curve;
pub mod error;
pub mod io;
pub mod optim;
pub mod regression;
pub mod stats;
pub mod synth;

pub use bayes::{PosteriorSummary, PriorScheme};
pub use cohort::{BoxplotStats, ComparisonRow, RankShift};
pub use curve::{ClampPolicy, PlateauParams};
pub use error::{Error, Result};
pub use regression::{FitConfig, OperatorId, OperatorRecord, RegressionFit};
pub use stats::BetaParams;
