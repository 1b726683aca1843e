//! Priors and conjugate posterior updates for an operator's fraction
//! nonconforming.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::regression::{OperatorId, OperatorRecord, RegressionFit};
use crate::stats::{BetaParams, beta_quantile};

pub const DEFAULT_LEVEL: f64 = 0.95;

/// Which prior an operator's posterior starts from.
#[derive(Debug, Clone, Copy)]
pub enum PriorScheme<'a> {
    /// Experience-dependent prior from a fitted learning curve.
    Informative(&'a RegressionFit),
    /// Jeffreys `Beta(½, ½)`.
    Noninformative,
}

impl PriorScheme<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            PriorScheme::Informative(_) => "informative",
            PriorScheme::Noninformative => "noninformative",
        }
    }
}

/// An informative prior together with the curve value it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePrior {
    pub beta: BetaParams,
    pub mu: f64,
    pub clamped: bool,
}

/// `Beta(μ/σ, (1−μ)/σ)` with `μ` the clamped curve at `n_total`.
pub fn informative_prior(fit: &RegressionFit, n_total: u64) -> Result<BetaParams> {
    curve_prior(fit, n_total).map(|p| p.beta)
}

pub fn curve_prior(fit: &RegressionFit, n_total: u64) -> Result<CurvePrior> {
    if !(fit.sigma.is_finite() && fit.sigma > 0.0) {
        return Err(Error::domain(format!("fit sigma must be positive, got {}", fit.sigma)));
    }
    let v = fit.mean_at(n_total as f64)?;
    Ok(CurvePrior {
        beta: BetaParams::from_mean_spread(v.value, fit.sigma)?,
        mu: v.value,
        clamped: v.clamped,
    })
}

pub fn jeffreys_prior() -> BetaParams {
    BetaParams::new(0.5, 0.5).expect("valid shapes")
}

/// `Beta(a + x, b + n − x)`.
pub fn posterior_update(prior: &BetaParams, n: u64, x: u64) -> Result<BetaParams> {
    if x > n {
        return Err(Error::domain(format!("repaired welds {x} exceed total welds {n}")));
    }
    BetaParams::new(prior.a() + x as f64, prior.b() + (n - x) as f64)
}

/// Posterior of one operator under one prior scheme.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorSummary {
    pub operator_id: OperatorId,
    pub n_total: u64,
    pub x_repaired: u64,
    pub scheme: &'static str,
    /// Curve value behind an informative prior; absent for Jeffreys.
    pub mu_fn: Option<f64>,
    /// True when `mu_fn` had to be clamped into the admissible band.
    pub clamped: bool,
    pub prior: BetaParams,
    pub posterior: BetaParams,
    pub posterior_mean: f64,
    pub level: f64,
    /// Equal-tailed credible interval at `level`.
    pub credible_interval: (f64, f64),
    /// `X / n`.
    pub naive_fraction: f64,
}

pub fn summarize(operator: &OperatorRecord, scheme: PriorScheme<'_>, level: f64) -> Result<PosteriorSummary> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!("credible level {level} outside (0, 1)")));
    }
    let (prior, mu_fn, clamped) = match scheme {
        PriorScheme::Informative(fit) => {
            let p = curve_prior(fit, operator.n_total)?;
            (p.beta, Some(p.mu), p.clamped)
        }
        PriorScheme::Noninformative => (jeffreys_prior(), None, false),
    };
    let posterior = posterior_update(&prior, operator.n_total, operator.x_repaired)?;
    let lo = beta_quantile((1.0 - level) / 2.0, &posterior)?;
    let hi = beta_quantile((1.0 + level) / 2.0, &posterior)?;
    Ok(PosteriorSummary {
        operator_id: operator.operator_id.clone(),
        n_total: operator.n_total,
        x_repaired: operator.x_repaired,
        scheme: scheme.name(),
        mu_fn,
        clamped,
        prior,
        posterior,
        posterior_mean: posterior.mean(),
        level,
        credible_interval: (lo, hi),
        naive_fraction: operator.fraction_nonconforming(),
    })
}
