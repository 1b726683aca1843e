//! Plateau learning curve: expected fraction nonconforming as a function of
//! an operator's cumulative weld count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of `μ(n) = A + B·n^(−C)`.
///
/// `C` is stored with the sign it has inside the exponent, so a curve that
/// decays like `√n` growth (`−0.00544·n^0.5`) has `b = −0.00544, c = −0.5`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauParams {
    /// Steady-state level.
    pub a: f64,
    /// Learning amplitude.
    pub b: f64,
    /// Learning-rate exponent.
    pub c: f64,
}

impl PlateauParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::domain(format!(
                "plateau coefficients must be finite, got ({a}, {b}, {c})"
            )));
        }
        Ok(Self { a, b, c })
    }

    /// The published weld-type (STD, 2, A, BW) curve: `0.149 − 0.544e−2 · n^0.5`.
    pub fn published() -> Self {
        Self {
            a: 0.149,
            b: -0.544e-2,
            c: -0.5,
        }
    }
}

/// Keeps a modelled fraction inside `[ε, 1 − ε]` so it can parametrize a beta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClampPolicy {
    epsilon: f64,
}

impl ClampPolicy {
    pub const DEFAULT_EPSILON: f64 = 1e-6;

    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "clamp epsilon must lie in (0, 0.5), got {epsilon}"
            )));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Returns the clipped value and whether clipping changed it.
    pub fn apply(&self, value: f64) -> (f64, bool) {
        let lo = self.epsilon;
        let hi = 1.0 - self.epsilon;
        if value < lo || value.is_nan() {
            (lo, true)
        } else if value > hi {
            (hi, true)
        } else {
            (value, false)
        }
    }
}

impl Default for ClampPolicy {
    fn default() -> Self {
        Self {
            epsilon: Self::DEFAULT_EPSILON,
        }
    }
}

/// Curve value after clamping, with the flag telling whether the raw value
/// fell outside the admissible band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClampedValue {
    pub value: f64,
    pub clamped: bool,
}

/// `A + B·n^(−C)`, unclamped. `n` is a weld count and must be at least 1.
pub fn plateau_eval(params: &PlateauParams, n: f64) -> Result<f64> {
    if !(n.is_finite() && n >= 1.0) {
        return Err(Error::domain(format!(
            "experience must be a count of at least 1, got {n}"
        )));
    }
    Ok(raw(params, n))
}

#[inline]
pub(crate) fn raw(params: &PlateauParams, n: f64) -> f64 {
    params.a + params.b * n.powf(-params.c)
}

pub fn plateau_eval_clamped(
    params: &PlateauParams,
    n: f64,
    policy: &ClampPolicy,
) -> Result<ClampedValue> {
    let (value, clamped) = policy.apply(plateau_eval(params, n)?);
    Ok(ClampedValue { value, clamped })
}
