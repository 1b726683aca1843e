//! Beta-binomial regression of repair counts on weld experience.
//!
//! Each operator's repaired-weld count is modelled as
//! `x_i ~ BetaBinomial(n_i, μ_i/σ, (1 − μ_i)/σ)` with `μ_i` the clamped
//! Plateau curve at `n_i` and one dispersion `σ` shared by the whole cohort.
//! The four free parameters `(A, B, C, ln σ)` are fitted by multi-start
//! Nelder-Mead on the negative log-likelihood.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use rand_xoshiro::Xoshiro256PlusPlus;
use rand_xoshiro::rand_core::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::curve::{self, ClampPolicy, ClampedValue, PlateauParams};
use crate::error::{Error, Result};
use crate::optim::NelderMead;
use crate::stats::{betabinom_log_kernel, ln_choose};
use crate::synth::derive_seed;

/// Opaque operator identifier.
///
/// Ordering is numeric when both identifiers are unsigned integers and
/// lexicographic otherwise, so `"2" < "10"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OperatorId(String);

impl OperatorId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into().trim().to_owned())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for OperatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for OperatorId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

impl From<u64> for OperatorId {
    fn from(n: u64) -> Self {
        Self(n.to_string())
    }
}

impl Ord for OperatorId {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.0.parse::<u128>(), other.0.parse::<u128>()) {
            (Ok(a), Ok(b)) => a.cmp(&b).then_with(|| self.0.cmp(&other.0)),
            (Ok(_), Err(_)) => Ordering::Less,
            (Err(_), Ok(_)) => Ordering::Greater,
            (Err(_), Err(_)) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for OperatorId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One operator's inspection tally within a weld type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorRecord {
    pub operator_id: OperatorId,
    pub n_total: u64,
    pub x_repaired: u64,
}

impl OperatorRecord {
    pub fn new(operator_id: impl Into<OperatorId>, n_total: u64, x_repaired: u64) -> Result<Self> {
        if n_total < 1 {
            return Err(Error::domain("operator must have at least one weld"));
        }
        if x_repaired > n_total {
            return Err(Error::domain(format!(
                "repaired welds {x_repaired} exceed total welds {n_total}"
            )));
        }
        Ok(Self {
            operator_id: operator_id.into(),
            n_total,
            x_repaired,
        })
    }

    /// `X / n`.
    pub fn fraction_nonconforming(&self) -> f64 {
        self.x_repaired as f64 / self.n_total as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Iteration cap for each Nelder-Mead run.
    pub max_iterations: usize,
    /// Convergence threshold on the log-likelihood spread across the simplex.
    pub tolerance: f64,
    pub n_restarts: usize,
    pub seed: u64,
    pub clamp: ClampPolicy,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            tolerance: 1e-9,
            n_restarts: 8,
            seed: 0,
            clamp: ClampPolicy::default(),
        }
    }
}

impl FitConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.n_restarts < 1 {
            return Err(Error::InvalidConfig("n_restarts must be at least 1".into()));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of [`fit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub params: PlateauParams,
    /// Shared dispersion `1/(a + b)` of every operator's beta.
    pub sigma: f64,
    pub log_likelihood: f64,
    pub converged: bool,
    /// Nelder-Mead iterations summed over all restarts.
    pub iterations: usize,
    pub n_restarts_used: usize,
    /// Restart that produced the reported optimum.
    pub best_restart: usize,
    /// Share of operators whose fitted mean sits on a clamp bound.
    pub clamp_fraction: f64,
    pub clamp: ClampPolicy,
}

impl RegressionFit {
    /// Wraps a known curve (no fitting) and evaluates it on `records`.
    pub fn from_curve(
        records: &[OperatorRecord],
        params: PlateauParams,
        sigma: f64,
        clamp: ClampPolicy,
    ) -> Result<Self> {
        let nll = neg_log_likelihood(records, &params, sigma, &clamp)?;
        Ok(Self {
            params,
            sigma,
            log_likelihood: -nll,
            converged: true,
            iterations: 0,
            n_restarts_used: 0,
            best_restart: 0,
            clamp_fraction: clamp_fraction(records, &params, &clamp),
            clamp,
        })
    }

    /// Clamped curve value at experience `n`.
    pub fn mean_at(&self, n: f64) -> Result<ClampedValue> {
        curve::plateau_eval_clamped(&self.params, n, &self.clamp)
    }
}

/// Per-record terms that do not depend on the parameters.
struct Prepared {
    n: f64,
    n_total: u64,
    x: u64,
    ln_choose: f64,
}

fn prepare(records: &[OperatorRecord]) -> Vec<Prepared> {
    records
        .iter()
        .map(|r| Prepared {
            n: r.n_total as f64,
            n_total: r.n_total,
            x: r.x_repaired,
            ln_choose: ln_choose(r.n_total, r.x_repaired),
        })
        .collect()
}

fn nll_prepared(data: &[Prepared], params: &PlateauParams, sigma: f64, clamp: &ClampPolicy) -> f64 {
    let mut total = 0.0;
    for d in data {
        let (mu, _) = clamp.apply(curve::raw(params, d.n));
        let a = mu / sigma;
        let b = (1.0 - mu) / sigma;
        total -= d.ln_choose + betabinom_log_kernel(d.x, d.n_total, a, b);
    }
    total
}

/// `−Σ ln BetaBinomial(x_i | n_i, μ_i/σ, (1−μ_i)/σ)` with `μ_i` the clamped curve.
pub fn neg_log_likelihood(
    records: &[OperatorRecord],
    params: &PlateauParams,
    sigma: f64,
    clamp: &ClampPolicy,
) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyCohort);
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
    }
    if let Some(r) = records
        .iter()
        .find(|r| r.n_total < 1 || r.x_repaired > r.n_total)
    {
        return Err(Error::domain(format!("invalid record for operator {}", r.operator_id)));
    }
    Ok(nll_prepared(&prepare(records), params, sigma, clamp))
}

fn clamp_fraction(records: &[OperatorRecord], params: &PlateauParams, clamp: &ClampPolicy) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    let clamped = records
        .iter()
        .filter(|r| clamp.apply(curve::raw(params, r.n_total as f64)).1)
        .count();
    clamped as f64 / records.len() as f64
}

/// Starting `(B₀, C₀)` pairs. The first eight already cover all four sign
/// combinations at both magnitudes.
const START_GRID: [(f64, f64); 16] = [
    (-0.01, -0.5),
    (0.01, 0.5),
    (-0.1, -1.0),
    (0.1, 1.0),
    (-0.01, 0.5),
    (0.01, -0.5),
    (-0.1, 1.0),
    (0.1, -1.0),
    (-0.1, -0.5),
    (0.1, 0.5),
    (-0.01, -1.0),
    (0.01, 1.0),
    (-0.1, 0.5),
    (0.1, -0.5),
    (-0.01, 1.0),
    (0.01, -1.0),
];

const SIGMA_START: f64 = 0.02;
const MAX_POLISH_ROUNDS: usize = 20;
/// Simplex spread used while polishing, relative to the configured tolerance.
const POLISH_TOLERANCE_FACTOR: f64 = 1e-4;

/// Initial `θ = (A, B, C, ln σ)` for restart `index`. Restart 0 is the
/// unperturbed design point; later restarts jitter `A₀` and `ln σ₀` with a
/// stream derived from `(seed, index)`.
pub fn initial_point(records: &[OperatorRecord], config: &FitConfig, index: usize) -> [f64; 4] {
    let total: u64 = records.iter().map(|r| r.n_total).sum();
    let repaired: u64 = records.iter().map(|r| r.x_repaired).sum();
    let pooled = config.clamp.apply(repaired as f64 / total.max(1) as f64).0;
    let (b0, c0) = START_GRID[index % START_GRID.len()];
    let mut a0 = pooled;
    let mut ln_sigma0 = SIGMA_START.ln();
    if index > 0 {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(derive_seed(config.seed, index as u64));
        a0 *= 1.0 + 0.25 * symmetric_unit(&mut rng);
        ln_sigma0 += 0.5 * symmetric_unit(&mut rng);
    }
    [a0, b0, c0, ln_sigma0]
}

fn symmetric_unit(rng: &mut Xoshiro256PlusPlus) -> f64 {
    2.0 * crate::synth::unit_f64(rng) - 1.0
}

fn initial_steps(theta: &[f64; 4]) -> [f64; 4] {
    [
        0.5 * theta[0].abs().max(0.02),
        0.5 * theta[1].abs().max(1e-3),
        0.25,
        0.5,
    ]
}

fn unpack(theta: &[f64]) -> (PlateauParams, f64) {
    (
        PlateauParams {
            a: theta[0],
            b: theta[1],
            c: theta[2],
        },
        theta[3].exp(),
    )
}

#[derive(Debug, Clone)]
struct RestartResult {
    theta: Vec<f64>,
    nll: f64,
    iterations: usize,
    converged: bool,
}

fn run_restart(data: &[Prepared], start: [f64; 4], config: &FitConfig) -> RestartResult {
    let objective = |theta: &[f64]| {
        let (params, sigma) = unpack(theta);
        if !(sigma.is_finite() && sigma > 0.0) {
            return f64::INFINITY;
        }
        nll_prepared(data, &params, sigma, &config.clamp)
    };
    let nm = NelderMead {
        max_iterations: config.max_iterations,
        tolerance: config.tolerance,
    };

    let polish = NelderMead {
        max_iterations: config.max_iterations,
        tolerance: config.tolerance * POLISH_TOLERANCE_FACTOR,
    };

    let mut m = nm.minimize(objective, &start, &initial_steps(&start));
    let mut iterations = m.iterations;
    // A collapsed simplex can report convergence away from the optimum;
    // rebuild it around the best point until that stops paying off.
    for _ in 0..MAX_POLISH_ROUNDS {
        if !m.converged {
            break;
        }
        let x0: [f64; 4] = m.x.clone().try_into().expect("four parameters");
        let steps = initial_steps(&x0).map(|s| 0.1 * s);
        let next = polish.minimize(objective, &x0, &steps);
        iterations += next.iterations;
        let improved = m.value - next.value;
        let done = improved.is_nan() || improved <= config.tolerance;
        if next.value <= m.value {
            m = next;
        } else {
            m.converged = next.converged;
        }
        if done {
            break;
        }
    }
    RestartResult {
        theta: m.x,
        nll: m.value,
        iterations,
        converged: m.converged,
    }
}

/// Maximum-likelihood fit of the Plateau curve and dispersion.
///
/// Records are put into a canonical order first, so the result does not depend
/// on input order. Restarts run on scoped threads and are merged by lowest
/// negative log-likelihood, then lowest restart index. When every restart hits
/// the iteration cap the best point is still returned, with `converged` false.
pub fn fit(records: &[OperatorRecord], config: &FitConfig) -> Result<RegressionFit> {
    config.validate()?;
    let distinct_n = records.iter().map(|r| r.n_total).collect::<BTreeSet<_>>().len();
    if records.len() < 4 || distinct_n < 2 {
        return Err(Error::InsufficientData {
            records: records.len(),
            distinct_n,
        });
    }
    let mut sorted = records.to_vec();
    sorted.sort_by(|p, q| {
        (p.n_total, p.x_repaired)
            .cmp(&(q.n_total, q.x_repaired))
            .then_with(|| p.operator_id.cmp(&q.operator_id))
    });
    for r in &sorted {
        if r.n_total < 1 || r.x_repaired > r.n_total {
            return Err(Error::domain(format!("invalid record for operator {}", r.operator_id)));
        }
    }
    let data = prepare(&sorted);

    let starts: Vec<[f64; 4]> = (0..config.n_restarts)
        .map(|k| initial_point(&sorted, config, k))
        .collect();
    let results: Vec<RestartResult> = std::thread::scope(|scope| {
        let handles: Vec<_> = starts
            .iter()
            .map(|&start| {
                let data = &data;
                scope.spawn(move || run_restart(data, start, config))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("restart thread panicked"))
            .collect()
    });

    let (best_restart, best) = results
        .iter()
        .enumerate()
        .min_by(|(i, p), (j, q)| p.nll.total_cmp(&q.nll).then(i.cmp(j)))
        .expect("at least one restart");
    let (params, sigma) = unpack(&best.theta);
    Ok(RegressionFit {
        params,
        sigma,
        log_likelihood: -best.nll,
        converged: best.converged,
        iterations: results.iter().map(|r| r.iterations).sum(),
        n_restarts_used: results.len(),
        best_restart,
        clamp_fraction: clamp_fraction(&sorted, &params, &config.clamp),
        clamp: config.clamp,
    })
}

/// A point on a fitted curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub n: f64,
    pub mu: f64,
    pub clamped: bool,
}

/// Clamped curve values on `n_grid`, sorted by `n`.
pub fn fitted_curve_table(fit: &RegressionFit, n_grid: &[u64]) -> Result<Vec<CurvePoint>> {
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    grid.into_iter()
        .map(|n| {
            let v = fit.mean_at(n as f64)?;
            Ok(CurvePoint {
                n: n as f64,
                mu: v.value,
                clamped: v.clamped,
            })
        })
        .collect()
}
