//! Synthetic cohorts and brute-force oracles.
//!
//! All randomness comes from xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`). Independent streams use
//! [`derive_seed`]`(seed, stream)`. Gamma variates use Marsaglia-Tsang with
//! Box-Muller normals, betas are a ratio of two gammas, and binomials are
//! drawn by cdf inversion (Bernoulli summation above 1000 trials). Fixing all
//! of this here keeps the frozen test values reproducible.

use rand_xoshiro::Xoshiro256PlusPlus;
use rand_xoshiro::rand_core::{Rng, SeedableRng};
use serde::Serialize;

use crate::curve::{ClampPolicy, PlateauParams};
use crate::error::{Error, Result};
use crate::regression::{OperatorRecord, neg_log_likelihood};
use crate::stats::BetaParams;

/// SplitMix64 output function.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for stream `stream` of `seed`: `mix64(seed ^ mix64(stream))`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    mix64(seed ^ mix64(stream))
}

pub fn rng_for(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Uniform on `[0, 1)` with 53 random bits.
pub fn unit_f64<R: Rng>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on `(0, 1]`.
fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    1.0 - unit_f64(rng)
}

pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1 = open_unit(rng);
    let u2 = unit_f64(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// `Gamma(shape, 1)` by Marsaglia-Tsang; shapes below 1 use the
/// `Gamma(shape + 1)·U^(1/shape)` boost.
pub fn gamma<R: Rng>(rng: &mut R, shape: f64) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        let g = gamma(rng, shape + 1.0);
        return g * open_unit(rng).powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = standard_normal(rng);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = open_unit(rng);
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

pub fn beta_draw<R: Rng>(rng: &mut R, p: &BetaParams) -> f64 {
    let x = gamma(rng, p.a());
    let y = gamma(rng, p.b());
    let s = x + y;
    if s > 0.0 {
        x / s
    } else if p.a() < p.b() {
        0.0
    } else {
        1.0
    }
}

const INVERSION_MAX_TRIALS: u64 = 1000;

pub fn binomial<R: Rng>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    if n > INVERSION_MAX_TRIALS {
        return (0..n).filter(|_| unit_f64(rng) < p).count() as u64;
    }
    if p > 0.5 {
        return n - binomial(rng, n, 1.0 - p);
    }
    let odds = p / (1.0 - p);
    let mut pmf = (1.0 - p).powi(n as i32);
    let mut u = unit_f64(rng);
    let mut k = 0;
    while u >= pmf && k < n {
        u -= pmf;
        pmf *= (n - k) as f64 / (k + 1) as f64 * odds;
        k += 1;
    }
    k
}

/// Ground truth and shape of a synthetic cohort.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SynthConfig {
    pub truth: PlateauParams,
    pub sigma: f64,
    pub n_operators: usize,
    pub n_range: (u64, u64),
    pub seed: u64,
    pub clamp: ClampPolicy,
}

impl SynthConfig {
    pub fn new(
        truth: PlateauParams,
        sigma: f64,
        n_operators: usize,
        n_range: (u64, u64),
        seed: u64,
    ) -> Result<Self> {
        let cfg = Self {
            truth,
            sigma,
            n_operators,
            n_range,
            seed,
            clamp: ClampPolicy::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_operators < 1 {
            return Err(Error::InvalidConfig("n_operators must be at least 1".into()));
        }
        let (lo, hi) = self.n_range;
        if lo < 1 || hi < lo {
            return Err(Error::InvalidConfig(format!(
                "weld-count range must satisfy 1 <= min <= max, got ({lo}, {hi})"
            )));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Draws a cohort: `n_i ~ U{min..max}`, `p_i ~ Beta(μ_i/σ, (1−μ_i)/σ)`,
/// `x_i ~ Binomial(n_i, p_i)`. Operators are numbered from 1.
pub fn generate_cohort(config: &SynthConfig) -> Result<Vec<OperatorRecord>> {
    config.validate()?;
    let mut rng = rng_for(config.seed);
    let (lo, hi) = config.n_range;
    let span = (hi - lo + 1) as f64;
    (0..config.n_operators)
        .map(|i| {
            let n = lo + ((unit_f64(&mut rng) * span) as u64).min(hi - lo);
            let (mu, _) = config
                .clamp
                .apply(crate::curve::raw(&config.truth, n as f64));
            let prior = BetaParams::from_mean_spread(mu, config.sigma)?;
            let p = beta_draw(&mut rng, &prior);
            let x = binomial(&mut rng, n, p);
            OperatorRecord::new(i as u64 + 1, n, x)
        })
        .collect()
}

/// Cartesian grid for [`grid_likelihood_oracle`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub sigma: Vec<f64>,
    pub clamp: ClampPolicy,
    pub max_cells: u64,
}

impl GridSpec {
    pub const DEFAULT_MAX_CELLS: u64 = 1_000_000;

    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>, sigma: Vec<f64>) -> Self {
        Self {
            a,
            b,
            c,
            sigma,
            clamp: ClampPolicy::default(),
            max_cells: Self::DEFAULT_MAX_CELLS,
        }
    }

    /// Adds the given point to every axis so that it becomes a grid node.
    pub fn with_point(mut self, params: &PlateauParams, sigma: f64) -> Self {
        fn insert(axis: &mut Vec<f64>, v: f64) {
            axis.push(v);
            axis.sort_by(f64::total_cmp);
            axis.dedup();
        }
        insert(&mut self.a, params.a);
        insert(&mut self.b, params.b);
        insert(&mut self.c, params.c);
        insert(&mut self.sigma, sigma);
        self
    }

    pub fn cells(&self) -> u128 {
        [&self.a, &self.b, &self.c, &self.sigma]
            .iter()
            .map(|axis| axis.len() as u128)
            .product()
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub params: PlateauParams,
    pub sigma: f64,
    pub neg_log_likelihood: f64,
}

/// Exhaustive minimum of the negative log-likelihood over a grid. Ties keep
/// the first node in `a`-major order.
pub fn grid_likelihood_oracle(records: &[OperatorRecord], grid: &GridSpec) -> Result<GridPoint> {
    let cells = grid.cells();
    if cells > u128::from(grid.max_cells) {
        return Err(Error::GridTooLarge {
            cells,
            budget: grid.max_cells,
        });
    }
    if cells == 0 {
        return Err(Error::Degenerate("grid has an empty axis".into()));
    }
    let mut best: Option<GridPoint> = None;
    for &a in &grid.a {
        for &b in &grid.b {
            for &c in &grid.c {
                let params = PlateauParams::new(a, b, c)?;
                for &sigma in &grid.sigma {
                    let nll = neg_log_likelihood(records, &params, sigma, &grid.clamp)?;
                    if best.is_none_or(|g| nll < g.neg_log_likelihood) {
                        best = Some(GridPoint {
                            params,
                            sigma,
                            neg_log_likelihood: nll,
                        });
                    }
                }
            }
        }
    }
    Ok(best.expect("nonempty grid"))
}

pub const MC_MIN_DRAWS: usize = 100_000;
const MC_STREAMS: u64 = 8;

/// Empirical quantiles of `n_draws` beta variates (order statistic
/// `⌈q·n⌉`). The standard error at level `q` is roughly
/// `√(q(1−q)/n) / pdf(x_q)`.
///
/// Draws are split across eight streams `derive_seed(seed, 0..8)`, so the
/// result depends only on `(p, n_draws, seed)`.
pub fn mc_beta_quantiles(p: &BetaParams, qs: &[f64], n_draws: usize, seed: u64) -> Result<Vec<f64>> {
    if n_draws < MC_MIN_DRAWS {
        return Err(Error::InvalidConfig(format!(
            "need at least {MC_MIN_DRAWS} draws, got {n_draws}"
        )));
    }
    if let Some(q) = qs.iter().find(|q| !(**q > 0.0 && **q < 1.0)) {
        return Err(Error::domain(format!("quantile level {q} outside (0, 1)")));
    }
    let streams = MC_STREAMS as usize;
    let mut draws: Vec<f64> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..streams)
            .map(|s| {
                let count = n_draws / streams + usize::from(s < n_draws % streams);
                scope.spawn(move || {
                    let mut rng = rng_for(derive_seed(seed, s as u64));
                    (0..count).map(|_| beta_draw(&mut rng, p)).collect::<Vec<f64>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("sampler thread panicked"))
            .collect()
    });
    draws.sort_unstable_by(f64::total_cmp);
    Ok(qs
        .iter()
        .map(|q| {
            let rank = (q * n_draws as f64).ceil() as usize;
            draws[rank.clamp(1, n_draws) - 1]
        })
        .collect())
}
