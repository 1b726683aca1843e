//! Special functions and beta-family distribution primitives.
//!
//! Everything here works in log space where it can. Likelihood sums over
//! hundreds of welds overflow `Γ` long before they overflow `ln Γ`, so the
//! linear-space quantities (`beta_cdf`, `beta_quantile`) only exponentiate at
//! the very end.

use serde::Serialize;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this the Stirling series loses digits, so Lanczos takes over.
const STIRLING_CUTOFF: f64 = 10.0;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Shape pair of a beta distribution. Both shapes are strictly positive and
/// finite; construction enforces it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaParams {
    a: f64,
    b: f64,
}

impl BetaParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
            return Err(Error::domain(format!(
                "beta shapes must be positive and finite, got ({a}, {b})"
            )));
        }
        Ok(Self { a, b })
    }

    /// Builds `Beta(μ/σ, (1−μ)/σ)`, the mean/spread parametrization.
    pub fn from_mean_spread(mean: f64, spread: f64) -> Result<Self> {
        if !(mean > 0.0 && mean < 1.0) {
            return Err(Error::domain(format!("mean must lie in (0, 1), got {mean}")));
        }
        if !(spread.is_finite() && spread > 0.0) {
            return Err(Error::domain(format!("spread must be positive, got {spread}")));
        }
        Self::new(mean / spread, (1.0 - mean) / spread)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `a / (a + b)`.
    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    /// `1 / (a + b)`.
    pub fn spread(&self) -> f64 {
        1.0 / (self.a + self.b)
    }

    pub fn variance(&self) -> f64 {
        let s = self.a + self.b;
        self.a * self.b / (s * s * (s + 1.0))
    }
}

/// `ln Γ(x)` for `x > 0`.
///
/// Stirling with a seven-term correction for `x ≥ 10`, Lanczos (g = 7, n = 9)
/// on `[0.5, 10)`, and the recurrence `ln Γ(x) = ln Γ(x+1) − ln x` below 0.5.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        ln_gamma(x + 1.0) - x.ln()
    } else if x < STIRLING_CUTOFF {
        let z = x - 1.0;
        let t = z + LANCZOS_G + 0.5;
        let series = LANCZOS_COEF
            .iter()
            .enumerate()
            .skip(1)
            .fold(LANCZOS_COEF[0], |acc, (i, c)| acc + c / (z + i as f64));
        LN_SQRT_2PI + (z + 0.5) * t.ln() - t + series.ln()
    } else {
        (x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_correction(x)
    }
}

/// `ln Γ(x) − [(x − ½) ln x − x + ½ ln 2π]` for `x ≥ 10`.
fn stirling_correction(x: f64) -> f64 {
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let poly = C.iter().rev().fold(0.0, |acc, c| acc * inv2 + c);
    poly * inv
}

/// `ln B(a, b)`.
///
/// Large arguments go through Stirling corrections and `ln_1p` so the
/// `ln Γ` cancellation never has to absorb terms of size `a ln a`. The
/// arguments are ordered first, which makes the result exactly symmetric.
pub fn log_beta_fn(a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
        return Err(Error::domain(format!(
            "log_beta_fn needs positive finite arguments, got ({a}, {b})"
        )));
    }
    Ok(log_beta_unchecked(a, b))
}

pub(crate) fn log_beta_unchecked(a: f64, b: f64) -> f64 {
    let (p, q) = if a <= b { (a, b) } else { (b, a) };
    let sum = p + q;
    if p >= STIRLING_CUTOFF {
        let corr = stirling_correction(p) + stirling_correction(q) - stirling_correction(sum);
        -0.5 * q.ln() + LN_SQRT_2PI + corr + (p - 0.5) * (p / sum).ln() + q * (-p / sum).ln_1p()
    } else if q >= STIRLING_CUTOFF {
        let corr = stirling_correction(q) - stirling_correction(sum);
        ln_gamma(p) + corr + p - p * sum.ln() + (q - 0.5) * (-p / sum).ln_1p()
    } else {
        ln_gamma(p) + ln_gamma(q) - ln_gamma(sum)
    }
}

/// `ln C(n, k)`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    if k == 0 || k == n {
        return 0.0;
    }
    let (n, k) = (n as f64, k as f64);
    -(n + 1.0).ln() - log_beta_unchecked(k + 1.0, n - k + 1.0)
}

/// Log density of `Beta(a, b)` at `x`.
pub fn beta_ln_pdf(x: f64, p: &BetaParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("beta pdf argument {x} outside [0, 1]")));
    }
    Ok(ln_pdf_unchecked(x, p.a, p.b))
}

fn ln_pdf_unchecked(x: f64, a: f64, b: f64) -> f64 {
    if x == 0.0 || x == 1.0 {
        let (shape, edge) = if x == 0.0 { (a, 0.0) } else { (b, 1.0) };
        return match shape.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Greater) => f64::NEG_INFINITY,
            _ => {
                let other = if edge == 0.0 { b } else { a };
                other.ln()
            }
        };
    }
    (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - log_beta_unchecked(a, b)
}

/// Regularized incomplete beta `I_x(a, b)`: the cdf of `Beta(a, b)` at `x`.
pub fn beta_cdf(x: f64, p: &BetaParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("beta cdf argument {x} outside [0, 1]")));
    }
    Ok(inc_beta(x, p.a, p.b))
}

fn inc_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    // The continued fraction converges fast only left of the mode-ish point;
    // mirror the problem onto the other tail past it.
    if x > (a + 1.0) / (a + b + 2.0) {
        1.0 - inc_beta_cf_side(1.0 - x, b, a)
    } else {
        inc_beta_cf_side(x, a, b)
    }
}

fn inc_beta_cf_side(x: f64, a: f64, b: f64) -> f64 {
    let ln_front = a * x.ln() + b * (-x).ln_1p() - log_beta_unchecked(a, b);
    ln_front.exp() * beta_continued_fraction(x, a, b) / a
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const MAX_TERMS: usize = 20_000;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_TERMS {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Inverse of [`beta_cdf`] in `q`.
///
/// Bisection on `(0, 1)` until the bracket is narrower than `1e-2`, then
/// Newton steps kept inside the bracket (a step that leaves it is replaced by
/// a bisection). At most 200 iterations.
pub fn beta_quantile(q: f64, p: &BetaParams) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(format!("quantile level {q} outside (0, 1)")));
    }
    const MAX_ITER: usize = 200;
    const NEWTON_WIDTH: f64 = 1e-2;

    let (a, b) = (p.a, p.b);
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    let mut x = 0.5;
    let mut newton = false;
    let mut best = (f64::INFINITY, x);

    for _ in 0..MAX_ITER {
        let f = inc_beta(x, a, b) - q;
        if f.abs() < best.0 {
            best = (f.abs(), x);
        }
        if f == 0.0 {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= f64::EPSILON * hi.max(f64::MIN_POSITIVE) {
            break;
        }
        if !newton && hi - lo < NEWTON_WIDTH {
            newton = true;
        }

        let mid = 0.5 * (lo + hi);
        let next = if newton {
            let pdf = ln_pdf_unchecked(x, a, b).exp();
            let step = if pdf.is_finite() && pdf > 0.0 { f / pdf } else { f64::NAN };
            let candidate = x - step;
            if candidate > lo && candidate < hi {
                if step.abs() <= 4.0 * f64::EPSILON * x.abs() && f.abs() <= 1e-12 {
                    return Ok(candidate);
                }
                candidate
            } else {
                mid
            }
        } else {
            mid
        };
        if next == x {
            break;
        }
        x = next;
    }
    Ok(best.1)
}

/// `ln P(X = x)` for `X ~ BetaBinomial(n, a, b)`.
pub fn betabinom_log_pmf(x: u64, n: u64, p: &BetaParams) -> Result<f64> {
    if x > n {
        return Err(Error::domain(format!(
            "beta-binomial count {x} exceeds trials {n}"
        )));
    }
    Ok(ln_choose(n, x) + betabinom_log_kernel(x, n, p.a, p.b))
}

/// The part of the log pmf that depends on the shapes:
/// `ln B(x + a, n − x + b) − ln B(a, b)`.
pub(crate) fn betabinom_log_kernel(x: u64, n: u64, a: f64, b: f64) -> f64 {
    let (xf, rest) = (x as f64, (n - x) as f64);
    log_beta_unchecked(xf + a, rest + b) - log_beta_unchecked(a, b)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn beta(a: f64, b: f64) -> BetaParams {
        BetaParams::new(a, b).unwrap()
    }

    fn rel_close(got: f64, want: f64, tol: f64) -> bool {
        (got - want).abs() <= tol * want.abs().max(1e-300)
    }

    // Frozen from tests/oracle/oracle_values.py (mpmath, 50 digits).
    #[test]
    fn ln_gamma_matches_high_precision_reference() {
        let cases = [
            (0.001, 6.907_178_885_383_853_7),
            (0.5, 0.572_364_942_924_700_09),
            (1.5, -0.120_782_237_635_245_22),
            (3.7, 1.428_072_326_665_387_9),
            (10.0, 12.801_827_480_081_47),
            (100.5, 361.435_540_467_777_6),
            (10_000.25, 82_102.020_072_160_29),
            (1_000_000.0, 12_815_504.569_147_612),
        ];
        for (x, want) in cases {
            let got = ln_gamma(x);
            assert!(rel_close(got, want, 1e-13), "lnΓ({x}) = {got}, want {want}");
        }
        assert!(ln_gamma(1.0).abs() < 1e-15);
        assert!(ln_gamma(2.0).abs() < 1e-15);
    }

    #[test]
    fn log_beta_fixed_points() {
        assert!(log_beta_fn(1.0, 1.0).unwrap().abs() < 1e-15);
        let lnpi = std::f64::consts::PI.ln();
        assert!((log_beta_fn(0.5, 0.5).unwrap() - lnpi).abs() < 1e-14);
    }

    #[test]
    fn log_beta_matches_high_precision_reference() {
        let cases = [
            (29.172, 200.005, -88.059_628_482_301_16),
            (0.001, 1_000_000.0, 6.893_363_375_325_389_5),
            (1_000_000.0, 1_000_000.0, -1_386_300.003_362_921_1),
            (0.37, 12.5, -0.048_218_804_735_016_483),
        ];
        for (a, b, want) in cases {
            let got = log_beta_fn(a, b).unwrap();
            assert!(rel_close(got, want, 1e-10), "lnB({a},{b}) = {got}, want {want}");
        }
    }

    #[test]
    fn log_beta_rejects_bad_arguments() {
        assert!(log_beta_fn(0.0, 1.0).is_err());
        assert!(log_beta_fn(1.0, -2.0).is_err());
        assert!(log_beta_fn(f64::NAN, 1.0).is_err());
        assert!(log_beta_fn(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn beta_params_validation_and_moments() {
        assert!(BetaParams::new(0.0, 1.0).is_err());
        assert!(BetaParams::new(1.0, f64::NAN).is_err());
        assert_eq!(beta(1.0, 1.0).mean(), 0.5);
        assert!((beta(29.172, 200.005).mean() - 0.127).abs() < 5e-4);
        assert!((beta(15.966, 149.211).mean() - 0.097).abs() < 5e-4);
        assert!(BetaParams::from_mean_spread(1.0, 0.1).is_err());
        assert!(BetaParams::from_mean_spread(0.5, 0.0).is_err());
        let uniform = BetaParams::from_mean_spread(0.5, 0.5).unwrap();
        assert_eq!((uniform.a(), uniform.b()), (1.0, 1.0));
    }

    #[test]
    fn beta_cdf_closed_forms() {
        for a in [0.3, 1.0, 2.5, 40.0, 900.0] {
            let got = beta_cdf(0.5, &beta(a, a)).unwrap();
            assert!((got - 0.5).abs() < 1e-12, "a={a}: {got}");
        }
        assert!((beta_cdf(0.3, &beta(1.0, 1.0)).unwrap() - 0.3).abs() < 1e-15);
        assert!((beta_cdf(0.5, &beta(2.0, 1.0)).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(beta_cdf(0.0, &beta(2.0, 3.0)).unwrap(), 0.0);
        assert_eq!(beta_cdf(1.0, &beta(2.0, 3.0)).unwrap(), 1.0);
        assert!(beta_cdf(-0.1, &beta(2.0, 3.0)).is_err());
        assert!(beta_cdf(1.1, &beta(2.0, 3.0)).is_err());
    }

    #[test]
    fn beta_cdf_matches_high_precision_reference() {
        let cases = [
            (0.1, 29.172, 200.005, 0.101_039_347_573_110_97),
            (0.13, 29.172, 200.005, 0.568_059_818_681_618_2),
            (0.2, 0.5, 0.5, 0.295_167_235_300_866_55),
        ];
        for (x, a, b, want) in cases {
            let got = beta_cdf(x, &beta(a, b)).unwrap();
            assert!((got - want).abs() < 1e-12, "I_{x}({a},{b}) = {got}, want {want}");
        }
    }

    #[test]
    fn beta_quantile_closed_forms() {
        let u = beta(1.0, 1.0);
        assert!((beta_quantile(0.5, &u).unwrap() - 0.5).abs() < 1e-12);
        assert!((beta_quantile(0.975, &u).unwrap() - 0.975).abs() < 1e-12);
        // Beta(2,1) has cdf x², quantile √q.
        let tri = beta(2.0, 1.0);
        for q in [0.01, 0.25, 0.9] {
            assert!((beta_quantile(q, &tri).unwrap() - q.sqrt()).abs() < 1e-12);
        }
        assert!(beta_quantile(0.0, &u).is_err());
        assert!(beta_quantile(1.0, &u).is_err());
    }

    #[test]
    fn beta_quantile_matches_high_precision_reference() {
        let p = beta(29.172, 200.005);
        let cases = [
            (0.025, 0.087_430_470_898_495_91),
            (0.25, 0.111_901_587_289_331_27),
            (0.5, 0.126_205_608_283_485_04),
            (0.75, 0.141_500_441_349_061_82),
            (0.975, 0.173_303_043_561_412_7),
        ];
        for (q, want) in cases {
            let got = beta_quantile(q, &p).unwrap();
            assert!((got - want).abs() < 1e-10, "q={q}: {got}, want {want}");
        }
    }

    #[test]
    fn quantile_reaches_deep_tails() {
        let p = beta(0.1, 100.0);
        let x = beta_quantile(0.01, &p).unwrap();
        assert!(x > 0.0 && x < 1e-15);
        assert!((beta_cdf(x, &p).unwrap() - 0.01).abs() < 1e-10);
    }

    #[test]
    fn betabinom_fixed_points() {
        let p = beta(4.172, 50.005);
        let got = betabinom_log_pmf(1, 1, &p).unwrap();
        assert!((got - p.mean().ln()).abs() < 1e-13);
        let got = betabinom_log_pmf(1, 2, &beta(1.0, 1.0)).unwrap();
        assert!((got - (1.0f64 / 3.0).ln()).abs() < 1e-13);
        assert!(betabinom_log_pmf(3, 2, &p).is_err());
    }

    #[test]
    fn betabinom_matches_high_precision_reference() {
        let cases = [
            (9, 208, 4.0, 50.0, -3.013_655_573_781_423),
            (25, 175, 4.172, 50.005, -4.305_357_373_998_364_7),
            (0, 60, 0.1, 100.0, -0.047_169_478_032_925_954),
        ];
        for (x, n, a, b, want) in cases {
            let got = betabinom_log_pmf(x, n, &beta(a, b)).unwrap();
            assert!(rel_close(got, want, 1e-11), "({x},{n},{a},{b}) = {got}, want {want}");
        }
    }

    #[test]
    fn ln_choose_small_values() {
        assert_eq!(ln_choose(5, 0), 0.0);
        assert_eq!(ln_choose(5, 5), 0.0);
        assert!((ln_choose(5, 2) - 10f64.ln()).abs() < 1e-14);
        assert!((ln_choose(60, 30) - 118_264_581_564_861_424f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn ln_pdf_edges() {
        let p = beta(2.0, 1.0);
        assert!((beta_ln_pdf(0.5, &p).unwrap() - 0.0).abs() < 1e-15);
        assert_eq!(beta_ln_pdf(0.0, &p).unwrap(), f64::NEG_INFINITY);
        assert!((beta_ln_pdf(1.0, &p).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(beta_ln_pdf(0.0, &beta(0.5, 0.5)).unwrap(), f64::INFINITY);
    }
}
