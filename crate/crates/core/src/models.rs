//! Seeded samplers for the simulation models and closed-form copula oracles.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Exp, Exp1, Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::copula_grid::weight;
use crate::error::{Error, Result};
use crate::ranks::Sample;
use crate::rng::{self, StreamRng};

/// A simulation model with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "lowercase")]
pub enum ModelSpec {
    /// Independent uniforms; used for size checks.
    Null,
    Sr1,
    Sr2,
    Sr3,
    Sr4,
    Sr5,
    Hr1,
    Hr2,
    Re1,
    Re2,
    Re3,
    Re4,
    Bm1 { rho: f64 },
    Bm2,
    Bm3,
    Bm4,
    Bm5 { theta: f64 },
    Bm6 { theta: f64 },
    Bm7 { theta: f64 },
    Bm8,
    Bm9 { nu: f64 },
    Bm10 { nu: f64, alpha: [f64; 2], rho: f64 },
    Bm11 { rho: f64, alpha: f64 },
}

impl ModelSpec {
    pub const BM1: Self = Self::Bm1 { rho: 0.3 };
    pub const BM5: Self = Self::Bm5 { theta: -0.55 };
    pub const BM6: Self = Self::Bm6 { theta: 0.5 };
    pub const BM7: Self = Self::Bm7 { theta: 0.5 };
    pub const BM9: Self = Self::Bm9 { nu: 2.0 };
    pub const BM10: Self = Self::Bm10 { nu: 5.0, alpha: [0.3, 0.7], rho: -0.7 };
    pub const BM11: Self = Self::Bm11 { rho: 0.1, alpha: 1.5 };

    /// The 22 study models with default parameters, in table order.
    pub const STUDY: [Self; 22] = [
        Self::Sr1,
        Self::Sr2,
        Self::Sr3,
        Self::Sr4,
        Self::Sr5,
        Self::Hr1,
        Self::Hr2,
        Self::Re1,
        Self::Re2,
        Self::Re3,
        Self::Re4,
        Self::BM1,
        Self::Bm2,
        Self::Bm3,
        Self::Bm4,
        Self::BM5,
        Self::BM6,
        Self::BM7,
        Self::Bm8,
        Self::BM9,
        Self::BM10,
        Self::BM11,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Self::Null => "null",
            Self::Sr1 => "sr1",
            Self::Sr2 => "sr2",
            Self::Sr3 => "sr3",
            Self::Sr4 => "sr4",
            Self::Sr5 => "sr5",
            Self::Hr1 => "hr1",
            Self::Hr2 => "hr2",
            Self::Re1 => "re1",
            Self::Re2 => "re2",
            Self::Re3 => "re3",
            Self::Re4 => "re4",
            Self::Bm1 { .. } => "bm1",
            Self::Bm2 => "bm2",
            Self::Bm3 => "bm3",
            Self::Bm4 => "bm4",
            Self::Bm5 { .. } => "bm5",
            Self::Bm6 { .. } => "bm6",
            Self::Bm7 { .. } => "bm7",
            Self::Bm8 => "bm8",
            Self::Bm9 { .. } => "bm9",
            Self::Bm10 { .. } => "bm10",
            Self::Bm11 { .. } => "bm11",
        }
    }

    /// Stable numeric code used when deriving random streams.
    pub fn code(&self) -> u64 {
        match self {
            Self::Null => 0,
            other => {
                let pos = Self::STUDY.iter().position(|m| m.id() == other.id());
                pos.expect("every non-null model is in STUDY") as u64 + 1
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            Self::Bm1 { rho } if rho.is_nan() || rho.abs() >= 1.0 => bad(format!("bm1: |rho| must be < 1, got {rho}")),
            Self::Bm5 { theta } if theta.is_nan() || theta.abs() > 1.0 => {
                bad(format!("bm5: Mardia theta must lie in [-1, 1], got {theta}"))
            }
            Self::Bm6 { theta } if !(0.0..=1.0).contains(&theta) => {
                bad(format!("bm6: theta must lie in [0, 1], got {theta}"))
            }
            Self::Bm7 { theta } if !(theta > 0.0 && theta.is_finite()) => {
                bad(format!("bm7: Clayton theta must be > 0, got {theta}"))
            }
            Self::Bm9 { nu } if !(nu > 0.0 && nu.is_finite()) => bad(format!("bm9: nu must be > 0, got {nu}")),
            Self::Bm10 { nu, alpha, rho } => {
                if !(nu > 0.0 && nu.is_finite()) {
                    bad(format!("bm10: nu must be > 0, got {nu}"))
                } else if rho.is_nan() || rho.abs() >= 1.0 {
                    bad(format!("bm10: |rho| must be < 1, got {rho}"))
                } else if !alpha.iter().all(|a| a.is_finite()) {
                    bad("bm10: skewness must be finite".into())
                } else {
                    Ok(())
                }
            }
            Self::Bm11 { rho, alpha } => {
                if rho.is_nan() || rho.abs() >= 1.0 {
                    bad(format!("bm11: |rho| must be < 1, got {rho}"))
                } else if !(alpha > 0.0 && alpha < 2.0) {
                    bad(format!("bm11: alpha must lie in (0, 2), got {alpha}"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let id = s.trim().to_ascii_lowercase();
        if id == "null" {
            return Ok(Self::Null);
        }
        Self::STUDY
            .iter()
            .find(|m| m.id() == id)
            .copied()
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

fn normal(rng: &mut StreamRng) -> f64 {
    rng.sample(StandardNormal)
}

fn uniform(rng: &mut StreamRng) -> f64 {
    rng.sample(Open01)
}

/// Correlated standard normal pair.
fn normal_pair(rng: &mut StreamRng, rho: f64) -> (f64, f64) {
    let z1 = normal(rng);
    let z2 = normal(rng);
    (z1, rho * z1 + (1.0 - rho * rho).sqrt() * z2)
}

/// Bivariate t with identity scale; `nu = 1` is the bivariate Cauchy.
fn student_pair(rng: &mut StreamRng, nu: f64) -> (f64, f64) {
    let (z1, z2) = (normal(rng), normal(rng));
    let chi: f64 = ChiSquared::new(nu).expect("nu validated").sample(rng);
    let scale = (chi / nu).sqrt();
    (z1 / scale, z2 / scale)
}

/// Draws `Y` given `X = x` for Gumbel's bivariate exponential by inverting
/// `1 - (1 + theta y) exp(-y (1 + theta x))` with bisection.
fn gumbel_exponential_conditional(x: f64, theta: f64, p: f64) -> f64 {
    let cdf = |y: f64| 1.0 - (1.0 + theta * y) * (-y * (1.0 + theta * x)).exp();
    let mut hi = 1.0;
    while cdf(hi) < p {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Positive stable variable with Laplace transform `exp(-s^a)`, `0 < a < 1`
/// (Chambers-Mallows-Stuck, totally skewed case).
fn positive_stable(rng: &mut StreamRng, a: f64) -> f64 {
    let theta = PI * uniform(rng);
    let w: f64 = rng.sample(Exp1);
    let left = (a * theta).sin() / theta.sin().powf(1.0 / a);
    let right = (((1.0 - a) * theta).sin() / w).powf((1.0 - a) / a);
    left * right
}

/// Mixture weights `(comonotone, independent, countermonotone)` of the
/// Mardia copula.
pub fn mardia_mixture_weights(theta: f64) -> Result<(f64, f64, f64)> {
    if theta.is_nan() || theta.abs() > 1.0 {
        return Err(Error::InvalidParameter(format!("Mardia theta must lie in [-1, 1], got {theta}")));
    }
    let t2 = theta * theta;
    Ok((t2 * (1.0 + theta) / 2.0, 1.0 - t2, t2 * (1.0 - theta) / 2.0))
}

/// One draw from `spec`.
fn draw(spec: &ModelSpec, rng: &mut StreamRng) -> (f64, f64) {
    match *spec {
        ModelSpec::Null => (uniform(rng), uniform(rng)),
        ModelSpec::Sr1 => {
            let x = uniform(rng);
            (x, 2.0 + x + normal(rng))
        }
        ModelSpec::Sr2 => {
            let x = uniform(rng);
            (x, x.powf(0.25) + 0.5 * normal(rng))
        }
        ModelSpec::Sr3 => {
            let x = uniform(rng);
            let step = if x <= 0.5 { 1.0 } else { 0.0 };
            (x, step + 2f64.sqrt() * normal(rng))
        }
        ModelSpec::Sr4 => {
            let x = normal(rng);
            (x, (1.0 + x.abs()).ln() + normal(rng))
        }
        ModelSpec::Sr5 => {
            let x = uniform(rng);
            let inner = (2.0 * x - 1.0).powi(2) - 0.5;
            (x, 4.0 * inner * inner + 0.5f64.sqrt() * normal(rng))
        }
        ModelSpec::Hr1 => {
            let x: f64 = Exp::new(0.1).expect("positive rate").sample(rng);
            (x, (1.0 + 1.0 / (x * x)).sqrt() * normal(rng))
        }
        ModelSpec::Hr2 => {
            let x = 1.0 + 15.0 * uniform(rng);
            (x, x.sqrt() * normal(rng))
        }
        ModelSpec::Re1 => {
            let x = uniform(rng);
            (x, 2.0 + x + 2.0 * normal(rng) * x + normal(rng))
        }
        ModelSpec::Re2 => {
            let x = uniform(rng);
            (x, normal(rng) * (2.0 + x + x * x) + normal(rng))
        }
        ModelSpec::Re3 => {
            let x = uniform(rng);
            (x, normal(rng) / x + normal(rng))
        }
        ModelSpec::Re4 => {
            let (x0, y0) = student_pair(rng, 1.0);
            (x0, normal(rng) * y0 + normal(rng))
        }
        ModelSpec::Bm1 { rho } => normal_pair(rng, rho),
        ModelSpec::Bm2 => {
            if uniform(rng) < 0.1 {
                (normal(rng), normal(rng))
            } else {
                // variances 6, covariance 5
                let (z1, z2) = normal_pair(rng, 5.0 / 6.0);
                (6f64.sqrt() * z1, 6f64.sqrt() * z2)
            }
        }
        ModelSpec::Bm3 => {
            if uniform(rng) < 0.3 {
                student_pair(rng, 1.0)
            } else {
                (normal(rng), normal(rng))
            }
        }
        ModelSpec::Bm4 => {
            let x = normal(rng);
            let mu = if x.abs() <= 1.96 { 0.0 } else { -x };
            (x, mu + normal(rng))
        }
        ModelSpec::Bm5 { theta } => {
            let (w_m, w_pi, _) = mardia_mixture_weights(theta).expect("theta validated");
            let pick = uniform(rng);
            let v = uniform(rng);
            if pick < w_m {
                (v, v)
            } else if pick < w_m + w_pi {
                (v, uniform(rng))
            } else {
                (v, 1.0 - v)
            }
        }
        ModelSpec::Bm6 { theta } => {
            let x: f64 = rng.sample(Exp1);
            let p = uniform(rng);
            (x, gumbel_exponential_conditional(x, theta, p))
        }
        ModelSpec::Bm7 { theta } => {
            let u = uniform(rng);
            let w = uniform(rng);
            let v = ((w.powf(-theta / (1.0 + theta)) - 1.0) * u.powf(-theta) + 1.0).powf(-1.0 / theta);
            (u, v)
        }
        ModelSpec::Bm8 => student_pair(rng, 1.0),
        ModelSpec::Bm9 { nu } => student_pair(rng, nu),
        ModelSpec::Bm10 { nu, alpha, rho } => {
            // skew-normal via delta |X0| + N(0, Omega - delta delta^T), then
            // divided by sqrt(chi2_nu / nu)
            let omega_alpha = [alpha[0] + rho * alpha[1], rho * alpha[0] + alpha[1]];
            let quad = alpha[0] * omega_alpha[0] + alpha[1] * omega_alpha[1];
            let norm = (1.0 + quad).sqrt();
            let delta = [omega_alpha[0] / norm, omega_alpha[1] / norm];
            let c11 = 1.0 - delta[0] * delta[0];
            let c12 = rho - delta[0] * delta[1];
            let c22 = 1.0 - delta[1] * delta[1];
            let l11 = c11.sqrt();
            let l21 = c12 / l11;
            let l22 = (c22 - l21 * l21).sqrt();
            let x0 = normal(rng).abs();
            let (e1, e2) = (normal(rng), normal(rng));
            let z1 = delta[0] * x0 + l11 * e1;
            let z2 = delta[1] * x0 + l21 * e1 + l22 * e2;
            let chi: f64 = ChiSquared::new(nu).expect("nu validated").sample(rng);
            let scale = (chi / nu).sqrt();
            (z1 / scale, z2 / scale)
        }
        ModelSpec::Bm11 { rho, alpha } => {
            let a = positive_stable(rng, alpha / 2.0).sqrt();
            let (g1, g2) = normal_pair(rng, rho);
            (a * g1, a * g2)
        }
    }
}

/// Draws `n` pairs from `spec` using `rng`.
pub fn sample_with_rng(spec: &ModelSpec, n: usize, rng: &mut StreamRng) -> Result<Sample> {
    spec.validate()?;
    let (x, y) = (0..n).map(|_| draw(spec, rng)).unzip();
    Sample::new(x, y)
}

/// Draws `n` pairs from `spec`, deterministically in `seed`.
pub fn sample(spec: &ModelSpec, n: usize, seed: u64) -> Result<Sample> {
    let mut rng = rng::stream(seed, &[rng::tag::MODEL_SAMPLE, spec.code()]);
    sample_with_rng(spec, n, &mut rng)
}

/// Copula families with a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AnalyticCopula {
    Independence,
    Clayton(f64),
    Mardia(f64),
    Fgm(f64),
    GumbelExponential(f64),
}

impl AnalyticCopula {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Independence => true,
            Self::Clayton(t) => t > 0.0 && t.is_finite(),
            Self::Mardia(t) | Self::Fgm(t) => t.abs() <= 1.0,
            Self::GumbelExponential(t) => (0.0..=1.0).contains(&t),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid copula parameter: {self:?}")))
        }
    }

    /// `C(u, v)` on `[0, 1]^2`.
    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        match *self {
            Self::Independence => u * v,
            Self::Clayton(t) => (u.powf(-t) + v.powf(-t) - 1.0).powf(-1.0 / t),
            Self::Mardia(t) => {
                let (w_m, w_pi, w_w) = mardia_mixture_weights(t).expect("validated");
                w_m * u.min(v) + w_pi * u * v + w_w * (u + v - 1.0).max(0.0)
            }
            Self::Fgm(t) => u * v * (1.0 + t * (1.0 - u) * (1.0 - v)),
            Self::GumbelExponential(t) => {
                if u >= 1.0 || v >= 1.0 {
                    return u.min(v);
                }
                // margins are Exp(1), so x = -ln(1-u)
                let x = -(-u).ln_1p();
                let y = -(-v).ln_1p();
                u + v - 1.0 + (-x - y - t * x * y).exp()
            }
        }
    }
}

/// `(C(u,v) - uv) w(u,v)` for an analytic copula.
pub fn analytic_q(copula: &AnalyticCopula, u: f64, v: f64) -> Result<f64> {
    copula.validate()?;
    if !(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0) {
        return Err(Error::DomainError(format!("({u}, {v}) is not in the open unit square")));
    }
    Ok((copula.cdf(u, v) - u * v) * weight(u, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula_grid::frechet_bounds;

    fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(k, &x)| {
                let f = cdf(x);
                (f - k as f64 / n).abs().max(((k + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    fn std_normal_cdf(x: f64) -> f64 {
        0.5 * erfc(-x / std::f64::consts::SQRT_2)
    }

    // Numerical Recipes erfc, relative error below 1.2e-7
    fn erfc(x: f64) -> f64 {
        let z = x.abs();
        let t = 1.0 / (1.0 + 0.5 * z);
        let r = t * (-z * z - 1.26551223
            + t * (1.00002368
                + t * (0.37409196
                    + t * (0.09678418
                        + t * (-0.18628806
                            + t * (0.27886807
                                + t * (-1.13520398
                                    + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277)))))))))
            .exp();
        if x >= 0.0 {
            r
        } else {
            2.0 - r
        }
    }

    #[test]
    fn ids_round_trip() {
        assert_eq!(ModelSpec::STUDY.len(), 22);
        for (k, m) in ModelSpec::STUDY.iter().enumerate() {
            assert_eq!(m.id().parse::<ModelSpec>().unwrap(), *m);
            assert_eq!(m.code(), k as u64 + 1);
        }
        assert_eq!("NULL".parse::<ModelSpec>().unwrap().code(), 0);
        assert!(matches!("bm12".parse::<ModelSpec>(), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn sampling_is_deterministic() {
        for m in ModelSpec::STUDY {
            let a = sample(&m, 50, 7).unwrap();
            assert_eq!(a, sample(&m, 50, 7).unwrap(), "{m}");
            assert_ne!(a, sample(&m, 50, 8).unwrap(), "{m}");
        }
    }

    #[test]
    fn sr1_and_sr3_structure() {
        let s = sample(&ModelSpec::Sr1, 500, 1).unwrap();
        assert!(s.x().iter().all(|&x| (0.0..=1.0).contains(&x)));
        // SR1 noise is standard normal, so residuals stay moderate
        let resid: Vec<f64> = s.x().iter().zip(s.y()).map(|(x, y)| y - 2.0 - x).collect();
        let mean = resid.iter().sum::<f64>() / 500.0;
        assert!(mean.abs() < 0.2);

        // reconstruct SR3 noise from the same stream
        let mut rng = rng::stream(3, &[rng::tag::MODEL_SAMPLE, ModelSpec::Sr3.code()]);
        let s = sample_with_rng(&ModelSpec::Sr3, 200, &mut rng.clone()).unwrap();
        for (&x, &y) in s.x().iter().zip(s.y()) {
            let u = uniform(&mut rng);
            let e = 2f64.sqrt() * normal(&mut rng);
            assert_eq!(x, u);
            let step = y - e;
            assert!((step - if x <= 0.5 { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
    }

    #[test]
    fn margins_match_their_laws() {
        let s = sample(&ModelSpec::Sr1, 100_000, 11).unwrap();
        assert!(ks_distance(s.x().to_vec(), |x| x.clamp(0.0, 1.0)) < 0.01);
        let s = sample(&ModelSpec::BM1, 100_000, 12).unwrap();
        assert!(ks_distance(s.x().to_vec(), std_normal_cdf) < 0.01);
        assert!(ks_distance(s.y().to_vec(), std_normal_cdf) < 0.01);
        let s = sample(&ModelSpec::BM6, 20_000, 13).unwrap();
        assert!(ks_distance(s.y().to_vec(), |y| 1.0 - (-y).exp()) < 0.015);
        let s = sample(&ModelSpec::BM7, 20_000, 14).unwrap();
        assert!(ks_distance(s.y().to_vec(), |v| v.clamp(0.0, 1.0)) < 0.015);
    }

    #[test]
    fn clayton_concordance() {
        // Kendall tau of Clayton is theta / (theta + 2) = 0.2
        let s = sample(&ModelSpec::BM7, 2000, 5).unwrap();
        let (x, y) = (s.x(), s.y());
        let mut conc = 0i64;
        for a in 0..x.len() {
            for b in a + 1..x.len() {
                conc += ((x[a] - x[b]) * (y[a] - y[b])).signum() as i64;
            }
        }
        let tau = conc as f64 / (x.len() * (x.len() - 1) / 2) as f64;
        assert!((tau - 0.2).abs() < 0.04, "tau = {tau}");
    }

    #[test]
    fn mardia_weights() {
        assert_eq!(mardia_mixture_weights(0.0).unwrap(), (0.0, 1.0, 0.0));
        assert_eq!(mardia_mixture_weights(1.0).unwrap(), (1.0, 0.0, 0.0));
        let (a, b, c) = mardia_mixture_weights(-0.55).unwrap();
        assert!((a - 0.0680625).abs() < 1e-15);
        assert!((b - 0.6975).abs() < 1e-15);
        assert!((c - 0.2344375).abs() < 1e-15);
        for k in -20..=20 {
            let (a, b, c) = mardia_mixture_weights(k as f64 / 20.0).unwrap();
            assert!(a >= 0.0 && b >= 0.0 && c >= 0.0);
            assert!((a + b + c - 1.0).abs() <= f64::EPSILON);
        }
        assert!(mardia_mixture_weights(1.5).is_err());
    }

    #[test]
    fn clayton_center_value() {
        let q = analytic_q(&AnalyticCopula::Clayton(0.5), 0.5, 0.5).unwrap();
        let c = (2.0 * 2f64.sqrt() - 1.0).powi(-2);
        assert!((q - 4.0 * (c - 0.25)).abs() < 1e-12);
        assert!((c - 0.2991195).abs() < 1e-6);
        assert!((q - 0.1964779).abs() < 1e-6);
    }

    #[test]
    fn copulas_are_copulas() {
        let families = [
            AnalyticCopula::Independence,
            AnalyticCopula::Clayton(0.5),
            AnalyticCopula::Clayton(4.0),
            AnalyticCopula::Mardia(-0.55),
            AnalyticCopula::Fgm(0.8),
            AnalyticCopula::GumbelExponential(0.5),
        ];
        for fam in families {
            for k in 0..=40 {
                let u = k as f64 / 40.0;
                assert!(fam.cdf(u, 0.0).abs() < 1e-12 && fam.cdf(0.0, u).abs() < 1e-12);
                assert!((fam.cdf(u, 1.0) - u).abs() < 1e-12, "{fam:?} {u}");
                assert!((fam.cdf(1.0, u) - u).abs() < 1e-12, "{fam:?} {u}");
            }
            for i in 1..60 {
                for j in 1..60 {
                    let (u, v) = (i as f64 / 60.0, j as f64 / 60.0);
                    let q = analytic_q(&fam, u, v).unwrap();
                    let (lo, hi) = frechet_bounds(u, v).unwrap();
                    assert!(q >= lo - 1e-12 && q <= hi + 1e-12, "{fam:?} ({u},{v})");
                }
            }
            for u in [0.001, 0.999] {
                let q = analytic_q(&fam, u, u).unwrap();
                let (lo, hi) = frechet_bounds(u, u).unwrap();
                assert!(q >= lo - 1e-12 && q <= hi + 1e-12);
            }
            assert!(matches!(analytic_q(&fam, 0.0, 0.5), Err(Error::DomainError(_))));
        }
        for i in 1..20 {
            assert_eq!(analytic_q(&AnalyticCopula::Independence, i as f64 / 20.0, 0.3).unwrap(), 0.0);
        }
    }

    #[test]
    fn parameters_are_validated() {
        assert!(sample(&ModelSpec::Bm7 { theta: -1.0 }, 10, 1).is_err());
        assert!(sample(&ModelSpec::Bm5 { theta: 2.0 }, 10, 1).is_err());
        assert!(sample(&ModelSpec::Bm6 { theta: 1.5 }, 10, 1).is_err());
        assert!(sample(&ModelSpec::Bm11 { rho: 0.1, alpha: 2.5 }, 10, 1).is_err());
        assert!(AnalyticCopula::Clayton(0.0).validate().is_err());
    }

    #[test]
    fn gumbel_conditional_inverts() {
        for &(x, p) in &[(0.1, 0.3), (2.0, 0.99), (0.0, 0.5)] {
            let y = gumbel_exponential_conditional(x, 0.5, p);
            let cdf = 1.0 - (1.0 + 0.5 * y) * (-y * (1.0 + 0.5 * x)).exp();
            assert!((cdf - p).abs() < 1e-10);
        }
    }
}
