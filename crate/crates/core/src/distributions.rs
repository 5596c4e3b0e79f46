//! Distribution families for the summands `Y_i`, and grid checks of the
//! log-concavity hypotheses that drive each ordering result.
//!
//! All densities are evaluated in log space. The concavity checks sample a
//! function on a grid spanning the `[1e-6, 1 - 1e-6]` quantile range and look
//! for chords lying above the curve.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Gamma as GammaSampler, Open01, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::erf::{erf_inv, erfc};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};
use crate::parse::Tagged;
use crate::rng::SeededStream;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Relative tolerance for the grid concavity checks.
pub const TOL_CONCAVITY: f64 = 1e-9;
/// Default number of grid points for the concavity checks.
pub const DEFAULT_GRID_SIZE: usize = 2048;
/// Quantile level at which the condition grids are truncated on each side.
pub const GRID_TAIL: f64 = 1e-6;

/// A univariate law that the condition checks can evaluate.
///
/// Implemented by [`DistributionSpec`]; tests implement it for ad hoc laws
/// such as mixtures.
pub trait Law {
    /// `ln f(y)`, `-inf` outside the support.
    fn ln_pdf(&self, y: f64) -> f64;

    fn cdf(&self, y: f64) -> f64;

    /// `true` if the support is `(0, ∞)` or a subinterval of it.
    fn positive_support(&self) -> bool;

    fn pdf(&self, y: f64) -> f64 {
        self.ln_pdf(y).exp()
    }

    /// Inverse CDF by bisection; families with closed forms override this.
    fn quantile(&self, u: f64) -> f64 {
        bisect_quantile(|y| self.cdf(y), u, self.positive_support())
    }
}

pub(crate) fn bisect_quantile<F: Fn(f64) -> f64>(cdf: F, u: f64, positive: bool) -> f64 {
    let (mut lo, mut hi) = if positive { (0.0, 1.0) } else { (-1.0, 1.0) };
    while cdf(hi) < u && hi < 1e300 {
        lo = if positive { hi } else { lo };
        hi *= 2.0;
    }
    if !positive {
        while cdf(lo) > u && lo > -1e300 {
            hi = hi.min(lo);
            lo *= 2.0;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Uniform on `(0, s)`.
    Uniform {
        s: f64,
    },
    /// Shape `alpha`, rate `beta`: density `∝ y^(α-1) e^(-βy)`.
    Gamma {
        alpha: f64,
        beta: f64,
    },
    LogNormal {
        mu: f64,
        sigma: f64,
    },
    /// Density `p y^(p-1) e^(-y^p)`.
    Weibull {
        p: f64,
    },
    /// Density `∝ y^(ν-1) e^(-y²/2)`.
    GenRayleigh {
        nu: f64,
    },
    /// Centered normal; only meaningful for the symmetric (identity-weight) result.
    Normal0 {
        sigma: f64,
    },
    /// Centered Laplace with the given scale.
    Laplace0 {
        scale: f64,
    },
}

/// A validated distribution for the summands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionSpec {
    family: Family,
    /// Cached log normalizing constant where one is needed.
    ln_norm: f64,
}

fn positive(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be a positive finite number, got {value}"
        )))
    }
}

impl DistributionSpec {
    pub fn new(family: Family) -> Result<Self> {
        let ln_norm = match family {
            Family::Uniform { s } => positive("s", s)?.ln(),
            Family::Gamma { alpha, beta } => {
                positive("alpha", alpha)?;
                positive("beta", beta)?;
                ln_gamma(alpha) - alpha * beta.ln()
            }
            Family::LogNormal { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "mu must be finite, got {mu}"
                    )));
                }
                positive("sigma", sigma)?.ln() + LN_SQRT_2PI
            }
            Family::Weibull { p } => -positive("p", p)?.ln(),
            Family::GenRayleigh { nu } => {
                positive("nu", nu)?;
                (0.5 * nu - 1.0) * LN_2 + ln_gamma(0.5 * nu)
            }
            Family::Normal0 { sigma } => positive("sigma", sigma)?.ln() + LN_SQRT_2PI,
            Family::Laplace0 { scale } => (2.0 * positive("scale", scale)?).ln(),
        };
        Ok(DistributionSpec { family, ln_norm })
    }

    pub fn uniform(s: f64) -> Result<Self> {
        Self::new(Family::Uniform { s })
    }
    pub fn gamma(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Family::Gamma { alpha, beta })
    }
    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(Family::LogNormal { mu, sigma })
    }
    pub fn weibull(p: f64) -> Result<Self> {
        Self::new(Family::Weibull { p })
    }
    pub fn gen_rayleigh(nu: f64) -> Result<Self> {
        Self::new(Family::GenRayleigh { nu })
    }
    pub fn normal0(sigma: f64) -> Result<Self> {
        Self::new(Family::Normal0 { sigma })
    }
    pub fn laplace0(scale: f64) -> Result<Self> {
        Self::new(Family::Laplace0 { scale })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Symmetric about zero (the families usable with identity weights).
    pub fn is_symmetric(&self) -> bool {
        matches!(
            self.family,
            Family::Normal0 { .. } | Family::Laplace0 { .. }
        )
    }

    pub fn density(&self, y: f64) -> f64 {
        self.pdf(y)
    }

    /// Deterministic draws from `stream`.
    pub fn sample(&self, stream: SeededStream, n: usize) -> Vec<f64> {
        let sampler = self.sampler();
        let mut rng = stream.rng();
        (0..n).map(|_| sampler.draw(&mut rng)).collect()
    }

    /// Prepared sampler; construct once per Monte Carlo block.
    pub fn sampler(&self) -> Sampler {
        match self.family {
            Family::Gamma { alpha, beta } => Sampler::Gamma(
                GammaSampler::new(alpha, 1.0 / beta).expect("validated gamma parameters"),
            ),
            Family::GenRayleigh { nu } => Sampler::GenRayleigh(
                GammaSampler::new(0.5 * nu, 1.0).expect("validated rayleigh parameter"),
            ),
            _ => Sampler::Direct(*self),
        }
    }
}

/// Per-family variate generator.
#[derive(Debug, Clone)]
pub enum Sampler {
    Direct(DistributionSpec),
    Gamma(GammaSampler<f64>),
    /// `sqrt(2G)` with `G ~ Gamma(ν/2, 1)`.
    GenRayleigh(GammaSampler<f64>),
}

impl Sampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Gamma(g) => g.sample(rng),
            Sampler::GenRayleigh(g) => (2.0 * g.sample(rng)).sqrt(),
            Sampler::Direct(d) => match d.family {
                Family::Uniform { s } => {
                    let u: f64 = rng.sample(Open01);
                    s * u
                }
                Family::Weibull { p } => {
                    let u: f64 = rng.sample(Open01);
                    (-u.ln()).powf(1.0 / p)
                }
                Family::Laplace0 { .. } => {
                    let u: f64 = rng.sample(Open01);
                    d.quantile(u)
                }
                Family::LogNormal { mu, sigma } => {
                    let z: f64 = rng.sample(StandardNormal);
                    (mu + sigma * z).exp()
                }
                Family::Normal0 { sigma } => {
                    let z: f64 = rng.sample(StandardNormal);
                    sigma * z
                }
                Family::Gamma { .. } | Family::GenRayleigh { .. } => {
                    unreachable!("prepared samplers handle these families")
                }
            },
        }
    }
}

impl Law for DistributionSpec {
    fn ln_pdf(&self, y: f64) -> f64 {
        let c = self.ln_norm;
        match self.family {
            Family::Uniform { s } => {
                if y > 0.0 && y < s {
                    -c
                } else {
                    f64::NEG_INFINITY
                }
            }
            _ if self.positive_support() && y <= 0.0 => f64::NEG_INFINITY,
            Family::Gamma { alpha, beta } => (alpha - 1.0) * y.ln() - beta * y - c,
            Family::LogNormal { mu, sigma } => {
                let z = (y.ln() - mu) / sigma;
                -y.ln() - 0.5 * z * z - c
            }
            Family::Weibull { p } => (p - 1.0) * y.ln() - y.powf(p) - c,
            Family::GenRayleigh { nu } => (nu - 1.0) * y.ln() - 0.5 * y * y - c,
            Family::Normal0 { sigma } => {
                let z = y / sigma;
                -0.5 * z * z - c
            }
            Family::Laplace0 { scale } => -y.abs() / scale - c,
        }
    }

    fn cdf(&self, y: f64) -> f64 {
        if y.is_nan() {
            return f64::NAN;
        }
        if self.positive_support() && y <= 0.0 {
            return 0.0;
        }
        if y == f64::INFINITY {
            return 1.0;
        }
        match self.family {
            Family::Uniform { s } => (y / s).min(1.0),
            Family::Gamma { alpha, beta } => gamma_lr(alpha, beta * y),
            Family::LogNormal { mu, sigma } => {
                0.5 * erfc(-(y.ln() - mu) / (sigma * std::f64::consts::SQRT_2))
            }
            Family::Weibull { p } => -(-y.powf(p)).exp_m1(),
            Family::GenRayleigh { nu } => gamma_lr(0.5 * nu, 0.5 * y * y),
            Family::Normal0 { sigma } => 0.5 * erfc(-y / (sigma * std::f64::consts::SQRT_2)),
            Family::Laplace0 { scale } => {
                if y < 0.0 {
                    0.5 * (y / scale).exp()
                } else {
                    1.0 - 0.5 * (-y / scale).exp()
                }
            }
        }
    }

    fn positive_support(&self) -> bool {
        !self.is_symmetric()
    }

    fn quantile(&self, u: f64) -> f64 {
        match self.family {
            Family::Uniform { s } => s * u,
            Family::Weibull { p } => (-(-u).ln_1p()).powf(1.0 / p),
            Family::Laplace0 { scale } => {
                if u < 0.5 {
                    scale * (2.0 * u).ln()
                } else {
                    -scale * (2.0 * (1.0 - u)).ln()
                }
            }
            Family::Normal0 { sigma } => sigma * std::f64::consts::SQRT_2 * erf_inv(2.0 * u - 1.0),
            Family::LogNormal { mu, sigma } => {
                (mu + sigma * std::f64::consts::SQRT_2 * erf_inv(2.0 * u - 1.0)).exp()
            }
            _ => bisect_quantile(|y| self.cdf(y), u, true),
        }
    }
}

pub fn density(d: &DistributionSpec, y: f64) -> f64 {
    d.pdf(y)
}

pub fn cdf(d: &DistributionSpec, y: f64) -> f64 {
    d.cdf(y)
}

pub fn sample(d: &DistributionSpec, stream: SeededStream, n: usize) -> Vec<f64> {
    d.sample(stream, n)
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Uniform { s } => write!(f, "uniform:s={s}"),
            Family::Gamma { alpha, beta } => write!(f, "gamma:alpha={alpha},beta={beta}"),
            Family::LogNormal { mu, sigma } => write!(f, "lognormal:mu={mu},sigma={sigma}"),
            Family::Weibull { p } => write!(f, "weibull:p={p}"),
            Family::GenRayleigh { nu } => write!(f, "genrayleigh:nu={nu}"),
            Family::Normal0 { sigma } => write!(f, "normal0:sigma={sigma}"),
            Family::Laplace0 { scale } => write!(f, "laplace0:scale={scale}"),
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let t = Tagged::parse(input)?;
        let keys: &[&str] = match t.name {
            "uniform" => &["s"],
            "gamma" => &["alpha", "beta"],
            "lognormal" => &["mu", "sigma"],
            "weibull" => &["p"],
            "genrayleigh" => &["nu"],
            "normal0" => &["sigma"],
            "laplace0" => &["scale"],
            _ => {
                return Err(t.unknown_name(
                    "uniform, gamma, lognormal, weibull, genrayleigh, normal0, laplace0",
                ))
            }
        };
        t.expect_keys(keys)?;
        let family = match t.name {
            "uniform" => Family::Uniform { s: t.number("s")? },
            "gamma" => Family::Gamma {
                alpha: t.number("alpha")?,
                beta: t.number("beta")?,
            },
            "lognormal" => Family::LogNormal {
                mu: t.number("mu")?,
                sigma: t.number("sigma")?,
            },
            "weibull" => Family::Weibull { p: t.number("p")? },
            "genrayleigh" => Family::GenRayleigh {
                nu: t.number("nu")?,
            },
            "normal0" => Family::Normal0 {
                sigma: t.number("sigma")?,
            },
            _ => Family::Laplace0 {
                scale: t.number("scale")?,
            },
        };
        DistributionSpec::new(family)
    }
}

impl Serialize for DistributionSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DistributionSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Condition checks

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "theorem", rename_all = "snake_case")]
pub enum ConditionId {
    /// `f(e^x)` log-concave in `x`.
    Thm1,
    /// `min{0, 2/p - 1} ln x + ln f(x^(1/p))` concave in `x > 0`.
    Thm2 { p: f64 },
    /// `Y^p` has a log-concave density, `0 < p < 1`.
    ThmKr { p: f64 },
    /// Log-concave density symmetric about zero.
    Thm4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: ConditionId,
    /// Points at which the checked function was evaluated.
    pub grid: Vec<f64>,
    pub holds: bool,
    /// Smallest normalized concavity margin; negative values are violations.
    pub worst_violation: f64,
    /// Grid triple at the worst margin when it is a violation.
    pub violating_triple: Option<[f64; 3]>,
    pub notes: String,
}

impl ConditionReport {
    fn failed(condition: ConditionId, notes: impl Into<String>) -> Self {
        ConditionReport {
            condition,
            grid: Vec::new(),
            holds: false,
            worst_violation: f64::NEG_INFINITY,
            violating_triple: None,
            notes: notes.into(),
        }
    }
}

/// Normalized concavity margins of `values` sampled at increasing `points`.
///
/// For each interior point the margin is `2 (φ_k - chord_k) / max(1, |φ_k|)`,
/// where `chord_k` interpolates the two neighbours linearly; on a uniform grid
/// this is the midpoint test `2φ_k - φ_{k-1} - φ_{k+1}`. Returns the worst
/// margin and the index of its centre point.
pub(crate) fn worst_concavity_margin(points: &[f64], values: &[f64]) -> (f64, Option<usize>) {
    let mut worst = f64::INFINITY;
    let mut at = None;
    for k in 1..points.len().saturating_sub(1) {
        let (a, b, c) = (values[k - 1], values[k], values[k + 1]);
        let margin = if a == f64::NEG_INFINITY && c == f64::NEG_INFINITY {
            // Outside the support on both sides; nothing to check.
            continue;
        } else if b == f64::NEG_INFINITY || b.is_nan() || a.is_nan() || c.is_nan() {
            f64::NEG_INFINITY
        } else if a == f64::NEG_INFINITY || c == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            let w = (points[k + 1] - points[k]) / (points[k + 1] - points[k - 1]);
            let chord = w * a + (1.0 - w) * c;
            2.0 * (b - chord) / b.abs().max(1.0)
        };
        if margin < worst {
            worst = margin;
            at = Some(k);
        }
    }
    (worst, at)
}

fn concavity_report(
    condition: ConditionId,
    points: Vec<f64>,
    values: &[f64],
    notes: String,
) -> ConditionReport {
    let (worst, at) = worst_concavity_margin(&points, values);
    let holds = worst >= -TOL_CONCAVITY;
    let violating_triple = match at {
        Some(k) if !holds => Some([points[k - 1], points[k], points[k + 1]]),
        _ => None,
    };
    ConditionReport {
        condition,
        grid: points,
        holds,
        worst_violation: worst,
        violating_triple,
        notes,
    }
}

/// Log-spaced grid over the central quantile range of a positive law.
fn positive_quantile_grid<L: Law + ?Sized>(d: &L, grid_size: usize) -> Vec<f64> {
    let lo = d.quantile(GRID_TAIL).ln();
    let hi = d.quantile(1.0 - GRID_TAIL).ln();
    linspace(lo, hi, grid_size.max(3))
        .into_iter()
        .map(f64::exp)
        .collect()
}

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

/// Checks that `x ↦ ln f(e^x)` is concave on the central quantile range.
pub fn check_theorem1_condition<L: Law + ?Sized>(d: &L, grid_size: usize) -> ConditionReport {
    let id = ConditionId::Thm1;
    if !d.positive_support() {
        return ConditionReport::failed(id, "law is not supported on (0, inf)");
    }
    let ys = positive_quantile_grid(d, grid_size);
    let xs: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let values: Vec<f64> = ys.iter().map(|&y| d.ln_pdf(y)).collect();
    concavity_report(
        id,
        xs,
        &values,
        "phi(x) = ln f(e^x), uniform grid in x".into(),
    )
}

/// Checks concavity of `min{0, 2/p - 1} ln x + ln f(x^(1/p))` for `p > 1`.
pub fn check_theorem2_condition<L: Law + ?Sized>(
    d: &L,
    p: f64,
    grid_size: usize,
) -> ConditionReport {
    let id = ConditionId::Thm2 { p };
    if !(p > 1.0 && p.is_finite()) {
        return ConditionReport::failed(id, format!("requires p > 1, got {p}"));
    }
    if !d.positive_support() {
        return ConditionReport::failed(id, "law is not supported on (0, inf)");
    }
    let coef = (2.0 / p - 1.0).min(0.0);
    let ys = positive_quantile_grid(d, grid_size);
    let xs: Vec<f64> = ys.iter().map(|y| y.powf(p)).collect();
    let values: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| coef * x.ln() + d.ln_pdf(y))
        .collect();
    concavity_report(
        id,
        xs,
        &values,
        format!("psi(x) = {coef} ln x + ln f(x^(1/p)), log-spaced grid in x"),
    )
}

/// Checks that `Y^p` has a log-concave density for `0 < p < 1`.
pub fn check_kr_condition<L: Law + ?Sized>(d: &L, p: f64, grid_size: usize) -> ConditionReport {
    let id = ConditionId::ThmKr { p };
    if !(p > 0.0 && p < 1.0) {
        return ConditionReport::failed(id, format!("requires 0 < p < 1, got {p}"));
    }
    if !d.positive_support() {
        return ConditionReport::failed(id, "law is not supported on (0, inf)");
    }
    let ys = positive_quantile_grid(d, grid_size);
    let xs: Vec<f64> = ys.iter().map(|y| y.powf(p)).collect();
    let values: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| (1.0 / p).ln() + (1.0 / p - 1.0) * x.ln() + d.ln_pdf(y))
        .collect();
    concavity_report(
        id,
        xs,
        &values,
        "ln density of Y^p, log-spaced grid in x".into(),
    )
}

/// Checks symmetry about zero and log-concavity of the density itself.
pub fn check_theorem4_condition<L: Law + ?Sized>(d: &L, grid_size: usize) -> ConditionReport {
    let id = ConditionId::Thm4;
    if d.positive_support() {
        return ConditionReport::failed(id, "law is not symmetric about zero");
    }
    let hi = d.quantile(1.0 - GRID_TAIL);
    let ys = linspace(-hi, hi, grid_size.max(3));
    let values: Vec<f64> = ys.iter().map(|&y| d.ln_pdf(y)).collect();
    let asymmetry = ys
        .iter()
        .zip(&values)
        .map(|(&y, &v)| (v - d.ln_pdf(-y)).abs() / v.abs().max(1.0))
        .fold(0.0, f64::max);
    let mut report = concavity_report(id, ys, &values, "ln f(y), uniform grid".into());
    if asymmetry > TOL_CONCAVITY {
        report.holds = false;
        report.notes = format!("density not symmetric: relative defect {asymmetry:e}");
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, integrate_to_infinity};

    fn all_families() -> Vec<DistributionSpec> {
        vec![
            DistributionSpec::uniform(2.0).unwrap(),
            DistributionSpec::gamma(2.0, 1.0).unwrap(),
            DistributionSpec::gamma(0.5, 3.0).unwrap(),
            DistributionSpec::lognormal(0.3, 0.8).unwrap(),
            DistributionSpec::weibull(0.7).unwrap(),
            DistributionSpec::weibull(2.0).unwrap(),
            DistributionSpec::gen_rayleigh(2.0).unwrap(),
            DistributionSpec::gen_rayleigh(0.6).unwrap(),
            DistributionSpec::normal0(1.5).unwrap(),
            DistributionSpec::laplace0(0.7).unwrap(),
        ]
    }

    #[test]
    fn printed_density_values() {
        let w = DistributionSpec::weibull(2.0).unwrap();
        assert!((w.density(1.0) - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        let u = DistributionSpec::uniform(2.0).unwrap();
        assert_eq!(u.density(3.0), 0.0);
        assert_eq!(u.density(2.0), 0.0);
        assert_eq!(u.density(1.0), 0.5);
    }

    #[test]
    fn rayleigh_normalization_matches_quadrature() {
        // Oracle: normalize y e^{-y^2/2} by its quadrature integral.
        let mass = integrate_to_infinity(|y| y * (-0.5 * y * y).exp(), 0.0, 1e-13).value;
        let expected = (-0.5f64).exp() / mass;
        let d = DistributionSpec::gen_rayleigh(2.0).unwrap();
        assert!((d.density(1.0) - expected).abs() < 1e-12);
        assert!((d.density(1.0) - 0.606_530_659_712_633_4).abs() < 1e-12);
    }

    #[test]
    fn densities_integrate_to_one() {
        for d in all_families() {
            let mass = if d.positive_support() {
                // Split at 1 so singular endpoints are isolated.
                integrate(|y| d.pdf(y), 0.0, 1.0, 1e-11).value
                    + integrate_to_infinity(|y| d.pdf(y), 1.0, 1e-11).value
            } else {
                2.0 * integrate_to_infinity(|y| d.pdf(y), 0.0, 1e-11).value
            };
            assert!((mass - 1.0).abs() < 1e-6, "{d}: mass {mass}");
        }
    }

    #[test]
    fn cdf_examples() {
        let w = DistributionSpec::weibull(2.0).unwrap();
        assert!((w.cdf(LN_2.sqrt()) - 0.5).abs() < 1e-15);
        let g = DistributionSpec::gamma(2.0, 1.0).unwrap();
        let closed = 1.0 - 3.0 * (-2.0f64).exp();
        assert!((g.cdf(2.0) - closed).abs() < 1e-14);
        let quad = integrate(|y| g.pdf(y), 0.0, 2.0, 1e-13).value;
        assert!((quad - closed).abs() < 1e-12);
        for d in all_families() {
            assert_eq!(d.cdf(f64::INFINITY), 1.0);
            assert!(d.cdf(1e6) > 1.0 - 1e-12);
            assert!(d.cdf(-1e6) < 1e-12);
        }
    }

    #[test]
    fn cdf_matches_integrated_density() {
        for d in all_families() {
            let lo = if d.positive_support() { 0.0 } else { -40.0 };
            for u in [0.1, 0.5, 0.9] {
                let y = d.quantile(u);
                let mass = integrate(|s| d.pdf(s), lo, y, 1e-12).value;
                assert!((mass - d.cdf(y)).abs() < 1e-7, "{d} at {y}");
            }
        }
    }

    #[test]
    fn cdf_is_monotone() {
        for d in all_families() {
            let lo = d.quantile(1e-4);
            let hi = d.quantile(1.0 - 1e-4);
            let ys = linspace(lo, hi, 500);
            for w in ys.windows(2) {
                assert!(d.cdf(w[1]) >= d.cdf(w[0]), "{d}");
            }
        }
    }

    #[test]
    fn closed_form_quantiles_invert_cdf() {
        let closed = [
            DistributionSpec::uniform(3.0).unwrap(),
            DistributionSpec::weibull(0.5).unwrap(),
            DistributionSpec::weibull(3.0).unwrap(),
            DistributionSpec::laplace0(2.0).unwrap(),
        ];
        for d in closed {
            for i in 1..100 {
                let u = i as f64 / 100.0;
                assert!((d.cdf(d.quantile(u)) - u).abs() <= 1e-10, "{d} at {u}");
            }
        }
        // bisection fallback
        let g = DistributionSpec::gamma(0.5, 1.0).unwrap();
        assert!((g.cdf(g.quantile(0.3)) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn symmetric_families() {
        for d in [
            DistributionSpec::normal0(1.3).unwrap(),
            DistributionSpec::laplace0(0.4).unwrap(),
        ] {
            for y in [0.1, 1.0, 2.7] {
                assert_eq!(d.density(y), d.density(-y));
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DistributionSpec::uniform(0.0).is_err());
        assert!(DistributionSpec::gamma(1.0, -1.0).is_err());
        assert!(DistributionSpec::weibull(f64::NAN).is_err());
        assert!(DistributionSpec::lognormal(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_in_support() {
        let u = DistributionSpec::uniform(1.0).unwrap();
        let s = SeededStream::with_index(11, 2);
        assert_eq!(u.sample(s, 3), u.sample(s, 3));
        for d in all_families().into_iter().filter(|d| d.positive_support()) {
            assert!(
                d.sample(s, 2000).iter().all(|&y| y > 0.0 && d.pdf(y) > 0.0),
                "{d}"
            );
        }
    }

    #[test]
    fn parse_round_trip() {
        for text in [
            "uniform:s=1",
            "gamma:alpha=2,beta=1",
            "lognormal:mu=0,sigma=1",
            "weibull:p=2",
            "genrayleigh:nu=2",
            "normal0:sigma=1",
            "laplace0:scale=1",
        ] {
            let d: DistributionSpec = text.parse().unwrap();
            assert_eq!(d.to_string(), text);
        }
    }

    #[test]
    fn parse_errors_carry_columns() {
        let cases = [
            ("weibul:p=2", 1),
            ("gamma:alpha=2,beta=oops", 20),
            ("gamma:alpha=2,rate=1", 15),
            ("weibull:p", 9),
        ];
        for (text, expected) in cases {
            match text.parse::<DistributionSpec>() {
                Err(Error::Parse { column, .. }) => assert_eq!(column, expected, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(
            "weibull:p=-1".parse::<DistributionSpec>(),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn theorem1_condition_examples() {
        for d in [
            DistributionSpec::gamma(2.0, 1.0).unwrap(),
            DistributionSpec::lognormal(0.0, 1.0).unwrap(),
        ] {
            let r = check_theorem1_condition(&d, DEFAULT_GRID_SIZE);
            assert!(r.holds, "{d}: {r:?}");
            assert_eq!(r.grid.len(), DEFAULT_GRID_SIZE);
        }
        let r = check_theorem1_condition(&DistributionSpec::normal0(1.0).unwrap(), 64);
        assert!(!r.holds);
    }

    struct TwoBumps;

    impl Law for TwoBumps {
        fn ln_pdf(&self, y: f64) -> f64 {
            if (0.9..1.0).contains(&y) || (9.9..10.0).contains(&y) {
                (0.5f64 / 0.1).ln()
            } else {
                f64::NEG_INFINITY
            }
        }
        fn cdf(&self, y: f64) -> f64 {
            let piece = |lo: f64| ((y - lo) / 0.1).clamp(0.0, 1.0);
            0.5 * piece(0.9) + 0.5 * piece(9.9)
        }
        fn positive_support(&self) -> bool {
            true
        }
    }

    #[test]
    fn bimodal_mixture_fails_theorem1_condition() {
        let r = check_theorem1_condition(&TwoBumps, DEFAULT_GRID_SIZE);
        assert!(!r.holds);
        let [_, mid, _] = r.violating_triple.unwrap();
        assert!(mid > 1.0f64.ln() && mid < 9.9f64.ln(), "{mid}");
    }

    #[test]
    fn theorem2_condition_examples() {
        let w3 = DistributionSpec::weibull(3.0).unwrap();
        assert!(check_theorem2_condition(&w3, 3.0, DEFAULT_GRID_SIZE).holds);
        let r1 = DistributionSpec::gen_rayleigh(1.0).unwrap();
        assert!(check_theorem2_condition(&r1, 2.0, DEFAULT_GRID_SIZE).holds);
        let r05 = DistributionSpec::gen_rayleigh(0.5).unwrap();
        assert!(!check_theorem2_condition(&r05, 2.0, DEFAULT_GRID_SIZE).holds);
        assert!(!check_theorem2_condition(&w3, 0.5, 64).holds);
    }

    #[test]
    fn kr_condition_examples() {
        let w = DistributionSpec::weibull(0.5).unwrap();
        assert!(check_kr_condition(&w, 0.5, DEFAULT_GRID_SIZE).holds);
        let g = DistributionSpec::gamma(1.0, 1.0).unwrap();
        assert!(check_kr_condition(&g, 0.5, DEFAULT_GRID_SIZE).holds);
        // Recorded, not asserted.
        let r = check_kr_condition(&w, 0.9, DEFAULT_GRID_SIZE);
        assert!(r.worst_violation.is_finite());
        assert!(!check_kr_condition(&w, 1.5, 64).holds);
    }

    #[test]
    fn theorem4_condition() {
        assert!(check_theorem4_condition(&DistributionSpec::normal0(1.0).unwrap(), 512).holds);
        assert!(check_theorem4_condition(&DistributionSpec::laplace0(1.0).unwrap(), 512).holds);
        assert!(!check_theorem4_condition(&DistributionSpec::gamma(2.0, 1.0).unwrap(), 512).holds);
    }

    #[test]
    fn named_families_satisfy_theorem1_condition() {
        for d in [
            DistributionSpec::uniform(1.0).unwrap(),
            DistributionSpec::uniform(5.0).unwrap(),
            DistributionSpec::gamma(0.5, 1.0).unwrap(),
            DistributionSpec::gamma(2.0, 3.0).unwrap(),
            DistributionSpec::lognormal(1.0, 0.5).unwrap(),
            DistributionSpec::weibull(0.5).unwrap(),
            DistributionSpec::weibull(4.0).unwrap(),
            DistributionSpec::gen_rayleigh(0.5).unwrap(),
            DistributionSpec::gen_rayleigh(3.0).unwrap(),
        ] {
            let r = check_theorem1_condition(&d, DEFAULT_GRID_SIZE);
            assert!(r.holds, "{d}: {}", r.worst_violation);
        }
    }

    #[test]
    fn theorem2_condition_weibull_and_rayleigh_grid() {
        for p in [1.5, 2.0, 3.0, 5.0] {
            let d = DistributionSpec::weibull(p).unwrap();
            assert!(
                check_theorem2_condition(&d, p, DEFAULT_GRID_SIZE).holds,
                "p={p}"
            );
        }
        for nu in [0.5, 0.9, 1.0, 1.5, 3.0] {
            let d = DistributionSpec::gen_rayleigh(nu).unwrap();
            let r = check_theorem2_condition(&d, 2.0, DEFAULT_GRID_SIZE);
            assert_eq!(r.holds, nu >= 1.0, "nu={nu}: {}", r.worst_violation);
        }
    }

    #[test]
    fn log_density_has_no_underflow_in_tails() {
        let d = DistributionSpec::weibull(2.0).unwrap();
        assert!((d.ln_pdf(40.0) - (2.0f64.ln() + 40.0f64.ln() - 1600.0)).abs() < 1e-9);
        assert_eq!(d.pdf(40.0), 0.0);
    }
}
