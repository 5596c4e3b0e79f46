//! Tail bounds for `Σ b_i Y_i` in terms of `Σ Y_i`.
//!
//! With `b_geo = (Π b_i)^(1/n)` and `b_pow = (n⁻¹ Σ b_i^q)^(1/q)`:
//!
//! * under the log-concavity of `f(e^x)`, `Pr(Σ b_i Y_i ≤ t) ≤ Pr(b_geo Σ Y_i ≤ t)`;
//! * under the `p`-condition with `1/p + 1/q = 1`,
//!   `Pr(Σ b_i Y_i ≤ t) ≥ Pr(b_pow Σ Y_i ≤ t)`.
//!
//! When a law meets both conditions the two combine into a sandwich.

use serde::{Deserialize, Serialize};

use crate::distributions::{Family, Law};
use crate::error::{Error, Result};
use crate::majorization::{conjugate, PremiseMode, WeightVector};
use crate::sum_engine::{
    condition_for_mode, mc_cdf, quad_cdf, weighted_sums, CdfCurve, Method, MonteCarlo, TGrid,
    AUTO_GRID_SPAN, EXACT_SLACK,
};
use crate::DistributionSpec;

/// `(Π b_i)^(1/n)`, computed as `exp(mean ln b_i)`.
pub fn geometric_mean_weight(b: &WeightVector) -> Result<f64> {
    let v = b.values();
    if let Some(index) = v.iter().position(|&x| x <= 0.0) {
        return Err(Error::NonPositiveWeight {
            index,
            value: v[index],
        });
    }
    Ok((v.iter().map(|x| x.ln()).sum::<f64>() / v.len() as f64).exp())
}

/// `(n⁻¹ Σ b_i^q)^(1/q)`.
pub fn power_mean_weight(b: &WeightVector, q: f64) -> Result<f64> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::OutOfRange {
            name: "q",
            value: q,
            range: "(1, inf)".into(),
        });
    }
    let v = b.values();
    let mean = v.iter().map(|x| x.powf(q)).sum::<f64>() / v.len() as f64;
    Ok(mean.powf(1.0 / q))
}

/// Point estimate with its standard error (zero for exact methods).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Law of `Σ_{i≤n} Y_i` when it stays in a closed-form family.
fn closed_form_sum(d: &DistributionSpec, n: usize) -> Option<DistributionSpec> {
    let n = n as f64;
    match d.family() {
        Family::Gamma { alpha, beta } => DistributionSpec::gamma(n * alpha, beta).ok(),
        Family::Normal0 { sigma } => DistributionSpec::normal0(sigma * n.sqrt()).ok(),
        _ => None,
    }
}

/// Default Monte Carlo budget for sums that have neither a closed form nor a
/// quadrature route.
pub const FALLBACK_MC: MonteCarlo = MonteCarlo {
    n_samples: 1_000_000,
    seed: 0,
};

/// `Pr(Σ_{i≤n} Y_i ≤ t)` over a grid: exact for gamma (and centered normal)
/// summands, quadrature for `n ≤ 3`, Monte Carlo otherwise.
pub fn sum_of_iid_curve(
    d: &DistributionSpec,
    n: usize,
    t_grid: &[f64],
    mc: MonteCarlo,
) -> Result<CdfCurve> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if let Some(sum) = closed_form_sum(d, n) {
        let values = t_grid.iter().map(|&t| sum.cdf(t)).collect();
        return Ok(CdfCurve {
            t_grid: t_grid.to_vec(),
            std_errors: vec![0.0; t_grid.len()],
            values,
            method: Method::Quadrature,
            seed: 0,
            n_samples: 0,
        });
    }
    let ones = WeightVector::constant(1.0, n)?;
    if n <= 3 {
        quad_cdf(d, &ones, t_grid)
    } else {
        mc_cdf(d, &ones, t_grid, mc.n_samples, mc.seed)
    }
}

pub fn sum_of_iid_cdf(d: &DistributionSpec, n: usize, t: f64) -> Result<Estimate> {
    let c = sum_of_iid_curve(d, n, &[t], FALLBACK_MC)?;
    Ok(Estimate {
        value: c.values[0],
        std_error: c.std_errors[0],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub b_star_geo: Option<f64>,
    pub b_star_pow: Option<f64>,
    pub q: Option<f64>,
    /// `Pr(b_geo Σ Y_i ≤ t)`
    pub upper_curve: Option<CdfCurve>,
    /// `Pr(b_pow Σ Y_i ≤ t)`
    pub lower_curve: Option<CdfCurve>,
    /// `Pr(Σ b_i Y_i ≤ t)`
    pub target_curve: Option<CdfCurve>,
    pub holds: bool,
    /// Smallest slack `bound gap + z·se` over both sides and the grid.
    pub worst_margin: f64,
    pub violating_t: Option<f64>,
    pub z: f64,
}

impl BoundReport {
    /// CSV `t,lower,target,upper`; absent curves leave their column empty.
    pub fn to_csv(&self) -> String {
        let grid = [&self.target_curve, &self.upper_curve, &self.lower_curve]
            .into_iter()
            .flatten()
            .next()
            .map(|c| c.t_grid.clone())
            .unwrap_or_default();
        let cell = |c: &Option<CdfCurve>, i: usize| {
            c.as_ref()
                .map(|c| c.values[i].to_string())
                .unwrap_or_default()
        };
        let mut out = String::from("t,lower,target,upper\n");
        for (i, t) in grid.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                t,
                cell(&self.lower_curve, i),
                cell(&self.target_curve, i),
                cell(&self.upper_curve, i)
            ));
        }
        out
    }
}

fn require(d: &DistributionSpec, mode: PremiseMode) -> Result<()> {
    let report = condition_for_mode(d, mode);
    if report.holds {
        Ok(())
    } else {
        let hypothesis = match mode {
            PremiseMode::Thm1Log => "f(e^x) log-concave (geometric-mean upper bound)".to_string(),
            _ => format!(
                "p-condition with p = {} (power-mean lower bound)",
                mode.p().unwrap_or(f64::NAN)
            ),
        };
        Err(Error::precondition(
            hypothesis,
            format!("{d}: worst concavity margin {:e}", report.worst_violation),
        ))
    }
}

/// MC target curve on its own automatic grid (or the explicit one).
fn target_and_grid(
    d: &DistributionSpec,
    b: &WeightVector,
    t_grid: &TGrid,
    mc: MonteCarlo,
) -> Result<CdfCurve> {
    match t_grid {
        TGrid::Explicit(grid) => mc_cdf(d, &b.sorted_desc(), grid, mc.n_samples, mc.seed),
        TGrid::Auto(count) => {
            let sorted_b = b.sorted_desc();
            let mut sums = weighted_sums(d, &[sorted_b.values()], mc)?.remove(0);
            sums.sort_by(f64::total_cmp);
            let q = |u: f64| sums[((sums.len() - 1) as f64 * u).round() as usize];
            let (lo, hi) = (q(AUTO_GRID_SPAN.0), q(AUTO_GRID_SPAN.1));
            let grid = crate::distributions::linspace(lo, hi, (*count).max(1));
            mc_cdf(d, &sorted_b, &grid, mc.n_samples, mc.seed)
        }
    }
}

fn scaled_sum_curve(
    d: &DistributionSpec,
    n: usize,
    scale: f64,
    grid: &[f64],
    mc: MonteCarlo,
) -> Result<CdfCurve> {
    let shrunk: Vec<f64> = grid.iter().map(|t| t / scale).collect();
    let mut c = sum_of_iid_curve(d, n, &shrunk, mc)?;
    c.t_grid = grid.to_vec();
    Ok(c)
}

struct Check {
    worst: f64,
    violating_t: Option<f64>,
}

/// Checks `small ≤ large` pointwise with `z` standard errors of slack.
fn check_le(small: &CdfCurve, large: &CdfCurve, z: f64, acc: &mut Check) {
    for i in 0..small.len() {
        let se = small.std_errors[i].hypot(large.std_errors[i]);
        let margin = large.values[i] - small.values[i] + z * se;
        acc.worst = acc.worst.min(margin);
        if margin < -EXACT_SLACK && acc.violating_t.is_none() {
            acc.violating_t = Some(small.t_grid[i]);
        }
    }
}

/// Both bounds together with the target curve, for a law that satisfies both
/// conditions at `p = q/(q-1)`.
pub fn sandwich(
    d: &DistributionSpec,
    a: &WeightVector,
    q: f64,
    t_grid: &TGrid,
    mc: MonteCarlo,
    z: f64,
) -> Result<BoundReport> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::OutOfRange {
            name: "q",
            value: q,
            range: "(1, inf)".into(),
        });
    }
    require(d, PremiseMode::Thm1Log)?;
    require(d, PremiseMode::thm2(conjugate(q))?)?;
    let geo = geometric_mean_weight(a)?;
    let pow = power_mean_weight(a, q)?;
    let target = target_and_grid(d, a, t_grid, mc)?;
    let n = a.len();
    let upper = scaled_sum_curve(d, n, geo, &target.t_grid, mc)?;
    let lower = scaled_sum_curve(d, n, pow, &target.t_grid, mc)?;
    let mut acc = Check {
        worst: f64::INFINITY,
        violating_t: None,
    };
    check_le(&lower, &target, z, &mut acc);
    check_le(&target, &upper, z, &mut acc);
    Ok(BoundReport {
        b_star_geo: Some(geo),
        b_star_pow: Some(pow),
        q: Some(q),
        upper_curve: Some(upper),
        lower_curve: Some(lower),
        target_curve: Some(target),
        holds: acc.violating_t.is_none(),
        worst_margin: acc.worst,
        violating_t: acc.violating_t,
        z,
    })
}

/// Geometric-mean upper bound alone (needs only the log-concavity of `f(e^x)`).
pub fn upper_bound(
    d: &DistributionSpec,
    b: &WeightVector,
    t_grid: &TGrid,
    mc: MonteCarlo,
    z: f64,
) -> Result<BoundReport> {
    require(d, PremiseMode::Thm1Log)?;
    let geo = geometric_mean_weight(b)?;
    let target = target_and_grid(d, b, t_grid, mc)?;
    let upper = scaled_sum_curve(d, b.len(), geo, &target.t_grid, mc)?;
    let mut acc = Check {
        worst: f64::INFINITY,
        violating_t: None,
    };
    check_le(&target, &upper, z, &mut acc);
    Ok(BoundReport {
        b_star_geo: Some(geo),
        b_star_pow: None,
        q: None,
        upper_curve: Some(upper),
        lower_curve: None,
        target_curve: Some(target),
        holds: acc.violating_t.is_none(),
        worst_margin: acc.worst,
        violating_t: acc.violating_t,
        z,
    })
}

/// Power-mean lower bound alone (needs the condition at `p = q/(q-1)`).
pub fn lower_bound(
    d: &DistributionSpec,
    b: &WeightVector,
    q: f64,
    t_grid: &TGrid,
    mc: MonteCarlo,
    z: f64,
) -> Result<BoundReport> {
    let pow = power_mean_weight(b, q)?;
    require(d, PremiseMode::thm2(conjugate(q))?)?;
    let target = target_and_grid(d, b, t_grid, mc)?;
    let lower = scaled_sum_curve(d, b.len(), pow, &target.t_grid, mc)?;
    let mut acc = Check {
        worst: f64::INFINITY,
        violating_t: None,
    };
    check_le(&lower, &target, z, &mut acc);
    Ok(BoundReport {
        b_star_geo: None,
        b_star_pow: Some(pow),
        q: Some(q),
        upper_curve: None,
        lower_curve: Some(lower),
        target_curve: Some(target),
        holds: acc.violating_t.is_none(),
        worst_margin: acc.worst,
        violating_t: acc.violating_t,
        z,
    })
}
