//! Distribution functions of weighted sums `S = Σ a_i Y_i` and usual
//! stochastic order tests between two of them.
//!
//! Three estimators are available: a closed form for exponential summands
//! with distinct weights, nested adaptive quadrature for up to three
//! components, and Monte Carlo with common random numbers (CRN).
//!
//! # Sample layout
//!
//! The Monte Carlo sample matrix is `n_samples × n`, sample-major and
//! component-minor. Rows are split into blocks of [`BLOCK_SIZE`] rows; block
//! `b` is filled row by row from stream `(seed, b)`. The matrix therefore
//! depends only on `(law, seed, n)`, never on the weights or on how blocks are
//! scheduled, and two weight vectors of the same length always see the same
//! `Y` values.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{
    check_kr_condition, check_theorem1_condition, check_theorem2_condition,
    check_theorem4_condition, linspace, ConditionReport, DistributionSpec, Law, DEFAULT_GRID_SIZE,
};
use crate::error::{Error, Result};
use crate::majorization::{premise_holds, PremiseMode, WeightVector};
use crate::parse;
use crate::quadrature::integrate;
use crate::rng::{SeededStream, BLOCK_SIZE};

/// Minimum Monte Carlo sample count.
pub const MIN_SAMPLES: usize = 1000;
/// Default number of points in an automatic t-grid.
pub const DEFAULT_GRID_POINTS: usize = 50;
/// Quantile span of the pooled sums covered by an automatic t-grid.
pub const AUTO_GRID_SPAN: (f64, f64) = (0.005, 0.995);
/// Default tolerance multiplier for Monte Carlo comparisons.
pub const DEFAULT_Z: f64 = 4.0;
/// Slack for curves without sampling error.
pub const EXACT_SLACK: f64 = 1e-12;

const QUAD_TOL_INNER: f64 = 1e-11;
const QUAD_TOL_OUTER: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactExpMixture,
    MonteCarloCrn,
    Quadrature,
}

/// Estimated `Pr(S ≤ t)` over a grid of `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfCurve {
    #[serde(rename = "t")]
    pub t_grid: Vec<f64>,
    #[serde(rename = "value")]
    pub values: Vec<f64>,
    #[serde(rename = "se")]
    pub std_errors: Vec<f64>,
    pub method: Method,
    pub seed: u64,
    #[serde(default)]
    pub n_samples: u64,
}

impl CdfCurve {
    fn exact(method: Method, t_grid: Vec<f64>, values: Vec<f64>) -> Self {
        let std_errors = vec![0.0; values.len()];
        CdfCurve {
            t_grid,
            values,
            std_errors,
            method,
            seed: 0,
            n_samples: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }

    /// CSV with header `t,value,se`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value,se\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                self.t_grid[i], self.values[i], self.std_errors[i]
            ));
        }
        out
    }
}

/// Grid of evaluation points `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum TGrid {
    /// `count` points spanning the pooled quantile range of the compared sums.
    Auto(usize),
    Explicit(Vec<f64>),
}

impl Default for TGrid {
    fn default() -> Self {
        TGrid::Auto(DEFAULT_GRID_POINTS)
    }
}

impl TGrid {
    /// `count` evenly spaced points from `min` to `max` inclusive.
    pub fn range(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min <= max) || count == 0 {
            return Err(Error::InvalidParameter(format!(
                "bad grid {min}:{max}:{count}"
            )));
        }
        Ok(TGrid::Explicit(linspace(min, max, count)))
    }
}

impl FromStr for TGrid {
    type Err = Error;

    /// `auto` or `min:max:count`.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "auto" {
            return Ok(TGrid::default());
        }
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(parse::err(s, 1, "expected `auto` or `min:max:count`"));
        }
        let mut column = 1;
        let mut fields = [0.0; 3];
        for (k, part) in parts.iter().enumerate() {
            fields[k] = part
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse::err(s, column, &format!("`{part}` is not a number")))?;
            column += part.len() + 1;
        }
        let count = fields[2];
        if count < 1.0 || count.fract() != 0.0 {
            return Err(parse::err(
                s,
                s.len() - parts[2].len() + 1,
                "count must be a positive integer",
            ));
        }
        TGrid::range(fields[0], fields[1], count as usize)
    }
}

impl fmt::Display for TGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TGrid::Auto(_) => f.write_str("auto"),
            TGrid::Explicit(v) => write!(f, "explicit[{}]", v.len()),
        }
    }
}

/// Monte Carlo budget and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub n_samples: usize,
    pub seed: u64,
}

impl MonteCarlo {
    pub fn new(n_samples: usize, seed: u64) -> Result<Self> {
        if n_samples < MIN_SAMPLES {
            return Err(Error::InvalidParameter(format!(
                "n_samples must be at least {MIN_SAMPLES}, got {n_samples}"
            )));
        }
        Ok(MonteCarlo { n_samples, seed })
    }
}

// ---------------------------------------------------------------------------
// Exact exponential mixture

/// `Pr(Σ a_i Y_i ≤ t)` for i.i.d. `Exp(1)` summands and distinct positive
/// weights:
/// `1 - Σ_i a_i^(n-1) / Π_{j≠i}(a_i - a_j) · e^(-t/a_i)`.
pub fn exact_exp_mixture_cdf(a: &WeightVector, t: f64) -> Result<f64> {
    let w = a.values();
    if let Some(index) = w.iter().position(|&v| v <= 0.0) {
        return Err(Error::NonPositiveWeight {
            index,
            value: w[index],
        });
    }
    for i in 0..w.len() {
        for j in 0..i {
            if (w[i] - w[j]).abs() <= 1e-12 * w[i].max(w[j]) {
                return Err(Error::RepeatedWeights(j, i));
            }
        }
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    if t == f64::INFINITY {
        return Ok(1.0);
    }
    let n = w.len();
    let mut tail = 0.0;
    for i in 0..n {
        let mut coef = w[i].powi(n as i32 - 1);
        for j in 0..n {
            if j != i {
                coef /= w[i] - w[j];
            }
        }
        tail += coef * (-t / w[i]).exp();
    }
    Ok((1.0 - tail).clamp(0.0, 1.0))
}

/// [`exact_exp_mixture_cdf`] over a grid.
pub fn exact_exp_mixture_curve(a: &WeightVector, t_grid: &[f64]) -> Result<CdfCurve> {
    let values = t_grid
        .iter()
        .map(|&t| exact_exp_mixture_cdf(a, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(CdfCurve::exact(
        Method::ExactExpMixture,
        t_grid.to_vec(),
        values,
    ))
}

// ---------------------------------------------------------------------------
// Quadrature

/// Probability levels whose quantiles split the integration range, so the
/// adaptive rule cannot miss mass concentrated in a small part of a long
/// interval. Mass beyond the outermost level (at most 1e-15) is neglected.
const BREAK_LEVELS: [f64; 10] = [
    1e-6,
    0.01,
    0.1,
    0.5,
    0.9,
    0.99,
    0.9999,
    1.0 - 1e-8,
    1.0 - 1e-12,
    1.0 - 1e-15,
];

fn breakpoints(d: &DistributionSpec) -> Vec<f64> {
    let mut pts: Vec<f64> = if d.positive_support() {
        std::iter::once(0.0)
            .chain(BREAK_LEVELS.iter().map(|&u| d.quantile(u)))
            .collect()
    } else {
        BREAK_LEVELS
            .iter()
            .rev()
            .map(|&u| -d.quantile(u))
            .chain(BREAK_LEVELS.iter().map(|&u| d.quantile(u)))
            .collect()
    };
    pts.retain(|x| x.is_finite());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Integral of `g(y) f(y)` over the support of `d` truncated to `y ≤ upper`.
fn against_density<G: Fn(f64) -> f64>(
    d: &DistributionSpec,
    breaks: &[f64],
    g: G,
    upper: f64,
    tol: f64,
) -> f64 {
    let integrand = |y: f64| {
        let fy = d.pdf(y);
        if fy == 0.0 {
            0.0
        } else {
            g(y) * fy
        }
    };
    let seg_tol = tol / breaks.len().max(1) as f64;
    breaks
        .windows(2)
        .take_while(|w| w[0] < upper)
        .map(|w| integrate(integrand, w[0], w[1].min(upper), seg_tol).value)
        .sum()
}

/// `Pr(Σ w_i Y_i ≤ t)` for `w` sorted decreasingly with all entries positive.
fn quad_point(d: &DistributionSpec, breaks: &[f64], w: &[f64], t: f64) -> f64 {
    let positive = d.positive_support();
    match w.len() {
        0 => {
            if t >= 0.0 {
                1.0
            } else {
                0.0
            }
        }
        1 => d.cdf(t / w[0]),
        2 => {
            if positive && t <= 0.0 {
                return 0.0;
            }
            let (w1, w2) = (w[0], w[1]);
            let upper = if positive { t / w2 } else { f64::INFINITY };
            against_density(
                d,
                breaks,
                |y| d.cdf((t - w2 * y) / w1),
                upper,
                QUAD_TOL_INNER,
            )
        }
        _ => {
            if positive && t <= 0.0 {
                return 0.0;
            }
            let last = w[w.len() - 1];
            let head = &w[..w.len() - 1];
            let upper = if positive { t / last } else { f64::INFINITY };
            against_density(
                d,
                breaks,
                |z| quad_point(d, breaks, head, t - last * z),
                upper,
                QUAD_TOL_OUTER,
            )
        }
    }
}

/// `Pr(Σ a_i Y_i ≤ t)` by nested adaptive quadrature, for at most three
/// non-zero weights. Zero weights drop out of the sum.
pub fn quad_cdf(d: &DistributionSpec, a: &WeightVector, t_grid: &[f64]) -> Result<CdfCurve> {
    let w: Vec<f64> = a
        .sorted_desc()
        .values()
        .iter()
        .copied()
        .filter(|&v| v > 0.0)
        .collect();
    if w.len() > 3 {
        return Err(Error::UnsupportedDimension(w.len()));
    }
    let breaks = breakpoints(d);
    let values: Vec<f64> = t_grid
        .par_iter()
        .map(|&t| quad_point(d, &breaks, &w, t).clamp(0.0, 1.0))
        .collect();
    Ok(CdfCurve::exact(Method::Quadrature, t_grid.to_vec(), values))
}

// ---------------------------------------------------------------------------
// Monte Carlo with common random numbers

/// Realized sums for each weight vector on the shared sample matrix, in row
/// order. All weight vectors must have the same length.
pub fn weighted_sums(
    d: &DistributionSpec,
    weights: &[&[f64]],
    mc: MonteCarlo,
) -> Result<Vec<Vec<f64>>> {
    let n = match weights.first() {
        Some(w) => w.len(),
        None => return Ok(Vec::new()),
    };
    if let Some(w) = weights.iter().find(|w| w.len() != n) {
        return Err(Error::LengthMismatch {
            left: n,
            right: w.len(),
        });
    }
    let blocks = mc.n_samples.div_ceil(BLOCK_SIZE);
    let per_block: Vec<Vec<Vec<f64>>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let rows = BLOCK_SIZE.min(mc.n_samples - b * BLOCK_SIZE);
            let mut rng = SeededStream::with_index(mc.seed, b as u64).rng();
            let sampler = d.sampler();
            let mut y = vec![0.0; n];
            let mut out: Vec<Vec<f64>> = weights.iter().map(|_| Vec::with_capacity(rows)).collect();
            for _ in 0..rows {
                for v in y.iter_mut() {
                    *v = sampler.draw(&mut rng);
                }
                for (w, sums) in weights.iter().zip(out.iter_mut()) {
                    let mut s = 0.0;
                    for (wi, yi) in w.iter().zip(&y) {
                        s += wi * yi;
                    }
                    sums.push(s);
                }
            }
            out
        })
        .collect();
    let mut merged: Vec<Vec<f64>> = weights
        .iter()
        .map(|_| Vec::with_capacity(mc.n_samples))
        .collect();
    for block in per_block {
        for (dst, src) in merged.iter_mut().zip(block) {
            dst.extend(src);
        }
    }
    Ok(merged)
}

fn sort_sums(sums: &mut [f64]) {
    sums.par_sort_unstable_by(|a, b| a.total_cmp(b));
}

/// Empirical CDF of sorted sums with binomial standard errors.
fn ecdf_curve(sorted: &[f64], t_grid: &[f64], seed: u64) -> CdfCurve {
    let n = sorted.len() as f64;
    let values: Vec<f64> = t_grid
        .iter()
        .map(|&t| sorted.partition_point(|&s| s <= t) as f64 / n)
        .collect();
    let std_errors = values.iter().map(|v| (v * (1.0 - v) / n).sqrt()).collect();
    CdfCurve {
        t_grid: t_grid.to_vec(),
        values,
        std_errors,
        method: Method::MonteCarloCrn,
        seed,
        n_samples: sorted.len() as u64,
    }
}

/// Monte Carlo estimate of `Pr(Σ a_i Y_i ≤ t)` with weights applied to the
/// sample columns in the given order.
pub fn mc_cdf(
    d: &DistributionSpec,
    a: &WeightVector,
    t_grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<CdfCurve> {
    let mc = MonteCarlo::new(n_samples, seed)?;
    let mut sums = weighted_sums(d, &[a.values()], mc)?.remove(0);
    sort_sums(&mut sums);
    Ok(ecdf_curve(&sums, t_grid, seed))
}

fn sorted_quantile(sorted: &[f64], u: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * u).round() as usize;
    sorted[idx]
}

/// Evenly spaced grid over the pooled `[0.005, 0.995]` quantile range.
fn auto_grid(sorted: &[&[f64]], count: usize, positive_only: bool) -> Vec<f64> {
    let lo = sorted
        .iter()
        .map(|s| sorted_quantile(s, AUTO_GRID_SPAN.0))
        .fold(f64::INFINITY, f64::min);
    let hi = sorted
        .iter()
        .map(|s| sorted_quantile(s, AUTO_GRID_SPAN.1))
        .fold(f64::NEG_INFINITY, f64::max);
    let lo = if positive_only && lo <= 0.0 {
        hi / count as f64
    } else {
        lo
    };
    linspace(lo, hi, count.max(1))
}

// ---------------------------------------------------------------------------
// Dominance

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// `Σ a_i Y_i ≤_st Σ b_i Y_i`
    LeftLeqStRight,
    /// `Σ b_i Y_i ≤_st Σ a_i Y_i`
    RightLeqStLeft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub direction: Direction,
    pub holds: bool,
    /// Smallest `diff + z·se` over the grid.
    pub worst_margin: f64,
    /// First grid point where the margin falls below the slack.
    pub violating_t: Option<f64>,
    pub tolerance_rule: String,
    /// Raw pointwise `CDF(smaller sum) - CDF(larger sum)`.
    #[serde(default)]
    pub differences: Vec<f64>,
}

/// Tests `lower ≤_st upper`, i.e. `CDF_lower(t) ≥ CDF_upper(t)` on the grid,
/// allowing `z·sqrt(se_lower² + se_upper²)` of sampling error per point and
/// [`EXACT_SLACK`] of rounding.
pub fn dominance_test(lower: &CdfCurve, upper: &CdfCurve, z: f64) -> Result<DominanceReport> {
    if lower.t_grid != upper.t_grid
        || lower.values.len() != lower.len()
        || upper.values.len() != upper.len()
    {
        return Err(Error::GridMismatch);
    }
    let mut worst = f64::INFINITY;
    let mut violating_t = None;
    let mut differences = Vec::with_capacity(lower.len());
    for i in 0..lower.len() {
        let diff = lower.values[i] - upper.values[i];
        let se = lower.std_errors[i].hypot(upper.std_errors[i]);
        let margin = diff + z * se;
        differences.push(diff);
        worst = worst.min(margin);
        if margin < -EXACT_SLACK && violating_t.is_none() {
            violating_t = Some(lower.t_grid[i]);
        }
    }
    if lower.is_empty() {
        worst = 0.0;
    }
    Ok(DominanceReport {
        direction: Direction::LeftLeqStRight,
        holds: violating_t.is_none(),
        worst_margin: worst,
        violating_t,
        tolerance_rule: format!(
            "cdf_lower - cdf_upper >= -{z}*sqrt(se_lower^2 + se_upper^2) - {EXACT_SLACK:e}"
        ),
        differences,
    })
}

/// The condition on the law of `Y_i` that goes with each premise mode.
pub fn condition_for_mode(d: &DistributionSpec, mode: PremiseMode) -> ConditionReport {
    match mode {
        PremiseMode::Thm1Log => check_theorem1_condition(d, DEFAULT_GRID_SIZE),
        PremiseMode::Thm2Power { q } => {
            check_theorem2_condition(d, crate::majorization::conjugate(q), DEFAULT_GRID_SIZE)
        }
        PremiseMode::KrPower { q } => {
            check_kr_condition(d, crate::majorization::conjugate(q), DEFAULT_GRID_SIZE)
        }
        PremiseMode::Thm4Identity => check_theorem4_condition(d, DEFAULT_GRID_SIZE),
    }
}

fn premise_name(mode: PremiseMode) -> String {
    match mode {
        PremiseMode::Thm1Log => "premise log a ≺ log b (Theorem 1)".into(),
        PremiseMode::Thm2Power { q } => format!("premise a^q ≺ b^q with q = {q} (Theorem 2)"),
        PremiseMode::KrPower { q } => {
            format!("premise a^q ≺ b^q with q = {q} (Karlin–Rinott)")
        }
        PremiseMode::Thm4Identity => "premise a ≺ b (Proschan, Theorem 4)".into(),
    }
}

fn condition_name(mode: PremiseMode) -> String {
    match mode {
        PremiseMode::Thm1Log => "f(e^x) log-concave (Theorem 1)".into(),
        PremiseMode::Thm2Power { q } => format!(
            "min{{0, 2/p-1}} log x + log f(x^(1/p)) concave, p = {} (Theorem 2)",
            crate::majorization::conjugate(q)
        ),
        PremiseMode::KrPower { q } => format!(
            "Y^p has a log-concave density, p = {} (Karlin–Rinott)",
            crate::majorization::conjugate(q)
        ),
        PremiseMode::Thm4Identity => "log-concave density symmetric about zero (Theorem 4)".into(),
    }
}

/// Checks the premise on the weights and the condition on the law, returning
/// a precondition error naming whichever fails.
pub fn check_hypotheses(
    d: &DistributionSpec,
    a: &WeightVector,
    b: &WeightVector,
    mode: PremiseMode,
) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if !premise_holds(a, b, mode)? {
        return Err(Error::precondition(
            premise_name(mode),
            format!("a = ({a}), b = ({b})"),
        ));
    }
    let report = condition_for_mode(d, mode);
    if !report.holds {
        return Err(Error::precondition(
            condition_name(mode),
            format!(
                "{d}: worst concavity margin {:e}; {}",
                report.worst_violation, report.notes
            ),
        ));
    }
    Ok(())
}

/// Both CDF curves of a comparison plus the dominance verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub report: DominanceReport,
    /// Curve of `Σ a_i Y_i`.
    pub left: CdfCurve,
    /// Curve of `Σ b_i Y_i`.
    pub right: CdfCurve,
}

/// Ordering implied by `mode`.
pub fn expected_direction(mode: PremiseMode) -> Direction {
    match mode {
        PremiseMode::Thm2Power { .. } => Direction::RightLeqStLeft,
        _ => Direction::LeftLeqStRight,
    }
}

/// Estimates both curves with CRN and tests the ordering the theorem for
/// `mode` predicts. Weights are sorted decreasingly before being assigned to
/// sample columns, so permuted weight vectors give identical sums.
pub fn compare_weighted_sums_detailed(
    d: &DistributionSpec,
    a: &WeightVector,
    b: &WeightVector,
    mode: PremiseMode,
    t_grid: &TGrid,
    mc: MonteCarlo,
    z: f64,
) -> Result<Comparison> {
    check_hypotheses(d, a, b, mode)?;
    let positive_only = mode == PremiseMode::Thm4Identity;
    let (sa, sb) = (a.sorted_desc(), b.sorted_desc());
    let mut sums = weighted_sums(d, &[sa.values(), sb.values()], mc)?;
    for s in sums.iter_mut() {
        sort_sums(s);
    }
    let grid = match t_grid {
        TGrid::Auto(count) => auto_grid(&[&sums[0], &sums[1]], *count, positive_only),
        TGrid::Explicit(v) => {
            let g: Vec<f64> = v
                .iter()
                .copied()
                .filter(|&t| !positive_only || t > 0.0)
                .collect();
            if g.is_empty() {
                return Err(Error::InvalidParameter("t-grid has no points t > 0".into()));
            }
            g
        }
    };
    let left = ecdf_curve(&sums[0], &grid, mc.seed);
    let right = ecdf_curve(&sums[1], &grid, mc.seed);
    let direction = expected_direction(mode);
    let mut report = match direction {
        Direction::LeftLeqStRight => dominance_test(&left, &right, z)?,
        Direction::RightLeqStLeft => dominance_test(&right, &left, z)?,
    };
    report.direction = direction;
    Ok(Comparison {
        report,
        left,
        right,
    })
}

pub fn compare_weighted_sums(
    d: &DistributionSpec,
    a: &WeightVector,
    b: &WeightVector,
    mode: PremiseMode,
    t_grid: &TGrid,
    mc: MonteCarlo,
    z: f64,
) -> Result<DominanceReport> {
    compare_weighted_sums_detailed(d, a, b, mode, t_grid, mc, z).map(|c| c.report)
}

// ---------------------------------------------------------------------------
// Capacity functional

/// Monte Carlo mean of `ln(1 + Σ a_i Y_i)` and its standard error, on the
/// CRN sample matrix (weights sorted decreasingly).
pub fn expected_log_capacity(
    d: &DistributionSpec,
    a: &WeightVector,
    n_samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if !d.positive_support() {
        return Err(Error::precondition(
            "summands supported on (0, inf)",
            format!("{d} takes negative values"),
        ));
    }
    let mc = MonteCarlo::new(n_samples, seed)?;
    if a.values().iter().all(|&v| v == 0.0) {
        return Ok((0.0, 0.0));
    }
    let sa = a.sorted_desc();
    let sums = weighted_sums(d, &[sa.values()], mc)?.remove(0);
    let (sum, sum_sq) = sums
        .chunks(BLOCK_SIZE)
        .map(|c| {
            c.iter().fold((0.0, 0.0), |(s, s2), &x| {
                let v = x.ln_1p();
                (s + v, s2 + v * v)
            })
        })
        .fold((0.0, 0.0), |(s, s2), (b, b2)| (s + b, s2 + b2));
    let n = sums.len() as f64;
    let mean = sum / n;
    let var = ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec()).unwrap()
    }

    fn exp1() -> DistributionSpec {
        DistributionSpec::gamma(1.0, 1.0).unwrap()
    }

    /// Two-term closed form, written out independently of the n-term loop.
    fn two_term(a1: f64, a2: f64, t: f64) -> f64 {
        1.0 - (a1 * (-t / a1).exp() - a2 * (-t / a2).exp()) / (a1 - a2)
    }

    #[test]
    fn quadrature_with_lopsided_weights() {
        let w = DistributionSpec::weibull(2.0).unwrap();
        let a = WeightVector::new(vec![1.0, 3e-5]).unwrap();
        let v = quad_cdf(&w, &a, &[2.0]).unwrap().values[0];
        assert!(v < w.cdf(2.0) && w.cdf(2.0) - v < 1e-4, "{v}");
        let e = DistributionSpec::gamma(1.0, 1.0).unwrap();
        let a = WeightVector::new(vec![50.0, 0.01]).unwrap();
        let exact = exact_exp_mixture_cdf(&a, 3.0).unwrap();
        assert!((quad_cdf(&e, &a, &[3.0]).unwrap().values[0] - exact).abs() < 1e-9);
    }

    #[test]
    fn exact_mixture_examples() {
        let v = exact_exp_mixture_cdf(&w(&[0.5, 1.5]), 2.0).unwrap();
        assert!((v - two_term(0.5, 1.5, 2.0)).abs() < 1e-15);
        assert!((v - 0.613_762).abs() < 1e-6);
        let v = exact_exp_mixture_cdf(&w(&[2.0, 0.5]), 2.0).unwrap();
        assert!((v - 0.515_599).abs() < 1e-6);
        assert_eq!(
            exact_exp_mixture_cdf(&w(&[1.0, 2.0, 3.0]), f64::INFINITY).unwrap(),
            1.0
        );
        assert!(exact_exp_mixture_cdf(&w(&[1.0, 2.0, 3.0]), 400.0).unwrap() > 1.0 - 1e-15);
        assert!(matches!(
            exact_exp_mixture_cdf(&w(&[1.0, 1.0]), 1.0),
            Err(Error::RepeatedWeights(0, 1))
        ));
        assert!(exact_exp_mixture_cdf(&w(&[1.0, 0.0]), 1.0).is_err());
    }

    #[test]
    fn quadrature_examples() {
        let c = quad_cdf(&exp1(), &w(&[0.5, 1.5]), &[2.0]).unwrap();
        assert!((c.values[0] - 0.613_762).abs() < 1e-6);
        assert_eq!(c.std_errors, vec![0.0]);
        let u = DistributionSpec::uniform(1.0).unwrap();
        let c = quad_cdf(&u, &w(&[1.0, 1.0]), &[1.0]).unwrap();
        assert!((c.values[0] - 0.5).abs() < 1e-9);
        let wb = DistributionSpec::weibull(2.0).unwrap();
        let c = quad_cdf(&wb, &w(&[1.0, 0.0]), &[0.3, 1.1]).unwrap();
        assert_eq!(c.values, vec![wb.cdf(0.3), wb.cdf(1.1)]);
        assert!(matches!(
            quad_cdf(&wb, &w(&[1.0, 1.0, 1.0, 1.0]), &[1.0]),
            Err(Error::UnsupportedDimension(4))
        ));
    }

    #[test]
    fn quadrature_matches_exact_three_terms() {
        let a = w(&[0.4, 1.1, 2.3]);
        let grid = linspace(0.1, 12.0, 15);
        let q = quad_cdf(&exp1(), &a, &grid).unwrap();
        let e = exact_exp_mixture_curve(&a, &grid).unwrap();
        for (x, y) in q.values.iter().zip(&e.values) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
    }

    #[test]
    fn quadrature_symmetric_law() {
        // N(0,1) + N(0,1) ~ N(0, 2)
        let d = DistributionSpec::normal0(1.0).unwrap();
        let c = quad_cdf(&d, &w(&[1.0, 1.0]), &[-1.0, 0.0, 1.5]).unwrap();
        let target = DistributionSpec::normal0(2f64.sqrt()).unwrap();
        for (t, v) in c.t_grid.iter().zip(&c.values) {
            assert!((v - target.cdf(*t)).abs() < 1e-9);
        }
    }

    #[test]
    fn mc_matches_exact_mixture() {
        let c = mc_cdf(&exp1(), &w(&[0.5, 1.5]), &[2.0], 1_000_000, 42).unwrap();
        assert!((c.values[0] - 0.613_762).abs() <= 4.0 * c.std_errors[0]);
        assert_eq!(c.n_samples, 1_000_000);
    }

    #[test]
    fn mc_rejects_small_budget() {
        assert!(mc_cdf(&exp1(), &w(&[1.0, 1.0]), &[1.0], 999, 1).is_err());
    }

    #[test]
    fn constant_weights_rescale_exactly() {
        let d = DistributionSpec::weibull(1.5).unwrap();
        let grid = linspace(0.5, 6.0, 20);
        let c = 2.0;
        let scaled = mc_cdf(&d, &w(&[c, c, c]), &grid, 20_000, 5).unwrap();
        let shrunk: Vec<f64> = grid.iter().map(|t| t / c).collect();
        let base = mc_cdf(&d, &w(&[1.0, 1.0, 1.0]), &shrunk, 20_000, 5).unwrap();
        assert_eq!(scaled.values, base.values);
    }

    #[test]
    fn scale_equivariance() {
        let d = DistributionSpec::lognormal(0.0, 0.5).unwrap();
        let a = w(&[0.3, 1.7, 0.9]);
        let grid = linspace(0.5, 6.0, 30);
        for c in [0.25, 0.37, 3.0] {
            let lhs = mc_cdf(&d, &a.scaled(c).unwrap(), &grid, 50_000, 8).unwrap();
            let t_over: Vec<f64> = grid.iter().map(|t| t / c).collect();
            let rhs = mc_cdf(&d, &a, &t_over, 50_000, 8).unwrap();
            assert_eq!(lhs.values, rhs.values, "c = {c}");
        }
    }

    #[test]
    fn permuted_columns_within_noise() {
        let d = exp1();
        let grid = linspace(0.5, 8.0, 20);
        let x = mc_cdf(&d, &w(&[0.5, 1.0, 2.0]), &grid, 200_000, 3).unwrap();
        let y = mc_cdf(&d, &w(&[2.0, 0.5, 1.0]), &grid, 200_000, 3).unwrap();
        assert_ne!(x.values, y.values);
        for i in 0..grid.len() {
            let se = x.std_errors[i].hypot(y.std_errors[i]);
            assert!((x.values[i] - y.values[i]).abs() <= 4.0 * se + 1e-12);
        }
    }

    #[test]
    fn monotone_coupling() {
        let d = DistributionSpec::gamma(0.5, 1.0).unwrap();
        let grid = linspace(0.1, 5.0, 40);
        let base = mc_cdf(&d, &w(&[0.4, 1.0, 0.7]), &grid, 30_000, 17).unwrap();
        let bumped = mc_cdf(&d, &w(&[0.4, 1.3, 0.7]), &grid, 30_000, 17).unwrap();
        for (b, u) in base.values.iter().zip(&bumped.values) {
            assert!(u <= b);
        }
    }

    #[test]
    fn sample_matrix_independent_of_thread_count() {
        let d = DistributionSpec::gamma(2.0, 1.0).unwrap();
        let a = w(&[1.0, 0.5]);
        let mc = MonteCarlo::new(3 * BLOCK_SIZE + 17, 99).unwrap();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| weighted_sums(&d, &[a.values()], mc).unwrap());
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| weighted_sums(&d, &[a.values()], mc).unwrap());
        assert_eq!(one, many);
        assert_eq!(one[0].len(), 3 * BLOCK_SIZE + 17);
    }

    #[test]
    fn dominance_examples() {
        let grid = linspace(0.1, 10.0, 50);
        // Y1 + Y2 ~ Gamma(2, 1) for equal unit weights.
        let gamma2 = DistributionSpec::gamma(2.0, 1.0).unwrap();
        let ones = CdfCurve::exact(
            Method::ExactExpMixture,
            grid.clone(),
            grid.iter().map(|&t| gamma2.cdf(t)).collect(),
        );
        let spread = exact_exp_mixture_curve(&w(&[2.0, 0.5]), &grid).unwrap();
        let r = dominance_test(&ones, &spread, 0.0).unwrap();
        assert!(r.holds, "{r:?}");
        let i2 = grid.iter().position(|&t| (t - 2.0).abs() < 0.11).unwrap();
        let t2 = grid[i2];
        assert!(ones.values[i2] > spread.values[i2], "at t = {t2}");

        let same = dominance_test(&spread, &spread, 0.0).unwrap();
        assert!(same.holds);
        assert_eq!(same.worst_margin, 0.0);

        let at2_a = CdfCurve::exact(Method::ExactExpMixture, vec![2.0], vec![0.593_994]);
        let at2_b = CdfCurve::exact(Method::ExactExpMixture, vec![2.0], vec![0.515_599]);
        assert!(dominance_test(&at2_a, &at2_b, 4.0).unwrap().holds);
        let rev = dominance_test(&at2_b, &at2_a, 4.0).unwrap();
        assert!(!rev.holds);
        assert_eq!(rev.violating_t, Some(2.0));

        let other = CdfCurve::exact(Method::Quadrature, vec![3.0], vec![0.5]);
        assert!(matches!(
            dominance_test(&at2_a, &other, 4.0),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn compare_theorem1_exponential() {
        let mc = MonteCarlo::new(200_000, 42).unwrap();
        let r = compare_weighted_sums(
            &exp1(),
            &w(&[1.0, 1.0]),
            &w(&[2.0, 0.5]),
            PremiseMode::Thm1Log,
            &TGrid::default(),
            mc,
            DEFAULT_Z,
        )
        .unwrap();
        assert!(r.holds, "{r:?}");
        assert_eq!(r.direction, Direction::LeftLeqStRight);
    }

    #[test]
    fn compare_theorem2_weibull_against_quadrature() {
        let d = DistributionSpec::weibull(2.0).unwrap();
        let mode = PremiseMode::thm2(2.0).unwrap();
        let grid = linspace(0.1, 3.5, 50);
        let mc = MonteCarlo::new(200_000, 7).unwrap();
        let c = compare_weighted_sums_detailed(
            &d,
            &w(&[1.0, 1.0]),
            &w(&[2f64.sqrt(), 0.0]),
            mode,
            &TGrid::Explicit(grid.clone()),
            mc,
            DEFAULT_Z,
        )
        .unwrap();
        assert!(c.report.holds);
        assert_eq!(c.report.direction, Direction::RightLeqStLeft);
        // Pr(√2 Y ≤ t) = 1 - e^{-t²/2} dominates the quadrature curve of Y1 + Y2.
        let q = quad_cdf(&d, &w(&[1.0, 1.0]), &grid).unwrap();
        for (t, v) in grid.iter().zip(&q.values) {
            assert!(-(-t * t / 2.0f64).exp_m1() >= *v - 1e-10);
        }
    }

    #[test]
    fn permutation_gives_zero_differences() {
        let d = DistributionSpec::weibull(3.0).unwrap();
        let mc = MonteCarlo::new(50_000, 1).unwrap();
        for mode in [PremiseMode::Thm1Log, PremiseMode::thm2(3.0).unwrap()] {
            let r = compare_weighted_sums(
                &d,
                &w(&[0.5, 2.0, 1.0]),
                &w(&[2.0, 1.0, 0.5]),
                mode,
                &TGrid::default(),
                mc,
                DEFAULT_Z,
            )
            .unwrap();
            assert!(r.holds);
            assert!(r.differences.iter().all(|&x| x == 0.0));
        }
        let same = w(&[0.3, 1.2]);
        let r = compare_weighted_sums(
            &d,
            &same,
            &same,
            PremiseMode::Thm1Log,
            &TGrid::default(),
            mc,
            0.0,
        )
        .unwrap();
        assert!(r.differences.iter().all(|&x| x == 0.0));
        assert_eq!(r.worst_margin, 0.0);
    }

    #[test]
    fn compare_reports_failed_hypotheses() {
        let mc = MonteCarlo::new(10_000, 1).unwrap();
        let err = compare_weighted_sums(
            &exp1(),
            &w(&[1.0, 1.0]),
            &w(&[0.5, 1.5]),
            PremiseMode::Thm1Log,
            &TGrid::default(),
            mc,
            DEFAULT_Z,
        )
        .unwrap_err();
        match err {
            Error::Precondition { hypothesis, .. } => assert!(hypothesis.contains("Theorem 1")),
            other => panic!("{other:?}"),
        }
        let err = compare_weighted_sums(
            &DistributionSpec::gen_rayleigh(0.5).unwrap(),
            &w(&[1.0, 1.0]),
            &w(&[2f64.sqrt(), 0.0]),
            PremiseMode::thm2(2.0).unwrap(),
            &TGrid::default(),
            mc,
            DEFAULT_Z,
        )
        .unwrap_err();
        match err {
            Error::Precondition { hypothesis, .. } => assert!(hypothesis.contains("concave")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn theorem4_grid_is_positive() {
        let d = DistributionSpec::normal0(1.0).unwrap();
        let mc = MonteCarlo::new(100_000, 4).unwrap();
        let c = compare_weighted_sums_detailed(
            &d,
            &w(&[1.0, 1.0]),
            &w(&[1.5, 0.5]),
            PremiseMode::Thm4Identity,
            &TGrid::default(),
            mc,
            DEFAULT_Z,
        )
        .unwrap();
        assert!(c.left.t_grid.iter().all(|&t| t > 0.0));
        assert!(c.report.holds);
        let err = compare_weighted_sums(
            &d,
            &w(&[1.0, 1.0]),
            &w(&[1.5, 0.5]),
            PremiseMode::Thm4Identity,
            &TGrid::Explicit(vec![-1.0, 0.0]),
            mc,
            DEFAULT_Z,
        );
        assert!(err.is_err());
    }

    #[test]
    fn capacity_examples() {
        let (v, se) = expected_log_capacity(&exp1(), &w(&[0.0, 0.0]), 1000, 1).unwrap();
        assert_eq!((v, se), (0.0, 0.0));
        let (ea, sa) = expected_log_capacity(&exp1(), &w(&[1.0, 1.0]), 200_000, 9).unwrap();
        let (eb, sb) = expected_log_capacity(&exp1(), &w(&[2.0, 0.5]), 200_000, 9).unwrap();
        // (1,1) ≤_st (2,0.5), and ln(1+x) is increasing.
        assert!(ea <= eb + 4.0 * sa.hypot(sb));
        assert!(eb - ea > 4.0 * sa.hypot(sb), "gap {ea} vs {eb}");
        assert!(expected_log_capacity(
            &DistributionSpec::normal0(1.0).unwrap(),
            &w(&[1.0]),
            1000,
            1
        )
        .is_err());
    }

    #[test]
    fn grid_parsing() {
        assert_eq!("auto".parse::<TGrid>().unwrap(), TGrid::Auto(50));
        match "0:2:5".parse::<TGrid>().unwrap() {
            TGrid::Explicit(v) => assert_eq!(v, vec![0.0, 0.5, 1.0, 1.5, 2.0]),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            "0:x:5".parse::<TGrid>(),
            Err(Error::Parse { column: 3, .. })
        ));
        assert!("0:2:0".parse::<TGrid>().is_err());
        assert!("3:2:4".parse::<TGrid>().is_err());
    }

    #[test]
    fn curve_json_and_csv() {
        let c = quad_cdf(&exp1(), &w(&[0.5, 1.5]), &[1.0, 2.0]).unwrap();
        let json = serde_json::to_value(&c).unwrap();
        for key in ["t", "value", "se", "method", "seed"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert_eq!(json["method"], "quadrature");
        let back: CdfCurve = serde_json::from_value(json).unwrap();
        assert_eq!(back, c);
        assert!(c.to_csv().starts_with("t,value,se\n1,"));
    }
}
