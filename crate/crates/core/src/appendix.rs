//! Numerical checks of the objects behind the monotonicity arguments: the
//! two-variable reductions `h(β)`, the level-set map `y ↦ ỹ` of
//! `L(y) = β^{p/q} y^p + (1-β)^{p/q} (y₁-y)^p`, its derivative, the
//! divided difference `Q_α`, and the inequalities they satisfy.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{
    check_theorem1_condition, check_theorem2_condition, linspace, Law, DEFAULT_GRID_SIZE,
};
use crate::error::{Error, Result};
use crate::majorization::{conjugate, majorizes, WeightVector};
use crate::sum_engine::quad_cdf;
use crate::DistributionSpec;

/// Tolerance for exact inequalities, after normalising by `max(1, |lhs|, |rhs|)`.
pub const TOL_CLAIM: f64 = 1e-9;
/// Tolerance for monotonicity of quadrature-evaluated `h(β)`.
pub const TOL_QUADRATURE: f64 = 1e-7;
pub const DEFAULT_Y_RESOLUTION: usize = 512;
pub const DEFAULT_BETAS: [f64; 6] = [0.5 + 1e-6, 0.55, 0.6, 0.75, 0.9, 0.99];
pub const DEFAULT_PS: [f64; 4] = [1.5, 2.0, 3.0, 5.0];
pub const DEFAULT_TS: [f64; 4] = [0.5, 1.0, 2.0, 5.0];
/// β values for the kernel of the log-concave case, which lives on `(0, 1]`.
pub const KERNEL_BETAS: [f64; 6] = [0.05, 0.25, 0.5, 0.75, 0.9, 1.0];

const BISECTION_ITERS: usize = 200;
const BRACKET_REL: f64 = 1e-12;
const FD_SWITCH_REL: f64 = 1e-6;
const FD_STEP_REL: f64 = 1e-6;

/// `(p, q, β, t)` and the derived `y₀ < y₁`, `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappingContext {
    pub p: f64,
    pub q: f64,
    pub beta: f64,
    pub t: f64,
    pub y0: f64,
    pub y1: f64,
    pub delta: f64,
}

impl MappingContext {
    pub fn new(p: f64, beta: f64, t: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::OutOfRange {
                name: "p",
                value: p,
                range: "(1, inf)".into(),
            });
        }
        if !(0.5..1.0).contains(&beta) {
            return Err(Error::OutOfRange {
                name: "beta",
                value: beta,
                range: "[0.5, 1)".into(),
            });
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::OutOfRange {
                name: "t",
                value: t,
                range: "(0, inf)".into(),
            });
        }
        let q = conjugate(p);
        Ok(Self {
            p,
            q,
            beta,
            t,
            y0: t * (1.0 - beta).powf(1.0 / p),
            y1: t * (1.0 - beta).powf(-1.0 / q),
            delta: (2.0 - p).min(0.0),
        })
    }

    fn l(&self, y: f64) -> f64 {
        let r = self.p / self.q;
        self.beta.powf(r) * y.powf(self.p)
            + (1.0 - self.beta).powf(r) * (self.y1 - y).max(0.0).powf(self.p)
    }

    /// `L'(y)`; vanishes at `y₀`.
    pub fn l_prime(&self, y: f64) -> f64 {
        let (p, r) = (self.p, self.p / self.q);
        p * self.beta.powf(r) * y.powf(p - 1.0)
            - p * (1.0 - self.beta).powf(r) * (self.y1 - y).powf(p - 1.0)
    }

    fn x(&self, y: f64) -> f64 {
        (1.0 / self.beta - 1.0).powf(1.0 / self.q) * (self.y1 - y)
    }

    fn check_open_lower(&self, y: f64) -> Result<()> {
        if y > 0.0 && y < self.y0 {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                name: "y",
                value: y,
                range: format!("(0, {})", self.y0),
            })
        }
    }

    /// Root of `L(ỹ) = L(y)` on the increasing branch, without range checks.
    fn tilde(&self, y: f64) -> f64 {
        let target = self.l(y);
        let (mut lo, mut hi) = (self.y0 * (1.0 + BRACKET_REL), self.y1 * (1.0 - BRACKET_REL));
        if self.l(lo) >= target {
            return lo;
        }
        if self.l(hi) <= target {
            return hi;
        }
        for _ in 0..BISECTION_ITERS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.l(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if (self.l(lo) - target).abs() <= (self.l(hi) - target).abs() {
            lo
        } else {
            hi
        }
    }

    fn derivative_formula(&self, y: f64, yt: f64) -> f64 {
        let r = self.p / self.q;
        let b = self.beta;
        let num = (b * y).powf(r) - ((1.0 - b) * (self.y1 - y)).powf(r);
        let den = (b * yt).powf(r) - ((1.0 - b) * (self.y1 - yt)).powf(r);
        num / den
    }

    fn derivative_fd(&self, y: f64) -> f64 {
        let h = (FD_STEP_REL * self.y0)
            .min(0.5 * y)
            .min(0.5 * (self.y0 - y));
        (self.tilde(y + h) - self.tilde(y - h)) / (2.0 * h)
    }
}

/// `L(y)` on `[0, y₁]`.
pub fn big_l(ctx: &MappingContext, y: f64) -> Result<f64> {
    if !(0.0..=ctx.y1).contains(&y) {
        return Err(Error::OutOfRange {
            name: "y",
            value: y,
            range: format!("[0, {}]", ctx.y1),
        });
    }
    Ok(ctx.l(y))
}

/// `x(y) = (β⁻¹ - 1)^{1/q} (y₁ - y)` on `(0, y₁)`.
pub fn x_of_y(ctx: &MappingContext, y: f64) -> Result<f64> {
    if !(y > 0.0 && y < ctx.y1) {
        return Err(Error::OutOfRange {
            name: "y",
            value: y,
            range: format!("(0, {})", ctx.y1),
        });
    }
    Ok(ctx.x(y))
}

/// The partner `ỹ ∈ (y₀, y₁)` with `L(ỹ) = L(y)`, for `y ∈ (0, y₀)`.
pub fn tilde_map(ctx: &MappingContext, y: f64) -> Result<f64> {
    ctx.check_open_lower(y)?;
    Ok(ctx.tilde(y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapDerivative {
    pub value: f64,
    /// Set when `y` is too close to `y₀` for the closed form and a central
    /// difference of the map was used instead.
    pub finite_difference: bool,
}

/// `dỹ/dy` from the implicit-function formula.
pub fn tilde_derivative(ctx: &MappingContext, y: f64) -> Result<MapDerivative> {
    ctx.check_open_lower(y)?;
    if ctx.y0 - y < FD_SWITCH_REL * ctx.y0 {
        return Ok(MapDerivative {
            value: ctx.derivative_fd(y),
            finite_difference: true,
        });
    }
    Ok(MapDerivative {
        value: ctx.derivative_formula(y, ctx.tilde(y)),
        finite_difference: false,
    })
}

/// Central finite difference of [`tilde_map`], step `10⁻⁶·y₀` (shrunk near the ends).
pub fn tilde_derivative_fd(ctx: &MappingContext, y: f64) -> Result<f64> {
    ctx.check_open_lower(y)?;
    Ok(ctx.derivative_fd(y))
}

/// Divided difference `(u^α - v^α)/(u - v)`, `α u^{α-1}` on the diagonal.
pub fn q_alpha(alpha: f64, u: f64, v: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            range: "(0, inf)".into(),
        });
    }
    for (name, x) in [("u", u), ("v", v)] {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::OutOfRange {
                name,
                value: x,
                range: "(0, inf)".into(),
            });
        }
    }
    if (u - v).abs() <= 1e-12 * u.max(v) {
        return Ok(alpha * u.powf(alpha - 1.0));
    }
    // v^{α-1} · expm1(α r)/expm1(r) with r = ln(u/v): no cancellation near u = v.
    let r = ((u - v) / v).ln_1p();
    Ok(v.powf(alpha - 1.0) * (alpha * r).exp_m1() / r.exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClaimId {
    Thm1Kernel,
    HBetaMonotone1,
    HBetaMonotone2,
    Claim1,
    Claim2,
    Claim3uv1,
    Claim3uv2,
    KeyIneq,
    QAlphaMono,
    HPrimeIntegrand,
    MajorizationChain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub claim_id: ClaimId,
    pub grid: String,
    pub holds: bool,
    pub worst_margin: f64,
    pub worst_point: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub points_checked: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Running minimum of normalised margins.
#[derive(Debug, Clone)]
struct Tracker {
    worst: f64,
    point: Vec<(&'static str, f64)>,
    label: Option<String>,
    count: usize,
}

impl Tracker {
    fn new() -> Self {
        Self {
            worst: f64::INFINITY,
            point: Vec::new(),
            label: None,
            count: 0,
        }
    }

    fn push(&mut self, margin: f64, point: &[(&'static str, f64)]) {
        self.count += 1;
        // NaN is treated as a failure.
        let m = if margin.is_nan() {
            f64::NEG_INFINITY
        } else {
            margin
        };
        if m < self.worst {
            self.worst = m;
            self.point = point.to_vec();
        }
    }

    fn merge(mut self, other: Tracker) -> Tracker {
        self.count += other.count;
        if other.worst < self.worst {
            self.worst = other.worst;
            self.point = other.point;
            self.label = other.label;
        }
        self
    }

    fn labelled(mut self, label: &str) -> Tracker {
        if self.label.is_none() && self.count > 0 {
            self.label = Some(label.to_string());
        }
        self
    }

    fn report(self, claim_id: ClaimId, grid: String, tolerance: f64) -> ClaimReport {
        let mut notes = Vec::new();
        if let Some(l) = &self.label {
            notes.push(format!("worst case at {l}"));
        }
        if self.count == 0 {
            notes.push("no admissible grid points".into());
        }
        let worst = if self.count == 0 { 0.0 } else { self.worst };
        ClaimReport {
            claim_id,
            grid,
            holds: worst >= -tolerance,
            worst_margin: worst,
            worst_point: self
                .point
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            tolerance,
            points_checked: self.count,
            notes,
        }
    }
}

/// `(lhs - rhs) / max(1, |lhs|, |rhs|)`.
fn margin(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs) / 1f64.max(lhs.abs()).max(rhs.abs())
}

/// Interior points `y₀·k/(n+1)`, `k = 1..=n`.
fn lower_grid(ctx: &MappingContext, n: usize) -> impl Iterator<Item = f64> + '_ {
    (1..=n).map(move |k| ctx.y0 * k as f64 / (n + 1) as f64)
}

fn ctx_point(ctx: &MappingContext, y: f64) -> [(&'static str, f64); 4] {
    [("p", ctx.p), ("beta", ctx.beta), ("t", ctx.t), ("y", y)]
}

fn ctx_grid(ctx: &MappingContext, n: usize) -> String {
    format!(
        "p={}, beta={}, t={}, {n} points in (0, y0={})",
        ctx.p, ctx.beta, ctx.t, ctx.y0
    )
}

fn claim1_tracker(ctx: &MappingContext, n: usize) -> Tracker {
    let mut tr = Tracker::new();
    let scale = 1f64.max(ctx.y1.powf(ctx.p));
    let ends = margin(ctx.l(ctx.y1), ctx.l(0.0));
    tr.push(ends, &ctx_point(ctx, 0.0));
    for y in lower_grid(ctx, n) {
        let yt = ctx.tilde(y);
        let m = if yt > ctx.y0 && yt < ctx.y1 {
            let map = |z: f64| z.powf(ctx.p) + ctx.x(z).powf(ctx.p);
            -(map(y) - map(yt)).abs() / scale
        } else {
            -1.0
        };
        tr.push(m, &ctx_point(ctx, y));
    }
    tr
}

/// Existence of `ỹ ∈ (y₀, y₁)` and the level-set identity
/// `y^p + x^p(y) = ỹ^p + x^p(ỹ)`, plus `L(0) ≤ L(y₁)`.
pub fn verify_claim1(ctx: &MappingContext, y_resolution: usize) -> ClaimReport {
    claim1_tracker(ctx, y_resolution).report(
        ClaimId::Claim1,
        ctx_grid(ctx, y_resolution),
        TOL_CLAIM,
    )
}

fn claim2_tracker(ctx: &MappingContext, n: usize) -> (Tracker, usize) {
    let mut tr = Tracker::new();
    let mut fd = 0;
    for y in lower_grid(ctx, n) {
        let yt = ctx.tilde(y);
        let d = tilde_derivative(ctx, y).expect("grid lies in (0, y0)");
        fd += d.finite_difference as usize;
        let ratio = (ctx.x(yt) * yt / (ctx.x(y) * y)).powf(ctx.delta);
        let rhs = ratio * (ctx.y0 - y) / (yt - ctx.y0);
        tr.push(margin(d.value.abs(), rhs), &ctx_point(ctx, y));
    }
    (tr, fd)
}

/// `|dỹ/dy| ≥ (x(ỹ)ỹ / (x(y)y))^δ · (y₀ - y)/(ỹ - y₀)`.
pub fn verify_claim2(ctx: &MappingContext, y_resolution: usize) -> ClaimReport {
    let (tr, fd) = claim2_tracker(ctx, y_resolution);
    let mut r = tr.report(ClaimId::Claim2, ctx_grid(ctx, y_resolution), TOL_CLAIM);
    if fd > 0 {
        r.notes
            .push(format!("{fd} derivatives by finite differences"));
    }
    r
}

fn claim3_trackers(ctx: &MappingContext, n: usize) -> [Tracker; 3] {
    let (mut uv1, mut uv2, mut key) = (Tracker::new(), Tracker::new(), Tracker::new());
    let b = ctx.beta;
    for y in lower_grid(ctx, n) {
        let yt = ctx.tilde(y);
        let pt = ctx_point(ctx, y);
        uv1.push(margin(b * yt, (1.0 - b) * (ctx.y1 - y)), &pt);
        uv2.push(margin((1.0 - b) * (ctx.y1 - yt), b * y), &pt);
        let z = ((1.0 / b - 1.0) * (ctx.y1 - y)).clamp(0.0, ctx.y1);
        key.push(margin(ctx.l(y), ctx.l(z)), &pt);
    }
    [uv1, uv2, key]
}

/// `βỹ ≥ (1-β)(y₁-y)`, `βy ≤ (1-β)(y₁-ỹ)` and `L((β⁻¹-1)(y₁-y)) ≤ L(y)`.
pub fn verify_claim3(ctx: &MappingContext, y_resolution: usize) -> [ClaimReport; 3] {
    let g = ctx_grid(ctx, y_resolution);
    let [a, b, c] = claim3_trackers(ctx, y_resolution);
    [
        a.report(ClaimId::Claim3uv1, g.clone(), TOL_CLAIM),
        b.report(ClaimId::Claim3uv2, g.clone(), TOL_CLAIM),
        c.report(ClaimId::KeyIneq, g, TOL_CLAIM),
    ]
}

fn chain_tracker(ctx: &MappingContext, n: usize) -> Tracker {
    let mut tr = Tracker::new();
    for y in lower_grid(ctx, n) {
        let yt = ctx.tilde(y);
        let pw = |z: f64| [z.powf(ctx.p), ctx.x(z).powf(ctx.p)];
        let (small, big) = (pw(yt), pw(y));
        // Totals agree only up to the map residual; rescale the smaller
        // vector onto the larger total before testing the order.
        let s: f64 = small.iter().sum();
        let b_total: f64 = big.iter().sum();
        let small = [small[0] * b_total / s, small[1] * b_total / s];
        let ok = majorizes(&big, &small).unwrap_or(false);
        // Margin: gap between the larger coordinates, normalised.
        let m = margin(big[0].max(big[1]), small[0].max(small[1]));
        tr.push(
            if ok { m.max(0.0) } else { m.min(-1.0) },
            &ctx_point(ctx, y),
        );
    }
    tr
}

/// `(ỹ^p, x^p(ỹ)) ≺ (y^p, x^p(y))` through the majorization predicate.
pub fn verify_majorization_chain(ctx: &MappingContext, y_resolution: usize) -> ClaimReport {
    chain_tracker(ctx, y_resolution).report(
        ClaimId::MajorizationChain,
        ctx_grid(ctx, y_resolution),
        TOL_CLAIM,
    )
}

fn hprime_tracker<L: Law + ?Sized>(ctx: &MappingContext, d: &L, n: usize) -> Tracker {
    let mut tr = Tracker::new();
    for y in lower_grid(ctx, n) {
        let yt = ctx.tilde(y);
        let (xy, xt) = (ctx.x(y), ctx.x(yt));
        let lhs = ctx.delta * (xt * yt).ln() + d.ln_pdf(xt) + d.ln_pdf(yt);
        let rhs = ctx.delta * (xy * y).ln() + d.ln_pdf(xy) + d.ln_pdf(y);
        if lhs.is_finite() && rhs.is_finite() {
            tr.push(margin(lhs, rhs), &ctx_point(ctx, y));
        }
    }
    tr
}

fn require_thm2(d: &DistributionSpec, p: f64) -> Result<()> {
    let c = check_theorem2_condition(d, p, DEFAULT_GRID_SIZE);
    if c.holds {
        Ok(())
    } else {
        Err(Error::precondition(
            format!("Theorem 2 condition (p = {p})"),
            format!("{d}: worst concavity margin {:e}", c.worst_violation),
        ))
    }
}

fn require_thm1(d: &DistributionSpec) -> Result<()> {
    let c = check_theorem1_condition(d, DEFAULT_GRID_SIZE);
    if c.holds {
        Ok(())
    } else {
        Err(Error::precondition(
            "Theorem 1 condition (f(e^x) log-concave)",
            format!("{d}: worst concavity margin {:e}", c.worst_violation),
        ))
    }
}

/// `(x(ỹ)ỹ)^δ f(x(ỹ)) f(ỹ) ≥ (x(y)y)^δ f(x(y)) f(y)`, compared in log space.
pub fn hprime_integrand_check(
    ctx: &MappingContext,
    d: &DistributionSpec,
    y_resolution: usize,
) -> Result<ClaimReport> {
    require_thm2(d, ctx.p)?;
    Ok(hprime_tracker(ctx, d, y_resolution)
        .labelled(&d.to_string())
        .report(
            ClaimId::HPrimeIntegrand,
            format!("{d}; {}", ctx_grid(ctx, y_resolution)),
            TOL_CLAIM,
        ))
}

fn kernel_tracker<L: Law + ?Sized>(d: &L, betas: &[f64], ts: &[f64], n: usize) -> Tracker {
    let mut tr = Tracker::new();
    for &b in betas {
        for &t in ts {
            for k in 1..=n {
                let y = t / (2.0 * b) * k as f64 / (n + 1) as f64;
                let lhs = d.ln_pdf(t * b - b * b * y) + d.ln_pdf(y);
                let rhs = d.ln_pdf(b * b * y) + d.ln_pdf(t / b - y);
                if lhs.is_finite() && rhs.is_finite() {
                    tr.push(margin(lhs, rhs), &[("beta", b), ("t", t), ("y", y)]);
                }
            }
        }
    }
    tr
}

/// `f(tβ - β²y) f(y) ≥ f(β²y) f(t/β - y)` on `0 < y < t/(2β)`, in log space;
/// points where a density vanishes are skipped.
pub fn verify_thm1_kernel(
    d: &DistributionSpec,
    beta_grid: &[f64],
    t_grid: &[f64],
    y_resolution: usize,
) -> Result<ClaimReport> {
    require_thm1(d)?;
    if let Some(&b) = beta_grid.iter().find(|b| !(**b > 0.0 && **b <= 1.0)) {
        return Err(Error::OutOfRange {
            name: "beta",
            value: b,
            range: "(0, 1]".into(),
        });
    }
    Ok(kernel_tracker(d, beta_grid, t_grid, y_resolution)
        .labelled(&d.to_string())
        .report(
            ClaimId::Thm1Kernel,
            format!(
                "{d}; beta in {beta_grid:?}, t in {t_grid:?}, {y_resolution} points in (0, t/(2 beta))"
            ),
            TOL_CLAIM,
        ))
}

/// Monotonicity of `Q_α` in its first argument (decreasing for `α ≤ 1`,
/// increasing for `α > 1`), over all ordered pairs of the grid. `Q_α` is
/// symmetric, so this covers the second argument too.
pub fn verify_qalpha_monotonicity(alpha_grid: &[f64], uv_grid: &[f64]) -> Result<ClaimReport> {
    let mut uv = uv_grid.to_vec();
    uv.sort_by(f64::total_cmp);
    uv.dedup();
    let mut tr = Tracker::new();
    for &alpha in alpha_grid {
        let sign = if alpha > 1.0 { 1.0 } else { -1.0 };
        for &v in &uv {
            let row: Vec<f64> = uv
                .iter()
                .map(|&u| q_alpha(alpha, u, v))
                .collect::<Result<_>>()?;
            for i in 0..row.len() {
                for j in i + 1..row.len() {
                    let (lo, hi) = if sign > 0.0 {
                        (row[i], row[j])
                    } else {
                        (row[j], row[i])
                    };
                    tr.push(
                        margin(hi, lo),
                        &[("alpha", alpha), ("u1", uv[i]), ("u2", uv[j]), ("v", v)],
                    );
                }
            }
        }
    }
    Ok(tr.report(
        ClaimId::QAlphaMono,
        format!("alpha in {alpha_grid:?}, {} points per argument", uv.len()),
        TOL_CLAIM,
    ))
}

/// `h(β) = Pr(β⁻¹ Y₁ + β Y₂ ≤ t)` for `β ∈ (0, 1]`.
pub fn h_beta_thm1(d: &DistributionSpec, t: f64, beta: f64) -> Result<f64> {
    require_thm1(d)?;
    h1(d, t, beta)
}

fn h1(d: &DistributionSpec, t: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::OutOfRange {
            name: "beta",
            value: beta,
            range: "(0, 1]".into(),
        });
    }
    let w = WeightVector::new(vec![1.0 / beta, beta])?;
    Ok(quad_cdf(d, &w, &[t])?.values[0])
}

/// `h(β) = Pr(β^{1/q} Y₁ + (1-β)^{1/q} Y₂ ≤ t)` for `β ∈ [1/2, 1)`.
pub fn h_beta_thm2(d: &DistributionSpec, p: f64, t: f64, beta: f64) -> Result<f64> {
    require_thm2(d, p)?;
    h2(d, p, t, beta)
}

fn h2(d: &DistributionSpec, p: f64, t: f64, beta: f64) -> Result<f64> {
    if !(0.5..1.0).contains(&beta) {
        return Err(Error::OutOfRange {
            name: "beta",
            value: beta,
            range: "[0.5, 1)".into(),
        });
    }
    let q = conjugate(p);
    let w = WeightVector::new(vec![beta.powf(1.0 / q), (1.0 - beta).powf(1.0 / q)])?;
    Ok(quad_cdf(d, &w, &[t])?.values[0])
}

fn monotone_tracker(values: &[(f64, f64)], extra: &[(&'static str, f64)], tr: &mut Tracker) {
    for w in values.windows(2) {
        let mut pt = extra.to_vec();
        pt.push(("beta", w[1].0));
        tr.push(w[1].1 - w[0].1, &pt);
    }
}

/// 20-point β grids used for the `h(β)` monotonicity checks.
pub fn default_h1_betas() -> Vec<f64> {
    (1..=20).map(|k| k as f64 / 20.0).collect()
}

pub fn default_h2_betas() -> Vec<f64> {
    linspace(0.5, 0.99, 20)
}

/// `h` nondecreasing on `(0, 1]` for the log-concave-in-log case.
pub fn verify_h_beta_thm1(
    d: &DistributionSpec,
    t_grid: &[f64],
    beta_grid: &[f64],
) -> Result<ClaimReport> {
    require_thm1(d)?;
    let mut betas = beta_grid.to_vec();
    betas.sort_by(f64::total_cmp);
    let mut tr = Tracker::new();
    for &t in t_grid {
        let vals: Vec<(f64, f64)> = betas
            .iter()
            .map(|&b| h1(d, t, b).map(|h| (b, h)))
            .collect::<Result<_>>()?;
        monotone_tracker(&vals, &[("t", t)], &mut tr);
    }
    Ok(tr.labelled(&d.to_string()).report(
        ClaimId::HBetaMonotone1,
        format!("{d}; t in {t_grid:?}, beta in {betas:?}"),
        TOL_QUADRATURE,
    ))
}

/// `h` nondecreasing on `[1/2, 1)` under the `p`-condition.
pub fn verify_h_beta_thm2(
    d: &DistributionSpec,
    p: f64,
    t_grid: &[f64],
    beta_grid: &[f64],
) -> Result<ClaimReport> {
    require_thm2(d, p)?;
    let mut betas = beta_grid.to_vec();
    betas.sort_by(f64::total_cmp);
    let mut tr = Tracker::new();
    for &t in t_grid {
        let vals: Vec<(f64, f64)> = betas
            .iter()
            .map(|&b| h2(d, p, t, b).map(|h| (b, h)))
            .collect::<Result<_>>()?;
        monotone_tracker(&vals, &[("p", p), ("t", t)], &mut tr);
    }
    Ok(tr.labelled(&d.to_string()).report(
        ClaimId::HBetaMonotone2,
        format!("{d}; p = {p}, t in {t_grid:?}, beta in {betas:?}"),
        TOL_QUADRATURE,
    ))
}

/// Parameters for a full sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixGrid {
    pub ps: Vec<f64>,
    pub betas: Vec<f64>,
    pub ts: Vec<f64>,
    pub y_resolution: usize,
    pub kernel_betas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub uv_grid: Vec<f64>,
    /// Laws for the log-concave-in-log checks; those failing the condition are skipped.
    pub thm1_laws: Vec<DistributionSpec>,
    /// Laws for the `p`-condition checks; each is used at the `p` values it satisfies.
    pub thm2_laws: Vec<DistributionSpec>,
}

impl Default for AppendixGrid {
    fn default() -> Self {
        let spec = |s: &str| s.parse::<DistributionSpec>().expect("valid default law");
        Self {
            ps: DEFAULT_PS.to_vec(),
            betas: DEFAULT_BETAS.to_vec(),
            ts: DEFAULT_TS.to_vec(),
            y_resolution: DEFAULT_Y_RESOLUTION,
            kernel_betas: KERNEL_BETAS.to_vec(),
            alphas: vec![0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 4.0],
            uv_grid: (0..40).map(|k| 0.05 * 1.17f64.powi(k)).collect(),
            thm1_laws: [
                "uniform:s=1",
                "gamma:alpha=2,beta=1",
                "gamma:alpha=0.5,beta=1",
                "gamma:alpha=1,beta=1",
                "lognormal:mu=0,sigma=1",
                "weibull:p=2",
                "genrayleigh:nu=2",
            ]
            .map(spec)
            .to_vec(),
            thm2_laws: [
                "weibull:p=1.5",
                "weibull:p=2",
                "weibull:p=3",
                "weibull:p=5",
                "weibull:p=6",
                "genrayleigh:nu=1",
                "genrayleigh:nu=2",
            ]
            .map(spec)
            .to_vec(),
        }
    }
}

impl AppendixGrid {
    /// A single mapping context, keeping the other defaults.
    pub fn single(p: f64, beta: f64, t: f64) -> Result<Self> {
        MappingContext::new(p, beta, t)?;
        Ok(Self {
            ps: vec![p],
            betas: vec![beta],
            ts: vec![t],
            ..Self::default()
        })
    }

    fn contexts(&self) -> Result<Vec<MappingContext>> {
        let mut out = Vec::new();
        for &p in &self.ps {
            for &b in &self.betas {
                for &t in &self.ts {
                    out.push(MappingContext::new(p, b, t)?);
                }
            }
        }
        Ok(out)
    }
}

/// Runs every check over the grid, one report per claim.
pub fn verify_all(grid: &AppendixGrid) -> Result<Vec<ClaimReport>> {
    let ctxs = grid.contexts()?;
    let n = grid.y_resolution;
    let sweep = |f: &(dyn Fn(&MappingContext) -> Tracker + Sync)| {
        ctxs.par_iter().map(f).reduce(Tracker::new, Tracker::merge)
    };
    let ctx_desc = format!(
        "p in {:?}, beta in {:?}, t in {:?}, {n} points in (0, y0)",
        grid.ps, grid.betas, grid.ts
    );

    let thm1_laws: Vec<&DistributionSpec> = grid
        .thm1_laws
        .iter()
        .filter(|d| check_theorem1_condition(*d, DEFAULT_GRID_SIZE).holds)
        .collect();
    let thm2_pairs: Vec<(&DistributionSpec, f64)> = grid
        .ps
        .iter()
        .flat_map(|&p| grid.thm2_laws.iter().map(move |d| (d, p)))
        .filter(|(d, p)| check_theorem2_condition(*d, *p, DEFAULT_GRID_SIZE).holds)
        .collect();
    let names = |v: Vec<String>| v.join(", ");

    let mut reports = Vec::new();

    let kernel = thm1_laws
        .par_iter()
        .map(|d| kernel_tracker(*d, &grid.kernel_betas, &grid.ts, n).labelled(&d.to_string()))
        .reduce(Tracker::new, Tracker::merge);
    reports.push(kernel.report(
        ClaimId::Thm1Kernel,
        format!(
            "laws [{}]; beta in {:?}, t in {:?}, {n} points in (0, t/(2 beta))",
            names(thm1_laws.iter().map(|d| d.to_string()).collect()),
            grid.kernel_betas,
            grid.ts
        ),
        TOL_CLAIM,
    ));

    let h1_betas = default_h1_betas();
    let h1 = thm1_laws
        .par_iter()
        .map(|d| verify_h_beta_thm1(d, &grid.ts, &h1_betas))
        .collect::<Result<Vec<_>>>()?;
    reports.push(worst_of(ClaimId::HBetaMonotone1, h1, TOL_QUADRATURE));

    let h2_betas = default_h2_betas();
    let h2 = thm2_pairs
        .par_iter()
        .map(|(d, p)| verify_h_beta_thm2(d, *p, &grid.ts, &h2_betas))
        .collect::<Result<Vec<_>>>()?;
    reports.push(worst_of(ClaimId::HBetaMonotone2, h2, TOL_QUADRATURE));

    reports.push(sweep(&|c| claim1_tracker(c, n)).report(
        ClaimId::Claim1,
        ctx_desc.clone(),
        TOL_CLAIM,
    ));

    let claim2 = ctxs
        .par_iter()
        .map(|c| claim2_tracker(c, n))
        .reduce(|| (Tracker::new(), 0), |a, b| (a.0.merge(b.0), a.1 + b.1));
    let mut r = claim2
        .0
        .report(ClaimId::Claim2, ctx_desc.clone(), TOL_CLAIM);
    if claim2.1 > 0 {
        r.notes
            .push(format!("{} derivatives by finite differences", claim2.1));
    }
    reports.push(r);

    for (k, id) in [ClaimId::Claim3uv1, ClaimId::Claim3uv2, ClaimId::KeyIneq]
        .into_iter()
        .enumerate()
    {
        let tr = sweep(&|c| claim3_trackers(c, n)[k].clone());
        reports.push(tr.report(id, ctx_desc.clone(), TOL_CLAIM));
    }

    reports.push(verify_qalpha_monotonicity(&grid.alphas, &grid.uv_grid)?);

    let hp = ctxs
        .par_iter()
        .flat_map_iter(|c| {
            thm2_pairs
                .iter()
                .filter(move |(_, p)| *p == c.p)
                .map(move |(d, _)| hprime_tracker(c, *d, n).labelled(&d.to_string()))
        })
        .reduce(Tracker::new, Tracker::merge);
    reports.push(hp.report(
        ClaimId::HPrimeIntegrand,
        format!(
            "(law, p) in [{}]; {ctx_desc}",
            names(thm2_pairs.iter().map(|(d, p)| format!("({d}, {p})")).collect())
        ),
        TOL_CLAIM,
    ));

    reports.push(sweep(&|c| chain_tracker(c, n)).report(
        ClaimId::MajorizationChain,
        ctx_desc,
        TOL_CLAIM,
    ));
    Ok(reports)
}

fn worst_of(id: ClaimId, reports: Vec<ClaimReport>, tolerance: f64) -> ClaimReport {
    let grid = reports
        .iter()
        .map(|r| r.grid.as_str())
        .collect::<Vec<_>>()
        .join(" | ");
    let points = reports.iter().map(|r| r.points_checked).sum();
    let worst = reports
        .into_iter()
        .min_by(|a, b| a.worst_margin.total_cmp(&b.worst_margin));
    match worst {
        Some(mut r) => {
            r.grid = grid;
            r.points_checked = points;
            r
        }
        None => Tracker::new().report(id, grid, tolerance),
    }
}
