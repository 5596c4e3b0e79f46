//! Majorization predicates, the weight transforms under which each ordering
//! result is stated, and a T-transform generator of random premise pairs.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::parse::{number_list, Tagged};
use crate::rng::SeededStream;

/// Non-negative weights `(a_1, …, a_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("weight vector is empty".into()));
        }
        if let Some((i, &v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidParameter(format!(
                "weight {i} is {v}; weights must be finite and >= 0"
            )));
        }
        Ok(WeightVector(values))
    }

    /// `n` copies of `c`.
    pub fn constant(c: f64, n: usize) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * c).collect())
    }

    /// Weights sorted in decreasing order (ties keep index order).
    pub fn sorted_desc(&self) -> Self {
        let mut v = self.0.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        WeightVector(v)
    }

    fn require_positive(&self) -> Result<()> {
        match self.0.iter().position(|&v| v <= 0.0) {
            Some(index) => Err(Error::NonPositiveWeight {
                index,
                value: self.0[index],
            }),
            None => Ok(()),
        }
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;
    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

impl FromStr for WeightVector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::new(number_list(s)?)
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// The transform under which a result's majorization premise is stated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PremiseMode {
    /// `log a ≺ log b`.
    Thm1Log,
    /// `a^q ≺ b^q` with `q = p/(p-1) > 1`.
    Thm2Power { q: f64 },
    /// `a^q ≺ b^q` with `q = p/(p-1) < 0`, i.e. `0 < p < 1`.
    KrPower { q: f64 },
    /// `a ≺ b` for symmetric summands.
    Thm4Identity,
}

/// Conjugate exponent: `1/p + 1/q = 1`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

impl PremiseMode {
    pub fn thm2(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::OutOfRange {
                name: "p",
                value: p,
                range: "(1, inf)".into(),
            });
        }
        Ok(PremiseMode::Thm2Power { q: conjugate(p) })
    }

    pub fn kr(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::OutOfRange {
                name: "p",
                value: p,
                range: "(0, 1)".into(),
            });
        }
        Ok(PremiseMode::KrPower { q: conjugate(p) })
    }

    /// The exponent `p` on the summands, where the mode has one.
    pub fn p(&self) -> Option<f64> {
        match *self {
            PremiseMode::Thm2Power { q } | PremiseMode::KrPower { q } => Some(conjugate(q)),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PremiseMode::Thm1Log => "thm1",
            PremiseMode::Thm2Power { .. } => "thm2",
            PremiseMode::KrPower { .. } => "kr",
            PremiseMode::Thm4Identity => "thm4",
        }
    }

    fn needs_positive(&self) -> bool {
        matches!(self, PremiseMode::Thm1Log | PremiseMode::KrPower { .. })
    }
}

impl fmt::Display for PremiseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.p() {
            Some(p) => write!(f, "{}:p={}", self.name(), p),
            None => f.write_str(self.name()),
        }
    }
}

impl FromStr for PremiseMode {
    type Err = Error;
    fn from_str(input: &str) -> Result<Self> {
        let t = Tagged::parse(input)?;
        match t.name {
            "thm1" | "thm4" => {
                t.expect_keys(&[])?;
                Ok(if t.name == "thm1" {
                    PremiseMode::Thm1Log
                } else {
                    PremiseMode::Thm4Identity
                })
            }
            "thm2" => {
                t.expect_keys(&["p"])?;
                PremiseMode::thm2(t.number("p")?)
            }
            "kr" => {
                t.expect_keys(&["p"])?;
                PremiseMode::kr(t.number("p")?)
            }
            _ => Err(t.unknown_name("thm1, thm2:p=<p>, kr:p=<p>, thm4")),
        }
    }
}

impl Serialize for PremiseMode {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PremiseMode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn sorted_increasing(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Whether `a ≺ b`: equal totals and every upper tail sum of the increasing
/// rearrangement of `a` bounded by that of `b`, with slack
/// `1e-9 · max(1, Σ|b_i|)`.
pub fn majorizes(b: &[f64], a: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: b.len(),
            right: a.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::InvalidParameter("empty vectors".into()));
    }
    let tol = 1e-9 * b.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
    let sa = sorted_increasing(a);
    let sb = sorted_increasing(b);
    let (mut tail_a, mut tail_b) = (0.0, 0.0);
    for k in (1..sa.len()).rev() {
        tail_a += sa[k];
        tail_b += sb[k];
        if tail_a > tail_b + tol {
            return Ok(false);
        }
    }
    let total_a = tail_a + sa[0];
    let total_b = tail_b + sb[0];
    Ok((total_a - total_b).abs() <= tol)
}

pub fn transform(w: &WeightVector, mode: PremiseMode) -> Result<Vec<f64>> {
    if mode.needs_positive() {
        w.require_positive()?;
    }
    let v = w.values();
    Ok(match mode {
        PremiseMode::Thm1Log => v.iter().map(|x| x.ln()).collect(),
        PremiseMode::Thm2Power { q } | PremiseMode::KrPower { q } => {
            v.iter().map(|x| x.powf(q)).collect()
        }
        PremiseMode::Thm4Identity => v.to_vec(),
    })
}

/// Maps transformed coordinates back to weights.
pub fn inverse_transform(values: &[f64], mode: PremiseMode) -> Result<WeightVector> {
    let raw = match mode {
        PremiseMode::Thm1Log => values.iter().map(|x| x.exp()).collect(),
        PremiseMode::Thm2Power { q } | PremiseMode::KrPower { q } => {
            if let Some(i) = values.iter().position(|&x| x < 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "power coordinate {i} is negative: {}",
                    values[i]
                )));
            }
            values.iter().map(|x| x.powf(1.0 / q)).collect()
        }
        PremiseMode::Thm4Identity => values.to_vec(),
    };
    WeightVector::new(raw)
}

/// `transform(a) ≺ transform(b)`.
pub fn premise_holds(a: &WeightVector, b: &WeightVector, mode: PremiseMode) -> Result<bool> {
    majorizes(&transform(b, mode)?, &transform(a, mode)?)
}

/// Moves coordinates `i` and `j` toward each other by the fraction `lambda`
/// of their gap, preserving their sum.
pub fn t_transform(x: &mut [f64], i: usize, j: usize, lambda: f64) {
    let shift = 0.5 * lambda * (x[i] - x[j]);
    x[i] -= shift;
    x[j] += shift;
}

/// Transformed-coordinate range from which random `b` vectors are drawn.
fn coordinate_range(mode: PremiseMode) -> (f64, f64) {
    match mode {
        PremiseMode::Thm1Log => (-1.0, 1.0),
        PremiseMode::Thm2Power { .. } => (0.05, 2.0),
        PremiseMode::KrPower { .. } => (0.2, 3.0),
        PremiseMode::Thm4Identity => (0.05, 2.0),
    }
}

/// Random pair `(a, b)` with `transform(a) ≺ transform(b)`.
///
/// `transform(b)` has i.i.d. uniform coordinates; `transform(a)` is obtained
/// from it by `steps` random T-transforms followed by a random permutation.
pub fn random_majorization_pair(
    n: usize,
    mode: PremiseMode,
    stream: SeededStream,
    steps: usize,
) -> Result<(WeightVector, WeightVector)> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    let mut rng = stream.rng();
    let (lo, hi) = coordinate_range(mode);
    let beta: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    let mut alpha = beta.clone();
    for _ in 0..steps {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        // λ ∈ (0, 1]
        let lambda = 1.0 - rng.random::<f64>();
        t_transform(&mut alpha, i, j, lambda);
    }
    alpha.shuffle(&mut rng);
    Ok((
        inverse_transform(&alpha, mode)?,
        inverse_transform(&beta, mode)?,
    ))
}
