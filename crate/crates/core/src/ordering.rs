//! Empirical CDFs and DKW-band checks of the usual stochastic order.
//!
//! A "consistent" verdict means the samples cannot refute the claimed order at
//! the stated confidence; a "violated" verdict refutes it with joint
//! confidence at least `1 − 2α`.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Default significance level for dominance checks.
pub const DEFAULT_ALPHA: f64 = 0.001;

/// i.i.d. scalar observations with provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalSample {
    values: Vec<f64>,
    pub label: String,
    pub seed: u64,
    pub truncation_count: usize,
}

impl EmpiricalSample {
    pub fn new(label: impl Into<String>, values: Vec<f64>, seed: u64) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("sample contains non-finite value {bad}")));
        }
        Ok(Self {
            values,
            label: label.into(),
            seed,
            truncation_count: 0,
        })
    }

    pub fn from_counts(label: impl Into<String>, counts: &[u64], seed: u64) -> Self {
        Self {
            values: counts.iter().map(|&c| c as f64).collect(),
            label: label.into(),
            seed,
            truncation_count: 0,
        }
    }

    pub fn with_truncations(mut self, truncation_count: usize) -> Self {
        self.truncation_count = truncation_count;
        self
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_obs(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Applies `f` to every value, keeping the provenance.
    pub fn map(&self, label: impl Into<String>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut out = Self::new(label, self.values.iter().map(|&v| f(v)).collect(), self.seed)?;
        out.truncation_count = self.truncation_count;
        Ok(out)
    }

    pub fn ecdf(&self) -> Result<Ecdf> {
        Ecdf::new(&self.values)
    }
}

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("an empirical CDF needs at least one observation".into()));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of observations `<= t`.
    pub fn eval(&self, t: f64) -> f64 {
        self.count_le(t) as f64 / self.sorted.len() as f64
    }

    fn count_le(&self, t: f64) -> usize {
        self.sorted.partition_point(|&v| v <= t)
    }

    /// Distinct observed values, ascending.
    pub fn jump_points(&self) -> Vec<f64> {
        let mut pts = self.sorted.clone();
        pts.dedup();
        pts
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }
}

/// Half-width of the DKW band: `sqrt(ln(2/α) / (2N))`.
pub fn dkw_epsilon(n_obs: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n_obs as f64)).sqrt()
}

/// The ordering being claimed between the left (`X`) and right (`Y`) sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Claim {
    /// `X ≥_st Y`
    LeftDominates,
    /// `X ≤_st Y`
    RightDominates,
}

impl Claim {
    pub fn flipped(self) -> Self {
        match self {
            Claim::LeftDominates => Claim::RightDominates,
            Claim::RightDominates => Claim::LeftDominates,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Consistent,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceVerdict {
    pub claim: Claim,
    pub alpha: f64,
    pub epsilon_left: f64,
    pub epsilon_right: f64,
    /// Combined band `ε_X + ε_Y`.
    pub band_width: f64,
    /// Largest excursion of the wrong-side CDF gap beyond the band.
    pub max_violation: f64,
    pub worst_point: f64,
    pub decision: Decision,
}

impl DominanceVerdict {
    pub fn is_consistent(&self) -> bool {
        self.decision == Decision::Consistent
    }
}

/// Tests `claim` between `x` (left) and `y` (right).
///
/// For `X ≥_st Y` the claim stands iff `F̂_X(t) ≤ F̂_Y(t) + ε_X + ε_Y` at every
/// jump point of either ECDF.
pub fn check_dominance(
    x: &EmpiricalSample,
    y: &EmpiricalSample,
    claim: Claim,
    alpha: f64,
) -> Result<DominanceVerdict> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let fx = x.ecdf()?;
    let fy = y.ecdf()?;
    let eps_x = dkw_epsilon(fx.len(), alpha);
    let eps_y = dkw_epsilon(fy.len(), alpha);
    let band = eps_x + eps_y;

    let (nx, ny) = (fx.len() as f64, fy.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut worst = f64::NEG_INFINITY;
    let mut worst_point = f64::NAN;
    while i < fx.sorted.len() || j < fy.sorted.len() {
        let t = match (fx.sorted.get(i), fy.sorted.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        while i < fx.sorted.len() && fx.sorted[i] <= t {
            i += 1;
        }
        while j < fy.sorted.len() && fy.sorted[j] <= t {
            j += 1;
        }
        let (cx, cy) = (i as f64 / nx, j as f64 / ny);
        let gap = match claim {
            Claim::LeftDominates => cx - cy - band,
            Claim::RightDominates => cy - cx - band,
        };
        if gap > worst {
            worst = gap;
            worst_point = t;
        }
    }

    Ok(DominanceVerdict {
        claim,
        alpha,
        epsilon_left: eps_x,
        epsilon_right: eps_y,
        band_width: band,
        max_violation: worst,
        worst_point,
        decision: if worst > 0.0 {
            Decision::Violated
        } else {
            Decision::Consistent
        },
    })
}

/// One-sample check of an ECDF against an analytic CDF.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitVerdict {
    pub alpha: f64,
    pub band_width: f64,
    pub sup_gap: f64,
    pub worst_point: f64,
    pub decision: Decision,
}

fn left_limit_point(v: f64) -> f64 {
    if v > 0.0 {
        f64::from_bits(v.to_bits() - 1)
    } else if v == 0.0 {
        -f64::MIN_POSITIVE
    } else {
        f64::from_bits(v.to_bits() + 1)
    }
}

/// Sup-distance between the sample ECDF and `cdf`, against the DKW band.
pub fn check_fit<F: Fn(f64) -> f64>(sample: &EmpiricalSample, cdf: F, alpha: f64) -> Result<FitVerdict> {
    let ecdf = sample.ecdf()?;
    let n = ecdf.len() as f64;
    let band = dkw_epsilon(ecdf.len(), alpha);
    let mut before = 0usize;
    let mut sup = 0.0f64;
    let mut worst_point = ecdf.min();
    let mut k = 0;
    while k < ecdf.sorted.len() {
        let v = ecdf.sorted[k];
        let mut after = k;
        while after < ecdf.sorted.len() && ecdf.sorted[after] == v {
            after += 1;
        }
        let at = ((after as f64 / n) - cdf(v)).abs();
        let below = ((before as f64 / n) - cdf(left_limit_point(v))).abs();
        let local = at.max(below);
        if local > sup {
            sup = local;
            worst_point = v;
        }
        before = after;
        k = after;
    }
    Ok(FitVerdict {
        alpha,
        band_width: band,
        sup_gap: sup,
        worst_point,
        decision: if sup > band {
            Decision::Violated
        } else {
            Decision::Consistent
        },
    })
}

/// Sample mean with a normal-approximation confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanCi {
    pub mean: f64,
    pub std_error: f64,
    pub halfwidth: f64,
    pub n_obs: usize,
}

impl MeanCi {
    pub fn lower(&self) -> f64 {
        self.mean - self.halfwidth
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.halfwidth
    }
}

pub fn mean_ci(sample: &EmpiricalSample, alpha: f64) -> Result<MeanCi> {
    let n = sample.n_obs();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "a confidence interval needs at least two observations, got {n}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let mean = sample.mean();
    let ss: f64 = sample.values().iter().map(|v| (v - mean) * (v - mean)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    let std_error = sd / (n as f64).sqrt();
    let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
    Ok(MeanCi {
        mean,
        std_error,
        halfwidth: z * std_error,
        n_obs: n,
    })
}
