//! Parametric interarrival and service laws.
//!
//! Every family is supported on the nonnegative reals and has a finite,
//! strictly positive mean. Besides sampling, each law exposes its CDF, its
//! Laplace-Stieltjes transform at real arguments and the reliability classes
//! (IHR/DHR/NBU/NWU) it belongs to.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Weibull};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_lr, ln_gamma};

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadratureOptions};

const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Raw parameter record, as written in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Exponential { rate: f64 },
    Deterministic { value: f64 },
    Erlang { shape: u32, rate: f64 },
    #[serde(rename = "hyperexponential")]
    HyperExponential { weights: Vec<f64>, rates: Vec<f64> },
    Uniform { lo: f64, hi: f64 },
    Gamma { shape: f64, rate: f64 },
    Weibull { shape: f64, scale: f64 },
}

/// A validated distribution on `[0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Family", into = "Family")]
pub struct DistributionSpec {
    family: Family,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be a positive finite number, got {v}"
        )))
    }
}

impl TryFrom<Family> for DistributionSpec {
    type Error = Error;

    fn try_from(family: Family) -> Result<Self> {
        match &family {
            Family::Exponential { rate } => positive("rate", *rate)?,
            Family::Deterministic { value } => positive("value", *value)?,
            Family::Erlang { shape, rate } => {
                if *shape == 0 {
                    return Err(Error::InvalidParameter("erlang shape must be >= 1".into()));
                }
                positive("rate", *rate)?;
            }
            Family::HyperExponential { weights, rates } => {
                if weights.is_empty() || weights.len() != rates.len() {
                    return Err(Error::InvalidParameter(format!(
                        "hyperexponential needs matching nonempty weights and rates (got {} and {})",
                        weights.len(),
                        rates.len()
                    )));
                }
                for &w in weights {
                    if !(w.is_finite() && w >= 0.0) {
                        return Err(Error::InvalidParameter(format!(
                            "hyperexponential weights must be nonnegative, got {w}"
                        )));
                    }
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                    return Err(Error::InvalidParameter(format!(
                        "hyperexponential weights must sum to 1, got {total}"
                    )));
                }
                for &r in rates {
                    positive("rate", r)?;
                }
            }
            Family::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && *lo >= 0.0 && lo < hi) {
                    return Err(Error::InvalidParameter(format!(
                        "uniform requires 0 <= lo < hi, got [{lo}, {hi}]"
                    )));
                }
            }
            Family::Gamma { shape, rate } => {
                positive("shape", *shape)?;
                positive("rate", *rate)?;
            }
            Family::Weibull { shape, scale } => {
                positive("shape", *shape)?;
                positive("scale", *scale)?;
            }
        }
        Ok(Self { family })
    }
}

impl From<DistributionSpec> for Family {
    fn from(spec: DistributionSpec) -> Self {
        spec.family
    }
}

impl DistributionSpec {
    pub fn exponential(rate: f64) -> Result<Self> {
        Family::Exponential { rate }.try_into()
    }

    pub fn deterministic(value: f64) -> Result<Self> {
        Family::Deterministic { value }.try_into()
    }

    pub fn erlang(shape: u32, rate: f64) -> Result<Self> {
        Family::Erlang { shape, rate }.try_into()
    }

    pub fn hyperexponential(weights: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        Family::HyperExponential { weights, rates }.try_into()
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Family::Uniform { lo, hi }.try_into()
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        Family::Gamma { shape, rate }.try_into()
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Family::Weibull { shape, scale }.try_into()
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// The rate if this law is exponential (including one-phase Erlang and
    /// unit-shape Gamma/Weibull, and hyperexponentials with a single distinct rate).
    pub fn exponential_rate(&self) -> Option<f64> {
        match &self.family {
            Family::Exponential { rate } => Some(*rate),
            Family::Erlang { shape: 1, rate } => Some(*rate),
            Family::Gamma { shape, rate } if *shape == 1.0 => Some(*rate),
            Family::Weibull { shape, scale } if *shape == 1.0 => Some(1.0 / scale),
            Family::HyperExponential { weights, rates } => {
                let mut active = weights.iter().zip(rates).filter(|(w, _)| **w > 0.0).map(|(_, r)| *r);
                let first = active.next()?;
                active.all(|r| r == first).then_some(first)
            }
            _ => None,
        }
    }

    pub fn is_exponential(&self) -> bool {
        self.exponential_rate().is_some()
    }

    pub fn mean(&self) -> f64 {
        match &self.family {
            Family::Exponential { rate } => 1.0 / rate,
            Family::Deterministic { value } => *value,
            Family::Erlang { shape, rate } => f64::from(*shape) / rate,
            Family::HyperExponential { weights, rates } => {
                weights.iter().zip(rates).map(|(w, r)| w / r).sum()
            }
            Family::Uniform { lo, hi } => 0.5 * (lo + hi),
            Family::Gamma { shape, rate } => shape / rate,
            Family::Weibull { shape, scale } => scale * gamma(1.0 + 1.0 / shape),
        }
    }

    pub fn variance(&self) -> f64 {
        match &self.family {
            Family::Exponential { rate } => 1.0 / (rate * rate),
            Family::Deterministic { .. } => 0.0,
            Family::Erlang { shape, rate } => f64::from(*shape) / (rate * rate),
            Family::HyperExponential { weights, rates } => {
                let second: f64 = weights.iter().zip(rates).map(|(w, r)| 2.0 * w / (r * r)).sum();
                let m = self.mean();
                second - m * m
            }
            Family::Uniform { lo, hi } => (hi - lo) * (hi - lo) / 12.0,
            Family::Gamma { shape, rate } => shape / (rate * rate),
            Family::Weibull { shape, scale } => {
                let g1 = gamma(1.0 + 1.0 / shape);
                scale * scale * (gamma(1.0 + 2.0 / shape) - g1 * g1)
            }
        }
    }

    /// Right-continuous distribution function `P[X <= x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Exponential { rate } => -(-rate * x).exp_m1(),
            Family::Deterministic { value } => {
                if x >= *value {
                    1.0
                } else {
                    0.0
                }
            }
            Family::Erlang { shape, rate } => gamma_lr(f64::from(*shape), rate * x),
            Family::HyperExponential { weights, rates } => weights
                .iter()
                .zip(rates)
                .map(|(w, r)| -w * (-r * x).exp_m1())
                .sum(),
            Family::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Family::Gamma { shape, rate } => gamma_lr(*shape, rate * x),
            Family::Weibull { shape, scale } => -(-(x / scale).powf(*shape)).exp_m1(),
        }
    }

    /// Survival function `P[X > x]`.
    pub fn survival(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        match &self.family {
            Family::Exponential { rate } => (-rate * x).exp(),
            Family::HyperExponential { weights, rates } => {
                weights.iter().zip(rates).map(|(w, r)| w * (-r * x).exp()).sum()
            }
            Family::Weibull { shape, scale } => (-(x / scale).powf(*shape)).exp(),
            _ => 1.0 - self.cdf(x),
        }
    }

    /// Lebesgue density, `None` for the degenerate law.
    pub fn density(&self, x: f64) -> Option<f64> {
        if x < 0.0 {
            return Some(0.0);
        }
        let d = match &self.family {
            Family::Deterministic { .. } => return None,
            Family::Exponential { rate } => rate * (-rate * x).exp(),
            Family::Erlang { shape, rate } => gamma_density(f64::from(*shape), *rate, x),
            Family::HyperExponential { weights, rates } => {
                weights.iter().zip(rates).map(|(w, r)| w * r * (-r * x).exp()).sum()
            }
            Family::Uniform { lo, hi } => {
                if x >= *lo && x <= *hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Family::Gamma { shape, rate } => gamma_density(*shape, *rate, x),
            Family::Weibull { shape, scale } => {
                let z = x / scale;
                shape / scale * z.powf(shape - 1.0) * (-z.powf(*shape)).exp()
            }
        };
        Some(d)
    }

    /// Points where the CDF has a jump or a kink; quadrature splits there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.family {
            Family::Deterministic { value } => vec![*value],
            Family::Uniform { lo, hi } => vec![*lo, *hi],
            _ => Vec::new(),
        }
    }

    /// Draws one variate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.family {
            Family::Exponential { rate } => {
                let e: f64 = Exp1.sample(rng);
                e / rate
            }
            Family::Deterministic { value } => *value,
            Family::Erlang { shape, rate } => Gamma::new(f64::from(*shape), 1.0 / rate)
                .expect("validated erlang parameters")
                .sample(rng),
            Family::HyperExponential { weights, rates } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut idx = rates.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        idx = i;
                        break;
                    }
                }
                let e: f64 = Exp1.sample(rng);
                e / rates[idx]
            }
            Family::Uniform { lo, hi } => rng.random_range(*lo..*hi),
            Family::Gamma { shape, rate } => Gamma::new(*shape, 1.0 / rate)
                .expect("validated gamma parameters")
                .sample(rng),
            Family::Weibull { shape, scale } => Weibull::new(*scale, *shape)
                .expect("validated weibull parameters")
                .sample(rng),
        }
    }

    /// Laplace-Stieltjes transform `E[exp(-s X)]` for real `s >= 0`.
    pub fn lst(&self, s: f64) -> Result<f64> {
        self.lst_with(s, QuadratureOptions::default())
    }

    pub fn lst_with(&self, s: f64, opts: QuadratureOptions) -> Result<f64> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "transform argument must be finite and nonnegative, got {s}"
            )));
        }
        if s == 0.0 {
            return Ok(1.0);
        }
        let v = match &self.family {
            Family::Exponential { rate } => rate / (rate + s),
            Family::Deterministic { value } => (-s * value).exp(),
            Family::Erlang { shape, rate } => (rate / (rate + s)).powi(*shape as i32),
            Family::HyperExponential { weights, rates } => {
                weights.iter().zip(rates).map(|(w, r)| w * r / (r + s)).sum()
            }
            Family::Uniform { lo, hi } => {
                let width = hi - lo;
                (-s * lo).exp() * (-(-s * width).exp_m1()) / (s * width)
            }
            Family::Gamma { shape, rate } => (rate / (rate + s)).powf(*shape),
            Family::Weibull { .. } => {
                // E[e^{-sX}] = 1 - s ∫ e^{-sx} P[X > x] dx; the integrand is bounded.
                let tail = quadrature::integrate_to_infinity(
                    |x| (-s * x).exp() * self.survival(x),
                    0.0,
                    QuadratureOptions {
                        tolerance: opts.tolerance / s,
                        ..opts
                    },
                )?;
                1.0 - s * tail.value
            }
        };
        Ok(v)
    }

    /// Reliability classes implied by the family and its parameters.
    pub fn classify(&self) -> ReliabilityClassSet {
        use ReliabilityClass::*;
        if self.is_exponential() {
            return ReliabilityClassSet::from_rule(&[Ihr, Dhr, Nbu, Nwu]);
        }
        match &self.family {
            Family::Deterministic { .. } | Family::Erlang { .. } | Family::Uniform { .. } => {
                ReliabilityClassSet::from_rule(&[Ihr, Nbu])
            }
            Family::Gamma { shape, .. } | Family::Weibull { shape, .. } => {
                if *shape > 1.0 {
                    ReliabilityClassSet::from_rule(&[Ihr, Nbu])
                } else {
                    ReliabilityClassSet::from_rule(&[Dhr, Nwu])
                }
            }
            Family::HyperExponential { .. } => ReliabilityClassSet::from_rule(&[Dhr, Nwu]),
            Family::Exponential { .. } => unreachable!("handled above"),
        }
    }
}

fn gamma_density(shape: f64, rate: f64, x: f64) -> f64 {
    if x == 0.0 {
        return match shape.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => rate,
            _ => 0.0,
        };
    }
    (shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - ln_gamma(shape)).exp()
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Exponential { rate } => write!(f, "Exp({rate})"),
            Family::Deterministic { value } => write!(f, "Det({value})"),
            Family::Erlang { shape, rate } => write!(f, "Erlang({shape}, {rate})"),
            Family::HyperExponential { weights, rates } => {
                write!(f, "HyperExp({weights:?}, {rates:?})")
            }
            Family::Uniform { lo, hi } => write!(f, "Uniform({lo}, {hi})"),
            Family::Gamma { shape, rate } => write!(f, "Gamma({shape}, {rate})"),
            Family::Weibull { shape, scale } => write!(f, "Weibull({shape}, {scale})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ReliabilityClass {
    Ihr,
    Dhr,
    Nbu,
    Nwu,
}

impl fmt::Display for ReliabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Ihr => "IHR",
            Self::Dhr => "DHR",
            Self::Nbu => "NBU",
            Self::Nwu => "NWU",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassBasis {
    ParametricRule,
    Declared,
}

/// Set of reliability classes, closed under `IHR ⊂ NBU` and `DHR ⊂ NWU`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReliabilityClassSet {
    ihr: bool,
    dhr: bool,
    nbu: bool,
    nwu: bool,
    basis: ClassBasis,
}

impl ReliabilityClassSet {
    fn build(flags: &[ReliabilityClass], basis: ClassBasis) -> Self {
        let has = |c| flags.contains(&c);
        let ihr = has(ReliabilityClass::Ihr);
        let dhr = has(ReliabilityClass::Dhr);
        Self {
            ihr,
            dhr,
            nbu: ihr || has(ReliabilityClass::Nbu),
            nwu: dhr || has(ReliabilityClass::Nwu),
            basis,
        }
    }

    fn from_rule(flags: &[ReliabilityClass]) -> Self {
        Self::build(flags, ClassBasis::ParametricRule)
    }

    /// A user-declared set; containment is applied to the given flags.
    pub fn declared(flags: &[ReliabilityClass]) -> Self {
        Self::build(flags, ClassBasis::Declared)
    }

    pub fn contains(&self, class: ReliabilityClass) -> bool {
        match class {
            ReliabilityClass::Ihr => self.ihr,
            ReliabilityClass::Dhr => self.dhr,
            ReliabilityClass::Nbu => self.nbu,
            ReliabilityClass::Nwu => self.nwu,
        }
    }

    pub fn basis(&self) -> ClassBasis {
        self.basis
    }

    pub fn flags(&self) -> Vec<ReliabilityClass> {
        [
            ReliabilityClass::Ihr,
            ReliabilityClass::Dhr,
            ReliabilityClass::Nbu,
            ReliabilityClass::Nwu,
        ]
        .into_iter()
        .filter(|c| self.contains(*c))
        .collect()
    }
}

impl fmt::Display for ReliabilityClassSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.flags().iter().map(|c| c.to_string()).collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DistributionSpec::exponential(0.0).is_err());
        assert!(DistributionSpec::exponential(f64::NAN).is_err());
        assert!(DistributionSpec::deterministic(-1.0).is_err());
        assert!(DistributionSpec::erlang(0, 1.0).is_err());
        assert!(DistributionSpec::uniform(2.0, 1.0).is_err());
        assert!(DistributionSpec::uniform(-1.0, 1.0).is_err());
        assert!(DistributionSpec::hyperexponential(vec![0.5, 0.4], vec![1.0, 2.0]).is_err());
        assert!(DistributionSpec::hyperexponential(vec![1.5, -0.5], vec![1.0, 2.0]).is_err());
        assert!(DistributionSpec::hyperexponential(vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(DistributionSpec::gamma(0.0, 1.0).is_err());
        assert!(DistributionSpec::weibull(1.0, 0.0).is_err());
    }

    #[test]
    fn weights_tolerance_is_tight() {
        assert!(DistributionSpec::hyperexponential(vec![0.5, 0.5 + 1e-13], vec![1.0, 2.0]).is_ok());
        assert!(DistributionSpec::hyperexponential(vec![0.5, 0.5 + 1e-10], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn deterministic_sample_is_constant() {
        let d = DistributionSpec::deterministic(1.0).unwrap();
        let mut r = rng();
        assert!((0..100).all(|_| d.sample(&mut r) == 1.0));
    }

    fn sample_mean_within_3_sigma(spec: &DistributionSpec, target: f64, sd: f64) {
        let mut r = rng();
        let n = 1_000_000;
        let mean = (0..n).map(|_| spec.sample(&mut r)).sum::<f64>() / n as f64;
        let se = sd / (n as f64).sqrt();
        assert!((mean - target).abs() < 3.0 * se, "{spec}: mean {mean} vs {target} (se {se})");
    }

    #[test]
    fn exponential_sample_mean() {
        sample_mean_within_3_sigma(&DistributionSpec::exponential(2.0).unwrap(), 0.5, 0.5);
    }

    #[test]
    fn erlang_sample_mean_against_summation_oracle() {
        let spec = DistributionSpec::erlang(3, 3.0).unwrap();
        sample_mean_within_3_sigma(&spec, 1.0, 3f64.sqrt() / 3.0);

        // direct summation of three Exp(3) draws, compared through the DKW band
        let mut r = ChaCha8Rng::seed_from_u64(99);
        let n = 100_000;
        let mut oracle: Vec<f64> = (0..n)
            .map(|_| (0..3).map(|_| -(1.0 - r.random::<f64>()).ln() / 3.0).sum())
            .collect();
        oracle.sort_by(f64::total_cmp);
        let band = ((2.0f64 / 0.001).ln() / (2.0 * n as f64)).sqrt();
        let gap = oracle
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = spec.cdf(x);
                (f - i as f64 / n as f64).abs().max((f - (i + 1) as f64 / n as f64).abs())
            })
            .fold(0.0, f64::max);
        assert!(gap < band, "gap {gap} band {band}");
    }

    #[test]
    fn cdf_and_mean_examples() {
        assert_eq!(DistributionSpec::exponential(1.0).unwrap().cdf(0.0), 0.0);
        assert_eq!(DistributionSpec::erlang(3, 3.0).unwrap().mean(), 1.0);
        assert_eq!(DistributionSpec::uniform(0.0, 2.0).unwrap().cdf(1.0), 0.5);
        assert_eq!(DistributionSpec::deterministic(1.0).unwrap().cdf(1.0), 1.0);
        assert_eq!(DistributionSpec::deterministic(1.0).unwrap().cdf(0.999), 0.0);
    }

    #[test]
    fn lst_examples() {
        let e = DistributionSpec::exponential(1.0).unwrap();
        assert!((e.lst(2.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let d = DistributionSpec::deterministic(1.0).unwrap();
        assert!((d.lst(1.25).unwrap() - (-1.25f64).exp()).abs() < 1e-15);
        assert!((d.lst(1.25).unwrap() - 0.28650).abs() < 5e-6);
    }

    #[test]
    fn weibull_lst_matches_dense_trapezoid() {
        let w = DistributionSpec::weibull(2.0, 1.0).unwrap();
        let s = 1.0;
        let h = 1e-5;
        let steps = (12.0 / h) as usize;
        let f = |x: f64| (-s * x).exp() * w.density(x).unwrap();
        let mut trap = 0.5 * (f(0.0) + f(12.0));
        for i in 1..steps {
            trap += f(i as f64 * h);
        }
        trap *= h;
        let v = w.lst(s).unwrap();
        assert!((v - trap).abs() < 1e-8, "{v} vs {trap}");
    }

    #[test]
    fn closed_form_lsts_match_quadrature() {
        let specs = [
            DistributionSpec::exponential(1.3).unwrap(),
            DistributionSpec::erlang(3, 2.0).unwrap(),
            DistributionSpec::gamma(0.6, 1.5).unwrap(),
            DistributionSpec::gamma(2.5, 0.7).unwrap(),
            DistributionSpec::uniform(0.5, 2.0).unwrap(),
            DistributionSpec::hyperexponential(vec![0.3, 0.7], vec![0.5, 3.0]).unwrap(),
        ];
        for spec in &specs {
            for s in [0.1, 0.8, 2.5] {
                let q = quadrature::integrate_half_line(
                    |x| (-s * x).exp() * spec.density(x).unwrap(),
                    &spec.breakpoints(),
                    QuadratureOptions::with_tolerance(1e-12),
                )
                .unwrap()
                .value;
                let v = spec.lst(s).unwrap();
                assert!((v - q).abs() < 1e-9, "{spec} s={s}: {v} vs {q}");
            }
        }
    }

    #[test]
    fn lst_rejects_negative_argument() {
        let e = DistributionSpec::exponential(1.0).unwrap();
        assert!(e.lst(-0.1).is_err());
    }

    #[test]
    fn classify_examples() {
        use ReliabilityClass::*;
        let det = DistributionSpec::deterministic(1.0).unwrap().classify();
        assert_eq!(det.flags(), vec![Ihr, Nbu]);
        let h = DistributionSpec::hyperexponential(vec![0.5, 0.5], vec![1.0, 4.0])
            .unwrap()
            .classify();
        assert_eq!(h.flags(), vec![Dhr, Nwu]);
        let e = DistributionSpec::exponential(3.0).unwrap().classify();
        assert_eq!(e.flags(), vec![Ihr, Dhr, Nbu, Nwu]);
        assert_eq!(e.basis(), ClassBasis::ParametricRule);
        let w1 = DistributionSpec::weibull(1.0, 2.0).unwrap().classify();
        assert_eq!(w1.flags().len(), 4);
        let g = DistributionSpec::gamma(0.5, 1.0).unwrap().classify();
        assert_eq!(g.flags(), vec![Dhr, Nwu]);
    }

    #[test]
    fn declared_sets_are_closed_under_containment() {
        use ReliabilityClass::*;
        let s = ReliabilityClassSet::declared(&[Ihr]);
        assert!(s.contains(Nbu));
        assert_eq!(s.basis(), ClassBasis::Declared);
        let s = ReliabilityClassSet::declared(&[Dhr]);
        assert!(s.contains(Nwu) && !s.contains(Nbu));
    }

    #[test]
    fn hyperexponential_nwu_on_grid() {
        // 1 - F(x + y) >= (1 - F(x))(1 - F(y)) for the NWU law
        let h = DistributionSpec::hyperexponential(vec![0.5, 0.5], vec![1.0, 4.0]).unwrap();
        for i in 1..=50 {
            for j in 1..=50 {
                let (x, y) = (i as f64 * 0.1, j as f64 * 0.1);
                assert!(h.survival(x + y) >= h.survival(x) * h.survival(y) - 1e-15);
            }
        }
    }

    #[test]
    fn toml_record_round_trip() {
        let spec: DistributionSpec =
            toml::from_str("family = \"erlang\"\nshape = 3\nrate = 3.0\n").unwrap();
        assert_eq!(spec, DistributionSpec::erlang(3, 3.0).unwrap());
        let bad: std::result::Result<DistributionSpec, _> =
            toml::from_str("family = \"uniform\"\nlo = 2.0\nhi = 1.0\n");
        assert!(bad.is_err());
    }
}
