//! Closed-form quantities: the geometric offspring parameter `r`, the root
//! `φ` of `z = Â(μ − μz)`, the mixed-Poisson law of arrivals per service, and
//! the bounds on the mean losses, services and length of a busy period.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::distributions::{DistributionSpec, Family, ReliabilityClass};
use crate::error::{Error, Result};
use crate::quadrature::{self, QuadratureOptions};

/// Relative tolerance within which a load is treated as critical (`ρ = 1`).
pub const CRITICAL_LOAD_TOLERANCE: f64 = 1e-9;
const PHI_STEP_TOLERANCE: f64 = 1e-12;
const PHI_MAX_ITERATIONS: usize = 100_000;

/// Number of waiting places, excluding the server.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Buffer {
    Finite(u32),
    Infinite,
}

impl Buffer {
    /// Whether an arrival that finds `in_system` customers is admitted.
    pub fn admits(&self, in_system: usize) -> bool {
        match self {
            Buffer::Finite(n) => in_system <= *n as usize,
            Buffer::Infinite => true,
        }
    }
}

/// An `A/B/1/n` loss queue (or `A/M/1` with an infinite buffer).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemModel {
    interarrival: DistributionSpec,
    service: DistributionSpec,
    buffer: Buffer,
}

impl SystemModel {
    pub fn new(interarrival: DistributionSpec, service: DistributionSpec, buffer: Buffer) -> Result<Self> {
        if buffer == Buffer::Infinite && !service.is_exponential() {
            return Err(Error::InvalidParameter(
                "an infinite buffer is only supported with exponential service".into(),
            ));
        }
        Ok(Self {
            interarrival,
            service,
            buffer,
        })
    }

    pub fn finite(interarrival: DistributionSpec, service: DistributionSpec, n: u32) -> Self {
        Self {
            interarrival,
            service,
            buffer: Buffer::Finite(n),
        }
    }

    pub fn interarrival(&self) -> &DistributionSpec {
        &self.interarrival
    }

    pub fn service(&self) -> &DistributionSpec {
        &self.service
    }

    pub fn buffer(&self) -> Buffer {
        self.buffer
    }

    pub fn with_buffer(&self, buffer: Buffer) -> Result<Self> {
        Self::new(self.interarrival.clone(), self.service.clone(), buffer)
    }

    pub fn lambda(&self) -> f64 {
        1.0 / self.interarrival.mean()
    }

    pub fn mu(&self) -> f64 {
        1.0 / self.service.mean()
    }

    pub fn rho(&self) -> f64 {
        self.lambda() / self.mu()
    }
}

/// `r = 1 − ∫ [1 − A(x)] dB(x)`, the parameter of the geometric offspring law.
pub fn compute_r(a: &DistributionSpec, b: &DistributionSpec) -> Result<f64> {
    let r = if let Some(mu) = b.exponential_rate() {
        a.lst(mu)?
    } else if let Some(lambda) = a.exponential_rate() {
        1.0 - b.lst(lambda)?
    } else {
        1.0 - prob_interarrival_exceeds_service(a, b)?
    };
    if r > 0.0 && r < 1.0 {
        Ok(r)
    } else {
        Err(Error::DegenerateModel(format!(
            "offspring parameter r = {r} for A = {a}, B = {b} lies outside (0, 1)"
        )))
    }
}

/// `P[τ > χ]` with `τ ~ A`, `χ ~ B` independent.
fn prob_interarrival_exceeds_service(a: &DistributionSpec, b: &DistributionSpec) -> Result<f64> {
    if let Family::Deterministic { value } = b.family() {
        return Ok(a.survival(*value));
    }
    if let Family::Deterministic { value } = a.family() {
        // B has no atoms here, so P[χ < d] = B(d).
        return Ok(b.cdf(*value));
    }
    let mut cuts = a.breakpoints();
    cuts.extend(b.breakpoints());
    let est = quadrature::integrate_half_line(
        |x| a.survival(x) * b.density(x).unwrap_or(0.0),
        &cuts,
        QuadratureOptions::default(),
    )?;
    Ok(est.value)
}

/// Geometric offspring law `P[κ = m] = r^m (1 − r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometricOffspring {
    r: f64,
}

impl GeometricOffspring {
    pub fn new(r: f64) -> Result<Self> {
        if r > 0.0 && r < 1.0 {
            Ok(Self { r })
        } else {
            Err(Error::InvalidParameter(format!(
                "offspring parameter must lie in (0, 1), got {r}"
            )))
        }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `g(z) = (1 − r) / (1 − z r)`.
    pub fn pgf(&self, z: f64) -> f64 {
        (1.0 - self.r) / (1.0 - z * self.r)
    }

    pub fn pmf(&self, m: u64) -> f64 {
        self.r.powi(m as i32) * (1.0 - self.r)
    }

    /// Offspring mean `g'(1) = r / (1 − r)`.
    pub fn mean(&self) -> f64 {
        self.r / (1.0 - self.r)
    }

    /// `E[X_n] = (r / (1 − r))^n` with `X_0 = 1`.
    pub fn generation_mean(&self, n: u32) -> f64 {
        self.mean().powi(n as i32)
    }
}

pub fn offspring_pgf(r: f64, z: f64) -> Result<f64> {
    Ok(GeometricOffspring::new(r)?.pgf(z))
}

pub fn gw_mean(r: f64, n: u32) -> Result<f64> {
    Ok(GeometricOffspring::new(r)?.generation_mean(n))
}

/// Least root in `[0, 1]` of `z = Â(μ − μz)`.
///
/// Iterates `z ← Â(μ − μz)` from zero; the iterates increase to the least
/// root. The result is then polished by bisection, which also serves as the
/// fallback when the iteration stalls near criticality.
pub fn solve_phi(a: &DistributionSpec, mu: f64) -> Result<f64> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidParameter(format!("service rate must be positive, got {mu}")));
    }
    let rho = 1.0 / (a.mean() * mu);
    if rho > 1.0 + CRITICAL_LOAD_TOLERANCE {
        return Err(Error::InvalidParameter(format!(
            "φ is only defined here for load ρ <= 1, got {rho}"
        )));
    }
    if (rho - 1.0).abs() <= CRITICAL_LOAD_TOLERANCE {
        return Ok(1.0);
    }

    let map = |z: f64| a.lst(mu * (1.0 - z));
    let mut z = 0.0;
    for _ in 0..PHI_MAX_ITERATIONS {
        let next = map(z)?;
        if (next - z).abs() < PHI_STEP_TOLERANCE {
            return polish_phi(&map, next, next);
        }
        z = next;
    }
    polish_phi(&map, z, z)
}

fn polish_phi<F: Fn(f64) -> Result<f64>>(map: &F, lo_start: f64, fallback: f64) -> Result<f64> {
    let h = |z: f64| map(z).map(|v| v - z);
    let mut lo = lo_start;
    if h(lo)? < 0.0 {
        // Overshoot from rounding; the iterate is already at the root.
        return Ok(fallback);
    }
    let mut step = PHI_STEP_TOLERANCE;
    let mut hi = None;
    while lo + step < 1.0 {
        let cand = lo + step;
        if h(cand)? < 0.0 {
            hi = Some(cand);
            break;
        }
        step *= 4.0;
    }
    let Some(mut hi) = hi else {
        return Err(Error::NonConvergence {
            iterations: PHI_MAX_ITERATIONS,
            last: fallback,
        });
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn poisson_pmf(k: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let kf = k as f64;
    (-mean + kf * mean.ln() - ln_gamma(kf + 1.0)).exp()
}

/// `P[τ = k] = ∫ e^{-λx} (λx)^k / k! dB(x)`: arrivals of a rate-`λ` Poisson
/// stream during one service time.
pub fn tau_pmf(b: &DistributionSpec, lambda: f64, k: u64) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("arrival rate must be positive, got {lambda}")));
    }
    let kf = k as f64;
    let geometric = |rate: f64| (rate / (rate + lambda)) * (lambda / (lambda + rate)).powf(kf);
    let negative_binomial = |shape: f64, rate: f64| {
        (ln_gamma(kf + shape) - ln_gamma(shape) - ln_gamma(kf + 1.0)
            + shape * (rate / (rate + lambda)).ln()
            + kf * (lambda / (rate + lambda)).ln())
        .exp()
    };
    let p = match b.family() {
        Family::Deterministic { value } => poisson_pmf(k, lambda * value),
        Family::Exponential { rate } => geometric(*rate),
        Family::HyperExponential { weights, rates } => {
            weights.iter().zip(rates).map(|(w, r)| w * geometric(*r)).sum()
        }
        Family::Erlang { shape, rate } => negative_binomial(f64::from(*shape), *rate),
        Family::Gamma { shape, rate } => negative_binomial(*shape, *rate),
        Family::Uniform { .. } | Family::Weibull { .. } => tau_pmf_quadrature(b, lambda, k)?,
    };
    Ok(p)
}

/// Integration by parts: `E[g(χ)] = g(0) + ∫ g'(x) P[χ > x] dx` with
/// `g(x) = p_k(λx)`, which keeps the integrand bounded for every family.
pub(crate) fn tau_pmf_quadrature(b: &DistributionSpec, lambda: f64, k: u64) -> Result<f64> {
    let start = if k == 0 { 1.0 } else { 0.0 };
    let derivative = |x: f64| {
        let y = lambda * x;
        let lower = if k == 0 { 0.0 } else { poisson_pmf(k - 1, y) };
        lambda * (lower - poisson_pmf(k, y)) * b.survival(x)
    };
    let est = quadrature::integrate_half_line(derivative, &b.breakpoints(), QuadratureOptions::default())?;
    Ok(start + est.value)
}

/// Which family of inequalities produced the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Applicability {
    /// Geometric Galton-Watson comparison (opposite NBU/NWU classes).
    GwOnly,
    /// Compound loss comparison for Poisson arrivals.
    Compound,
    /// Two-sided bounds for exponential service and IHR/DHR arrivals.
    TwoSidedGim1,
}

/// Bounds on `E[L_n]`, `E[ν_n]` and `E[T_n]` for one buffer size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSet {
    pub n: u32,
    pub r: Option<f64>,
    pub phi: Option<f64>,
    pub el_lower: Option<f64>,
    pub el_upper: Option<f64>,
    /// The weaker generation-`n+1` bound on `E[L_n]` for Poisson arrivals,
    /// kept for comparison against the compound bound.
    pub el_gw_poisson: Option<f64>,
    pub enu_lower: Option<f64>,
    pub enu_upper: Option<f64>,
    pub et_lower: Option<f64>,
    pub et_upper: Option<f64>,
    pub applicability: Option<Applicability>,
    /// At criticality `φ = 1` and the upper side degenerates to 1.
    pub degenerate: bool,
    pub notes: Vec<String>,
}

impl BoundSet {
    pub fn is_empty(&self) -> bool {
        self.el_lower.is_none()
            && self.el_upper.is_none()
            && self.enu_lower.is_none()
            && self.enu_upper.is_none()
    }
}

#[derive(Default)]
struct Candidates {
    el_lower: Vec<f64>,
    el_upper: Vec<f64>,
    enu_lower: Vec<f64>,
    enu_upper: Vec<f64>,
}

fn partial_geometric(ratio: f64, n: u32) -> f64 {
    (0..=n).map(|i| ratio.powi(i as i32)).sum()
}

fn max_of(v: &[f64]) -> Option<f64> {
    v.iter().copied().reduce(f64::max)
}

fn min_of(v: &[f64]) -> Option<f64> {
    v.iter().copied().reduce(f64::min)
}

/// Collects every bound whose class assumptions the model satisfies.
///
/// When a law belongs to both orientations (exponential), both directions are
/// emitted; the tightest lower and upper values are kept.
pub fn bounds_for(model: &SystemModel) -> Result<BoundSet> {
    let n = match model.buffer() {
        Buffer::Finite(n) => n,
        Buffer::Infinite => {
            return Err(Error::InvalidParameter("bounds need a finite buffer size".into()));
        }
    };
    let a = model.interarrival();
    let b = model.service();
    let ca = a.classify();
    let cb = b.classify();
    let lambda = model.lambda();
    let mu = model.mu();
    let rho = model.rho();

    let mut c = Candidates::default();
    let mut notes = Vec::new();
    let mut applicability = None;
    let mut degenerate = false;
    let mut r_value = None;
    let mut phi_value = None;
    let mut el_gw_poisson = None;

    let nbu_nwu = ca.contains(ReliabilityClass::Nbu) && cb.contains(ReliabilityClass::Nwu);
    let nwu_nbu = ca.contains(ReliabilityClass::Nwu) && cb.contains(ReliabilityClass::Nbu);

    if nbu_nwu || nwu_nbu {
        let r = compute_r(a, b)?;
        r_value = Some(r);
        let ratio = r / (1.0 - r);
        let el = ratio.powi(n as i32 + 1);
        let enu = partial_geometric(ratio, n);
        if nbu_nwu {
            c.el_lower.push(el);
            c.enu_lower.push(enu);
            notes.push("A NBU, B NWU: L_n >=st X_{n+1} (geometric GW, parameter r)".into());
        }
        if nwu_nbu {
            c.el_upper.push(el);
            c.enu_upper.push(enu);
            notes.push("A NWU, B NBU: L_n <=st X_{n+1} (geometric GW, parameter r)".into());
        }
        applicability = Some(Applicability::GwOnly);

        if a.is_exponential() {
            let b_hat = b.lst(lambda)?;
            let ratio_b = (1.0 - b_hat) / b_hat;
            let compound = rho * ratio_b.powi(n as i32);
            el_gw_poisson = Some(ratio_b.powi(n as i32 + 1));
            if cb.contains(ReliabilityClass::Nwu) {
                c.el_lower.push(compound);
                notes.push("Poisson arrivals, B NWU: L_n >=st compound sum over X_n".into());
            }
            if cb.contains(ReliabilityClass::Nbu) {
                c.el_upper.push(compound);
                notes.push("Poisson arrivals, B NBU: L_n <=st compound sum over X_n".into());
            }
            applicability = Some(Applicability::Compound);
        }
    }

    if b.is_exponential() {
        let ihr = ca.contains(ReliabilityClass::Ihr);
        let dhr = ca.contains(ReliabilityClass::Dhr);
        if (ihr || dhr) && rho <= 1.0 + CRITICAL_LOAD_TOLERANCE {
            let phi = solve_phi(a, mu)?;
            phi_value = Some(phi);
            degenerate = phi == 1.0;
            let el = phi.powi(n as i32 + 1);
            let enu = partial_geometric(phi, n);
            if ihr {
                c.el_upper.push(el);
                c.enu_upper.push(enu);
                notes.push("A IHR, exponential service, rho <= 1: L_n <=st Y_{n+1} (GI/M/1-type process)".into());
            }
            if dhr {
                c.el_lower.push(el);
                c.enu_lower.push(enu);
                notes.push("A DHR, exponential service, rho <= 1: L_n >=st Y_{n+1} (GI/M/1-type process)".into());
            }
            applicability = Some(Applicability::TwoSidedGim1);
        }
    }

    if applicability.is_none() {
        notes.push(format!(
            "no inequality applies: A is {}, B is {}",
            ca, cb
        ));
    }

    let el_lower = max_of(&c.el_lower);
    let el_upper = min_of(&c.el_upper);
    if let (Some(lo), Some(hi)) = (el_lower, el_upper) {
        if lo > hi + 1e-12 {
            return Err(Error::DegenerateModel(format!(
                "inconsistent bounds on E[L_n]: lower {lo} exceeds upper {hi}"
            )));
        }
    }
    let enu_lower = max_of(&c.enu_lower);
    let enu_upper = min_of(&c.enu_upper);

    Ok(BoundSet {
        n,
        r: r_value,
        phi: phi_value,
        el_lower,
        el_upper,
        el_gw_poisson,
        enu_lower,
        enu_upper,
        et_lower: enu_lower.map(|v| v / mu),
        et_upper: enu_upper.map(|v| v / mu),
        applicability,
        degenerate,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp(rate: f64) -> DistributionSpec {
        DistributionSpec::exponential(rate).unwrap()
    }

    fn det(v: f64) -> DistributionSpec {
        DistributionSpec::deterministic(v).unwrap()
    }

    #[test]
    fn r_for_mm() {
        // 1 - B̂(λ) = 1 - μ/(μ+λ)
        let r = compute_r(&exp(1.0), &exp(2.0)).unwrap();
        assert!((r - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn r_for_exponential_service_is_transform_of_a() {
        for a in [
            det(0.7),
            DistributionSpec::erlang(2, 3.0).unwrap(),
            DistributionSpec::weibull(1.5, 1.0).unwrap(),
        ] {
            let r = compute_r(&a, &exp(1.7)).unwrap();
            assert!((r - a.lst(1.7).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn r_for_dm() {
        let r = compute_r(&det(1.0), &exp(1.25)).unwrap();
        assert!((r - (-1.25f64).exp()).abs() < 1e-15);
        assert!((r - 0.28650).abs() < 5e-6);
    }

    #[test]
    fn r_general_pair_matches_direct_quadrature() {
        // Erlang interarrival (NBU) against hyperexponential service (NWU)
        let a = DistributionSpec::erlang(2, 2.0).unwrap();
        let b = DistributionSpec::hyperexponential(vec![0.4, 0.6], vec![0.5, 3.0]).unwrap();
        let r = compute_r(&a, &b).unwrap();
        // ∫ A(x) dB(x) via the density of A and survival of B
        let oracle = quadrature::integrate_half_line(
            |x| a.density(x).unwrap() * (1.0 - b.survival(x)),
            &[],
            QuadratureOptions::with_tolerance(1e-13),
        )
        .unwrap()
        .value;
        // r = P[τ <= χ] = 1 - ∫ B(x) dA(x)
        assert!((r - (1.0 - oracle)).abs() < 1e-9, "{r} vs {}", 1.0 - oracle);
    }

    #[test]
    fn degenerate_r_is_rejected() {
        assert!(matches!(compute_r(&det(2.0), &det(1.0)), Err(Error::DegenerateModel(_))));
    }

    #[test]
    fn pgf_examples() {
        assert_eq!(offspring_pgf(1.0 / 3.0, 1.0).unwrap(), 1.0);
        assert!((offspring_pgf(1.0 / 3.0, 0.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((offspring_pgf(0.5, 0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(offspring_pgf(1.0, 0.5).is_err());
    }

    #[test]
    fn gw_mean_examples() {
        assert!((gw_mean(1.0 / 3.0, 2).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(gw_mean(0.3, 0).unwrap(), 1.0);
        assert_eq!(gw_mean(0.5, 5).unwrap(), 1.0);
    }

    #[test]
    fn gw_mean_is_power_of_pgf_derivative() {
        let g = GeometricOffspring::new(0.37).unwrap();
        let h = 1e-6;
        let derivative = (g.pgf(1.0) - g.pgf(1.0 - h)) / h;
        for n in 0..6 {
            let expected = derivative.powi(n);
            assert!((g.generation_mean(n as u32) - expected).abs() < 1e-4 * expected.max(1.0));
        }
    }

    #[test]
    fn phi_mm_matches_quadratic_root() {
        // z = λ/(λ + μ - μz) ⇔ μz² - (λ+μ)z + λ = 0, least root λ/μ
        for (lambda, mu) in [(1.0, 2.0), (0.9, 1.0), (0.3, 1.7)] {
            let phi = solve_phi(&exp(lambda), mu).unwrap();
            let disc = ((lambda + mu) * (lambda + mu) - 4.0 * mu * lambda).sqrt();
            let root = ((lambda + mu) - disc) / (2.0 * mu);
            assert!((phi - root).abs() < 1e-10, "{phi} vs {root}");
            assert!((phi - lambda / mu).abs() < 1e-10);
        }
    }

    #[test]
    fn phi_dm_matches_frozen_fixed_point() {
        // Frozen from a 30-digit fixed-point iteration of z = exp(-1.25 (1 - z)).
        let phi = solve_phi(&det(1.0), 1.25).unwrap();
        assert!((phi - 0.628_629_796_496_946_4).abs() < 1e-12, "{phi}");
        assert!((phi - (-1.25 * (1.0 - phi)).exp()).abs() < 1e-10);
    }

    #[test]
    fn phi_at_criticality_is_one() {
        assert_eq!(solve_phi(&exp(1.0), 1.0).unwrap(), 1.0);
    }

    #[test]
    fn phi_rejects_overload() {
        assert!(solve_phi(&exp(2.0), 1.0).is_err());
    }

    #[test]
    fn phi_residual_small_for_various_laws() {
        for a in [
            DistributionSpec::erlang(3, 3.0).unwrap(),
            DistributionSpec::uniform(0.5, 1.5).unwrap(),
            DistributionSpec::hyperexponential(vec![0.5, 0.5], vec![1.0, 4.0]).unwrap(),
            DistributionSpec::weibull(2.0, 1.0).unwrap(),
            DistributionSpec::gamma(0.5, 0.5).unwrap(),
        ] {
            let mu = 1.3 / a.mean();
            let phi = solve_phi(&a, mu).unwrap();
            let residual = (phi - a.lst(mu * (1.0 - phi)).unwrap()).abs();
            assert!(residual < 1e-10, "{a}: residual {residual}");
            assert!(phi > 0.0 && phi < 1.0);
        }
    }

    #[test]
    fn phi_near_criticality_converges() {
        let phi = solve_phi(&det(1.0), 1.0 / 0.98).unwrap();
        let residual = (phi - (-(1.0 - phi) / 0.98f64).exp()).abs();
        assert!(residual < 1e-10 && phi < 1.0);
    }

    #[test]
    fn tau_pmf_examples() {
        let p = tau_pmf(&det(1.0), 1.0, 0).unwrap();
        assert!((p - (-1.0f64).exp()).abs() < 1e-15);
        assert!((p - 0.36788).abs() < 5e-6);
        for k in 0..20 {
            let p = tau_pmf(&exp(2.0), 1.0, k).unwrap();
            let expected = (2.0 / 3.0) * (1.0f64 / 3.0).powi(k as i32);
            assert!((p - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn tau_pmf_closed_forms_match_quadrature() {
        for b in [
            exp(2.0),
            det(1.0),
            DistributionSpec::erlang(3, 2.0).unwrap(),
            DistributionSpec::gamma(0.7, 1.1).unwrap(),
            DistributionSpec::hyperexponential(vec![0.5, 0.5], vec![1.0, 4.0]).unwrap(),
            DistributionSpec::uniform(0.2, 1.4).unwrap(),
        ] {
            for k in [0, 1, 2, 5] {
                let closed = tau_pmf(&b, 1.3, k).unwrap();
                let quad = tau_pmf_quadrature(&b, 1.3, k).unwrap();
                assert!((closed - quad).abs() < 1e-9, "{b} k={k}: {closed} vs {quad}");
            }
        }
    }

    #[test]
    fn tau_pmf_normalizes_and_has_mixed_poisson_mean() {
        for b in [
            exp(2.0),
            det(1.0),
            DistributionSpec::hyperexponential(vec![0.5, 0.5], vec![1.0, 4.0]).unwrap(),
            DistributionSpec::weibull(2.0, 1.0).unwrap(),
            DistributionSpec::uniform(0.0, 2.0).unwrap(),
        ] {
            let lambda = 1.0;
            let pmf: Vec<f64> = (0..=500).map(|k| tau_pmf(&b, lambda, k).unwrap()).collect();
            let total: f64 = pmf.iter().sum();
            let mean: f64 = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
            assert!((total - 1.0).abs() < 1e-9, "{b}: total {total}");
            assert!((mean - lambda * b.mean()).abs() < 1e-8, "{b}: mean {mean}");
        }
    }

    #[test]
    fn bounds_mm_collapse_to_rho_power() {
        let model = SystemModel::finite(exp(1.0), exp(2.0), 3);
        let bs = bounds_for(&model).unwrap();
        assert!((bs.el_lower.unwrap() - 0.0625).abs() < 1e-12);
        assert!((bs.el_upper.unwrap() - 0.0625).abs() < 1e-12);
        assert_eq!(bs.applicability, Some(Applicability::TwoSidedGim1));
    }

    #[test]
    fn bounds_dm_two_sided() {
        let model = SystemModel::finite(det(1.0), exp(1.25), 2);
        let bs = bounds_for(&model).unwrap();
        let a_hat = (-1.25f64).exp();
        let lower = (a_hat / (1.0 - a_hat)).powi(3);
        assert!((bs.el_lower.unwrap() - lower).abs() < 1e-14);
        assert!((bs.el_lower.unwrap() - 0.064_747_427_770_883_78).abs() < 1e-12);
        assert!((bs.el_upper.unwrap() - 0.248_419_044_511_354_2).abs() < 1e-11);
        assert!((bs.phi.unwrap() - 0.628_629_796_496_946_4).abs() < 1e-12);
        let expected_enu_upper = 1.0 + bs.phi.unwrap() + bs.phi.unwrap().powi(2);
        assert!((bs.enu_upper.unwrap() - expected_enu_upper).abs() < 1e-14);
        assert!((bs.et_upper.unwrap() - expected_enu_upper / 1.25).abs() < 1e-14);
    }

    #[test]
    fn bounds_md_compound_tighter_than_gw() {
        let model = SystemModel::finite(exp(1.0), det(1.0), 1);
        let bs = bounds_for(&model).unwrap();
        let e = std::f64::consts::E;
        assert!((bs.el_upper.unwrap() - (e - 1.0)).abs() < 1e-12);
        assert!((bs.el_upper.unwrap() - 1.7183).abs() < 5e-5);
        assert!((bs.el_gw_poisson.unwrap() - 2.9525).abs() < 5e-5);
        assert!(bs.el_upper.unwrap() <= bs.el_gw_poisson.unwrap());
        assert_eq!(bs.applicability, Some(Applicability::Compound));
        assert!(bs.el_lower.is_none());
    }

    #[test]
    fn bounds_unsupported_model_is_empty() {
        // both laws NBU: no inequality covers this pair
        let model = SystemModel::finite(det(1.0), DistributionSpec::erlang(2, 3.0).unwrap(), 2);
        let bs = bounds_for(&model).unwrap();
        assert!(bs.is_empty());
        assert_eq!(bs.applicability, None);
        assert!(!bs.notes.is_empty());
    }

    #[test]
    fn bounds_at_criticality_flag_degenerate() {
        let model = SystemModel::finite(det(1.0), exp(1.0), 2);
        let bs = bounds_for(&model).unwrap();
        assert!(bs.degenerate);
        assert_eq!(bs.el_upper, Some(1.0));
    }

    #[test]
    fn ihr_lower_never_exceeds_upper() {
        for a in [
            det(1.0),
            DistributionSpec::erlang(2, 2.0).unwrap(),
            DistributionSpec::uniform(0.0, 2.0).unwrap(),
            DistributionSpec::weibull(3.0, 1.0).unwrap(),
        ] {
            for load in [0.3, 0.6, 0.9, 1.0] {
                let mu = 1.0 / (a.mean() * load);
                for n in 0..8 {
                    let model = SystemModel::finite(a.clone(), exp(mu), n);
                    let bs = bounds_for(&model).unwrap();
                    assert!(bs.el_lower.unwrap() <= bs.el_upper.unwrap() + 1e-12);
                    assert!(bs.enu_lower.unwrap() <= bs.enu_upper.unwrap() + 1e-12);
                }
            }
        }
    }

    #[test]
    fn nbu_service_ratio_exceeds_load() {
        // (1 - B̂(λ)) / B̂(λ) >= λ/μ for NBU service, reversed for NWU
        let lambda = 0.8;
        for b in [det(1.0), DistributionSpec::erlang(3, 2.0).unwrap(), DistributionSpec::uniform(0.0, 3.0).unwrap()] {
            let bh = b.lst(lambda).unwrap();
            assert!((1.0 - bh) / bh >= lambda * b.mean());
        }
        let h = DistributionSpec::hyperexponential(vec![0.5, 0.5], vec![1.0, 4.0]).unwrap();
        let bh = h.lst(lambda).unwrap();
        assert!((1.0 - bh) / bh <= lambda * h.mean());
    }

    #[test]
    fn infinite_buffer_requires_exponential_service() {
        assert!(SystemModel::new(exp(1.0), det(1.0), Buffer::Infinite).is_err());
        assert!(SystemModel::new(det(1.0), exp(2.0), Buffer::Infinite).is_ok());
    }
}
