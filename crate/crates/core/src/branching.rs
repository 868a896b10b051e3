//! Comparison processes: the geometric Galton-Watson process, the compound
//! loss process `Σ_{i ≤ X_n} τ_i`, and the GI/M/1-type process whose
//! generation sizes are the crossing counts `f(n)` of an infinite-buffer
//! `A/M/1` busy period.

use rand::Rng;
use rand_distr::{Distribution, Geometric, Poisson};
use serde::Serialize;

use crate::analytics::{Buffer, GeometricOffspring, SystemModel};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::ordering::EmpiricalSample;
use crate::queue_sim::{run_busy_period, SimulationOptions, DEFAULT_RESAMPLE_BUDGET};
use crate::streams::replication_stream;

pub const POPULATION_CAP: u64 = 100_000_000;
const R_CONSISTENCY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessKind {
    GeometricGw,
    Compound,
    Gim1Type,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GenerationSample {
    pub generation: u32,
    pub count: u64,
    pub process: ProcessKind,
}

/// Size of generation `n` of a Galton-Watson process with `X_0 = 1` and
/// offspring law `P[κ = m] = r^m (1 − r)`.
pub fn sample_gw<R: Rng + ?Sized>(offspring: &GeometricOffspring, n: u32, rng: &mut R) -> Result<u64> {
    let geo = Geometric::new(1.0 - offspring.r())
        .map_err(|e| Error::InvalidParameter(format!("offspring law: {e}")))?;
    let mut size = 1u64;
    for _ in 0..n {
        if size == 0 {
            break;
        }
        let mut next = 0u64;
        for _ in 0..size {
            next += geo.sample(rng);
            if next > POPULATION_CAP {
                return Err(Error::PopulationCap { cap: POPULATION_CAP });
            }
        }
        size = next;
    }
    Ok(size)
}

/// `X_n` summed over i.i.d. `τ_i ~ Poisson(λ S)`, `S ~ B`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundLoss {
    offspring: GeometricOffspring,
    service: DistributionSpec,
    lambda: f64,
}

impl CompoundLoss {
    pub fn new(r: f64, service: DistributionSpec, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("arrival rate must be positive, got {lambda}")));
        }
        let offspring = GeometricOffspring::new(r)?;
        let implied = 1.0 - service.lst(lambda)?;
        if (implied - r).abs() > R_CONSISTENCY_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "r = {r} does not match 1 − B̂(λ) = {implied}"
            )));
        }
        Ok(Self {
            offspring,
            service,
            lambda,
        })
    }

    /// Uses `r = 1 − B̂(λ)`.
    pub fn for_service(service: DistributionSpec, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("arrival rate must be positive, got {lambda}")));
        }
        let r = 1.0 - service.lst(lambda)?;
        Self::new(r, service, lambda)
    }

    pub fn offspring(&self) -> &GeometricOffspring {
        &self.offspring
    }

    /// `E[Σ] = (λ / μ) (r / (1 − r))^n`.
    pub fn mean(&self, n: u32) -> f64 {
        self.lambda * self.service.mean() * self.offspring.generation_mean(n)
    }

    pub fn sample_tau<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let intensity = self.lambda * self.service.sample(rng);
        if intensity <= 0.0 {
            return 0;
        }
        Poisson::new(intensity).expect("positive finite intensity").sample(rng) as u64
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: u32, rng: &mut R) -> Result<u64> {
        let x = sample_gw(&self.offspring, n, rng)?;
        Ok((0..x).map(|_| self.sample_tau(rng)).sum())
    }
}

/// Generation sizes `f(0), f(1), …` read off busy periods of an infinite-buffer
/// `A/M/1` queue.
#[derive(Debug, Clone, PartialEq)]
pub struct Gim1Process {
    model: SystemModel,
    options: SimulationOptions,
    budget: usize,
}

/// Generations of one accepted busy period, plus the number of truncated
/// periods discarded before it.
#[derive(Debug, Clone, PartialEq)]
pub struct Gim1Draw {
    pub counts: Vec<u64>,
    pub resampled: usize,
}

impl Gim1Process {
    pub fn new(interarrival: DistributionSpec, mu: f64) -> Result<Self> {
        let service = DistributionSpec::exponential(mu)?;
        let model = SystemModel::new(interarrival, service, Buffer::Infinite)?;
        let lambda = model.lambda();
        if lambda / mu > 1.0 + crate::analytics::CRITICAL_LOAD_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "load {} exceeds 1; busy periods are not finite",
                lambda / mu
            )));
        }
        Ok(Self {
            model,
            options: SimulationOptions::default(),
            budget: DEFAULT_RESAMPLE_BUDGET,
        })
    }

    pub fn from_model(model: &SystemModel) -> Result<Self> {
        let mu = model.service().exponential_rate().ok_or_else(|| {
            Error::InvalidParameter("the GI/M/1-type process needs exponential service".into())
        })?;
        Self::new(model.interarrival().clone(), mu)
    }

    pub fn with_event_cap(mut self, cap: u64) -> Self {
        self.options.event_cap = cap.max(1);
        self
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn model(&self) -> &SystemModel {
        &self.model
    }

    /// `f(0..=max_n)` from one untruncated busy period.
    pub fn sample_generations<R: Rng + ?Sized>(&self, max_n: u32, rng: &mut R) -> Result<Gim1Draw> {
        for resampled in 0..self.budget {
            let rec = run_busy_period(&self.model, rng, &self.options);
            if rec.truncated {
                continue;
            }
            let counts = (0..=max_n as usize).map(|j| rec.crossing(j)).collect();
            return Ok(Gim1Draw { counts, resampled });
        }
        Err(Error::ResampleBudget {
            budget: self.budget,
            what: "every busy period hit the event cap".into(),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: u32, rng: &mut R) -> Result<u64> {
        Ok(self.sample_generations(n, rng)?.counts[n as usize])
    }
}

/// A comparison process with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Process {
    GeometricGw(GeometricOffspring),
    Compound(CompoundLoss),
    Gim1Type(Gim1Process),
}

impl Process {
    pub fn kind(&self) -> ProcessKind {
        match self {
            Process::GeometricGw(_) => ProcessKind::GeometricGw,
            Process::Compound(_) => ProcessKind::Compound,
            Process::Gim1Type(_) => ProcessKind::Gim1Type,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchingOutput {
    pub process: ProcessKind,
    pub generation: u32,
    pub seed: u64,
    pub counts: Vec<u64>,
    /// Truncated busy periods discarded (GI/M/1-type only).
    pub resampled: usize,
}

impl BranchingOutput {
    pub fn samples(&self) -> impl Iterator<Item = GenerationSample> + '_ {
        self.counts.iter().map(|&count| GenerationSample {
            generation: self.generation,
            count,
            process: self.process,
        })
    }

    pub fn empirical(&self) -> EmpiricalSample {
        let label = match self.process {
            ProcessKind::GeometricGw => format!("X_{}", self.generation),
            ProcessKind::Compound => format!("compound sum, n = {}", self.generation),
            ProcessKind::Gim1Type => format!("f({})", self.generation),
        };
        EmpiricalSample::from_counts(label, &self.counts, self.seed).with_truncations(self.resampled)
    }
}

/// Draws generation `n` once per replication, each on its own stream.
pub fn run_replications(
    process: &Process,
    n: u32,
    replications: u64,
    seed: u64,
    exec: Execution,
) -> Result<BranchingOutput> {
    let draws = map_indexed(replications, exec, |i| {
        let mut rng = replication_stream(seed, i);
        match process {
            Process::GeometricGw(g) => sample_gw(g, n, &mut rng).map(|c| (c, 0)),
            Process::Compound(c) => c.sample(n, &mut rng).map(|c| (c, 0)),
            Process::Gim1Type(p) => p
                .sample_generations(n, &mut rng)
                .map(|d| (d.counts[n as usize], d.resampled)),
        }
    });
    let mut counts = Vec::with_capacity(draws.len());
    let mut resampled = 0;
    for d in draws {
        let (c, r) = d?;
        counts.push(c);
        resampled += r;
    }
    Ok(BranchingOutput {
        process: process.kind(),
        generation: n,
        seed,
        counts,
        resampled,
    })
}
