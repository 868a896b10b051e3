//! Event-driven simulation of busy periods of the single-server FIFO loss queue.
//!
//! A busy period starts with an arrival to an empty system and ends at the next
//! departure that leaves the system empty. An arrival that finds `n + 1`
//! customers (the server plus `n` waiting places) is lost and changes nothing
//! but the counters.
//!
//! Besides losses, served customers and duration, each record carries the
//! crossing counts `f_n(j)` (arrivals that find `j` customers), and optionally
//! the number of direct sub-intervals inside each level-`j` interval and the
//! distances between consecutive level-1 excursions. The nested intervals are
//! tracked with a stack instead of being materialized.

use rand::Rng;
use serde::Serialize;

use crate::analytics::{Buffer, SystemModel};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::ordering::EmpiricalSample;
use crate::streams::replication_stream;

pub const DEFAULT_EVENT_CAP: u64 = 10_000_000;
pub const DEFAULT_RESAMPLE_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationOptions {
    pub event_cap: u64,
    pub collect_distances: bool,
    pub collect_inserted_counts: bool,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            event_cap: DEFAULT_EVENT_CAP,
            collect_distances: false,
            collect_inserted_counts: false,
        }
    }
}

/// Observables of one busy period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BusyPeriodRecord {
    /// `L_n = f_n(n + 1)`; always zero with an infinite buffer.
    pub losses: u64,
    /// `f_n(j)` for `j = 0..=n+1` (grows as needed with an infinite buffer).
    pub crossing_counts: Vec<u64>,
    /// `ν_n`.
    pub served: u64,
    /// `T_n`.
    pub duration: f64,
    /// Number of arrivals finding `j + 1` inside each closed level-`j` interval.
    pub inserted_counts: Option<Vec<u64>>,
    /// For every level-1 interval: time from its end to the next arrival.
    pub level0_distances: Option<Vec<f64>>,
    pub truncated: bool,
}

impl BusyPeriodRecord {
    pub fn arrivals(&self) -> u64 {
        self.crossing_counts.iter().sum()
    }

    /// `f(j)`, zero beyond the recorded range.
    pub fn crossing(&self, j: usize) -> u64 {
        self.crossing_counts.get(j).copied().unwrap_or(0)
    }
}

/// Simulates one busy period.
///
/// Simultaneous arrival and departure are resolved departure-first.
pub fn run_busy_period<R: Rng + ?Sized>(
    model: &SystemModel,
    rng: &mut R,
    options: &SimulationOptions,
) -> BusyPeriodRecord {
    let a = model.interarrival();
    let b = model.service();
    let buffer = model.buffer();
    let loss_level = match buffer {
        Buffer::Finite(n) => Some(n as usize + 1),
        Buffer::Infinite => None,
    };

    let mut crossing = vec![0u64; loss_level.map_or(2, |l| l + 1)];
    crossing[0] = 1;
    let mut in_system = 1usize;
    let mut served = 0u64;
    let mut time;
    let mut next_arrival = a.sample(rng);
    let mut next_departure = b.sample(rng);
    let mut events = 0u64;
    let mut truncated = false;

    // children counters of the open intervals, one per customer in system
    let mut open: Vec<u64> = Vec::new();
    let mut inserted = Vec::new();
    if options.collect_inserted_counts {
        open.push(0);
    }
    let mut distances = Vec::new();
    let mut level1_closed_at: Option<f64> = None;

    loop {
        if events >= options.event_cap {
            truncated = true;
            time = next_arrival.min(next_departure);
            break;
        }
        events += 1;

        if next_departure <= next_arrival {
            time = next_departure;
            served += 1;
            in_system -= 1;
            if options.collect_inserted_counts {
                inserted.push(open.pop().expect("one open interval per customer"));
            }
            if in_system == 0 {
                if let Some(start) = level1_closed_at.take() {
                    distances.push(next_arrival - start);
                }
                break;
            }
            if in_system == 1 && options.collect_distances {
                level1_closed_at = Some(time);
            }
            next_departure = time + b.sample(rng);
        } else {
            time = next_arrival;
            if let Some(start) = level1_closed_at.take() {
                distances.push(time - start);
            }
            let found = in_system;
            if buffer.admits(found) {
                if found >= crossing.len() {
                    crossing.resize(found + 1, 0);
                }
                crossing[found] += 1;
                in_system += 1;
                if options.collect_inserted_counts {
                    *open.last_mut().expect("busy period has an open interval") += 1;
                    open.push(0);
                }
            } else {
                crossing[found] += 1;
                if options.collect_inserted_counts {
                    *open.last_mut().expect("busy period has an open interval") += 1;
                }
                // Without waiting places a lost arrival is a zero-length level-1 interval.
                if found == 1 && options.collect_distances {
                    level1_closed_at = Some(time);
                }
            }
            next_arrival = time + a.sample(rng);
        }
    }

    let losses = loss_level.map_or(0, |l| crossing[l]);
    BusyPeriodRecord {
        losses,
        crossing_counts: crossing,
        served,
        duration: time,
        inserted_counts: options.collect_inserted_counts.then_some(inserted),
        level0_distances: options.collect_distances.then_some(distances),
        truncated,
    }
}

/// Replicated busy-period simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    pub model: SystemModel,
    pub replications: u64,
    pub seed: u64,
    pub options: SimulationOptions,
}

impl SimulationPlan {
    pub fn new(model: SystemModel, replications: u64, seed: u64) -> Result<Self> {
        if replications == 0 {
            return Err(Error::InvalidParameter("replications must be at least 1".into()));
        }
        Ok(Self {
            model,
            replications,
            seed,
            options: SimulationOptions::default(),
        })
    }

    pub fn with_options(mut self, options: SimulationOptions) -> Result<Self> {
        if options.event_cap == 0 {
            return Err(Error::InvalidParameter("event cap must be at least 1".into()));
        }
        self.options = options;
        Ok(self)
    }
}

/// All records of a plan, in replication order.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub seed: u64,
    pub mu: f64,
    pub records: Vec<BusyPeriodRecord>,
}

/// Runs every replication on its own stream derived from `(seed, index)`.
pub fn run_many(plan: &SimulationPlan, exec: Execution) -> SimulationOutput {
    let records = map_indexed(plan.replications, exec, |i| {
        let mut rng = replication_stream(plan.seed, i);
        run_busy_period(&plan.model, &mut rng, &plan.options)
    });
    SimulationOutput {
        seed: plan.seed,
        mu: plan.model.mu(),
        records,
    }
}

impl SimulationOutput {
    pub fn truncation_count(&self) -> usize {
        self.records.iter().filter(|r| r.truncated).count()
    }

    pub fn truncation_rate(&self) -> f64 {
        self.truncation_count() as f64 / self.records.len() as f64
    }

    fn complete(&self) -> impl Iterator<Item = &BusyPeriodRecord> {
        self.records.iter().filter(|r| !r.truncated)
    }

    fn collect(&self, label: &str, f: impl Fn(&BusyPeriodRecord) -> f64) -> EmpiricalSample {
        EmpiricalSample::new(label, self.complete().map(f).collect(), self.seed)
            .expect("simulated observables are finite")
            .with_truncations(self.truncation_count())
    }

    pub fn losses(&self) -> EmpiricalSample {
        self.collect("losses", |r| r.losses as f64)
    }

    pub fn served(&self) -> EmpiricalSample {
        self.collect("served", |r| r.served as f64)
    }

    pub fn duration(&self) -> EmpiricalSample {
        self.collect("duration", |r| r.duration)
    }

    pub fn crossing(&self, j: usize) -> EmpiricalSample {
        self.collect(&format!("f({j})"), |r| r.crossing(j) as f64)
    }

    /// Per-period `μ T_n − ν_n`, whose mean vanishes by Wald's identity.
    pub fn wald_residuals(&self) -> EmpiricalSample {
        let mu = self.mu;
        self.collect("mu*duration - served", |r| mu * r.duration - r.served as f64)
    }

    pub fn distance_pool(&self) -> EmpiricalSample {
        let values = self
            .complete()
            .filter_map(|r| r.level0_distances.as_ref())
            .flatten()
            .copied()
            .collect();
        EmpiricalSample::new("level-0 distances", values, self.seed)
            .expect("distances are finite")
            .with_truncations(self.truncation_count())
    }

    pub fn inserted_pool(&self) -> EmpiricalSample {
        let values = self
            .complete()
            .filter_map(|r| r.inserted_counts.as_ref())
            .flatten()
            .map(|&c| c as f64)
            .collect();
        EmpiricalSample::new("inserted counts", values, self.seed)
            .expect("counts are finite")
            .with_truncations(self.truncation_count())
    }
}

/// One distance between consecutive level-1 excursions of a busy period with
/// exponential service. Periods without a level-1 excursion are resampled.
pub fn sample_level0_distance<R: Rng + ?Sized>(
    model: &SystemModel,
    rng: &mut R,
    budget: usize,
) -> Result<f64> {
    if !model.service().is_exponential() {
        return Err(Error::InvalidParameter(
            "level-0 distances are defined for exponential service".into(),
        ));
    }
    let options = SimulationOptions {
        collect_distances: true,
        ..SimulationOptions::default()
    };
    for _ in 0..budget {
        let rec = run_busy_period(model, rng, &options);
        if rec.truncated {
            continue;
        }
        if let Some(&d) = rec.level0_distances.as_ref().and_then(|d| d.first()) {
            return Ok(d);
        }
    }
    Err(Error::ResampleBudget {
        budget,
        what: "no busy period produced a level-1 excursion".into(),
    })
}
