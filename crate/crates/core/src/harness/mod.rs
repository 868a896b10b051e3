//! Config-driven experiments: simulate `L_n` and the comparison processes,
//! compute the analytic bounds, and record a verdict per claim and buffer size.
//!
//! Every sample is drawn from a stream derived from the root seed and the
//! sample's own identity (`queue`/`n`, `geometric-gw`/generation, ...), so a
//! sample is shared by all claims that need it and adding a claim never
//! changes another claim's draws.

pub mod config;
pub mod report;

use std::collections::HashMap;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::analytics::{bounds_for, compute_r, solve_phi, BoundSet, GeometricOffspring, SystemModel};
use crate::branching::{run_replications, CompoundLoss, Gim1Process, Process, ProcessKind};
use crate::distributions::ReliabilityClass::{Dhr, Ihr, Nbu, Nwu};
use crate::distributions::{DistributionSpec, ReliabilityClassSet};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ordering::{check_dominance, check_fit, Claim, DominanceVerdict, EmpiricalSample, FitVerdict};
use crate::queue_sim::{run_many, SimulationOptions, SimulationOutput, SimulationPlan};
use crate::streams::SeedTree;

pub use config::{ClaimKind, ExperimentConfig, ModelConfig, OutputConfig, OutputFormat};
pub use report::Report;

/// Mean checks use a `3σ` allowance.
pub const SIGMA_MULTIPLIER: f64 = 3.0;
/// Claims whose samples lost more than this fraction to truncation are flagged.
pub const UNRELIABLE_TRUNCATION_RATE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    AtMost,
    AtLeast,
    Near,
}

/// `observed (relation) limit`, with `slack` added on the permissive side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub relation: Relation,
    pub limit: f64,
    pub slack: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, observed: f64, relation: Relation, limit: f64, slack: f64) -> Self {
        let passed = match relation {
            Relation::AtMost => observed <= limit + slack,
            Relation::AtLeast => observed >= limit - slack,
            Relation::Near => (observed - limit).abs() <= slack,
        };
        Self {
            name: name.into(),
            observed,
            relation,
            limit,
            slack,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanSummary {
    pub label: String,
    pub mean: f64,
    pub std_error: f64,
    pub n_obs: usize,
}

impl MeanSummary {
    fn of(sample: &EmpiricalSample) -> Result<Self> {
        let n = sample.n_obs();
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "`{}` has {n} observations; at least two are needed",
                sample.label
            )));
        }
        let mean = sample.mean();
        let ss: f64 = sample.values().iter().map(|v| (v - mean) * (v - mean)).sum();
        let std_error = (ss / (n - 1) as f64 / n as f64).sqrt();
        Ok(Self {
            label: sample.label.clone(),
            mean,
            std_error,
            n_obs: n,
        })
    }

    fn slack(&self) -> f64 {
        SIGMA_MULTIPLIER * self.std_error
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceRecord {
    pub left: String,
    pub right: String,
    pub verdict: DominanceVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRecord {
    pub sample: String,
    pub reference: String,
    pub verdict: FitVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimEntry {
    pub claim: ClaimKind,
    pub n: u32,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub unreliable: bool,
    pub truncations: usize,
    pub bounds: Vec<NamedValue>,
    pub means: Vec<MeanSummary>,
    pub dominance: Vec<DominanceRecord>,
    pub fits: Vec<FitRecord>,
    pub checks: Vec<Check>,
}

impl ClaimEntry {
    fn new(claim: ClaimKind, n: u32) -> Self {
        Self {
            claim,
            n,
            status: Status::Skip,
            reason: None,
            unreliable: false,
            truncations: 0,
            bounds: Vec::new(),
            means: Vec::new(),
            dominance: Vec::new(),
            fits: Vec::new(),
            checks: Vec::new(),
        }
    }

    fn skipped(claim: ClaimKind, n: u32, reason: impl Into<String>) -> Self {
        Self {
            reason: Some(reason.into()),
            ..Self::new(claim, n)
        }
    }

    fn bound(&mut self, name: &str, value: f64) {
        self.bounds.push(NamedValue {
            name: name.into(),
            value,
        });
    }

    fn mean(&mut self, sample: &EmpiricalSample) -> Result<MeanSummary> {
        let m = MeanSummary::of(sample)?;
        self.means.push(m.clone());
        self.note_truncations(sample);
        Ok(m)
    }

    fn note_truncations(&mut self, sample: &EmpiricalSample) {
        if sample.truncation_count > 0 {
            self.truncations = self.truncations.max(sample.truncation_count);
            let total = sample.n_obs() + sample.truncation_count;
            if sample.truncation_count as f64 > UNRELIABLE_TRUNCATION_RATE * total as f64 {
                self.unreliable = true;
            }
        }
    }

    fn dominance(&mut self, x: &EmpiricalSample, y: &EmpiricalSample, claim: Claim, alpha: f64) -> Result<()> {
        let verdict = check_dominance(x, y, claim, alpha)?;
        self.note_truncations(x);
        self.note_truncations(y);
        self.dominance.push(DominanceRecord {
            left: x.label.clone(),
            right: y.label.clone(),
            verdict,
        });
        Ok(())
    }

    fn finish(mut self) -> Self {
        let total = self.checks.len() + self.dominance.len() + self.fits.len();
        if total == 0 {
            self.status = Status::Skip;
            if self.reason.is_none() {
                self.reason = Some("nothing to check".into());
            }
            return self;
        }
        let ok = self.checks.iter().all(|c| c.passed)
            && self.dominance.iter().all(|d| d.verdict.is_consistent())
            && self.fits.iter().all(|f| f.verdict.decision == crate::ordering::Decision::Consistent);
        self.status = if ok { Status::Pass } else { Status::Fail };
        self
    }
}

/// Samples shared between claims, keyed by their identity.
struct SampleStore<'a> {
    config: &'a ExperimentConfig,
    root: SeedTree,
    exec: Execution,
    collect_distances: bool,
    queues: HashMap<u32, SimulationOutput>,
    processes: HashMap<(ProcessKind, u32), EmpiricalSample>,
}

impl<'a> SampleStore<'a> {
    fn queue(&mut self, n: u32) -> Result<&SimulationOutput> {
        if !self.queues.contains_key(&n) {
            let model = self.config.model.with_buffer(n);
            let seed = self.root.child_label("queue").child(u64::from(n)).seed();
            let plan = SimulationPlan::new(model, self.config.replications, seed)?.with_options(SimulationOptions {
                collect_distances: self.collect_distances,
                ..SimulationOptions::default()
            })?;
            let out = run_many(&plan, self.exec);
            self.queues.insert(n, out);
        }
        Ok(&self.queues[&n])
    }

    fn process(&mut self, kind: ProcessKind, generation: u32, build: impl FnOnce() -> Result<Process>) -> Result<EmpiricalSample> {
        if let Some(s) = self.processes.get(&(kind, generation)) {
            return Ok(s.clone());
        }
        let process = build()?;
        let label = match kind {
            ProcessKind::GeometricGw => "geometric-gw",
            ProcessKind::Compound => "compound",
            ProcessKind::Gim1Type => "gim1-type",
        };
        let seed = self.root.child_label(label).child(u64::from(generation)).seed();
        let out = run_replications(&process, generation, self.config.replications, seed, self.exec)?;
        let sample = out.empirical();
        self.processes.insert((kind, generation), sample.clone());
        Ok(sample)
    }
}

struct Context {
    a_classes: ReliabilityClassSet,
    b_classes: ReliabilityClassSet,
    lambda: f64,
    mu: f64,
    rho: f64,
}

fn class_text(name: &str, law: &DistributionSpec, classes: &ReliabilityClassSet) -> String {
    format!("{name} = {law} is {classes}")
}

/// Runs every configured claim for every buffer size.
pub fn run_experiment(config: &ExperimentConfig, exec: Execution) -> Result<Report> {
    config.validate()?;
    let started = Instant::now();
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);

    let a = &config.model.interarrival;
    let b = &config.model.service;
    let ctx = Context {
        a_classes: a.classify(),
        b_classes: b.classify(),
        lambda: 1.0 / a.mean(),
        mu: 1.0 / b.mean(),
        rho: b.mean() / a.mean(),
    };
    let mut store = SampleStore {
        config,
        root: SeedTree::new(config.seed),
        exec,
        collect_distances: config.claims.contains(&ClaimKind::DistanceMonotonicity),
        queues: HashMap::new(),
        processes: HashMap::new(),
    };

    let ns = config.sorted_n_values();
    let mut entries = Vec::new();
    for &claim in &config.claims {
        for (i, &n) in ns.iter().enumerate() {
            let previous = if i > 0 { Some(ns[i - 1]) } else { None };
            let entry = match run_claim(claim, n, previous, config, &ctx, &mut store) {
                Ok(e) => e.finish(),
                Err(e) => ClaimEntry::skipped(claim, n, format!("not run: {e}")),
            };
            entries.push(entry);
        }
    }

    let truncations = ns
        .iter()
        .filter_map(|n| {
            store.queues.get(n).map(|q| report::TruncationSummary {
                n: *n,
                count: q.truncation_count(),
                rate: q.truncation_rate(),
            })
        })
        .collect();

    Ok(Report::assemble(
        config,
        ctx.lambda,
        ctx.mu,
        ctx.rho,
        truncations,
        entries,
        report::Timing {
            started_unix: timestamp,
            runtime_seconds: started.elapsed().as_secs_f64(),
        },
    ))
}

fn gw_offspring(model: &SystemModel) -> Result<GeometricOffspring> {
    GeometricOffspring::new(compute_r(model.interarrival(), model.service())?)
}

fn run_claim(
    claim: ClaimKind,
    n: u32,
    previous: Option<u32>,
    config: &ExperimentConfig,
    ctx: &Context,
    store: &mut SampleStore,
) -> Result<ClaimEntry> {
    let a = &config.model.interarrival;
    let b = &config.model.service;
    let alpha = config.alpha;
    let model = config.model.with_buffer(n);
    let mut e = ClaimEntry::new(claim, n);
    let classes = format!(
        "{}; {}",
        class_text("A", a, &ctx.a_classes),
        class_text("B", b, &ctx.b_classes)
    );

    match claim {
        ClaimKind::GwLower | ClaimKind::GwUpper => {
            let lower = claim == ClaimKind::GwLower;
            let applies = if lower {
                ctx.a_classes.contains(Nbu) && ctx.b_classes.contains(Nwu)
            } else {
                ctx.a_classes.contains(Nwu) && ctx.b_classes.contains(Nbu)
            };
            if !applies {
                let need = if lower { "A NBU and B NWU" } else { "A NWU and B NBU" };
                return Ok(ClaimEntry::skipped(claim, n, format!("requires {need}; {classes}")));
            }
            let offspring = gw_offspring(&model)?;
            let bound = offspring.generation_mean(n + 1);
            e.bound("r", offspring.r());
            e.bound("E[X_{n+1}]", bound);
            let losses = store.queue(n)?.losses();
            let gw = store.process(ProcessKind::GeometricGw, n + 1, || Ok(Process::GeometricGw(offspring)))?;
            let m = e.mean(&losses)?;
            e.mean(&gw)?;
            if lower {
                e.dominance(&losses, &gw, Claim::LeftDominates, alpha)?;
                e.checks.push(Check::new("E[L_n] >= E[X_{n+1}]", m.mean, Relation::AtLeast, bound, m.slack()));
            } else {
                e.dominance(&losses, &gw, Claim::RightDominates, alpha)?;
                e.checks.push(Check::new("E[L_n] <= E[X_{n+1}]", m.mean, Relation::AtMost, bound, m.slack()));
            }
        }
        ClaimKind::Compound => {
            if !a.is_exponential() {
                return Ok(ClaimEntry::skipped(claim, n, format!("requires Poisson arrivals; {classes}")));
            }
            let nwu = ctx.b_classes.contains(Nwu);
            let nbu = ctx.b_classes.contains(Nbu);
            if !(nwu || nbu) {
                return Ok(ClaimEntry::skipped(claim, n, format!("requires B NBU or NWU; {classes}")));
            }
            let compound = CompoundLoss::for_service(b.clone(), ctx.lambda)?;
            let b_hat = 1.0 - compound.offspring().r();
            let ratio = (1.0 - b_hat) / b_hat;
            let bound = ctx.rho * ratio.powi(n as i32);
            let generation_bound = ratio.powi(n as i32 + 1);
            e.bound("r", compound.offspring().r());
            e.bound("compound bound", bound);
            e.bound("generation bound", generation_bound);
            let losses = store.queue(n)?.losses();
            let sums = store.process(ProcessKind::Compound, n, || Ok(Process::Compound(compound)))?;
            let m = e.mean(&losses)?;
            e.mean(&sums)?;
            if nwu {
                e.dominance(&losses, &sums, Claim::LeftDominates, alpha)?;
                e.checks.push(Check::new("E[L_n] >= compound bound", m.mean, Relation::AtLeast, bound, m.slack()));
                e.checks.push(Check::new(
                    "compound lower bound >= generation bound",
                    bound,
                    Relation::AtLeast,
                    generation_bound,
                    tolerance(generation_bound),
                ));
            }
            if nbu {
                e.dominance(&losses, &sums, Claim::RightDominates, alpha)?;
                e.checks.push(Check::new("E[L_n] <= compound bound", m.mean, Relation::AtMost, bound, m.slack()));
                e.checks.push(Check::new(
                    "compound upper bound <= generation bound",
                    bound,
                    Relation::AtMost,
                    generation_bound,
                    tolerance(generation_bound),
                ));
            }
        }
        ClaimKind::Gim1Upper | ClaimKind::TwoSided => {
            let mu = match b.exponential_rate() {
                Some(mu) => mu,
                None => {
                    return Ok(ClaimEntry::skipped(claim, n, format!("requires exponential service; {classes}")))
                }
            };
            let ihr = ctx.a_classes.contains(Ihr);
            let dhr = ctx.a_classes.contains(Dhr);
            if !(ihr || dhr) {
                return Ok(ClaimEntry::skipped(claim, n, format!("requires A IHR or DHR; {classes}")));
            }
            if ctx.rho > 1.0 + crate::analytics::CRITICAL_LOAD_TOLERANCE {
                return Ok(ClaimEntry::skipped(claim, n, format!("requires load at most 1, got {}", ctx.rho)));
            }
            let losses = store.queue(n)?.losses();
            let m = e.mean(&losses)?;
            if claim == ClaimKind::Gim1Upper {
                let phi = solve_phi(a, mu)?;
                let bound = phi.powi(n as i32 + 1);
                e.bound("phi", phi);
                e.bound("phi^{n+1}", bound);
                let y = store.process(ProcessKind::Gim1Type, n + 1, || {
                    Ok(Process::Gim1Type(Gim1Process::new(a.clone(), mu)?))
                })?;
                e.mean(&y)?;
                if ihr {
                    e.dominance(&losses, &y, Claim::RightDominates, alpha)?;
                    e.checks.push(Check::new("E[L_n] <= phi^{n+1}", m.mean, Relation::AtMost, bound, m.slack()));
                }
                if dhr {
                    e.dominance(&losses, &y, Claim::LeftDominates, alpha)?;
                    e.checks.push(Check::new("E[L_n] >= phi^{n+1}", m.mean, Relation::AtLeast, bound, m.slack()));
                }
            } else {
                let bs = bounds_for(&model)?;
                let (lo, hi) = match (bs.el_lower, bs.el_upper) {
                    (Some(lo), Some(hi)) => (lo, hi),
                    _ => {
                        return Ok(ClaimEntry::skipped(
                            claim,
                            n,
                            format!("no two-sided bound available; {classes}"),
                        ))
                    }
                };
                e.bound("lower", lo);
                e.bound("upper", hi);
                e.checks.push(Check::new("E[L_n] >= lower", m.mean, Relation::AtLeast, lo, m.slack()));
                e.checks.push(Check::new("E[L_n] <= upper", m.mean, Relation::AtMost, hi, m.slack()));
            }
        }
        ClaimKind::DistanceMonotonicity => {
            if !b.is_exponential() {
                return Ok(ClaimEntry::skipped(claim, n, format!("requires exponential service; {classes}")));
            }
            let ihr = ctx.a_classes.contains(Ihr);
            let dhr = ctx.a_classes.contains(Dhr);
            if !(ihr || dhr) {
                return Ok(ClaimEntry::skipped(claim, n, format!("requires A IHR or DHR; {classes}")));
            }
            let current = store.queue(n)?.distance_pool().relabel(format!("d^{n}"));
            if current.n_obs() < 2 {
                return Ok(ClaimEntry::skipped(claim, n, "fewer than two distances observed"));
            }
            e.note_truncations(&current);
            e.bound("pooled distances", current.n_obs() as f64);
            if n == 0 {
                let verdict = check_fit(&current, |x| a.cdf(x), alpha)?;
                e.fits.push(FitRecord {
                    sample: current.label.clone(),
                    reference: format!("A = {a}"),
                    verdict,
                });
            }
            match previous {
                Some(k) => {
                    let before = store.queue(k)?.distance_pool().relabel(format!("d^{k}"));
                    if before.n_obs() < 2 {
                        return Ok(ClaimEntry::skipped(claim, n, format!("fewer than two distances at n = {k}")));
                    }
                    if ihr {
                        e.dominance(&current, &before, Claim::RightDominates, alpha)?;
                    }
                    if dhr {
                        e.dominance(&current, &before, Claim::LeftDominates, alpha)?;
                    }
                }
                None if n == 0 => {}
                None => {
                    return Ok(ClaimEntry::skipped(claim, n, "smallest buffer size listed; nothing to compare with"));
                }
            }
        }
        ClaimKind::WaldConsistency => {
            let out = store.queue(n)?;
            let residual = out.wald_residuals();
            let served = out.served();
            let duration = out.duration();
            let r = e.mean(&residual)?;
            e.mean(&served)?;
            e.mean(&duration)?;
            e.bound("mu", ctx.mu);
            e.checks.push(Check::new("mean of mu*T_n - nu_n", r.mean, Relation::Near, 0.0, r.slack()));
        }
        ClaimKind::MeanBounds => {
            let bs = bounds_for(&model)?;
            if bs.is_empty() {
                return Ok(ClaimEntry::skipped(claim, n, format!("no bound applies; {classes}")));
            }
            let out = store.queue(n)?;
            let (losses, served, duration) = (out.losses(), out.served(), out.duration());
            let ml = e.mean(&losses)?;
            let mv = e.mean(&served)?;
            let mt = e.mean(&duration)?;
            push_bound_checks(&mut e, &bs, &ml, &mv, &mt);
        }
    }
    Ok(e)
}

fn tolerance(v: f64) -> f64 {
    1e-12 * v.abs().max(1.0)
}

fn push_bound_checks(e: &mut ClaimEntry, bs: &BoundSet, ml: &MeanSummary, mv: &MeanSummary, mt: &MeanSummary) {
    let sides = [
        ("E[L_n]", ml, bs.el_lower, bs.el_upper),
        ("E[nu_n]", mv, bs.enu_lower, bs.enu_upper),
        ("E[T_n]", mt, bs.et_lower, bs.et_upper),
    ];
    for (name, m, lo, hi) in sides {
        if let Some(lo) = lo {
            e.bound(&format!("{name} lower"), lo);
            e.checks.push(Check::new(format!("{name} >= lower"), m.mean, Relation::AtLeast, lo, m.slack()));
        }
        if let Some(hi) = hi {
            e.bound(&format!("{name} upper"), hi);
            e.checks.push(Check::new(format!("{name} <= upper"), m.mean, Relation::AtMost, hi, m.slack()));
        }
    }
}
