//! Experiment reports: JSON for machines, aligned text for people, CSV rows
//! for spreadsheets.
//!
//! Everything except the `timing` block is a pure function of the config and
//! seed; [`Report::without_timing`] gives the part that is compared for
//! reproducibility.

use std::fmt::Write as _;

use serde::Serialize;

use super::config::{ExperimentConfig, OutputFormat};
use super::{ClaimEntry, Relation, Status};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary {
    pub interarrival: DistributionSpec,
    pub service: DistributionSpec,
    pub interarrival_classes: Vec<String>,
    pub service_classes: Vec<String>,
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationSummary {
    pub n: u32,
    pub count: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub started_unix: u64,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub name: String,
    pub version: String,
    pub seed: u64,
    pub replications: u64,
    pub alpha: f64,
    pub n_values: Vec<u32>,
    pub model: ModelSummary,
    pub truncations: Vec<TruncationSummary>,
    pub entries: Vec<ClaimEntry>,
    pub summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

fn class_names(law: &DistributionSpec) -> Vec<String> {
    law.classify().flags().iter().map(|c| c.to_string()).collect()
}

impl Report {
    pub(crate) fn assemble(
        config: &ExperimentConfig,
        lambda: f64,
        mu: f64,
        rho: f64,
        truncations: Vec<TruncationSummary>,
        entries: Vec<ClaimEntry>,
        timing: Timing,
    ) -> Self {
        let mut summary = Summary::default();
        for e in &entries {
            match e.status {
                Status::Pass => summary.passed += 1,
                Status::Fail => summary.failed += 1,
                Status::Skip => summary.skipped += 1,
            }
        }
        let model = &config.model;
        Self {
            name: config.name.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            replications: config.replications,
            alpha: config.alpha,
            n_values: config.sorted_n_values(),
            model: ModelSummary {
                interarrival: model.interarrival.clone(),
                service: model.service.clone(),
                interarrival_classes: class_names(&model.interarrival),
                service_classes: class_names(&model.service),
                lambda,
                mu,
                rho,
            },
            truncations,
            entries,
            summary,
            timing: Some(timing),
        }
    }

    pub fn all_passed_or_skipped(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn without_timing(&self) -> Self {
        Self {
            timing: None,
            ..self.clone()
        }
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Text => Ok(self.to_text()),
            OutputFormat::Csv => self.to_csv(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let title = if self.name.is_empty() { "experiment" } else { &self.name };
        let _ = writeln!(out, "{title} (lossbound {})", self.version);
        let m = &self.model;
        let _ = writeln!(
            out,
            "A = {} {{{}}}, B = {} {{{}}}, lambda = {}, mu = {}, rho = {}",
            m.interarrival,
            m.interarrival_classes.join(", "),
            m.service,
            m.service_classes.join(", "),
            fmt_num(m.lambda),
            fmt_num(m.mu),
            fmt_num(m.rho),
        );
        let _ = writeln!(
            out,
            "seed = {}, replications = {}, alpha = {}",
            self.seed, self.replications, self.alpha
        );
        for t in &self.truncations {
            if t.count > 0 {
                let _ = writeln!(out, "n = {}: {} truncated busy periods ({:.4}%)", t.n, t.count, 100.0 * t.rate);
            }
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<24} {:>3}  {:<6} detail", "claim", "n", "status");
        for e in &self.entries {
            let status = match e.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Skip => "skip",
            };
            let flag = if e.unreliable { " (unreliable: truncation above 1%)" } else { "" };
            let _ = writeln!(
                out,
                "{:<24} {:>3}  {:<6} {}{}",
                e.claim.name(),
                e.n,
                status,
                e.reason.as_deref().unwrap_or(""),
                flag
            );
            for m in &e.means {
                let _ = writeln!(
                    out,
                    "{:36}mean {:<28} {} +- {} (n = {})",
                    "",
                    m.label,
                    fmt_num(m.mean),
                    fmt_num(m.std_error),
                    m.n_obs
                );
            }
            for c in &e.checks {
                let rel = match c.relation {
                    Relation::AtMost => "<=",
                    Relation::AtLeast => ">=",
                    Relation::Near => "~=",
                };
                let _ = writeln!(
                    out,
                    "{:36}{:<4} {}: {} {} {} (slack {})",
                    "",
                    if c.passed { "ok" } else { "BAD" },
                    c.name,
                    fmt_num(c.observed),
                    rel,
                    fmt_num(c.limit),
                    fmt_num(c.slack)
                );
            }
            for d in &e.dominance {
                let rel = match d.verdict.claim {
                    crate::ordering::Claim::LeftDominates => ">=st",
                    crate::ordering::Claim::RightDominates => "<=st",
                };
                let _ = writeln!(
                    out,
                    "{:36}{:<4} {} {} {}: excess {} beyond band {} at {}",
                    "",
                    if d.verdict.is_consistent() { "ok" } else { "BAD" },
                    d.left,
                    rel,
                    d.right,
                    fmt_num(d.verdict.max_violation.max(0.0)),
                    fmt_num(d.verdict.band_width),
                    fmt_num(d.verdict.worst_point)
                );
            }
            for f in &e.fits {
                let _ = writeln!(
                    out,
                    "{:36}{:<4} {} ~ {}: sup gap {} within band {}",
                    "",
                    if f.verdict.decision == crate::ordering::Decision::Consistent { "ok" } else { "BAD" },
                    f.sample,
                    f.reference,
                    fmt_num(f.verdict.sup_gap),
                    fmt_num(f.verdict.band_width)
                );
            }
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{} passed, {} failed, {} skipped",
            self.summary.passed, self.summary.failed, self.summary.skipped
        );
        if let Some(t) = &self.timing {
            let _ = writeln!(out, "runtime {:.3} s (started at unix time {})", t.runtime_seconds, t.started_unix);
        }
        out
    }

    /// One row per check, dominance test and fit; skipped entries get one row.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Config(e.to_string());
        w.write_record(["claim", "n", "status", "unreliable", "kind", "item", "observed", "limit", "slack", "passed", "reason"])
            .map_err(csv_err)?;
        for e in &self.entries {
            let status = match e.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Skip => "skip",
            };
            let n = e.n.to_string();
            let unreliable = e.unreliable.to_string();
            let reason = e.reason.clone().unwrap_or_default();
            let mut rows: Vec<[String; 6]> = Vec::new();
            for c in &e.checks {
                rows.push([
                    "check".into(),
                    c.name.clone(),
                    c.observed.to_string(),
                    c.limit.to_string(),
                    c.slack.to_string(),
                    c.passed.to_string(),
                ]);
            }
            for d in &e.dominance {
                let rel = match d.verdict.claim {
                    crate::ordering::Claim::LeftDominates => ">=st",
                    crate::ordering::Claim::RightDominates => "<=st",
                };
                rows.push([
                    "dominance".into(),
                    format!("{} {} {}", d.left, rel, d.right),
                    d.verdict.max_violation.to_string(),
                    "0".into(),
                    d.verdict.band_width.to_string(),
                    d.verdict.is_consistent().to_string(),
                ]);
            }
            for f in &e.fits {
                rows.push([
                    "fit".into(),
                    format!("{} ~ {}", f.sample, f.reference),
                    f.verdict.sup_gap.to_string(),
                    f.verdict.band_width.to_string(),
                    "0".into(),
                    (f.verdict.decision == crate::ordering::Decision::Consistent).to_string(),
                ]);
            }
            if rows.is_empty() {
                rows.push(Default::default());
            }
            for row in rows {
                let mut record = vec![e.claim.name().to_string(), n.clone(), status.into(), unreliable.clone()];
                record.extend(row);
                record.push(reason.clone());
                w.write_record(&record).map_err(csv_err)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
    }
}

fn fmt_num(v: f64) -> String {
    if v == 0.0 || (1e-4..1e6).contains(&v.abs()) {
        format!("{v:.6}")
    } else {
        format!("{v:.4e}")
    }
}
