use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, trial_rng};

use super::config::{Assertion, ExperimentConfig};
use super::resources::{resource_table, ResourceRow};
use super::scenarios::{run_trial, TrialOutcome};
use super::stats::Rate;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u64,
    /// Derived seed; `trial_rng(config.seed, index)` reproduces it.
    pub seed: u64,
    pub flags: BTreeMap<String, bool>,
    pub metrics: BTreeMap<String, f64>,
    pub public_queries: u64,
    pub private_queries: u64,
}

impl TrialRecord {
    fn from_outcome(index: u64, seed: u64, o: TrialOutcome) -> Self {
        TrialRecord {
            index,
            seed,
            flags: o.flags,
            metrics: o.metrics,
            public_queries: o.public_queries,
            private_queries: o.private_queries,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub sum: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub trials: usize,
    pub public_queries: u64,
    pub private_queries: u64,
    pub mean_public_queries: f64,
    pub mean_private_queries: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssertionResult {
    pub assertion: Assertion,
    pub rate: Option<Rate>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRecord>,
    pub rates: BTreeMap<String, Rate>,
    pub metrics: BTreeMap<String, MetricSummary>,
    pub totals: Totals,
    pub resources: Vec<ResourceRow>,
    pub assertions: Vec<AssertionResult>,
    pub wall_clock_secs: f64,
}

impl ExperimentReport {
    pub fn all_assertions_pass(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn rate(&self, flag: &str) -> Option<Rate> {
        self.rates.get(flag).copied()
    }
}

/// Runs one trial exactly as `run_experiment` would.
pub fn replay_trial(cfg: &ExperimentConfig, index: u64) -> Result<TrialRecord> {
    cfg.validate()?;
    let mut rng = trial_rng(cfg.seed, index);
    let o = run_trial(cfg, index, &mut rng)?;
    Ok(TrialRecord::from_outcome(index, derive_seed(cfg.seed, index), o))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let go = || -> Result<Vec<TrialRecord>> {
        (0..cfg.trials as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(cfg.seed, i);
                run_trial(cfg, i, &mut rng).map(|o| TrialRecord::from_outcome(i, derive_seed(cfg.seed, i), o))
            })
            .collect()
    };
    let trials = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(go)?,
        None => go()?,
    };
    let rates = aggregate_rates(&trials);
    let metrics = aggregate_metrics(&trials);
    let assertions = cfg.assertions.iter().map(|a| judge(a, &rates)).collect();
    let public: u64 = trials.iter().map(|t| t.public_queries).sum();
    let private: u64 = trials.iter().map(|t| t.private_queries).sum();
    let k = trials.len().max(1) as f64;
    let totals = Totals {
        trials: trials.len(),
        public_queries: public,
        private_queries: private,
        mean_public_queries: public as f64 / k,
        mean_private_queries: private as f64 / k,
    };
    // some scenarios have no formula table (e.g. delta_tilde unused); report none then
    let resources = resource_table(cfg).unwrap_or_default();
    Ok(ExperimentReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        trials,
        rates,
        metrics,
        totals,
        resources,
        assertions,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}

fn aggregate_rates(trials: &[TrialRecord]) -> BTreeMap<String, Rate> {
    let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for t in trials {
        for (k, &v) in &t.flags {
            let e = counts.entry(k.clone()).or_default();
            e.0 += v as usize;
            e.1 += 1;
        }
    }
    counts.into_iter().map(|(k, (c, n))| (k, Rate::new(c, n))).collect()
}

fn aggregate_metrics(trials: &[TrialRecord]) -> BTreeMap<String, MetricSummary> {
    let mut acc: BTreeMap<String, (MetricSummary, usize)> = BTreeMap::new();
    for t in trials {
        for (k, &v) in &t.metrics {
            let e = acc.entry(k.clone()).or_insert((MetricSummary { mean: 0.0, min: f64::INFINITY, max: f64::NEG_INFINITY, sum: 0.0 }, 0));
            e.0.sum += v;
            e.0.min = e.0.min.min(v);
            e.0.max = e.0.max.max(v);
            e.1 += 1;
        }
    }
    acc.into_iter()
        .map(|(k, (mut s, n))| {
            s.mean = s.sum / n as f64;
            (k, s)
        })
        .collect()
}

/// `min` passes while the upper Wilson bound reaches it, `max` while the lower bound stays under it.
pub fn judge(a: &Assertion, rates: &BTreeMap<String, Rate>) -> AssertionResult {
    let rate = rates.get(&a.flag).copied();
    let passed = match rate {
        None => false,
        Some(r) => a.min.is_none_or(|m| r.wilson_high >= m) && a.max.is_none_or(|m| r.wilson_low <= m),
    };
    AssertionResult { assertion: a.clone(), rate, passed }
}

/// Writes `report.json` and `summary.csv` into `dir`.
pub fn write_outputs(report: &ExperimentReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)?)?;
    let mut w = csv::Writer::from_path(dir.join("summary.csv")).map_err(|e| Error::Io(e.to_string()))?;
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["kind", "name", "value", "count", "total", "low", "high"]).map_err(csv_err)?;
    for (k, r) in &report.rates {
        w.write_record(["rate", k, &r.rate.to_string(), &r.count.to_string(), &r.total.to_string(), &r.wilson_low.to_string(), &r.wilson_high.to_string()])
            .map_err(csv_err)?;
    }
    for (k, m) in &report.metrics {
        w.write_record(["metric", k, &m.mean.to_string(), "", "", &m.min.to_string(), &m.max.to_string()]).map_err(csv_err)?;
    }
    let t = &report.totals;
    w.write_record(["total", "public_queries", &t.mean_public_queries.to_string(), &t.public_queries.to_string(), &t.trials.to_string(), "", ""])
        .map_err(csv_err)?;
    w.write_record(["total", "private_queries", &t.mean_private_queries.to_string(), &t.private_queries.to_string(), &t.trials.to_string(), "", ""])
        .map_err(csv_err)?;
    w.flush()?;
    Ok(())
}

/// Short human summary for the terminal.
pub fn render_summary(report: &ExperimentReport) -> String {
    let mut s = format!("scenario {} | trials {} | seed {}\n", report.config.scenario.name(), report.totals.trials, report.config.seed);
    for (k, r) in &report.rates {
        s.push_str(&format!("  {k:<28} {:>5}/{:<5} {:.4}  [{:.4}, {:.4}]\n", r.count, r.total, r.rate, r.wilson_low, r.wilson_high));
    }
    for (k, m) in &report.metrics {
        s.push_str(&format!("  {k:<28} mean {:.6}  min {:.6}  max {:.6}\n", m.mean, m.min, m.max));
    }
    s.push_str(&format!(
        "  queries: public {:.1}/trial, private {:.1}/trial\n",
        report.totals.mean_public_queries, report.totals.mean_private_queries
    ));
    for a in &report.assertions {
        let bounds = match (a.assertion.min, a.assertion.max) {
            (Some(lo), Some(hi)) => format!("in [{lo}, {hi}]"),
            (Some(lo), None) => format!(">= {lo}"),
            (None, Some(hi)) => format!("<= {hi}"),
            (None, None) => "present".into(),
        };
        s.push_str(&format!("  assert {} {}: {}\n", a.assertion.flag, bounds, if a.passed { "pass" } else { "FAIL" }));
    }
    s
}
