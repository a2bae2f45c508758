//! Aggregation of run metrics into CSV tables.
//!
//! Column order is fixed; region columns follow in region-name order. The
//! first column carries the schema tag so readers can reject tables they do
//! not understand.

use std::collections::BTreeMap;
use std::io::Write;

use gsc_core::{ControllerKind, Metrics, Outcome};

use crate::Result;

pub const COMPARE_SCHEMA: &str = "gsc-compare/v1";
pub const RUNS_SCHEMA: &str = "gsc-runs/v1";
pub const SWEEP_SCHEMA: &str = "gsc-sweep/v1";

/// Per-controller (and per-parameter-value) summary of a group of runs.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub controller: ControllerKind,
    pub runs: usize,
    pub collision_rate: f64,
    pub goal_rate: f64,
    pub mean_path_length: f64,
    pub mean_agreement_rms: f64,
    pub mean_max_accel: f64,
    pub region_hit_rates: BTreeMap<String, f64>,
}

impl Aggregate {
    pub fn from_metrics(controller: ControllerKind, metrics: &[Metrics]) -> Self {
        let n = metrics.len() as f64;
        let mean = |f: &dyn Fn(&Metrics) -> f64| metrics.iter().map(f).sum::<f64>() / n;
        let rate = |f: &dyn Fn(&Metrics) -> bool| metrics.iter().filter(|m| f(m)).count() as f64 / n;
        let mut regions: BTreeMap<String, f64> = BTreeMap::new();
        for m in metrics {
            for (name, hit) in &m.region_hits {
                *regions.entry(name.clone()).or_default() += if *hit { 1.0 } else { 0.0 };
            }
        }
        regions.values_mut().for_each(|v| *v /= n);
        Self {
            controller,
            runs: metrics.len(),
            collision_rate: rate(&|m| m.collision),
            goal_rate: rate(&|m| m.outcome == Some(Outcome::Goal)),
            mean_path_length: mean(&|m| m.path_length),
            mean_agreement_rms: mean(&|m| m.agreement_rms),
            mean_max_accel: mean(&|m| m.max_accel),
            region_hit_rates: regions,
        }
    }

    pub fn region_hit_rate(&self, region: &str) -> Option<f64> {
        self.region_hit_rates.get(region).copied()
    }
}

fn region_names<'a>(names: impl Iterator<Item = &'a String>) -> Vec<String> {
    let mut v: Vec<String> = names.cloned().collect();
    v.sort();
    v.dedup();
    v
}

const AGGREGATE_COLUMNS: [&str; 6] =
    ["runs", "collision_rate", "goal_rate", "mean_path_length", "mean_agreement_rms", "mean_max_accel"];

fn aggregate_fields(a: &Aggregate, regions: &[String]) -> Vec<String> {
    let mut row = vec![
        a.runs.to_string(),
        a.collision_rate.to_string(),
        a.goal_rate.to_string(),
        a.mean_path_length.to_string(),
        a.mean_agreement_rms.to_string(),
        a.mean_max_accel.to_string(),
    ];
    row.extend(regions.iter().map(|r| a.region_hit_rate(r).map_or(String::new(), |v| v.to_string())));
    row
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// One row per controller.
pub fn compare_csv(scenario: &str, rows: &[Aggregate]) -> Result<String> {
    let regions = region_names(rows.iter().flat_map(|a| a.region_hit_rates.keys()));
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["schema", "scenario", "controller"].map(String::from).to_vec();
    header.extend(AGGREGATE_COLUMNS.map(String::from));
    header.extend(regions.iter().map(|r| format!("hit_rate:{r}")));
    w.write_record(&header)?;
    for a in rows {
        let mut row = vec![COMPARE_SCHEMA.to_string(), scenario.to_string(), a.controller.to_string()];
        row.extend(aggregate_fields(a, &regions));
        w.write_record(&row)?;
    }
    finish(w)
}

/// One row per parameter value.
pub fn sweep_csv(scenario: &str, param: &str, rows: &[(f64, Aggregate)]) -> Result<String> {
    let regions = region_names(rows.iter().flat_map(|(_, a)| a.region_hit_rates.keys()));
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["schema", "scenario", "controller", "param", "value"].map(String::from).to_vec();
    header.extend(AGGREGATE_COLUMNS.map(String::from));
    header.extend(regions.iter().map(|r| format!("hit_rate:{r}")));
    w.write_record(&header)?;
    for (value, a) in rows {
        let mut row = vec![
            SWEEP_SCHEMA.to_string(),
            scenario.to_string(),
            a.controller.to_string(),
            param.to_string(),
            value.to_string(),
        ];
        row.extend(aggregate_fields(a, &regions));
        w.write_record(&row)?;
    }
    finish(w)
}

/// One identified run for the per-run table.
pub struct RunRow<'a> {
    pub controller: ControllerKind,
    pub seed: u64,
    pub metrics: &'a Metrics,
}

/// Per-run metrics, one row per (controller, seed).
pub fn runs_csv(scenario: &str, runs: &[RunRow<'_>]) -> Result<String> {
    let regions = region_names(runs.iter().flat_map(|r| r.metrics.region_hits.keys()));
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "schema",
        "scenario",
        "controller",
        "seed",
        "outcome",
        "collision",
        "min_clearance",
        "path_length",
        "steps",
        "steps_to_goal",
        "agreement_rms",
        "max_accel",
    ]
    .map(String::from)
    .to_vec();
    header.extend(regions.iter().map(|r| format!("hit:{r}")));
    w.write_record(&header)?;
    for r in runs {
        let m = r.metrics;
        let outcome =
            m.outcome.map_or(String::new(), |o| serde_json::to_value(o).unwrap().as_str().unwrap().to_string());
        let mut row = vec![
            RUNS_SCHEMA.to_string(),
            scenario.to_string(),
            r.controller.to_string(),
            r.seed.to_string(),
            outcome,
            m.collision.to_string(),
            m.min_clearance.map_or(String::new(), |c| c.to_string()),
            m.path_length.to_string(),
            m.steps.to_string(),
            m.steps_to_goal.map_or(String::new(), |s| s.to_string()),
            m.agreement_rms.to_string(),
            m.max_accel.to_string(),
        ];
        row.extend(regions.iter().map(|g| m.region_hits.get(g).map_or(String::new(), |h| h.to_string())));
        w.write_record(&row)?;
    }
    finish(w)
}

/// Write `text` to stdout, ignoring a closed pipe.
pub fn print(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}
