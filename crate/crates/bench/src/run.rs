//! A single scenario run and its artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use gsc_core::{run_scenario, ControllerKind, Metrics, ScenarioSpec, Trace};
use serde::Serialize;

use crate::svg::render_svg;
use crate::{io_err, write_file, Result};

pub const TRACE_FILE: &str = "trace.jsonl";
pub const METRICS_FILE: &str = "metrics.json";
pub const SVG_FILE: &str = "rollout.svg";

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub controller: ControllerKind,
    pub seed: u64,
    pub metrics: Metrics,
    pub trace_path: PathBuf,
    /// Not written to any artifact, so outputs stay byte-reproducible.
    pub wall_time: f64,
}

/// Canonical metrics file contents.
pub fn metrics_json(metrics: &Metrics) -> String {
    let mut s = serde_json::to_string_pretty(metrics).expect("metrics serialize");
    s.push('\n');
    s
}

/// Run one scenario and write `trace.jsonl`, `metrics.json` and `rollout.svg` into `out_dir`.
pub fn cmd_run(spec: &ScenarioSpec, controller: ControllerKind, seed: u64, out_dir: &Path) -> Result<RunReport> {
    let started = Instant::now();
    let (trace, metrics) = execute(spec, controller, seed)?;
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let trace_path = out_dir.join(TRACE_FILE);
    write_file(&trace_path, &trace.to_jsonl())?;
    write_file(&out_dir.join(METRICS_FILE), &metrics_json(&metrics))?;
    write_file(&out_dir.join(SVG_FILE), &render_svg(&trace, spec))?;
    Ok(RunReport {
        scenario: spec.id.clone(),
        controller,
        seed,
        metrics,
        trace_path,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

/// Run with the scenario's own controller overrides applied.
pub fn execute(spec: &ScenarioSpec, controller: ControllerKind, seed: u64) -> Result<(Trace, Metrics)> {
    Ok(run_scenario(spec, &spec.controller_config(controller), seed)?)
}
