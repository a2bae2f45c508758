//! Head-to-head comparisons and channel-degradation sweeps.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use gsc_core::{ControllerKind, Metrics, ScenarioSpec};
use rayon::prelude::*;

use crate::run::execute;
use crate::table::{compare_csv, runs_csv, sweep_csv, Aggregate, RunRow};
use crate::{in_pool, io_err, write_file, BenchError, Result};

pub const COMPARE_FILE: &str = "compare.csv";
pub const RUNS_FILE: &str = "runs.csv";
pub const SWEEP_FILE: &str = "sweep.csv";

/// Results of a comparison, in controller order then seed order.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub rows: Vec<Aggregate>,
    pub runs: Vec<(ControllerKind, u64, Metrics)>,
    pub csv: String,
}

fn run_grid(spec: &ScenarioSpec, jobs: &[(ControllerKind, u64)], threads: Option<usize>) -> Result<Vec<Metrics>> {
    // Collecting an indexed parallel iterator keeps input order regardless
    // of which worker finished first.
    in_pool(threads, || {
        jobs.par_iter().map(|&(kind, seed)| execute(spec, kind, seed).map(|(_, m)| m)).collect::<Result<Vec<_>>>()
    })
}

/// Run every controller on every seed and write `compare.csv` and `runs.csv`.
pub fn cmd_compare(
    spec: &ScenarioSpec,
    controllers: &[ControllerKind],
    seeds: &[u64],
    out_dir: &Path,
    threads: Option<usize>,
) -> Result<Comparison> {
    if controllers.is_empty() {
        return Err(BenchError::Usage("at least one controller is required".into()));
    }
    if seeds.is_empty() {
        return Err(BenchError::Usage("seed set is empty".into()));
    }
    let jobs: Vec<_> = controllers.iter().flat_map(|&k| seeds.iter().map(move |&s| (k, s))).collect();
    let metrics = run_grid(spec, &jobs, threads)?;
    let rows: Vec<_> =
        metrics.chunks(seeds.len()).zip(controllers).map(|(chunk, &k)| Aggregate::from_metrics(k, chunk)).collect();
    let csv = compare_csv(&spec.id, &rows)?;
    let run_rows: Vec<_> =
        jobs.iter().zip(&metrics).map(|(&(controller, seed), metrics)| RunRow { controller, seed, metrics }).collect();
    let runs = runs_csv(&spec.id, &run_rows)?;
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    write_file(&out_dir.join(COMPARE_FILE), &csv)?;
    write_file(&out_dir.join(RUNS_FILE), &runs)?;
    let runs = jobs.into_iter().zip(metrics).map(|((k, s), m)| (k, s, m)).collect();
    Ok(Comparison { rows, runs, csv })
}

/// Channel parameter varied by a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    Drop,
    Lag,
    Noise,
}

impl SweepParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::Drop => "drop",
            SweepParam::Lag => "lag",
            SweepParam::Noise => "noise",
        }
    }

    /// `spec` with its channel parameter set to `value`, validated.
    pub fn apply(&self, spec: &ScenarioSpec, value: f64) -> Result<ScenarioSpec> {
        let mut s = spec.clone();
        match self {
            SweepParam::Drop => s.channel.drop_probability = value,
            SweepParam::Noise => s.channel.noise_std = value,
            SweepParam::Lag => {
                if !(value >= 0.0) || value.fract() != 0.0 || value > u32::MAX as f64 {
                    return Err(BenchError::Usage(format!("lag must be a whole number of steps, got {value}")));
                }
                s.channel.lag_steps = value as u64;
            }
        }
        s.channel.validate()?;
        Ok(s)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParam {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drop" => Ok(SweepParam::Drop),
            "lag" => Ok(SweepParam::Lag),
            "noise" => Ok(SweepParam::Noise),
            other => Err(BenchError::Usage(format!("unknown sweep parameter '{other}'; expected drop, lag or noise"))),
        }
    }
}

/// Comma-separated parameter values.
pub fn parse_values(arg: &str) -> Result<Vec<f64>> {
    let values = arg
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|v| v.parse::<f64>().map_err(|_| BenchError::Usage(format!("cannot parse value '{v}'"))))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(BenchError::Usage("at least one value is required".into()));
    }
    Ok(values)
}

#[derive(Clone, Debug)]
pub struct Sweep {
    pub rows: Vec<(f64, Aggregate)>,
    pub csv: String,
}

/// Aggregate `controller` over `seeds` at each parameter value; writes `sweep.csv`.
pub fn cmd_sweep(
    spec: &ScenarioSpec,
    controller: ControllerKind,
    param: SweepParam,
    values: &[f64],
    seeds: &[u64],
    out_dir: &Path,
    threads: Option<usize>,
) -> Result<Sweep> {
    if values.is_empty() {
        return Err(BenchError::Usage("at least one value is required".into()));
    }
    if seeds.is_empty() {
        return Err(BenchError::Usage("seed set is empty".into()));
    }
    let specs = values.iter().map(|&v| param.apply(spec, v)).collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, u64)> = (0..specs.len()).flat_map(|i| seeds.iter().map(move |&s| (i, s))).collect();
    let metrics = in_pool(threads, || {
        jobs.par_iter()
            .map(|&(i, seed)| execute(&specs[i], controller, seed).map(|(_, m)| m))
            .collect::<Result<Vec<_>>>()
    })?;
    let rows: Vec<_> = metrics
        .chunks(seeds.len())
        .zip(values)
        .map(|(chunk, &v)| (v, Aggregate::from_metrics(controller, chunk)))
        .collect();
    let csv = sweep_csv(&spec.id, param.as_str(), &rows)?;
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    write_file(&out_dir.join(SWEEP_FILE), &csv)?;
    Ok(Sweep { rows, csv })
}
