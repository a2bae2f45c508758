//! Batch runs, head-to-head comparisons and parameter sweeps over the
//! shared-control scenarios, with JSON, CSV and SVG outputs.

pub mod cli;
pub mod compare;
pub mod run;
pub mod svg;
pub mod table;

use std::path::{Path, PathBuf};

use gsc_core::{build_scenario, ControllerKind, ScenarioSpec};

pub use compare::{cmd_compare, cmd_sweep, SweepParam};
pub use run::{cmd_run, RunReport};
pub use svg::render_svg;
pub use table::Aggregate;

/// Output directory used when neither `--out` nor the environment override is set.
pub const DEFAULT_OUT: &str = "gsc-out";
pub const OUT_ENV: &str = "GSC_BENCH_OUT";

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] gsc_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl BenchError {
    /// 2 for usage and validation problems, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Usage(_) => 2,
            BenchError::Core(e) => match e.code() {
                "unknown-scenario" | "unknown-controller" | "bad-scenario" | "out-of-range" | "bad-gains"
                | "bad-tau" => 2,
                _ => 1,
            },
            BenchError::Io { .. } | BenchError::Csv(_) => 1,
        }
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io { path: path.to_path_buf(), source }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(io_err(path))
}

/// A catalog id, or a path to a scenario JSON file.
pub fn load_scenario(arg: &str) -> Result<ScenarioSpec> {
    let path = Path::new(arg);
    if arg.ends_with(".json") || path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|source| BenchError::Usage(format!("{arg}: {source}")))?;
        return Ok(ScenarioSpec::from_json(&text)?);
    }
    Ok(build_scenario(arg)?)
}

/// Comma-separated controller kinds.
pub fn parse_controllers(arg: &str) -> Result<Vec<ControllerKind>> {
    let kinds =
        arg.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect::<Result<Vec<_>, _>>()?;
    if kinds.is_empty() {
        return Err(BenchError::Usage("at least one controller is required".into()));
    }
    Ok(kinds)
}

/// Seeds as `7`, `1,4,9`, or an inclusive range `0..49` (also `0..=49`).
pub fn parse_seeds(arg: &str) -> Result<Vec<u64>> {
    let bad = || BenchError::Usage(format!("cannot parse seeds '{arg}'"));
    let mut seeds = Vec::new();
    for part in arg.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
            seeds.extend(lo..=hi);
        } else {
            seeds.push(part.parse().map_err(|_| bad())?);
        }
    }
    if seeds.is_empty() {
        return Err(BenchError::Usage(format!("seed set '{arg}' is empty")));
    }
    Ok(seeds)
}

/// `--out`, else `$GSC_BENCH_OUT`, else [`DEFAULT_OUT`].
pub fn resolve_out_dir(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    match std::env::var_os(OUT_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(DEFAULT_OUT),
    }
}

/// Run `f` on a dedicated pool of `threads` workers, or on the global pool.
pub(crate) fn in_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().expect("thread pool").install(f),
        None => f(),
    }
}
