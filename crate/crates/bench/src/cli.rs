//! Argument parsing and dispatch for the `gsc-bench` binary.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use gsc_core::{Trace, CATALOG};

use crate::compare::{parse_values, SweepParam};
use crate::table::print;
use crate::{
    cmd_compare, cmd_run, cmd_sweep, io_err, load_scenario, parse_controllers, parse_seeds, render_svg,
    resolve_out_dir, write_file, BenchError, Result,
};

#[derive(Debug, Parser)]
#[command(name = "gsc-bench", version, about = "Run, compare and sweep shared-control scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario with one controller and write trace, metrics and plot.
    Run {
        /// Catalog id or path to a scenario JSON file.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        controller: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory (default: $GSC_BENCH_OUT, else ./gsc-out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate several controllers over a seed set into compare.csv.
    Compare {
        #[arg(long)]
        scenario: String,
        /// Comma-separated controller kinds.
        #[arg(long)]
        controller: String,
        /// `7`, `1,4,9` or an inclusive range `0..49`.
        #[arg(long, default_value = "0..9")]
        seeds: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Aggregate one controller over a range of channel settings into sweep.csv.
    Sweep {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        controller: String,
        /// One of drop, lag, noise.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
        #[arg(long, default_value = "0..9")]
        seeds: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Render a saved trace to rollout.svg.
    Render {
        /// A trace.jsonl written by `run`.
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Start the live teleoperation server.
    Serve {
        #[arg(long, default_value_t = gsc_teleop::DEFAULT_PORT)]
        port: u16,
    },
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if let BenchError::Core(gsc_core::Error::UnknownScenario { .. }) = e {
                eprintln!("available scenarios:");
                for id in CATALOG {
                    eprintln!("  {id}");
                }
            }
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run { scenario, controller, seed, out } => {
            let spec = load_scenario(&scenario)?;
            let kind = controller.parse()?;
            let report = cmd_run(&spec, kind, seed, &resolve_out_dir(out.as_deref()))?;
            eprintln!("finished in {:.2}s", report.wall_time);
            print(&format!("{}\n", serde_json::to_string_pretty(&report).expect("report serializes")));
        }
        Command::Compare { scenario, controller, seeds, out, threads } => {
            let spec = load_scenario(&scenario)?;
            let kinds = parse_controllers(&controller)?;
            let seeds = parse_seeds(&seeds)?;
            let cmp = cmd_compare(&spec, &kinds, &seeds, &resolve_out_dir(out.as_deref()), threads)?;
            print(&cmp.csv);
        }
        Command::Sweep { scenario, controller, param, values, seeds, out, threads } => {
            let spec = load_scenario(&scenario)?;
            let kind = controller.parse()?;
            let param: SweepParam = param.parse()?;
            let values = parse_values(&values)?;
            let seeds = parse_seeds(&seeds)?;
            let sweep = cmd_sweep(&spec, kind, param, &values, &seeds, &resolve_out_dir(out.as_deref()), threads)?;
            print(&sweep.csv);
        }
        Command::Render { trace, scenario, out } => {
            let spec = load_scenario(&scenario)?;
            let text = std::fs::read_to_string(&trace).map_err(io_err(&trace))?;
            let trace = Trace::from_jsonl(&text)?;
            if trace.records.is_empty() {
                return Err(BenchError::Usage("trace is empty".into()));
            }
            let dir = resolve_out_dir(out.as_deref());
            std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
            write_file(&dir.join(crate::run::SVG_FILE), &render_svg(&trace, &spec))?;
        }
        Command::Serve { port } => {
            gsc_teleop::serve_blocking(port)
                .map_err(|source| BenchError::Io { path: PathBuf::from("serve"), source })?;
        }
    }
    Ok(())
}
