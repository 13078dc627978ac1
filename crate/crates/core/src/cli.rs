//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage and config validation errors, 2 for
//! failures while running.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::basis::{approximate, DEFAULT_SAMPLES_PER_DIM};
use crate::design::{
    coarsest_measured, default_q_max, estimate_grad_norms, near_minimal_types, verify_design,
    DesignProblem,
};
use crate::output::{concentrations_csv, design_summary, fmt_g12, run_summary, trace_csv};
use crate::scenario::{
    load_config, run_scenario, PaperInput, ScenarioConfig, ScenarioError, ScenarioRun,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ba-swarm",
    version,
    about = "Basis-agent swarm computing toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write trace.csv, concentrations.csv and summary.txt
    Simulate {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Size the smallest uniform grid meeting an accuracy target
    Design {
        config: PathBuf,
        #[arg(long)]
        epsilon: f64,
        /// Program entry (1-based) whose function is designed for
        #[arg(long, default_value_t = 1)]
        segment: usize,
        /// Skip the measured search for coarser grids
        #[arg(long)]
        no_coarsen: bool,
    },
    /// Evaluate the programmed swarm output at one input
    Approx {
        config: PathBuf,
        /// Comma-separated input vector
        #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
        at: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        segment: usize,
    },
    /// Run the canned u² / sin(3u) / exp(−2u) reprogramming experiment
    PaperExample {
        #[arg(long, value_parser = parse_input_kind)]
        input: PaperInput,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        dt: Option<f64>,
    },
}

fn parse_input_kind(s: &str) -> Result<PaperInput, String> {
    s.parse()
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Config(c) => Failure::Validation(c.to_string()),
            ScenarioError::Swarm(s) => Failure::Runtime(s.to_string()),
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

/// Parses `args` (including the program name) and runs one command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Validation(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_VALIDATION
        }
        Err(Failure::Runtime(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_RUNTIME
        }
    }
}

fn read_config(path: &Path) -> Result<ScenarioConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Runtime(format!("cannot read {}: {e}", path.display())))?;
    load_config(&text).map_err(|e| Failure::Validation(e.to_string()))
}

fn write_outputs(dir: &Path, run: &ScenarioRun, out: &mut dyn Write) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(runtime)?;
    let summary = run_summary(&run.trace, run.mae);
    let files = [
        ("trace.csv", trace_csv(&run.trace)),
        (
            "concentrations.csv",
            concentrations_csv(&run.maps, run.trace.dims()),
        ),
        ("summary.txt", summary.clone()),
    ];
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    write!(out, "{summary}").map_err(runtime)?;
    writeln!(out, "wrote {}", dir.display()).map_err(runtime)
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Simulate { config, out: dir } => {
            let cfg = read_config(&config)?;
            let run = run_scenario(&cfg)?;
            write_outputs(&dir, &run, out)
        }
        Command::PaperExample {
            input,
            out: dir,
            dt,
        } => {
            let mut cfg = crate::scenario::paper_example_config(input);
            if let Some(dt) = dt {
                cfg.dt = dt;
                cfg.validate()
                    .map_err(|e| Failure::Validation(e.to_string()))?;
            }
            let run = run_scenario(&cfg)?;
            write_outputs(&dir, &run, out)
        }
        Command::Approx {
            config,
            at,
            segment,
        } => {
            let cfg = read_config(&config)?;
            let scenario = cfg.build()?;
            let maps = scenario.maps();
            let map = segment
                .checked_sub(1)
                .and_then(|j| maps.get(j))
                .ok_or_else(|| {
                    Failure::Validation(format!("segment {segment} not in 1..={}", maps.len()))
                })?;
            let basis = scenario.program.cfg();
            let value =
                approximate(map, basis, &at).map_err(|e| Failure::Validation(e.to_string()))?;
            let cell = basis.partition.cell_index(&at).map_err(runtime)?;
            let active = map
                .active_type(&cell)
                .map_or_else(|| "none".to_string(), |ba| ba.to_string());
            writeln!(out, "value = {}", fmt_g12(value)).map_err(runtime)?;
            writeln!(out, "cell = {cell}").map_err(runtime)?;
            writeln!(out, "active = {active}").map_err(runtime)
        }
        Command::Design {
            config,
            epsilon,
            segment,
            no_coarsen,
        } => {
            let cfg = read_config(&config)?;
            let function = segment
                .checked_sub(1)
                .and_then(|j| cfg.program.get(j))
                .map(|e| e.function.clone())
                .ok_or_else(|| Failure::Validation(format!("segment {segment} out of range")))?;
            let partition = cfg
                .partition()
                .map_err(|e| Failure::Validation(e.to_string()))?;
            let dims = partition.dims();
            let bounds: Vec<(f64, f64)> = (0..dims).map(|d| partition.bounds(d)).collect();
            let spec = cfg.design.clone().unwrap_or_default();
            let samples = spec.samples_per_dim.unwrap_or(match dims {
                1 => DEFAULT_SAMPLES_PER_DIM,
                2 => 201,
                _ => 41,
            });
            let (grad_norms, estimated) = match spec.grad_norms {
                Some(l) => (l, false),
                None => (
                    estimate_grad_norms(&function, &bounds, samples).map_err(runtime)?,
                    true,
                ),
            };
            let q_max = spec
                .q_max
                .unwrap_or_else(|| vec![default_q_max(dims); dims]);
            let problem = DesignProblem::new(bounds, epsilon, grad_norms.clone(), q_max)
                .map_err(|e| Failure::Validation(e.to_string()))?;
            let solution = near_minimal_types(&problem).map_err(runtime)?;
            let report = verify_design(&function, &problem, &solution, samples).map_err(runtime)?;
            let coarser = if no_coarsen {
                None
            } else {
                Some(coarsest_measured(&function, &problem, &solution, samples).map_err(runtime)?)
            };
            write!(
                out,
                "{}",
                design_summary(&report, &grad_norms, estimated, coarser.as_ref())
            )
            .map_err(runtime)?;
            if report.pass {
                Ok(())
            } else {
                Err(Failure::Runtime("design verification failed".into()))
            }
        }
    }
}
