//! JSON scenario files and the canned three-function reprogramming
//! experiment.
//!
//! A scenario names a partition, the basis constants, an input signal and a
//! schedule of catalog functions. Loading is two-staged: structural parsing
//! first, then invariant checks that report the offending field path.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{program, BasisConfig, ConcentrationMap, Partition};
use crate::dynamics::{mae, simulate, InputSignal, Segment, SimulationTrace, SwarmProgram};
use crate::error::SwarmError;
use crate::target::FunctionSpec;

/// Schema version written to and required from scenario files.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid config at `{path}`: {message}")]
    Validation { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PartitionSpec {
    Uniform {
        bounds: Vec<[f64; 2]>,
        q: Vec<usize>,
    },
    Explicit {
        breakpoints: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgramEntry {
    pub t_switch: f64,
    pub function: FunctionSpec,
}

/// Optional inputs to the `design` command.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_norms: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_max: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_per_dim: Option<usize>,
}

fn default_one() -> f64 {
    1.0
}

fn default_dt() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    pub partition: PartitionSpec,
    #[serde(default = "default_one")]
    pub alpha: f64,
    #[serde(default = "default_one")]
    pub clearance: f64,
    #[serde(default)]
    pub v0: f64,
    #[serde(default)]
    pub t0: f64,
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub input: InputSignal,
    pub program: Vec<ProgramEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignSpec>,
}

/// Parses and validates a scenario file.
pub fn load_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let config: ScenarioConfig =
        serde_json::from_value(value).map_err(|e| invalid("$", e.to_string()))?;
    config.validate()?;
    Ok(config)
}

impl ScenarioConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn partition(&self) -> Result<Partition, ConfigError> {
        let built = match &self.partition {
            PartitionSpec::Uniform { bounds, q } => {
                if bounds.len() != q.len() {
                    return Err(invalid(
                        "partition.q",
                        format!("{} bounds but {} interval counts", bounds.len(), q.len()),
                    ));
                }
                if let Some(d) = q.iter().position(|&k| k == 0) {
                    return Err(invalid(format!("partition.q[{d}]"), "must be at least 1"));
                }
                let pairs: Vec<(f64, f64)> = bounds.iter().map(|b| (b[0], b[1])).collect();
                Partition::uniform(&pairs, q)
            }
            PartitionSpec::Explicit { breakpoints } => Partition::new(breakpoints.clone()),
        };
        built.map_err(|e| invalid("partition", e.to_string()))
    }

    pub fn basis(&self) -> Result<BasisConfig, ConfigError> {
        let partition = self.partition()?;
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", "must be positive"));
        }
        if !(self.clearance > 0.0 && self.clearance.is_finite()) {
            return Err(invalid("clearance", "must be positive"));
        }
        BasisConfig::new(partition, self.alpha, self.clearance)
            .map_err(|e| invalid("$", e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema != SCHEMA_VERSION {
            return Err(invalid(
                "schema",
                format!(
                    "unsupported version {} (expected {SCHEMA_VERSION})",
                    self.schema
                ),
            ));
        }
        let cfg = self.basis()?;
        let dims = cfg.partition.dims();
        if !self.v0.is_finite() {
            return Err(invalid("v0", "must be finite"));
        }
        if !(self.t0.is_finite() && self.t_end.is_finite() && self.t0 < self.t_end) {
            return Err(invalid("t_end", "must be greater than t0"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", "must be positive"));
        }
        self.input
            .validate(&cfg.partition)
            .map_err(|m| invalid("input", m))?;
        if self.program.is_empty() {
            return Err(invalid("program", "at least one entry is required"));
        }
        for (j, entry) in self.program.iter().enumerate() {
            let path = format!("program[{j}]");
            let t = entry.t_switch;
            if !(t >= self.t0 && t <= self.t_end) {
                return Err(invalid(
                    format!("{path}.t_switch"),
                    format!("{t} lies outside [{}, {}]", self.t0, self.t_end),
                ));
            }
            if j == 0 && t != self.t0 {
                return Err(invalid(
                    format!("{path}.t_switch"),
                    format!("first entry must start at t0 = {}", self.t0),
                ));
            }
            if j > 0 && t <= self.program[j - 1].t_switch {
                return Err(invalid(
                    format!("{path}.t_switch"),
                    "switch times must be strictly increasing",
                ));
            }
            entry
                .function
                .validate(dims)
                .map_err(|m| invalid(format!("{path}.function"), m))?;
        }
        if let Some(design) = &self.design {
            if let Some(l) = &design.grad_norms {
                if l.len() != dims || l.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
                    return Err(invalid(
                        "design.grad_norms",
                        format!("need {dims} finite nonnegative values"),
                    ));
                }
            }
            if let Some(caps) = &design.q_max {
                if caps.len() != dims || caps.contains(&0) {
                    return Err(invalid("design.q_max", format!("need {dims} values >= 1")));
                }
            }
            if design.samples_per_dim.is_some_and(|m| m < 3) {
                return Err(invalid("design.samples_per_dim", "must be at least 3"));
            }
        }
        Ok(())
    }

    /// Resolves the config into runnable pieces. Call on a validated config.
    pub fn build(&self) -> Result<Scenario, ScenarioError> {
        let cfg = self.basis()?;
        let mut segments = Vec::with_capacity(self.program.len());
        for entry in &self.program {
            segments.push(Segment {
                t_switch: entry.t_switch,
                map: program(&entry.function, &cfg)?,
            });
        }
        Ok(Scenario {
            program: SwarmProgram::new(cfg, segments)?,
            input: self.input.clone(),
            functions: self.program.iter().map(|e| e.function.clone()).collect(),
            t0: self.t0,
            t_end: self.t_end,
            dt: self.dt,
            v0: self.v0,
        })
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Swarm(#[from] SwarmError),
}

/// A validated scenario with its concentration maps already programmed.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub program: SwarmProgram,
    pub input: InputSignal,
    pub functions: Vec<FunctionSpec>,
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub v0: f64,
}

impl Scenario {
    pub fn simulate(&self) -> Result<SimulationTrace, SwarmError> {
        simulate(
            &self.program,
            &self.input,
            self.t0,
            self.t_end,
            self.dt,
            self.v0,
        )
    }

    pub fn maps(&self) -> Vec<&ConcentrationMap> {
        self.program.segments().iter().map(|s| &s.map).collect()
    }
}

/// Test waveform for the canned experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaperInput {
    /// Up/down ramp `0 → 1 → 0` every 200 time units, so each programmed
    /// function is swept over the whole input range.
    Ramp,
    /// Single ramp `u(t) = t/600`.
    LinearRamp,
    /// `u = 0.2` before `t = 300`, `0.8` after.
    Step,
}

impl std::str::FromStr for PaperInput {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ramp" => Ok(Self::Ramp),
            "linear-ramp" => Ok(Self::LinearRamp),
            "step" => Ok(Self::Step),
            other => Err(format!(
                "unknown input `{other}` (expected ramp, linear-ramp or step)"
            )),
        }
    }
}

impl PaperInput {
    pub fn signal(self) -> InputSignal {
        match self {
            Self::Ramp => InputSignal::PiecewiseLinear {
                times: (0..=6).map(|j| 100.0 * j as f64).collect(),
                values: (0..=6).map(|j| vec![(j % 2) as f64]).collect(),
            },
            Self::LinearRamp => InputSignal::Ramp {
                start: vec![0.0],
                end: vec![1.0],
                t_start: 0.0,
                t_end: 600.0,
            },
            Self::Step => InputSignal::Step {
                levels: vec![vec![0.2], vec![0.8]],
                switch_times: vec![300.0],
            },
        }
    }
}

/// `u²` on `[0, 200)`, `sin(3u)` on `[200, 400)`, `e^{−2u}` on `[400, 600]`
/// over ten equal cells of `[0, 1]` with `α = R = 1`, `v(0) = 0`.
pub fn paper_example_config(input: PaperInput) -> ScenarioConfig {
    ScenarioConfig {
        schema: SCHEMA_VERSION,
        partition: PartitionSpec::Uniform {
            bounds: vec![[0.0, 1.0]],
            q: vec![10],
        },
        alpha: 1.0,
        clearance: 1.0,
        v0: 0.0,
        t0: 0.0,
        t_end: 600.0,
        dt: 0.01,
        input: input.signal(),
        program: vec![
            ProgramEntry {
                t_switch: 0.0,
                function: FunctionSpec::polynomial(vec![0.0, 0.0, 1.0]),
            },
            ProgramEntry {
                t_switch: 200.0,
                function: FunctionSpec::sin(3.0),
            },
            ProgramEntry {
                t_switch: 400.0,
                function: FunctionSpec::exp(-2.0),
            },
        ],
        design: None,
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub trace: SimulationTrace,
    pub maps: Vec<ConcentrationMap>,
    pub mae: f64,
}

/// Simulates a scenario and collects its trace, maps and MAE.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioRun, ScenarioError> {
    let scenario = config.build()?;
    let trace = scenario.simulate()?;
    let mae = mae(&trace)?;
    Ok(ScenarioRun {
        maps: scenario.maps().into_iter().cloned().collect(),
        trace,
        mae,
    })
}

pub fn run_paper_example(input: PaperInput) -> ScenarioRun {
    run_scenario(&paper_example_config(input)).expect("canned scenario is valid")
}
