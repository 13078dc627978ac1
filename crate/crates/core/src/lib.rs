//! Universal function computation by swarms of basis agents.
//!
//! Each agent type evaluates a crisp indicator over one grid cell and
//! releases or takes up an output species at a fixed rate while its cell is
//! active. Setting agent concentrations from midpoint values of a target
//! function makes the well-mixed output concentration settle on a
//! piecewise-constant approximation of that function, and swapping the
//! concentrations reprograms the swarm.
//!
//! - [`basis`]: partitions, B-functions, programming rule, approximation.
//! - [`dynamics`]: output ODE, closed-form transients, schedule simulation.
//! - [`design`]: fewest agent types for a target accuracy.
//! - [`scenario`], [`output`], [`cli`]: JSON scenarios, CSV output, CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod cli;
pub mod design;
pub mod dynamics;
pub mod error;
pub mod output;
pub mod scenario;
pub mod target;

pub use basis::{
    approximate, b_eval, program, sup_error, BaType, BasisConfig, Cell, ConcentrationMap,
    Partition, Sign,
};
pub use design::{
    estimate_grad_norms, near_minimal_types, verify_design, DesignProblem, DesignReport,
    DesignSolution,
};
pub use dynamics::{
    analytic_v, drive, mae, simulate, step, transient_error, InputSignal, Segment, SimulationTrace,
    SwarmProgram,
};
pub use error::{Result, SwarmError};
pub use target::{FunctionSpec, TargetFn};
