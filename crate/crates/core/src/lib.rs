//! Linear computation coding: lossy compilation of `y = T x` for a constant
//! matrix `T` into a graph of shifts and additions, with a pipelined hardware
//! cost model.
//!
//! ```
//! use lcc::{decompose, total_cost, CostModel, DecomposeConfig, TargetMatrix};
//!
//! let t = TargetMatrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap();
//! let res = decompose(&t, &DecomposeConfig::fs(200.0)).unwrap();
//! assert_eq!(res.sqnr_db, f64::INFINITY);
//! assert_eq!(total_cost(&res.dag, &CostModel::default()).n_add, 1);
//! ```

pub mod cost;
pub mod dag;
pub mod decompose;
pub mod error;
pub mod eval;
pub mod harness;
pub mod matrix;
pub mod numeric;
pub mod rng;
pub mod serial;
pub mod shift;
pub mod wiring;

pub use cost::{compute_depths, count_additions, count_delays, count_inverters, total_cost, CostModel, CostReport, DepthTable};
pub use dag::{ComputationDag, OutputAssignment, Term, VertexId};
pub use decompose::{
    decompose, Algorithm, DecomposeConfig, DecompositionResult, Phase, Schedule, StopReason, Trigger,
};
pub use error::{LccError, Result};
pub use eval::{evaluate_dag, sqnr_db};
pub use matrix::TargetMatrix;
pub use shift::{ExponentRange, ShiftCoefficient};
pub use wiring::{Solver, WiringConfig};
