//! Decomposition algorithms turning a [`TargetMatrix`] into a
//! [`ComputationDag`].
//!
//! * `fs`: fully sequential. Each step adds the single vertex that most
//!   reduces the total squared error, combining any existing vertices.
//! * `fp`: fully parallel. Layer `l` rewires every row from layer `l - 1`
//!   only, so the graph is strictly layered.
//! * `ma`: the sequential rule with a depth-span constraint on every
//!   combination and a depth penalty on the row-selection objective.
//! * `sliced`: column blocks decomposed independently and summed with a
//!   balanced adder tree per output.
//! * `csd`: per-entry canonical signed digit quantisation, the scalar baseline.

mod csd;
mod parallel;
mod schedule;
mod sequential;
mod slice;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use csd::{binary_quantize, csd_matrix_baseline, csd_quantize, csd_quantize_in};
pub use schedule::{Phase, Schedule, Trigger};

use crate::dag::{ComputationDag, OutputAssignment, Term};
use crate::error::{LccError, Result};
use crate::matrix::TargetMatrix;
use crate::shift::{ExponentRange, ShiftCoefficient};
use crate::wiring::ShiftSearch;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Fs,
    Fp,
    Ma,
    Sliced,
    Csd,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Fs => "fs",
            Algorithm::Fp => "fp",
            Algorithm::Ma => "ma",
            Algorithm::Sliced => "sliced",
            Algorithm::Csd => "csd",
        })
    }
}

impl FromStr for Algorithm {
    type Err = LccError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "fs" => Algorithm::Fs,
            "fp" => Algorithm::Fp,
            "ma" => Algorithm::Ma,
            "sliced" => Algorithm::Sliced,
            "csd" => Algorithm::Csd,
            other => return Err(LccError::Config(format!("unknown algorithm '{other}'"))),
        })
    }
}

fn default_true() -> bool {
    true
}
fn default_layers() -> usize {
    32
}
fn default_slice_width() -> usize {
    4
}
fn default_inner() -> Algorithm {
    Algorithm::Ma
}
fn default_digits() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "ConfigDoc")]
pub struct DecomposeConfig {
    pub algorithm: Algorithm,
    /// `S` and solver per phase; see [`Schedule`].
    pub schedule: Schedule,
    pub target_sqnr_db: f64,
    /// Cap on the total vertex count; `None` means `64 * N`.
    #[serde(default)]
    pub max_vertices: Option<usize>,
    /// Depth-span limit for `ma`; `None` is unbounded.
    #[serde(default)]
    pub delta_mu_max: Option<usize>,
    /// `ma` row-selection weight `1 + max source depth`; off means weight 1.
    #[serde(default = "default_true")]
    pub depth_penalty: bool,
    #[serde(default = "default_layers")]
    pub layers_max: usize,
    #[serde(default = "default_slice_width")]
    pub slice_width: usize,
    /// Algorithm run on each block by `sliced`.
    #[serde(default = "default_inner")]
    pub inner: Algorithm,
    #[serde(default)]
    pub exponents: ExponentRange,
    #[serde(default)]
    pub shift_search: ShiftSearch,
    #[serde(default = "default_digits")]
    pub csd_digits: usize,
}

/// On-disk form: a missing schedule takes the algorithm's default.
#[derive(Deserialize)]
struct ConfigDoc {
    algorithm: Algorithm,
    #[serde(default)]
    schedule: Option<Schedule>,
    target_sqnr_db: f64,
    #[serde(default)]
    max_vertices: Option<usize>,
    #[serde(default)]
    delta_mu_max: Option<usize>,
    #[serde(default = "default_true")]
    depth_penalty: bool,
    #[serde(default = "default_layers")]
    layers_max: usize,
    #[serde(default = "default_slice_width")]
    slice_width: usize,
    #[serde(default = "default_inner")]
    inner: Algorithm,
    #[serde(default)]
    exponents: ExponentRange,
    #[serde(default)]
    shift_search: ShiftSearch,
    #[serde(default = "default_digits")]
    csd_digits: usize,
}

impl From<ConfigDoc> for DecomposeConfig {
    fn from(d: ConfigDoc) -> Self {
        let base = if d.algorithm == Algorithm::Sliced { d.inner } else { d.algorithm };
        DecomposeConfig {
            algorithm: d.algorithm,
            schedule: d.schedule.unwrap_or_else(|| default_schedule(base)),
            target_sqnr_db: d.target_sqnr_db,
            max_vertices: d.max_vertices,
            delta_mu_max: d.delta_mu_max,
            depth_penalty: d.depth_penalty,
            layers_max: d.layers_max,
            slice_width: d.slice_width,
            inner: d.inner,
            exponents: d.exponents,
            shift_search: d.shift_search,
            csd_digits: d.csd_digits,
        }
    }
}

/// `fp` grows whole layers at `S = 2` with matching pursuit; the sequential
/// algorithms use the phased default.
fn default_schedule(algorithm: Algorithm) -> Schedule {
    match algorithm {
        Algorithm::Fp => Schedule::fixed(2, crate::wiring::Solver::Dmp),
        _ => Schedule::default(),
    }
}

impl DecomposeConfig {
    pub fn new(algorithm: Algorithm, target_sqnr_db: f64) -> Self {
        DecomposeConfig {
            algorithm,
            schedule: default_schedule(algorithm),
            target_sqnr_db,
            max_vertices: None,
            delta_mu_max: None,
            depth_penalty: true,
            layers_max: default_layers(),
            slice_width: default_slice_width(),
            inner: default_inner(),
            exponents: ExponentRange::DEFAULT,
            shift_search: ShiftSearch::default(),
            csd_digits: default_digits(),
        }
    }

    pub fn fs(target_sqnr_db: f64) -> Self {
        Self::new(Algorithm::Fs, target_sqnr_db)
    }

    pub fn fp(target_sqnr_db: f64) -> Self {
        Self::new(Algorithm::Fp, target_sqnr_db)
    }

    pub fn ma(target_sqnr_db: f64, delta_mu_max: Option<usize>) -> Self {
        DecomposeConfig {
            delta_mu_max,
            ..Self::new(Algorithm::Ma, target_sqnr_db)
        }
    }

    pub fn sliced(inner: DecomposeConfig, slice_width: usize) -> Self {
        DecomposeConfig {
            algorithm: Algorithm::Sliced,
            inner: inner.algorithm,
            slice_width,
            ..inner
        }
    }

    pub fn csd(digits: usize) -> Self {
        DecomposeConfig {
            csd_digits: digits,
            ..Self::new(Algorithm::Csd, f64::MAX)
        }
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_max_vertices(mut self, cap: usize) -> Self {
        self.max_vertices = Some(cap);
        self
    }

    pub fn with_exponents(mut self, exponents: ExponentRange) -> Self {
        self.exponents = exponents;
        self
    }

    pub fn validate(&self, cols: usize) -> Result<()> {
        if !self.target_sqnr_db.is_finite() {
            return Err(LccError::Config("target SQNR must be finite".into()));
        }
        self.schedule.validate()?;
        match self.algorithm {
            Algorithm::Sliced => {
                if self.slice_width == 0 || self.slice_width > cols {
                    return Err(LccError::Config(format!(
                        "slice width {} outside [1, {cols}]",
                        self.slice_width
                    )));
                }
                if matches!(self.inner, Algorithm::Sliced | Algorithm::Csd) {
                    return Err(LccError::Config(format!(
                        "inner algorithm must be fs, fp or ma, got {}",
                        self.inner
                    )));
                }
            }
            Algorithm::Csd if self.csd_digits == 0 => {
                return Err(LccError::Config("csd needs at least one digit".into()));
            }
            Algorithm::Fp if self.layers_max == 0 => {
                return Err(LccError::Config("layers_max must be at least 1".into()));
            }
            _ => {}
        }
        Ok(())
    }

    pub(crate) fn vertex_cap(&self, rows: usize, cols: usize) -> usize {
        self.max_vertices.unwrap_or(64 * rows).max(cols)
    }
}

/// Why a decomposition stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    TargetReached,
    VertexCap,
    /// No row admits an improving wiring in the last phase.
    NoImprovement,
    /// The depth constraint removed every improving wiring.
    DepthInfeasible,
    /// A parallel layer failed to raise the SQNR.
    Stagnation,
    LayerCap,
    /// Single-shot algorithms (`csd`) that have no target loop.
    Completed,
}

impl StopReason {
    pub fn label(&self) -> &'static str {
        match self {
            StopReason::TargetReached => "",
            StopReason::VertexCap => "vertex_cap",
            StopReason::NoImprovement => "no_improvement",
            StopReason::DepthInfeasible => "depth_infeasible",
            StopReason::Stagnation => "stagnation",
            StopReason::LayerCap => "layer_cap",
            StopReason::Completed => "",
        }
    }
}

/// State after one iteration (a vertex for sequential algorithms, a layer for `fp`).
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    /// Vertex count after this step.
    pub len: usize,
    /// Row whose wiring created the vertex, sequential algorithms only.
    pub row: Option<usize>,
    pub phase: usize,
    pub sqnr_db: f64,
    pub outputs: Vec<OutputAssignment>,
}

#[derive(Clone, Debug)]
pub struct DecompositionResult {
    /// All outputs assigned.
    pub dag: ComputationDag,
    /// Squared error of every output row.
    pub row_errors: Vec<f64>,
    pub sqnr_db: f64,
    pub stop: StopReason,
    /// Step 0 is the starting codebook.
    pub log: Vec<Step>,
    /// Per-block stop reasons for `sliced`.
    pub blocks: Vec<StopReason>,
}

impl DecompositionResult {
    pub fn converged(&self) -> bool {
        matches!(self.stop, StopReason::TargetReached | StopReason::Completed)
    }

    /// The graph as it stood after `step`, outputs assigned.
    pub fn snapshot(&self, step: usize) -> Result<ComputationDag> {
        let s = self
            .log
            .get(step)
            .ok_or_else(|| LccError::Config(format!("no step {step}")))?;
        let mut dag = self.dag.truncated(s.len);
        for (row, o) in s.outputs.iter().enumerate() {
            dag.set_output(row, *o)?;
        }
        Ok(dag)
    }

    /// Index of the first step whose SQNR exceeds `target_db`, else the last one.
    pub fn first_step_above(&self, target_db: f64) -> usize {
        self.log
            .iter()
            .position(|s| s.sqnr_db > target_db)
            .unwrap_or(self.log.len().saturating_sub(1))
    }

    pub fn sqnr_trajectory(&self) -> impl Iterator<Item = f64> + '_ {
        self.log.iter().map(|s| s.sqnr_db)
    }
}

/// Runs the algorithm named in `cfg`.
pub fn decompose(t: &TargetMatrix, cfg: &DecomposeConfig) -> Result<DecompositionResult> {
    cfg.validate(t.cols())?;
    match cfg.algorithm {
        Algorithm::Fs => fs_decompose(t, cfg),
        Algorithm::Ma => ma_decompose(t, cfg),
        Algorithm::Fp => fp_decompose(t, cfg),
        Algorithm::Sliced => slice_decompose(t, cfg),
        Algorithm::Csd => csd_matrix_baseline(t, cfg.csd_digits, cfg.exponents),
    }
}

pub fn fs_decompose(t: &TargetMatrix, cfg: &DecomposeConfig) -> Result<DecompositionResult> {
    cfg.validate(t.cols())?;
    sequential::run(t, cfg, sequential::Mode::Fs)
}

pub fn ma_decompose(t: &TargetMatrix, cfg: &DecomposeConfig) -> Result<DecompositionResult> {
    cfg.validate(t.cols())?;
    sequential::run(
        t,
        cfg,
        sequential::Mode::Ma {
            delta_mu_max: cfg.delta_mu_max,
            penalty: cfg.depth_penalty,
        },
    )
}

pub fn fp_decompose(t: &TargetMatrix, cfg: &DecomposeConfig) -> Result<DecompositionResult> {
    cfg.validate(t.cols())?;
    parallel::run(t, cfg)
}

pub fn slice_decompose(t: &TargetMatrix, cfg: &DecomposeConfig) -> Result<DecompositionResult> {
    cfg.validate(t.cols())?;
    slice::run(t, cfg)
}

/// Sums `leaves` with a balanced binary tree of two-input adders.
///
/// The first level keeps each leaf's own coefficient; upper levels add with
/// `+2^0`. Returns what the output should read.
pub(crate) fn adder_tree(dag: &mut ComputationDag, leaves: Vec<Term>) -> Result<OutputAssignment> {
    let mut level = leaves;
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        for pair in level.chunks(2) {
            match pair {
                [a, b] => {
                    let id = dag.push_vertex(vec![*a, *b])?;
                    next.push(Term::new(id, ShiftCoefficient::ONE));
                }
                [a] => next.push(*a),
                _ => unreachable!(),
            }
        }
        level = next;
    }
    Ok(level.first().map_or(OutputAssignment::Zero, |t| OutputAssignment::Select(*t)))
}

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
