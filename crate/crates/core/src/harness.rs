//! Monte Carlo sweeps over Gaussian targets: decompose, cost, tabulate.
//!
//! Sequential and layered algorithms run once per `(config, trial)` up to
//! the largest grid value; each grid point reads the first logged step that
//! meets it, which is exactly the graph a run stopped at that point would
//! produce. `csd` walks the digit count upward the same way. `sliced` runs
//! once per grid point.
//!
//! Aggregate rows pool squared errors and norms over trials before taking
//! dB, and average the cost counts.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cost::{total_cost, CostModel};
use crate::dag::ComputationDag;
use crate::decompose::{csd_matrix_baseline, decompose, Algorithm, DecomposeConfig, DecompositionResult, StopReason};
use crate::error::{LccError, Result};
use crate::eval::output_residuals;
use crate::matrix::TargetMatrix;
use crate::numeric::{pairwise_sum, ratio_db};
use crate::wiring::Solver;

pub use crate::rng::{gen_gaussian_matrix, trial_seed};

pub const CSV_HEADER: [&str; 14] = [
    "algorithm",
    "s",
    "dmax",
    "q",
    "grid",
    "trial",
    "sqnr_db",
    "n_add",
    "n_delay",
    "n_inv",
    "cost_adders",
    "cost_total",
    "wall_ms",
    "flag",
];

/// Largest digit count tried by `csd` on an SQNR grid.
pub const CSD_MAX_DIGITS: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grid {
    /// Stop once the SQNR exceeds each value (dB).
    TargetSqnr(Vec<f64>),
    /// Stop at the last step with at most this many internal vertices.
    VertexBudget(Vec<usize>),
}

impl Grid {
    pub fn len(&self) -> usize {
        match self {
            Grid::TargetSqnr(v) => v.len(),
            Grid::VertexBudget(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn label(&self, i: usize) -> String {
        match self {
            Grid::TargetSqnr(v) => format!("{}", v[i]),
            Grid::VertexBudget(v) => v[i].to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub rows: usize,
    pub cols: usize,
    pub trials: usize,
    pub seed: u64,
    pub algorithms: Vec<DecomposeConfig>,
    #[serde(default)]
    pub cost: CostModel,
    pub grid: Grid,
    /// Fill `wall_ms`; off keeps the CSV byte-identical across runs.
    #[serde(default)]
    pub record_timing: bool,
    /// CSV destination used by the command line front end.
    #[serde(default)]
    pub output: Option<String>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(LccError::InvalidDimension("rows and cols must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(LccError::Config("trials must be at least 1".into()));
        }
        if self.algorithms.is_empty() || self.grid.is_empty() {
            return Err(LccError::Config("algorithm list and grid must be nonempty".into()));
        }
        if let Grid::TargetSqnr(v) = &self.grid {
            if v.iter().any(|g| !g.is_finite()) {
                return Err(LccError::Config("grid values must be finite".into()));
            }
        }
        for cfg in &self.algorithms {
            cfg.validate(self.cols)?;
        }
        Ok(())
    }
}

/// One table line. Aggregate lines have `trial == None`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub algorithm: String,
    pub s: String,
    pub dmax: String,
    pub q: String,
    pub grid: String,
    pub grid_index: usize,
    pub config_index: usize,
    pub trial: Option<usize>,
    pub sqnr_db: f64,
    pub n_add: f64,
    pub n_delay: f64,
    pub n_inv: f64,
    pub cost_adders: f64,
    pub cost_total: f64,
    pub wall_ms: f64,
    pub flag: String,
    /// Pooled `||T||^2` and squared error behind `sqnr_db`.
    pub signal: f64,
    pub noise: f64,
}

impl SweepRow {
    pub fn is_aggregate(&self) -> bool {
        self.trial.is_none()
    }

    fn record(&self) -> Vec<String> {
        let num = |x: f64| {
            if x.is_nan() {
                String::new()
            } else if x.is_infinite() {
                if x > 0.0 { "inf" } else { "-inf" }.to_string()
            } else if x.fract() == 0.0 && x.abs() < 1e15 {
                format!("{}", x as i64)
            } else {
                format!("{x:.6}")
            }
        };
        vec![
            self.algorithm.clone(),
            self.s.clone(),
            self.dmax.clone(),
            self.q.clone(),
            self.grid.clone(),
            self.trial.map_or("mean".to_string(), |t| t.to_string()),
            num(self.sqnr_db),
            num(self.n_add),
            num(self.n_delay),
            num(self.n_inv),
            num(self.cost_adders),
            num(self.cost_total),
            num(self.wall_ms),
            self.flag.clone(),
        ]
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| LccError::Io(e.to_string());
        w.write_record(CSV_HEADER).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.record()).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| LccError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
    }

    pub fn aggregates(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.is_aggregate())
    }

    /// `(cost, mean SQNR)` per grid point of one configuration.
    pub fn curve(&self, config_index: usize, total: bool) -> Curve {
        Curve::new(
            self.aggregates()
                .filter(|r| r.config_index == config_index)
                .map(|r| (if total { r.cost_total } else { r.cost_adders }, r.sqnr_db))
                .collect(),
        )
    }
}

/// Column labels describing a configuration.
pub fn describe(cfg: &DecomposeConfig) -> (String, String, String, String) {
    let algorithm = match cfg.algorithm {
        Algorithm::Sliced => format!("sliced-{}", cfg.inner),
        a => a.to_string(),
    };
    let phases = cfg.schedule.phases();
    let join = |v: Vec<String>| v.join(";");
    let (s, q) = if cfg.algorithm == Algorithm::Csd {
        (String::new(), String::new())
    } else {
        (
            join(phases.iter().map(|p| p.s.to_string()).collect()),
            join(
                phases
                    .iter()
                    .filter_map(|p| match p.solver {
                        Solver::Rs { q } => Some(q.to_string()),
                        _ => None,
                    })
                    .collect(),
            ),
        )
    };
    let uses_ma = cfg.algorithm == Algorithm::Ma || (cfg.algorithm == Algorithm::Sliced && cfg.inner == Algorithm::Ma);
    let dmax = if uses_ma {
        cfg.delta_mu_max.map_or("inf".to_string(), |d| d.to_string())
    } else {
        String::new()
    };
    (algorithm, s, dmax, q)
}

struct Measure {
    signal: f64,
    noise: f64,
    n_add: usize,
    n_delay: usize,
    n_inv: usize,
    cost_total: f64,
    flag: String,
    /// Digits used, for `csd`.
    digits: Option<usize>,
}

fn measure(t: &TargetMatrix, dag: &ComputationDag, model: &CostModel, flag: String) -> Result<Measure> {
    let res = output_residuals(t, dag)?;
    let c = total_cost(dag, model);
    Ok(Measure {
        signal: t.frobenius_sq(),
        noise: pairwise_sum(&res),
        n_add: c.n_add,
        n_delay: c.n_delay,
        n_inv: c.n_inv,
        cost_total: c.total,
        flag,
        digits: None,
    })
}

fn shortfall(stop: StopReason) -> String {
    match stop {
        StopReason::TargetReached | StopReason::Completed => "below_target".to_string(),
        s => s.label().to_string(),
    }
}

/// Reads grid points off a logged run.
fn from_log(t: &TargetMatrix, res: &DecompositionResult, grid: &Grid, model: &CostModel) -> Result<Vec<Measure>> {
    let k = t.cols();
    (0..grid.len())
        .map(|i| {
            let (step, flag) = match grid {
                Grid::TargetSqnr(v) => {
                    let step = res.first_step_above(v[i]);
                    let met = res.log[step].sqnr_db > v[i];
                    (step, if met { String::new() } else { shortfall(res.stop) })
                }
                Grid::VertexBudget(v) => {
                    let step = res.log.iter().rposition(|s| s.len - k <= v[i]).unwrap_or(0);
                    (step, String::new())
                }
            };
            measure(t, &res.snapshot(step)?, model, flag)
        })
        .collect()
}

fn csd_points(t: &TargetMatrix, cfg: &DecomposeConfig, grid: &Grid, model: &CostModel) -> Result<Vec<Measure>> {
    let mut runs: Vec<DecompositionResult> = Vec::new();
    let mut get = |d: usize| -> Result<(f64, usize, ComputationDag)> {
        while runs.len() < d {
            runs.push(csd_matrix_baseline(t, runs.len() + 1, cfg.exponents)?);
        }
        let r = &runs[d - 1];
        Ok((r.sqnr_db, r.dag.num_internal(), r.dag.clone()))
    };
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        // fewest digits meeting the target, or most digits within the budget
        let (d, dag, flag) = match grid {
            Grid::TargetSqnr(v) => {
                let mut d = 1;
                loop {
                    let (sqnr, _, dag) = get(d)?;
                    if sqnr > v[i] {
                        break (d, dag, String::new());
                    }
                    if d == CSD_MAX_DIGITS {
                        break (d, dag, "below_target".to_string());
                    }
                    d += 1;
                }
            }
            Grid::VertexBudget(v) => {
                let (_, used, first) = get(1)?;
                if used > v[i] {
                    (1, first, "over_budget".to_string())
                } else {
                    let mut best = (1, first);
                    for d in 2..=CSD_MAX_DIGITS {
                        let (_, used, dag) = get(d)?;
                        if used > v[i] {
                            break;
                        }
                        best = (d, dag);
                    }
                    (best.0, best.1, String::new())
                }
            }
        };
        let mut m = measure(t, &dag, model, flag)?;
        m.digits = Some(d);
        out.push(m);
    }
    Ok(out)
}

fn sliced_points(t: &TargetMatrix, cfg: &DecomposeConfig, grid: &Grid, model: &CostModel) -> Result<Vec<Measure>> {
    (0..grid.len())
        .map(|i| {
            let run_cfg = match grid {
                Grid::TargetSqnr(v) => DecomposeConfig {
                    target_sqnr_db: v[i],
                    ..cfg.clone()
                },
                Grid::VertexBudget(v) => {
                    let blocks = t.cols().div_ceil(cfg.slice_width);
                    let tree = t.rows() * (blocks - 1);
                    let per_block = v[i].saturating_sub(tree) / blocks;
                    DecomposeConfig {
                        target_sqnr_db: f64::MAX,
                        max_vertices: Some(cfg.slice_width + per_block),
                        ..cfg.clone()
                    }
                }
            };
            let res = decompose(t, &run_cfg)?;
            let flag = match grid {
                Grid::TargetSqnr(v) if res.sqnr_db <= v[i] => shortfall(res.stop),
                _ => String::new(),
            };
            measure(t, &res.dag, model, flag)
        })
        .collect()
}

fn run_trial(spec: &ExperimentSpec, cfg: &DecomposeConfig, trial: usize) -> Result<(Vec<Measure>, f64)> {
    // wasm32 has no clock, so it is only read when timing is requested
    let start = spec.record_timing.then(Instant::now);
    let t = gen_gaussian_matrix(spec.rows, spec.cols, trial_seed(spec.seed, trial as u64))?;
    let points = match cfg.algorithm {
        Algorithm::Csd => csd_points(&t, cfg, &spec.grid, &spec.cost)?,
        Algorithm::Sliced => sliced_points(&t, cfg, &spec.grid, &spec.cost)?,
        _ => {
            let run_cfg = match &spec.grid {
                Grid::TargetSqnr(v) => DecomposeConfig {
                    target_sqnr_db: v.iter().copied().fold(f64::MIN, f64::max),
                    ..cfg.clone()
                },
                Grid::VertexBudget(v) => DecomposeConfig {
                    target_sqnr_db: f64::MAX,
                    max_vertices: Some(spec.cols + v.iter().copied().max().unwrap_or(0)),
                    ..cfg.clone()
                },
            };
            let res = decompose(&t, &run_cfg)?;
            from_log(&t, &res, &spec.grid, &spec.cost)?
        }
    };
    Ok((points, start.map_or(0.0, |s| s.elapsed().as_secs_f64() * 1e3)))
}

/// Runs every `(config, trial)` and returns rows in (config, grid, trial) order.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<SweepTable> {
    spec.validate()?;
    let jobs: Vec<(usize, usize)> = (0..spec.algorithms.len())
        .flat_map(|c| (0..spec.trials).map(move |t| (c, t)))
        .collect();
    let outcomes = crate::decompose::map_indexed(jobs.len(), |j| {
        let (c, t) = jobs[j];
        run_trial(spec, &spec.algorithms[c], t)
    });

    let mut rows = Vec::new();
    for (c, cfg) in spec.algorithms.iter().enumerate() {
        let (algorithm, s, dmax, q) = describe(cfg);
        let trial_results = &outcomes[c * spec.trials..(c + 1) * spec.trials];
        for g in 0..spec.grid.len() {
            let base = SweepRow {
                algorithm: algorithm.clone(),
                s: s.clone(),
                dmax: dmax.clone(),
                q: q.clone(),
                grid: spec.grid.label(g),
                grid_index: g,
                config_index: c,
                trial: None,
                sqnr_db: f64::NAN,
                n_add: f64::NAN,
                n_delay: f64::NAN,
                n_inv: f64::NAN,
                cost_adders: f64::NAN,
                cost_total: f64::NAN,
                wall_ms: 0.0,
                flag: String::new(),
                signal: 0.0,
                noise: 0.0,
            };
            let mut ok: Vec<SweepRow> = Vec::new();
            for (trial, outcome) in trial_results.iter().enumerate() {
                let mut row = SweepRow {
                    trial: Some(trial),
                    ..base.clone()
                };
                match outcome {
                    Ok((points, ms)) => {
                        let m = &points[g];
                        row.sqnr_db = ratio_db(m.signal, m.noise);
                        row.n_add = m.n_add as f64;
                        row.n_delay = m.n_delay as f64;
                        row.n_inv = m.n_inv as f64;
                        row.cost_adders = spec.cost.c_add * m.n_add as f64;
                        row.cost_total = m.cost_total;
                        row.wall_ms = *ms;
                        row.flag = m.flag.clone();
                        row.signal = m.signal;
                        row.noise = m.noise;
                        if let Some(d) = m.digits {
                            row.s = d.to_string();
                        }
                        ok.push(row.clone());
                    }
                    Err(e) => row.flag = format!("error: {e}"),
                }
                rows.push(row);
            }
            rows.push(aggregate(base, &ok, spec.trials));
        }
    }
    Ok(SweepTable { rows })
}

fn aggregate(mut base: SweepRow, ok: &[SweepRow], trials: usize) -> SweepRow {
    if ok.is_empty() {
        base.flag = "no_data".into();
        return base;
    }
    let m = ok.len() as f64;
    let mean = |f: fn(&SweepRow) -> f64| ok.iter().map(f).sum::<f64>() / m;
    base.signal = pairwise_sum(&ok.iter().map(|r| r.signal).collect::<Vec<_>>());
    base.noise = pairwise_sum(&ok.iter().map(|r| r.noise).collect::<Vec<_>>());
    base.sqnr_db = ratio_db(base.signal, base.noise);
    base.n_add = mean(|r| r.n_add);
    base.n_delay = mean(|r| r.n_delay);
    base.n_inv = mean(|r| r.n_inv);
    base.cost_adders = mean(|r| r.cost_adders);
    base.cost_total = mean(|r| r.cost_total);
    base.wall_ms = mean(|r| r.wall_ms);
    let short = ok.iter().filter(|r| !r.flag.is_empty()).count();
    base.flag = match (ok.len() < trials, short) {
        (true, _) => format!("failed_trials={}", trials - ok.len()),
        (false, 0) => String::new(),
        (false, n) => format!("short_trials={n}"),
    };
    base
}

/// Piecewise-linear SQNR as a function of cost.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    points: Vec<(f64, f64)>,
}

impl Curve {
    /// Sorts by cost; when costs repeat, the best SQNR is kept.
    pub fn new(mut points: Vec<(f64, f64)>) -> Self {
        points.retain(|(c, s)| c.is_finite() && !s.is_nan());
        points.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
        points.dedup_by(|b, a| a.0 == b.0);
        Curve { points }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn cost_range(&self) -> Option<(f64, f64)> {
        Some((self.points.first()?.0, self.points.last()?.0))
    }

    /// Interpolated SQNR at `cost`; `None` outside the sampled range.
    pub fn at(&self, cost: f64) -> Option<f64> {
        let (lo, hi) = self.cost_range()?;
        if cost < lo || cost > hi {
            return None;
        }
        let i = self.points.partition_point(|p| p.0 < cost);
        if self.points[i].0 == cost {
            return Some(self.points[i].1);
        }
        let (c0, s0) = self.points[i - 1];
        let (c1, s1) = self.points[i];
        Some(s0 + (s1 - s0) * (cost - c0) / (c1 - c0))
    }
}

/// `count` evenly spaced costs inside the range every curve covers.
pub fn common_cost_grid(curves: &[&Curve], count: usize) -> Vec<f64> {
    let mut lo = f64::MIN;
    let mut hi = f64::MAX;
    for c in curves {
        match c.cost_range() {
            Some((a, b)) => {
                lo = lo.max(a);
                hi = hi.min(b);
            }
            None => return Vec::new(),
        }
    }
    if !(lo < hi) || count == 0 {
        return Vec::new();
    }
    if count == 1 {
        return vec![(lo + hi) / 2.0];
    }
    (0..count)
        .map(|i| (lo + (hi - lo) * i as f64 / (count - 1) as f64).min(hi))
        .collect()
}
