//! Sequential growth (`fs`, `ma`): one vertex per iteration, wired from the
//! whole codebook for the row whose selection error it reduces the most.

use super::{DecomposeConfig, DecompositionResult, Schedule, Step, StopReason};
use crate::dag::{ComputationDag, OutputAssignment};
use crate::error::Result;
use crate::eval::{output_residuals, sqnr_from_residuals};
use crate::matrix::TargetMatrix;
use crate::numeric::{norm_sq, pairwise_sum, ratio_db};
use crate::wiring::{fit_vertex, wire, Candidate, Codebook, Wiring, WiringConfig};

#[derive(Clone, Copy, Debug)]
pub(crate) enum Mode {
    Fs,
    Ma {
        delta_mu_max: Option<usize>,
        penalty: bool,
    },
}

/// Best `S = 1` selection per row, updated one vertex at a time.
struct Selections {
    best: Vec<Option<Candidate>>,
    zero: Vec<f64>,
}

impl Selections {
    fn new(t: &TargetMatrix) -> Self {
        Selections {
            best: vec![None; t.rows()],
            zero: (0..t.rows()).map(|n| norm_sq(t.row(n))).collect(),
        }
    }

    fn offer(&mut self, t: &TargetMatrix, dag: &ComputationDag, id: usize, cfg: &DecomposeConfig) {
        for (n, slot) in self.best.iter_mut().enumerate() {
            if let Some(c) = fit_vertex(t.row(n), dag, id, cfg.exponents) {
                if slot.is_none_or(|b| c.beats(&b)) {
                    *slot = Some(c);
                }
            }
        }
    }

    fn select(&self, n: usize) -> (OutputAssignment, f64) {
        match self.best[n] {
            Some(c) if c.error < self.zero[n] => (OutputAssignment::Select(c.term), c.error),
            _ => (OutputAssignment::Zero, self.zero[n]),
        }
    }

    fn errors(&self) -> Vec<f64> {
        (0..self.best.len()).map(|n| self.select(n).1).collect()
    }

    fn outputs(&self) -> Vec<OutputAssignment> {
        (0..self.best.len()).map(|n| self.select(n).0).collect()
    }

    fn max_relative(&self) -> f64 {
        (0..self.best.len())
            .filter(|&n| self.zero[n] > 0.0)
            .map(|n| self.select(n).1 / self.zero[n])
            .fold(0.0, f64::max)
    }
}

/// A row that would improve, with its wiring.
struct Proposal {
    row: usize,
    gain: f64,
    score: f64,
    wiring: Wiring,
}

fn phase_config(schedule: &Schedule, phase: usize, cfg: &DecomposeConfig) -> Result<WiringConfig> {
    let p = schedule.phases()[phase];
    Ok(WiringConfig::new(p.s, p.solver)?
        .with_exponents(cfg.exponents)
        .with_shift_search(cfg.shift_search))
}

#[allow(clippy::too_many_arguments)]
fn proposals(
    t: &TargetMatrix,
    dag: &ComputationDag,
    depths: &[usize],
    span: Option<usize>,
    wcfg: &WiringConfig,
    sel: &Selections,
    blocked: &[bool],
    mode: Mode,
) -> Result<Vec<Proposal>> {
    let wirings = super::map_indexed(t.rows(), |n| {
        if blocked[n] {
            return Ok(None);
        }
        let mut book = Codebook::new(dag);
        if let Some(d) = span {
            book = book.with_depth_span(depths, d);
        }
        wire(t.row(n), &book, wcfg).map(Some)
    });
    let errs = sel.errors();
    let base = pairwise_sum(&errs);
    let mut out = Vec::new();
    for (n, w) in wirings.into_iter().enumerate() {
        let Some(wiring) = w? else { continue };
        let gain = errs[n] - wiring.error;
        if wiring.is_empty() || gain.is_nan() || gain <= 0.0 {
            continue;
        }
        let score = match mode {
            Mode::Ma { penalty: true, .. } => {
                let deepest = wiring.terms.iter().map(|t| depths[t.src]).max().unwrap_or(0);
                (1 + deepest) as f64 * (base - errs[n] + wiring.error)
            }
            _ => -gain,
        };
        out.push(Proposal {
            row: n,
            gain,
            score,
            wiring,
        });
    }
    Ok(out)
}

/// Lowest score, then larger gain, then smaller row.
fn choose(props: Vec<Proposal>) -> Option<Proposal> {
    props.into_iter().reduce(|a, b| {
        let b_wins = b.score < a.score || (b.score == a.score && b.gain > a.gain);
        if b_wins {
            b
        } else {
            a
        }
    })
}

pub(crate) fn run(t: &TargetMatrix, cfg: &DecomposeConfig, mode: Mode) -> Result<DecompositionResult> {
    let (n, k) = (t.rows(), t.cols());
    let span = match mode {
        Mode::Ma { delta_mu_max, .. } => delta_mu_max,
        Mode::Fs => None,
    };
    let cap = cfg.vertex_cap(n, k);
    let frob = t.frobenius_sq();
    let schedule = &cfg.schedule;

    let mut dag = ComputationDag::with_outputs(k, n)?;
    let mut depths = vec![0usize; k];
    let mut sel = Selections::new(t);
    for id in 0..k {
        sel.offer(t, &dag, id, cfg);
    }
    let mut sqnr = ratio_db(frob, pairwise_sum(&sel.errors()));
    let mut log = vec![Step {
        len: k,
        row: None,
        phase: 0,
        sqnr_db: sqnr,
        outputs: sel.outputs(),
    }];
    let mut phase = 0;
    let mut phase_start = 0;
    let mut blocked = vec![false; n];

    let stop = loop {
        if sqnr > cfg.target_sqnr_db {
            break StopReason::TargetReached;
        }
        if dag.len() >= cap {
            break StopReason::VertexCap;
        }
        while phase + 1 < schedule.len()
            && schedule.phases()[phase + 1]
                .trigger
                .fires(&log[phase_start..], n, sel.max_relative())
        {
            phase += 1;
            phase_start = log.len() - 1;
        }
        let wcfg = phase_config(schedule, phase, cfg)?;
        let props = proposals(t, &dag, &depths, span, &wcfg, &sel, &blocked, mode)?;
        let Some(pick) = choose(props) else {
            if phase + 1 < schedule.len() {
                phase += 1;
                phase_start = log.len() - 1;
                continue;
            }
            let unconstrained = span.is_some() && {
                let free = proposals(t, &dag, &depths, None, &wcfg, &sel, &blocked, mode)?;
                !free.is_empty()
            };
            break if unconstrained {
                StopReason::DepthInfeasible
            } else {
                StopReason::NoImprovement
            };
        };
        let terms = pick.wiring.terms;
        let deepest = terms.iter().map(|t| depths[t.src]).max().unwrap_or(0);
        let (id, fresh) = dag.push_or_reuse(terms)?;
        if !fresh {
            blocked[pick.row] = true;
            continue;
        }
        blocked.fill(false);
        depths.push(deepest + 1);
        sel.offer(t, &dag, id, cfg);
        sqnr = ratio_db(frob, pairwise_sum(&sel.errors()));
        log.push(Step {
            len: dag.len(),
            row: Some(pick.row),
            phase,
            sqnr_db: sqnr,
            outputs: sel.outputs(),
        });
    };

    for (row, o) in sel.outputs().into_iter().enumerate() {
        dag.set_output(row, o)?;
    }
    let row_errors = output_residuals(t, &dag)?;
    let sqnr_db = sqnr_from_residuals(t, &row_errors);
    Ok(DecompositionResult {
        dag,
        row_errors,
        sqnr_db,
        stop,
        log,
        blocks: Vec::new(),
    })
}
