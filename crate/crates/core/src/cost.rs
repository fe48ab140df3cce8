//! Hardware cost of a pipelined shift-and-add graph: adders, equalisation
//! latches and sign inverters.
//!
//! Every adder is followed by one latch. A vertex feeding successors at
//! different depths additionally needs `max successor depth - own depth - 1`
//! latches so all consumers see operands from the same input sample.

use serde::{Deserialize, Serialize};

use crate::dag::{ComputationDag, OutputAssignment};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub c_add: f64,
    pub c_delay: f64,
    pub c_inv: f64,
}

impl CostModel {
    /// One unit per adder, nothing else.
    pub const ADDERS_ONLY: CostModel = CostModel {
        c_add: 1.0,
        c_delay: 0.0,
        c_inv: 0.0,
    };

    pub fn new(c_add: f64, c_delay: f64, c_inv: f64) -> Option<Self> {
        let ok = [c_add, c_delay, c_inv].iter().all(|c| c.is_finite() && *c >= 0.0);
        ok.then_some(CostModel {
            c_add,
            c_delay,
            c_inv,
        })
    }
}

impl Default for CostModel {
    /// Transistor counts per bit: full adder and latch about 20, inverter 2.
    fn default() -> Self {
        CostModel {
            c_add: 20.0,
            c_delay: 20.0,
            c_inv: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepthTable {
    /// Longest path from any input, per vertex.
    pub depths: Vec<usize>,
    /// Depth of the vertex each output reads; `None` for zero or unassigned rows.
    pub output_depths: Vec<Option<usize>>,
}

impl DepthTable {
    pub fn max_depth(&self) -> usize {
        self.depths.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DelayOptions {
    /// Also count latches that align every output to the deepest one.
    pub align_outputs: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostReport {
    pub n_add: usize,
    pub n_delay: usize,
    pub n_inv: usize,
    pub total: f64,
    pub depths: DepthTable,
}

/// Single forward pass; term sources always precede the vertex.
pub fn compute_depths(dag: &ComputationDag) -> DepthTable {
    let mut depths = vec![0usize; dag.len()];
    for id in dag.num_inputs()..dag.len() {
        depths[id] = 1 + dag.terms(id).iter().map(|t| depths[t.src]).max().unwrap_or(0);
    }
    let output_depths = dag
        .outputs()
        .iter()
        .map(|o| match o {
            Some(OutputAssignment::Select(t)) => Some(depths[t.src]),
            _ => None,
        })
        .collect();
    DepthTable {
        depths,
        output_depths,
    }
}

/// `sum over internal vertices of (indegree - 1)`.
pub fn count_additions(dag: &ComputationDag) -> usize {
    (dag.num_inputs()..dag.len())
        .map(|id| dag.indegree(id).saturating_sub(1))
        .sum()
}

pub fn count_delays(dag: &ComputationDag) -> usize {
    count_delays_with(dag, &compute_depths(dag), DelayOptions::default())
}

pub fn count_delays_with(dag: &ComputationDag, depths: &DepthTable, opts: DelayOptions) -> usize {
    let d = &depths.depths;
    // deepest successor per vertex, None when outdegree is zero
    let mut deepest: Vec<Option<usize>> = vec![None; dag.len()];
    for (id, term) in dag.arcs() {
        let slot = &mut deepest[term.src];
        *slot = Some(slot.map_or(d[id], |m| m.max(d[id])));
    }
    let equalise: usize = deepest
        .iter()
        .enumerate()
        .filter_map(|(v, m)| m.map(|m| m - d[v] - 1))
        .sum();
    let mut total = count_additions(dag) + equalise;
    if opts.align_outputs {
        let out: Vec<usize> = {
            let mut seen: Vec<usize> = dag
                .outputs()
                .iter()
                .filter_map(|o| match o {
                    Some(OutputAssignment::Select(t)) => Some(t.src),
                    _ => None,
                })
                .collect();
            seen.sort_unstable();
            seen.dedup();
            seen
        };
        let top = out.iter().map(|&v| d[v]).max().unwrap_or(0);
        total += out.iter().map(|&v| top - d[v]).sum::<usize>();
    }
    total
}

/// Arcs (including output selections) carrying a negative coefficient.
pub fn count_inverters(dag: &ComputationDag) -> usize {
    let arcs = dag.arcs().filter(|(_, t)| t.coeff.is_negative()).count();
    let outs = dag
        .outputs()
        .iter()
        .filter(|o| matches!(o, Some(OutputAssignment::Select(t)) if t.coeff.is_negative()))
        .count();
    arcs + outs
}

pub fn total_cost(dag: &ComputationDag, model: &CostModel) -> CostReport {
    total_cost_with(dag, model, DelayOptions::default())
}

pub fn total_cost_with(dag: &ComputationDag, model: &CostModel, opts: DelayOptions) -> CostReport {
    let depths = compute_depths(dag);
    let n_add = count_additions(dag);
    let n_delay = count_delays_with(dag, &depths, opts);
    let n_inv = count_inverters(dag);
    CostReport {
        n_add,
        n_delay,
        n_inv,
        total: model.c_add * n_add as f64 + model.c_delay * n_delay as f64 + model.c_inv * n_inv as f64,
        depths,
    }
}
