//! Layered growth (`fp`): every row is rewired from the previous layer only,
//! so `T` is approximated by a product of sparse wiring matrices.

use std::collections::HashMap;

use super::{DecomposeConfig, DecompositionResult, Step, StopReason};
use crate::dag::{ComputationDag, OutputAssignment, Term, VertexId};
use crate::error::Result;
use crate::eval::{output_residuals, row_distance_sq, sqnr_from_residuals};
use crate::matrix::TargetMatrix;
use crate::numeric::{norm_sq, pairwise_sum, ratio_db};
use crate::shift::ShiftCoefficient;
use crate::wiring::{select_one_in, wire, Codebook, WiringConfig};

struct Layer {
    ids: Vec<VertexId>,
    outputs: Vec<OutputAssignment>,
    errors: Vec<f64>,
}

fn max_relative(t: &TargetMatrix, errors: &[f64]) -> f64 {
    errors
        .iter()
        .enumerate()
        .filter_map(|(n, e)| {
            let z = norm_sq(t.row(n));
            (z > 0.0).then(|| e / z)
        })
        .fold(0.0, f64::max)
}

/// Wires every row over `prev` and appends the distinct results as one layer.
fn grow_layer(t: &TargetMatrix, dag: &mut ComputationDag, prev: &[VertexId], wcfg: &WiringConfig) -> Result<Layer> {
    let wirings = {
        let snapshot: &ComputationDag = dag;
        super::map_indexed(t.rows(), |n| {
            let book = Codebook::new(snapshot).restricted_to(prev);
            wire(t.row(n), &book, wcfg)
        })
    };
    let mut seen: HashMap<Vec<u64>, VertexId> = HashMap::new();
    let mut layer = Layer {
        ids: Vec::new(),
        outputs: Vec::with_capacity(t.rows()),
        errors: Vec::with_capacity(t.rows()),
    };
    for (n, w) in wirings.into_iter().enumerate() {
        let w = w?;
        if w.is_empty() {
            layer.outputs.push(OutputAssignment::Zero);
            layer.errors.push(norm_sq(t.row(n)));
            continue;
        }
        let value = dag.evaluate_terms(&w.terms)?;
        let key: Vec<u64> = value.iter().map(|x| (x + 0.0).to_bits()).collect();
        let id = match seen.get(&key) {
            Some(&id) => id,
            None => {
                let id = dag.push_vertex(w.terms)?;
                seen.insert(key, id);
                layer.ids.push(id);
                id
            }
        };
        layer.outputs.push(OutputAssignment::Select(Term::new(id, ShiftCoefficient::ONE)));
        layer.errors.push(row_distance_sq(t.row(n), dag.value(id)));
    }
    Ok(layer)
}

pub(crate) fn run(t: &TargetMatrix, cfg: &DecomposeConfig) -> Result<DecompositionResult> {
    let (n, k) = (t.rows(), t.cols());
    let cap = cfg.vertex_cap(n, k);
    let frob = t.frobenius_sq();
    let schedule = &cfg.schedule;

    let mut dag = ComputationDag::with_outputs(k, n)?;
    let inputs: Vec<VertexId> = (0..k).collect();
    let (mut outputs, mut errors): (Vec<OutputAssignment>, Vec<f64>) = {
        let book = Codebook::new(&dag).restricted_to(&inputs);
        (0..n).map(|r| select_one_in(t.row(r), &book, cfg.exponents)).unzip()
    };
    let mut prev = inputs.clone();
    let mut sqnr = ratio_db(frob, pairwise_sum(&errors));
    let mut log = vec![Step {
        len: k,
        row: None,
        phase: 0,
        sqnr_db: sqnr,
        outputs: outputs.clone(),
    }];
    let mut phase = 0;
    let mut phase_start = 0;
    let mut layers = 0;

    let stop = loop {
        if sqnr > cfg.target_sqnr_db {
            break StopReason::TargetReached;
        }
        if layers >= cfg.layers_max {
            break StopReason::LayerCap;
        }
        while phase + 1 < schedule.len()
            && schedule.phases()[phase + 1]
                .trigger
                .fires(&log[phase_start..], n, max_relative(t, &errors))
        {
            phase += 1;
            phase_start = log.len() - 1;
        }
        let p = schedule.phases()[phase];
        let wcfg = WiringConfig::new(p.s, p.solver)?
            .with_exponents(cfg.exponents)
            .with_shift_search(cfg.shift_search);
        let before = dag.len();
        let layer = grow_layer(t, &mut dag, &prev, &wcfg)?;
        let next_sqnr = ratio_db(frob, pairwise_sum(&layer.errors));
        if dag.len() > cap {
            dag = dag.truncated(before);
            break StopReason::VertexCap;
        }
        if next_sqnr.is_nan() || next_sqnr <= sqnr || layer.ids.is_empty() {
            dag = dag.truncated(before);
            if phase + 1 < schedule.len() {
                phase += 1;
                phase_start = log.len() - 1;
                continue;
            }
            break StopReason::Stagnation;
        }
        layers += 1;
        prev = layer.ids;
        outputs = layer.outputs;
        errors = layer.errors;
        sqnr = next_sqnr;
        log.push(Step {
            len: dag.len(),
            row: None,
            phase,
            sqnr_db: sqnr,
            outputs: outputs.clone(),
        });
    };

    for (row, o) in outputs.into_iter().enumerate() {
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
