//! Column slicing: `T x = sum_b T_b x_b`. Each block is decomposed on its
//! own and the block outputs of a row are summed by an adder tree.

use super::{adder_tree, decompose, DecomposeConfig, DecompositionResult, Step, StopReason};
use crate::dag::{ComputationDag, OutputAssignment, Term, VertexId};
use crate::error::Result;
use crate::eval::{output_residuals, sqnr_from_residuals};
use crate::matrix::TargetMatrix;

/// Copies `block` into `merged`, mapping its input `i` to `offset + i`.
/// Returns the new id of every block vertex.
fn merge_block(merged: &mut ComputationDag, block: &ComputationDag, offset: usize) -> Result<Vec<VertexId>> {
    let mut map: Vec<VertexId> = (0..block.num_inputs()).map(|i| offset + i).collect();
    for id in block.num_inputs()..block.len() {
        let terms = block
            .terms(id)
            .iter()
            .map(|t| Term::new(map[t.src], t.coeff))
            .collect();
        map.push(merged.push_vertex(terms)?);
    }
    Ok(map)
}

pub(crate) fn run(t: &TargetMatrix, cfg: &DecomposeConfig) -> Result<DecompositionResult> {
    let (n, k) = (t.rows(), t.cols());
    let width = cfg.slice_width;
    let inner = DecomposeConfig {
        algorithm: cfg.inner,
        ..cfg.clone()
    };
    let starts: Vec<usize> = (0..k).step_by(width).collect();
    let results = super::map_indexed(starts.len(), |b| {
        let start = starts[b];
        match t.column_block(start, width.min(k - start)) {
            Some(block) => decompose(&block, &inner).map(Some),
            None => Ok(None),
        }
    });

    let mut dag = ComputationDag::with_outputs(k, n)?;
    let mut leaves: Vec<Vec<Term>> = vec![Vec::new(); n];
    let mut blocks = Vec::with_capacity(starts.len());
    for (b, res) in results.into_iter().enumerate() {
        let Some(res) = res? else { continue };
        blocks.push(res.stop);
        let map = merge_block(&mut dag, &res.dag, starts[b])?;
        for (row, leaf) in leaves.iter_mut().enumerate() {
            if let Some(OutputAssignment::Select(term)) = res.dag.output(row) {
                leaf.push(Term::new(map[term.src], term.coeff));
            }
        }
    }
    for (row, leaf) in leaves.into_iter().enumerate() {
        let out = adder_tree(&mut dag, leaf)?;
        dag.set_output(row, out)?;
    }

    let row_errors = output_residuals(t, &dag)?;
    let sqnr_db = sqnr_from_residuals(t, &row_errors);
    let stop = if sqnr_db > cfg.target_sqnr_db {
        StopReason::TargetReached
    } else {
        blocks
            .iter()
            .copied()
            .find(|s| *s != StopReason::TargetReached)
            .unwrap_or(StopReason::NoImprovement)
    };
    let log = vec![Step {
        len: dag.len(),
        row: None,
        phase: 0,
        sqnr_db,
        outputs: dag.outputs().iter().map(|o| o.expect("assigned above")).collect(),
    }];
    Ok(DecompositionResult {
        dag,
        row_errors,
        sqnr_db,
        stop,
        log,
        blocks,
    })
}
