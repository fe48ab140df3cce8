//! Ground truth for a compiled graph: run it, measure it against `T`.

use crate::dag::{ComputationDag, OutputAssignment};
use crate::error::{LccError, Result};
use crate::matrix::TargetMatrix;
use crate::numeric::{pairwise_sum, ratio_db};
use crate::shift::ExponentRange;
use crate::wiring::{select_one_in, Codebook};

/// Scalar forward pass in vertex order; does not read the cached vertex values.
pub fn evaluate_dag(dag: &ComputationDag, x: &[f64]) -> Result<Vec<f64>> {
    let k = dag.num_inputs();
    if x.len() != k {
        return Err(LccError::LengthMismatch {
            expected: k,
            got: x.len(),
        });
    }
    let mut vals = Vec::with_capacity(dag.len());
    vals.extend_from_slice(x);
    for id in k..dag.len() {
        let v = dag.terms(id).iter().fold(0.0, |acc, t| acc + t.coeff.apply(vals[t.src]));
        vals.push(v);
    }
    dag.outputs()
        .iter()
        .enumerate()
        .map(|(row, o)| match o {
            None => Err(LccError::IncompleteDag(row)),
            Some(OutputAssignment::Zero) => Ok(0.0),
            Some(OutputAssignment::Select(t)) => Ok(t.coeff.apply(vals[t.src])),
        })
        .collect()
}

/// Stacked vertex values, one row per vertex.
pub fn codebook_matrix(dag: &ComputationDag) -> Vec<Vec<f64>> {
    (0..dag.len()).map(|id| dag.value(id).to_vec()).collect()
}

/// The matrix the graph actually implements, row `n` = what output `n` computes.
pub fn effective_matrix(dag: &ComputationDag) -> Result<Vec<Vec<f64>>> {
    let k = dag.num_inputs();
    (0..dag.num_outputs())
        .map(|row| match dag.output(row) {
            None => Err(LccError::IncompleteDag(row)),
            Some(OutputAssignment::Zero) => Ok(vec![0.0; k]),
            Some(OutputAssignment::Select(t)) => {
                Ok(dag.value(t.src).iter().map(|v| t.coeff.apply(*v)).collect())
            }
        })
        .collect()
}

/// Same as [`effective_matrix`] but obtained by running the graph on each unit input.
pub fn probe_matrix(dag: &ComputationDag) -> Result<Vec<Vec<f64>>> {
    let k = dag.num_inputs();
    let mut cols = Vec::with_capacity(k);
    for j in 0..k {
        let mut e = vec![0.0; k];
        e[j] = 1.0;
        cols.push(evaluate_dag(dag, &e)?);
    }
    Ok((0..dag.num_outputs())
        .map(|n| cols.iter().map(|c| c[n]).collect())
        .collect())
}

fn check_shape(t: &TargetMatrix, dag: &ComputationDag) -> Result<()> {
    if t.cols() != dag.num_inputs() {
        return Err(LccError::LengthMismatch {
            expected: dag.num_inputs(),
            got: t.cols(),
        });
    }
    Ok(())
}

/// Squared distance of each output row to the matching row of `T`.
pub fn output_residuals(t: &TargetMatrix, dag: &ComputationDag) -> Result<Vec<f64>> {
    check_shape(t, dag)?;
    if dag.num_outputs() != t.rows() {
        return Err(LccError::LengthMismatch {
            expected: t.rows(),
            got: dag.num_outputs(),
        });
    }
    let eff = effective_matrix(dag)?;
    Ok(eff.iter().enumerate().map(|(n, row)| row_distance_sq(t.row(n), row)).collect())
}

pub(crate) fn row_distance_sq(t: &[f64], approx: &[f64]) -> f64 {
    t.iter()
        .zip(approx)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

/// SQNR of whatever the outputs compute.
pub fn output_sqnr_db(t: &TargetMatrix, dag: &ComputationDag) -> Result<f64> {
    let res = output_residuals(t, dag)?;
    Ok(sqnr_from_residuals(t, &res))
}

pub fn sqnr_from_residuals(t: &TargetMatrix, residuals: &[f64]) -> f64 {
    ratio_db(t.frobenius_sq(), pairwise_sum(residuals))
}

/// Codebook quality: every row approximated by its best single shifted
/// vertex anywhere in the graph.
pub fn sqnr_db(t: &TargetMatrix, dag: &ComputationDag) -> Result<f64> {
    sqnr_db_in(t, dag, ExponentRange::DEFAULT)
}

pub fn sqnr_db_in(t: &TargetMatrix, dag: &ComputationDag, range: ExponentRange) -> Result<f64> {
    check_shape(t, dag)?;
    let book = Codebook::new(dag);
    let res: Vec<f64> = (0..t.rows()).map(|n| select_one_in(t.row(n), &book, range).1).collect();
    Ok(sqnr_from_residuals(t, &res))
}
