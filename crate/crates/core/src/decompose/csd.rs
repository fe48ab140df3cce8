//! Scalar baselines: every matrix entry quantised on its own.

use super::{adder_tree, DecompositionResult, Step, StopReason};
use crate::dag::{ComputationDag, Term};
use crate::error::{LccError, Result};
use crate::eval::{output_residuals, sqnr_from_residuals};
use crate::matrix::TargetMatrix;
use crate::shift::{floor_log2, is_pow2, pow2, ExponentRange, ShiftCoefficient};

/// Signed-digit recoding with at most `digits` nonzero digits, taking the
/// signed power of two nearest the remainder each time (ties to the larger
/// exponent).
pub fn csd_quantize(value: f64, digits: usize) -> Result<Vec<ShiftCoefficient>> {
    csd_quantize_in(value, digits, ExponentRange::DEFAULT)
}

pub fn csd_quantize_in(value: f64, digits: usize, range: ExponentRange) -> Result<Vec<ShiftCoefficient>> {
    if !value.is_finite() {
        return Err(LccError::Config(format!("cannot quantise {value}")));
    }
    if digits == 0 {
        return Err(LccError::Config("at least one digit is needed".into()));
    }
    let mut out = Vec::with_capacity(digits);
    let mut rest = value;
    while out.len() < digits && rest != 0.0 {
        let negative = rest < 0.0;
        let mag = rest.abs();
        let lo = range.clamp(floor_log2(mag));
        let hi = range.clamp(if is_pow2(mag) { lo } else { floor_log2(mag) + 1 });
        let e = if (mag - pow2(lo)).abs() < (pow2(hi) - mag).abs() { lo } else { hi };
        let c = ShiftCoefficient::new_in(negative, e, range)?;
        let next = rest - c.value();
        if next.abs() >= rest.abs() {
            break;
        }
        out.push(c);
        rest = next;
    }
    Ok(out)
}

/// Fixed point with `bits` fractional bits: `round(x * 2^b) / 2^b`.
pub fn binary_quantize(value: f64, bits: i32) -> f64 {
    (value * pow2(bits)).round() * pow2(-bits)
}

/// Each entry becomes a shift-and-add of its CSD digits over its input;
/// each row sums its entries with an adder tree.
pub fn csd_matrix_baseline(t: &TargetMatrix, digits: usize, range: ExponentRange) -> Result<DecompositionResult> {
    let (n, k) = (t.rows(), t.cols());
    let mut dag = ComputationDag::with_outputs(k, n)?;
    for row in 0..n {
        let mut leaves = Vec::new();
        for col in 0..k {
            let coeffs = csd_quantize_in(t.get(row, col), digits, range)?;
            match coeffs.as_slice() {
                [] => {}
                [c] => leaves.push(Term::new(col, *c)),
                _ => {
                    let terms = coeffs.iter().map(|c| Term::new(col, *c)).collect();
                    let id = dag.push_vertex(terms)?;
                    leaves.push(Term::new(id, ShiftCoefficient::ONE));
                }
            }
        }
        let out = adder_tree(&mut dag, leaves)?;
        dag.set_output(row, out)?;
    }
    let row_errors = output_residuals(t, &dag)?;
    let sqnr_db = sqnr_from_residuals(t, &row_errors);
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
        stop: StopReason::Completed,
        log,
        blocks: Vec::new(),
    })
}
