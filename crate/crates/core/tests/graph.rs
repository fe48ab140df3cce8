mod common;

use common::{additions, depths, random_dag, reference_rows, DagShape, Draw};
use lcc::cost::{count_delays_with, DelayOptions};
use lcc::eval::{codebook_matrix, effective_matrix, probe_matrix};
use lcc::{
    compute_depths, count_additions, count_delays, count_inverters, evaluate_dag, sqnr_db, total_cost, ComputationDag,
    CostModel, LccError, OutputAssignment, ShiftCoefficient, TargetMatrix, Term,
};
use proptest::prelude::*;

fn p(e: i32) -> ShiftCoefficient {
    ShiftCoefficient::positive(e)
}

fn n(e: i32) -> ShiftCoefficient {
    ShiftCoefficient::negative(e)
}

fn chain() -> ComputationDag {
    let mut d = ComputationDag::unit_codebook(2).unwrap();
    let v1 = d.push_vertex(vec![Term::new(0, p(0)), Term::new(1, p(0))]).unwrap();
    d.push_vertex(vec![Term::new(v1, p(0)), Term::new(1, p(0))]).unwrap();
    d
}

#[test]
fn vertex_values() {
    let mut d = ComputationDag::unit_codebook(1).unwrap();
    let a = d.push_vertex(vec![Term::new(0, p(1)), Term::new(0, p(0))]).unwrap();
    let b = d.push_vertex(vec![Term::new(0, p(-1)), Term::new(0, p(-2))]).unwrap();
    let c = d.push_vertex(vec![Term::new(0, p(0)), Term::new(0, n(-2))]).unwrap();
    assert_eq!(d.value(a), &[3.0]);
    assert_eq!(d.value(b), &[0.75]);
    assert_eq!(d.value(b), d.value(c));
    let d3 = ComputationDag::unit_codebook(3).unwrap();
    assert_eq!(d3.value(1), &[0.0, 1.0, 0.0]);
    assert!(ComputationDag::unit_codebook(0).is_err());
}

#[test]
fn construction_rejects_forward_references() {
    let mut d = ComputationDag::unit_codebook(2).unwrap();
    assert!(matches!(d.push_vertex(vec![Term::new(2, p(0))]), Err(LccError::NonTopological { .. })));
    assert!(matches!(d.push_vertex(vec![]), Err(LccError::EmptyWiring(_))));
}

#[test]
fn depth_and_delay_examples() {
    let d = chain();
    assert_eq!(compute_depths(&d).depths, vec![0, 0, 1, 2]);
    assert_eq!(count_additions(&d), 2);
    assert_eq!(count_delays(&d), 3);

    let mut single = ComputationDag::unit_codebook(2).unwrap();
    single.push_vertex(vec![Term::new(0, p(0)), Term::new(1, p(0))]).unwrap();
    assert_eq!((count_additions(&single), count_delays(&single)), (1, 1));
}

/// A depth-3 path joined with a depth-1 path at the final addition.
#[test]
fn gap_of_two_costs_two_latches() {
    let mut d = ComputationDag::unit_codebook(2).unwrap();
    let a = d.push_vertex(vec![Term::new(0, p(0)), Term::new(1, p(1))]).unwrap();
    let b = d.push_vertex(vec![Term::new(a, p(0)), Term::new(0, p(2))]).unwrap();
    let c = d.push_vertex(vec![Term::new(b, p(0)), Term::new(a, n(0))]).unwrap();
    let shallow = d.push_vertex(vec![Term::new(0, p(0)), Term::new(1, n(0))]).unwrap();
    d.push_vertex(vec![Term::new(c, p(0)), Term::new(shallow, p(0))]).unwrap();
    let mu = compute_depths(&d).depths;
    assert_eq!((mu[c], mu[shallow]), (3, 1));
    // x1 feeds depth 2 (1 latch), a feeds depth 3 (1), shallow feeds depth 4 (2)
    assert_eq!(count_additions(&d), 5);
    assert_eq!(count_delays(&d), 5 + 1 + 1 + 2);
}

#[test]
fn inverter_examples() {
    let mut d = ComputationDag::unit_codebook(2).unwrap();
    d.push_vertex(vec![Term::new(0, p(0)), Term::new(1, p(0))]).unwrap();
    assert_eq!(count_inverters(&d), 0);
    let mut d = ComputationDag::unit_codebook(2).unwrap();
    d.push_vertex(vec![Term::new(0, p(0)), Term::new(1, n(0))]).unwrap();
    assert_eq!(count_inverters(&d), 1);
    let mut d = ComputationDag::unit_codebook(2).unwrap();
    d.push_vertex(vec![Term::new(0, n(0)), Term::new(1, n(0))]).unwrap();
    assert_eq!(count_inverters(&d), 2);
}

#[test]
fn cost_model_arithmetic() {
    let m = CostModel::default();
    assert_eq!((m.c_add, m.c_delay, m.c_inv), (20.0, 20.0, 2.0));
    let empty = ComputationDag::unit_codebook(3).unwrap();
    assert_eq!(total_cost(&empty, &m).total, 0.0);
    let d = chain();
    assert_eq!(total_cost(&d, &CostModel::ADDERS_ONLY).total, 2.0);
    assert_eq!(total_cost(&d, &m).total, 20.0 * 2.0 + 20.0 * 3.0);
}

/// `y = (21/8) x2 - (5/4) x1`.
#[test]
fn pipelining_figure_value() {
    let mut d = ComputationDag::with_outputs(2, 1).unwrap();
    let a = d.push_vertex(vec![Term::new(1, p(1)), Term::new(1, p(-3))]).unwrap();
    let b = d.push_vertex(vec![Term::new(a, p(0)), Term::new(1, p(-1))]).unwrap();
    let c = d.push_vertex(vec![Term::new(b, p(0)), Term::new(0, n(0)), Term::new(0, n(-2))]).unwrap();
    d.set_output(0, OutputAssignment::Select(Term::new(c, p(0)))).unwrap();
    assert_eq!(evaluate_dag(&d, &[8.0, 8.0]).unwrap(), vec![11.0]);
}

#[test]
fn codebook_sqnr_examples() {
    let mut d = ComputationDag::unit_codebook(2).unwrap();
    let t = TargetMatrix::from_rows(&[vec![5.0, 0.0], vec![0.0, 3.0]]).unwrap();
    let db = sqnr_db(&t, &d).unwrap();
    assert!((db - 10.0 * 17f64.log10()).abs() < 1e-12);
    d.push_vertex(vec![Term::new(0, p(2)), Term::new(0, p(0))]).unwrap();
    d.push_vertex(vec![Term::new(1, p(1)), Term::new(1, p(0))]).unwrap();
    assert_eq!(sqnr_db(&t, &d).unwrap(), f64::INFINITY);
    assert_eq!(codebook_matrix(&d)[2], vec![5.0, 0.0]);
}

#[test]
fn unassigned_output_is_an_error() {
    let d = ComputationDag::with_outputs(2, 2).unwrap();
    assert!(matches!(evaluate_dag(&d, &[1.0, 2.0]), Err(LccError::IncompleteDag(0))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_dag_invariants(seed in any::<u64>()) {
        let mut d = Draw::new(seed);
        let shape = DagShape::random(&mut d);
        let dag = random_dag(&mut d, &shape);
        dag.validate().unwrap();
        for v in dag.num_inputs()..dag.len() {
            prop_assert!(dag.terms(v).iter().all(|t| t.src < v));
            prop_assert_eq!(dag.recompute_value(v).unwrap(), dag.value(v).to_vec());
        }
        prop_assert_eq!(compute_depths(&dag).depths, depths(&dag));
        let n_add = count_additions(&dag);
        prop_assert_eq!(n_add, additions(&dag));
        prop_assert!(count_delays(&dag) >= n_add);
        let aligned = count_delays_with(&dag, &compute_depths(&dag), DelayOptions { align_outputs: true });
        prop_assert!(aligned >= count_delays(&dag));
        prop_assert_eq!(total_cost(&dag, &CostModel::ADDERS_ONLY).total, n_add as f64);
    }

    #[test]
    fn evaluation_is_linear(seed in any::<u64>()) {
        let mut d = Draw::new(seed);
        let shape = DagShape::random(&mut d);
        let dag = random_dag(&mut d, &shape);
        let k = dag.num_inputs();
        let (x1, x2) = (d.vector(k), d.vector(k));
        let (alpha, beta) = (d.normal(), d.normal());
        let mix: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| alpha * a + beta * b).collect();
        let (y1, y2, y) = (
            evaluate_dag(&dag, &x1).unwrap(),
            evaluate_dag(&dag, &x2).unwrap(),
            evaluate_dag(&dag, &mix).unwrap(),
        );
        let rows = reference_rows(&dag);
        for i in 0..y.len() {
            let scale: f64 = rows[i].iter().zip(x1.iter().zip(&x2))
                .map(|(r, (a, b))| r.abs() * (alpha.abs() * a.abs() + beta.abs() * b.abs()))
                .sum();
            prop_assert!((y[i] - (alpha * y1[i] + beta * y2[i])).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn probing_recovers_the_effective_matrix(seed in any::<u64>()) {
        let mut d = Draw::new(seed);
        let shape = DagShape::random(&mut d);
        let dag = random_dag(&mut d, &shape);
        let probed = probe_matrix(&dag).unwrap();
        let eff = effective_matrix(&dag).unwrap();
        for (a, b) in probed.iter().zip(&eff) {
            for (x, y) in a.iter().zip(b) {
                prop_assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
            }
        }
    }
}
