#![allow(dead_code)]

use lcc::rng::GaussianSource;
use lcc::{ComputationDag, OutputAssignment, ShiftCoefficient, TargetMatrix, Term};

pub struct Draw(GaussianSource);

impl Draw {
    pub fn new(seed: u64) -> Self {
        Draw(GaussianSource::new(seed))
    }

    pub fn below(&mut self, n: usize) -> usize {
        ((self.0.uniform() * n as f64) as usize).min(n - 1)
    }

    pub fn between(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as usize) as i64
    }

    pub fn coin(&mut self, p: f64) -> bool {
        self.0.uniform() < p
    }

    pub fn normal(&mut self) -> f64 {
        self.0.standard_normal()
    }

    pub fn coeff(&mut self, emin: i32, emax: i32) -> ShiftCoefficient {
        let e = self.between(emin as i64, emax as i64) as i32;
        if self.coin(0.5) {
            ShiftCoefficient::negative(e)
        } else {
            ShiftCoefficient::positive(e)
        }
    }

    pub fn vector(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.normal()).collect()
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> TargetMatrix {
        TargetMatrix::new(rows, cols, self.vector(rows * cols)).unwrap()
    }
}

pub struct DagShape {
    pub inputs: usize,
    pub internal: usize,
    pub fan_in: usize,
    pub constant_fan_in: bool,
    pub outputs: usize,
}

impl DagShape {
    pub fn random(d: &mut Draw) -> Self {
        DagShape {
            inputs: 1 + d.below(4),
            internal: d.below(13),
            fan_in: 1 + d.below(4),
            constant_fan_in: d.coin(0.5),
            outputs: 1 + d.below(5),
        }
    }
}

/// Sources anywhere earlier in the graph, coefficients in `±2^[-3, 3]`.
pub fn random_dag(d: &mut Draw, shape: &DagShape) -> ComputationDag {
    let mut dag = ComputationDag::with_outputs(shape.inputs, shape.outputs).unwrap();
    for _ in 0..shape.internal {
        let f = if shape.constant_fan_in {
            shape.fan_in
        } else {
            1 + d.below(shape.fan_in)
        };
        let len = dag.len();
        let terms = (0..f).map(|_| Term::new(d.below(len), d.coeff(-3, 3))).collect();
        dag.push_vertex(terms).unwrap();
    }
    assign_random_outputs(d, &mut dag);
    dag
}

/// Every vertex draws all its sources from a single depth.
pub fn random_layered_dag(d: &mut Draw, shape: &DagShape) -> ComputationDag {
    let mut dag = ComputationDag::with_outputs(shape.inputs, shape.outputs).unwrap();
    let mut depth = vec![0usize; shape.inputs];
    for _ in 0..shape.internal {
        let level = depth[d.below(depth.len())];
        let pool: Vec<usize> = (0..depth.len()).filter(|&v| depth[v] == level).collect();
        let terms = (0..shape.fan_in)
            .map(|_| Term::new(pool[d.below(pool.len())], d.coeff(-3, 3)))
            .collect();
        dag.push_vertex(terms).unwrap();
        depth.push(level + 1);
    }
    assign_random_outputs(d, &mut dag);
    dag
}

fn assign_random_outputs(d: &mut Draw, dag: &mut ComputationDag) {
    for row in 0..dag.num_outputs() {
        let out = if d.coin(0.1) {
            OutputAssignment::Zero
        } else {
            OutputAssignment::Select(Term::new(d.below(dag.len()), d.coeff(-3, 3)))
        };
        dag.set_output(row, out).unwrap();
    }
}

/// Depth of every vertex, recomputed from the terms.
pub fn depths(dag: &ComputationDag) -> Vec<usize> {
    let mut out = vec![0usize; dag.len()];
    for v in dag.num_inputs()..dag.len() {
        out[v] = 1 + dag.terms(v).iter().map(|t| out[t.src]).max().unwrap();
    }
    out
}

/// `sum (indegree - 1)` over the internal vertices, read straight off the terms.
pub fn additions(dag: &ComputationDag) -> usize {
    (dag.num_inputs()..dag.len()).map(|v| dag.terms(v).len() - 1).sum()
}

/// What each output computes as a row over the inputs, rebuilt from the terms alone.
pub fn reference_rows(dag: &ComputationDag) -> Vec<Vec<f64>> {
    let k = dag.num_inputs();
    let mut rows: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for v in k..dag.len() {
        let mut acc = vec![0.0; k];
        for t in dag.terms(v) {
            for (a, b) in acc.iter_mut().zip(&rows[t.src]) {
                *a += t.coeff.value() * b;
            }
        }
        rows.push(acc);
    }
    dag.outputs()
        .iter()
        .map(|o| match o.unwrap() {
            OutputAssignment::Zero => vec![0.0; k],
            OutputAssignment::Select(t) => rows[t.src].iter().map(|x| t.coeff.value() * x).collect(),
        })
        .collect()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
