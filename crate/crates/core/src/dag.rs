//! The computation graph: `K` input vertices (unit vectors) followed by
//! internal vertices, each a signed power-of-two combination of earlier
//! vertices, plus one output assignment per row of the target.

use std::collections::HashMap;

use crate::error::{LccError, Result};
use crate::numeric::norm_sq;
use crate::shift::ShiftCoefficient;

/// Zero-based vertex index. Ids `0..K` are the inputs.
pub type VertexId = usize;

/// One arc: `coeff * value(src)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub src: VertexId,
    pub coeff: ShiftCoefficient,
}

impl Term {
    pub fn new(src: VertexId, coeff: ShiftCoefficient) -> Self {
        Term { src, coeff }
    }
}

/// What an output row reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputAssignment {
    /// The row is the constant zero (an all-zero target row).
    Zero,
    /// A single shifted vertex; selection and bitshift only, no adder.
    Select(Term),
}

impl OutputAssignment {
    pub fn term(&self) -> Option<Term> {
        match self {
            OutputAssignment::Zero => None,
            OutputAssignment::Select(t) => Some(*t),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ComputationDag {
    k: usize,
    /// Terms of internal vertex `K + i` at index `i`.
    wirings: Vec<Vec<Term>>,
    /// Dense row values, `len() * k` entries.
    values: Vec<f64>,
    norms: Vec<f64>,
    outputs: Vec<Option<OutputAssignment>>,
    index: HashMap<Vec<u64>, VertexId>,
}

fn value_key(v: &[f64]) -> Vec<u64> {
    // +0.0 and -0.0 are the same vertex
    v.iter().map(|x| (x + 0.0).to_bits()).collect()
}

/// Evaluates `sum coeff * value(src)` in stored term order.
fn combine(k: usize, terms: &[Term], values: &[f64]) -> Vec<f64> {
    let mut acc = vec![0.0; k];
    for t in terms {
        let src = &values[t.src * k..(t.src + 1) * k];
        for (a, s) in acc.iter_mut().zip(src) {
            *a += t.coeff.apply(*s);
        }
    }
    acc
}

impl ComputationDag {
    /// `K` unit vectors, no internal vertices, no outputs.
    pub fn unit_codebook(k: usize) -> Result<Self> {
        Self::with_outputs(k, 0)
    }

    /// Unit codebook with `n` unassigned output rows.
    pub fn with_outputs(k: usize, n: usize) -> Result<Self> {
        if k == 0 {
            return Err(LccError::InvalidDimension("K must be at least 1".into()));
        }
        let mut values = vec![0.0; k * k];
        for i in 0..k {
            values[i * k + i] = 1.0;
        }
        let index = (0..k)
            .map(|i| (value_key(&values[i * k..(i + 1) * k]), i))
            .collect();
        Ok(ComputationDag {
            k,
            wirings: Vec::new(),
            values,
            norms: vec![1.0; k],
            outputs: vec![None; n],
            index,
        })
    }

    pub fn num_inputs(&self) -> usize {
        self.k
    }

    /// Total vertex count `|C|`.
    pub fn len(&self) -> usize {
        self.k + self.wirings.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn num_internal(&self) -> usize {
        self.wirings.len()
    }

    pub fn is_input(&self, id: VertexId) -> bool {
        id < self.k
    }

    pub fn contains(&self, id: VertexId) -> bool {
        id < self.len()
    }

    /// Terms of a vertex; empty for inputs.
    pub fn terms(&self, id: VertexId) -> &[Term] {
        if id < self.k {
            &[]
        } else {
            &self.wirings[id - self.k]
        }
    }

    pub fn indegree(&self, id: VertexId) -> usize {
        self.terms(id).len()
    }

    /// Cached dense value `c_id`. Panics on an unknown id; see [`Self::dense_value`].
    pub fn value(&self, id: VertexId) -> &[f64] {
        &self.values[id * self.k..(id + 1) * self.k]
    }

    pub fn dense_value(&self, id: VertexId) -> Result<&[f64]> {
        if !self.contains(id) {
            return Err(LccError::UnknownVertex(id));
        }
        Ok(self.value(id))
    }

    pub fn norm_sq(&self, id: VertexId) -> f64 {
        self.norms[id]
    }

    /// Re-evaluates a vertex from its terms, ignoring the cache.
    pub fn recompute_value(&self, id: VertexId) -> Result<Vec<f64>> {
        if !self.contains(id) {
            return Err(LccError::UnknownVertex(id));
        }
        if id < self.k {
            return Ok(self.value(id).to_vec());
        }
        Ok(combine(self.k, self.terms(id), &self.values))
    }

    /// Value the given terms would produce over the current vertices.
    pub fn evaluate_terms(&self, terms: &[Term]) -> Result<Vec<f64>> {
        if let Some(t) = terms.iter().find(|t| !self.contains(t.src)) {
            return Err(LccError::UnknownVertex(t.src));
        }
        Ok(combine(self.k, terms, &self.values))
    }

    /// Existing vertex with exactly this value.
    pub fn find_value(&self, value: &[f64]) -> Option<VertexId> {
        self.index.get(&value_key(value)).copied()
    }

    /// Appends a vertex unconditionally.
    pub fn push_vertex(&mut self, terms: Vec<Term>) -> Result<VertexId> {
        let id = self.len();
        if terms.is_empty() {
            return Err(LccError::EmptyWiring(id));
        }
        if let Some(t) = terms.iter().find(|t| t.src >= id) {
            return Err(LccError::NonTopological { vertex: id, src: t.src });
        }
        let value = combine(self.k, &terms, &self.values);
        self.norms.push(norm_sq(&value));
        self.index.entry(value_key(&value)).or_insert(id);
        self.values.extend_from_slice(&value);
        self.wirings.push(terms);
        Ok(id)
    }

    /// Appends a vertex unless one with the same value already exists.
    /// Returns the id and whether a new vertex was created.
    pub fn push_or_reuse(&mut self, terms: Vec<Term>) -> Result<(VertexId, bool)> {
        let value = self.evaluate_terms(&terms)?;
        if let Some(existing) = self.find_value(&value) {
            return Ok((existing, false));
        }
        self.push_vertex(terms).map(|id| (id, true))
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn outputs(&self) -> &[Option<OutputAssignment>] {
        &self.outputs
    }

    pub fn output(&self, row: usize) -> Option<OutputAssignment> {
        self.outputs.get(row).copied().flatten()
    }

    pub fn set_num_outputs(&mut self, n: usize) {
        self.outputs.resize(n, None);
    }

    pub fn set_output(&mut self, row: usize, assignment: OutputAssignment) -> Result<()> {
        if row >= self.outputs.len() {
            return Err(LccError::UnknownOutput {
                row,
                rows: self.outputs.len(),
            });
        }
        if let OutputAssignment::Select(t) = assignment {
            if !self.contains(t.src) {
                return Err(LccError::UnknownVertex(t.src));
            }
        }
        self.outputs[row] = Some(assignment);
        Ok(())
    }

    pub fn clear_outputs(&mut self) {
        self.outputs.iter_mut().for_each(|o| *o = None);
    }

    pub fn is_complete(&self) -> bool {
        self.outputs.iter().all(Option::is_some)
    }

    /// The first `len` vertices. Outputs pointing past the cut become unassigned.
    pub fn truncated(&self, len: usize) -> Self {
        let len = len.clamp(self.k, self.len());
        let mut out = ComputationDag {
            k: self.k,
            wirings: self.wirings[..len - self.k].to_vec(),
            values: self.values[..len * self.k].to_vec(),
            norms: self.norms[..len].to_vec(),
            outputs: self
                .outputs
                .iter()
                .map(|o| match o {
                    Some(OutputAssignment::Select(t)) if t.src >= len => None,
                    other => *other,
                })
                .collect(),
            index: HashMap::new(),
        };
        for id in (0..len).rev() {
            out.index.insert(value_key(out.value(id)), id);
        }
        out
    }

    /// All arcs between vertices, in vertex then term order.
    pub fn arcs(&self) -> impl Iterator<Item = (VertexId, Term)> + '_ {
        (self.k..self.len()).flat_map(move |id| self.terms(id).iter().map(move |t| (id, *t)))
    }

    /// Re-checks topological order, fan-in and cache coherence.
    pub fn validate(&self) -> Result<()> {
        for id in self.k..self.len() {
            let terms = self.terms(id);
            if terms.is_empty() {
                return Err(LccError::EmptyWiring(id));
            }
            if let Some(t) = terms.iter().find(|t| t.src >= id) {
                return Err(LccError::NonTopological { vertex: id, src: t.src });
            }
            let fresh = combine(self.k, terms, &self.values);
            if fresh.iter().zip(self.value(id)).any(|(a, b)| a.to_bits() != b.to_bits()) {
                return Err(LccError::StaleCache(id));
            }
        }
        for o in self.outputs.iter().flatten() {
            if let OutputAssignment::Select(t) = o {
                if !self.contains(t.src) {
                    return Err(LccError::UnknownVertex(t.src));
                }
            }
        }
        Ok(())
    }
}

/// Structural equality: same inputs, terms and outputs. Values follow from terms.
impl PartialEq for ComputationDag {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.wirings == other.wirings && self.outputs == other.outputs
    }
}
