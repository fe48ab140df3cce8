//! Sparse power-of-two approximation of a single target row by at most `S`
//! codebook vectors.
//!
//! Three solvers share one contract:
//!
//! * [`dmp_wiring`]: greedy matching pursuit, one term per iteration.
//! * [`rs_wiring`]: beam search keeping the `Q` best partial combinations,
//!   seeded with the greedy path so it never does worse than DMP.
//! * [`brute_force_wiring`]: exhaustive search, only for tiny instances.
//!
//! Reported errors are always computed from the dense coefficient vector
//! `omega` (terms merged per vertex, vertices in index order), so two
//! wirings with the same `omega` report bit-identical errors regardless of
//! term order.
//!
//! Ties are broken by smaller exponent, then smaller vertex id, then
//! positive sign.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::dag::{ComputationDag, OutputAssignment, Term, VertexId};
use crate::error::{LccError, Result};
use crate::numeric::{dot, norm_sq};
use crate::shift::{floor_log2, is_pow2, ExponentRange, ShiftCoefficient};

/// Combination-count guard for [`brute_force_wiring`].
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

pub const DEFAULT_BEAM_WIDTH: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Dmp,
    Rs { q: usize },
    Brute,
}

impl Solver {
    pub fn rs_default() -> Self {
        Solver::Rs {
            q: DEFAULT_BEAM_WIDTH,
        }
    }
}

/// Which shifts of a codeword the beam search may branch on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftSearch {
    /// Same sign as the continuous optimum, exponents within `w` of its
    /// floor/ceil neighbours. `Window(0)` branches on the two neighbours.
    Window(u32),
    /// Both signs and every exponent in range.
    Exhaustive,
    #[default]
    Nearest,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WiringConfig {
    pub s: usize,
    pub solver: Solver,
    #[serde(default)]
    pub exponents: ExponentRange,
    #[serde(default)]
    pub shift_search: ShiftSearch,
}

impl WiringConfig {
    pub fn new(s: usize, solver: Solver) -> Result<Self> {
        if s == 0 {
            return Err(LccError::Config("fan-in S must be at least 1".into()));
        }
        if let Solver::Rs { q: 0 } = solver {
            return Err(LccError::Config("beam width Q must be at least 1".into()));
        }
        Ok(WiringConfig {
            s,
            solver,
            exponents: ExponentRange::DEFAULT,
            shift_search: ShiftSearch::default(),
        })
    }

    pub fn with_exponents(mut self, exponents: ExponentRange) -> Self {
        self.exponents = exponents;
        self
    }

    pub fn with_shift_search(mut self, search: ShiftSearch) -> Self {
        self.shift_search = search;
        self
    }
}

/// The vertices a wiring may draw from, optionally with a cap on the depth
/// span of any combination.
#[derive(Clone, Copy)]
pub struct Codebook<'a> {
    dag: &'a ComputationDag,
    subset: Option<&'a [VertexId]>,
    span: Option<(&'a [usize], usize)>,
}

impl<'a> Codebook<'a> {
    pub fn new(dag: &'a ComputationDag) -> Self {
        Codebook {
            dag,
            subset: None,
            span: None,
        }
    }

    pub fn restricted_to(mut self, ids: &'a [VertexId]) -> Self {
        self.subset = Some(ids);
        self
    }

    /// Any combination must satisfy `max depth - min depth <= max_span`.
    pub fn with_depth_span(mut self, depths: &'a [usize], max_span: usize) -> Self {
        self.span = Some((depths, max_span));
        self
    }

    pub fn dag(&self) -> &'a ComputationDag {
        self.dag
    }

    fn ids(&self) -> Box<dyn Iterator<Item = VertexId> + 'a> {
        match self.subset {
            Some(ids) => Box::new(ids.iter().copied()),
            None => Box::new(0..self.dag.len()),
        }
    }

    fn size(&self) -> usize {
        self.subset.map_or(self.dag.len(), <[VertexId]>::len)
    }

    fn depth(&self, id: VertexId) -> usize {
        self.span.map_or(0, |(d, _)| d[id])
    }

    /// Whether adding `id` to a combination with depth bounds `bounds` keeps
    /// the span within the limit.
    fn admits(&self, bounds: Option<(usize, usize)>, id: VertexId) -> bool {
        match (self.span, bounds) {
            (Some((depths, max)), Some((lo, hi))) => {
                let d = depths[id];
                hi.max(d) - lo.min(d) <= max
            }
            _ => true,
        }
    }

    fn extend_bounds(&self, bounds: Option<(usize, usize)>, id: VertexId) -> Option<(usize, usize)> {
        self.span?;
        let d = self.depth(id);
        Some(match bounds {
            Some((lo, hi)) => (lo.min(d), hi.max(d)),
            None => (d, d),
        })
    }
}

/// A solved wiring: terms in selection order and the squared residual.
#[derive(Clone, Debug, PartialEq)]
pub struct Wiring {
    pub terms: Vec<Term>,
    pub error: f64,
}

impl Wiring {
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Dense coefficient vector: `(vertex, summed coefficient)` in vertex order, zeros dropped.
    pub fn omega(&self) -> Vec<(VertexId, f64)> {
        dense_omega(&self.terms)
    }
}

/// Result of fitting a single shifted codeword.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftFit {
    /// `None` when the continuous optimum is exactly zero.
    pub coeff: Option<ShiftCoefficient>,
    pub error: f64,
}

/// `sum_i (r_i - coeff * c_i)^2`
#[inline]
pub(crate) fn shifted_error(residual: &[f64], codeword: &[f64], coeff: ShiftCoefficient) -> f64 {
    residual
        .iter()
        .zip(codeword)
        .map(|(r, c)| {
            let d = r - coeff.apply(*c);
            d * d
        })
        .sum()
}

/// Best signed power of two `a` minimising `||residual - a * codeword||^2`.
pub fn optimal_shift(residual: &[f64], codeword: &[f64], range: ExponentRange) -> Result<ShiftFit> {
    if residual.len() != codeword.len() {
        return Err(LccError::LengthMismatch {
            expected: codeword.len(),
            got: residual.len(),
        });
    }
    let nn = norm_sq(codeword);
    if nn == 0.0 {
        return Err(LccError::DegenerateCodeword);
    }
    Ok(fit_shift(residual, codeword, nn, range))
}

/// Exponents bracketing `|a|`: floor and ceil of `log2 |a|`, clamped.
fn neighbour_exponents(a: f64, range: ExponentRange) -> (i32, i32) {
    let lo = floor_log2(a);
    let hi = if is_pow2(a) { lo } else { lo + 1 };
    (range.clamp(lo), range.clamp(hi))
}

fn continuous_optimum(residual: &[f64], codeword: &[f64], nn: f64) -> Option<f64> {
    let a = dot(residual, codeword) / nn;
    (a != 0.0 && a.is_finite()).then_some(a)
}

/// The error is a convex quadratic in `a`, so over same-signed powers of
/// two its minimum sits at one of the two powers bracketing `a*`.
pub(crate) fn fit_shift(residual: &[f64], codeword: &[f64], nn: f64, range: ExponentRange) -> ShiftFit {
    let Some(a) = continuous_optimum(residual, codeword, nn) else {
        return ShiftFit {
            coeff: None,
            error: norm_sq(residual),
        };
    };
    let negative = a < 0.0;
    let (lo, hi) = neighbour_exponents(a, range);
    let c_lo = ShiftCoefficient::new_in(negative, lo, range).expect("clamped");
    let e_lo = shifted_error(residual, codeword, c_lo);
    if hi == lo {
        return ShiftFit {
            coeff: Some(c_lo),
            error: e_lo,
        };
    }
    let c_hi = ShiftCoefficient::new_in(negative, hi, range).expect("clamped");
    let e_hi = shifted_error(residual, codeword, c_hi);
    if e_hi < e_lo {
        ShiftFit {
            coeff: Some(c_hi),
            error: e_hi,
        }
    } else {
        ShiftFit {
            coeff: Some(c_lo),
            error: e_lo,
        }
    }
}

/// A scored `(vertex, shift)` choice.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Candidate {
    pub error: f64,
    pub term: Term,
}

impl Candidate {
    /// Strict preference under the (error, exponent, vertex, sign) order.
    pub fn beats(&self, other: &Candidate) -> bool {
        match self.error.partial_cmp(&other.error) {
            Some(Ordering::Less) => true,
            Some(Ordering::Greater) | None => false,
            Some(Ordering::Equal) => {
                let (a, b) = (self.term, other.term);
                match a.coeff.exponent().cmp(&b.coeff.exponent()) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => match a.src.cmp(&b.src) {
                        Ordering::Less => true,
                        Ordering::Greater => false,
                        Ordering::Equal => !a.coeff.is_negative() && b.coeff.is_negative(),
                    },
                }
            }
        }
    }
}

/// Best single shifted vertex for a target, or [`OutputAssignment::Zero`] when
/// nothing beats the zero approximation. This is the `S = 1` selection behind
/// the SQNR figure and the output assignments.
pub fn select_one(t: &[f64], book: &Codebook) -> (OutputAssignment, f64) {
    select_one_in(t, book, ExponentRange::DEFAULT)
}

pub fn select_one_in(t: &[f64], book: &Codebook, range: ExponentRange) -> (OutputAssignment, f64) {
    let dag = book.dag;
    let mut best: Option<Candidate> = None;
    for id in book.ids() {
        if let Some(c) = fit_vertex(t, dag, id, range) {
            if best.is_none_or(|b| c.beats(&b)) {
                best = Some(c);
            }
        }
    }
    let zero = norm_sq(t);
    match best {
        Some(c) if c.error < zero => (OutputAssignment::Select(c.term), c.error),
        _ => (OutputAssignment::Zero, zero),
    }
}

/// Fit of one vertex against a target; `None` for zero codewords or a zero optimum.
pub(crate) fn fit_vertex(t: &[f64], dag: &ComputationDag, id: VertexId, range: ExponentRange) -> Option<Candidate> {
    let nn = dag.norm_sq(id);
    if nn == 0.0 {
        return None;
    }
    let fit = fit_shift(t, dag.value(id), nn, range);
    fit.coeff.map(|coeff| Candidate {
        error: fit.error,
        term: Term::new(id, coeff),
    })
}

pub(crate) fn dense_omega(terms: &[Term]) -> Vec<(VertexId, f64)> {
    let mut sorted: Vec<&Term> = terms.iter().collect();
    sorted.sort_by_key(|t| t.src);
    let mut out: Vec<(VertexId, f64)> = Vec::with_capacity(terms.len());
    for t in sorted {
        match out.last_mut() {
            Some((v, w)) if *v == t.src => *w += t.coeff.value(),
            _ => out.push((t.src, t.coeff.value())),
        }
    }
    out.retain(|(_, w)| *w != 0.0);
    out
}

fn omega_residual(t: &[f64], dag: &ComputationDag, omega: &[(VertexId, f64)]) -> Vec<f64> {
    let mut r = t.to_vec();
    for &(v, w) in omega {
        for (ri, c) in r.iter_mut().zip(dag.value(v)) {
            *ri -= w * c;
        }
    }
    r
}

/// Canonical squared error of a term list.
pub fn wiring_error(t: &[f64], dag: &ComputationDag, terms: &[Term]) -> f64 {
    norm_sq(&omega_residual(t, dag, &dense_omega(terms)))
}

fn check_codebook(book: &Codebook) -> Result<()> {
    let mut any = false;
    for id in book.ids() {
        if !book.dag.contains(id) {
            return Err(LccError::UnknownVertex(id));
        }
        any |= book.dag.norm_sq(id) > 0.0;
        if any {
            break;
        }
    }
    if !any && book.size() > 0 {
        return Err(LccError::DegenerateCodeword);
    }
    Ok(())
}

fn check_target(t: &[f64], book: &Codebook) -> Result<()> {
    if t.len() != book.dag.num_inputs() {
        return Err(LccError::LengthMismatch {
            expected: book.dag.num_inputs(),
            got: t.len(),
        });
    }
    Ok(())
}

/// Greedy term sequence; stops early when no term strictly lowers the error.
fn greedy_path(t: &[f64], book: &Codebook, s: usize, range: ExponentRange) -> Vec<Term> {
    let dag = book.dag;
    let mut residual = t.to_vec();
    let mut err = norm_sq(&residual);
    let mut terms = Vec::with_capacity(s);
    let mut bounds = None;
    for _ in 0..s {
        let mut best: Option<Candidate> = None;
        for id in book.ids() {
            if !book.admits(bounds, id) {
                continue;
            }
            let nn = dag.norm_sq(id);
            if nn == 0.0 {
                continue;
            }
            let fit = fit_shift(&residual, dag.value(id), nn, range);
            if let Some(coeff) = fit.coeff {
                let c = Candidate {
                    error: fit.error,
                    term: Term::new(id, coeff),
                };
                if best.is_none_or(|b| c.beats(&b)) {
                    best = Some(c);
                }
            }
        }
        match best {
            Some(c) if c.error < err => {
                for (r, v) in residual.iter_mut().zip(dag.value(c.term.src)) {
                    *r -= c.term.coeff.apply(*v);
                }
                err = norm_sq(&residual);
                bounds = book.extend_bounds(bounds, c.term.src);
                terms.push(c.term);
            }
            _ => break,
        }
    }
    terms
}

/// Discrete matching pursuit.
pub fn dmp_wiring(t: &[f64], book: &Codebook, s: usize, range: ExponentRange) -> Result<Wiring> {
    check_target(t, book)?;
    check_codebook(book)?;
    let terms = greedy_path(t, book, s, range);
    let error = wiring_error(t, book.dag, &terms);
    Ok(Wiring { terms, error })
}

struct Partial {
    terms: Vec<Term>,
    omega: Vec<(VertexId, f64)>,
    residual: Vec<f64>,
    error: f64,
    bounds: Option<(usize, usize)>,
}

impl Partial {
    fn root(t: &[f64]) -> Self {
        Partial {
            terms: Vec::new(),
            omega: Vec::new(),
            residual: t.to_vec(),
            error: norm_sq(t),
            bounds: None,
        }
    }

    fn from_terms(t: &[f64], book: &Codebook, terms: Vec<Term>) -> Self {
        let omega = dense_omega(&terms);
        let residual = omega_residual(t, book.dag, &omega);
        let bounds = terms.iter().fold(None, |b, term| book.extend_bounds(b, term.src));
        Partial {
            error: norm_sq(&residual),
            terms,
            omega,
            residual,
            bounds,
        }
    }

    fn omega_key(&self) -> Vec<(VertexId, u64)> {
        self.omega.iter().map(|(v, w)| (*v, w.to_bits())).collect()
    }
}

fn shift_candidates(
    residual: &[f64],
    codeword: &[f64],
    nn: f64,
    range: ExponentRange,
    search: ShiftSearch,
) -> Vec<ShiftCoefficient> {
    match search {
        ShiftSearch::Exhaustive => range
            .iter()
            .flat_map(|e| [ShiftCoefficient::positive(e), ShiftCoefficient::negative(e)])
            .collect(),
        ShiftSearch::Nearest | ShiftSearch::Window(_) => {
            let w = match search {
                ShiftSearch::Window(w) => w as i32,
                _ => 0,
            };
            let Some(a) = continuous_optimum(residual, codeword, nn) else {
                return Vec::new();
            };
            let (lo, hi) = neighbour_exponents(a, range);
            let (lo, hi) = (range.clamp(lo - w), range.clamp(hi + w));
            (lo..=hi)
                .map(|e| {
                    if a < 0.0 {
                        ShiftCoefficient::negative(e)
                    } else {
                        ShiftCoefficient::positive(e)
                    }
                })
                .collect()
        }
    }
}

/// Reduced-state (beam) search over `(vertex, shift)` extensions.
pub fn rs_wiring(
    t: &[f64],
    book: &Codebook,
    s: usize,
    q: usize,
    range: ExponentRange,
    search: ShiftSearch,
) -> Result<Wiring> {
    if q == 0 {
        return Err(LccError::Config("beam width Q must be at least 1".into()));
    }
    check_target(t, book)?;
    check_codebook(book)?;
    let dag = book.dag;
    let greedy = greedy_path(t, book, s, range);

    let mut beam = vec![Partial::root(t)];
    let mut best_terms: Vec<Term> = Vec::new();
    let mut best_err = norm_sq(t);

    for level in 1..=s {
        // cheap scoring first, materialise only the survivors
        let mut scored: Vec<(f64, usize, Term)> = Vec::new();
        for (pi, p) in beam.iter().enumerate() {
            for id in book.ids() {
                if !book.admits(p.bounds, id) {
                    continue;
                }
                let nn = dag.norm_sq(id);
                if nn == 0.0 {
                    continue;
                }
                let c = dag.value(id);
                for coeff in shift_candidates(&p.residual, c, nn, range, search) {
                    let e = shifted_error(&p.residual, c, coeff);
                    scored.push((e, pi, Term::new(id, coeff)));
                }
            }
        }
        scored.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then(a.1.cmp(&b.1))
                .then(a.2.src.cmp(&b.2.src))
                .then(a.2.coeff.tie_order(&b.2.coeff))
        });

        let mut next: Vec<Partial> = Vec::with_capacity(q);
        let mut seen: HashSet<Vec<(VertexId, u64)>> = HashSet::new();
        if greedy.len() >= level {
            let g = Partial::from_terms(t, book, greedy[..level].to_vec());
            seen.insert(g.omega_key());
            next.push(g);
        }
        for (_, pi, term) in scored {
            if next.len() >= q {
                break;
            }
            let mut terms = beam[pi].terms.clone();
            terms.push(term);
            let cand = Partial::from_terms(t, book, terms);
            if cand.omega.is_empty() || !seen.insert(cand.omega_key()) {
                continue;
            }
            next.push(cand);
        }
        for p in &next {
            if p.error < best_err {
                best_err = p.error;
                best_terms = p.terms.clone();
            }
        }
        if next.is_empty() {
            break;
        }
        beam = next;
    }
    Ok(Wiring {
        terms: best_terms,
        error: best_err,
    })
}

/// Number of multisets of at most `s` items drawn from `m` kinds.
fn multiset_count(m: u128, s: usize) -> u128 {
    let mut total: u128 = 0;
    let mut c: u128 = 1; // C(m + j - 1, j) for j = 0
    for j in 0..=s as u128 {
        if j > 0 {
            if m == 0 {
                break;
            }
            c = c.saturating_mul(m + j - 1) / j;
        }
        total = total.saturating_add(c);
    }
    total
}

/// Lexicographic tie-break key: (term count, vertex ids, exponents, signs).
fn brute_key(terms: &[Term]) -> (usize, Vec<VertexId>, Vec<i32>, Vec<bool>) {
    (
        terms.len(),
        terms.iter().map(|t| t.src).collect(),
        terms.iter().map(|t| t.coeff.exponent()).collect(),
        terms.iter().map(|t| t.coeff.is_negative()).collect(),
    )
}

/// Exhaustive minimiser over all multisets of at most `s` shifted vertices.
pub fn brute_force_wiring(t: &[f64], book: &Codebook, s: usize, range: ExponentRange) -> Result<Wiring> {
    check_target(t, book)?;
    check_codebook(book)?;
    let dag = book.dag;
    let mut elements: Vec<Term> = Vec::new();
    for id in book.ids() {
        if dag.norm_sq(id) == 0.0 {
            continue;
        }
        for e in range.iter() {
            elements.push(Term::new(id, ShiftCoefficient::positive(e)));
            elements.push(Term::new(id, ShiftCoefficient::negative(e)));
        }
    }
    let combinations = multiset_count(elements.len() as u128, s);
    if combinations > BRUTE_FORCE_LIMIT {
        return Err(LccError::SearchSpaceTooLarge {
            combinations,
            limit: BRUTE_FORCE_LIMIT,
        });
    }

    let mut best_terms: Vec<Term> = Vec::new();
    let mut best_err = norm_sq(t);
    let m = elements.len();
    let mut idx: Vec<usize> = Vec::with_capacity(s);
    for size in 1..=s {
        if m == 0 {
            break;
        }
        idx.clear();
        idx.resize(size, 0);
        loop {
            let terms: Vec<Term> = idx.iter().map(|&i| elements[i]).collect();
            let feasible = {
                let mut b = None;
                terms.iter().all(|term| {
                    let ok = book.admits(b, term.src);
                    b = book.extend_bounds(b, term.src);
                    ok
                })
            };
            if feasible {
                let err = wiring_error(t, dag, &terms);
                let better = err < best_err
                    || (err == best_err && brute_key(&terms) < brute_key(&best_terms));
                if better {
                    best_err = err;
                    best_terms = terms;
                }
            }
            // next nondecreasing index tuple
            let mut pos = size;
            while pos > 0 && idx[pos - 1] == m - 1 {
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
            idx[pos - 1] += 1;
            let v = idx[pos - 1];
            for slot in idx.iter_mut().skip(pos) {
                *slot = v;
            }
        }
    }
    Ok(Wiring {
        terms: best_terms,
        error: best_err,
    })
}

/// Solves with whichever solver the config names.
pub fn wire(t: &[f64], book: &Codebook, cfg: &WiringConfig) -> Result<Wiring> {
    match cfg.solver {
        Solver::Dmp => dmp_wiring(t, book, cfg.s, cfg.exponents),
        Solver::Rs { q } => rs_wiring(t, book, cfg.s, q, cfg.exponents, cfg.shift_search),
        Solver::Brute => brute_force_wiring(t, book, cfg.s, cfg.exponents),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(e: i32) -> ShiftCoefficient {
        ShiftCoefficient::positive(e)
    }

    fn r(min: i32, max: i32) -> ExponentRange {
        ExponentRange::new(min, max).unwrap()
    }

    /// Exhaustive single-term oracle, independent of the bracketing shortcut.
    fn exhaustive_shift(res: &[f64], cw: &[f64], range: ExponentRange) -> (ShiftCoefficient, f64) {
        let mut best = (p(range.min()), f64::INFINITY);
        for e in range.iter() {
            for c in [ShiftCoefficient::positive(e), ShiftCoefficient::negative(e)] {
                let err: f64 = res.iter().zip(cw).map(|(a, b)| (a - c.value() * b).powi(2)).sum();
                if err < best.1 {
                    best = (c, err);
                }
            }
        }
        best
    }

    #[test]
    fn optimal_shift_examples() {
        let wide = r(-10, 10);
        let f = optimal_shift(&[2.0, 0.0], &[1.0, 0.0], wide).unwrap();
        assert_eq!((f.coeff, f.error), (Some(p(1)), 0.0));

        let f = optimal_shift(&[5.0, 0.0], &[1.0, 0.0], wide).unwrap();
        assert_eq!((f.coeff, f.error), (Some(p(2)), 1.0));
        assert_eq!(exhaustive_shift(&[5.0, 0.0], &[1.0, 0.0], wide).1, 1.0);

        // 2 and 4 both leave error 1; the smaller exponent wins
        let f = optimal_shift(&[3.0, 0.0], &[1.0, 0.0], wide).unwrap();
        assert_eq!((f.coeff, f.error), (Some(p(1)), 1.0));
        assert_eq!(shifted_error(&[3.0, 0.0], &[1.0, 0.0], p(2)), 1.0);
    }

    #[test]
    fn optimal_shift_edge_cases() {
        assert_eq!(
            optimal_shift(&[1.0], &[0.0], ExponentRange::DEFAULT),
            Err(LccError::DegenerateCodeword)
        );
        let f = optimal_shift(&[0.0, 1.0], &[1.0, 0.0], ExponentRange::DEFAULT).unwrap();
        assert_eq!((f.coeff, f.error), (None, 1.0));
        // clamped to the top of the range
        let f = optimal_shift(&[1000.0], &[1.0], r(-2, 2)).unwrap();
        assert_eq!(f.coeff, Some(p(2)));
        let f = optimal_shift(&[-0.3], &[1.0], r(-4, 4)).unwrap();
        assert_eq!(f.coeff, Some(ShiftCoefficient::negative(-2)));
    }

    #[test]
    fn optimal_shift_matches_exhaustive_on_random_pairs() {
        use rand_chacha::rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut u = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
        let range = r(-12, 12);
        for _ in 0..10_000 {
            let res: Vec<f64> = (0..3).map(|_| u() * 8.0).collect();
            let cw: Vec<f64> = (0..3).map(|_| u()).collect();
            let got = optimal_shift(&res, &cw, range).unwrap();
            let (_, want) = exhaustive_shift(&res, &cw, range);
            let got_err = got.error;
            assert!(
                (got_err - want).abs() <= 1e-12 * want.max(1.0),
                "{res:?} {cw:?}: {got_err} vs {want}"
            );
        }
    }

    #[test]
    fn dmp_examples() {
        let dag = ComputationDag::unit_codebook(3).unwrap();
        let book = Codebook::new(&dag);
        let w = dmp_wiring(&[3.0, 0.0, 0.0], &book, 2, ExponentRange::DEFAULT).unwrap();
        assert_eq!(w.terms, vec![Term::new(0, p(1)), Term::new(0, p(0))]);
        assert_eq!(w.error, 0.0);

        let w = dmp_wiring(&[0.0, 0.125, 0.0], &book, 1, ExponentRange::DEFAULT).unwrap();
        assert_eq!(w.terms, vec![Term::new(1, p(-3))]);
        assert_eq!(w.error, 0.0);

        let dag2 = ComputationDag::unit_codebook(2).unwrap();
        let w = dmp_wiring(&[0.625, 0.0], &Codebook::new(&dag2), 1, ExponentRange::DEFAULT).unwrap();
        assert_eq!(w.terms, vec![Term::new(0, p(-1))]);
        assert_eq!(w.error, 1.0 / 64.0);
    }

    #[test]
    fn dmp_stops_when_nothing_helps() {
        let dag = ComputationDag::unit_codebook(2).unwrap();
        let w = dmp_wiring(&[1.0, 0.0], &Codebook::new(&dag), 3, ExponentRange::DEFAULT).unwrap();
        assert_eq!(w.terms.len(), 1);
        let w = dmp_wiring(&[0.0, 0.0], &Codebook::new(&dag), 3, ExponentRange::DEFAULT).unwrap();
        assert!(w.is_empty());
    }

    #[test]
    fn rs_reduces_to_dmp() {
        let dag = ComputationDag::unit_codebook(3).unwrap();
        let book = Codebook::new(&dag);
        let t = [3.0, 0.0, 0.0];
        let g = dmp_wiring(&t, &book, 2, ExponentRange::DEFAULT).unwrap();
        let b = rs_wiring(&t, &book, 2, 1, ExponentRange::DEFAULT, ShiftSearch::Nearest).unwrap();
        assert_eq!(b.error, g.error);
        assert_eq!(b.error, 0.0);

        let t = [0.3, -1.7, 2.2];
        let g = dmp_wiring(&t, &book, 1, ExponentRange::DEFAULT).unwrap();
        for q in [1, 4, 32] {
            let b = rs_wiring(&t, &book, 1, q, ExponentRange::DEFAULT, ShiftSearch::Nearest).unwrap();
            assert_eq!(b, g);
        }
    }

    #[test]
    fn brute_force_examples() {
        let mut dag = ComputationDag::unit_codebook(3).unwrap();
        let v = dag.push_vertex(vec![Term::new(0, p(0)), Term::new(1, p(1))]).unwrap();
        let book = Codebook::new(&dag);
        let range = r(-4, 4);
        let w = brute_force_wiring(dag.value(v), &book, 2, range).unwrap();
        assert_eq!(w.terms, vec![Term::new(v, p(0))]);
        assert_eq!(w.error, 0.0);

        let w = brute_force_wiring(&[3.0, 0.0, 0.0], &book, 2, range).unwrap();
        assert_eq!(w.error, 0.0);
        assert_eq!(w.terms.len(), 2);

        let dag2 = ComputationDag::unit_codebook(2).unwrap();
        let w = brute_force_wiring(&[1.0, 1.0], &Codebook::new(&dag2), 1, r(-2, 2)).unwrap();
        assert_eq!(w.terms, vec![Term::new(0, p(0))]);
        assert_eq!(w.error, 1.0);
    }

    #[test]
    fn brute_force_guard() {
        let dag = ComputationDag::unit_codebook(4).unwrap();
        let err = brute_force_wiring(&[1.0; 4], &Codebook::new(&dag), 3, ExponentRange::DEFAULT).unwrap_err();
        assert!(matches!(err, LccError::SearchSpaceTooLarge { .. }));
    }

    #[test]
    fn multiset_counts() {
        assert_eq!(multiset_count(3, 0), 1);
        assert_eq!(multiset_count(3, 1), 4);
        assert_eq!(multiset_count(3, 2), 10);
        assert_eq!(multiset_count(0, 2), 1);
    }

    #[test]
    fn depth_span_filter() {
        let mut dag = ComputationDag::unit_codebook(2).unwrap();
        let v = dag.push_vertex(vec![Term::new(0, p(0)), Term::new(1, p(0))]).unwrap();
        let depths = vec![0, 0, 1];
        let book = Codebook::new(&dag).with_depth_span(&depths, 0);
        // (2,1) = v + e1 needs depths 0 and 1; forbidden with span 0
        let t = [2.0, 1.0];
        let w = dmp_wiring(&t, &book, 2, ExponentRange::DEFAULT).unwrap();
        let ds: Vec<usize> = w.terms.iter().map(|t| depths[t.src]).collect();
        assert!(ds.iter().all(|&d| d == ds[0]));
        let free = dmp_wiring(&t, &Codebook::new(&dag), 2, ExponentRange::DEFAULT).unwrap();
        assert_eq!(free.error, 0.0);
        // v then v/2, both at depth 1
        assert_eq!(w.terms, vec![Term::new(v, p(0)), Term::new(v, p(-1))]);
        assert_eq!(w.error, 0.5);
    }

    #[test]
    fn select_one_prefers_zero_for_zero_target() {
        let dag = ComputationDag::unit_codebook(2).unwrap();
        let (a, e) = select_one(&[0.0, 0.0], &Codebook::new(&dag));
        assert_eq!((a, e), (OutputAssignment::Zero, 0.0));
        let (a, e) = select_one(&[0.0, -4.0], &Codebook::new(&dag));
        assert_eq!(a, OutputAssignment::Select(Term::new(1, ShiftCoefficient::negative(2))));
        assert_eq!(e, 0.0);
    }
}
