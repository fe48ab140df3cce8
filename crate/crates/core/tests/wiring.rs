mod common;

use common::Draw;
use lcc::wiring::{brute_force_wiring, dmp_wiring, optimal_shift, rs_wiring, Codebook, ShiftSearch};
use lcc::{ComputationDag, ExponentRange, ShiftCoefficient, Term};

fn p(e: i32) -> ShiftCoefficient {
    ShiftCoefficient::positive(e)
}

/// Unit codebook plus a few random combinations.
fn random_book(d: &mut Draw, k: usize, extra: usize) -> ComputationDag {
    let mut dag = ComputationDag::unit_codebook(k).unwrap();
    for _ in 0..extra {
        let len = dag.len();
        let terms = (0..2).map(|_| Term::new(d.below(len), d.coeff(-2, 2))).collect();
        dag.push_vertex(terms).unwrap();
    }
    dag
}

#[test]
fn dmp_builds_three_from_two_terms() {
    let dag = ComputationDag::unit_codebook(3).unwrap();
    let w = dmp_wiring(&[3.0, 0.0, 0.0], &Codebook::new(&dag), 2, ExponentRange::DEFAULT).unwrap();
    assert_eq!(w.terms, vec![Term::new(0, p(1)), Term::new(0, p(0))]);
    assert_eq!(w.error, 0.0);
}

#[test]
fn single_term_examples() {
    let dag = ComputationDag::unit_codebook(3).unwrap();
    let book = Codebook::new(&dag);
    let w = dmp_wiring(&[0.0, 0.125, 0.0], &book, 1, ExponentRange::DEFAULT).unwrap();
    assert_eq!((w.terms, w.error), (vec![Term::new(1, p(-3))], 0.0));

    let dag = ComputationDag::unit_codebook(2).unwrap();
    let book = Codebook::new(&dag);
    let w = dmp_wiring(&[0.625, 0.0], &book, 1, ExponentRange::DEFAULT).unwrap();
    assert_eq!((w.terms, w.error), (vec![Term::new(0, p(-1))], 1.0 / 64.0));

    let narrow = ExponentRange::new(-2, 2).unwrap();
    let w = brute_force_wiring(&[1.0, 1.0], &book, 1, narrow).unwrap();
    assert_eq!((w.terms, w.error), (vec![Term::new(0, p(0))], 1.0));
}

#[test]
fn optimal_shift_examples() {
    let r = ExponentRange::DEFAULT;
    let fit = optimal_shift(&[5.0, 0.0], &[1.0, 0.0], r).unwrap();
    assert_eq!((fit.coeff, fit.error), (Some(p(2)), 1.0));
    let fit = optimal_shift(&[3.0, 0.0], &[1.0, 0.0], r).unwrap();
    assert_eq!((fit.coeff, fit.error), (Some(p(1)), 1.0));
    assert!(optimal_shift(&[1.0, 0.0], &[0.0, 0.0], r).is_err());
}

#[test]
fn optimal_shift_matches_enumeration() {
    let range = ExponentRange::new(-10, 10).unwrap();
    let mut d = Draw::new(11);
    for _ in 0..10_000 {
        let r = d.vector(3);
        let c = d.vector(3);
        let fit = optimal_shift(&r, &c, range).unwrap();
        let zero: f64 = r.iter().map(|x| x * x).sum();
        let best = range
            .iter()
            .flat_map(|e| [p(e), ShiftCoefficient::negative(e)])
            .map(|a| r.iter().zip(&c).map(|(x, y)| (x - a.value() * y).powi(2)).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        assert!((fit.error - best).abs() <= 1e-12 * zero.max(1.0), "{} vs {best}", fit.error);
    }
}

#[test]
fn dominance_chain() {
    let range = ExponentRange::new(-4, 4).unwrap();
    let mut d = Draw::new(12);
    for _ in 0..200 {
        let k = 1 + d.below(3);
        let extra = d.below(4);
        let dag = random_book(&mut d, k, extra);
        let book = Codebook::new(&dag);
        let t = d.vector(k);
        let s = 1 + d.below(2);
        let brute = brute_force_wiring(&t, &book, s, range).unwrap().error;
        let dmp = dmp_wiring(&t, &book, s, range).unwrap().error;
        let rs1 = rs_wiring(&t, &book, s, 1, range, ShiftSearch::Nearest).unwrap().error;
        assert_eq!(rs1, dmp);
        for q in [2, 4, 16, 64] {
            for search in [ShiftSearch::Nearest, ShiftSearch::Window(1), ShiftSearch::Exhaustive] {
                let rs = rs_wiring(&t, &book, s, q, range, search).unwrap().error;
                assert!(brute <= rs && rs <= dmp, "brute {brute} rs {rs} dmp {dmp}");
            }
        }
    }
}

#[test]
fn dmp_is_shift_equivariant() {
    let mut d = Draw::new(13);
    for _ in 0..200 {
        let k = 2 + d.below(3);
        let dag = random_book(&mut d, k, 3);
        let book = Codebook::new(&dag);
        let t = d.vector(k);
        let m = d.between(-6, 6) as i32;
        let scaled: Vec<f64> = t.iter().map(|x| x * lcc::shift::pow2(m)).collect();
        let a = dmp_wiring(&t, &book, 3, ExponentRange::DEFAULT).unwrap();
        let b = dmp_wiring(&scaled, &book, 3, ExponentRange::DEFAULT).unwrap();
        let shifted: Vec<Term> = a.terms.iter().map(|t| Term::new(t.src, t.coeff.shifted(m))).collect();
        assert_eq!(b.terms, shifted);
        assert_eq!(b.error, a.error * lcc::shift::pow2(2 * m));
    }
}

#[test]
fn depth_span_restricts_every_solver() {
    let mut dag = ComputationDag::unit_codebook(2).unwrap();
    let v = dag.push_vertex(vec![Term::new(0, p(0)), Term::new(1, p(0))]).unwrap();
    let deep = dag.push_vertex(vec![Term::new(v, p(0)), Term::new(0, p(1))]).unwrap();
    let depths = [0, 0, 1, 2];
    let book = Codebook::new(&dag).with_depth_span(&depths, 0);
    let range = ExponentRange::new(-4, 4).unwrap();
    let t = [3.7, 1.2];
    for w in [
        dmp_wiring(&t, &book, 2, range).unwrap(),
        rs_wiring(&t, &book, 2, 8, range, ShiftSearch::Exhaustive).unwrap(),
        brute_force_wiring(&t, &book, 2, range).unwrap(),
    ] {
        let ds: Vec<usize> = w.terms.iter().map(|t| depths[t.src]).collect();
        assert!(ds.iter().all(|&x| x == ds[0]), "{:?} mixes depths {ds:?}", w.terms);
    }
    assert!(deep > v);
}
