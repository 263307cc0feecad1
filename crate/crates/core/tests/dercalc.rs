use std::time::Instant;

use vertexlab::algebra::VertexAlgebra;
use vertexlab::autgroup::AutContext;
use vertexlab::dercalc::*;
use vertexlab::exactlin::DenseMatrix;
use vertexlab::fockspace::{Lattice, LatticeVoa};
use vertexlab::{GradedVector, Rational};

fn voa(gram: Vec<Vec<i64>>, n: u32) -> LatticeVoa {
    LatticeVoa::build(Lattice::new(gram).unwrap(), n).unwrap()
}

fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

#[test]
fn o_of_vacuum_conformal_and_heisenberg() {
    let v = voa(vec![vec![2]], 5);
    assert_eq!(o_operator(&v, &v.vacuum()).unwrap(), WeightPreservingOperator::identity(&v));
    assert_eq!(o_operator(&v, v.conformal()).unwrap(), WeightPreservingOperator::grading_operator(&v));
    let oa = o_operator(&v, &v.heisenberg_vector(0)).unwrap();
    let spec = rational_spectrum(oa.block(1)).unwrap();
    let eig: Vec<Rational> = spec.iter().map(|x| x.0.clone()).collect();
    assert_eq!(eig, vec![q(-2), q(0), q(2)]);
    let mixed = v.vacuum().add(&v.heisenberg_vector(0));
    assert!(o_operator(&v, &mixed).is_err());
}

#[test]
fn derivations_of_a1() {
    let v = voa(vec![vec![2]], 8);
    let t = Instant::now();
    let der = solve_derivations(&v, 1).unwrap();
    eprintln!("a1 N=8 derivations: {:?}", t.elapsed());
    assert_eq!(der.unknowns, 9);
    assert_eq!(der.dim(), 3);
    assert_eq!(der.dims_by_cutoff, vec![(7, 3), (8, 3)]);
    assert!(der.stable());
    assert!(der.cross_checks > 0);
    assert!(der.cross_check_failure.is_none());
    assert!(der.contains_inner(&v).unwrap());
    assert!(der.closed_under_commutator().unwrap());
    for d in &der.basis {
        assert!(d.block(0).is_zero());
        assert!(d.apply(&v, v.conformal()).is_zero());
    }
}

#[test]
fn derivations_of_rank_two() {
    let v = voa(vec![vec![2, 0], vec![0, 4]], 6);
    // e^{±β} sit in weight 2, so U must reach weight 2
    assert!(solve_derivations(&v, 1).is_err());
    let t = Instant::now();
    let der = solve_derivations(&v, 2).unwrap();
    eprintln!("diag(2,4) N=6 derivations: {:?}", t.elapsed());
    assert_eq!(der.dim(), 4);
    assert!(der.stable());
    assert!(der.contains_inner(&v).unwrap());
    assert!(der.cross_check_failure.is_none());
}

#[test]
fn inner_derivations_and_quasi_primary_obstruction() {
    let v = voa(vec![vec![2]], 6);
    let rep = inner_test(&v, 1, 4).unwrap();
    assert!(rep.inner_failure.is_none());
    assert!(rep.inner_checks > 100);
    assert!(!rep.quasi_primary.is_empty());
    assert!(rep.quasi_primary.iter().all(|x| x.violation.is_some()));
    assert!(rep.passed());

    let e = v.exponential(&[1]).unwrap();
    let f = v.exponential(&[-1]).unwrap();
    let a = v.heisenberg_vector(0);
    let omega = v.conformal().clone();
    let (lhs, rhs) = leibniz_sides(&v, |x| o_apply(&v, &omega, x), &e, 0, &f);
    assert_eq!(lhs, a);
    assert_eq!(rhs, a.scale(&q(2)));

    // the sl2 bracket: a_0(e_0 f) = 0 = (a_0 e)_0 f + e_0(a_0 f)
    let (lhs, rhs) = leibniz_sides(&v, |x| o_apply(&v, &a, x), &e, 0, &f);
    assert!(lhs.is_zero() && rhs.is_zero());

    let zero = GradedVector::zero();
    let us = vec![e.clone(), f.clone(), a.clone()];
    assert!(check_leibniz(&v, |x| o_apply(&v, &zero, x), &us, true).1.is_none());
    assert_eq!(quasi_primaries(&v, 2).unwrap().len(), v.dim(2) - v.dim(1));
}

#[test]
fn radical_inclusion_and_dimensions() {
    let v = voa(vec![vec![2]], 8);
    let t = Instant::now();
    let rep = radical_check(&v, 5).unwrap();
    eprintln!("radical n'=5: {:?} {:?}", t.elapsed(), (rep.kernel_dim, rep.image_dim));
    assert!(rep.inclusion_holds);
    assert!(rep.coefficient_offsets.iter().all(|c| c.is_zero()));
    assert!(!rep.coefficient_offsets.is_empty());
    // (L(-1)+L(0)) kills only the vacuum on ⊕_{m≤4} V_m
    assert_eq!(rep.image_dim, 1 + 3 + 4 + 7 + 13 - 1);
    assert!(rep.dims_match);
    assert!(rep.passed());

    let e = v.exponential(&[1]).unwrap();
    let eprime = vertexlab::algebra::virasoro(&v, -1, &e).add(&e);
    for i in 0..v.grading().offset(4) {
        let x = GradedVector::basis(i);
        assert!(o_apply(&v, &eprime, &x).is_zero());
    }
    assert!(radical_check(&v, 8).is_err());
}

#[test]
fn trace_forms_and_witnesses() {
    let v = voa(vec![vec![2]], 6);
    // basis order f, a, e
    let f1 = trace_form(&v, 1).unwrap();
    assert_eq!(f1.gram, DenseMatrix::from_ints(&[&[0, 0, 4], &[0, 8, 0], &[4, 0, 0]]));
    assert!(trace_form(&v, 0).unwrap().gram.is_zero());
    let w = nondegeneracy_witness(&v).unwrap();
    assert_eq!(w.n, Some(1));
    assert_eq!(w.determinant, Some(q(-128)));
    for n in 0..=6 {
        assert!(trace_form_invariant(&v, &trace_form(&v, n).unwrap()).unwrap());
    }

    let v = voa(vec![vec![2, 0], vec![0, 4]], 6);
    // basis order e^{-α}, a, b, e^{α}
    let f1 = trace_form(&v, 1).unwrap();
    assert!(f1.gram.row(2).iter().all(|x| x.is_zero()));
    let f2 = trace_form(&v, 2).unwrap();
    assert_eq!(f2.gram.get(2, 2), &q(32));
    let w = nondegeneracy_witness(&v).unwrap();
    assert_eq!(w.n, Some(2));
    assert!(w.determinants[1].1.is_zero());
    let split = reductive_split(&v).unwrap();
    assert!(split.holds());
    assert_eq!(split.semisimple.len(), 3);
    assert_eq!(split.toral, vec![vec![q(0), q(0), q(1), q(0)]]);
    for n in 0..=6 {
        let o = orthogonality_check(&v, &split, n).unwrap();
        assert!(o.semisimple_toral_zero, "n = {n}");
        assert!(trace_form_invariant(&v, &trace_form(&v, n).unwrap()).unwrap());
    }
}

#[test]
fn reductive_structure() {
    let v = voa(vec![vec![2]], 3);
    let s = reductive_split(&v).unwrap();
    assert!(s.holds());
    assert!(s.toral.is_empty());
    assert_eq!(s.simple_ideals.len(), 1);
    // indices: 0 = f, 1 = a, 2 = e
    let c = |i: usize, j: usize| s.structure[i][j].clone();
    assert_eq!(c(1, 2), vec![q(0), q(0), q(2)]);
    assert_eq!(c(1, 0), vec![q(-2), q(0), q(0)]);
    assert_eq!(c(2, 0), vec![q(0), q(1), q(0)]);

    let v = voa(vec![vec![2, 0], vec![0, 2]], 3);
    let s = reductive_split(&v).unwrap();
    assert!(s.holds());
    assert_eq!(s.simple_ideals.len(), 2);
    assert!(s.simple_ideals.iter().all(|i| i.len() == 3));
    let o = orthogonality_check(&v, &s, 1).unwrap();
    assert!(o.distinct_ideals_zero);

    // Heisenberg-only weight one space: abelian, all toral
    let v = voa(vec![vec![4]], 3);
    let s = reductive_split(&v).unwrap();
    assert!(s.semisimple.is_empty());
    assert_eq!(s.toral.len(), 1);
}

#[test]
fn der_splitting_and_negative_control() {
    let v = voa(vec![vec![2]], 7);
    let der = solve_derivations(&v, 1).unwrap();
    let w = nondegeneracy_witness(&v).unwrap().n.unwrap();
    let split = der_decomposition(&v, &der.basis, w).unwrap();
    assert!(split.holds());
    assert_eq!((split.inner_dim, split.perp_dim), (3, 0));

    let mut extended = der.basis.clone();
    extended.push(WeightPreservingOperator::grading_operator(&v));
    let bad = der_decomposition(&v, &extended, w).unwrap();
    assert_eq!(bad.perp_dim, 1);
    assert!(!bad.ideal_property);
    assert!(!bad.holds());

    let v = voa(vec![vec![2, 0], vec![0, 4]], 6);
    let der = solve_derivations(&v, 2).unwrap();
    let split = der_decomposition(&v, &der.basis, 2).unwrap();
    assert!(split.holds());
    assert_eq!((split.inner_dim, split.perp_dim), (4, 0));
    let degenerate = der_decomposition(&v, &der.basis, 1).unwrap();
    assert!(degenerate.degenerate);
}

#[test]
fn derivations_exponentiate_to_automorphisms() {
    let v = voa(vec![vec![2]], 6);
    let ctx = AutContext::new(&v, 1).unwrap();
    let der = solve_with_context(&ctx).unwrap();
    let t = Instant::now();
    let checks = exponentiate_derivations(&ctx, &der).unwrap();
    eprintln!("{} exponentials checked in {:?}", checks.len(), t.elapsed());
    assert!(checks.len() >= 3);
    for c in &checks {
        assert!(c.verdict.accepted, "{} {} {}", c.derivation, c.kind, c.parameter);
    }
}

#[test]
fn jordan_decomposition_of_small_blocks() {
    let m = DenseMatrix::from_ints(&[&[2, 1], &[0, 2]]);
    let (s, n, eig) = jordan_chevalley(&m).unwrap();
    assert_eq!(s, DenseMatrix::scalar(2, &q(2)));
    assert_eq!(n, DenseMatrix::from_ints(&[&[0, 1], &[0, 0]]));
    assert_eq!(eig, vec![q(2)]);
    // x^2 - 2 has no rational roots
    assert!(rational_spectrum(&DenseMatrix::from_ints(&[&[0, 2], &[1, 0]])).is_none());
}
