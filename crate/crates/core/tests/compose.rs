use std::time::Instant;

use vertexlab::algebra::{mode, virasoro};
use vertexlab::compose::*;
use vertexlab::exactlin::binomial;
use vertexlab::fockspace::{Lattice, LatticeVoa};
use vertexlab::{GradedVector, Rational, VertexAlgebra};

fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

fn a1(n: u32) -> LatticeVoa {
    LatticeVoa::build(Lattice::new(vec![vec![2]]).unwrap(), n).unwrap()
}

fn exp_generators(v: &LatticeVoa) -> Generators {
    Generators::new(
        v,
        vec![v.vacuum(), v.exponential(&[1]).unwrap(), v.exponential(&[-1]).unwrap()],
        vec!["1".into(), "e".into(), "f".into()],
    )
    .unwrap()
}

#[test]
fn exponentials_generate_rank_one() {
    let v = a1(8);
    let t = Instant::now();
    let gens = exp_generators(&v);
    let closure = SpanClosure::compute(&v, &gens, None, EnumerationOrder::Standard);
    for r in &closure.reports {
        assert_eq!(r.achieved, r.target, "weight {}", r.weight);
    }
    assert!(closure.max_length_used <= 2 * 8 + 1);
    eprintln!("closure at N=8: {:?}, max length {}", t.elapsed(), closure.max_length_used);
    let r0 = spanning_check(&v, &gens, 0, None).unwrap();
    assert_eq!(r0.achieved, 1);
}

#[test]
fn basis_family_sizes() {
    let v = a1(6);
    let gens = Generators::up_to_weight(&v, 1);
    let r0 = select_basis(&v, &gens, 0).unwrap();
    assert_eq!(r0, vec![AdmissiblePair::trivial(0)]);
    assert_eq!(select_basis(&v, &gens, 1).unwrap().len(), 3);
    assert_eq!(select_basis(&v, &gens, 4).unwrap().len(), 13);
    let family = BasisFamily::compute(&v, &gens, EnumerationOrder::Standard).unwrap();
    for w in 0..=6 {
        assert_eq!(family.pairs(w).len(), v.dim(w));
        for p in family.pairs(w) {
            assert_eq!(p.weight(&gens), w as i64);
        }
    }
}

#[test]
fn vacuum_alone_does_not_generate() {
    let v = a1(4);
    let gens = Generators::up_to_weight(&v, 0);
    match select_basis(&v, &gens, 1) {
        Err(vertexlab::Error::SpanDeficient { weight: 1, target: 3, achieved: 0 }) => {}
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn evaluation_examples() {
    let v = a1(5);
    let gens = exp_generators(&v);
    let e2 = v.exponential(&[2]).unwrap();
    assert_eq!(eval_composition(&v, &gens, &AdmissiblePair::trivial(0)), v.vacuum());
    let p = AdmissiblePair::new(vec![-3], vec![1, 1]).unwrap();
    assert_eq!(p.weight(&gens), 4);
    assert_eq!(eval_composition(&v, &gens, &p), e2);
    let p = AdmissiblePair::new(vec![1], vec![1, 2]).unwrap();
    assert_eq!(p.weight(&gens), 0);
    assert_eq!(eval_composition(&v, &gens, &p), v.vacuum());
    assert!(AdmissiblePair::new(vec![1, 2], vec![0]).is_err());
}

#[test]
fn general_mode_examples() {
    let v = a1(5);
    let gens = Generators::up_to_weight(&v, 1);
    let a_idx = gens.labels.iter().position(|l| l == "a0(-1)e^[0]").unwrap();
    let e = v.exponential(&[1]).unwrap();
    let omega = ComposedVector {
        terms: vec![(Rational::new(1, 4), AdmissiblePair::new(vec![-1], vec![a_idx, a_idx]).unwrap())],
    };
    assert_eq!(omega.evaluate(&v, &gens), *v.conformal());
    assert_eq!(general_mode(&v, &gens, &omega, 1, &e), e);
    let family = BasisFamily::compute(&v, &gens, EnumerationOrder::Standard).unwrap();
    for i in 0..v.grading().total() {
        let b = GradedVector::basis(i);
        if v.weight_of(i) <= 3 {
            assert_eq!(general_mode_vector(&v, &family, &v.vacuum(), -1, &b).unwrap(), b);
        }
    }
    let ex = gens.labels.iter().position(|l| l == "e^[1]").unwrap();
    let fx = gens.labels.iter().position(|l| l == "e^[-1]").unwrap();
    let p = ComposedVector::single(AdmissiblePair::trivial(ex));
    assert_eq!(general_mode(&v, &gens, &p, 0, &gens.vectors[fx]), v.heisenberg_vector(0));
}

#[test]
fn iterate_formula_matches_direct_modes() {
    let v = a1(5);
    let gens = Generators::up_to_weight(&v, 1);
    let family = BasisFamily::compute(&v, &gens, EnumerationOrder::Standard).unwrap();
    let g = v.grading();
    let mut checked = 0;
    for w in 0..=3 {
        for (kid, p) in family.ids(w).iter().zip(family.pairs(w)) {
            let u = &family.closure.kept_values[*kid];
            for j in 0..g.total() {
                let x = GradedVector::basis(j);
                let wx = v.weight_of(j) as i64;
                for n in (w as i64 + wx - 1 - 5)..=(w as i64 + wx - 1) {
                    let iter = general_mode(&v, &gens, &ComposedVector::single(p.clone()), n, &x);
                    if iter.truncated {
                        continue;
                    }
                    assert_eq!(iter, mode(&v, u, n, &x), "pair {:?}, n = {n}, v = {}", p, v.label(j));
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 500, "checked {checked}");
}

#[test]
fn weight_law_and_vacuum_laws() {
    let v = a1(6);
    let g = v.grading();
    for i in 0..g.total() {
        let u = GradedVector::basis(i);
        assert_eq!(mode(&v, &u, -1, &v.vacuum()), u);
        for n in 0..4 {
            assert!(mode(&v, &u, n, &v.vacuum()).is_zero());
        }
        let wu = v.weight_of(i) as i64;
        for j in 0..g.total() {
            let x = GradedVector::basis(j);
            let wx = v.weight_of(j) as i64;
            for n in (wu + wx - 1 - 6)..=(wu + wx + 2) {
                let r = mode(&v, &u, n, &x);
                if n >= wu + wx {
                    assert!(r.is_zero());
                }
                if !r.is_zero() {
                    assert_eq!(r.weight(g), Some((wu + wx - n - 1) as u32));
                }
            }
        }
    }
}

/// `v_n u = Σ_j (-1)^{n+j+1} L(-1)^j (u_{n+j} v) / j!`
fn skew_transport(v: &LatticeVoa, u: &GradedVector, n: i64, x: &GradedVector) -> GradedVector {
    let g = v.grading();
    let wu = u.weight(g).unwrap() as i64;
    let wx = x.weight(g).unwrap() as i64;
    let mut acc = GradedVector::zero();
    let mut fact = Rational::one();
    for j in 0..=(wu + wx - n) {
        if j > 0 {
            fact = fact * q(j);
        }
        if n + j >= wu + wx {
            break;
        }
        let mut t = mode(v, u, n + j, x);
        for _ in 0..j {
            t = virasoro(v, -1, &t);
        }
        let s = if (n + j + 1).rem_euclid(2) == 0 { 1 } else { -1 };
        acc = acc.add_scaled(&(q(s) / &fact), &t);
    }
    acc
}

#[test]
fn skew_symmetry_on_generators() {
    for gram in [vec![vec![2]], vec![vec![2, 0], vec![0, 4]], vec![vec![2, -1], vec![-1, 2]]] {
        let v = LatticeVoa::build(Lattice::new(gram).unwrap(), 5).unwrap();
        let gens = Generators::up_to_weight(&v, 1);
        for a in &gens.vectors {
            for b in &gens.vectors {
                for n in -4..=2 {
                    let lhs = mode(&v, b, n, a);
                    let rhs = skew_transport(&v, a, n, b);
                    if !lhs.truncated && !rhs.truncated {
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }
}

#[test]
fn commutator_formula_low_weights() {
    // [u_m, w_n] x = Σ_i C(m,i) (u_i w)_{m+n-i} x
    let v = LatticeVoa::build(Lattice::new(vec![vec![2, -1], vec![-1, 2]]).unwrap(), 4).unwrap();
    let g = v.grading();
    let low: Vec<usize> = (0..=2).flat_map(|w| g.range(w)).collect();
    for &ui in &low {
        let u = GradedVector::basis(ui);
        for &wi in low.iter().filter(|&&i| v.weight_of(i) <= 1) {
            let w = GradedVector::basis(wi);
            for &xi in &low {
                let x = GradedVector::basis(xi);
                for m in -1..=2i64 {
                    for n in -1..=1i64 {
                        let lhs = mode(&v, &u, m, &mode(&v, &w, n, &x)).sub(&mode(&v, &w, n, &mode(&v, &u, m, &x)));
                        let mut rhs = GradedVector::zero();
                        for i in 0..=m.max(0) {
                            if m >= 0 && i > m {
                                break;
                            }
                            let c = binomial(m, i);
                            rhs = rhs.add_scaled(&q(c), &mode(&v, &mode(&v, &u, i, &w), m + n - i, &x));
                        }
                        if m < 0 {
                            continue;
                        }
                        if lhs.truncated || rhs.truncated {
                            continue;
                        }
                        assert_eq!(lhs, rhs, "u={} w={} x={} m={m} n={n}", v.label(ui), v.label(wi), v.label(xi));
                    }
                }
            }
        }
    }
}

#[test]
fn c2_probe_rank_one() {
    let v = a1(8);
    assert_eq!(c2_probe(&v, 0).unwrap().codim, 1);
    let codims: Vec<usize> = (0..=7).map(|m| c2_probe(&v, m).unwrap().codim).collect();
    let m0 = codims.iter().rposition(|&c| c != 0).map_or(0, |p| p + 1);
    assert!(m0 <= 7, "codims {codims:?}");
    assert!(codims[m0..].iter().all(|&c| c == 0));
    for m in 1..=4 {
        assert_eq!(c2_probe_with(&v, m, &[v.vacuum()]).unwrap().codim, v.dim(m));
    }
    assert!(c2_probe(&v, 8).is_err());
}
