use std::sync::Arc;
use std::time::Instant;

use vertexlab::autgroup::AutContext;
use vertexlab::fixpoint::*;
use vertexlab::fockspace::LatticeVoa;
use vertexlab::Rational;

fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

// p(n) by the pentagonal number recurrence
fn partitions(n: usize) -> Vec<i64> {
    let mut p = vec![0i64; n + 1];
    p[0] = 1;
    for m in 1..=n {
        let mut k = 1i64;
        loop {
            let g1 = (k * (3 * k - 1) / 2) as usize;
            if g1 > m {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            p[m] += sign * p[m - g1];
            let g2 = (k * (3 * k + 1) / 2) as usize;
            if g2 <= m {
                p[m] += sign * p[m - g2];
            }
            k += 1;
        }
    }
    p
}

fn fpa(n: u32) -> FixedPointAlgebra {
    fixed_point_subalgebra(Arc::new(LatticeVoa::build(a1_lattice(), n).unwrap())).unwrap()
}

#[test]
fn partition_helper_matches_oracle() {
    let p = partitions(30);
    assert_eq!(partition_numbers(30).iter().map(|&x| x as i64).collect::<Vec<_>>(), p);
}

#[test]
fn fixed_point_dimensions_are_partition_numbers() {
    let t = Instant::now();
    let f = fpa(10);
    eprintln!("fixed points at N=10: {:?}", t.elapsed());
    let p = partitions(10);
    let dims: Vec<i64> = f.dims().iter().map(|&d| d as i64).collect();
    assert_eq!(dims, p);
    assert_eq!(dims, vec![1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]);
    assert!(f.decomposition_holds());
    for s in f.alg.summands() {
        let h = s.hw_weight as usize;
        for (w, d) in s.dims().iter().enumerate() {
            let expected = if w < h {
                0
            } else {
                let j = w - h;
                p[j] - if j > 2 * s.m as usize { p[j - 2 * s.m as usize - 1] } else { 0 }
            };
            assert_eq!(*d as i64, expected, "summand {} weight {w}", s.m);
        }
    }
}

#[test]
fn closure_and_generation() {
    let f = fpa(7);
    let c = f.closure_check(5);
    assert!(c.checked > 0);
    assert_eq!(c.failures, 0);
    let c = f.charge_additivity(5).unwrap();
    assert_eq!(c.failures, 0);
    assert!(f.generation_check().unwrap());
}

#[test]
fn highest_weights_are_squares() {
    let f = fpa(10);
    let hw = virasoro_highest_weights(&f).unwrap();
    let weights: Vec<u32> = hw.iter().map(|x| x.0).collect();
    assert_eq!(weights, vec![0, 1, 4, 9]);
    for (w, v) in &hw {
        let m = (*w as f64).sqrt() as i64;
        let e = f.parent().exponential(&[m]).unwrap();
        let idx = e.terms.iter().next().unwrap().0;
        assert!(!v.coeff(idx).is_zero());
    }
}

#[test]
fn ideal_chain_dimensions() {
    let f = fpa(9);
    let p = partitions(9);
    for n in 1..=2u32 {
        let r = ideal_chain(&f, n).unwrap();
        let sq = (n * n) as usize;
        for (k, d) in r.dims.iter().enumerate() {
            let expected = if k >= sq { p[k - sq] } else { 0 };
            assert_eq!(*d as i64, expected, "n = {n}, weight {k}");
        }
        assert_eq!(r.climbing_coefficient, Some(q(1)));
        assert_eq!(r.next_in_ideal, Some(true));
    }
    assert!(ideal_chain(&f, 0).is_err());
    assert!(ideal_chain(&f, 4).is_err());
}

#[test]
fn climbing_coefficients() {
    let v = LatticeVoa::build(a1_lattice(), 9).unwrap();
    assert_eq!(climbing_coefficient(&v, 1).unwrap(), Some(q(1)));
    assert_eq!(climbing_coefficient(&v, 2).unwrap(), Some(q(1)));
}

#[test]
fn sigma_lambda_automorphisms() {
    let f = fpa(6);
    let ctx = AutContext::new(&f.alg, 4).unwrap();
    for l in [q(2), Rational::new(1, 2), q(-1), Rational::new(-3, 5)] {
        let v = sigma_lambda_check(&ctx, &l).unwrap();
        assert!(v.accepted, "lambda = {l}");
    }
    assert!(sigma_lambda_check(&ctx, &q(0)).is_err());
    // scales 1, 2, 3 on L(1,0), L(1,1), L(1,4) break the forced relation
    let bad = summand_scaling(&f.alg, 4, &[q(1), q(2), q(3)]).unwrap();
    assert!(!ctx.check_automorphism(&bad).unwrap().accepted);
    let (a, b) = (q(2), Rational::new(-1, 3));
    let lhs = sigma_lambda(&f.alg, 4, &a).unwrap().compose(&sigma_lambda(&f.alg, 4, &b).unwrap());
    assert_eq!(lhs, sigma_lambda(&f.alg, 4, &(&a * &b)).unwrap());

    let form = automorphism_form(&f, 4).unwrap();
    assert_eq!(form.commutant_dim, 3);
    assert_eq!(form.summands_in_u, 3);
    assert!(form.diagonal);
    assert_eq!(form.relations, vec![(2, q(1))]);
    assert!(form.only_sigma());
}

#[test]
fn direct_sum_algebra() {
    let spec: DsumSpec = serde_json::from_str(r#"{"hw_weights":[0,1,4],"cutoff":6}"#).unwrap();
    let t = Instant::now();
    let alg = build_dsum_voa(&spec).unwrap();
    assert_eq!(alg.rule(), ProductRule::DirectSum);
    let ax = dsum_axioms(&alg);
    assert!(ax.holds(), "{ax:?}");
    let aut = dsum_automorphisms(&alg, 4).unwrap();
    eprintln!("dsum checks: {:?}", t.elapsed());
    assert_eq!(aut.commutant_dim, 3);
    assert!(aut.diagonal);
    assert!(aut.torus_samples.iter().all(|s| s.1));
    assert_eq!(aut.mixing_rejected, Some(true));
    assert_eq!(aut.derivation_dim, 2);
    assert!(aut.holds());

    for n in 1..=3 {
        let probe = non_generation_probe(&alg, n).unwrap();
        assert_eq!(probe.first_deficient, Some(4));
        assert!(probe.holds());
    }
    assert_eq!(non_generation_probe(&alg, 4).unwrap().first_deficient, None);

    for bad in [vec![1, 4], vec![0, 4, 1], vec![0, 2]] {
        assert!(build_dsum_voa(&DsumSpec { hw_weights: bad, cutoff: 6 }).is_err());
    }
}

#[test]
fn fixed_point_only_for_a1() {
    let v = LatticeVoa::build(vertexlab::fockspace::Lattice::new(vec![vec![4]]).unwrap(), 4).unwrap();
    assert!(fixed_point_subalgebra(Arc::new(v)).is_err());
}
