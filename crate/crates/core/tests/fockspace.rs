use vertexlab::algebra::{mode, virasoro};
use vertexlab::fockspace::{character, FockKey, Lattice, LatticeVoa};
use vertexlab::{GradedVector, Rational, VertexAlgebra};

fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

fn a1(n: u32) -> LatticeVoa {
    LatticeVoa::build(Lattice::new(vec![vec![2]]).unwrap(), n).unwrap()
}

/// Power-series oracle: theta series times the inverse Euler product, done
/// with plain integer convolution.
fn series_oracle(theta: &[u64], rank: usize, len: usize) -> Vec<u64> {
    let mut euler_inv = vec![0u64; len];
    euler_inv[0] = 1;
    for n in 1..len {
        // multiply by 1/(1-q^n) = Σ q^{kn}
        let mut next = vec![0u64; len];
        for (i, c) in euler_inv.iter().enumerate() {
            let mut j = i;
            while j < len {
                next[j] += c;
                j += n;
            }
        }
        euler_inv = next;
    }
    let mut f = vec![0u64; len];
    f[0] = 1;
    for _ in 0..rank {
        let mut g = vec![0u64; len];
        for i in 0..len {
            for j in 0..len - i {
                g[i + j] += f[i] * euler_inv[j];
            }
        }
        f = g;
    }
    let mut out = vec![0u64; len];
    for i in 0..len {
        for j in 0..len - i {
            out[i + j] += theta[i] * f[j];
        }
    }
    out
}

#[test]
fn graded_dimensions_rank_one() {
    let v = a1(8);
    let mut theta = vec![0u64; 9];
    for m in -3i64..=3 {
        if (m * m) < 9 {
            theta[(m * m) as usize] += 1;
        }
    }
    let oracle = series_oracle(&theta, 1, 9);
    let dims: Vec<u64> = v.grading().dims().iter().map(|&d| d as u64).collect();
    assert_eq!(dims, oracle);
    assert_eq!(dims, vec![1, 3, 4, 7, 13, 19, 29, 43, 62]);
    assert_eq!(character(v.lattice(), 8), oracle);
}

#[test]
fn graded_dimensions_rank_two() {
    let v = LatticeVoa::build(Lattice::new(vec![vec![2, 0], vec![0, 4]]).unwrap(), 4).unwrap();
    assert_eq!(v.dim(2), 11);
    let dims = v.grading().dims();
    assert_eq!(&dims[..3], &[1, 4, 11]);
    let mut theta = vec![0u64; 5];
    for x in -2i64..=2 {
        for y in -2i64..=2 {
            let w = x * x + 2 * y * y;
            if w < 5 {
                theta[w as usize] += 1;
            }
        }
    }
    let oracle = series_oracle(&theta, 2, 5);
    assert_eq!(dims.iter().map(|&d| d as u64).collect::<Vec<_>>(), oracle);
}

#[test]
fn vacuum_and_cft_type() {
    let v = a1(5);
    assert_eq!(v.dim(0), 1);
    assert_eq!(v.key(0), &FockKey::vacuum(1));
    assert_eq!(v.label(0), "e^[0]");
    assert!(Lattice::new(vec![vec![3]]).is_err());
    assert!(LatticeVoa::build(Lattice::new(vec![vec![2]]).unwrap(), 1).is_err());
}

#[test]
fn heisenberg_examples() {
    let v = a1(4);
    let a = v.heisenberg_vector(0);
    assert_eq!(v.heisenberg(0, -1, &v.vacuum()), a);
    assert_eq!(v.heisenberg(0, 1, &a), v.vacuum().scale(&q(2)));
    for m in -2..=2i64 {
        let e = v.exponential(&[m]).unwrap();
        assert_eq!(v.heisenberg(0, 0, &e), e.scale(&q(2 * m)));
    }
}

#[test]
fn exponential_examples() {
    let v = a1(5);
    let e = v.exponential(&[1]).unwrap();
    let f = v.exponential(&[-1]).unwrap();
    let e2 = v.exponential(&[2]).unwrap();
    assert_eq!(v.exponential_mode(&[1], -3, &e), e2);
    assert_eq!(v.exponential_mode(&[1], 1, &f), v.vacuum());
    assert!(v.exponential_mode(&[1], 0, &e).is_zero());
    assert_eq!(v.exponential_mode(&[1], 0, &f), v.heisenberg_vector(0));
    assert_eq!(v.exponential_mode(&[-1], 0, &e), v.heisenberg_vector(0).scale(&q(-1)));
    // the product engine agrees with the direct exponential action
    assert_eq!(mode(&v, &e, -3, &e), e2);
}

#[test]
fn virasoro_examples() {
    let v = a1(6);
    let w = v.conformal().clone();
    assert_eq!(virasoro(&v, 2, &w), v.vacuum().scale(&Rational::new(1, 2)));
    assert_eq!(v.virasoro_direct(2, &w), v.vacuum().scale(&Rational::new(1, 2)));
    let e = v.exponential(&[1]).unwrap();
    assert!(virasoro(&v, 1, &e).is_zero());
    assert!(virasoro(&v, -1, &v.vacuum()).is_zero());
    for i in 0..v.grading().total() {
        let b = GradedVector::basis(i);
        let wt = q(v.weight_of(i) as i64);
        assert_eq!(virasoro(&v, 0, &b), b.scale(&wt));
        assert_eq!(v.virasoro_direct(0, &b), b.scale(&wt));
    }
}

#[test]
fn engine_matches_direct_virasoro() {
    for lat in [vec![vec![2]], vec![vec![2, 0], vec![0, 4]], vec![vec![2, -1], vec![-1, 2]]] {
        let v = LatticeVoa::build(Lattice::new(lat).unwrap(), 4).unwrap();
        for i in 0..v.grading().total() {
            let b = GradedVector::basis(i);
            for k in -2..=3 {
                let direct = v.virasoro_direct(k, &b);
                let engine = virasoro(&v, k, &b);
                assert_eq!(direct.truncated, engine.truncated);
                if !direct.truncated {
                    assert_eq!(direct, engine, "L({k}) on {}", v.label(i));
                }
            }
        }
    }
}
