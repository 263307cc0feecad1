use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactlin::{DenseMatrix, Rational};

/// Sign table `ε(α_i, α_j)` on basis pairs, extended bimultiplicatively.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cocycle {
    table: Vec<Vec<i8>>,
}

impl Cocycle {
    /// `ε(α_i, α_j) = 1` for `i <= j` and `(-1)^{G_ij}` for `i > j`.
    pub fn standard(gram: &[Vec<i64>]) -> Self {
        let r = gram.len();
        let table = (0..r)
            .map(|i| (0..r).map(|j| if i > j && gram[i][j].rem_euclid(2) == 1 { -1 } else { 1 }).collect())
            .collect();
        Cocycle { table }
    }

    pub fn from_table(table: Vec<Vec<i8>>) -> Self {
        Cocycle { table }
    }

    pub fn table(&self) -> &[Vec<i8>] {
        &self.table
    }

    pub fn entry(&self, i: usize, j: usize) -> i8 {
        self.table[i][j]
    }

    /// `ε(β, γ)` for lattice points in basis coordinates.
    pub fn sign(&self, beta: &[i64], gamma: &[i64]) -> i64 {
        let mut parity = 0i64;
        for (i, b) in beta.iter().enumerate() {
            for (j, g) in gamma.iter().enumerate() {
                if self.table[i][j] < 0 {
                    parity += b * g;
                }
            }
        }
        if parity.rem_euclid(2) == 0 {
            1
        } else {
            -1
        }
    }
}

/// An even positive-definite lattice of small rank with a chosen cocycle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Lattice {
    gram: Vec<Vec<i64>>,
    cocycle: Cocycle,
}

impl Lattice {
    pub fn new(gram: Vec<Vec<i64>>) -> Result<Self> {
        let cocycle = Cocycle::standard(&gram);
        Self::with_cocycle(gram, cocycle)
    }

    pub fn with_cocycle(gram: Vec<Vec<i64>>, cocycle: Cocycle) -> Result<Self> {
        let r = gram.len();
        if r == 0 {
            return Err(Error::InvalidLattice("rank must be at least 1".into()));
        }
        if gram.iter().any(|row| row.len() != r) {
            return Err(Error::InvalidLattice("gram matrix is not square".into()));
        }
        for i in 0..r {
            for j in 0..r {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::InvalidLattice(format!("gram not symmetric at ({i},{j})")));
                }
            }
            if gram[i][i].rem_euclid(2) != 0 {
                return Err(Error::InvalidLattice(format!(
                    "diagonal entry {} at position {i} is odd; the lattice must be even",
                    gram[i][i]
                )));
            }
        }
        for k in 1..=r {
            let minor = DenseMatrix::from_rows(
                (0..k).map(|i| (0..k).map(|j| Rational::from_int(gram[i][j])).collect()).collect(),
            );
            let d = minor.determinant()?;
            if d <= Rational::zero() {
                return Err(Error::InvalidLattice(format!(
                    "leading minor of size {k} is {d}; the gram matrix must be positive definite"
                )));
            }
        }
        if cocycle.table.len() != r || cocycle.table.iter().any(|row| row.len() != r) {
            return Err(Error::InvalidLattice("cocycle table has the wrong shape".into()));
        }
        for i in 0..r {
            for j in 0..r {
                let e = cocycle.table[i][j];
                if e != 1 && e != -1 {
                    return Err(Error::InvalidLattice(format!("cocycle entry {e} is not a sign")));
                }
                let comm = if gram[i][j].rem_euclid(2) == 0 { 1 } else { -1 };
                if i != j && e * cocycle.table[j][i] != comm {
                    return Err(Error::InvalidLattice(format!(
                        "cocycle violates ε(α_{i},α_{j})ε(α_{j},α_{i}) = (-1)^<α_{i},α_{j}>"
                    )));
                }
            }
        }
        Ok(Lattice { gram, cocycle })
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn cocycle(&self) -> &Cocycle {
        &self.cocycle
    }

    pub fn pair(&self, a: &[i64], b: &[i64]) -> i64 {
        let mut s = 0;
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                s += x * self.gram[i][j] * y;
            }
        }
        s
    }

    pub fn norm(&self, a: &[i64]) -> i64 {
        self.pair(a, a)
    }

    /// `(Gλ)_i`, the eigenvalue of `α_i(0)` on `e^λ`.
    pub fn pair_basis(&self, i: usize, a: &[i64]) -> i64 {
        a.iter().enumerate().map(|(j, x)| self.gram[i][j] * x).sum()
    }

    pub fn gram_inverse(&self) -> DenseMatrix {
        let g = DenseMatrix::from_rows(
            self.gram.iter().map(|r| r.iter().map(|&x| Rational::from_int(x)).collect()).collect(),
        );
        g.inverse().expect("positive definite gram is invertible")
    }

    /// All lattice points with `<λ,λ>/2 <= max_weight`, in lexicographic order.
    pub fn points_up_to(&self, max_weight: u32) -> Vec<Vec<i64>> {
        let r = self.rank();
        let ginv = self.gram_inverse();
        let bound_sq = Rational::from_int(2 * max_weight as i64);
        // Cauchy-Schwarz: λ_i^2 <= <λ,λ> (G^{-1})_ii
        let bounds: Vec<i64> = (0..r)
            .map(|i| {
                let lim = &bound_sq * ginv.get(i, i);
                let mut b = 0i64;
                while Rational::from_int((b + 1) * (b + 1)) <= lim {
                    b += 1;
                }
                b
            })
            .collect();
        let mut out = Vec::new();
        let mut cur = vec![0i64; r];
        fn rec(
            lat: &Lattice,
            k: usize,
            bounds: &[i64],
            cur: &mut Vec<i64>,
            max_weight: u32,
            out: &mut Vec<Vec<i64>>,
        ) {
            if k == bounds.len() {
                if lat.norm(cur) <= 2 * max_weight as i64 {
                    out.push(cur.clone());
                }
                return;
            }
            for x in -bounds[k]..=bounds[k] {
                cur[k] = x;
                rec(lat, k + 1, bounds, cur, max_weight, out);
            }
        }
        rec(self, 0, &bounds, &mut cur, max_weight, &mut out);
        out
    }
}
