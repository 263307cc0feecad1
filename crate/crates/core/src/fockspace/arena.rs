use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use super::key::{self, FockKey, FockPoly, Parts};
use super::lattice::Lattice;
use crate::algebra::{mode, Grading, GradedVector, VertexAlgebra};
use crate::error::{Error, Result};
use crate::exactlin::{binomial, Rational, SparseVec};

type MemoKey = (u32, i32, u32);

/// The lattice VOA `V_L` truncated at weight `N`.
pub struct LatticeVoa {
    lattice: Lattice,
    keys: Vec<FockKey>,
    index: HashMap<FockKey, usize>,
    levels: Vec<u32>,
    grading: Grading,
    omega: GradedVector,
    memo: RwLock<HashMap<MemoKey, Arc<SparseVec>>>,
}

impl LatticeVoa {
    pub fn build(lattice: Lattice, cutoff: u32) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::Usage(format!("weight cutoff must be at least 2, got {cutoff}")));
        }
        let rank = lattice.rank();
        let points = lattice.points_up_to(cutoff);
        let mut keys = Vec::new();
        let mut dims = Vec::new();
        for w in 0..=cutoff {
            let start = keys.len();
            for lam in &points {
                let e = (lattice.norm(lam) / 2) as u32;
                if e > w {
                    continue;
                }
                let mut parts = multipartitions(rank, w - e);
                parts.sort();
                keys.extend(parts.into_iter().map(|p| FockKey { charge: lam.clone(), parts: p }));
            }
            dims.push(keys.len() - start);
        }
        let index = keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        let levels = keys.iter().map(|k| k.level()).collect();
        let mut voa = LatticeVoa {
            lattice,
            keys,
            index,
            levels,
            grading: Grading::from_dims(&dims),
            omega: GradedVector::zero(),
            memo: RwLock::new(HashMap::new()),
        };
        voa.omega = voa.build_omega();
        Ok(voa)
    }

    fn build_omega(&self) -> GradedVector {
        let r = self.lattice.rank();
        let ginv = self.lattice.gram_inverse();
        let mut pairs = Vec::new();
        for i in 0..r {
            for j in 0..r {
                let c = ginv.get(i, j) * &Rational::new(1, 2);
                if c.is_zero() {
                    continue;
                }
                let k = FockKey::new(vec![0; r], vec![(i, 1, 1), (j, 1, 1)]);
                pairs.push((self.index[&k], c));
            }
        }
        GradedVector::exact(SparseVec::from_pairs(pairs))
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn rank(&self) -> usize {
        self.lattice.rank()
    }

    pub fn key(&self, index: usize) -> &FockKey {
        &self.keys[index]
    }

    pub fn keys(&self) -> &[FockKey] {
        &self.keys
    }

    pub fn index_of(&self, key: &FockKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// The basis vector for a key, or an error if it lies above the cutoff.
    pub fn key_vector(&self, key: &FockKey) -> Result<GradedVector> {
        self.index_of(key).map(GradedVector::basis).ok_or_else(|| Error::Truncated {
            cutoff: self.cutoff(),
            context: format!("basis key {key}"),
        })
    }

    pub fn exponential(&self, charge: &[i64]) -> Result<GradedVector> {
        self.key_vector(&FockKey::exponential(charge.to_vec()))
    }

    /// `α_i(-1)𝟙`.
    pub fn heisenberg_vector(&self, i: usize) -> GradedVector {
        GradedVector::basis(self.index[&FockKey::new(vec![0; self.rank()], vec![(i, 1, 1)])])
    }

    pub fn from_keys(&self, terms: &[(FockKey, Rational)]) -> Result<GradedVector> {
        let mut pairs = Vec::new();
        for (k, c) in terms {
            let k = FockKey::new(k.charge.clone(), k.parts.clone());
            let i = self.index_of(&k).ok_or_else(|| Error::Truncated {
                cutoff: self.cutoff(),
                context: format!("basis key {k}"),
            })?;
            pairs.push((i, c.clone()));
        }
        Ok(GradedVector::exact(SparseVec::from_pairs(pairs)))
    }

    pub fn to_keys(&self, v: &GradedVector) -> Vec<(FockKey, Rational)> {
        v.terms.iter().map(|(i, c)| (self.keys[*i].clone(), c.clone())).collect()
    }

    fn poly_to_vector(&self, charge: &[i64], poly: FockPoly, out: &mut Vec<(usize, Rational)>) {
        for (parts, c) in poly {
            let k = FockKey { charge: charge.to_vec(), parts };
            let i = self.index[&k];
            out.push((i, c));
        }
    }

    /// `α_i(n) v`.
    pub fn heisenberg(&self, i: usize, n: i64, v: &GradedVector) -> GradedVector {
        let mut out = Vec::new();
        let mut truncated = v.truncated;
        for (b, y) in v.terms.iter() {
            let w = self.grading.weight_of(*b) as i64 - n;
            if w < 0 {
                continue;
            }
            if w > self.cutoff() as i64 {
                truncated = true;
                continue;
            }
            self.heisenberg_key(i, n, *b, y, &mut out);
        }
        GradedVector { terms: SparseVec::from_pairs(out), truncated }
    }

    fn heisenberg_key(&self, i: usize, n: i64, b: usize, y: &Rational, out: &mut Vec<(usize, Rational)>) {
        let k = &self.keys[b];
        match n.cmp(&0) {
            std::cmp::Ordering::Less => {
                let nk = FockKey { charge: k.charge.clone(), parts: key::add_one(&k.parts, i, (-n) as u32) };
                out.push((self.index[&nk], y.clone()));
            }
            std::cmp::Ordering::Equal => {
                let c = self.lattice.pair_basis(i, &k.charge);
                if c != 0 {
                    out.push((b, y * &Rational::from_int(c)));
                }
            }
            std::cmp::Ordering::Greater => {
                let n = n as u32;
                for (j, g) in self.lattice.gram()[i].iter().enumerate() {
                    if *g == 0 {
                        continue;
                    }
                    if let Some((mult, rest)) = key::remove_one(&k.parts, j, n) {
                        let nk = FockKey { charge: k.charge.clone(), parts: rest };
                        out.push((self.index[&nk], y * &Rational::from_int(g * n as i64 * mult as i64)));
                    }
                }
            }
        }
    }

    /// `(e^β)_n v`, read off from `E^-(-β,z) E^+(-β,z) e_β z^β`.
    pub fn exponential_mode(&self, beta: &[i64], n: i64, v: &GradedVector) -> GradedVector {
        let mut out = Vec::new();
        let mut truncated = v.truncated;
        let eb = self.lattice.norm(beta) / 2;
        for (b, y) in v.terms.iter() {
            let t = eb + self.grading.weight_of(*b) as i64 - n - 1;
            if t < 0 {
                continue;
            }
            if t > self.cutoff() as i64 {
                truncated = true;
                continue;
            }
            let k = &self.keys[*b];
            let (charge, poly) = self.exponential_on_key(beta, n, k);
            let mut part = Vec::new();
            self.poly_to_vector(&charge, poly, &mut part);
            out.extend(part.into_iter().map(|(i, c)| (i, c * y)));
        }
        GradedVector { terms: SparseVec::from_pairs(out), truncated }
    }

    fn exponential_on_key(&self, beta: &[i64], n: i64, k: &FockKey) -> (Vec<i64>, FockPoly) {
        let rank = self.rank();
        let lam = &k.charge;
        let s = self.lattice.pair(beta, lam);
        let sign = self.lattice.cocycle().sign(beta, lam);
        let new_charge: Vec<i64> = lam.iter().zip(beta).map(|(a, b)| a + b).collect();
        let level = k.level();

        // P_k: coefficient of z^{-k} in E^+(-β,z) applied to M.
        let mut p: Vec<FockPoly> = Vec::with_capacity(level as usize + 1);
        p.push(FockPoly::from([(k.parts.clone(), Rational::one())]));
        for kk in 1..=level as usize {
            let mut acc = FockPoly::new();
            for m in 1..=kk {
                if p[kk - m].is_empty() {
                    continue;
                }
                let t = key::poly_annihilate(&self.lattice, beta, m as u32, &p[kk - m]);
                key::poly_add_scaled(&mut acc, &Rational::new(-1, kk as i64), &t);
            }
            p.push(acc);
        }

        // q_j: coefficient of z^j in E^-(-β,z).
        let max_j = (level as i64 - n - 1 - s).max(-1);
        let mut q: Vec<FockPoly> = Vec::new();
        if max_j >= 0 {
            q.push(FockPoly::from([(Parts::new(), Rational::one())]));
            for j in 1..=max_j as usize {
                let mut acc = FockPoly::new();
                for m in 1..=j {
                    let t = key::poly_create(rank, beta, m as u32, &q[j - m]);
                    key::poly_add_scaled(&mut acc, &Rational::new(1, j as i64), &t);
                }
                q.push(acc);
            }
        }

        let mut result = FockPoly::new();
        for (kk, pk) in p.iter().enumerate() {
            let j = -n - 1 - s + kk as i64;
            if j < 0 || pk.is_empty() {
                continue;
            }
            let term = key::poly_mul(&q[j as usize], pk);
            key::poly_add_scaled(&mut result, &Rational::from_int(sign), &term);
        }
        (new_charge, result)
    }

    /// `L(k) v` from the normally ordered quadratic expression in the
    /// Heisenberg modes; independent of the product engine.
    pub fn virasoro_direct(&self, k: i64, v: &GradedVector) -> GradedVector {
        let r = self.rank();
        let ginv = self.lattice.gram_inverse();
        let half = Rational::new(1, 2);
        let mut acc = GradedVector::zero();
        acc.truncated = v.truncated;
        for (b, y) in v.terms.iter() {
            let t = self.grading.weight_of(*b) as i64 - k;
            if t < 0 {
                continue;
            }
            if t > self.cutoff() as i64 {
                acc.truncated = true;
                continue;
            }
            let lvl = self.levels[*b] as i64;
            let single = GradedVector::exact(SparseVec::from_pairs([(*b, y.clone())]));
            for m in (k - lvl)..=lvl {
                let (p, q) = (m, k - m);
                for i in 0..r {
                    for j in 0..r {
                        let c = &half * ginv.get(i, j);
                        if c.is_zero() {
                            continue;
                        }
                        let w = if p >= q {
                            self.heisenberg(j, q, &self.heisenberg(i, p, &single))
                        } else {
                            self.heisenberg(i, p, &self.heisenberg(j, q, &single))
                        };
                        acc = acc.add_scaled(&c, &w);
                    }
                }
            }
        }
        acc
    }

    fn compute_product(&self, u: usize, n: i64, v: usize) -> SparseVec {
        let ku = &self.keys[u];
        let vv = GradedVector::basis(v);
        let Some((i, m, rest)) = ku.peel() else {
            return self.exponential_mode(&ku.charge, n, &vv).terms;
        };
        // (α_i(-m) a)_n v = Σ_j C(m+j-1, j) [α_i(-m-j) a_{n+j} v - (-1)^m a_{n-m-j} α_i(j) v]
        let a = self.index[&rest];
        let av = GradedVector::basis(a);
        let wa = self.grading.weight_of(a) as i64;
        let wv = self.grading.weight_of(v) as i64;
        let m = m as i64;
        let mut acc = GradedVector::zero();
        let mut j = 0i64;
        while n + j < wa + wv {
            let inner = mode(self, &av, n + j, &vv);
            if !inner.is_zero() {
                let c = Rational::from_int(binomial(m + j - 1, j));
                acc = acc.add_scaled(&c, &self.heisenberg(i, -m - j, &inner));
            }
            j += 1;
        }
        let sign = if m % 2 == 0 { -1 } else { 1 };
        for j in 0..=self.levels[v] as i64 {
            let h = self.heisenberg(i, j, &vv);
            if h.is_zero() {
                continue;
            }
            let c = Rational::from_int(sign * binomial(m + j - 1, j));
            acc = acc.add_scaled(&c, &mode(self, &av, n - m - j, &h));
        }
        debug_assert!(!acc.truncated);
        acc.terms
    }
}

impl VertexAlgebra for LatticeVoa {
    fn grading(&self) -> &Grading {
        &self.grading
    }

    fn basis_product(&self, u: usize, n: i64, v: usize) -> Arc<SparseVec> {
        let key = (u as u32, n as i32, v as u32);
        if let Some(hit) = self.memo.read().expect("memo lock").get(&key) {
            return hit.clone();
        }
        // Concurrent callers may compute the same entry; the first insert wins.
        let val = Arc::new(self.compute_product(u, n, v));
        self.memo.write().expect("memo lock").entry(key).or_insert(val).clone()
    }

    fn conformal(&self) -> &GradedVector {
        &self.omega
    }

    fn central_charge(&self) -> Rational {
        Rational::from_int(self.rank() as i64)
    }

    fn label(&self, index: usize) -> String {
        self.keys[index].to_string()
    }
}

/// All creation monomials of total level `level` in `rank` colours.
fn multipartitions(rank: usize, level: u32) -> Vec<Parts> {
    let colours: Vec<(usize, u32)> =
        (0..rank).flat_map(|i| (1..=level).map(move |n| (i, n))).collect();
    let mut out = Vec::new();
    let mut cur = Parts::new();
    fn rec(colours: &[(usize, u32)], idx: usize, left: u32, cur: &mut Parts, out: &mut Vec<Parts>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        if idx == colours.len() {
            return;
        }
        let (i, n) = colours[idx];
        rec(colours, idx + 1, left, cur, out);
        let mut mult = 1;
        while mult * n <= left {
            cur.push((i, n, mult));
            rec(colours, idx + 1, left - mult * n, cur, out);
            cur.pop();
            mult += 1;
        }
    }
    rec(&colours, 0, level, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multipartition_counts() {
        assert_eq!(multipartitions(1, 4).len(), 5);
        assert_eq!(multipartitions(2, 2).len(), 5);
        assert_eq!(multipartitions(1, 0), vec![Parts::new()]);
    }
}
