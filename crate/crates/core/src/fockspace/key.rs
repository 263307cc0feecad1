use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::lattice::Lattice;
use crate::exactlin::Rational;

/// A creation-operator monomial: sorted `(coordinate, mode, multiplicity)`
/// triples, standing for `Π α_i(-n)^mult`.
pub type Parts = Vec<(usize, u32, u32)>;

/// Basis label `α_{i1}(-n1)⋯α_{ik}(-nk) e^λ` of the lattice Fock space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FockKey {
    pub charge: Vec<i64>,
    pub parts: Parts,
}

impl FockKey {
    pub fn new(charge: Vec<i64>, parts: Parts) -> Self {
        FockKey { charge, parts: canonical_parts(parts) }
    }

    pub fn vacuum(rank: usize) -> Self {
        FockKey { charge: vec![0; rank], parts: Vec::new() }
    }

    pub fn exponential(charge: Vec<i64>) -> Self {
        FockKey { charge, parts: Vec::new() }
    }

    pub fn level(&self) -> u32 {
        level(&self.parts)
    }

    /// `<λ,λ>/2 + Σ n·mult`; even lattices make this an integer.
    pub fn weight(&self, lattice: &Lattice) -> u32 {
        (lattice.norm(&self.charge) / 2) as u32 + self.level()
    }

    /// Removes one copy of the first part, returning `(i, n, rest)`.
    pub fn peel(&self) -> Option<(usize, u32, FockKey)> {
        let &(i, n, _) = self.parts.first()?;
        let rest = remove_one(&self.parts, i, n)?.1;
        Some((i, n, FockKey { charge: self.charge.clone(), parts: rest }))
    }
}

impl fmt::Display for FockKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &(i, n, m) in &self.parts {
            write!(f, "a{i}(-{n})")?;
            if m > 1 {
                write!(f, "^{m}")?;
            }
        }
        let c: Vec<String> = self.charge.iter().map(|x| x.to_string()).collect();
        write!(f, "e^[{}]", c.join(","))
    }
}

pub fn level(parts: &Parts) -> u32 {
    parts.iter().map(|&(_, n, m)| n * m).sum()
}

pub fn canonical_parts(parts: Parts) -> Parts {
    let mut map: BTreeMap<(usize, u32), u32> = BTreeMap::new();
    for (i, n, m) in parts {
        assert!(n >= 1, "creation modes are negative");
        *map.entry((i, n)).or_default() += m;
    }
    map.into_iter().filter(|(_, m)| *m > 0).map(|((i, n), m)| (i, n, m)).collect()
}

/// Multiplicity of `α_i(-n)` and the monomial with one copy removed.
pub fn remove_one(parts: &Parts, i: usize, n: u32) -> Option<(u32, Parts)> {
    let pos = parts.iter().position(|&(j, k, _)| j == i && k == n)?;
    let mult = parts[pos].2;
    let mut out = parts.clone();
    if mult == 1 {
        out.remove(pos);
    } else {
        out[pos].2 -= 1;
    }
    Some((mult, out))
}

pub fn add_one(parts: &Parts, i: usize, n: u32) -> Parts {
    let mut out = parts.clone();
    match out.binary_search_by(|&(j, k, _)| (j, k).cmp(&(i, n))) {
        Ok(p) => out[p].2 += 1,
        Err(p) => out.insert(p, (i, n, 1)),
    }
    out
}

pub fn multiply_monomials(a: &Parts, b: &Parts) -> Parts {
    let mut v = a.clone();
    v.extend_from_slice(b);
    canonical_parts(v)
}

/// A polynomial in the creation operators at fixed charge.
pub type FockPoly = BTreeMap<Parts, Rational>;

pub fn poly_add_scaled(acc: &mut FockPoly, c: &Rational, p: &FockPoly) {
    for (m, x) in p {
        let e = acc.entry(m.clone()).or_default();
        *e += c * x;
        if e.is_zero() {
            acc.remove(m);
        }
    }
}

pub fn poly_mul(a: &FockPoly, b: &FockPoly) -> FockPoly {
    let mut out = FockPoly::new();
    for (ma, x) in a {
        for (mb, y) in b {
            let m = multiply_monomials(ma, mb);
            let e = out.entry(m.clone()).or_default();
            *e += x * y;
            if e.is_zero() {
                out.remove(&m);
            }
        }
    }
    out
}

/// `β(-n)` for `n >= 1`: multiplication by `Σ β_i α_i(-n)`.
pub fn poly_create(lattice_rank: usize, beta: &[i64], n: u32, p: &FockPoly) -> FockPoly {
    let mut out = FockPoly::new();
    for i in 0..lattice_rank {
        if beta[i] == 0 {
            continue;
        }
        let c = Rational::from_int(beta[i]);
        for (m, x) in p {
            let e = out.entry(add_one(m, i, n)).or_default();
            *e += &c * x;
        }
    }
    out.retain(|_, x| !x.is_zero());
    out
}

/// `β(n)` for `n >= 1`: `β(n) α_k(-n) = α_k(-n) β(n) + n <β, α_k>`.
pub fn poly_annihilate(lattice: &Lattice, beta: &[i64], n: u32, p: &FockPoly) -> FockPoly {
    let gb: Vec<i64> = (0..lattice.rank()).map(|k| lattice.pair_basis(k, beta)).collect();
    let mut out = FockPoly::new();
    for (m, x) in p {
        for (k, g) in gb.iter().enumerate() {
            if *g == 0 {
                continue;
            }
            if let Some((mult, rest)) = remove_one(m, k, n) {
                let e = out.entry(rest).or_default();
                *e += x * &Rational::from_int(g * n as i64 * mult as i64);
            }
        }
    }
    out.retain(|_, x| !x.is_zero());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_and_weight() {
        let lat = Lattice::new(vec![vec![2]]).unwrap();
        let k = FockKey::new(vec![1], vec![(0, 2, 1), (0, 1, 1), (0, 1, 1)]);
        assert_eq!(k.parts, vec![(0, 1, 2), (0, 2, 1)]);
        assert_eq!(k.weight(&lat), 1 + 4);
        assert_eq!(k.to_string(), "a0(-1)^2a0(-2)e^[1]");
        let (i, n, rest) = k.peel().unwrap();
        assert_eq!((i, n), (0, 1));
        assert_eq!(rest.parts, vec![(0, 1, 1), (0, 2, 1)]);
    }

    #[test]
    fn annihilation_matches_commutator() {
        let lat = Lattice::new(vec![vec![2]]).unwrap();
        let mut p = FockPoly::new();
        p.insert(vec![(0, 1, 2)], Rational::one());
        let q = poly_annihilate(&lat, &[1], 1, &p);
        // α(1) α(-1)^2 = 2·2 α(-1)
        assert_eq!(q.get(&vec![(0, 1, 1)]), Some(&Rational::from_int(4)));
    }
}
