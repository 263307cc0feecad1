//! The interface shared by every truncated vertex algebra in the crate.
//!
//! An algebra exposes a graded basis, indexed globally in weight order, and
//! the products `u_n v` of basis elements whose target weight lies in
//! `[0, N]`. Everything else (Virasoro modes, `o(v)`, operator blocks) is
//! derived from that.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactlin::{DenseMatrix, Rational, SparseVec, Span};

/// Offsets of the weight pieces inside the global basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Grading {
    offsets: Vec<usize>,
}

impl Grading {
    pub fn from_dims(dims: &[usize]) -> Self {
        let mut offsets = vec![0];
        for d in dims {
            offsets.push(offsets.last().unwrap() + d);
        }
        Grading { offsets }
    }

    pub fn cutoff(&self) -> u32 {
        (self.offsets.len() - 2) as u32
    }

    pub fn dim(&self, weight: u32) -> usize {
        let w = weight as usize;
        if w + 1 >= self.offsets.len() {
            return 0;
        }
        self.offsets[w + 1] - self.offsets[w]
    }

    pub fn dims(&self) -> Vec<usize> {
        (0..=self.cutoff()).map(|w| self.dim(w)).collect()
    }

    pub fn total(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn range(&self, weight: u32) -> std::ops::Range<usize> {
        let w = weight as usize;
        if w + 1 >= self.offsets.len() {
            let t = self.total();
            return t..t;
        }
        self.offsets[w]..self.offsets[w + 1]
    }

    pub fn offset(&self, weight: u32) -> usize {
        self.range(weight).start
    }

    pub fn weight_of(&self, index: usize) -> u32 {
        assert!(index < self.total(), "basis index {index} out of range");
        (self.offsets.partition_point(|&o| o <= index) - 1) as u32
    }
}

/// A sparse vector in the global basis of some algebra. `truncated` marks
/// results that lost contributions above the cutoff and therefore must not
/// be read as exact.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GradedVector {
    pub terms: SparseVec,
    pub truncated: bool,
}

impl GradedVector {
    pub fn exact(terms: SparseVec) -> Self {
        GradedVector { terms, truncated: false }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(index: usize) -> Self {
        Self::exact(SparseVec::unit(index))
    }

    pub fn truncated_zero() -> Self {
        GradedVector { terms: SparseVec::new(), truncated: true }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_zero()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        GradedVector { terms: self.terms.scale(c), truncated: self.truncated }
    }

    pub fn add_scaled(&self, c: &Rational, other: &GradedVector) -> Self {
        GradedVector {
            terms: self.terms.add_scaled(c, &other.terms),
            truncated: self.truncated || (other.truncated && !c.is_zero()),
        }
    }

    pub fn add(&self, other: &GradedVector) -> Self {
        self.add_scaled(&Rational::one(), other)
    }

    pub fn sub(&self, other: &GradedVector) -> Self {
        self.add_scaled(&-Rational::one(), other)
    }

    pub fn coeff(&self, index: usize) -> Rational {
        self.terms.get(index)
    }

    /// The unique weight of a nonzero homogeneous vector.
    pub fn weight(&self, grading: &Grading) -> Option<u32> {
        let mut it = self.terms.iter().map(|(i, _)| grading.weight_of(*i));
        let w = it.next()?;
        it.all(|x| x == w).then_some(w)
    }

    /// Values of this vector on the weight-`w` piece, as a dense column.
    pub fn block(&self, grading: &Grading, w: u32) -> Vec<Rational> {
        let r = grading.range(w);
        let mut out = vec![Rational::zero(); r.len()];
        for (i, v) in self.terms.iter() {
            if r.contains(i) {
                out[i - r.start] = v.clone();
            }
        }
        out
    }

    pub fn from_block(grading: &Grading, w: u32, coords: &[Rational]) -> Self {
        let off = grading.offset(w);
        Self::exact(SparseVec::from_pairs(coords.iter().enumerate().map(|(i, c)| (off + i, c.clone()))))
    }
}

pub trait VertexAlgebra: Send + Sync {
    fn grading(&self) -> &Grading;

    /// `u_n v` for basis elements `u`, `v`; only called when the target
    /// weight `wt u + wt v - n - 1` lies in `[0, N]`.
    fn basis_product(&self, u: usize, n: i64, v: usize) -> Arc<SparseVec>;

    fn conformal(&self) -> &GradedVector;

    fn central_charge(&self) -> Rational;

    fn label(&self, index: usize) -> String;

    fn cutoff(&self) -> u32 {
        self.grading().cutoff()
    }

    fn dim(&self, weight: u32) -> usize {
        self.grading().dim(weight)
    }

    fn vacuum(&self) -> GradedVector {
        GradedVector::basis(self.grading().offset(0))
    }

    fn weight_of(&self, index: usize) -> u32 {
        self.grading().weight_of(index)
    }

    fn basis_vector(&self, weight: u32, k: usize) -> GradedVector {
        GradedVector::basis(self.grading().offset(weight) + k)
    }
}

/// Bilinear extension of the basis products. Pairs whose target weight
/// exceeds the cutoff are dropped and the result is flagged.
pub fn mode<A: VertexAlgebra + ?Sized>(alg: &A, u: &GradedVector, n: i64, v: &GradedVector) -> GradedVector {
    let g = alg.grading();
    let cutoff = g.cutoff() as i64;
    let mut acc: Vec<(usize, Rational)> = Vec::new();
    let mut truncated = u.truncated || v.truncated;
    for (a, x) in u.terms.iter() {
        let wa = g.weight_of(*a) as i64;
        for (b, y) in v.terms.iter() {
            let t = wa + g.weight_of(*b) as i64 - n - 1;
            if t < 0 {
                continue;
            }
            if t > cutoff {
                truncated = true;
                continue;
            }
            let p = alg.basis_product(*a, n, *b);
            if p.is_zero() {
                continue;
            }
            let c = x * y;
            acc.extend(p.iter().map(|(i, z)| (*i, z * &c)));
        }
    }
    GradedVector { terms: SparseVec::from_pairs(acc), truncated }
}

/// `L(k) v = ω_{k+1} v`.
pub fn virasoro<A: VertexAlgebra + ?Sized>(alg: &A, k: i64, v: &GradedVector) -> GradedVector {
    mode(alg, alg.conformal(), k + 1, v)
}

/// Matrix of the weight-preserving operator `x ↦ u_{wt u - 1} x` on `V_w`,
/// for homogeneous `u`.
pub fn zero_mode_block<A: VertexAlgebra + ?Sized>(alg: &A, u: &GradedVector, w: u32) -> Result<DenseMatrix> {
    let g = alg.grading();
    if u.is_zero() {
        let d = g.dim(w);
        return Ok(DenseMatrix::zeros(d, d));
    }
    let wu = u
        .weight(g)
        .ok_or_else(|| Error::Usage("o(v) needs a homogeneous vector".into()))?;
    operator_block(alg, w, |x| mode(alg, u, wu as i64 - 1, x))
}

/// Matrix of a weight-preserving linear map on `V_w`, given on basis vectors.
pub fn operator_block<A, F>(alg: &A, w: u32, f: F) -> Result<DenseMatrix>
where
    A: VertexAlgebra + ?Sized,
    F: Fn(&GradedVector) -> GradedVector,
{
    operator_block_to(alg, w, w, f)
}

pub fn operator_block_to<A, F>(alg: &A, w: u32, target: u32, f: F) -> Result<DenseMatrix>
where
    A: VertexAlgebra + ?Sized,
    F: Fn(&GradedVector) -> GradedVector,
{
    let g = alg.grading();
    let cols: Vec<Vec<Rational>> = g
        .range(w)
        .map(|i| {
            let y = f(&GradedVector::basis(i));
            if y.truncated {
                return Err(Error::Truncated {
                    cutoff: g.cutoff(),
                    context: format!("operator image of {}", alg.label(i)),
                });
            }
            if y.terms.iter().any(|(j, _)| g.weight_of(*j) != target) {
                return Err(Error::Internal(format!("operator leaves weight {target}")));
            }
            Ok(y.block(g, target))
        })
        .collect::<Result<_>>()?;
    Ok(DenseMatrix::from_columns(g.dim(target), &cols))
}

/// Basis of a subspace of `V_w` given by its coordinate columns, with
/// membership and coordinate extraction.
#[derive(Clone, Debug)]
pub struct Subspace {
    pub weight: u32,
    pub vectors: Vec<GradedVector>,
    span: Span,
    offset: usize,
    ambient: usize,
}

impl Subspace {
    pub fn new(grading: &Grading, weight: u32, vectors: Vec<GradedVector>) -> Result<Self> {
        let offset = grading.offset(weight);
        let ambient = grading.dim(weight);
        let local: Vec<SparseVec> = vectors.iter().map(|v| localize(&v.terms, offset, ambient)).collect::<Result<_>>()?;
        let span = Span::new(ambient, &local)?;
        Ok(Subspace { weight, vectors, span, offset, ambient })
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn coordinates(&self, v: &GradedVector) -> Option<Vec<Rational>> {
        let local = localize(&v.terms, self.offset, self.ambient).ok()?;
        self.span.coordinates(&local)
    }

    pub fn contains(&self, v: &GradedVector) -> bool {
        localize(&v.terms, self.offset, self.ambient).is_ok_and(|l| self.span.contains(&l))
    }

    pub fn combine(&self, coords: &[Rational]) -> GradedVector {
        let mut acc = GradedVector::zero();
        for (c, v) in coords.iter().zip(&self.vectors) {
            acc = acc.add_scaled(c, v);
        }
        acc
    }
}

fn localize(v: &SparseVec, offset: usize, len: usize) -> Result<SparseVec> {
    v.iter()
        .map(|(i, x)| {
            if *i < offset || *i >= offset + len {
                Err(Error::Usage("vector is not in the expected weight space".into()))
            } else {
                Ok((i - offset, x.clone()))
            }
        })
        .collect::<Result<Vec<_>>>()
        .map(SparseVec::from_pairs)
}

/// Localized coordinates of `v` inside `V_w` (entries outside dropped).
pub fn local_coords(grading: &Grading, w: u32, v: &SparseVec) -> SparseVec {
    let r = grading.range(w);
    SparseVec::from_pairs(v.iter().filter(|(i, _)| r.contains(i)).map(|(i, x)| (i - r.start, x.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grading_lookup() {
        let g = Grading::from_dims(&[1, 3, 4]);
        assert_eq!(g.cutoff(), 2);
        assert_eq!(g.range(1), 1..4);
        assert_eq!(g.weight_of(0), 0);
        assert_eq!(g.weight_of(3), 1);
        assert_eq!(g.weight_of(4), 2);
        assert_eq!(g.dim(5), 0);
    }
}
