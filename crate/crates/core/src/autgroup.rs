//! Candidate maps on the generator space `U = ⊕_{m≤n} V_m`, their extension
//! `e(g)` along the basis family `R`, and the residuals of the automorphism
//! conditions at the cutoff.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{local_coords, mode, GradedVector, VertexAlgebra};
use crate::compose::{BasisFamily, EnumerationOrder, Generators};
use crate::error::{Error, Result};
use crate::exactlin::{DenseMatrix, Rational, SparseVec};
use crate::fockspace::{FockKey, LatticeVoa};

/// A weight-graded linear map on `U`, stored as one block per weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateMap {
    blocks: Vec<DenseMatrix>,
}

impl CandidateMap {
    pub fn identity<A: VertexAlgebra + ?Sized>(alg: &A, gen_bound: u32) -> Self {
        CandidateMap { blocks: (0..=gen_bound).map(|w| DenseMatrix::identity(alg.dim(w))).collect() }
    }

    pub fn from_blocks<A: VertexAlgebra + ?Sized>(alg: &A, blocks: Vec<DenseMatrix>) -> Result<Self> {
        for (w, b) in blocks.iter().enumerate() {
            let d = alg.dim(w as u32);
            if b.rows() != d || b.cols() != d {
                return Err(Error::Usage(format!("block for weight {w} must be {d}x{d}")));
            }
        }
        Ok(CandidateMap { blocks })
    }

    /// Splits a matrix on the whole of `U` (canonical order) into weight
    /// blocks; a nonzero entry between different weights is rejected.
    pub fn from_matrix<A: VertexAlgebra + ?Sized>(alg: &A, gen_bound: u32, m: &DenseMatrix) -> Result<Self> {
        let g = alg.grading();
        let total = g.offset(gen_bound) + g.dim(gen_bound);
        if m.rows() != total || m.cols() != total {
            return Err(Error::Usage(format!("candidate matrix must be {total}x{total}")));
        }
        for i in 0..total {
            for j in 0..total {
                if g.weight_of(i) != g.weight_of(j) && !m.get(i, j).is_zero() {
                    return Err(Error::Usage(format!(
                        "candidate is not graded: entry ({i},{j}) mixes weights {} and {}",
                        g.weight_of(j),
                        g.weight_of(i)
                    )));
                }
            }
        }
        let blocks = (0..=gen_bound)
            .map(|w| {
                let r = g.range(w);
                DenseMatrix::from_rows(r.clone().map(|i| r.clone().map(|j| m.get(i, j).clone()).collect()).collect())
            })
            .collect();
        Ok(CandidateMap { blocks })
    }

    pub fn gen_bound(&self) -> u32 {
        (self.blocks.len() - 1) as u32
    }

    pub fn block(&self, w: u32) -> &DenseMatrix {
        &self.blocks[w as usize]
    }

    pub fn blocks(&self) -> &[DenseMatrix] {
        &self.blocks
    }

    pub fn to_matrix(&self) -> DenseMatrix {
        DenseMatrix::block_diagonal(&self.blocks)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &CandidateMap) -> CandidateMap {
        CandidateMap { blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.mul(b)).collect() }
    }

    pub fn inverse(&self) -> Option<CandidateMap> {
        Some(CandidateMap { blocks: self.blocks.iter().map(|b| b.inverse()).collect::<Option<_>>()? })
    }

    pub fn is_invertible(&self) -> bool {
        self.blocks.iter().all(|b| b.inverse().is_some())
    }

    /// `g v` for `v ∈ U`.
    pub fn apply<A: VertexAlgebra + ?Sized>(&self, alg: &A, v: &GradedVector) -> Result<GradedVector> {
        apply_blocks(alg, &self.blocks, v)
    }

    pub fn fixes_vacuum<A: VertexAlgebra + ?Sized>(&self, alg: &A) -> bool {
        self.apply(alg, &alg.vacuum()).is_ok_and(|x| x == alg.vacuum())
    }

    pub fn from_json<A: VertexAlgebra + ?Sized>(alg: &A, gen_bound: u32, file: &CandidateFile) -> Result<Self> {
        let g = alg.grading();
        let total = g.offset(gen_bound) + g.dim(gen_bound);
        let labels: Vec<String> = (0..total).map(|i| alg.label(i)).collect();
        if file.basis.len() != total || file.matrix.len() != total || file.matrix.iter().any(|r| r.len() != total) {
            return Err(Error::Usage(format!("candidate must list {total} basis labels and a {total}x{total} matrix")));
        }
        let perm: Vec<usize> = file
            .basis
            .iter()
            .map(|l| {
                labels.iter().position(|x| x == l).ok_or_else(|| Error::Usage(format!("unknown basis label '{l}'")))
            })
            .collect::<Result<_>>()?;
        let mut m = DenseMatrix::zeros(total, total);
        for (i, row) in file.matrix.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                m.set(perm[i], perm[j], x.clone());
            }
        }
        Self::from_matrix(alg, gen_bound, &m)
    }

    pub fn to_json<A: VertexAlgebra + ?Sized>(&self, alg: &A) -> CandidateFile {
        let g = alg.grading();
        let total = g.offset(self.gen_bound()) + g.dim(self.gen_bound());
        let m = self.to_matrix();
        CandidateFile { basis: (0..total).map(|i| alg.label(i)).collect(), matrix: m.to_rows() }
    }
}

/// `{"basis": [labels], "matrix": [["p/q", …], …]}`, columns are images.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CandidateFile {
    pub basis: Vec<String>,
    pub matrix: Vec<Vec<Rational>>,
}

fn apply_blocks<A: VertexAlgebra + ?Sized>(alg: &A, blocks: &[DenseMatrix], v: &GradedVector) -> Result<GradedVector> {
    let g = alg.grading();
    let mut acc = GradedVector { terms: SparseVec::new(), truncated: v.truncated };
    for (w, b) in blocks.iter().enumerate() {
        let w = w as u32;
        let local = local_coords(g, w, &v.terms);
        if local.is_zero() {
            continue;
        }
        acc = acc.add(&GradedVector::from_block(g, w, &b.mul_sparse(&local)));
    }
    let covered = g.offset(blocks.len() as u32);
    if v.terms.iter().any(|(i, _)| *i >= covered) {
        return Err(Error::Usage("vector lies outside the domain of the map".into()));
    }
    Ok(acc)
}

/// `e(g)` as one block per weight `0..=N`, in the canonical basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionOperator {
    pub blocks: Vec<DenseMatrix>,
}

impl ExtensionOperator {
    pub fn identity<A: VertexAlgebra + ?Sized>(alg: &A) -> Self {
        ExtensionOperator { blocks: (0..=alg.cutoff()).map(|w| DenseMatrix::identity(alg.dim(w))).collect() }
    }

    pub fn apply<A: VertexAlgebra + ?Sized>(&self, alg: &A, v: &GradedVector) -> GradedVector {
        apply_blocks(alg, &self.blocks, v).expect("extension covers every weight")
    }

    pub fn compose(&self, other: &ExtensionOperator) -> ExtensionOperator {
        ExtensionOperator { blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.mul(b)).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.blocks.iter().all(|b| b.is_identity())
    }

    /// The restriction to `U`; equals `g` itself (`res ∘ e = id`).
    pub fn restrict(&self, gen_bound: u32) -> CandidateMap {
        CandidateMap { blocks: self.blocks[..=gen_bound as usize].to_vec() }
    }

    pub fn invertible_weights(&self) -> Vec<bool> {
        self.blocks.iter().map(|b| b.inverse().is_some()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    Vacuum,
    Conformal,
    Condition2,
    Multiplicativity,
}

/// A nonzero value of one of the defining polynomials at `g`.
#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub kind: ResidualKind,
    pub weight: u32,
    pub at: String,
    /// nonzero coordinates of the difference, by basis label
    pub value: Vec<(String, Rational)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub status: String,
    pub accepted: bool,
    pub cutoff: u32,
    pub fixes_vacuum: bool,
    pub fixes_conformal: bool,
    pub invertible: Vec<bool>,
    pub condition2_checked: usize,
    pub multiplicativity_checked: usize,
    pub residual_count: usize,
    pub first_residual: Option<Residual>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<Vec<Residual>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomomorphismReport {
    pub holds: bool,
    pub failing_weights: Vec<u32>,
}

/// Everything needed to extend and test candidate maps on one algebra.
pub struct AutContext<'a, A: VertexAlgebra + ?Sized> {
    pub alg: &'a A,
    pub gen_bound: u32,
    pub family: BasisFamily,
    /// `B_m^{-1}`: canonical coordinates to `R_m` coordinates
    r_inverse: Vec<DenseMatrix>,
}

impl<'a, A: VertexAlgebra + ?Sized> AutContext<'a, A> {
    pub fn new(alg: &'a A, gen_bound: u32) -> Result<Self> {
        Self::with_order(alg, gen_bound, EnumerationOrder::Standard)
    }

    pub fn with_order(alg: &'a A, gen_bound: u32, order: EnumerationOrder) -> Result<Self> {
        let gens = Generators::up_to_weight(alg, gen_bound);
        let family = BasisFamily::compute(alg, &gens, order)?;
        let g = alg.grading();
        let r_inverse = (0..=alg.cutoff())
            .map(|w| {
                let cols: Vec<Vec<Rational>> =
                    family.ids(w).iter().map(|&k| family.closure.kept_values[k].block(g, w)).collect();
                DenseMatrix::from_columns(g.dim(w), &cols)
                    .inverse()
                    .ok_or_else(|| Error::Internal(format!("R_{w} evaluations are not a basis")))
            })
            .collect::<Result<_>>()?;
        Ok(AutContext { alg, gen_bound, family, r_inverse })
    }

    pub fn generators(&self) -> &Generators {
        self.family.generators()
    }

    /// Inverse of the matrix whose columns are the `R_w` evaluations.
    pub fn r_inverse(&self, w: u32) -> &DenseMatrix {
        &self.r_inverse[w as usize]
    }

    /// `μ(g x⃗)` for every kept pair, reusing the value of the pair it extends.
    fn image_values(&self, g: &CandidateMap) -> Result<Vec<GradedVector>> {
        let gens = self.generators();
        let gx: Vec<GradedVector> = gens.vectors.iter().map(|v| g.apply(self.alg, v)).collect::<Result<_>>()?;
        let c = &self.family.closure;
        let mut vals: Vec<GradedVector> = Vec::with_capacity(c.kept.len());
        for &cid in &c.kept {
            let cand = &c.candidates[cid];
            let v = match cand.step {
                None => gx[cand.pair.args[0]].clone(),
                Some((x, m, parent)) => mode(self.alg, &gx[x], m, &vals[parent]),
            };
            if v.truncated {
                return Err(Error::Truncated {
                    cutoff: self.alg.cutoff(),
                    context: format!("evaluating {}", cand.pair.describe(gens)),
                });
            }
            vals.push(v);
        }
        Ok(vals)
    }

    /// `E_m = C_m B_m^{-1}`, with `C_m` the columns `μ(g x⃗)` over `R_m`.
    pub fn extend_map(&self, g: &CandidateMap) -> Result<ExtensionOperator> {
        let vals = self.image_values(g)?;
        Ok(self.extension_from_values(&vals))
    }

    fn extension_from_values(&self, vals: &[GradedVector]) -> ExtensionOperator {
        let gr = self.alg.grading();
        let blocks = (0..=self.alg.cutoff())
            .map(|w| {
                let cols: Vec<Vec<Rational>> = self.family.ids(w).iter().map(|&k| vals[k].block(gr, w)).collect();
                DenseMatrix::from_columns(gr.dim(w), &cols).mul(&self.r_inverse[w as usize])
            })
            .collect();
        ExtensionOperator { blocks }
    }

    fn residual_value(&self, diff: &GradedVector) -> Vec<(String, Rational)> {
        diff.terms.iter().map(|(i, c)| (self.alg.label(*i), c.clone())).collect()
    }

    /// Residuals of `I_𝟙`, `I_ω` and condition (2) on every pair evaluated
    /// by the spanning closure, ordered by (weight, length, modes, args).
    pub fn emit_residuals(&self, g: &CandidateMap) -> Result<(Vec<Residual>, usize)> {
        let vals = self.image_values(g)?;
        let ext = self.extension_from_values(&vals);
        let gens = self.generators();
        let c = &self.family.closure;
        let mut out = Vec::new();
        let mut checked = 0;

        let vac = g.apply(self.alg, &self.alg.vacuum())?;
        let d = vac.sub(&self.alg.vacuum());
        if !d.is_zero() {
            out.push(Residual { kind: ResidualKind::Vacuum, weight: 0, at: "g(1) - 1".into(), value: self.residual_value(&d) });
        }
        let omega = self.alg.conformal();
        let d = ext.apply(self.alg, omega).sub(omega);
        if !d.is_zero() {
            out.push(Residual {
                kind: ResidualKind::Conformal,
                weight: 2,
                at: "e(g)(ω) - ω".into(),
                value: self.residual_value(&d),
            });
        }

        let gx: Vec<GradedVector> = gens.vectors.iter().map(|v| g.apply(self.alg, v)).collect::<Result<_>>()?;
        let mut order: Vec<usize> = (0..c.candidates.len()).collect();
        order.sort_by(|&a, &b| {
            let (ca, cb) = (&c.candidates[a], &c.candidates[b]);
            (ca.weight, ca.pair.len(), &ca.pair).cmp(&(cb.weight, cb.pair.len(), &cb.pair))
        });
        let found: Vec<Option<Residual>> = order
            .par_iter()
            .map(|&cid| {
                let cand = &c.candidates[cid];
                let (plain, imaged) = match cand.step {
                    None => (gens.vectors[cand.pair.args[0]].clone(), gx[cand.pair.args[0]].clone()),
                    Some((x, m, parent)) => (
                        mode(self.alg, &gens.vectors[x], m, &c.kept_values[parent]),
                        mode(self.alg, &gx[x], m, &vals[parent]),
                    ),
                };
                let diff = imaged.sub(&ext.apply(self.alg, &plain));
                (!diff.is_zero()).then(|| Residual {
                    kind: ResidualKind::Condition2,
                    weight: cand.weight,
                    at: cand.pair.describe(gens),
                    value: self.residual_value(&diff),
                })
            })
            .collect();
        checked += order.len();
        out.extend(found.into_iter().flatten());
        Ok((out, checked))
    }

    /// `e(g)(u_n v) = (e(g)u)_n (e(g)v)` for all basis `u`, `v` and `n` with
    /// target weight in `[0, N]`. Returns violations in block order and the
    /// number of triples checked.
    pub fn multiplicativity(&self, ext: &ExtensionOperator) -> (Vec<Residual>, usize) {
        let alg = self.alg;
        let gr = alg.grading();
        let n = alg.cutoff() as i64;
        let cols: Vec<Vec<SparseVec>> = ext
            .blocks
            .iter()
            .map(|b| (0..b.cols()).map(|j| SparseVec::from_dense(&b.column(j))).collect())
            .collect();
        let mut blocks = Vec::new();
        for p in 0..=n {
            for q in 0..=n {
                for r in 0..=n {
                    blocks.push((p as u32, q as u32, p + q - r - 1, r as u32));
                }
            }
        }
        let results: Vec<(Option<Residual>, usize)> = blocks
            .par_iter()
            .map(|&(p, q, k, r)| {
                let (dp, dq) = (gr.dim(p), gr.dim(q));
                let (op, oq) = (gr.offset(p), gr.offset(q));
                let t: Vec<Vec<SparseVec>> = (0..dp)
                    .map(|i| (0..dq).map(|j| local_coords(gr, r, &alg.basis_product(op + i, k, oq + j))).collect())
                    .collect();
                // S(i', j) = Σ_{j'} E_q[j', j] T(i', j')
                let s: Vec<Vec<SparseVec>> = (0..dp)
                    .map(|i2| {
                        (0..dq)
                            .map(|j| {
                                let mut acc = SparseVec::new();
                                for (j2, c) in cols[q as usize][j].iter() {
                                    acc = acc.add_scaled(c, &t[i2][*j2]);
                                }
                                acc
                            })
                            .collect()
                    })
                    .collect();
                let mut count = 0;
                for i in 0..dp {
                    for j in 0..dq {
                        count += 1;
                        let mut rhs = SparseVec::new();
                        for (i2, c) in cols[p as usize][i].iter() {
                            rhs = rhs.add_scaled(c, &s[*i2][j]);
                        }
                        let mut lhs = SparseVec::new();
                        for (x, c) in t[i][j].iter() {
                            lhs = lhs.add_scaled(c, &cols[r as usize][*x]);
                        }
                        if lhs != rhs {
                            let d = GradedVector::exact(localized_to_global(gr.offset(r), &lhs.add_scaled(&-Rational::one(), &rhs)));
                            return (
                                Some(Residual {
                                    kind: ResidualKind::Multiplicativity,
                                    weight: r,
                                    at: format!("u = {}, n = {k}, v = {}", alg.label(op + i), alg.label(oq + j)),
                                    value: d.terms.iter().map(|(x, c)| (alg.label(*x), c.clone())).collect(),
                                }),
                                count,
                            );
                        }
                    }
                }
                (None, count)
            })
            .collect();
        let checked = results.iter().map(|r| r.1).sum();
        (results.into_iter().filter_map(|r| r.0).collect(), checked)
    }

    pub fn check_automorphism(&self, g: &CandidateMap) -> Result<Verdict> {
        self.check_with(g, false)
    }

    /// As `check_automorphism`, optionally keeping every residual.
    pub fn check_with(&self, g: &CandidateMap, keep_all: bool) -> Result<Verdict> {
        let cutoff = self.alg.cutoff();
        let ext = self.extend_map(g)?;
        let (mut residuals, condition2_checked) = self.emit_residuals(g)?;
        let (mult, multiplicativity_checked) = self.multiplicativity(&ext);
        residuals.extend(mult);
        let invertible = ext.invertible_weights();
        let fixes_vacuum = g.fixes_vacuum(self.alg);
        let omega = self.alg.conformal();
        let fixes_conformal = ext.apply(self.alg, omega) == *omega;
        let accepted = residuals.is_empty() && invertible.iter().all(|&b| b) && fixes_vacuum && fixes_conformal;
        Ok(Verdict {
            status: if accepted { "accepted-at-cutoff".into() } else { "rejected".into() },
            accepted,
            cutoff,
            fixes_vacuum,
            fixes_conformal,
            invertible,
            condition2_checked,
            multiplicativity_checked,
            residual_count: residuals.len(),
            first_residual: residuals.first().cloned(),
            residuals: keep_all.then_some(residuals),
        })
    }

    /// `e(gh) = e(g) e(h)` blockwise.
    pub fn homomorphism_check(&self, g: &CandidateMap, h: &CandidateMap) -> Result<HomomorphismReport> {
        let egh = self.extend_map(&g.compose(h))?;
        let prod = self.extend_map(g)?.compose(&self.extend_map(h)?);
        let failing: Vec<u32> =
            (0..egh.blocks.len()).filter(|&w| egh.blocks[w] != prod.blocks[w]).map(|w| w as u32).collect();
        Ok(HomomorphismReport { holds: failing.is_empty(), failing_weights: failing })
    }
}

fn localized_to_global(offset: usize, v: &SparseVec) -> SparseVec {
    v.iter().map(|(i, c)| (offset + i, c.clone())).collect()
}

/// Restriction to `U` of the lift of `-1` on the lattice:
/// `α(-n)⋯e^λ ↦ (-1)^{parts} α(-n)⋯e^{-λ}`.
pub fn weyl_reflection(voa: &LatticeVoa, gen_bound: u32) -> CandidateMap {
    let blocks = (0..=gen_bound)
        .map(|w| {
            let r = voa.grading().range(w);
            let mut m = DenseMatrix::zeros(r.len(), r.len());
            for i in r.clone() {
                let k = voa.key(i);
                let neg = FockKey { charge: k.charge.iter().map(|x| -x).collect(), parts: k.parts.clone() };
                let j = voa.index_of(&neg).expect("negated key has the same weight");
                let parity: u32 = k.parts.iter().map(|p| p.2).sum();
                let s = if parity % 2 == 0 { 1 } else { -1 };
                m.set(j - r.start, i - r.start, Rational::from_int(s));
            }
            m
        })
        .collect();
    CandidateMap { blocks }
}

/// The torus element scaling `e^λ`-sectors by `Π s_i^{λ_i}`.
pub fn torus_element(voa: &LatticeVoa, gen_bound: u32, s: &[Rational]) -> CandidateMap {
    let blocks = (0..=gen_bound)
        .map(|w| {
            let r = voa.grading().range(w);
            let mut m = DenseMatrix::zeros(r.len(), r.len());
            for i in r.clone() {
                let k = voa.key(i);
                let mut c = Rational::one();
                for (x, e) in s.iter().zip(&k.charge) {
                    c = c * x.pow(*e as i32);
                }
                m.set(i - r.start, i - r.start, c);
            }
            m
        })
        .collect();
    CandidateMap { blocks }
}

/// The identity on `U` except that one basis key is scaled by `c`.
pub fn scale_key(voa: &LatticeVoa, gen_bound: u32, key: &FockKey, c: &Rational) -> Result<CandidateMap> {
    let i = voa.index_of(key).ok_or_else(|| Error::Usage(format!("unknown key {key}")))?;
    let w = voa.weight_of(i);
    if w > gen_bound {
        return Err(Error::Usage(format!("{key} is not in U")));
    }
    let mut g = CandidateMap::identity(voa, gen_bound);
    let off = voa.grading().offset(w);
    g.blocks[w as usize].set(i - off, i - off, c.clone());
    Ok(g)
}
