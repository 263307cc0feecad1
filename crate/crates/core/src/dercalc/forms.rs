use rayon::prelude::*;
use serde::Serialize;

use super::{o_operator, rational_spectrum, trace_of_product, WeightPreservingOperator};
use crate::algebra::{zero_mode_block, VertexAlgebra};
use crate::error::{Error, Result};
use crate::exactlin::{DenseMatrix, Echelon, Rational, Span, SparseVec};

/// `(u, v)_n = tr_{V_n} o(u) o(v)` on the canonical basis of `V₁`.
#[derive(Clone, Debug, Serialize)]
pub struct TraceForm {
    pub n: u32,
    pub labels: Vec<String>,
    pub gram: DenseMatrix,
}

impl TraceForm {
    /// `x^T G y` for coordinate vectors in `V₁`.
    pub fn pair(&self, x: &[Rational], y: &[Rational]) -> Rational {
        let gy = self.gram.mul_vec(y);
        x.iter().zip(&gy).map(|(a, b)| a * b).sum()
    }
}

fn v1_blocks<A: VertexAlgebra + ?Sized>(alg: &A, n: u32) -> Result<Vec<DenseMatrix>> {
    (0..alg.dim(1)).into_par_iter().map(|k| zero_mode_block(alg, &alg.basis_vector(1, k), n)).collect()
}

pub fn trace_form<A: VertexAlgebra + ?Sized>(alg: &A, n: u32) -> Result<TraceForm> {
    if n > alg.cutoff() {
        return Err(Error::Usage(format!("trace form needs n <= N = {}", alg.cutoff())));
    }
    let blocks = v1_blocks(alg, n)?;
    let d = blocks.len();
    let mut gram = DenseMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let t = trace_of_product(&blocks[i], &blocks[j]);
            gram.set(i, j, t.clone());
            gram.set(j, i, t);
        }
    }
    let g = alg.grading();
    Ok(TraceForm { n, labels: g.range(1).map(|i| alg.label(i)).collect(), gram })
}

/// `([u,v],w)_n + (v,[u,w])_n = 0` for all basis triples of `V₁`.
pub fn trace_form_invariant<A: VertexAlgebra + ?Sized>(alg: &A, form: &TraceForm) -> Result<bool> {
    let ad = v1_blocks(alg, 1)?;
    let d = ad.len();
    for adu in &ad {
        for v in 0..d {
            let uv = adu.column(v);
            for w in 0..d {
                let uw = adu.column(w);
                let ev = unit(d, v);
                let ew = unit(d, w);
                if !(&form.pair(&uv, &ew) + &form.pair(&ev, &uw)).is_zero() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn unit(d: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); d];
    v[i] = Rational::one();
    v
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    /// Smallest `n ≤ N` with `det (,)_n ≠ 0`; `None` means no witness up to
    /// the cutoff, which refutes nothing.
    pub n: Option<u32>,
    pub determinant: Option<Rational>,
    pub determinants: Vec<(u32, Rational)>,
}

pub fn nondegeneracy_witness<A: VertexAlgebra + ?Sized>(alg: &A) -> Result<Witness> {
    if alg.dim(1) == 0 {
        return Err(Error::Usage("nondegeneracy witness needs V_1 != 0".into()));
    }
    let mut determinants = Vec::new();
    for n in 0..=alg.cutoff() {
        let det = trace_form(alg, n)?.gram.determinant()?;
        determinants.push((n, det.clone()));
        if !det.is_zero() {
            return Ok(Witness { n: Some(n), determinant: Some(det), determinants });
        }
    }
    Ok(Witness { n: None, determinant: None, determinants })
}

/// `V₁ = 𝔰 ⊕ 𝔱` with `𝔱` the center and `𝔰` the derived algebra of the
/// 0-th product. Vectors are coordinates in the canonical basis of `V₁`.
#[derive(Clone, Debug, Serialize)]
pub struct ReductiveSplit {
    pub labels: Vec<String>,
    /// `structure[i][j]` = coordinates of `(b_i)_0 b_j`.
    pub structure: Vec<Vec<Vec<Rational>>>,
    pub semisimple: Vec<Vec<Rational>>,
    pub toral: Vec<Vec<Rational>>,
    pub direct: bool,
    pub killing_determinant: Rational,
    pub simple_ideals: Vec<Vec<Vec<Rational>>>,
    pub certificate: Option<String>,
}

impl ReductiveSplit {
    pub fn holds(&self) -> bool {
        self.direct && (self.semisimple.is_empty() || !self.killing_determinant.is_zero()) && self.certificate.is_none()
    }
}

fn independent(d: usize, vectors: impl IntoIterator<Item = Vec<Rational>>) -> Vec<Vec<Rational>> {
    let mut ech = Echelon::new(d);
    vectors.into_iter().filter(|v| ech.insert(&SparseVec::from_dense(v))).collect()
}

fn combine(ad: &[DenseMatrix], x: &[Rational], d: usize) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(d, d);
    for (c, a) in x.iter().zip(ad) {
        if !c.is_zero() {
            m = m.add(&a.scale(c));
        }
    }
    m
}

pub fn reductive_split<A: VertexAlgebra + ?Sized>(alg: &A) -> Result<ReductiveSplit> {
    let g = alg.grading();
    let d = alg.dim(1);
    let labels = g.range(1).map(|i| alg.label(i)).collect();
    let ad = v1_blocks(alg, 1)?;
    let structure: Vec<Vec<Vec<Rational>>> = ad.iter().map(|a| (0..d).map(|j| a.column(j)).collect()).collect();

    // x central iff x_0 b_j = 0 for every j
    let mut rows = Vec::new();
    for j in 0..d {
        for r in 0..d {
            rows.push((0..d).map(|i| structure[i][j][r].clone()).collect::<Vec<_>>());
        }
    }
    let toral = if d == 0 { Vec::new() } else { DenseMatrix::from_rows(rows).kernel() };
    let semisimple = independent(d, structure.iter().flatten().cloned());
    let direct = semisimple.len() + toral.len() == d
        && independent(d, semisimple.iter().chain(&toral).cloned()).len() == d;

    let k = semisimple.len();
    let mut killing = DenseMatrix::zeros(k, k);
    let ads: Vec<DenseMatrix> = semisimple.iter().map(|x| combine(&ad, x, d)).collect();
    for i in 0..k {
        for j in 0..k {
            killing.set(i, j, trace_of_product(&ads[i], &ads[j]));
        }
    }
    let killing_determinant = if k == 0 { Rational::one() } else { killing.determinant()? };

    let mut certificate = None;
    if !direct {
        certificate = Some(format!(
            "center (dim {}) and derived algebra (dim {}) do not split V_1 (dim {d})",
            toral.len(),
            semisimple.len()
        ));
    } else if k > 0 && killing_determinant.is_zero() {
        certificate = Some("Killing form of the derived algebra is degenerate".into());
    }
    let simple_ideals = if k == 0 || certificate.is_some() {
        Vec::new()
    } else {
        match simple_ideals(&ads, &semisimple, d) {
            Ok(v) => v,
            Err(msg) => {
                certificate = Some(msg);
                Vec::new()
            }
        }
    };
    Ok(ReductiveSplit { labels, structure, semisimple, toral, direct, killing_determinant, simple_ideals, certificate })
}

/// Splits `𝔰` along the centroid `{T : T[x,y] = [x,Ty]}`, whose dimension is
/// the number of simple ideals.
fn simple_ideals(
    ads: &[DenseMatrix],
    basis: &[Vec<Rational>],
    d: usize,
) -> std::result::Result<Vec<Vec<Vec<Rational>>>, String> {
    let k = basis.len();
    let span = Span::new(d, &basis.iter().map(|v| SparseVec::from_dense(v)).collect::<Vec<_>>())
        .map_err(|e| e.to_string())?;
    // c[a][b] = coordinates of [s_a, s_b] in the basis of 𝔰
    let c: Vec<Vec<Vec<Rational>>> = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| {
                    span.coordinates(&SparseVec::from_dense(&ads[a].mul_vec(&basis[b])))
                        .ok_or_else(|| "derived algebra is not closed".to_string())
                })
                .collect::<std::result::Result<_, _>>()
        })
        .collect::<std::result::Result<_, _>>()?;
    // unknown T[e][f] at index e*k + f
    let mut ech = Echelon::new(k * k);
    for a in 0..k {
        for b in 0..k {
            for e in 0..k {
                let mut row = vec![Rational::zero(); k * k];
                for cc in 0..k {
                    row[e * k + cc] += &c[a][b][cc];
                    row[cc * k + b] -= &c[a][cc][e];
                }
                ech.insert(&SparseVec::from_dense(&row));
            }
        }
    }
    let centroid = ech.null_space();
    if centroid.len() == 1 {
        return Ok(vec![basis.to_vec()]);
    }
    let mut generic = DenseMatrix::zeros(k, k);
    for (i, t) in centroid.iter().enumerate() {
        for (idx, x) in t.iter() {
            let cur = generic.get(idx / k, idx % k).clone();
            generic.set(idx / k, idx % k, &cur + &(x * &Rational::from_int(i as i64 + 1)));
        }
    }
    let spec = rational_spectrum(&generic).ok_or("centroid does not split over the rationals")?;
    if spec.len() != centroid.len() {
        return Err(format!("centroid has dimension {} but {} eigenspaces", centroid.len(), spec.len()));
    }
    Ok(spec
        .into_iter()
        .map(|(_, vecs)| {
            vecs.iter()
                .map(|coef| {
                    let mut v = vec![Rational::zero(); d];
                    for (x, b) in coef.iter().zip(basis) {
                        for (vi, bi) in v.iter_mut().zip(b) {
                            *vi += x * bi;
                        }
                    }
                    v
                })
                .collect()
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct OrthogonalityReport {
    pub n: u32,
    /// `(𝔰, 𝔱)_n` on the split bases.
    pub semisimple_toral: DenseMatrix,
    pub semisimple_toral_zero: bool,
    pub distinct_ideals_zero: bool,
}

fn pairing(form: &TraceForm, xs: &[Vec<Rational>], ys: &[Vec<Rational>]) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(xs.len(), ys.len());
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in ys.iter().enumerate() {
            m.set(i, j, form.pair(x, y));
        }
    }
    m
}

pub fn orthogonality_check<A: VertexAlgebra + ?Sized>(alg: &A, split: &ReductiveSplit, n: u32) -> Result<OrthogonalityReport> {
    let form = trace_form(alg, n)?;
    let st = pairing(&form, &split.semisimple, &split.toral);
    let mut distinct_ideals_zero = true;
    for (i, a) in split.simple_ideals.iter().enumerate() {
        for b in &split.simple_ideals[i + 1..] {
            distinct_ideals_zero &= pairing(&form, a, b).is_zero();
        }
    }
    Ok(OrthogonalityReport { n, semisimple_toral_zero: st.is_zero(), semisimple_toral: st, distinct_ideals_zero })
}

/// `Der = o(𝔤) ⊕ 𝔤^⊥` under `(d, d') = tr_{V_n} d d'`.
#[derive(Clone, Debug, Serialize)]
pub struct DerSplit {
    pub n: u32,
    pub total_dim: usize,
    pub inner_dim: usize,
    pub perp_dim: usize,
    pub inner_contained: bool,
    pub degenerate: bool,
    /// The inner and perpendicular parts meet in zero and together span the
    /// given space.
    pub direct: bool,
    /// `[d, u_0] = (du)_0` for every given `d` and basis `u` of `V₁`.
    pub ideal_property: bool,
    pub ideal_checks: usize,
    pub ideal_failure: Option<String>,
    #[serde(skip)]
    pub perp_basis: Vec<WeightPreservingOperator>,
}

impl DerSplit {
    pub fn holds(&self) -> bool {
        self.inner_contained && !self.degenerate && self.direct && self.ideal_property
    }
}

pub fn der_decomposition<A: VertexAlgebra + ?Sized>(
    alg: &A,
    ops: &[WeightPreservingOperator],
    n: u32,
) -> Result<DerSplit> {
    let d1 = alg.dim(1);
    let inner: Vec<WeightPreservingOperator> =
        (0..d1).map(|k| o_operator(alg, &alg.basis_vector(1, k))).collect::<Result<_>>()?;
    let flat_len = inner.first().or(ops.first()).map_or(0, |o| o.flat_len());
    let mut given = Echelon::new(flat_len);
    for o in ops {
        given.insert(&o.flatten());
    }
    let inner_contained = inner.iter().all(|o| given.contains(&o.flatten()));

    let form = trace_form(alg, n)?;
    let degenerate = d1 > 0 && form.gram.determinant()?.is_zero();

    let mut perp_basis = Vec::new();
    if !degenerate {
        // c ∈ perp iff Σ_i c_i tr(o(u) d_i) = 0 for every basis u
        let mut ech = Echelon::new(ops.len());
        for o in &inner {
            let row: Vec<Rational> = ops.iter().map(|d| o.trace_pairing(d, n)).collect();
            ech.insert(&SparseVec::from_dense(&row));
        }
        for c in ech.null_space() {
            let mut acc = WeightPreservingOperator::zero(alg);
            for (i, x) in c.iter() {
                acc = acc.add(&ops[*i].scale(x));
            }
            perp_basis.push(acc);
        }
    }
    let mut union = Echelon::new(flat_len);
    let mut independent = 0;
    for o in inner.iter().chain(&perp_basis) {
        independent += union.insert(&o.flatten()) as usize;
    }
    let direct = !degenerate
        && independent == inner.len() + perp_basis.len()
        && independent == given.rank()
        && given.rows().iter().all(|r| union.contains(r));

    let g = alg.grading();
    let mut ideal_checks = 0;
    let mut ideal_failure = None;
    'outer: for (i, d) in ops.iter().enumerate() {
        for (k, ou) in inner.iter().enumerate() {
            ideal_checks += 1;
            let du = d.apply(alg, &alg.basis_vector(1, k));
            let mut odu = WeightPreservingOperator::zero(alg);
            for (j, c) in du.terms.iter() {
                odu = odu.add(&inner[j - g.offset(1)].scale(c));
            }
            if d.commutator(ou) != odu {
                let l = alg.label(g.offset(1) + k);
                ideal_failure = Some(format!("[d_{i}, o({l})] differs from o(d_{i} {l})"));
                break 'outer;
            }
        }
    }
    Ok(DerSplit {
        n,
        total_dim: given.rank(),
        inner_dim: inner.len(),
        perp_dim: perp_basis.len(),
        inner_contained,
        degenerate,
        direct,
        ideal_property: ideal_failure.is_none(),
        ideal_checks,
        ideal_failure,
        perp_basis,
    })
}
