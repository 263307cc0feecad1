//! Weight-preserving operators, the derivation space at the cutoff, inner
//! derivations `o(v) = v_{wt v - 1}`, and the radical of `o`.

mod forms;

pub use forms::{
    der_decomposition, nondegeneracy_witness, orthogonality_check, reductive_split, trace_form, trace_form_invariant, DerSplit,
    OrthogonalityReport, ReductiveSplit, TraceForm, Witness,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{local_coords, mode, operator_block_to, virasoro, zero_mode_block, GradedVector, VertexAlgebra};
use crate::autgroup::{AutContext, CandidateMap, Verdict};
use crate::error::{Error, Result};
use crate::exactlin::{DenseMatrix, Echelon, Rational, Span, SparseVec};

/// One square block per weight `0..=N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightPreservingOperator {
    pub blocks: Vec<DenseMatrix>,
}

impl WeightPreservingOperator {
    pub fn zero<A: VertexAlgebra + ?Sized>(alg: &A) -> Self {
        let blocks = (0..=alg.cutoff()).map(|w| DenseMatrix::zeros(alg.dim(w), alg.dim(w))).collect();
        WeightPreservingOperator { blocks }
    }

    pub fn identity<A: VertexAlgebra + ?Sized>(alg: &A) -> Self {
        WeightPreservingOperator { blocks: (0..=alg.cutoff()).map(|w| DenseMatrix::identity(alg.dim(w))).collect() }
    }

    /// `L(0)`: multiplication by `m` on `V_m`.
    pub fn grading_operator<A: VertexAlgebra + ?Sized>(alg: &A) -> Self {
        let blocks = (0..=alg.cutoff())
            .map(|w| DenseMatrix::scalar(alg.dim(w), &Rational::from_int(w as i64)))
            .collect();
        WeightPreservingOperator { blocks }
    }

    pub fn block(&self, w: u32) -> &DenseMatrix {
        &self.blocks[w as usize]
    }

    pub fn apply<A: VertexAlgebra + ?Sized>(&self, alg: &A, v: &GradedVector) -> GradedVector {
        let g = alg.grading();
        let mut acc = GradedVector { terms: SparseVec::new(), truncated: v.truncated };
        for (w, b) in self.blocks.iter().enumerate() {
            let local = local_coords(g, w as u32, &v.terms);
            if !local.is_zero() {
                acc = acc.add(&GradedVector::from_block(g, w as u32, &b.mul_sparse(&local)));
            }
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        WeightPreservingOperator { blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        WeightPreservingOperator { blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        WeightPreservingOperator { blocks: self.blocks.iter().map(|a| a.scale(c)).collect() }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        WeightPreservingOperator {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.commutator(b)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|b| b.is_zero())
    }

    /// All blocks concatenated row-major, for linear algebra on operators.
    pub fn flatten(&self) -> SparseVec {
        let mut pairs = Vec::new();
        let mut off = 0;
        for b in &self.blocks {
            for i in 0..b.rows() {
                for j in 0..b.cols() {
                    let x = b.get(i, j);
                    if !x.is_zero() {
                        pairs.push((off + i * b.cols() + j, x.clone()));
                    }
                }
            }
            off += b.rows() * b.cols();
        }
        SparseVec::from_pairs(pairs)
    }

    pub fn flat_len(&self) -> usize {
        self.blocks.iter().map(|b| b.rows() * b.cols()).sum()
    }

    /// `tr_{V_n}(self · other)`.
    pub fn trace_pairing(&self, other: &Self, n: u32) -> Rational {
        trace_of_product(&self.blocks[n as usize], &other.blocks[n as usize])
    }

    pub fn restrict<A: VertexAlgebra + ?Sized>(&self, alg: &A, gen_bound: u32) -> Result<CandidateMap> {
        CandidateMap::from_blocks(alg, self.blocks[..=gen_bound as usize].to_vec())
    }
}

pub(crate) fn trace_of_product(a: &DenseMatrix, b: &DenseMatrix) -> Rational {
    let mut t = Rational::zero();
    for i in 0..a.rows() {
        for k in 0..a.cols() {
            let x = a.get(i, k);
            if !x.is_zero() {
                let y = b.get(k, i);
                if !y.is_zero() {
                    t += x * y;
                }
            }
        }
    }
    t
}

/// `o(v)` on every `V_m`, `m ≤ N`.
pub fn o_operator<A: VertexAlgebra + ?Sized>(alg: &A, v: &GradedVector) -> Result<WeightPreservingOperator> {
    if !v.is_zero() && v.weight(alg.grading()).is_none() {
        return Err(Error::Usage("o(v) needs a homogeneous vector".into()));
    }
    let blocks = (0..=alg.cutoff())
        .into_par_iter()
        .map(|w| zero_mode_block(alg, v, w))
        .collect::<Result<_>>()?;
    Ok(WeightPreservingOperator { blocks })
}

/// `o(v) x`, computed without building the full operator.
pub fn o_apply<A: VertexAlgebra + ?Sized>(alg: &A, v: &GradedVector, x: &GradedVector) -> GradedVector {
    let g = alg.grading();
    let mut acc = GradedVector::zero();
    for w in 0..=g.cutoff() {
        let part = GradedVector::exact(local_coords(g, w, &v.terms)).terms;
        if part.is_zero() {
            continue;
        }
        let part = GradedVector::exact(SparseVec::from_pairs(part.iter().map(|(i, c)| (i + g.offset(w), c.clone()))));
        acc = acc.add(&mode(alg, &part, w as i64 - 1, x));
    }
    acc
}

/// Both sides of `d(u_n w) = (du)_n w + u_n(dw)` for an operator given as a
/// function.
pub fn leibniz_sides<A, F>(alg: &A, d: F, u: &GradedVector, n: i64, w: &GradedVector) -> (GradedVector, GradedVector)
where
    A: VertexAlgebra + ?Sized,
    F: Fn(&GradedVector) -> GradedVector,
{
    let lhs = d(&mode(alg, u, n, w));
    let rhs = mode(alg, &d(u), n, w).add(&mode(alg, u, n, &d(w)));
    (lhs, rhs)
}

/// One row per output coordinate, one column per unknown.
fn rows_of(vals: Vec<(usize, GradedVector)>) -> Vec<SparseVec> {
    let mut by_coord: std::collections::BTreeMap<usize, Vec<(usize, Rational)>> = std::collections::BTreeMap::new();
    for (t, v) in vals {
        for (p, x) in v.terms.iter() {
            by_coord.entry(*p).or_default().push((t, x.clone()));
        }
    }
    by_coord.into_values().map(SparseVec::from_pairs).filter(|r| !r.is_zero()).collect()
}

/// In-range modes `n` for `u_n w` with `wt u = a`, `wt w = b`.
fn mode_range(a: u32, b: u32, cutoff: u32) -> std::ops::RangeInclusive<i64> {
    let s = (a + b) as i64;
    (s - 1 - cutoff as i64)..=(s - 1)
}

#[derive(Clone, Debug, Serialize)]
pub struct LeibnizViolation {
    pub u: String,
    pub n: i64,
    pub w: String,
    pub lhs: Vec<(String, Rational)>,
    pub rhs: Vec<(String, Rational)>,
}

fn labelled<A: VertexAlgebra + ?Sized>(alg: &A, v: &GradedVector) -> Vec<(String, Rational)> {
    v.terms.iter().map(|(i, c)| (alg.label(*i), c.clone())).collect()
}

/// Tests the Leibniz rule for `u` in the given list, every basis `w` and
/// every in-range `n`, preceded by `d𝟙 = 0`, `dω = 0` when `fixed` is set.
/// Returns the number of identities checked and the first failure.
pub fn check_leibniz<A, F>(alg: &A, d: F, us: &[GradedVector], fixed: bool) -> (usize, Option<LeibnizViolation>)
where
    A: VertexAlgebra + ?Sized,
    F: Fn(&GradedVector) -> GradedVector + Sync,
{
    let g = alg.grading();
    let cutoff = alg.cutoff();
    let zero_at = |v: &GradedVector, name: &str| {
        let dv = d(v);
        (!dv.is_zero()).then(|| LeibnizViolation {
            u: name.into(),
            n: 0,
            w: String::new(),
            lhs: labelled(alg, &dv),
            rhs: Vec::new(),
        })
    };
    let mut checks = 0;
    if fixed {
        if let Some(v) = zero_at(&alg.vacuum(), "vacuum") {
            return (1, Some(v));
        }
        if let Some(v) = zero_at(alg.conformal(), "conformal") {
            return (2, Some(v));
        }
        checks = 2;
    }
    for u in us {
        let Some(wu) = u.weight(g) else { continue };
        let found = (0..g.total())
            .into_par_iter()
            .map(|j| {
                let w = GradedVector::basis(j);
                let ww = g.weight_of(j);
                let mut count = 0;
                for n in mode_range(wu, ww, cutoff) {
                    count += 1;
                    let (lhs, rhs) = leibniz_sides(alg, &d, u, n, &w);
                    if lhs.truncated || rhs.truncated {
                        continue;
                    }
                    if lhs.terms != rhs.terms {
                        return (count, Some((j, n, lhs, rhs)));
                    }
                }
                (count, None)
            })
            .collect::<Vec<_>>();
        checks += found.iter().map(|x| x.0).sum::<usize>();
        if let Some((j, n, lhs, rhs)) = found.into_iter().find_map(|x| x.1) {
            let ul = labelled(alg, u).iter().map(|(l, c)| format!("{c}*{l}")).collect::<Vec<_>>().join(" + ");
            return (
                checks,
                Some(LeibnizViolation { u: ul, n, w: alg.label(j), lhs: labelled(alg, &lhs), rhs: labelled(alg, &rhs) }),
            );
        }
    }
    (checks, None)
}

/// Number of basis vectors of weight `n + 1` used to cross-check solved
/// derivations against the full Leibniz rule.
pub const CROSS_CHECK_SAMPLES: usize = 4;

/// Exact basis of the graded derivations at the cutoff, parametrized by
/// their blocks on `U` and extended to all of `V` by the Leibniz rule.
#[derive(Clone, Debug)]
pub struct DerivationSpace {
    pub gen_bound: u32,
    pub basis: Vec<WeightPreservingOperator>,
    /// Number of free entries in the `U` blocks.
    pub unknowns: usize,
    /// `(cutoff, dimension)` when constraints are restricted to weights up to
    /// the given cutoff.
    pub dims_by_cutoff: Vec<(u32, usize)>,
    /// Leibniz checks on sampled basis `u` of weight `gen_bound + 1`.
    pub cross_checks: usize,
    pub cross_check_failure: Option<LeibnizViolation>,
}

impl DerivationSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn stable(&self) -> bool {
        self.dims_by_cutoff.windows(2).all(|w| w[0].1 == w[1].1)
    }

    fn span(&self) -> Result<Span> {
        let len = self.basis.first().map_or(0, |d| d.flat_len());
        Span::new(len, &self.basis.iter().map(|d| d.flatten()).collect::<Vec<_>>())
    }

    pub fn contains(&self, op: &WeightPreservingOperator) -> Result<bool> {
        Ok(self.span()?.contains(&op.flatten()))
    }

    pub fn coordinates(&self, op: &WeightPreservingOperator) -> Result<Option<Vec<Rational>>> {
        Ok(self.span()?.coordinates(&op.flatten()))
    }

    /// Every `[d_i, d_j]` lies in the span.
    pub fn closed_under_commutator(&self) -> Result<bool> {
        let span = self.span()?;
        let k = self.basis.len();
        let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
        Ok(pairs.par_iter().all(|&(i, j)| span.contains(&self.basis[i].commutator(&self.basis[j]).flatten())))
    }

    /// `o(V₁) ⊆ Der`, with each `o(v)` computed as a full operator.
    pub fn contains_inner<A: VertexAlgebra + ?Sized>(&self, alg: &A) -> Result<bool> {
        let span = self.span()?;
        for k in 0..alg.dim(1) {
            let o = o_operator(alg, &alg.basis_vector(1, k))?;
            if !span.contains(&o.flatten()) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Solves `d𝟙 = 0`, `dω = 0`, `d(u_n w) = (du)_n w + u_n(dw)` for graded `d`,
/// `u` in the basis of `U = ⊕_{m≤n} V_m` and all basis `w`, in-range `n`.
pub fn solve_derivations<A: VertexAlgebra + ?Sized>(alg: &A, gen_bound: u32) -> Result<DerivationSpace> {
    let ctx = AutContext::new(alg, gen_bound)?;
    solve_with_context(&ctx)
}

pub fn solve_with_context<A: VertexAlgebra + ?Sized>(ctx: &AutContext<'_, A>) -> Result<DerivationSpace> {
    let alg = ctx.alg;
    let g = alg.grading();
    let cutoff = alg.cutoff();
    let gen_bound = ctx.gen_bound;

    // unknown (w, i, j) is entry (i, j) of the block on V_w, w = 1..=n
    let mut block_off = vec![0usize; gen_bound as usize + 1];
    let mut k_total = 0;
    for w in 1..=gen_bound {
        block_off[w as usize] = k_total;
        k_total += g.dim(w) * g.dim(w);
    }
    // d y for y ∈ U, one vector per unknown
    let apply_raw = |y: &GradedVector| -> Vec<(usize, GradedVector)> {
        let mut out = Vec::new();
        for w in 1..=gen_bound {
            let d = g.dim(w);
            for (j, c) in local_coords(g, w, &y.terms).iter() {
                for i in 0..d {
                    out.push((block_off[w as usize] + i * d + j, GradedVector::basis(g.offset(w) + i).scale(c)));
                }
            }
        }
        out
    };

    // first pass: the Leibniz rule among elements of U with values in U
    let gens = ctx.generators();
    let mut inside = Echelon::new(k_total);
    for (xi, x) in gens.vectors.iter().enumerate() {
        let dx = apply_raw(x);
        for (wi, w) in gens.vectors.iter().enumerate() {
            let dw = apply_raw(w);
            let (a, b) = (gens.weights[xi], gens.weights[wi]);
            for n in mode_range(a, b, gen_bound) {
                let y = mode(alg, x, n, w);
                let mut terms = apply_raw(&y);
                for (t, v) in &dx {
                    terms.push((*t, mode(alg, v, n, w).scale(&-Rational::one())));
                }
                for (t, v) in &dw {
                    terms.push((*t, mode(alg, x, n, v).scale(&-Rational::one())));
                }
                for r in rows_of(terms) {
                    inside.insert(&r);
                }
            }
        }
    }
    // the surviving directions become the parameters of the second pass
    let params = inside.null_space();
    let k_params = params.len();
    let combine_params = |raw: Vec<(usize, GradedVector)>| -> Vec<(usize, GradedVector)> {
        let mut acc: std::collections::BTreeMap<usize, GradedVector> = std::collections::BTreeMap::new();
        for (t, v) in raw {
            for (p, z) in params.iter().enumerate() {
                let c = z.get(t);
                if !c.is_zero() {
                    let e = acc.entry(p).or_insert_with(GradedVector::zero);
                    *e = e.add_scaled(&c, &v);
                }
            }
        }
        acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
    };
    let dgen: Vec<Vec<(usize, GradedVector)>> = gens.vectors.iter().map(|x| combine_params(apply_raw(x))).collect();

    // d on every kept pair via its parent
    let c = &ctx.family.closure;
    let mut dvals: Vec<Vec<(usize, GradedVector)>> = Vec::with_capacity(c.kept.len());
    for &cid in &c.kept {
        let cand = &c.candidates[cid];
        let v = match cand.step {
            None => dgen[cand.pair.args[0]].clone(),
            Some((x, m, parent)) => {
                let mut acc: std::collections::BTreeMap<usize, GradedVector> = std::collections::BTreeMap::new();
                for (t, dx) in &dgen[x] {
                    let y = mode(alg, dx, m, &c.kept_values[parent]);
                    let e = acc.entry(*t).or_insert_with(GradedVector::zero);
                    *e = e.add(&y);
                }
                for (t, dp) in &dvals[parent] {
                    let y = mode(alg, &gens.vectors[x], m, dp);
                    let e = acc.entry(*t).or_insert_with(GradedVector::zero);
                    *e = e.add(&y);
                }
                acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
            }
        };
        if v.iter().any(|(_, y)| y.truncated) {
            return Err(Error::Truncated { cutoff, context: "extending a derivation along R".into() });
        }
        dvals.push(v);
    }

    // D_w(t) = C_w(t) B_w^{-1}
    let dblocks: Vec<Vec<(usize, DenseMatrix)>> = (0..=cutoff)
        .map(|w| {
            let ids = ctx.family.ids(w);
            let dim = g.dim(w);
            let mut per_t: std::collections::BTreeMap<usize, Vec<Vec<Rational>>> = std::collections::BTreeMap::new();
            for (col, &kid) in ids.iter().enumerate() {
                for (t, y) in &dvals[kid] {
                    let cols = per_t.entry(*t).or_insert_with(|| vec![vec![Rational::zero(); dim]; ids.len()]);
                    cols[col] = y.block(g, w);
                }
            }
            per_t
                .into_iter()
                .map(|(t, cols)| (t, DenseMatrix::from_columns(dim, &cols).mul(ctx.r_inverse(w))))
                .filter(|(_, m)| !m.is_zero())
                .collect()
        })
        .collect();

    let apply_t = |y: &GradedVector| -> Vec<(usize, GradedVector)> {
        let mut acc: std::collections::BTreeMap<usize, GradedVector> = std::collections::BTreeMap::new();
        for w in 0..=cutoff {
            let local = local_coords(g, w, &y.terms);
            if local.is_zero() {
                continue;
            }
            for (t, m) in &dblocks[w as usize] {
                let z = GradedVector::from_block(g, w, &m.mul_sparse(&local));
                let e = acc.entry(*t).or_insert_with(GradedVector::zero);
                *e = e.add(&z);
            }
        }
        acc.into_iter().collect()
    };

    let omega_rows = rows_of(apply_t(alg.conformal()));
    let low_cut = cutoff.saturating_sub(1);

    let per_w: Vec<(Echelon, Echelon)> = (0..g.total())
        .into_par_iter()
        .map(|j| {
            let mut full = Echelon::new(k_params);
            let mut low = Echelon::new(k_params);
            let w = GradedVector::basis(j);
            let ww = g.weight_of(j);
            let dw = apply_t(&w);
            for (xi, x) in gens.vectors.iter().enumerate() {
                let wx = gens.weights[xi];
                for n in mode_range(wx, ww, cutoff) {
                    let target = (wx + ww) as i64 - n - 1;
                    let y = mode(alg, x, n, &w);
                    let mut terms: Vec<(usize, GradedVector)> = apply_t(&y);
                    for (t, dx) in &dgen[xi] {
                        terms.push((*t, mode(alg, dx, n, &w).scale(&-Rational::one())));
                    }
                    for (t, dv) in &dw {
                        terms.push((*t, mode(alg, x, n, dv).scale(&-Rational::one())));
                    }
                    let in_low = ww <= low_cut && wx <= low_cut && target <= low_cut as i64;
                    for r in rows_of(terms) {
                        full.insert(&r);
                        if in_low {
                            low.insert(&r);
                        }
                    }
                }
            }
            (full, low)
        })
        .collect();

    let mut full = Echelon::new(k_params);
    let mut low = Echelon::new(k_params);
    for r in &omega_rows {
        full.insert(r);
        low.insert(r);
    }
    for (f, l) in &per_w {
        for r in f.rows() {
            full.insert(r);
        }
        for r in l.rows() {
            low.insert(r);
        }
    }

    let basis: Vec<WeightPreservingOperator> = full
        .null_space()
        .into_iter()
        .map(|k| {
            let blocks = (0..=cutoff)
                .map(|w| {
                    let dim = g.dim(w);
                    let mut m = DenseMatrix::zeros(dim, dim);
                    for (t, b) in &dblocks[w as usize] {
                        let c = k.get(*t);
                        if !c.is_zero() {
                            m = m.add(&b.scale(&c));
                        }
                    }
                    m
                })
                .collect();
            WeightPreservingOperator { blocks }
        })
        .collect();

    let mut dims_by_cutoff = Vec::new();
    if cutoff > gen_bound + 1 {
        dims_by_cutoff.push((low_cut, k_params - low.rank()));
    }
    dims_by_cutoff.push((cutoff, basis.len()));

    let mut cross_checks = 0;
    let mut cross_check_failure = None;
    if gen_bound < cutoff {
        let r = g.range(gen_bound + 1);
        let step = r.len().div_ceil(CROSS_CHECK_SAMPLES).max(1);
        let us: Vec<GradedVector> = r.step_by(step).map(GradedVector::basis).collect();
        for d in &basis {
            let (n, f) = check_leibniz(alg, |v| d.apply(alg, v), &us, true);
            cross_checks += n;
            if f.is_some() && cross_check_failure.is_none() {
                cross_check_failure = f;
            }
        }
    }

    Ok(DerivationSpace { gen_bound, basis, unknowns: k_total, dims_by_cutoff, cross_checks, cross_check_failure })
}

#[derive(Clone, Debug, Serialize)]
pub struct QuasiPrimaryObstruction {
    pub weight: u32,
    pub vector: Vec<(String, Rational)>,
    pub violation: Option<LeibnizViolation>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InnerReport {
    pub v1_dim: usize,
    pub inner_checks: usize,
    pub inner_failure: Option<LeibnizViolation>,
    pub quasi_primary: Vec<QuasiPrimaryObstruction>,
}

impl InnerReport {
    pub fn passed(&self) -> bool {
        self.inner_failure.is_none() && self.quasi_primary.iter().all(|q| q.violation.is_some())
    }
}

/// Basis of `Ker L(1) ∩ V_w`.
pub fn quasi_primaries<A: VertexAlgebra + ?Sized>(alg: &A, w: u32) -> Result<Vec<GradedVector>> {
    if w == 0 {
        return Ok(vec![alg.vacuum()]);
    }
    let g = alg.grading();
    let m = operator_block_to(alg, w, w - 1, |x| virasoro(alg, 1, x))?;
    Ok(m.kernel().into_iter().map(|k| GradedVector::from_block(g, w, &k)).collect())
}

/// `o(v)` for `v ∈ V₁` obeys the Leibniz rule against `U`; every
/// quasi-primary `v` of weight `2..=max_weight` violates it somewhere.
pub fn inner_test<A: VertexAlgebra + ?Sized>(alg: &A, gen_bound: u32, max_weight: u32) -> Result<InnerReport> {
    let g = alg.grading();
    let us: Vec<GradedVector> = (0..=gen_bound.min(alg.cutoff())).flat_map(|w| g.range(w)).map(GradedVector::basis).collect();
    let mut inner_checks = 0;
    let mut inner_failure = None;
    for k in 0..alg.dim(1) {
        let v = alg.basis_vector(1, k);
        let (n, f) = check_leibniz(alg, |x| o_apply(alg, &v, x), &us, true);
        inner_checks += n;
        if f.is_some() {
            inner_failure = f;
            break;
        }
    }
    let mut quasi_primary = Vec::new();
    for w in 2..=max_weight.min(alg.cutoff()) {
        for v in quasi_primaries(alg, w)? {
            let (_, violation) = check_leibniz(alg, |x| o_apply(alg, &v, x), &us, false);
            quasi_primary.push(QuasiPrimaryObstruction { weight: w, vector: labelled(alg, &v), violation });
        }
    }
    Ok(InnerReport { v1_dim: alg.dim(1), inner_checks, inner_failure, quasi_primary })
}

#[derive(Clone, Debug, Serialize)]
pub struct RadicalReport {
    pub cutoff: u32,
    pub n_prime: u32,
    pub inclusion_checks: usize,
    pub inclusion_holds: bool,
    /// `c` with `o(L(-1)v) = c·o(v)` whenever `o(v) ≠ 0`, as `c + wt v`;
    /// every entry is `0`.
    pub coefficient_offsets: Vec<Rational>,
    pub kernel_dim: usize,
    pub image_dim: usize,
    pub dims_match: bool,
}

impl RadicalReport {
    pub fn passed(&self) -> bool {
        self.inclusion_holds && self.dims_match && self.coefficient_offsets.iter().all(|c| c.is_zero())
    }
}

/// `o(v)` restricted to `⊕_{k≤n'} V_k`, flattened.
fn o_restricted<A: VertexAlgebra + ?Sized>(alg: &A, v: &GradedVector, n_prime: u32) -> SparseVec {
    let g = alg.grading();
    let mut pairs = Vec::new();
    let mut off = 0;
    for k in 0..=n_prime {
        let dim = g.dim(k);
        for (col, i) in g.range(k).enumerate() {
            let y = o_apply(alg, v, &GradedVector::basis(i));
            for (r, x) in local_coords(g, k, &y.terms).iter() {
                pairs.push((off + r * dim + col, x.clone()));
            }
        }
        off += dim * dim;
    }
    SparseVec::from_pairs(pairs)
}

/// `(L(-1)+L(0))V ⊆ ker o` on `⊕_{k≤n'}V_k`, and equality of dimensions
/// inside `⊕_{m≤n'} V_m`.
pub fn radical_check<A: VertexAlgebra + ?Sized>(alg: &A, n_prime: u32) -> Result<RadicalReport> {
    let cutoff = alg.cutoff();
    if n_prime >= cutoff {
        return Err(Error::Usage(format!("radical check needs n' < N = {cutoff}")));
    }
    let g = alg.grading();
    let ids: Vec<usize> = (0..=n_prime).flat_map(|w| g.range(w)).collect();
    let results: Vec<(SparseVec, bool, Option<Rational>)> = ids
        .par_iter()
        .map(|&i| {
            let v = GradedVector::basis(i);
            let m = Rational::from_int(g.weight_of(i) as i64);
            let ov = o_restricted(alg, &v, n_prime);
            let lv = virasoro(alg, -1, &v);
            let olv = o_restricted(alg, &lv, n_prime);
            let sum = olv.add_scaled(&m, &ov);
            let offset = ov.first().map(|(p, x)| &(&olv.get(*p) / x) + &m);
            (ov, sum.is_zero(), offset)
        })
        .collect();
    let inclusion_holds = results.iter().all(|r| r.1);
    let coefficient_offsets: Vec<Rational> = results.iter().filter_map(|r| r.2.clone()).collect();
    let flat_len: usize = (0..=n_prime).map(|k| g.dim(k) * g.dim(k)).sum();
    let mut ech = Echelon::new(flat_len);
    for r in &results {
        ech.insert(&r.0);
    }
    let kernel_dim = ids.len() - ech.rank();
    let mut image = Echelon::new(g.total());
    for w in 0..n_prime {
        for i in g.range(w) {
            let v = GradedVector::basis(i);
            let y = virasoro(alg, -1, &v).add(&v.scale(&Rational::from_int(w as i64)));
            image.insert(&y.terms);
        }
    }
    let image_dim = image.rank();
    Ok(RadicalReport {
        cutoff,
        n_prime,
        inclusion_checks: ids.len(),
        inclusion_holds,
        coefficient_offsets,
        kernel_dim,
        image_dim,
        dims_match: kernel_dim == image_dim,
    })
}

/// Generalized eigenspaces of a rational matrix whose spectrum is rational;
/// `None` otherwise. Eigenvalues ascend.
pub fn rational_spectrum(m: &DenseMatrix) -> Option<Vec<(Rational, Vec<Vec<Rational>>)>> {
    let n = m.rows();
    if n == 0 {
        return Some(Vec::new());
    }
    let entries: Vec<Rational> = (0..n).flat_map(|i| m.row(i).to_vec()).collect();
    let c = Rational::denom_lcm(entries.iter());
    let cm = m.scale(&c);
    let bound = (0..n)
        .map(|i| cm.row(i).iter().map(|x| x.abs()).sum::<Rational>())
        .max()
        .unwrap_or_else(Rational::zero)
        .to_i64()?;
    if bound > 100_000 {
        return None;
    }
    let mut out = Vec::new();
    let mut found = 0;
    for lam in -bound..=bound {
        let shifted = cm.sub(&DenseMatrix::scalar(n, &Rational::from_int(lam)));
        if shifted.rank() == n {
            continue;
        }
        let k = shifted.pow(n as u32).kernel();
        found += k.len();
        out.push((&Rational::from_int(lam) / &c, k));
        if found == n {
            break;
        }
    }
    (found == n).then_some(out)
}

/// `A = S + N` with `S` diagonalizable over the rationals, `N` nilpotent and
/// `[S, N] = 0`; returns `(S, N, eigenvalues of S)`.
pub fn jordan_chevalley(m: &DenseMatrix) -> Option<(DenseMatrix, DenseMatrix, Vec<Rational>)> {
    let n = m.rows();
    let spec = rational_spectrum(m)?;
    let mut cols = Vec::new();
    let mut diag = Vec::new();
    for (lam, vecs) in &spec {
        for v in vecs {
            cols.push(v.clone());
            diag.push(lam.clone());
        }
    }
    if n == 0 {
        return Some((m.clone(), m.clone(), Vec::new()));
    }
    let p = DenseMatrix::from_columns(n, &cols);
    let pinv = p.inverse()?;
    let mut d = DenseMatrix::zeros(n, n);
    for (i, x) in diag.iter().enumerate() {
        d.set(i, i, x.clone());
    }
    let s = p.mul(&d).mul(&pinv);
    let nil = m.sub(&s);
    Some((s, nil, spec.into_iter().map(|x| x.0).collect()))
}

/// `V diag(base^{q λ}) V^{-1}` on each block of the semisimple part, with `q`
/// the common denominator of all eigenvalues: the value of `exp(t S)` at
/// `t = q log(base)`.
fn semisimple_power(s_blocks: &[DenseMatrix], base: &Rational) -> Option<Vec<DenseMatrix>> {
    let mut spectra = Vec::new();
    for b in s_blocks {
        spectra.push(rational_spectrum(b)?);
    }
    let q = Rational::denom_lcm(spectra.iter().flatten().map(|x| &x.0));
    spectra
        .iter()
        .zip(s_blocks)
        .map(|(spec, b)| {
            let n = b.rows();
            if n == 0 {
                return Some(b.clone());
            }
            let mut cols = Vec::new();
            let mut diag = Vec::new();
            for (lam, vecs) in spec {
                let e = (lam * &q).to_i64()?;
                for v in vecs {
                    cols.push(v.clone());
                    diag.push(base.pow(e as i32));
                }
            }
            let p = DenseMatrix::from_columns(n, &cols);
            let mut d = DenseMatrix::zeros(n, n);
            for (i, x) in diag.into_iter().enumerate() {
                d.set(i, i, x);
            }
            Some(p.mul(&d).mul(&p.inverse()?))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentialCheck {
    pub derivation: usize,
    pub kind: String,
    pub parameter: Rational,
    pub verdict: Verdict,
}

/// Group elements generated by each basis derivation: `exp(tN)` for the
/// nilpotent part and rational points of the torus through the semisimple
/// part, each run through `check_automorphism`.
pub fn exponentiate_derivations<A: VertexAlgebra + ?Sized>(
    ctx: &AutContext<'_, A>,
    der: &DerivationSpace,
) -> Result<Vec<ExponentialCheck>> {
    let alg = ctx.alg;
    let n = ctx.gen_bound;
    let mut out = Vec::new();
    for (idx, d) in der.basis.iter().enumerate() {
        let blocks = &d.blocks[..=n as usize];
        let mut s_blocks = Vec::new();
        let mut n_blocks = Vec::new();
        for b in blocks {
            let (s, nil, _) = jordan_chevalley(b)
                .ok_or_else(|| Error::Usage(format!("derivation {idx} has a spectrum outside the rationals")))?;
            s_blocks.push(s);
            n_blocks.push(nil);
        }
        if n_blocks.iter().any(|b| !b.is_zero()) {
            for t in [Rational::one(), Rational::new(-1, 2)] {
                let exp: Vec<DenseMatrix> = n_blocks
                    .iter()
                    .map(|b| b.scale(&t).exp_nilpotent().ok_or_else(|| Error::Internal("nilpotent part".into())))
                    .collect::<Result<_>>()?;
                let g = CandidateMap::from_blocks(alg, exp)?;
                out.push(ExponentialCheck {
                    derivation: idx,
                    kind: "unipotent".into(),
                    parameter: t,
                    verdict: ctx.check_automorphism(&g)?,
                });
            }
        }
        if s_blocks.iter().any(|b| !b.is_zero()) {
            for base in [Rational::from_int(2), Rational::new(1, 3)] {
                let pow = semisimple_power(&s_blocks, &base)
                    .ok_or_else(|| Error::Internal("semisimple part lost its eigenbasis".into()))?;
                let g = CandidateMap::from_blocks(alg, pow)?;
                out.push(ExponentialCheck {
                    derivation: idx,
                    kind: "torus".into(),
                    parameter: base,
                    verdict: ctx.check_automorphism(&g)?,
                });
            }
        }
    }
    Ok(out)
}
