//! Fixed points of `V_L`, gram `[[2]]`, under the unipotent group generated
//! by `(e^α)_0`; the Virasoro summands `L(1, m²)` they decompose into; and the
//! direct-sum algebra built from such summands with zero products between
//! modules.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{mode, virasoro, zero_mode_block, Grading, GradedVector, Subspace, VertexAlgebra};
use crate::autgroup::{AutContext, CandidateMap, Verdict};
use crate::compose::{EnumerationOrder, Generators, SpanClosure};
use crate::dercalc::solve_derivations;
use crate::error::{Error, Result};
use crate::exactlin::{DenseMatrix, Echelon, Rational, Span, SparseVec};
use crate::fockspace::{Lattice, LatticeVoa};

/// The Virasoro submodule of `V_L` generated by `e^{mα}`, one basis list per
/// weight `0..=N`.
#[derive(Clone, Debug)]
pub struct ModuleSummand {
    pub m: u32,
    pub hw_weight: u32,
    pub hw: GradedVector,
    pub pieces: Vec<Vec<GradedVector>>,
}

impl ModuleSummand {
    pub fn dims(&self) -> Vec<usize> {
        self.pieces.iter().map(|p| p.len()).collect()
    }
}

pub fn module_summand(parent: &LatticeVoa, m: u32) -> Result<ModuleSummand> {
    let cutoff = parent.cutoff();
    let hw_weight = m * m;
    if hw_weight > cutoff {
        return Err(Error::Usage(format!("highest weight {hw_weight} is above the cutoff {cutoff}")));
    }
    let hw = parent.exponential(&[m as i64])?;
    let total = parent.grading().total();
    let mut pieces: Vec<Vec<GradedVector>> = vec![Vec::new(); cutoff as usize + 1];
    pieces[hw_weight as usize].push(hw.clone());
    for w in hw_weight + 1..=cutoff {
        let mut ech = Echelon::new(total);
        let mut out = Vec::new();
        for k in 1..=w - hw_weight {
            for x in &pieces[(w - k) as usize] {
                let y = parent.virasoro_direct(-(k as i64), x);
                if ech.insert(&y.terms) {
                    out.push(y);
                }
            }
        }
        pieces[w as usize] = out;
    }
    Ok(ModuleSummand { m, hw_weight, hw, pieces })
}

/// How products between summands are formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductRule {
    /// Products of `V_L`.
    Inherited,
    /// Summand `0` acts as in `V_L`; module-on-summand-`0` products come from
    /// skew symmetry; products of two module vectors vanish.
    DirectSum,
}

/// A sum of Virasoro summands of `V_L`, presented as a vertex algebra on the
/// concatenated summand bases.
pub struct SummandAlgebra {
    parent: Arc<LatticeVoa>,
    rule: ProductRule,
    summands: Vec<ModuleSummand>,
    grading: Grading,
    basis: Vec<GradedVector>,
    owner: Vec<usize>,
    labels: Vec<String>,
    spaces: Vec<Subspace>,
    omega: GradedVector,
    memo: RwLock<HashMap<(usize, i64, usize), Arc<SparseVec>>>,
}

impl SummandAlgebra {
    pub fn new(parent: Arc<LatticeVoa>, summands: Vec<ModuleSummand>, rule: ProductRule) -> Result<Self> {
        if summands.first().map(|s| s.m) != Some(0) {
            return Err(Error::Usage("the first summand must be the one generated by the vacuum".into()));
        }
        let cutoff = parent.cutoff();
        let mut basis = Vec::new();
        let mut owner = Vec::new();
        let mut labels = Vec::new();
        let mut dims = Vec::new();
        let mut spaces = Vec::new();
        for w in 0..=cutoff {
            let start = basis.len();
            for (s, sm) in summands.iter().enumerate() {
                for (k, v) in sm.pieces[w as usize].iter().enumerate() {
                    labels.push(if w == sm.hw_weight {
                        format!("e^[{}]", sm.m)
                    } else {
                        format!("L(1,{})[{w}.{k}]", sm.hw_weight)
                    });
                    basis.push(v.clone());
                    owner.push(s);
                }
            }
            dims.push(basis.len() - start);
            spaces.push(Subspace::new(parent.grading(), w, basis[start..].to_vec()).map_err(|_| {
                Error::Internal(format!("summands are not independent at weight {w}"))
            })?);
        }
        let mut alg = SummandAlgebra {
            parent,
            rule,
            summands,
            grading: Grading::from_dims(&dims),
            basis,
            owner,
            labels,
            spaces,
            omega: GradedVector::zero(),
            memo: RwLock::new(HashMap::new()),
        };
        alg.omega = alg
            .from_parent(alg.parent.conformal())
            .ok_or_else(|| Error::Internal("conformal vector outside the summands".into()))?;
        Ok(alg)
    }

    pub fn parent(&self) -> &LatticeVoa {
        &self.parent
    }

    pub fn rule(&self) -> ProductRule {
        self.rule
    }

    pub fn summands(&self) -> &[ModuleSummand] {
        &self.summands
    }

    /// Index of the summand containing basis element `i`.
    pub fn owner(&self, i: usize) -> usize {
        self.owner[i]
    }

    /// Basis indices of summand `s` in weight `w`.
    pub fn summand_indices(&self, s: usize, w: u32) -> Vec<usize> {
        self.grading.range(w).filter(|&i| self.owner[i] == s).collect()
    }

    pub fn to_parent(&self, v: &GradedVector) -> GradedVector {
        let mut acc = GradedVector { terms: SparseVec::new(), truncated: v.truncated };
        for (i, c) in v.terms.iter() {
            acc = acc.add_scaled(c, &self.basis[*i]);
        }
        acc
    }

    /// Coordinates of a vector of `V_L` in the summand basis, if it lies in
    /// the span.
    pub fn from_parent(&self, v: &GradedVector) -> Option<GradedVector> {
        let pg = self.parent.grading();
        let mut pairs = Vec::new();
        for w in 0..=self.grading.cutoff() {
            let part: Vec<(usize, Rational)> =
                v.terms.iter().filter(|(i, _)| pg.weight_of(*i) == w).cloned().collect();
            if part.is_empty() {
                continue;
            }
            let c = self.spaces[w as usize].coordinates(&GradedVector::exact(SparseVec::from_pairs(part)))?;
            let off = self.grading.offset(w);
            pairs.extend(c.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(k, x)| (off + k, x)));
        }
        Some(GradedVector { terms: SparseVec::from_pairs(pairs), truncated: v.truncated })
    }

    fn coords(&self, y: &GradedVector, what: &str) -> SparseVec {
        self.from_parent(y).unwrap_or_else(|| panic!("{what} leaves the summands")).terms
    }

    /// `u_n v = Σ_j (-1)^{n+j+1} L(-1)^j/j! v_{n+j} u` for `u` a module
    /// vector and `v` in summand `0`.
    fn transported(&self, u: usize, n: i64, v: usize) -> GradedVector {
        let p = &*self.parent;
        let (bu, bv) = (&self.basis[u], &self.basis[v]);
        let t = (self.grading.weight_of(u) + self.grading.weight_of(v)) as i64 - n - 1;
        let mut acc = GradedVector::zero();
        let mut fact = Rational::one();
        for j in 0..=t {
            if j > 0 {
                fact = &fact * &Rational::from_int(j);
            }
            let mut y = mode(p, bv, n + j, bu);
            for _ in 0..j {
                y = p.virasoro_direct(-1, &y);
            }
            let sign = if (n + j + 1).rem_euclid(2) == 0 { Rational::one() } else { -Rational::one() };
            acc = acc.add_scaled(&(&sign / &fact), &y);
        }
        acc
    }

    fn compute_product(&self, u: usize, n: i64, v: usize) -> SparseVec {
        let inherited = || self.coords(&mode(&*self.parent, &self.basis[u], n, &self.basis[v]), "a product");
        match self.rule {
            ProductRule::Inherited => inherited(),
            ProductRule::DirectSum => match (self.owner[u], self.owner[v]) {
                (0, _) => inherited(),
                (_, 0) => self.coords(&self.transported(u, n, v), "a transported product"),
                _ => SparseVec::new(),
            },
        }
    }
}

impl VertexAlgebra for SummandAlgebra {
    fn grading(&self) -> &Grading {
        &self.grading
    }

    fn basis_product(&self, u: usize, n: i64, v: usize) -> Arc<SparseVec> {
        if let Some(hit) = self.memo.read().expect("memo lock").get(&(u, n, v)) {
            return hit.clone();
        }
        let val = Arc::new(self.compute_product(u, n, v));
        self.memo.write().expect("memo lock").entry((u, n, v)).or_insert(val).clone()
    }

    fn conformal(&self) -> &GradedVector {
        &self.omega
    }

    fn central_charge(&self) -> Rational {
        self.parent.central_charge()
    }

    fn label(&self, index: usize) -> String {
        self.labels[index].clone()
    }
}

/// `V_L^G = ker (e^α)_0`, with the summand decomposition as its basis.
pub struct FixedPointAlgebra {
    pub alg: SummandAlgebra,
    /// `ker (e^α)_0 ∩ V_w`, computed directly from the zero mode.
    pub kernel: Vec<Subspace>,
}

pub fn a1_lattice() -> Lattice {
    Lattice::new(vec![vec![2]]).expect("A1 gram is valid")
}

pub fn fixed_point_subalgebra(parent: Arc<LatticeVoa>) -> Result<FixedPointAlgebra> {
    if parent.lattice().gram() != [vec![2]] {
        return Err(Error::Usage("the fixed-point construction needs the lattice with gram [[2]]".into()));
    }
    let e = parent.exponential(&[1])?;
    let g = parent.grading();
    let kernel = (0..=parent.cutoff())
        .into_par_iter()
        .map(|w| {
            let k = zero_mode_block(&*parent, &e, w)?.kernel();
            Subspace::new(g, w, k.iter().map(|c| GradedVector::from_block(g, w, c)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut summands = Vec::new();
    let mut m = 0;
    while m * m <= parent.cutoff() {
        summands.push(module_summand(&parent, m)?);
        m += 1;
    }
    let alg = SummandAlgebra::new(parent, summands, ProductRule::Inherited)?;
    Ok(FixedPointAlgebra { alg, kernel })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureReport {
    pub checked: usize,
    pub failures: usize,
}

impl FixedPointAlgebra {
    pub fn parent(&self) -> &LatticeVoa {
        self.alg.parent()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.kernel.iter().map(|k| k.dim()).collect()
    }

    /// `ker (e^α)_0 = ⊕_m L(1, m²)` weight by weight.
    pub fn decomposition_holds(&self) -> bool {
        (0..=self.alg.cutoff()).all(|w| {
            let k = &self.kernel[w as usize];
            k.dim() == self.alg.dim(w)
                && self.alg.grading().range(w).all(|i| k.contains(&self.alg.to_parent(&GradedVector::basis(i))))
        })
    }

    /// `u_n v ∈ ker (e^α)_0` for kernel basis vectors with weights and
    /// target at most `max_weight`.
    pub fn closure_check(&self, max_weight: u32) -> ClosureReport {
        let p = self.parent();
        let top = max_weight.min(p.cutoff());
        let vecs: Vec<(u32, &GradedVector)> =
            (0..=top).flat_map(|w| self.kernel[w as usize].vectors.iter().map(move |v| (w, v))).collect();
        let res: Vec<(usize, usize)> = vecs
            .par_iter()
            .map(|&(wu, u)| {
                let (mut checked, mut failures) = (0, 0);
                for &(wv, v) in &vecs {
                    for t in 0..=top.min(wu + wv) {
                        let n = (wu + wv) as i64 - t as i64 - 1;
                        let y = mode(p, u, n, v);
                        checked += 1;
                        if !self.kernel[t as usize].contains(&y) {
                            failures += 1;
                        }
                    }
                }
                (checked, failures)
            })
            .collect();
        ClosureReport { checked: res.iter().map(|r| r.0).sum(), failures: res.iter().map(|r| r.1).sum() }
    }

    /// `u ∈ L(1,s²)`, `v ∈ L(1,t²)` give `u_k v ∈ L(1,(s+t)²)`.
    pub fn charge_additivity(&self, max_weight: u32) -> Result<ClosureReport> {
        let p = self.parent();
        let top = max_weight.min(p.cutoff());
        let sm = self.alg.summands();
        let piece_space = |m: usize, w: u32| -> Result<Option<Subspace>> {
            if m >= sm.len() {
                return Ok(None);
            }
            Subspace::new(p.grading(), w, sm[m].pieces[w as usize].clone()).map(Some)
        };
        let mut spaces: HashMap<(usize, u32), Option<Subspace>> = HashMap::new();
        for m in 0..=2 * sm.len() {
            for w in 0..=top {
                spaces.insert((m, w), piece_space(m, w)?);
            }
        }
        let items: Vec<(usize, u32, &GradedVector)> = sm
            .iter()
            .enumerate()
            .flat_map(|(s, x)| (0..=top).flat_map(move |w| x.pieces[w as usize].iter().map(move |v| (s, w, v))))
            .collect();
        let res: Vec<(usize, usize)> = items
            .par_iter()
            .map(|&(s, wu, u)| {
                let (mut checked, mut failures) = (0, 0);
                for &(t, wv, v) in &items {
                    for tw in 0..=top.min(wu + wv) {
                        let n = (wu + wv) as i64 - tw as i64 - 1;
                        let y = mode(p, u, n, v);
                        checked += 1;
                        let ok = match &spaces[&(s + t, tw)] {
                            Some(sp) => sp.contains(&y),
                            None => y.is_zero(),
                        };
                        failures += usize::from(!ok);
                    }
                }
                (checked, failures)
            })
            .collect();
        Ok(ClosureReport { checked: res.iter().map(|r| r.0).sum(), failures: res.iter().map(|r| r.1).sum() })
    }

    /// `{𝟙, ω, e^α}` generates the fixed-point algebra up to the cutoff.
    pub fn generation_check(&self) -> Result<bool> {
        let alg = &self.alg;
        let e = alg.from_parent(&self.parent().exponential(&[1])?).expect("e^α is fixed");
        let gens = Generators::new(
            alg,
            vec![alg.vacuum(), alg.conformal().clone(), e],
            vec!["vacuum".into(), "omega".into(), "e^[1]".into()],
        )?;
        Ok(SpanClosure::compute(alg, &gens, None, EnumerationOrder::Standard).spans_everything())
    }
}

/// `ker L(1) ∩ ker L(2)` inside each fixed-point weight space.
pub fn virasoro_highest_weights(fpa: &FixedPointAlgebra) -> Result<Vec<(u32, GradedVector)>> {
    let p = fpa.parent();
    let g = p.grading();
    let mut out = Vec::new();
    for w in 0..=p.cutoff() {
        let k = &fpa.kernel[w as usize];
        if k.dim() == 0 {
            continue;
        }
        let cols: Vec<Vec<Rational>> = k
            .vectors
            .iter()
            .map(|v| {
                let mut col = Vec::new();
                if w >= 1 {
                    col.extend(virasoro(p, 1, v).block(g, w - 1));
                }
                if w >= 2 {
                    col.extend(virasoro(p, 2, v).block(g, w - 2));
                }
                col
            })
            .collect();
        let height = cols[0].len();
        if height == 0 {
            out.extend(k.vectors.iter().map(|v| (w, v.clone())));
            continue;
        }
        for c in DenseMatrix::from_columns(height, &cols).kernel() {
            out.push((w, k.combine(&c)));
        }
    }
    Ok(out)
}

/// `c` with `(e^α)_{-2n-1} e^{nα} = c e^{(n+1)α}`, if the product is a
/// multiple of `e^{(n+1)α}`.
pub fn climbing_coefficient(parent: &LatticeVoa, n: u32) -> Result<Option<Rational>> {
    let e = parent.exponential(&[1])?;
    let x = parent.exponential(&[n as i64])?;
    let target = parent.exponential(&[n as i64 + 1])?;
    let y = mode(parent, &e, -2 * n as i64 - 1, &x);
    let idx = target.terms.first().map(|t| t.0).expect("basis vector");
    let c = y.coeff(idx);
    Ok((y == target.scale(&c)).then_some(c))
}

#[derive(Clone, Debug, Serialize)]
pub struct IdealReport {
    pub n: u32,
    pub dims: Vec<usize>,
    pub climbing_coefficient: Option<Rational>,
    /// Whether `e^{(n+1)α}` lies in the ideal, when it is in range.
    pub next_in_ideal: Option<bool>,
    #[serde(skip)]
    pub basis: Vec<Vec<GradedVector>>,
}

/// The ideal of `V_L^G` generated by `e^{nα}`: the closure of `e^{nα}` under
/// the modes of `ω` and `e^α`. These generate `V_L^G` (see
/// `generation_check`), and the elements whose modes preserve a subspace
/// form a subalgebra, so the closure is the ideal.
pub fn ideal_chain(fpa: &FixedPointAlgebra, n: u32) -> Result<IdealReport> {
    let p = fpa.parent();
    let cutoff = p.cutoff();
    if n == 0 || n * n > cutoff {
        return Err(Error::Usage(format!("ideal chain needs 1 <= n and n^2 <= {cutoff}")));
    }
    let g = p.grading();
    let mult = [(p.conformal().clone(), 2u32), (p.exponential(&[1])?, 1u32)];
    let mut ech: Vec<Echelon> = (0..=cutoff).map(|_| Echelon::new(g.total())).collect();
    let mut basis: Vec<Vec<GradedVector>> = vec![Vec::new(); cutoff as usize + 1];
    let start = p.exponential(&[n as i64])?;
    ech[(n * n) as usize].insert(&start.terms);
    basis[(n * n) as usize].push(start.clone());
    let mut queue = vec![(n * n, start)];
    while let Some((w, y)) = queue.pop() {
        for (s, ws) in &mult {
            for t in 0..=cutoff.min(w + ws) {
                let k = (w + ws) as i64 - t as i64 - 1;
                let z = mode(p, s, k, &y);
                if ech[t as usize].insert(&z.terms) {
                    basis[t as usize].push(z.clone());
                    queue.push((t, z));
                }
            }
        }
    }
    let climbing_coefficient = if (n + 1) * (n + 1) <= cutoff { climbing_coefficient(p, n)? } else { None };
    let next_in_ideal = if (n + 1) * (n + 1) <= cutoff {
        let nx = p.exponential(&[n as i64 + 1])?;
        Some(ech[((n + 1) * (n + 1)) as usize].contains(&nx.terms))
    } else {
        None
    };
    Ok(IdealReport { n, dims: basis.iter().map(|b| b.len()).collect(), climbing_coefficient, next_in_ideal, basis })
}

/// Scales summand `s` by `scales[s]` on `U = ⊕_{m≤n} V_m`.
pub fn summand_scaling(alg: &SummandAlgebra, gen_bound: u32, scales: &[Rational]) -> Result<CandidateMap> {
    if scales.len() != alg.summands().len() {
        return Err(Error::Usage(format!("need {} summand scales", alg.summands().len())));
    }
    let g = alg.grading();
    let blocks = (0..=gen_bound)
        .map(|w| {
            let r = g.range(w);
            let mut m = DenseMatrix::zeros(r.len(), r.len());
            for (k, i) in r.enumerate() {
                m.set(k, k, scales[alg.owner(i)].clone());
            }
            m
        })
        .collect();
    CandidateMap::from_blocks(alg, blocks)
}

/// `σ_λ`: multiplication by `λ^m` on `L(1, m²)`.
pub fn sigma_lambda(alg: &SummandAlgebra, gen_bound: u32, lambda: &Rational) -> Result<CandidateMap> {
    let scales: Vec<Rational> = alg.summands().iter().map(|s| lambda.pow(s.m as i32)).collect();
    summand_scaling(alg, gen_bound, &scales)
}

pub fn sigma_lambda_check(ctx: &AutContext<'_, SummandAlgebra>, lambda: &Rational) -> Result<Verdict> {
    if lambda.is_zero() {
        return Err(Error::Usage("sigma_lambda needs lambda != 0".into()));
    }
    ctx.check_automorphism(&sigma_lambda(ctx.alg, ctx.gen_bound, lambda)?)
}

/// Graded maps on `U` commuting with `L(k)`, `k = ±1, ±2`, wherever both
/// sides stay in `U`.
pub fn virasoro_commutant<A: VertexAlgebra + ?Sized>(alg: &A, gen_bound: u32) -> Result<Vec<CandidateMap>> {
    let g = alg.grading();
    let mut off = vec![0usize; gen_bound as usize + 1];
    let mut total = 0;
    for w in 0..=gen_bound {
        off[w as usize] = total;
        total += g.dim(w) * g.dim(w);
    }
    // unknown (w, i, j): entry (i, j) of the block on V_w
    let image = |w: u32, v: &[Rational]| -> Vec<(usize, usize, Rational)> {
        let d = g.dim(w);
        let mut out = Vec::new();
        for (j, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for i in 0..d {
                out.push((i, off[w as usize] + i * d + j, c.clone()));
            }
        }
        out
    };
    let mut ech = Echelon::new(total);
    for w in 0..=gen_bound {
        for i in g.range(w) {
            let x = GradedVector::basis(i);
            for k in [-2i64, -1, 1, 2] {
                let t = w as i64 - k;
                if t < 0 || t > gen_bound as i64 {
                    continue;
                }
                let t = t as u32;
                let lx = virasoro(alg, k, &x).block(g, t);
                // g(L(k) x) - L(k)(g x) = 0, coordinate by coordinate
                let mut rows: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); g.dim(t)];
                for (r, unk, c) in image(t, &lx) {
                    rows[r].push((unk, c));
                }
                let d = g.dim(w);
                for a in 0..d {
                    let la = virasoro(alg, k, &GradedVector::basis(g.offset(w) + a)).block(g, t);
                    let col = i - g.offset(w);
                    for (r, c) in la.iter().enumerate() {
                        if !c.is_zero() {
                            rows[r].push((off[w as usize] + a * d + col, -c));
                        }
                    }
                }
                for r in rows {
                    ech.insert(&SparseVec::from_pairs(r));
                }
            }
        }
    }
    ech.null_space()
        .into_iter()
        .map(|z| {
            let blocks = (0..=gen_bound)
                .map(|w| {
                    let d = g.dim(w);
                    let mut m = DenseMatrix::zeros(d, d);
                    for (idx, c) in z.iter() {
                        if *idx >= off[w as usize] && *idx < off[w as usize] + d * d {
                            let loc = idx - off[w as usize];
                            m.set(loc / d, loc % d, c.clone());
                        }
                    }
                    m
                })
                .collect();
            CandidateMap::from_blocks(alg, blocks)
        })
        .collect()
}

/// The commutant spans exactly the summand projections on `U`.
fn commutant_is_diagonal(alg: &SummandAlgebra, gen_bound: u32, commutant: &[CandidateMap]) -> Result<(bool, usize)> {
    let present: Vec<usize> = (0..alg.summands().len())
        .filter(|&s| (0..=gen_bound).any(|w| !alg.summand_indices(s, w).is_empty()))
        .collect();
    let flat = |c: &CandidateMap| c.to_matrix().to_sparse().row_vectors().into_iter().enumerate().fold(
        Vec::new(),
        |mut acc, (r, row)| {
            let n = c.to_matrix().cols();
            acc.extend(row.iter().map(|(j, x)| (r * n + j, x.clone())));
            acc
        },
    );
    let mut projectors = Vec::new();
    for &s in &present {
        let scales: Vec<Rational> =
            (0..alg.summands().len()).map(|t| if t == s { Rational::one() } else { Rational::zero() }).collect();
        projectors.push(SparseVec::from_pairs(flat(&summand_scaling(alg, gen_bound, &scales)?)));
    }
    let len = commutant.first().map_or(0, |c| c.to_matrix().rows().pow(2));
    let span = Span::new(len, &projectors)?;
    let diagonal = commutant.len() == present.len()
        && commutant.iter().all(|c| span.contains(&SparseVec::from_pairs(flat(c))));
    Ok((diagonal, present.len()))
}

#[derive(Clone, Debug, Serialize)]
pub struct AutomorphismForm {
    pub gen_bound: u32,
    pub commutant_dim: usize,
    pub summands_in_u: usize,
    /// Graded maps fixing `ω` are summand scalings.
    pub diagonal: bool,
    /// `(m, c)` with `(e^α)_{-2m+1} e^{(m-1)α} = c e^{mα}` and `c ≠ 0`, forcing
    /// the scale on `L(1,m²)` to be the product of those on `L(1,1)` and
    /// `L(1,(m-1)²)`.
    pub relations: Vec<(u32, Rational)>,
}

impl AutomorphismForm {
    /// Everything fixing `ω` is some `σ_λ` on `U`.
    pub fn only_sigma(&self) -> bool {
        self.diagonal && self.relations.iter().all(|(_, c)| !c.is_zero())
    }
}

pub fn automorphism_form(fpa: &FixedPointAlgebra, gen_bound: u32) -> Result<AutomorphismForm> {
    let commutant = virasoro_commutant(&fpa.alg, gen_bound)?;
    let (diagonal, summands_in_u) = commutant_is_diagonal(&fpa.alg, gen_bound, &commutant)?;
    let mut relations = Vec::new();
    for s in fpa.alg.summands() {
        if s.m >= 2 && s.hw_weight <= gen_bound {
            let c = climbing_coefficient(fpa.parent(), s.m - 1)?.unwrap_or_else(Rational::zero);
            relations.push((s.m, c));
        }
    }
    Ok(AutomorphismForm { gen_bound, commutant_dim: commutant.len(), summands_in_u, diagonal, relations })
}

/// `{"hw_weights": [0, 1, 4, 9], "cutoff": N}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DsumSpec {
    pub hw_weights: Vec<u32>,
    pub cutoff: u32,
}

/// The direct sum `L(1,0) ⊕ ⊕_i L(1, h_i)` with the skew-symmetric
/// module-on-`U` products and zero products among modules. Summands are the
/// `L(1, m²)` of `V_L^G`, so every positive highest weight must be a square.
pub fn build_dsum_voa(spec: &DsumSpec) -> Result<SummandAlgebra> {
    let h = &spec.hw_weights;
    if h.first() != Some(&0) {
        return Err(Error::Usage("the first highest weight must be 0".into()));
    }
    if h.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Usage("highest weights must be strictly increasing".into()));
    }
    let parent = Arc::new(LatticeVoa::build(a1_lattice(), spec.cutoff)?);
    let mut summands = Vec::new();
    for &w in h {
        let m = (w as f64).sqrt().round() as u32;
        if m * m != w {
            return Err(Error::Usage(format!("highest weight {w} is not a square; summands are realized as L(1,m^2)")));
        }
        if w <= spec.cutoff {
            summands.push(module_summand(&parent, m)?);
        }
    }
    SummandAlgebra::new(parent, summands, ProductRule::DirectSum)
}

#[derive(Clone, Debug, Serialize)]
pub struct DsumAxioms {
    pub checks: usize,
    pub vacuum: bool,
    pub derivative: bool,
    pub skew_symmetry: bool,
    /// Module-on-`U` products coincide with those of `V_L`.
    pub transport_matches_parent: bool,
    pub module_products_zero: bool,
}

impl DsumAxioms {
    pub fn holds(&self) -> bool {
        self.vacuum && self.derivative && self.skew_symmetry && self.transport_matches_parent && self.module_products_zero
    }
}

/// Skew-symmetric expansion `Σ_j (-1)^{n+j+1} L(-1)^j/j! v_{n+j} u`.
fn skew_expansion<A: VertexAlgebra + ?Sized>(alg: &A, u: &GradedVector, n: i64, v: &GradedVector, t: i64) -> GradedVector {
    let mut acc = GradedVector::zero();
    let mut fact = Rational::one();
    for j in 0..=t {
        if j > 0 {
            fact = &fact * &Rational::from_int(j);
        }
        let mut y = mode(alg, v, n + j, u);
        for _ in 0..j {
            y = virasoro(alg, -1, &y);
        }
        let sign = if (n + j + 1).rem_euclid(2) == 0 { Rational::one() } else { -Rational::one() };
        acc = acc.add_scaled(&(&sign / &fact), &y);
    }
    acc
}

pub fn dsum_axioms(alg: &SummandAlgebra) -> DsumAxioms {
    let g = alg.grading();
    let cutoff = alg.cutoff();
    let total = g.total();
    let vac = alg.vacuum();
    let mut r = DsumAxioms {
        checks: 0,
        vacuum: true,
        derivative: true,
        skew_symmetry: true,
        transport_matches_parent: true,
        module_products_zero: true,
    };
    for i in 0..total {
        let b = GradedVector::basis(i);
        let wb = g.weight_of(i) as i64;
        r.checks += 2;
        r.vacuum &= mode(alg, &vac, -1, &b) == b && mode(alg, &b, -1, &vac) == b;
        for n in 0..wb {
            r.vacuum &= mode(alg, &b, n, &vac).is_zero();
        }
        for j in 0..total {
            let c = GradedVector::basis(j);
            let wc = g.weight_of(j) as i64;
            for t in 0..=(cutoff as i64).min(wb + wc) {
                let n = wb + wc - t - 1;
                r.checks += 1;
                let y = mode(alg, &b, n, &c);
                if y != skew_expansion(alg, &b, n, &c, t) {
                    r.skew_symmetry = false;
                }
                let (sb, sc) = (alg.owner(i), alg.owner(j));
                if sb != 0 && sc != 0 {
                    r.module_products_zero &= y.is_zero();
                } else if sb != 0 {
                    let py = mode(alg.parent(), &alg.to_parent(&b), n, &alg.to_parent(&c));
                    r.transport_matches_parent &= alg.to_parent(&y) == py;
                }
                if wb < cutoff as i64 && t < cutoff as i64 {
                    let lb = virasoro(alg, -1, &b);
                    let lhs = mode(alg, &lb, n + 1, &c);
                    let rhs = mode(alg, &b, n, &c).scale(&Rational::from_int(-(n + 1)));
                    r.derivative &= lhs == rhs;
                }
            }
        }
    }
    r
}

#[derive(Clone, Debug, Serialize)]
pub struct DsumAutomorphisms {
    pub gen_bound: u32,
    pub positive_summands: usize,
    pub commutant_dim: usize,
    pub diagonal: bool,
    pub torus_samples: Vec<(Vec<Rational>, bool)>,
    pub mixing_rejected: Option<bool>,
    pub derivation_dim: usize,
}

impl DsumAutomorphisms {
    pub fn holds(&self) -> bool {
        self.diagonal
            && self.commutant_dim == self.positive_summands + 1
            && self.torus_samples.iter().all(|s| s.1)
            && self.mixing_rejected != Some(false)
            && self.derivation_dim == self.positive_summands
    }
}

/// Identity on `U` except `u ↦ u + x` for the highest weight vector `u` of
/// the last summand in `U` and `x` a vector of another summand of the same
/// weight.
pub fn mixing_candidate(alg: &SummandAlgebra, gen_bound: u32) -> Result<Option<CandidateMap>> {
    let g = alg.grading();
    let Some((s, sm)) = alg.summands().iter().enumerate().rev().find(|(s, x)| *s > 0 && x.hw_weight <= gen_bound) else {
        return Ok(None);
    };
    let w = sm.hw_weight;
    let u = alg.summand_indices(s, w)[0];
    let Some(x) = g.range(w).find(|&i| alg.owner(i) != s) else {
        return Ok(None);
    };
    let mut blocks: Vec<DenseMatrix> = (0..=gen_bound).map(|k| DenseMatrix::identity(g.dim(k))).collect();
    let off = g.offset(w);
    blocks[w as usize].set(x - off, u - off, Rational::one());
    Ok(Some(CandidateMap::from_blocks(alg, blocks)?))
}

pub fn dsum_automorphisms(alg: &SummandAlgebra, gen_bound: u32) -> Result<DsumAutomorphisms> {
    let positive = alg.summands().len() - 1;
    let commutant = virasoro_commutant(alg, gen_bound)?;
    let (diagonal, _) = commutant_is_diagonal(alg, gen_bound, &commutant)?;
    let ctx = AutContext::new(alg, gen_bound)?;
    let mut torus_samples = Vec::new();
    let samples = [Rational::from_int(2), Rational::new(-1, 3), Rational::from_int(5), Rational::new(3, 2)];
    for shift in 0..2 {
        let mut scales = vec![Rational::one()];
        scales.extend((0..positive).map(|i| samples[(i + shift) % samples.len()].clone()));
        let v = ctx.check_automorphism(&summand_scaling(alg, gen_bound, &scales)?)?;
        torus_samples.push((scales, v.accepted));
    }
    let mixing_rejected = match mixing_candidate(alg, gen_bound)? {
        Some(c) => Some(!ctx.check_automorphism(&c)?.accepted),
        None => None,
    };
    let derivation_dim = solve_derivations(alg, gen_bound)?.dim();
    Ok(DsumAutomorphisms {
        gen_bound,
        positive_summands: positive,
        commutant_dim: commutant.len(),
        diagonal,
        torus_samples,
        mixing_rejected,
        derivation_dim,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NonGeneration {
    pub gen_bound: u32,
    pub first_deficient: Option<u32>,
    /// The first highest weight above `gen_bound` within the cutoff.
    pub expected: Option<u32>,
}

impl NonGeneration {
    pub fn holds(&self) -> bool {
        self.first_deficient == self.expected
    }
}

/// Closure of `V_{≤n}` together with `ω` under iterated products.
pub fn non_generation_probe(alg: &SummandAlgebra, gen_bound: u32) -> Result<NonGeneration> {
    let mut gens = Generators::up_to_weight(alg, gen_bound);
    if gen_bound < 2 {
        gens = Generators::new(
            alg,
            gens.vectors.into_iter().chain([alg.conformal().clone()]).collect(),
            gens.labels.into_iter().chain(["omega".to_string()]).collect(),
        )?;
    }
    let closure = SpanClosure::compute(alg, &gens, None, EnumerationOrder::Standard);
    let expected = alg.summands().iter().map(|s| s.hw_weight).find(|&h| h > gen_bound);
    Ok(NonGeneration { gen_bound, first_deficient: closure.first_deficient(), expected })
}

/// Partition numbers `p(0..=n)`.
pub fn partition_numbers(n: usize) -> Vec<u64> {
    let mut p = vec![0u64; n + 1];
    p[0] = 1;
    for part in 1..=n {
        for k in part..=n {
            p[k] += p[k - part];
        }
    }
    p
}
