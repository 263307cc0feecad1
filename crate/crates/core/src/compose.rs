//! Iterated products of generators: compositions, admissible pairs, the
//! spanning closure that selects a basis family `R_m`, iterate expansion of
//! general modes, and a C₂ probe.

use std::collections::HashMap;

use serde::Serialize;

use crate::algebra::{mode, GradedVector, Subspace, VertexAlgebra};
use crate::error::{Error, Result};
use crate::exactlin::{binomial, Echelon, Rational};

/// An ordered list of homogeneous vectors used as arguments of compositions.
#[derive(Clone, Debug)]
pub struct Generators {
    pub vectors: Vec<GradedVector>,
    pub labels: Vec<String>,
    pub weights: Vec<u32>,
}

impl Generators {
    pub fn new<A: VertexAlgebra + ?Sized>(alg: &A, vectors: Vec<GradedVector>, labels: Vec<String>) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::Usage("one label per generator is required".into()));
        }
        let weights = vectors
            .iter()
            .map(|v| {
                v.weight(alg.grading())
                    .ok_or_else(|| Error::Usage("generators must be nonzero and homogeneous".into()))
            })
            .collect::<Result<_>>()?;
        Ok(Generators { vectors, labels, weights })
    }

    /// The basis of `U = ⊕_{m ≤ n} V_m`, in global basis order.
    pub fn up_to_weight<A: VertexAlgebra + ?Sized>(alg: &A, n: u32) -> Self {
        let g = alg.grading();
        let top = n.min(alg.cutoff());
        let ids: Vec<usize> = (0..=top).flat_map(|w| g.range(w)).collect();
        Generators {
            vectors: ids.iter().map(|&i| GradedVector::basis(i)).collect(),
            labels: ids.iter().map(|&i| alg.label(i)).collect(),
            weights: ids.iter().map(|&i| g.weight_of(i)).collect(),
        }
    }

    pub fn basis_vectors<A: VertexAlgebra + ?Sized>(alg: &A, ids: &[usize]) -> Self {
        let g = alg.grading();
        Generators {
            vectors: ids.iter().map(|&i| GradedVector::basis(i)).collect(),
            labels: ids.iter().map(|&i| alg.label(i)).collect(),
            weights: ids.iter().map(|&i| g.weight_of(i)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn max_weight(&self) -> u32 {
        self.weights.iter().copied().max().unwrap_or(0)
    }
}

/// Mode vector `(m₁, …, m_r)` of a composition of length `r + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Composition {
    pub modes: Vec<i64>,
}

impl Composition {
    pub fn trivial() -> Self {
        Composition { modes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.modes.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// A composition together with generator indices as arguments; the pair
/// evaluates to `(x₀)_{m₁}(x₁)_{m₂}⋯(x_{r-1})_{m_r} x_r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct AdmissiblePair {
    pub modes: Vec<i64>,
    pub args: Vec<usize>,
}

impl AdmissiblePair {
    pub fn new(modes: Vec<i64>, args: Vec<usize>) -> Result<Self> {
        if args.len() != modes.len() + 1 {
            return Err(Error::Usage(format!(
                "composition of length {} needs {} arguments, got {}",
                modes.len() + 1,
                modes.len() + 1,
                args.len()
            )));
        }
        Ok(AdmissiblePair { modes, args })
    }

    pub fn trivial(arg: usize) -> Self {
        AdmissiblePair { modes: Vec::new(), args: vec![arg] }
    }

    pub fn composition(&self) -> Composition {
        Composition { modes: self.modes.clone() }
    }

    pub fn len(&self) -> usize {
        self.args.len()
    }

    pub fn is_empty(&self) -> bool {
        self.args.is_empty()
    }

    /// `Σ wt(xᵢ) − Σ (mᵢ + 1)`.
    pub fn weight(&self, gens: &Generators) -> i64 {
        let a: i64 = self.args.iter().map(|&i| gens.weights[i] as i64).sum();
        let m: i64 = self.modes.iter().map(|m| m + 1).sum();
        a - m
    }

    /// `(x, m) ∘ self`, i.e. `x_m μ(args)`.
    pub fn extend(&self, x: usize, m: i64) -> Self {
        let mut modes = Vec::with_capacity(self.modes.len() + 1);
        modes.push(m);
        modes.extend_from_slice(&self.modes);
        let mut args = Vec::with_capacity(self.args.len() + 1);
        args.push(x);
        args.extend_from_slice(&self.args);
        AdmissiblePair { modes, args }
    }

    /// The inner pair `μ(x₁, …)` and the outer step `(x₀, m₁)`.
    pub fn split_first(&self) -> Option<(usize, i64, AdmissiblePair)> {
        if self.modes.is_empty() {
            return None;
        }
        Some((
            self.args[0],
            self.modes[0],
            AdmissiblePair { modes: self.modes[1..].to_vec(), args: self.args[1..].to_vec() },
        ))
    }

    pub fn describe(&self, gens: &Generators) -> String {
        let args: Vec<&str> = self.args.iter().map(|&i| gens.labels[i].as_str()).collect();
        format!("modes {:?} args ({})", self.modes, args.join(", "))
    }
}

/// Evaluates a pair right to left with arguments taken from `vectors`,
/// which must be indexed like the generators (this is how `μ(g(x⃗))` is
/// formed for a candidate map `g`).
pub fn eval_with<A: VertexAlgebra + ?Sized>(alg: &A, pair: &AdmissiblePair, vectors: &[GradedVector]) -> GradedVector {
    let r = pair.modes.len();
    let mut acc = vectors[pair.args[r]].clone();
    for k in (0..r).rev() {
        acc = mode(alg, &vectors[pair.args[k]], pair.modes[k], &acc);
    }
    acc
}

pub fn eval_composition<A: VertexAlgebra + ?Sized>(alg: &A, gens: &Generators, pair: &AdmissiblePair) -> GradedVector {
    eval_with(alg, pair, &gens.vectors)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EnumerationOrder {
    /// Length ascending, then modes and arguments lexicographically.
    Standard,
    /// Length ascending, then modes and arguments in reverse lexicographic order.
    Reversed,
}

/// Every pair evaluated by the closure, with the kept pair it extends.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub pair: AdmissiblePair,
    pub weight: u32,
    /// `(generator, mode, kept-pair id)`; `None` for length-one pairs.
    pub step: Option<(usize, i64, usize)>,
    /// Id in `kept` if this candidate was independent when inserted.
    pub kept: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpanReport {
    pub weight: u32,
    pub target: usize,
    pub achieved: usize,
    pub pairs_used: usize,
    pub missing: usize,
}

/// The outcome of the layered spanning closure.
#[derive(Clone, Debug)]
pub struct SpanClosure {
    pub generators: Generators,
    pub order: EnumerationOrder,
    pub length_bound: usize,
    pub candidates: Vec<Candidate>,
    /// Candidate ids of independent pairs, in insertion order.
    pub kept: Vec<usize>,
    pub kept_values: Vec<GradedVector>,
    /// Kept ids per weight; this is `R_m` once the weight is full.
    pub per_weight: Vec<Vec<usize>>,
    pub reports: Vec<SpanReport>,
    pub max_length_used: usize,
}

impl SpanClosure {
    /// Runs the closure: layer `ℓ + 1` consists of all `x_m p` with `x` a
    /// generator and `p` a kept pair of layer `ℓ`, for every mode with
    /// target weight in `[0, N]`. Extending only kept pairs loses nothing,
    /// since `x_m` is linear.
    pub fn compute<A: VertexAlgebra + ?Sized>(
        alg: &A,
        gens: &Generators,
        length_bound: Option<usize>,
        order: EnumerationOrder,
    ) -> Self {
        let n = alg.cutoff();
        let g = alg.grading();
        let bound = length_bound.unwrap_or(2 * n as usize + 1);
        let mut echelons: Vec<Echelon> = (0..=n).map(|w| Echelon::new(g.dim(w))).collect();
        let mut closure = SpanClosure {
            generators: gens.clone(),
            order,
            length_bound: bound,
            candidates: Vec::new(),
            kept: Vec::new(),
            kept_values: Vec::new(),
            per_weight: vec![Vec::new(); n as usize + 1],
            reports: Vec::new(),
            max_length_used: 0,
        };
        let mut pairs_used = vec![0usize; n as usize + 1];
        let mut layer: Vec<(AdmissiblePair, Option<(usize, i64, usize)>)> =
            (0..gens.len()).map(|i| (AdmissiblePair::trivial(i), None)).collect();
        let mut length = 1;
        while !layer.is_empty() && length <= bound {
            sort_layer(&mut layer, order);
            let mut new_kept = Vec::new();
            for (pair, step) in layer.drain(..) {
                let w = pair.weight(gens);
                if w < 0 || w > n as i64 {
                    continue;
                }
                let w = w as u32;
                let value = match step {
                    None => gens.vectors[pair.args[0]].clone(),
                    Some((x, m, parent)) => mode(alg, &gens.vectors[x], m, &closure.kept_values[parent]),
                };
                pairs_used[w as usize] += 1;
                let cid = closure.candidates.len();
                let local = crate::algebra::local_coords(g, w, &value.terms);
                let full = echelons[w as usize].rank() == g.dim(w);
                let kept = if !full && !value.truncated && echelons[w as usize].insert(&local) {
                    let kid = closure.kept.len();
                    closure.kept.push(cid);
                    closure.kept_values.push(value);
                    closure.per_weight[w as usize].push(kid);
                    new_kept.push(kid);
                    closure.max_length_used = closure.max_length_used.max(length);
                    Some(kid)
                } else {
                    None
                };
                closure.candidates.push(Candidate { pair, weight: w, step, kept });
            }
            if echelons.iter().enumerate().all(|(w, e)| e.rank() == g.dim(w as u32)) {
                break;
            }
            length += 1;
            if length > bound {
                break;
            }
            for &kid in &new_kept {
                let cid = closure.kept[kid];
                let base = closure.candidates[cid].pair.clone();
                let wb = closure.candidates[cid].weight as i64;
                for (x, &wx) in gens.weights.iter().enumerate() {
                    let wx = wx as i64;
                    // target weight wx + wb - m - 1 in [0, N]
                    for m in (wx + wb - 1 - n as i64)..=(wx + wb - 1) {
                        layer.push((base.extend(x, m), Some((x, m, kid))));
                    }
                }
            }
        }
        closure.reports = (0..=n)
            .map(|w| {
                let target = g.dim(w);
                let achieved = echelons[w as usize].rank();
                SpanReport { weight: w, target, achieved, pairs_used: pairs_used[w as usize], missing: target - achieved }
            })
            .collect();
        closure
    }

    pub fn report(&self, weight: u32) -> &SpanReport {
        &self.reports[weight as usize]
    }

    pub fn spans_everything(&self) -> bool {
        self.reports.iter().all(|r| r.missing == 0)
    }

    /// First weight where the span falls short.
    pub fn first_deficient(&self) -> Option<u32> {
        self.reports.iter().find(|r| r.missing > 0).map(|r| r.weight)
    }

    pub fn kept_pair(&self, kid: usize) -> &AdmissiblePair {
        &self.candidates[self.kept[kid]].pair
    }
}

fn sort_layer(layer: &mut [(AdmissiblePair, Option<(usize, i64, usize)>)], order: EnumerationOrder) {
    match order {
        EnumerationOrder::Standard => layer.sort_by(|a, b| a.0.cmp(&b.0)),
        EnumerationOrder::Reversed => layer.sort_by(|a, b| b.0.cmp(&a.0)),
    }
}

/// `R_m` for every weight, with coordinate extraction in the `R` bases.
#[derive(Clone, Debug)]
pub struct BasisFamily {
    pub closure: SpanClosure,
    pub subspaces: Vec<Subspace>,
}

impl BasisFamily {
    pub fn new(closure: SpanClosure, grading: &crate::algebra::Grading) -> Result<Self> {
        if let Some(r) = closure.reports.iter().find(|r| r.missing > 0) {
            return Err(Error::SpanDeficient { weight: r.weight, target: r.target, achieved: r.achieved });
        }
        let subspaces = closure
            .per_weight
            .iter()
            .enumerate()
            .map(|(w, ids)| {
                let vecs = ids.iter().map(|&k| closure.kept_values[k].clone()).collect();
                Subspace::new(grading, w as u32, vecs)
            })
            .collect::<Result<_>>()?;
        Ok(BasisFamily { closure, subspaces })
    }

    pub fn compute<A: VertexAlgebra + ?Sized>(alg: &A, gens: &Generators, order: EnumerationOrder) -> Result<Self> {
        let closure = SpanClosure::compute(alg, gens, None, order);
        Self::new(closure, alg.grading())
    }

    pub fn generators(&self) -> &Generators {
        &self.closure.generators
    }

    /// `R_m` as admissible pairs.
    pub fn pairs(&self, weight: u32) -> Vec<&AdmissiblePair> {
        self.closure.per_weight[weight as usize].iter().map(|&k| self.closure.kept_pair(k)).collect()
    }

    /// Kept ids forming `R_m`.
    pub fn ids(&self, weight: u32) -> &[usize] {
        &self.closure.per_weight[weight as usize]
    }

    /// Coordinates of a weight-`m` vector in the evaluations of `R_m`.
    pub fn coordinates(&self, weight: u32, v: &GradedVector) -> Option<Vec<Rational>> {
        if v.is_zero() {
            return Some(vec![Rational::zero(); self.subspaces[weight as usize].dim()]);
        }
        self.subspaces[weight as usize].coordinates(v)
    }
}

pub fn spanning_check<A: VertexAlgebra + ?Sized>(alg: &A, gens: &Generators, m: u32, length_bound: Option<usize>) -> Result<SpanReport> {
    if m > alg.cutoff() {
        return Err(Error::Usage(format!("weight {m} is above the cutoff {}", alg.cutoff())));
    }
    let closure = SpanClosure::compute(alg, gens, length_bound, EnumerationOrder::Standard);
    Ok(closure.report(m).clone())
}

pub fn select_basis<A: VertexAlgebra + ?Sized>(alg: &A, gens: &Generators, m: u32) -> Result<Vec<AdmissiblePair>> {
    if m > alg.cutoff() {
        return Err(Error::Usage(format!("weight {m} is above the cutoff {}", alg.cutoff())));
    }
    let closure = SpanClosure::compute(alg, gens, None, EnumerationOrder::Standard);
    let r = closure.report(m);
    if r.missing > 0 {
        return Err(Error::SpanDeficient { weight: m, target: r.target, achieved: r.achieved });
    }
    Ok(closure.per_weight[m as usize].iter().map(|&k| closure.kept_pair(k).clone()).collect())
}

/// A linear combination of admissible pairs.
#[derive(Clone, Debug, Default)]
pub struct ComposedVector {
    pub terms: Vec<(Rational, AdmissiblePair)>,
}

impl ComposedVector {
    pub fn single(pair: AdmissiblePair) -> Self {
        ComposedVector { terms: vec![(Rational::one(), pair)] }
    }

    pub fn evaluate<A: VertexAlgebra + ?Sized>(&self, alg: &A, gens: &Generators) -> GradedVector {
        let mut acc = GradedVector::zero();
        for (c, p) in &self.terms {
            acc = acc.add_scaled(c, &eval_composition(alg, gens, p));
        }
        acc
    }
}

/// `u_n v` with `u` given as a combination of admissible pairs, expanded
/// through the iterate formula
/// `(b_k a)_n v = Σ_i (-1)^i C(k,i) (b_{k-i} a_{n+i} v - (-1)^k a_{k+n-i} b_i v)`
/// so that only generator modes are ever applied directly.
pub fn general_mode<A: VertexAlgebra + ?Sized>(
    alg: &A,
    gens: &Generators,
    u: &ComposedVector,
    n: i64,
    v: &GradedVector,
) -> GradedVector {
    let mut memo = HashMap::new();
    let mut acc = GradedVector::zero();
    for (c, p) in &u.terms {
        acc = acc.add_scaled(c, &pair_mode(alg, gens, p, n, v, &mut memo));
    }
    acc
}

/// `u_n v` for a vector `u`, by first writing `u` in the `R` basis.
pub fn general_mode_vector<A: VertexAlgebra + ?Sized>(
    alg: &A,
    family: &BasisFamily,
    u: &GradedVector,
    n: i64,
    v: &GradedVector,
) -> Result<GradedVector> {
    let mut acc = GradedVector::zero();
    if u.is_zero() {
        return Ok(acc);
    }
    let w = u
        .weight(alg.grading())
        .ok_or_else(|| Error::Usage("general_mode needs a homogeneous vector".into()))?;
    let coords = family
        .coordinates(w, u)
        .ok_or_else(|| Error::NotReachable(format!("vector of weight {w} is outside the span of R_{w}")))?;
    let gens = family.generators();
    let mut memo = HashMap::new();
    for (c, kid) in coords.iter().zip(family.ids(w)) {
        if c.is_zero() {
            continue;
        }
        let p = family.closure.kept_pair(*kid);
        acc = acc.add_scaled(c, &pair_mode(alg, gens, p, n, v, &mut memo));
    }
    Ok(acc)
}

type PairMemo = HashMap<(AdmissiblePair, i64, Vec<(usize, Rational)>), GradedVector>;

fn pair_mode<A: VertexAlgebra + ?Sized>(
    alg: &A,
    gens: &Generators,
    pair: &AdmissiblePair,
    n: i64,
    v: &GradedVector,
    memo: &mut PairMemo,
) -> GradedVector {
    let Some((b, k, a)) = pair.split_first() else {
        return mode(alg, &gens.vectors[pair.args[0]], n, v);
    };
    let key = (pair.clone(), n, v.terms.iter().cloned().collect::<Vec<_>>());
    if let Some(hit) = memo.get(&key) {
        return hit.clone();
    }
    let wb = gens.weights[b] as i64;
    let wa = a.weight(gens);
    let Some(wv) = v.weight(alg.grading()).map(|w| w as i64) else {
        if v.is_zero() {
            return GradedVector { terms: Default::default(), truncated: v.truncated };
        }
        // split a mixed-weight v into homogeneous pieces
        let g = alg.grading();
        let mut acc = GradedVector::zero();
        for w in 0..=alg.cutoff() {
            let piece = GradedVector {
                terms: v.terms.iter().filter(|(i, _)| g.weight_of(*i) == w).cloned().collect(),
                truncated: v.truncated,
            };
            if !piece.is_zero() {
                acc = acc.add(&pair_mode(alg, gens, pair, n, &piece, memo));
            }
        }
        return acc;
    };
    let bv = &gens.vectors[b];
    let limit = (wa + wv - n).max(wb + wv);
    let sign_k = if k.rem_euclid(2) == 0 { 1 } else { -1 };
    let mut acc = GradedVector::zero();
    for i in 0..limit.max(0) {
        let c = binomial(k, i) * if i % 2 == 0 { 1 } else { -1 };
        if c == 0 {
            continue;
        }
        let c = Rational::from_int(c);
        if n + i < wa + wv {
            let inner = pair_mode(alg, gens, &a, n + i, v, memo);
            if !inner.is_zero() || inner.truncated {
                acc = acc.add_scaled(&c, &mode(alg, bv, k - i, &inner));
            }
        }
        if i < wb + wv {
            let inner = mode(alg, bv, i, v);
            if !inner.is_zero() || inner.truncated {
                let t = pair_mode(alg, gens, &a, k + n - i, &inner, memo);
                acc = acc.add_scaled(&(&c * &Rational::from_int(-sign_k)), &t);
            }
        }
    }
    memo.insert(key, acc.clone());
    acc
}

#[derive(Clone, Debug, Serialize)]
pub struct C2Report {
    pub weight: u32,
    pub dim: usize,
    pub c2_dim: usize,
    pub codim: usize,
}

/// `dim (V/C₂V)_m` with `u, v` running over the whole basis.
pub fn c2_probe<A: VertexAlgebra + ?Sized>(alg: &A, m: u32) -> Result<C2Report> {
    let g = alg.grading();
    let all: Vec<GradedVector> = (0..g.total()).map(GradedVector::basis).collect();
    c2_probe_with(alg, m, &all)
}

/// Same, with `u, v` restricted to the given homogeneous vectors.
pub fn c2_probe_with<A: VertexAlgebra + ?Sized>(alg: &A, m: u32, vectors: &[GradedVector]) -> Result<C2Report> {
    if m + 1 > alg.cutoff() {
        return Err(Error::Usage(format!("c2 probe needs m <= N - 1 (m = {m}, N = {})", alg.cutoff())));
    }
    let g = alg.grading();
    let weights: Vec<Option<u32>> = vectors.iter().map(|v| v.weight(g)).collect();
    let mut ech = Echelon::new(g.dim(m));
    for (u, wu) in vectors.iter().zip(&weights) {
        let Some(wu) = wu else { continue };
        for (v, wv) in vectors.iter().zip(&weights) {
            let Some(wv) = wv else { continue };
            if wu + wv + 1 != m {
                continue;
            }
            let x = mode(alg, u, -2, v);
            ech.insert(&crate::algebra::local_coords(g, m, &x.terms));
            if ech.rank() == g.dim(m) {
                break;
            }
        }
    }
    Ok(C2Report { weight: m, dim: g.dim(m), c2_dim: ech.rank(), codim: g.dim(m) - ech.rank() })
}
