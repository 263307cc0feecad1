//! Exact linear algebra over the rationals.
//!
//! Everything here is deterministic: pivots are always the first nonzero
//! column of the row being inserted, rows are processed in the order given,
//! so kernel bases and coordinate systems come out identical run to run.

mod dense;
mod rational;

pub use dense::DenseMatrix;
pub use rational::{ParseRationalError, Rational};

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// A sparse coordinate vector: `(index, value)` pairs sorted by index with
/// no zero values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparseVec {
    entries: Vec<(usize, Rational)>,
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_dense(values: &[Rational]) -> Self {
        SparseVec {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, v)| (i, v.clone()))
                .collect(),
        }
    }

    /// Builds from unsorted pairs, summing duplicates.
    pub fn from_pairs<I: IntoIterator<Item = (usize, Rational)>>(pairs: I) -> Self {
        let mut map: BTreeMap<usize, Rational> = BTreeMap::new();
        for (i, v) in pairs {
            *map.entry(i).or_default() += v;
        }
        SparseVec {
            entries: map.into_iter().filter(|(_, v)| !v.is_zero()).collect(),
        }
    }

    pub fn unit(i: usize) -> Self {
        SparseVec { entries: vec![(i, Rational::one())] }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(usize, Rational)> {
        self.entries.iter()
    }

    pub fn get(&self, i: usize) -> Rational {
        match self.entries.binary_search_by_key(&i, |(j, _)| *j) {
            Ok(p) => self.entries[p].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn first(&self) -> Option<&(usize, Rational)> {
        self.entries.first()
    }

    pub fn to_dense(&self, len: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); len];
        for (i, v) in &self.entries {
            out[*i] = v.clone();
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> SparseVec {
        if c.is_zero() {
            return SparseVec::new();
        }
        SparseVec {
            entries: self.entries.iter().map(|(i, v)| (*i, v * c)).collect(),
        }
    }

    /// `self + c * other`
    pub fn add_scaled(&self, c: &Rational, other: &SparseVec) -> SparseVec {
        if c.is_zero() || other.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some((i, x)), Some((j, y))) => {
                    if i < j {
                        out.push((*i, x.clone()));
                        a.next();
                    } else if j < i {
                        out.push((*j, c * y));
                        b.next();
                    } else {
                        let s = x + &(c * y);
                        if !s.is_zero() {
                            out.push((*i, s));
                        }
                        a.next();
                        b.next();
                    }
                }
                (Some((i, x)), None) => {
                    out.push((*i, x.clone()));
                    a.next();
                }
                (None, Some((j, y))) => {
                    out.push((*j, c * y));
                    b.next();
                }
                (None, None) => break,
            }
        }
        SparseVec { entries: out }
    }

    pub fn dot(&self, other: &SparseVec) -> Rational {
        let mut acc = Rational::zero();
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        while let (Some((i, x)), Some((j, y))) = (a.peek(), b.peek()) {
            match i.cmp(j) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    acc += x * y;
                    a.next();
                    b.next();
                }
            }
        }
        acc
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|(i, _)| *i)
    }
}

impl FromIterator<(usize, Rational)> for SparseVec {
    fn from_iter<T: IntoIterator<Item = (usize, Rational)>>(iter: T) -> Self {
        SparseVec::from_pairs(iter)
    }
}

/// Generalized binomial coefficient `C(n, k)` for integer `n` and `k >= 0`.
pub fn binomial(n: i64, k: i64) -> i64 {
    if k < 0 {
        return 0;
    }
    if n < 0 {
        let s = if k % 2 == 0 { 1 } else { -1 };
        return s * binomial(k - n - 1, k);
    }
    if n < k {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: i128 = 1;
    for i in 0..k {
        r = r * (n - i) as i128 / (i + 1) as i128;
    }
    r as i64
}

/// Sparse matrix stored as a map `(row, col) -> value` without zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), Rational>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, entries: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_dense(rows: &[Vec<Rational>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged matrix");
            for (j, v) in r.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        let dense: Vec<Vec<Rational>> =
            rows.iter().map(|r| r.iter().map(|&x| Rational::from_int(x)).collect()).collect();
        Self::from_dense(&dense)
    }

    pub fn from_rows(cols: usize, rows: &[SparseVec]) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter() {
                m.set(i, *j, v.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, r: usize, c: usize) -> Rational {
        self.entries.get(&(r, c)).cloned().unwrap_or_default()
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        if v.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), v);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &Rational)> {
        self.entries.iter()
    }

    pub fn row_vectors(&self) -> Vec<SparseVec> {
        let mut rows: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); self.rows];
        for ((r, c), v) in &self.entries {
            rows[*r].push((*c, v.clone()));
        }
        rows.into_iter().map(|entries| SparseVec { entries }).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        let mut out = vec![vec![Rational::zero(); self.cols]; self.rows];
        for ((r, c), v) in &self.entries {
            out[*r][*c] = v.clone();
        }
        out
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![Rational::zero(); self.rows];
        for ((r, c), v) in &self.entries {
            if !x[*c].is_zero() {
                out[*r] += v * &x[*c];
            }
        }
        out
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        let dense = self.to_dense();
        let mut d2 = dense.clone();
        d2.swap(a, b);
        *self = SparseMatrix::from_dense(&d2);
    }
}

/// Incrementally maintained reduced row echelon form.
#[derive(Clone, Debug)]
pub struct Echelon {
    ncols: usize,
    rows: Vec<SparseVec>,
    pivots: Vec<usize>,
    pivot_row: HashMap<usize, usize>,
}

impl Echelon {
    pub fn new(ncols: usize) -> Self {
        Echelon { ncols, rows: Vec::new(), pivots: Vec::new(), pivot_row: HashMap::new() }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> &[SparseVec] {
        &self.rows
    }

    /// Remainder of `v` after eliminating every pivot column.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let hits: Vec<(usize, Rational)> = v
            .iter()
            .filter_map(|(c, x)| self.pivot_row.get(c).map(|&r| (r, x.clone())))
            .collect();
        let mut out = v.clone();
        for (r, x) in hits {
            out = out.add_scaled(&-x, &self.rows[r]);
        }
        out
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Inserts `v`; returns `true` if it was independent of the rows so far.
    pub fn insert(&mut self, v: &SparseVec) -> bool {
        let r = self.reduce(v);
        let Some((pc, lead)) = r.first().cloned() else {
            return false;
        };
        let r = r.scale(&lead.recip());
        for row in self.rows.iter_mut() {
            let x = row.get(pc);
            if !x.is_zero() {
                *row = row.add_scaled(&-x, &r);
            }
        }
        self.pivot_row.insert(pc, self.rows.len());
        self.pivots.push(pc);
        self.rows.push(r);
        true
    }

    /// Basis of `{x : row·x = 0 for every row}`, one vector per free column.
    pub fn null_space(&self) -> Vec<SparseVec> {
        let mut basis = Vec::new();
        for free in 0..self.ncols {
            if self.pivot_row.contains_key(&free) {
                continue;
            }
            let mut pairs = vec![(free, Rational::one())];
            for (row, &pc) in self.rows.iter().zip(&self.pivots) {
                let x = row.get(free);
                if !x.is_zero() {
                    pairs.push((pc, -x));
                }
            }
            basis.push(SparseVec::from_pairs(pairs));
        }
        basis
    }
}

/// Exact basis of the right null space of `m`.
pub fn kernel(m: &SparseMatrix) -> Vec<SparseVec> {
    let mut ech = Echelon::new(m.cols());
    for row in m.row_vectors() {
        ech.insert(&row);
    }
    ech.null_space()
}

pub fn rank(m: &SparseMatrix) -> usize {
    let mut ech = Echelon::new(m.cols());
    for row in m.row_vectors() {
        ech.insert(&row);
    }
    ech.rank()
}

/// One exact solution of `m x = b`, or `None` if the system is inconsistent.
pub fn solve(m: &SparseMatrix, b: &[Rational]) -> Result<Option<Vec<Rational>>> {
    if b.len() != m.rows() {
        return Err(Error::Usage(format!(
            "right-hand side has length {}, matrix has {} rows",
            b.len(),
            m.rows()
        )));
    }
    let n = m.cols();
    let mut ech = Echelon::new(n + 1);
    for (row, rhs) in m.row_vectors().into_iter().zip(b) {
        let aug = row.add_scaled(rhs, &SparseVec::unit(n));
        ech.insert(&aug);
    }
    if ech.pivots().contains(&n) {
        return Ok(None);
    }
    let mut x = vec![Rational::zero(); n];
    for (row, &pc) in ech.rows().iter().zip(ech.pivots()) {
        x[pc] = row.get(n);
    }
    debug_assert_eq!(m.mul_vec(&x), b);
    if m.mul_vec(&x) != b {
        return Err(Error::Internal("solve produced a non-solution".into()));
    }
    Ok(Some(x))
}

/// Determinant via fraction-free (Bareiss) elimination after clearing
/// denominators row by row.
pub fn determinant(m: &SparseMatrix) -> Result<Rational> {
    if m.rows() != m.cols() {
        return Err(Error::Usage(format!(
            "determinant of a non-square {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(Rational::one());
    }
    let mut scale = Rational::one();
    let mut a: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for row in m.to_dense() {
        let l = Rational::denom_lcm(row.iter());
        scale *= &l;
        a.push(
            row.iter()
                .map(|x| {
                    let y = x * &l;
                    debug_assert!(y.is_integer());
                    y.numer()
                })
                .collect(),
        );
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return Ok(Rational::zero());
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let det = Rational::from_bigints(sign * &a[n - 1][n - 1], BigInt::one());
    Ok(det / scale)
}

/// A fixed list of independent vectors together with the data needed to
/// read off coordinates of any vector in their span.
#[derive(Clone, Debug)]
pub struct Span {
    echelon: Echelon,
    /// row `j` of the echelon equals `sum_i transform[j][i] * basis[i]`
    transform: Vec<SparseVec>,
    len: usize,
}

impl Span {
    /// `basis` must be linearly independent.
    pub fn new(ncols: usize, basis: &[SparseVec]) -> Result<Self> {
        let d = basis.len();
        // Track combinations by appending an identity block past `ncols`.
        let mut ech = Echelon::new(ncols + d);
        for (i, b) in basis.iter().enumerate() {
            if b.max_index().is_some_and(|m| m >= ncols) {
                return Err(Error::Usage("basis vector outside ambient space".into()));
            }
            let aug = b.add_scaled(&Rational::one(), &SparseVec::unit(ncols + i));
            ech.insert(&aug);
        }
        let mut rows = Vec::new();
        let mut transform = Vec::new();
        for (row, &pc) in ech.rows().iter().zip(ech.pivots()) {
            if pc >= ncols {
                return Err(Error::Usage("span basis is linearly dependent".into()));
            }
            let (head, tail): (Vec<_>, Vec<_>) =
                row.iter().cloned().partition(|(c, _)| *c < ncols);
            rows.push((pc, SparseVec { entries: head }));
            transform.push(SparseVec {
                entries: tail.into_iter().map(|(c, v)| (c - ncols, v)).collect(),
            });
        }
        let mut echelon = Echelon::new(ncols);
        for (pc, r) in &rows {
            echelon.pivot_row.insert(*pc, echelon.rows.len());
            echelon.pivots.push(*pc);
            echelon.rows.push(r.clone());
        }
        Ok(Span { echelon, transform, len: d })
    }

    pub fn dim(&self) -> usize {
        self.len
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.echelon.contains(v)
    }

    /// Coordinates of `v` with respect to the original basis, or `None` if
    /// `v` is outside the span.
    pub fn coordinates(&self, v: &SparseVec) -> Option<Vec<Rational>> {
        if !self.echelon.contains(v) {
            return None;
        }
        let mut c = vec![Rational::zero(); self.len];
        for (j, &pc) in self.echelon.pivots.iter().enumerate() {
            let x = v.get(pc);
            if x.is_zero() {
                continue;
            }
            for (i, t) in self.transform[j].iter() {
                c[*i] += &x * t;
            }
        }
        Some(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(2, 3), 0);
        assert_eq!(binomial(-1, 3), -1);
        assert_eq!(binomial(-2, 2), 3);
        assert_eq!(binomial(3, -1), 0);
    }

    #[test]
    fn kernel_of_identity_is_empty() {
        assert!(kernel(&SparseMatrix::identity(2)).is_empty());
    }

    #[test]
    fn kernel_of_difference_row() {
        let m = SparseMatrix::from_ints(&[&[1, -1]]);
        let k = kernel(&m);
        assert_eq!(k.len(), 1);
        assert_eq!(k[0].to_dense(2), vec![q(1), q(1)]);
    }

    #[test]
    fn kernel_of_sl2_adjoint_e() {
        // ad(e) on (a, e, f) with [e,a] = -2e, [e,e] = 0, [e,f] = a.
        // Columns are images of a, e, f in coordinates (a, e, f).
        let m = SparseMatrix::from_ints(&[&[0, 0, 1], &[-2, 0, 0], &[0, 0, 0]]);
        let k = kernel(&m);
        assert_eq!(k.len(), 1);
        assert_eq!(k[0], SparseVec::unit(1));
    }

    #[test]
    fn solve_cases() {
        let id = SparseMatrix::identity(3);
        let b = vec![q(1), q(-2), Rational::new(3, 4)];
        assert_eq!(solve(&id, &b).unwrap(), Some(b.clone()));
        let two = SparseMatrix::from_ints(&[&[2]]);
        assert_eq!(solve(&two, &[q(1)]).unwrap(), Some(vec![Rational::new(1, 2)]));
        let over = SparseMatrix::from_ints(&[&[1], &[1]]);
        assert_eq!(solve(&over, &[q(1), q(2)]).unwrap(), None);
        assert!(solve(&over, &[q(1)]).is_err());
    }

    #[test]
    fn determinant_cases() {
        assert_eq!(determinant(&SparseMatrix::identity(4)).unwrap(), q(1));
        let m = SparseMatrix::from_ints(&[&[0, 4], &[4, 0]]);
        assert_eq!(determinant(&m).unwrap(), q(-16));
        let gram = SparseMatrix::from_ints(&[&[8, 0, 0], &[0, 0, 4], &[0, 4, 0]]);
        assert_eq!(determinant(&gram).unwrap(), q(-128));
        let mut frac = SparseMatrix::zeros(2, 2);
        frac.set(0, 0, Rational::new(1, 2));
        frac.set(1, 1, Rational::new(1, 3));
        frac.set(0, 1, Rational::new(1, 4));
        assert_eq!(determinant(&frac).unwrap(), Rational::new(1, 6));
        assert!(determinant(&SparseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn span_coordinates() {
        let b = vec![
            SparseVec::from_dense(&[q(1), q(1), q(0)]),
            SparseVec::from_dense(&[q(0), q(1), q(1)]),
        ];
        let s = Span::new(3, &b).unwrap();
        let v = SparseVec::from_dense(&[q(2), q(5), q(3)]);
        assert_eq!(s.coordinates(&v), Some(vec![q(2), q(3)]));
        assert_eq!(s.coordinates(&SparseVec::unit(0)), None);
        assert!(Span::new(3, &[b[0].clone(), b[0].clone()]).is_err());
    }

    fn small_matrix(max_dim: usize) -> impl Strategy<Value = Vec<Vec<Rational>>> {
        (1..=max_dim, 1..=max_dim).prop_flat_map(|(r, c)| {
            prop::collection::vec(
                prop::collection::vec((-3i64..=3, 1i64..=3).prop_map(|(n, d)| Rational::new(n, d)), c),
                r,
            )
        })
    }

    fn square_matrix(n: usize) -> impl Strategy<Value = Vec<Vec<Rational>>> {
        prop::collection::vec(prop::collection::vec((-4i64..=4).prop_map(Rational::from_int), n), n)
    }

    proptest! {
        #[test]
        fn rank_nullity(rows in small_matrix(5)) {
            let m = SparseMatrix::from_dense(&rows);
            let k = kernel(&m);
            prop_assert_eq!(rank(&m) + k.len(), m.cols());
            for v in &k {
                prop_assert!(m.mul_vec(&v.to_dense(m.cols())).iter().all(|x| x.is_zero()));
            }
        }

        #[test]
        fn solve_is_exact(rows in small_matrix(4), x in prop::collection::vec(-5i64..5, 4)) {
            let m = SparseMatrix::from_dense(&rows);
            let x: Vec<Rational> = x.into_iter().take(m.cols()).map(Rational::from_int)
                .chain(std::iter::repeat(Rational::zero())).take(m.cols()).collect();
            let b = m.mul_vec(&x);
            let sol = solve(&m, &b).unwrap().expect("consistent by construction");
            prop_assert_eq!(m.mul_vec(&sol), b);
        }

        #[test]
        fn determinant_row_swap_and_blocks(a in square_matrix(3), b in square_matrix(2)) {
            let ma = SparseMatrix::from_dense(&a);
            let da = determinant(&ma).unwrap();
            let mut swapped = ma.clone();
            swapped.swap_rows(0, 2);
            prop_assert_eq!(determinant(&swapped).unwrap(), -da.clone());
            let db = determinant(&SparseMatrix::from_dense(&b)).unwrap();
            let mut block = vec![vec![Rational::zero(); 5]; 5];
            for i in 0..3 { for j in 0..3 { block[i][j] = a[i][j].clone(); } }
            for i in 0..2 { for j in 0..2 { block[3 + i][3 + j] = b[i][j].clone(); } }
            prop_assert_eq!(determinant(&SparseMatrix::from_dense(&block)).unwrap(), da * db);
        }
    }
}
