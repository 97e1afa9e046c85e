//! Exact dense matrices: fraction-free elimination, rank, nullspace, linear
//! solves and congruence diagonalization.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{primitive_normalize, Rational, Scalar};

/// A rectangular matrix over an exact scalar field, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExactMatrix<K: Scalar> {
    rows: usize,
    cols: usize,
    data: Vec<K>,
}

impl<K: Scalar> ExactMatrix<K> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMatrix {
            rows,
            cols,
            data: vec![K::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = K::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<K>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        ExactMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> K) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
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

    pub fn row(&self, i: usize) -> &[K] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<K>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() + other[(i, j)].clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() - other[(i, j)].clone()
        })
    }

    pub fn neg(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| -self[(i, j)].clone())
    }

    pub fn scale(&self, c: &K) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() * c.clone()
        })
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "dimension mismatch in matrix product"
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a.clone() * b.clone();
                    let cur = out[(i, j)].clone();
                    out[(i, j)] = cur + prod;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[K]) -> Vec<K> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(K::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn map<L: Scalar>(&self, f: impl Fn(&K) -> L) -> ExactMatrix<L> {
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Fraction-free (Bareiss) row echelon form with row pivoting.
    ///
    /// Returns the echelon matrix together with the pivot positions. The
    /// one-step division by the previous pivot is exact over any field and
    /// keeps integer matrices integral.
    pub fn bareiss_echelon(&self) -> (Self, Vec<(usize, usize)>) {
        let mut m = self.clone();
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut prev = K::one();
        let mut r = 0;
        for c in 0..m.cols {
            if r >= m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            if pr != r {
                for j in 0..m.cols {
                    m.data.swap(r * m.cols + j, pr * m.cols + j);
                }
            }
            let pivot = m[(r, c)].clone();
            for i in r + 1..m.rows {
                let head = m[(i, c)].clone();
                for j in c..m.cols {
                    let val = (m[(i, j)].clone() * pivot.clone()
                        - head.clone() * m[(r, j)].clone())
                        / prev.clone();
                    m[(i, j)] = val;
                }
            }
            prev = pivot;
            pivots.push((r, c));
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.bareiss_echelon().1.len()
    }

    /// A basis of `{v : Mv = 0}`. Basis vectors are integer-primitive after
    /// clearing denominators; the dimension is exactly `cols - rank`.
    pub fn nullspace(&self) -> Vec<Vec<K>> {
        let (ech, pivots) = self.bareiss_echelon();
        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let free_cols: Vec<usize> = (0..self.cols).filter(|c| !pivot_cols.contains(c)).collect();
        let mut basis = Vec::with_capacity(free_cols.len());
        for &f in &free_cols {
            let mut v = vec![K::zero(); self.cols];
            v[f] = K::one();
            for &(r, c) in pivots.iter().rev() {
                let mut acc = K::zero();
                for j in c + 1..self.cols {
                    if !ech[(r, j)].is_zero() && !v[j].is_zero() {
                        acc = acc + ech[(r, j)].clone() * v[j].clone();
                    }
                }
                v[c] = -acc / ech[(r, c)].clone();
            }
            basis.push(primitive_normalize(&v));
        }
        basis
    }

    /// The inverse of a square matrix, or `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        for j in 0..n {
            let mut e = vec![K::zero(); n];
            e[j] = K::one();
            let col = self.solve(&e)?;
            for i in 0..n {
                out[(i, j)] = col[i].clone();
            }
        }
        Some(out)
    }

    /// A particular solution of `Mx = b`, with free variables set to zero.
    pub fn solve(&self, b: &[K]) -> Option<Vec<K>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let (ech, pivots) = aug.bareiss_echelon();
        if pivots.iter().any(|&(_, c)| c == self.cols) {
            return None; // inconsistent
        }
        let mut x = vec![K::zero(); self.cols];
        for &(r, c) in pivots.iter().rev() {
            let mut acc = ech[(r, self.cols)].clone();
            for j in c + 1..self.cols {
                if !ech[(r, j)].is_zero() && !x[j].is_zero() {
                    acc = acc - ech[(r, j)].clone() * x[j].clone();
                }
            }
            x[c] = acc / ech[(r, c)].clone();
        }
        Some(x)
    }
}

impl<K: Scalar> std::ops::Index<(usize, usize)> for ExactMatrix<K> {
    type Output = K;
    fn index(&self, (i, j): (usize, usize)) -> &K {
        &self.data[i * self.cols + j]
    }
}

impl<K: Scalar> std::ops::IndexMut<(usize, usize)> for ExactMatrix<K> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut K {
        &mut self.data[i * self.cols + j]
    }
}

/// Result of diagonalizing a symmetric form by congruence.
pub struct Congruence {
    /// Invertible `B` with `B^T Q B = D`.
    pub basis: ExactMatrix<Rational>,
    /// The diagonal matrix `D`.
    pub diagonal: ExactMatrix<Rational>,
    /// Counts of positive and negative diagonal entries (`p + q = rank`).
    pub signature: (usize, usize),
}

/// Diagonalizes a symmetric rational matrix by congruence, `B^T Q B = D`.
///
/// Zero diagonal pivots with a nonzero off-diagonal partner are repaired by
/// first adding row and column `j` to `i`, which the anti-diagonal Lorentzian
/// forms hit immediately.
pub fn congruence_diagonalize(q: &ExactMatrix<Rational>) -> Result<Congruence> {
    if !q.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let n = q.rows();
    let mut m = q.clone();
    let mut b: ExactMatrix<Rational> = ExactMatrix::identity(n);

    // applies the congruence generated by the column op col_i += t * col_j
    let add_col = |m: &mut ExactMatrix<Rational>,
                   b: &mut ExactMatrix<Rational>,
                   i: usize,
                   j: usize,
                   t: &Rational| {
        for r in 0..n {
            let v = m[(r, j)].clone() * t;
            let cur = m[(r, i)].clone();
            m[(r, i)] = cur + v;
        }
        for r in 0..n {
            let v = m[(j, r)].clone() * t;
            let cur = m[(i, r)].clone();
            m[(i, r)] = cur + v;
        }
        for r in 0..n {
            let v = b[(r, j)].clone() * t;
            let cur = b[(r, i)].clone();
            b[(r, i)] = cur + v;
        }
    };
    let swap =
        |m: &mut ExactMatrix<Rational>, b: &mut ExactMatrix<Rational>, i: usize, j: usize| {
            for r in 0..n {
                let t = m[(r, i)].clone();
                m[(r, i)] = m[(r, j)].clone();
                m[(r, j)] = t;
            }
            for r in 0..n {
                let t = m[(i, r)].clone();
                m[(i, r)] = m[(j, r)].clone();
                m[(j, r)] = t;
            }
            for r in 0..n {
                let t = b[(r, i)].clone();
                b[(r, i)] = b[(r, j)].clone();
                b[(r, j)] = t;
            }
        };

    for i in 0..n {
        if m[(i, i)].is_zero() {
            if let Some(j) = (i + 1..n).find(|&j| !m[(j, j)].is_zero()) {
                swap(&mut m, &mut b, i, j);
            } else if let Some(j) = (i + 1..n).find(|&j| !m[(i, j)].is_zero()) {
                add_col(&mut m, &mut b, i, j, &Rational::one());
            }
        }
        let pivot = m[(i, i)].clone();
        if pivot.is_zero() {
            continue;
        }
        for j in i + 1..n {
            if !m[(i, j)].is_zero() {
                let t = -(m[(i, j)].clone() / pivot.clone());
                add_col(&mut m, &mut b, j, i, &t);
            }
        }
    }

    let mut p = 0;
    let mut qn = 0;
    let mut d = ExactMatrix::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = m[(i, i)].clone();
        if m[(i, i)].is_positive() {
            p += 1;
        } else if m[(i, i)].is_negative() {
            qn += 1;
        }
    }
    Ok(Congruence {
        basis: b,
        diagonal: d,
        signature: (p, qn),
    })
}

/// Incremental row reducer for span membership and rank bookkeeping over a
/// field. Rows are kept in reduced echelon form.
pub struct SpanReducer<K: Scalar> {
    dim: usize,
    /// (pivot column, reduced row with pivot scaled to 1)
    rows: Vec<(usize, Vec<K>)>,
}

impl<K: Scalar> SpanReducer<K> {
    pub fn new(dim: usize) -> Self {
        SpanReducer {
            dim,
            rows: Vec::new(),
        }
    }

    pub fn from_vectors(dim: usize, vectors: &[Vec<K>]) -> Self {
        let mut s = Self::new(dim);
        for v in vectors {
            s.insert(v);
        }
        s
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the stored rows; the remainder is zero exactly
    /// when `v` lies in the span.
    pub fn reduce(&self, v: &[K]) -> Vec<K> {
        assert_eq!(v.len(), self.dim);
        let mut w = v.to_vec();
        for (pc, row) in &self.rows {
            if !w[*pc].is_zero() {
                let f = w[*pc].clone();
                for j in 0..self.dim {
                    let delta = row[j].clone() * f.clone();
                    let cur = w[j].clone();
                    w[j] = cur - delta;
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[K]) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }

    /// Inserts `v`; returns true when it enlarged the span.
    pub fn insert(&mut self, v: &[K]) -> bool {
        let w = self.reduce(v);
        let Some(pc) = w.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = w[pc].inv();
        let normalized: Vec<K> = w.into_iter().map(|x| x * inv.clone()).collect();
        // back-substitute into the existing rows to keep them fully reduced
        for (_, row) in &mut self.rows {
            if !row[pc].is_zero() {
                let f = row[pc].clone();
                for j in 0..self.dim {
                    let delta = normalized[j].clone() * f.clone();
                    let cur = row[j].clone();
                    row[j] = cur - delta;
                }
            }
        }
        self.rows.push((pc, normalized));
        self.rows.sort_by_key(|(pc, _)| *pc);
        true
    }
}

/// Selects a linearly independent subset of `vectors`, preserving order.
pub fn independent_subset<K: Scalar>(dim: usize, vectors: &[Vec<K>]) -> Vec<Vec<K>> {
    let mut reducer = SpanReducer::new(dim);
    let mut out = Vec::new();
    for v in vectors {
        if reducer.insert(v) {
            out.push(v.clone());
        }
    }
    out
}

/// A basis of functionals vanishing on the span of `vectors` (the left
/// nullspace of the matrix whose rows are the vectors).
pub fn annihilator<K: Scalar>(dim: usize, vectors: &[Vec<K>]) -> Vec<Vec<K>> {
    if vectors.is_empty() {
        return ExactMatrix::<K>::zeros(1, dim).nullspace();
    }
    ExactMatrix::from_rows(vectors.to_vec()).nullspace()
}
