//! Dense and sparse exact linear algebra over `Rational`.
//!
//! Row reduction clears denominators row by row and runs Bareiss
//! fraction-free elimination over the integers; rationals only reappear in
//! the final back-substitution to reduced row echelon form.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::rational::{format_rational, Rational};

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(format_rational).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    /// Builds a matrix from rows; all rows must share `cols` entries.
    pub fn from_rows(cols: usize, rows: Vec<Vec<Rational>>) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix row");
            data.extend(r);
        }
        Matrix { rows: n, cols, data }
    }

    /// Builds a matrix whose j-th column is `columns[j]`.
    pub fn from_columns(rows: usize, columns: &[Vec<Rational>]) -> Self {
        let mut m = Matrix::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length mismatch");
            for (i, v) in c.iter().enumerate() {
                m[(i, j)] = v.clone();
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

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[Rational]) {
        assert_eq!(col.len(), self.rows);
        for (i, v) in col.iter().enumerate() {
            self[(i, j)] = v.clone();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        let mut out = vec![Rational::zero(); self.rows];
        for (j, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                let a = &self[(i, j)];
                if !a.is_zero() {
                    *o += a * x;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Vertical concatenation.
    pub fn stack(blocks: &[Matrix]) -> Matrix {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let mut data = Vec::new();
        let mut rows = 0;
        for b in blocks {
            assert_eq!(b.cols, cols, "stacked blocks must share column count");
            data.extend(b.data.iter().cloned());
            rows += b.rows;
        }
        Matrix { rows, cols, data }
    }

    pub fn rref(&self) -> Rref {
        rref(self)
    }

    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    /// Basis of `{x : M x = 0}`.
    pub fn kernel(&self) -> Vec<Vec<Rational>> {
        self.rref().kernel()
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Rational::one();
        }
        let r = aug.rref();
        if r.pivots.len() < n || r.pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = r.matrix[(i, n + j)].clone();
            }
        }
        Some(inv)
    }
}

/// Reduced row echelon form with its pivot columns.
#[derive(Clone, Debug)]
pub struct Rref {
    pub matrix: Matrix,
    pub pivots: Vec<usize>,
}

impl Rref {
    pub fn kernel(&self) -> Vec<Vec<Rational>> {
        let n = self.matrix.cols;
        let mut is_pivot = vec![false; n];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..n).filter(|&c| !is_pivot[c]) {
            let mut v = vec![Rational::zero(); n];
            v[free] = Rational::one();
            for (k, &p) in self.pivots.iter().enumerate() {
                let e = &self.matrix[(k, free)];
                if !e.is_zero() {
                    v[p] = -e.clone();
                }
            }
            basis.push(v);
        }
        basis
    }
}

fn integer_row(row: &[Rational]) -> Vec<BigInt> {
    let mut l = BigInt::one();
    for q in row {
        if !q.is_zero() {
            l = l.lcm(q.denom());
        }
    }
    row.iter()
        .map(|q| {
            if q.is_zero() {
                BigInt::zero()
            } else {
                q.numer() * (&l / q.denom())
            }
        })
        .collect()
}

/// Bareiss elimination to row echelon form; returns pivot columns.
fn bareiss(rows: &mut [Vec<BigInt>], ncols: usize) -> Vec<usize> {
    let nrows = rows.len();
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let (top, rest) = rows.split_at_mut(r + 1);
        let pivot_row = &top[r];
        let piv = pivot_row[c].clone();
        for row in rest.iter_mut() {
            let f = row[c].clone();
            for j in c + 1..ncols {
                let a = &row[j];
                let b = &pivot_row[j];
                if a.is_zero() && (f.is_zero() || b.is_zero()) {
                    continue;
                }
                let num = &piv * a - &f * b;
                let (q, rem) = num.div_rem(&prev);
                debug_assert!(rem.is_zero(), "Bareiss division must be exact");
                row[j] = q;
            }
            row[c] = BigInt::zero();
        }
        prev = piv;
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn rref(m: &Matrix) -> Rref {
    let mut rows: Vec<Vec<BigInt>> = (0..m.rows).map(|i| integer_row(m.row(i))).collect();
    let pivots = bareiss(&mut rows, m.cols);
    let rank = pivots.len();
    let mut out: Vec<Vec<Rational>> = rows
        .into_iter()
        .take(rank)
        .map(|r| r.into_iter().map(Rational::from_integer).collect())
        .collect();
    for k in (0..rank).rev() {
        let pc = pivots[k];
        let inv = out[k][pc].recip();
        for v in out[k].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = out[k].clone();
        for row in out.iter_mut().take(k) {
            let f = row[pc].clone();
            if f.is_zero() {
                continue;
            }
            for (j, pv) in pivot_row.iter().enumerate().skip(pc) {
                if !pv.is_zero() {
                    row[j] -= &f * pv;
                }
            }
        }
    }
    let mut matrix = Matrix::zeros(m.rows, m.cols);
    for (i, r) in out.into_iter().enumerate() {
        for (j, v) in r.into_iter().enumerate() {
            matrix[(i, j)] = v;
        }
    }
    Rref { matrix, pivots }
}

/// Result of [`solve_linear`]: one particular solution (if consistent) and a
/// basis of the nullspace of the coefficient matrix.
#[derive(Clone, Debug)]
pub struct LinearSolution {
    pub solution: Option<Vec<Rational>>,
    pub kernel: Vec<Vec<Rational>>,
}

/// Solves `M x = v` exactly.
pub fn solve_linear(m: &Matrix, v: &[Rational]) -> LinearSolution {
    assert_eq!(m.rows, v.len(), "right-hand side length mismatch");
    let n = m.cols;
    let mut aug = Matrix::zeros(m.rows, n + 1);
    for i in 0..m.rows {
        for j in 0..n {
            aug[(i, j)] = m[(i, j)].clone();
        }
        aug[(i, n)] = v[i].clone();
    }
    let r = aug.rref();
    let consistent = r.pivots.last() != Some(&n);
    let solution = consistent.then(|| {
        let mut x = vec![Rational::zero(); n];
        for (k, &p) in r.pivots.iter().enumerate() {
            x[p] = r.matrix[(k, n)].clone();
        }
        x
    });
    let coeff = Rref {
        pivots: r.pivots.iter().copied().filter(|&p| p < n).collect(),
        matrix: {
            let mut c = Matrix::zeros(m.rows, n);
            for i in 0..m.rows {
                for j in 0..n {
                    c[(i, j)] = r.matrix[(i, j)].clone();
                }
            }
            c
        },
    };
    LinearSolution {
        solution,
        kernel: coeff.kernel(),
    }
}

/// Rank of a set of equal-length vectors.
pub fn rank_of(vectors: &[Vec<Rational>], len: usize) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    Matrix::from_rows(len, vectors.to_vec()).rank()
}

pub type SparseVec = BTreeMap<usize, Rational>;

pub fn sparse_from_dense(v: &[Rational]) -> SparseVec {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

pub fn sparse_axpy(acc: &mut SparseVec, coeff: &Rational, v: &SparseVec) {
    for (k, x) in v {
        let e = acc.entry(*k).or_insert_with(Rational::zero);
        *e += coeff * x;
        if e.is_zero() {
            acc.remove(k);
        }
    }
}

/// Incremental sparse row echelon basis of a subspace of `Q^n`.
///
/// Each stored row has leading coefficient 1 at its pivot column and no
/// entries left of it. Reduction eliminates pivot columns left to right, so
/// the remainder of a vector is its unique representative supported on
/// non-pivot columns.
#[derive(Clone, Debug, Default)]
pub struct SparseEchelon {
    rows: HashMap<usize, SparseVec>,
}

impl SparseEchelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.rows.keys().copied().collect();
        p.sort_unstable();
        p
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.rows.contains_key(&col)
    }

    pub fn reduce(&self, mut v: SparseVec) -> SparseVec {
        let mut cursor = 0;
        loop {
            let next = v
                .range(cursor..)
                .find(|(k, _)| self.rows.contains_key(k))
                .map(|(k, x)| (*k, x.clone()));
            let Some((col, coeff)) = next else {
                return v;
            };
            sparse_axpy(&mut v, &-coeff, &self.rows[&col]);
            cursor = col + 1;
        }
    }

    /// Adds `v` to the span; returns false when it was already contained.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        let r = self.reduce(v);
        let Some((&lead, c)) = r.iter().next() else {
            return false;
        };
        let inv = c.recip();
        let normalized: SparseVec = r.into_iter().map(|(k, x)| (k, x * &inv)).collect();
        self.rows.insert(lead, normalized);
        true
    }

    pub fn contains(&self, v: SparseVec) -> bool {
        self.reduce(v).is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> Matrix {
        let cols = rows[0].len();
        Matrix::from_rows(
            cols,
            rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect(),
        )
    }

    #[test]
    fn identity_solve() {
        let s = solve_linear(&Matrix::identity(2), &[int(3), rat(-1, 2)]);
        assert_eq!(s.solution.unwrap(), vec![int(3), rat(-1, 2)]);
        assert!(s.kernel.is_empty());
    }

    #[test]
    fn underdetermined_solve() {
        let a = m(&[&[1, 1]]);
        let s = solve_linear(&a, &[int(1)]);
        let x = s.solution.unwrap();
        assert_eq!(&x[0] + &x[1], int(1));
        assert_eq!(s.kernel.len(), 1);
        assert!(a.mul_vec(&s.kernel[0]).iter().all(Zero::is_zero));
    }

    #[test]
    fn inconsistent_solve() {
        let a = m(&[&[1, 1], &[2, 2]]);
        assert!(solve_linear(&a, &[int(1), int(3)]).solution.is_none());
    }

    #[test]
    fn inverse_and_rank() {
        let a = m(&[&[2, 1], &[1, 1]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Matrix::identity(2));
        assert_eq!(m(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]).rank(), 2);
        assert!(m(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn sparse_echelon_matches_dense_rank() {
        let rows = vec![
            vec![int(0), int(1), int(1)],
            vec![int(0), int(2), int(2)],
            vec![int(1), int(0), int(-1)],
        ];
        let mut e = SparseEchelon::new();
        for r in &rows {
            e.insert(sparse_from_dense(r));
        }
        assert_eq!(e.rank(), rank_of(&rows, 3));
        assert!(e.contains(sparse_from_dense(&[int(1), int(1), int(0)])));
        assert!(!e.contains(sparse_from_dense(&[int(0), int(0), int(1)])));
    }

    fn small_matrix() -> impl Strategy<Value = (Matrix, Vec<Rational>)> {
        (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
            (
                proptest::collection::vec(-4i64..5, r * c),
                proptest::collection::vec(-4i64..5, r),
                Just((r, c)),
            )
                .prop_map(|(entries, rhs, (_, c))| {
                    let rows = entries
                        .chunks(c)
                        .map(|ch| ch.iter().map(|&x| rat(x, 1 + (x.abs() % 3))).collect())
                        .collect();
                    (Matrix::from_rows(c, rows), rhs.into_iter().map(int).collect())
                })
                .prop_filter("nonempty", move |_| r > 0)
        })
    }

    proptest! {
        #[test]
        fn solutions_substitute_back((a, v) in small_matrix()) {
            let s = solve_linear(&a, &v);
            if let Some(x) = &s.solution {
                prop_assert_eq!(a.mul_vec(x), v.clone());
            }
            for k in &s.kernel {
                prop_assert!(a.mul_vec(k).iter().all(Zero::is_zero));
            }
            prop_assert_eq!(s.kernel.len() + a.rank(), a.cols());
        }

        #[test]
        fn sparse_reduction_is_canonical((a, _v) in small_matrix()) {
            let mut e = SparseEchelon::new();
            for i in 0..a.rows() {
                e.insert(sparse_from_dense(a.row(i)));
            }
            prop_assert_eq!(e.rank(), a.rank());
            for i in 0..a.rows() {
                prop_assert!(e.contains(sparse_from_dense(a.row(i))));
            }
        }
    }
}
