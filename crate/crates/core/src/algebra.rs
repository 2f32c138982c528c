//! Finite-dimensional unital associative algebras over the rationals, given
//! by structure constants, together with subspaces, ideals and centers.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{sparse_from_dense, Matrix, SparseEchelon, SparseVec};
use crate::rational::{format_rational, Rational};

/// Coordinates of an element relative to its algebra's basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AlgElem(Vec<Rational>);

impl fmt::Debug for AlgElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(format_rational).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

impl AlgElem {
    pub fn new(coords: Vec<Rational>) -> Self {
        AlgElem(coords)
    }

    pub fn zero(dim: usize) -> Self {
        AlgElem(vec![Rational::zero(); dim])
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = AlgElem::zero(dim);
        v.0[i] = Rational::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Rational> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, c: &Rational) -> AlgElem {
        AlgElem(self.0.iter().map(|x| x * c).collect())
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.0.iter().enumerate().filter(|(_, x)| !x.is_zero())
    }

    pub fn to_sparse(&self) -> SparseVec {
        sparse_from_dense(&self.0)
    }

    pub fn from_sparse(dim: usize, v: &SparseVec) -> AlgElem {
        let mut out = AlgElem::zero(dim);
        for (k, x) in v {
            out.0[*k] = x.clone();
        }
        out
    }

    pub(crate) fn coord_mut(&mut self, i: usize) -> &mut Rational {
        &mut self.0[i]
    }
}

impl Add for &AlgElem {
    type Output = AlgElem;
    fn add(self, rhs: &AlgElem) -> AlgElem {
        assert_eq!(self.dim(), rhs.dim(), "adding elements of different algebras");
        AlgElem(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &AlgElem {
    type Output = AlgElem;
    fn sub(self, rhs: &AlgElem) -> AlgElem {
        assert_eq!(self.dim(), rhs.dim(), "subtracting elements of different algebras");
        AlgElem(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &AlgElem {
    type Output = AlgElem;
    fn neg(self) -> AlgElem {
        AlgElem(self.0.iter().map(|a| -a).collect())
    }
}

impl Mul<&AlgElem> for &Rational {
    type Output = AlgElem;
    fn mul(self, rhs: &AlgElem) -> AlgElem {
        rhs.scale(self)
    }
}

/// Sum of a sequence of elements of dimension `dim`.
pub fn sum_elems<'a>(dim: usize, items: impl IntoIterator<Item = &'a AlgElem>) -> AlgElem {
    let mut acc = AlgElem::zero(dim);
    for it in items {
        acc = &acc + it;
    }
    acc
}

/// Sparse product of two basis elements.
pub type BasisProduct = Vec<(usize, Rational)>;

/// A finite-dimensional associative unital algebra over Q.
///
/// Structure constants are stored sparsely: `table[i * dim + j]` lists the
/// nonzero coordinates of `u_i * u_j`. Construction validates associativity
/// on every basis triple and the two-sided unit.
#[derive(Clone, PartialEq, Eq)]
pub struct StructAlgebra {
    labels: Vec<String>,
    table: Vec<BasisProduct>,
    unit: AlgElem,
}

impl fmt::Debug for StructAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StructAlgebra")
            .field("dim", &self.dim())
            .field("labels", &self.labels)
            .finish()
    }
}

impl StructAlgebra {
    /// Builds and validates an algebra from the products of basis pairs.
    /// `products` yields `(i, j, u_i * u_j)`; missing pairs multiply to zero.
    pub fn new(
        labels: Vec<String>,
        products: impl IntoIterator<Item = (usize, usize, AlgElem)>,
        unit: AlgElem,
    ) -> Result<Self> {
        let dim = labels.len();
        if dim == 0 {
            return Err(Error::InvalidAlgebra("dimension must be positive".into()));
        }
        let mut table = vec![BasisProduct::new(); dim * dim];
        for (i, j, p) in products {
            if i >= dim || j >= dim || p.dim() != dim {
                return Err(Error::InvalidAlgebra(format!(
                    "product entry ({i}, {j}) out of range"
                )));
            }
            table[i * dim + j] = p.support().map(|(k, x)| (k, x.clone())).collect();
        }
        Self::from_table(labels, table, unit)
    }

    pub(crate) fn from_table(
        labels: Vec<String>,
        table: Vec<BasisProduct>,
        unit: AlgElem,
    ) -> Result<Self> {
        let dim = labels.len();
        if unit.dim() != dim {
            return Err(Error::InvalidElement {
                expected: dim,
                got: unit.dim(),
            });
        }
        let alg = StructAlgebra {
            labels,
            table,
            unit,
        };
        alg.check_associativity()?;
        alg.check_unit()?;
        Ok(alg)
    }

    /// The rationals, basis `{1}`.
    pub fn rationals() -> Self {
        StructAlgebra::new(
            vec!["1".into()],
            [(0, 0, AlgElem::basis(1, 0))],
            AlgElem::basis(1, 0),
        )
        .expect("Q is an algebra")
    }

    /// Q(i) with basis `{1, i}`.
    pub fn gaussian() -> Self {
        let e = |k| AlgElem::basis(2, k);
        StructAlgebra::new(
            vec!["1".into(), "i".into()],
            [
                (0, 0, e(0)),
                (0, 1, e(1)),
                (1, 0, e(1)),
                (1, 1, (&e(0)).neg()),
            ],
            e(0),
        )
        .expect("Q(i) is an algebra")
    }

    /// Full matrix algebra `M_n(Q)` with matrix units `E_ij` in row-major order.
    pub fn matrix_algebra(n: usize) -> Self {
        let dim = n * n;
        let mut products = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    products.push((i * n + j, j * n + l, AlgElem::basis(dim, i * n + l)));
                }
            }
        }
        let mut unit = AlgElem::zero(dim);
        for i in 0..n {
            *unit.coord_mut(i * n + i) = Rational::one();
        }
        let labels = (0..n)
            .flat_map(|i| (0..n).map(move |j| format!("E{}{}", i + 1, j + 1)))
            .collect();
        StructAlgebra::new(labels, products, unit).expect("matrix algebra")
    }

    /// Direct product of algebras; labels get the given per-summand suffixes.
    pub fn direct_sum(parts: &[(&StructAlgebra, &str)]) -> Self {
        let dim: usize = parts.iter().map(|(a, _)| a.dim()).sum();
        let mut labels = Vec::with_capacity(dim);
        let mut table = vec![BasisProduct::new(); dim * dim];
        let mut unit = AlgElem::zero(dim);
        let mut off = 0;
        for (a, suffix) in parts {
            let d = a.dim();
            labels.extend(a.labels.iter().map(|l| format!("{l}{suffix}")));
            for i in 0..d {
                for j in 0..d {
                    table[(off + i) * dim + off + j] = a
                        .basis_product(i, j)
                        .iter()
                        .map(|(k, x)| (off + k, x.clone()))
                        .collect();
                }
                *unit.coord_mut(off + i) = a.unit.coords()[i].clone();
            }
            off += d;
        }
        StructAlgebra {
            labels,
            table,
            unit,
        }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn unit(&self) -> &AlgElem {
        &self.unit
    }

    pub fn zero_elem(&self) -> AlgElem {
        AlgElem::zero(self.dim())
    }

    pub fn basis_elem(&self, i: usize) -> AlgElem {
        AlgElem::basis(self.dim(), i)
    }

    pub fn basis_product(&self, i: usize, j: usize) -> &BasisProduct {
        &self.table[i * self.dim() + j]
    }

    pub fn element(&self, coords: Vec<Rational>) -> Result<AlgElem> {
        if coords.len() != self.dim() {
            return Err(Error::InvalidElement {
                expected: self.dim(),
                got: coords.len(),
            });
        }
        Ok(AlgElem(coords))
    }

    /// Bilinear extension of the structure constants.
    pub fn multiply(&self, a: &AlgElem, b: &AlgElem) -> Result<AlgElem> {
        for x in [a, b] {
            if x.dim() != self.dim() {
                return Err(Error::InvalidElement {
                    expected: self.dim(),
                    got: x.dim(),
                });
            }
        }
        Ok(self.mul(a, b))
    }

    /// As [`multiply`](Self::multiply), panicking on a dimension mismatch.
    pub fn mul(&self, a: &AlgElem, b: &AlgElem) -> AlgElem {
        assert_eq!(a.dim(), self.dim(), "left factor has wrong dimension");
        assert_eq!(b.dim(), self.dim(), "right factor has wrong dimension");
        let mut out = AlgElem::zero(self.dim());
        for (i, x) in a.support() {
            for (j, y) in b.support() {
                let xy = x * y;
                for (k, c) in self.basis_product(i, j) {
                    out.0[*k] += &xy * c;
                }
            }
        }
        out
    }

    fn mul_sparse(&self, a: &[(usize, Rational)], k: usize, left: bool) -> SparseVec {
        let mut acc = SparseVec::new();
        for (p, c) in a {
            let prod = if left {
                self.basis_product(*p, k)
            } else {
                self.basis_product(k, *p)
            };
            for (q, d) in prod {
                let e = acc.entry(*q).or_insert_with(Rational::zero);
                *e += c * d;
                if e.is_zero() {
                    acc.remove(q);
                }
            }
        }
        acc
    }

    /// Exhaustive `(u_i u_j) u_k = u_i (u_j u_k)` over all basis triples.
    pub fn check_associativity(&self) -> Result<()> {
        let n = self.dim();
        let bad = (0..n).into_par_iter().find_map_any(|i| {
            for j in 0..n {
                let ij = self.basis_product(i, j);
                for k in 0..n {
                    let jk = self.basis_product(j, k);
                    if ij.is_empty() && jk.is_empty() {
                        continue;
                    }
                    let lhs = self.mul_sparse(ij, k, true);
                    let rhs = self.mul_sparse(jk, i, false);
                    if lhs != rhs {
                        return Some((i, j, k));
                    }
                }
            }
            None
        });
        match bad {
            None => Ok(()),
            Some((i, j, k)) => Err(Error::AssociativityFailure(format!(
                "({}, {}, {})",
                self.labels[i], self.labels[j], self.labels[k]
            ))),
        }
    }

    fn check_unit(&self) -> Result<()> {
        for i in 0..self.dim() {
            let u = self.basis_elem(i);
            if self.mul(&self.unit, &u) != u || self.mul(&u, &self.unit) != u {
                return Err(Error::InvalidAlgebra(format!(
                    "unit is not a two-sided identity on {}",
                    self.labels[i]
                )));
            }
        }
        Ok(())
    }

    /// Matrix of `x -> a x` on coordinate vectors.
    pub fn left_mult_matrix(&self, a: &AlgElem) -> Matrix {
        let cols: Vec<Vec<Rational>> = (0..self.dim())
            .map(|j| self.mul(a, &self.basis_elem(j)).into_coords())
            .collect();
        Matrix::from_columns(self.dim(), &cols)
    }

    /// Matrix of `x -> x a` on coordinate vectors.
    pub fn right_mult_matrix(&self, a: &AlgElem) -> Matrix {
        let cols: Vec<Vec<Rational>> = (0..self.dim())
            .map(|j| self.mul(&self.basis_elem(j), a).into_coords())
            .collect();
        Matrix::from_columns(self.dim(), &cols)
    }

    pub fn commutes_with_basis(&self, a: &AlgElem) -> bool {
        (0..self.dim()).all(|i| {
            let u = self.basis_elem(i);
            self.mul(a, &u) == self.mul(&u, a)
        })
    }

    pub fn is_idempotent(&self, a: &AlgElem) -> bool {
        &self.mul(a, a) == a
    }

    /// Basis of the center, as the kernel of `a -> (a u_i - u_i a)_i`.
    pub fn center(&self) -> Vec<AlgElem> {
        let n = self.dim();
        let mut rows = Vec::with_capacity(n * n);
        for i in 0..n {
            for k in 0..n {
                let mut row = vec![Rational::zero(); n];
                for (j, r) in row.iter_mut().enumerate() {
                    // coefficient of u_k in u_j u_i - u_i u_j
                    let c1 = coeff_of(self.basis_product(j, i), k);
                    let c2 = coeff_of(self.basis_product(i, j), k);
                    *r = c1 - c2;
                }
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
        if rows.is_empty() {
            return (0..n).map(|i| self.basis_elem(i)).collect();
        }
        Matrix::from_rows(n, rows)
            .kernel()
            .into_iter()
            .map(AlgElem)
            .collect()
    }

    pub fn central_idempotent(&self, e: &AlgElem) -> Result<CentralIdempotent> {
        if e.dim() != self.dim() {
            return Err(Error::InvalidElement {
                expected: self.dim(),
                got: e.dim(),
            });
        }
        if !self.is_idempotent(e) {
            return Err(Error::NotCentralIdempotent(format!(
                "{e:?} is not idempotent"
            )));
        }
        if !self.commutes_with_basis(e) {
            return Err(Error::NotCentralIdempotent(format!("{e:?} is not central")));
        }
        Ok(CentralIdempotent(e.clone()))
    }

    /// Basis of the ideal `A e`: products of the basis with `e`, reduced to a
    /// maximal independent subset in basis order.
    pub fn idempotent_ideal_basis(&self, e: &CentralIdempotent) -> Vec<AlgElem> {
        self.ideal(e).basis
    }

    /// The ideal `A e` as a subspace with coordinate extraction.
    pub fn ideal(&self, e: &CentralIdempotent) -> Subspace {
        let candidates = (0..self.dim()).map(|i| {
            let u = self.basis_elem(i);
            let ue = self.mul(&u, &e.0);
            let label = if ue == u {
                self.labels[i].clone()
            } else {
                format!("{}*e", self.labels[i])
            };
            (label, ue)
        });
        Subspace::from_spanning(self.dim(), candidates)
    }

    /// The subalgebra spanned by `space`, with unit `unit`, as a standalone
    /// algebra in the coordinates of `space`.
    pub fn subalgebra(&self, space: &Subspace, unit: &AlgElem) -> Result<StructAlgebra> {
        let k = space.dim();
        let mut table = vec![BasisProduct::new(); k * k];
        for p in 0..k {
            for q in 0..k {
                let prod = self.mul(&space.basis[p], &space.basis[q]);
                let c = space.coordinates(&prod).ok_or_else(|| {
                    Error::NotASubring(format!(
                        "{} * {} leaves the span",
                        space.labels[p], space.labels[q]
                    ))
                })?;
                table[p * k + q] = c
                    .into_iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .collect();
            }
        }
        let u = space
            .coordinates(unit)
            .ok_or_else(|| Error::NotASubring("unit outside the span".into()))?;
        StructAlgebra::from_table(space.labels.clone(), table, AlgElem(u))
    }

    /// `A e` as a unital algebra with unit `e`.
    pub fn ideal_algebra(&self, e: &CentralIdempotent) -> Result<(StructAlgebra, Subspace)> {
        let space = self.ideal(e);
        if space.dim() == 0 {
            return Err(Error::InvalidAlgebra("zero ideal has no algebra structure".into()));
        }
        let alg = self.subalgebra(&space, &e.0)?;
        Ok((alg, space))
    }
}

fn coeff_of(p: &BasisProduct, k: usize) -> Rational {
    p.iter()
        .find(|(i, _)| *i == k)
        .map(|(_, c)| c.clone())
        .unwrap_or_else(Rational::zero)
}

/// A verified central idempotent of some algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CentralIdempotent(AlgElem);

impl CentralIdempotent {
    pub fn elem(&self) -> &AlgElem {
        &self.0
    }

    pub(crate) fn new_unchecked(e: AlgElem) -> Self {
        CentralIdempotent(e)
    }
}

/// A linear subspace of `Q^n` with a fixed basis and exact coordinate
/// extraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<AlgElem>,
    labels: Vec<String>,
    pivots: Vec<usize>,
    // inverse of the basis matrix restricted to the pivot rows
    coord_map: Matrix,
}

impl Subspace {
    /// Keeps the candidates that are independent of the ones before them.
    pub fn from_spanning(
        ambient: usize,
        candidates: impl IntoIterator<Item = (String, AlgElem)>,
    ) -> Subspace {
        let mut ech = SparseEchelon::new();
        let mut basis = Vec::new();
        let mut labels = Vec::new();
        for (label, v) in candidates {
            assert_eq!(v.dim(), ambient);
            if ech.insert(v.to_sparse()) {
                basis.push(v);
                labels.push(label);
            }
        }
        Subspace::from_basis(ambient, basis, labels)
    }

    /// `basis` must be linearly independent.
    pub fn from_basis(ambient: usize, basis: Vec<AlgElem>, labels: Vec<String>) -> Subspace {
        let k = basis.len();
        if k == 0 {
            return Subspace {
                ambient,
                basis,
                labels,
                pivots: Vec::new(),
                coord_map: Matrix::zeros(0, 0),
            };
        }
        let rows: Vec<Vec<Rational>> = basis.iter().map(|b| b.coords().to_vec()).collect();
        let bt = Matrix::from_rows(ambient, rows);
        let pivots = bt.rref().pivots;
        assert_eq!(pivots.len(), k, "subspace basis is not independent");
        let mut square = Matrix::zeros(k, k);
        for (r, &p) in pivots.iter().enumerate() {
            for (c, b) in basis.iter().enumerate() {
                square[(r, c)] = b.coords()[p].clone();
            }
        }
        let coord_map = square.inverse().expect("pivot block is invertible");
        Subspace {
            ambient,
            basis,
            labels,
            pivots,
            coord_map,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[AlgElem] {
        &self.basis
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Coordinates of `v` in this basis, or `None` if `v` is outside the span.
    pub fn coordinates(&self, v: &AlgElem) -> Option<Vec<Rational>> {
        assert_eq!(v.dim(), self.ambient);
        if self.basis.is_empty() {
            return v.is_zero().then(Vec::new);
        }
        let restricted: Vec<Rational> = self.pivots.iter().map(|&p| v.0[p].clone()).collect();
        let c = self.coord_map.mul_vec(&restricted);
        (self.combine(&c) == *v).then_some(c)
    }

    pub fn contains(&self, v: &AlgElem) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn combine(&self, coords: &[Rational]) -> AlgElem {
        let mut out = AlgElem::zero(self.ambient);
        for (c, b) in coords.iter().zip(&self.basis) {
            if c.is_zero() {
                continue;
            }
            for (k, x) in b.support() {
                out.0[k] += c * x;
            }
        }
        out
    }

    /// Ambient-coordinate matrix whose columns are the basis vectors.
    pub fn embedding(&self) -> Matrix {
        let cols: Vec<Vec<Rational>> = self.basis.iter().map(|b| b.coords().to_vec()).collect();
        Matrix::from_columns(self.ambient, &cols)
    }

    /// Subspace equality by mutual containment.
    pub fn same_span(&self, other: &Subspace) -> bool {
        self.dim() == other.dim() && other.basis.iter().all(|b| self.contains(b))
    }
}
