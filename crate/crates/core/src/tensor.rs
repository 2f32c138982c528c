//! `S ⊗_R S` for a subring `R` of a structure-constant algebra `S`.
//!
//! The space is the quotient of `S ⊗_Q S` (coordinates indexed by basis
//! pairs `(i, j) -> i * dim + j`) by the span of the balancing relations
//! `u_i r ⊗ u_j - u_i ⊗ r u_j`. Elements are kept as sparse vectors over
//! pair indices; two elements are equal in the quotient iff their
//! difference reduces to zero against the relation echelon basis.

use std::collections::HashMap;

use num_traits::Zero;

use crate::algebra::{AlgElem, StructAlgebra, Subspace};
use crate::error::{Error, Result};
use crate::matrix::{sparse_axpy, SparseEchelon, SparseVec};
use crate::rational::Rational;

/// An element of `S ⊗_Q S`, sparse over basis pairs.
pub type Tensor = SparseVec;

#[derive(Clone, Debug)]
pub struct BimoduleTensorSpace {
    big: StructAlgebra,
    subring: Subspace,
    relations: SparseEchelon,
    quotient_basis: Vec<usize>,
    quotient_index: HashMap<usize, usize>,
}

/// Builds `S ⊗_R S` where `R` is spanned by `subring_basis` inside `S`.
pub fn tensor_over_subring(s: &StructAlgebra, subring_basis: &[AlgElem]) -> Result<BimoduleTensorSpace> {
    let n = s.dim();
    let labels = (0..subring_basis.len()).map(|i| format!("r{i}"));
    let sub = Subspace::from_spanning(n, labels.zip(subring_basis.iter().cloned()));
    if sub.dim() != subring_basis.len() {
        return Err(Error::NotASubring("subring basis is linearly dependent".into()));
    }
    if !sub.contains(s.unit()) {
        return Err(Error::NotASubring("subring does not contain the unit".into()));
    }
    for a in sub.basis() {
        for b in sub.basis() {
            if !sub.contains(&s.mul(a, b)) {
                return Err(Error::NotASubring(format!(
                    "product {} * {} leaves the span",
                    crate::linmap::describe(s, a),
                    crate::linmap::describe(s, b)
                )));
            }
        }
    }

    // u_i r and r u_j for all basis i and subring generators r
    let right: Vec<Vec<AlgElem>> = sub
        .basis()
        .iter()
        .map(|r| (0..n).map(|i| s.mul(&s.basis_elem(i), r)).collect())
        .collect();
    let left: Vec<Vec<AlgElem>> = sub
        .basis()
        .iter()
        .map(|r| (0..n).map(|j| s.mul(r, &s.basis_elem(j))).collect())
        .collect();

    let mut relations = SparseEchelon::new();
    for k in 0..sub.dim() {
        for i in 0..n {
            for j in 0..n {
                let mut rel = Tensor::new();
                for (p, c) in right[k][i].support() {
                    add_entry(&mut rel, p * n + j, c);
                }
                for (q, c) in left[k][j].support() {
                    add_entry(&mut rel, i * n + q, &-c);
                }
                if !rel.is_empty() {
                    relations.insert(rel);
                }
            }
        }
    }
    let quotient_basis: Vec<usize> = (0..n * n).filter(|c| !relations.is_pivot(*c)).collect();
    let quotient_index = quotient_basis.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    Ok(BimoduleTensorSpace {
        big: s.clone(),
        subring: sub,
        relations,
        quotient_basis,
        quotient_index,
    })
}

fn add_entry(t: &mut Tensor, key: usize, c: &Rational) {
    let e = t.entry(key).or_insert_with(Rational::zero);
    *e += c;
    if e.is_zero() {
        t.remove(&key);
    }
}

impl BimoduleTensorSpace {
    pub fn algebra(&self) -> &StructAlgebra {
        &self.big
    }

    pub fn subring(&self) -> &Subspace {
        &self.subring
    }

    /// Dimension of `S ⊗_R S` over Q.
    pub fn dim(&self) -> usize {
        self.quotient_basis.len()
    }

    pub fn relation_rank(&self) -> usize {
        self.relations.rank()
    }

    fn n(&self) -> usize {
        self.big.dim()
    }

    /// `a ⊗ b`.
    pub fn pure(&self, a: &AlgElem, b: &AlgElem) -> Tensor {
        let n = self.n();
        let mut t = Tensor::new();
        for (i, x) in a.support() {
            for (j, y) in b.support() {
                t.insert(i * n + j, x * y);
            }
        }
        t
    }

    /// `Σ a_k ⊗ b_k`.
    pub fn from_terms<'a>(&self, terms: impl IntoIterator<Item = (&'a AlgElem, &'a AlgElem)>) -> Tensor {
        let mut t = Tensor::new();
        for (a, b) in terms {
            sparse_axpy(&mut t, &crate::rational::one(), &self.pure(a, b));
        }
        t
    }

    /// `s · t`, acting on the left tensor factor.
    pub fn left_mul(&self, s: &AlgElem, t: &Tensor) -> Tensor {
        let n = self.n();
        let mut out = Tensor::new();
        for (&key, c) in t {
            let (i, j) = (key / n, key % n);
            let si = self.big.mul(s, &self.big.basis_elem(i));
            for (p, x) in si.support() {
                add_entry(&mut out, p * n + j, &(x * c));
            }
        }
        out
    }

    /// `t · s`, acting on the right tensor factor.
    pub fn right_mul(&self, t: &Tensor, s: &AlgElem) -> Tensor {
        let n = self.n();
        let mut out = Tensor::new();
        for (&key, c) in t {
            let (i, j) = (key / n, key % n);
            let js = self.big.mul(&self.big.basis_elem(j), s);
            for (q, x) in js.support() {
                add_entry(&mut out, i * n + q, &(x * c));
            }
        }
        out
    }

    /// The multiplication map `m(a ⊗ b) = ab`, well defined on the quotient.
    pub fn multiply(&self, t: &Tensor) -> AlgElem {
        let n = self.n();
        let mut out = self.big.zero_elem();
        for (&key, c) in t {
            let (i, j) = (key / n, key % n);
            for (k, x) in self.big.basis_product(i, j) {
                *out.coord_mut(*k) += c * x;
            }
        }
        out
    }

    /// Coordinates of the class of `t` in the quotient basis.
    pub fn project(&self, t: &Tensor) -> Vec<Rational> {
        let r = self.relations.reduce(t.clone());
        let mut out = vec![Rational::zero(); self.dim()];
        for (k, x) in r {
            out[self.quotient_index[&k]] = x;
        }
        out
    }

    /// Representative in `S ⊗_Q S` of quotient coordinates.
    pub fn lift(&self, coords: &[Rational]) -> Tensor {
        coords
            .iter()
            .zip(&self.quotient_basis)
            .filter(|(x, _)| !x.is_zero())
            .map(|(x, &k)| (k, x.clone()))
            .collect()
    }

    /// Equality in `S ⊗_R S`.
    pub fn equal(&self, a: &Tensor, b: &Tensor) -> bool {
        let mut d = a.clone();
        sparse_axpy(&mut d, &-crate::rational::one(), b);
        self.relations.contains(d)
    }

    pub fn is_zero(&self, t: &Tensor) -> bool {
        self.relations.contains(t.clone())
    }

    /// Basis pair `(i, j)` of a quotient basis vector.
    pub fn quotient_pair(&self, k: usize) -> (usize, usize) {
        let key = self.quotient_basis[k];
        (key / self.n(), key % self.n())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn all_basis(s: &StructAlgebra) -> Vec<AlgElem> {
        (0..s.dim()).map(|i| s.basis_elem(i)).collect()
    }

    #[test]
    fn over_itself_is_s() {
        let s = StructAlgebra::matrix_algebra(2);
        let t = tensor_over_subring(&s, &all_basis(&s)).unwrap();
        assert_eq!(t.dim(), s.dim());
    }

    #[test]
    fn over_scalars_is_full_tensor() {
        let s = StructAlgebra::gaussian();
        let t = tensor_over_subring(&s, &[s.unit().clone()]).unwrap();
        assert_eq!(t.dim(), 4);
    }

    #[test]
    fn diagonal_subring_of_matrix_algebra() {
        // M2 over its diagonal: M2 ⊗_D M2 has dimension 8 (= Σ_k dim(M2 e_k)·dim(e_k M2))
        let s = StructAlgebra::matrix_algebra(2);
        let d = [s.basis_elem(0), s.basis_elem(3)];
        let t = tensor_over_subring(&s, &d).unwrap();
        assert_eq!(t.dim(), 8);
        // independent rank of the dense relation matrix
        let n = s.dim();
        let mut rows = Vec::new();
        for r in &d {
            for i in 0..n {
                for j in 0..n {
                    let a = t.pure(&s.mul(&s.basis_elem(i), r), &s.basis_elem(j));
                    let b = t.pure(&s.basis_elem(i), &s.mul(r, &s.basis_elem(j)));
                    let mut row = vec![Rational::zero(); n * n];
                    for (k, x) in a {
                        row[k] += x;
                    }
                    for (k, x) in b {
                        row[k] -= x;
                    }
                    rows.push(row);
                }
            }
        }
        let rank = Matrix::from_rows(n * n, rows).rank();
        assert_eq!(t.relation_rank(), rank);
        assert_eq!(t.dim(), n * n - rank);
    }

    #[test]
    fn relations_vanish_and_multiplication_descends() {
        let s = StructAlgebra::matrix_algebra(2);
        let d = [s.basis_elem(0), s.basis_elem(3)];
        let t = tensor_over_subring(&s, &d).unwrap();
        for r in &d {
            for i in 0..4 {
                for j in 0..4 {
                    let (ui, uj) = (s.basis_elem(i), s.basis_elem(j));
                    let a = t.pure(&s.mul(&ui, r), &uj);
                    let b = t.pure(&ui, &s.mul(r, &uj));
                    assert!(t.equal(&a, &b));
                    assert_eq!(t.multiply(&a), t.multiply(&b));
                    assert_eq!(t.project(&a), t.project(&b));
                }
            }
        }
    }

    #[test]
    fn project_lift_round_trip() {
        let s = StructAlgebra::matrix_algebra(2);
        let t = tensor_over_subring(&s, &[s.basis_elem(0), s.basis_elem(3)]).unwrap();
        for k in 0..t.dim() {
            let mut e = vec![Rational::zero(); t.dim()];
            e[k] = crate::rational::one();
            assert_eq!(t.project(&t.lift(&e)), e);
        }
    }

    #[test]
    fn non_subring_rejected() {
        let s = StructAlgebra::matrix_algebra(2);
        // span{1, E12, E21} is not closed: E12 E21 = E11
        let b = [s.unit().clone(), s.basis_elem(1), s.basis_elem(2)];
        assert!(matches!(tensor_over_subring(&s, &b), Err(Error::NotASubring(_))));
        let no_unit = [s.basis_elem(0)];
        assert!(tensor_over_subring(&s, &no_unit).is_err());
    }
}
