use num_traits::One;

use crate::algebra::{AlgElem, StructAlgebra, Subspace};
use crate::matrix::{rank_of, Matrix};
use crate::rational::format_rational;
use crate::verify::VerificationReport;

/// A Q-linear map between coordinate spaces of two algebras.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinMap {
    matrix: Matrix,
}

impl LinMap {
    pub fn new(matrix: Matrix) -> Self {
        LinMap { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        LinMap::new(Matrix::identity(dim))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn source_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn target_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, a: &AlgElem) -> AlgElem {
        AlgElem::new(self.matrix.mul_vec(a.coords()))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinMap) -> LinMap {
        LinMap::new(self.matrix.mul(&inner.matrix))
    }
}

/// What [`verify_ring_map`] should check beyond multiplicativity.
#[derive(Clone, Copy, Debug, Default)]
pub struct RingMapSpec<'a> {
    /// Images must land in this span, and cover it (surjectivity).
    pub codomain: Option<&'a Subspace>,
    /// `(unit of the domain, expected image)`.
    pub unit: Option<(&'a AlgElem, &'a AlgElem)>,
    /// Require injectivity on the span of the domain basis.
    pub injective: bool,
}

/// Checks `f(ab) = f(a) f(b)` on every pair from `domain_basis` plus the
/// optional codomain, unit and injectivity conditions.
pub fn verify_ring_map(
    source: &StructAlgebra,
    target: &StructAlgebra,
    f: &LinMap,
    domain_basis: &[AlgElem],
    spec: RingMapSpec<'_>,
) -> VerificationReport {
    let mut report = VerificationReport::new("ring map");
    let label = |v: &AlgElem| describe(source, v);
    let images: Vec<AlgElem> = domain_basis.iter().map(|b| f.apply(b)).collect();
    for (a, fa) in domain_basis.iter().zip(&images) {
        for (b, fb) in domain_basis.iter().zip(&images) {
            let lhs = f.apply(&source.mul(a, b));
            let rhs = target.mul(fa, fb);
            report.check(lhs == rhs, "multiplicative", || {
                format!("f({} * {}) != f({}) * f({})", label(a), label(b), label(a), label(b))
            });
        }
    }
    if let Some(cod) = spec.codomain {
        for (a, fa) in domain_basis.iter().zip(&images) {
            report.check(cod.contains(fa), "image in codomain", || {
                format!("f({}) = {}", label(a), describe(target, fa))
            });
        }
        let rank = rank_of(
            &images.iter().map(|v| v.coords().to_vec()).collect::<Vec<_>>(),
            target.dim(),
        );
        report.check(rank == cod.dim(), "surjective onto codomain", || {
            format!("image rank {rank} vs codomain dimension {}", cod.dim())
        });
    }
    if spec.injective {
        let rank = rank_of(
            &images.iter().map(|v| v.coords().to_vec()).collect::<Vec<_>>(),
            target.dim(),
        );
        report.check(rank == domain_basis.len(), "injective", || {
            format!("image rank {rank} vs domain dimension {}", domain_basis.len())
        });
    }
    if let Some((u, expected)) = spec.unit {
        let fu = f.apply(u);
        report.check(&fu == expected, "unit preserved", || {
            format!("f(1) = {}, expected {}", describe(target, &fu), describe(target, expected))
        });
    }
    report
}

/// Human-readable form of an element: `1/2*e1 + ie3`.
pub fn describe(alg: &StructAlgebra, v: &AlgElem) -> String {
    let terms: Vec<String> = v
        .support()
        .map(|(i, c)| {
            if c.is_one() {
                alg.label(i).to_string()
            } else {
                format!("{}*{}", format_rational(c), alg.label(i))
            }
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_map_passes() {
        let a = StructAlgebra::matrix_algebra(2);
        let basis: Vec<AlgElem> = (0..4).map(|i| a.basis_elem(i)).collect();
        let r = verify_ring_map(
            &a,
            &a,
            &LinMap::identity(4),
            &basis,
            RingMapSpec {
                unit: Some((a.unit(), a.unit())),
                injective: true,
                ..Default::default()
            },
        );
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn transpose_is_not_multiplicative() {
        // E_ij -> E_ji is an anti-automorphism
        let a = StructAlgebra::matrix_algebra(2);
        let mut m = Matrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                m[(j * 2 + i, i * 2 + j)] = crate::rational::one();
            }
        }
        let basis: Vec<AlgElem> = (0..4).map(|i| a.basis_elem(i)).collect();
        let r = verify_ring_map(&a, &a, &LinMap::new(m), &basis, RingMapSpec::default());
        assert!(!r.passed());
    }
}
