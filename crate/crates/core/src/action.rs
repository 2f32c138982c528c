//! Unital partial actions of finite groupoids on structure-constant algebras.
//!
//! `α_g : A_{g⁻¹} -> A_g` is stored as a full `dim A × dim A` matrix that
//! vanishes on `(1 - 1_{g⁻¹})A`. With this normalization the composite
//! `α_g α_h` of partial maps is the matrix product, extended by zero off its
//! domain.

use std::fmt::Write as _;

use crate::algebra::{AlgElem, CentralIdempotent, StructAlgebra, Subspace};
use crate::error::{Error, Result};
use crate::groupoid::{enumerate_transversals, isotropy_group, FinGroupoid, Subgroupoid, Transversal};
use crate::linmap::{describe, LinMap};
use crate::matrix::Matrix;
use crate::rational::Rational;
use crate::verify::VerificationReport;

/// Unvalidated action data: one idempotent and one optional map per morphism.
/// A missing map on an identity morphism means multiplication by `1_x`.
#[derive(Clone, Debug)]
pub struct RawAction {
    pub idempotents: Vec<AlgElem>,
    pub maps: Vec<Option<Matrix>>,
}

#[derive(Clone, Debug)]
pub struct PartialActionData {
    groupoid: FinGroupoid,
    algebra: StructAlgebra,
    idem: Vec<CentralIdempotent>,
    maps: Vec<LinMap>,
}

/// `α_g` inverted between the ideal bases of `A_g` and `A_{g⁻¹}`.
struct IdealInverse {
    domain: Subspace,
    codomain: Subspace,
    inverse: Matrix,
}

impl IdealInverse {
    fn apply(&self, v: &AlgElem) -> Option<AlgElem> {
        let c = self.codomain.coordinates(v)?;
        Some(self.domain.combine(&self.inverse.mul_vec(&c)))
    }
}

pub fn validate_partial_action(
    groupoid: &FinGroupoid,
    algebra: &StructAlgebra,
    raw: &RawAction,
) -> Result<PartialActionData> {
    let n = groupoid.n_morphisms();
    let dim = algebra.dim();
    if raw.idempotents.len() != n || raw.maps.len() != n {
        return Err(Error::axiom(
            "data",
            format!(
                "{} morphisms but {} idempotents and {} maps",
                n,
                raw.idempotents.len(),
                raw.maps.len()
            ),
        ));
    }
    let mut idem = Vec::with_capacity(n);
    for (g, e) in raw.idempotents.iter().enumerate() {
        let ci = algebra.central_idempotent(e).map_err(|err| match err {
            Error::InvalidElement { .. } => err,
            _ => Error::axiom("(i)", format!("1_{} = {} is not a central idempotent", groupoid.name(g), describe(algebra, e))),
        })?;
        idem.push(ci);
    }
    let mut maps = Vec::with_capacity(n);
    for (g, m) in raw.maps.iter().enumerate() {
        let m = match m {
            Some(m) => m.clone(),
            None if groupoid.is_identity(g) => algebra.left_mult_matrix(idem[g].elem()),
            None => return Err(Error::axiom("(ii)", format!("no map given for {}", groupoid.name(g)))),
        };
        if m.rows() != dim || m.cols() != dim {
            return Err(Error::axiom(
                "(ii)",
                format!("map of {} is {}x{}, expected {dim}x{dim}", groupoid.name(g), m.rows(), m.cols()),
            ));
        }
        maps.push(LinMap::new(m));
    }
    let pa = PartialActionData {
        groupoid: groupoid.clone(),
        algebra: algebra.clone(),
        idem,
        maps,
    };
    pa.check_axioms()?;
    Ok(pa)
}

impl PartialActionData {
    pub fn groupoid(&self) -> &FinGroupoid {
        &self.groupoid
    }

    pub fn algebra(&self) -> &StructAlgebra {
        &self.algebra
    }

    /// `1_g`.
    pub fn one(&self, g: usize) -> &AlgElem {
        self.idem[g].elem()
    }

    pub fn idempotent(&self, g: usize) -> &CentralIdempotent {
        &self.idem[g]
    }

    /// `1_y` for an object `y`.
    pub fn object_unit(&self, y: usize) -> &AlgElem {
        self.one(self.groupoid.identity(y))
    }

    pub fn alpha(&self, g: usize) -> &LinMap {
        &self.maps[g]
    }

    /// `A_g` as a subspace of `A`.
    pub fn ideal(&self, g: usize) -> Subspace {
        self.algebra.ideal(&self.idem[g])
    }

    /// Raw form of this data, e.g. for serialization.
    pub fn to_raw(&self) -> RawAction {
        RawAction {
            idempotents: self.idem.iter().map(|e| e.elem().clone()).collect(),
            maps: self.maps.iter().map(|m| Some(m.matrix().clone())).collect(),
        }
    }

    fn label(&self, g: usize) -> &str {
        self.groupoid.name(g)
    }

    fn show(&self, v: &AlgElem) -> String {
        describe(&self.algebra, v)
    }

    fn ideal_inverse(&self, g: usize) -> Result<IdealInverse> {
        let domain = self.ideal(self.groupoid.inverse(g));
        let codomain = self.ideal(g);
        let fail = || Error::axiom("(ii)", format!("α_{} is not bijective onto A_{}", self.label(g), self.label(g)));
        if domain.dim() != codomain.dim() {
            return Err(fail());
        }
        let cols: Vec<Vec<Rational>> = domain
            .basis()
            .iter()
            .map(|b| codomain.coordinates(&self.maps[g].apply(b)).ok_or_else(fail))
            .collect::<Result<_>>()?;
        let inverse = if cols.is_empty() {
            Matrix::zeros(0, 0)
        } else {
            Matrix::from_columns(codomain.dim(), &cols).inverse().ok_or_else(fail)?
        };
        Ok(IdealInverse {
            domain,
            codomain,
            inverse,
        })
    }

    fn check_axioms(&self) -> Result<()> {
        let g = &self.groupoid;
        let a = &self.algebra;
        let n = g.n_morphisms();

        // A = ⊕ A_y
        let total = crate::algebra::sum_elems(a.dim(), (0..g.n_objects()).map(|y| self.object_unit(y)));
        if &total != a.unit() {
            return Err(Error::axiom(
                "decomposition",
                format!("Σ 1_y = {} is not the unit", self.show(&total)),
            ));
        }
        for y in 0..g.n_objects() {
            for z in 0..g.n_objects() {
                if y != z && !a.mul(self.object_unit(y), self.object_unit(z)).is_zero() {
                    return Err(Error::axiom(
                        "decomposition",
                        format!("1_{} 1_{} != 0", g.object_name(y), g.object_name(z)),
                    ));
                }
            }
        }

        // (i) A_g ⊆ A_{t(g)}
        for m in 0..n {
            let t = g.identity(g.tgt(m));
            if &a.mul(self.one(m), self.one(t)) != self.one(m) {
                return Err(Error::axiom(
                    "(i)",
                    format!(
                        "1_{} 1_{} != 1_{} (1_{} = {})",
                        self.label(m),
                        g.object_name(g.tgt(m)),
                        self.label(m),
                        self.label(m),
                        self.show(self.one(m))
                    ),
                ));
            }
        }

        // (iii) α_x = id on A_x
        for x in 0..g.n_objects() {
            let id = g.identity(x);
            if self.maps[id].matrix() != &a.left_mult_matrix(self.one(id)) {
                return Err(Error::axiom(
                    "(iii)",
                    format!("α_{} is not the identity of A_{}", self.label(id), g.object_name(x)),
                ));
            }
        }

        // (ii) α_g : A_{g⁻¹} -> A_g ring isomorphism, normalized
        let mut inverses = Vec::with_capacity(n);
        for m in 0..n {
            let mi = g.inverse(m);
            let (e, f) = (self.one(mi), self.one(m));
            let alpha = &self.maps[m];
            if &alpha.matrix().mul(&a.right_mult_matrix(e)) != alpha.matrix() {
                return Err(Error::axiom(
                    "(ii)",
                    format!("α_{} does not vanish on (1 - 1_{})A", self.label(m), self.label(mi)),
                ));
            }
            if &a.left_mult_matrix(f).mul(alpha.matrix()) != alpha.matrix() {
                let bad = (0..a.dim())
                    .map(|i| a.basis_elem(i))
                    .find(|b| a.mul(f, &alpha.apply(b)) != alpha.apply(b))
                    .expect("some column leaves A_g");
                return Err(Error::axiom(
                    "(ii)",
                    format!(
                        "α_{}({}) = {} lies outside A_{}",
                        self.label(m),
                        self.show(&bad),
                        self.show(&alpha.apply(&bad)),
                        self.label(m)
                    ),
                ));
            }
            let fe = alpha.apply(e);
            if &fe != f {
                return Err(Error::axiom(
                    "(ii)",
                    format!(
                        "α_{}(1_{}) = {}, expected 1_{} = {}",
                        self.label(m),
                        self.label(mi),
                        self.show(&fe),
                        self.label(m),
                        self.show(f)
                    ),
                ));
            }
            let dom = self.ideal(mi);
            for p in dom.basis() {
                for q in dom.basis() {
                    let lhs = alpha.apply(&a.mul(p, q));
                    let rhs = a.mul(&alpha.apply(p), &alpha.apply(q));
                    if lhs != rhs {
                        return Err(Error::axiom(
                            "(ii)",
                            format!(
                                "α_{} not multiplicative on ({}, {})",
                                self.label(m),
                                self.show(p),
                                self.show(q)
                            ),
                        ));
                    }
                }
            }
            inverses.push(self.ideal_inverse(m)?);
        }

        // (v) α_h⁻¹(A_{g⁻¹} ∩ A_h) ⊆ A_{(gh)⁻¹} and α_{gh} = α_g α_h there
        for gm in 0..n {
            for h in 0..n {
                let Some(gh) = g.compose(gm, h) else { continue };
                let pair = || format!("pair ({}, {})", self.label(gm), self.label(h));
                let meet = a.mul(self.one(g.inverse(gm)), self.one(h));
                let e = inverses[h].apply(&meet).expect("meet lies in A_h");
                let ghi = g.inverse(gh);
                if a.mul(&e, self.one(ghi)) != e {
                    return Err(Error::axiom(
                        "(v)",
                        format!(
                            "{}: α_{}⁻¹(1_{} 1_{}) = {} not in A_{}",
                            pair(),
                            self.label(h),
                            self.label(g.inverse(gm)),
                            self.label(h),
                            self.show(&e),
                            self.label(ghi)
                        ),
                    ));
                }
                let ce = CentralIdempotent::new_unchecked(e);
                for b in a.ideal(&ce).basis() {
                    let lhs = self.maps[gh].apply(b);
                    let rhs = self.maps[gm].apply(&self.maps[h].apply(b));
                    if lhs != rhs {
                        return Err(Error::axiom(
                            "(v)",
                            format!(
                                "{}: α_{}({}) = {} but α_{}α_{}({}) = {}",
                                pair(),
                                self.label(gh),
                                self.show(b),
                                self.show(&lhs),
                                self.label(gm),
                                self.label(h),
                                self.show(b),
                                self.show(&rhs)
                            ),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// `A_g = A_{t(g)}` for every morphism.
    pub fn is_global(&self) -> bool {
        (0..self.groupoid.n_morphisms()).all(|m| self.one(m) == self.object_unit(self.groupoid.tgt(m)))
    }

    /// `α_{gh} = α_g α_h` as partial maps for every composable pair.
    pub fn composes_globally(&self) -> bool {
        let g = &self.groupoid;
        (0..g.n_morphisms()).all(|a| {
            (0..g.n_morphisms()).all(|b| match g.compose(a, b) {
                Some(ab) => self.maps[ab].matrix() == &self.maps[a].matrix().mul(self.maps[b].matrix()),
                None => true,
            })
        })
    }

    /// Consequences of the axioms: inverse maps, the ideal identity
    /// `α_g(A_{g⁻¹} ∩ A_h) = A_g ∩ A_{gh}`, and the two readings of globality.
    pub fn check_consequences(&self) -> VerificationReport {
        let g = &self.groupoid;
        let a = &self.algebra;
        let mut r = VerificationReport::new("partial action consequences");
        for m in 0..g.n_morphisms() {
            let mi = g.inverse(m);
            let back = self.maps[mi].matrix().mul(self.maps[m].matrix());
            r.check(back == a.left_mult_matrix(self.one(mi)), "α_{g⁻¹} α_g = id on A_{g⁻¹}", || {
                self.label(m).to_string()
            });
        }
        for gm in 0..g.n_morphisms() {
            for h in 0..g.n_morphisms() {
                let Some(gh) = g.compose(gm, h) else { continue };
                let lhs = self.maps[gm].apply(&a.mul(self.one(g.inverse(gm)), self.one(h)));
                let rhs = a.mul(self.one(gm), self.one(gh));
                r.check(lhs == rhs, "α_g(A_{g⁻¹} ∩ A_h) = A_g ∩ A_{gh}", || {
                    format!(
                        "({}, {}): {} vs {}",
                        self.label(gm),
                        self.label(h),
                        self.show(&lhs),
                        self.show(&rhs)
                    )
                });
            }
        }
        let (by_ideals, by_maps) = (self.is_global(), self.composes_globally());
        r.check(by_ideals == by_maps, "global iff A_g = A_{t(g)}", || {
            format!("ideal criterion {by_ideals}, composition criterion {by_maps}")
        });
        r
    }

    /// Restriction to a subgroupoid acting on the ideal `A e`.
    fn restrict(&self, sub: &Subgroupoid, e: &CentralIdempotent) -> Result<PartialActionData> {
        let (alg, space) = self.algebra.ideal_algebra(e)?;
        let coords = |v: &AlgElem, what: &str| -> Result<AlgElem> {
            space
                .coordinates(v)
                .map(AlgElem::new)
                .ok_or_else(|| Error::axiom("restriction", format!("{what} leaves the restricted algebra")))
        };
        let mut raw = RawAction {
            idempotents: Vec::new(),
            maps: Vec::new(),
        };
        for &m in &sub.morphism_map {
            raw.idempotents.push(coords(self.one(m), &format!("1_{}", self.label(m)))?);
            let cols: Vec<Vec<Rational>> = space
                .basis()
                .iter()
                .map(|b| coords(&self.maps[m].apply(b), &format!("α_{}", self.label(m))).map(AlgElem::into_coords))
                .collect::<Result<_>>()?;
            raw.maps.push(Some(Matrix::from_columns(space.dim(), &cols)));
        }
        validate_partial_action(&sub.groupoid, &alg, &raw)
    }

    /// The action of `G(x)` on `A_x`.
    pub fn restrict_to_isotropy(&self, x: usize) -> Result<PartialActionData> {
        let sub = isotropy_group(&self.groupoid, x)?;
        self.restrict(&sub, &self.idem[self.groupoid.identity(x)])
    }

    /// The action of a connected component on `⊕_{y ∈ X} A_y`.
    pub fn restrict_to_component(&self, comp: &Subgroupoid) -> Result<PartialActionData> {
        let e = crate::algebra::sum_elems(
            self.algebra.dim(),
            comp.object_map.iter().map(|&y| self.object_unit(y)),
        );
        let ci = self.algebra.central_idempotent(&e)?;
        self.restrict(comp, &ci)
    }

    /// Checks `1_{τ_y⁻¹} = 1_x` and `1_{τ_y} = 1_y` for every object.
    pub fn test_transversal(&self, tau: &Transversal) -> std::result::Result<GroupTypeCertificate, String> {
        let g = &self.groupoid;
        if !tau.is_valid(g) {
            return Err(format!("{} is not a transversal", tau.describe(g)));
        }
        let ux = self.object_unit(tau.base);
        let mut witnesses = Vec::new();
        for (y, &t) in tau.tau.iter().enumerate() {
            let uy = self.object_unit(y);
            let ti = g.inverse(t);
            if self.one(t) != uy {
                return Err(format!(
                    "1_{} = {} != 1_{} = {}",
                    self.label(t),
                    self.show(self.one(t)),
                    g.object_name(y),
                    self.show(uy)
                ));
            }
            if self.one(ti) != ux {
                return Err(format!(
                    "1_{} = {} != 1_{} = {}",
                    self.label(ti),
                    self.show(self.one(ti)),
                    g.object_name(tau.base),
                    self.show(ux)
                ));
            }
            let mut w = String::new();
            let _ = write!(
                w,
                "1_{} = 1_{}, 1_{} = 1_{}",
                self.label(ti),
                g.object_name(tau.base),
                self.label(t),
                g.object_name(y)
            );
            witnesses.push(w);
        }
        Ok(GroupTypeCertificate {
            transversal: tau.clone(),
            witnesses,
        })
    }

    /// Every transversal at `x` in enumeration order, with the outcome.
    pub fn group_type_search(&self, x: usize) -> Result<Vec<(Transversal, std::result::Result<GroupTypeCertificate, String>)>> {
        Ok(enumerate_transversals(&self.groupoid, x)?
            .map(|t| {
                let r = self.test_transversal(&t);
                (t, r)
            })
            .collect())
    }

    /// First transversal at `x` satisfying the group-type condition.
    pub fn find_group_type(&self, x: usize) -> Result<Option<GroupTypeCertificate>> {
        Ok(enumerate_transversals(&self.groupoid, x)?.find_map(|t| self.test_transversal(&t).ok()))
    }
}

/// A transversal `τ` with `A_{τ_y⁻¹} = A_x` and `A_{τ_y} = A_y` for all `y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupTypeCertificate {
    pub transversal: Transversal,
    pub witnesses: Vec<String>,
}

impl GroupTypeCertificate {
    pub fn base(&self) -> usize {
        self.transversal.base
    }

    pub fn tau(&self, y: usize) -> usize {
        self.transversal.tau[y]
    }

    /// The certificate moved to base `z` via `τ̃_y = τ_y τ_z⁻¹`, re-checked.
    pub fn rebase(&self, pa: &PartialActionData, z: usize) -> std::result::Result<GroupTypeCertificate, String> {
        pa.test_transversal(&self.transversal.rebased(pa.groupoid(), z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::groupoid::connected_components;

    #[test]
    fn e57_is_valid() {
        let pa = examples::e57();
        assert_eq!(pa.groupoid().n_morphisms(), 8);
        assert!(!pa.is_global());
        let r = pa.check_consequences();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn e57_wrong_ideal_for_m() {
        // A_m = Q(i)e4 while α_m still lands in Q(i)e3
        let (g, a, mut raw) = examples::e57_parts();
        let m = g.morphism_index("m").unwrap();
        raw.idempotents[m] = examples::e57_block_unit(&[4]);
        match validate_partial_action(&g, &a, &raw) {
            Err(Error::PartialActionAxiomViolation { axiom, witness }) => {
                assert_eq!(axiom, "(ii)");
                assert!(witness.contains("α_m"), "{witness}");
            }
            other => panic!("{other:?}"),
        }
        // moving α_m along as well leaves (ii) intact and breaks (v) at hl = m
        let mi = g.morphism_index("m_inv").unwrap();
        raw.idempotents[mi] = examples::e57_block_unit(&[1]);
        raw.maps[m] = Some(examples::e57_block_map(&[(1, 4, true)]));
        raw.maps[mi] = Some(examples::e57_block_map(&[(4, 1, true)]));
        match validate_partial_action(&g, &a, &raw) {
            Err(Error::PartialActionAxiomViolation { axiom, witness }) => {
                assert_eq!(axiom, "(v)");
                assert!(witness.starts_with("pair ("), "{witness}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn corrupted_alpha_l_gives_pair_witness() {
        let (g, a, mut raw) = examples::e57_parts();
        let l = g.morphism_index("l").unwrap();
        raw.maps[l] = Some(examples::e57_block_map(&[(1, 4, false), (2, 3, false)]));
        let l_inv = g.morphism_index("l_inv").unwrap();
        raw.maps[l_inv] = Some(examples::e57_block_map(&[(4, 1, false), (3, 2, false)]));
        let err = validate_partial_action(&g, &a, &raw).unwrap_err();
        assert!(matches!(&err, Error::PartialActionAxiomViolation { axiom, .. } if axiom == "(v)"), "{err}");
    }

    #[test]
    fn consequence_pair_l_g() {
        let pa = examples::e57();
        let g = pa.groupoid();
        let (l, gm, m) = (
            g.morphism_index("l").unwrap(),
            g.morphism_index("g").unwrap(),
            g.morphism_index("m").unwrap(),
        );
        assert_eq!(g.compose(l, gm), Some(m));
        let a = pa.algebra();
        let meet = a.central_idempotent(&a.mul(pa.one(g.inverse(l)), pa.one(gm))).unwrap();
        let image: Vec<AlgElem> = a.ideal(&meet).basis().iter().map(|b| pa.alpha(l).apply(b)).collect();
        let lhs = Subspace::from_spanning(a.dim(), image.into_iter().map(|v| (String::new(), v)));
        let rhs = a.ideal(&a.central_idempotent(&a.mul(pa.one(l), pa.one(m))).unwrap());
        assert!(lhs.same_span(&rhs));
        let names: Vec<String> = rhs.basis().iter().map(|b| describe(a, b)).collect();
        assert_eq!(names, ["e3", "ie3"]);
    }

    #[test]
    fn group_acting_on_itself_is_global() {
        let pa = examples::regular_action(3);
        assert!(pa.is_global());
        assert!(pa.composes_globally());
        assert!(pa.check_consequences().passed());
        assert_eq!(pa.group_type_search(0).unwrap().len(), 1);
        assert!(pa.find_group_type(0).unwrap().is_some());
    }

    #[test]
    fn isotropy_restrictions_of_e57() {
        let pa = examples::e57();
        let ax = pa.restrict_to_isotropy(0).unwrap();
        assert_eq!(ax.algebra().dim(), 4);
        assert_eq!(ax.groupoid().n_morphisms(), 2);
        let gi = ax.groupoid().morphism_index("g").unwrap();
        let a = ax.algebra();
        // conjugation on Q(i)e1
        let e1 = a.basis_elem(a.label_index("e1").unwrap());
        let ie1 = a.basis_elem(a.label_index("ie1").unwrap());
        assert_eq!(ax.alpha(gi).apply(&e1), e1);
        assert_eq!(ax.alpha(gi).apply(&ie1), -&ie1);
        assert_eq!(ax.one(gi), &e1);
        let ay = pa.restrict_to_isotropy(1).unwrap();
        let hi = ay.groupoid().morphism_index("h").unwrap();
        let e3 = ay.algebra().basis_elem(ay.algebra().label_index("e3").unwrap());
        assert_eq!(ay.one(hi), &e3);
        assert!(pa.restrict_to_isotropy(7).is_err());
    }

    #[test]
    fn component_restriction() {
        let pa = examples::e57();
        let comps = connected_components(pa.groupoid());
        assert_eq!(comps.len(), 1);
        let r = pa.restrict_to_component(&comps[0]).unwrap();
        assert_eq!(r.algebra().dim(), 8);
        assert_eq!(r.to_raw().idempotents, pa.to_raw().idempotents);

        let two = examples::e57_twice();
        let comps = connected_components(two.groupoid());
        assert_eq!(comps.len(), 2);
        for c in &comps {
            let r = two.restrict_to_component(c).unwrap();
            assert_eq!(r.algebra().dim(), 8);
            let raw = r.to_raw();
            let base = pa.to_raw();
            assert_eq!(raw.idempotents, base.idempotents);
            assert_eq!(raw.maps, base.maps);
        }
    }

    #[test]
    fn e57_group_type() {
        let pa = examples::e57();
        let cert = pa.find_group_type(0).unwrap().unwrap();
        assert_eq!(cert.transversal.describe(pa.groupoid()), "{x=x, y=l}");
        let all = pa.group_type_search(0).unwrap();
        assert_eq!(all.len(), 2);
        assert!(all[0].1.is_ok());
        let reason = all[1].1.as_ref().unwrap_err();
        assert!(reason.contains("1_m = e3"), "{reason}");
        let moved = cert.rebase(&pa, 1).unwrap();
        assert_eq!(moved.base(), 1);
    }

    #[test]
    fn discrete_groupoid_identity_actions() {
        let pa = examples::discrete(&[2, 1]);
        for c in connected_components(pa.groupoid()) {
            let r = pa.restrict_to_component(&c).unwrap();
            assert!(r.is_global());
            assert_eq!(r.groupoid().n_morphisms(), 1);
        }
    }
}
