//! Partial skew groupoid rings and the factorization through the coarse
//! groupoid and an isotropy group.

use num_traits::Zero;
use rayon::prelude::*;

use crate::action::{validate_partial_action, GroupTypeCertificate, PartialActionData, RawAction};
use crate::algebra::{sum_elems, AlgElem, BasisProduct, StructAlgebra, Subspace};
use crate::error::{Error, Result};
use crate::groupoid::{coarse_groupoid, coarse_index, isotropy_group, structural_iso, FinGroupoid, Subgroupoid};
use crate::linmap::{describe, LinMap};
use crate::matrix::Matrix;
use crate::rational::Rational;
use crate::verify::VerificationReport;

/// `A ⋆_α G` as a structure-constant algebra with basis `{u_i δ_g}`, where
/// `u_i` runs over the ideal basis of `A_g`. Slots are ordered by morphism,
/// then by ideal basis vector.
#[derive(Clone, Debug)]
pub struct SkewRing {
    action: PartialActionData,
    carrier: StructAlgebra,
    ideals: Vec<Subspace>,
    offsets: Vec<usize>,
    slots: Vec<(usize, usize)>,
}

pub fn build_skew_ring(pa: &PartialActionData) -> Result<SkewRing> {
    let g = pa.groupoid();
    let a = pa.algebra();
    let ideals: Vec<Subspace> = (0..g.n_morphisms()).map(|m| pa.ideal(m)).collect();
    let mut offsets = Vec::with_capacity(ideals.len());
    let mut slots = Vec::new();
    let mut labels = Vec::new();
    for (m, ideal) in ideals.iter().enumerate() {
        offsets.push(slots.len());
        for (k, l) in ideal.labels().iter().enumerate() {
            slots.push((m, k));
            labels.push(format!("{l}δ({})", g.name(m)));
        }
    }
    let dim = slots.len();
    if dim == 0 {
        return Err(Error::InvalidAlgebra("skew ring of the zero algebra".into()));
    }
    // α_g(u_j 1_{g⁻¹}) for every slot (h, j) with t(h) = s(g)
    let table: Vec<BasisProduct> = (0..dim * dim)
        .into_par_iter()
        .map(|key| {
            let (p, q) = (key / dim, key % dim);
            let (gm, i) = slots[p];
            let (h, j) = slots[q];
            let Some(gh) = g.compose(gm, h) else {
                return Ok(BasisProduct::new());
            };
            let bi = &ideals[gm].basis()[i];
            let bj = &ideals[h].basis()[j];
            let moved = pa.alpha(gm).apply(&a.mul(bj, pa.one(g.inverse(gm))));
            let prod = a.mul(bi, &moved);
            let coords = ideals[gh].coordinates(&prod).ok_or_else(|| {
                Error::AssociativityFailure(format!(
                    "({}) * ({}) = {} leaves A_{}",
                    labels[p],
                    labels[q],
                    describe(a, &prod),
                    g.name(gh)
                ))
            })?;
            Ok(coords
                .into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| (offsets[gh] + k, c))
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut ring = SkewRing {
        action: pa.clone(),
        carrier: StructAlgebra::rationals(),
        ideals,
        offsets,
        slots,
    };
    let unit = sum_elems(
        dim,
        (0..g.n_objects())
            .map(|y| {
                let id = g.identity(y);
                ring.embed_unchecked(id, pa.one(id))
            })
            .collect::<Vec<_>>()
            .iter(),
    );
    ring.carrier = StructAlgebra::from_table(labels, table, unit).map_err(|e| match e {
        Error::InvalidAlgebra(msg) => Error::AssociativityFailure(msg),
        other => other,
    })?;
    Ok(ring)
}

impl SkewRing {
    pub fn action(&self) -> &PartialActionData {
        &self.action
    }

    pub fn carrier(&self) -> &StructAlgebra {
        &self.carrier
    }

    pub fn groupoid(&self) -> &FinGroupoid {
        self.action.groupoid()
    }

    pub fn base(&self) -> &StructAlgebra {
        self.action.algebra()
    }

    pub fn dim(&self) -> usize {
        self.slots.len()
    }

    /// `(morphism, ideal basis index)` of a slot.
    pub fn slot(&self, i: usize) -> (usize, usize) {
        self.slots[i]
    }

    /// The coefficient `u_i` of a slot, as an element of the base algebra.
    pub fn slot_coefficient(&self, i: usize) -> &AlgElem {
        let (m, k) = self.slots[i];
        &self.ideals[m].basis()[k]
    }

    pub fn ideal(&self, g: usize) -> &Subspace {
        &self.ideals[g]
    }

    /// Slots belonging to morphism `g`.
    pub fn slot_range(&self, g: usize) -> std::ops::Range<usize> {
        self.offsets[g]..self.offsets[g] + self.ideals[g].dim()
    }

    fn embed_unchecked(&self, g: usize, a: &AlgElem) -> AlgElem {
        self.embed(g, a).expect("coefficient lies in A_g")
    }

    /// `a δ_g`, or `None` when `a ∉ A_g`.
    pub fn embed(&self, g: usize, a: &AlgElem) -> Option<AlgElem> {
        let c = self.ideals[g].coordinates(a)?;
        let mut v = vec![Rational::zero(); self.dim()];
        for (k, x) in c.into_iter().enumerate() {
            v[self.offsets[g] + k] = x;
        }
        Some(AlgElem::new(v))
    }

    /// The coefficient of `δ_g` in `s`.
    pub fn component(&self, s: &AlgElem, g: usize) -> AlgElem {
        let coords = &s.coords()[self.slot_range(g)];
        self.ideals[g].combine(coords)
    }

    /// Nonzero components `(g, a_g)` of `s = Σ a_g δ_g`.
    pub fn components(&self, s: &AlgElem) -> Vec<(usize, AlgElem)> {
        (0..self.groupoid().n_morphisms())
            .filter(|&g| s.coords()[self.slot_range(g)].iter().any(|x| !x.is_zero()))
            .map(|g| (g, self.component(s, g)))
            .collect()
    }

    /// `a -> Σ_y a 1_y δ_y`.
    pub fn base_embedding(&self, a: &AlgElem) -> AlgElem {
        let g = self.groupoid();
        let parts: Vec<AlgElem> = (0..g.n_objects())
            .map(|y| {
                let id = g.identity(y);
                self.embed_unchecked(id, &self.base().mul(a, self.action.one(id)))
            })
            .collect();
        sum_elems(self.dim(), parts.iter())
    }

    /// Images of the base algebra's basis: a basis of the subring `A ⊆ A⋆G`.
    pub fn base_image_basis(&self) -> Vec<AlgElem> {
        (0..self.base().dim())
            .map(|i| self.base_embedding(&self.base().basis_elem(i)))
            .collect()
    }

    pub fn describe(&self, s: &AlgElem) -> String {
        describe(&self.carrier, s)
    }
}

/// `β_u = α_{τ_{t(u)}} α_{τ_{s(u)}⁻¹}` on `B_u = A_{t(u)}`: a global action of
/// the coarse groupoid on `A`.
pub fn induced_beta(pa: &PartialActionData, cert: &GroupTypeCertificate) -> Result<PartialActionData> {
    let g = pa.groupoid();
    let coarse = coarse_groupoid(g.objects())?;
    let mut raw = RawAction {
        idempotents: Vec::new(),
        maps: Vec::new(),
    };
    for u in 0..coarse.n_morphisms() {
        let (y, z) = (coarse.src(u), coarse.tgt(u));
        raw.idempotents.push(pa.object_unit(z).clone());
        let back = pa.alpha(g.inverse(cert.tau(y)));
        raw.maps.push(Some(pa.alpha(cert.tau(z)).compose(back).matrix().clone()));
    }
    validate_partial_action(&coarse, pa.algebra(), &raw)
}

/// The partial action of `G(x)` on `C = A ⋆_β G₀²`.
#[derive(Clone, Debug)]
pub struct GammaAction {
    pub isotropy: Subgroupoid,
    pub action: PartialActionData,
}

impl GammaAction {
    /// `1'_h` for a morphism of `G(x)` given by its index in the isotropy
    /// group.
    pub fn unit_of(&self, h: usize) -> &AlgElem {
        self.action.one(h)
    }
}

pub fn build_gamma(pa: &PartialActionData, cert: &GroupTypeCertificate, c: &SkewRing) -> Result<GammaAction> {
    let g = pa.groupoid();
    let a = pa.algebra();
    let x = cert.base();
    let iso = isotropy_group(g, x)?;
    let n = g.n_objects();
    let mut raw = RawAction {
        idempotents: Vec::new(),
        maps: Vec::new(),
    };
    for &h in &iso.morphism_map {
        let parts: Vec<AlgElem> = (0..n)
            .map(|z| {
                let u = coarse_index(n, z, z);
                c.embed(u, &pa.alpha(cert.tau(z)).apply(pa.one(h)))
                    .expect("α_{τ_z}(1_h) lies in A_z")
            })
            .collect();
        let unit_h = sum_elems(c.dim(), parts.iter());
        let carrier = c.carrier();
        if !carrier.is_idempotent(&unit_h) || !carrier.commutes_with_basis(&unit_h) {
            return Err(Error::CentralityFailure(format!(
                "1'_{} = {} is not a central idempotent",
                g.name(h),
                c.describe(&unit_h)
            )));
        }
        raw.idempotents.push(unit_h);

        let hi = g.inverse(h);
        let mut cols = Vec::with_capacity(c.dim());
        for slot in 0..c.dim() {
            let (u, _) = c.slot(slot);
            let z = c.groupoid().tgt(u);
            let tz = cert.tau(z);
            let b = c.slot_coefficient(slot);
            let cut = a.mul(b, &pa.alpha(tz).apply(pa.one(hi)));
            let pulled = pa.alpha(g.inverse(tz)).apply(&cut);
            let image = pa.alpha(tz).apply(&pa.alpha(h).apply(&pulled));
            let v = c.embed(u, &image).ok_or_else(|| {
                Error::axiom(
                    "(ii)",
                    format!("γ_{} moves {} out of its component", g.name(h), c.carrier().label(slot)),
                )
            })?;
            cols.push(v.into_coords());
        }
        raw.maps.push(Some(Matrix::from_columns(c.dim(), &cols)));
    }
    let action = validate_partial_action(&iso.groupoid, c.carrier(), &raw)?;
    Ok(GammaAction { isotropy: iso, action })
}

/// `(A ⋆_β G₀²) ⋆_γ G(x)`.
pub fn build_iterated_ring(gamma: &GammaAction) -> Result<SkewRing> {
    build_skew_ring(&gamma.action)
}

/// The ring isomorphism `φ(a δ_g) = a δ_{(s(g), t(g))} δ_{g_x}` with the
/// inverse built from `w = c δ_{τ_z h τ_y⁻¹}`.
#[derive(Clone, Debug)]
pub struct IsoWitness {
    pub forward: LinMap,
    pub backward: LinMap,
    pub report: VerificationReport,
}

/// Every ring in the factorization of `A ⋆_α G` for one transversal.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub certificate: GroupTypeCertificate,
    pub skew: SkewRing,
    pub beta: PartialActionData,
    pub coarse: SkewRing,
    pub gamma: GammaAction,
    pub iterated: SkewRing,
    pub iso: IsoWitness,
}

pub fn factorize(pa: &PartialActionData, cert: &GroupTypeCertificate) -> Result<Factorization> {
    let skew = build_skew_ring(pa)?;
    let beta = induced_beta(pa, cert)?;
    let coarse = build_skew_ring(&beta)?;
    let gamma = build_gamma(pa, cert, &coarse)?;
    let iterated = build_iterated_ring(&gamma)?;
    let iso = factorization_iso(pa, cert, &skew, &coarse, &gamma, &iterated)?;
    Ok(Factorization {
        certificate: cert.clone(),
        skew,
        beta,
        coarse,
        gamma,
        iterated,
        iso,
    })
}

pub fn factorization_iso(
    pa: &PartialActionData,
    cert: &GroupTypeCertificate,
    s: &SkewRing,
    c: &SkewRing,
    gamma: &GammaAction,
    t: &SkewRing,
) -> Result<IsoWitness> {
    let g = pa.groupoid();
    let a = pa.algebra();
    let n = g.n_objects();
    let tau = &cert.transversal;
    let iso = &gamma.isotropy;
    let mut report = VerificationReport::new("factorization isomorphism");

    let groupoid_iso = structural_iso(g, tau)?;
    report.absorb(groupoid_iso.report);

    report.check(s.dim() == t.dim(), "dimensions agree", || format!("{} vs {}", s.dim(), t.dim()));
    if s.dim() != t.dim() {
        return Err(Error::IsoFailure {
            step: 4,
            witness: format!("dim {} vs dim {}", s.dim(), t.dim()),
        });
    }

    // step 1: each a δ_g lands in the component of g_x
    let mut cols = Vec::with_capacity(s.dim());
    for slot in 0..s.dim() {
        let (m, _) = s.slot(slot);
        let (y, z) = (g.src(m), g.tgt(m));
        let hx = tau.loop_part(g, m);
        let g_tau = g.comp(m, tau.tau[y]);
        let lhs = pa.alpha(tau.tau[z]).apply(pa.one(hx));
        let ok = &lhs == pa.one(g_tau) && &a.mul(pa.one(m), pa.one(g_tau)) == pa.one(m);
        if !report.check(ok, "A_g ⊆ A_{gτ_s(g)} = α_{τ_t(g)}(A_{g_x})", || g.name(m).to_string()) {
            return Err(Error::IsoFailure {
                step: 1,
                witness: format!("morphism {}", g.name(m)),
            });
        }
        let inner = c
            .embed(coarse_index(n, y, z), s.slot_coefficient(slot))
            .expect("A_g ⊆ A_{t(g)}");
        let k = iso.parent_morphism_to_sub(hx).expect("g_x is a loop at the base");
        let image = t.embed(k, &inner).ok_or_else(|| Error::IsoFailure {
            step: 1,
            witness: format!("{} not in C_{}", s.carrier().label(slot), g.name(hx)),
        })?;
        cols.push(image.into_coords());
    }
    let forward = LinMap::new(Matrix::from_columns(t.dim(), &cols));

    report.check(
        &forward.apply(s.carrier().unit()) == t.carrier().unit(),
        "unit preserved",
        || t.describe(&forward.apply(s.carrier().unit())),
    );

    // step 2: multiplicative on all basis pairs
    let dim = s.dim();
    let bad: Vec<(usize, usize)> = (0..dim * dim)
        .into_par_iter()
        .filter_map(|key| {
            let (p, q) = (key / dim, key % dim);
            let (u, v) = (s.carrier().basis_elem(p), s.carrier().basis_elem(q));
            let lhs = forward.apply(&s.carrier().mul(&u, &v));
            let rhs = t.carrier().mul(&forward.apply(&u), &forward.apply(&v));
            (lhs != rhs).then_some((p, q))
        })
        .collect();
    report.checked += dim * dim;
    if let Some(&(p, q)) = bad.first() {
        return Err(Error::IsoFailure {
            step: 2,
            witness: format!("φ({} · {})", s.carrier().label(p), s.carrier().label(q)),
        });
    }

    // step 3: trivial kernel
    let kernel = forward.matrix().kernel();
    if !report.check(kernel.is_empty(), "injective", || format!("kernel dimension {}", kernel.len())) {
        return Err(Error::IsoFailure {
            step: 3,
            witness: t.describe(&AlgElem::new(kernel[0].clone())),
        });
    }

    // step 4: explicit preimages c_u δ_u δ_h -> c_u δ_{τ_z h τ_y⁻¹}
    let mut back_cols = Vec::with_capacity(t.dim());
    for slot in 0..t.dim() {
        let (k, _) = t.slot(slot);
        let h = iso.morphism_map[k];
        let cval = t.slot_coefficient(slot);
        let mut w = AlgElem::zero(s.dim());
        for (u, cu) in c.components(cval) {
            let (y, z) = (c.groupoid().src(u), c.groupoid().tgt(u));
            let m = g.comp(tau.tau[z], g.comp(h, g.inverse(tau.tau[y])));
            let piece = s.embed(m, &cu).ok_or_else(|| Error::IsoFailure {
                step: 4,
                witness: format!("{} is not in A_{}", describe(a, &cu), g.name(m)),
            })?;
            w = &w + &piece;
        }
        back_cols.push(w.into_coords());
    }
    let backward = LinMap::new(Matrix::from_columns(s.dim(), &back_cols));
    let inverse = forward.matrix().inverse();
    let matches = inverse.as_ref() == Some(backward.matrix());
    if !report.check(matches, "explicit inverse equals matrix inverse", || "mismatch".into()) {
        return Err(Error::IsoFailure {
            step: 4,
            witness: "explicit preimage map differs from the matrix inverse".into(),
        });
    }
    let id_s = backward.compose(&forward);
    let id_t = forward.compose(&backward);
    report.check(id_s.matrix() == &Matrix::identity(s.dim()), "φ⁻¹φ = id", String::new);
    report.check(id_t.matrix() == &Matrix::identity(t.dim()), "φφ⁻¹ = id", String::new);
    if !report.passed() {
        let v = report.first_violation().expect("failed");
        return Err(Error::IsoFailure {
            step: 4,
            witness: format!("{}: {}", v.check, v.witness),
        });
    }
    Ok(IsoWitness {
        forward,
        backward,
        report,
    })
}

/// For a global action every `1'_h` must be the unit of `C`, so that `γ` is
/// global too.
#[derive(Clone, Debug)]
pub struct GlobalityCheck {
    pub action_global: bool,
    pub gamma_global: bool,
    pub report: VerificationReport,
}

pub fn check_global_factorization(pa: &PartialActionData, f: &Factorization) -> GlobalityCheck {
    let mut report = VerificationReport::new("global action gives global γ");
    let action_global = pa.is_global();
    let c_unit = f.coarse.carrier().unit();
    let gamma_global = (0..f.gamma.isotropy.groupoid.n_morphisms()).all(|h| f.gamma.unit_of(h) == c_unit);
    report.check(!action_global || gamma_global, "1'_h = 1 for all h", || {
        let h = (0..f.gamma.isotropy.groupoid.n_morphisms())
            .find(|&h| f.gamma.unit_of(h) != c_unit)
            .expect("some 1'_h differs");
        format!("1'_{} = {}", f.gamma.isotropy.groupoid.name(h), f.coarse.describe(f.gamma.unit_of(h)))
    });
    report.check(f.beta.is_global(), "β global", String::new);
    GlobalityCheck {
        action_global,
        gamma_global,
        report,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    fn e57_factorization() -> (PartialActionData, Factorization) {
        let pa = examples::e57();
        let cert = pa.find_group_type(0).unwrap().unwrap();
        let f = factorize(&pa, &cert).unwrap();
        (pa, f)
    }

    #[test]
    fn trivial_group_on_q() {
        let pa = examples::discrete(&[1]);
        let s = build_skew_ring(&pa).unwrap();
        assert_eq!(s.dim(), 1);
        let cert = pa.find_group_type(0).unwrap().unwrap();
        let f = factorize(&pa, &cert).unwrap();
        assert_eq!(f.iterated.dim(), 1);
        assert!(check_global_factorization(&pa, &f).gamma_global);
    }

    #[test]
    fn e57_dimensions() {
        let (pa, f) = e57_factorization();
        let expected: usize = (0..8).map(|g| pa.ideal(g).dim()).sum();
        assert_eq!(expected, 24);
        assert_eq!(f.skew.dim(), 24);
        assert_eq!(f.coarse.dim(), 16);
        assert_eq!(f.iterated.dim(), 24);
        assert!(f.iso.report.passed(), "{}", f.iso.report);
    }

    #[test]
    fn e57_product_rule() {
        let (pa, f) = e57_factorization();
        let g = pa.groupoid();
        let gi = g.morphism_index("g").unwrap();
        let s = &f.skew;
        let one_g = s.embed(gi, pa.one(gi)).unwrap();
        let sq = s.carrier().mul(&one_g, &one_g);
        assert_eq!(sq, s.embed(g.identity(0), &examples::e57_block_unit(&[1])).unwrap());
        let unit = sum_elems(
            s.dim(),
            [s.embed(0, pa.one(0)).unwrap(), s.embed(1, pa.one(1)).unwrap()].iter(),
        );
        assert_eq!(&unit, s.carrier().unit());
        // incomposable pairs multiply to zero
        let l = g.morphism_index("l").unwrap();
        let one_l = s.embed(l, pa.one(l)).unwrap();
        assert!(s.carrier().mul(&one_g, &one_l).is_zero());
    }

    #[test]
    fn e57_beta() {
        let (pa, f) = e57_factorization();
        let l = pa.groupoid().morphism_index("l").unwrap();
        let c = f.beta.groupoid();
        let xy = c.morphism_index("(x,y)").unwrap();
        let yx = c.morphism_index("(y,x)").unwrap();
        assert_eq!(f.beta.alpha(xy), pa.alpha(l));
        let yy = c.morphism_index("(y,y)").unwrap();
        assert_eq!(f.beta.alpha(yy).matrix(), &pa.algebra().left_mult_matrix(pa.object_unit(1)));
        let round = f.beta.alpha(yx).compose(f.beta.alpha(xy));
        assert_eq!(round.matrix(), &pa.algebra().left_mult_matrix(pa.object_unit(0)));
        assert!(f.beta.is_global());
    }

    #[test]
    fn e57_gamma() {
        let (_, f) = e57_factorization();
        let iso = &f.gamma.isotropy.groupoid;
        let cr = &f.coarse;
        assert_eq!(f.gamma.unit_of(0), cr.carrier().unit());
        let gk = iso.morphism_index("g").unwrap();
        let a = cr.base();
        let (xx, yy) = (0, 1);
        let e1 = examples::e57_block_unit(&[1]);
        let e3 = examples::e57_block_unit(&[3]);
        let expected = &cr.embed(xx, &e1).unwrap() + &cr.embed(yy, &e3).unwrap();
        assert_eq!(f.gamma.unit_of(gk), &expected);
        let ie1 = a.basis_elem(a.label_index("ie1").unwrap());
        let gamma_g = f.gamma.action.alpha(gk);
        assert_eq!(gamma_g.apply(&cr.embed(xx, &e1).unwrap()), cr.embed(xx, &e1).unwrap());
        assert_eq!(gamma_g.apply(&cr.embed(xx, &ie1).unwrap()), cr.embed(xx, &-&ie1).unwrap());
        assert_eq!(f.gamma.action.ideal(gk).dim(), 8);
    }

    #[test]
    fn e57_iso_images() {
        let (pa, f) = e57_factorization();
        let g = pa.groupoid();
        let m = g.morphism_index("m").unwrap();
        let e3 = examples::e57_block_unit(&[3]);
        let img = f.iso.forward.apply(&f.skew.embed(m, &e3).unwrap());
        let gk = f.gamma.isotropy.groupoid.morphism_index("g").unwrap();
        let inner = f.coarse.embed(coarse_index(2, 0, 1), &e3).unwrap();
        assert_eq!(img, f.iterated.embed(gk, &inner).unwrap());
        let one_y = f.skew.embed(g.identity(1), pa.object_unit(1)).unwrap();
        let inner = f.coarse.embed(1, pa.object_unit(1)).unwrap();
        assert_eq!(f.iso.forward.apply(&one_y), f.iterated.embed(0, &inner).unwrap());
    }

    #[test]
    fn e57_not_global() {
        let (pa, f) = e57_factorization();
        let chk = check_global_factorization(&pa, &f);
        assert!(!chk.action_global);
        assert!(!chk.gamma_global);
        assert!(chk.report.passed());
    }

    #[test]
    fn regular_action_is_globally_factorized() {
        let pa = examples::regular_action(3);
        let cert = pa.find_group_type(0).unwrap().unwrap();
        let f = factorize(&pa, &cert).unwrap();
        let chk = check_global_factorization(&pa, &f);
        assert!(chk.action_global && chk.gamma_global);
        assert_eq!(f.skew.dim(), 9);
    }
}
