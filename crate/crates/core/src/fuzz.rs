//! Seeded random instances and the invariant suite run on each of them.
//!
//! Instances are global actions of `G₀² × H` on `A = ⊕_y F_y`, where `H`
//! acts on `F = B^k` by permuting blocks along an `H`-set and optionally
//! twisting every block by an involution of `B`. Half of them are then
//! restricted to the ideal `A E` of a central idempotent `E`, which gives a
//! genuinely partial action.

use std::path::PathBuf;
use std::time::Instant;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::action::{validate_partial_action, PartialActionData, RawAction};
use crate::algebra::{AlgElem, StructAlgebra};
use crate::error::Result;
use crate::extension::{separable_composite, separable_direct};
use crate::groupoid::{enumerate_transversals, structural_iso, FinGroupoid, Morphism};
use crate::instance::{InstanceFile, Meta};
use crate::matrix::Matrix;
use crate::rational::Rational;
use crate::skew::{check_global_factorization, factorize};

#[derive(Clone, Debug)]
pub struct FuzzOptions {
    pub seed: u64,
    pub count: usize,
    pub max_objects: usize,
    pub max_dim: usize,
    pub max_isotropy: usize,
    /// Counterexamples are written here as instance files.
    pub out_dir: Option<PathBuf>,
}

impl Default for FuzzOptions {
    fn default() -> Self {
        FuzzOptions {
            seed: 0,
            count: 100,
            max_objects: 3,
            max_dim: 12,
            max_isotropy: 4,
            out_dir: None,
        }
    }
}

/// A finite group by its multiplication table; element 0 is the identity.
#[derive(Clone, Debug)]
struct SmallGroup {
    name: &'static str,
    names: Vec<&'static str>,
    mul: Vec<Vec<usize>>,
    /// Subgroups as element lists, used to build transitive `H`-sets.
    subgroups: Vec<Vec<usize>>,
    /// Homomorphisms to `Z2` as parity vectors.
    characters: Vec<Vec<bool>>,
}

fn cyclic(n: usize) -> SmallGroup {
    const NAMES: [&str; 4] = ["e", "a", "a2", "a3"];
    let mul = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
    let subgroups = (1..=n)
        .filter(|d| n.is_multiple_of(*d))
        .map(|d| (0..n).filter(|i| i % d == 0).collect())
        .collect();
    let mut characters = vec![vec![false; n]];
    if n.is_multiple_of(2) {
        characters.push((0..n).map(|i| i % 2 == 1).collect());
    }
    SmallGroup {
        name: ["1", "Z2", "Z3", "Z4"][n - 1],
        names: NAMES[..n].to_vec(),
        mul,
        subgroups,
        characters,
    }
}

fn klein() -> SmallGroup {
    let mul = (0..4).map(|i: usize| (0..4).map(|j: usize| i ^ j).collect()).collect();
    SmallGroup {
        name: "Z2xZ2",
        names: vec!["e", "a", "b", "ab"],
        mul,
        subgroups: vec![vec![0], vec![0, 1], vec![0, 2], vec![0, 3], vec![0, 1, 2, 3]],
        characters: vec![
            vec![false; 4],
            vec![false, true, false, true],
            vec![false, false, true, true],
            vec![false, true, true, false],
        ],
    }
}

impl SmallGroup {
    fn order(&self) -> usize {
        self.mul.len()
    }

    /// Left multiplication on the cosets `hK`, one permutation per element.
    fn coset_action(&self, k: &[usize]) -> Vec<Vec<usize>> {
        let mut cosets: Vec<Vec<usize>> = Vec::new();
        for h in 0..self.order() {
            let mut c: Vec<usize> = k.iter().map(|&x| self.mul[h][x]).collect();
            c.sort_unstable();
            if !cosets.contains(&c) {
                cosets.push(c);
            }
        }
        (0..self.order())
            .map(|h| {
                cosets
                    .iter()
                    .map(|c| {
                        let mut img: Vec<usize> = c.iter().map(|&x| self.mul[h][x]).collect();
                        img.sort_unstable();
                        cosets.iter().position(|d| *d == img).expect("cosets are permuted")
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BlockKind {
    Rationals,
    Gaussian,
    Matrix2,
}

impl BlockKind {
    fn algebra(self) -> StructAlgebra {
        match self {
            BlockKind::Rationals => StructAlgebra::rationals(),
            BlockKind::Gaussian => StructAlgebra::gaussian(),
            BlockKind::Matrix2 => StructAlgebra::matrix_algebra(2),
        }
    }

    /// An involutive automorphism: conjugation, or conjugation by the swap
    /// matrix on `M_2`.
    fn twist(self) -> Matrix {
        match self {
            BlockKind::Rationals => Matrix::identity(1),
            BlockKind::Gaussian => {
                let mut m = Matrix::identity(2);
                m[(1, 1)] = -Rational::one();
                m
            }
            BlockKind::Matrix2 => {
                // E_ij -> E_{σi σj}, σ the transposition
                let mut m = Matrix::zeros(4, 4);
                for (from, to) in [(0, 3), (1, 2), (2, 1), (3, 0)] {
                    m[(to, from)] = Rational::one();
                }
                m
            }
        }
    }
}

/// Parameters of one generated instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InstanceShape {
    pub objects: usize,
    pub group: &'static str,
    pub block: BlockKind,
    /// Blocks per object.
    pub blocks: usize,
    pub twisted: bool,
    pub restricted: bool,
}

/// `G₀² × H` with morphism index `h * n² + coarse index`, so identities
/// come first.
fn product_groupoid(n: usize, h: &SmallGroup) -> FinGroupoid {
    let objects: Vec<String> = (0..n).map(|i| format!("o{i}")).collect();
    let mut pairs: Vec<(usize, usize)> = (0..n).map(|x| (x, x)).collect();
    for x in 0..n {
        for y in 0..n {
            if x != y {
                pairs.push((x, y));
            }
        }
    }
    let nn = pairs.len();
    let mut morphisms = Vec::new();
    for (hi, hname) in h.names.iter().enumerate() {
        for &(s, t) in &pairs {
            let base = format!("({},{})", objects[s], objects[t]);
            morphisms.push(Morphism {
                id: if hi == 0 { base } else { format!("{base}{hname}") },
                src: s,
                tgt: t,
            });
        }
    }
    let pos = |s: usize, t: usize| pairs.iter().position(|&p| p == (s, t)).expect("pair");
    FinGroupoid::from_fn(objects, morphisms, (0..n).collect(), |a, b| {
        let (ha, ua) = (a / nn, a % nn);
        let (hb, ub) = (b / nn, b % nn);
        let (sb, _) = pairs[ub];
        let (_, ta) = pairs[ua];
        Some(h.mul[ha][hb] * nn + pos(sb, ta))
    })
    .expect("product groupoid")
}

struct Generated {
    shape: InstanceShape,
    global: PartialActionData,
    action: Result<PartialActionData>,
}

fn generate(rng: &mut ChaCha8Rng, opts: &FuzzOptions) -> Generated {
    let groups: Vec<SmallGroup> = [cyclic(1), cyclic(2), cyclic(3), cyclic(4), klein()]
        .into_iter()
        .filter(|g| g.order() <= opts.max_isotropy.max(1))
        .collect();
    let n = rng.gen_range(1..=opts.max_objects.max(1));
    let h = groups.choose(rng).expect("trivial group always allowed").clone();
    let mut kinds = vec![BlockKind::Rationals, BlockKind::Gaussian, BlockKind::Matrix2];
    kinds.retain(|k| n * k.algebra().dim() <= opts.max_dim);
    let kind = *kinds.choose(rng).unwrap_or(&BlockKind::Rationals);
    let b = kind.algebra();
    let bd = b.dim();

    let restricted = rng.gen_bool(0.5);
    // H-set: disjoint union of coset spaces within the block budget
    let budget = (opts.max_dim / (n * bd)).max(1);
    let mut perms: Vec<Vec<usize>> = vec![Vec::new(); h.order()];
    let mut k = 0;
    for _ in 0..2 {
        let fitting: Vec<&Vec<usize>> = h.subgroups.iter().filter(|s| h.order() / s.len() + k <= budget).collect();
        let Some(sub) = fitting.choose(rng) else { break };
        let orbit = h.coset_action(sub);
        for (p, o) in perms.iter_mut().zip(&orbit) {
            p.extend(o.iter().map(|&i| i + k));
        }
        k += orbit[0].len();
        if (k >= 2 || !restricted) && rng.gen_bool(0.5) {
            break;
        }
    }
    if k == 0 {
        k = 1;
        perms = vec![vec![0]; h.order()];
    }
    let chars: Vec<&Vec<bool>> = h.characters.iter().collect();
    let chi = if kind == BlockKind::Rationals { &h.characters[0] } else { chars.choose(rng).expect("trivial character") };
    let twisted = chi.iter().any(|&c| c);

    let g = product_groupoid(n, &h);
    let nblocks = n * k;
    let parts: Vec<(StructAlgebra, String)> =
        (0..nblocks).map(|i| (b.clone(), format!("@o{}.{}", i / k, i % k))).collect();
    let refs: Vec<(&StructAlgebra, &str)> = parts.iter().map(|(a, s)| (a, s.as_str())).collect();
    let a = StructAlgebra::direct_sum(&refs);
    let dim = a.dim();
    let block_unit = |blocks: &[usize]| {
        let mut v = vec![Rational::zero(); dim];
        for &bl in blocks {
            v[bl * bd..(bl + 1) * bd].clone_from_slice(b.unit().coords());
        }
        AlgElem::new(v)
    };
    let twist = kind.twist();
    let nn = n * n;
    let mut idempotents = Vec::new();
    let mut maps = Vec::new();
    for m in 0..g.n_morphisms() {
        let hi = m / nn;
        let (s, t) = (g.src(m), g.tgt(m));
        idempotents.push(block_unit(&(t * k..(t + 1) * k).collect::<Vec<_>>()));
        let mut mat = Matrix::zeros(dim, dim);
        for j in 0..k {
            let from = (s * k + j) * bd;
            let to = (t * k + perms[hi][j]) * bd;
            for r in 0..bd {
                for c in 0..bd {
                    let v = if chi[hi] { twist[(r, c)].clone() } else { Rational::from_integer(((r == c) as i64).into()) };
                    mat[(to + r, from + c)] = v;
                }
            }
        }
        maps.push(Some(mat));
    }
    let global = validate_partial_action(&g, &a, &RawAction { idempotents, maps }).expect("generated global action");

    let action = if restricted {
        // drop at least one block, keep at least one
        let mut keep: Vec<usize> = (0..nblocks).filter(|_| rng.gen_bool(0.5)).collect();
        if keep.is_empty() {
            keep.push(rng.gen_range(0..nblocks));
        }
        if keep.len() == nblocks && nblocks >= 2 {
            keep.remove(rng.gen_range(0..keep.len()));
        }
        restrict_to_ideal(&global, &block_unit(&keep))
    } else {
        Ok(global.clone())
    };
    Generated {
        shape: InstanceShape {
            objects: n,
            group: h.name,
            block: kind,
            blocks: k,
            twisted,
            restricted,
        },
        global,
        action,
    }
}

/// The partial action induced on `A E`: `1'_g = E β_g(E 1_{g⁻¹})`, `α_g = β_g`
/// on `A'_{g⁻¹}`.
pub fn restrict_to_ideal(global: &PartialActionData, e: &AlgElem) -> Result<PartialActionData> {
    let a = global.algebra();
    let g = global.groupoid();
    let ce = a.central_idempotent(e)?;
    let (sub, space) = a.ideal_algebra(&ce)?;
    let coords = |v: &AlgElem| AlgElem::new(space.coordinates(v).expect("restricted data stays in A E"));
    let ones: Vec<AlgElem> = (0..g.n_morphisms())
        .map(|m| {
            let inner = a.mul(e, global.one(g.inverse(m)));
            a.mul(e, &global.alpha(m).apply(&inner))
        })
        .collect();
    let mut raw = RawAction {
        idempotents: Vec::new(),
        maps: Vec::new(),
    };
    for m in 0..g.n_morphisms() {
        raw.idempotents.push(coords(&ones[m]));
        let cut = &ones[g.inverse(m)];
        let cols: Vec<Vec<Rational>> = space
            .basis()
            .iter()
            .map(|bv| coords(&global.alpha(m).apply(&a.mul(cut, bv))).into_coords())
            .collect();
        raw.maps.push(Some(Matrix::from_columns(space.dim(), &cols)));
    }
    validate_partial_action(g, &sub, &raw)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FuzzViolation {
    pub instance: usize,
    /// Which suite: `a` to `f`.
    pub check: String,
    pub witness: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FuzzSummary {
    pub seed: u64,
    pub instances: usize,
    pub global: usize,
    pub partial: usize,
    pub group_type: usize,
    pub separable: usize,
    pub max_dim: usize,
    pub violations: Vec<FuzzViolation>,
}

#[derive(Clone, Debug)]
pub struct FuzzOutcome {
    pub summary: FuzzSummary,
    pub shapes: Vec<InstanceShape>,
    pub elapsed_ms: u64,
}

struct InstanceResult {
    shape: InstanceShape,
    global: bool,
    group_type: bool,
    separable: bool,
    dim: usize,
    violations: Vec<(String, String)>,
    action: Option<PartialActionData>,
}

/// Runs suites (a)–(f) on one instance.
fn check_instance(gen: Generated) -> InstanceResult {
    let mut v: Vec<(String, String)> = Vec::new();
    let mut fail = |suite: &str, w: String| v.push((suite.to_string(), w));
    let shape = gen.shape;
    // (f) generated global actions are flagged global
    if !(gen.global.is_global() && gen.global.composes_globally()) {
        fail("f", "generated global action not flagged global".into());
    }
    let pa = match gen.action {
        Ok(pa) => pa,
        Err(e) => {
            fail("a", e.to_string());
            return InstanceResult {
                shape,
                global: false,
                group_type: false,
                separable: false,
                dim: 0,
                violations: v,
                action: None,
            };
        }
    };
    let g = pa.groupoid();
    // (b)
    let cons = pa.check_consequences();
    if let Some(x) = cons.first_violation() {
        fail("b", format!("{}: {}", x.check, x.witness));
    }
    // (c) on every transversal at the first object
    match enumerate_transversals(g, 0) {
        Ok(ts) => {
            for tau in ts {
                for a in 0..g.n_morphisms() {
                    for b in 0..g.n_morphisms() {
                        if let Some(ab) = g.compose(a, b) {
                            let lhs = tau.loop_part(g, ab);
                            let rhs = g.comp(tau.loop_part(g, a), tau.loop_part(g, b));
                            if lhs != rhs {
                                fail("c", format!("{} at ({}, {})", tau.describe(g), g.name(a), g.name(b)));
                            }
                        }
                    }
                }
                match structural_iso(g, &tau) {
                    Ok(iso) if iso.report.passed() => {}
                    Ok(iso) => fail("c", iso.report.to_string()),
                    Err(e) => fail("c", e.to_string()),
                }
            }
        }
        Err(e) => fail("c", e.to_string()),
    }
    let direct = separable_direct(&pa);
    let mut group_type = false;
    match pa.find_group_type(0) {
        Ok(Some(cert)) => {
            group_type = true;
            for z in 0..g.n_objects() {
                if let Err(why) = cert.rebase(&pa, z) {
                    fail("c", format!("group type not base independent at {}: {why}", g.object_name(z)));
                }
            }
            match factorize(&pa, &cert) {
                Ok(f) => {
                    // (d)
                    if let Some(x) = f.iso.report.first_violation() {
                        fail("d", format!("{}: {}", x.check, x.witness));
                    }
                    // (e)
                    match separable_composite(&pa, &f, &direct) {
                        Ok(c) => {
                            if !(c.agrees_with_direct && c.converse_holds && c.bridge_agrees && c.coarse.matches_coarse_action) {
                                fail(
                                    "e",
                                    format!(
                                        "direct {}, composite {}, group level {}, bridge {}, coarse {}",
                                        direct.separable,
                                        c.verdict.separable,
                                        c.group_level.separable,
                                        c.bridge_agrees,
                                        c.coarse.matches_coarse_action
                                    ),
                                );
                            }
                        }
                        Err(e) => fail("e", e.to_string()),
                    }
                    // (f)
                    let glob = check_global_factorization(&pa, &f);
                    if let Some(x) = glob.report.first_violation() {
                        fail("f", format!("{}: {}", x.check, x.witness));
                    }
                    if pa.is_global() && !glob.gamma_global {
                        fail("f", "global action with partial γ".into());
                    }
                }
                Err(e) => fail("d", e.to_string()),
            }
        }
        Ok(None) => {
            if pa.is_global() {
                fail("f", "global action without a group-type transversal".into());
            }
        }
        Err(e) => fail("c", e.to_string()),
    }
    InstanceResult {
        shape,
        global: pa.is_global(),
        group_type,
        separable: direct.separable,
        dim: pa.algebra().dim(),
        violations: v,
        action: Some(pa),
    }
}

/// The `i`-th instance of a run with these options.
pub fn random_instance(opts: &FuzzOptions, i: usize) -> (InstanceShape, Result<PartialActionData>) {
    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(opts.seed, i));
    let g = generate(&mut rng, opts);
    (g.shape, g.action)
}

fn instance_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64)
}

/// Generates `count` instances from `seed` and runs the invariant suites.
/// Instances run in parallel; the summary depends only on the options.
pub fn fuzz(opts: &FuzzOptions) -> FuzzOutcome {
    let start = Instant::now();
    let results: Vec<InstanceResult> = (0..opts.count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(opts.seed, i));
            check_instance(generate(&mut rng, opts))
        })
        .collect();
    let mut summary = FuzzSummary {
        seed: opts.seed,
        instances: results.len(),
        ..Default::default()
    };
    let mut shapes = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        if r.global {
            summary.global += 1;
        } else {
            summary.partial += 1;
        }
        summary.group_type += r.group_type as usize;
        summary.separable += r.separable as usize;
        summary.max_dim = summary.max_dim.max(r.dim);
        let file = match (&opts.out_dir, &r.action, r.violations.is_empty()) {
            (Some(dir), Some(pa), false) => {
                let meta = Meta {
                    name: Some(format!("fuzz-{}-{i}", opts.seed)),
                    ..Default::default()
                };
                let path = dir.join(format!("fuzz-{}-{i}.json", opts.seed));
                std::fs::create_dir_all(dir)
                    .and_then(|_| std::fs::write(&path, InstanceFile::from_action(pa, meta).to_json()))
                    .ok()
                    .map(|_| path)
            }
            _ => None,
        };
        for (check, witness) in r.violations {
            summary.violations.push(FuzzViolation {
                instance: i,
                check,
                witness,
                file: file.clone(),
            });
        }
        shapes.push(r.shape);
    }
    FuzzOutcome {
        summary,
        shapes,
        elapsed_ms: start.elapsed().as_millis() as u64,
    }
}
