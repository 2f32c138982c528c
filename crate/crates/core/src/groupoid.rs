//! Finite groupoids as validated composition tables.
//!
//! Morphisms are indexed `0..n`; identities come first (one per object, in
//! object order), followed by the remaining morphisms in input order.
//! `compose(g, h)` is `gh`, defined exactly when `t(h) = s(g)`.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::verify::VerificationReport;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    pub id: String,
    pub src: usize,
    pub tgt: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinGroupoid {
    objects: Vec<String>,
    morphisms: Vec<Morphism>,
    comp: Vec<Option<usize>>,
    identity: Vec<usize>,
    inverse: Vec<usize>,
}

/// A groupoid as written in an instance file: non-identity morphisms and a
/// generating set of compositions. Names in `compositions` may be morphism
/// ids, identity ids, or object ids (standing for their identities).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawGroupoid {
    pub objects: Vec<String>,
    /// Explicit identity names; objects not listed get `id:<object>`.
    pub identities: BTreeMap<String, String>,
    pub morphisms: Vec<RawMorphism>,
    /// `[a, b, c]` means `a·b = c`.
    pub compositions: Vec<[String; 3]>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawMorphism {
    pub id: String,
    pub src: String,
    pub tgt: String,
    pub inverse: Option<String>,
}

pub fn identity_name(object: &str) -> String {
    format!("id:{object}")
}

/// Validates a raw description, closing the composition table under the
/// groupoid laws and checking every axiom exhaustively.
pub fn validate_groupoid(raw: &RawGroupoid) -> Result<FinGroupoid> {
    if raw.objects.is_empty() {
        return Err(Error::EmptyObjectSet);
    }
    let mut object_index = HashMap::new();
    for (i, o) in raw.objects.iter().enumerate() {
        if object_index.insert(o.as_str(), i).is_some() {
            return Err(Error::groupoid("duplicate object", o.clone()));
        }
    }
    for o in raw.identities.keys() {
        if !object_index.contains_key(o.as_str()) {
            return Err(Error::UnknownObject(o.clone()));
        }
    }
    let mut morphisms: Vec<Morphism> = raw
        .objects
        .iter()
        .enumerate()
        .map(|(i, o)| Morphism {
            id: raw.identities.get(o).cloned().unwrap_or_else(|| identity_name(o)),
            src: i,
            tgt: i,
        })
        .collect();
    let obj = |name: &str| -> Result<usize> {
        object_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownObject(name.to_string()))
    };
    for m in &raw.morphisms {
        morphisms.push(Morphism {
            id: m.id.clone(),
            src: obj(&m.src)?,
            tgt: obj(&m.tgt)?,
        });
    }
    let mut index = HashMap::new();
    for (i, m) in morphisms.iter().enumerate() {
        if object_index.contains_key(m.id.as_str()) && i >= raw.objects.len() {
            return Err(Error::groupoid("morphism id collides with an object id", m.id.clone()));
        }
        if index.insert(m.id.clone(), i).is_some() {
            return Err(Error::groupoid("duplicate morphism id", m.id.clone()));
        }
    }
    let resolve = |name: &str| -> Result<usize> {
        if let Some(&i) = index.get(name) {
            return Ok(i);
        }
        if let Some(&o) = object_index.get(name) {
            return Ok(o);
        }
        Err(Error::groupoid("unknown morphism", name.to_string()))
    };

    let n_obj = raw.objects.len();
    let mut cl = Closure::new(&morphisms, n_obj);
    for (k, m) in raw.morphisms.iter().enumerate() {
        if let Some(inv) = &m.inverse {
            cl.set_inverse(n_obj + k, resolve(inv)?)?;
        }
    }
    for [a, b, c] in &raw.compositions {
        cl.set(resolve(a)?, resolve(b)?, resolve(c)?)?;
    }
    cl.run()?;
    let Closure { table, inv, .. } = cl;

    let n = morphisms.len();
    for g in 0..n {
        for h in 0..n {
            if morphisms[h].tgt == morphisms[g].src && table[g * n + h].is_none() {
                return Err(Error::groupoid(
                    "missing composite",
                    format!("{}·{}", morphisms[g].id, morphisms[h].id),
                ));
            }
        }
    }
    let inverse = inv
        .iter()
        .enumerate()
        .map(|(g, i)| i.ok_or_else(|| Error::groupoid("morphism without inverse", morphisms[g].id.clone())))
        .collect::<Result<Vec<_>>>()?;
    let g = FinGroupoid {
        objects: raw.objects.clone(),
        identity: (0..n_obj).collect(),
        morphisms,
        comp: table,
        inverse,
    };
    g.check_axioms()?;
    Ok(g)
}

/// Deduction of composites from identities, inverses, cancellation and
/// associativity until nothing new follows.
struct Closure<'a> {
    mors: &'a [Morphism],
    n_obj: usize,
    table: Vec<Option<usize>>,
    inv: Vec<Option<usize>>,
    changed: bool,
}

impl<'a> Closure<'a> {
    fn new(mors: &'a [Morphism], n_obj: usize) -> Self {
        let n = mors.len();
        let mut inv = vec![None; n];
        for (x, slot) in inv.iter_mut().enumerate().take(n_obj) {
            *slot = Some(x);
        }
        Closure {
            mors,
            n_obj,
            table: vec![None; n * n],
            inv,
            changed: false,
        }
    }

    fn n(&self) -> usize {
        self.mors.len()
    }

    fn name(&self, g: usize) -> &str {
        &self.mors[g].id
    }

    fn get(&self, a: usize, b: usize) -> Option<usize> {
        self.table[a * self.n() + b]
    }

    fn set(&mut self, a: usize, b: usize, c: usize) -> Result<()> {
        let (ma, mb, mc) = (&self.mors[a], &self.mors[b], &self.mors[c]);
        let eq = || format!("{}·{} = {}", ma.id, mb.id, mc.id);
        if mb.tgt != ma.src {
            return Err(Error::groupoid("composite of non-composable pair", eq()));
        }
        if mc.tgt != ma.tgt {
            return Err(Error::groupoid("target mismatch", eq()));
        }
        if mc.src != mb.src {
            return Err(Error::groupoid("source mismatch", eq()));
        }
        let n = self.n();
        match self.table[a * n + b] {
            Some(x) if x != c => Err(Error::groupoid(
                "conflicting composites",
                format!("{eq} but also {}", self.name(x), eq = eq()),
            )),
            Some(_) => Ok(()),
            None => {
                self.table[a * n + b] = Some(c);
                self.changed = true;
                Ok(())
            }
        }
    }

    fn set_inverse(&mut self, a: usize, b: usize) -> Result<()> {
        let (ma, mb) = (&self.mors[a], &self.mors[b]);
        if ma.src != mb.tgt || ma.tgt != mb.src {
            return Err(Error::groupoid(
                "inverse has wrong source/target",
                format!("{} / {}", ma.id, mb.id),
            ));
        }
        for (x, y) in [(a, b), (b, a)] {
            match self.inv[x] {
                Some(z) if z != y => {
                    return Err(Error::groupoid(
                        "conflicting inverses",
                        format!("{} has inverses {} and {}", self.name(x), self.name(z), self.name(y)),
                    ))
                }
                Some(_) => {}
                None => {
                    self.inv[x] = Some(y);
                    self.changed = true;
                }
            }
        }
        Ok(())
    }

    fn run(&mut self) -> Result<()> {
        let n = self.n();
        for g in 0..n {
            let (s, t) = (self.mors[g].src, self.mors[g].tgt);
            self.set(t, g, g)?;
            self.set(g, s, g)?;
        }
        loop {
            self.changed = false;
            for g in 0..n {
                if let Some(gi) = self.inv[g] {
                    let (s, t) = (self.mors[g].src, self.mors[g].tgt);
                    self.set(g, gi, t)?;
                    self.set(gi, g, s)?;
                }
            }
            let known: Vec<(usize, usize, usize)> = (0..n * n)
                .filter_map(|k| self.table[k].map(|c| (k / n, k % n, c)))
                .collect();
            for &(a, b, c) in &known {
                if c < self.n_obj {
                    self.set_inverse(a, b)?;
                }
                if let Some(ai) = self.inv[a] {
                    self.set(ai, c, b)?;
                }
                if let Some(bi) = self.inv[b] {
                    self.set(c, bi, a)?;
                }
                if let (Some(ai), Some(bi)) = (self.inv[a], self.inv[b]) {
                    match (self.inv[c], self.get(bi, ai)) {
                        (Some(ci), _) => self.set(bi, ai, ci)?,
                        (None, Some(d)) => self.set_inverse(c, d)?,
                        _ => {}
                    }
                }
            }
            for &(a, b, c) in &known {
                for d in 0..n {
                    let Some(e) = self.get(b, d) else { continue };
                    match (self.get(c, d), self.get(a, e)) {
                        (Some(f), None) => self.set(a, e, f)?,
                        (None, Some(f)) => self.set(c, d, f)?,
                        (Some(f1), Some(f2)) if f1 != f2 => {
                            return Err(Error::groupoid(
                                "non-associative table",
                                format!("({}, {}, {})", self.name(a), self.name(b), self.name(d)),
                            ))
                        }
                        _ => {}
                    }
                }
            }
            if !self.changed {
                return Ok(());
            }
        }
    }
}

impl FinGroupoid {
    /// Builds a groupoid from a composition function; identities and
    /// inverses are located by search and all axioms are checked.
    pub fn from_fn(
        objects: Vec<String>,
        morphisms: Vec<Morphism>,
        identity: Vec<usize>,
        compose: impl Fn(usize, usize) -> Option<usize>,
    ) -> Result<Self> {
        let n = morphisms.len();
        let mut comp = vec![None; n * n];
        for g in 0..n {
            for h in 0..n {
                if morphisms[h].tgt == morphisms[g].src {
                    comp[g * n + h] = compose(g, h);
                }
            }
        }
        let mut inverse = Vec::with_capacity(n);
        for g in 0..n {
            let t = morphisms[g].tgt;
            let found = (0..n).find(|&h| comp[g * n + h] == Some(identity[t]));
            inverse.push(found.ok_or_else(|| Error::groupoid("morphism without inverse", morphisms[g].id.clone()))?);
        }
        let g = FinGroupoid {
            objects,
            morphisms,
            comp,
            identity,
            inverse,
        };
        g.check_axioms()?;
        Ok(g)
    }

    /// Exhaustive check of every groupoid axiom on the stored table.
    pub fn check_axioms(&self) -> Result<()> {
        let n = self.n_morphisms();
        let name = |g: usize| self.morphisms[g].id.clone();
        for (x, &id) in self.identity.iter().enumerate() {
            if self.src(id) != x || self.tgt(id) != x {
                return Err(Error::groupoid("identity has wrong endpoints", name(id)));
            }
        }
        for g in 0..n {
            for h in 0..n {
                let composable = self.tgt(h) == self.src(g);
                match (composable, self.comp[g * n + h]) {
                    (true, None) => {
                        return Err(Error::groupoid("missing composite", format!("{}·{}", name(g), name(h))))
                    }
                    (false, Some(_)) => {
                        return Err(Error::groupoid(
                            "composite of non-composable pair",
                            format!("{}·{}", name(g), name(h)),
                        ))
                    }
                    (true, Some(c)) => {
                        if self.tgt(c) != self.tgt(g) {
                            return Err(Error::groupoid("target mismatch", format!("{}·{} = {}", name(g), name(h), name(c))));
                        }
                        if self.src(c) != self.src(h) {
                            return Err(Error::groupoid("source mismatch", format!("{}·{} = {}", name(g), name(h), name(c))));
                        }
                    }
                    (false, None) => {}
                }
            }
            let (s, t) = (self.src(g), self.tgt(g));
            if self.comp[self.identity[t] * n + g] != Some(g) || self.comp[g * n + self.identity[s]] != Some(g) {
                return Err(Error::groupoid("identity law fails", name(g)));
            }
            let gi = self.inverse[g];
            if self.comp[gi * n + g] != Some(self.identity[s]) || self.comp[g * n + gi] != Some(self.identity[t]) {
                return Err(Error::groupoid("inverse law fails", format!("{} / {}", name(g), name(gi))));
            }
        }
        for a in 0..n {
            for b in 0..n {
                let Some(ab) = self.comp[a * n + b] else { continue };
                for c in 0..n {
                    let Some(bc) = self.comp[b * n + c] else { continue };
                    if self.comp[ab * n + c] != self.comp[a * n + bc] {
                        return Err(Error::groupoid(
                            "non-associative table",
                            format!("({}, {}, {})", name(a), name(b), name(c)),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn n_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn object_name(&self, x: usize) -> &str {
        &self.objects[x]
    }

    pub fn object_index(&self, name: &str) -> Result<usize> {
        self.objects
            .iter()
            .position(|o| o == name)
            .ok_or_else(|| Error::UnknownObject(name.to_string()))
    }

    pub fn morphisms(&self) -> &[Morphism] {
        &self.morphisms
    }

    pub fn n_morphisms(&self) -> usize {
        self.morphisms.len()
    }

    pub fn name(&self, g: usize) -> &str {
        &self.morphisms[g].id
    }

    pub fn morphism_index(&self, id: &str) -> Option<usize> {
        self.morphisms
            .iter()
            .position(|m| m.id == id)
            .or_else(|| self.objects.iter().position(|o| o == id).map(|x| self.identity[x]))
    }

    pub fn src(&self, g: usize) -> usize {
        self.morphisms[g].src
    }

    pub fn tgt(&self, g: usize) -> usize {
        self.morphisms[g].tgt
    }

    /// `gh`, defined when `t(h) = s(g)`.
    pub fn compose(&self, g: usize, h: usize) -> Option<usize> {
        self.comp[g * self.n_morphisms() + h]
    }

    /// Composite that the caller knows to exist.
    pub fn comp(&self, g: usize, h: usize) -> usize {
        self.compose(g, h).unwrap_or_else(|| {
            panic!("{} and {} are not composable", self.name(g), self.name(h))
        })
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn identity(&self, x: usize) -> usize {
        self.identity[x]
    }

    pub fn is_identity(&self, g: usize) -> bool {
        self.identity[self.src(g)] == g
    }

    /// `G(y, z)`: morphisms from `y` to `z`, in index order.
    pub fn hom(&self, y: usize, z: usize) -> Vec<usize> {
        (0..self.n_morphisms())
            .filter(|&g| self.src(g) == y && self.tgt(g) == z)
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let x = 0;
        (0..self.n_objects()).all(|y| !self.hom(x, y).is_empty())
    }
}

/// A full subgroupoid together with its embedding into the parent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroupoid {
    pub groupoid: FinGroupoid,
    /// Sub object index -> parent object index.
    pub object_map: Vec<usize>,
    /// Sub morphism index -> parent morphism index.
    pub morphism_map: Vec<usize>,
}

impl Subgroupoid {
    pub fn parent_morphism_to_sub(&self, g: usize) -> Option<usize> {
        self.morphism_map.iter().position(|&m| m == g)
    }
}

/// Subgroupoid on `objects` keeping exactly the morphisms in `keep`.
fn subgroupoid(g: &FinGroupoid, objects: &[usize], keep: impl Fn(usize) -> bool) -> Subgroupoid {
    let obj_pos: HashMap<usize, usize> = objects.iter().enumerate().map(|(i, &o)| (o, i)).collect();
    let identities: Vec<usize> = objects.iter().map(|&o| g.identity(o)).collect();
    let mut morphism_map = identities.clone();
    morphism_map.extend((0..g.n_morphisms()).filter(|&m| !identities.contains(&m) && keep(m)));
    let mor_pos: HashMap<usize, usize> = morphism_map.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let n = morphism_map.len();
    let morphisms = morphism_map
        .iter()
        .map(|&m| Morphism {
            id: g.name(m).to_string(),
            src: obj_pos[&g.src(m)],
            tgt: obj_pos[&g.tgt(m)],
        })
        .collect();
    let mut comp = vec![None; n * n];
    for (i, &a) in morphism_map.iter().enumerate() {
        for (j, &b) in morphism_map.iter().enumerate() {
            comp[i * n + j] = g.compose(a, b).map(|c| mor_pos[&c]);
        }
    }
    let inverse = morphism_map.iter().map(|&m| mor_pos[&g.inverse(m)]).collect();
    Subgroupoid {
        groupoid: FinGroupoid {
            objects: objects.iter().map(|&o| g.object_name(o).to_string()).collect(),
            morphisms,
            comp,
            identity: (0..objects.len()).collect(),
            inverse,
        },
        object_map: objects.to_vec(),
        morphism_map,
    }
}

/// Full subgroupoids on the classes of `x ~ y iff G(x, y) is nonempty`,
/// ordered by their least object.
pub fn connected_components(g: &FinGroupoid) -> Vec<Subgroupoid> {
    let n = g.n_objects();
    let mut class = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for x in 0..n {
        if class[x] != usize::MAX {
            continue;
        }
        let c = reps.len();
        reps.push(x);
        for y in 0..n {
            if !g.hom(x, y).is_empty() {
                class[y] = c;
            }
        }
    }
    (0..reps.len())
        .map(|c| {
            let objs: Vec<usize> = (0..n).filter(|&y| class[y] == c).collect();
            subgroupoid(g, &objs, |m| class[g.src(m)] == c)
        })
        .collect()
}

/// The coarse groupoid `X²`: one morphism `(x, y)` for each ordered pair,
/// composing as `(y, z)(x, y) = (x, z)`. Identities `(x, x)` come first,
/// then the pairs with `x != y` in row-major order.
pub fn coarse_groupoid(objects: &[String]) -> Result<FinGroupoid> {
    if objects.is_empty() {
        return Err(Error::EmptyObjectSet);
    }
    let n = objects.len();
    let mut pairs: Vec<(usize, usize)> = (0..n).map(|x| (x, x)).collect();
    for x in 0..n {
        for y in 0..n {
            if x != y {
                pairs.push((x, y));
            }
        }
    }
    let pos: HashMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let morphisms = pairs
        .iter()
        .map(|&(x, y)| Morphism {
            id: format!("({},{})", objects[x], objects[y]),
            src: x,
            tgt: y,
        })
        .collect();
    FinGroupoid::from_fn(objects.to_vec(), morphisms, (0..n).collect(), |g, h| {
        let (y, z) = pairs[g];
        let (x, y2) = pairs[h];
        (y == y2).then(|| pos[&(x, z)])
    })
}

/// Index of the unique coarse morphism `(y, z)` in a coarse groupoid built by
/// [`coarse_groupoid`].
pub fn coarse_index(n_objects: usize, y: usize, z: usize) -> usize {
    if y == z {
        y
    } else {
        let off = y * (n_objects - 1) + if z > y { z - 1 } else { z };
        n_objects + off
    }
}

/// `G(x)`, the loops at `x`, as a one-object subgroupoid.
pub fn isotropy_group(g: &FinGroupoid, x: usize) -> Result<Subgroupoid> {
    if x >= g.n_objects() {
        return Err(Error::UnknownObject(format!("#{x}")));
    }
    Ok(subgroupoid(g, &[x], |m| g.src(m) == x && g.tgt(m) == x))
}

/// A choice of `τ_y : x -> y` for every object, with `τ_x` the identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transversal {
    pub base: usize,
    /// `tau[y]` is the morphism index of `τ_y`.
    pub tau: Vec<usize>,
}

impl Transversal {
    pub fn is_valid(&self, g: &FinGroupoid) -> bool {
        self.tau.len() == g.n_objects()
            && self.tau[self.base] == g.identity(self.base)
            && self
                .tau
                .iter()
                .enumerate()
                .all(|(y, &t)| g.src(t) == self.base && g.tgt(t) == y)
    }

    /// `g_x = τ_{t(g)}⁻¹ g τ_{s(g)}`, a loop at the base object.
    pub fn loop_part(&self, g: &FinGroupoid, m: usize) -> usize {
        let right = g.comp(m, self.tau[g.src(m)]);
        g.comp(g.inverse(self.tau[g.tgt(m)]), right)
    }

    /// The transversal `τ̃_y = τ_y τ_z⁻¹` at another base object `z`.
    pub fn rebased(&self, g: &FinGroupoid, z: usize) -> Transversal {
        let back = g.inverse(self.tau[z]);
        Transversal {
            base: z,
            tau: self.tau.iter().map(|&t| g.comp(t, back)).collect(),
        }
    }

    pub fn describe(&self, g: &FinGroupoid) -> String {
        let parts: Vec<String> = self
            .tau
            .iter()
            .enumerate()
            .map(|(y, &t)| {
                let name = if g.is_identity(t) { g.object_name(y) } else { g.name(t) };
                format!("{}={}", g.object_name(y), name)
            })
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// Iterator over all transversals at a base object.
pub struct Transversals {
    base: usize,
    choices: Vec<Vec<usize>>,
    counter: Vec<usize>,
    done: bool,
}

impl Iterator for Transversals {
    type Item = Transversal;

    fn next(&mut self) -> Option<Transversal> {
        if self.done {
            return None;
        }
        let tau = self.counter.iter().zip(&self.choices).map(|(&c, ch)| ch[c]).collect();
        // odometer; the first object is the most significant digit
        self.done = true;
        for k in (0..self.counter.len()).rev() {
            if self.counter[k] + 1 < self.choices[k].len() {
                self.counter[k] += 1;
                for later in self.counter.iter_mut().skip(k + 1) {
                    *later = 0;
                }
                self.done = false;
                break;
            }
        }
        Some(Transversal { base: self.base, tau })
    }
}

/// All transversals at `x`, in lexicographic order of morphism ids.
pub fn enumerate_transversals(g: &FinGroupoid, x: usize) -> Result<Transversals> {
    if x >= g.n_objects() {
        return Err(Error::UnknownObject(format!("#{x}")));
    }
    if !g.is_connected() {
        return Err(Error::NotConnected);
    }
    let choices: Vec<Vec<usize>> = (0..g.n_objects())
        .map(|y| {
            if y == x {
                vec![g.identity(x)]
            } else {
                let mut c = g.hom(x, y);
                c.sort_by(|a, b| g.name(*a).cmp(g.name(*b)));
                c
            }
        })
        .collect();
    Ok(Transversals {
        base: x,
        counter: vec![0; choices.len()],
        choices,
        done: false,
    })
}

/// `G₀² × G(x)` with morphisms `((y, z), h)`.
#[derive(Clone, Debug)]
pub struct ProductGroupoid {
    pub coarse: FinGroupoid,
    pub isotropy: Subgroupoid,
    pub groupoid: FinGroupoid,
}

impl ProductGroupoid {
    pub fn new(g: &FinGroupoid, x: usize) -> Result<Self> {
        let coarse = coarse_groupoid(g.objects())?;
        let isotropy = isotropy_group(g, x)?;
        let k = isotropy.groupoid.n_morphisms();
        let nc = coarse.n_morphisms();
        let mut morphisms = Vec::with_capacity(nc * k);
        for u in 0..nc {
            for h in 0..k {
                morphisms.push(Morphism {
                    id: format!("({},{})", coarse.name(u), isotropy.groupoid.name(h)),
                    src: coarse.src(u),
                    tgt: coarse.tgt(u),
                });
            }
        }
        let identity = (0..coarse.n_objects()).map(|y| coarse.identity(y) * k).collect();
        let (c, iso) = (&coarse, &isotropy.groupoid);
        let groupoid = FinGroupoid::from_fn(coarse.objects().to_vec(), morphisms, identity, |a, b| {
            let (u, h) = (a / k, a % k);
            let (v, h2) = (b / k, b % k);
            Some(c.compose(u, v)? * k + iso.compose(h, h2)?)
        })?;
        Ok(ProductGroupoid {
            coarse,
            isotropy,
            groupoid,
        })
    }

    pub fn index(&self, u: usize, h: usize) -> usize {
        u * self.isotropy.groupoid.n_morphisms() + h
    }

    pub fn split(&self, m: usize) -> (usize, usize) {
        let k = self.isotropy.groupoid.n_morphisms();
        (m / k, m % k)
    }
}

/// `φ₀ : G -> G₀² × G(x)`, `g -> ((s(g), t(g)), g_x)`, with its inverse
/// `((y, z), h) -> τ_z h τ_y⁻¹` and the verification transcript.
#[derive(Clone, Debug)]
pub struct StructuralIso {
    pub product: ProductGroupoid,
    pub forward: Vec<usize>,
    pub backward: Vec<usize>,
    pub report: VerificationReport,
}

pub fn structural_iso(g: &FinGroupoid, tau: &Transversal) -> Result<StructuralIso> {
    if !g.is_connected() {
        return Err(Error::NotConnected);
    }
    if !tau.is_valid(g) {
        return Err(Error::groupoid("invalid transversal", tau.describe(g)));
    }
    let x = tau.base;
    let product = ProductGroupoid::new(g, x)?;
    let iso = &product.isotropy;
    let n = g.n_objects();
    let mut report = VerificationReport::new("structural isomorphism");

    let mut forward = Vec::with_capacity(g.n_morphisms());
    for m in 0..g.n_morphisms() {
        let gx = tau.loop_part(g, m);
        report.check(g.src(gx) == x && g.tgt(gx) == x, "loop part at base", || {
            format!("{} -> {}", g.name(m), g.name(gx))
        });
        let h = iso.parent_morphism_to_sub(gx).expect("loop lies in the isotropy group");
        forward.push(product.index(coarse_index(n, g.src(m), g.tgt(m)), h));
    }
    let mut backward = Vec::with_capacity(product.groupoid.n_morphisms());
    for p in 0..product.groupoid.n_morphisms() {
        let (u, h) = product.split(p);
        let (y, z) = (product.coarse.src(u), product.coarse.tgt(u));
        let hp = iso.morphism_map[h];
        let m = g.comp(tau.tau[z], g.comp(hp, g.inverse(tau.tau[y])));
        backward.push(m);
    }

    let mut seen = vec![false; product.groupoid.n_morphisms()];
    for &p in &forward {
        seen[p] = true;
    }
    report.check(
        forward.len() == product.groupoid.n_morphisms() && seen.iter().all(|&s| s),
        "bijective",
        || format!("{} morphisms vs {} in the product", forward.len(), seen.len()),
    );
    for a in 0..g.n_morphisms() {
        for b in 0..g.n_morphisms() {
            if let Some(ab) = g.compose(a, b) {
                let ok = product.groupoid.compose(forward[a], forward[b]) == Some(forward[ab]);
                report.check(ok, "functorial", || format!("({}, {})", g.name(a), g.name(b)));
                let split_ok = tau.loop_part(g, ab) == g.comp(tau.loop_part(g, a), tau.loop_part(g, b));
                report.check(split_ok, "loop part multiplicative", || {
                    format!("({}, {})", g.name(a), g.name(b))
                });
            }
        }
        report.check(backward[forward[a]] == a, "inverse after forward", || g.name(a).to_string());
    }
    for (p, &m) in backward.iter().enumerate() {
        report.check(forward[m] == p, "forward after inverse", || product.groupoid.name(p).to_string());
    }
    Ok(StructuralIso {
        product,
        forward,
        backward,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(objects: &[&str], mors: &[(&str, &str, &str, Option<&str>)], comps: &[[&str; 3]]) -> RawGroupoid {
        RawGroupoid {
            objects: objects.iter().map(|s| s.to_string()).collect(),
            identities: BTreeMap::new(),
            morphisms: mors
                .iter()
                .map(|(id, s, t, inv)| RawMorphism {
                    id: id.to_string(),
                    src: s.to_string(),
                    tgt: t.to_string(),
                    inverse: inv.map(|s| s.to_string()),
                })
                .collect(),
            compositions: comps.iter().map(|c| c.map(|s| s.to_string())).collect(),
        }
    }

    pub(crate) fn e57_raw() -> RawGroupoid {
        raw(
            &["x", "y"],
            &[
                ("g", "x", "x", None),
                ("h", "y", "y", None),
                ("l", "x", "y", Some("l_inv")),
                ("m", "x", "y", Some("m_inv")),
                ("l_inv", "y", "x", None),
                ("m_inv", "y", "x", None),
            ],
            &[["g", "g", "x"], ["h", "h", "y"], ["l", "g", "m"], ["h", "l", "m"]],
        )
    }

    #[test]
    fn trivial_group() {
        let g = validate_groupoid(&raw(&["x"], &[], &[])).unwrap();
        assert_eq!(g.n_morphisms(), 1);
        assert_eq!(g.compose(0, 0), Some(0));
    }

    #[test]
    fn e57_closes() {
        let g = validate_groupoid(&e57_raw()).unwrap();
        assert_eq!(g.n_morphisms(), 8);
        let i = |s| g.morphism_index(s).unwrap();
        assert_eq!(g.compose(i("l_inv"), i("m")), Some(i("g")));
        assert_eq!(g.compose(i("m"), i("l_inv")), Some(i("h")));
        assert_eq!(g.compose(i("g"), i("l_inv")), Some(i("m_inv")));
        assert_eq!(g.inverse(i("g")), i("g"));
    }

    #[test]
    fn e57_wrong_target_rejected() {
        let mut r = e57_raw();
        r.compositions[2] = ["l", "g", "l_inv"].map(String::from);
        match validate_groupoid(&r) {
            Err(Error::GroupoidAxiomViolation { reason, witness }) => {
                assert_eq!(reason, "target mismatch");
                assert!(witness.contains("l·g = l_inv"));
            }
            other => panic!("expected axiom violation, got {other:?}"),
        }
    }

    #[test]
    fn missing_inverse_rejected() {
        let r = raw(&["x", "y"], &[("l", "x", "y", None)], &[]);
        assert!(matches!(validate_groupoid(&r), Err(Error::GroupoidAxiomViolation { .. })));
    }

    #[test]
    fn components() {
        let g = validate_groupoid(&e57_raw()).unwrap();
        assert_eq!(connected_components(&g).len(), 1);
        let d = validate_groupoid(&raw(&["a", "b", "c"], &[], &[])).unwrap();
        let comps = connected_components(&d);
        assert_eq!(comps.len(), 3);
        assert!(comps.iter().all(|c| c.groupoid.n_morphisms() == 1));
    }

    #[test]
    fn coarse() {
        assert!(matches!(coarse_groupoid(&[]), Err(Error::EmptyObjectSet)));
        let one = coarse_groupoid(&["x".into()]).unwrap();
        assert_eq!(one.n_morphisms(), 1);
        let names: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let c = coarse_groupoid(&names).unwrap();
        assert_eq!(c.n_morphisms(), 9);
        let yz = c.morphism_index("(y,z)").unwrap();
        let xy = c.morphism_index("(x,y)").unwrap();
        assert_eq!(c.name(c.comp(yz, xy)), "(x,z)");
        for y in 0..3 {
            for z in 0..3 {
                let u = coarse_index(3, y, z);
                assert_eq!((c.src(u), c.tgt(u)), (y, z));
            }
        }
        let c2 = coarse_groupoid(&names[..2]).unwrap();
        let yx = c2.morphism_index("(y,x)").unwrap();
        let xy = c2.morphism_index("(x,y)").unwrap();
        assert_eq!(c2.name(c2.comp(yx, xy)), "(x,x)");
    }

    #[test]
    fn isotropy() {
        let g = validate_groupoid(&e57_raw()).unwrap();
        let gx = isotropy_group(&g, 0).unwrap();
        let names: Vec<&str> = gx.groupoid.morphisms().iter().map(|m| m.id.as_str()).collect();
        assert_eq!(names, ["id:x", "g"]);
        let gy = isotropy_group(&g, 1).unwrap();
        assert_eq!(gy.groupoid.n_morphisms(), 2);
        assert!(isotropy_group(&g, 5).is_err());
        let c = coarse_groupoid(&["x".into(), "y".into()]).unwrap();
        assert_eq!(isotropy_group(&c, 0).unwrap().groupoid.n_morphisms(), 1);
    }

    #[test]
    fn transversals() {
        let g = validate_groupoid(&e57_raw()).unwrap();
        let all: Vec<String> = enumerate_transversals(&g, 0).unwrap().map(|t| t.describe(&g)).collect();
        assert_eq!(all, ["{x=x, y=l}", "{x=x, y=m}"]);
        let c = coarse_groupoid(&["x".into(), "y".into()]).unwrap();
        assert_eq!(enumerate_transversals(&c, 0).unwrap().count(), 1);
        let t = validate_groupoid(&raw(&["x"], &[], &[])).unwrap();
        assert_eq!(enumerate_transversals(&t, 0).unwrap().count(), 1);
        let d = validate_groupoid(&raw(&["a", "b"], &[], &[])).unwrap();
        assert!(matches!(enumerate_transversals(&d, 0), Err(Error::NotConnected)));
    }

    #[test]
    fn structural_iso_e57() {
        let g = validate_groupoid(&e57_raw()).unwrap();
        let tau = enumerate_transversals(&g, 0).unwrap().next().unwrap();
        let iso = structural_iso(&g, &tau).unwrap();
        assert!(iso.report.passed(), "{}", iso.report);
        let name = |m: &str| iso.product.groupoid.name(iso.forward[g.morphism_index(m).unwrap()]).to_string();
        assert_eq!(name("m"), "((x,y),g)");
        assert_eq!(name("l"), "((x,y),id:x)");
        assert_eq!(name("h"), "((y,y),g)");
    }

    #[test]
    fn rebased_transversal_is_valid() {
        let g = validate_groupoid(&e57_raw()).unwrap();
        for t in enumerate_transversals(&g, 0).unwrap() {
            let r = t.rebased(&g, 1);
            assert!(r.is_valid(&g));
        }
    }
}
