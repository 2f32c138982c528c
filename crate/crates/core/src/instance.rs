//! JSON instance files.
//!
//! Rationals are strings (`"3"`, `"-1/2"`). Elements of the algebra are
//! sparse maps from basis labels to coefficients; a linear map is given by
//! the images of the basis elements it does not send to zero.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::action::{validate_partial_action, PartialActionData, RawAction};
use crate::algebra::{AlgElem, StructAlgebra};
use crate::error::{Error, Result};
use crate::groupoid::{identity_name, validate_groupoid, FinGroupoid, RawGroupoid, RawMorphism};
use crate::matrix::Matrix;
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rat(pub Rational);

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Rat;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational written as a string, e.g. \"-3/4\"")
            }
            fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<Rat, E> {
                parse_rational(s).map(Rat).map_err(|e| E::custom(e.to_string()))
            }
        }
        d.deserialize_str(V)
    }
}

pub type SparseCoords = BTreeMap<String, Rat>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "Meta::is_empty")]
    pub meta: Meta,
    pub groupoid: GroupoidSection,
    pub algebra: AlgebraSection,
    pub action: Vec<ActionEntry>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Preferred base object for the group-type search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    /// Preferred transversal: object -> morphism.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transversal: Option<BTreeMap<String, String>>,
}

impl Meta {
    fn is_empty(&self) -> bool {
        self.name.is_none() && self.base.is_none() && self.transversal.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupoidSection {
    pub objects: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub identities: BTreeMap<String, String>,
    #[serde(default)]
    pub morphisms: Vec<MorphismEntry>,
    /// `[a, b, c]` means `a·b = c`.
    #[serde(default)]
    pub compositions: Vec<[String; 3]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismEntry {
    pub id: String,
    pub src: String,
    pub tgt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSection {
    pub dim: usize,
    pub basis: Vec<String>,
    /// Nonzero products of basis elements.
    pub products: Vec<ProductEntry>,
    pub unit: SparseCoords,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductEntry {
    pub left: String,
    pub right: String,
    pub value: SparseCoords,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionEntry {
    pub morphism: String,
    pub idempotent: SparseCoords,
    /// Basis label -> image. Omitted on an identity: multiplication by `1_x`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<BTreeMap<String, SparseCoords>>,
}

fn at(path: impl Into<String>, message: impl fmt::Display) -> Error {
    Error::parse(format!("{}: {message}", path.into()))
}

pub fn parse_instance_str(text: &str) -> Result<InstanceFile> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: Some(e.line()),
        column: Some(e.column()),
        message: e.to_string(),
    })?;
    file.check_references()?;
    Ok(file)
}

pub fn parse_instance(path: &Path) -> Result<InstanceFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_instance_str(&text)
}

fn unique<'a>(names: impl IntoIterator<Item = &'a String>, what: &str) -> Result<HashSet<&'a str>> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(at(what, format!("duplicate name {n:?}")));
        }
    }
    Ok(seen)
}

fn check_coords(c: &SparseCoords, labels: &HashSet<&str>, path: &str) -> Result<()> {
    match c.keys().find(|k| !labels.contains(k.as_str())) {
        Some(k) => Err(at(path, format!("unknown basis label {k:?}"))),
        None => Ok(()),
    }
}

impl InstanceFile {
    /// Name resolution: every referenced object, morphism and basis label
    /// must be declared. Semantic checks are left to the validators.
    pub fn check_references(&self) -> Result<()> {
        let g = &self.groupoid;
        let objects = unique(&g.objects, "groupoid.objects")?;
        if objects.is_empty() {
            return Err(at("groupoid.objects", "no objects"));
        }
        for (o, id) in &g.identities {
            if !objects.contains(o.as_str()) {
                return Err(at(format!("groupoid.identities.{o}"), format!("unknown object {o:?} for identity {id:?}")));
            }
        }
        let ids: Vec<String> = g
            .objects
            .iter()
            .map(|o| g.identities.get(o).cloned().unwrap_or_else(|| identity_name(o)))
            .collect();
        let morphism_names = unique(ids.iter().chain(g.morphisms.iter().map(|m| &m.id)), "groupoid.morphisms")?;
        for (i, m) in g.morphisms.iter().enumerate() {
            for (field, v) in [("src", &m.src), ("tgt", &m.tgt)] {
                if !objects.contains(v.as_str()) {
                    return Err(at(format!("groupoid.morphisms[{i}].{field}"), format!("unknown object {v:?}")));
                }
            }
            if let Some(inv) = &m.inverse {
                if !morphism_names.contains(inv.as_str()) {
                    return Err(at(format!("groupoid.morphisms[{i}].inverse"), format!("unknown morphism {inv:?}")));
                }
            }
        }
        for (i, c) in g.compositions.iter().enumerate() {
            for n in c {
                if !morphism_names.contains(n.as_str()) && !objects.contains(n.as_str()) {
                    return Err(at(format!("groupoid.compositions[{i}]"), format!("unknown morphism {n:?}")));
                }
            }
        }

        let a = &self.algebra;
        if a.basis.len() != a.dim {
            return Err(at("algebra.basis", format!("{} labels for dimension {}", a.basis.len(), a.dim)));
        }
        let labels = unique(&a.basis, "algebra.basis")?;
        for (i, p) in a.products.iter().enumerate() {
            let path = format!("algebra.products[{i}]");
            for l in [&p.left, &p.right] {
                if !labels.contains(l.as_str()) {
                    return Err(at(&path, format!("unknown basis label {l:?}")));
                }
            }
            check_coords(&p.value, &labels, &path)?;
        }
        check_coords(&a.unit, &labels, "algebra.unit")?;

        let mut covered = HashSet::new();
        for (i, e) in self.action.iter().enumerate() {
            let path = format!("action[{i}]");
            let resolved = if objects.contains(e.morphism.as_str()) {
                ids[g.objects.iter().position(|o| o == &e.morphism).unwrap()].as_str()
            } else if morphism_names.contains(e.morphism.as_str()) {
                e.morphism.as_str()
            } else {
                return Err(at(&path, format!("unknown morphism {:?}", e.morphism)));
            };
            if !covered.insert(resolved) {
                return Err(at(&path, format!("second entry for morphism {:?}", e.morphism)));
            }
            check_coords(&e.idempotent, &labels, &format!("{path}.idempotent"))?;
            if let Some(map) = &e.map {
                for (k, v) in map {
                    if !labels.contains(k.as_str()) {
                        return Err(at(format!("{path}.map"), format!("unknown basis label {k:?}")));
                    }
                    check_coords(v, &labels, &format!("{path}.map.{k}"))?;
                }
            }
        }
        if let Some(missing) = ids
            .iter()
            .map(String::as_str)
            .chain(g.morphisms.iter().map(|m| m.id.as_str()))
            .find(|m| !covered.contains(m))
        {
            return Err(at("action", format!("no entry for morphism {missing:?}")));
        }
        if let Some(b) = &self.meta.base {
            if !objects.contains(b.as_str()) {
                return Err(at("meta.base", format!("unknown object {b:?}")));
            }
        }
        if let Some(t) = &self.meta.transversal {
            for (o, m) in t {
                if !objects.contains(o.as_str()) {
                    return Err(at("meta.transversal", format!("unknown object {o:?}")));
                }
                if !morphism_names.contains(m.as_str()) && !objects.contains(m.as_str()) {
                    return Err(at("meta.transversal", format!("unknown morphism {m:?}")));
                }
            }
        }
        Ok(())
    }

    pub fn raw_groupoid(&self) -> RawGroupoid {
        let g = &self.groupoid;
        RawGroupoid {
            objects: g.objects.clone(),
            identities: g.identities.clone(),
            morphisms: g
                .morphisms
                .iter()
                .map(|m| RawMorphism {
                    id: m.id.clone(),
                    src: m.src.clone(),
                    tgt: m.tgt.clone(),
                    inverse: m.inverse.clone(),
                })
                .collect(),
            compositions: g.compositions.clone(),
        }
    }

    pub fn name(&self) -> String {
        self.meta.name.clone().unwrap_or_else(|| "instance".into())
    }

    pub fn build_groupoid(&self) -> Result<FinGroupoid> {
        validate_groupoid(&self.raw_groupoid())
    }

    fn label_index(&self) -> HashMap<&str, usize> {
        self.algebra.basis.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect()
    }

    fn elem(&self, c: &SparseCoords) -> AlgElem {
        let idx = self.label_index();
        let mut v = vec![Rational::from_integer(0.into()); self.algebra.dim];
        for (k, q) in c {
            v[idx[k.as_str()]] = q.0.clone();
        }
        AlgElem::new(v)
    }

    pub fn build_algebra(&self) -> Result<StructAlgebra> {
        let idx = self.label_index();
        let products = self
            .algebra
            .products
            .iter()
            .map(|p| (idx[p.left.as_str()], idx[p.right.as_str()], self.elem(&p.value)));
        StructAlgebra::new(self.algebra.basis.clone(), products, self.elem(&self.algebra.unit))
    }

    pub fn build_raw_action(&self, g: &FinGroupoid) -> Result<RawAction> {
        let idx = self.label_index();
        let dim = self.algebra.dim;
        let n = g.n_morphisms();
        let mut idempotents = vec![AlgElem::zero(dim); n];
        let mut maps = vec![None; n];
        for e in &self.action {
            let m = g
                .morphism_index(&e.morphism)
                .ok_or_else(|| at("action", format!("unknown morphism {:?}", e.morphism)))?;
            idempotents[m] = self.elem(&e.idempotent);
            maps[m] = e.map.as_ref().map(|images| {
                let mut mat = Matrix::zeros(dim, dim);
                for (k, img) in images {
                    mat.set_column(idx[k.as_str()], self.elem(img).coords());
                }
                mat
            });
        }
        Ok(RawAction { idempotents, maps })
    }

    /// Runs every validator: groupoid, algebra, partial action.
    pub fn validate(&self) -> Result<PartialActionData> {
        let g = self.build_groupoid()?;
        let a = self.build_algebra()?;
        let raw = self.build_raw_action(&g)?;
        validate_partial_action(&g, &a, &raw)
    }

    /// Canonical description of a validated action: non-identity morphisms in
    /// index order, every composite of two non-identity morphisms, one action
    /// entry per morphism, identity maps omitted when they are `L_{1_x}`.
    pub fn from_action(pa: &PartialActionData, meta: Meta) -> InstanceFile {
        let g = pa.groupoid();
        let a = pa.algebra();
        let coords = |v: &AlgElem| -> SparseCoords {
            v.support().map(|(i, q)| (a.label(i).to_string(), Rat(q.clone()))).collect()
        };
        let identities = (0..g.n_objects())
            .filter(|&x| g.name(g.identity(x)) != identity_name(g.object_name(x)))
            .map(|x| (g.object_name(x).to_string(), g.name(g.identity(x)).to_string()))
            .collect();
        let proper: Vec<usize> = (0..g.n_morphisms()).filter(|&m| !g.is_identity(m)).collect();
        let morphisms = proper
            .iter()
            .map(|&m| MorphismEntry {
                id: g.name(m).to_string(),
                src: g.object_name(g.src(m)).to_string(),
                tgt: g.object_name(g.tgt(m)).to_string(),
                inverse: Some(g.name(g.inverse(m)).to_string()),
            })
            .collect();
        let mut compositions = Vec::new();
        for &p in &proper {
            for &q in &proper {
                if let Some(c) = g.compose(p, q) {
                    compositions.push([g.name(p), g.name(q), g.name(c)].map(String::from));
                }
            }
        }
        let mut products = Vec::new();
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                let p = a.mul(&a.basis_elem(i), &a.basis_elem(j));
                if !p.is_zero() {
                    products.push(ProductEntry {
                        left: a.label(i).to_string(),
                        right: a.label(j).to_string(),
                        value: coords(&p),
                    });
                }
            }
        }
        let action = (0..g.n_morphisms())
            .map(|m| {
                let one = pa.one(m);
                let mat = pa.alpha(m).matrix();
                let default = g.is_identity(m) && *mat == a.left_mult_matrix(one);
                let map = (!default).then(|| {
                    (0..a.dim())
                        .map(|j| (j, AlgElem::new(mat.column(j))))
                        .filter(|(_, v)| !v.is_zero())
                        .map(|(j, v)| (a.label(j).to_string(), coords(&v)))
                        .collect()
                });
                ActionEntry {
                    morphism: g.name(m).to_string(),
                    idempotent: coords(one),
                    map,
                }
            })
            .collect();
        InstanceFile {
            meta,
            groupoid: GroupoidSection {
                objects: g.objects().to_vec(),
                identities,
                morphisms,
                compositions,
            },
            algebra: AlgebraSection {
                dim: a.dim(),
                basis: a.labels().to_vec(),
                products,
                unit: coords(a.unit()),
            },
            action,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serializes");
        s.push('\n');
        s
    }
}

/// Instance files shipped with the library.
pub mod fixtures {
    pub const E57: &str = include_str!("../fixtures/e57.json");
    pub const TRIVIAL: &str = include_str!("../fixtures/trivial.json");
    pub const COARSE2: &str = include_str!("../fixtures/coarse2.json");
    pub const MATRIX2: &str = include_str!("../fixtures/matrix2.json");

    pub const ALL: [(&str, &str); 4] = [("e57", E57), ("trivial", TRIVIAL), ("coarse2", COARSE2), ("matrix2", MATRIX2)];
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    fn same_action(a: &PartialActionData, b: &PartialActionData) -> bool {
        a.groupoid() == b.groupoid() && a.algebra() == b.algebra() && a.to_raw().idempotents == b.to_raw().idempotents
            && a.to_raw().maps == b.to_raw().maps
    }

    #[test]
    fn fixtures_match_builders() {
        let built = [
            examples::e57(),
            examples::discrete(&[1]),
            examples::coarse_block_action(&StructAlgebra::rationals()),
            examples::coarse_matrix_action(),
        ];
        for ((name, text), pa) in fixtures::ALL.iter().zip(&built) {
            let f = parse_instance_str(text).unwrap();
            assert_eq!(f.meta.name.as_deref(), Some(*name));
            assert!(same_action(&f.validate().unwrap(), pa), "{name}");
        }
    }

    #[test]
    fn e57_fixture_shape() {
        let f = parse_instance_str(fixtures::E57).unwrap();
        assert_eq!(f.groupoid.objects.len(), 2);
        assert_eq!(f.groupoid.morphisms.len(), 6);
        assert_eq!(f.algebra.dim, 8);
    }

    #[test]
    fn round_trip_is_canonical() {
        for (_, text) in fixtures::ALL {
            let f = parse_instance_str(text).unwrap();
            let pa = f.validate().unwrap();
            let again = InstanceFile::from_action(&pa, f.meta.clone());
            assert_eq!(again.to_json(), text);
            let back = parse_instance_str(&again.to_json()).unwrap().validate().unwrap();
            assert!(same_action(&pa, &back));
        }
    }

    #[test]
    fn zero_denominator_rejected_with_position() {
        let text = fixtures::TRIVIAL.replacen("\"1\"", "\"1/0\"", 1);
        match parse_instance_str(&text) {
            Err(Error::Parse { line: Some(_), column: Some(_), message }) => assert!(message.contains("denominator"), "{message}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_object_in_morphism() {
        let text = fixtures::E57.replacen("\"src\": \"x\"", "\"src\": \"z\"", 1);
        let err = parse_instance_str(&text).unwrap_err();
        assert!(matches!(&err, Error::Parse { message, .. } if message.contains("\"z\"") && message.contains(".src")), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = fixtures::TRIVIAL.replacen("{", "{\"extra\": 1,", 1);
        assert!(matches!(parse_instance_str(&text), Err(Error::Parse { line: Some(_), .. })));
    }

    #[test]
    fn missing_action_entry() {
        let mut f = parse_instance_str(fixtures::E57).unwrap();
        f.action.pop();
        let err = f.check_references().unwrap_err();
        assert!(err.to_string().contains("no entry"), "{err}");
    }

    #[test]
    fn malformed_json_has_position() {
        let err = parse_instance_str("{\n  \"groupoid\": [\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: Some(2), .. } | Error::Parse { line: Some(3), .. }), "{err}");
    }
}
