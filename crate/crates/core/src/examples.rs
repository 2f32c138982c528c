//! Small instances built in code.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::action::{validate_partial_action, PartialActionData, RawAction};
use crate::algebra::{AlgElem, StructAlgebra};
use crate::groupoid::{coarse_groupoid, validate_groupoid, FinGroupoid, RawGroupoid, RawMorphism};
use crate::matrix::Matrix;
use crate::rational::Rational;

/// `Q^k` with orthogonal idempotents `labels[i]`.
pub fn split_algebra(labels: &[String]) -> StructAlgebra {
    let k = labels.len();
    StructAlgebra::new(
        labels.to_vec(),
        (0..k).map(|i| (i, i, AlgElem::basis(k, i))),
        AlgElem::new(vec![Rational::one(); k]),
    )
    .expect("split algebra")
}

/// `Q(i)^k` with basis `e, ie` per block: `labels[b]` and `i{labels[b]}`.
pub fn gaussian_blocks(labels: &[&str]) -> StructAlgebra {
    let k = labels.len();
    let dim = 2 * k;
    let mut names = Vec::with_capacity(dim);
    let mut products = Vec::new();
    for (b, l) in labels.iter().enumerate() {
        names.push(l.to_string());
        names.push(format!("i{l}"));
        let (re, im) = (2 * b, 2 * b + 1);
        products.push((re, re, AlgElem::basis(dim, re)));
        products.push((re, im, AlgElem::basis(dim, im)));
        products.push((im, re, AlgElem::basis(dim, im)));
        products.push((im, im, -&AlgElem::basis(dim, re)));
    }
    let mut unit = vec![Rational::zero(); dim];
    for b in 0..k {
        unit[2 * b] = Rational::one();
    }
    StructAlgebra::new(names, products, AlgElem::new(unit)).expect("Q(i)^k")
}

/// Unit of the blocks `blocks` (1-based) in `Q(i)^k`.
pub fn gaussian_block_unit(k: usize, blocks: &[usize]) -> AlgElem {
    let mut v = vec![Rational::zero(); 2 * k];
    for &b in blocks {
        v[2 * (b - 1)] = Rational::one();
    }
    AlgElem::new(v)
}

/// Map of `Q(i)^k` sending block `from` to block `to` (1-based), conjugating
/// when the flag is set, and zero on the remaining blocks.
pub fn gaussian_block_map(k: usize, moves: &[(usize, usize, bool)]) -> Matrix {
    let mut m = Matrix::zeros(2 * k, 2 * k);
    for &(from, to, conj) in moves {
        let (f, t) = (2 * (from - 1), 2 * (to - 1));
        m[(t, f)] = Rational::one();
        m[(t + 1, f + 1)] = if conj { -Rational::one() } else { Rational::one() };
    }
    m
}

pub fn e57_block_unit(blocks: &[usize]) -> AlgElem {
    gaussian_block_unit(4, blocks)
}

pub fn e57_block_map(moves: &[(usize, usize, bool)]) -> Matrix {
    gaussian_block_map(4, moves)
}

fn e57_raw_groupoid(suffix: &str) -> RawGroupoid {
    let s = |n: &str| format!("{n}{suffix}");
    let mor = |id: &str, src: &str, tgt: &str, inv: Option<&str>| RawMorphism {
        id: s(id),
        src: s(src),
        tgt: s(tgt),
        inverse: inv.map(s),
    };
    RawGroupoid {
        objects: vec![s("x"), s("y")],
        identities: BTreeMap::new(),
        morphisms: vec![
            mor("g", "x", "x", None),
            mor("h", "y", "y", None),
            mor("l", "x", "y", Some("l_inv")),
            mor("m", "x", "y", Some("m_inv")),
            mor("l_inv", "y", "x", None),
            mor("m_inv", "y", "x", None),
        ],
        compositions: [["g", "g", "x"], ["h", "h", "y"], ["l", "g", "m"], ["h", "l", "m"]]
            .iter()
            .map(|c| c.map(s))
            .collect(),
    }
}

pub fn e57_groupoid() -> FinGroupoid {
    validate_groupoid(&e57_raw_groupoid("")).expect("E57 groupoid")
}

pub fn e57_algebra() -> StructAlgebra {
    gaussian_blocks(&["e1", "e2", "e3", "e4"])
}

/// Idempotents and maps in morphism order
/// `x, y, g, h, l, m, l_inv, m_inv`.
fn e57_action_data(k: usize, off: usize) -> (Vec<AlgElem>, Vec<Option<Matrix>>) {
    let b = |i: usize| i + off;
    let u = |bs: &[usize]| gaussian_block_unit(k, &bs.iter().map(|&i| b(i)).collect::<Vec<_>>());
    let m = |mv: &[(usize, usize, bool)]| {
        Some(gaussian_block_map(
            k,
            &mv.iter().map(|&(f, t, c)| (b(f), b(t), c)).collect::<Vec<_>>(),
        ))
    };
    let idem = vec![
        u(&[1, 2]),
        u(&[3, 4]),
        u(&[1]),
        u(&[3]),
        u(&[3, 4]),
        u(&[3]),
        u(&[1, 2]),
        u(&[1]),
    ];
    let maps = vec![
        m(&[(1, 1, false), (2, 2, false)]),
        m(&[(3, 3, false), (4, 4, false)]),
        m(&[(1, 1, true)]),
        m(&[(3, 3, true)]),
        m(&[(1, 3, false), (2, 4, false)]),
        m(&[(1, 3, true)]),
        m(&[(3, 1, false), (4, 2, false)]),
        m(&[(3, 1, true)]),
    ];
    (idem, maps)
}

/// The four-block example: `A = Q(i)e1 ⊕ ... ⊕ Q(i)e4` with the partial action
/// of the two-object groupoid generated by `g² = x, h² = y, lg = m = hl`.
pub fn e57_parts() -> (FinGroupoid, StructAlgebra, RawAction) {
    let (idempotents, maps) = e57_action_data(4, 0);
    (e57_groupoid(), e57_algebra(), RawAction { idempotents, maps })
}

pub fn e57() -> PartialActionData {
    let (g, a, raw) = e57_parts();
    validate_partial_action(&g, &a, &raw).expect("E57 action")
}

/// Two disjoint copies of [`e57`].
pub fn e57_twice() -> PartialActionData {
    let (r1, r2) = (e57_raw_groupoid(""), e57_raw_groupoid("'"));
    let raw = RawGroupoid {
        objects: [r1.objects.clone(), r2.objects.clone()].concat(),
        identities: BTreeMap::new(),
        morphisms: [r1.morphisms.clone(), r2.morphisms.clone()].concat(),
        compositions: [r1.compositions.clone(), r2.compositions.clone()].concat(),
    };
    let g = validate_groupoid(&raw).expect("two copies");
    let a = gaussian_blocks(&["e1", "e2", "e3", "e4", "f1", "f2", "f3", "f4"]);
    let (i1, m1) = e57_action_data(8, 0);
    let (i2, m2) = e57_action_data(8, 4);
    // identities of both copies come first
    let pick = |v1: &[AlgElem], v2: &[AlgElem]| {
        let mut out = vec![v1[0].clone(), v1[1].clone(), v2[0].clone(), v2[1].clone()];
        out.extend_from_slice(&v1[2..]);
        out.extend_from_slice(&v2[2..]);
        out
    };
    let mut maps = vec![m1[0].clone(), m1[1].clone(), m2[0].clone(), m2[1].clone()];
    maps.extend_from_slice(&m1[2..]);
    maps.extend_from_slice(&m2[2..]);
    let raw = RawAction {
        idempotents: pick(&i1, &i2),
        maps,
    };
    validate_partial_action(&g, &a, &raw).expect("two copies of E57")
}

fn cyclic_group(n: usize) -> FinGroupoid {
    let names: Vec<String> = (1..n).map(|k| format!("r{k}")).collect();
    let name = |k: usize| if k.is_multiple_of(n) { "x".to_string() } else { names[k % n - 1].clone() };
    let raw = RawGroupoid {
        objects: vec!["x".into()],
        identities: BTreeMap::new(),
        morphisms: names
            .iter()
            .map(|id| RawMorphism {
                id: id.clone(),
                src: "x".into(),
                tgt: "x".into(),
                inverse: None,
            })
            .collect(),
        compositions: (1..n)
            .flat_map(|i| (1..n).map(move |j| (i, j)))
            .map(|(i, j)| [name(i), name(j), name(i + j)])
            .collect(),
    };
    validate_groupoid(&raw).expect("cyclic group")
}

/// The cyclic group of order `n` permuting the idempotents of `Q^n`.
pub fn regular_action(n: usize) -> PartialActionData {
    let g = cyclic_group(n);
    let labels: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let a = split_algebra(&labels);
    let maps = (0..n)
        .map(|k| {
            let mut m = Matrix::zeros(n, n);
            for i in 0..n {
                m[((i + k) % n, i)] = Rational::one();
            }
            Some(m)
        })
        .collect();
    let raw_action = RawAction {
        idempotents: vec![a.unit().clone(); n],
        maps,
    };
    validate_partial_action(&g, &a, &raw_action).expect("regular action")
}

/// The cyclic group of order `n` acting trivially on `Q`.
pub fn trivial_group_action(n: usize) -> PartialActionData {
    let g = cyclic_group(n);
    let a = StructAlgebra::rationals();
    let raw = RawAction {
        idempotents: vec![a.unit().clone(); n],
        maps: vec![Some(Matrix::identity(1)); n],
    };
    validate_partial_action(&g, &a, &raw).expect("trivial action")
}

/// The coarse groupoid on `x, y` acting globally on `B × B`, each `(y,z)`
/// copying the `y` factor onto the `z` factor.
pub fn coarse_block_action(block: &StructAlgebra) -> PartialActionData {
    let g = coarse_groupoid(&["x".to_string(), "y".to_string()]).expect("coarse groupoid");
    let a = StructAlgebra::direct_sum(&[(block, "x"), (block, "y")]);
    let d = block.dim();
    let block_unit = |b: usize| {
        let mut v = vec![Rational::zero(); 2 * d];
        v[b * d..(b + 1) * d].clone_from_slice(block.unit().coords());
        AlgElem::new(v)
    };
    let mut idempotents = Vec::new();
    let mut maps = Vec::new();
    for m in 0..g.n_morphisms() {
        let (s, t) = (g.src(m), g.tgt(m));
        idempotents.push(block_unit(t));
        let mut mat = Matrix::zeros(2 * d, 2 * d);
        for i in 0..d {
            mat[(t * d + i, s * d + i)] = Rational::one();
        }
        maps.push(Some(mat));
    }
    validate_partial_action(&g, &a, &RawAction { idempotents, maps }).expect("coarse block action")
}

/// [`coarse_block_action`] with `B = M_2(Q)`.
pub fn coarse_matrix_action() -> PartialActionData {
    coarse_block_action(&StructAlgebra::matrix_algebra(2))
}

/// Discrete groupoid on `dims.len()` objects, object `i` owning a copy of
/// `Q^{dims[i]}`, every identity acting trivially.
pub fn discrete(dims: &[usize]) -> PartialActionData {
    let raw = RawGroupoid {
        objects: (0..dims.len()).map(|i| format!("o{i}")).collect(),
        ..Default::default()
    };
    let g = validate_groupoid(&raw).expect("discrete groupoid");
    let total: usize = dims.iter().sum();
    let labels: Vec<String> = (0..total).map(|i| format!("p{i}")).collect();
    let a = split_algebra(&labels);
    let mut idempotents = Vec::new();
    let mut off = 0;
    for &d in dims {
        let mut v = vec![Rational::zero(); total];
        for c in v.iter_mut().skip(off).take(d) {
            *c = Rational::one();
        }
        idempotents.push(AlgElem::new(v));
        off += d;
    }
    let raw_action = RawAction {
        maps: vec![None; dims.len()],
        idempotents,
    };
    validate_partial_action(&g, &a, &raw_action).expect("discrete action")
}
