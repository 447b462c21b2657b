//! Small categories beyond the shipped fixtures, and brute-force oracles
//! written without the library's decision procedures.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use sheaf_wtypes_core::fixtures;
use sheaf_wtypes_core::{
    Edge, FiniteCategory, FiniteSite, MorId, ObjId, Polynomial, Presheaf, PresheafMorphism,
    Sieve, Topology, TreeId, TreeStore, WInstance,
};

/// A category from non-identity arrows `(name, dom, cod)` and their
/// non-identity composites `(f, g, f∘g)`; identities are named `id_{obj}`.
pub fn category(objects: &[&str], arrows: &[(&str, &str, &str)], composites: &[(&str, &str, &str)]) -> FiniteCategory {
    let ids: Vec<(String, String)> = objects.iter().map(|o| (format!("id_{o}"), o.to_string())).collect();
    let mut morphisms: Vec<(&str, &str, &str)> = ids.iter().map(|(n, o)| (n.as_str(), o.as_str(), o.as_str())).collect();
    morphisms.extend_from_slice(arrows);
    let identities: Vec<(&str, &str)> = ids.iter().map(|(n, o)| (o.as_str(), n.as_str())).collect();
    let mut comp: Vec<(String, String, String)> = Vec::new();
    for (n, o) in &ids {
        comp.push((n.clone(), n.clone(), n.clone()));
        for &(f, d, c) in arrows {
            if c == o {
                comp.push((n.clone(), f.to_string(), f.to_string()));
            }
            if d == o {
                comp.push((f.to_string(), n.clone(), f.to_string()));
            }
        }
    }
    for &(f, g, h) in composites {
        comp.push((f.to_string(), g.to_string(), h.to_string()));
    }
    let comp_ref: Vec<(&str, &str, &str)> = comp.iter().map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str())).collect();
    FiniteCategory::from_tables(objects, &morphisms, &identities, &comp_ref).expect("category tables")
}

/// `c -n-> b -m-> a` with `k = m∘n`.
pub fn chain3() -> FiniteCategory {
    category(&["a", "b", "c"], &[("m", "b", "a"), ("n", "c", "b"), ("k", "c", "a")], &[("m", "n", "k")])
}

/// `b -m-> a <-n- c`.
pub fn vee() -> FiniteCategory {
    category(&["a", "b", "c"], &[("m", "b", "a"), ("n", "c", "a")], &[])
}

/// One object with an idempotent `e`.
pub fn idempotent() -> FiniteCategory {
    category(&["*"], &[("e", "*", "*")], &[("e", "e", "e")])
}

/// `b` with two parallel arrows `s, t: b -> a`.
pub fn parallel() -> FiniteCategory {
    category(&["a", "b"], &[("s", "b", "a"), ("t", "b", "a")], &[])
}

pub fn small_categories() -> Vec<(&'static str, FiniteCategory)> {
    vec![
        ("point", fixtures::fixture_a().category().clone()),
        ("C", fixtures::fixture_c_category()),
        ("chain3", chain3()),
        ("vee", vee()),
        ("idempotent", idempotent()),
        ("parallel", parallel()),
    ]
}

pub fn mor(cat: &FiniteCategory, name: &str) -> MorId {
    cat.morphism_by_name(name).unwrap_or_else(|| panic!("no morphism {name}"))
}

pub fn obj(cat: &FiniteCategory, name: &str) -> ObjId {
    cat.object_by_name(name).unwrap_or_else(|| panic!("no object {name}"))
}

pub fn sieve(cat: &FiniteCategory, a: &str, names: &[&str]) -> Sieve {
    Sieve::new(obj(cat, a), names.iter().map(|n| mor(cat, n)).collect())
}

/// Every subset of arrows into `a` closed under precomposition, found by
/// trying all subsets.
pub fn brute_sieves(cat: &FiniteCategory, a: ObjId) -> Vec<BTreeSet<MorId>> {
    let arrows: Vec<MorId> = cat.morphisms().filter(|&f| cat.cod(f) == a).collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << arrows.len()) {
        let set: BTreeSet<MorId> = arrows.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &f)| f).collect();
        let closed = set.iter().all(|&f| {
            cat.morphisms().filter(|&g| cat.cod(g) == cat.dom(f)).all(|g| set.contains(&cat.compose(f, g).unwrap()))
        });
        if closed {
            out.push(set);
        }
    }
    out
}

pub fn to_set(s: &Sieve) -> BTreeSet<MorId> {
    s.members().iter().copied().collect()
}

/// `{g : f∘g ∈ S}` straight from the definition.
pub fn brute_pullback(cat: &FiniteCategory, f: MorId, s: &BTreeSet<MorId>) -> BTreeSet<MorId> {
    cat.morphisms().filter(|&g| cat.cod(g) == cat.dom(f) && s.contains(&cat.compose(f, g).unwrap())).collect()
}

/// Which axioms a topology given as sets of arrows fails, by enumeration.
pub fn brute_axioms(cat: &FiniteCategory, cov: &[Vec<BTreeSet<MorId>>]) -> BTreeSet<&'static str> {
    let mut broken = BTreeSet::new();
    let covers = |a: ObjId, s: &BTreeSet<MorId>| cov[a.index()].contains(s);
    for a in cat.objects() {
        let max: BTreeSet<MorId> = cat.morphisms().filter(|&f| cat.cod(f) == a).collect();
        if !covers(a, &max) {
            broken.insert("maximal-sieve");
        }
        for s in &cov[a.index()] {
            for &f in &max {
                if !covers(cat.dom(f), &brute_pullback(cat, f, s)) {
                    broken.insert("stability");
                }
            }
            for r in brute_sieves(cat, a) {
                let local = s.iter().all(|&f| covers(cat.dom(f), &brute_pullback(cat, f, &r)));
                if local && !covers(a, &r) {
                    broken.insert("local-character");
                }
                if s.is_subset(&r) && !covers(a, &r) {
                    broken.insert("superset-closure");
                }
            }
        }
    }
    broken
}

pub fn topology(cat: &FiniteCategory, cov: &[Vec<BTreeSet<MorId>>]) -> Topology {
    Topology::new(
        cat.objects()
            .map(|a| cov[a.index()].iter().map(|s| Sieve::new(a, s.iter().copied().collect())).collect())
            .collect(),
    )
}

/// Brute force of `~`: same root object and element, and some listed
/// covering sieve inside both root sieves on which all children agree.
pub struct BruteEquiv {
    memo: HashMap<(TreeId, TreeId), bool>,
}

impl BruteEquiv {
    pub fn new() -> Self {
        BruteEquiv { memo: HashMap::new() }
    }

    pub fn equiv(&mut self, store: &TreeStore<'_>, v: TreeId, w: TreeId) -> bool {
        if let Some(&b) = self.memo.get(&(v, w)) {
            return b;
        }
        let inst = store.instance();
        let (lv, lw) = (store.label(v), store.label(w));
        let mut result = false;
        if lv.obj == lw.obj && lv.elem == lw.elem {
            let (sv, sw) = (to_set(inst.sieve(lv)), to_set(inst.sieve(lw)));
            for r in inst.site().covering(lv.obj) {
                if !r.members().iter().all(|f| sv.contains(f) && sw.contains(f)) {
                    continue;
                }
                let agree = store.edges(v).iter().filter(|e| r.contains(e.mor)).all(|&e| {
                    let (cv, cw) = (store.child(v, e).unwrap(), store.child(w, e).unwrap());
                    self.equiv(store, cv, cw)
                });
                if agree {
                    result = true;
                    break;
                }
            }
        }
        self.memo.insert((v, w), result);
        result
    }
}

/// The child of `v` at `(f, y)`, panicking when absent.
pub fn child(store: &TreeStore<'_>, v: TreeId, f: MorId, y: u32) -> TreeId {
    store.child(v, Edge { mor: f, elem: y }).expect("edge present")
}

/// Largest depth at which every tree of an instance is enumerated for the
/// all-pairs checks; C/nno has 132498 trees at depth 3 and C/mixed over
/// three million at depth 2.
pub fn exhaustive_depth(name: &str) -> u32 {
    match name {
        "C/nno" => 2,
        "C/mixed" => 1,
        _ => 3,
    }
}

/// Named instances over the shipped fixtures.
pub fn fixture_instances() -> Vec<(&'static str, WInstance)> {
    let a = fixtures::fixture_a();
    let b = fixtures::fixture_b();
    let c = fixtures::fixture_c();
    let mk = |site: &FiniteSite, p: Polynomial| WInstance::new(site.clone(), p).expect("instance");
    vec![
        ("A/id", mk(&a, fixtures::identity_on_terminal(&a))),
        ("A/nno", mk(&a, fixtures::natural_numbers(&a))),
        ("A/two", mk(&a, fixtures::two_constants(&a))),
        ("B/id", mk(&b, fixtures::identity_on_terminal(&b))),
        ("C/id", mk(&c, fixtures::identity_on_terminal(&c))),
        ("C/nno", mk(&c, fixtures::natural_numbers(&c))),
        ("C/two", mk(&c, fixtures::two_constants(&c))),
        ("C/mixed", mk(&c, mixed_on_c())),
    ]
}

/// On C: `X = {p, q}`, `Y = {y1, y2}` constant, both `y` over `p`. Two
/// children per `p`-node, and subtrees with root sieve `{m}` at `a`.
pub fn mixed_on_c() -> Polynomial {
    let cat = fixtures::fixture_c_category();
    let x = Presheaf::constant(&cat, &["p", "q"]);
    let y = Presheaf::constant(&cat, &["y1", "y2"]);
    let f = PresheafMorphism::from_named(
        &cat,
        &y,
        &x,
        &[("a", "y1", "p"), ("a", "y2", "p"), ("b", "y1", "p"), ("b", "y2", "p")],
    )
    .unwrap();
    Polynomial::new(x, y, f)
}
