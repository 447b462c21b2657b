//! The quotient `W̄` of hereditarily composable and natural trees by `~`,
//! its glueing operation and the algebra map `sup`.
//!
//! Classes are discovered level by level. At level `k` every node label is
//! combined with children drawn from the representatives of the classes
//! found so far, subject to naturality at class level. The least tree of a
//! class in the canonical order only has representatives as children, so
//! this reaches every class that has a member of depth at most `k`. A level
//! that adds no class means no later level can either, and `W̄` is then
//! complete.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::csp::FunctionalCsp;
use crate::polynomial::{Edge, Label};
use crate::presheaf::{amalgamations, CompatibleFamily, Presheaf};
use crate::site::{MorId, ObjId, Sieve};
use crate::tree::{TreeId, TreeStore};
use crate::ENUMERATION_LIMIT;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassRef {
    pub obj: ObjId,
    pub index: u32,
}

/// One `~`-class: its least tree and the trees found in it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WClass {
    pub rep: TreeId,
    pub members: Vec<TreeId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuildError {
    TooManySolutions,
    /// More trees were interned than the store allows.
    Budget { limit: usize },
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildError::TooManySolutions => write!(f, "too many candidate trees for one label"),
            BuildError::Budget { limit } => write!(f, "tree budget of {limit} exceeded"),
        }
    }
}

impl core::error::Error for BuildError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GlueError {
    NotCovering,
    WrongArity { expected: usize, found: usize },
    /// `family(f)·g ≠ family(f∘g)`.
    Incompatible { after: MorId, then: MorId },
    /// The root elements do not have exactly one amalgamation in `X`.
    BaseNotGlueable { amalgamations: usize },
    /// `{f∘g : f ∈ S, g ∈ R_f}` is not covering.
    GluedSieveNotCovering,
}

impl fmt::Display for GlueError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GlueError::NotCovering => write!(f, "index sieve is not covering"),
            GlueError::WrongArity { expected, found } => {
                write!(f, "family has {found} entries for a sieve of {expected} arrows")
            }
            GlueError::Incompatible { after, then } => {
                write!(f, "family is incompatible at #{}∘#{}", after.0, then.0)
            }
            GlueError::BaseNotGlueable { amalgamations } => {
                write!(f, "root elements have {amalgamations} amalgamations in X")
            }
            GlueError::GluedSieveNotCovering => write!(f, "glued root sieve is not covering"),
        }
    }
}

impl core::error::Error for GlueError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SupError {
    WrongArity { expected: usize, found: usize },
    /// `t(f, y)·g ≠ t(f∘g, y·g)` at the given edge and arrow.
    NonNatural { edge: Edge, along: MorId },
}

impl fmt::Display for SupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SupError::WrongArity { expected, found } => {
                write!(f, "fiber map has {found} entries for {expected} edges")
            }
            SupError::NonNatural { edge, along } => write!(
                f,
                "fiber map is not natural at edge (#{}, #{}) along #{}",
                edge.mor.0, edge.elem, along.0
            ),
        }
    }
}

impl core::error::Error for SupError {}

/// A tree built by glueing or `sup`, with its class if that class lies
/// within the computed part of `W̄`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Built {
    pub tree: TreeId,
    pub class: Option<u32>,
}

#[derive(Clone, Debug)]
pub struct QuotientSheaf {
    depth: u32,
    classes: Vec<Vec<WClass>>,
    /// `restriction[f][c]`: class at `dom f` of `[rep c]·f`.
    restriction: Vec<Vec<u32>>,
    member_of: BTreeMap<TreeId, ClassRef>,
    complete_at: Option<u32>,
}

impl QuotientSheaf {
    /// Computes every class with a member of depth at most `depth`.
    pub fn build(store: &mut TreeStore<'_>, depth: u32) -> Result<Self, BuildError> {
        let inst = store.instance();
        let cat = inst.site().category();
        let n_obj = cat.num_objects();
        let mut w = QuotientSheaf {
            depth,
            classes: alloc::vec![Vec::new(); n_obj],
            restriction: alloc::vec![Vec::new(); cat.num_morphisms()],
            member_of: BTreeMap::new(),
            complete_at: None,
        };
        for level in 0..=depth {
            let known: Vec<usize> = w.classes.iter().map(Vec::len).collect();
            let mut fresh: Vec<Vec<Vec<TreeId>>> = alloc::vec![Vec::new(); n_obj];
            for a in cat.objects() {
                for label in inst.labels(a) {
                    let edges = inst.branching(label);
                    let mut csp = FunctionalCsp::new(
                        edges.iter().map(|e| known[cat.dom(e.mor).index()] as u32).collect(),
                    );
                    for (i, e) in edges.iter().enumerate() {
                        for &g in cat.arrows_into(cat.dom(e.mor)) {
                            let target =
                                Edge { mor: cat.comp(e.mor, g), elem: inst.y().restrict(e.elem, g) };
                            let j = edges.binary_search(&target).expect("edges closed");
                            let table = w.restriction[g.index()][..known[cat.cod(g).index()]].to_vec();
                            csp.link(i, j, table);
                        }
                    }
                    let sols =
                        csp.solve_all(ENUMERATION_LIMIT).map_err(|_| BuildError::TooManySolutions)?;
                    if store.len().saturating_add(sols.len()) > store.budget() {
                        return Err(BuildError::Budget { limit: store.budget() });
                    }
                    for sol in sols {
                        let children = sol
                            .iter()
                            .zip(edges)
                            .map(|(&c, e)| w.classes[cat.dom(e.mor).index()][c as usize].rep)
                            .collect();
                        let t = store.mk_node(label, children).expect("aligned children");
                        if w.member_of.contains_key(&t) {
                            continue;
                        }
                        w.place(store, a, label, t, &mut fresh);
                    }
                }
            }
            // New classes get their least member as representative and are
            // appended in canonical order.
            let mut any_new = false;
            for a in cat.objects() {
                let mut news: Vec<(TreeId, Vec<TreeId>)> = core::mem::take(&mut fresh[a.index()])
                    .into_iter()
                    .map(|members| {
                        let rep = members
                            .iter()
                            .copied()
                            .min_by(|&s, &t| store.cmp_canonical(s, t))
                            .expect("non-empty class");
                        (rep, members)
                    })
                    .collect();
                news.sort_by(|x, y| store.cmp_canonical(x.0, y.0));
                for (rep, members) in news {
                    any_new = true;
                    let index = w.classes[a.index()].len() as u32;
                    for &m in &members {
                        w.member_of.insert(m, ClassRef { obj: a, index });
                    }
                    w.classes[a.index()].push(WClass { rep, members });
                }
            }
            for f in cat.morphisms() {
                let (a, b) = (cat.cod(f), cat.dom(f));
                for c in w.restriction[f.index()].len()..w.classes[a.index()].len() {
                    let r = store.restrict_unchecked(w.classes[a.index()][c].rep, f);
                    let cls = w.class_of(store, r).expect("restriction of a class is a class");
                    debug_assert_eq!(cls.obj, b);
                    w.restriction[f.index()].push(cls.index);
                }
            }
            if !any_new {
                w.complete_at = Some(level);
                break;
            }
        }
        Ok(w)
    }

    // Adds a freshly built tree either to an existing class or to one of
    // this level's new classes.
    fn place(
        &mut self,
        store: &mut TreeStore<'_>,
        a: ObjId,
        label: Label,
        t: TreeId,
        fresh: &mut [Vec<Vec<TreeId>>],
    ) {
        for index in 0..self.classes[a.index()].len() {
            let rep = self.classes[a.index()][index].rep;
            if store.label(rep).elem == label.elem && store.equiv(rep, t) {
                self.classes[a.index()][index].members.push(t);
                self.member_of.insert(t, ClassRef { obj: a, index: index as u32 });
                return;
            }
        }
        for class in fresh[a.index()].iter_mut() {
            if store.label(class[0]).elem == label.elem && store.equiv(class[0], t) {
                class.push(t);
                return;
            }
        }
        fresh[a.index()].push(alloc::vec![t]);
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// The level at which no new class appeared, if any: `W̄` is then
    /// finite and fully computed.
    pub fn complete_at(&self) -> Option<u32> {
        self.complete_at
    }

    pub fn is_complete(&self) -> bool {
        self.complete_at.is_some()
    }

    pub fn num_objects(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self, a: ObjId) -> &[WClass] {
        &self.classes[a.index()]
    }

    pub fn len(&self, a: ObjId) -> usize {
        self.classes[a.index()].len()
    }

    pub fn total_len(&self) -> usize {
        self.classes.iter().map(Vec::len).sum()
    }

    pub fn rep(&self, c: ClassRef) -> TreeId {
        self.classes[c.obj.index()][c.index as usize].rep
    }

    /// `c·f` for a class `c` at `cod f`.
    pub fn restrict_class(&self, c: u32, f: MorId) -> u32 {
        self.restriction[f.index()][c as usize]
    }

    pub fn restriction_table(&self, f: MorId) -> &[u32] {
        &self.restriction[f.index()]
    }

    /// The class of a tree, if it is one of the computed classes.
    pub fn class_of(&self, store: &mut TreeStore<'_>, t: TreeId) -> Option<ClassRef> {
        if let Some(&c) = self.member_of.get(&t) {
            return Some(c);
        }
        let l = store.label(t);
        for (index, class) in self.classes[l.obj.index()].iter().enumerate() {
            if store.label(class.rep).elem == l.elem && store.equiv(class.rep, t) {
                return Some(ClassRef { obj: l.obj, index: index as u32 });
            }
        }
        None
    }

    /// The classes as a presheaf with elements `c0, c1, ...` per object.
    pub fn to_presheaf(&self) -> Presheaf {
        let names = self
            .classes
            .iter()
            .map(|list| (0..list.len()).map(|i| format!("c{i}")).collect::<Vec<String>>())
            .collect();
        Presheaf::from_raw(names, self.restriction.clone())
    }

    fn pick(&self, store: &TreeStore<'_>, c: ClassRef, reversed: bool) -> TreeId {
        let class = &self.classes[c.obj.index()][c.index as usize];
        if reversed {
            class
                .members
                .iter()
                .copied()
                .max_by(|&s, &t| store.cmp_canonical(s, t))
                .unwrap_or(class.rep)
        } else {
            class.rep
        }
    }

    /// Glues a compatible family of classes over a covering sieve `S` on
    /// `a`. The tree has root `(a, x, R)` with `x` the amalgamation of the
    /// root elements and `R = {f∘g : f ∈ S, g ∈ R_f}`; its child at
    /// `(h, y)` is `w_f(g, y)` for the first decomposition `h = f∘g`.
    /// With `reversed`, the last decomposition and the greatest member of
    /// each class are used instead.
    pub fn glue(
        &self,
        store: &mut TreeStore<'_>,
        sieve: &Sieve,
        family: &[u32],
        reversed: bool,
    ) -> Result<Built, GlueError> {
        let inst = store.instance();
        let site = inst.site();
        let cat = site.category();
        let a = sieve.target();
        if !site.covers(sieve) {
            return Err(GlueError::NotCovering);
        }
        let members = sieve.members();
        if family.len() != members.len() {
            return Err(GlueError::WrongArity { expected: members.len(), found: family.len() });
        }
        for (i, &f) in members.iter().enumerate() {
            for &g in cat.arrows_into(cat.dom(f)) {
                let j = members.binary_search(&cat.comp(f, g)).expect("sieve");
                if self.restrict_class(family[i], g) != family[j] {
                    return Err(GlueError::Incompatible { after: f, then: g });
                }
            }
        }
        let picked: Vec<TreeId> = members
            .iter()
            .zip(family)
            .map(|(&f, &c)| self.pick(store, ClassRef { obj: cat.dom(f), index: c }, reversed))
            .collect();
        let base = CompatibleFamily {
            sieve: sieve.clone(),
            values: picked.iter().map(|&t| store.label(t).elem).collect(),
        };
        let xs = amalgamations(inst.x(), &base);
        if xs.len() != 1 {
            return Err(GlueError::BaseNotGlueable { amalgamations: xs.len() });
        }
        let x = xs[0];
        let mut glued = Vec::new();
        for (&f, &t) in members.iter().zip(&picked) {
            for &g in inst.sieve(store.label(t)).members() {
                glued.push(cat.comp(f, g));
            }
        }
        let glued = Sieve::new(a, glued);
        let label = inst.label(a, x, &glued).map_err(|_| GlueError::GluedSieveNotCovering)?;
        let children: Vec<TreeId> = inst
            .branching(label)
            .iter()
            .map(|e| {
                let mut choice = None;
                for (&f, &t) in members.iter().zip(&picked) {
                    for &g in inst.sieve(store.label(t)).members() {
                        if cat.comp(f, g) == e.mor {
                            let c = store
                                .child(t, Edge { mor: g, elem: e.elem })
                                .expect("(g, y) is an edge of w_f");
                            choice = Some(c);
                            if !reversed {
                                return c;
                            }
                        }
                    }
                }
                choice.expect("h ∈ R has a decomposition")
            })
            .collect();
        let tree = store.mk_node(label, children).expect("aligned children");
        let class = self.class_of(store, tree).map(|c| c.index);
        Ok(Built { tree, class })
    }

    /// Checks that a fiber map of the node `(a, x, M_a)` is natural at
    /// class level.
    pub fn check_fiber(
        &self,
        store: &TreeStore<'_>,
        a: ObjId,
        x: u32,
        fiber: &[u32],
    ) -> Result<(), SupError> {
        let inst = store.instance();
        let cat = inst.site().category();
        let edges = inst.branching(inst.max_label(a, x));
        if fiber.len() != edges.len() {
            return Err(SupError::WrongArity { expected: edges.len(), found: fiber.len() });
        }
        for (i, e) in edges.iter().enumerate() {
            for &g in cat.arrows_into(cat.dom(e.mor)) {
                let target = Edge { mor: cat.comp(e.mor, g), elem: inst.y().restrict(e.elem, g) };
                let j = edges.binary_search(&target).expect("edges closed");
                if self.restrict_class(fiber[i], g) != fiber[j] {
                    return Err(SupError::NonNatural { edge: *e, along: g });
                }
            }
        }
        Ok(())
    }

    /// `sup(x, t)`: the tree with root `(a, x, M_a)` whose child at `(f, y)`
    /// is a member of the class `t(f, y)` (the representative, or the
    /// greatest member with `reversed`).
    pub fn sup(
        &self,
        store: &mut TreeStore<'_>,
        a: ObjId,
        x: u32,
        fiber: &[u32],
        reversed: bool,
    ) -> Result<Built, SupError> {
        self.check_fiber(store, a, x, fiber)?;
        let inst = store.instance();
        let cat = inst.site().category();
        let label = inst.max_label(a, x);
        let children = inst
            .branching(label)
            .iter()
            .zip(fiber)
            .map(|(e, &c)| self.pick(store, ClassRef { obj: cat.dom(e.mor), index: c }, reversed))
            .collect();
        let tree = store.mk_node(label, children).expect("aligned children");
        let class = self.class_of(store, tree).map(|c| c.index);
        Ok(Built { tree, class })
    }

    /// Fault injection: identifies two classes at `a`, as a broken quotient
    /// would. Used to check that the verifiers detect such a quotient.
    pub fn merge_classes(&mut self, store: &TreeStore<'_>, a: ObjId, i: u32, j: u32) {
        if i == j {
            return;
        }
        let (keep, drop) = (i.min(j), i.max(j));
        let cat = store.instance().site().category();
        let dropped = self.classes[a.index()].remove(drop as usize);
        let kept_rep = self.classes[a.index()][keep as usize].rep;
        let use_dropped_rep = store.cmp_canonical(dropped.rep, kept_rep) == Ordering::Less;
        {
            let k = &mut self.classes[a.index()][keep as usize];
            k.members.extend(dropped.members);
            if use_dropped_rep {
                k.rep = dropped.rep;
            }
        }
        for f in cat.morphisms() {
            let row = &mut self.restriction[f.index()];
            if cat.cod(f) == a {
                let dropped_row = row.remove(drop as usize);
                if use_dropped_rep {
                    row[keep as usize] = dropped_row;
                }
            }
            if cat.dom(f) == a {
                for v in row.iter_mut() {
                    if *v == drop {
                        *v = keep;
                    } else if *v > drop {
                        *v -= 1;
                    }
                }
            }
        }
        for c in self.member_of.values_mut() {
            if c.obj == a {
                if c.index == drop {
                    c.index = keep;
                } else if c.index > drop {
                    c.index -= 1;
                }
            }
        }
    }
}
