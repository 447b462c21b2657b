//! Labelled well-founded trees, their restriction, the equivalence `~`,
//! and the composability/naturality filters.
//!
//! Trees are hash-consed in a [`TreeStore`]: structurally equal trees get
//! the same [`TreeId`], so equality is an integer comparison and every
//! recursive operation is memoized on ids.
//!
//! A node labelled `(a, x, S)` has exactly one child per edge label
//! `(f, y)` with `f ∈ S` and `F(y) = x·f`. Children are stored in the
//! sorted order of those edge labels. A child need not be rooted at
//! `dom(f)`; trees where every child is are called composable.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::polynomial::{Edge, Label, WInstance};
use crate::site::{MorId, ObjId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeId(u32);

impl TreeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeError {
    /// A required edge has no child (totality).
    MissingChild(Edge),
    /// A child was given for an illegal or repeated edge label.
    UnexpectedEdge(Edge),
    /// Aligned children of the wrong length.
    Arity { expected: usize, found: usize },
    /// Restriction along a morphism whose codomain is not the root object.
    RootMismatch { root: ObjId, morphism: MorId },
    /// An enumeration would intern more trees than the store allows.
    Budget { limit: usize },
}

impl fmt::Display for TreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeError::MissingChild(e) => {
                write!(f, "no child for edge (#{}, #{})", e.mor.0, e.elem)
            }
            TreeError::UnexpectedEdge(e) => {
                write!(f, "edge (#{}, #{}) is not a legal edge of this node", e.mor.0, e.elem)
            }
            TreeError::Arity { expected, found } => {
                write!(f, "node needs {expected} children, got {found}")
            }
            TreeError::RootMismatch { root, morphism } => {
                write!(f, "tree rooted at #{} cannot be restricted along #{}", root.0, morphism.0)
            }
            TreeError::Budget { limit } => write!(f, "tree budget of {limit} exceeded"),
        }
    }
}

impl core::error::Error for TreeError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HcnStatus {
    pub composable: bool,
    pub natural: bool,
    pub hereditary: bool,
}

#[derive(Clone, Debug)]
struct Node {
    label: Label,
    children: Vec<TreeId>,
    depth: u32,
}

/// Default cap on interned trees.
pub const DEFAULT_TREE_BUDGET: usize = 4_000_000;

/// Intern table and memo tables for one instance. Confined to one thread;
/// every public operation is a deterministic function of its arguments.
#[derive(Debug)]
pub struct TreeStore<'i> {
    inst: &'i WInstance,
    nodes: Vec<Node>,
    intern: BTreeMap<(Label, Vec<TreeId>), TreeId>,
    restrict_memo: BTreeMap<(TreeId, MorId), TreeId>,
    equiv_memo: BTreeMap<(TreeId, TreeId), bool>,
    hcn_memo: BTreeMap<TreeId, HcnStatus>,
    level_memo: Vec<Vec<TreeId>>,
    budget: usize,
}

impl<'i> TreeStore<'i> {
    pub fn new(inst: &'i WInstance) -> Self {
        Self::with_budget(inst, DEFAULT_TREE_BUDGET)
    }

    pub fn with_budget(inst: &'i WInstance, budget: usize) -> Self {
        TreeStore {
            inst,
            nodes: Vec::new(),
            intern: BTreeMap::new(),
            restrict_memo: BTreeMap::new(),
            equiv_memo: BTreeMap::new(),
            hcn_memo: BTreeMap::new(),
            level_memo: Vec::new(),
            budget,
        }
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn instance(&self) -> &'i WInstance {
        self.inst
    }

    /// Number of interned trees.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn label(&self, t: TreeId) -> Label {
        self.nodes[t.index()].label
    }

    pub fn root_obj(&self, t: TreeId) -> ObjId {
        self.nodes[t.index()].label.obj
    }

    /// Children aligned with [`TreeStore::edges`].
    pub fn children(&self, t: TreeId) -> &[TreeId] {
        &self.nodes[t.index()].children
    }

    pub fn edges(&self, t: TreeId) -> &'i [Edge] {
        self.inst.branching(self.label(t))
    }

    /// Leaves have depth 0.
    pub fn depth(&self, t: TreeId) -> u32 {
        self.nodes[t.index()].depth
    }

    /// `v(f, y)`, the subtree along an edge.
    pub fn child(&self, t: TreeId, e: Edge) -> Option<TreeId> {
        self.edges(t).binary_search(&e).ok().map(|i| self.children(t)[i])
    }

    fn intern(&mut self, label: Label, children: Vec<TreeId>) -> TreeId {
        let key = (label, children);
        if let Some(&id) = self.intern.get(&key) {
            return id;
        }
        let depth = key.1.iter().map(|&c| self.depth(c) + 1).max().unwrap_or(0);
        let id = TreeId(self.nodes.len() as u32);
        self.nodes.push(Node { label, children: key.1.clone(), depth });
        self.intern.insert(key, id);
        id
    }

    /// Builds a node from children aligned with the label's edge list.
    pub fn mk_node(&mut self, label: Label, children: Vec<TreeId>) -> Result<TreeId, TreeError> {
        let expected = self.inst.branching(label).len();
        if children.len() != expected {
            return Err(TreeError::Arity { expected, found: children.len() });
        }
        Ok(self.intern(label, children))
    }

    /// Builds a node from `(edge, child)` pairs, which must cover the legal
    /// edges of the label exactly once.
    pub fn mk_tree(&mut self, label: Label, children: &[(Edge, TreeId)]) -> Result<TreeId, TreeError> {
        let spec = self.inst.branching(label);
        let mut slots: Vec<Option<TreeId>> = vec![None; spec.len()];
        for &(e, c) in children {
            match spec.binary_search(&e) {
                Ok(i) if slots[i].is_none() => slots[i] = Some(c),
                _ => return Err(TreeError::UnexpectedEdge(e)),
            }
        }
        let aligned = slots
            .iter()
            .zip(spec)
            .map(|(s, &e)| s.ok_or(TreeError::MissingChild(e)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.intern(label, aligned))
    }

    /// The canonical order: depth first, then root label, then children
    /// lexicographically. It is a well-order on trees, so every `~`-class
    /// has a least element.
    pub fn cmp_canonical(&self, s: TreeId, t: TreeId) -> Ordering {
        if s == t {
            return Ordering::Equal;
        }
        let (ns, nt) = (&self.nodes[s.index()], &self.nodes[t.index()]);
        ns.depth
            .cmp(&nt.depth)
            .then(ns.label.cmp(&nt.label))
            .then_with(|| {
                for (&a, &b) in ns.children.iter().zip(&nt.children) {
                    let o = self.cmp_canonical(a, b);
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                ns.children.len().cmp(&nt.children.len())
            })
    }

    pub fn sort_canonical(&self, trees: &mut [TreeId]) {
        trees.sort_by(|&a, &b| self.cmp_canonical(a, b));
    }

    /// All trees of depth at most `d` rooted anywhere, canonically sorted.
    pub fn enumerate_all(&mut self, d: u32) -> Result<Vec<TreeId>, TreeError> {
        while self.level_memo.len() <= d as usize {
            let k = self.level_memo.len();
            let prev: Vec<TreeId> = if k == 0 { Vec::new() } else { self.level_memo[k - 1].clone() };
            let cat = self.inst.site().category();
            let labels: Vec<Label> = cat.objects().flat_map(|a| self.inst.labels(a)).collect();
            // Size check before building anything.
            let mut total: usize = 0;
            for &l in &labels {
                let arity = self.inst.branching(l).len() as u32;
                let n = (prev.len()).checked_pow(arity).unwrap_or(usize::MAX);
                total = total.saturating_add(n);
            }
            if total.saturating_add(self.nodes.len()) > self.budget {
                return Err(TreeError::Budget { limit: self.budget });
            }
            let mut level = Vec::with_capacity(total);
            for &l in &labels {
                let arity = self.inst.branching(l).len();
                if arity > 0 && prev.is_empty() {
                    continue;
                }
                let mut digits = vec![0usize; arity];
                loop {
                    let children = digits.iter().map(|&i| prev[i]).collect();
                    level.push(self.intern(l, children));
                    // Odometer increment.
                    let mut pos = arity;
                    loop {
                        if pos == 0 {
                            break;
                        }
                        pos -= 1;
                        digits[pos] += 1;
                        if digits[pos] < prev.len() {
                            break;
                        }
                        digits[pos] = 0;
                    }
                    if digits.iter().all(|&i| i == 0) {
                        break;
                    }
                }
            }
            self.sort_canonical(&mut level);
            level.dedup();
            self.level_memo.push(level);
        }
        Ok(self.level_memo[d as usize].clone())
    }

    /// All trees in `V(a)` of depth at most `d`, canonically sorted.
    pub fn enumerate_trees(&mut self, a: ObjId, d: u32) -> Result<Vec<TreeId>, TreeError> {
        let all = self.enumerate_all(d)?;
        Ok(all.into_iter().filter(|&t| self.root_obj(t) == a).collect())
    }

    /// `v·f`: root `(b, x·f, f*S)` and `(v·f)(g, y) = v(f∘g, y)`.
    pub fn restrict(&mut self, t: TreeId, f: MorId) -> Result<TreeId, TreeError> {
        let cat = self.inst.site().category();
        if cat.cod(f) != self.root_obj(t) {
            return Err(TreeError::RootMismatch { root: self.root_obj(t), morphism: f });
        }
        Ok(self.restrict_unchecked(t, f))
    }

    pub(crate) fn restrict_unchecked(&mut self, t: TreeId, f: MorId) -> TreeId {
        if let Some(&r) = self.restrict_memo.get(&(t, f)) {
            return r;
        }
        let cat = self.inst.site().category();
        let label = self.inst.restrict_label(self.label(t), f);
        let children = self
            .inst
            .branching(label)
            .iter()
            .map(|e| {
                let src = Edge { mor: cat.comp(f, e.mor), elem: e.elem };
                self.child(t, src).expect("f∘g lies in the root sieve")
            })
            .collect();
        let r = self.intern(label, children);
        self.restrict_memo.insert((t, f), r);
        r
    }

    /// `v ~ w`: same root object and element, and the children agree up to
    /// `~` on some covering sieve inside both root sieves. Decided by taking
    /// the largest sieve inside the set of agreeing arrows and testing
    /// whether it covers.
    pub fn equiv(&mut self, v: TreeId, w: TreeId) -> bool {
        if let Some(&b) = self.equiv_memo.get(&(v, w)) {
            return b;
        }
        let result = self.equiv_uncached(v, w);
        self.equiv_memo.insert((v, w), result);
        result
    }

    fn equiv_uncached(&mut self, v: TreeId, w: TreeId) -> bool {
        let (lv, lw) = (self.label(v), self.label(w));
        if lv.obj != lw.obj || lv.elem != lw.elem {
            return false;
        }
        let site = self.inst.site();
        let cat = site.category();
        let (sv, sw) = (self.inst.sieve(lv), self.inst.sieve(lw));
        let (ev, ew) = (self.inst.branching(lv), self.inst.branching(lw));
        let mut agree = vec![false; cat.num_morphisms()];
        for &f in sv.members() {
            if sw.contains(f) {
                agree[f.index()] = true;
            }
        }
        for (i, e) in ev.iter().enumerate() {
            if !agree[e.mor.index()] {
                continue;
            }
            let j = ew.binary_search(e).expect("same fibers over a shared arrow");
            let (cv, cw) = (self.children(v)[i], self.children(w)[j]);
            if !self.equiv(cv, cw) {
                agree[e.mor.index()] = false;
            }
        }
        let r = cat.largest_sieve_in_mask(lv.obj, &agree);
        site.covers(&r)
    }

    /// Composability, naturality and their hereditary conjunction. A child
    /// not rooted at the domain of its edge has no restriction along
    /// arrows into that domain, so such a node is counted as not natural.
    pub fn hcn_status(&mut self, t: TreeId) -> HcnStatus {
        if let Some(&s) = self.hcn_memo.get(&t) {
            return s;
        }
        let cat = self.inst.site().category();
        let edges = self.edges(t);
        let children = self.children(t).to_vec();
        let composable =
            edges.iter().zip(&children).all(|(e, &c)| self.root_obj(c) == cat.dom(e.mor));
        let mut natural = composable;
        if composable {
            'outer: for (e, &c) in edges.iter().zip(&children) {
                for &g in cat.arrows_into(cat.dom(e.mor)) {
                    let lhs = self.restrict_unchecked(c, g);
                    let target = Edge { mor: cat.comp(e.mor, g), elem: self.inst.y().restrict(e.elem, g) };
                    let rhs = self.child(t, target).expect("edge closed under restriction");
                    if !self.equiv(lhs, rhs) {
                        natural = false;
                        break 'outer;
                    }
                }
            }
        }
        let mut hereditary = composable && natural;
        if hereditary {
            for &c in &children {
                if !self.hcn_status(c).hereditary {
                    hereditary = false;
                    break;
                }
            }
        }
        let s = HcnStatus { composable, natural, hereditary };
        self.hcn_memo.insert(t, s);
        s
    }

    pub fn is_hereditary(&mut self, t: TreeId) -> bool {
        self.hcn_status(t).hereditary
    }
}
