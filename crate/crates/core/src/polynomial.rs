//! The polynomial functor `P_F` of a natural map `F: Y -> X`.
//!
//! `P_F Z(a)` consists of pairs `(x, t)` with `x ∈ X(a)` and `t` a natural
//! map `Y_x -> Z`, where `Y_x(b) = {(f: b -> a, y) : F(y) = x·f}`. The
//! elements of `Y_x` across all objects are exactly the edge labels of a
//! tree node `(a, x, M_a)`, so a fiber map is stored as a vector aligned
//! with that edge list.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::csp::FunctionalCsp;
use crate::presheaf::{Presheaf, PresheafError, PresheafMorphism};
use crate::report::ValidationReport;
use crate::site::{FiniteSite, MorId, ObjId, Sieve};
use crate::ENUMERATION_LIMIT;

/// A natural map `F: Y -> X` of presheaves on a fixed site.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    x: Presheaf,
    y: Presheaf,
    f: PresheafMorphism,
}

impl Polynomial {
    pub fn new(x: Presheaf, y: Presheaf, f: PresheafMorphism) -> Self {
        Polynomial { x, y, f }
    }

    pub fn x(&self) -> &Presheaf {
        &self.x
    }

    pub fn y(&self) -> &Presheaf {
        &self.y
    }

    pub fn f(&self) -> &PresheafMorphism {
        &self.f
    }

    /// Presheaf laws for `X` and `Y` and naturality of `F`.
    pub fn validate(&self, site: &FiniteSite) -> ValidationReport {
        let cat = site.category();
        let mut r = self.x.validate(cat);
        r.extend(self.y.validate(cat));
        if r.is_valid() {
            r.extend(self.f.validate(cat, &self.y, &self.x));
        }
        r
    }
}

/// An edge label `(f, y)`: `f` into the node's object, `y ∈ Y(dom f)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub mor: MorId,
    pub elem: u32,
}

/// A node label `(a, x, S)`; `sieve` indexes `cov(a)`, whose sorted order
/// makes the derived order the canonical label order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub obj: ObjId,
    pub elem: u32,
    pub sieve: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InstanceError {
    InvalidSite(ValidationReport),
    InvalidPolynomial(ValidationReport),
    ElementOutOfRange { object: String, element: u32 },
    NotCovering(String),
}

impl fmt::Display for InstanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceError::InvalidSite(r) => write!(f, "invalid site ({} violations)", r.violations.len()),
            InstanceError::InvalidPolynomial(r) => {
                write!(f, "invalid F: Y -> X ({} violations)", r.violations.len())
            }
            InstanceError::ElementOutOfRange { object, element } => {
                write!(f, "element #{element} is not in X({object})")
            }
            InstanceError::NotCovering(s) => write!(f, "{s} is not a covering sieve"),
        }
    }
}

impl core::error::Error for InstanceError {}

/// A validated site with a validated `F: Y -> X`, plus the branching
/// data of every node label.
#[derive(Clone, Debug)]
pub struct WInstance {
    site: FiniteSite,
    poly: Polynomial,
    label_base: Vec<usize>,
    branching: Vec<Vec<Edge>>,
}

impl WInstance {
    pub fn new(site: FiniteSite, poly: Polynomial) -> Result<Self, InstanceError> {
        let r = site.validate();
        if !r.is_valid() {
            return Err(InstanceError::InvalidSite(r));
        }
        let r = poly.validate(&site);
        if !r.is_valid() {
            return Err(InstanceError::InvalidPolynomial(r));
        }
        let cat = site.category();
        let mut label_base = Vec::new();
        let mut branching = Vec::new();
        for a in cat.objects() {
            label_base.push(branching.len());
            for x in 0..poly.x.len(a) as u32 {
                for s in site.covering(a) {
                    branching.push(edges_of(&site, &poly, x, s));
                }
            }
        }
        Ok(WInstance { site, poly, label_base, branching })
    }

    pub fn site(&self) -> &FiniteSite {
        &self.site
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn x(&self) -> &Presheaf {
        &self.poly.x
    }

    pub fn y(&self) -> &Presheaf {
        &self.poly.y
    }

    /// Every node label rooted at `a`, in canonical order.
    pub fn labels(&self, a: ObjId) -> impl Iterator<Item = Label> + '_ {
        let ncov = self.site.covering(a).len() as u32;
        (0..self.poly.x.len(a) as u32)
            .flat_map(move |elem| (0..ncov).map(move |sieve| Label { obj: a, elem, sieve }))
    }

    /// The label `(a, x, S)`; errors if `x ∉ X(a)` or `S` does not cover.
    pub fn label(&self, a: ObjId, x: u32, s: &Sieve) -> Result<Label, InstanceError> {
        if x as usize >= self.poly.x.len(a) {
            return Err(InstanceError::ElementOutOfRange {
                object: String::from(self.site.category().object_name(a)),
                element: x,
            });
        }
        let sieve = self
            .site
            .topology()
            .index_of(s)
            .filter(|_| s.target() == a)
            .ok_or_else(|| InstanceError::NotCovering(self.site.category().sieve_label(s)))?;
        Ok(Label { obj: a, elem: x, sieve: sieve as u32 })
    }

    pub fn max_label(&self, a: ObjId, x: u32) -> Label {
        Label { obj: a, elem: x, sieve: self.site.maximal_index(a) }
    }

    pub fn sieve(&self, l: Label) -> &Sieve {
        &self.site.covering(l.obj)[l.sieve as usize]
    }

    #[inline]
    fn ordinal(&self, l: Label) -> usize {
        let ncov = self.site.covering(l.obj).len();
        self.label_base[l.obj.index()] + l.elem as usize * ncov + l.sieve as usize
    }

    /// Legal edge labels `{(f, y) : f ∈ S, F(y) = x·f}` of a node, sorted.
    #[inline]
    pub fn branching(&self, l: Label) -> &[Edge] {
        &self.branching[self.ordinal(l)]
    }

    /// The label of `v·f` for a tree `v` labelled `l`.
    pub fn restrict_label(&self, l: Label, f: MorId) -> Label {
        let cat = self.site.category();
        debug_assert_eq!(cat.cod(f), l.obj);
        Label {
            obj: cat.dom(f),
            elem: self.poly.x.restrict(l.elem, f),
            sieve: self.site.pullback_index(f, l.sieve),
        }
    }

    /// `{y ∈ Y(dom f) : F(y) = x·f}`.
    pub fn fiber(&self, f: MorId, x: u32) -> Vec<u32> {
        fiber_of(&self.site, &self.poly, f, x)
    }
}

fn fiber_of(site: &FiniteSite, poly: &Polynomial, f: MorId, x: u32) -> Vec<u32> {
    let b = site.category().dom(f);
    let target = poly.x.restrict(x, f);
    (0..poly.y.len(b) as u32).filter(|&y| poly.f.apply(b, y) == target).collect()
}

fn edges_of(site: &FiniteSite, poly: &Polynomial, x: u32, s: &Sieve) -> Vec<Edge> {
    let mut out = Vec::new();
    for &f in s.members() {
        for y in fiber_of(site, poly, f, x) {
            out.push(Edge { mor: f, elem: y });
        }
    }
    out
}

/// The presheaf `Y_x` for `x ∈ X(a)`, with its elements `(f, y)` listed
/// per object in edge order.
pub fn yx_presheaf(inst: &WInstance, a: ObjId, x: u32) -> (Presheaf, Vec<Vec<Edge>>) {
    let cat = inst.site.category();
    let edges = inst.branching(inst.max_label(a, x));
    let mut per_obj: Vec<Vec<Edge>> = alloc::vec![Vec::new(); cat.num_objects()];
    for &e in edges {
        per_obj[cat.dom(e.mor).index()].push(e);
    }
    let names = per_obj
        .iter()
        .enumerate()
        .map(|(b, list)| {
            list.iter()
                .map(|e| {
                    format!(
                        "({},{})",
                        cat.morphism_name(e.mor),
                        inst.y().name(ObjId(b as u32), e.elem)
                    )
                })
                .collect()
        })
        .collect();
    let restriction = cat
        .morphisms()
        .map(|g| {
            let b = cat.cod(g);
            per_obj[b.index()]
                .iter()
                .map(|e| {
                    let target = Edge { mor: cat.comp(e.mor, g), elem: inst.y().restrict(e.elem, g) };
                    per_obj[cat.dom(g).index()].binary_search(&target).expect("Y_x closed") as u32
                })
                .collect()
        })
        .collect();
    (Presheaf::from_raw(names, restriction), per_obj)
}

/// An element `(x, t)` of `P_F Z(a)`. `fiber[i]` is `t(f, y) ∈ Z(dom f)`
/// for the `i`-th edge `(f, y)` of the node `(a, x, M_a)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PfElement {
    pub base: u32,
    pub fiber: Vec<u32>,
}

/// `P_F Z` as a presheaf, with the decoding of its elements.
#[derive(Clone, Debug)]
pub struct PfPresheaf {
    pub presheaf: Presheaf,
    pub elements: Vec<Vec<PfElement>>,
    index: Vec<BTreeMap<PfElement, u32>>,
}

impl PfPresheaf {
    pub fn element(&self, a: ObjId, i: u32) -> &PfElement {
        &self.elements[a.index()][i as usize]
    }

    pub fn index_of(&self, a: ObjId, e: &PfElement) -> Option<u32> {
        self.index[a.index()].get(e).copied()
    }
}

/// All natural fiber maps `Y_x -> Z` for the node `(a, x, M_a)`, as vectors
/// aligned with its edges, in lexicographic order.
pub fn natural_fiber_maps(
    inst: &WInstance,
    z_len: impl Fn(ObjId) -> u32,
    z_restrict: impl Fn(MorId) -> Vec<u32>,
    a: ObjId,
    x: u32,
) -> Result<Vec<Vec<u32>>, PresheafError> {
    let cat = inst.site.category();
    let edges = inst.branching(inst.max_label(a, x));
    let mut csp = FunctionalCsp::new(edges.iter().map(|e| z_len(cat.dom(e.mor))).collect());
    for (i, e) in edges.iter().enumerate() {
        for &g in cat.arrows_into(cat.dom(e.mor)) {
            let target = Edge { mor: cat.comp(e.mor, g), elem: inst.y().restrict(e.elem, g) };
            let j = edges.binary_search(&target).expect("edges closed under restriction");
            csp.link(i, j, z_restrict(g));
        }
    }
    csp.solve_all(ENUMERATION_LIMIT).map_err(|_| PresheafError::TooManySolutions)
}

/// Restricts a fiber map of the node `(a, x, M_a)` along `k: b -> a`:
/// the result is indexed by the edges of `(b, x·k, M_b)` and sends
/// `(g, y)` to `t(k∘g, y)`.
pub fn restrict_fiber(inst: &WInstance, a: ObjId, x: u32, fiber: &[u32], k: MorId) -> PfElement {
    let cat = inst.site.category();
    let edges = inst.branching(inst.max_label(a, x));
    let b = cat.dom(k);
    let xk = inst.x().restrict(x, k);
    let fiber = inst
        .branching(inst.max_label(b, xk))
        .iter()
        .map(|e| {
            let src = Edge { mor: cat.comp(k, e.mor), elem: e.elem };
            fiber[edges.binary_search(&src).expect("k∘g ∈ M_a")]
        })
        .collect();
    PfElement { base: xk, fiber }
}

/// `P_F Z`.
pub fn pf_apply(inst: &WInstance, z: &Presheaf) -> Result<PfPresheaf, PresheafError> {
    let cat = inst.site.category();
    let mut elements: Vec<Vec<PfElement>> = Vec::new();
    for a in cat.objects() {
        let mut here = Vec::new();
        for x in 0..inst.x().len(a) as u32 {
            let maps = natural_fiber_maps(
                inst,
                |b| z.len(b) as u32,
                |g| z.restriction_table(g).to_vec(),
                a,
                x,
            )?;
            here.extend(maps.into_iter().map(|fiber| PfElement { base: x, fiber }));
        }
        elements.push(here);
    }
    let index: Vec<BTreeMap<PfElement, u32>> = elements
        .iter()
        .map(|list| list.iter().cloned().enumerate().map(|(i, e)| (e, i as u32)).collect())
        .collect();
    let names = cat
        .objects()
        .map(|a| {
            elements[a.index()]
                .iter()
                .map(|e| {
                    // Indices, not names: nesting names grows exponentially along the chain.
                    let vals: Vec<String> = e.fiber.iter().map(|v| format!("{v}")).collect();
                    format!("{}[{}]", inst.x().name(a, e.base), vals.join(","))
                })
                .collect()
        })
        .collect();
    let restriction = cat
        .morphisms()
        .map(|k| {
            let (a, b) = (cat.cod(k), cat.dom(k));
            elements[a.index()]
                .iter()
                .map(|e| {
                    let r = restrict_fiber(inst, a, e.base, &e.fiber, k);
                    index[b.index()][&r]
                })
                .collect()
        })
        .collect();
    Ok(PfPresheaf { presheaf: Presheaf::from_raw(names, restriction), elements, index })
}

/// `P_F h: P_F Z -> P_F Z'`, sending `(x, t)` to `(x, h∘t)`.
pub fn pf_map(
    inst: &WInstance,
    h: &PresheafMorphism,
    source: &PfPresheaf,
    target: &PfPresheaf,
) -> PresheafMorphism {
    let cat = inst.site.category();
    let map = cat
        .objects()
        .map(|a| {
            source.elements[a.index()]
                .iter()
                .map(|e| {
                    let edges = inst.branching(inst.max_label(a, e.base));
                    let fiber = edges
                        .iter()
                        .zip(&e.fiber)
                        .map(|(edge, &z)| h.apply(cat.dom(edge.mor), z))
                        .collect();
                    target.index_of(a, &PfElement { base: e.base, fiber }).expect("h∘t natural")
                })
                .collect()
        })
        .collect();
    PresheafMorphism::from_raw(map)
}
