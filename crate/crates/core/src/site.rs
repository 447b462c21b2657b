//! Finite categories, sieves and Grothendieck topologies.
//!
//! Composition follows the precomposition convention: `compose(f, g)` is
//! `f∘g`, "first `g`, then `f`", defined when `cod(g) = dom(f)`.
//! Objects and morphisms are numbered in lexicographic order of their
//! names, so id order is the canonical order.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::report::{ValidationReport, Violation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MorId(pub u32);

impl ObjId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl MorId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SiteError {
    UnknownObject(String),
    UnknownMorphism(String),
    DuplicateObject(String),
    DuplicateMorphism(String),
    DuplicateIdentity(String),
    DuplicateComposite { after: String, then: String },
    /// `cod(g) ≠ dom(f)` for `compose(f, g)`.
    DomainMismatch { after: String, then: String },
    MissingComposite { after: String, then: String },
    /// A morphism was expected to have the given codomain.
    CodomainMismatch { morphism: String, expected: String },
    SieveTargetMismatch { expected: String, found: String },
    NotASieve(String),
}

impl fmt::Display for SiteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SiteError::UnknownObject(o) => write!(f, "unknown object `{o}`"),
            SiteError::UnknownMorphism(m) => write!(f, "unknown morphism `{m}`"),
            SiteError::DuplicateObject(o) => write!(f, "object `{o}` declared twice"),
            SiteError::DuplicateMorphism(m) => write!(f, "morphism `{m}` declared twice"),
            SiteError::DuplicateIdentity(o) => write!(f, "object `{o}` has two identities"),
            SiteError::DuplicateComposite { after, then } => {
                write!(f, "composite {after}∘{then} given twice")
            }
            SiteError::DomainMismatch { after, then } => {
                write!(f, "{after}∘{then}: codomain of {then} is not the domain of {after}")
            }
            SiteError::MissingComposite { after, then } => {
                write!(f, "composite {after}∘{then} missing from the table")
            }
            SiteError::CodomainMismatch { morphism, expected } => {
                write!(f, "morphism {morphism} does not have codomain {expected}")
            }
            SiteError::SieveTargetMismatch { expected, found } => {
                write!(f, "sieve on {found} used where a sieve on {expected} was expected")
            }
            SiteError::NotASieve(s) => write!(f, "{s} is not a sieve"),
        }
    }
}

impl core::error::Error for SiteError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    pub name: String,
    pub dom: ObjId,
    pub cod: ObjId,
}

/// A finite category given by explicit tables.
///
/// Construction only checks that names resolve. Unit, associativity and
/// typing laws are checked by [`FiniteCategory::validate`]; the other
/// operations assume a valid category.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteCategory {
    objects: Vec<String>,
    morphisms: Vec<Morphism>,
    identities: Vec<Option<MorId>>,
    /// `composition[f * n + g] = f∘g`.
    composition: Vec<Option<MorId>>,
    into: Vec<Vec<MorId>>,
}

impl FiniteCategory {
    /// Builds a category from named tables. `morphisms` are `(name, dom, cod)`,
    /// `identities` are `(object, morphism)` and `composition` entries are
    /// `(f, g, f∘g)`.
    pub fn from_tables(
        objects: &[&str],
        morphisms: &[(&str, &str, &str)],
        identities: &[(&str, &str)],
        composition: &[(&str, &str, &str)],
    ) -> Result<Self, SiteError> {
        let mut obj_names: Vec<String> = objects.iter().map(|s| s.to_string()).collect();
        obj_names.sort();
        for w in obj_names.windows(2) {
            if w[0] == w[1] {
                return Err(SiteError::DuplicateObject(w[0].clone()));
            }
        }
        let obj_of = |name: &str| -> Result<ObjId, SiteError> {
            obj_names
                .binary_search_by(|o| o.as_str().cmp(name))
                .map(|i| ObjId(i as u32))
                .map_err(|_| SiteError::UnknownObject(name.to_string()))
        };
        let mut mors = Vec::with_capacity(morphisms.len());
        for &(name, dom, cod) in morphisms {
            mors.push(Morphism { name: name.to_string(), dom: obj_of(dom)?, cod: obj_of(cod)? });
        }
        mors.sort_by(|a, b| a.name.cmp(&b.name));
        for w in mors.windows(2) {
            if w[0].name == w[1].name {
                return Err(SiteError::DuplicateMorphism(w[0].name.clone()));
            }
        }
        let mor_of = |name: &str| -> Result<MorId, SiteError> {
            mors.binary_search_by(|m| m.name.as_str().cmp(name))
                .map(|i| MorId(i as u32))
                .map_err(|_| SiteError::UnknownMorphism(name.to_string()))
        };
        let mut ids = vec![None; obj_names.len()];
        for &(o, m) in identities {
            let o = obj_of(o)?;
            if ids[o.index()].is_some() {
                return Err(SiteError::DuplicateIdentity(obj_names[o.index()].clone()));
            }
            ids[o.index()] = Some(mor_of(m)?);
        }
        let n = mors.len();
        let mut comp = vec![None; n * n];
        for &(f, g, h) in composition {
            let (f, g, h) = (mor_of(f)?, mor_of(g)?, mor_of(h)?);
            let slot = &mut comp[f.index() * n + g.index()];
            if slot.is_some() {
                return Err(SiteError::DuplicateComposite {
                    after: mors[f.index()].name.clone(),
                    then: mors[g.index()].name.clone(),
                });
            }
            *slot = Some(h);
        }
        Ok(Self::from_raw(obj_names, mors, ids, comp))
    }

    /// Builds a category from already-numbered parts. Object and morphism
    /// names should be sorted for the id order to be canonical.
    pub fn from_raw(
        objects: Vec<String>,
        morphisms: Vec<Morphism>,
        identities: Vec<Option<MorId>>,
        composition: Vec<Option<MorId>>,
    ) -> Self {
        let mut into = vec![Vec::new(); objects.len()];
        for (i, m) in morphisms.iter().enumerate() {
            into[m.cod.index()].push(MorId(i as u32));
        }
        FiniteCategory { objects, morphisms, identities, composition, into }
    }

    /// The category with no objects.
    pub fn empty() -> Self {
        Self::from_raw(Vec::new(), Vec::new(), Vec::new(), Vec::new())
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_morphisms(&self) -> usize {
        self.morphisms.len()
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjId> + '_ {
        (0..self.objects.len() as u32).map(ObjId)
    }

    pub fn morphisms(&self) -> impl Iterator<Item = MorId> + '_ {
        (0..self.morphisms.len() as u32).map(MorId)
    }

    pub fn object_name(&self, a: ObjId) -> &str {
        &self.objects[a.index()]
    }

    pub fn morphism_name(&self, f: MorId) -> &str {
        &self.morphisms[f.index()].name
    }

    pub fn object_by_name(&self, name: &str) -> Option<ObjId> {
        self.objects.binary_search_by(|o| o.as_str().cmp(name)).ok().map(|i| ObjId(i as u32))
    }

    pub fn morphism_by_name(&self, name: &str) -> Option<MorId> {
        self.morphisms
            .binary_search_by(|m| m.name.as_str().cmp(name))
            .ok()
            .map(|i| MorId(i as u32))
    }

    #[inline]
    pub fn dom(&self, f: MorId) -> ObjId {
        self.morphisms[f.index()].dom
    }

    #[inline]
    pub fn cod(&self, f: MorId) -> ObjId {
        self.morphisms[f.index()].cod
    }

    /// Identity on `a`. Panics if the category has no identity for `a`.
    #[inline]
    pub fn identity(&self, a: ObjId) -> MorId {
        self.identities[a.index()].expect("identity of a validated category")
    }

    pub fn try_identity(&self, a: ObjId) -> Option<MorId> {
        self.identities[a.index()]
    }

    /// All morphisms with codomain `a`, in id order.
    #[inline]
    pub fn arrows_into(&self, a: ObjId) -> &[MorId] {
        &self.into[a.index()]
    }

    /// `f∘g`; errors if `cod(g) ≠ dom(f)` or the table has no entry.
    pub fn compose(&self, f: MorId, g: MorId) -> Result<MorId, SiteError> {
        if self.cod(g) != self.dom(f) {
            return Err(SiteError::DomainMismatch {
                after: self.morphism_name(f).to_string(),
                then: self.morphism_name(g).to_string(),
            });
        }
        self.table(f, g).ok_or_else(|| SiteError::MissingComposite {
            after: self.morphism_name(f).to_string(),
            then: self.morphism_name(g).to_string(),
        })
    }

    /// `f∘g` for a composable pair in a validated category.
    #[inline]
    pub fn comp(&self, f: MorId, g: MorId) -> MorId {
        debug_assert_eq!(self.cod(g), self.dom(f));
        self.composition[f.index() * self.morphisms.len() + g.index()]
            .expect("composite of a validated category")
    }

    #[inline]
    fn table(&self, f: MorId, g: MorId) -> Option<MorId> {
        self.composition[f.index() * self.morphisms.len() + g.index()]
    }

    /// Checks identity typing, totality and typing of composition, unit
    /// laws and associativity. Empty report iff the tables form a category.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let name = |f: MorId| self.morphism_name(f).to_string();
        for a in self.objects() {
            match self.identities[a.index()] {
                None => report.push(Violation::MissingIdentity {
                    object: self.object_name(a).to_string(),
                }),
                Some(i) if self.dom(i) != a || self.cod(i) != a => {
                    report.push(Violation::IdentityTyping {
                        object: self.object_name(a).to_string(),
                        morphism: name(i),
                    })
                }
                Some(_) => {}
            }
        }
        for f in self.morphisms() {
            for g in self.morphisms() {
                let composable = self.cod(g) == self.dom(f);
                match (composable, self.table(f, g)) {
                    (true, None) => report
                        .push(Violation::CompositionNotTotal { after: name(f), then: name(g) }),
                    (false, Some(_)) => {
                        report.push(Violation::SpuriousComposite { after: name(f), then: name(g) })
                    }
                    (true, Some(h)) if self.dom(h) != self.dom(g) || self.cod(h) != self.cod(f) => {
                        report.push(Violation::CompositionTyping {
                            after: name(f),
                            then: name(g),
                            equals: name(h),
                        })
                    }
                    _ => {}
                }
            }
        }
        for f in self.morphisms() {
            if let Some(i) = self.identities[self.dom(f).index()] {
                if self.table(f, i).is_some_and(|h| h != f) {
                    report.push(Violation::RightUnit { morphism: name(f) });
                }
            }
            if let Some(i) = self.identities[self.cod(f).index()] {
                if self.table(i, f).is_some_and(|h| h != f) {
                    report.push(Violation::LeftUnit { morphism: name(f) });
                }
            }
        }
        for f in self.morphisms() {
            for &g in self.arrows_into(self.dom(f)) {
                let Some(fg) = self.table(f, g) else { continue };
                for &h in self.arrows_into(self.dom(g)) {
                    let (Some(gh), Some(fg_h)) = (self.table(g, h), self.table(fg, h)) else {
                        continue;
                    };
                    if self.table(f, gh) != Some(fg_h) {
                        report.push(Violation::Associativity { f: name(f), g: name(g), h: name(h) });
                    }
                }
            }
        }
        report.finish()
    }

    pub fn maximal_sieve(&self, a: ObjId) -> Sieve {
        Sieve { target: a, members: self.arrows_into(a).to_vec() }
    }

    /// Whether the member set is closed under precomposition and every
    /// member has the right codomain.
    pub fn is_sieve(&self, s: &Sieve) -> bool {
        s.members.iter().all(|&f| {
            self.cod(f) == s.target
                && self.arrows_into(self.dom(f)).iter().all(|&g| s.contains(self.comp(f, g)))
        })
    }

    /// `f*S = {g : f∘g ∈ S}`, a sieve on `dom(f)`.
    pub fn pullback_sieve(&self, f: MorId, s: &Sieve) -> Result<Sieve, SiteError> {
        if s.target != self.cod(f) {
            return Err(SiteError::SieveTargetMismatch {
                expected: self.object_name(self.cod(f)).to_string(),
                found: self.object_name(s.target).to_string(),
            });
        }
        let b = self.dom(f);
        let members = self.arrows_into(b).iter().copied().filter(|&g| s.contains(self.comp(f, g))).collect();
        Ok(Sieve { target: b, members })
    }

    /// The largest sieve on `a` contained in `set`:
    /// `{f : f∘g ∈ set for every g into dom(f)}`.
    pub fn largest_sieve_within(&self, a: ObjId, set: &[MorId]) -> Result<Sieve, SiteError> {
        let mut inside = vec![false; self.num_morphisms()];
        for &f in set {
            if self.cod(f) != a {
                return Err(SiteError::CodomainMismatch {
                    morphism: self.morphism_name(f).to_string(),
                    expected: self.object_name(a).to_string(),
                });
            }
            inside[f.index()] = true;
        }
        Ok(self.largest_sieve_in_mask(a, &inside))
    }

    pub(crate) fn largest_sieve_in_mask(&self, a: ObjId, inside: &[bool]) -> Sieve {
        let members = self
            .arrows_into(a)
            .iter()
            .copied()
            .filter(|&f| {
                inside[f.index()]
                    && self.arrows_into(self.dom(f)).iter().all(|&g| inside[self.comp(f, g).index()])
            })
            .collect();
        Sieve { target: a, members }
    }

    /// The smallest sieve on `a` containing `generators`.
    pub fn generated_sieve(&self, a: ObjId, generators: &[MorId]) -> Result<Sieve, SiteError> {
        let mut members = BTreeSet::new();
        for &f in generators {
            if self.cod(f) != a {
                return Err(SiteError::CodomainMismatch {
                    morphism: self.morphism_name(f).to_string(),
                    expected: self.object_name(a).to_string(),
                });
            }
            members.extend(self.arrows_into(self.dom(f)).iter().map(|&g| self.comp(f, g)));
        }
        Ok(Sieve { target: a, members: members.into_iter().collect() })
    }

    /// Every sieve on `a`, sorted. Enumerates down-closed sets by closing
    /// outward from the empty sieve, so the cost is proportional to the
    /// number of sieves.
    pub fn all_sieves(&self, a: ObjId) -> Vec<Sieve> {
        let gens: Vec<Vec<MorId>> = self
            .arrows_into(a)
            .iter()
            .map(|&f| self.arrows_into(self.dom(f)).iter().map(|&g| self.comp(f, g)).collect())
            .collect();
        let mut seen: BTreeSet<Vec<MorId>> = BTreeSet::new();
        let mut frontier = vec![Vec::new()];
        seen.insert(Vec::new());
        while let Some(cur) = frontier.pop() {
            for (i, &f) in self.arrows_into(a).iter().enumerate() {
                if cur.binary_search(&f).is_ok() {
                    continue;
                }
                let mut next = cur.clone();
                next.extend_from_slice(&gens[i]);
                next.sort_unstable();
                next.dedup();
                if seen.insert(next.clone()) {
                    frontier.push(next);
                }
            }
        }
        seen.into_iter().map(|members| Sieve { target: a, members }).collect()
    }

    pub fn sieve_label(&self, s: &Sieve) -> String {
        let names: Vec<&str> = s.members.iter().map(|&f| self.morphism_name(f)).collect();
        format!("{{{}}}", names.join(", "))
    }
}

/// A set of morphisms into one object, kept sorted.
///
/// The derived order compares the target, then the sorted member lists
/// lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sieve {
    target: ObjId,
    members: Vec<MorId>,
}

impl Sieve {
    /// Wraps a member set; closure is not checked here (see
    /// [`FiniteCategory::is_sieve`]).
    pub fn new(target: ObjId, mut members: Vec<MorId>) -> Self {
        members.sort_unstable();
        members.dedup();
        Sieve { target, members }
    }

    pub fn empty(target: ObjId) -> Self {
        Sieve { target, members: Vec::new() }
    }

    pub fn target(&self) -> ObjId {
        self.target
    }

    pub fn members(&self) -> &[MorId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    #[inline]
    pub fn contains(&self, f: MorId) -> bool {
        self.members.binary_search(&f).is_ok()
    }

    pub fn is_subset(&self, other: &Sieve) -> bool {
        self.target == other.target && self.members.iter().all(|&f| other.contains(f))
    }

    pub fn intersection(&self, other: &Sieve) -> Sieve {
        let members = self.members.iter().copied().filter(|&f| other.contains(f)).collect();
        Sieve { target: self.target, members }
    }
}

/// Covering sieves per object, listed extensionally and kept sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    cov: Vec<Vec<Sieve>>,
}

impl Topology {
    /// `cov[a]` lists the covering sieves on object `a`.
    pub fn new(mut cov: Vec<Vec<Sieve>>) -> Self {
        for list in &mut cov {
            list.sort();
            list.dedup();
        }
        Topology { cov }
    }

    /// Only maximal sieves cover; sheaves are then all presheaves.
    pub fn trivial(cat: &FiniteCategory) -> Self {
        Topology::new(cat.objects().map(|a| vec![cat.maximal_sieve(a)]).collect())
    }

    pub fn covering(&self, a: ObjId) -> &[Sieve] {
        &self.cov[a.index()]
    }

    pub fn covers(&self, s: &Sieve) -> bool {
        self.index_of(s).is_some()
    }

    pub fn index_of(&self, s: &Sieve) -> Option<usize> {
        self.cov.get(s.target.index())?.binary_search(s).ok()
    }
}

/// A finite category with a topology, plus lookup tables used by the tree
/// calculus: the index of each maximal sieve and the pullback of every
/// covering sieve along every morphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSite {
    category: FiniteCategory,
    topology: Topology,
    maximal: Vec<Option<u32>>,
    /// `pullbacks[f][i]` is the index in `cov(dom f)` of `f*S` for
    /// `S = cov(cod f)[i]`, when that pullback is covering.
    pullbacks: Vec<Vec<Option<u32>>>,
}

impl FiniteSite {
    pub fn new(category: FiniteCategory, topology: Topology) -> Self {
        let category_ok = category.validate().is_valid();
        let shapes_ok = topology.cov.len() == category.num_objects()
            && topology.cov.iter().enumerate().all(|(a, list)| {
                list.iter().all(|s| {
                    s.target.index() == a && s.members.iter().all(|&f| category.cod(f).index() == a)
                })
            });
        let usable = category_ok && shapes_ok;
        let maximal = category
            .objects()
            .map(|a| {
                if !usable {
                    return None;
                }
                topology.index_of(&category.maximal_sieve(a)).map(|i| i as u32)
            })
            .collect();
        let pullbacks = category
            .morphisms()
            .map(|f| {
                if !usable {
                    return Vec::new();
                }
                topology.covering(category.cod(f))
                    .iter()
                    .map(|s| {
                        let p = category.pullback_sieve(f, s).ok()?;
                        topology.index_of(&p).map(|i| i as u32)
                    })
                    .collect()
            })
            .collect();
        FiniteSite { category, topology, maximal, pullbacks }
    }

    pub fn category(&self) -> &FiniteCategory {
        &self.category
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn covering(&self, a: ObjId) -> &[Sieve] {
        self.topology.covering(a)
    }

    pub fn covers(&self, s: &Sieve) -> bool {
        self.topology.covers(s)
    }

    /// Index of `M_a` in `cov(a)`; panics on an invalid site.
    pub fn maximal_index(&self, a: ObjId) -> u32 {
        self.maximal[a.index()].expect("maximal sieve of a validated site")
    }

    /// Index of `f*S` in `cov(dom f)` for `S = cov(cod f)[index]`; panics on
    /// an invalid site.
    pub fn pullback_index(&self, f: MorId, index: u32) -> u32 {
        self.pullbacks[f.index()][index as usize].expect("stable topology of a validated site")
    }

    /// Category laws followed by the topology axioms.
    pub fn validate(&self) -> ValidationReport {
        let mut report = self.category.validate();
        if report.is_valid() {
            report.extend(validate_topology(&self.category, &self.topology));
        }
        report.finish()
    }
}

/// Checks the maximal-sieve, stability and local-character axioms, plus
/// closure of each covering family under supersets, by enumerating all
/// sieves. Assumes a valid category.
pub fn validate_topology(cat: &FiniteCategory, top: &Topology) -> ValidationReport {
    let mut report = ValidationReport::default();
    if top.cov.len() != cat.num_objects() {
        for a in cat.objects().skip(top.cov.len()) {
            report.push(Violation::MaximalSieve { object: cat.object_name(a).to_string() });
        }
    }
    let objs: Vec<ObjId> = cat.objects().take(top.cov.len()).collect();
    let oname = |a: ObjId| cat.object_name(a).to_string();
    let mut well_formed = true;
    for &a in &objs {
        for s in top.covering(a) {
            if s.target != a || s.members.iter().any(|&f| cat.cod(f) != a) || !cat.is_sieve(s) {
                well_formed = false;
                report.push(Violation::NotASieve { object: oname(a), sieve: cat.sieve_label(s) });
            }
        }
    }
    if !well_formed {
        return report.finish();
    }
    for &a in &objs {
        if !top.covers(&cat.maximal_sieve(a)) {
            report.push(Violation::MaximalSieve { object: oname(a) });
        }
    }
    for f in cat.morphisms() {
        if cat.cod(f).index() >= objs.len() || cat.dom(f).index() >= objs.len() {
            continue;
        }
        for s in top.covering(cat.cod(f)) {
            let p = cat.pullback_sieve(f, s).expect("sieve on cod(f)");
            if !top.covers(&p) {
                report.push(Violation::Stability {
                    morphism: cat.morphism_name(f).to_string(),
                    sieve: cat.sieve_label(s),
                });
            }
        }
    }
    let all: BTreeMap<ObjId, Vec<Sieve>> = objs.iter().map(|&a| (a, cat.all_sieves(a))).collect();
    for &a in &objs {
        for s in &all[&a] {
            if top.covers(s) {
                continue;
            }
            let locally = top.covering(a).iter().any(|r| {
                r.members.iter().all(|&f| {
                    let p = cat.pullback_sieve(f, s).expect("sieve on a");
                    top.covers(&p)
                })
            });
            if locally {
                report.push(Violation::LocalCharacter { object: oname(a), sieve: cat.sieve_label(s) });
            }
        }
        for r in top.covering(a) {
            for s in &all[&a] {
                if r.is_subset(s) && !top.covers(s) {
                    report.push(Violation::SupersetClosure {
                        object: oname(a),
                        sieve: cat.sieve_label(r),
                        superset: cat.sieve_label(s),
                    });
                }
            }
        }
    }
    report.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn names(cat: &FiniteCategory, s: &Sieve) -> Vec<String> {
        s.members().iter().map(|&f| cat.morphism_name(f).to_string()).collect()
    }

    #[test]
    fn identity_composes_with_itself() {
        let site = fixtures::fixture_a();
        let cat = site.category();
        let id = cat.identity(ObjId(0));
        assert_eq!(cat.compose(id, id), Ok(id));
    }

    #[test]
    fn unit_law_in_fixture_c() {
        let site = fixtures::fixture_c();
        let cat = site.category();
        let a = cat.object_by_name("a").unwrap();
        let m = cat.morphism_by_name("m").unwrap();
        assert_eq!(cat.compose(cat.identity(a), m), Ok(m));
    }

    #[test]
    fn non_composable_pair_is_a_domain_mismatch() {
        let site = fixtures::fixture_c();
        let cat = site.category();
        let m = cat.morphism_by_name("m").unwrap();
        assert!(matches!(cat.compose(m, m), Err(SiteError::DomainMismatch { .. })));
    }

    #[test]
    fn fixtures_validate() {
        for site in [fixtures::fixture_a(), fixtures::fixture_b(), fixtures::fixture_c()] {
            assert!(site.validate().is_valid(), "{:?}", site.validate());
        }
    }

    #[test]
    fn empty_category_is_valid() {
        let cat = FiniteCategory::empty();
        let site = FiniteSite::new(cat.clone(), Topology::trivial(&cat));
        assert!(site.validate().is_valid());
    }

    #[test]
    fn missing_composite_is_reported() {
        let cat = FiniteCategory::from_tables(
            &["a", "b"],
            &[("id_a", "a", "a"), ("id_b", "b", "b"), ("m", "b", "a")],
            &[("a", "id_a"), ("b", "id_b")],
            &[("id_a", "id_a", "id_a"), ("id_b", "id_b", "id_b"), ("id_a", "m", "m")],
        )
        .unwrap();
        let report = cat.validate();
        assert!(report.has("composition-not-total"), "{report:?}");
    }

    #[test]
    fn wrong_unit_entry_is_reported() {
        let cat = FiniteCategory::from_tables(
            &["a", "b"],
            &[("id_a", "a", "a"), ("id_b", "b", "b"), ("m", "b", "a")],
            &[("a", "id_a"), ("b", "id_b")],
            &[
                ("id_a", "id_a", "id_a"),
                ("id_b", "id_b", "id_b"),
                ("id_a", "m", "m"),
                ("m", "id_b", "id_a"),
            ],
        )
        .unwrap();
        let report = cat.validate();
        assert!(report.has("unit-law"), "{report:?}");
    }

    #[test]
    fn pullback_along_member_is_maximal() {
        let site = fixtures::fixture_c();
        let cat = site.category();
        let (a, b) = (cat.object_by_name("a").unwrap(), cat.object_by_name("b").unwrap());
        let m = cat.morphism_by_name("m").unwrap();
        let s = Sieve::new(a, vec![m]);
        assert_eq!(cat.pullback_sieve(m, &s).unwrap(), cat.maximal_sieve(b));
        assert_eq!(cat.pullback_sieve(cat.identity(a), &s).unwrap(), s);
        assert!(cat.pullback_sieve(m, &cat.maximal_sieve(b)).is_err());
    }

    #[test]
    fn largest_sieve_examples() {
        let site = fixtures::fixture_c();
        let cat = site.category();
        let a = cat.object_by_name("a").unwrap();
        let m = cat.morphism_by_name("m").unwrap();
        let id_a = cat.identity(a);
        assert_eq!(cat.largest_sieve_within(a, &[id_a, m]).unwrap(), cat.maximal_sieve(a));
        assert_eq!(cat.largest_sieve_within(a, &[]).unwrap(), Sieve::empty(a));
        assert_eq!(cat.largest_sieve_within(a, &[m]).unwrap(), Sieve::new(a, vec![m]));
        // {id_a} alone is not closed: id_a∘m = m is missing.
        assert_eq!(cat.largest_sieve_within(a, &[id_a]).unwrap(), Sieve::empty(a));
    }

    #[test]
    fn all_sieves_of_fixture_c() {
        let site = fixtures::fixture_c();
        let cat = site.category();
        let a = cat.object_by_name("a").unwrap();
        let got: Vec<Vec<String>> = cat.all_sieves(a).iter().map(|s| names(cat, s)).collect();
        let expect: Vec<Vec<String>> = vec![
            vec![],
            vec!["id_a".to_string(), "m".to_string()],
            vec!["m".to_string()],
        ];
        assert_eq!(got, expect);
    }

    #[test]
    fn topology_mutations_are_named() {
        // Fixture B with the maximal sieve removed.
        let b = fixtures::fixture_b();
        let cat = b.category().clone();
        let star = ObjId(0);
        let top = Topology::new(vec![vec![Sieve::empty(star)]]);
        assert!(validate_topology(&cat, &top).has("maximal-sieve"));

        // Fixture C with ∅ covering a: its pullback along m does not cover b.
        let c = fixtures::fixture_c();
        let cat = c.category().clone();
        let (a, bb) = (cat.object_by_name("a").unwrap(), cat.object_by_name("b").unwrap());
        let m = cat.morphism_by_name("m").unwrap();
        let top = Topology::new(vec![
            vec![cat.maximal_sieve(a), Sieve::new(a, vec![m]), Sieve::empty(a)],
            vec![cat.maximal_sieve(bb)],
        ]);
        let r = validate_topology(&cat, &top);
        assert!(r.has("stability"), "{r:?}");
        assert!(!r.has("local-character"), "{r:?}");

        // Fixture C with ∅ covering b: ∅ on a is then locally covering along {m}.
        let top = Topology::new(vec![
            vec![cat.maximal_sieve(a), Sieve::new(a, vec![m])],
            vec![cat.maximal_sieve(bb), Sieve::empty(bb)],
        ]);
        let r = validate_topology(&cat, &top);
        assert!(r.has("local-character"), "{r:?}");
        assert!(!r.has("stability"), "{r:?}");
    }
}
