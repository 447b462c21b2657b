//! Finite presheaves on a finite category, natural maps between them,
//! compatible families and the separated/sheaf classification.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::csp::{FunctionalCsp, UNDEFINED};
use crate::report::{ValidationReport, Violation};
use crate::site::{FiniteCategory, FiniteSite, MorId, ObjId, Sieve};
use crate::ENUMERATION_LIMIT;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PresheafError {
    UnknownObject(String),
    UnknownMorphism(String),
    UnknownElement { object: String, element: String },
    DuplicateElement { object: String, element: String },
    DuplicateEntry { element: String, morphism: String },
    /// An exhaustive enumeration exceeded [`ENUMERATION_LIMIT`].
    TooManySolutions,
}

impl fmt::Display for PresheafError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PresheafError::UnknownObject(o) => write!(f, "unknown object `{o}`"),
            PresheafError::UnknownMorphism(m) => write!(f, "unknown morphism `{m}`"),
            PresheafError::UnknownElement { object, element } => {
                write!(f, "no element `{element}` at object `{object}`")
            }
            PresheafError::DuplicateElement { object, element } => {
                write!(f, "element `{element}` listed twice at object `{object}`")
            }
            PresheafError::DuplicateEntry { element, morphism } => {
                write!(f, "entry for `{element}` along `{morphism}` given twice")
            }
            PresheafError::TooManySolutions => {
                write!(f, "enumeration exceeded {ENUMERATION_LIMIT} solutions")
            }
        }
    }
}

impl core::error::Error for PresheafError {}

/// A presheaf with finitely many elements per object.
///
/// `restriction[f][x]` is `x·f` for `x ∈ X(cod f)`, an element of
/// `X(dom f)`. Elements are numbered per object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presheaf {
    elements: Vec<Vec<String>>,
    restriction: Vec<Vec<u32>>,
}

impl Presheaf {
    /// Wraps raw tables; `u32::MAX` marks an undefined restriction.
    pub fn from_raw(elements: Vec<Vec<String>>, restriction: Vec<Vec<u32>>) -> Self {
        Presheaf { elements, restriction }
    }

    /// Builds a presheaf from element names per object and restriction
    /// entries `(x, f, x·f)` with `x` named at `cod(f)`. Elements are sorted
    /// by name; missing identity entries default to `x·id = x`.
    pub fn from_named(
        cat: &FiniteCategory,
        elements: &[(&str, Vec<&str>)],
        restriction: &[(&str, &str, &str)],
    ) -> Result<Self, PresheafError> {
        let mut elems: Vec<Vec<String>> = vec![Vec::new(); cat.num_objects()];
        for (obj, names) in elements {
            let a = cat
                .object_by_name(obj)
                .ok_or_else(|| PresheafError::UnknownObject(obj.to_string()))?;
            elems[a.index()].extend(names.iter().map(|s| s.to_string()));
        }
        for (a, list) in elems.iter_mut().enumerate() {
            list.sort();
            for w in list.windows(2) {
                if w[0] == w[1] {
                    return Err(PresheafError::DuplicateElement {
                        object: cat.object_name(ObjId(a as u32)).to_string(),
                        element: w[0].clone(),
                    });
                }
            }
        }
        let find = |a: ObjId, name: &str| -> Result<u32, PresheafError> {
            elems[a.index()]
                .binary_search_by(|e| e.as_str().cmp(name))
                .map(|i| i as u32)
                .map_err(|_| PresheafError::UnknownElement {
                    object: cat.object_name(a).to_string(),
                    element: name.to_string(),
                })
        };
        let mut table: Vec<Vec<u32>> =
            cat.morphisms().map(|f| vec![UNDEFINED; elems[cat.cod(f).index()].len()]).collect();
        for &(x, f, y) in restriction {
            let f = cat
                .morphism_by_name(f)
                .ok_or_else(|| PresheafError::UnknownMorphism(f.to_string()))?;
            let xi = find(cat.cod(f), x)?;
            let yi = find(cat.dom(f), y)?;
            let slot = &mut table[f.index()][xi as usize];
            if *slot != UNDEFINED {
                return Err(PresheafError::DuplicateEntry {
                    element: x.to_string(),
                    morphism: cat.morphism_name(f).to_string(),
                });
            }
            *slot = yi;
        }
        for a in cat.objects() {
            if let Some(id) = cat.try_identity(a) {
                if cat.dom(id) == a && cat.cod(id) == a {
                    for (x, slot) in table[id.index()].iter_mut().enumerate() {
                        if *slot == UNDEFINED {
                            *slot = x as u32;
                        }
                    }
                }
            }
        }
        Ok(Presheaf { elements: elems, restriction: table })
    }

    /// The presheaf with no elements.
    pub fn empty(cat: &FiniteCategory) -> Self {
        Presheaf {
            elements: vec![Vec::new(); cat.num_objects()],
            restriction: vec![Vec::new(); cat.num_morphisms()],
        }
    }

    /// The terminal presheaf, one element `*` everywhere.
    pub fn terminal(cat: &FiniteCategory) -> Self {
        Self::constant(cat, &["*"])
    }

    /// The constant presheaf on a set, restrictions being identities.
    pub fn constant(cat: &FiniteCategory, names: &[&str]) -> Self {
        let mut sorted: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        sorted.sort();
        sorted.dedup();
        let n = sorted.len() as u32;
        Presheaf {
            elements: vec![sorted; cat.num_objects()],
            restriction: vec![(0..n).collect(); cat.num_morphisms()],
        }
    }

    #[inline]
    pub fn len(&self, a: ObjId) -> usize {
        self.elements[a.index()].len()
    }

    pub fn num_objects(&self) -> usize {
        self.elements.len()
    }

    pub fn total_len(&self) -> usize {
        self.elements.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_len() == 0
    }

    pub fn elements(&self, a: ObjId) -> &[String] {
        &self.elements[a.index()]
    }

    pub fn name(&self, a: ObjId, x: u32) -> &str {
        &self.elements[a.index()][x as usize]
    }

    pub fn find(&self, a: ObjId, name: &str) -> Option<u32> {
        self.elements[a.index()].iter().position(|e| e == name).map(|i| i as u32)
    }

    /// `x·f` in a validated presheaf.
    #[inline]
    pub fn restrict(&self, x: u32, f: MorId) -> u32 {
        let y = self.restriction[f.index()][x as usize];
        debug_assert_ne!(y, UNDEFINED, "restriction of a validated presheaf");
        y
    }

    pub fn try_restrict(&self, x: u32, f: MorId) -> Option<u32> {
        match self.restriction.get(f.index())?.get(x as usize) {
            Some(&y) if y != UNDEFINED => Some(y),
            _ => None,
        }
    }

    /// The restriction table along `f`, indexed by elements of `X(cod f)`.
    pub fn restriction_table(&self, f: MorId) -> &[u32] {
        &self.restriction[f.index()]
    }

    /// Overwrites one restriction entry; meant for building corrupt tables
    /// in tests of the validator.
    pub fn set_restriction(&mut self, x: u32, f: MorId, y: u32) {
        self.restriction[f.index()][x as usize] = y;
    }

    /// `(x·f)_{f ∈ S}`, the family `x` induces on a sieve.
    pub fn family_of(&self, x: u32, sieve: &Sieve) -> CompatibleFamily {
        CompatibleFamily {
            sieve: sieve.clone(),
            values: sieve.members().iter().map(|&f| self.restrict(x, f)).collect(),
        }
    }

    /// Checks table shapes, unit and composition laws. Empty report iff a
    /// presheaf on `cat`.
    pub fn validate(&self, cat: &FiniteCategory) -> ValidationReport {
        let mut report = ValidationReport::default();
        let ok_shape = self.elements.len() == cat.num_objects()
            && self.restriction.len() == cat.num_morphisms()
            && cat
                .morphisms()
                .all(|f| self.restriction[f.index()].len() == self.len(cat.cod(f)));
        if !ok_shape {
            report.push(Violation::RestrictionNotTotal {
                object: "*".to_string(),
                element: "*".to_string(),
                morphism: "table shape".to_string(),
            });
            return report;
        }
        let mut defined = true;
        for f in cat.morphisms() {
            let (a, b) = (cat.cod(f), cat.dom(f));
            for x in 0..self.len(a) as u32 {
                let y = self.restriction[f.index()][x as usize];
                let v = || (cat.object_name(a).to_string(), self.name(a, x).to_string());
                if y == UNDEFINED {
                    defined = false;
                    let (object, element) = v();
                    report.push(Violation::RestrictionNotTotal {
                        object,
                        element,
                        morphism: cat.morphism_name(f).to_string(),
                    });
                } else if y as usize >= self.len(b) {
                    defined = false;
                    let (object, element) = v();
                    report.push(Violation::RestrictionOutOfRange {
                        object,
                        element,
                        morphism: cat.morphism_name(f).to_string(),
                    });
                }
            }
        }
        if !defined {
            return report.finish();
        }
        for a in cat.objects() {
            let id = cat.identity(a);
            for x in 0..self.len(a) as u32 {
                if self.restrict(x, id) != x {
                    report.push(Violation::PresheafUnit {
                        object: cat.object_name(a).to_string(),
                        element: self.name(a, x).to_string(),
                    });
                }
            }
        }
        for f in cat.morphisms() {
            let a = cat.cod(f);
            for &g in cat.arrows_into(cat.dom(f)) {
                let fg = cat.comp(f, g);
                for x in 0..self.len(a) as u32 {
                    if self.restrict(self.restrict(x, f), g) != self.restrict(x, fg) {
                        report.push(Violation::PresheafComposition {
                            object: cat.object_name(a).to_string(),
                            element: self.name(a, x).to_string(),
                            after: cat.morphism_name(f).to_string(),
                            then: cat.morphism_name(g).to_string(),
                        });
                    }
                }
            }
        }
        report.finish()
    }
}

/// A natural map `source -> target`, stored as one function per object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresheafMorphism {
    map: Vec<Vec<u32>>,
}

impl PresheafMorphism {
    /// Wraps raw tables; `u32::MAX` marks an undefined image.
    pub fn from_raw(map: Vec<Vec<u32>>) -> Self {
        PresheafMorphism { map }
    }

    /// Builds a map from entries `(object, source element, target element)`.
    pub fn from_named(
        cat: &FiniteCategory,
        source: &Presheaf,
        target: &Presheaf,
        entries: &[(&str, &str, &str)],
    ) -> Result<Self, PresheafError> {
        let mut map: Vec<Vec<u32>> =
            cat.objects().map(|a| vec![UNDEFINED; source.len(a)]).collect();
        for &(obj, y, x) in entries {
            let a = cat
                .object_by_name(obj)
                .ok_or_else(|| PresheafError::UnknownObject(obj.to_string()))?;
            let unknown = |e: &str| PresheafError::UnknownElement {
                object: obj.to_string(),
                element: e.to_string(),
            };
            let yi = source.find(a, y).ok_or_else(|| unknown(y))?;
            let xi = target.find(a, x).ok_or_else(|| unknown(x))?;
            let slot = &mut map[a.index()][yi as usize];
            if *slot != UNDEFINED {
                return Err(PresheafError::DuplicateEntry {
                    element: y.to_string(),
                    morphism: "map".to_string(),
                });
            }
            *slot = xi;
        }
        Ok(PresheafMorphism { map })
    }

    pub fn identity(cat: &FiniteCategory, p: &Presheaf) -> Self {
        PresheafMorphism { map: cat.objects().map(|a| (0..p.len(a) as u32).collect()).collect() }
    }

    #[inline]
    pub fn apply(&self, a: ObjId, y: u32) -> u32 {
        self.map[a.index()][y as usize]
    }

    pub fn table(&self, a: ObjId) -> &[u32] {
        &self.map[a.index()]
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &PresheafMorphism) -> PresheafMorphism {
        PresheafMorphism {
            map: first
                .map
                .iter()
                .enumerate()
                .map(|(a, row)| row.iter().map(|&y| self.map[a][y as usize]).collect())
                .collect(),
        }
    }

    /// Bijective on every object.
    pub fn is_iso(&self, source: &Presheaf, target: &Presheaf) -> bool {
        self.map.iter().enumerate().all(|(a, row)| {
            let a = ObjId(a as u32);
            if row.len() != target.len(a) || row.len() != source.len(a) {
                return false;
            }
            let mut seen = vec![false; row.len()];
            row.iter().all(|&x| {
                let fresh = (x as usize) < seen.len() && !seen[x as usize];
                if fresh {
                    seen[x as usize] = true;
                }
                fresh
            })
        })
    }

    /// Inverse of a bijective map.
    pub fn inverse(&self) -> PresheafMorphism {
        PresheafMorphism {
            map: self
                .map
                .iter()
                .map(|row| {
                    let mut inv = vec![UNDEFINED; row.len()];
                    for (y, &x) in row.iter().enumerate() {
                        inv[x as usize] = y as u32;
                    }
                    inv
                })
                .collect(),
        }
    }

    /// Checks totality, ranges and naturality `F(y)·f = F(y·f)`.
    pub fn validate(
        &self,
        cat: &FiniteCategory,
        source: &Presheaf,
        target: &Presheaf,
    ) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.map.len() != cat.num_objects() {
            report.push(Violation::MapNotTotal { object: "*".to_string(), element: "*".to_string() });
            return report;
        }
        let mut ok = true;
        for a in cat.objects() {
            for y in 0..source.len(a) as u32 {
                let v = || (cat.object_name(a).to_string(), source.name(a, y).to_string());
                match self.map[a.index()].get(y as usize) {
                    None | Some(&UNDEFINED) => {
                        ok = false;
                        let (object, element) = v();
                        report.push(Violation::MapNotTotal { object, element });
                    }
                    Some(&x) if x as usize >= target.len(a) => {
                        ok = false;
                        let (object, element) = v();
                        report.push(Violation::MapOutOfRange { object, element });
                    }
                    _ => {}
                }
            }
        }
        if !ok {
            return report.finish();
        }
        for f in cat.morphisms() {
            let (a, b) = (cat.cod(f), cat.dom(f));
            for y in 0..source.len(a) as u32 {
                if target.restrict(self.apply(a, y), f) != self.apply(b, source.restrict(y, f)) {
                    report.push(Violation::Naturality {
                        object: cat.object_name(a).to_string(),
                        element: source.name(a, y).to_string(),
                        morphism: cat.morphism_name(f).to_string(),
                    });
                }
            }
        }
        report.finish()
    }
}

/// All natural maps `source -> target`, in lexicographic order of their
/// tables (objects in id order, elements in index order).
pub fn natural_transformations(
    cat: &FiniteCategory,
    source: &Presheaf,
    target: &Presheaf,
) -> Result<Vec<PresheafMorphism>, PresheafError> {
    let mut offset = Vec::with_capacity(cat.num_objects());
    let mut domains = Vec::new();
    for a in cat.objects() {
        offset.push(domains.len());
        domains.extend(core::iter::repeat(target.len(a) as u32).take(source.len(a)));
    }
    let mut csp = FunctionalCsp::new(domains);
    for f in cat.morphisms() {
        let (a, b) = (cat.cod(f), cat.dom(f));
        for y in 0..source.len(a) as u32 {
            let u = offset[a.index()] + y as usize;
            let v = offset[b.index()] + source.restrict(y, f) as usize;
            csp.link(u, v, target.restriction_table(f).to_vec());
        }
    }
    let sols = csp.solve_all(ENUMERATION_LIMIT).map_err(|_| PresheafError::TooManySolutions)?;
    Ok(sols
        .into_iter()
        .map(|flat| PresheafMorphism {
            map: cat
                .objects()
                .map(|a| {
                    let o = offset[a.index()];
                    flat[o..o + source.len(a)].to_vec()
                })
                .collect(),
        })
        .collect())
}

/// Elements `x_f ∈ X(dom f)` for `f` in a sieve with `x_f·g = x_{fg}`;
/// `values` follows the sorted member order of the sieve.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CompatibleFamily {
    pub sieve: Sieve,
    pub values: Vec<u32>,
}

impl CompatibleFamily {
    pub fn value(&self, f: MorId) -> Option<u32> {
        self.sieve.members().binary_search(&f).ok().map(|i| self.values[i])
    }
}

/// Every compatible family of `x` over the sieve, duplicate-free and
/// lexicographically ordered.
pub fn enumerate_compatible_families(
    cat: &FiniteCategory,
    x: &Presheaf,
    sieve: &Sieve,
) -> Result<Vec<CompatibleFamily>, PresheafError> {
    let members = sieve.members();
    let mut csp =
        FunctionalCsp::new(members.iter().map(|&f| x.len(cat.dom(f)) as u32).collect());
    for (i, &f) in members.iter().enumerate() {
        for &g in cat.arrows_into(cat.dom(f)) {
            let fg = cat.comp(f, g);
            let j = members.binary_search(&fg).expect("sieve closed under precomposition");
            csp.link(i, j, x.restriction_table(g).to_vec());
        }
    }
    let sols = csp.solve_all(ENUMERATION_LIMIT).map_err(|_| PresheafError::TooManySolutions)?;
    Ok(sols.into_iter().map(|values| CompatibleFamily { sieve: sieve.clone(), values }).collect())
}

/// Elements `x ∈ X(a)` whose restrictions reproduce the family.
pub fn amalgamations(x: &Presheaf, family: &CompatibleFamily) -> Vec<u32> {
    let a = family.sieve.target();
    (0..x.len(a) as u32)
        .filter(|&e| {
            family.sieve.members().iter().zip(&family.values).all(|(&f, &v)| x.restrict(e, f) == v)
        })
        .collect()
}

/// Ordered so that `Sheaf > Separated > Neither`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SheafClass {
    Neither,
    Separated,
    Sheaf,
}

impl SheafClass {
    pub fn is_separated(self) -> bool {
        self >= SheafClass::Separated
    }

    pub fn is_sheaf(self) -> bool {
        self == SheafClass::Sheaf
    }
}

/// Checks every compatible family over every covering sieve for its
/// number of amalgamations.
pub fn classify_sheaf(site: &FiniteSite, x: &Presheaf) -> Result<SheafClass, PresheafError> {
    let cat = site.category();
    let mut separated = true;
    let mut sheaf = true;
    for a in cat.objects() {
        for s in site.covering(a) {
            // Families actually induced by elements, counted with multiplicity.
            let mut induced: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
            for e in 0..x.len(a) as u32 {
                *induced.entry(x.family_of(e, s).values).or_default() += 1;
            }
            if induced.values().any(|&n| n > 1) {
                separated = false;
            }
            if sheaf {
                let all = enumerate_compatible_families(cat, x, s)?;
                if all.iter().any(|fam| !induced.contains_key(&fam.values)) {
                    sheaf = false;
                }
            }
            if !separated {
                return Ok(SheafClass::Neither);
            }
        }
    }
    Ok(if sheaf { SheafClass::Sheaf } else { SheafClass::Separated })
}
