//! Sheafification by the plus construction, applied twice.
//!
//! `X⁺(a)` is the set of compatible families over covering sieves on `a`,
//! two families being identified when they agree on some covering sieve
//! contained in both index sieves. Each class is named by its least
//! representative, so identical inputs give identical element names.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::presheaf::{enumerate_compatible_families, Presheaf, PresheafError, PresheafMorphism};
use crate::site::{FiniteSite, ObjId, Sieve};

/// One application of `(·)⁺` together with the canonical map `X -> X⁺`.
#[derive(Clone, Debug)]
pub struct PlusConstruction {
    pub presheaf: Presheaf,
    pub unit: PresheafMorphism,
}

#[derive(Clone, Debug)]
pub struct Sheafification {
    pub first: PlusConstruction,
    pub second: PlusConstruction,
    /// The canonical map `X -> X⁺⁺`.
    pub unit: PresheafMorphism,
}

impl Sheafification {
    pub fn sheaf(&self) -> &Presheaf {
        &self.second.presheaf
    }
}

type Entry = (u32, Vec<u32>);

fn agree_on_cover(site: &FiniteSite, a: ObjId, s: &Sieve, v: &[u32], t: &Sieve, w: &[u32]) -> bool {
    site.covering(a).iter().any(|r| {
        r.members().iter().all(|&f| match (s.members().binary_search(&f), t.members().binary_search(&f)) {
            (Ok(i), Ok(j)) => v[i] == w[j],
            _ => false,
        })
    })
}

pub fn plus_construction(site: &FiniteSite, x: &Presheaf) -> Result<PlusConstruction, PresheafError> {
    let cat = site.category();
    // Per object: class index of every entry, and the representative entry of each class.
    let mut class_of: Vec<BTreeMap<Entry, u32>> = Vec::new();
    let mut reps: Vec<Vec<Entry>> = Vec::new();
    let mut names: Vec<Vec<String>> = Vec::new();
    for a in cat.objects() {
        let cov = site.covering(a);
        let mut entries: Vec<Entry> = Vec::new();
        for (si, s) in cov.iter().enumerate() {
            for fam in enumerate_compatible_families(cat, x, s)? {
                entries.push((si as u32, fam.values));
            }
        }
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for (i, (si, v)) in entries.iter().enumerate() {
            let s = &cov[*si as usize];
            let found = classes.iter_mut().find(|c| {
                let (ti, w) = &entries[c[0]];
                agree_on_cover(site, a, s, v, &cov[*ti as usize], w)
            });
            match found {
                Some(c) => c.push(i),
                None => classes.push(alloc::vec![i]),
            }
        }
        let mut named: Vec<(String, usize)> = classes
            .iter()
            .enumerate()
            .map(|(ci, c)| {
                let (si, v) = &entries[c[0]];
                let s = &cov[*si as usize];
                let sieve: Vec<&str> = s.members().iter().map(|&f| cat.morphism_name(f)).collect();
                let vals: Vec<String> = s
                    .members()
                    .iter()
                    .zip(v)
                    .map(|(&f, &e)| format!("{}={}", cat.morphism_name(f), x.name(cat.dom(f), e)))
                    .collect();
                (format!("[{}]({})", sieve.join(","), vals.join(",")), ci)
            })
            .collect();
        named.sort();
        let mut renumber = alloc::vec![0u32; classes.len()];
        for (new, (_, old)) in named.iter().enumerate() {
            renumber[*old] = new as u32;
        }
        let mut map = BTreeMap::new();
        for (ci, c) in classes.iter().enumerate() {
            for &i in c {
                map.insert(entries[i].clone(), renumber[ci]);
            }
        }
        reps.push(named.iter().map(|(_, old)| entries[classes[*old][0]].clone()).collect());
        names.push(named.into_iter().map(|(n, _)| n).collect());
        class_of.push(map);
    }
    let restriction: Vec<Vec<u32>> = cat
        .morphisms()
        .map(|f| {
            let (a, b) = (cat.cod(f), cat.dom(f));
            reps[a.index()]
                .iter()
                .map(|(si, v)| {
                    let s = &site.covering(a)[*si as usize];
                    let pi = site.pullback_index(f, *si);
                    let p = &site.covering(b)[pi as usize];
                    let w: Vec<u32> = p
                        .members()
                        .iter()
                        .map(|&g| {
                            let fg = cat.comp(f, g);
                            v[s.members().binary_search(&fg).expect("f∘g ∈ S")]
                        })
                        .collect();
                    class_of[b.index()][&(pi, w)]
                })
                .collect()
        })
        .collect();
    let unit = cat
        .objects()
        .map(|a| {
            let mi = site.maximal_index(a);
            let m = &site.covering(a)[mi as usize];
            (0..x.len(a) as u32)
                .map(|e| class_of[a.index()][&(mi, x.family_of(e, m).values)])
                .collect()
        })
        .collect();
    Ok(PlusConstruction {
        presheaf: Presheaf::from_raw(names, restriction),
        unit: PresheafMorphism::from_raw(unit),
    })
}

/// `X⁺⁺` with the canonical map `X -> X⁺⁺`.
pub fn sheafify(site: &FiniteSite, x: &Presheaf) -> Result<Sheafification, PresheafError> {
    let first = plus_construction(site, x)?;
    let second = plus_construction(site, &first.presheaf)?;
    let unit = second.unit.after(&first.unit);
    Ok(Sheafification { first, second, unit })
}

/// The initial sheaf: the sheafification of the empty presheaf. It has one
/// element at `a` when the empty sieve covers `a` and none otherwise.
pub fn initial_sheaf(site: &FiniteSite) -> Presheaf {
    let empty = Presheaf::empty(site.category());
    sheafify(site, &empty).expect("families of the empty presheaf are few").second.presheaf
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::presheaf::{classify_sheaf, SheafClass};

    #[test]
    fn initial_sheaf_sizes() {
        let a = fixtures::fixture_a();
        assert_eq!(initial_sheaf(&a).total_len(), 0);
        let b = fixtures::fixture_b();
        assert_eq!(initial_sheaf(&b).len(ObjId(0)), 1);
        let c = fixtures::fixture_c();
        assert_eq!(initial_sheaf(&c).total_len(), 0);
    }

    #[test]
    fn sheafify_separated_presheaf_on_b() {
        let b = fixtures::fixture_b();
        let two = Presheaf::constant(b.category(), &["p", "q"]);
        let sh = sheafify(&b, &two).unwrap();
        assert_eq!(sh.sheaf().len(ObjId(0)), 1);
        assert_eq!(classify_sheaf(&b, sh.sheaf()).unwrap(), SheafClass::Sheaf);
    }

    #[test]
    fn sheaf_input_is_fixed_up_to_iso() {
        let c = fixtures::fixture_c();
        let x = Presheaf::constant(c.category(), &["p", "q", "r"]);
        let sh = sheafify(&c, &x).unwrap();
        assert!(sh.unit.is_iso(&x, sh.sheaf()));
        assert!(sh.unit.validate(c.category(), &x, sh.sheaf()).is_valid());
    }

    #[test]
    fn names_are_deterministic() {
        let b = fixtures::fixture_b();
        let s1 = initial_sheaf(&b);
        let s2 = initial_sheaf(&b);
        assert_eq!(s1, s2);
    }
}
