//! Categories, sieves and topologies against enumeration.

mod common;

use std::collections::BTreeSet;

use common::*;
use sheaf_wtypes_core::fixtures;
use sheaf_wtypes_core::site::validate_topology;
use sheaf_wtypes_core::{FiniteCategory, MorId, Sieve, Topology};

fn kinds(r: &sheaf_wtypes_core::ValidationReport) -> BTreeSet<&'static str> {
    r.violations.iter().map(|v| v.kind()).collect()
}

#[test]
fn composition_examples() {
    let c = fixtures::fixture_c_category();
    let id_a = mor(&c, "id_a");
    assert_eq!(c.compose(id_a, id_a).unwrap(), id_a);
    assert_eq!(c.compose(id_a, mor(&c, "m")).unwrap(), mor(&c, "m"));
    assert!(c.compose(mor(&c, "m"), id_a).is_err());
}

#[test]
fn small_categories_are_associative() {
    for (name, cat) in small_categories() {
        assert!(cat.validate().is_valid(), "{name}: {:?}", cat.validate());
        let comp = |f: MorId, g: MorId| cat.compose(f, g).ok();
        for f in cat.morphisms() {
            for g in cat.morphisms() {
                for h in cat.morphisms() {
                    let left = comp(f, g).and_then(|fg| comp(fg, h));
                    let right = comp(g, h).and_then(|gh| comp(f, gh));
                    if cat.cod(h) == cat.dom(g) && cat.cod(g) == cat.dom(f) {
                        assert_eq!(left, right, "{name}");
                        assert!(left.is_some());
                    }
                }
            }
        }
    }
}

fn c_with(composition: &[(&str, &str, &str)]) -> FiniteCategory {
    FiniteCategory::from_tables(
        &["a", "b"],
        &[("id_a", "a", "a"), ("id_b", "b", "b"), ("m", "b", "a")],
        &[("a", "id_a"), ("b", "id_b")],
        composition,
    )
    .unwrap()
}

#[test]
fn broken_composition_tables() {
    let full = [("id_a", "id_a", "id_a"), ("id_b", "id_b", "id_b"), ("id_a", "m", "m")];
    let missing = c_with(&full);
    assert!(kinds(&missing.validate()).contains("composition-not-total"));
    let mut wrong = full.to_vec();
    wrong.push(("m", "id_b", "id_a"));
    let k = kinds(&c_with(&wrong).validate());
    assert!(k.contains("unit-law"), "{k:?}");
    assert!(FiniteCategory::empty().validate().is_valid());
}

#[test]
fn pullback_examples() {
    let c = fixtures::fixture_c_category();
    let m = mor(&c, "m");
    let s = sieve(&c, "a", &["m"]);
    assert_eq!(c.pullback_sieve(m, &s).unwrap(), c.maximal_sieve(obj(&c, "b")));
    assert_eq!(c.pullback_sieve(mor(&c, "id_a"), &s).unwrap(), s);
    assert!(c.pullback_sieve(m, &sieve(&c, "b", &["id_b"])).is_err());
}

#[test]
fn pullbacks_match_the_definition() {
    for (name, cat) in small_categories() {
        for a in cat.objects() {
            for s in brute_sieves(&cat, a) {
                let sv = Sieve::new(a, s.iter().copied().collect());
                for &f in cat.arrows_into(a) {
                    let p = cat.pullback_sieve(f, &sv).unwrap();
                    assert_eq!(to_set(&p), brute_pullback(&cat, f, &s), "{name}");
                    assert!(cat.is_sieve(&p));
                    if s.contains(&f) {
                        assert_eq!(p, cat.maximal_sieve(cat.dom(f)));
                    }
                    for &g in cat.arrows_into(cat.dom(f)) {
                        let twice = cat.pullback_sieve(g, &p).unwrap();
                        let once = cat.pullback_sieve(cat.comp(f, g), &sv).unwrap();
                        assert_eq!(twice, once, "{name}");
                    }
                }
            }
        }
    }
}

#[test]
fn sieve_lists_match_enumeration() {
    for (name, cat) in small_categories() {
        for a in cat.objects() {
            let lib: BTreeSet<BTreeSet<MorId>> = cat.all_sieves(a).iter().map(to_set).collect();
            let brute: BTreeSet<BTreeSet<MorId>> = brute_sieves(&cat, a).into_iter().collect();
            assert_eq!(lib, brute, "{name}");
        }
    }
}

#[test]
fn largest_sieve_within_matches_enumeration() {
    for (name, cat) in small_categories() {
        for a in cat.objects() {
            let arrows: Vec<MorId> = cat.arrows_into(a).to_vec();
            let sieves = brute_sieves(&cat, a);
            for mask in 0u32..(1 << arrows.len()) {
                let set: Vec<MorId> =
                    arrows.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &f)| f).collect();
                let inside: Vec<&BTreeSet<MorId>> =
                    sieves.iter().filter(|s| s.iter().all(|f| set.contains(f))).collect();
                let largest = inside.iter().max_by_key(|s| s.len()).unwrap();
                // Sieves are closed under union, so the largest one contains the rest.
                assert!(inside.iter().all(|s| s.is_subset(largest)));
                let got = cat.largest_sieve_within(a, &set).unwrap();
                assert_eq!(&to_set(&got), *largest, "{name} on {}", cat.object_name(a));
            }
        }
    }
}

#[test]
fn largest_sieve_examples() {
    let c = fixtures::fixture_c_category();
    let a = obj(&c, "a");
    let all = c.arrows_into(a).to_vec();
    assert_eq!(c.largest_sieve_within(a, &all).unwrap(), c.maximal_sieve(a));
    assert!(c.largest_sieve_within(a, &[]).unwrap().is_empty());
    let got = c.largest_sieve_within(a, &[mor(&c, "m"), mor(&c, "id_a")]).unwrap();
    assert_eq!(got, c.maximal_sieve(a));
    let got = c.largest_sieve_within(a, &[mor(&c, "id_a")]).unwrap();
    assert!(got.is_empty());
    assert!(c.largest_sieve_within(a, &[mor(&c, "id_b")]).is_err());
}

#[test]
fn shipped_topologies_are_valid() {
    for site in [fixtures::fixture_a(), fixtures::fixture_b(), fixtures::fixture_c()] {
        assert!(site.validate().is_valid(), "{:?}", site.validate());
    }
    for (name, cat) in small_categories() {
        assert!(validate_topology(&cat, &Topology::trivial(&cat)).is_valid(), "{name}");
    }
}

/// Every topology on small categories: the validator names exactly the
/// axioms that enumeration finds broken.
#[test]
fn validator_agrees_with_enumeration_on_every_topology() {
    for (name, cat) in small_categories() {
        let sieves: Vec<Vec<BTreeSet<MorId>>> = cat.objects().map(|a| brute_sieves(&cat, a)).collect();
        let total: usize = sieves.iter().map(Vec::len).sum();
        if total > 14 {
            continue;
        }
        for mask in 0u64..(1 << total) {
            let mut bit = 0;
            let cov: Vec<Vec<BTreeSet<MorId>>> = sieves
                .iter()
                .map(|list| {
                    list.iter()
                        .filter(|_| {
                            bit += 1;
                            mask >> (bit - 1) & 1 == 1
                        })
                        .cloned()
                        .collect()
                })
                .collect();
            let expected = brute_axioms(&cat, &cov);
            let got = kinds(&validate_topology(&cat, &topology(&cat, &cov)));
            assert_eq!(got, expected, "{name} mask {mask:b}");
        }
    }
}

fn cov_of(cat: &FiniteCategory, spec: &[(&str, &[&[&str]])]) -> Topology {
    Topology::new(
        cat.objects()
            .map(|a| {
                let entry = spec.iter().find(|(o, _)| *o == cat.object_name(a));
                entry.map(|(o, list)| list.iter().map(|s| sieve(cat, o, s)).collect()).unwrap_or_default()
            })
            .collect(),
    )
}

#[test]
fn single_axiom_mutations_are_named() {
    let b = fixtures::fixture_b();
    let point = b.category();
    let star = obj(point, "*");
    let no_max = Topology::new(vec![vec![Sieve::empty(star)]]);
    let k = kinds(&validate_topology(point, &no_max));
    assert!(k.contains("maximal-sieve"), "{k:?}");

    // On the chain, {k} covering a pulls back along m to {n}, which does not cover b.
    let chain = chain3();
    let stability = cov_of(
        &chain,
        &[("a", &[&["id_a", "k", "m"], &["k"], &["k", "m"]]), ("b", &[&["id_b", "n"]]), ("c", &[&["id_c"]])],
    );
    assert_eq!(kinds(&validate_topology(&chain, &stability)), BTreeSet::from(["stability"]));

    // {m, k} covers a and {k} is covering-locally-true on it, but {k} does not cover.
    let local = cov_of(
        &chain,
        &[("a", &[&["id_a", "k", "m"], &["k", "m"]]), ("b", &[&["id_b", "n"], &["n"]]), ("c", &[&["id_c"]])],
    );
    assert_eq!(kinds(&validate_topology(&chain, &local)), BTreeSet::from(["local-character"]));
}

#[test]
fn superset_closure_holds_on_valid_topologies() {
    for (name, cat) in small_categories() {
        let sieves: Vec<Vec<BTreeSet<MorId>>> = cat.objects().map(|a| brute_sieves(&cat, a)).collect();
        let total: usize = sieves.iter().map(Vec::len).sum();
        if total > 14 {
            continue;
        }
        for mask in 0u64..(1 << total) {
            let mut bit = 0;
            let cov: Vec<Vec<BTreeSet<MorId>>> = sieves
                .iter()
                .map(|list| {
                    list.iter()
                        .filter(|_| {
                            bit += 1;
                            mask >> (bit - 1) & 1 == 1
                        })
                        .cloned()
                        .collect()
                })
                .collect();
            if !validate_topology(&cat, &topology(&cat, &cov)).is_valid() {
                continue;
            }
            for a in cat.objects() {
                for s in &cov[a.index()] {
                    for r in &sieves[a.index()] {
                        if s.is_subset(r) {
                            assert!(cov[a.index()].contains(r), "{name}");
                        }
                    }
                }
            }
        }
    }
}
