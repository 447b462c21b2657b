//! Seeded random small sites, sheaves and sheaf morphisms.
//!
//! Categories are small posets or one of a few non-thin shapes. A topology
//! is generated by picking some sieves and closing under stability and
//! local character. Presheaves are random restriction tables found by
//! backtracking, then sheafified; morphisms are drawn from the enumerated
//! natural transformations.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sheaf_wtypes_core::{
    natural_transformations, sheafify, FiniteCategory, FiniteSite, ObjId, Polynomial, Presheaf,
    PresheafMorphism, QuotientSheaf, Sieve, Topology, TreeStore, WInstance,
};

pub const MAX_OBJECTS: usize = 3;
pub const MAX_MORPHISMS: usize = 8;
pub const MAX_ELEMENTS: usize = 3;

fn build(
    objects: &[&str],
    arrows: &[(&str, &str, &str)],
    composition: &[(&str, &str, &str)],
) -> FiniteCategory {
    let mut morphisms: Vec<(String, String, String)> =
        objects.iter().map(|o| (format!("id_{o}"), o.to_string(), o.to_string())).collect();
    morphisms.extend(arrows.iter().map(|(n, d, c)| (n.to_string(), d.to_string(), c.to_string())));
    let mut comp: Vec<(String, String, String)> = Vec::new();
    for (name, dom, cod) in &morphisms {
        comp.push((format!("id_{cod}"), name.clone(), name.clone()));
        if dom != cod || !name.starts_with("id_") {
            comp.push((name.clone(), format!("id_{dom}"), name.clone()));
        }
    }
    comp.extend(composition.iter().map(|(f, g, h)| (f.to_string(), g.to_string(), h.to_string())));
    comp.sort();
    comp.dedup();
    let m: Vec<(&str, &str, &str)> =
        morphisms.iter().map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str())).collect();
    let ids: Vec<(String, String)> = objects.iter().map(|o| (o.to_string(), format!("id_{o}"))).collect();
    let ids: Vec<(&str, &str)> = ids.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let c: Vec<(&str, &str, &str)> = comp.iter().map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str())).collect();
    FiniteCategory::from_tables(objects, &m, &ids, &c).expect("template category")
}

/// A poset on up to three objects, with an arrow `i -> j` for `i ≤ j`.
fn random_poset(rng: &mut impl Rng) -> FiniteCategory {
    let n = rng.random_range(1..=MAX_OBJECTS);
    let names = ["o0", "o1", "o2"];
    let mut le = [[false; 3]; 3];
    for i in 0..n {
        le[i][i] = true;
        for j in i + 1..n {
            le[i][j] = rng.random_bool(0.6);
        }
    }
    // Transitive closure.
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if le[i][k] && le[k][j] {
                    le[i][j] = true;
                }
            }
        }
    }
    let arrow = |i: usize, j: usize| -> String {
        if i == j {
            format!("id_{}", names[i])
        } else {
            format!("p{i}{j}")
        }
    };
    let mut arrows = Vec::new();
    let mut comp = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && le[i][j] {
                arrows.push((arrow(i, j), names[i].to_string(), names[j].to_string()));
            }
            for k in 0..n {
                // (j -> k) ∘ (i -> j) = (i -> k)
                if i != j && j != k && le[i][j] && le[j][k] {
                    comp.push((arrow(j, k), arrow(i, j), arrow(i, k)));
                }
            }
        }
    }
    let a: Vec<(&str, &str, &str)> = arrows.iter().map(|(x, y, z)| (x.as_str(), y.as_str(), z.as_str())).collect();
    let c: Vec<(&str, &str, &str)> = comp.iter().map(|(x, y, z)| (x.as_str(), y.as_str(), z.as_str())).collect();
    build(&names[..n], &a, &c)
}

/// Small categories that are not preorders.
fn template(k: usize) -> FiniteCategory {
    match k {
        // An idempotent `e = e∘e`.
        0 => build(&["a"], &[("e", "a", "a")], &[("e", "e", "e")]),
        // An involution `s∘s = id`.
        1 => build(&["a"], &[("s", "a", "a")], &[("s", "s", "id_a")]),
        // Two parallel arrows.
        2 => build(&["a", "b"], &[("m", "b", "a"), ("n", "b", "a")], &[]),
        // An idempotent on `b` absorbed by `m: b -> a`.
        3 => build(&["a", "b"], &[("e", "b", "b"), ("m", "b", "a")], &[("e", "e", "e"), ("m", "e", "m")]),
        // An idempotent on `b` and two arrows into `a` it swaps into each other.
        _ => build(
            &["a", "b"],
            &[("e", "b", "b"), ("m", "b", "a"), ("n", "b", "a")],
            &[("e", "e", "e"), ("m", "e", "n"), ("n", "e", "n")],
        ),
    }
}

pub fn random_category(rng: &mut impl Rng) -> FiniteCategory {
    if rng.random_bool(0.6) {
        random_poset(rng)
    } else {
        template(rng.random_range(0..5))
    }
}

/// Closes a family of sieves under stability and local character, which
/// yields a Grothendieck topology once every maximal sieve is included.
pub fn close_topology(cat: &FiniteCategory, mut cov: Vec<Vec<Sieve>>) -> Topology {
    let sieves: Vec<Vec<Sieve>> = cat.objects().map(|a| cat.all_sieves(a)).collect();
    for a in cat.objects() {
        cov[a.index()].push(cat.maximal_sieve(a));
    }
    loop {
        let mut changed = false;
        for f in cat.morphisms() {
            let (a, b) = (cat.cod(f), cat.dom(f));
            for s in cov[a.index()].clone() {
                let p = cat.pullback_sieve(f, &s).expect("sieve on cod f");
                if !cov[b.index()].contains(&p) {
                    cov[b.index()].push(p);
                    changed = true;
                }
            }
        }
        for a in cat.objects() {
            for r in &sieves[a.index()] {
                if cov[a.index()].contains(r) {
                    continue;
                }
                let local = cov[a.index()].iter().any(|s| {
                    s.members().iter().all(|&f| {
                        let p = cat.pullback_sieve(f, r).expect("sieve on cod f");
                        cov[cat.dom(f).index()].contains(&p)
                    })
                });
                if local {
                    cov[a.index()].push(r.clone());
                    changed = true;
                }
            }
        }
        if !changed {
            return Topology::new(cov);
        }
    }
}

pub fn random_topology(rng: &mut impl Rng, cat: &FiniteCategory) -> Topology {
    let p = rng.random_range(0.0..0.5);
    let seeds = cat
        .objects()
        .map(|a| cat.all_sieves(a).into_iter().filter(|_| rng.random_bool(p)).collect())
        .collect();
    close_topology(cat, seeds)
}

/// A random presheaf with at most `max` elements per object, or `None`
/// if the chosen sizes admit no restriction maps.
pub fn random_presheaf(rng: &mut impl Rng, cat: &FiniteCategory, max: usize) -> Option<Presheaf> {
    let sizes: Vec<usize> = cat.objects().map(|_| rng.random_range(0..=max)).collect();
    // Entries (f, x) for non-identity f, to be filled by backtracking.
    let mut entries = Vec::new();
    for f in cat.morphisms() {
        if cat.try_identity(cat.cod(f)) != Some(f) {
            for x in 0..sizes[cat.cod(f).index()] {
                entries.push((f, x));
            }
        }
    }
    let mut table: Vec<Vec<u32>> = cat
        .morphisms()
        .map(|f| {
            let n = sizes[cat.cod(f).index()];
            if cat.try_identity(cat.cod(f)) == Some(f) {
                (0..n as u32).collect()
            } else {
                vec![u32::MAX; n]
            }
        })
        .collect();
    let mut choices: Vec<Vec<u32>> = entries
        .iter()
        .map(|&(f, _)| {
            let mut c: Vec<u32> = (0..sizes[cat.dom(f).index()] as u32).collect();
            c.shuffle(rng);
            c
        })
        .collect();
    let consistent = |table: &Vec<Vec<u32>>| -> bool {
        for f in cat.morphisms() {
            for g in cat.arrows_into(cat.dom(f)) {
                let fg = cat.comp(f, *g);
                for x in 0..sizes[cat.cod(f).index()] {
                    let xf = table[f.index()][x];
                    let xfg = table[fg.index()][x];
                    if xf == u32::MAX || xfg == u32::MAX {
                        continue;
                    }
                    let xfg2 = table[g.index()][xf as usize];
                    if xfg2 != u32::MAX && xfg2 != xfg {
                        return false;
                    }
                }
            }
        }
        true
    };
    let mut pos = vec![0usize; entries.len()];
    let mut i = 0usize;
    let mut steps = 0usize;
    while i < entries.len() {
        steps += 1;
        if steps > 100_000 {
            return None;
        }
        let (f, x) = entries[i];
        if pos[i] < choices[i].len() {
            table[f.index()][x] = choices[i][pos[i]];
            pos[i] += 1;
            if consistent(&table) {
                i += 1;
            }
        } else {
            table[f.index()][x] = u32::MAX;
            pos[i] = 0;
            choices[i].shuffle(rng);
            if i == 0 {
                return None;
            }
            i -= 1;
            let (f, x) = entries[i];
            table[f.index()][x] = u32::MAX;
        }
    }
    let names = cat
        .objects()
        .map(|a| (0..sizes[a.index()]).map(|k| format!("{}{k}", cat.object_name(a))).collect())
        .collect();
    Some(Presheaf::from_raw(names, table))
}

/// A random sheaf with at most `max` elements per object.
pub fn random_sheaf(rng: &mut impl Rng, site: &FiniteSite, max: usize) -> Presheaf {
    let cat = site.category();
    for _ in 0..64 {
        let Some(p) = random_presheaf(rng, cat, max) else { continue };
        let Ok(sh) = sheafify(site, &p) else { continue };
        let sheaf = sh.sheaf();
        if cat.objects().all(|a| sheaf.len(a) <= max) {
            return rename(cat, sheaf);
        }
    }
    sheafify(site, &Presheaf::terminal(cat)).expect("terminal").sheaf().clone()
}

// Sheafified element names nest quickly; short names keep reports legible.
fn rename(cat: &FiniteCategory, p: &Presheaf) -> Presheaf {
    let names = cat
        .objects()
        .map(|a| (0..p.len(a)).map(|k| format!("{}{k}", cat.object_name(a))).collect())
        .collect();
    let table = cat.morphisms().map(|f| p.restriction_table(f).to_vec()).collect();
    Presheaf::from_raw(names, table)
}

/// A complete random instance for a seed.
#[derive(Clone, Debug)]
pub struct RandomInstance {
    pub seed: u64,
    pub site: FiniteSite,
    pub poly: Polynomial,
}

impl RandomInstance {
    pub fn instance(&self) -> WInstance {
        WInstance::new(self.site.clone(), self.poly.clone()).expect("generated instance is valid")
    }
}

pub fn random_site(rng: &mut impl Rng) -> FiniteSite {
    let cat = random_category(rng);
    debug_assert!(cat.num_objects() <= MAX_OBJECTS && cat.num_morphisms() <= MAX_MORPHISMS);
    let top = random_topology(rng, &cat);
    FiniteSite::new(cat, top)
}

/// A random morphism `F: Y -> X` between sheaves on `site`.
pub fn random_polynomial(rng: &mut impl Rng, site: &FiniteSite) -> Polynomial {
    let cat = site.category();
    loop {
        let x = random_sheaf(rng, site, MAX_ELEMENTS);
        let y = random_sheaf(rng, site, MAX_ELEMENTS);
        let Ok(maps) = natural_transformations(cat, &y, &x) else { continue };
        if maps.is_empty() {
            continue;
        }
        let f: PresheafMorphism = maps[rng.random_range(0..maps.len())].clone();
        return Polynomial::new(x, y, f);
    }
}

pub fn random_instance(seed: u64) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let site = random_site(&mut rng);
    let poly = random_polynomial(&mut rng, &site);
    RandomInstance { seed, site, poly }
}

/// Random instance on a fixed site.
pub fn random_instance_on(site: &FiniteSite, seed: u64) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let poly = random_polynomial(&mut rng, site);
    RandomInstance { seed, site: site.clone(), poly }
}

/// Largest `W̄` (total classes at the probe depth) a tractable instance may have.
pub const TRACTABLE_CLASSES: usize = 300;
const TRACTABLE_TREES: usize = 200_000;

/// Random instance whose `W̄` at `depth` fits in [`TRACTABLE_CLASSES`]
/// classes. Seeds whose instance is too big are replaced by derived seeds,
/// deterministically, so the result still depends only on `seed`.
pub fn tractable_instance(seed: u64, depth: u32) -> RandomInstance {
    let mut sub = seed;
    loop {
        let mut r = random_instance(sub);
        let inst = r.instance();
        let mut store = TreeStore::with_budget(&inst, TRACTABLE_TREES);
        if let Ok(w) = QuotientSheaf::build(&mut store, depth) {
            if w.total_len() <= TRACTABLE_CLASSES {
                r.seed = seed;
                return r;
            }
        }
        sub = sub.wrapping_add(0x9E37_79B9_7F4A_7C15);
    }
}

pub fn object(cat: &FiniteCategory, k: usize) -> ObjId {
    cat.objects().nth(k).expect("object index")
}
