//! Executable checks that `W̄` is a separated presheaf, a sheaf, a
//! `P_F`-algebra and the initial one, on a computed finite instance.
//!
//! Each check returns a [`VerificationReport`] with failure witnesses.
//! Checks quantifying over all of `W̄` or `P_F W̄` report inconclusive when
//! `W̄` was cut off by the depth bound.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::oracle::{verify_iso, Carrier};
use crate::polynomial::{natural_fiber_maps, restrict_fiber, WInstance};
use crate::presheaf::{enumerate_compatible_families, PresheafError};
use crate::report::VerificationReport;
use crate::site::{ObjId, Sieve};
use crate::tree::{TreeId, TreeStore};
use crate::wbar::QuotientSheaf;

/// Largest number of classes for which every sub-presheaf is enumerated.
pub const EXHAUSTIVE_SUBSHEAF_LIMIT: usize = 16;

/// An element `(x, t)` of `P_F W̄(a)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PfClassElement {
    pub obj: ObjId,
    pub base: u32,
    pub fiber: Vec<u32>,
}

/// All of `P_F W̄(a)` for every `a`, in canonical order.
pub fn pf_wbar(inst: &WInstance, w: &QuotientSheaf) -> Result<Vec<PfClassElement>, PresheafError> {
    let mut out = Vec::new();
    for a in inst.site().category().objects() {
        for x in 0..inst.x().len(a) as u32 {
            let fibers = natural_fiber_maps(
                inst,
                |b| w.len(b) as u32,
                |g| w.restriction_table(g).to_vec(),
                a,
                x,
            )?;
            out.extend(fibers.into_iter().map(|fiber| PfClassElement { obj: a, base: x, fiber }));
        }
    }
    Ok(out)
}

fn class_name(store: &TreeStore<'_>, a: ObjId, c: u32) -> String {
    format!("{}#{c}", store.instance().site().category().object_name(a))
}

fn sieve_name(store: &TreeStore<'_>, s: &Sieve) -> String {
    store.instance().site().category().sieve_label(s)
}

/// Every stored member is hereditarily composable and natural, and class
/// restriction does not depend on the member: `[v]·f = [v·f]`.
pub fn check_quotient(store: &mut TreeStore<'_>, w: &QuotientSheaf) -> VerificationReport {
    let mut report = VerificationReport::new("quotient");
    let cat = store.instance().site().category();
    for a in cat.objects() {
        for (ci, class) in w.classes(a).iter().enumerate() {
            for &v in &class.members {
                report.cases += 1;
                if !store.is_hereditary(v) {
                    report.fail(format!("member of {} is not hereditary", class_name(store, a, ci as u32)));
                }
                for &f in cat.arrows_into(a) {
                    report.cases += 1;
                    let r = store.restrict_unchecked(v, f);
                    let expected = w.restrict_class(ci as u32, f);
                    let rep = w.classes(cat.dom(f))[expected as usize].rep;
                    if !store.equiv(r, rep) {
                        report.fail(format!(
                            "restriction of {} along {} depends on the member",
                            class_name(store, a, ci as u32),
                            cat.morphism_name(f)
                        ));
                    }
                }
            }
        }
    }
    report
}

// The sieve from the separation argument: arrows `g ∈ S ∩ S'` such that
// `w(g∘h, y) ~ w'(g∘h, y)` for every `h` into `dom g` and every `y`.
fn separation_sieve(store: &mut TreeStore<'_>, v: TreeId, v2: TreeId) -> Sieve {
    let inst = store.instance();
    let cat = inst.site().category();
    let (l, l2) = (store.label(v), store.label(v2));
    let both = inst.sieve(l).intersection(inst.sieve(l2));
    let mut members = Vec::new();
    for &g in both.members() {
        let ok = cat.arrows_into(cat.dom(g)).iter().all(|&h| {
            let gh = cat.comp(g, h);
            inst.fiber(gh, l.elem).into_iter().all(|y| {
                let e = crate::polynomial::Edge { mor: gh, elem: y };
                match (store.child(v, e), store.child(v2, e)) {
                    (Some(c), Some(c2)) => store.equiv(c, c2),
                    _ => false,
                }
            })
        });
        if ok {
            members.push(g);
        }
    }
    Sieve::new(l.obj, members)
}

/// Distinct classes never agree on a covering sieve, and for two trees
/// in one class the sieve of arrows below which they agree covers.
pub fn check_separated(store: &mut TreeStore<'_>, w: &QuotientSheaf) -> VerificationReport {
    let mut report = VerificationReport::new("separated");
    let inst = store.instance();
    let site = inst.site();
    let cat = site.category();
    for a in cat.objects() {
        let n = w.len(a) as u32;
        for t in site.covering(a) {
            for c in 0..n {
                for c2 in c + 1..n {
                    report.cases += 1;
                    if t.members().iter().all(|&f| w.restrict_class(c, f) == w.restrict_class(c2, f)) {
                        report.fail(format!(
                            "{} and {} agree on covering sieve {}",
                            class_name(store, a, c),
                            class_name(store, a, c2),
                            sieve_name(store, t)
                        ));
                    }
                }
            }
        }
        for (ci, class) in w.classes(a).iter().enumerate() {
            let rep = class.rep;
            for &v in &class.members {
                report.cases += 1;
                if store.label(v).elem != store.label(rep).elem {
                    report.fail(format!(
                        "members of {} have different root elements",
                        class_name(store, a, ci as u32)
                    ));
                    continue;
                }
                let r = separation_sieve(store, rep, v);
                if !site.covers(&r) {
                    report.fail(format!(
                        "members of {} agree only on {}, which does not cover",
                        class_name(store, a, ci as u32),
                        sieve_name(store, &r)
                    ));
                }
            }
        }
    }
    report
}

/// Every compatible family of classes over a covering sieve glues to a
/// class whose restrictions reproduce it, the glueing is unique, and the
/// reversed choice order gives the same class.
pub fn check_sheaf(store: &mut TreeStore<'_>, w: &QuotientSheaf) -> VerificationReport {
    let mut report = VerificationReport::new("sheaf");
    let inst = store.instance();
    let site = inst.site();
    let cat = site.category();
    let classes = w.to_presheaf();
    for a in cat.objects() {
        for s in site.covering(a) {
            let families = match enumerate_compatible_families(cat, &classes, s) {
                Ok(f) => f,
                Err(e) => {
                    report.inconclusive(format!("{e}"));
                    continue;
                }
            };
            for fam in families {
                report.cases += 1;
                let what = || {
                    let vals: Vec<String> = s
                        .members()
                        .iter()
                        .zip(&fam.values)
                        .map(|(&f, &c)| format!("{}={c}", cat.morphism_name(f)))
                        .collect();
                    format!("family ({}) over {}", vals.join(","), cat.sieve_label(s))
                };
                let built = match w.glue(store, s, &fam.values, false) {
                    Ok(b) => b,
                    Err(e) => {
                        report.fail(format!("{}: {e}", what()));
                        continue;
                    }
                };
                if !store.is_hereditary(built.tree) {
                    report.fail(format!("{}: glued tree is not hereditary", what()));
                }
                for (&f, &c) in s.members().iter().zip(&fam.values) {
                    let r = store.restrict_unchecked(built.tree, f);
                    let rep = w.classes(cat.dom(f))[c as usize].rep;
                    if !store.equiv(r, rep) {
                        report.fail(format!(
                            "{}: glued tree restricted along {} is not in the family",
                            what(),
                            cat.morphism_name(f)
                        ));
                    }
                }
                let amalgamations: Vec<u32> = (0..w.len(a) as u32)
                    .filter(|&c| {
                        s.members().iter().zip(&fam.values).all(|(&f, &v)| w.restrict_class(c, f) == v)
                    })
                    .collect();
                match built.class {
                    None if w.is_complete() => {
                        report.fail(format!("{}: glued tree is in no class", what()))
                    }
                    None => report.inconclusive(format!(
                        "glued tree beyond depth {}; increase d",
                        w.depth()
                    )),
                    Some(c) => {
                        if amalgamations != [c] {
                            report.fail(format!(
                                "{}: amalgamations {:?}, glued {}",
                                what(),
                                amalgamations,
                                class_name(store, a, c)
                            ));
                        }
                    }
                }
                match w.glue(store, s, &fam.values, true) {
                    Ok(rev) if rev.class == built.class => {
                        if !store.equiv(rev.tree, built.tree) {
                            report.fail(format!("{}: reversed choice gives another class", what()));
                        }
                    }
                    Ok(_) => report.fail(format!("{}: reversed choice gives another class", what())),
                    Err(e) => report.fail(format!("{}: reversed choice failed: {e}", what())),
                }
            }
        }
    }
    report
}

/// `sup` builds hereditarily composable and natural trees, independently
/// of the chosen representatives, and is natural:
/// `sup(x, t)·f = sup(x·f, t·f)`.
pub fn check_sup(store: &mut TreeStore<'_>, w: &QuotientSheaf) -> [VerificationReport; 2] {
    let mut built_report = VerificationReport::new("sup-hereditary");
    let mut nat_report = VerificationReport::new("sup-naturality");
    let inst = store.instance();
    let cat = inst.site().category();
    let elements = match pf_wbar(inst, w) {
        Ok(e) => e,
        Err(e) => {
            built_report.inconclusive(format!("{e}"));
            nat_report.inconclusive(format!("{e}"));
            return [built_report, nat_report];
        }
    };
    for el in &elements {
        let a = el.obj;
        built_report.cases += 1;
        let s = w.sup(store, a, el.base, &el.fiber, false).expect("natural fiber");
        if !store.is_hereditary(s.tree) {
            built_report.fail(format!(
                "sup at {} with base {} is not hereditary",
                cat.object_name(a),
                inst.x().name(a, el.base)
            ));
        }
        let rev = w.sup(store, a, el.base, &el.fiber, true).expect("natural fiber");
        if !store.equiv(s.tree, rev.tree) {
            built_report.fail(format!(
                "sup at {} with base {} depends on representatives",
                cat.object_name(a),
                inst.x().name(a, el.base)
            ));
        }
        for &f in cat.arrows_into(a) {
            nat_report.cases += 1;
            let r = restrict_fiber(inst, a, el.base, &el.fiber, f);
            let lhs = store.restrict_unchecked(s.tree, f);
            let rhs = w.sup(store, cat.dom(f), r.base, &r.fiber, false).expect("restricted fiber");
            let classes_agree = match (s.class, rhs.class) {
                (Some(c), Some(d)) => w.restrict_class(c, f) == d,
                _ => true,
            };
            if !classes_agree || !store.equiv(lhs, rhs.tree) {
                nat_report.fail(format!(
                    "sup at {} with base {} does not commute with {}",
                    cat.object_name(a),
                    inst.x().name(a, el.base),
                    cat.morphism_name(f)
                ));
            }
        }
        // Below the bound a sup may land one level deeper; that is only wrong
        // once W̄ is complete.
        if s.class.is_none() && w.is_complete() {
            built_report.fail(format!("sup leaves the classes at depth {}", w.depth()));
        }
    }
    [built_report, nat_report]
}

/// `sup: P_F W̄ -> W̄` is injective at every object.
pub fn check_sup_monic(store: &mut TreeStore<'_>, w: &QuotientSheaf) -> VerificationReport {
    let mut report = VerificationReport::new("sup-monic");
    if !w.is_complete() {
        return VerificationReport::skipped(
            "sup-monic",
            format!("approximate at depth {}", w.depth()),
        );
    }
    let inst = store.instance();
    let cat = inst.site().category();
    let elements = match pf_wbar(inst, w) {
        Ok(e) => e,
        Err(e) => {
            report.inconclusive(format!("{e}"));
            return report;
        }
    };
    let mut seen: BTreeSet<(ObjId, u32)> = BTreeSet::new();
    for el in &elements {
        report.cases += 1;
        let s = w.sup(store, el.obj, el.base, &el.fiber, false).expect("natural fiber");
        match s.class {
            None => report.fail(format!("sup at {} leaves W̄", cat.object_name(el.obj))),
            Some(c) => {
                if !seen.insert((el.obj, c)) {
                    report.fail(format!(
                        "two elements of P_F W̄({}) are sent to {}",
                        cat.object_name(el.obj),
                        class_name(store, el.obj, c)
                    ));
                }
            }
        }
    }
    report
}

/// Every class as a set of element indices per object.
type Subset = Vec<Vec<bool>>;

struct Closure {
    /// `(obj, class of sup(x, t), fiber (obj, class) pairs)`.
    sups: Vec<(ObjId, u32, Vec<(ObjId, u32)>)>,
    /// `(obj, glued class, family (obj, class) pairs)`.
    glues: Vec<(ObjId, u32, Vec<(ObjId, u32)>)>,
}

fn closure_data(
    store: &mut TreeStore<'_>,
    w: &QuotientSheaf,
    sup_filter: &dyn Fn(ObjId, u32) -> bool,
) -> Result<Closure, PresheafError> {
    let inst = store.instance();
    let site = inst.site();
    let cat = site.category();
    let mut sups = Vec::new();
    for el in pf_wbar(inst, w)? {
        let s = w.sup(store, el.obj, el.base, &el.fiber, false).expect("natural fiber");
        if let Some(c) = s.class {
            if sup_filter(el.obj, c) {
                let edges = inst.branching(inst.max_label(el.obj, el.base));
                let deps = edges.iter().zip(&el.fiber).map(|(e, &v)| (cat.dom(e.mor), v)).collect();
                sups.push((el.obj, c, deps));
            }
        }
    }
    let classes = w.to_presheaf();
    let mut glues = Vec::new();
    for a in cat.objects() {
        for s in site.covering(a) {
            for fam in enumerate_compatible_families(cat, &classes, s)? {
                let glued = (0..w.len(a) as u32).find(|&c| {
                    s.members().iter().zip(&fam.values).all(|(&f, &v)| w.restrict_class(c, f) == v)
                });
                if let Some(c) = glued {
                    let deps =
                        s.members().iter().zip(&fam.values).map(|(&f, &v)| (cat.dom(f), v)).collect();
                    glues.push((a, c, deps));
                }
            }
        }
    }
    Ok(Closure { sups, glues })
}

fn contains(set: &Subset, deps: &[(ObjId, u32)]) -> bool {
    deps.iter().all(|&(b, c)| set[b.index()][c as usize])
}

/// Whether `set` is a sub-presheaf closed under glueing and `sup`.
fn is_subalgebra(w: &QuotientSheaf, cat: &crate::site::FiniteCategory, data: &Closure, set: &Subset) -> bool {
    for f in cat.morphisms() {
        let (a, b) = (cat.cod(f), cat.dom(f));
        for c in 0..w.len(a) {
            if set[a.index()][c] && !set[b.index()][w.restrict_class(c as u32, f) as usize] {
                return false;
            }
        }
    }
    data.sups
        .iter()
        .chain(&data.glues)
        .all(|(a, c, deps)| !contains(set, deps) || set[a.index()][*c as usize])
}

/// `W̄` has no proper sub-sheaf closed under `sup`: the least collection
/// closed under restriction, glueing and `sup` is everything, and on small
/// instances every candidate sub-presheaf is enumerated.
///
/// `sup_filter` lets a test pretend that `sup` never produces some classes.
pub fn check_no_proper_subalgebras(
    store: &mut TreeStore<'_>,
    w: &QuotientSheaf,
    sup_filter: &dyn Fn(ObjId, u32) -> bool,
) -> [VerificationReport; 2] {
    let mut closure_report = VerificationReport::new("subalgebra-closure");
    let mut exhaustive = VerificationReport::new("subalgebra-exhaustive");
    if !w.is_complete() {
        let why = format!("approximate at depth {}", w.depth());
        return [
            VerificationReport::skipped("subalgebra-closure", why.clone()),
            VerificationReport::skipped("subalgebra-exhaustive", why),
        ];
    }
    let cat = store.instance().site().category();
    let data = match closure_data(store, w, sup_filter) {
        Ok(d) => d,
        Err(e) => {
            closure_report.inconclusive(format!("{e}"));
            exhaustive.inconclusive(format!("{e}"));
            return [closure_report, exhaustive];
        }
    };
    let mut set: Subset = cat.objects().map(|a| alloc::vec![false; w.len(a)]).collect();
    loop {
        let mut changed = false;
        for (a, c, deps) in data.sups.iter().chain(&data.glues) {
            if !set[a.index()][*c as usize] && contains(&set, deps) {
                set[a.index()][*c as usize] = true;
                changed = true;
            }
        }
        for f in cat.morphisms() {
            let (a, b) = (cat.cod(f), cat.dom(f));
            for c in 0..w.len(a) {
                let r = w.restrict_class(c as u32, f) as usize;
                if set[a.index()][c] && !set[b.index()][r] {
                    set[b.index()][r] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    for a in cat.objects() {
        for c in 0..w.len(a) {
            closure_report.cases += 1;
            if !set[a.index()][c] {
                closure_report.fail(format!(
                    "{} is not reached from sup and glueing",
                    class_name(store, a, c as u32)
                ));
            }
        }
    }

    let total = w.total_len();
    if total > EXHAUSTIVE_SUBSHEAF_LIMIT {
        exhaustive = VerificationReport::skipped(
            "subalgebra-exhaustive",
            format!("{total} classes is more than {EXHAUSTIVE_SUBSHEAF_LIMIT}"),
        );
        return [closure_report, exhaustive];
    }
    let slots: Vec<(ObjId, usize)> =
        cat.objects().flat_map(|a| (0..w.len(a)).map(move |c| (a, c))).collect();
    for mask in 0u32..(1u32 << total) {
        exhaustive.cases += 1;
        let mut sub: Subset = cat.objects().map(|a| alloc::vec![false; w.len(a)]).collect();
        for (i, &(a, c)) in slots.iter().enumerate() {
            sub[a.index()][c] = mask & (1 << i) != 0;
        }
        let full = mask == (1u32 << total).wrapping_sub(1) || total == 32;
        if !full && is_subalgebra(w, cat, &data, &sub) {
            let missing: Vec<String> = slots
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) == 0)
                .map(|(_, &(a, c))| class_name(store, a, c as u32))
                .collect();
            exhaustive.fail(format!("proper subalgebra without {}", missing.join(", ")));
        }
    }
    [closure_report, exhaustive]
}

/// Reflexivity, symmetry and transitivity of `~` on `trees`, and
/// compatibility with restriction.
pub fn check_equivalence(store: &mut TreeStore<'_>, trees: &[TreeId]) -> [VerificationReport; 2] {
    let mut eq = VerificationReport::new("equivalence");
    let mut cong = VerificationReport::new("congruence");
    let cat = store.instance().site().category();
    let n = trees.len();
    let words = n.div_ceil(64);
    let mut rows: Vec<Vec<u64>> = alloc::vec![alloc::vec![0; words]; n];
    for i in 0..n {
        for j in 0..n {
            if store.equiv(trees[i], trees[j]) {
                rows[i][j / 64] |= 1 << (j % 64);
            }
        }
    }
    let bit = |rows: &Vec<Vec<u64>>, i: usize, j: usize| rows[i][j / 64] >> (j % 64) & 1 == 1;
    for i in 0..n {
        eq.cases += 1;
        if !bit(&rows, i, i) {
            eq.fail(format!("tree #{} is not equivalent to itself", trees[i].index()));
        }
        for j in 0..n {
            if bit(&rows, i, j) != bit(&rows, j, i) {
                eq.cases += 1;
                eq.fail(format!(
                    "equivalence of #{} and #{} is not symmetric",
                    trees[i].index(),
                    trees[j].index()
                ));
            }
            if i < j && bit(&rows, i, j) {
                eq.cases += 1;
                // With symmetry, transitivity says equivalent trees have
                // equal rows.
                if rows[i] != rows[j] {
                    eq.fail(format!(
                        "equivalence is not transitive through #{} and #{}",
                        trees[i].index(),
                        trees[j].index()
                    ));
                }
                let a = store.root_obj(trees[i]);
                for &f in cat.arrows_into(a) {
                    cong.cases += 1;
                    let r = store.restrict_unchecked(trees[i], f);
                    let r2 = store.restrict_unchecked(trees[j], f);
                    if !store.equiv(r, r2) {
                        cong.fail(format!(
                            "#{} ~ #{} but not after restriction along {}",
                            trees[i].index(),
                            trees[j].index(),
                            cat.morphism_name(f)
                        ));
                    }
                }
            }
        }
    }
    [eq, cong]
}

/// Every check on one instance, in a fixed order.
pub fn run_suite(
    store: &mut TreeStore<'_>,
    w: &QuotientSheaf,
    carrier: Option<&Carrier>,
) -> Vec<VerificationReport> {
    run_suite_with(store, w, carrier, &|_, _| true)
}

/// [`run_suite`] with a `sup_filter` passed to the subalgebra check.
pub fn run_suite_with(
    store: &mut TreeStore<'_>,
    w: &QuotientSheaf,
    carrier: Option<&Carrier>,
    sup_filter: &dyn Fn(ObjId, u32) -> bool,
) -> Vec<VerificationReport> {
    let mut out = Vec::new();
    out.push(check_quotient(store, w));
    out.push(check_separated(store, w));
    out.push(check_sheaf(store, w));
    out.extend(check_sup(store, w));
    out.push(check_sup_monic(store, w));
    out.extend(check_no_proper_subalgebras(store, w, sup_filter));
    out.push(match carrier {
        Some(c) => verify_iso(store, w, c),
        None => VerificationReport::skipped("iso", "fixpoint chain did not stabilize"),
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle::fixpoint_chain;

    fn suite_passes(site: crate::site::FiniteSite, poly: crate::polynomial::Polynomial, d: u32) {
        let inst = WInstance::new(site, poly).unwrap();
        let mut store = TreeStore::new(&inst);
        let w = QuotientSheaf::build(&mut store, d).unwrap();
        let chain = fixpoint_chain(&inst, 16).unwrap();
        for r in run_suite(&mut store, &w, chain.carrier.as_ref()) {
            assert!(!r.failed(), "{r}");
        }
    }

    #[test]
    fn fixtures_pass() {
        let a = fixtures::fixture_a();
        let b = fixtures::fixture_b();
        let c = fixtures::fixture_c();
        suite_passes(a.clone(), fixtures::identity_on_terminal(&a), 3);
        suite_passes(a.clone(), fixtures::natural_numbers(&a), 4);
        suite_passes(b.clone(), fixtures::identity_on_terminal(&b), 3);
        suite_passes(c.clone(), fixtures::natural_numbers(&c), 3);
        suite_passes(c.clone(), fixtures::two_constants(&c), 3);
    }

    #[test]
    fn merged_classes_are_not_separated() {
        let a = fixtures::fixture_a();
        let inst = WInstance::new(a.clone(), fixtures::natural_numbers(&a)).unwrap();
        let mut store = TreeStore::new(&inst);
        let mut w = QuotientSheaf::build(&mut store, 3).unwrap();
        w.merge_classes(&store, ObjId(0), 0, 1);
        assert!(check_separated(&mut store, &w).failed());
    }

    #[test]
    fn blocked_sup_leaves_a_proper_subalgebra() {
        let a = fixtures::fixture_a();
        let inst = WInstance::new(a.clone(), fixtures::two_constants(&a)).unwrap();
        let mut store = TreeStore::new(&inst);
        let w = QuotientSheaf::build(&mut store, 2).unwrap();
        assert_eq!(w.len(ObjId(0)), 2);
        let [closure, exhaustive] = check_no_proper_subalgebras(&mut store, &w, &|_, c| c != 1);
        assert!(closure.failed());
        assert!(exhaustive.failed());
        let [closure, exhaustive] = check_no_proper_subalgebras(&mut store, &w, &|_, _| true);
        assert!(closure.passed() && exhaustive.passed());
    }
}
