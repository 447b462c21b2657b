//! The standard small sites and instances used throughout the tests and
//! the command-line demo.
//!
//! * A: one object `*`, identity only, trivial topology.
//! * B: one object `*`, identity only, the empty sieve also covers.
//! * C: objects `a`, `b`, one arrow `m: b -> a`; `{m}` covers `a`.

use alloc::vec;

use crate::polynomial::Polynomial;
use crate::presheaf::{Presheaf, PresheafMorphism};
use crate::site::{FiniteCategory, FiniteSite, Sieve, Topology};

fn point() -> FiniteCategory {
    FiniteCategory::from_tables(&["*"], &[("id", "*", "*")], &[("*", "id")], &[("id", "id", "id")])
        .expect("point category")
}

pub fn fixture_a() -> FiniteSite {
    let cat = point();
    let top = Topology::trivial(&cat);
    FiniteSite::new(cat, top)
}

pub fn fixture_b() -> FiniteSite {
    let cat = point();
    let star = cat.object_by_name("*").expect("*");
    let top = Topology::new(vec![vec![cat.maximal_sieve(star), Sieve::empty(star)]]);
    FiniteSite::new(cat, top)
}

pub fn fixture_c_category() -> FiniteCategory {
    FiniteCategory::from_tables(
        &["a", "b"],
        &[("id_a", "a", "a"), ("id_b", "b", "b"), ("m", "b", "a")],
        &[("a", "id_a"), ("b", "id_b")],
        &[
            ("id_a", "id_a", "id_a"),
            ("id_b", "id_b", "id_b"),
            ("m", "id_b", "m"),
            ("id_a", "m", "m"),
        ],
    )
    .expect("fixture C category")
}

pub fn fixture_c() -> FiniteSite {
    let cat = fixture_c_category();
    let a = cat.object_by_name("a").expect("a");
    let b = cat.object_by_name("b").expect("b");
    let m = cat.morphism_by_name("m").expect("m");
    let top = Topology::new(vec![
        vec![cat.maximal_sieve(a), Sieve::new(a, vec![m])],
        vec![cat.maximal_sieve(b)],
    ]);
    FiniteSite::new(cat, top)
}

/// `id: 1 -> 1` on the terminal sheaf; its W-type is the initial sheaf.
pub fn identity_on_terminal(site: &FiniteSite) -> Polynomial {
    let cat = site.category();
    let one = Presheaf::terminal(cat);
    let id = PresheafMorphism::identity(cat, &one);
    Polynomial::new(one.clone(), one, id)
}

/// Natural numbers: `X = {x_s, x_z}` and `Y = {y}` constant, `F(y) = x_s`.
/// Constant presheaves are sheaves on fixtures A and C but not on B.
pub fn natural_numbers(site: &FiniteSite) -> Polynomial {
    let cat = site.category();
    let x = Presheaf::constant(cat, &["x_s", "x_z"]);
    let y = Presheaf::constant(cat, &["y"]);
    let xs = x.find(crate::site::ObjId(0), "x_s").expect("x_s");
    let f = PresheafMorphism::from_raw(cat.objects().map(|_| vec![xs]).collect());
    Polynomial::new(x, y, f)
}

/// A finite W-type without recursion: `X = {p, q}`, `Y` empty.
pub fn two_constants(site: &FiniteSite) -> Polynomial {
    let cat = site.category();
    let x = Presheaf::constant(cat, &["p", "q"]);
    let y = Presheaf::empty(cat);
    let f = PresheafMorphism::from_raw(cat.objects().map(|_| vec![]).collect());
    Polynomial::new(x, y, f)
}
