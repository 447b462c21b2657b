//! W-types in categories of sheaves over finite Grothendieck sites.
//!
//! The crate builds, for a natural map `F: Y -> X` of sheaves on a finite
//! site, the presheaf of labelled well-founded trees, the covering-sieve
//! equivalence `~` on it, the sub-presheaf of hereditarily composable and
//! natural trees and its quotient `W̄`. It then checks on the finite
//! instance that `W̄` is a separated presheaf, a sheaf, a `P_F`-algebra and
//! the initial one, comparing against the colimit of the chain
//! `0 -> P_F 0 -> P_F² 0 -> ...` computed independently in sheaves.
//!
//! Everything here is `no_std` (with `alloc`) and deterministic: every
//! choice the construction needs is resolved by a fixed canonical order.
#![no_std]
#![forbid(unsafe_code)]
#![warn(missing_debug_implementations)]

extern crate alloc;

mod csp;

pub mod fixtures;
pub mod oracle;
pub mod polynomial;
pub mod presheaf;
pub mod report;
pub mod sheafify;
pub mod site;
pub mod tree;
pub mod verify;
pub mod wbar;

pub use oracle::{
    fixpoint_chain, verify_iso, Carrier, ChainStatus, EmbedError, Embedding, FixpointResult,
    OracleError,
};
pub use polynomial::{
    pf_apply, pf_map, yx_presheaf, Edge, InstanceError, Label, PfElement, PfPresheaf, Polynomial,
    WInstance,
};
pub use presheaf::{
    classify_sheaf, enumerate_compatible_families, natural_transformations, CompatibleFamily,
    Presheaf, PresheafError, PresheafMorphism, SheafClass,
};
pub use report::{CheckStatus, ValidationReport, VerificationReport, Violation};
pub use sheafify::{initial_sheaf, plus_construction, sheafify, PlusConstruction, Sheafification};
pub use site::{FiniteCategory, FiniteSite, MorId, ObjId, Sieve, SiteError, Topology};
pub use tree::{HcnStatus, TreeError, TreeId, TreeStore};
pub use verify::{run_suite, run_suite_with, PfClassElement};
pub use wbar::{BuildError, Built, ClassRef, GlueError, QuotientSheaf, SupError, WClass};

/// Upper bound on solutions any single exhaustive enumeration may produce.
pub const ENUMERATION_LIMIT: usize = 2_000_000;
