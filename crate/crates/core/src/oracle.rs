//! The initial `P_F`-algebra computed without trees, as the colimit of
//! `0 -> P_F 0 -> P_F² 0 -> ...` in sheaves, and the comparison map from
//! the tree quotient into it.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::polynomial::{natural_fiber_maps, pf_apply, pf_map, Edge, PfElement, PfPresheaf, WInstance};
use crate::presheaf::{
    amalgamations, classify_sheaf, natural_transformations, CompatibleFamily, Presheaf,
    PresheafError, PresheafMorphism, SheafClass,
};
use crate::report::VerificationReport;
use crate::sheafify::initial_sheaf;
use crate::site::ObjId;
use crate::tree::{TreeId, TreeStore};
use crate::wbar::QuotientSheaf;
use crate::ENUMERATION_LIMIT;

/// Default bound on the total number of elements of a chain stage.
pub const DEFAULT_STAGE_LIMIT: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChainStatus {
    /// `m_at: Z_at -> Z_{at+1}` is an isomorphism.
    Stabilized { at: usize },
    NotStabilized { max_iter: usize },
    /// Stage `at` grew beyond the size limit before stabilizing; `size` is
    /// its size or a lower bound for it.
    TooLarge { at: usize, size: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    Presheaf(PresheafError),
    /// A stage of the chain is not a sheaf.
    NotASheaf { stage: usize, class: SheafClass },
    /// The initial sheaf does not have exactly one map into `Z_1`.
    InitialMap { count: usize },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::Presheaf(e) => write!(f, "{e}"),
            OracleError::NotASheaf { stage, class } => {
                write!(f, "chain stage {stage} is not a sheaf ({class:?})")
            }
            OracleError::InitialMap { count } => {
                write!(f, "{count} maps from the initial sheaf into the first stage")
            }
        }
    }
}

impl core::error::Error for OracleError {}

impl From<PresheafError> for OracleError {
    fn from(e: PresheafError) -> Self {
        OracleError::Presheaf(e)
    }
}

/// The stabilized carrier `μ` with its algebra map `sup_μ: P_F μ -> μ`.
#[derive(Clone, Debug)]
pub struct Carrier {
    pub mu: Presheaf,
    pub pf_mu: PfPresheaf,
    pub sup: PresheafMorphism,
}

impl Carrier {
    /// `sup_μ(x, t)` for `(x, t)` given by its fiber over the edges of
    /// `(a, x, M_a)`, or `None` if `t` is not natural.
    pub fn sup_of(&self, a: ObjId, base: u32, fiber: Vec<u32>) -> Option<u32> {
        let i = self.pf_mu.index_of(a, &PfElement { base, fiber })?;
        Some(self.sup.apply(a, i))
    }
}

#[derive(Clone, Debug)]
pub struct FixpointResult {
    /// `Z_0, Z_1, ...`, up to the last stage computed.
    pub stages: Vec<Presheaf>,
    /// `m_n: Z_n -> Z_{n+1}`.
    pub maps: Vec<PresheafMorphism>,
    pub status: ChainStatus,
    pub carrier: Option<Carrier>,
}

impl FixpointResult {
    /// `|Z_n(a)|` for every stage and object.
    pub fn cardinalities(&self) -> Vec<Vec<usize>> {
        self.stages
            .iter()
            .map(|z| (0..z.num_objects()).map(|a| z.len(ObjId(a as u32))).collect())
            .collect()
    }

    pub fn is_stabilized(&self) -> bool {
        matches!(self.status, ChainStatus::Stabilized { .. })
    }
}

pub fn fixpoint_chain(inst: &WInstance, max_iter: usize) -> Result<FixpointResult, OracleError> {
    fixpoint_chain_with_limit(inst, max_iter, DEFAULT_STAGE_LIMIT)
}

pub fn fixpoint_chain_with_limit(
    inst: &WInstance,
    max_iter: usize,
    stage_limit: usize,
) -> Result<FixpointResult, OracleError> {
    let site = inst.site();
    let cat = site.category();
    let check = |stage: usize, z: &Presheaf| -> Result<(), OracleError> {
        let class = classify_sheaf(site, z)?;
        if class.is_sheaf() {
            Ok(())
        } else {
            Err(OracleError::NotASheaf { stage, class })
        }
    };
    let z0 = initial_sheaf(site);
    check(0, &z0)?;
    let mut stages = alloc::vec![z0];
    let mut decoded: Vec<PfPresheaf> = Vec::new();
    let mut maps: Vec<PresheafMorphism> = Vec::new();
    for n in 0..max_iter {
        let too_large = |size| FixpointResult {
            stages: stages.clone(),
            maps: maps.clone(),
            status: ChainStatus::TooLarge { at: n + 1, size },
            carrier: None,
        };
        let next = match pf_apply(inst, &stages[n]) {
            Ok(next) => next,
            Err(PresheafError::TooManySolutions) => return Ok(too_large(ENUMERATION_LIMIT)),
            Err(e) => return Err(e.into()),
        };
        let size = next.presheaf.total_len();
        if size > stage_limit {
            return Ok(too_large(size));
        }
        match check(n + 1, &next.presheaf) {
            Err(OracleError::Presheaf(PresheafError::TooManySolutions)) => return Ok(too_large(size)),
            r => r?,
        }
        let m = if n == 0 {
            let mut all = match natural_transformations(cat, &stages[0], &next.presheaf) {
                Err(PresheafError::TooManySolutions) => return Ok(too_large(size)),
                r => r?,
            };
            if all.len() != 1 {
                return Err(OracleError::InitialMap { count: all.len() });
            }
            all.remove(0)
        } else {
            pf_map(inst, &maps[n - 1], &decoded[n - 1], &next)
        };
        let iso = m.is_iso(&stages[n], &next.presheaf);
        stages.push(next.presheaf.clone());
        decoded.push(next);
        maps.push(m);
        if iso {
            let carrier = Carrier {
                mu: stages[n].clone(),
                pf_mu: decoded.pop().expect("just pushed"),
                sup: maps[n].inverse(),
            };
            return Ok(FixpointResult {
                stages,
                maps,
                status: ChainStatus::Stabilized { at: n },
                carrier: Some(carrier),
            });
        }
    }
    Ok(FixpointResult { stages, maps, status: ChainStatus::NotStabilized { max_iter }, carrier: None })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbedError {
    /// `t_f` is not a natural fiber map into `μ`.
    NonNaturalFiber { tree: TreeId },
    /// The family `(m_f)` has no unique amalgamation in `μ`.
    NotGlueable { tree: TreeId, amalgamations: usize },
}

impl fmt::Display for EmbedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmbedError::NonNaturalFiber { tree } => {
                write!(f, "tree #{} has a non-natural fiber map", tree.index())
            }
            EmbedError::NotGlueable { tree, amalgamations } => write!(
                f,
                "tree #{}: family has {amalgamations} amalgamations in the carrier",
                tree.index()
            ),
        }
    }
}

impl core::error::Error for EmbedError {}

/// The map `φ` from hereditarily composable and natural trees to `μ`:
/// for a root `(a, x, S)`, each `f ∈ S` gives `m_f = sup_μ(x·f, t_f)` with
/// `t_f(g, y) = φ(v(f∘g, y))`, and `φ(v)` glues the family `(m_f)`.
#[derive(Debug)]
pub struct Embedding<'c> {
    carrier: &'c Carrier,
    memo: BTreeMap<TreeId, u32>,
}

impl<'c> Embedding<'c> {
    pub fn new(carrier: &'c Carrier) -> Self {
        Embedding { carrier, memo: BTreeMap::new() }
    }

    pub fn embed(&mut self, store: &TreeStore<'_>, v: TreeId) -> Result<u32, EmbedError> {
        if let Some(&e) = self.memo.get(&v) {
            return Ok(e);
        }
        let inst = store.instance();
        let cat = inst.site().category();
        let label = store.label(v);
        let sieve = inst.sieve(label).clone();
        let mut values = Vec::with_capacity(sieve.len());
        for &f in sieve.members() {
            let b = cat.dom(f);
            let xf = inst.x().restrict(label.elem, f);
            let mut fiber = Vec::new();
            for e in inst.branching(inst.max_label(b, xf)) {
                let child = store
                    .child(v, Edge { mor: cat.comp(f, e.mor), elem: e.elem })
                    .expect("f∘g ∈ S");
                fiber.push(self.embed(store, child)?);
            }
            let m = self
                .carrier
                .sup_of(b, xf, fiber)
                .ok_or(EmbedError::NonNaturalFiber { tree: v })?;
            values.push(m);
        }
        let amal = amalgamations(&self.carrier.mu, &CompatibleFamily { sieve, values });
        if amal.len() != 1 {
            return Err(EmbedError::NotGlueable { tree: v, amalgamations: amal.len() });
        }
        self.memo.insert(v, amal[0]);
        Ok(amal[0])
    }
}

/// Checks that `φ` descends to an isomorphism of `P_F`-algebras
/// `W̄ -> μ`: constant on classes, bijective per object, and commuting
/// with restriction and with `sup`.
pub fn verify_iso(store: &mut TreeStore<'_>, w: &QuotientSheaf, carrier: &Carrier) -> VerificationReport {
    let mut report = VerificationReport::new("iso");
    let inst = store.instance();
    let cat = inst.site().category();
    let mut phi = Embedding::new(carrier);
    let mut psi: Vec<Vec<u32>> = Vec::new();
    for a in cat.objects() {
        let mut row = Vec::new();
        for (ci, class) in w.classes(a).iter().enumerate() {
            let mut value = None;
            for &v in &class.members {
                report.cases += 1;
                match (phi.embed(store, v), value) {
                    (Err(e), _) => report.fail(format!("{}#{ci}: {e}", cat.object_name(a))),
                    (Ok(e), None) => value = Some(e),
                    (Ok(e), Some(prev)) if e != prev => report.fail(format!(
                        "class {}#{ci} is not sent to a single element ({} and {})",
                        cat.object_name(a),
                        carrier.mu.name(a, prev),
                        carrier.mu.name(a, e)
                    )),
                    _ => {}
                }
            }
            row.push(value.unwrap_or(u32::MAX));
        }
        psi.push(row);
    }
    if report.failed() {
        return report;
    }
    for a in cat.objects() {
        let mut hit: Vec<Option<usize>> = alloc::vec![None; carrier.mu.len(a)];
        for (ci, &e) in psi[a.index()].iter().enumerate() {
            report.cases += 1;
            if let Some(prev) = hit[e as usize] {
                report.fail(format!(
                    "classes {}#{prev} and {}#{ci} are both sent to {}",
                    cat.object_name(a),
                    cat.object_name(a),
                    carrier.mu.name(a, e)
                ));
            }
            hit[e as usize] = Some(ci);
        }
        let missed: Vec<&str> = hit
            .iter()
            .enumerate()
            .filter(|(_, h)| h.is_none())
            .map(|(e, _)| carrier.mu.name(a, e as u32))
            .collect();
        if !missed.is_empty() {
            if w.is_complete() {
                report.fail(format!(
                    "not surjective at {}: missing {}",
                    cat.object_name(a),
                    missed.join(", ")
                ));
            } else {
                report.inconclusive(format!(
                    "not surjective at depth {}; increase d",
                    w.depth()
                ));
            }
        }
    }
    for f in cat.morphisms() {
        let (a, b) = (cat.cod(f), cat.dom(f));
        for c in 0..w.len(a) as u32 {
            report.cases += 1;
            let lhs = psi[b.index()][w.restrict_class(c, f) as usize];
            let rhs = carrier.mu.restrict(psi[a.index()][c as usize], f);
            if lhs != rhs {
                report.fail(format!(
                    "restriction of {}#{c} along {} is not preserved",
                    cat.object_name(a),
                    cat.morphism_name(f)
                ));
            }
        }
    }
    for a in cat.objects() {
        for x in 0..inst.x().len(a) as u32 {
            let fibers = match natural_fiber_maps(
                inst,
                |b| w.len(b) as u32,
                |g| w.restriction_table(g).to_vec(),
                a,
                x,
            ) {
                Ok(f) => f,
                Err(e) => {
                    report.inconclusive(format!("{e}"));
                    continue;
                }
            };
            let edges = inst.branching(inst.max_label(a, x));
            for t in fibers {
                report.cases += 1;
                let built = w.sup(store, a, x, &t, false).expect("natural fiber");
                let Some(s) = built.class else {
                    report.inconclusive(format!(
                        "sup leaves the classes computed at depth {}; increase d",
                        w.depth()
                    ));
                    continue;
                };
                let image: Vec<u32> = edges
                    .iter()
                    .zip(&t)
                    .map(|(e, &c)| psi[cat.dom(e.mor).index()][c as usize])
                    .collect();
                let expected = carrier.sup_of(a, x, image);
                if expected != Some(psi[a.index()][s as usize]) {
                    report.fail(format!(
                        "sup at {} with base {} does not commute",
                        cat.object_name(a),
                        inst.x().name(a, x)
                    ));
                }
            }
        }
    }
    if !w.is_complete() {
        report.inconclusive(format!("W̄ is not complete at depth {}; increase d", w.depth()));
    }
    report
}

/// Cardinalities as a compact string, `|Z_0|,|Z_1|,...` summed over objects.
pub fn chain_summary(result: &FixpointResult) -> String {
    let sizes: Vec<String> = result.stages.iter().map(|z| format!("{}", z.total_len())).collect();
    sizes.join(",")
}
