//! JSON renderings of results. Maps are `serde_json` maps with sorted keys
//! and every list is emitted in canonical order, so equal inputs give
//! byte-identical reports.

use serde_json::{json, Map, Value};
use sheaf_wtypes_core::oracle::ChainStatus;
use sheaf_wtypes_core::verify::pf_wbar;
use sheaf_wtypes_core::{
    CheckStatus, FiniteCategory, FixpointResult, QuotientSheaf, TreeStore, ValidationReport,
    VerificationReport,
};

use crate::io::{tree_json, tree_text};

pub const SCHEMA_VERSION: u32 = 1;

pub fn header(command: &str, seed: Option<u64>) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("command".into(), json!(command));
    m.insert("seed".into(), json!(seed));
    m
}

pub fn validation_json(r: &ValidationReport) -> Value {
    let violations: Vec<Value> = r
        .violations
        .iter()
        .map(|v| json!({ "kind": v.kind(), "message": v.to_string() }))
        .collect();
    json!({ "valid": r.is_valid(), "violations": violations })
}

pub fn status_str(s: &CheckStatus) -> &'static str {
    match s {
        CheckStatus::Pass => "pass",
        CheckStatus::Fail => "fail",
        CheckStatus::Inconclusive(_) => "inconclusive",
        CheckStatus::Skipped(_) => "skipped",
    }
}

pub fn verification_json(r: &VerificationReport) -> Value {
    let reason = match &r.status {
        CheckStatus::Inconclusive(s) | CheckStatus::Skipped(s) => Some(s.clone()),
        _ => None,
    };
    json!({
        "check": r.check,
        "status": status_str(&r.status),
        "reason": reason,
        "cases": r.cases,
        "failed_cases": r.failed_cases,
        "witnesses": r.failures,
    })
}

pub fn chain_json(cat: &FiniteCategory, r: &FixpointResult) -> Value {
    let (status, at) = match r.status {
        ChainStatus::Stabilized { at } => ("stabilized", Some(at)),
        ChainStatus::NotStabilized { .. } => ("not-stabilized", None),
        ChainStatus::TooLarge { at, .. } => ("too-large", Some(at)),
    };
    let cards: Vec<Value> = r
        .cardinalities()
        .iter()
        .map(|row| {
            let m: Map<String, Value> = cat
                .objects()
                .map(|a| (cat.object_name(a).to_string(), json!(row[a.index()])))
                .collect();
            Value::Object(m)
        })
        .collect();
    let carrier = r.carrier.as_ref().map(|c| {
        let m: Map<String, Value> = cat
            .objects()
            .map(|a| (cat.object_name(a).to_string(), json!(c.mu.elements(a))))
            .collect();
        Value::Object(m)
    });
    json!({ "status": status, "at": at, "cardinalities": cards, "carrier": carrier })
}

pub fn wbar_json(store: &mut TreeStore<'_>, w: &QuotientSheaf) -> Value {
    let inst = store.instance();
    let cat = inst.site().category();
    let mut objects = Map::new();
    for a in cat.objects() {
        let classes: Vec<Value> = w
            .classes(a)
            .iter()
            .enumerate()
            .map(|(i, c)| {
                json!({
                    "name": format!("c{i}"),
                    "text": tree_text(store, c.rep),
                    "depth": store.depth(c.rep),
                    "members": c.members.len(),
                    "representative": tree_json(store, c.rep),
                })
            })
            .collect();
        objects.insert(cat.object_name(a).to_string(), Value::Array(classes));
    }
    let restriction: Map<String, Value> = cat
        .morphisms()
        .map(|f| (cat.morphism_name(f).to_string(), json!(w.restriction_table(f))))
        .collect();
    let sup: Vec<Value> = match pf_wbar(inst, w) {
        Ok(elements) => elements
            .iter()
            .map(|el| {
                let built = w.sup(store, el.obj, el.base, &el.fiber, false).expect("natural fiber");
                json!({
                    "obj": cat.object_name(el.obj),
                    "base": inst.x().name(el.obj, el.base),
                    "fiber": el.fiber,
                    "class": built.class,
                })
            })
            .collect(),
        Err(_) => Vec::new(),
    };
    json!({
        "depth": w.depth(),
        "complete_at": w.complete_at(),
        "status": if w.is_complete() { "complete" } else { "approximate" },
        "classes": Value::Object(objects),
        "restriction": Value::Object(restriction),
        "sup": sup,
    })
}

/// Pretty JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}
