use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sheaf-wtypes")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn instance(poly: &str) -> Vec<String> {
    let site = if poly.ends_with("_c") { "site_c" } else { "site_a" };
    let mut v = vec!["--site".to_string(), fixture(site)];
    for part in ["x", "y", "f"] {
        v.push(format!("--{part}"));
        v.push(fixture(&format!("{poly}_{part}")));
    }
    v
}

fn args<'a>(head: &[&'a str], tail: &'a [String]) -> Vec<&'a str> {
    head.iter().copied().chain(tail.iter().map(String::as_str)).collect()
}

#[test]
fn valid_sites_exit_zero() {
    for site in ["site_a", "site_b", "site_c"] {
        let o = run(&["validate", "--site", &fixture(site), "--json"]);
        assert_eq!(code(&o), 0, "{site}");
        let v = json(&o);
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["valid"], true);
    }
}

#[test]
fn missing_maximal_sieve_is_named() {
    let mut site: Value = serde_json::from_str(&std::fs::read_to_string(fixture("site_b")).unwrap()).unwrap();
    site["topology"]["*"] = serde_json::json!([[]]);
    let p = scratch("no_max.json", &site.to_string());
    let o = run(&["validate", "--site", p.to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 1);
    let report = json(&o);
    let kinds: Vec<&str> = report["site"]["violations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["kind"].as_str().unwrap())
        .collect();
    assert!(kinds.contains(&"maximal-sieve"), "{kinds:?}");
}

#[test]
fn bad_input_exits_two() {
    let p = scratch("broken.json", "{ \"objects\": [");
    assert_eq!(code(&run(&["validate", "--site", p.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["validate", "--site", "/nonexistent/site.json"])), 2);
    assert_eq!(code(&run(&["compute", "--frobnicate"])), 2);
    // Constant {p, q} on the one-point site where the empty sieve covers.
    let mut v = vec!["--site".to_string(), fixture("site_b")];
    for part in ["x", "y", "f"] {
        v.push(format!("--{part}"));
        v.push(fixture(&format!("nno_point_{part}")));
    }
    let o = run(&args(&["compute"], &v));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stdout).contains("not a sheaf"));
}

#[test]
fn compute_reports_classes_and_chain() {
    let inst = instance("two_constants_c");
    let o = run(&args(&["compute", "--max-depth", "3", "--json"], &inst));
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["chain"]["status"], "stabilized");
}

#[test]
fn verify_passes_on_fixtures() {
    for poly in ["terminal_point", "terminal_c", "two_constants_c", "nno_c", "nno_point"] {
        let inst = instance(poly);
        let o = run(&args(&["verify", "--max-depth", "3"], &inst));
        assert_eq!(code(&o), 0, "{poly}: {}", String::from_utf8_lossy(&o.stdout));
    }
}

#[test]
fn injected_faults_are_caught() {
    let inst = instance("two_constants_c");
    for fault in ["merge-classes", "block-sup"] {
        let o = run(&args(&["verify", "--max-depth", "3", "--inject", fault, "--json"], &inst));
        assert_eq!(code(&o), 1, "{fault}");
        let v = json(&o);
        assert_eq!(v["inject"], fault);
        assert_eq!(v["instances"][0]["fault"]["kind"], fault);
    }
}

#[test]
fn random_seeds_verify() {
    let o = run(&["verify", "--seed", "0", "--count", "4", "--tractable", "--max-depth", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn demo_is_deterministic() {
    let a = run(&["demo", "--json"]);
    let b = run(&["demo", "--json"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["differ"], true);
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("demo.json");
    let c = run(&["demo", "--out", out.to_str().unwrap(), "--json"]);
    assert_eq!(std::fs::read(&out).unwrap(), c.stdout);
}
