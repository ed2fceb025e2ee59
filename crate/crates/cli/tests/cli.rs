use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    report: Value,
    raw: String,
}

fn fairslice(dir: &Path, args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_fairslice")).current_dir(dir).args(args).output().expect("binary runs");
    let raw = String::from_utf8(out.stdout).unwrap();
    let report = serde_json::from_str(&raw).unwrap_or(Value::Null);
    Run { code: out.status.code().unwrap(), report, raw }
}

fn put(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

const TWO_UNIFORM: &str = r#"{"agents":[{"blocks":[{"left":"0","right":"1","height":"1"}]},{"blocks":[{"left":"0","right":"1","height":"1"}]}]}"#;
const INCOMPATIBLE: &str = r#"{"agents":[{"blocks":[{"left":"0","right":"1","height":"1"}]},{"blocks":[{"left":"0","right":"1/4","height":"4"}]}]}"#;
const HALVES: &str = r#"{"agents":[{"blocks":[{"left":"0","right":"1/2","height":"2"}]},{"blocks":[{"left":"1/2","right":"1","height":"2"}]}]}"#;
const INTERVALS: &str = r#"{"agents":[{"blocks":[{"left":"0","right":"1/2","height":"2"}]},{"blocks":[{"left":"1/4","right":"3/4","height":"2"}]},{"blocks":[{"left":"1/3","right":"1","height":"3/2"}]}]}"#;
const INTERLEAVED: &str = r#"{"items":6,"agents":[[1,0,0,1,0,0],[0,1,0,0,1,0],[0,0,1,0,0,1]]}"#;

fn exact(v: &Value) -> &str {
    v["exact"].as_str().unwrap()
}

#[test]
fn moving_knife_on_two_uniform_agents() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "inst.json", TWO_UNIFORM);
    let r = fairslice(dir.path(), &["solve", "--alg", "alg1", "--in", "inst.json", "--out", "a.json"]);
    assert_eq!(r.code, 0);
    assert_eq!(exact(&r.report["max_envy"]), "1/3");
    assert!(dir.path().join("a.json").exists());
}

#[test]
fn midpoint_protocol_stays_within_a_quarter() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "inst.json", INTERVALS);
    let r = fairslice(dir.path(), &["solve", "--alg", "alg2", "--in", "inst.json"]);
    assert_eq!(r.code, 0);
    let env: Vec<i64> = exact(&r.report["max_envy"]).split('/').map(|t| t.parse().unwrap()).collect();
    assert!(env[0] * 4 <= *env.get(1).unwrap_or(&1));
    assert_eq!(r.report["case_tags"].as_array().unwrap().len(), 3);
}

#[test]
fn incompatible_order_is_a_proven_no() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "inst.json", INCOMPATIBLE);
    let r = fairslice(dir.path(), &["decide", "--constraint", "order:1,2", "--in", "inst.json"]);
    assert_eq!(r.code, 1);
    assert_eq!(r.report["status"], "none");
    let r = fairslice(dir.path(), &["decide", "--constraint", "order:2,1", "--in", "inst.json"]);
    assert_eq!(r.code, 0);
    assert_eq!(exact(&r.report["max_envy"]), "0");
}

#[test]
fn cake_witness_verifies_and_a_moved_cut_does_not() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "f.cnf", "p cnf 3 1\n1 -2 3 0\n");
    put(dir.path(), "asg.json", "[true, true, false]");
    let g = fairslice(
        dir.path(),
        &["gen", "--kind", "cake-sat", "--in", "f.cnf", "--out", "cake.json", "--witness", "asg.json", "--witness-out", "w.json"],
    );
    assert_eq!(g.code, 0, "{}", g.raw);
    assert_eq!(exact(&g.report["witness_check"]["max_envy"]), "0");
    let v = fairslice(dir.path(), &["verify", "--in", "cake.json", "--alloc", "w.json", "--eps", "0"]);
    assert_eq!(v.code, 0);
    assert_eq!(v.report["status"], "pass");

    let mut w: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("w.json")).unwrap()).unwrap();
    w["cuts"][0] = Value::from("1/1000");
    put(dir.path(), "moved.json", &w.to_string());
    let v = fairslice(dir.path(), &["verify", "--in", "cake.json", "--alloc", "moved.json", "--eps", "0"]);
    assert_eq!(v.code, 1);
    assert!(!v.report["envy_above_eps"].as_array().unwrap().is_empty());
    assert_ne!(exact(&v.report["max_envy"]), "0");
}

#[test]
fn discrete_witness_passes_ef_and_eq() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "f.json", r#"{"n": 2, "clauses": [[1, 2, -1]]}"#);
    put(dir.path(), "asg.json", "[-1, 2]");
    let g = fairslice(
        dir.path(),
        &["gen", "--kind", "items-sat", "--in", "f.json", "--out", "items.json", "--witness", "asg.json", "--witness-out", "w.json"],
    );
    assert_eq!(g.code, 0, "{}", g.raw);
    let v = fairslice(dir.path(), &["verify", "--in", "items.json", "--alloc", "w.json", "--criteria", "ef,eq"]);
    assert_eq!(v.code, 0, "{}", v.raw);
    assert_eq!(v.report["model"], "items");
}

#[test]
fn partition_generators_need_valid_numbers() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "x.json", "[4, 4, 4]");
    put(dir.path(), "parts.json", r#"{"parts": [[1, 2, 3]]}"#);
    let g = fairslice(dir.path(), &["gen", "--kind", "items-prop3p", "--in", "x.json", "--out", "p.json", "--witness", "parts.json"]);
    assert_eq!(g.code, 0, "{}", g.raw);
    assert_eq!(g.report["items"], 9229);
    put(dir.path(), "small.json", "[2, 2, 2, 2, 2, 2]");
    put(dir.path(), "pairs.json", "[[1, 2, 3], [4, 5, 6]]");
    let g = fairslice(dir.path(), &["gen", "--kind", "items-eq3p", "--in", "small.json", "--out", "e.json"]);
    assert_eq!(g.code, 2);
    assert_eq!(g.report["status"], "error");
    let g = fairslice(
        dir.path(),
        &["gen", "--kind", "items-eq3p", "--scale", "--in", "small.json", "--out", "e.json", "--witness", "pairs.json"],
    );
    assert_eq!(g.code, 0, "{}", g.raw);
}

#[test]
fn disjoint_pipeline_keeps_its_stages() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "items.json", INTERLEAVED);
    let r = fairslice(dir.path(), &["pipeline", "disjoint-ef", "--in", "items.json", "--out-dir", "run"]);
    assert_eq!(r.code, 0, "{}", r.raw);
    for f in ["embedded_cake.json", "grid_allocation.json", "allocation.json"] {
        assert!(dir.path().join("run").join(f).exists(), "{f}");
    }
    let v = fairslice(dir.path(), &["verify", "--in", "items.json", "--alloc", "run/allocation.json", "--criteria", "ef"]);
    assert_eq!(v.code, 0);
}

#[test]
fn exactify_pipeline_reaches_zero_envy() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "inst.json", HALVES);
    let r = fairslice(dir.path(), &["pipeline", "exactify", "--in", "inst.json", "--out-dir", "run"]);
    assert_eq!(r.code, 0, "{}", r.raw);
    assert_eq!(exact(&r.report["max_envy"]), "0");
    let e = fairslice(dir.path(), &["exactify", "--in", "inst.json", "--alloc", "run/approx_allocation.json"]);
    assert_eq!(e.code, 0);
    assert_eq!(exact(&e.report["max_envy"]), "0");
}

#[test]
fn roundtrip_pipeline_respects_eps() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "inst.json", HALVES);
    let r = fairslice(dir.path(), &["pipeline", "c2d-roundtrip", "--eps", "1/4", "--in", "inst.json", "--out-dir", "run"]);
    assert_eq!(r.code, 0, "{}", r.raw);
    assert_eq!(r.report["status"], "pass");
    assert!(dir.path().join("run/items.json").exists());
}

#[test]
fn bridge_commands_compose() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "items.json", INTERLEAVED);
    assert_eq!(fairslice(dir.path(), &["bridge", "d2c", "--in", "items.json", "--out", "cake.json"]).code, 0);
    let g = fairslice(dir.path(), &["solve", "--alg", "grid", "--eps", "1/6", "--in", "cake.json", "--out", "a.json"]);
    assert_eq!(g.code, 0, "{}", g.raw);
    let r = fairslice(dir.path(), &["bridge", "round", "--in", "items.json", "--alloc", "a.json", "--out", "d.json"]);
    assert_eq!(r.code, 0, "{}", r.raw);
    put(dir.path(), "halves.json", HALVES);
    let c = fairslice(dir.path(), &["bridge", "c2d", "--eps", "1/2", "--in", "halves.json", "--out", "c.json"]);
    assert_eq!(c.code, 0, "{}", c.raw);
    assert_eq!(exact(&c.report["delta"]), "1/6");
}

#[test]
fn brute_force_reports_none_with_exit_one() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "items.json", r#"{"items":1,"agents":[[1],[1]]}"#);
    let r = fairslice(dir.path(), &["discrete", "--criteria", "ef", "--in", "items.json"]);
    assert_eq!(r.code, 1);
    let r = fairslice(dir.path(), &["discrete", "--criteria", "prop", "--in", "items.json"]);
    assert_eq!(r.code, 1);
    put(dir.path(), "two.json", r#"{"items":2,"agents":[[1,1],[1,1]]}"#);
    let r = fairslice(dir.path(), &["discrete", "--criteria", "ef,eq", "--in", "two.json", "--threads", "1"]);
    assert_eq!(r.code, 0);
}

#[test]
fn errors_exit_two_with_a_code() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "bad.json", r#"{"agents":[{"blocks":[{"left":"1/2","right":"1/4","height":"1"}]}]}"#);
    let r = fairslice(dir.path(), &["solve", "--alg", "alg1", "--in", "bad.json"]);
    assert_eq!(r.code, 2);
    assert_eq!(r.report["status"], "error");
    assert!(r.report["error"]["code"].is_string());
    let r = fairslice(dir.path(), &["solve", "--alg", "alg1", "--in", "missing.json"]);
    assert_eq!(r.code, 2);
    assert_eq!(r.report["error"]["code"], "io");
}

#[test]
fn reports_are_reproducible_and_thread_independent() {
    let dir = TempDir::new().unwrap();
    put(dir.path(), "inst.json", INTERVALS);
    let args = ["decide", "--constraint", "leftmost:1", "--in", "inst.json", "--out", "a.json"];
    let a = fairslice(dir.path(), &args);
    let first = fs::read(dir.path().join("a.json")).unwrap();
    let b = fairslice(dir.path(), &args);
    assert_eq!(a.raw, b.raw);
    assert_eq!(first, fs::read(dir.path().join("a.json")).unwrap());
    let mut seq = args.to_vec();
    seq.extend(["--threads", "1"]);
    let s = fairslice(dir.path(), &seq);
    assert_eq!(s.report["allocation"], a.report["allocation"]);
    let t = fairslice(dir.path(), &["--timing", "solve", "--alg", "alg1", "--in", "inst.json"]);
    assert!(t.report["wall_time_ms"].is_u64());
}
