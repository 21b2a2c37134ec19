use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use graphlet_core::generators::clique;
use graphlet_core::oracle::{enumerate_graphlets, relaxation_time, ChainMatrix};
use graphlet_core::Graph;
use serde_json::Value;

const STAR: &str = "0 1\n0 2\n0 3\n";
const P4: &str = "0 1\n1 2\n2 3\n";
const K4: &str = "0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n";

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_graphlet"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_line(o: &Output) -> Value {
    serde_json::from_str(stdout(o).trim()).expect("one JSON document")
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&doc).expect("schema compiles")
}

fn assert_valid(name: &str, doc: &Value) {
    let v = schema(name);
    let errors: Vec<String> = v.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}\n{doc}");
}

#[test]
fn ugs_star_two_samples() {
    let o = run(&["sample", "--algo", "ugs", "--k", "3", "--samples", "2", "--seed", "1"], STAR);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    for l in lines {
        let ids: Vec<usize> = l.split(' ').map(|t| t.parse().unwrap()).collect();
        assert_eq!(ids.len(), 3);
        assert!(ids.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn verify_spectral_on_p4() {
    let o = run(&["verify", "--suite", "spectral"], P4);
    assert_eq!(o.status.code(), Some(0));
    let doc = json_line(&o);
    assert_valid("verify.json", &doc);
    let r = &doc["reports"][0];
    let g = Graph::load_edge_list(P4.as_bytes()).unwrap();
    let tau_g = relaxation_time(&ChainMatrix::from_graph(&g)).unwrap();
    assert!((r["tau_graph"].as_f64().unwrap() - tau_g).abs() < 1e-9);
    assert_eq!(r["rho"].as_f64(), Some(2.0));
    assert!(r["tau_line_graph"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_bounds_and_walk() {
    for suite in ["bounds", "walk"] {
        let o = run(&["verify", "--suite", suite, "--gen", "lollipop:3,2,3"], "");
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let doc = json_line(&o);
        assert_valid("verify.json", &doc);
        assert_eq!(doc["pass"], Value::Bool(true));
    }
}

#[test]
fn verify_disconnected_graph_is_a_usage_error() {
    let o = run(&["verify", "--suite", "spectral"], "0 1\n2 3\n");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn count_k4_triangles() {
    let o = run(&["count", "--k", "3", "--eps0", "0.1", "--eps1", "0.1", "--delta", "0.1", "--seed", "1"], K4);
    assert!(o.status.success());
    let doc = json_line(&o);
    assert_valid("count.json", &doc);
    let truth = enumerate_graphlets(&clique(4), 3).unwrap().len() as f64;
    let tri = doc["classes"].as_array().unwrap().iter().find(|c| c["name"] == "triangle").unwrap();
    assert!((tri["N_hat"].as_f64().unwrap() - truth).abs() <= 0.1 * truth);
    assert_eq!(doc["seed"], 1);
}

#[test]
fn exit_codes_for_bad_input() {
    assert_eq!(run(&["enumerate", "--k", "2"], "0 0\n").status.code(), Some(2));
    assert_eq!(run(&["enumerate", "--k", "2"], "0 1\n0 1\n").status.code(), Some(2));
    assert_eq!(run(&["enumerate", "--k", "2"], "0 x\n").status.code(), Some(2));
    assert_eq!(run(&["sample", "--k", "3", "--nope"], STAR).status.code(), Some(2));
    assert_eq!(run(&["sample", "--k", "3", "--algo", "ugs"], "0 1\n").status.code(), Some(2));
    let o = run(&["enumerate", "--k", "2"], "0 1\n1 2\n0 0\n");
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn enumerate_lists_graphlets() {
    let o = run(&["enumerate", "--k", "3"], P4);
    assert_eq!(stdout(&o), "0 1 2\n1 2 3\n");
    let o = run(&["enumerate", "--k", "3", "--count", "--gen", "clique:6"], "");
    assert_eq!(stdout(&o).trim(), "20");
}

#[test]
fn same_seed_same_bytes() {
    for algo in ["ugs", "apx-ugs", "rw"] {
        let args = ["sample", "--algo", algo, "--k", "3", "--samples", "40", "--seed", "9", "--gen", "er:14,0.4,2", "--steps", "20"];
        let a = run(&args, "");
        let b = run(&args, "");
        assert!(a.status.success(), "{algo}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{algo}");
    }
}

#[test]
fn jobs_do_not_change_output() {
    for algo in ["ugs", "apx-ugs"] {
        let base = ["sample", "--algo", algo, "--k", "3", "--samples", "30", "--seed", "4", "--gen", "er:14,0.4,2"];
        let one = run(&[&base[..], &["--jobs", "1"]].concat(), "");
        let three = run(&[&base[..], &["--jobs", "3"]].concat(), "");
        assert!(one.status.success());
        assert_eq!(one.stdout, three.stdout, "{algo}");
    }
}

#[test]
fn order_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("order.json");
    let cache = cache.to_str().unwrap();
    let o = run(&["preprocess", "--k", "3", "--gen", "er:16,0.3,1", "--out", cache], "");
    assert!(o.status.success());
    assert_valid("preprocess.json", &json_line(&o));
    let base = ["sample", "--k", "3", "--samples", "25", "--seed", "3", "--gen", "er:16,0.3,1"];
    let fresh = run(&base, "");
    let cached = run(&[&base[..], &["--order-cache", cache]].concat(), "");
    assert_eq!(fresh.stdout, cached.stdout);
    let wrong_k = run(&["sample", "--k", "4", "--gen", "er:16,0.3,1", "--order-cache", cache], "");
    assert_eq!(wrong_k.status.code(), Some(2));
    let wrong_mode = run(&["sample", "--algo", "apx-ugs", "--k", "3", "--gen", "er:16,0.3,1", "--order-cache", cache], "");
    assert_eq!(wrong_mode.status.code(), Some(2));
}

#[test]
fn apx_order_cache_is_written_and_reused() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("apx.json");
    let cache = cache.to_str().unwrap();
    let args = ["sample", "--algo", "apx-ugs", "--k", "3", "--samples", "10", "--seed", "5", "--gen", "er:12,0.4,3", "--order-cache", cache, "--ledger"];
    let first = run(&args, "");
    assert!(first.status.success());
    assert!(Path::new(cache).exists());
    let second = run(&args, "");
    assert_eq!(first.stdout, second.stdout);
    let ledger = |o: &Output| -> Value { serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap() };
    let (l1, l2) = (ledger(&first), ledger(&second));
    assert_valid("ledger.json", &l1);
    assert!(l1["preprocessing"]["neighbor_queries"].as_u64().unwrap() > 0);
    assert_eq!(l2["preprocessing"]["neighbor_queries"], 0);
    assert_eq!(l1["seed"], 5);
}

#[test]
fn sample_json_format() {
    let o = run(&["sample", "--k", "3", "--samples", "3", "--seed", "2", "--format", "json"], K4);
    let doc = json_line(&o);
    assert_valid("sample.json", &doc);
    assert_eq!(doc["samples"].as_array().unwrap().len(), 3);
    assert_eq!(doc["seed"], 2);
}

#[test]
fn bench_rows_and_fit() {
    let o = run(
        &["bench", "--algo", "apx-dd", "--k", "3", "--eps", "0.5", "--gen", "er:40,0.3,1", "--gen", "er:80,0.2,1", "--gen", "er:160,0.15,1", "--fit"],
        "",
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_valid("bench.json", r);
    }
    assert!(rows[3]["x"].is_number());
    let o = run(&["bench", "--algo", "ugs", "--k", "3", "--samples", "5", "--gen", "clique:6"], "");
    let row: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_valid("bench.json", &row);
    assert_eq!(row["samples"], 5);
}

#[test]
fn rw_on_disconnected_graph_warns() {
    let o = run(&["sample", "--algo", "rw", "--k", "2", "--steps", "3", "--samples", "4"], "0 1\n1 2\n3 4\n");
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("disconnected"));
}
