use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idealprob"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = run(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

#[test]
fn prob_examples() {
    let v = json(&["prob", "-f", "Q(zeta3)", "-n", "2", "-k", "2", "-r", "1", "-t", "4"]);
    assert_eq!(v["results"]["rounded"], "0.7781");
    assert_eq!(v["field"], "Z[zeta3]");
    assert!(v["results"]["error_bound"].as_f64().unwrap() <= 5e-5);
    let v = json(&["prob", "-f", "Q", "-n", "3", "-k", "3", "-r", "1", "-t", "4"]);
    assert_eq!(v["results"]["rounded"], "0.8319");
    let keys: Vec<_> = v["params"].as_object().unwrap().keys().cloned().collect();
    assert_eq!(keys, ["spec", "n", "k", "r", "t"]);
}

#[test]
fn prob_with_explicit_primes() {
    let v = json(&["prob", "-f", "Q", "-n", "2", "--primes", "3"]);
    assert_eq!(v["results"]["last_prime"], 5);
    assert_eq!(v["results"]["error_bound"], Value::Null);
    assert_eq!(v["params"]["N"], 3);
    assert_eq!(code(&["prob", "-f", "Q", "-n", "2", "--primes", "10", "-t", "3"]), 2);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["prob", "-f", "Q", "-n", "2", "-t", "4"]), 0);
    assert_eq!(code(&["prob", "-f", "Q", "-n", "2", "-k", "2", "-r", "1", "-t", "9"]), 3);
    assert_eq!(code(&["prob", "-f", "Q(sqrt12)", "-n", "2"]), 2);
    assert_eq!(code(&["prob", "-f", "Q(sqrt", "-n", "2"]), 2);
    assert_eq!(code(&["prob", "-f", "Q", "-n", "2", "-k", "3"]), 2);
    assert_eq!(code(&["prob", "-f", "poly:1,0,0,0,1", "-n", "2"]), 2);
    assert_eq!(code(&["estimate", "-f", "Q", "-n", "2", "-x", "100", "--samples", "0"]), 2);
    assert_eq!(code(&["split", "-f", "Q", "-p", "9"]), 2);
    assert_eq!(code(&["verify", "nonsense"]), 2);
    assert_eq!(code(&["enumerate", "-f", "Q", "-x", "10^9"]), 2);
    assert_eq!(code(&["bogus"]), 2);
}

#[test]
fn strict_mode_rejects_caveats() {
    // x^2 + 3 is (x + 1)^2 mod 2
    let args = ["prob", "-f", "poly:3,0,1", "-n", "2", "-t", "2"];
    let loose = run(&args);
    assert_eq!(loose.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&loose.stderr).contains("warning"));
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(code(&strict), 3);
    assert_eq!(code(&["prob", "-f", "Q(sqrt-3)", "-n", "2", "-t", "2", "--strict"]), 0);
}

#[test]
fn table_csv_shape() {
    let out = run(&["table", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "n,Z,Z[sqrt2],Z[i],Z[zeta3],Z[zeta5]");
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 6));
    assert_eq!(lines[1], "2,0.6079,0.6969,0.6637,0.7781,0.9155");
}

#[test]
fn single_cell_table_matches_prob() {
    let t = json(&["table", "-f", "Q(sqrt-1)", "-n", "3"]);
    let p = json(&["prob", "-f", "Q(sqrt-1)", "-n", "3"]);
    let cell = &t["results"]["rows"][0]["cells"][0];
    assert_eq!(cell["value"], p["results"]["value"]);
    assert_eq!(cell["rounded"], "0.3572");
}

#[test]
fn json_round_trips_through_text() {
    let v = json(&["split", "-f", "Q(zeta5)", "--up-to", "30"]);
    let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(again, v);
    for key in ["command", "field", "params", "results", "caveat", "wall_time_ms"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn split_examples() {
    let v = json(&["split", "-f", "Q(sqrt-1)", "-p", "5"]);
    assert_eq!(v["results"]["primes"][0]["classes"], serde_json::json!([{"f": 1, "e": 1, "g": 2}]));
    let v = json(&["split", "-f", "Q", "-p", "7"]);
    assert_eq!(v["results"]["primes"][0]["classes"], serde_json::json!([{"f": 1, "e": 1, "g": 1}]));
    let v = json(&["split", "-f", "Q(zeta5)", "-p", "11"]);
    assert_eq!(v["results"]["primes"][0]["classes"], serde_json::json!([{"f": 1, "e": 1, "g": 4}]));
    let out = run(&["split", "-f", "Q(zeta5)", "--up-to", "11", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "p,f,e,g,caveat\n2,4,1,1,false\n3,4,1,1,false\n5,1,4,1,false\n7,4,1,1,false\n11,1,1,4,false\n");
}

#[test]
fn estimate_is_reproducible() {
    let args = ["estimate", "-f", "Q(sqrt-1)", "-n", "2", "-x", "2000", "--samples", "30000", "--seed", "9"];
    let mut a = json(&args);
    let mut b = json(&args);
    a.as_object_mut().unwrap().remove("wall_time_ms");
    b.as_object_mut().unwrap().remove("wall_time_ms");
    assert_eq!(a, b);
    // lattice-point count of Gaussian integers up to associates
    assert_eq!(a["results"]["ideal_count"], 1573);
}

#[test]
fn convergence_rows() {
    let v = json(&["estimate", "-f", "Q", "-n", "2", "-x", "10", "-x", "100", "-x", "1000", "--convergence"]);
    let rows = v["results"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["exact"] == true));
    assert!(rows[2]["gap"].as_f64().unwrap() < 0.01);
    assert_eq!(code(&["estimate", "-f", "Q", "-n", "2", "-x", "10", "-x", "100"]), 2);
}

#[test]
fn enumerate_examples() {
    let v = json(&["enumerate", "-f", "Q", "-x", "1000", "--count-only"]);
    assert_eq!(v["results"]["ideal_count"], 1000);
    let v = json(&["enumerate", "-f", "Q(sqrt-1)", "-x", "5"]);
    assert_eq!(v["results"]["ideals"].as_array().unwrap().len(), 5);
    let v = json(&["enumerate", "-f", "Q(sqrt-1)", "-x", "10^5", "--count-only"]);
    assert!((v["results"]["density"].as_f64().unwrap() - 0.785).abs() < 0.01);
}

#[test]
fn verify_suites() {
    let out = run(&["verify", "identities"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().all(|l| !l.starts_with("FAIL")));
    let v = json(&["verify", "zeta-consistency"]);
    assert_eq!(v["results"]["passed"], true);
    let out = run(&["verify", "all", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("suite,check,passed,detail\n"));
    assert!(text.contains("mobius-count,"));
}
