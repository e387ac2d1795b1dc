use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn blu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blu")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = blu(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)));
    (out.status.code().unwrap(), v)
}

fn temp(name: &str, contents: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("blu-{}-{name}", std::process::id()));
    std::fs::write(&p, contents).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn bex_is_not_global() {
    let (code, v) = json(&["is-global", "B_ex"]);
    assert_eq!(code, 1);
    assert_eq!(v["verdict"], "refuted");
    let section = &v["evidence"]["result"]["evidence"]["section"];
    assert_eq!(section["name"], "s");
    let relations: Vec<&str> = v["evidence"]["gamma"]["relations"].as_array().unwrap().iter().map(|r| r.as_str().unwrap()).collect();
    assert!(relations.contains(&"a + b = s"), "{relations:?}");
    let monoid: Vec<&str> = v["evidence"]["gamma"]["monoid_relations"].as_array().unwrap().iter().map(|r| r.as_str().unwrap()).collect();
    assert!(monoid.contains(&"g*s = a") && monoid.contains(&"h*s = b"), "{monoid:?}");
}

#[test]
fn nat_cover_by_two_and_three_has_a_scaling_witness() {
    let (code, v) = json(&["conservativity", "N", "--cover", "2,3"]);
    assert_eq!(code, 1);
    assert_eq!(v["evidence"]["result"]["evidence"]["kind"], "scaling");
    assert_eq!(v["evidence"]["replayed"], true);
}

#[test]
fn projective_line_compares() {
    let out = blu(&["compare-gf", "P1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("compare-gf P1: PROVED"));
}

#[test]
fn document_check_reports_invalid_morphisms() {
    let doc = temp("check.blu", "blueprint S = F1[u] / { u^2 = 1 }\nmorphism f : S -> A1 { u -> x }\n");
    let (code, v) = json(&["--file", doc.to_str().unwrap(), "check"]);
    assert_eq!(code, 1);
    assert_eq!(v["evidence"]["declarations"][1]["validation"]["verdict"], "refuted");
    let ok = temp("ok.blu", "blueprint S = F1[u] / { u^2 = 1 }\nmorphism f : S -> S { }\n");
    assert_eq!(blu(&["--file", ok.to_str().unwrap(), "check"]).status.code(), Some(0));
}

#[test]
fn syntax_errors_exit_3_with_position() {
    let doc = temp("bad.blu", "blueprint B = F1[g, h]\n  / { g + = 1 }\n");
    let out = blu(&["--file", doc.to_str().unwrap(), "check"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("bad.blu:2:11: syntax error"), "{}", stderr(&out));
}

#[test]
fn input_errors_exit_3() {
    assert_eq!(blu(&["primes", "Nope"]).status.code(), Some(3));
    assert_eq!(blu(&["glue", "B_ex"]).status.code(), Some(3));
    assert_eq!(blu(&["--bounds", "depth=3", "primes", "N"]).status.code(), Some(3));
    assert_eq!(blu(&["no-such-command"]).status.code(), Some(3));
    assert_eq!(blu(&["--file", "/nonexistent/doc.blu", "check"]).status.code(), Some(3));
}

#[test]
fn help_exits_0() {
    let out = blu(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("compare-gf"));
}

#[test]
fn notices_go_to_stderr_and_the_report() {
    let doc = temp("notice.blu", "blueprint A = F1[x, y] / { x*y = x }\n");
    let out = blu(&["--file", doc.to_str().unwrap(), "--json", "primes", "A"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("notice: A: `x*y = x`"), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["notices"].as_array().unwrap().len(), 1);
}

#[test]
fn reports_record_provenance() {
    let text = "blueprint C = F1[p, q] / { p + q = 1 }\n";
    let doc = temp("prov.blu", text);
    let (_, v) = json(&["--file", doc.to_str().unwrap(), "primes", "C"]);
    assert_eq!(v["schema"], "blu.report.v1");
    assert_eq!(v["provenance"]["document"], text);
    assert_eq!(v["provenance"]["target_declaration"], "blueprint C = F1[p, q] / { p + q = 1 }");
    assert_eq!(v["args"], serde_json::json!(["primes", "C"]));
}

#[test]
fn bounds_flag_reaches_the_report() {
    let (_, v) = json(&["--bounds", "degree=5,steps=999", "primes", "N"]);
    assert_eq!(v["bounds"]["max_degree"], 5);
    assert_eq!(v["bounds"]["max_steps"], 999);
}

#[test]
fn sampled_checks_are_seeded() {
    let a = blu(&["--seed", "11", "--json", "conservativity", "N", "--sample", "4"]);
    let b = blu(&["--seed", "11", "--json", "conservativity", "N", "--sample", "4"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), Some(1));
}

fn replay(name: &str, args: &[&str]) -> (i32, Value) {
    let out = blu(&[&["--json"], args].concat());
    let report = temp(name, &String::from_utf8_lossy(&out.stdout));
    json(&["check", "--replay", report.to_str().unwrap()])
}

#[test]
fn reports_replay() {
    let doc = temp("replay.blu", "presentation A = atlas P1\n");
    let file = doc.to_str().unwrap();
    for (i, args) in [
        vec!["is-global", "B_ex"],
        vec!["conservativity", "N", "--cover", "2,3"],
        vec!["conservativity", "N6", "--cover", "10,21"],
        vec!["conservativity", "B_ex", "--cover", "g,h"],
        vec!["check-algebraic", "Bex_cover"],
        vec!["--file", file, "refine", "P1", "A"],
        vec!["primes", "B_ex"],
    ]
    .iter()
    .enumerate()
    {
        let (code, v) = replay(&format!("r{i}.json"), args);
        assert_eq!(code, 0, "{args:?}: {v}");
        assert_eq!(v["evidence"]["mismatches"], serde_json::json!([]));
    }
}

#[test]
fn tampered_reports_do_not_replay() {
    let out = blu(&["--json", "conservativity", "N6", "--cover", "10,21"]);
    let mut v: Value = serde_json::from_slice(&out.stdout).unwrap();
    v["evidence"]["result"]["evidence"]["coefficients"] = serde_json::json!(["9", "7"]);
    let report = temp("tampered.json", &v.to_string());
    let (code, r) = json(&["check", "--replay", report.to_str().unwrap()]);
    assert_eq!(code, 1);
    let checks = r["evidence"]["certificates_checked"].as_array().unwrap();
    assert_eq!(checks[0]["valid"], false);
}
