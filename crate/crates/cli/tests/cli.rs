use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chebimg")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn roots_a2() {
    let out = run(&["roots", "A2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["roots"].as_array().unwrap().len(), 6);
    assert_eq!(v["axioms"]["reflection_closure"]["passed"], Value::Bool(true));
}

#[test]
fn roots_reducible_block_diagonal() {
    let v = json(&run(&["roots", "--type", "A1xA1"]));
    assert_eq!(v["cartan"], serde_json::json!([[2, 0], [0, 2]]));
}

#[test]
fn bad_type_is_an_error() {
    let out = run(&["roots", "Z9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Z9"));
}

#[test]
fn weyl_order() {
    let v = json(&run(&["weyl", "G2"]));
    assert_eq!(v["order"], 12);
    let out = run(&["weyl", "E6"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn chebmap_a2_quadratics() {
    let out = run(&["chebmap", "A2", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["display"], serde_json::json!(["X1^2 - 2*X2", "X2^2 - 2*X1"]));
    assert_eq!(v["components"][0][1], serde_json::json!({"exponents": [0, 1], "coeff": -2}));
}

#[test]
fn chebmap_flags_and_out_file() {
    let path = std::env::temp_dir().join(format!("chebimg-cli-test-{}.json", std::process::id()));
    let out = run(&["chebmap", "--type", "A1", "--d", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(v["display"][0], "X1^5 - 5*X1^3 + 5*X1");
    assert!(v["verification"]["max_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn chebmap_g2_integral() {
    let v = json(&run(&["chebmap", "G2", "2"]));
    for comp in v["components"].as_array().unwrap() {
        for term in comp.as_array().unwrap() {
            assert!(term["coeff"].is_i64());
        }
    }
}

#[test]
fn verify_functional_fails_on_impossible_tolerance() {
    let out = run(&["verify-functional", "B2", "3", "--tol", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], Value::Bool(false));
}

#[test]
fn postcritical_a2() {
    let out = run(&["verify-postcritical", "A2", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["deltoid_max_residual"].as_f64().unwrap() < 1e-7);
}

#[test]
fn img_verify_a1() {
    let out = run(&["img-verify", "A1", "2", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["numeric_orders"], serde_json::json!([2, 8, 16]));
}

#[test]
fn img_verify_refuses_large_sizes() {
    let out = run(&["img-verify", "B3", "3", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("refusing"));
    let out = run(&["img-verify", "A2", "2", "2", "--cap-vertices", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn act_words() {
    let out = run(&["act", "A1", "2", "t", "111"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "000");
    let out = run(&["act", "A2", "2", "id", "0101"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0101");
    let out = run(&["act", "A1", "2", "s0 s1", "011"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "111");
    assert_eq!(run(&["act", "A1", "2", "t", "121"]).status.code(), Some(2));
}

#[test]
fn automaton_a1() {
    let out = run(&["automaton", "A1", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["alphabet_size"], 2);
    assert_eq!(v["states"].as_array().unwrap().len(), 3);
    let text = run(&["automaton", "A1", "2", "--format", "text"]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("s0 = [1 0]"));
}
