//! End-to-end checks of the command-line interface: exit codes, file
//! loading, and stable report output.

use std::io::Write;
use std::process::{Command, Output};

fn finstone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finstone"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_temp(name: &str, contents: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("finstone-test-{}-{name}", std::process::id()));
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    path
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn valid_free_theory_checks_clean() {
    let path = write_temp(
        "flip-theory.json",
        r#"{"ops":[{"name":"flip","arity":2}],"equations":[],"normalizer":"none"}"#,
    );
    let out = finstone(&["check", "theory", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn commutative_theory_with_a_runner_fails_with_witness() {
    let theory = write_temp(
        "comm-theory.json",
        r#"{"ops":[{"name":"oplus","arity":2}],
            "equations":[[{"op":"oplus","children":[{"leaf":0},{"leaf":1}]},
                          {"op":"oplus","children":[{"leaf":1},{"leaf":0}]}]],
            "normalizer":"commutative"}"#,
    );
    let comodel = write_temp(
        "comm-comodel.json",
        r#"{"states":1,"coops":{"oplus":[[0,0]]}}"#,
    );
    let out = finstone(&[
        "check",
        "comodel",
        comodel.to_str().unwrap(),
        "--theory",
        theory.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stdout(&out).contains("state 0"),
        "witness state is reported: {}",
        stdout(&out)
    );
}

#[test]
fn malformed_json_exits_two() {
    let path = write_temp("broken.json", "{ not json");
    let out = finstone(&["check", "theory", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_keys_exit_two() {
    let path = write_temp(
        "extra-key.json",
        r#"{"ops":[{"name":"flip","arity":2}],"equations":[],"normalizer":"none","x":1}"#,
    );
    let out = finstone(&["check", "theory", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn state_behaviour_category_prints_the_chaotic_shape() {
    let out = finstone(&["behaviour-cat", "--builtin", "state:2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("2 objects, 4 morphisms"));
}

#[test]
fn dot_output_is_stable_across_runs() {
    let a = finstone(&["behaviour-cat", "--builtin", "flip:2", "--out", "dot"]);
    let b = finstone(&["behaviour-cat", "--builtin", "flip:2", "--out", "dot"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).starts_with("digraph behaviour"));
}

#[test]
fn sections_of_discrete_three() {
    let out = finstone(&[
        "sections",
        "--builtin-cat",
        "discrete:3",
        "--arity",
        "2",
        "--laws",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("8 sections at output size 2"));
}

#[test]
fn stone_roundtrip_three_atoms() {
    let out = finstone(&["duality", "stone", "--atoms", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("objects=3"), "{text}");
    assert!(text.contains("identities_only=true"), "{text}");
    assert!(text.contains("unit_bijective=true"), "{text}");
    // The shorthand agrees with the long form.
    let short = finstone(&["stone", "--atoms", "3"]);
    assert_eq!(stdout(&short), text);
}

#[test]
fn json_reports_roundtrip() {
    let out = finstone(&["duality", "stone", "--atoms", "2", "--out", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let reprinted = serde_json::to_string_pretty(&value).unwrap();
    let reparsed: serde_json::Value = serde_json::from_str(&reprinted).unwrap();
    assert_eq!(value, reparsed);
    assert_eq!(value["passed"], serde_json::Value::Bool(true));
}

#[test]
fn scry_prints_the_worked_assignment_table() {
    let term = write_temp(
        "worked-term.json",
        r#"{"op":"flip","children":[
              {"leaf":0},
              {"op":"flip","children":[
                  {"op":"flip","children":[{"leaf":1},{"leaf":2}]},
                  {"leaf":3}]}]}"#,
    );
    let out = finstone(&["scry", "--term", term.to_str().unwrap(), "--eval", "101110"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(
        text.contains("{0 -> (1,a0); 100 -> (3,a1); 101 -> (3,a2); 11 -> (2,a3)}"),
        "{text}"
    );
    assert!(text.contains("eval(101110) = (3,a2)"), "{text}");
}

#[test]
fn scry_accepts_tree_files() {
    let tree = write_temp(
        "scry-tree.json",
        r#"{"node":[{"leaf":[0,0]},{"node":[{"leaf":[1,1]},{"leaf":[1,2]}]}]}"#,
    );
    let out = finstone(&["scry", "--tree", tree.to_str().unwrap(), "--eval", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(
        text.contains("{0 -> (0,a0); 10 -> (1,a1); 11 -> (1,a2)}"),
        "{text}"
    );
    assert!(text.contains("eval(10) = (1,a1)"), "{text}");
}

#[test]
fn zero_jobs_is_rejected() {
    let out = finstone(&["behaviour-cat", "--builtin", "state:2", "--jobs", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn random_fixture_seed_is_logged_on_stderr() {
    let out = finstone(&[
        "duality",
        "counit",
        "--builtin-cat",
        "random:9",
        "--out",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("seed=9"), "{err}");
    // stdout stays pure JSON.
    serde_json::from_str::<serde_json::Value>(&stdout(&out)).unwrap();
}

#[test]
fn counit_on_builtin_categories() {
    for cat in ["chaotic:2", "cyclic:3", "random:17"] {
        let out = finstone(&["duality", "counit", "--builtin-cat", cat]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "counit on {cat}: {}",
            stdout(&out)
        );
    }
}

#[test]
fn unit_reports_the_gap_on_the_free_theory() {
    let out = finstone(&["duality", "unit", "--builtin", "flip:2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("surjective=false"), "{text}");
    assert!(text.contains("outside the image"), "{text}");
}

#[test]
fn idempotence_on_state() {
    let out = finstone(&["duality", "idempotence", "--builtin", "state:2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("passed=true"));
}

#[test]
fn triangle_on_chaotic_two() {
    let out = finstone(&["duality", "triangle", "--builtin-cat", "chaotic:2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn category_check_from_file() {
    let good = write_temp(
        "good-cat.json",
        r#"{"objects":1,"morphisms":[{"src":0,"tgt":0}],"identities":[0],"comp":[[0,0,0]]}"#,
    );
    let out = finstone(&["check", "category", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    // Broken composition table: composing with the identity loses m1.
    let bad = write_temp(
        "bad-cat.json",
        r#"{"objects":1,"morphisms":[{"src":0,"tgt":0},{"src":0,"tgt":0}],
            "identities":[0],
            "comp":[[0,0,0],[0,1,1],[1,0,0],[1,1,1]]}"#,
    );
    let out = finstone(&["check", "category", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn boolean_check() {
    let path = write_temp("bool.json", r#"{"atoms":3}"#);
    let out = finstone(&["check", "boolean", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}
