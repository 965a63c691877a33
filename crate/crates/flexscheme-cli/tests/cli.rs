//! End-to-end tests driving the compiled binary.

use std::path::Path;
use std::process::{Command, Output};

fn flexscheme(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flexscheme"))
        .args(args)
        .env_remove("FLEXSCHEME_NORM_CAP")
        .env_remove("FLEXSCHEME_ORACLE_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

#[test]
fn discover_writes_a_scheme_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s123.json");
    let out = flexscheme(&[
        "discover",
        "--basis",
        "123",
        "--max-depth",
        "8",
        "--max-gap",
        "2",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("{\n  \"format\": \"flexscheme-v1\""));

    let verify = flexscheme(&["verify", "--scheme", path.to_str().unwrap(), "--n-max", "9"]);
    assert_eq!(verify.status.code(), Some(0));
    assert_eq!(stdout(&verify).trim(), "OK 0..9");

    let seq = flexscheme(&["enumerate", "--scheme", path.to_str().unwrap(), "-n", "6"]);
    assert_eq!(seq.status.code(), Some(0));
    let text = stdout(&seq);
    let terms: Vec<&str> = text.lines().collect();
    assert_eq!(terms, vec!["1", "1", "2", "5", "14", "42", "132"]);
}

#[test]
fn discover_prints_the_scheme_without_an_output_path() {
    let out = flexscheme(&["discover", "--basis", "132"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["format"], "flexscheme-v1");
    assert_eq!(doc["basis"][0], "132");
}

#[test]
fn discover_failure_report_and_exit_codes() {
    let out = flexscheme(&["discover", "--basis", "1423;2314", "--mode", "es"]);
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["outcome"], "irreducible");
    let frontier: Vec<String> = doc["frontier"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert!(frontier.iter().any(|p| p == "3214"));
    assert!(frontier.iter().any(|p| p == "4321"));
}

#[test]
fn discover_timeout_exit_code() {
    let out = flexscheme(&["discover", "--basis", "4231;4123", "--time-budget", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["outcome"], "timeout");
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(
        flexscheme(&["discover", "--basis", ""]).status.code(),
        Some(64)
    );
    assert_eq!(flexscheme(&["discover"]).status.code(), Some(64));
    assert_eq!(
        flexscheme(&["discover", "--basis", "1x3"]).status.code(),
        Some(64)
    );
    assert_eq!(flexscheme(&["nonsense"]).status.code(), Some(64));
}

#[test]
fn missing_scheme_file_exits_66() {
    let out = flexscheme(&["enumerate", "--scheme", "/nonexistent/missing.json"]);
    assert_eq!(out.status.code(), Some(66));
}

#[test]
fn oracle_cap_exits_69() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    flexscheme(&["discover", "--basis", "123", "-o", path.to_str().unwrap()]);
    let out = flexscheme(&[
        "verify",
        "--scheme",
        path.to_str().unwrap(),
        "--n-max",
        "12",
    ]);
    assert_eq!(out.status.code(), Some(69));

    // The cap is adjustable by flag and by environment variable.
    let out = flexscheme(&[
        "verify",
        "--scheme",
        path.to_str().unwrap(),
        "--n-max",
        "12",
        "--cap",
        "12",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = Command::new(env!("CARGO_BIN_EXE_flexscheme"))
        .args([
            "verify",
            "--scheme",
            path.to_str().unwrap(),
            "--n-max",
            "11",
        ])
        .env("FLEXSCHEME_ORACLE_CAP", "11")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn corrupted_scheme_is_caught_by_verify() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    flexscheme(&["discover", "--basis", "123", "-o", path.to_str().unwrap()]);
    // Redirect one deletion to the wrong position; structure stays valid,
    // counts do not.
    let text = std::fs::read_to_string(&path).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let mut doc = doc;
    let rules = doc["rules"].as_array_mut().unwrap();
    let mut changed = false;
    for rule in rules.iter_mut() {
        if rule["downfix"].as_array().unwrap().len() == 2 {
            for case in rule["cases"].as_array_mut().unwrap() {
                if case["action"] == 2 {
                    case["action"] = serde_json::json!(1);
                    changed = true;
                }
            }
        }
    }
    assert!(changed, "the stored scheme has a deletion case to corrupt");
    std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();

    let out = flexscheme(&["verify", "--scheme", path.to_str().unwrap(), "--n-max", "8"]);
    assert_eq!(out.status.code(), Some(1));
    let line = stdout(&out);
    assert!(line.starts_with("MISMATCH at n="), "got: {line}");
}

#[test]
fn structurally_broken_scheme_exits_65() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    flexscheme(&["discover", "--basis", "123", "-o", path.to_str().unwrap()]);
    let text = std::fs::read_to_string(&path).unwrap();
    // Drop the rule for downfix 12 while 1 still refines into it.
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rules = doc["rules"].as_array().unwrap();
    let kept: Vec<serde_json::Value> = rules
        .iter()
        .filter(|r| {
            r["downfix"].as_array().unwrap() != &vec![serde_json::json!(1), serde_json::json!(2)]
        })
        .cloned()
        .collect();
    doc["rules"] = serde_json::json!(kept);
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = flexscheme(&["enumerate", "--scheme", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(65));
}

#[test]
fn enumerate_json_and_zero_terms() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    flexscheme(&["discover", "--basis", "123", "-o", path.to_str().unwrap()]);
    let out = flexscheme(&["enumerate", "--scheme", path.to_str().unwrap(), "-n", "0"]);
    assert_eq!(stdout(&out).trim(), "1");

    let out = flexscheme(&[
        "enumerate",
        "--scheme",
        path.to_str().unwrap(),
        "-n",
        "4",
        "--json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["basis"], "123");
    assert_eq!(doc["terms"].as_array().unwrap().len(), 5);
    assert_eq!(doc["terms"][4], "14");
}

#[test]
fn big_terms_print_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    flexscheme(&["discover", "--basis", "12", "-o", path.to_str().unwrap()]);
    // One descending permutation per length; checks the n_max plumbing far
    // beyond machine-word growth concerns.
    let out = flexscheme(&["enumerate", "--scheme", path.to_str().unwrap(), "-n", "40"]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 41);
    assert!(lines.iter().all(|l| *l == "1"));
}

#[test]
fn oracle_command_both_engines() {
    let tree = flexscheme(&["oracle", "--basis", "123", "-n", "6"]);
    let naive = flexscheme(&["oracle", "--basis", "123", "-n", "6", "--naive"]);
    assert_eq!(stdout(&tree), stdout(&naive));
    let text = stdout(&tree);
    let terms: Vec<&str> = text.trim().lines().collect();
    assert_eq!(terms.last(), Some(&"132"));

    let multi = flexscheme(&["oracle", "--basis", "123", "--basis", "321", "-n", "5"]);
    let terms: Vec<String> = stdout(&multi).trim().lines().map(str::to_string).collect();
    assert_eq!(terms, vec!["1", "1", "2", "4", "4", "0"]);
}

#[test]
fn symmetries_command() {
    let out = flexscheme(&["symmetries", "--basis", "123"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["representative"], "123");
    let members: Vec<&str> = doc["members"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(members, vec!["123", "321"]);
}

#[test]
fn census_of_length_three_families() {
    let out = flexscheme(&[
        "census",
        "--family",
        "3",
        "--class-budget",
        "30",
        "--jobs",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<serde_json::Value> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    for line in &lines {
        assert_eq!(line["fs"]["status"], "found");
        assert_eq!(line["fs"]["oracle_ok"], true);
        assert_eq!(line["es"]["status"], "found");
    }

    let out = flexscheme(&[
        "census",
        "--family",
        "3,3",
        "--class-budget",
        "30",
        "--jobs",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<serde_json::Value> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 5);
    assert!(lines
        .iter()
        .all(|l| l["es"]["status"] == "found" && l["fs"]["status"] == "found"));
}

#[test]
fn discover_with_symmetries_succeeds_on_the_hard_pair() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hard.json");
    let out = flexscheme(&[
        "discover",
        "--basis",
        "4231;4123",
        "--try-symmetries",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let scheme: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(scheme["basis"].as_array().unwrap().len(), 2);

    let verify = flexscheme(&["verify", "--scheme", path.to_str().unwrap(), "--n-max", "8"]);
    assert_eq!(verify.status.code(), Some(0));
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = flexscheme(&[
            "discover",
            "--basis",
            "1342;1432",
            "-o",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(
        std::fs::read(&a).unwrap(),
        std::fs::read(&b).unwrap(),
        "independent runs must serialize identically"
    );
    assert!(Path::new(&a).exists());
}
