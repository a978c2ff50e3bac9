use std::process::{Command, Output};

use symlab::trajectory::HEADER;

fn symlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symlab")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn passing_group_has_no_fail_marker() {
    let o = symlab(&["verify", "--group", "I", "--samples", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(!text.contains("FAIL"), "{text}");
    assert!(text.contains("0 failed"), "{text}");
}

#[test]
fn errata_only_run_exits_zero_with_errata() {
    let o = symlab(&["verify", "--group", "VIII", "--samples", "10", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["schema"], "symlab-report/1");
    assert_eq!(doc["passed"], true);
    let errata = doc["reports"][0]["errata"].as_array().unwrap();
    assert!(!errata.is_empty());
    assert!(errata.iter().all(|e| e["printed_fails"] == true && e["consistent_passes"] == true), "{errata:?}");
}

#[test]
fn json_is_byte_identical_across_runs() {
    let args = ["verify", "--group", "all", "--samples", "15", "--seed", "7", "--format", "json"];
    let a = symlab(&args);
    let b = symlab(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let names: Vec<_> = doc["reports"].as_array().unwrap().iter().map(|r| r["model"].as_str().unwrap().to_string()).collect();
    let expected: Vec<_> = ["I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX"].iter().map(|t| format!("G3({t})")).collect();
    assert_eq!(names, expected);
}

#[test]
fn failing_manifest_exits_one_and_names_the_check() {
    let exported = stdout(&symlab(&["export", "--group", "I"]));
    let bad = exported.replace(r#"a = ["0", "alpha0", "#, r#"a = ["0", "alpha0 + u1^2", "#);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, bad).unwrap();
    let o = symlab(&["verify", "--manifest", path.to_str().unwrap(), "--samples", "10"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.contains("FAIL") && l.contains("admissibility, generator 1")), "{text}");
}

#[test]
fn solve_prints_family_and_refuses_semisimple_groups() {
    let o = symlab(&["solve", "--group", "V", "--system"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("field system") && text.contains("solution family"), "{text}");
    let o = symlab(&["solve", "--group", "IX"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("I..VII"));
}

#[test]
fn simulate_writes_csv_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let o = symlab(&["simulate", "--group", "III", "--tau", "1", "--tol", "1e-10", "--seed", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), HEADER.to_vec());
    let rows: Vec<Vec<f64>> = rdr.records().map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect()).collect();
    assert!(rows.len() > 2);
    assert_eq!(rows[0][0], 0.0);
    assert!((rows.last().unwrap()[0] - 1.0).abs() < 1e-12);
    let h0 = rows[0][9];
    assert!(rows.iter().all(|r| (r[9] - h0).abs() <= 1e-8 * h0.abs().max(1.0)));
    assert!(String::from_utf8_lossy(&o.stderr).contains("drift H"));
}

#[test]
fn simulate_accepts_explicit_state_and_bindings() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("b.toml");
    std::fs::write(&b, "[bindings]\nalpha0 = \"0\"\nbeta0 = \"0\"\ngamma0 = \"0\"\n").unwrap();
    let o = symlab(&["simulate", "--group", "I", "--tau", "1", "--bindings", b.to_str().unwrap(), "--state", "0,0,0,0,0,1,0,0"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    // free motion along u1 with unit-scale metric
    assert!(last[2].abs() > 0.5, "{last:?}");
    assert_eq!(&last[6..9], &[1.0, 0.0, 0.0]);
}

#[test]
fn export_and_errata_commands() {
    let o = symlab(&["export", "--group", "VII", "--bindings"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for section in ["[model]", "[params]", "[frame]", "[metric]", "[potential]", "[bindings]"] {
        assert!(text.contains(section), "{section}\n{text}");
    }
    let o = symlab(&["errata", "--group", "all"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("G3(VIII)") && !text.contains("NOT reproduced"), "{text}");
}

#[test]
fn unknown_group_is_a_usage_error() {
    let o = symlab(&["verify", "--group", "X"]);
    assert_eq!(o.status.code(), Some(2));
}
