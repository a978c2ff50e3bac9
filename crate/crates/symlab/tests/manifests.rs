use std::io::Write;

use symlab::{emit_report, exit_status, export, load_manifest, Format, Manifest, ManifestError};
use symlab_core::catalog::{get_model, BianchiType, ModelParams};
use symlab_core::expr::Expr;
use symlab_core::report::run_verification;

const DILATION: &str = r#"
[model]
name = "dilation"
group = "III"
e = 1

[frame]
xi1 = ["1", "0", "0"]
xi2 = ["0", "1", "0"]
xi3 = ["u1", "0", "0"]

[metric]
source = "components"
g = [["1", "0", "0", "0"], ["0", "-1", "0", "0"], ["0", "0", "-1", "0"], ["0", "0", "0", "-1"]]

[potential]
a = ["0", "0", "0", "0"]
"#;

#[test]
fn rank_two_frame_loads_with_derived_constants() {
    let m: Manifest = DILATION.parse().unwrap();
    assert_eq!(m.name, "dilation");
    assert!(m.model.coframe.is_none());
    // [xi1, xi3] = xi1
    assert_eq!(m.model.constants.nonzero(), vec![(1, 3, 1, Expr::int(1))]);
    assert_eq!(*m.model.constants.get(3, 1, 1), Expr::int(-1));
}

#[test]
fn rank_one_frame_is_degenerate() {
    let text = DILATION
        .replace(r#"xi2 = ["0", "1", "0"]"#, r#"xi2 = ["u2", "0", "0"]"#)
        .replace(r#"xi3 = ["u1", "0", "0"]"#, r#"xi3 = ["u2^2", "0", "0"]"#);
    let err = text.parse::<Manifest>().unwrap_err();
    assert!(matches!(err, ManifestError::Degenerate), "{err}");
}

#[test]
fn group_iii_round_trips_through_a_file() {
    let mut m = get_model(BianchiType::III, &ModelParams::default()).unwrap();
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(export(&m, None).as_bytes()).unwrap();
    let back = load_manifest(f.path()).unwrap();
    m.errata.clear();
    assert_eq!(back, m);
}

#[test]
fn non_invariant_potential_fails_admissibility() {
    let m = get_model(BianchiType::I, &ModelParams::default()).unwrap();
    let text = export(&m, None).replace(r#"a = ["0", "alpha0", "#, r#"a = ["0", "alpha0 + u1^2", "#);
    assert!(text.contains("u1^2"));
    let bad: Manifest = text.parse().unwrap();
    let r = run_verification(&bad.model, 20, 0);
    let failing: Vec<_> = r.failures().map(|c| c.name.clone()).collect();
    assert!(failing.iter().any(|n| n == "admissibility, generator 1"), "{failing:?}");
    assert_eq!(exit_status(std::slice::from_ref(&r)), 1);
    let text = emit_report(&r, Format::Text);
    assert!(text.contains("FAIL"));
    assert!(text.contains("admissibility, generator 1"));
}

#[test]
fn unknown_fields_are_rejected() {
    let text = DILATION.replace("e = 1", "e = 1\ncolour = \"red\"");
    assert!(matches!(text.parse::<Manifest>(), Err(ManifestError::Syntax(_))));
}

#[test]
fn missing_file_names_its_path() {
    let err = load_manifest(std::path::Path::new("/nonexistent/model.toml")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/model.toml"), "{err}");
}
