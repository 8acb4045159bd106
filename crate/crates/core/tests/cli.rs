use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sov-xxx"))
}

#[test]
fn all_suites_n1_pass_with_fixture_row() {
    let out = bin().args(["all", "--n", "1", "--seed", "3"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], true);
    let rows = v["rows"].as_array().unwrap();
    let row = rows.iter().find(|r| r["name"] == "form-factors.fixture_n1.sigma_minus").unwrap();
    assert_eq!(row["reference"][0].as_f64().unwrap(), -0.5);
    assert!(row["formula"].is_string());
    let names: Vec<&str> = rows.iter().map(|r| r["name"].as_str().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn identities_n4_within_tolerance() {
    let out = bin().args(["verify-identities", "--n", "4", "--seed", "11"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for r in v["rows"].as_array().unwrap() {
        if r["mode"] == "within" {
            assert!(r["rel_err"].as_f64().unwrap() <= 1e-9, "{r}");
        }
    }
}

#[test]
fn invalid_n_is_rejected() {
    let out = bin().args(["all", "--n", "12"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_sites"));
}

#[test]
fn unknown_tolerance_suite_is_rejected() {
    let out = bin().args(["all", "--tol", "nope=1e-3"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn tight_tolerance_fails_with_exit_one() {
    let out = bin().args(["spectrum", "--n", "3", "--tol", "spectrum=1e-30"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reports_are_byte_identical() {
    let run = || bin().args(["scalar-products", "--n", "3", "--seed", "5"]).output().unwrap().stdout;
    assert_eq!(run(), run());
}

#[test]
fn csv_to_file() {
    let dir = std::env::temp_dir().join(format!("sov-xxx-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("r.csv");
    let out = bin().args(["form-factors", "--n", "2", "--format", "csv", "--out"]).arg(&path).output().unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "name,formula,value_re,value_im,reference_re,reference_im,rel_err,tol,mode,pass,note");
    assert!(lines.all(|l| l.starts_with("form-factors.")));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn run_subcommand_selects_suites() {
    let out = bin().args(["run", "--suites", "oracle,homogeneous-stress", "--n", "4"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let suites: Vec<&str> = v["suites"].as_array().unwrap().iter().map(|s| s["suite"].as_str().unwrap()).collect();
    assert_eq!(suites, ["oracle", "homogeneous-stress"]);
}
