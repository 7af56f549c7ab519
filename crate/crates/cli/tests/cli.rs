use std::path::Path;
use std::process::{Command, Output};

fn hhi(args: &[&str], cwd: &Path, cache_env: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hhi"));
    cmd.args(args).current_dir(cwd).env_remove("HHI_CACHE");
    if let Some(p) = cache_env {
        cmd.env("HHI_CACHE", p);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn base_case() {
    let dir = tempfile::tempdir().unwrap();
    let o = hhi(&["invariant", "--r", "3", "--weights", "1,1,1", "--elements", "1,1,1"], dir.path(), None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1/3\n");
    // default cache location
    assert!(dir.path().join("hhi-cache.json").exists());
}

#[test]
fn six_point_all_methods_match() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["invariant", "--r", "3", "--weights", "1,1,1", "--elements", "1,1,1,1,1,1", "--method", "all"];
    let o = hhi(&args, dir.path(), None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "direct: -1/27\ncomb: -1/27\nMATCH\n");
}

#[test]
fn too_few_markings_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = hhi(&["invariant", "--r", "3", "--weights", "1,1,1", "--elements", "1,1"], dir.path(), None);
    assert_eq!(o.status.code(), Some(1));
    let o = hhi(&["invariant", "--r", "3", "--weights", "1,1,1"], dir.path(), None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn inadmissible_prints_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = hhi(&["invariant", "--r", "3", "--weights", "1,1,1", "--elements", "1,1,2"], dir.path(), None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0\n");
    assert!(String::from_utf8_lossy(&o.stderr).contains("not admissible"));
}

#[test]
fn coarse_drops_gerbe_factor() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["invariant", "--r", "3", "--weights", "1,1,1", "--elements", "1,1,1,1,1,1", "--coarse"];
    assert_eq!(stdout(&hhi(&args, dir.path(), None)), "-1/9\n");
}

#[test]
fn known_tooth_gap_reports_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["invariant", "--r", "4", "--weights", "1,1,2", "--elements", "1,2,2,2,1", "--method", "all"];
    let o = hhi(&args, dir.path(), None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).ends_with("MISMATCH\n"));
}

#[test]
fn series_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = hhi(&["series", "--lmax", "1"], dir.path(), None);
    assert_eq!(stdout(&o), "[{\"l\":0,\"value\":\"1/3\"},{\"l\":1,\"value\":\"-1/27\"}]\n");

    let o = hhi(&["series", "--lmax", "8", "--method", "both"], dir.path(), None);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r["series"] == r["direct"]));
}

#[test]
fn warm_cache_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("c.json");
    let args = [
        "invariant", "--r", "5", "--weights", "1,1,3", "--elements", "1,2,1,1", "--psi", "0,0,0,1", "--method", "all",
        "--format", "json", "--cache", cache.to_str().unwrap(),
    ];
    let cold = hhi(&args, dir.path(), None);
    assert!(cache.exists());
    let before = std::fs::read(&cache).unwrap();
    let warm = hhi(&args, dir.path(), None);
    assert_eq!(cold.stdout, warm.stdout);
    assert_eq!(cold.status.code(), warm.status.code());
    assert_eq!(std::fs::read(&cache).unwrap(), before);
    assert!(String::from_utf8_lossy(&before).starts_with("{\"format\":\"hhi/1\""));
}

#[test]
fn permuted_elements_share_a_record() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("c.json");
    let c = cache.to_str().unwrap();
    for k in ["1,2,1,1", "2,1,1,1"] {
        hhi(&["invariant", "--r", "5", "--weights", "1,1,3", "--elements", k, "--cache", c], dir.path(), None);
    }
    let info = stdout(&hhi(&["cache-info", "--cache", c], dir.path(), None));
    assert!(info.contains("records: 1\n"), "{info}");
}

#[test]
fn cache_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let flag = dir.path().join("flag.json");
    let env = dir.path().join("env.json");
    let args = ["invariant", "--r", "3", "--weights", "1,1,1", "--elements", "1,1,1"];

    let mut with_flag = args.to_vec();
    with_flag.extend(["--cache", flag.to_str().unwrap()]);
    hhi(&with_flag, dir.path(), Some(&env));
    assert!(flag.exists());
    assert!(!env.exists());

    hhi(&args, dir.path(), Some(&env));
    assert!(env.exists());
    assert!(!dir.path().join("hhi-cache.json").exists());
}

#[test]
fn check_is_deterministic_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["check", "--n-max", "6", "--trials", "20", "--seed", "42"];
    let a = hhi(&args, dir.path(), None);
    let b = hhi(&args, dir.path(), None);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 5);
}

#[test]
fn euler_dumps_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = hhi(&["euler", "--r", "3", "--weights", "1,1,1", "--elements", "1,1,1,1,1,1"], dir.path(), None);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.is_object() || v.is_array());
    let o = hhi(&["euler", "--r", "3", "--weights", "1,1,1", "--elements", "1,1,1,1"], dir.path(), None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn weighted_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let o = hhi(&["weighted", "--r", "3", "--weights", "1,1,1", "--elements", "1,1,1,1,1,1"], dir.path(), None);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["coeffs"][3], "-8/27");
}
