use std::process::{Command, Output};

fn loopkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loopkit")).args(args).env_remove("LOOPKIT_MAX_BITS").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn column(text: &str, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let i = r.headers().unwrap().iter().position(|h| h == name).expect("column present");
    r.records().map(|rec| rec.unwrap()[i].to_string()).collect()
}

#[test]
fn brute_count_of_the_two_by_two_patch() {
    let o = loopkit(&["count", "--nh", "2", "--nv", "2", "--strategy", "brute"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "n_h,n_v,strategy,value\n2,2,brute,12\n");
}

#[test]
fn single_tile_count() {
    let o = loopkit(&["count", "--nh", "1", "--nv", "1"]);
    assert_eq!(column(&stdout(&o), "value"), vec!["2"]);
}

#[test]
fn count_ranges_expand_row_major() {
    let o = loopkit(&["count", "--nh", "1..2", "--nv", "2,3"]);
    let s = stdout(&o);
    assert_eq!(column(&s, "n_h"), vec!["1", "1", "2", "2"]);
    assert_eq!(column(&s, "value"), vec!["4", "8", "12", "33"]);
}

#[test]
fn open_ground_space_has_twelve_states() {
    let o = loopkit(&["groundspace", "--nh", "2", "--nv", "2", "--bc", "obc"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(column(&stdout(&o), "kernel_dim"), vec!["12"]);
    let g = loopkit(&["groundspace", "--nh", "2", "--nv", "2", "--bc", "gapped"]);
    assert_eq!(column(&stdout(&g), "kernel_dim"), vec!["1"]);
}

#[test]
fn bad_flags_exit_with_usage_code() {
    assert_eq!(loopkit(&["count", "--nh", "x", "--nv", "2"]).status.code(), Some(2));
    assert_eq!(loopkit(&["count", "--nv", "2"]).status.code(), Some(2));
    assert_eq!(loopkit(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(loopkit(&["strings", "--nh", "3", "--nv", "2"]).status.code(), Some(2));
    assert_eq!(loopkit(&["selftest", "--only", "15"]).status.code(), Some(2));
}

#[test]
fn guards_exit_with_code_three() {
    let o = loopkit(&["groundspace", "--nh", "6", "--nv", "5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("LOOPKIT_MAX_BITS"));
    let capped = Command::new(env!("CARGO_BIN_EXE_loopkit"))
        .args(["groundspace", "--nh", "2", "--nv", "2"])
        .env("LOOPKIT_MAX_BITS", "3")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(3));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let args = ["potts", "--nh", "4", "--nv", "4", "--sweeps", "320", "--burn-in", "10", "--seed", "9"];
    let a = loopkit(&args);
    let b = loopkit(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let mut other = args.to_vec();
    let last = other.len() - 1;
    other[last] = "10";
    assert_ne!(loopkit(&other).stdout, a.stdout);
}

#[test]
fn out_file_comes_with_a_matching_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("strings.csv");
    let o = loopkit(&["strings", "--nh", "2", "--nv", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let body = std::fs::read(&path).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("strings.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "strings");
    assert_eq!(manifest["seed"], 2024);
    assert_eq!(manifest["outputs"][0]["bytes"], body.len());
    let digest = manifest["outputs"][0]["sha256"].as_str().unwrap();
    let again = loopkit(&["strings", "--nh", "2", "--nv", "2"]);
    assert_eq!(again.stdout, body);
    assert_eq!(digest.len(), 64);
    assert_eq!(manifest["summary"]["ground_space"]["string_rank"], 5);
    for key in ["parameters", "version", "timestamp"] {
        assert!(!manifest[key].is_null(), "{}", key);
    }
}

#[test]
fn json_format_carries_the_same_rows() {
    let o = loopkit(&["count", "--nh", "2", "--nv", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["value"], "12");
}

#[test]
fn selftest_reports_each_selected_criterion() {
    let o = loopkit(&["selftest", "--only", "1,2,12"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert_eq!(column(&s, "criterion"), vec!["1", "2", "12"]);
    assert!(column(&s, "status").iter().all(|x| x == "PASS"));
}

#[test]
fn failed_identities_exit_with_code_one() {
    let o = loopkit(&["potts", "--nh", "2", "--nv", "2", "--mode", "identities"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("partition_equal,false"));
}

#[test]
fn canonical_and_enumerate_agree() {
    let o = loopkit(&["enumerate", "--nh", "3", "--nv", "2", "--filter", "allowed"]);
    let s = stdout(&o);
    let rows: Vec<&str> = s.lines().skip(1).collect();
    assert_eq!(rows.len(), 33);
    let first = rows[0].split("\",").next().unwrap().trim_start_matches('"');
    let c = loopkit(&["canonical", "--matching", first, "--nh", "3", "--nv", "2"]);
    assert_eq!(c.status.code(), Some(0));
    assert_eq!(stdout(&c).lines().count(), 3);
}

#[test]
fn entropy_scaling_table() {
    let o = loopkit(&["entropy", "--scaling", "20", "--fit-from", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 21);
}
