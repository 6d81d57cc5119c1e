use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_almostprime"))
        .arg("--output-dir")
        .arg(dir)
        .args(args)
        .env_remove("ALMOSTPRIME_SEED")
        .output()
        .expect("binary runs")
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn golden(name: &str) -> Value {
    read_json(Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden").join(name))
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["verify", "exponents", "--beta1", "1/7"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta1"));
    let out = run(dir.path(), &["scan", "--X", "10", "--c", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["verify", "exponents", "--alpha2", "one fifth"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for verb in ["verify", "integrate", "buchstab", "scan", "density", "brun", "pi-ell", "region"] {
        assert!(text.contains(verb), "{verb} missing from help");
    }
}

#[test]
fn verification_outcome_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["verify", "small-nu"]).status.code(), Some(0));
    // The sandwich breaks for odd R.
    assert_eq!(run(dir.path(), &["brun", "sandwich", "--w", "30", "--R", "1", "--hi", "1000"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["brun", "sandwich", "--w", "30", "--R", "4", "--hi", "1000"]).status.code(), Some(0));
    // A generous target is met, a tight one is not.
    let ok = run(dir.path(), &["integrate", "j1", "--step", "1/200", "--target", "1.5"]);
    assert_eq!(ok.status.code(), Some(0));
    let cert = read_json(dir.path().join("j1.json"));
    assert_eq!(cert["meets_target"], Value::Bool(true));
    assert_eq!(cert["target"], "3/2");
    let tight = run(dir.path(), &["integrate", "j1", "--step", "1/200", "--target", "0.9"]);
    assert_eq!(tight.status.code(), Some(1));
}

#[test]
fn timing_lives_in_a_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["integrate", "j2", "--mode", "crude", "--step", "1/100"]);
    let cert = read_json(dir.path().join("j2_crude.json"));
    assert!(cert.get("wall_time_ms").is_none());
    assert!(cert["upper_bound"].as_f64().unwrap() >= cert["lower_bound"].as_f64().unwrap());
    let timing = read_json(dir.path().join("j2_crude.timing.json"));
    assert!(timing["wall_time_ms"].is_u64());
}

#[test]
fn artifacts_are_lf_utf8_and_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--format", "csv", "verify", "exponents"];
    run(a.path(), &args);
    run(b.path(), &args);
    for f in ["exponents.json", "exponents.csv", "exponents_printed.json", "witness.json"] {
        let x = fs::read(a.path().join(f)).unwrap();
        assert_eq!(x, fs::read(b.path().join(f)).unwrap(), "{f}");
        let text = String::from_utf8(x).unwrap();
        assert!(!text.contains('\r') && text.ends_with('\n'), "{f}");
    }
}

#[test]
fn exponent_report_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["verify", "exponents", "--interval", "0.1803:0.1950", "--delta", "1/100000"]);
    let report = read_json(dir.path().join("exponents.json"));
    assert_eq!(report["intervals"], serde_json::json!([["1803/10000", "39/200"]]));
    assert_eq!(report["pass"], Value::Bool(true));
    let worst = report["checks"].as_array().unwrap().iter().find(|c| c["nu"] == "39/200").unwrap();
    assert_eq!(worst["margin"], "29/790650");
    assert_eq!(worst["witness_ell"], 4);
}

#[test]
fn scan_matches_brute_force_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--format", "csv", "scan", "--X", "100000", "--c", "3.51", "--k", "2"]);
    assert!(out.status.success());
    let scan = read_json(dir.path().join("scan.json"));
    let gold = golden("scan_X1e5_c3.51_k2.json");
    assert_eq!(scan["exceptional"], gold["convention_1_to_X"]["exceptional"]);
    assert_eq!(scan["histogram"], gold["convention_1_to_X"]["histogram"]);
    assert_eq!(scan["dyadic"]["exceptional"], gold["dyadic"]["exceptional"]);
    assert_eq!(scan["dyadic"]["histogram"], gold["dyadic"]["histogram"]);
    assert_eq!(scan["h_rule"], "h = ceil(ln(x)^c)");
    let csv = fs::read_to_string(dir.path().join("scan_histogram.csv")).unwrap();
    assert!(csv.starts_with("convention,count,frequency\n"));
}

#[test]
fn density_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["density", "--X", "1000", "--k", "2"]);
    let d = read_json(dir.path().join("density.json"));
    let gold = golden("density_X1e3_k2.json");
    assert_eq!(d["density"], gold["density"]);
    assert_eq!(d["count"], gold["count"]);
}

#[test]
fn seed_variable_overrides_sample_seed() {
    let scan = |seed: Option<&str>| {
        let dir = tempfile::tempdir().unwrap();
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_almostprime"));
        cmd.arg("--output-dir").arg(dir.path());
        cmd.args(["scan", "--X", "20000", "--c", "1.5", "--sample", "random:2000:1", "--rows"]);
        cmd.env_remove("ALMOSTPRIME_SEED");
        if let Some(s) = seed {
            cmd.env("ALMOSTPRIME_SEED", s);
        }
        assert!(cmd.output().unwrap().status.success());
        let rows = fs::read_to_string(dir.path().join("scan_rows.csv")).unwrap();
        let report = read_json(dir.path().join("scan.json"));
        (rows, report["sample"].clone())
    };
    let (plain, sample) = scan(None);
    assert_eq!(sample["seed"], 1);
    assert_eq!(plain, scan(None).0);
    assert_eq!(plain, scan(Some("1")).0);
    let (other, sample) = scan(Some("77"));
    assert_eq!(sample["seed"], 77);
    assert_ne!(plain, other);
    assert_eq!(other.lines().count(), 2001);
}

#[test]
fn plot_data_and_region_dumps() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["buchstab", "table", "--u-max", "4", "--step", "0.5"]).status.success());
    let table = fs::read_to_string(dir.path().join("buchstab_table.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "u,omega_exact,omega_upper,omega_dde");
    assert_eq!(lines.len(), 1 + 7);
    assert!(lines[1].starts_with("1.0,1.0,1.0,"));
    // Closed forms stop at 3.
    assert!(lines[7].starts_with("4.0,,"));

    assert!(run(dir.path(), &["region", "dump", "--name", "A3*"]).status.success());
    let region = read_json(dir.path().join("region_A3_star.json"));
    assert_eq!(region["dim"], 2);

    assert!(run(dir.path(), &["--format", "csv", "pi-ell", "--x", "30"]).status.success());
    let pi = read_json(dir.path().join("pi_ell.json"));
    assert_eq!(pi["total"], 29);
    assert_eq!(pi["counts"][0]["count"], 16);

    assert!(run(dir.path(), &["--format", "csv", "brun", "weights", "--w", "30", "--R", "4"]).status.success());
    let w = read_json(dir.path().join("brun_weights.json"));
    assert_eq!(w["plus"].as_array().unwrap().len(), 386);
}
