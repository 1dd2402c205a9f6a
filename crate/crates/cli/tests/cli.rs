use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_perceptronium"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn meta(csv: &str, key: &str) -> String {
    let prefix = format!("# {key}: ");
    csv.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap_or_else(|| panic!("no {key} line")).to_string()
}

fn goldens() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("goldens")
}

/// Status column of a verify report, keyed by golden name.
fn statuses(report: &str) -> BTreeMap<String, String> {
    report
        .lines()
        .skip_while(|l| !l.starts_with("golden "))
        .skip(1)
        .filter_map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (f.len() >= 3 && ["PASS", "FAIL", "SKIP"].contains(&f[2])).then(|| (f[0].to_string(), f[2].to_string()))
        })
        .collect()
}

#[test]
fn hamming_code_curve() {
    let o = run(&["run", "code_phi", "--code", "hamming84"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&stdout(&o));
    let kv: Vec<(String, String)> = rows.iter().map(|r| (r[0].clone(), r[1].clone())).collect();
    let want: Vec<(String, String)> =
        [("1", "1"), ("2", "2"), ("3", "3"), ("4", "2")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    assert_eq!(kv, want);
}

#[test]
fn bare_experiment_name_runs() {
    let a = run(&["code_phi", "--code", "parity"]);
    let b = run(&["run", "code_phi", "--code=parity"]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(stdout(&a), stdout(&b));
    assert!(data_rows(&stdout(&a)).iter().all(|r| r[1] == "1"));
}

#[test]
fn quantum_maximum_at_four_dimensions() {
    let o = run(&["quantum_phi_max", "--n", "4", "--trials", "3000", "--seed", "9"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&stdout(&o));
    let phi: f64 = rows[0][3].parse().unwrap();
    assert!((phi - (27f64 / 16.0).log2() / 3.0).abs() < 1e-12, "{phi}");
    let spectrum: Vec<f64> = rows[0][4].split(';').map(|x| x.parse().unwrap()).collect();
    for (got, want) in spectrum.iter().zip([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]) {
        assert!((got - want).abs() < 1e-12);
    }
    assert_eq!(rows[0][5], "true");
}

#[test]
fn dispersion_matches_closed_form() {
    let o = run(&["dispersion", "--side", "4", "--mu", "1", "--gamma", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 64);
    let mut seen = std::collections::BTreeSet::new();
    for r in &rows {
        let k: Vec<f64> = r[..3].iter().map(|x| x.parse().unwrap()).collect();
        let w2: f64 = r[3].parse().unwrap();
        let want = 1.0 + 4.0 * k.iter().map(|x| (x / 2.0).sin().powi(2)).sum::<f64>();
        assert!((w2 - want).abs() < 1e-12, "{r:?}");
        let idx: Vec<i64> = k.iter().map(|x| (x / (std::f64::consts::PI / 2.0)).round() as i64).collect();
        assert!(seen.insert(idx));
    }
}

#[test]
fn identical_configs_give_identical_rows() {
    for args in [
        &["integration_energy_demo", "--seed", "4", "--count", "2", "--samples", "20"][..],
        &["random_code_sweep", "--n", "8", "--seed", "2"][..],
        &["sliding_autonomy", "--b", "3,4", "--alpha", "0,2"][..],
    ] {
        let serial = bin().args(args).env("PERCEPTRONIUM_THREADS", "1").output().unwrap();
        let parallel = bin().args(args).env("PERCEPTRONIUM_THREADS", "4").output().unwrap();
        let again = run(args);
        assert!(serial.status.success(), "{}", stderr(&serial));
        assert_eq!(stdout(&serial), stdout(&parallel));
        assert_eq!(stdout(&serial), stdout(&again));
    }
}

#[test]
fn metadata_block() {
    let o = run(&["random_code_sweep", "--n", "6", "--seed", "12"]);
    let csv = stdout(&o);
    assert!(meta(&csv, "version").starts_with("perceptronium "));
    assert_eq!(meta(&csv, "seed"), "12");
    let config = meta(&csv, "config");
    let digest = Sha256::digest(config.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(meta(&csv, "config-hash"), format!("sha256:{hex}"));
    let parsed: serde_json::Value = serde_json::from_str(&config).unwrap();
    assert_eq!(parsed["params"]["n"], 6);
    assert_eq!(parsed["seed"], 12);
    assert!(meta(&csv, "tolerance").contains("phi_bits=abs:"));
}

#[test]
fn config_file_and_flags_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"experiment": "codeword_count_sweep", "seed": 3, "params": {"n": 8, "exponents": [2, 4]}}"#)
        .unwrap();
    let a = run(&["run", "--config", cfg.to_str().unwrap()]);
    let b = run(&["codeword_count_sweep", "--n", "8", "--exponents", "2,4", "--seed", "3"]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(data_rows(&stdout(&a)).len(), 2);
}

#[test]
fn output_goes_only_to_the_declared_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let o = run(&["dispersion", "--side", "2", "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, vec![std::ffi::OsString::from("d.csv")]);
    assert_eq!(data_rows(&fs::read_to_string(out).unwrap()).len(), 8);
}

#[test]
fn config_errors_exit_with_one() {
    let cases: [(&[&str], &str); 5] = [
        (&["no_such_experiment"], "unknown experiment"),
        (&["ising_phi", "--side", "9"], "/side"),
        (&["code_phi", "--code", "random"], "needs a seed"),
        (&["dispersion", "--sid", "2"], "sid"),
        (&["run", "--config", "/nonexistent/config.json"], "cannot read"),
    ];
    for (args, needle) in cases {
        let o = run(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(stderr(&o).contains(needle), "{args:?}: {}", stderr(&o));
    }
    let o = bin().args(["dispersion"]).env("PERCEPTRONIUM_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn numeric_errors_exit_with_two_and_name_the_module() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("h.json"), r#"{"dim": 4, "entries": [[0,0],[1,0],[0,0],[0,0], [0,0],[0,0],[0,0],[0,0], [0,0],[0,0],[0,0],[0,0], [0,0],[0,0],[0,0],[0,0]]}"#).unwrap();
    fs::write(
        dir.path().join("c.json"),
        r#"{"experiment": "integration_energy_demo", "params": {"hamiltonian": "h.json", "l": 2, "m": 2, "samples": 0}}"#,
    )
    .unwrap();
    // Not Hermitian.
    let o = run(&["run", "--config", dir.path().join("c.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("h-separability"), "{}", stderr(&o));
}

#[test]
fn bundled_goldens_verify() {
    let o = run(&["verify", goldens().to_str().unwrap()]);
    let report = stdout(&o);
    assert!(o.status.success(), "{report}\n{}", stderr(&o));
    let st = statuses(&report);
    assert!(st.len() >= 10);
    assert!(st.values().all(|s| s == "PASS"), "{report}");
}

#[test]
fn perturbed_seed_fails_only_randomized_goldens() {
    let o = run(&["verify", goldens().to_str().unwrap(), "--perturb-seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let report = stdout(&o);
    let randomized = [
        "code_phi_random",
        "codeword_count_sweep",
        "integration_energy_demo",
        "quantum_phi_max",
        "random_code_sweep",
        "snip_optimize",
    ];
    for (name, status) in statuses(&report) {
        let want = if randomized.contains(&name.as_str()) { "FAIL" } else { "PASS" };
        assert_eq!(status, want, "{name}\n{report}");
    }
}

#[test]
fn tolerance_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["dispersion.json", "dispersion.csv"] {
        fs::copy(goldens().join(f), dir.path().join(f)).unwrap();
    }
    let report_path = dir.path().join("report.txt");
    let o = run(&[
        "verify",
        dir.path().to_str().unwrap(),
        "--tol",
        "0.001",
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = fs::read_to_string(report_path).unwrap();
    assert_eq!(report, stdout(&o));
    assert!(report.contains("override 1e-3"), "{report}");
    assert!(report.contains("omega2=abs:1e-3"), "{report}");
}

#[test]
fn tampered_golden_fails_and_loose_tolerance_absorbs_it() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(goldens().join("dispersion.json"), dir.path().join("dispersion.json")).unwrap();
    let text = fs::read_to_string(goldens().join("dispersion.csv")).unwrap();
    let tampered = text.replacen("\n0,0,0,1\n", "\n0,0,0,1.00001\n", 1);
    assert_ne!(text, tampered);
    fs::write(dir.path().join("dispersion.csv"), tampered).unwrap();
    let o = run(&["verify", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(statuses(&stdout(&o))["dispersion"], "FAIL");
    let o = run(&["verify", dir.path().to_str().unwrap(), "--tol", "1e-4"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn missing_goldens_are_skipped_not_passed() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(goldens().join("dispersion.json"), dir.path().join("dispersion.json")).unwrap();
    let o = run(&["verify", dir.path().to_str().unwrap()]);
    let report = stdout(&o);
    assert_eq!(statuses(&report)["dispersion"], "SKIP", "{report}");
    assert!(report.contains("0 passed, 0 failed, 1 skipped"), "{report}");

    let empty = tempfile::tempdir().unwrap();
    let o = run(&["verify", empty.path().to_str().unwrap()]);
    assert!(stdout(&o).contains("no goldens found"));
    assert!(stdout(&o).contains("0 passed"));
}

#[test]
fn golden_without_config_file_uses_embedded_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(goldens().join("code_phi_parity.csv"), dir.path().join("code_phi_parity.csv")).unwrap();
    let o = run(&["verify", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(statuses(&stdout(&o))["code_phi_parity"], "PASS");
}

#[test]
fn list_and_schema() {
    let o = run(&["list"]);
    let text = stdout(&o);
    for name in [
        "ising_phi",
        "code_phi",
        "random_code_sweep",
        "codeword_count_sweep",
        "quantum_phi_max",
        "integration_energy_demo",
        "sliding_autonomy",
        "apodization_compare",
        "snip_optimize",
        "dispersion",
    ] {
        assert!(text.contains(name), "{name}");
        let s = run(&["schema", name]);
        let v: serde_json::Value = serde_json::from_str(&stdout(&s)).unwrap();
        assert_eq!(v["title"], name);
        let on_disk = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("schemas/{name}.json")));
        assert_eq!(on_disk.unwrap(), stdout(&s));
    }
}
