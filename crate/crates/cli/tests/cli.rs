use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lieb-towers"))
}

fn model(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_model(args: &[&str], name: &str) -> Output {
    let path = model(name);
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--input", path.to_str().unwrap()]);
    run(&all)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Two-site sector (1, 1) eigenvalues from the closed-form 4x4 problem.
fn two_site_levels(t: f64, u: f64) -> Vec<f64> {
    let r = (u * u + 16.0 * t * t).sqrt();
    let mut v = vec![0.0, u, (u - r) / 2.0, (u + r) / 2.0];
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn two_site_half_filling_table() {
    let out = run_model(&["spectrum", "--ne", "2"], "two_site_attractive.json");
    assert!(out.status.success(), "{}", stderr(&out));
    let table = stderr(&out);
    let rows: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 6);

    let report = json(&out);
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["kind"], "spectrum");
    let records = report["records"].as_array().unwrap();
    let mut middle: Vec<f64> = records
        .iter()
        .filter(|r| r["sector"] == serde_json::json!([1, 1]))
        .map(|r| r["energy"].as_f64().unwrap())
        .collect();
    middle.sort_by(f64::total_cmp);
    for (got, want) in middle.iter().zip(two_site_levels(1.0, -4.0)) {
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }
    let ground = &report["ground"];
    assert_eq!(ground["s"], 0.0);
    assert_eq!(ground["j"], 0.0);
    assert_eq!(ground["degeneracy"], 1);
}

#[test]
fn empty_sector_is_a_single_zero() {
    let out = run_model(
        &["spectrum", "--sector", "0", "0"],
        "two_site_repulsive.json",
    );
    assert!(out.status.success());
    let report = json(&out);
    let records = report["records"].as_array().unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0]["energy"], 0.0);
}

#[test]
fn lieb_chain_half_filling_spin_one() {
    let out = run_model(&["verify", "lieb-spin"], "lieb6.json");
    assert!(out.status.success(), "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["pass"], true);
    assert_eq!(report["checks"][0]["detail"]["ground"]["s"], 1.0);
    assert_eq!(report["checks"][0]["detail"]["ground"]["degeneracy"], 3);
}

#[test]
fn attractive_checks_pass() {
    for which in ["theorem1", "theorem3", "srp", "towers", "pph", "lemma1"] {
        let out = run_model(&["verify", which], "attractive4.json");
        assert!(out.status.success(), "{which}: {}", stderr(&out));
        assert_eq!(json(&out)["pass"], true, "{which}");
    }
}

#[test]
fn pph_deviation_is_tiny() {
    let out = run_model(&["verify", "pph"], "two_site_attractive.json");
    assert!(out.status.success());
    for check in json(&out)["checks"].as_array().unwrap() {
        assert!(check["detail"]["spectral_deviation"].as_f64().unwrap() < 1e-9);
        assert!(check["detail"]["conjugation_residual"].as_f64().unwrap() < 1e-12);
    }
}

#[test]
fn holstein_singlet_sweep() {
    let out = run_model(
        &["verify", "holstein-singlet", "--nmax", "4"],
        "holstein_dimer.json",
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let report = json(&out);
    let energies = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "monotone in n_max")
        .unwrap()["detail"]["energies"]
        .as_array()
        .unwrap()
        .len();
    assert_eq!(energies, 4);
}

#[test]
fn hypothesis_violations_exit_5() {
    let cases = [
        (
            vec!["verify", "theorem1"],
            "two_site_repulsive.json",
            "U_x not strictly negative",
        ),
        (
            vec!["verify", "srp"],
            "lieb6.json",
            "U_x not strictly negative",
        ),
        (
            vec!["verify", "lieb-spin"],
            "two_site_attractive.json",
            "U not strictly positive",
        ),
        (
            vec!["verify", "towers"],
            "triangle_mixed.json",
            "lattice not bipartite",
        ),
        (vec!["pph"], "triangle_mixed.json", "lattice not bipartite"),
        (
            vec!["verify", "holstein-singlet"],
            "attractive4.json",
            "phonons block missing",
        ),
        (
            vec!["verify", "theorem1", "--ne", "3"],
            "attractive4.json",
            "N_e not even",
        ),
    ];
    for (args, file, message) in cases {
        let out = run_model(&args, file);
        assert_eq!(out.status.code(), Some(5), "{args:?} {file}");
        assert!(stderr(&out).contains(message), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    for text in [
        "{",
        r#"{"sites": 2, "bonds": [], "interactions": [1]}"#,
        r#"{"sites": 2}"#,
    ] {
        std::fs::write(&bad, text).unwrap();
        let out = run(&["spectrum", "--input", bad.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{text}");
    }
    assert_eq!(run(&["spectrum"]).status.code(), Some(2));
    assert_eq!(
        run(&["spectrum", "--input", "/nonexistent.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    let out = run_model(&["spectrum", "--deg-tol", "0"], "two_site_attractive.json");
    assert_eq!(out.status.code(), Some(2));
    let out = run_model(
        &["spectrum", "--sector", "3", "0"],
        "two_site_attractive.json",
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dense_cap_exits_3_in_verify() {
    let out = run_model(&["verify", "lieb-spin", "--dense-cap", "50"], "lieb6.json");
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn failed_verification_exits_1() {
    // a tolerance wider than the gaps merges every level into the ground cluster
    let out = run_model(
        &["verify", "theorem3", "--ne", "2", "--deg-tol", "1"],
        "two_site_attractive.json",
    );
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn bad_thread_count_exits_2() {
    let path = model("two_site_attractive.json");
    let out = bin()
        .args(["spectrum", "--input", path.to_str().unwrap()])
        .env("LIEB_TOWERS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn suite_is_deterministic_across_thread_counts() {
    let go = |threads: &str| {
        bin()
            .args(["suite", "--seed", "7", "--cases", "12", "--max-sites", "5"])
            .env("LIEB_TOWERS_THREADS", threads)
            .output()
            .unwrap()
    };
    let a = go("1");
    let b = go("4");
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["passed"], 12);
}

#[test]
fn empty_suite_passes() {
    let out = run(&["suite", "--cases", "0"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["passed"], 0);
}

#[test]
fn output_flag_moves_json_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let out = run_model(
        &[
            "spectrum",
            "--ne",
            "1",
            "--output",
            target.to_str().unwrap(),
        ],
        "two_site_repulsive.json",
    );
    assert!(out.status.success());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(written["records"].as_array().unwrap().len(), 4);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with('#'));
}

#[test]
fn path_uses_one_based_sites() {
    let out = run_model(
        &["path", "--from", "1", "2", "--to", "5", "6"],
        "lieb6.json",
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let report = json(&out);
    let nodes = report["path"]["nodes"].as_array().unwrap();
    assert_eq!(nodes.first().unwrap(), &serde_json::json!([1, 2]));
    assert_eq!(nodes.last().unwrap(), &serde_json::json!([5, 6]));
    assert_ne!(report["path"]["chain_product"].as_f64().unwrap(), 0.0);
    assert_eq!(report["census"][0]["components"], 1);

    let out = run_model(&["path", "--from", "1", "--to", "9"], "lieb6.json");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pph_command_reports_every_sector() {
    let out = run_model(&["pph"], "two_site_attractive.json");
    assert!(out.status.success(), "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["sectors"].as_array().unwrap().len(), 9);
    assert_eq!(report["pass"], true);
}

#[test]
fn spectrum_is_byte_identical_on_repeat() {
    let a = run_model(&["spectrum"], "attractive4.json");
    let b = run_model(&["spectrum"], "attractive4.json");
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
