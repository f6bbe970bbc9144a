//! Criterion 10: identical config and seed produce byte-identical
//! summaries; different seeds do not. Also smoke-runs every experiment
//! end to end through the public pipeline.

use quadgreen_cli::config::parse_config;
use quadgreen_cli::experiments::run;
use std::fs;
use std::path::PathBuf;

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "quadgreen-test-{tag}-{}",
        std::process::id()
    ));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

const ALPHAS: &str = "0.9009688679024191+0.433883739117558i, -0.433883739117558+0.9009688679024191i";

fn config_text(experiment: &str, seed: u64, out: &std::path::Path) -> String {
    format!(
        "\
experiment = {experiment}
seed = {seed}
resolution = 256
out_dir = {}

[graph]
generator = square
width = 8
height = 8

[spectral]
alphas = {ALPHAS}
reality_modulus = 1.0

[lambda]
count = 2

[run]
radius = 4
draws = 3
samples = 10
",
        out.display()
    )
}

#[test]
fn criterion_10_determinism() {
    let mut all_identical = true;
    for experiment in ["psi-check", "contours", "green", "weights"] {
        let dir_a = scratch_dir(&format!("{experiment}-a"));
        let dir_b = scratch_dir(&format!("{experiment}-b"));
        let cfg_a = parse_config(&config_text(experiment, 42, &dir_a)).unwrap();
        let cfg_b = parse_config(&config_text(experiment, 42, &dir_b)).unwrap();
        run(&cfg_a).unwrap();
        run(&cfg_b).unwrap();
        let a = fs::read(dir_a.join("summary.json")).unwrap();
        let b = fs::read(dir_b.join("summary.json")).unwrap();
        let identical = a == b;
        all_identical &= identical;
        println!(
            "criterion 10 [{experiment}]: {} (summary bytes {} vs {})",
            if identical { "PASS" } else { "FAIL" },
            a.len(),
            b.len()
        );

        // A different seed must still run but generally yields different
        // sampled quantities; only the hash/seed fields are guaranteed to
        // differ, which already breaks byte equality.
        let dir_c = scratch_dir(&format!("{experiment}-c"));
        let cfg_c = parse_config(&config_text(experiment, 43, &dir_c)).unwrap();
        run(&cfg_c).unwrap();
        let c = fs::read(dir_c.join("summary.json")).unwrap();
        assert_ne!(a, c, "different seed produced identical bytes for {experiment}");

        for d in [dir_a, dir_b, dir_c] {
            let _ = fs::remove_dir_all(d);
        }
    }
    println!(
        "criterion 10: {}",
        if all_identical { "PASS" } else { "FAIL" }
    );
    assert!(all_identical);
}

#[test]
fn experiments_produce_expected_artifacts() {
    let dir = scratch_dir("artifacts");
    let cfg = parse_config(&config_text("contours", 7, &dir)).unwrap();
    let outcome = run(&cfg).unwrap();
    assert!(outcome.passed, "contours experiment failed its tolerances");
    assert!(dir.join("summary.json").exists());
    assert!(dir.join("contour_00.json").exists());
    assert!(dir.join("contour_00.svg").exists());
    let svg = fs::read_to_string(dir.join("contour_00.svg")).unwrap();
    assert!(svg.contains("<svg") && svg.contains("path"));
    let _ = fs::remove_dir_all(dir);

    let dir = scratch_dir("green-artifacts");
    let cfg = parse_config(&config_text("green", 7, &dir)).unwrap();
    let outcome = run(&cfg).unwrap();
    // The delta property fails structurally at the source neighbors, so
    // the green experiment reports FAIL while still writing artifacts.
    assert!(!outcome.passed);
    assert!(dir.join("green.csv").exists());
    assert!(dir.join("decay.csv").exists());
    let summary = fs::read_to_string(dir.join("summary.json")).unwrap();
    assert!(summary.contains("max_LG_far"));
    assert!(summary.contains("gamma0"));
    let _ = fs::remove_dir_all(dir);
}

#[test]
fn passing_experiments_exit_clean() {
    for experiment in ["psi-check", "weights", "theta-check", "verify-lh"] {
        let dir = scratch_dir(&format!("{experiment}-clean"));
        let cfg = parse_config(&config_text(experiment, 11, &dir)).unwrap();
        let outcome = run(&cfg).unwrap();
        assert!(outcome.passed, "{experiment} should pass its tolerances");
        let _ = fs::remove_dir_all(dir);
    }
}

#[test]
fn growth_experiment_reports_minus_sign_identity() {
    let dir = scratch_dir("growth");
    let cfg = parse_config(&config_text("growth", 5, &dir)).unwrap();
    let outcome = run(&cfg).unwrap();
    assert!(outcome.passed);
    let summary = fs::read_to_string(dir.join("summary.json")).unwrap();
    assert!(summary.contains("psi_dev_exp_minus"));
    assert!(dir.join("growth.csv").exists());
    let _ = fs::remove_dir_all(dir);
}

#[test]
fn multigrid_config_runs() {
    let dir = scratch_dir("multigrid");
    let text = format!(
        "\
experiment = weights
seed = 3
out_dir = {}

[graph]
generator = multigrid
directions = 1+0i, 0.30901699437494745+0.9510565162951535i, -0.8090169943749473+0.5877852522924732i, -0.8090169943749475-0.587785252292473i, 0.30901699437494723-0.9510565162951536i
offsets = 0.17, 0.23, 0.31, 0.13, 0.19
radius = 4.0

[spectral]
alphas = 1+0i, 0.30901699437494745+0.9510565162951535i, -0.8090169943749473+0.5877852522924732i, -0.8090169943749475-0.587785252292473i, 0.30901699437494723-0.9510565162951536i
reality_modulus = 1.0
",
        dir.display()
    );
    let cfg = parse_config(&text).unwrap();
    let outcome = run(&cfg).unwrap();
    assert!(outcome.passed, "penrose weights should be real and dual");
    let _ = fs::remove_dir_all(dir);
}
