//! Byte-exact stdout and exit codes for fixed fixtures.
//!
//! Set `KED_UPDATE_GOLDEN=1` to rewrite the expected files.

mod common;

use std::process::{Command, Output};

use common::{check_goldens, fixtures, ked, CASES};

#[test]
fn golden_outputs() {
    let failures = check_goldens(std::env::var_os("KED_UPDATE_GOLDEN").is_some());
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn every_exit_code_is_covered() {
    for code in 0..=4 {
        assert!(
            CASES.iter().any(|c| c.2 == code),
            "no fixture exits with {code}"
        );
    }
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON object")
}

#[test]
fn documented_values() {
    let v = json(&ked(&[
        "eval",
        "--spec",
        "sphere_sobolev.json",
        "--what",
        "kpp",
    ]));
    assert_eq!(v["value"].as_f64(), Some(2.0 / 3.0));
    let v = json(&ked(&[
        "eval",
        "--spec",
        "gauss_gauss.json",
        "--what",
        "kpp",
    ]));
    assert!((v["value"].as_f64().unwrap() - 1.0 / 3f64.sqrt()).abs() < 2e-16);
    let v = json(&ked(&[
        "bq",
        "--spec",
        "gauss_gauss.json",
        "--data",
        "one_node.csv",
    ]));
    assert_eq!(v["mean"].as_f64(), Some(0.5f64.sqrt()));
    assert!((v["variance"].as_f64().unwrap() - (1.0 / 3f64.sqrt() - 0.5)).abs() < 1e-15);
    // One sample at x: K_PP - 2 K_P(x) + K(x, x).
    let v = json(&ked(&[
        "mmd",
        "--spec",
        "gauss_gauss.json",
        "--samples",
        "one_point.csv",
    ]));
    let by_hand = 1.0 / 3f64.sqrt() - 2.0 * 0.5f64.sqrt() * (-0.0625f64).exp() + 1.0;
    assert!((v["mmd2"].as_f64().unwrap() - by_hand).abs() < 1e-15);
    let v = json(&ked(&["verify", "--spec", "gauss_uniform.json"]));
    assert_eq!(v["checks"].as_array().unwrap().len(), 21);
    let v = json(&ked(&["bq", "--spec", "stein_normal.json"]));
    assert!(v["weights"]
        .as_array()
        .unwrap()
        .iter()
        .all(|w| w.as_f64() == Some(0.0)));
    assert_eq!(v["variance"].as_f64(), Some(0.0));
}

#[test]
fn unknown_keys_are_named() {
    let out = ked(&["eval", "--spec", "unknown_key.json", "--what", "kpp"]);
    assert!(json(&out)["error"]["message"]
        .as_str()
        .unwrap()
        .contains("`amplitude`"));
}

#[test]
fn repeated_runs_are_identical() {
    let args = [
        "verify",
        "--spec",
        "sphere_sobolev.json",
        "--points",
        "2",
        "--budget",
        "5000",
        "--seed",
        "3",
    ];
    assert_eq!(ked(&args).stdout, ked(&args).stdout);
}

#[test]
fn seed_comes_from_the_environment() {
    let base = [
        "verify",
        "--spec",
        "sphere_sobolev.json",
        "--points",
        "2",
        "--budget",
        "5000",
    ];
    let run_env = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_ked"))
            .args(base)
            .current_dir(fixtures())
            .env("KED_DEFAULT_SEED", seed)
            .env("RUST_LOG", "off")
            .output()
            .unwrap()
    };
    let mut explicit = base.to_vec();
    explicit.extend(["--seed", "42"]);
    assert_eq!(run_env("42").stdout, ked(&explicit).stdout);
    assert_ne!(run_env("42").stdout, ked(&base).stdout);
    assert_eq!(run_env("not-a-seed").status.code(), Some(3));
}

#[test]
fn mmd_with_optimal_weights_is_the_posterior_variance() {
    // Weights from the spec's nodes, written back as an empirical measure.
    let post = json(&ked(&["bq", "--spec", "matern_uniform.json"]));
    let weights: Vec<f64> = post["weights"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| w.as_f64().unwrap())
        .collect();
    let total: f64 = weights.iter().sum();
    let dir = std::env::temp_dir().join(format!("ked-golden-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let data: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(fixtures().join("matern_data.json")).unwrap(),
    )
    .unwrap();
    let mut csv = String::from("x1,w\n");
    for (p, w) in data["points"].as_array().unwrap().iter().zip(&weights) {
        csv.push_str(&format!("{},{}\n", p[0], w / total));
    }
    let samples = dir.join("weighted.csv");
    std::fs::write(&samples, csv).unwrap();
    let m = json(&ked(&[
        "mmd",
        "--spec",
        "matern_uniform.json",
        "--samples",
        samples.to_str().unwrap(),
    ]));
    // Normalising the weights to a probability vector rescales them by
    // 1/total, so compare with the WCE of the rescaled rule.
    let mmd2 = m["mmd2"].as_f64().unwrap();
    let kpp = json(&ked(&[
        "eval",
        "--spec",
        "matern_uniform.json",
        "--what",
        "kpp",
    ]))["value"]
        .as_f64()
        .unwrap();
    let variance = post["variance"].as_f64().unwrap();
    // For w* = C⁻¹m, wᵀm = wᵀCw = kpp - σ², so the rescaled rule has
    // WCE² = kpp - 2(kpp - σ²)/t + (kpp - σ²)/t².
    let s = kpp - variance;
    let expected = kpp - 2.0 * s / total + s / (total * total);
    assert!((mmd2 - expected).abs() < 1e-9, "{mmd2} vs {expected}");
    std::fs::remove_dir_all(dir).ok();
}
