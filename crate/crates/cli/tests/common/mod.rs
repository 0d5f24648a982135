//! Fixture runner shared by the golden and acceptance tests.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// Name, arguments (run inside the fixture directory) and exit code.
pub type Case = (&'static str, &'static [&'static str], i32);

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn ked(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ked"))
        .args(args)
        .current_dir(fixtures())
        .env_remove("KED_DEFAULT_SEED")
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

pub const CASES: &[Case] = &[
    (
        "eval_sphere_kpp",
        &["eval", "--spec", "sphere_sobolev.json", "--what", "kpp"],
        0,
    ),
    (
        "eval_stein_kp",
        &[
            "eval",
            "--spec",
            "stein_normal.json",
            "--what",
            "kp",
            "--x",
            "0.7",
        ],
        0,
    ),
    (
        "eval_gauss_kpp",
        &["eval", "--spec", "gauss_gauss.json", "--what", "kpp"],
        0,
    ),
    (
        "eval_gauss_kernel",
        &[
            "eval",
            "--spec",
            "gauss_gauss.json",
            "--what",
            "kernel",
            "--x",
            "0",
            "--y",
            "-1",
        ],
        0,
    ),
    (
        "eval_empirical_kp",
        &[
            "eval",
            "--spec",
            "empirical.json",
            "--what",
            "kp",
            "--x",
            "0.1",
        ],
        0,
    ),
    (
        "verify_gauss_uniform",
        &["verify", "--spec", "gauss_uniform.json"],
        0,
    ),
    (
        "verify_periodic",
        &["verify", "--spec", "periodic_sobolev.json", "--points", "5"],
        0,
    ),
    (
        "verify_sphere_mc",
        &[
            "verify",
            "--spec",
            "sphere_sobolev.json",
            "--points",
            "3",
            "--budget",
            "20000",
            "--seed",
            "11",
        ],
        0,
    ),
    (
        "verify_corrupted",
        &[
            "verify",
            "--spec",
            "gauss_uniform_corrupted.json",
            "--points",
            "2",
        ],
        1,
    ),
    (
        "bq_one_node",
        &["bq", "--spec", "gauss_gauss.json", "--data", "one_node.csv"],
        0,
    ),
    ("bq_stein", &["bq", "--spec", "stein_normal.json"], 0),
    ("bq_matern", &["bq", "--spec", "matern_uniform.json"], 0),
    (
        "bq_duplicates",
        &[
            "bq",
            "--spec",
            "gauss_gauss.json",
            "--data",
            "duplicate_nodes.csv",
        ],
        3,
    ),
    ("bq_indefinite", &["bq", "--spec", "indefinite_sum.json"], 4),
    (
        "mmd_samples",
        &[
            "mmd",
            "--spec",
            "gauss_gauss.json",
            "--samples",
            "gauss_samples.csv",
        ],
        0,
    ),
    (
        "mmd_weighted",
        &[
            "mmd",
            "--spec",
            "gauss_gauss.json",
            "--samples",
            "weighted_samples.csv",
        ],
        0,
    ),
    (
        "mmd_one_point",
        &[
            "mmd",
            "--spec",
            "gauss_gauss.json",
            "--samples",
            "one_point.csv",
        ],
        0,
    ),
    (
        "mmd_malformed",
        &[
            "mmd",
            "--spec",
            "gauss_gauss.json",
            "--samples",
            "bad_samples.csv",
        ],
        3,
    ),
    (
        "unknown_key",
        &["eval", "--spec", "unknown_key.json", "--what", "kpp"],
        3,
    ),
    (
        "bad_schema",
        &["eval", "--spec", "bad_schema.json", "--what", "kpp"],
        3,
    ),
    (
        "missing_point",
        &["eval", "--spec", "gauss_gauss.json", "--what", "kp"],
        3,
    ),
    ("bad_subcommand", &["frobnicate"], 3),
    (
        "unsupported_unnormalized",
        &["eval", "--spec", "unnormalized.json", "--what", "kpp"],
        2,
    ),
    (
        "unsupported_matrix",
        &["eval", "--spec", "matrix_valued.json", "--what", "kpp"],
        2,
    ),
];

/// Runs every case; returns the failures.
pub fn check_goldens(update: bool) -> Vec<String> {
    let dir = fixtures().join("golden");
    let mut failures = Vec::new();
    for (name, args, code) in CASES {
        let out = ked(args);
        let path = dir.join(format!("{name}.stdout"));
        if update {
            std::fs::create_dir_all(&dir).unwrap();
            std::fs::write(&path, &out.stdout).unwrap();
        }
        match std::fs::read(&path) {
            Ok(expected) if expected == out.stdout => {}
            Ok(_) => failures.push(format!(
                "{name}: stdout differs:\n{}",
                String::from_utf8_lossy(&out.stdout)
            )),
            Err(_) => failures.push(format!("{name}: missing {}", path.display())),
        }
        if out.status.code() != Some(*code) {
            failures.push(format!(
                "{name}: exit {:?}, expected {code}",
                out.status.code()
            ));
        }
    }
    failures
}
