use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lramm::matcore::load_matrix;
use serde_json::Value;

fn lramm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lramm"))
        .current_dir(dir)
        .env_remove("LRAMM_THREADS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = lramm(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    lramm(dir, args).status.code().expect("exited normally")
}

#[test]
fn gen_writes_lrmm_file() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "gen", "--rows", "64", "--cols", "64", "--dist", "uniform", "--seed", "7", "-o",
            "a.lrmm",
        ],
    );
    let a = load_matrix(dir.path().join("a.lrmm")).unwrap();
    assert_eq!(a.shape(), (64, 64));
    ok(
        dir.path(),
        &[
            "gen", "--rows", "64", "--cols", "64", "--dist", "uniform", "--seed", "7", "-o",
            "b.lrmm",
        ],
    );
    assert_eq!(
        fs::read(dir.path().join("a.lrmm")).unwrap(),
        fs::read(dir.path().join("b.lrmm")).unwrap()
    );
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(dir.path(), &["gen", "--cols", "3"]), 2);
    assert_eq!(
        code(
            dir.path(),
            &["gen", "--rows", "3", "--cols", "3", "--dist", "cauchy"]
        ),
        2
    );
    assert_eq!(code(dir.path(), &["frobnicate"]), 2);
    assert_eq!(
        code(
            dir.path(),
            &["mm", "--a", "missing.lrmm", "--b", "missing.lrmm"]
        ),
        2
    );
    assert_eq!(code(dir.path(), &["--threads", "0", "verify-bounds"]), 2);
}

#[test]
fn lowrank_spectrum_has_zero_tail() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "gen", "--rows", "40", "--cols", "30", "--dist", "lowrank", "--rank", "5", "--noise",
            "0", "-o", "l.lrmm",
        ],
    );
    let csv = ok(dir.path(), &["spectrum", "--input", "l.lrmm"]);
    let sigma: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(sigma.len(), 30);
    assert!(sigma[4] > 0.1);
    assert!(sigma[5] < 1e-10);
}

#[test]
fn mm_strategies() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(
        p,
        &[
            "gen", "--rows", "64", "--cols", "64", "--seed", "1", "-o", "a.lrmm",
        ],
    );
    ok(
        p,
        &[
            "gen", "--rows", "64", "--cols", "64", "--seed", "2", "-o", "b.csv",
        ],
    );

    let exact: Value =
        serde_json::from_str(&ok(p, &["mm", "--a", "a.lrmm", "--b", "b.csv"])).unwrap();
    assert_eq!(exact["rel_error"], 0.0);

    let q: Value = serde_json::from_str(&ok(
        p,
        &[
            "mm",
            "--a",
            "a.lrmm",
            "--b",
            "b.csv",
            "--strategy",
            "qgemm:8",
            "--save",
            "d.lrmm",
        ],
    ))
    .unwrap();
    assert!(q["fro_error"].as_f64().unwrap() <= q["bound_combined"].as_f64().unwrap());
    assert_eq!(load_matrix(p.join("d.lrmm")).unwrap().shape(), (64, 64));

    let l: Value = serde_json::from_str(&ok(
        p,
        &[
            "--seed",
            "3",
            "mm",
            "--a",
            "a.lrmm",
            "--b",
            "b.csv",
            "--strategy",
            "lramm:8:balanced",
        ],
    ))
    .unwrap();
    assert_eq!(
        (l["r"].as_u64(), l["d3"].as_u64(), l["seed"].as_u64()),
        (Some(8), Some(4), Some(3))
    );
    assert!(l["macs"]["total"].as_f64().unwrap() > 0.0);

    assert_eq!(
        code(
            p,
            &[
                "mm",
                "--a",
                "a.lrmm",
                "--b",
                "b.csv",
                "--strategy",
                "lramm:65:8:8:4"
            ]
        ),
        2
    );
    assert_eq!(
        code(
            p,
            &["mm", "--a", "a.lrmm", "--b", "b.csv", "--strategy", "magic"]
        ),
        2
    );
    ok(p, &["gen", "--rows", "10", "--cols", "5", "-o", "c.lrmm"]);
    assert_eq!(code(p, &["mm", "--a", "a.lrmm", "--b", "c.lrmm"]), 2);
}

#[test]
fn mm_from_experiment_spec() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("exp.json"),
        r#"{"strategy": "lramm:6:8:8:4", "m": 32, "n": 24, "k": 28, "dist": "exponential", "seeds": [1, 2, 3]}"#,
    )
    .unwrap();
    let csv = ok(dir.path(), &["--format", "csv", "mm", "--spec", "exp.json"]);
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn rsvd_writes_factors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(
        p,
        &[
            "gen",
            "--rows",
            "50",
            "--cols",
            "40",
            "--dist",
            "lowrank:4:0",
            "-o",
            "a.lrmm",
        ],
    );
    let json = ok(
        p,
        &[
            "--format",
            "json",
            "rsvd",
            "--input",
            "a.lrmm",
            "--rank",
            "4",
            "--oversample",
            "4",
            "--manifest",
            "f.json",
        ],
    );
    let v: Value = serde_json::from_str(&json).unwrap();
    let sigma = v["sigma"].as_array().unwrap();
    assert_eq!(sigma.len(), 4);
    assert!((sigma[0].as_f64().unwrap() - 1.0).abs() < 1e-8);
    let f = lramm::matcore::SvdFactors::load(&p.join("f.json")).unwrap();
    assert_eq!(f.u.shape(), (50, 4));
}

#[test]
fn sweep_is_byte_stable_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(
        p.join("sweep.json"),
        r#"{
  "dists": ["uniform", "lowrank:6:0.001"],
  "dims": [[40, 32, 36]],
  "ranks": [4, 8],
  "bits": [[8, 8, 4], [4, 4, 4]],
  "seeds": [0, 1]
}"#,
    )
    .unwrap();
    let one = ok(p, &["--threads", "1", "sweep", "sweep.json", "--no-wall"]);
    let four = Command::new(env!("CARGO_BIN_EXE_lramm"))
        .current_dir(p)
        .env("LRAMM_THREADS", "4")
        .args(["sweep", "sweep.json", "--no-wall"])
        .output()
        .unwrap();
    assert!(four.status.success());
    assert_eq!(one.as_bytes(), four.stdout.as_slice());
    assert_eq!(one.lines().count(), 17);

    let with_wall = ok(p, &["sweep", "sweep.json", "-o", "out.csv"]);
    assert!(with_wall.is_empty());
    let header = fs::read_to_string(p.join("out.csv")).unwrap();
    assert!(header.starts_with("dist,m,n,k,r,d1,d2,d3,seed,rel_error,rel_error_dq4,rel_error_dq8,bound,macs_total,macs_baseline,speedup_model,wall_ns\n"));

    fs::write(
        p.join("bad.json"),
        "{\n  \"dists\": [\"uniform\"],\n  oops\n}",
    )
    .unwrap();
    let out = lramm(p, &["sweep", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn profile_shares_sum_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let v: Value = serde_json::from_str(&ok(
        dir.path(),
        &[
            "profile",
            "--m",
            "96",
            "--n",
            "80",
            "--k",
            "64",
            "--rank",
            "8",
            "--preset",
            "paper-tuned",
        ],
    ))
    .unwrap();
    for key in ["mac_shares", "wall_shares"] {
        let s: f64 = ["rsvd", "scaling", "gemm1", "gemm2", "gemm3"]
            .iter()
            .map(|k| v[key][k].as_f64().unwrap())
            .sum();
        assert!((s - 1.0).abs() <= 1e-9, "{key}");
    }
    assert_eq!(v["bits"], serde_json::json!([8, 4, 8]));
    let model = ok(
        dir.path(),
        &[
            "--format",
            "csv",
            "profile",
            "--m",
            "8192",
            "--n",
            "8192",
            "--k",
            "1024",
            "--rank",
            "50",
            "--bits",
            "16,16,16",
            "--model-only",
        ],
    );
    assert_eq!(model.lines().count(), 6);
}

#[test]
fn verify_bounds_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = ok(dir.path(), &["verify-bounds"]);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
    let out = lramm(dir.path(), &["verify-bounds", "--fault-lambda", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("quantizer,120,"));
}
