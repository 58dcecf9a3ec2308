use std::path::Path;
use std::process::{Command, Output};

fn sdd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdd")).args(args).output().expect("binary runs")
}

fn config_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name).display().to_string()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn run_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let cfg = config_path("example1_sdd.json");
    for (out, threads) in [(&a, "1"), (&b, "4")] {
        let o = sdd(&["--threads", threads, "run", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["statistics.csv", "expansion.json", "coefficients.csv", "variance_decomposition.csv", "cdf.csv"] {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
    }
    let stats = read(&a, "statistics.csv");
    assert!(stats.starts_with("method,N,S,coefficient_count,mean,variance,exact_mean,exact_variance,"));
    let manifest: serde_json::Value = serde_json::from_str(&read(&a, "manifest.json")).unwrap();
    assert_eq!(manifest["seeds"]["mcs"], 7);
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn invalid_config_exits_with_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"benchmark": {"name": "example1"}, "coordinates": [{"knots": {"p": 1}}],
            "method": "sdd", "S": 3, "fitting": {"quadrature": {}}}"#,
    )
    .unwrap();
    let out = tmp.path().join("out");
    let o = sdd(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["stage"], "validation");
    assert!(!out.exists());
}

#[test]
fn table_example1_matches_expected_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sdd(&["table-example1", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success());
    let csv = read(tmp.path(), "example1_table.csv");
    let errors: Vec<f64> = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    let expected = [1.788e-1, 2.192e-3, 2.884e-4, 1.283e-3, 3.310e-6];
    for (e, p) in errors.iter().zip(expected) {
        assert!(((e - p) / p).abs() < 5e-3, "{e} vs {p}");
    }
}

#[test]
fn cdf_from_saved_expansion() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fit");
    let o = sdd(&["run", "--config", &config_path("example1_sdd.json"), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let expansion = out.join("expansion.json");
    let cdf_dir = tmp.path().join("cdf");
    let o = sdd(&[
        "cdf", "--expansion", expansion.to_str().unwrap(), "--out", cdf_dir.to_str().unwrap(),
        "--count", "1000", "--stride", "10",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cdf = read(&cdf_dir, "cdf.csv");
    assert!(cdf.starts_with("y,surrogate_cdf\n"));
    let probs: Vec<f64> = cdf.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(probs.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn basis_dump_and_verify() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sdd(&["basis-dump", "--out", tmp.path().to_str().unwrap(), "--measure", "beta", "--orthonormal"]);
    assert!(o.status.success());
    assert_eq!(read(tmp.path(), "orthonormal_basis.csv").lines().count(), 202);

    let o = sdd(&["verify"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("7 of 7 checks passed"));
}
