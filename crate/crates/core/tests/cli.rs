use std::path::Path;
use std::process::Command;

fn agma() -> Command {
    Command::new(env!("CARGO_BIN_EXE_agma"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path
}

const CONFIG: &str = r#"{
  "dataset": {"source": {"type": "synthetic_quadratic", "dimension": 4,
              "condition_number": 20, "rank": 4}, "nodes": 10, "seed": 2},
  "channel": {"gain": "rayleigh", "mu_h": 1, "sigma_w_sq": 1, "power": 1},
  "algorithms": [
    {"algorithm": "AGMA", "max_iters": 15},
    {"algorithm": "GBMA", "max_iters": 15},
    {"algorithm": "FDM_AGD", "max_iters": 15}
  ],
  "replications": 8,
  "seed": 4,
  "sweep": {"parameter": "beta_factor", "values": [0.5, 1]}
}"#;

#[test]
fn run_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    for out in ["a", "b"] {
        let status = agma()
            .arg("run")
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join(out))
            .status()
            .unwrap();
        assert!(status.success());
    }
    let mut files: Vec<_> = std::fs::read_dir(dir.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    files.sort();
    assert_eq!(files.len(), 7);
    for f in files {
        let a = std::fs::read(dir.path().join("a").join(&f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(&f)).unwrap();
        if f != "manifest.json" {
            assert_eq!(a, b, "{f:?} differs");
        }
    }
    let csv = std::fs::read_to_string(dir.path().join("a/AGMA__beta_factor=1.csv")).unwrap();
    assert!(csv.starts_with("k,mean_excess_risk,ci_halfwidth,bound_value,algorithm,beta_factor\n"));
    assert_eq!(csv.lines().count(), 17);
}

#[test]
fn overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().join("o");
    let status = agma()
        .args(["run", cfg.to_str().unwrap(), "--reps", "3", "--seed", "9", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["replications"], 3);
    assert_eq!(manifest["combinations"][0]["seeds"], serde_json::json!([9, 10, 11]));
}

#[test]
fn invalid_config_names_field_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &CONFIG.replace("[0.5, 1]", "[0.5, -1]"));
    let out = agma().arg("run").arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sweep.values[1]"), "{err}");
}

#[test]
fn verify_reports_json() {
    let out = agma().args(["verify", "sequences"]).output().unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["checks"].as_array().unwrap().len() >= 4);
    assert!(!agma().args(["verify", "nonsense"]).output().unwrap().status.success());
}

#[test]
fn bounds_subcommand() {
    let out = agma()
        .args([
            "bounds", "--lipschitz", "1", "--mu", "0.01", "--sigma-h-sq", "0.5", "--sigma-w-sq",
            "1", "--dimension", "10", "--nodes", "100", "--k", "0", "--k", "50",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["regime"], "strongly_convex");
    let b0 = report["bounds"][0]["bound"].as_f64().unwrap();
    let b50 = report["bounds"][1]["bound"].as_f64().unwrap();
    assert!(b50 < b0);
    let bad = agma()
        .args(["bounds", "--lipschitz", "1", "--dimension", "2", "--nodes", "4", "--beta", "3"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            agma::harness::ExperimentConfig::load(&path)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 5);
}
