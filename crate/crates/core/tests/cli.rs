use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bilinear_gp::config::RunConfig;
use bilinear_gp::output::sha256_hex;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bilinear-gp"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(config: &Path, out: &Path, args: &[&str]) -> Output {
    bin()
        .arg("--config")
        .arg(config)
        .arg("--output-dir")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn csv_files(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|e| e == "csv") {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

const MINIMAL: &str = r#"{"dim":1,"n_modes":16,"sigma":0,"T":0.1,"dt":0.01}"#;

const CONTROLLED: &str = r#"{
    "dim": 1, "n_modes": 16, "sigma": 1, "T": 0.2, "dt": 0.005, "seed": 5,
    "control": {"kind": "sinusoid", "amplitude": 1.0, "frequency": 2.0, "phase": 0.0},
    "initial_state": {"kind": "coefficients", "entries": [{"index": [0], "re": 0.8}, {"index": [2], "re": 0.0, "im": 0.6}]},
    "snapshot_stride": 10
}"#;

#[test]
fn minimal_simulation_has_constant_mass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", MINIMAL);
    let out = dir.path().join("out");
    let res = run(&cfg, &out, &["simulate"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let mut rdr = csv::Reader::from_path(out.join("record.csv")).unwrap();
    let masses: Vec<f64> = rdr.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(masses.len(), 11);
    assert!(masses.iter().all(|m| (m - 1.0).abs() < 1e-13));
    assert_eq!(
        csv::Reader::from_path(out.join("times.csv")).unwrap().records().count(),
        11
    );
}

#[test]
fn manifest_hashes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", CONTROLLED);
    let out = dir.path().join("out");
    assert_eq!(run(&cfg, &out, &["simulate"]).status.code(), Some(0));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["config"]["seed"], 5);
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    let listed: BTreeMap<String, String> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| {
            (
                f["path"].as_str().unwrap().to_string(),
                f["sha256"].as_str().unwrap().to_string(),
            )
        })
        .collect();
    let on_disk = csv_files(&out);
    assert_eq!(listed.keys().collect::<Vec<_>>(), on_disk.keys().collect::<Vec<_>>());
    for (path, bytes) in &on_disk {
        assert_eq!(listed[path], sha256_hex(bytes), "{path}");
    }
    // stride 10 over 40 steps keeps steps 0, 10, 20, 30, 40
    assert_eq!(on_disk.keys().filter(|k| k.starts_with("snapshots")).count(), 5);
}

#[test]
fn double_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", CONTROLLED);
    let cases: [&[&str]; 3] = [
        &["simulate"],
        &["weak-limit", "--n-list", "4,8"],
        &["reach", "--n-samples", "12", "--eps-list", "0.1,0.4"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let a = dir.path().join(format!("a{i}"));
        let b = dir.path().join(format!("b{i}"));
        assert_eq!(run(&cfg, &a, args).status.code(), Some(0), "{args:?}");
        assert_eq!(
            run(&cfg, &b, &[&["--threads", "1"], *args].concat()).status.code(),
            Some(0)
        );
        let (fa, fb) = (csv_files(&a), csv_files(&b));
        assert!(!fa.is_empty());
        assert_eq!(fa, fb, "{args:?}");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", CONTROLLED);
    let args = ["reach", "--n-samples", "6", "--eps-list", "0.2"];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run(&cfg, &a, &args).status.code(), Some(0));
    assert_eq!(
        run(&cfg, &b, &[&["--seed", "6"], &args[..]].concat()).status.code(),
        Some(0)
    );
    assert_ne!(csv_files(&a)["reach.csv"], csv_files(&b)["reach.csv"]);
}

#[test]
fn config_faults_exit_one_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"dim":1,"n_modes":16,"sigma":0,"T":0.1,"dt":0}"#, "dt"),
        (r#"{"dim":1,"n_modes":16,"sigma":0,"T":0.1,"dt":-0.01}"#, "dt"),
        (
            r#"{"dim":1,"n_modes":16,"sigma":0,"T":0.1,"dt":0.01,"extra":1}"#,
            "extra",
        ),
        (r#"{"dim":5,"n_modes":16,"sigma":0,"T":0.1,"dt":0.01}"#, "dim"),
        (r#"{"dim":1,"n_modes":16,"sigma":0,"T":0.1"#, "config"),
    ];
    for (i, (text, field)) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("bad{i}.json"), text);
        let res = run(&cfg, &dir.path().join("out"), &["simulate"]);
        assert_eq!(res.status.code(), Some(1), "{text}");
        let err = String::from_utf8_lossy(&res.stderr);
        assert!(err.contains(field), "{err}");
    }
    let res = bin()
        .arg("--config")
        .arg(dir.path().join("missing.json"))
        .arg("simulate")
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(1));
    let res = bin().arg("simulate").output().unwrap();
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"dim":1,"n_modes":16,"sigma":1,"T":0.1,"dt":0.01,"integrator":"picard",
                   "picard_max_iter":1,"picard_tol":1e-15}"#;
    let cfg = write_config(dir.path(), "run.json", text);
    let res = run(&cfg, &dir.path().join("out"), &["simulate"]);
    assert_eq!(res.status.code(), Some(2), "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", CONTROLLED);
    let out = dir.path().join("out");
    let ok = run(&cfg, &out, &["verify", "--suite", "conservation"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout)
        .lines()
        .all(|l| l.starts_with("PASS")));
    let bad = run(
        &cfg,
        &out,
        &["verify", "--suite", "energy_bound", "--inject-fault", "control-sign"],
    );
    assert_eq!(bad.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL"));
    let unknown = run(&cfg, &out, &["verify", "--suite", "nonsense"]);
    assert_eq!(unknown.status.code(), Some(1));
}

#[test]
fn transform_check_runs_without_config() {
    let res = bin().args(["transform-check", "--n-modes", "8,16"]).output().unwrap();
    assert_eq!(res.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&res.stdout).lines().count(), 12);
}

#[test]
fn weak_limit_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", CONTROLLED);
    let out = dir.path().join("empty");
    assert_eq!(run(&cfg, &out, &["weak-limit", "--n-list", ""]).status.code(), Some(0));
    assert_eq!(
        std::fs::read_to_string(out.join("weak_limit.csv")).unwrap(),
        "n,eps_n,zn_linf_h1,ratio\n"
    );

    let out = dir.path().join("dup");
    let res = run(&cfg, &out, &["weak-limit", "--n-list", "8,4,8"]);
    assert_eq!(res.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&res.stderr).contains("duplicate"));
    let ns: Vec<u32> = csv::Reader::from_path(out.join("weak_limit.csv"))
        .unwrap()
        .records()
        .map(|r| r.unwrap()[0].parse().unwrap())
        .collect();
    assert_eq!(ns, vec![8, 4]);
}

#[test]
fn reach_with_zero_radius_is_free_flow() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"dim":1,"n_modes":16,"sigma":0,"T":0.5,"dt":0.01,
        "initial_state":{"kind":"coefficients","entries":[{"index":[0],"re":0.6},{"index":[1],"re":0.8}]}}"#;
    let cfg = write_config(dir.path(), "run.json", text);
    let out = dir.path().join("out");
    let res = run(
        &cfg,
        &out,
        &["reach", "--n-samples", "1", "--radius", "0", "--eps-list", "0.1"],
    );
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let rows: Vec<csv::StringRecord> = csv::Reader::from_path(out.join("reach.csv"))
        .unwrap()
        .records()
        .map(|r| r.unwrap())
        .collect();
    assert_eq!(rows.len(), 1);
    let h1: f64 = rows[0][4].parse().unwrap();
    let expected = (0.36f64 + 0.64 * 3.0).sqrt();
    assert!((h1 - expected).abs() < 1e-13, "{h1} vs {expected}");
}

#[test]
fn reach_rejects_zero_samples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", MINIMAL);
    let res = run(&cfg, &dir.path().join("out"), &["reach", "--n-samples", "0"]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn config_echo_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write_config(dir.path(), "run.json", CONTROLLED);
    let out = dir.path().join("out");
    assert_eq!(run(&cfg_path, &out, &["simulate"]).status.code(), Some(0));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let echoed = RunConfig::from_json(&manifest["config"].to_string()).unwrap();
    let mut original = RunConfig::load(&cfg_path).unwrap();
    original.output_dir = out.clone();
    original.base_dir = Default::default();
    assert_eq!(echoed, original);
}
