use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use spreadhydro::cli::{parse_config, EXIT_CONFIG_ERROR, EXIT_CRITERION_FAILED, EXIT_PASS};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spreadhydro")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

/// A hydro check small enough to run in a second or two.
const SMALL_HYDRO: &str = r#"{
  "process": "eprs",
  "rate": {"profile": {"kind": "double_exponential", "amplitude": 1.0, "decay": 1.0}},
  "initial": {"kind": "smoothed_step", "level": 0.5, "left": -1.0, "right": 1.0, "smoothing": 0.1},
  "n_list": [16],
  "replicas": 12,
  "horizon": 0.1,
  "snapshot_times": [0.05, 0.1],
  "test_functions": [{"id": "G", "family": "raised_cosine", "center": 0.0, "half_width": 0.5}],
  "pde": {"u_min": -6.0, "u_max": 6.0, "du": 0.05},
  "dump_replicas": 2,
  "seed": 5,
  "criteria": {"hydro_max_error": 1.0}
}"#;

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn help_and_version_exit_zero() {
    let out = run(&["--help"]);
    assert_eq!(code(&out), EXIT_PASS);
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in ["sim-eprs", "sim-epcs", "sim-coupled", "solve-pde", "verify-hydro", "run"] {
        assert!(text.contains(cmd), "help lacks {cmd}");
    }
    assert_eq!(code(&run(&["--version"])), EXIT_PASS);
    assert_eq!(code(&run(&["no-such-command"])), EXIT_CONFIG_ERROR);
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out_dir = out_dir.to_str().unwrap();

    let missing = run(&["solve-pde", "--config", "/no/such/file.json", "--out", out_dir]);
    assert_eq!(code(&missing), EXIT_CONFIG_ERROR);

    let heat = std::fs::read_to_string(configs().join("heat.json")).unwrap();
    let zero = write_config(dir.path(), "zero.json", &heat.replace("\"replicas\": 1", "\"replicas\": 0"));
    let out = run(&["solve-pde", "--config", &zero, "--out", out_dir]);
    assert_eq!(code(&out), EXIT_CONFIG_ERROR);
    assert!(String::from_utf8_lossy(&out.stderr).contains("replicas"));

    let unknown = write_config(dir.path(), "unknown.json", &heat.replace("\"seed\"", "\"sede\""));
    let out = run(&["solve-pde", "--config", &unknown, "--out", out_dir]);
    assert_eq!(code(&out), EXIT_CONFIG_ERROR);
    assert!(String::from_utf8_lossy(&out.stderr).contains("sede"));

    // the coupled simulation needs a coupled process
    let heat_path = configs().join("heat.json");
    let out = run(&["sim-coupled", "--config", heat_path.to_str().unwrap(), "--out", out_dir]);
    assert_eq!(code(&out), EXIT_CONFIG_ERROR);
}

#[test]
fn failed_criterion_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(configs().join("heat.json")).unwrap()).unwrap();
    v["criteria"] = serde_json::json!({"heat_max_error": 1e-12});
    let path = write_config(dir.path(), "strict.json", &v.to_string());
    let out_dir = dir.path().join("out");
    let out = run(&["solve-pde", "--config", &path, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), EXIT_CRITERION_FAILED);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l.starts_with("FAIL ")), "{text}");
    assert!(out_dir.join("manifest.json").exists());
}

#[test]
fn reruns_are_byte_identical_and_hashed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.json", SMALL_HYDRO);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        let r = run(&["verify-hydro", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", threads]);
        assert_eq!(code(&r), EXIT_PASS, "{}", String::from_utf8_lossy(&r.stderr));
    }
    let fa = files(&a);
    assert!(fa.len() >= 4, "{:?}", fa.iter().map(|f| &f.0).collect::<Vec<_>>());
    assert_eq!(fa, files(&b));

    let manifest: Value = serde_json::from_slice(&std::fs::read(a.join("manifest.json")).unwrap()).unwrap();
    let raw_hash = hex::encode(Sha256::digest(SMALL_HYDRO.as_bytes()));
    assert_eq!(manifest["config_file_sha256"], Value::String(raw_hash));
    assert_eq!(manifest["seed"], 5);
    let listed = manifest["files"].as_array().unwrap();
    assert!(!listed.is_empty());
    for entry in listed {
        let path = a.join(entry["path"].as_str().unwrap());
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(entry["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)), "{}", path.display());
    }

    // a different seed gives different samples
    let c = dir.path().join("c");
    run(&["verify-hydro", "--config", &cfg, "--out", c.to_str().unwrap(), "--seed", "6"]);
    assert_ne!(files(&c), fa);
}

#[test]
fn written_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.json", SMALL_HYDRO);
    let out = dir.path().join("out");
    let r = run(&["solve-pde", "--config", &cfg, "--out", out.to_str().unwrap(), "--replicas", "3"]);
    assert_eq!(code(&r), EXIT_PASS);
    let written = std::fs::read_to_string(out.join("config.json")).unwrap();
    let parsed = parse_config(&written).unwrap();
    assert_eq!(parsed.replicas, 3);
    assert_eq!(serde_json::to_string_pretty(&parsed).unwrap() + "\n", written);
}

#[test]
fn schema_lists_every_config_field() {
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(configs().join("schema.json")).unwrap()).unwrap();
    let in_schema: BTreeSet<String> = schema["properties"].as_object().unwrap().keys().cloned().collect();
    let cfg = parse_config(SMALL_HYDRO).unwrap();
    let written: BTreeSet<String> = serde_json::to_value(&cfg).unwrap().as_object().unwrap().keys().cloned().collect();
    // output_dir is accepted on input but never written back
    let mut expect = written.clone();
    expect.insert("output_dir".into());
    assert_eq!(in_schema, expect);
    for key in schema["required"].as_array().unwrap() {
        assert!(written.contains(key.as_str().unwrap()));
    }
}

#[test]
fn shipped_configs_parse() {
    for e in std::fs::read_dir(configs()).unwrap() {
        let p = e.unwrap().path();
        if p.file_name().unwrap() == "schema.json" {
            continue;
        }
        let text = std::fs::read_to_string(&p).unwrap();
        parse_config(&text).unwrap_or_else(|err| panic!("{}: {err}", p.display()));
    }
}
