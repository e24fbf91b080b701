use std::path::PathBuf;
use std::process::{Command, Output};

fn airylab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_airylab")).args(args).env_remove("AIRYLAB_SEED").output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("airylab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn path_count_example() {
    let o = airylab(&["paths", "--X", "4", "--H", "1", "--G", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "5");
}

#[test]
fn corners_moment_is_an_exact_rational() {
    let o = airylab(&["moments", "--mode", "corners", "--N", "3", "--rows", "3", "--k", "4", "--beta", "3/2", "--tau", "1"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["moment"]["exact"], "333/8");
    assert_eq!(v["moment"]["value"], 41.625);
}

#[test]
fn exit_codes() {
    assert_eq!(airylab(&["paths", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(airylab(&["moments", "--mode", "corners", "--N", "3", "--k", "2", "--beta", "-1", "--tau", "1"]).status.code(), Some(1));
    assert_eq!(airylab(&["lbeta", "--kappa", "1", "--beta", "2", "--delta-max", "9"]).status.code(), Some(1));
    assert_eq!(airylab(&["replay", "/nonexistent/manifest.json"]).status.code(), Some(1));
    assert_eq!(airylab(&["walks", "--N", "3", "--k", "4", "--beta", "2", "--budget", "2"]).status.code(), Some(2));
    assert_eq!(airylab(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_and_flags_merge() {
    let cfg = scratch("paths.toml");
    std::fs::write(&cfg, "X = 4\nH = 1\nG = 3\n").unwrap();
    let o = airylab(&["paths", "--config", cfg.to_str().unwrap(), "--G", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "5");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let cfg = scratch("bad.toml");
    std::fs::write(&cfg, "X = 4\nH = 1\nG = 1\nwidth = 3\n").unwrap();
    let o = airylab(&["paths", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("width"));
}

#[test]
fn manifest_replay_is_byte_identical() {
    let out = scratch("bridge.ndjson");
    let o = airylab(&["bridges", "--x", "1", "--h", "0.5", "--beta", "2", "--budget", "2000", "--seed", "7", "--output", out.to_str().unwrap()]);
    assert!(o.status.success());
    let first = std::fs::read(&out).unwrap();
    let manifest = PathBuf::from(format!("{}.manifest.json", out.display()));
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(&manifest).unwrap()).unwrap();
    assert_eq!(m["seed"], 7);
    assert_eq!(m["params"]["mesh"], 64);
    assert!(m["version"].is_string());

    let again = scratch("bridge-replay.ndjson");
    let o = airylab(&["replay", manifest.to_str().unwrap(), "--output", again.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(first, std::fs::read(&again).unwrap());

    // a different seed changes the Monte Carlo part
    let other = scratch("bridge-other.ndjson");
    airylab(&["bridges", "--x", "1", "--h", "0.5", "--beta", "2", "--budget", "2000", "--seed", "8", "--output", other.to_str().unwrap()]);
    assert_ne!(first, std::fs::read(&other).unwrap());
}

#[test]
fn csv_samples_have_a_header() {
    let o = airylab(&["sample", "--model", "gbe", "--N", "3", "--beta", "1", "--count", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "index,row,sample,value");
    assert_eq!(lines.count(), 6);
}
