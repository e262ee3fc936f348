use std::path::Path;
use std::process::{Command, Output};

fn magnon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magnon")).args(args).output().unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn dispersion_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("disp");
    let o = magnon(&["dispersion", "--points", "100", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["manifest.json", "tracks.csv", "frames.csv", "config.json", "table.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let table = read(&out.join("table.csv"));
    assert!(table.starts_with("s,kx,ky,omega,omega_diagonal\n"));
    // three arms of 100 points sharing their corners
    assert_eq!(table.lines().count(), 1 + 3 * 100 - 2);
    let m: serde_json::Value = serde_json::from_str(&read(&out.join("manifest.json"))).unwrap();
    assert_eq!(m["subcommand"], "dispersion");
    assert!(m["files"].as_array().unwrap().iter().any(|f| f == "table.csv"));
}

#[test]
fn outputs_are_deterministic_and_digest_tracks_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[modes]\nwidth = 101\neps_values = [0.05, 0.1]\n").unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = magnon(&["modes", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["table.csv", "tracks.csv", "config.json"] {
        assert_eq!(read(&a.join(f)), read(&b.join(f)), "{f}");
    }
    let digest = |p: &Path| {
        let m: serde_json::Value = serde_json::from_str(&read(&p.join("manifest.json"))).unwrap();
        m["config_sha256"].as_str().unwrap().to_string()
    };
    assert_eq!(digest(&a), digest(&b));
    std::fs::write(&cfg, "[modes]\nwidth = 101\neps_values = [0.05, 0.2]\n").unwrap();
    assert_ne!(digest(&run("c")), digest(&a));
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[modes]\nwidth = 81\neps_values = [0.1]\n").unwrap();
    let a = dir.path().join("a");
    assert!(magnon(&["modes", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]).status.success());
    let b = dir.path().join("b");
    let echo = a.join("config.json");
    assert!(magnon(&["modes", "--config", echo.to_str().unwrap(), "--out", b.to_str().unwrap()]).status.success());
    assert_eq!(read(&a.join("table.csv")), read(&b.join("table.csv")));
    assert_eq!(read(&a.join("config.json")), read(&b.join("config.json")));
}

#[test]
fn bad_config_gives_error_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[guide]\neps_min = -0.1\n").unwrap();
    let o = magnon(&["guide", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("x").to_str().unwrap()]);
    assert!(!o.status.success());
    let e: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "config");
    assert_eq!(e["error"]["field"], "guide.eps_min");
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[guide]\neps_mni = 0.1\n").unwrap();
    let o = magnon(&["modes", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("x").to_str().unwrap()]);
    assert!(!o.status.success());
    let e: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "parse");
    assert!(e["error"]["message"].as_str().unwrap().contains("eps_mni"));
}

#[test]
fn missing_config_reports_path() {
    let o = magnon(&["units", "--config", "/nonexistent/c.toml"]);
    assert!(!o.status.success());
    let e: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "io");
    assert_eq!(e["error"]["path"], "/nonexistent/c.toml");
}

#[test]
fn unknown_subcommand_prints_usage() {
    let o = magnon(&["teleport"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn units_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u");
    let o = magnon(&["units", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("max speed"));
    assert!(out.join("units.csv").exists());
    let m: serde_json::Value = serde_json::from_str(&read(&out.join("manifest.json"))).unwrap();
    assert!(!m["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn scalar_sweep_writes_one_run_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[modes]\nwidth = 81\neps_values = [0.1]\n").unwrap();
    let out = dir.path().join("s");
    let o = magnon(&[
        "modes",
        "--config",
        cfg.to_str().unwrap(),
        "--sweep",
        "guide.d=10:30:10",
        "--threads",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for k in ["0000", "0001", "0002"] {
        assert!(out.join(k).join("manifest.json").exists());
    }
    let csv = read(&out.join("sweep.csv"));
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("value,"));
}

#[test]
fn array_sweep_fills_the_list() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = magnon(&["modes", "--sweep", "modes.eps_values=0.05:0.15:0.05", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = read(&out.join("table.csv"));
    assert_eq!(table.lines().count(), 4);
}

#[test]
fn malformed_sweep_is_a_config_error() {
    let o = magnon(&["modes", "--sweep", "eps_dmc=0:0.1"]);
    assert!(!o.status.success());
    let e: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["error"]["field"], "sweep");
}
