use std::process::{Command, Output};

fn heegner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heegner")).args(args).output().unwrap()
}

#[test]
fn fixed_point_sieve_report_serializes() {
    let out = heegner(&["sieve", "check", "--x", "4096", "--mu", "0.357", "--kappa", "0.5", "--fixed-point"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["buchstab"]["full_gap"], "0");
    assert_eq!(v["pass"], true);
}

#[test]
fn exit_codes() {
    assert_eq!(heegner(&["field", "info"]).status.code(), Some(0));
    assert_eq!(heegner(&["--d", "-5", "field", "info"]).status.code(), Some(3));
    assert_eq!(heegner(&["expsum", "lin", "--params", "bogus=1"]).status.code(), Some(3));
    assert_eq!(heegner(&["expsum", "lin", "--params", "x=10", "y=1"]).status.code(), Some(3));
    assert_eq!(heegner(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_fills_missing_flags() {
    let dir = std::env::temp_dir().join(format!("heegner-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.conf");
    std::fs::write(&cfg, "# landau\nd = -7\nx = 5000\n").unwrap();
    let out = heegner(&["--config", cfg.to_str().unwrap(), "experiment", "landau"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["field_d"], -7);
    assert_eq!(v["params"]["x"], 5000);
    let flag = heegner(&["--config", cfg.to_str().unwrap(), "--d", "-1", "experiment", "landau"]);
    let v: serde_json::Value = serde_json::from_slice(&flag.stdout).unwrap();
    assert_eq!(v["field_d"], -1);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn csv_output() {
    let out = heegner(&["--format", "csv", "field", "info"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("\nd,-1\n"));
}
