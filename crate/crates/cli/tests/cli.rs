use std::process::Command;

fn ncr_sim() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ncr-sim"));
    cmd.env("RUST_LOG", "warn");
    cmd
}

#[test]
fn single_prints_capacity() {
    let out = ncr_sim()
        .args(["--seed", "9", "single", "--strategy", "all", "--alpha-db", "40", "--bandwidth-hz", "4.5e6"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("all drop=0 realization=0 bandwidth_hz=4500000 subcarriers=30"), "{text}");
    assert!(text.contains("capacity_bps="));
}

#[test]
fn fig2_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(
        &cfg,
        "seed = 3\n[fig2]\nsubcarriers = 32\nbandwidth_hz = 4.8e6\nalpha_db = [0.0, 40.0]\n",
    )
    .unwrap();
    let csv = dir.path().join("fig2.csv");
    let out = ncr_sim()
        .arg("--config")
        .arg(&cfg)
        .args(["--drops", "1", "--realizations", "2", "--out"])
        .arg(&csv)
        .arg("fig2")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().contains("closeby_plus_rand"));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "experiment,strategy,bandwidth_hz,alpha_db,drop,realization,capacity_bps,seed"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2 * 4 * 2);
    assert!(rows.iter().all(|r| r.starts_with("fig2,") && r.ends_with(",3")));
}

#[test]
fn bad_config_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "drops = 0\n").unwrap();
    let out = ncr_sim().arg("--config").arg(&cfg).arg("fig1").output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("drops"));

    let out = ncr_sim().args(["single", "--strategy", "some"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn config_prints_defaults() {
    let out = ncr_sim().arg("config").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("seed = 2025") && text.contains("[fig2]"));
}
