use std::process::Command;

fn coopsim(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_coopsim")).args(args).output().unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(coopsim(&["run", "--trials", "0"]).status.code(), Some(1));
    assert_eq!(coopsim(&["run", "--network.bogus=1"]).status.code(), Some(1));
    assert_eq!(coopsim(&["run", "--config", "/nonexistent.toml"]).status.code(), Some(1));
    assert_eq!(coopsim(&["compare", "--schemes", "cis"]).status.code(), Some(1));
    assert_eq!(coopsim(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(coopsim(&["--help"]).status.code(), Some(0));
}

#[test]
fn compare_writes_tables_and_summary() {
    let dir = std::env::temp_dir().join(format!("coopsim-cli-{}", std::process::id()));
    let out = coopsim(&[
        "compare",
        "--trials=2",
        "--schemes=ncis,cis",
        "--network.users=3",
        "--network.packet_len",
        "260",
        "--network.training_len=100",
        "--sweep.values=[6, 12]",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("snr_db = 12:"), "{stdout}");
    for f in ["ncis_rls.csv", "cis_rls.csv", "comparison.csv", "manifest.json"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["spec"]["network"]["users"], 3);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn quick_selftest_passes() {
    let out = coopsim(&["selftest", "--quick"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 5);
}
