use std::process::{Command, Output};

fn gnnstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gnnstab"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn version_and_help() {
    let out = gnnstab(&["--version"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains(env!("CARGO_PKG_VERSION")));
    let out = gnnstab(&["--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in [
        "train",
        "transfer",
        "perturb-sweep",
        "split-sweep",
        "verify",
        "demo",
    ] {
        assert!(text.contains(cmd), "{cmd}");
    }
}

#[test]
fn bad_arguments_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none.data");
    let out = gnnstab(&[
        "train",
        "--data",
        missing.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let out = gnnstab(&["train", "--mu=-1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = gnnstab(&["perturb-sweep", "--seeds", "a..b"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn demo_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = gnnstab(&["demo", "--out", dir.path().to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("demo_tradeoff.csv").exists());
    assert!(String::from_utf8_lossy(&out.stdout).contains("margin"));
}

#[test]
fn verify_passes_and_detects_fault() {
    let dir = tempfile::tempdir().unwrap();
    let out = gnnstab(&["verify", "--quick", "--out", dir.path().to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("verify.csv").exists());

    let out = gnnstab(&[
        "verify",
        "--quick",
        "--inject-fault",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("check gradient failed"), "{err}");
}
