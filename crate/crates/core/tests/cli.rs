use phaselock::gridfile::read_grid;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phaselock"))
        .args(args)
        .arg("--set")
        .arg(format!("output_dir={}", dir.display()))
        .env_remove("PHASELOCK_WORKERS")
        .output()
        .unwrap()
}

#[test]
fn compass_wigner_file_reports_four_lobes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "wigner",
            "--set",
            "theta=pi/2",
            "--set",
            "t_frac=1/8",
            "--set",
            "format=grid",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let g = read_grid(&dir.path().join("wigner_th0_t0.wgrd")).unwrap();
    assert_eq!(g.metadata["lobe_count"], "4");
    assert_eq!(g.dims, vec![2048, 512]);
    assert!(g.metadata.contains_key("conventions"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\nnx = 512\nnp = 128\nt_frac = 1/16\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = run(
        &out_dir,
        &[
            "metrics",
            "--config",
            cfg.to_str().unwrap(),
            "--set",
            "theta=0:pi:3",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn user_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["nonsense"],
        vec!["eigen", "--set", "n_levels=500"],
        vec!["eigen", "--set", "colour=blue"],
        vec!["eigen", "--set", "novalue"],
        vec!["eigen", "--config", "/definitely/not/here.cfg"],
    ] {
        let out = run(dir.path(), &args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn failing_command_leaves_nothing_behind() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("fresh");
    let out = run(&out_dir, &["wigner", "--set", "p_max=1e6"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_dir.exists());
}

#[test]
fn worker_override_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_phaselock"))
        .args(["table2", "--set"])
        .arg(format!("output_dir={}", dir.path().display()))
        .env("PHASELOCK_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("PHASELOCK_WORKERS"));
}

#[test]
fn help_exits_cleanly() {
    let out = Command::new(env!("CARGO_BIN_EXE_phaselock"))
        .arg("--help")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("--set"));
}
