//! End-to-end checks of the binary: exit codes, output files, and
//! byte-for-byte reproducibility.

use std::path::Path;
use std::process::Command;

fn torcyl(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_torcyl"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read(out: &Path, name: &str) -> Vec<u8> {
    std::fs::read(out.join(name)).unwrap_or_else(|e| panic!("missing {name}: {e}"))
}

#[test]
fn verify_is_self_contained_and_green() {
    let dir = tempdir("verify");
    let run = torcyl(&["--cmd", "verify"], &dir);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let summary = String::from_utf8(read(&dir, "summary.json")).unwrap();
    assert!(summary.contains("\"beta\": 1.4392"));
    assert!(summary.contains("\"crossing_volume\": 9.549296585513720"));
    assert!(summary.contains("\"all_pass\": true"));
}

#[test]
fn solve_emits_summary_field_and_mask() {
    let dir = tempdir("solve");
    let run = torcyl(&["--cmd", "solve", "--c", "1.0", "--res", "64", "--vtk", "on"], &dir);
    assert!(run.status.success());
    let summary = String::from_utf8(read(&dir, "summary.json")).unwrap();
    for key in [
        "volume",
        "energy",
        "energy_dirichlet",
        "residual",
        "iterations",
        "c0_estimate",
        "gamma_length",
    ] {
        assert!(summary.contains(&format!("\"{key}\"")), "summary missing {key}");
    }
    let field = String::from_utf8(read(&dir, "field.csv")).unwrap();
    assert!(field.starts_with("x1,xN,value\n"));
    assert_eq!(field.lines().count(), 1 + 64 * 256);
    let mask = String::from_utf8(read(&dir, "mask.txt")).unwrap();
    assert!(mask.starts_with("grid 64 256 "));
    let vtk = String::from_utf8(read(&dir, "field.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version 3.0"));
}

#[test]
fn identical_config_and_seed_reproduce_bytes() {
    let args = [
        "--cmd",
        "optimize",
        "--res",
        "24",
        "--L",
        "1",
        "--c",
        "0.4",
        "--seed",
        "11",
        "--max-iters",
        "25",
        "--volume-tol",
        "0.01",
    ];
    let d1 = tempdir("det1");
    let d2 = tempdir("det2");
    assert!(torcyl(&args, &d1).status.success());
    assert!(torcyl(&args, &d2).status.success());
    for name in ["summary.json", "history.csv", "mask.txt", "field.csv"] {
        assert_eq!(read(&d1, name), read(&d2, name), "{name} differs between runs");
    }
}

#[test]
fn config_file_keys_are_overridable() {
    let dir = tempdir("config");
    let cfg_path = dir.join("run.json");
    std::fs::write(
        &cfg_path,
        r#"{"cmd": "solve", "c": 0.25, "res": 64, "L": 1.0}"#,
    )
    .unwrap();
    let run = torcyl(&["--config", cfg_path.to_str().unwrap(), "--c", "0.5"], &dir);
    assert!(run.status.success());
    let summary = String::from_utf8(read(&dir, "summary.json")).unwrap();
    assert!(summary.contains("\"volume\": 5.0000000000000000e-1"), "{summary}");
}

#[test]
fn sweep_writes_the_table() {
    let dir = tempdir("sweep");
    let run = torcyl(
        &[
            "--cmd",
            "sweep",
            "--res",
            "24",
            "--L",
            "1",
            "--c-range",
            "0.4:0.8:0.4",
            "--max-iters",
            "20",
            "--volume-tol",
            "0.02",
        ],
        &dir,
    );
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let sweep = String::from_utf8(read(&dir, "sweep.csv")).unwrap();
    let mut lines = sweep.lines();
    assert_eq!(
        lines.next().unwrap(),
        "c,energy,rect_oracle,halfdisk_oracle,verdict,gamma_length,gamma_bound,c0_identity,c0_lower,c0_consistent"
    );
    assert_eq!(lines.count(), 2);
    // the verdict flips across the marginal height 2*sqrt(beta)/pi
    assert!(sweep.contains("not_local_min"));
    assert!(sweep.contains(",local_min"));
}

#[test]
fn exit_codes_match_failure_classes() {
    let dir = tempdir("codes");
    // infeasible geometry
    let run = torcyl(&["--cmd", "solve", "--c", "9.0"], &dir);
    assert_eq!(run.status.code(), Some(4));
    // invalid config
    let run = torcyl(&["--cmd", "solve", "--res", "0"], &dir);
    assert_eq!(run.status.code(), Some(2));
    let run = torcyl(&["--cmd", "nope"], &dir);
    assert_eq!(run.status.code(), Some(2));
    // enumeration refusal counts as an invalid instance
    let run = torcyl(&["--cmd", "enumerate", "--k", "8", "--cap", "100"], &dir);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn enumerate_cross_checks_the_strategies() {
    let dir = tempdir("enum");
    let run = torcyl(&["--cmd", "enumerate"], &dir);
    assert!(run.status.success());
    let summary = String::from_utf8(read(&dir, "summary.json")).unwrap();
    assert!(summary.contains("\"cellswap_never_beats_brute\": true"));
    assert!(summary.contains("\"minimizers_connected\": true"));
}

fn tempdir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("torcyl-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
