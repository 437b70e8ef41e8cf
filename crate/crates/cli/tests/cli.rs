//! End-to-end runs of the `cadkit` binary: pipelines, flag parsing, report
//! files and byte-stable reruns.

use std::path::PathBuf;
use std::process::Command;

fn cadkit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cadkit"))
}

fn write_config(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("cadkit-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn kp_pipeline_reports_and_exit_zero() {
    let cfg = write_config(
        "kp.json",
        r#"{"pipeline": "kp_appendix", "domain": "half_plane", "coefficients": "kp_t_profile", "seed": 7}"#,
    );
    let out_dir = std::env::temp_dir().join("cadkit-cli-tests/kp-out");
    let output = cadkit()
        .args(["kp_appendix", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("[PASS] kp_sup"), "{stdout}");
    for f in ["report.json", "checks.csv", "constants.csv", "ladders.svg"] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    // Byte-identical rerun.
    let first = std::fs::read(out_dir.join("report.json")).unwrap();
    let output = cadkit()
        .args(["kp_appendix", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(output.status.success());
    let second = std::fs::read(out_dir.join("report.json")).unwrap();
    assert_eq!(first, second, "reports are not reproducible");
    // SVG has one point per ladder row (7 scales).
    let svg = std::fs::read_to_string(out_dir.join("ladders.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 7);
}

#[test]
fn bad_inputs_exit_one() {
    let out = cadkit().arg("kp_appendix").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let cfg = write_config("bad.json", r#"{"pipeline": "kp_appendix""#);
    let out = cadkit()
        .args(["kp_appendix", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let cfg = write_config(
        "badpipe.json",
        r#"{"pipeline": "x", "domain": "disk"}"#,
    );
    let out = cadkit()
        .args(["nonexistent_pipeline", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    // Out-of-range override.
    let cfg = write_config(
        "kp2.json",
        r#"{"pipeline": "kp_appendix", "domain": "half_plane"}"#,
    );
    let out = cadkit()
        .args(["kp_appendix", "--config"])
        .arg(&cfg)
        .args(["--pitch", "7.0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn classify_pipeline_on_small_disk() {
    let cfg = write_config(
        "classify.json",
        r#"{"pipeline": "classify", "domain": "disk", "depth": 3, "pitch": 0.0625, "seed": 3}"#,
    );
    let output = cadkit()
        .args(["classify", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("[PASS] ar"), "{stdout}");
    assert!(stdout.contains("[PASS] verdict"), "{stdout}");
}
