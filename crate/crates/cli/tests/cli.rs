use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = "[sampling]\npoints = 50\nbracket_points = 10\ncross_path_inputs = 10\n";

fn geofol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geofol"))
        .args(args)
        .output()
        .expect("spawn geofol")
}

fn config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.toml");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn lightlike(dir: &TempDir, out: &str, extra: &[&str]) -> Output {
    let cfg = config(dir.path(), SMALL);
    let out = dir.path().join(out);
    let mut args = vec![
        "verify-lightlike",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    geofol(&args)
}

#[test]
fn passing_run_exits_zero_and_writes_report() {
    let dir = TempDir::new().unwrap();
    let o = lightlike(&dir, "a", &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("a/report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["schema_version"].is_u64());
}

#[test]
fn csv_header() {
    let dir = TempDir::new().unwrap();
    assert!(lightlike(&dir, "a", &[]).status.success());
    let mut n = 0;
    for e in fs::read_dir(dir.path().join("a")).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "csv") {
            let text = fs::read_to_string(&p).unwrap();
            assert_eq!(
                text.lines().next().unwrap(),
                "s,x,y,z,t,u,vx,vy,vz,vt,vu,g_vv"
            );
            n += 1;
        }
    }
    assert!(n > 0);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    assert!(lightlike(&dir, "a", &["--seed", "7"]).status.success());
    assert!(lightlike(&dir, "b", &["--seed", "7"]).status.success());
    let mut names: Vec<_> = fs::read_dir(dir.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(!names.is_empty());
    for n in names {
        let a = fs::read(dir.path().join("a").join(&n)).unwrap();
        let b = fs::read(dir.path().join("b").join(&n)).unwrap();
        assert!(a == b, "{n:?} differs");
    }
}

#[test]
fn unknown_key_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), "[run]\nseed = 3\nsed = 4\n");
    let out = dir.path().join("out");
    let o = geofol(&[
        "verify-lightlike",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sed"));
}

#[test]
fn invalid_tolerance_exits_one() {
    let dir = TempDir::new().unwrap();
    let o = lightlike(&dir, "a", &["--tol", "-1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_arguments_exit_one() {
    assert_eq!(geofol(&["verify-lightlike"]).status.code(), Some(1));
    assert_eq!(geofol(&["no-such-scenario"]).status.code(), Some(1));
}

#[test]
fn defaults_reference_is_the_default_config() {
    let o = geofol(&["defaults"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(
        geofol::Config::from_toml(&text).unwrap(),
        geofol::Config::default()
    );
}

#[test]
fn checked_in_defaults_are_current() {
    let o = geofol(&["defaults"]);
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/defaults.toml");
    let saved = fs::read_to_string(path).unwrap();
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        saved,
        "regenerate with `geofol defaults`"
    );
}
