//! End-to-end runs of the `flatfront` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use flatfront::{CanonicalModuli, ValidationReport};
use tempfile::TempDir;

fn flatfront(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatfront")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Solves `(r, s)` into `dir/name.json`.
fn solved(dir: &TempDir, name: &str, r: f64, s: f64) -> PathBuf {
    let path = dir.path().join(format!("{name}.json"));
    let out = flatfront(&["solve", "--r", &r.to_string(), "--s", &s.to_string(), "--out", path_str(&path)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn read_obj(path: &Path) -> (Vec<[f64; 3]>, usize) {
    let text = fs::read_to_string(path).unwrap();
    let mut verts = Vec::new();
    let mut faces = 0;
    for line in text.lines() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let v: Vec<f64> = it.map(|t| t.parse().unwrap()).collect();
                verts.push([v[0], v[1], v[2]]);
            }
            Some("f") => faces += 1,
            _ => {}
        }
    }
    (verts, faces)
}

#[test]
fn solve_prints_and_writes_moduli() {
    let out = flatfront(&["solve", "--r", "0.25", "--s", "-0.5"]);
    assert_eq!(code(&out), 0);
    let m = CanonicalModuli::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!((m.m + 2.5).abs() < 1e-12 && (m.z0 + 0.5).abs() < 1e-10);

    let dir = TempDir::new().unwrap();
    let path = solved(&dir, "half", 0.25, -0.5);
    let written = CanonicalModuli::from_json(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written, m);
    let trace: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("half.trace.json")).unwrap()).unwrap();
    assert!(trace["residuals"].as_array().unwrap().iter().all(|v| v.as_f64().unwrap() < 1e-10));
}

#[test]
fn moduli_json_round_trips_exactly() {
    let dir = TempDir::new().unwrap();
    let path = solved(&dir, "m", 0.37, -0.61);
    let text = fs::read_to_string(&path).unwrap();
    let m = CanonicalModuli::from_json(&text).unwrap();
    assert_eq!(m.to_json() + "\n", text);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["r", "s", "m", "z0", "z1", "z2", "c1", "c2", "a_R", "b_R", "c_height"] {
        assert!(v[key].is_f64(), "{key}");
    }
}

#[test]
fn out_of_range_arguments_exit_two() {
    assert_eq!(code(&flatfront(&["solve", "--r", "1.5", "--s", "-0.5"])), 2);
    assert_eq!(code(&flatfront(&["solve", "--r", "0.25", "--s", "0.2"])), 2);
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.obj");
    assert_eq!(code(&flatfront(&["rotational", "--b", "1.0", "--out", path_str(&out)])), 2);
    assert_eq!(code(&flatfront(&["solve"])), 2);
}

#[test]
fn unreadable_moduli_exit_three() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("none.json");
    assert_eq!(code(&flatfront(&["validate", path_str(&missing)])), 3);
    let junk = dir.path().join("junk.json");
    fs::write(&junk, "{\"r\": 0.25}").unwrap();
    let out = dir.path().join("o.obj");
    assert_eq!(code(&flatfront(&["mesh", path_str(&junk), "--out", path_str(&out)])), 3);
}

#[test]
fn validate_passes_the_half_solution_and_flags_corruption() {
    let dir = TempDir::new().unwrap();
    let path = solved(&dir, "half", 0.25, -0.5);
    let report_path = dir.path().join("report.json");
    let out = flatfront(&["validate", path_str(&path), "--grid", "60", "--out", path_str(&report_path)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: ValidationReport = serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert!(report.passed());

    let mut m = CanonicalModuli::from_json(&fs::read_to_string(&path).unwrap()).unwrap();
    m.z1 += 1e-2;
    let bad = dir.path().join("bad.json");
    fs::write(&bad, m.to_json()).unwrap();
    let out = flatfront(&["validate", path_str(&bad), "--grid", "40"]);
    assert_eq!(code(&out), 1);
    let report: ValidationReport = serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(report.c3_res > 1e-10);
    assert!(report.failures().contains(&"c3_res"));
}

#[test]
fn half_space_mesh_clusters_at_both_apexes() {
    let dir = TempDir::new().unwrap();
    let path = solved(&dir, "half", 0.25, -0.5);
    let m = CanonicalModuli::from_json(&fs::read_to_string(&path).unwrap()).unwrap();
    let obj = dir.path().join("half.obj");
    let out = flatfront(&["mesh", path_str(&path), "--nu", "16", "--nv", "32", "--out", path_str(&obj)]);
    assert_eq!(code(&out), 0);
    let (verts, faces) = read_obj(&obj);
    assert!(faces > 0);
    let low = m.z1.abs() * 0.25f64.powf(-1.5);
    let near = |h: f64| {
        verts
            .iter()
            .filter(|v| (v[0].hypot(v[1])).hypot(v[2] - h) < 1e-3)
            .count()
    };
    assert!(near(1.0) >= 32, "outer apex");
    assert!(near(low) >= 32, "inner apex at {low}");
}

#[test]
fn ply_and_klein_outputs() {
    let dir = TempDir::new().unwrap();
    let path = solved(&dir, "half", 0.25, -0.5);
    let ply = dir.path().join("half.ply");
    let out = flatfront(&["mesh", path_str(&path), "--format", "ply", "--out", path_str(&ply)]);
    assert_eq!(code(&out), 0);
    let bytes = fs::read(&ply).unwrap();
    let head = String::from_utf8_lossy(&bytes[..200.min(bytes.len())]);
    assert!(head.starts_with("ply\nformat binary_little_endian 1.0\n"));
    assert!(head.contains("property double x"));

    let klein = dir.path().join("klein.obj");
    let out = flatfront(&["mesh", path_str(&path), "--model", "klein", "--out", path_str(&klein)]);
    assert_eq!(code(&out), 0);
    let (verts, _) = read_obj(&klein);
    assert!(verts.iter().all(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() < 1.0));
}

#[test]
fn rotational_half_apex_and_report() {
    let dir = TempDir::new().unwrap();
    let obj = dir.path().join("rot.obj");
    let out = flatfront(&["rotational", "--b", "0.5", "--out", path_str(&obj)]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("rot.report.json")).unwrap()).unwrap();
    assert!((report["apex_height"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((report["max_x3"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(report["euler_characteristic"].as_i64().unwrap(), 0);

    let obj = dir.path().join("rot3.obj");
    assert_eq!(code(&flatfront(&["rotational", "--b", "0.3", "--out", path_str(&obj)])), 0);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("rot3.report.json")).unwrap()).unwrap();
    for k in report["curvature_samples"].as_array().unwrap() {
        assert!(k.as_f64().unwrap().abs() < 1e-4);
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let a = solved(&dir, "a", 0.3, -0.4);
    let b = solved(&dir, "b", 0.3, -0.4);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(fs::read(dir.path().join("a.trace.json")).unwrap(), fs::read(dir.path().join("b.trace.json")).unwrap());
    let mesh = |name: &str, fmt: &str| {
        let p = dir.path().join(name);
        let out = flatfront(&["mesh", path_str(&a), "--nu", "12", "--nv", "24", "--format", fmt, "--out", path_str(&p)]);
        assert_eq!(code(&out), 0);
        fs::read(p).unwrap()
    };
    assert_eq!(mesh("1.obj", "obj"), mesh("2.obj", "obj"));
    assert_eq!(mesh("1.ply", "ply"), mesh("2.ply", "ply"));
    let v1 = flatfront(&["validate", path_str(&a), "--grid", "30"]).stdout;
    let v2 = flatfront(&["validate", path_str(&b), "--grid", "30"]).stdout;
    assert_eq!(v1, v2);
}
