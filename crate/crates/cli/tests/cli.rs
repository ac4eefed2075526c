use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn hardy_lab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardy-lab"))
        .args(args)
        .current_dir(dir)
        .env_remove("HARDY_LAB_SEED")
        .output()
        .expect("binary runs")
}

fn campaign(dir: &TempDir, text: &str) -> String {
    let path = dir.path().join("campaign.cfg");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

/// Data rows of report.csv, split into fields by the csv crate.
fn rows(dir: &Path) -> Vec<csv::StringRecord> {
    let text = fs::read_to_string(dir.join("report.csv")).unwrap();
    let body = text.strip_prefix("# hardy-lab report v1\n").expect("schema line");
    csv::Reader::from_reader(body.as_bytes()).records().map(|r| r.unwrap()).collect()
}

fn field<'a>(dir: &Path, row: &'a csv::StringRecord, name: &str) -> &'a str {
    let text = fs::read_to_string(dir.join("report.csv")).unwrap();
    let header = text.lines().nth(1).unwrap();
    let i = header.split(',').position(|h| h == name).unwrap();
    row.get(i).unwrap()
}

fn constant(dir: &Path, row: &csv::StringRecord, name: &str) -> f64 {
    field(dir, row, "constants")
        .split(';')
        .find_map(|kv| kv.strip_prefix(&format!("{name}=")))
        .unwrap_or_else(|| panic!("{name} missing"))
        .parse()
        .unwrap()
}

const UNIT: &str = "[experiment]\nid = unit\np = 2\nq = 2\nr = 2\nsearch_budget = 2000\ngrid_size = 512\n";

#[test]
fn empty_campaign_exits_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = campaign(&dir, "# nothing to run\n");
    let out = hardy_lab(&["run", &cfg, "--out", "out"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(rows(&dir.path().join("out")).is_empty());
    assert!(dir.path().join("out/summary.txt").exists());
}

#[test]
fn unit_weights_row() {
    let dir = TempDir::new().unwrap();
    let cfg = campaign(&dir, UNIT);
    let out = hardy_lab(&["run", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let rs = rows(dir.path());
    assert_eq!(rs.len(), 1);
    let c1 = constant(dir.path(), &rs[0], "C1");
    assert!((c1 - (2.0f64 / 27.0).sqrt()).abs() < 1e-4 * c1, "C1 = {c1}");
    assert_eq!(field(dir.path(), &rs[0], "regime"), "I");
    assert_eq!(field(dir.path(), &rs[0], "pass"), "true");
}

#[test]
fn small_p_is_rejected_at_parse_time() {
    let dir = TempDir::new().unwrap();
    let cfg = campaign(&dir, "[experiment]\nid = bad\n\np = 0.5\n");
    let out = hardy_lab(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");
    assert!(err.contains("only holds for trivial functions"), "{err}");
    assert!(!dir.path().join("report.csv").exists());
}

#[test]
fn reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let text = format!("{UNIT}\n[experiment]\nid = pow\np = 3\nq = 1.5\nr = 1\nu = power 1 0.5 0\nv = power 2 0.3 0\nsearch_budget = 1000\ngrid_size = 256\n");
    let cfg = campaign(&dir, &text);
    assert!(hardy_lab(&["run", &cfg, "--out", "a", "--jobs", "1"], dir.path()).status.success());
    assert!(hardy_lab(&["run", &cfg, "--out", "b"], dir.path()).status.success());
    let a = fs::read(dir.path().join("a/report.csv")).unwrap();
    let b = fs::read(dir.path().join("b/report.csv")).unwrap();
    assert_eq!(a, b);
    let ids: Vec<String> = rows(&dir.path().join("a")).iter().map(|r| r[0].to_string()).collect();
    assert_eq!(ids, ["unit", "pow"]);
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let cfg = campaign(&dir, UNIT);
    let out = Command::new(env!("CARGO_BIN_EXE_hardy-lab"))
        .args(["run", &cfg])
        .current_dir(dir.path())
        .env("HARDY_LAB_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("HARDY_LAB_SEED"));
}

#[test]
fn sweeping_v_scales_constants() {
    let dir = TempDir::new().unwrap();
    let cfg = campaign(
        &dir,
        "[experiment]\nid = s\np = 3\nq = 2\nr = 2.5\nu = power 1.2 0.3 0.1\nv = power 0.8 0.2 -0.1\nw = power 1 -0.2 0.4\n\
         search_budget = 400\ngrid_size = 256\n",
    );
    let out = hardy_lab(&["sweep", &cfg, "--param", "scale_v", "--values", "1,10,100"], dir.path());
    assert!(out.status.code().is_some_and(|c| c <= 1), "{}", String::from_utf8_lossy(&out.stderr));
    let rs = rows(dir.path());
    assert_eq!(rs.len(), 3);
    assert_eq!(&rs[1][0], "s@scale_v=10");
    let names: Vec<String> =
        field(dir.path(), &rs[0], "constants").split(';').map(|kv| kv.split('=').next().unwrap().to_string()).collect();
    assert_eq!(names, ["C3", "C5"]);
    for name in &names {
        let base = constant(dir.path(), &rs[0], name);
        for (row, lambda) in rs.iter().zip([1.0f64, 10.0, 100.0]) {
            let c = constant(dir.path(), row, name);
            let want = base * lambda.powf(-1.0 / 3.0);
            assert!((c - want).abs() <= 1e-10 * want, "{name}, lambda {lambda}: {c} vs {want}");
        }
    }
}

#[test]
fn unknown_sweep_parameter() {
    let dir = TempDir::new().unwrap();
    let cfg = campaign(&dir, UNIT);
    let out = hardy_lab(&["sweep", &cfg, "--param", "colour", "--values", "1,2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown parameter `colour`"));
    let empty = campaign(&dir, "");
    let out = hardy_lab(&["sweep", &empty, "--param", "colour", "--values", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn grid_refinement_does_not_lose_ground() {
    let dir = TempDir::new().unwrap();
    let cfg = campaign(
        &dir,
        "[experiment]\nid = g\np = 2\nq = 3\nr = 2.5\nu = power 1 0.2 0\nv = power 1 0.3 0\nw = power 1 0 0.2\n\
         search_budget = 2000\n",
    );
    let out = hardy_lab(&["sweep", &cfg, "--param", "grid_size", "--values", "256,512,1024"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let est: Vec<f64> = rows(dir.path()).iter().map(|r| field(dir.path(), r, "estimate").parse().unwrap()).collect();
    for w in est.windows(2) {
        assert!(w[1] >= w[0] * 0.98, "{est:?}");
    }
}

#[test]
fn discrete_mode_exports_the_sequence() {
    let dir = TempDir::new().unwrap();
    let cfg = campaign(&dir, "[experiment]\nid = d\nmode = discrete\np = 2\nq = 2\nr = 2\ntrunc_depth = 12\n");
    let out = hardy_lab(&["run", &cfg, "--out", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let seq = fs::read_to_string(dir.path().join("o/d_sequence.csv")).unwrap();
    let lines: Vec<&str> = seq.lines().collect();
    assert_eq!(lines[0], "index,x_k,W*");
    assert_eq!(lines.len(), 1 + 13);
    for line in &lines[1..] {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((f[1] - (1.0 - 2f64.powf(-f[0]))).abs() < 1e-9, "{line}");
        assert!((f[2] - 2f64.powf(-f[0])).abs() < 1e-9 * f[2], "{line}");
    }
}

#[test]
fn truncation_depth_barely_moves_discrete_constants() {
    let dir = TempDir::new().unwrap();
    let cfg = campaign(
        &dir,
        "[experiment]\nid = t\nmode = discrete\np = 2\nq = 3\nr = 1.5\nu = power 1 0.3 0\nv = power 1 0.2 0\nw = power 1 0 0.3\n",
    );
    let out = hardy_lab(&["sweep", &cfg, "--param", "trunc_depth", "--values", "10,20"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let est: Vec<f64> = rows(dir.path()).iter().map(|r| field(dir.path(), r, "estimate").parse().unwrap()).collect();
    assert!((est[0] - est[1]).abs() < 0.01 * est[1], "{est:?}");
}

#[test]
fn monotone_and_lemma_modes_pass() {
    let dir = TempDir::new().unwrap();
    let cfg = campaign(
        &dir,
        "[experiment]\nid = m\nmode = monotone\np = 0.5\nq = 1.5\nw = power 1 0 1\n\n\
         [experiment]\nid = l\nmode = lemmas\nlemma_draws = 3\ntrunc_depth = 12\n",
    );
    let out = hardy_lab(&["run", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let rs = rows(dir.path());
    assert_eq!(rs.len(), 1 + 10);
    assert_eq!(&rs[1][0], "l/sup-sum");
    assert_eq!(field(dir.path(), &rs[0], "r"), "");
    assert_eq!(field(dir.path(), &rs[0], "finite"), "true");
}

#[test]
fn failing_rows_set_the_exit_code() {
    let dir = TempDir::new().unwrap();
    // An impossible upper bound makes the unit experiment fail.
    let cfg = campaign(&dir, &format!("{UNIT}bound_upper = 1e-9\n\n{}", UNIT.replace("unit", "again")));
    let out = hardy_lab(&["run", &cfg, "--fail-fast"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(rows(dir.path()).len(), 1);
    let out = hardy_lab(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(rows(dir.path()).len(), 2);
}
