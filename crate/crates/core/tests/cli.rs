use std::path::Path;
use std::process::{Command, Output};

fn tfemdg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfemdg")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Value printed after `key` in a report line.
fn field(report: &str, key: &str) -> f64 {
    let line = report.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no '{key}' in {report}"));
    line[key.len()..].split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn generate_writes_expected_element_counts() {
    let dir = tempfile::tempdir().unwrap();
    for (dim, n, elements) in [("2", "8", 128), ("1", "10", 10), ("3", "2", 48)] {
        let o = tfemdg(&["generate", "--dim", dim, "--n", n, "--out", "m.txt"], dir.path());
        assert!(o.status.success());
        let text = std::fs::read_to_string(dir.path().join("m.txt")).unwrap();
        let header: Vec<usize> = text.lines().next().unwrap().split_whitespace().map(|t| t.parse().unwrap()).collect();
        assert_eq!(header[2], elements);
    }
}

#[test]
fn dgify_counts_and_identity_edit() {
    let dir = tempfile::tempdir().unwrap();
    assert!(tfemdg(&["generate", "--dim", "2", "--n", "1", "--out", "m.txt"], dir.path()).status.success());
    let o = tfemdg(&["dgify", "--mesh", "m.txt", "--selector", "all", "--out", "dg.txt"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("2 thick, 2 interface, 8 boundary elements"), "{}", stdout(&o));
    let prov: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("dg.txt.provenance.json")).unwrap()).unwrap();
    assert_eq!(prov["interfaces"].as_array().unwrap().len(), 5);

    for selector in ["none", "circle:0.5,0.5,0"] {
        let o = tfemdg(&["dgify", "--mesh", "m.txt", "--selector", selector, "--out", "same.txt"], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(std::fs::read(dir.path().join("same.txt")).unwrap(), std::fs::read(dir.path().join("m.txt")).unwrap());
    }
}

#[test]
fn solve_reports_jumps_and_writes_vtk() {
    let dir = tempfile::tempdir().unwrap();
    let o = tfemdg(
        &["solve", "--dim", "1", "--n", "10", "--jmin-exp", "3", "--case", "interval_parabola", "--out", "u.vtk"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = stdout(&o);
    assert!(field(&report, "max jump") > 1e-4, "{report}");
    assert!(field(&report, "error L2") < 1e-2);
    let vtk = std::fs::read_to_string(dir.path().join("u.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version"));
    assert!(vtk.contains("DATASET UNSTRUCTURED_GRID"));
    assert!(vtk.contains("CELLS 10 30"), "dummies must be left out by default");
    assert!(vtk.contains("SCALARS u double"));
}

#[test]
fn solve_without_interfaces_matches_plain_fem_output() {
    let dir = tempfile::tempdir().unwrap();
    assert!(tfemdg(&["generate", "--dim", "2", "--n", "6", "--out", "m.txt"], dir.path()).status.success());
    let a = tfemdg(&["solve", "--mesh", "m.txt", "--selector", "none", "--out", "a.vtk"], dir.path());
    let b = tfemdg(&["solve", "--dim", "2", "--n", "6", "--selector", "none", "--out", "b.vtk"], dir.path());
    assert!(a.status.success() && b.status.success());
    assert_eq!(field(&stdout(&a), "error L2"), field(&stdout(&b), "error L2"));
    assert_eq!(std::fs::read(dir.path().join("a.vtk")).unwrap(), std::fs::read(dir.path().join("b.vtk")).unwrap());
}

#[test]
fn compare_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    for (dim, n) in [("1", "10"), ("2", "4"), ("3", "1")] {
        let o = tfemdg(&["compare", "--dim", dim, "--n", n, "--jmin", "1e-4"], dir.path());
        assert!(o.status.success(), "dim {dim}: {}", stdout(&o));
        assert!(field(&stdout(&o), "max relative matrix difference") <= 1e-12);
    }
    let o = tfemdg(&["compare", "--dim", "2", "--n", "4", "--jmin", "1e-4", "--threshold", "0"], dir.path());
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn usage_and_solver_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let no_sizes = tfemdg(&["convergence", "--case", "square_trig", "--jmin-exp", "4", "--out", "c.csv"], dir.path());
    assert_eq!(no_sizes.status.code(), Some(2));
    let bad_case = tfemdg(&["solve", "--dim", "2", "--n", "2", "--case", "nope"], dir.path());
    assert_eq!(bad_case.status.code(), Some(2));
    let missing = tfemdg(&["dgify", "--mesh", "absent.txt", "--out", "x.txt"], dir.path());
    assert_eq!(missing.status.code(), Some(2));
    let stalled = tfemdg(
        &["solve", "--dim", "2", "--n", "4", "--solver", "cg", "--preconditioner", "none", "--max-iter", "1"],
        dir.path(),
    );
    assert_eq!(stalled.status.code(), Some(3));
}

#[test]
fn convergence_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let o = tfemdg(&["convergence", "--case", "square_trig", "--jmin-exp", "4", "--n", "4,8,16", "--out", "rates.csv"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("rates.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    let svg = std::fs::read_to_string(dir.path().join("rates.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(stdout(&o).contains("L2 slope"));
}

#[test]
fn front_demo_writes_one_frame_per_radius() {
    let dir = tempfile::tempdir().unwrap();
    let o = tfemdg(&["front-demo", "--n", "6", "--radii", "0,0.25,1", "--out", "frames"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for k in 0..3 {
        assert!(dir.path().join(format!("frames/frame_{k:03}.vtk")).exists());
    }
    let bad = tfemdg(&["front-demo", "--n", "4", "--radii", "0.5,0.1", "--out", "f2"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}
