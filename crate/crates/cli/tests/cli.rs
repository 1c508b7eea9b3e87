use std::path::PathBuf;
use std::process::{Command, Output};

use loopsoup::fourier::homology1_intensity;
use loopsoup::graph::{GraphModel, SpanningTreeFrame};

fn graph(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../graphs").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loopsoup")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# loopsoup="));
    let body: String = lines.map(|l| format!("{l}\n")).collect();
    csv::Reader::from_reader(body.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn validate_reports_mass() {
    let out = ok(&["validate", graph("triangle.txt").to_str().unwrap()]);
    let line = out.lines().find(|l| l.starts_with("r=1, mass=")).unwrap();
    let mass: f64 = line["r=1, mass=".len()..].parse().unwrap();
    assert!((mass - 0.52325).abs() < 5e-6, "{line}");
    assert!((mass - (27.0f64 / 16.0).ln()).abs() < 1e-9);
}

#[test]
fn validate_reports_infinite_mass_without_killing() {
    let out = ok(&["validate", graph("k4_free.txt").to_str().unwrap()]);
    assert!(out.contains("mass: infinite (κ≡0)"), "{out}");
}

#[test]
fn malformed_edge_line_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "vertices 3\nedge 0 1 1\nedge 1 x 1\n").unwrap();
    let o = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn h1_delegates_to_library() {
    let path = graph("triangle.txt");
    let out = ok(&["h1", path.to_str().unwrap(), "--h", "1", "--grid", "64"]);
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 1);
    let g = GraphModel::triangle(1.0).unwrap();
    let expected = homology1_intensity(&g, &SpanningTreeFrame::bfs(&g).unwrap(), &[1], 64).unwrap();
    assert_eq!(rows[0][0], "1");
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), expected);
}

#[test]
fn h1_box_is_symmetric() {
    let out = ok(&["h1", graph("triangle.txt").to_str().unwrap(), "--range", "2", "--alpha", "1"]);
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 5);
    for k in 0..5 {
        let a: f64 = rows[k][1].parse().unwrap();
        let b: f64 = rows[4 - k][1].parse().unwrap();
        assert!((a - b).abs() < 1e-12);
    }
    let law: f64 = rows.iter().map(|r| r[2].parse::<f64>().unwrap()).sum();
    assert!(law > 0.99 && law <= 1.0 + 1e-9);
}

#[test]
fn zeta_rows_have_zero_difference() {
    let out = ok(&["zeta", graph("k4.txt").to_str().unwrap(), "--l", "6"]);
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r[3] == "0"));
    assert_eq!(rows[2][1], "8");
}

#[test]
fn signature_of_commutator() {
    let out = ok(&["signature", "--word", "+1 +2 -1 -2", "--depth", "3"]);
    assert_eq!(data_rows(&out), vec![vec!["2", "1 2", "[X1,X2]", "1"]]);
}

#[test]
fn h2_intensities_cover_residues() {
    let out = ok(&["h2", graph("bowtie.txt").to_str().unwrap(), "--p", "5"]);
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 5);
    let m: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(m, ["0", "1", "2", "3", "4"]);
    assert!(rows.iter().all(|r| r[1] == "5"));
}

#[test]
fn homotopy_and_enumerate_agree_on_short_classes() {
    let path = graph("triangle.txt");
    let analytic = data_rows(&ok(&["homotopy", path.to_str().unwrap(), "--l", "3"]));
    let enumerated = data_rows(&ok(&["enumerate", path.to_str().unwrap(), "--n-max", "14"]));
    for row in analytic.iter().filter(|r| r[0] != "trivial") {
        let e = enumerated.iter().find(|r| r[0] == row[0]).unwrap();
        let (a, b): (f64, f64) = (row[3].parse().unwrap(), e[3].parse().unwrap());
        assert!(a >= b && a - b < 1e-3, "{row:?} vs {e:?}");
    }
}

#[test]
fn sampling_is_byte_identical_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let path = graph("bowtie.txt");
    let mut outputs = Vec::new();
    for k in 0..2 {
        let soup = dir.path().join(format!("soup{k}.csv"));
        let occ = dir.path().join(format!("occ{k}.csv"));
        let args = [
            "sample",
            path.to_str().unwrap(),
            "--alpha",
            "3",
            "--seed",
            "11",
            "--output",
            soup.to_str().unwrap(),
            "--occupation",
            occ.to_str().unwrap(),
        ];
        ok(&args);
        outputs.push((std::fs::read(&soup).unwrap(), std::fs::read(&occ).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let soup = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert!(soup.starts_with("# loopsoup="));
    assert!(soup.lines().next().unwrap().contains("alpha=3 n_max="));
    assert!(soup.lines().next().unwrap().contains("seed=11"));
    let occ = String::from_utf8(outputs[0].1.clone()).unwrap();
    assert_eq!(occ.lines().nth(1), Some("u,v,N,Ncheck"));
}

#[test]
fn numeric_failure_exit_code() {
    let o = run(&["h1", graph("k4_free.txt").to_str().unwrap(), "--h", "0,0,0", "--grid", "8"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn configuration_exit_codes() {
    let tri = graph("triangle.txt");
    let bowtie = graph("bowtie.txt");
    let cases: [&[&str]; 5] = [
        &["sample", tri.to_str().unwrap(), "--alpha", "-1"],
        &["h2", bowtie.to_str().unwrap(), "--p", "4"],
        &["h1", tri.to_str().unwrap(), "--h", "1,2"],
        &["validate", "/nonexistent/graph.txt"],
        &["frobnicate"],
    ];
    for args in cases {
        assert_eq!(run(args).status.code(), Some(4), "{args:?}");
    }
}

#[test]
fn zeta_rejects_weighted_graph() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.txt");
    std::fs::write(&path, "vertices 3\nedge 0 1 2\nedge 1 2 1\nedge 0 2 1\n").unwrap();
    assert_eq!(run(&["zeta", path.to_str().unwrap()]).status.code(), Some(2));
}
