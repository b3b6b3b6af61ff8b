mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use adawass::{io, TreeProcess};
use tempfile::TempDir;

fn aw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aw")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, t: &TreeProcess) -> String {
    let p: PathBuf = dir.join(name);
    std::fs::write(&p, io::tree_to_json(t)).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn dist_examples() {
    let d = TempDir::new().unwrap();
    let x = write(d.path(), "x.json", &common::dirac(&[1.0, 2.0]));
    let y = write(d.path(), "y.json", &common::dirac(&[3.0, 5.0]));
    let o = aw(&["dist", &x, &y, "--p", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "3.605551275464");
    assert_eq!(stdout(&aw(&["dist", &x, &x])).trim(), "0.000000000000");

    let (ex, ey) = common::eps_pair(0.1);
    let ex = write(d.path(), "ex.json", &ex);
    let ey = write(d.path(), "ey.json", &ey);
    assert_eq!(stdout(&aw(&["dist", &ex, &ey, "--p", "1"])).trim(), "1.100000000000");
}

#[test]
fn exit_codes() {
    let d = TempDir::new().unwrap();
    let bad = d.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    let bad = bad.to_str().unwrap();
    let x = write(d.path(), "x.json", &common::dirac(&[1.0, 2.0]));
    let z = write(d.path(), "z.json", &common::dirac(&[1.0]));
    assert_eq!(aw(&["dist", bad, &x]).status.code(), Some(2));
    assert_eq!(aw(&["dist", &x, &x, "--p", "0.5"]).status.code(), Some(2));
    assert_eq!(aw(&["dist", &x, &z]).status.code(), Some(3));
    assert_eq!(aw(&["bogus"]).status.code(), Some(2));

    let single = common::seeded_tree(1, 1, 1, 1);
    let mut b = adawass::TreeBuilder::new(vec![1]).unwrap();
    let root = b.root();
    for i in 0..5 {
        b.add_child(root, vec![i as f64], 0.2).unwrap();
    }
    let w = write(d.path(), "w.json", &b.build().unwrap());
    let v = write(d.path(), "v.json", &single);
    let o = aw(&["--max-leaves", "2", "geodesic", &w, &w, "--grid", "0,1"]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(aw(&["geodesic", &w, &v, "--grid", "0,1"]).status.success());
}

#[test]
fn canonical_and_equiv() {
    let d = TempDir::new().unwrap();
    let base = common::seeded_tree(17, 2, 1, 3);
    let (dup, _) = common::plant_duplicate(&base);
    let x = write(d.path(), "dup.json", &dup);
    let out = d.path().join("c.json");
    let o = aw(&["canonical", &x, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let c = io::read_tree(&out).unwrap();
    assert_eq!(stdout(&o).trim(), c.len().to_string());
    assert!(c.len() < dup.len());

    let o = aw(&["equiv", &x, out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "equivalent");

    let (ex, ey) = common::eps_pair(0.1);
    let ex = write(d.path(), "ex.json", &ex);
    let ey = write(d.path(), "ey.json", &ey);
    let o = aw(&["equiv", &ex, &ey]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "not equivalent");
}

#[test]
fn plan_and_check() {
    let d = TempDir::new().unwrap();
    let (ex, ey) = common::eps_pair(0.1);
    let ex = write(d.path(), "ex.json", &ex);
    let ey = write(d.path(), "ey.json", &ey);
    let plan = d.path().join("plan.json");
    let o = aw(&["dist", &ex, &ey, "--plan-out", plan.to_str().unwrap()]);
    assert!(o.status.success());
    let o = aw(&["check", &ex, &ey, plan.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("bicausal"));
}

#[test]
fn skorokhod_table() {
    let d = TempDir::new().unwrap();
    let seq = d.path().join("seq");
    std::fs::create_dir(&seq).unwrap();
    for n in 1..=5 {
        write(&seq, &format!("x{n:02}.json"), &common::dirac(&[1.0 / n as f64, 1.0 / n as f64]));
    }
    let lim = write(d.path(), "lim.json", &common::dirac(&[0.0, 0.0]));
    let flow = d.path().join("flow.json");
    let o = aw(&["skorokhod", seq.to_str().unwrap(), &lim, "--out", flow.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = stdout(&o);
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    for r in rows {
        let v: f64 = r.split('\t').nth(2).unwrap().parse().unwrap();
        assert!(v <= 1e-9, "{r}");
    }
    assert!(io::flow_from_json(&std::fs::read_to_string(&flow).unwrap()).is_ok());
    let o = aw(&["verify-flow", flow.to_str().unwrap()]);
    assert!(o.status.success());
}

#[test]
fn geodesic_energy_and_csv() {
    let d = TempDir::new().unwrap();
    let x = write(d.path(), "x.json", &common::dirac(&[1.0, 2.0]));
    let y = write(d.path(), "y.json", &common::dirac(&[3.0, 5.0]));
    let flow = d.path().join("f.json");
    let csv = d.path().join("f.csv");
    let o = aw(&[
        "geodesic", &x, &y, "--dyadic", "2", "--out", flow.to_str().unwrap(), "--csv", csv.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 5);
    for l in &lines[1..] {
        let q: f64 = l.split(',').nth(2).unwrap().parse().unwrap();
        assert!((q - 13f64.sqrt()).abs() < 1e-9);
    }
    let e: f64 = stdout(&aw(&["flow-energy", flow.to_str().unwrap()])).trim().parse().unwrap();
    assert!((e - 13.0).abs() < 1e-9);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let d = TempDir::new().unwrap();
    let fam = common::seeded_family(31, 2, 3, 2, 3);
    let x = write(d.path(), "x.json", &fam[0]);
    let y = write(d.path(), "y.json", &fam[1]);
    for args in [
        vec!["dist", &x, &y],
        vec!["plan", &x, &y],
        vec!["geodesic", &x, &y, "--dyadic", "2"],
        vec!["canonical", &x],
    ] {
        let a = aw(&args);
        let b = aw(&args);
        let c = Command::new(env!("CARGO_BIN_EXE_aw")).args(&args).env("ADAWASS_THREADS", "1").output().unwrap();
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
        assert_eq!(a.stdout, c.stdout);
    }
}
