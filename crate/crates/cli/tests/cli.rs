use std::path::Path;
use std::process::{Command, Output};

fn isingrc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isingrc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn strip_runtime(csv: &str) -> String {
    csv.lines()
        .map(|l| match l.rsplit_once(',') {
            Some((head, _)) if !l.starts_with('#') => head.to_string(),
            _ => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn xtoy_on_small_box_passes() {
    let o = isingrc(&["verify", "xtoy", "--lattice", "box:d=2,L=2,bc=free", "--beta", "0.5", "--tol", "1e-10"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.starts_with("# run-config: "));
    assert!(s.contains("instance_id,quantity,lhs,rhs,abs_diff,slack,pass,runtime_ms"));
    assert_eq!(s.matches(",true,").count(), 3);
}

#[test]
fn dual_beta_prints_value() {
    let o = isingrc(&["gauge", "dualbeta", "--beta", "0.5"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "0.3859684");
}

#[test]
fn missing_graph_file_is_exit_2() {
    let o = isingrc(&["exact", "z", "--graph", "missing.txt", "--beta", "0.3"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_are_exit_2() {
    assert_eq!(code(&isingrc(&["exact", "z", "--no-such-flag"])), 2);
    assert_eq!(code(&isingrc(&["frobnicate"])), 2);
    assert_eq!(code(&isingrc(&["exact", "z", "--lattice", "box:d=2,L=2"])), 2);
    assert_eq!(code(&isingrc(&["exact", "z", "--lattice", "grid", "--beta", "1"])), 2);
}

#[test]
fn size_errors_are_exit_2() {
    let o = isingrc(&["exact", "corr", "--lattice", "box:d=2,L=3,bc=free", "--beta", "0.3", "--cap-single-edges", "4"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("size limit"));
}

#[test]
fn verification_failure_is_exit_1() {
    // a tolerance below zero cannot be met
    let o = isingrc(&["exact", "corr", "--lattice", "box:d=2,L=2,bc=free", "--beta", "0.3", "--tol=-1"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains(",false,"));
}

#[test]
fn graph_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("tri.txt");
    std::fs::write(&g, "# triangle\nvertex 0\nedge 0 1 1.0\nedge 1 2 1.0\nedge 0 2 1.0\n").unwrap();
    let o = isingrc(&["verify", "xtoy", "--graph", g.to_str().unwrap(), "--beta", "0.5493061443340549"]);
    assert_eq!(code(&o), 0);
    // tanh K = 1/2 on the triangle gives <s0 s1>^2 = 4/9
    assert!(stdout(&o).contains("4.44444444444444"));
}

#[test]
fn rerun_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for args in [
        vec!["exact", "corr", "--lattice", "box:d=2,L=2x3,bc=free", "--beta-sweep", "0.1:0.5:0.2"],
        vec!["sample", "sw", "--lattice", "box:d=2,L=2,bc=free", "--beta", "0.4", "--sweeps", "2000", "--seed", "9"],
        vec!["ineq", "griffiths", "--trials", "5", "--seed", "3"],
    ] {
        let mut v = args.clone();
        v.extend(["--out", a.to_str().unwrap()]);
        assert_eq!(code(&isingrc(&v)), 0);
        assert_eq!(code(&isingrc(&["rerun", a.to_str().unwrap(), "--out", b.to_str().unwrap()])), 0);
        let (x, y) = (std::fs::read_to_string(&a).unwrap(), std::fs::read_to_string(&b).unwrap());
        assert_eq!(strip_runtime(&x), strip_runtime(&y));
    }
}

#[test]
fn ineq_writes_worst_instance_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sl.csv");
    let o = isingrc(&["ineq", "simonlieb", "--trials", "6", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let worst = dir.path().join("sl.csv.worst.txt");
    assert!(worst.exists());
    let r = isingrc(&["replay", worst.to_str().unwrap()]);
    assert_eq!(code(&r), 0);
    assert!(stdout(&r).contains("simon-lieb"));
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn report_totals_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(code(&isingrc(&["ineq", "griffiths", "--trials", "4", "--out", a.to_str().unwrap()])), 0);
    assert_eq!(code(&isingrc(&["ineq", "dss", "--trials", "4", "--out", b.to_str().unwrap()])), 0);
    let o = isingrc(&["report", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 4);
    assert!(s.lines().last().unwrap().starts_with("total,"));

    let empty = isingrc(&["report"]);
    assert_eq!(code(&empty), 0);
    assert_eq!(stdout(&empty).lines().count(), 1);

    let bad = write(
        dir.path(),
        "bad.csv",
        "instance_id,quantity,lhs,rhs,abs_diff,slack,pass,runtime_ms\nx,q,1,1,0,0,true,1\nx,q,1,oops,0,0,true,1\n",
    );
    let o = isingrc(&["report", &bad]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.csv:3"));
}

#[test]
fn surface_tension_sweep_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let plot = dir.path().join("t.dat");
    let o = isingrc(&[
        "exact", "tension", "--lattice", "box:d=2,L=3x4,bc=pm", "--beta-sweep", "0.2:1.0:0.2", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let r = isingrc(&["report", out.to_str().unwrap(), "--plot", plot.to_str().unwrap()]);
    assert_eq!(code(&r), 0);
    let p = std::fs::read_to_string(plot).unwrap();
    assert!(p.contains("# surface_tension: nondecreasing"), "{p}");
    assert_eq!(p.lines().filter(|l| !l.starts_with('#')).count(), 5);
}
