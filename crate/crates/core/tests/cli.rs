use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zeroweight"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

#[test]
fn avg_prints_the_bare_value() {
    let o = run(&["avg", "--field", "pow(abs(z),2)", "--center", "0,0", "--radius", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0.125\n");
    let o = run(&["avg", "--field", "log(abs(z))", "--center", "-0.1,0", "--radius", "0.3"]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    // centre inside the disk: ln r + (|z|²/r² − 1)/2
    let exact = 0.3f64.ln() + (0.01 / 0.09 - 1.0) / 2.0;
    assert!((v - exact).abs() < 1e-11, "{v} vs {exact}");
}

#[test]
fn constant_profile_is_convex_at_rho_one() {
    let o = run(&["tc-check", "--profile", "const:1", "--rho", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("result: PASS\n"));
}

#[test]
fn negative_constant_fails_with_witness() {
    let o = run(&["tc-check", "--profile", "const:-1", "--rho", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let s = stdout(&o);
    assert!(s.contains("stage rho-trig-convex: FAIL"));
    assert!(s.contains(" at θ₁ = "), "{s}");
}

#[test]
fn missing_scenario_is_an_input_error() {
    let o = run(&["verify", "--scenario", "missing.txt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.txt"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["avg", "--field", "re"]).status.code(), Some(2));
    assert_eq!(run(&["nosuch"]).status.code(), Some(2));
    assert_eq!(run(&["avg", "--field", "re(", "--center", "0,0", "--radius", "0.1"]).status.code(), Some(2));
    assert_eq!(run(&["--tol", "-1", "tc-check", "--profile", "cos", "--rho", "1"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn help_documents_csv_columns() {
    let s = stdout(&run(&["--help"]));
    for col in ["re,im,value", "kind,theta,value", "re,im,margin", "r_inner,r_outer,theta_start,theta_end,nu,grid,rel_err"] {
        assert!(s.contains(col), "missing {col}");
    }
}

#[test]
fn failing_scenario_names_the_node() {
    let o = run(&["verify", "--scenario", scenarios().join("forward_violation.txt").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let s = stdout(&o);
    assert!(s.contains("stage hypothesis: FAIL"));
    assert!(s.contains("at (0, 0)"), "{s}");
}

#[test]
fn verify_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("maps");
    let sc = scenarios().join("sectors_kink.txt");
    let o = run(&["--out", out.to_str().unwrap(), "verify", "--scenario", sc.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let table = std::fs::read_to_string(out.join("theorem2-sector-masses.csv")).unwrap();
    assert!(table.starts_with("r_inner,r_outer,theta_start,theta_end,nu,grid,rel_err"));
    assert_eq!(table.lines().count(), 21);
}

#[test]
fn lift_and_riesz_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let lift = dir.path().join("lift.csv");
    let o = run(&["--grid", "-1,1,-1,1,9,9", "--out", lift.to_str().unwrap(), "lift", "--field", "abs2"]);
    assert_eq!(o.status.code(), Some(0));
    let g = zeroweight::fields::io::read_grid(&lift).unwrap();
    assert_eq!(g.spec.len(), 81);

    let m = dir.path().join("m.csv");
    let o = run(&[
        "--grid",
        "-1,1,-1,1,33,33",
        "--out",
        m.to_str().unwrap(),
        "riesz",
        "--field",
        "pot:0.25,0,2",
        "--disk",
        "0,0,0.5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("disk mass: 2\n"), "{}", stdout(&o));
    let back = zeroweight::fields::io::read_measure(&m).unwrap();
    assert!((back.total() - 2.0).abs() < 1e-12);
}

#[test]
fn defect_csv_lists_atoms() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d.csv");
    let o = run(&["--out", p.to_str().unwrap(), "tc-defect", "--profile", "abssin", "--rho", "1", "--samples", "256"]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&p).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("atom,")).count(), 2);
    assert_eq!(text.lines().filter(|l| l.starts_with("density,")).count(), 256);
}

#[test]
fn qbound_reports_threshold_and_license() {
    let o = run(&["tc-qbound", "--g", "const:1", "--h", "2+0.5cos", "--rho", "1", "--C", "0.5", "--q", "2,3.01,4,10"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("threshold: 3\n"), "{s}");
    assert!(s.contains("licensed by: condition 2"));
    assert!(s.contains("q = 2 is not above the threshold"));
    assert_eq!(s.matches("stage complementable").count(), 3);
}

#[test]
fn extension_of_negative_profile_fails() {
    let o = run(&["--grid", "-2,2,-2,2,33,33", "tc-extend", "--profile", "const:-1", "--rho", "1", "--pairs", "10"]);
    assert_eq!(o.status.code(), Some(1));
    let s = stdout(&o);
    assert!(s.contains("stage extension subharmonic: FAIL"));
    assert!(s.contains("skipped"));
}

#[test]
fn catalog_lists_and_shows() {
    let o = run(&["catalog", "list"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("abssin"));
    assert_eq!(stdout(&run(&["catalog", "show", "re"])), "Re z, harmonic\nexpression: re(z)\n");
    assert_eq!(run(&["catalog", "show", "nosuch"]).status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_without_timing() {
    let args = ["--grid", "-1,1,-1,1,17,17", "checksubh", "--field", "rez2"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let timed = stdout(&run(&["--timing", "tc-check", "--profile", "cos", "--rho", "1", "--samples", "128"]));
    assert!(timed.contains("wall time: "));
}
