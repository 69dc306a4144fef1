use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn contextua(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contextua"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn emit(dir: &Path, name: &str, params: &[&str]) -> PathBuf {
    let mut args = vec!["scenarios", "emit", name];
    for p in params {
        args.extend(["--param", p]);
    }
    let o = contextua(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    write(dir, &format!("{name}.json"), &stdout(&o))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn pr_box_fraction_is_one() {
    let dir = TempDir::new().unwrap();
    let pr = emit(dir.path(), "pr-box", &[]);
    let o = contextua(&["fraction", s(&pr)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(r#""cf": "1""#));
    assert_eq!(contextua(&["--strict", "fraction", s(&pr)]).status.code(), Some(1));
}

#[test]
fn hollow_triangle_has_one_loop() {
    let dir = TempDir::new().unwrap();
    let k = write(dir.path(), "hollow_triangle.json", "[[0, 1], [1, 2], [0, 2]]");
    let o = contextua(&["homology", s(&k), "--n", "1"]);
    assert!(stdout(&o).contains(r#""betti": 1"#), "{}", stdout(&o));
}

#[test]
fn classical_bit_validates_cleanly() {
    let dir = TempDir::new().unwrap();
    let bit = write(
        dir.path(),
        "classical_bit.json",
        r#"{"dimension": 2, "states": [[1, 0], [0, 1]], "effects": [[1, 0], [0, 1]],
            "unit_effect": [1, 1], "measurements": [[0, 1]]}"#,
    );
    let o = contextua(&["--strict", "validate", s(&bit)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(r#""violations": []"#));
}

#[test]
fn input_errors_exit_two_with_distinct_messages() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", "{");
    let o = contextua(&["fraction", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("malformed JSON"));

    let o = contextua(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unrecognized subcommand"));

    let pm = emit(dir.path(), "peres-mermin", &[]);
    let o = contextua(&["nc-check", s(&pm)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("scale cap"));

    let o = contextua(&["fraction", s(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let f = emit(dir.path(), "chsh-fragment", &[]);
    let a = contextua(&["nc-check", s(&f)]);
    let b = contextua(&["nc-check", s(&f)]);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains(r#""noncontextual": false"#));
    assert!(stdout(&a).contains(r#""certificate_verified": true"#));
}

#[test]
fn table_mode_renders_the_same_fields() {
    let dir = TempDir::new().unwrap();
    let m = emit(dir.path(), "noisy-pr-box", &["v=3/4"]);
    let t = stdout(&contextua(&["--table", "fraction", s(&m)]));
    assert!(t.lines().any(|l| l.starts_with("cf ") && l.ends_with(" 1/2")), "{t}");
    assert!(t.lines().any(|l| l.starts_with("ncf ") && l.ends_with(" 1/2")));
}

#[test]
fn sweep_writes_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("sweep.csv");
    let o = contextua(&[
        "sweep", "noisy-pr-box", "--vary", "v", "--from", "0", "--to", "1", "--steps", "5", "--emit-csv", s(&csv),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "param,ncf,cf,df,negativity");
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[5], "1,0,1,0,1");
}

#[test]
fn phases_show_monodromy_of_a_contextual_valuation() {
    let dir = TempDir::new().unwrap();
    let g = emit(dir.path(), "gbit", &[]);
    let rep = write(dir.path(), "rep.json", r#"{"mu": [[1, 1, 1, 1]], "xi": [[1], [1], [0], [0]]}"#);
    let o = contextua(&["--strict", "phases", s(&g), "--rep", s(&rep)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains(r#""monodromy": "nontrivial""#), "{}", stdout(&o));
    let o = contextua(&["curvature", s(&g), "--rep", s(&rep)]);
    assert!(stdout(&o).contains(r#""flat": false"#));
    let o = contextua(&["decompose", s(&g), "--rep", s(&rep), "--view", "topological"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn disturbance_extends_and_splits() {
    let dir = TempDir::new().unwrap();
    let m = emit(dir.path(), "planted-gap", &["gap=1/4"]);
    let o = contextua(&["disturbance", s(&m), "--extend", "--fractions"]);
    let out = stdout(&o);
    assert!(out.contains(r#""disturbing": true"#));
    assert!(out.contains("b@C1"));
    assert!(out.contains(r#""df": "#));
}

#[test]
fn vorobyev_and_interference() {
    let dir = TempDir::new().unwrap();
    let h = write(dir.path(), "cycle.json", r#"[["a", "b"], ["b", "c"], ["c", "d"], ["d", "a"]]"#);
    assert!(stdout(&contextua(&["vorobyev", s(&h)])).contains(r#""acyclic": false"#));
    let path = write(dir.path(), "path.json", r#"{"contexts": [["a", "b"], ["b", "c"]]}"#);
    assert!(stdout(&contextua(&["vorobyev", s(&path)])).contains(r#""acyclic": true"#));

    let mu = write(
        dir.path(),
        "measure.json",
        r#"{"atoms": ["A", "B"], "p": {"A": "1/4", "B": "1/4", "A,B": 1}}"#,
    );
    let o = contextua(&["interference", s(&mu), "--order", "2"]);
    assert!(stdout(&o).contains("1/2"), "{}", stdout(&o));
}

#[test]
fn scenario_list_names_every_entry() {
    let out = stdout(&contextua(&["scenarios", "list"]));
    for name in ["pr-box", "chsh-quantum", "kcbs-quantum", "gbit", "classical-simplex"] {
        assert!(out.contains(name));
    }
    let o = contextua(&["scenarios", "emit", "gbit", "--param", "x=1"]);
    assert_eq!(o.status.code(), Some(2));
}
