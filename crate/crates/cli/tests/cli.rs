use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use rand::SeedableRng;

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowpds")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn pre(extra: &[&str]) -> Output {
    let (pds, aut) = (fixture("ab.pds"), fixture("wpre.aut"));
    let mut args = vec![extra[0], "--pds", &pds, "--automaton", &aut];
    args.extend_from_slice(&extra[1..]);
    run(&args)
}

#[test]
fn unreachable_query_exits_one() {
    let o = pre(&["query", "--direction", "pre", "--config", "<p: b>"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "UNREACHABLE");
}

#[test]
fn unknown_symbol_in_query_is_a_usage_error() {
    let o = pre(&["query", "--direction", "pre", "--config", "<p: zz>"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown stack symbol zz"), "{}", stderr(&o));
}

#[test]
fn iteration_limit_exits_three() {
    let o = pre(&["solve", "--direction", "pre", "--max-steps", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn malformed_input_reports_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad: PathBuf = dir.path().join("bad.pds");
    std::fs::write(&bad, "algebra minplus\nrule <p, a> -> <p b> weight 1\n").unwrap();
    let o = run(&[
        "solve",
        "--pds",
        bad.to_str().unwrap(),
        "--automaton",
        &fixture("wpre.aut"),
        "--direction",
        "pre",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error: ") && err.contains("bad.pds: line 2:"), "{err}");
}

#[test]
fn missing_arguments_give_one_error_line() {
    let o = run(&["solve", "--pds", &fixture("ab.pds")]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr(&o).lines().count(), 1, "{}", stderr(&o));
}

#[test]
fn zero_oracle_depth_is_rejected() {
    let o = pre(&["oracle", "--direction", "pre", "--mode", "soundness", "--depth", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_reports_ok_on_the_worked_example() {
    let o = pre(&["oracle", "--direction", "pre", "--mode", "soundness"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("OK\n"));
}

#[test]
fn prestar_writes_constraints_after_the_automaton() {
    let o = pre(&["prestar"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let (aut, cons) = out.split_once("# constraints\n").unwrap();
    assert!(aut.contains("trans p a p"));
    assert_eq!(cons.lines().count(), 3);
}

#[test]
fn outputs_do_not_depend_on_rule_order() {
    let dir = tempfile::tempdir().unwrap();
    let rules = [
        "rule <p, a> -> <p, b> weight 1",
        "rule <p, b> -> <p, eps> weight 1",
        "rule <p, a> -> <p, a b> weight 3",
        "rule <p, b> -> <q, a> weight 2",
        "rule <q, a> -> <p, eps> weight 0",
    ];
    let aut = dir.path().join("in.aut");
    std::fs::write(&aut, "final f\ntrans p a f\ntrans q b f\n").unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut seen = None;
    for i in 0..6 {
        let mut shuffled = rules.to_vec();
        shuffled.shuffle(&mut rng);
        let pds = dir.path().join(format!("p{i}.pds"));
        std::fs::write(&pds, format!("algebra minplus\n{}\n", shuffled.join("\n"))).unwrap();
        let mut outs = Vec::new();
        for (cmd, dir_flag) in [("prestar", None), ("poststar", None), ("solve", Some("pre")), ("solve", Some("post"))] {
            let mut args = vec![cmd, "--pds", pds.to_str().unwrap(), "--automaton", aut.to_str().unwrap()];
            if let Some(d) = dir_flag {
                args.extend(["--direction", d]);
            }
            let o = run(&args);
            assert!(o.status.success(), "{cmd}: {}", stderr(&o));
            outs.push(stdout(&o));
        }
        match &seen {
            None => seen = Some(outs),
            Some(first) => assert_eq!(first, &outs),
        }
    }
}

#[test]
fn check_algebra_prints_a_law_report() {
    let o = run(&["check-algebra", "--pds", &fixture("ab.pds")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("left-distributive"), "{out}");
}
