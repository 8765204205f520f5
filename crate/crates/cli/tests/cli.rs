use std::path::PathBuf;
use std::process::Command;

use dijkstra_cli::{run, EXIT_DIAGNOSTICS, EXIT_OK, EXIT_UNKNOWN};

const CORPUS: &[&str] = &["st", "exn", "exnst", "stexnC", "cont", "difc", "id"];

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus_file(n: &str) -> String {
    root().join(format!("corpus/{n}.dm")).display().to_string()
}

fn golden_file(n: &str, ext: &str) -> String {
    root().join(format!("corpus/golden/{n}.{ext}")).display().to_string()
}

fn dm4f(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("dm4f").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn temp_dm(src: &str) -> tempfile::NamedTempFile {
    let f = tempfile::Builder::new().suffix(".dm").tempfile().unwrap();
    std::fs::write(f.path(), src).unwrap();
    f
}

#[test]
fn corpus_checks() {
    for n in CORPUS {
        let (code, out, _) = dm4f(&["check", &corpus_file(n)]);
        assert_eq!(code, EXIT_OK, "{n}: {out}");
        assert!(out.lines().last().unwrap().starts_with("installed "));
    }
}

#[test]
fn corpus_goldens_hold_loosely_and_strictly() {
    for n in CORPUS {
        for (cmd, ext) in [("translate", "translate"), ("elaborate", "elaborate")] {
            let g = golden_file(n, ext);
            let (code, out, _) = dm4f(&[cmd, &corpus_file(n), "--golden", &g]);
            assert_eq!(code, EXIT_OK, "{n} {cmd}: {out}");
            let (code, out, _) = dm4f(&[cmd, &corpus_file(n), "--golden", &g, "--strict-golden"]);
            assert_eq!(code, EXIT_OK, "{n} {cmd} strict: {out}");
        }
    }
}

#[test]
fn corpus_vc_verdicts_match_the_recorded_ones() {
    for n in CORPUS {
        let (code, out, _) = dm4f(&["vc", &corpus_file(n), "--format", "sexp"]);
        assert_eq!(code, EXIT_OK, "{n}: {out}");
        let want = std::fs::read_to_string(golden_file(n, "vc")).unwrap();
        assert_eq!(out, want, "{n}");
    }
}

#[test]
fn state_bind_is_printed_in_continuation_form() {
    let (code, out, _) = dm4f(&["translate", &corpus_file("st")]);
    assert_eq!(code, EXIT_OK);
    let bind = out.lines().find(|l| l.starts_with("bind* = ")).unwrap();
    assert!(bind.ends_with("-> f s0 (fun (p:a * int) -> g (fst p) (snd p) p1)"), "{bind}");
}

#[test]
fn state_laws_are_three_valid_verdicts() {
    let (code, out, _) = dm4f(&["vc", &corpus_file("st"), "--kinds", "laws"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().filter(|l| l.ends_with(": valid")).count(), 3);
}

#[test]
fn edited_golden_is_reported() {
    let g = std::fs::read_to_string(golden_file("st", "translate")).unwrap();
    let bad = g.replace("(pair x s0)", "(pair x x)");
    assert_ne!(g, bad);
    let f = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(f.path(), bad).unwrap();
    let (st, p) = (corpus_file("st"), f.path().display().to_string());
    for strict in [false, true] {
        let mut args = vec!["translate", st.as_str(), "--golden", p.as_str()];
        if strict {
            args.push("--strict-golden");
        }
        let (code, out, _) = dm4f(&args);
        assert_eq!(code, EXIT_DIAGNOSTICS, "{out}");
        assert!(out.contains("mismatch"));
    }
}

#[test]
fn pure_arithmetic_runs_to_an_integer() {
    let f = temp_dm("let sq (x:int) : int = x * x\nlet answer : int = sq 6 + 6\n");
    let (code, out, _) = dm4f(&["run", f.path().to_str().unwrap(), "answer"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "42\n");
    let (code, _, err) = dm4f(&["run", f.path().to_str().unwrap(), "missing"]);
    assert_eq!(code, EXIT_DIAGNOSTICS);
    assert!(err.contains("no definition named `missing`"));
}

#[test]
fn fuel_bounds_evaluation() {
    let f = temp_dm("let answer : int = 1 + 2 + 3 + 4\n");
    let (code, out, _) = dm4f(&["--fuel", "1", "run", f.path().to_str().unwrap(), "answer"]);
    assert_eq!(code, EXIT_DIAGNOSTICS, "{out}");
}

#[test]
fn undecided_vcs_exit_with_two_unless_warned() {
    let src = std::fs::read_to_string(corpus_file("st")).unwrap().replace("g x s1", "g x s0");
    let f = temp_dm(&src);
    let p = f.path().to_str().unwrap();
    let (code, out, _) = dm4f(&["vc", p, "--kinds", "laws"]);
    assert_eq!(code, EXIT_UNKNOWN, "{out}");
    assert!(out.contains("ST.right_unit [equality]: unknown"));
    let (code, _, _) = dm4f(&["vc", p, "--kinds", "laws", "--unknown", "warn"]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn smt_scripts_are_written_per_vc() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("smt");
    let (code, _, _) = dm4f(&["vc", &corpus_file("st"), "--kinds", "laws", "--smt-export", d.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let mut names: Vec<String> = std::fs::read_dir(&d)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["ST.assoc.smt2", "ST.left_unit.smt2", "ST.right_unit.smt2"]);
    let s = std::fs::read_to_string(d.join("ST.assoc.smt2")).unwrap();
    assert!(s.contains("(check-sat)"));
}

#[test]
fn simulation_reports_are_deterministic() {
    let args = ["simulate", "--seed", "5", "--count", "24", "--depth", "4", "--format", "sexp"];
    let (c1, a, _) = dm4f(&args);
    let (c2, b, _) = dm4f(&args);
    assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
    assert_eq!(a, b);
    assert_eq!(a.lines().filter(|l| l.starts_with("(run ")).count(), 24 + 3);
    assert!(a.lines().last().unwrap().contains("(mismatches 0)"));
}

#[test]
fn unknown_kinds_and_bad_usage_are_diagnostics() {
    let (code, _, err) = dm4f(&["vc", &corpus_file("st"), "--kinds", "bogus"]);
    assert_eq!(code, EXIT_DIAGNOSTICS);
    assert!(err.contains("unknown VC kind"));
    assert_eq!(dm4f(&["frobnicate"]).0, EXIT_DIAGNOSTICS);
    assert_eq!(dm4f(&["--help"]).0, EXIT_OK);
}

#[test]
fn file_errors_name_the_file() {
    let f = temp_dm("let broken : int = 1 +\n");
    let (code, out, err) = dm4f(&["check", f.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_DIAGNOSTICS);
    assert!(out.contains(f.path().to_str().unwrap()), "{out}{err}");
}

#[test]
fn binary_exit_status() {
    let bin = env!("CARGO_BIN_EXE_dm4f");
    let ok = Command::new(bin).args(["vc", &corpus_file("st"), "--kinds", "laws"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8(ok.stdout).unwrap().lines().count(), 4);
    let missing = Command::new(bin).args(["check", "/nonexistent.dm"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
}
