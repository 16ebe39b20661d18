use std::fs;
use std::process::Command;

use xharness::cli::{run, EXIT_ERROR, EXIT_FAIL, EXIT_OK};

fn call(args: &[&str]) -> (i32, String, String) {
    let argv: Vec<String> = std::iter::once("lexmatch").chain(args.iter().copied()).map(String::from).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(&argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let (code, _, err) = call(&["size", "--no-such-flag"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("Usage"));
    let (code, _, _) = call(&["no-such-command"]);
    assert_eq!(code, EXIT_ERROR);
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("eps-sweep"));
}

#[test]
fn bad_values_are_runtime_errors() {
    let (code, _, err) = call(&["size", "--law", "poisson:-1"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("error"));
    let (code, _, err) = call(&["match"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("--graph"));
}

#[test]
fn check_passes() {
    let (code, out, _) = call(&["check", "--samples", "100", "--format", "csv"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.starts_with("# lexmatch-result v1 experiment=check"));
}

#[test]
fn tolerance_failure_exits_two() {
    // a k = 2 law solved with one level breaks the size identity
    let (code, out, _) = call(&["solve", "--law", "poisson:3", "--k", "1", "--grid-points", "1024", "--samples", "0"]);
    assert_eq!(code, EXIT_FAIL, "{out}");
}

#[test]
fn output_is_deterministic() {
    let args = ["eps-sweep", "--trees", "40", "--seed", "11"];
    let (c1, a, _) = call(&args);
    let (c2, b, _) = call(&args);
    assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
    assert_eq!(a, b);
    let (_, c, _) = call(&["eps-sweep", "--trees", "40", "--seed", "12"]);
    assert_ne!(a, c);
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "# separation run\nexperiment = separation\np = 2\nsamples = 2000\nseed = 3\n").unwrap();
    let (code, out, _) = call(&["--config", conf.to_str().unwrap(), "separation", "--samples", "1000"]);
    assert!(code == EXIT_OK || code == EXIT_FAIL);
    assert!(out.contains("\"p\": \"2\""), "{out}");
    assert!(out.contains("\"samples\": \"1000\""), "{out}");

    fs::write(&conf, "experiment = separation\nbogus = 1\n").unwrap();
    let (code, _, err) = call(&["--config", conf.to_str().unwrap(), "separation"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("line 2"), "{err}");

    fs::write(&conf, "experiment = decay\n").unwrap();
    let (code, _, _) = call(&["--config", conf.to_str().unwrap(), "separation"]);
    assert_eq!(code, EXIT_ERROR);
}

#[test]
fn gen_then_match_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let (code, _, _) =
        call(&["gen", "--law", "poisson:2", "--depth", "4", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let graph = out.join("graph.txt");
    assert!(fs::read_to_string(&graph).unwrap().starts_with("lexmatch-graph v1"));
    assert!(out.join("gen.json").exists());
    let (code, text, _) = call(&["match", "--graph", graph.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(text.starts_with("size="));
    let mout = dir.path().join("m");
    let (code, rec, _) = call(&["match", "--graph", graph.to_str().unwrap(), "--out", mout.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(rec.contains("perf_vertex_match_prob"));
    assert_eq!(fs::read_to_string(mout.join("matching.txt")).unwrap(), text);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_lexmatch");
    let st = Command::new(bin).args(["check", "--samples", "50"]).output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_OK));
    let st = Command::new(bin).arg("--bogus").output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_ERROR));
}
