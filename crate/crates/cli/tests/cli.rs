//! End-to-end tests of the `cpa` binary: output stability, formats, and
//! the documented exit codes (0 ok, 1 usage, 2 bad input, 3 soundness).

use std::path::PathBuf;
use std::process::{Command, Output};

use std::io::Write as _;

fn cpa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpa")).args(args).output().expect("spawn cpa")
}

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../testdata").join(name);
    path.to_str().expect("utf-8 path").to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

#[test]
fn analyze_output_is_byte_identical_across_runs() {
    let fig6 = fixture("fig6.cfg");
    let args =
        ["analyze", &fig6, "-k", "3", "-d", "exact,must,cmust,blockcs,globalcs,product"];
    let first = cpa(&args);
    assert_eq!(first.status.code(), Some(0), "stderr: {:?}", first.stderr);
    for _ in 0..3 {
        let again = cpa(&args);
        assert_eq!(again.status.code(), Some(0));
        assert_eq!(first.stdout, again.stdout);
    }
}

#[test]
fn analyze_renders_the_expected_table() {
    let out = cpa(&["analyze", &fixture("fig1.cfg"), "-k", "2", "-d", "exact,cmust"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("persistence analysis: associativity 2"), "got: {text}");
    assert!(text.contains("scope loop1 (set 0): header s0, members s0 s1"), "got: {text}");
    assert!(text.contains("x      yes    no"), "got: {text}");
    assert!(text.contains("y      yes    no"), "got: {text}");
}

#[test]
fn json_reports_carry_the_format_version() {
    let out = cpa(&["analyze", &fixture("fig1.cfg"), "-k", "2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(value["format_version"], 1);
    assert_eq!(value["scopes"][0]["scope"], "loop1");
    assert_eq!(value["scopes"][0]["blocks"][0]["verdicts"][0]["persistent"], true);
}

#[test]
fn help_and_version_exit_zero() {
    for args in [&["--help"][..], &["analyze", "--help"], &["gen", "--help"], &["--version"]] {
        let out = cpa(args);
        assert_eq!(out.status.code(), Some(0), "args: {args:?}");
    }
    let top = cpa(&["--help"]);
    let text = stdout(&top);
    for word in ["analyze", "compare", "oracle-check", "gen"] {
        assert!(text.contains(word), "--help misses {word}: {text}");
    }
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["analyze"][..],                                  // missing file
        &["analyze", "x.cfg", "-k", "0"],                  // associativity 0
        &["analyze", "x.cfg", "--no-such-flag"],           // unknown flag
        &["analyze", "x.cfg", "-d", "bogus"],              // unknown domain
        &["analyze", "x.cfg", "--scopes", "sometimes"],    // unknown scope mode
        &["frobnicate"],                                   // unknown subcommand
    ] {
        let out = cpa(args);
        assert_eq!(out.status.code(), Some(1), "args: {args:?}");
    }
}

#[test]
fn bad_inputs_exit_two() {
    let missing = cpa(&["analyze", "/nonexistent/input.cfg"]);
    assert_eq!(missing.status.code(), Some(2));

    let mut garbage = tempfile::NamedTempFile::new().expect("temp file");
    writeln!(garbage, "entry a; node a; this is not an edge").expect("write");
    let parse = cpa(&["analyze", garbage.path().to_str().unwrap()]);
    assert_eq!(parse.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&parse.stderr).contains("error:"));

    // Explicit-tier domains reject labels they cannot track.
    let mut unknown = tempfile::NamedTempFile::new().expect("temp file");
    writeln!(unknown, "entry a; node a; edge a -> a : ?;").expect("write");
    let tier = cpa(&["analyze", unknown.path().to_str().unwrap(), "-d", "exact-explicit-0"]);
    assert_eq!(tier.status.code(), Some(2));
}

#[test]
fn an_unsound_domain_makes_compare_exit_three() {
    let out = cpa(&["compare", &fixture("fig3.cfg"), "-k", "1", "-d", "cmust-off-by-one"]);
    assert_eq!(out.status.code(), Some(3), "stdout: {}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("violation:"), "got: {text}");

    let sound = cpa(&["compare", &fixture("fig3.cfg"), "-k", "1", "-d", "cmust"]);
    assert_eq!(sound.status.code(), Some(0));
    assert!(!stdout(&sound).contains("violation:"));
}

#[test]
fn compare_emits_json_with_counts() {
    let out = cpa(&[
        "compare",
        &fixture("fig1.cfg"),
        "-k",
        "2",
        "-d",
        "cmust",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(value["subject"], "cmust");
    assert_eq!(value["reference"], "exact");
    assert_eq!(value["violations"].as_array().unwrap().len(), 0);
    assert!(!value["gaps"].as_array().unwrap().is_empty());
}

#[test]
fn oracle_check_agrees_on_the_fixtures() {
    for (file, k) in [("fig1.cfg", "2"), ("fig2.cfg", "2"), ("fig6.cfg", "3")] {
        let out = cpa(&["oracle-check", &fixture(file), "-k", k]);
        assert_eq!(out.status.code(), Some(0), "{file}: {}", stdout(&out));
        assert!(stdout(&out).contains("verdicts agree"), "{file}: {}", stdout(&out));
    }
}

#[test]
fn oracle_check_shows_a_witness_for_refuted_blocks() {
    let out = cpa(&["oracle-check", &fixture("fig1.cfg"), "-k", "1", "--block", "x"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    // The shortest double miss of x at k=1: x, then y evicts it, then x.
    assert!(text.contains("x! y x!"), "got: {text}");
}

#[test]
fn constraints_list_exactly_the_proven_named_blocks() {
    let out = cpa(&["analyze", &fixture("fig4.cfg"), "-k", "3", "--emit-constraints"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "m_w_loop1 <= entries_loop1;\nm_x_loop1 <= entries_loop1;\n");
}

#[test]
fn generated_programs_feed_back_into_analyze() {
    let dir = tempfile::tempdir().expect("temp dir");
    let program = dir.path().join("random.cfg");

    let generated = cpa(&["gen", "random", "--seed", "11"]);
    assert_eq!(generated.status.code(), Some(0));
    std::fs::write(&program, &generated.stdout).expect("write program");

    let analyzed =
        cpa(&["analyze", program.to_str().unwrap(), "-k", "2", "-d", "exact,product"]);
    assert_eq!(
        analyzed.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&analyzed.stderr)
    );

    // Same seed, same bytes.
    let again = cpa(&["gen", "random", "--seed", "11"]);
    assert_eq!(generated.stdout, again.stdout);
}

#[test]
fn the_reduction_answers_the_circuit_question() {
    let dir = tempfile::tempdir().expect("temp dir");

    // A 4-cycle has a hamiltonian circuit; a star does not.
    for (name, edges, expected) in [
        ("cycle", "4\n0 1\n1 2\n2 3\n3 0\n", "b      no"),
        ("star", "4\n0 1\n0 2\n0 3\n", "b      yes"),
    ] {
        let graph = dir.path().join(format!("{name}.txt"));
        std::fs::write(&graph, edges).expect("write graph");
        let gen = cpa(&["gen", "hamiltonian", "--graph", graph.to_str().unwrap()]);
        assert_eq!(gen.status.code(), Some(0));

        let program = dir.path().join(format!("{name}.cfg"));
        std::fs::write(&program, &gen.stdout).expect("write program");
        let out = cpa(&[
            "analyze",
            program.to_str().unwrap(),
            "-k",
            "4",
            "--sets",
            "1",
            "--scopes",
            "whole",
        ]);
        assert_eq!(out.status.code(), Some(0));
        let text = stdout(&out);
        assert!(text.contains(expected), "{name}: got {text}");
    }
}

#[test]
fn the_dot_dump_names_the_tracked_blocks() {
    let dir = tempfile::tempdir().expect("temp dir");
    let dot_path = dir.path().join("state.dot");
    let out = cpa(&[
        "analyze",
        &fixture("fig1.cfg"),
        "-k",
        "2",
        "--dump-zdd-dot",
        dot_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let dot = std::fs::read_to_string(&dot_path).expect("dot file written");
    assert!(dot.starts_with("digraph zdd {"), "got: {dot}");
    assert!(dot.contains("x[0]"), "got: {dot}");
    assert!(dot.contains("y[0]"), "got: {dot}");
}
