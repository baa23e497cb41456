//! End-to-end checks of the `tpanet` binary: exit codes, verdict text
//! and the machine-readable block.

use std::path::PathBuf;
use std::process::Command;

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn tpanet(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_tpanet"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).expect("utf-8 output"),
    )
}

#[test]
fn check_reports_pulse_verdicts() {
    let (code, out) = tpanet(&["check", &fixture("fm.net")]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("automaton FM"));
    assert!(out.contains("reactive: ok"));
    assert!(out.contains("weak-pulse: ok"));
    assert!(out.contains("strong-pulse: witness at n=0"));
}

#[test]
fn compose_reports_the_schedule_for_a_well_defined_net() {
    let (code, out) = tpanet(&["compose", &fixture("fm_buf.net")]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("WELL-DEFINED"), "{out}");
    assert!(out.contains("product: signature"));
}

#[test]
fn compose_on_the_blocking_pair_exits_with_a_witness() {
    let (code, out) = tpanet(&["compose", &fixture("blocking.net")]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("EMPTY-COMPOSITION"), "{out}");
}

#[test]
fn equiv_accepts_the_fm_buf_net() {
    let (code, out) = tpanet(&["equiv", &fixture("fm_buf.net")]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("EQUIVALENT at horizon 2"), "{out}");
}

#[test]
fn run_without_a_script_is_a_usage_error() {
    let (code, out) = tpanet(&["run", &fixture("fm_buf.net")]);
    assert_eq!(code, 2, "{out}");
    assert!(out.contains("input"), "{out}");
}

#[test]
fn run_emits_the_canonical_trace_format() {
    let (code, out) = tpanet(&["run", "--seed", "3", &fixture("fm.net")]);
    assert_eq!(code, 0, "{out}");
    assert!(out.starts_with("t=0 "), "{out}");
    assert!(out.contains("o:<"), "{out}");
}

#[test]
fn parse_errors_exit_with_code_two() {
    let dir = std::env::temp_dir();
    let path = dir.join(format!("tpanet-bad-{}.net", std::process::id()));
    std::fs::write(&path, "alphabet a;\nnonsense here;\n").unwrap();
    let (code, out) = tpanet(&["check", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(code, 2, "{out}");
    assert!(out.contains("syntax error at 2:1"), "{out}");
}

#[test]
fn exhausted_budgets_exit_with_code_three() {
    let (code, out) = tpanet(&["behaviors", "--budget", "1", &fixture("fm.net")]);
    assert_eq!(code, 3, "{out}");
    assert!(out.contains("budget"), "{out}");
}

#[test]
fn machine_block_is_appended_on_request() {
    let (code, out) = tpanet(&["check", "--machine", &fixture("fm.net")]);
    assert_eq!(code, 0, "{out}");
    assert!(
        out.contains("machine-begin\ncommand=check\nstatus=ok\n"),
        "{out}"
    );
    assert!(out.contains("FM.weak_pulse=ok"), "{out}");
    assert!(out.trim_end().ends_with("machine-end"), "{out}");
}

#[test]
fn dist_measures_the_first_disagreement() {
    let dir = std::env::temp_dir();
    let pid = std::process::id();
    let a: PathBuf = dir.join(format!("tpanet-trace-a-{pid}.txt"));
    let b: PathBuf = dir.join(format!("tpanet-trace-b-{pid}.txt"));
    std::fs::write(&a, "t=0 i:<a>\nt=1 i:<b>\n").unwrap();
    std::fs::write(&b, "t=0 i:<a>\nt=1 i:<>\n").unwrap();
    let (code, out) = tpanet(&["dist", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("distance: 2^-1"), "{out}");

    std::fs::write(&b, "t=0 i:<a>\nt=1 i:<b>\n").unwrap();
    let (code, out) = tpanet(&["dist", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("distance: <=2^-2"), "{out}");
    std::fs::remove_file(&a).ok();
    std::fs::remove_file(&b).ok();
}

#[test]
fn behaviors_respects_the_horizon_flag() {
    let (code, out) = tpanet(&["behaviors", "--horizon", "1", &fixture("fm.net")]);
    assert_eq!(code, 0, "{out}");
    let count: usize = out
        .lines()
        .next()
        .and_then(|l| l.strip_prefix("behaviors: "))
        .and_then(|n| n.parse().ok())
        .expect("count line");
    // Nine input slices; only (i, j) both nonempty and distinct admit
    // two merge orders, adding two behaviors.
    assert_eq!(count, 11);
}
