mod common;

use common::{fixture, path_arg, stderr, stdout, tmkit};

fn code(args: &[&str]) -> i32 {
    tmkit(args).status.code().unwrap()
}

#[test]
fn check_exit_codes() {
    let beef = tmkit(&["check", path_arg(&fixture("beef.tm"))]);
    assert_eq!(beef.status.code(), Some(0));
    assert_eq!(stderr(&beef), "");
    assert!(stdout(&beef).is_empty());

    let illegal = tmkit(&["check", path_arg(&fixture("invalid/illegal_flow.tm"))]);
    assert_eq!(illegal.status.code(), Some(1));
    let lines: Vec<String> = stderr(&illegal).lines().map(str::to_owned).collect();
    assert_eq!(lines.len(), 1, "{lines:?}");
    assert!(lines[0].starts_with("ERROR\t"));
    assert_eq!(lines[0].split('\t').count(), 3);

    assert_eq!(code(&["check", "/nonexistent/file.tm"]), 2);
    assert_eq!(code(&["check", path_arg(&fixture("invalid/garbage.tm"))]), 2);
    assert_eq!(code(&["check", path_arg(&fixture("invalid/unresolved.tm"))]), 2);
    assert_eq!(code(&["check", path_arg(&fixture("invalid/guard_unstored.tm"))]), 2);
}

#[test]
fn warnings_do_not_fail_check() {
    for name in ["warnings/chronology_cycle.tm", "warnings/root_specializes.tm", "human.tm"] {
        let out = tmkit(&["check", path_arg(&fixture(name))]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        assert!(stderr(&out).lines().all(|l| l.starts_with("WARNING\t")), "{name}");
    }
}

#[test]
fn parse_errors_carry_a_position() {
    let out = tmkit(&["check", path_arg(&fixture("invalid/garbage.tm"))]);
    let line = stderr(&out);
    let location = line.split('\t').nth(1).unwrap();
    assert!(location.ends_with("garbage.tm:1:8"), "{line}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&[]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["dot", path_arg(&fixture("beef.tm")), "--target", "sideways"]), 2);
    let beef = fixture("beef.tm");
    assert_eq!(code(&["simulate", path_arg(&beef), "--world", "no-equals-sign"]), 2);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn fmt_matches_the_golden_file_and_is_idempotent() {
    let out = tmkit(&["fmt", path_arg(&fixture("beef.tm"))]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), common::read_fixture("golden/beef.tm"));
    for path in common::corpus() {
        let once = stdout(&tmkit(&["fmt", path_arg(&path)]));
        let dir = tempdir();
        let tmp = dir.join("once.tm");
        std::fs::write(&tmp, &once).unwrap();
        assert_eq!(stdout(&tmkit(&["fmt", path_arg(&tmp)])), once, "{}", path.display());
    }
    assert_eq!(code(&["fmt", path_arg(&fixture("invalid/garbage.tm"))]), 2);
}

fn tempdir() -> std::path::PathBuf {
    use std::sync::atomic::{AtomicUsize, Ordering};
    static N: AtomicUsize = AtomicUsize::new(0);
    let dir = std::env::temp_dir().join(format!("tmkit-cli-{}-{}", std::process::id(), N.fetch_add(1, Ordering::SeqCst)));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn to_class_writes_the_golden_json() {
    let out = tmkit(&["to-class", path_arg(&fixture("bank.tm"))]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), common::read_fixture("bank.json"));

    let dir = tempdir();
    let json = dir.join("bank.json");
    let out = tmkit(&["to-class", path_arg(&fixture("bank.tm")), "--out", path_arg(&json)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    assert_eq!(std::fs::read_to_string(&json).unwrap(), common::read_fixture("bank.json"));
}

#[test]
fn to_tm_then_to_class_is_the_identity_on_json() {
    let dir = tempdir();
    let tm = dir.join("bank.tm");
    let back = dir.join("back.json");
    assert_eq!(code(&["to-tm", path_arg(&fixture("bank.json")), "--out", path_arg(&tm)]), 0);
    assert_eq!(code(&["check", path_arg(&tm)]), 0);
    assert_eq!(code(&["to-class", path_arg(&tm), "--out", path_arg(&back)]), 0);
    assert_eq!(std::fs::read(&back).unwrap(), std::fs::read(fixture("bank.json")).unwrap());
}

#[test]
fn conversion_errors_exit_one() {
    let dir = tempdir();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"classes": [{"name": "A", "methods": [{"name": 7}]}]}"#).unwrap();
    let out = tmkit(&["to-tm", path_arg(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("/classes/0/methods/0/name"), "{}", stderr(&out));

    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&["to-tm", path_arg(&bad)]), 1);

    let ambiguous = dir.join("ambiguous.tm");
    std::fs::write(&ambiguous, "thimac A { thimac B { store; thimac C { process; } } }").unwrap();
    assert_eq!(code(&["to-class", path_arg(&ambiguous)]), 1);
}

#[test]
fn simulate_beef() {
    let beef = fixture("beef.tm");
    let out = tmkit(&["simulate", path_arg(&beef)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), common::read_fixture("golden/beef.trace.txt"));
    assert!(stderr(&out).contains("Completed"));
    let json = tmkit(&["simulate", path_arg(&beef), "--trace-format", "json"]);
    assert_eq!(stdout(&json), common::read_fixture("golden/beef.trace.json"));

    let out = tmkit(&["simulate", path_arg(&beef), "--max-steps", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("StepBudgetExhausted"));
    assert_eq!(stdout(&out).lines().count(), 1);
}

fn bank(args: &[&str]) -> std::process::Output {
    let bank = fixture("bank.tm");
    let mut all = vec![
        "simulate",
        path_arg(&bank),
        "--world",
        "BankAccount.Balance.SavingsBalance=100",
        "--world",
        "BankAccount.Balance.CheckingBalance=100",
        "--world",
        "BankAccount.Owner=Ann",
    ];
    all.extend_from_slice(args);
    tmkit(&all)
}

fn events(out: &std::process::Output) -> Vec<String> {
    stdout(out).lines().map(|l| l.split('\t').nth(1).unwrap().to_owned()).collect()
}

#[test]
fn simulate_bank_transactions() {
    let out = bank(&["--input", "E7:150"]);
    assert_eq!(out.status.code(), Some(0));
    let fired = events(&out);
    assert!(fired.contains(&"E21".to_owned()) && !fired.contains(&"E23".to_owned()), "{fired:?}");
    assert!(!stdout(&out).contains("BankAccount.Balance.SavingsBalance="));

    let out = bank(&["--input", "E8:50"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(events(&out).contains(&"E17".to_owned()));
    assert!(stdout(&out).contains("BankAccount.Balance.SavingsBalance=100→150"));

    let out = bank(&["--input", "E6:30"]);
    assert!(events(&out).contains(&"E22".to_owned()));
    assert!(stdout(&out).contains("BankAccount.Balance.CheckingBalance=100→70"));
}

#[test]
fn simulate_rejects_bad_runs() {
    assert_eq!(bank(&[]).status.code(), Some(1));
    let out = bank(&["--input", "E1:5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("UnexpectedInput"));
    assert_eq!(bank(&["--input", "E8:lots"]).status.code(), Some(2));
    let out = tmkit(&["simulate", path_arg(&fixture("invalid/illegal_flow.tm"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn dot_targets() {
    let beef = fixture("beef.tm");
    let out = tmkit(&["dot", path_arg(&beef)]);
    assert_eq!(out.status.code(), Some(0));
    let g = common::dot::parse_dot(&stdout(&out)).unwrap();
    assert_eq!(g.dashed_edges().len(), 3);
    let out = tmkit(&["dot", path_arg(&beef), "--target", "behavior", "--rankdir", "TB"]);
    let g = common::dot::parse_dot(&stdout(&out)).unwrap();
    assert_eq!(g.nodes.len(), 8);
    assert_eq!(g.edges.len(), 7);
    assert!(stdout(&out).contains("rankdir=TB"));
    assert_eq!(code(&["dot", path_arg(&fixture("invalid/garbage.tm"))]), 2);
}

#[test]
fn commands_are_deterministic() {
    let bank = fixture("bank.tm");
    for args in [
        vec!["fmt", path_arg(&bank)],
        vec!["dot", path_arg(&bank), "--show-stores"],
        vec!["to-class", path_arg(&bank)],
    ] {
        assert_eq!(tmkit(&args).stdout, tmkit(&args).stdout);
    }
    assert_eq!(bank_json_run().stdout, bank_json_run().stdout);
}

fn bank_json_run() -> std::process::Output {
    bank(&["--input", "E7:150", "--trace-format", "json"])
}
