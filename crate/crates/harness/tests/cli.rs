use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qsnap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsnap")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&qsnap(&["cohort", "--bogus"])), 1);
    assert_eq!(code(&qsnap(&[])), 1);
    assert_eq!(code(&qsnap(&["cohort", "--method", "annealing"])), 1);
    assert_eq!(code(&qsnap(&["cohort", "--noise", "loud"])), 1);
    assert_eq!(code(&qsnap(&["cohort", "--shots", "many"])), 1);
    assert_eq!(code(&qsnap(&["cohort", "--trials", "0"])), 1);
    assert_eq!(code(&qsnap(&["cohort", "--threshold", "1.5"])), 1);
    assert_eq!(code(&qsnap(&["snapshot", "--qubits", "2", "--cut", "5"])), 1);
    assert_eq!(code(&qsnap(&["--help"])), 0);
}

#[test]
fn runtime_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&qsnap(&["withdraw", "abc", "--store", p(dir.path())])), 2);
    assert_eq!(code(&qsnap(&["entropy", p(&dir.path().join("missing"))])), 2);
}

#[test]
fn gate_miss_exits_three() {
    let out = qsnap(&["cohort", "--qubits", "3", "--trials", "2", "--max-iter", "1", "--gate", "1.0"]);
    assert_eq!(code(&out), 3);
    let out = qsnap(&["cohort", "--qubits", "1", "--trials", "2", "--gate", "0.5"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn cohort_then_entropy() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsnap(&["cohort", "--qubits", "2", "--trials", "3", "--seed", "7", "--out", p(dir.path()), "--threshold", "0.999"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("0.999,"));
    assert_eq!(fs::read_to_string(dir.path().join("trials.csv")).unwrap().lines().count(), 4);
    assert_eq!(code(&qsnap(&["entropy", p(dir.path())])), 0);
    assert!(dir.path().join("entropy.csv").exists());
    assert!(dir.path().join("entropy_hist.csv").exists());
}

#[test]
fn noise_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("noise.txt");
    fs::write(&cfg, "# quieter device\ndepol_1q = 0.001\nbit_flip_p = 0\n").unwrap();
    let noise = format!("file:{}", p(&cfg));
    let out = qsnap(&["cohort", "--trials", "1", "--noise", &noise, "--trajectories", "50", "--max-iter", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    fs::write(&cfg, "unknown_key = 1\n").unwrap();
    assert_eq!(code(&qsnap(&["cohort", "--trials", "1", "--noise", &noise])), 1);
}

#[test]
fn store_subcommands_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    let amps = dir.path().join("a.json");
    fs::write(&amps, "[0.6, 0.0, 0.0, 0.8]").unwrap();
    let out = qsnap(&["deposit", "--store", p(&store), "--amplitudes", p(&amps), "--label", "demo"]);
    assert_eq!(code(&out), 0);
    let id = stdout(&out).trim().to_owned();
    assert_eq!(id.len(), 64);
    assert_eq!(stdout(&qsnap(&["list", "--store", p(&store)])).trim(), id);
    let out = qsnap(&["withdraw", &id, "--store", p(&store)]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("# amplitudes [0.6,0.0,0.0,0.8]"));
    assert!(text.lines().skip(1).all(|l| l.starts_with("RY") || l.starts_with("RZ") || l.starts_with("CX")));

    let out = qsnap(&["snapshot", "--qubits", "2", "--cut", "1", "--store", p(&store)]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&qsnap(&["list", "--store", p(&store)])).lines().count(), 2);
}

#[test]
fn standard_subcommand_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsnap(&["standard", "--qubits", "1", "--out", p(dir.path())]);
    assert_eq!(code(&out), 0);
    let table = fs::read_to_string(dir.path().join("standard.csv")).unwrap();
    assert_eq!(table.lines().next().unwrap(), "state,family,n_qubits,epochs,fidelity,error");
    assert_eq!(table.lines().count(), 5);
    assert_eq!(code(&qsnap(&["standard", "--qubits", "4"])), 1);
}
