use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use pbr_monty::rational::ratio;
use pbr_monty::OutputEnvelope;
use serde_json::{json, Value};

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str]) -> Output {
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let argv = std::iter::once("pbr-monty").chain(args.iter().copied());
    let code = pbr_monty_cli::run(argv, &mut stdout, &mut stderr);
    Output { code, stdout: String::from_utf8(stdout).unwrap(), stderr: String::from_utf8(stderr).unwrap() }
}

fn envelope(args: &[&str]) -> OutputEnvelope {
    let out = cli(args);
    assert_eq!(out.code, 0, "{args:?}: {}", out.stderr);
    let env: OutputEnvelope = serde_json::from_str(&out.stdout).unwrap();
    assert!(env.inconsistent_keys().is_empty(), "{args:?}");
    env
}

fn exact(env: &OutputEnvelope, key: &str) -> pbr_monty::Rational {
    env.exact_value(key).unwrap_or_else(|| panic!("missing {key}")).clone()
}

#[test]
fn analyze_psi_ontic_json() {
    let out = cli(&["analyze", "psi-ontic", "--json"]);
    assert_eq!(out.code, 0);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["exact_results"]["win_stick_given_goat"], json!({"num": 3, "den": 11}));
    assert_eq!(v["exact_results"]["win_switch_given_goat"], json!({"num": 4, "den": 11}));
    assert_eq!(v["exact_results"]["p_opens_prize"], json!({"num": 1, "den": 12}));

    let env: OutputEnvelope = serde_json::from_value(v).unwrap();
    let again: OutputEnvelope = serde_json::from_str(&env.to_json_pretty()).unwrap();
    assert_eq!(again, env);
}

#[test]
fn every_game_reports_the_stable_keys() {
    let keys = [
        "p_opens_goat",
        "p_opens_prize",
        "win_stick",
        "win_stick_and_goat",
        "win_stick_given_goat",
        "win_switch",
        "win_switch_and_goat",
        "win_switch_given_goat",
    ];
    for game in ["classic", "ignorant", "psi-ontic", "psi-epistemic", "monty-teleport"] {
        let env = envelope(&["analyze", game]);
        assert_eq!(env.exact_results.keys().map(String::as_str).collect::<Vec<_>>(), keys, "{game}");
        assert_eq!(env.parameters["game"], game);
    }
    assert_eq!(exact(&envelope(&["analyze", "classic"]), "win_switch"), ratio(2, 3));
    assert_eq!(exact(&envelope(&["analyze", "ignorant"]), "p_opens_prize"), ratio(1, 3));
}

#[test]
fn epistemic_tie_and_parameter_forms() {
    let env = envelope(&["analyze", "psi-epistemic", "--q1", "1/12", "--q2", "1/12", "--q3", "1/12"]);
    assert_eq!(exact(&env, "win_stick_given_goat"), exact(&env, "win_switch_given_goat"));
    let by_total = envelope(&["analyze", "psi-epistemic", "--q", "0.25"]);
    assert_eq!(by_total.exact_results, env.exact_results);

    let env = envelope(&["analyze", "psi-epistemic", "--q3", "1/2"]);
    assert_eq!(exact(&env, "win_stick_given_goat"), ratio(3, 7));
    assert_eq!(env.parameters["q1"], "0/1");

    let env = envelope(&["analyze", "psi-ontic", "--state", "3"]);
    assert_eq!(env.parameters["state"], 3);
    assert_eq!(exact(&env, "win_switch_given_goat"), ratio(4, 11));
}

#[test]
fn validation_failures_exit_one() {
    let out = cli(&["analyze", "psi-epistemic", "--q1", "1/2", "--q2", "0", "--q3", "0"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.is_empty());
    assert!(out.stderr.contains("q1 = 1/2 is outside [0, 1/4]"), "{}", out.stderr);

    let out = cli(&["analyze", "classic", "--q", "1/4"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("takes no q parameters"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["analyze", "deal-or-no-deal"][..],
        &["analyze", "psi-epistemic", "--q1", "0.1"],
        &["analyze", "psi-epistemic", "--q1", "one"],
        &["analyze", "psi-epistemic", "--q", "1/4", "--q1", "1/12"],
        &["analyze", "psi-ontic", "--state", "5"],
        &["analyze", "psi-ontic", "--json", "--table"],
        &["simulate", "classic", "--strategy", "dither"],
        &["simulate", "classic", "--strategy", "stick", "--trials", "0"],
        &["teleport", "analyze", "--mode", "standard"],
        &["teleport", "simulate", "--mode", "lossy"],
        &["sweep", "--split", "1,2"],
        &["frobnicate"],
        &[],
    ] {
        let out = cli(args);
        assert_eq!(out.code, 2, "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
    let out = cli(&["analyze", "psi-epistemic", "--q1", "0.1"]);
    assert!(out.stderr.contains("1/10"), "suggests the fraction form: {}", out.stderr);

    let help = cli(&["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("born-matrix"));
}

#[test]
fn simulate_is_seeded_and_schedule_independent() {
    let args = ["simulate", "psi-ontic", "--strategy", "switch", "--trials", "50000", "--seed", "9"];
    let a = envelope(&args);
    let b = envelope(&[&args[..], &["--sequential"]].concat());
    assert_eq!(a, b);
    assert_eq!(a.metadata.seed, Some(9));
    assert_eq!(a.metadata.trials, Some(50_000));
    assert_eq!(exact(&a, "expected_win_given_goat"), ratio(4, 11));
    let gap = (a.float_results["empirical_win_given_goat"] - 4.0 / 11.0).abs();
    assert!(gap <= a.float_results["three_sigma"]);

    let unseeded = envelope(&["simulate", "classic", "--strategy", "stick", "--trials", "10"]);
    assert!(unseeded.metadata.seed.is_some());
}

#[test]
fn sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = cli(&["sweep", "--q-from", "0", "--q-to", "1/2", "--steps", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.is_empty());

    let mut reader = csv::Reader::from_path(&path).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["q", "stick", "switch", "advantage"]);
    let rows: Vec<Vec<String>> =
        reader.records().map(|r| r.unwrap().iter().map(str::to_string).collect()).collect();
    let qs: Vec<&str> = rows.iter().map(|r| r[0].split(' ').next().unwrap()).collect();
    assert_eq!(qs, ["0/1", "1/8", "1/4", "3/8", "1/2"]);
    assert_eq!(rows[0][1..], ["3/11 (0.2727272727272727)", "4/11 (0.36363636363636365)", "1/11 (0.09090909090909091)"]);
    assert!(rows[2][3].starts_with("0/1 "));
    assert!(rows[4][3].starts_with("-1/7 "));

    let again = dir.path().join("again.csv");
    cli(&["sweep", "--q-from", "0", "--q-to", "1/2", "--steps", "4", "--out", again.to_str().unwrap()]);
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn sweep_split_invariance_and_bad_rows() {
    let equal = cli(&["sweep", "--q-to", "1/4", "--steps", "5"]);
    let skewed = cli(&["sweep", "--q-to", "1/4", "--steps", "5", "--split", "(0,1,3)"]);
    assert_eq!(equal.code, 0);
    assert_eq!(equal.stdout, skewed.stdout);

    let out = cli(&["sweep", "--q-to", "1", "--steps", "4"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.lines().last().unwrap().ends_with(",,,"));
    assert_eq!(out.stdout.lines().count(), 6);
    assert!(out.stderr.contains("q = 1/1"), "{}", out.stderr);

    let json_out = cli(&["sweep", "--steps", "2", "--json"]);
    let v: Value = serde_json::from_str(&json_out.stdout).unwrap();
    assert_eq!(v["details"][2]["advantage"], json!({"num": -1, "den": 7}));
}

#[test]
fn born_matrix_output() {
    let env = envelope(&["born-matrix"]);
    let row1: Vec<_> = (1..=4).map(|i| exact(&env, &format!("p_state1_outcome{i}"))).collect();
    assert_eq!(row1, [ratio(0, 1), ratio(1, 4), ratio(1, 4), ratio(1, 2)]);
    for h in 1..=4 {
        assert_eq!(exact(&env, &format!("p_state{h}_outcome{h}")), ratio(0, 1));
    }
    let details = env.details.unwrap();
    assert_eq!(details["antidistinguishable"], true);
    assert_eq!(details["violations"], json!([]));

    let table = cli(&["born-matrix", "--table"]);
    assert!(table.stdout.contains("Ψ1      0   1/4   1/4   1/2"), "{}", table.stdout);
}

#[test]
fn teleport_commands() {
    let monty = envelope(&["teleport", "analyze", "--mode", "monty"]);
    assert_eq!(exact(&monty, "win_stick"), ratio(2, 8));
    assert_eq!(exact(&monty, "win_switch"), ratio(3, 8));

    let lossy = envelope(&["teleport", "analyze", "--mode", "unreliable", "--json"]);
    assert_eq!(exact(&lossy, "p_received_bit0"), ratio(1, 2));
    assert_eq!(exact(&lossy, "win_stick_given_bit0"), ratio(1, 2));
    assert_eq!(exact(&lossy, "win_switch_given_bit0"), ratio(1, 4));
    assert_eq!(exact(&lossy, "win_stick_given_bit1"), ratio(0, 1));
    assert_eq!(exact(&lossy, "win_switch_given_bit1"), ratio(1, 3));

    let std_run = envelope(&["teleport", "simulate", "--mode", "standard", "--trials", "1000", "--seed", "1"]);
    assert_eq!(std_run.float_results["win_rate"], 1.0);
    assert!(std_run.float_results["mean_fidelity"] >= 1.0 - 1e-10);

    let sw = envelope(&["teleport", "simulate", "--mode", "monty", "--strategy", "switch", "--trials", "200000", "--seed", "2"]);
    assert_eq!(exact(&sw, "expected_win"), ratio(3, 8));
    assert!((sw.float_results["win_rate"] - 0.375).abs() <= sw.float_results["three_sigma"]);

    let bit = envelope(&["teleport", "simulate", "--mode", "unreliable", "--trials", "200000", "--seed", "3"]);
    assert_eq!(exact(&bit, "expected_win_given_bit0"), ratio(1, 2));
    assert!((bit.float_results["win_rate_given_bit0"] - 0.5).abs() <= bit.float_results["three_sigma_given_bit0"]);

    let other_bell = envelope(&["teleport", "analyze", "--mode", "monty", "--bell", "11"]);
    assert_eq!(exact(&other_bell, "win_switch"), ratio(3, 8));
}

#[test]
fn table_rendering() {
    let out = cli(&["analyze", "psi-ontic", "--table"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("win_stick_given_goat"));
    assert!(out.stdout.contains("3/11"));
    assert!(out.stdout.contains("0.2727272727"));
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

fn get(port: u16, path: &str) -> std::io::Result<String> {
    let mut stream = TcpStream::connect(("127.0.0.1", port))?;
    write!(stream, "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n")?;
    let mut body = String::new();
    stream.read_to_string(&mut body)?;
    Ok(body)
}

#[test]
fn serve_uses_port_from_environment() {
    let port = free_port();
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<title>monty</title>").unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_pbr-monty"))
        .args(["serve", "--static-dir", dir.path().to_str().unwrap()])
        .env("PBR_MONTY_PORT", port.to_string())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let deadline = Instant::now() + Duration::from_secs(20);
    let games = loop {
        match get(port, "/games") {
            Ok(body) => break body,
            Err(_) if Instant::now() < deadline => std::thread::sleep(Duration::from_millis(50)),
            Err(e) => {
                child.kill().unwrap();
                panic!("server did not come up: {e}");
            }
        }
    };
    let index = get(port, "/");
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(games.starts_with("HTTP/1.1 200"), "{games}");
    assert!(games.contains("psi-epistemic"));
    assert!(index.unwrap().contains("<title>monty</title>"));
}

#[test]
fn serve_rejects_missing_static_dir() {
    let out = cli(&["serve", "--port", "1", "--static-dir", "/nonexistent/ui"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("index.html"));
}
