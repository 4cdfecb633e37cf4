use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use pedal_core::mbt::{Mutation, SutServer};

fn fixture(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel).display().to_string()
}

fn pedal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pedal")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const MODEL: &str = "fixtures/pedal.ped";
const MUTANT: &str = "fixtures/pedal_unconditional.ped";

#[test]
fn validate_reports_counts() {
    let o = pedal(&["validate", &fixture(MODEL)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "OK 4 actions, 4 rules\n");
}

#[test]
fn validate_rejects_bad_model() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ped");
    std::fs::write(&bad, "InActions: A, B\nBoolVars:\nPlaneVars:\nRule A\n  Guard: true\n  Do:\nEnd\n").unwrap();
    let o = pedal(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn lts_matches_golden_files() {
    let r = pedal(&["lts", &fixture(MODEL)]);
    assert_eq!(r.status.code(), Some(0));
    assert_eq!(stdout(&r), include_str!("golden/fixture_reference.aut"));
    let t = pedal(&["lts", &fixture(MODEL), "--mode", "tau"]);
    assert_eq!(stdout(&t), include_str!("golden/fixture_tau.aut"));
}

#[test]
fn lts_to_file_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.aut");
    let o = pedal(&["lts", &fixture(MODEL), "--mode", "compiled", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "12 states, 18 transitions\n");
    assert!(std::fs::read_to_string(out).unwrap().starts_with("des (0,18,12)"));
}

#[test]
fn equiv_exit_codes() {
    let r = fixture("tests/golden/fixture_reference.aut");
    let t = fixture("tests/golden/fixture_tau.aut");
    let strong = pedal(&["equiv", &r, &t, "--kind", "strong"]);
    assert_eq!(strong.status.code(), Some(1));
    let text = stdout(&strong);
    assert!(text.starts_with("NOT EQUIVALENT\ntrace:"), "{text}");
    assert!(text.contains("distinguishing:"));
    let branching = pedal(&["equiv", &r, &t, "--kind", "branching"]);
    assert_eq!(branching.status.code(), Some(0));
    assert_eq!(stdout(&branching), "EQUIVALENT\n");
}

#[test]
fn check_fixture_and_mutant() {
    for prop in ["deadlock_free", "no_xray_without_request", "start_condition_blocks"] {
        let o = pedal(&["check", &fixture(MODEL), &fixture(&format!("fixtures/props/{prop}.mcf"))]);
        assert_eq!(stdout(&o), "HOLDS\n", "{prop}");
        assert_eq!(o.status.code(), Some(0));
    }
    let o = pedal(&["check", &fixture(MUTANT), &fixture("fixtures/props/start_condition_blocks.mcf")]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(
        stdout(&o),
        "FAILS\nwitness: StartCond output(Standby,None) FRFluoOn output(Fluo,FR)\n"
    );
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(pedal(&["lts"]).status.code(), Some(2));
    assert_eq!(pedal(&["lts", "/nonexistent.ped"]).status.code(), Some(2));
    assert_eq!(pedal(&["lts", &fixture(MODEL), "--mode", "bogus"]).status.code(), Some(2));
    assert_eq!(pedal(&["sut", &fixture(MODEL), "--mutate", "flip"]).status.code(), Some(2));
}

#[test]
fn sut_over_stdio() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_pedal"))
        .args(["sut", &fixture(MODEL)])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"RESET\nSTIM FRFluoOn\nSTIM FRFluoOff\n")
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(stdout(&o), "OK\nRESP Output Fluo FR\nRESP Output Standby None\n");
}

#[test]
fn simulate_session() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_pedal"))
        .args(["simulate", &fixture(MODEL)])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"FRFluoOn\nNope\nquit\n").unwrap();
    let o = child.wait_with_output().unwrap();
    let text = stdout(&o);
    assert!(text.contains("FRFluoOn -> output(Fluo,FR)"), "{text}");
    assert!(text.contains("error:"), "{text}");
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn mbt_against_tcp_sut() {
    let model = pedal_core::dsl::fixture();
    let clean = SutServer::start(&model, &Mutation::None, "127.0.0.1:0").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("wire.txt");
    let o = pedal(&[
        "mbt",
        &fixture(MODEL),
        "--connect",
        &clean.addr().to_string(),
        "--seed",
        "3",
        "--steps",
        "50",
        "--transcript",
        log.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "PASS 50 steps\n");
    let wire = std::fs::read_to_string(&log).unwrap();
    assert_eq!(wire.lines().count(), 2 + 2 * 50);
    clean.shutdown();

    let mutant = SutServer::start(&model, &Mutation::NegateGuard("StartCond".into()), "127.0.0.1:0").unwrap();
    let o = pedal(&["mbt", &fixture(MODEL), "--connect", &mutant.addr().to_string(), "--steps", "200"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL expected"), "{}", stdout(&o));
}

#[test]
fn mbt_refused_connection_is_usage_error() {
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap();
    let o = pedal(&["mbt", &fixture(MODEL), "--connect", &port.to_string()]);
    assert_eq!(o.status.code(), Some(2));
}
