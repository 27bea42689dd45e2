use std::time::Instant;

use dl_core::kernel::{check_proof, ProofState};
use dl_core::parser::parse_problem;
use dl_core::tactics::{auto, parse_script, run_script, AutoConfig};

fn load(name: &str) -> ProofState {
    let path = format!("{}/../../problems/{name}", env!("CARGO_MANIFEST_DIR"));
    let src = std::fs::read_to_string(path).unwrap();
    ProofState::init(parse_problem(&src).unwrap().conjecture())
}

fn script(name: &str) -> ProofState {
    let ps = load(&format!("{name}.dl"));
    let path = format!("{}/../../problems/{name}.dlt", env!("CARGO_MANIFEST_DIR"));
    let steps = parse_script(&std::fs::read_to_string(path).unwrap()).unwrap();
    let start = Instant::now();
    let out = run_script(&ps, &steps, &AutoConfig::default()).unwrap();
    eprintln!("{name}: {:?}", start.elapsed());
    out
}

#[test]
fn braking_closes_automatically() {
    let start = Instant::now();
    let ps = auto(&load("braking.dl"), &AutoConfig::default());
    eprintln!("braking: {:?}", start.elapsed());
    for g in ps.open_goals() {
        eprintln!("open {}", ps.goal(g).unwrap());
    }
    assert!(ps.is_proved());
    check_proof(&ps).unwrap();
}

#[test]
fn velocity_stays_nonnegative() {
    let ps = auto(&load("velocity.dl"), &AutoConfig::default());
    assert!(ps.is_proved());
}

#[test]
fn braking_without_assumption_stays_open() {
    let ps = auto(&load("braking_noassume.dl"), &AutoConfig::default());
    assert!(!ps.is_proved());
}

#[test]
fn differential_invariants() {
    for name in ["rotational", "quartic", "cut"] {
        let ps = script(name);
        assert!(ps.is_proved(), "{name}");
        check_proof(&ps).unwrap();
    }
}

#[test]
fn car_loop() {
    let ps = script("car_loop");
    for g in ps.open_goals() {
        eprintln!("open {}", ps.goal(g).unwrap());
    }
    assert!(ps.is_proved());
    check_proof(&ps).unwrap();
}

#[test]
fn deadline_bounds_hard_loop() {
    let ps = load("car_loop_printed.dl");
    let path = format!("{}/../../problems/car_loop_printed.dlt", env!("CARGO_MANIFEST_DIR"));
    let steps = parse_script(&std::fs::read_to_string(path).unwrap()).unwrap();
    let cfg = AutoConfig {
        deadline: Some(Instant::now() + std::time::Duration::from_secs(5)),
        ..AutoConfig::default()
    };
    let start = Instant::now();
    let out = run_script(&ps, &steps, &cfg).unwrap();
    eprintln!("printed guard: {:?}, proved {}", start.elapsed(), out.is_proved());
    assert!(start.elapsed().as_secs() < 60);
    if out.is_proved() {
        check_proof(&out).unwrap();
    }
}
