//! Acceptance checks. Prints one PASS or FAIL line per criterion.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use dl_core::arith::{decide, forall_closure, qe, Budget};
use dl_core::kernel::{check_dlp, check_proof, residual, to_dlp, Args, Position, ProofState, Rule, Sequent, Side};
use dl_core::parser::{parse_formula, parse_problem, Problem};
use dl_core::sim::{falsify, replay, Falsified, SimConfig};
use dl_core::syntax::{admissible_substitute, Formula, Program};
use dl_core::tactics::{auto, di_prove, diff_saturate, parse_script, run_script, AutoConfig};

use support::*;

type Check = Result<String, String>;

fn path(name: &str) -> String {
    format!("{}/../../problems/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn problem(name: &str) -> Problem {
    parse_problem(&std::fs::read_to_string(path(name)).unwrap()).unwrap()
}

fn f(s: &str) -> Formula {
    parse_formula(s).unwrap()
}

fn equivalent(a: &Formula, b: &Formula, ctx: &Formula) -> Result<bool, String> {
    let iff = Formula::equiv(a.clone(), b.clone());
    decide(&forall_closure(&Formula::imply(ctx.clone(), iff))).map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn script(name: &str, cfg: &AutoConfig) -> Result<ProofState, String> {
    let ps = ProofState::init(problem(&format!("{name}.dl")).conjecture());
    let steps = parse_script(&std::fs::read_to_string(path(&format!("{name}.dlt"))).unwrap()).map_err(|e| e.to_string())?;
    run_script(&ps, &steps, cfg).map_err(|e| e.to_string())
}

fn closed(ps: &ProofState, what: &str) -> Result<(), String> {
    ensure(ps.is_proved(), format!("{what}: {} open goals", ps.open_goals().len()))?;
    check_proof(ps).map_err(|e| format!("{what}: {e}"))
}

fn braking_cli(proofs: &mut Vec<ProofState>) -> Check {
    let dir = std::env::temp_dir().join(format!("dl-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let out = dir.join("braking.dlp");
    let start = Instant::now();
    let r = dl_cli::run(["dl", "prove", &path("braking.dl"), "--emit-proof", out.to_str().unwrap()]);
    let took = start.elapsed();
    ensure(r.code == dl_cli::PROVED, format!("exit {}: {}{}", r.code, r.stdout, r.stderr))?;
    let c = dl_cli::run(["dl", "check", out.to_str().unwrap()]);
    let _ = std::fs::remove_dir_all(&dir);
    ensure(c.code == dl_cli::PROVED, format!("check: {}", c.stdout))?;
    ensure(took < Duration::from_secs(1), format!("took {took:?}"))?;
    let ps = auto(&ProofState::init(problem("braking.dl").conjecture()), &AutoConfig::default());
    proofs.push(ps);
    Ok(format!("proved and checked in {took:.2?}"))
}

fn braking_residual() -> Check {
    let p = problem("braking_noassume.dl");
    let ps = auto(&ProofState::init(p.conjecture()), &AutoConfig::default());
    ensure(!ps.is_proved(), "proved an invalid conjecture")?;
    let budget = Budget::unlimited();
    let parts = ps
        .open_goals()
        .into_iter()
        .map(|g| residual(ps.goal(g).unwrap(), &budget).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    let res = Formula::conj(parts);
    let ctx = Formula::conj(p.assumptions.clone());
    ensure(equivalent(&res, &f("v^2 <= 2*b*(m-x)"), &ctx)?, format!("residual {res}"))?;
    Ok(format!("residual {res}"))
}

fn quadratic_qe() -> Check {
    let q = qe(&f("\\exists x (a*x^2 + b*x + c = 0)")).map_err(|e| e.to_string())?;
    let expected = f("(a != 0 & b^2 - 4*a*c >= 0) | (a = 0 & b != 0) | (a = 0 & b = 0 & c = 0)");
    ensure(equivalent(&q, &expected, &Formula::True)?, format!("got {q}"))?;
    Ok(q.to_string())
}

fn imp_r(ps: &ProofState, g: usize) -> Result<ProofState, String> {
    ps.apply(g, Rule::new("impR", Args::default()), &Budget::unlimited()).map_err(|e| e.to_string())
}

fn invariants(proofs: &mut Vec<ProofState>) -> Check {
    let cfg = AutoConfig::default();
    for name in ["rotational.dl", "quartic.dl"] {
        let ps = imp_r(&ProofState::init(problem(name).conjecture()), 0)?;
        let ps = di_prove(&ps, 1, None, &cfg).map_err(|e| format!("{name}: {e}"))?;
        closed(&ps, name)?;
        proofs.push(ps);
    }
    let ps = imp_r(&ProofState::init(problem("cut.dl").conjecture()), 0)?;
    let ps = diff_saturate(&ps, 1, &[f("y^5 >= 0")], &cfg).map_err(|e| format!("cut: {e}"))?;
    closed(&ps, "cut")?;
    proofs.push(ps);
    Ok("rotational, quartic, cut".into())
}

fn progress(proofs: &mut Vec<ProofState>) -> Check {
    let ps = ProofState::init(problem("progress.dl").conjecture());
    let pos = Position { side: Side::Succ, index: 0, path: vec![] };
    let ps = ps.apply(0, Rule::new("DV", Args::at(pos)), &Budget::unlimited()).map_err(|e| e.to_string())?;
    let goals = ps.open_goals();
    ensure(goals.len() == 1, format!("{} premises", goals.len()))?;
    let res = residual(ps.goal(goals[0]).unwrap(), &Budget::unlimited()).map_err(|e| e.to_string())?;
    let res = qe(&res).map_err(|e| e.to_string())?;
    ensure(equivalent(&res, &f("a > 0"), &Formula::True)?, format!("residual {res}"))?;
    proofs.push(ps);
    Ok(format!("residual {res}"))
}

fn nonzero() -> Check {
    let conj = problem("nonzero.dl").conjecture();
    let cfg = AutoConfig { deadline: Some(Instant::now() + Duration::from_secs(20)), ..AutoConfig::default() };
    ensure(!auto(&ProofState::init(conj.clone()), &cfg).is_proved(), "auto proved it")?;
    let ps = imp_r(&ProofState::init(conj.clone()), 0)?;
    ensure(di_prove(&ps, 1, None, &cfg).is_err(), "di_prove proved it")?;
    ensure(di_prove(&ps, 1, Some(&f("x != 0")), &cfg).is_err(), "di_prove with cut proved it")?;
    let sim = SimConfig::default();
    let Falsified::Counterexample(cex) = falsify(&conj, &sim) else {
        return Err("no counterexample".into());
    };
    ensure(cex.margin > 1e-3, format!("margin {}", cex.margin))?;
    let again = replay(&conj, &cex, &sim).ok_or("replay lost the violation")?;
    Ok(format!("x = {} margin {:.4}, replay margin {:.4}", cex.initial.values().next().unwrap(), cex.margin, again))
}

fn car_loop(proofs: &mut Vec<ProofState>) -> Check {
    let start = Instant::now();
    let ps = script("car_loop", &AutoConfig::default())?;
    let took = start.elapsed();
    closed(&ps, "car_loop")?;
    ensure(took < Duration::from_secs(30), format!("took {took:?}"))?;
    proofs.push(ps);
    Ok(format!("{took:.2?}"))
}

fn run_cases<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, max_global_rejects: 100_000, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn axioms() -> Check {
    const N: u32 = 1000;
    run_cases(N, (small_var(), small_term(), post(), exact_state()), |(x, t, g, s)| {
        prop_assume!(admissible_substitute(&g, &x, &t).is_ok());
        axiom_case("[:=]", Formula::boxed(Program::assign(x, t), g), &s)
    })
    .map_err(|e| format!("[:=] {e}"))?;
    run_cases(N, (small_fo(), post(), exact_state()), |(c, g, s)| axiom_case("[?]", Formula::boxed(Program::test(c), g), &s))
        .map_err(|e| format!("[?] {e}"))?;
    run_cases(N, (discrete(), discrete(), post(), exact_state()), |(a, b, g, s)| {
        axiom_case("[++]", Formula::boxed(Program::choice(a, b), g), &s)
    })
    .map_err(|e| format!("[++] {e}"))?;
    run_cases(N, (discrete(), discrete(), post(), exact_state()), |(a, b, g, s)| {
        axiom_case("[;]", Formula::boxed(Program::seq(a, b), g), &s)
    })
    .map_err(|e| format!("[;] {e}"))?;
    run_cases(N, (discrete(), post(), exact_state()), |(a, g, s)| axiom_case("<>", Formula::diamond(a, g), &s))
        .map_err(|e| format!("<> {e}"))?;
    run_cases(N, (straight_line(), small_fo(), exact_state(), 0usize..3), |(a, g, s, k)| unwind_case(a, g, &s, k))
        .map_err(|e| format!("[*] {e}"))?;
    Ok(format!("{N} cases each for [:=] [?] [++] [;] <> [*]"))
}

fn derivations() -> Check {
    const N: u32 = 200;
    run_cases(N, system(), derivation_case)?;
    Ok(format!("{N} flows"))
}

fn mutations(proofs: &[ProofState]) -> Check {
    let bogus = Sequent::new(vec![], vec![Formula::False]);
    let mut tried = 0;
    for (k, ps) in proofs.iter().enumerate() {
        check_proof(ps).map_err(|e| format!("proof {k}: {e}"))?;
        let text = to_dlp(ps);
        check_dlp(&text).map_err(|e| format!("proof {k} file: {e}"))?;
        for i in 0..ps.nodes.len() {
            let mut m = ps.clone();
            m.nodes[i].sequent = bogus.clone();
            ensure(check_proof(&m).is_err(), format!("proof {k}: mutated node {i} accepted"))?;
            tried += 1;
            if !ps.nodes[i].children.is_empty() {
                let mut m = ps.clone();
                m.nodes[i].children.pop();
                ensure(check_proof(&m).is_err(), format!("proof {k}: dropped child of {i} accepted"))?;
                tried += 1;
            }
        }
    }
    Ok(format!("{} proofs, {tried} mutations rejected", proofs.len()))
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut proofs = Vec::new();
    let mut results: Vec<(&str, Check)> = vec![
        ("P1", braking_cli(&mut proofs)),
        ("P2", braking_residual()),
        ("P3", quadratic_qe()),
        ("P4", invariants(&mut proofs)),
        ("P5", progress(&mut proofs)),
        ("P6", nonzero()),
        ("P7", car_loop(&mut proofs)),
        ("P8", axioms()),
        ("P9", derivations()),
    ];
    let done: Vec<ProofState> = proofs.into_iter().filter(|p| p.is_proved()).collect();
    results.push(("P10", mutations(&done)));
    let mut failed = 0;
    for (id, r) in &results {
        match r {
            Ok(msg) => println!("{id} PASS {msg}"),
            Err(msg) => {
                failed += 1;
                println!("{id} FAIL {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
