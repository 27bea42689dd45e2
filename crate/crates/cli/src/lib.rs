//! The `dl` command line tool.
//!
//! Exit codes: 0 proved, checked, eliminated or no counterexample found;
//! 1 refuted or check failed; 2 inconclusive; 3 usage errors; 4 input
//! and internal errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use dl_core::arith::qe;
use dl_core::kernel::{check_dlp, residual, to_dlp, ProofState};
use dl_core::parser::{parse_formula, parse_problem, pretty_program, Problem};
use dl_core::sim::{falsify, run as simulate, sample_state, Falsified, SimConfig};
use dl_core::syntax::{compile_automaton, free_vars, Formula, Var};
use dl_core::tactics::{auto, parse_script, run_script, AutoConfig};

pub const PROVED: u8 = 0;
pub const REFUTED: u8 = 1;
pub const INCONCLUSIVE: u8 = 2;
pub const USAGE: u8 = 3;
pub const FAILURE: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "dl", version, about = "Differential dynamic logic prover and simulator")]
struct Cli {
    /// Print line-delimited JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Maximum number of worker threads. Every command currently runs on one.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: u32,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Prove the conjecture of a problem file.
    Prove {
        file: PathBuf,
        /// Tactic script to run instead of the automatic prover.
        #[arg(long)]
        tactic: Option<PathBuf>,
        /// Write the proof to this file.
        #[arg(long)]
        emit_proof: Option<PathBuf>,
        /// Time limit in seconds for arithmetic.
        #[arg(long)]
        timeout: Option<f64>,
    },
    /// Check a proof file.
    Check { proof: PathBuf },
    /// Simulate the program of a problem file from a random initial state
    /// satisfying its assumptions.
    Sim {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Integration step size.
        #[arg(long, default_value_t = 0.01)]
        steps: f64,
        /// Write the first trace as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a counterexample to the conjecture.
    Falsify {
        file: PathBuf,
        /// Number of sampled initial states.
        #[arg(long, default_value_t = 500)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Eliminate quantifiers from a first-order formula.
    Qe { formula: String },
    /// Print the hybrid program of a problem's automaton.
    CompileAutomaton { file: PathBuf },
}

/// Everything a command prints, and its exit code.
#[derive(Debug, Default)]
pub struct Output {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

struct Report {
    json: bool,
    out: Output,
}

impl Report {
    fn line(&mut self, text: impl AsRef<str>, value: Value) {
        if self.json {
            self.out.stdout.push_str(&value.to_string());
        } else {
            self.out.stdout.push_str(text.as_ref());
        }
        self.out.stdout.push('\n');
    }

    fn fail(mut self, code: u8, msg: impl AsRef<str>) -> Output {
        let msg = msg.as_ref();
        if self.json {
            self.out.stdout.push_str(&json!({"event": "error", "message": msg}).to_string());
            self.out.stdout.push('\n');
        } else {
            self.out.stderr.push_str(&format!("error: {msg}\n"));
        }
        self.out.code = code;
        self.out
    }

    fn done(mut self, code: u8) -> Output {
        self.out.code = code;
        self.out
    }
}

pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { PROVED };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Output { code, stdout: String::new(), stderr: text }
            } else {
                Output { code, stdout: text, stderr: String::new() }
            };
        }
    };
    let r = Report { json: cli.json, out: Output::default() };
    match cli.command {
        Cmd::Prove { file, tactic, emit_proof, timeout } => prove(r, &file, tactic.as_deref(), emit_proof.as_deref(), timeout),
        Cmd::Check { proof } => check(r, &proof),
        Cmd::Sim { file, seed, steps, out } => sim(r, &file, seed, steps, out.as_deref()),
        Cmd::Falsify { file, budget, seed } => refute(r, &file, budget, seed),
        Cmd::Qe { formula } => eliminate(r, &formula),
        Cmd::CompileAutomaton { file } => automaton(r, &file),
    }
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> Result<Problem, String> {
    parse_problem(&read(path)?).map_err(|e| format!("{}:{e}", path.display()))
}

fn state_json(s: &std::collections::BTreeMap<Var, f64>) -> Value {
    Value::Object(s.iter().map(|(k, v)| (k.to_string(), json!(v))).collect())
}

fn state_text(s: &std::collections::BTreeMap<Var, f64>) -> String {
    s.iter().map(|(k, v)| format!("{k} = {v}")).collect::<Vec<_>>().join(", ")
}

fn prove(mut r: Report, file: &Path, tactic: Option<&Path>, emit: Option<&Path>, timeout: Option<f64>) -> Output {
    let problem = match load(file) {
        Ok(p) => p,
        Err(e) => return r.fail(FAILURE, e),
    };
    let cfg = AutoConfig { deadline: timeout.map(|s| Instant::now() + Duration::from_secs_f64(s)), ..AutoConfig::default() };
    let init = ProofState::init(problem.conjecture());
    let (ps, note) = match tactic {
        None => (auto(&init, &cfg), None),
        Some(path) => {
            let steps = match read(path).and_then(|t| parse_script(&t).map_err(|e| format!("{}:{e}", path.display()))) {
                Ok(s) => s,
                Err(e) => return r.fail(FAILURE, e),
            };
            match run_script(&init, &steps, &cfg) {
                Ok(ps) => (ps, None),
                Err(e) => (init.clone(), Some(e.to_string())),
            }
        }
    };
    if let Some(n) = &note {
        r.line(format!("tactic failed: {n}"), json!({"event": "tactic-failed", "message": n}));
    }
    if ps.is_proved() {
        if let Some(path) = emit {
            if let Err(e) = std::fs::write(path, to_dlp(&ps)) {
                return r.fail(FAILURE, format!("{}: {e}", path.display()));
            }
        }
        r.line(format!("proved ({} steps)", ps.nodes.len()), json!({"event": "proved", "steps": ps.nodes.len()}));
        return r.done(PROVED);
    }
    let cex = match falsify(&problem.conjecture(), &SimConfig::default()) {
        Falsified::Counterexample(c) => Some(c),
        Falsified::Unknown { .. } => None,
    };
    if let Some(c) = cex {
        r.line(
            format!("refuted: {} violated by {} (margin {:.6})", c.violated, state_text(&c.initial), c.margin),
            json!({"event": "refuted", "violated": c.violated, "initial": state_json(&c.initial), "margin": c.margin}),
        );
        return r.done(REFUTED);
    }
    let budget = cfg.budget();
    for g in ps.open_goals() {
        let s = ps.goal(g).expect("open goal");
        let res = residual(s, &budget).map(|f| f.to_string()).unwrap_or_else(|e| e.to_string());
        r.line(
            format!("open goal {g}: {s}\n  residual: {res}"),
            json!({"event": "open", "goal": g, "sequent": s.to_string(), "residual": res}),
        );
    }
    r.done(INCONCLUSIVE)
}

fn check(mut r: Report, path: &Path) -> Output {
    let text = match read(path) {
        Ok(t) => t,
        Err(e) => return r.fail(FAILURE, e),
    };
    match check_dlp(&text) {
        Ok(f) => {
            r.line(format!("checked: {f}"), json!({"event": "checked", "conjecture": f.to_string()}));
            r.done(PROVED)
        }
        Err(e) => {
            r.line(format!("rejected: {e}"), json!({"event": "rejected", "reason": e.to_string()}));
            r.done(REFUTED)
        }
    }
}

fn sim(mut r: Report, file: &Path, seed: u64, h: f64, out: Option<&Path>) -> Output {
    let problem = match load(file) {
        Ok(p) => p,
        Err(e) => return r.fail(FAILURE, e),
    };
    if !(h > 0.0) {
        return r.fail(USAGE, "step size must be positive");
    }
    let Some(program) = problem.program() else {
        return r.fail(FAILURE, "the problem has no hybrid program to simulate");
    };
    let mut vars: Vec<Var> = problem.declarations.iter().map(|(v, _)| v.clone()).collect();
    if vars.is_empty() {
        vars = free_vars(&problem.conjecture()).into_iter().collect();
    }
    let Some(initial) = sample_state(&vars, &problem.assumptions, seed, 100_000) else {
        return r.fail(INCONCLUSIVE, "no initial state satisfying the assumptions was found");
    };
    let cfg = SimConfig { seed, h, ..SimConfig::default() };
    let runs = simulate(&program, &initial, &cfg);
    r.line(
        format!("initial: {}", state_text(&initial)),
        json!({"event": "initial", "state": state_json(&initial)}),
    );
    let post = problem.postcondition();
    let mut violations = 0;
    for (i, (fin, trace)) in runs.finals.iter().enumerate() {
        let ok = post.as_ref().map(|f| dl_core::sim::holds(f, fin));
        if ok == Some(false) {
            violations += 1;
        }
        let end = trace.last().map_or(0.0, |s| s.time);
        r.line(
            format!(
                "run {i}: t = {end:.4}, {}{}",
                state_text(fin),
                match ok {
                    Some(false) => "  (postcondition violated)",
                    _ => "",
                }
            ),
            json!({"event": "run", "index": i, "time": end, "state": state_json(fin), "postcondition": ok}),
        );
    }
    if let (Some(path), Some((_, trace))) = (out, runs.finals.first()) {
        let mut columns: Vec<Var> = vars.clone();
        for step in trace {
            for v in step.state.keys() {
                if !columns.contains(v) {
                    columns.push(v.clone());
                }
            }
        }
        if let Err(e) = write_trace(path, &columns, trace) {
            return r.fail(FAILURE, format!("{}: {e}", path.display()));
        }
    }
    r.line(
        format!("{} runs, {violations} violating the postcondition", runs.finals.len()),
        json!({"event": "summary", "runs": runs.finals.len(), "violations": violations, "exhausted": runs.exhausted}),
    );
    r.done(if violations > 0 { REFUTED } else { PROVED })
}

fn write_trace(path: &Path, vars: &[Var], trace: &dl_core::sim::Trace) -> Result<(), Box<dyn std::error::Error>> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["time".to_string(), "label".to_string()];
    header.extend(vars.iter().map(|v| v.to_string()));
    w.write_record(&header)?;
    for step in trace {
        let mut row = vec![step.time.to_string(), serde_json::to_value(step.label)?.as_str().unwrap_or("").to_string()];
        row.extend(vars.iter().map(|v| step.state.get(v).map_or(String::new(), |x| x.to_string())));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn refute(mut r: Report, file: &Path, budget: usize, seed: u64) -> Output {
    let problem = match load(file) {
        Ok(p) => p,
        Err(e) => return r.fail(FAILURE, e),
    };
    let cfg = SimConfig { samples: budget, seed, ..SimConfig::default() };
    match falsify(&problem.conjecture(), &cfg) {
        Falsified::Counterexample(c) => {
            r.line(
                format!("counterexample: {}\n  violates {} (margin {:.6})", state_text(&c.initial), c.violated, c.margin),
                json!({"event": "counterexample", "initial": state_json(&c.initial), "violated": c.violated, "margin": c.margin, "eval_seed": c.eval_seed}),
            );
            r.done(REFUTED)
        }
        Falsified::Unknown { samples } => {
            r.line(
                format!("no counterexample in {samples} samples"),
                json!({"event": "unknown", "samples": samples}),
            );
            r.done(PROVED)
        }
    }
}

fn eliminate(mut r: Report, text: &str) -> Output {
    let f: Formula = match parse_formula(text) {
        Ok(f) => f,
        Err(e) => return r.fail(FAILURE, format!("<formula>:{e}")),
    };
    match qe(&f) {
        Ok(q) => {
            r.line(q.to_string(), json!({"event": "qe", "input": f.to_string(), "result": q.to_string()}));
            r.done(PROVED)
        }
        Err(e) => r.fail(FAILURE, e.to_string()),
    }
}

fn automaton(mut r: Report, file: &Path) -> Output {
    let problem = match load(file) {
        Ok(p) => p,
        Err(e) => return r.fail(FAILURE, e),
    };
    let Some(a) = &problem.automaton else {
        return r.fail(FAILURE, format!("{}: no Automaton section", file.display()));
    };
    match compile_automaton(a) {
        Ok(p) => {
            let text = pretty_program(&p);
            r.line(&text, json!({"event": "program", "program": text}));
            r.done(PROVED)
        }
        Err(e) => r.fail(FAILURE, e.to_string()),
    }
}
