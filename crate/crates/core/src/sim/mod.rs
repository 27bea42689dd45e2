//! Numeric transition semantics: RK4 simulation, falsification by
//! sampling, and exact reachability for discrete programs.

mod falsify;
mod reach;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::syntax::{Formula, Ode, Program, Rel, Term, Var};

pub use falsify::{falsify, replay, sample_state, Counterexample, Falsified};
pub use reach::{discrete_reach, eval_discrete, ExactState, ReachError};

pub type State = BTreeMap<Var, f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    Init,
    Assign,
    Test,
    OdeStep,
    ChoiceLeft,
    ChoiceRight,
    LoopIter,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub time: f64,
    pub state: State,
    pub label: Label,
}

pub type Trace = Vec<Step>;

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub seed: u64,
    pub max_unroll: usize,
    pub max_duration: f64,
    pub h: f64,
    pub stop_samples: usize,
    pub samples: usize,
    /// Cap on the number of runs kept per program.
    pub max_runs: usize,
    /// Values tried per quantified variable during falsification.
    pub quantifier_samples: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            max_unroll: 4,
            max_duration: 5.0,
            h: 0.01,
            stop_samples: 4,
            samples: 500,
            max_runs: 64,
            quantifier_samples: 16,
        }
    }
}

/// Final states with one witnessing trace each.
#[derive(Clone, Debug, Default)]
pub struct Runs {
    pub finals: Vec<(State, Trace)>,
    /// Set when some branches were dropped to respect the budget.
    pub exhausted: bool,
}

pub fn eval_term(t: &Term, s: &State) -> f64 {
    match t {
        Term::Num(r) => {
            use num_traits::ToPrimitive;
            match (r.numer().to_i64(), r.denom().to_i64()) {
                (Some(n), Some(d)) => n as f64 / d as f64,
                _ => r.to_f64().unwrap_or(f64::NAN),
            }
        }
        Term::Var(v) => s.get(v).copied().unwrap_or(0.0),
        Term::Neg(a) => -eval_term(a, s),
        Term::Add(a, b) => eval_term(a, s) + eval_term(b, s),
        Term::Sub(a, b) => eval_term(a, s) - eval_term(b, s),
        Term::Mul(a, b) => eval_term(a, s) * eval_term(b, s),
        Term::Div(a, b) => eval_term(a, s) / eval_term(b, s),
        Term::Pow(a, n) => eval_term(a, s).powi(*n as i32),
    }
}

/// Signed distance from the boundary of a comparison: positive when true.
pub fn atom_margin(a: &Term, r: Rel, b: &Term, s: &State) -> f64 {
    let d = eval_term(a, s) - eval_term(b, s);
    match r {
        Rel::Ge | Rel::Gt => d,
        Rel::Le | Rel::Lt => -d,
        Rel::Eq => -d.abs(),
        Rel::Ne => d.abs(),
    }
}

/// Truth of a quantifier-free first-order formula in a numeric state.
pub fn holds(f: &Formula, s: &State) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Cmp(a, r, b) => {
            let (x, y) = (eval_term(a, s), eval_term(b, s));
            match x.partial_cmp(&y) {
                Some(o) => r.holds(o),
                None => false,
            }
        }
        Formula::Not(a) => !holds(a, s),
        Formula::And(a, b) => holds(a, s) && holds(b, s),
        Formula::Or(a, b) => holds(a, s) || holds(b, s),
        Formula::Imply(a, b) => !holds(a, s) || holds(b, s),
        Formula::Equiv(a, b) => holds(a, s) == holds(b, s),
        Formula::Forall(..) | Formula::Exists(..) | Formula::Box(..) | Formula::Diamond(..) => {
            falsify::robustness_at(f, s) >= 0.0
        }
    }
}

fn eval_overlay(t: &Term, s: &State, xs: &[Var], vals: &[f64]) -> f64 {
    match t {
        Term::Var(v) => match xs.iter().position(|x| x == v) {
            Some(i) => vals[i],
            None => s.get(v).copied().unwrap_or(0.0),
        },
        Term::Num(_) => eval_term(t, s),
        Term::Neg(a) => -eval_overlay(a, s, xs, vals),
        Term::Add(a, b) => eval_overlay(a, s, xs, vals) + eval_overlay(b, s, xs, vals),
        Term::Sub(a, b) => eval_overlay(a, s, xs, vals) - eval_overlay(b, s, xs, vals),
        Term::Mul(a, b) => eval_overlay(a, s, xs, vals) * eval_overlay(b, s, xs, vals),
        Term::Div(a, b) => eval_overlay(a, s, xs, vals) / eval_overlay(b, s, xs, vals),
        Term::Pow(a, n) => eval_overlay(a, s, xs, vals).powi(*n as i32),
    }
}

fn rk4(ode: &Ode, s: &State, h: f64) -> State {
    let xs: Vec<Var> = ode.eqs.iter().map(|(x, _)| x.clone()).collect();
    let x0: Vec<f64> = xs.iter().map(|x| s.get(x).copied().unwrap_or(0.0)).collect();
    let deriv = |v: &[f64]| -> Vec<f64> { ode.eqs.iter().map(|(_, t)| eval_overlay(t, s, &xs, v)).collect() };
    let shifted = |k: &[f64], c: f64| -> Vec<f64> { x0.iter().zip(k).map(|(x, d)| x + c * d).collect() };
    let k1 = deriv(&x0);
    let k2 = deriv(&shifted(&k1, h / 2.0));
    let k3 = deriv(&shifted(&k2, h / 2.0));
    let k4 = deriv(&shifted(&k3, h));
    let mut out = s.clone();
    for (i, x) in xs.iter().enumerate() {
        out.insert(x.clone(), x0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    out
}

fn finite(s: &State) -> bool {
    s.values().all(|v| v.is_finite())
}

pub(crate) struct Sim<'c> {
    pub cfg: &'c SimConfig,
    pub rng: ChaCha8Rng,
    pub exhausted: bool,
    /// When unset, runs keep only their latest step.
    pub record: bool,
    /// Terms whose zero crossings along a flow become extra stop times.
    pub events: Vec<Term>,
}

/// A run in progress. `crossings` certifies, for event terms that are
/// numerically zero in the final state, a sign change across the stop time
/// with the given bracket margin.
#[derive(Clone, Debug)]
pub(crate) struct Run {
    pub state: State,
    pub trace: Trace,
    pub crossings: Vec<(Term, f64)>,
}

impl Run {
    pub fn start(s: &State) -> Run {
        Run {
            state: s.clone(),
            trace: vec![Step { time: 0.0, state: s.clone(), label: Label::Init }],
            crossings: Vec::new(),
        }
    }
}

impl<'c> Sim<'c> {
    pub fn new(cfg: &'c SimConfig, seed: u64) -> Sim<'c> {
        Sim { cfg, rng: ChaCha8Rng::seed_from_u64(seed), exhausted: false, record: true, events: Vec::new() }
    }

    fn cap(&mut self, mut runs: Vec<Run>) -> Vec<Run> {
        if runs.len() > self.cfg.max_runs {
            self.exhausted = true;
            // Keep a random subset, in original order.
            let mut idx: Vec<usize> = rand::seq::index::sample(&mut self.rng, runs.len(), self.cfg.max_runs).into_vec();
            idx.sort_unstable();
            let mut keep = Vec::with_capacity(idx.len());
            for (j, r) in runs.drain(..).enumerate() {
                if idx.binary_search(&j).is_ok() {
                    keep.push(r);
                }
            }
            runs = keep;
        }
        runs
    }

    fn extend(&self, trace: &mut Trace, step: Step) {
        if !self.record {
            trace.clear();
        }
        trace.push(step);
    }

    fn push(&self, run: &Run, state: State, label: Label) -> Run {
        let t = run.trace.last().map_or(0.0, |s| s.time);
        let mut trace = if self.record { run.trace.clone() } else { Vec::new() };
        trace.push(Step { time: t, state: state.clone(), label });
        let crossings = if label == Label::Assign { Vec::new() } else { run.crossings.clone() };
        Run { state, trace, crossings }
    }

    pub fn exec(&mut self, p: &Program, input: Vec<Run>) -> Vec<Run> {
        match p {
            Program::Assign(x, t) => input
                .iter()
                .map(|r| {
                    let mut s = r.state.clone();
                    s.insert(x.clone(), eval_term(t, &r.state));
                    self.push(r, s, Label::Assign)
                })
                .collect(),
            Program::Test(f) => input
                .iter()
                .filter(|r| holds(f, &r.state))
                .map(|r| self.push(r, r.state.clone(), Label::Test))
                .collect(),
            Program::Ode(o) => {
                let mut out = Vec::new();
                for r in &input {
                    out.extend(self.flow(o, r));
                }
                self.cap(out)
            }
            Program::Choice(a, b) => {
                let left = input.iter().map(|r| self.push(r, r.state.clone(), Label::ChoiceLeft)).collect();
                let right = input.iter().map(|r| self.push(r, r.state.clone(), Label::ChoiceRight)).collect();
                let mut out = self.exec(a, left);
                out.extend(self.exec(b, right));
                self.cap(out)
            }
            Program::Seq(a, b) => {
                let mid = self.exec(a, input);
                self.exec(b, mid)
            }
            Program::Loop(a) => {
                let mut out = input.clone();
                let mut frontier = input;
                for _ in 0..self.cfg.max_unroll {
                    let next: Vec<Run> =
                        frontier.iter().map(|r| self.push(r, r.state.clone(), Label::LoopIter)).collect();
                    frontier = self.exec(a, next);
                    if frontier.is_empty() {
                        break;
                    }
                    out.extend(frontier.iter().cloned());
                    out = self.cap(out);
                }
                out
            }
        }
    }

    /// Largest step `d ≤ h` from `s` that stays in the domain, by bisection.
    fn exit_step(&self, o: &Ode, s: &State, h: f64) -> (f64, State) {
        let (mut lo, mut hi) = (0.0, h);
        let mut best = s.clone();
        while hi - lo > 1e-9 {
            let mid = (lo + hi) / 2.0;
            let n = rk4(o, s, mid);
            if finite(&n) && holds(&o.domain, &n) {
                lo = mid;
                best = n;
            } else {
                hi = mid;
            }
        }
        (lo, best)
    }

    fn flow(&mut self, o: &Ode, run: &Run) -> Vec<Run> {
        if !holds(&o.domain, &run.state) {
            return Vec::new();
        }
        let h = self.cfg.h;
        let mut points = vec![(0.0, run.state.clone())];
        let mut t = 0.0;
        while t < self.cfg.max_duration - 1e-12 {
            let dt = h.min(self.cfg.max_duration - t);
            let cur = &points.last().unwrap().1;
            let next = rk4(o, cur, dt);
            if finite(&next) && holds(&o.domain, &next) {
                t += dt;
                points.push((t, next));
            } else {
                let (d, s) = self.exit_step(o, cur, dt);
                if d > 0.0 {
                    t += d;
                    points.push((t, s));
                }
                break;
            }
        }
        let horizon = t;
        let mut stops: Vec<(f64, Vec<(Term, f64)>)> = vec![(0.0, Vec::new()), (horizon, Vec::new())];
        for _ in 0..self.cfg.stop_samples {
            stops.push((self.rng.gen::<f64>() * horizon, Vec::new()));
        }
        for g in &self.events {
            stops.extend(self.crossings(o, g, &points));
        }
        stops
            .into_iter()
            .map(|(tau, crossings)| {
                let base = run.trace.last().map_or(0.0, |s| s.time);
                let trace = if self.record { run.trace.clone() } else { run.trace.last().into_iter().cloned().collect() };
                let mut r = Run { state: run.state.clone(), trace, crossings };
                let mut last = 0.0;
                for (tp, s) in &points {
                    if *tp > tau {
                        break;
                    }
                    if *tp > 0.0 && self.record {
                        r.trace.push(Step { time: base + tp, state: s.clone(), label: Label::OdeStep });
                    }
                    r.state = s.clone();
                    last = *tp;
                }
                if tau - last > 1e-12 {
                    let s = rk4(o, &r.state, tau - last);
                    self.extend(&mut r.trace, Step { time: base + tau, state: s.clone(), label: Label::OdeStep });
                    r.state = s;
                } else if !self.record && last > 0.0 {
                    let step = Step { time: base + last, state: r.state.clone(), label: Label::OdeStep };
                    self.extend(&mut r.trace, step);
                }
                r
            })
            .collect()
    }

    /// Zero crossings of `g` along sampled flow points, located by
    /// bisection, each with the smaller of the two bracket values furthest
    /// from the crossing (up to 50 steps away) on which `g` keeps its sign.
    fn crossings(&self, o: &Ode, g: &Term, points: &[(f64, State)]) -> Vec<(f64, Vec<(Term, f64)>)> {
        let vals: Vec<f64> = points.iter().map(|(_, s)| eval_term(g, s)).collect();
        let mut out = Vec::new();
        for i in 0..vals.len().saturating_sub(1) {
            if !(vals[i] < 0.0 && vals[i + 1] > 0.0 || vals[i] > 0.0 && vals[i + 1] < 0.0) {
                continue;
            }
            let (t0, s0) = &points[i];
            let (mut lo, mut hi) = (0.0, points[i + 1].0 - t0);
            while hi - lo > 1e-13 {
                let mid = (lo + hi) / 2.0;
                if (eval_term(g, &rk4(o, s0, mid)) < 0.0) == (vals[i] < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let sign = vals[i] < 0.0;
            let mut a = i;
            while a > 0 && i - a < 50 && (vals[a - 1] < 0.0) == sign && vals[a - 1] != 0.0 {
                a -= 1;
            }
            let mut b = i + 1;
            while b + 1 < vals.len() && b - i < 50 && (vals[b + 1] < 0.0) != sign && vals[b + 1] != 0.0 {
                b += 1;
            }
            let margin = vals[a].abs().min(vals[b].abs());
            out.push((t0 + (lo + hi) / 2.0, vec![(g.clone(), margin)]));
        }
        out
    }
}

/// Final states reachable from `s`, each with a witnessing trace.
pub fn run(p: &Program, s: &State, cfg: &SimConfig) -> Runs {
    let mut sim = Sim::new(cfg, cfg.seed);
    let finals = sim.exec(p, vec![Run::start(s)]);
    Runs { finals: finals.into_iter().map(|r| (r.state, r.trace)).collect(), exhausted: sim.exhausted }
}
