use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::syntax::{Formula, Program, Rel, Term, Var};

use super::{atom_margin, Run, SimConfig, Sim, State, Trace};

/// Margins at or below this are not reported.
const TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub initial: State,
    #[serde(skip)]
    pub trace: Trace,
    pub violated: String,
    pub margin: f64,
    pub eval_seed: u64,
}

#[derive(Clone, Debug)]
pub enum Falsified {
    Counterexample(Counterexample),
    /// No counterexample among this many samples.
    Unknown { samples: usize },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Polarity {
    Pos,
    Neg,
    Both,
}

impl Polarity {
    fn flip(self) -> Polarity {
        match self {
            Polarity::Pos => Polarity::Neg,
            Polarity::Neg => Polarity::Pos,
            Polarity::Both => Polarity::Both,
        }
    }
}

struct Rob {
    value: f64,
    trace: Option<Trace>,
    violated: String,
}

impl Rob {
    fn leaf(value: f64, f: &Formula) -> Rob {
        Rob { value, trace: None, violated: f.to_string() }
    }
}

fn exact(p: &Program) -> bool {
    match p {
        Program::Assign(..) | Program::Test(_) => true,
        Program::Ode(_) | Program::Loop(_) => false,
        Program::Choice(a, b) | Program::Seq(a, b) => exact(a) && exact(b),
    }
}

struct Evaluator<'c> {
    sim: Sim<'c>,
    /// Cleared when sampling cannot bound the truth value from the right side.
    reliable: bool,
}

fn ne_terms(f: &Formula, out: &mut Vec<Term>) {
    match f {
        Formula::Cmp(a, Rel::Ne, b) => {
            let g = Term::sub(a.clone(), b.clone());
            if !out.contains(&g) {
                out.push(g);
            }
        }
        Formula::Cmp(..) | Formula::True | Formula::False => {}
        Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => ne_terms(a, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
            ne_terms(a, out);
            ne_terms(b, out);
        }
        Formula::Box(_, a) | Formula::Diamond(_, a) => ne_terms(a, out),
    }
}

impl<'c> Evaluator<'c> {
    fn new(cfg: &'c SimConfig, seed: u64, f: &Formula, record: bool) -> Evaluator<'c> {
        let mut sim = Sim::new(cfg, seed);
        sim.record = record;
        ne_terms(f, &mut sim.events);
        Evaluator { sim, reliable: true }
    }

    fn sample_value(&mut self) -> f64 {
        sample_value(&mut self.sim.rng)
    }

    fn rob(&mut self, f: &Formula, run: &Run, pol: Polarity) -> Rob {
        let s = &run.state;
        match f {
            Formula::True => Rob::leaf(f64::MAX, f),
            Formula::False => Rob::leaf(-f64::MAX, f),
            Formula::Cmp(a, r, b) => {
                let m = atom_margin(a, *r, b, s);
                if *r == Rel::Ne && m < 1e-9 {
                    let g = Term::sub(a.clone(), b.clone());
                    if let Some((_, c)) = run.crossings.iter().find(|(t, _)| *t == g) {
                        return Rob::leaf(-c, f);
                    }
                }
                Rob::leaf(m, f)
            }
            Formula::Not(a) => {
                let r = self.rob(a, run, pol.flip());
                Rob { value: -r.value, trace: r.trace, violated: f.to_string() }
            }
            Formula::And(a, b) => {
                let (x, y) = (self.rob(a, run, pol), self.rob(b, run, pol));
                if x.value <= y.value { x } else { y }
            }
            Formula::Or(a, b) => {
                let (x, y) = (self.rob(a, run, pol), self.rob(b, run, pol));
                if x.value >= y.value { x } else { y }
            }
            Formula::Imply(a, b) => {
                let x = self.rob(a, run, pol.flip());
                let y = self.rob(b, run, pol);
                // A false implication is reported through its conclusion.
                if -x.value > y.value && y.value >= 0.0 {
                    Rob { value: -x.value, trace: x.trace, violated: f.to_string() }
                } else {
                    Rob { value: (-x.value).max(y.value), ..y }
                }
            }
            Formula::Equiv(a, b) => {
                let x = self.rob(a, run, Polarity::Both);
                let y = self.rob(b, run, Polarity::Both);
                let v = (-x.value).max(y.value).min(x.value.max(-y.value));
                Rob { value: v, trace: y.trace.or(x.trace), violated: f.to_string() }
            }
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                let universal = matches!(f, Formula::Forall(..));
                if pol != if universal { Polarity::Pos } else { Polarity::Neg } {
                    self.reliable = false;
                }
                let mut best: Option<Rob> = None;
                for _ in 0..self.sim.cfg.quantifier_samples {
                    let mut r = run.clone();
                    r.state.insert(x.clone(), self.sample_value());
                    r.crossings.clear();
                    let v = self.rob(a, &r, pol);
                    let better = match &best {
                        None => true,
                        Some(b) => (v.value < b.value) == universal,
                    };
                    if better {
                        best = Some(v);
                    }
                }
                best.unwrap_or_else(|| Rob::leaf(0.0, f))
            }
            Formula::Box(p, a) | Formula::Diamond(p, a) => {
                let boxed = matches!(f, Formula::Box(..));
                let sound_side = if boxed { Polarity::Pos } else { Polarity::Neg };
                let before = self.sim.exhausted;
                self.sim.exhausted = false;
                let finals = self.sim.exec(p, vec![Run::start(s)]);
                if pol != sound_side && (!exact(p) || self.sim.exhausted) {
                    self.reliable = false;
                }
                self.sim.exhausted |= before;
                let mut best: Option<Rob> = None;
                for r in &finals {
                    let mut v = self.rob(a, r, pol);
                    if v.trace.is_none() {
                        v.trace = Some(r.trace.clone());
                    }
                    let better = match &best {
                        None => true,
                        Some(b) => (v.value < b.value) == boxed,
                    };
                    if better {
                        best = Some(v);
                    }
                }
                best.unwrap_or_else(|| Rob::leaf(if boxed { f64::MAX } else { -f64::MAX }, f))
            }
        }
    }
}

pub(crate) fn sample_value(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..10) {
        0..=3 => rng.gen_range(-3..=3) as f64,
        4..=5 => rng.gen_range(-8..=8) as f64 / 2.0,
        _ => rng.gen_range(-10.0..10.0),
    }
}

/// A random state over `vars` satisfying every formula in `assume`, by
/// rejection sampling.
pub fn sample_state(vars: &[Var], assume: &[Formula], seed: u64, tries: usize) -> Option<State> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..tries).find_map(|_| {
        let s: State = vars.iter().map(|v| (v.clone(), sample_value(&mut rng))).collect();
        assume.iter().all(|f| super::holds(f, &s)).then_some(s)
    })
}

/// Sampled robustness of `f` in `s` with a default configuration.
pub(crate) fn robustness_at(f: &Formula, s: &State) -> f64 {
    let cfg = SimConfig::default();
    Evaluator::new(&cfg, 0, f, false).rob(f, &Run::start(s), Polarity::Pos).value
}

fn eval_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64 + 1)
}

/// Re-evaluates a counterexample with half the step size. Returns the
/// confirmed margin, or `None` when the violation does not persist.
pub fn replay(f: &Formula, cex: &Counterexample, cfg: &SimConfig) -> Option<f64> {
    let half = SimConfig { h: cfg.h / 2.0, ..cfg.clone() };
    let mut ev = Evaluator::new(&half, cex.eval_seed, f, false);
    let r = ev.rob(f, &Run::start(&cex.initial), Polarity::Pos);
    (ev.reliable && r.value < -TOLERANCE).then_some(-r.value)
}

/// Searches for a state violating `f`. Free variables are sampled at
/// random; boxes and universal quantifiers are refuted by sampled runs and
/// values.
pub fn falsify(f: &Formula, cfg: &SimConfig) -> Falsified {
    let vars: Vec<Var> = crate::syntax::free_vars(f).into_iter().filter(|v| !v.is_differential()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for i in 0..cfg.samples {
        let initial: State = vars.iter().map(|v| (v.clone(), sample_value(&mut rng))).collect();
        let seed = eval_seed(cfg.seed, i);
        let mut ev = Evaluator::new(cfg, seed, f, false);
        let r = ev.rob(f, &Run::start(&initial), Polarity::Pos);
        if !ev.reliable {
            return Falsified::Unknown { samples: i };
        }
        if r.value < -TOLERANCE {
            let r = Evaluator::new(cfg, seed, f, true).rob(f, &Run::start(&initial), Polarity::Pos);
            let cex = Counterexample {
                initial,
                trace: r.trace.unwrap_or_default(),
                violated: r.violated,
                margin: -r.value,
                eval_seed: seed,
            };
            if let Some(m) = replay(f, &cex, cfg) {
                return Falsified::Counterexample(Counterexample { margin: cex.margin.min(m), ..cex });
            }
        }
    }
    Falsified::Unknown { samples: cfg.samples }
}

