//! Proof automation on top of the kernel. Tactics only ever call
//! [`ProofState::apply`], so everything they produce replays.

mod script;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::arith::{decide_with, forall_closure, normalize_poly, Budget, Monomial, Poly};
use crate::kernel::{children, term_sign, Args, KernelError, Position, ProofState, Rule, Sequent, Side};
use crate::odesolve::solve_ode;
use crate::syntax::{Formula, Ode, Program, Rel, Term, Var};

pub use script::{parse_script, run_script, Command, ScriptError, Step};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TacticError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("{0}")]
    Shape(String),
    #[error("cut {0} is not provable by differential induction")]
    CutUnprovable(usize),
    #[error("goal {goal} remains open: {residual}")]
    NotProved { goal: usize, residual: String },
}

#[derive(Clone, Debug)]
pub struct AutoConfig {
    /// Wall-clock limit for each arithmetic call.
    pub arith_timeout: Option<Duration>,
    /// Overall deadline for arithmetic.
    pub deadline: Option<Instant>,
    /// How often a loop may be unwound by `[*]` on one branch.
    pub loop_depth: usize,
    pub max_steps: usize,
}

impl Default for AutoConfig {
    fn default() -> AutoConfig {
        AutoConfig { arith_timeout: None, deadline: None, loop_depth: 0, max_steps: 10_000 }
    }
}

impl AutoConfig {
    pub fn budget(&self) -> Budget {
        let local = self.arith_timeout.map(|d| Instant::now() + d);
        let deadline = match (local, self.deadline) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Budget { deadline }
    }
}

fn rule(name: &str, pos: Position) -> Rule {
    Rule::new(name, Args::at(pos))
}

/// Every subformula position of a sequent, succedent first, preorder.
/// Every subformula occurrence of a sequent, succedent first.
pub fn positions(s: &Sequent) -> Vec<(Position, &Formula)> {
    fn walk<'a>(f: &'a Formula, pos: Position, out: &mut Vec<(Position, &'a Formula)>) {
        out.push((pos.clone(), f));
        for (k, c) in children(f).into_iter().enumerate() {
            walk(c, pos.child(k), out);
        }
    }
    let mut out = Vec::new();
    for side in [Side::Succ, Side::Ante] {
        for (i, f) in s.side(side).iter().enumerate() {
            walk(f, Position { side, index: i, path: vec![] }, &mut out);
        }
    }
    out
}

/// `[']` at `pos` with a computed solution, if the ODE there is solvable.
fn solve_rule(s: &Sequent, pos: Position, o: &Ode) -> Option<Rule> {
    let sol = solve_ode(&o.eqs, &s.vars()).ok()?;
    let by_var: BTreeMap<&Var, &Term> = sol.assignments.iter().map(|(x, t)| (x, t)).collect();
    let terms = o.eqs.iter().map(|(x, _)| by_var.get(x).map(|t| (*t).clone())).collect::<Option<Vec<_>>>()?;
    let mut args = Args::at(pos).var(sol.time);
    args.terms = terms;
    Some(Rule::new("[']", args))
}

/// Candidate steps for one goal, most preferred first.
fn candidates(s: &Sequent, unwound: usize, cfg: &AutoConfig) -> Vec<Rule> {
    let mut out = vec![Rule::new("close", Args::default())];
    for (i, f) in s.succ.iter().enumerate() {
        let name = match f {
            Formula::Imply(..) => "impR",
            Formula::And(..) => "andR",
            Formula::Or(..) => "orR",
            Formula::Not(..) => "notR",
            Formula::Forall(..) => "allR",
            Formula::Equiv(..) => "equivR",
            _ => continue,
        };
        out.push(rule(name, Position::succ(i)));
    }
    for (i, f) in s.ante.iter().enumerate() {
        let name = match f {
            Formula::And(..) => "andL",
            Formula::Exists(..) => "existsL",
            Formula::Not(..) => "notL",
            _ => continue,
        };
        out.push(rule(name, Position::ante(i)));
    }
    let all = positions(s);
    for (pos, f) in &all {
        let name = match f {
            Formula::Box(p, _) => match &**p {
                Program::Seq(..) => "[;]",
                Program::Choice(..) => "[++]",
                Program::Test(..) => "[?]",
                _ => continue,
            },
            Formula::Diamond(..) => "<>",
            _ => continue,
        };
        out.push(rule(name, pos.clone()));
    }
    let assigns: Vec<(&Position, bool)> = all
        .iter()
        .filter_map(|(pos, f)| match f {
            Formula::Box(p, post) if matches!(**p, Program::Assign(..)) => Some((pos, post.modality_count() == 0)),
            _ => None,
        })
        .collect();
    for inner in [true, false] {
        for (pos, plain) in &assigns {
            if *plain == inner {
                out.push(rule("[:=]", (*pos).clone()));
                out.push(rule("[:=]=", (*pos).clone()));
            }
        }
    }
    for (pos, f) in &all {
        if let Formula::Box(p, _) = f {
            if let Program::Ode(o) = &**p {
                out.extend(solve_rule(s, pos.clone(), o));
            }
        }
    }
    if unwound < cfg.loop_depth {
        for (i, f) in s.succ.iter().enumerate() {
            if matches!(f, Formula::Box(p, _) if matches!(**p, Program::Loop(_))) {
                out.push(rule("[*]", Position::succ(i)));
            }
        }
    }
    out.push(Rule::new("arith", Args::default()));
    out
}

/// Symbolic execution followed by real arithmetic on every open goal.
/// Goals it cannot close stay open.
pub fn auto(ps: &ProofState, cfg: &AutoConfig) -> ProofState {
    let mut out = ps.clone();
    for g in ps.open_goals() {
        out = auto_goal(&out, g, cfg);
    }
    out
}

/// [`auto`] restricted to the subtree below one goal.
pub fn auto_goal(ps: &ProofState, goal: usize, cfg: &AutoConfig) -> ProofState {
    let mut ps = ps.clone();
    let mut stack = vec![(goal, 0usize)];
    let mut steps = 0;
    while let Some((g, unwound)) = stack.pop() {
        if steps >= cfg.max_steps {
            break;
        }
        steps += 1;
        let Ok(s) = ps.goal(g).cloned() else { continue };
        let mut stuck = true;
        for r in candidates(&s, unwound, cfg) {
            let unwinds = r.name == "[*]";
            if let Ok(next) = ps.apply(g, r, &cfg.budget()) {
                ps = next;
                let extra = usize::from(unwinds);
                stack.extend(ps.children(g).iter().rev().map(|c| (*c, unwound + extra)));
                stuck = false;
                break;
            }
        }
        if stuck && find_succ(&s, is_ode_box).is_some() {
            if let Ok(next) = di_prove(&ps, g, None, cfg) {
                ps = next;
            }
        }
    }
    ps
}

/// Open goals in the subtree below `goal`.
pub fn open_below(ps: &ProofState, goal: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack = vec![goal];
    while let Some(g) = stack.pop() {
        let n = &ps.nodes[g];
        if n.rule.is_none() {
            out.push(g);
        }
        stack.extend(n.children.iter().rev());
    }
    out
}

fn require_closed(ps: &ProofState, goal: usize, cfg: &AutoConfig) -> Result<(), TacticError> {
    match open_below(ps, goal).first() {
        None => Ok(()),
        Some(&g) => {
            let s = ps.goal(g)?;
            let residual = crate::kernel::residual(s, &cfg.budget())
                .map(|f| f.to_string())
                .unwrap_or_else(|e| e.to_string());
            Err(TacticError::NotProved { goal: g, residual: format!("{s} (residual {residual})") })
        }
    }
}

/// Applies right/left propositional steps until the first succedent
/// formula is a modality. Returns the goal reached.
fn prepare(ps: &ProofState, goal: usize) -> Result<(ProofState, usize), TacticError> {
    let mut ps = ps.clone();
    let mut g = goal;
    let budget = Budget::unlimited();
    loop {
        let s = ps.goal(g)?;
        let step = s
            .succ
            .iter()
            .enumerate()
            .find_map(|(i, f)| match f {
                Formula::Imply(..) => Some(rule("impR", Position::succ(i))),
                Formula::Forall(..) => Some(rule("allR", Position::succ(i))),
                _ => None,
            })
            .or_else(|| {
                s.ante.iter().enumerate().find_map(|(i, f)| match f {
                    Formula::And(..) => Some(rule("andL", Position::ante(i))),
                    Formula::Exists(..) => Some(rule("existsL", Position::ante(i))),
                    _ => None,
                })
            });
        match step {
            Some(r) => {
                ps = ps.apply(g, r, &budget)?;
                g = ps.children(g)[0];
            }
            None => return Ok((ps, g)),
        }
    }
}

fn find_succ(s: &Sequent, pred: impl Fn(&Formula) -> bool) -> Option<Position> {
    s.succ.iter().position(pred).map(Position::succ)
}

fn is_ode_box(f: &Formula) -> bool {
    matches!(f, Formula::Box(p, _) if matches!(**p, Program::Ode(_)))
}

/// `Γ ⊢ [α*]ψ` becomes `Γ ⊢ I`, `I ⊢ [α]I` and `I ⊢ ψ`.
pub fn loop_invariant(ps: &ProofState, goal: usize, inv: &Formula) -> Result<ProofState, TacticError> {
    let (ps, g) = prepare(ps, goal)?;
    let s = ps.goal(g)?;
    let pos = find_succ(s, |f| matches!(f, Formula::Box(p, _) if matches!(**p, Program::Loop(_))))
        .ok_or_else(|| TacticError::Shape(format!("no loop modality in {s}")))?;
    Ok(ps.apply(g, Rule::new("loop", Args::at(pos).formula(inv.clone())), &Budget::unlimited())?)
}

/// Differential induction on the first ODE box of the goal, with `inv`
/// as invariant (the postcondition by default), closing the premises by
/// arithmetic.
pub fn di_prove(ps: &ProofState, goal: usize, inv: Option<&Formula>, cfg: &AutoConfig) -> Result<ProofState, TacticError> {
    let (mut ps, g) = prepare(ps, goal)?;
    let s = ps.goal(g)?.clone();
    let pos = find_succ(&s, is_ode_box).ok_or_else(|| TacticError::Shape(format!("no ODE box in {s}")))?;
    let post = match &s.succ[pos.index] {
        Formula::Box(_, post) => (**post).clone(),
        _ => unreachable!(),
    };
    match inv {
        Some(f) if *f != post => {
            ps = ps.apply(g, Rule::new("DC", Args::at(pos.clone()).formula(f.clone())), &cfg.budget())?;
            let (show, used) = (ps.children(g)[0], ps.children(g)[1]);
            ps = di_prove(&ps, show, None, cfg)?;
            ps = ps.apply(used, rule("DW", pos), &cfg.budget())?;
            let w = ps.children(used)[0];
            ps = auto_goal(&ps, w, cfg);
        }
        _ => {
            ps = ps.apply(g, rule("DI", pos), &cfg.budget())?;
            for c in ps.children(g).to_vec() {
                ps = auto_goal(&ps, c, cfg);
            }
        }
    }
    require_closed(&ps, g, cfg)?;
    Ok(ps)
}

/// Cuts each formula in turn, proving it by differential induction, then
/// proves the strengthened goal by differential weakening or induction.
pub fn diff_saturate(
    ps: &ProofState,
    goal: usize,
    cuts: &[Formula],
    cfg: &AutoConfig,
) -> Result<ProofState, TacticError> {
    let (mut ps, mut g) = prepare(ps, goal)?;
    for (i, c) in cuts.iter().enumerate() {
        let s = ps.goal(g)?;
        let pos = find_succ(s, is_ode_box).ok_or_else(|| TacticError::Shape(format!("no ODE box in {s}")))?;
        ps = ps.apply(g, Rule::new("DC", Args::at(pos).formula(c.clone())), &cfg.budget())?;
        let (show, used) = (ps.children(g)[0], ps.children(g)[1]);
        ps = di_prove(&ps, show, None, cfg).map_err(|_| TacticError::CutUnprovable(i))?;
        g = used;
    }
    let s = ps.goal(g)?;
    let pos = find_succ(s, is_ode_box).ok_or_else(|| TacticError::Shape(format!("no ODE box in {s}")))?;
    if let Ok(weak) = ps.apply(g, rule("DW", pos), &cfg.budget()) {
        let w = weak.children(g)[0];
        let done = auto_goal(&weak, w, cfg);
        if open_below(&done, g).is_empty() {
            return Ok(done);
        }
    }
    di_prove(&ps, g, None, cfg)
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub degree: u32,
    pub grid: Vec<i64>,
    pub max_results: usize,
    pub timeout: Duration,
}

impl Default for SearchConfig {
    fn default() -> SearchConfig {
        SearchConfig { degree: 2, grid: vec![-1, 0, 1], max_results: 5, timeout: Duration::from_secs(20) }
    }
}

fn monomials(vars: &[Var], degree: u32) -> Vec<Monomial> {
    let mut out = vec![Monomial::one()];
    for _ in 0..degree {
        let mut next = out.clone();
        for m in &out {
            for x in vars {
                let mut f = m.factors().to_vec();
                f.push((x.clone(), 1));
                next.push(Monomial::from_factors(f));
            }
        }
        next.sort();
        next.dedup();
        out = next;
    }
    out.retain(|m| !m.is_one());
    out
}

/// Holds for all values, checked by sign reasoning first and by
/// quantifier elimination otherwise.
fn valid(ante: &[Formula], goal: &Formula, budget: &Budget) -> bool {
    if let Formula::Cmp(a, r, b) = goal {
        let facts = crate::kernel::facts(ante);
        let m = term_sign(&Term::sub(a.clone(), b.clone()), &facts);
        if m & !crate::arith::qf::mask_of_rel(*r) == 0 {
            return true;
        }
    }
    let claim = forall_closure(&Formula::imply(Formula::conj(ante.iter().cloned()), goal.clone()));
    decide_with(&claim, budget).unwrap_or(false)
}

/// Atomic differential invariants `p ⋈ 0` for the first ODE box of the
/// goal, where `p` combines monomials over the ODE variables and the
/// ODE-free parts of the postcondition with coefficients from the grid.
/// Candidates must follow from the assumptions, be preserved by the ODE
/// and imply the postcondition within the domain. Smaller ones come first.
pub fn di_search(s: &Sequent, cfg: &SearchConfig) -> Vec<Formula> {
    let deadline = Instant::now() + cfg.timeout;
    let budget = Budget { deadline: Some(deadline) };
    let Some(pos) = find_succ(s, is_ode_box) else { return vec![] };
    let Formula::Box(p, post) = &s.succ[pos.index] else { return vec![] };
    let Program::Ode(o) = &**p else { return vec![] };
    let ante: Vec<Formula> = s.ante.iter().filter(|f| f.is_first_order()).cloned().collect();
    let admissible = |f: &Formula| -> bool {
        let mut inner = Sequent::goal(Formula::boxed((**p).clone(), f.clone()));
        inner.ante = ante.clone();
        let mut probe = ProofState::init(inner.to_formula());
        let Ok((ps, g)) = prepare(&probe, 0) else { return false };
        probe = ps;
        let Some(at) = probe.goal(g).ok().and_then(|s| find_succ(s, is_ode_box)) else { return false };
        let Ok(next) = probe.apply(g, rule("DI", at), &budget) else { return false };
        next.children(g).iter().all(|c| {
            let cs = next.goal(*c).expect("fresh premise");
            cs.succ.iter().any(|goal| valid(&cs.ante, goal, &budget))
        })
    };
    let implies_post = |f: &Formula| {
        let mut a = vec![f.clone()];
        if o.domain != Formula::True {
            a.push(o.domain.clone());
        }
        valid(&a, post, &budget)
    };
    let mut out = Vec::new();
    if post.is_quantifier_free_arith() && admissible(post) {
        out.push((**post).clone());
    }
    let vars: Vec<Var> = o.vars().cloned().collect();
    let mut basis: Vec<Poly> = monomials(&vars, cfg.degree)
        .into_iter()
        .map(|m| Poly::from_terms([(m, crate::arith::poly::rat(1))]))
        .collect();
    basis.push(Poly::int(1));
    let mut extras = Vec::new();
    collect_free_parts(post, &vars, &mut extras);
    for e in extras {
        if !basis.contains(&e) {
            basis.push(e);
        }
    }
    let nonzero: Vec<i64> = cfg.grid.iter().copied().filter(|c| *c != 0).collect();
    'sizes: for size in 1..=basis.len() {
        for support in combinations(basis.len(), size) {
            for coeffs in product(&nonzero, size) {
                if Instant::now() > deadline || out.len() >= cfg.max_results {
                    break 'sizes;
                }
                let poly = support
                    .iter()
                    .zip(&coeffs)
                    .fold(Poly::zero(), |acc, (i, c)| &acc + &basis[*i].scale(&crate::arith::poly::rat(*c)));
                if poly.is_constant() {
                    continue;
                }
                for rel in [Rel::Ge, Rel::Gt, Rel::Eq] {
                    let f = Formula::cmp(poly.to_term(), rel, Term::zero());
                    if !out.contains(&f) && implies_post(&f) && admissible(&f) {
                        out.push(f);
                    }
                }
            }
        }
        if !out.is_empty() {
            break;
        }
    }
    out
}

fn collect_free_parts(f: &Formula, vars: &[Var], out: &mut Vec<Poly>) {
    if let Formula::Cmp(a, _, b) = f {
        if let Ok(p) = normalize_poly(&Term::sub(a.clone(), b.clone())) {
            let free = Poly::from_terms(
                p.terms().filter(|(m, _)| vars.iter().all(|x| m.degree_in(x) == 0) && !m.is_one()).map(|(m, c)| (m.clone(), c.clone())),
            );
            if !free.is_zero() {
                let (_, prim) = free.primitive();
                out.push(prim);
            }
        }
    }
    for c in children(f) {
        collect_free_parts(c, vars, out);
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn product(values: &[i64], k: usize) -> Vec<Vec<i64>> {
    (0..k).fold(vec![vec![]], |acc, _| {
        acc.into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect()
    })
}
