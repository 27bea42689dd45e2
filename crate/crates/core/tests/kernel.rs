use dl_core::arith::{decide, forall_closure, Budget};
use dl_core::kernel::{
    check_dlp, check_proof, derive, resolve_position, to_dlp, Args, KernelError, Position, ProofState, Rule, Sequent, Side,
};
use dl_core::parser::{parse_formula, parse_term};
use dl_core::syntax::{Formula, Var};

fn f(s: &str) -> Formula {
    parse_formula(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn sq(ante: &[&str], succ: &[&str]) -> Sequent {
    Sequent::new(ante.iter().map(|s| f(s)).collect(), succ.iter().map(|s| f(s)).collect())
}

fn at(side: Side, index: usize, path: &[usize]) -> Args {
    Args::at(Position { side, index, path: path.to_vec() })
}

fn run(s: &Sequent, name: &str, args: Args) -> Result<Vec<Sequent>, KernelError> {
    let budget = Budget::unlimited();
    derive(s, &resolve_position(s, Rule::new(name, args), &budget)?, &budget)
}

fn valid(g: Formula) -> bool {
    decide(&forall_closure(&g)).unwrap()
}

fn ok(s: &Sequent, name: &str, args: Args) -> Vec<Sequent> {
    run(s, name, args).unwrap_or_else(|e| panic!("{name} on {s}: {e}"))
}

fn rewrite(goal: &str, name: &str, path: &[usize]) -> Formula {
    let out = ok(&sq(&[], &[goal]), name, at(Side::Succ, 0, path));
    assert_eq!(out.len(), 1);
    out[0].succ[0].clone()
}

fn side_condition(r: Result<Vec<Sequent>, KernelError>) -> String {
    match r {
        Err(KernelError::SideCondition(m)) => m,
        other => panic!("expected a side condition failure, got {other:?}"),
    }
}

fn succ0() -> Args {
    Args::at(Position::succ(0))
}

#[test]
fn assignment_axioms() {
    assert_eq!(rewrite("[x := x + 1] x > 0", "[:=]", &[]), f("x + 1 > 0"));
    let capture = run(&sq(&[], &["[x := y] \\forall y x > y"]), "[:=]", succ0());
    assert!(side_condition(capture).contains("clashes"));
    let eq = rewrite("[x := x + 1] x > 0", "[:=]=", &[]);
    assert!(matches!(eq, Formula::Forall(..)), "{eq}");
    assert!(valid(Formula::equiv(eq, f("x + 1 > 0"))));
}

#[test]
fn program_axioms() {
    assert_eq!(rewrite("[?x > 0] y > 0", "[?]", &[]), f("x > 0 -> y > 0"));
    assert_eq!(rewrite("[x := 1 ++ x := 2] x > 0", "[++]", &[]), f("[x := 1] x > 0 & [x := 2] x > 0"));
    assert_eq!(rewrite("[x := 1; y := x] y > 0", "[;]", &[]), f("[x := 1][y := x] y > 0"));
    assert_eq!(rewrite("[{x := x + 1}*] x > 0", "[*]", &[]), f("x > 0 & [x := x + 1][{x := x + 1}*] x > 0"));
    assert_eq!(rewrite("<x := 1> x > 0", "<>", &[]), f("!([x := 1] !(x > 0))"));
}

#[test]
fn axioms_rewrite_inside_formulas() {
    let out = rewrite("a > 0 -> [x := 1; y := 2] x < y", "[;]", &[1]);
    assert_eq!(out, f("a > 0 -> [x := 1][y := 2] x < y"));
    let out = ok(&sq(&["[?p > 0] q > 0"], &[]), "[?]", at(Side::Ante, 0, &[]));
    assert_eq!(out[0], sq(&["p > 0 -> q > 0"], &[]));
}

#[test]
fn reversed_axioms() {
    let mut args = succ0();
    args.reverse = true;
    let out = ok(&sq(&[], &["[x := 1][y := 2] x < y"]), "[;]", args.clone());
    assert_eq!(out[0].succ[0], f("[x := 1; y := 2] x < y"));
    let out = ok(&sq(&[], &["[a := 1] x > 0 & [a := 2] x > 0"]), "[++]", args.clone());
    assert_eq!(out[0].succ[0], f("[a := 1 ++ a := 2] x > 0"));
    assert!(matches!(run(&sq(&[], &["[a := 1] x > 0 -> x > 0"]), "[?]", args.clone()), Err(KernelError::NoMatch(_))));
    assert!(run(&sq(&[], &["x > 0"]), "[:=]", args).is_err());
}

#[test]
fn solution_axiom() {
    let goal = sq(&[], &["[{x' = v, v' = a}] x >= 0"]);
    let mut args = succ0();
    args.vars.push(Var::new("t"));
    args.terms = vec![parse_term("x + v*t + a*t^2/2").unwrap(), parse_term("v + a*t").unwrap()];
    let out = ok(&goal, "[']", args.clone());
    let g = &out[0].succ[0];
    assert!(matches!(g, Formula::Forall(..)), "{g}");
    let want = f("\\forall t (t >= 0 -> x + v*t + a*t^2/2 >= 0)");
    let got = rewrite_all_assignments(g);
    assert!(valid(Formula::equiv(got, want)));

    args.terms[0] = parse_term("x + v*t").unwrap();
    assert!(side_condition(run(&goal, "[']", args.clone())).contains("not a solution"));
    args.vars[0] = Var::new("x");
    assert!(side_condition(run(&goal, "[']", args)).contains("not fresh"));
}

fn rewrite_all_assignments(g: &Formula) -> Formula {
    let mut ps = ProofState::init(g.clone());
    loop {
        let goal = ps.open_goals()[0];
        let s = ps.goal(goal).unwrap().clone();
        let next = dl_core::tactics::positions(&s).into_iter().find_map(|(pos, _)| {
            ["[;]", "[:=]"]
                .iter()
                .find_map(|r| ps.apply(goal, Rule::new(r, Args::at(pos.clone())), &Budget::unlimited()).ok())
        });
        match next {
            Some(n) => ps = n,
            None => return s.succ[0].clone(),
        }
    }
}

#[test]
fn domain_clock_axiom() {
    let out = rewrite("[{x' = 1 & x <= 5}] x <= 5", "[&]", &[]);
    let text = out.to_string();
    assert!(text.contains("x'=-1"), "{text}");
    assert!(matches!(out, Formula::Forall(..)));
    let fresh = rewrite("[{x' = 2 & x <= 5}] x <= 5", "[&]", &[]);
    assert!(fresh.to_string().matches("\\forall").count() >= 2, "{fresh}");
}

#[test]
fn implication_axioms() {
    let k = rewrite("[x := 1] x > 0 -> [x := 1] x >= 0", "K", &[]);
    assert_eq!(k, f("[x := 1](x > 0 -> x >= 0)"));
    let i = rewrite("x > 0 -> [{x := x + 1}*] x > 0", "I", &[]);
    assert_eq!(i, f("[{x := x + 1}*](x > 0 -> [x := x + 1] x > 0)"));
    assert_eq!(rewrite("[x := 1] y > 0", "V", &[]), f("y > 0"));
    assert_eq!(rewrite("[x := 1] \\forall y y > x", "B", &[]), f("\\forall y [x := 1] y > x"));
    let c = rewrite("\\forall n (n = x -> <{x := x - 1}*> \\exists n (n <= 0 & n = x))", "C", &[]);
    assert!(c.to_string().contains("n - 1"), "{c}");
}

#[test]
fn implication_axioms_need_positive_positions() {
    let s = sq(&["[x := 1] y > 0"], &[]);
    assert!(matches!(run(&s, "V", at(Side::Ante, 0, &[])), Err(KernelError::Position(_))));
    let s = sq(&[], &["!([x := 1] y > 0)"]);
    assert!(matches!(run(&s, "V", at(Side::Succ, 0, &[0])), Err(KernelError::Position(_))));
    let s = sq(&[], &["!!([x := 1] y > 0)"]);
    assert!(run(&s, "V", at(Side::Succ, 0, &[0, 0])).is_ok());
}

#[test]
fn axiom_side_conditions() {
    assert!(side_condition(run(&sq(&[], &["[x := 1] x > 0"]), "V", succ0())).contains("x"));
    assert!(side_condition(run(&sq(&[], &["[y := 1] \\forall y y > 0"]), "B", succ0())).contains("y"));
    let capture = run(&sq(&[], &["[x := y] \\exists y x > y"]), "[:=]", succ0());
    assert!(side_condition(capture).contains("clashes"));
    assert!(matches!(run(&sq(&[], &["x > 0"]), "[;]", succ0()), Err(KernelError::NoMatch(_))));
    assert!(matches!(run(&sq(&[], &["x > 0"]), "[;]", Args::at(Position::succ(3))), Err(KernelError::Position(_))));
    assert!(matches!(run(&sq(&[], &["x > 0"]), "bogus", succ0()), Err(KernelError::UnknownRule(_))));
}

#[test]
fn propositional_rules() {
    assert_eq!(ok(&sq(&["a > 0 & b > 0"], &[]), "andL", Args::default()), vec![sq(&["a > 0", "b > 0"], &[])]);
    assert_eq!(ok(&sq(&[], &["a > 0 & b > 0"]), "andR", Args::default()), vec![sq(&[], &["a > 0"]), sq(&[], &["b > 0"])]);
    assert_eq!(ok(&sq(&["a > 0 | b > 0"], &[]), "orL", Args::default()), vec![sq(&["a > 0"], &[]), sq(&["b > 0"], &[])]);
    assert_eq!(ok(&sq(&[], &["a > 0 | b > 0"]), "orR", Args::default()), vec![sq(&[], &["a > 0", "b > 0"])]);
    assert_eq!(ok(&sq(&[], &["a > 0 -> b > 0"]), "impR", Args::default()), vec![sq(&["a > 0"], &["b > 0"])]);
    assert_eq!(
        ok(&sq(&["a > 0 -> b > 0"], &["c > 0"]), "impL", Args::default()),
        vec![sq(&[], &["c > 0", "a > 0"]), sq(&["b > 0"], &["c > 0"])]
    );
    assert_eq!(ok(&sq(&[], &["!(a > 0)"]), "notR", Args::default()), vec![sq(&["a > 0"], &[])]);
    assert_eq!(ok(&sq(&["!(a > 0)"], &[]), "notL", Args::default()), vec![sq(&[], &["a > 0"])]);
    assert_eq!(
        ok(&sq(&[], &["a > 0 <-> b > 0"]), "equivR", Args::default()),
        vec![sq(&["a > 0"], &["b > 0"]), sq(&["b > 0"], &["a > 0"])]
    );
    assert_eq!(
        ok(&sq(&["a > 0 <-> b > 0"], &[]), "equivL", Args::default()),
        vec![sq(&["a > 0", "b > 0"], &[]), sq(&[], &["a > 0", "b > 0"])]
    );
    assert_eq!(ok(&sq(&["a > 0"], &["b > 0"]), "hideL", Args::default()), vec![sq(&[], &["b > 0"])]);
    assert_eq!(ok(&sq(&["a > 0"], &["b > 0"]), "hideR", Args::at(Position::succ(0))), vec![sq(&["a > 0"], &[])]);
    assert!(matches!(run(&sq(&["a > 0 & b > 0"], &[]), "andR", Args::at(Position::ante(0))), Err(KernelError::Position(_))));
    assert!(run(&sq(&[], &["a > 0 | b > 0"]), "andR", Args::at(Position::succ(0))).is_err());
}

#[test]
fn quantifier_rules() {
    assert_eq!(ok(&sq(&[], &["\\forall x x^2 >= 0"]), "allR", Args::default()), vec![sq(&[], &["x^2 >= 0"])]);
    let renamed = ok(&sq(&["x > 0"], &["\\forall x x^2 >= 0"]), "allR", Args::default());
    assert_ne!(renamed[0].succ[0], f("x^2 >= 0"));
    assert!(!renamed[0].succ[0].to_string().contains("x^2"));
    assert_eq!(ok(&sq(&["\\exists y y > 0"], &[]), "existsL", Args::default()), vec![sq(&["y > 0"], &[])]);
    let t = Args::default().term(parse_term("3").unwrap());
    assert_eq!(
        ok(&sq(&["\\forall x x > 1"], &[]), "allL", t.clone()),
        vec![sq(&["\\forall x x > 1", "3 > 1"], &[])]
    );
    assert_eq!(
        ok(&sq(&[], &["\\exists x x > 1"]), "existsR", t),
        vec![sq(&[], &["\\exists x x > 1", "3 > 1"])]
    );
    let capture = Args::default().term(parse_term("y").unwrap());
    assert!(side_condition(run(&sq(&["\\forall x \\exists y x < y"], &[]), "allL", capture)).len() > 0);
}

#[test]
fn structural_rules() {
    let c = Args::default().formula(f("b > 0"));
    assert_eq!(ok(&sq(&["a > 0"], &["c > 0"]), "cut", c.clone()), vec![
        sq(&["a > 0"], &["c > 0", "b > 0"]),
        sq(&["a > 0", "b > 0"], &["c > 0"]),
    ]);
    assert!(ok(&sq(&["a > 0"], &["a > 0"]), "close", Args::default()).is_empty());
    assert!(ok(&sq(&["false"], &[]), "close", Args::default()).is_empty());
    assert!(side_condition(run(&sq(&["a > 0"], &["b > 0"]), "close", Args::default())).len() > 0);
    assert_eq!(ok(&sq(&[], &["c > 0"]), "MP", c), vec![sq(&[], &["b > 0 -> c > 0"]), sq(&[], &["b > 0"])]);
    assert_eq!(ok(&sq(&["a > 0"], &["[x := 1] x > 0"]), "G", Args::default()), vec![sq(&[], &["x > 0"])]);
}

#[test]
fn arithmetic_closing() {
    assert!(ok(&sq(&["x > 1"], &["x^2 > 1"]), "arith", Args::default()).is_empty());
    assert!(ok(&sq(&["b > 0", "v^2 <= 2*b*(m-x)"], &["x <= m"]), "arith", Args::default()).is_empty());
    match run(&sq(&["x > 0"], &["x > 1"]), "arith", Args::default()) {
        Err(KernelError::NotClosed(r)) => assert!(r.contains("x"), "{r}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn loop_rules() {
    let s = sq(&["x >= 1"], &["[{x := x + 1}*] x >= 0"]);
    assert_eq!(ok(&s, "ind", Args::default()), vec![
        sq(&["x >= 1"], &["x >= 0"]),
        sq(&["x >= 0"], &["[x := x + 1] x >= 0"]),
    ]);
    let j = Args::default().formula(f("x >= 1"));
    assert_eq!(ok(&s, "loop", j), vec![
        sq(&["x >= 1"], &["x >= 1"]),
        sq(&["x >= 1"], &["[x := x + 1] x >= 1"]),
        sq(&["x >= 1"], &["x >= 0"]),
    ]);
    let s = sq(&["x >= 0"], &["<{x := x - 1}*> x <= 0"]);
    let args = Args::default().formula(f("x <= n")).var(Var::new("n"));
    let out = ok(&s, "con", args);
    assert_eq!(out.len(), 3);
    assert_eq!(out[0], sq(&["x >= 0"], &["\\exists n x <= n"]));
    let bad = Args::default().formula(f("x <= x")).var(Var::new("x"));
    assert!(side_condition(run(&s, "con", bad)).contains("must not occur"));
}

#[test]
fn differential_invariant() {
    let s = sq(&["x^2 + y^2 >= p^2"], &["[{x' = y, y' = -x}] x^2 + y^2 >= p^2"]);
    let out = ok(&s, "DI", Args::default());
    assert_eq!(out.len(), 1);
    assert!(out[0].ante.is_empty());
    assert_eq!(out[0].succ[0].to_string(), "2*x*y + 2*y*(-x) >= 0");
    assert!(valid(out[0].succ[0].clone()));

    let s = sq(&[], &["[{x' = 1 & x >= 0}] x >= 0"]);
    let out = ok(&s, "DI", Args::default());
    assert_eq!(out.len(), 2);
    assert_eq!(out[0].ante, vec![f("x >= 0")]);
    assert_eq!(out[1], sq(&[], &["x >= 0"]));

    let modal = sq(&[], &["[{x' = 1}] [x := 1] x > 0"]);
    assert!(side_condition(run(&modal, "DI", Args::default())).contains("DI"));
}

#[test]
fn differential_cut_and_weakening() {
    let s = sq(&["x > 0"], &["[{x' = y}] x > 0"]);
    let out = ok(&s, "DC", Args::default().formula(f("y >= 0")));
    assert_eq!(out, vec![sq(&["x > 0"], &["[{x' = y}] y >= 0"]), sq(&["x > 0"], &["[{x' = y & y >= 0}] x > 0"])]);
    let s2 = sq(&[], &["[{x' = y & x > 1}] x > 0"]);
    let out = ok(&s2, "DC", Args::default().formula(f("y >= 0")));
    assert_eq!(out[1], sq(&[], &["[{x' = y & x > 1 & y >= 0}] x > 0"]));
    assert!(side_condition(run(&s, "DC", Args::default().formula(f("[x := 1] x > 0")))).contains("first-order"));
    assert_eq!(ok(&s2, "DW", Args::default()), vec![sq(&["x > 1"], &["x > 0"])]);
}

#[test]
fn differential_variant() {
    let s = sq(&[], &["<{x' = a}> x >= b"]);
    let out = ok(&s, "DV", Args::default());
    assert_eq!(out.len(), 1);
    let premise = &out[0].succ[0];
    let residual = dl_core::arith::qe(premise).unwrap();
    assert!(valid(Formula::equiv(residual, f("a > 0"))), "{premise}");

    let eq = sq(&[], &["<{x' = 1}> x = 5"]);
    assert!(side_condition(run(&eq, "DV", Args::default())).contains("F may not contain equalities"));
    let nonlinear = sq(&[], &["<{x' = x^2}> x >= 5"]);
    assert!(side_condition(run(&nonlinear, "DV", Args::default())).contains("affine"));
    let dom = sq(&[], &["<{x' = 1 & x <= 10}> x >= 5"]);
    assert_eq!(ok(&dom, "DV", Args::default()).len(), 2);
}

#[test]
fn differential_ghost() {
    let s = sq(&["x > 0"], &["[{x' = -x}] x > 0"]);
    let args = Args::default().var(Var::new("y")).term(parse_term("y/2").unwrap()).formula(f("x*y^2 = 1"));
    let out = ok(&s, "DA", args);
    assert_eq!(out.len(), 2);
    assert_eq!(out[0], sq(&[], &["x > 0 <-> \\exists y x*y^2 = 1"]));
    assert_eq!(out[1], sq(&["x*y^2 = 1"], &["[{x' = -x, y' = y/2}] x*y^2 = 1"]));
    let bad = Args::default().var(Var::new("y")).term(parse_term("y^2").unwrap()).formula(f("x*y^2 = 1"));
    assert!(side_condition(run(&s, "DA", bad)).contains("linear"));
    let taken = Args::default().var(Var::new("x")).term(parse_term("x").unwrap()).formula(f("x > 0"));
    assert!(side_condition(run(&s, "DA", taken)).contains("fresh"));
}

fn closed_ghost_proof() -> ProofState {
    let goal = f("x > 0 -> [{x' = -x}] x > 0");
    let b = Budget::unlimited();
    let ps = ProofState::init(goal);
    let ps = ps.apply(0, Rule::new("impR", Args::default()), &b).unwrap();
    let args = Args::default().var(Var::new("y")).term(parse_term("y/2").unwrap()).formula(f("x*y^2 = 1"));
    let ps = ps.apply(1, Rule::new("DA", args), &b).unwrap();
    let mut ps = ps;
    for g in ps.open_goals() {
        let s = ps.goal(g).unwrap().clone();
        if s.succ[0].to_string().starts_with('[') {
            ps = ps.apply(g, Rule::new("DI", Args::default()), &b).unwrap();
        }
    }
    for g in ps.open_goals() {
        ps = ps.apply(g, Rule::new("arith", Args::default()), &b).unwrap();
    }
    assert!(ps.is_proved());
    ps
}

#[test]
fn proof_states_replay() {
    let ps = closed_ghost_proof();
    check_proof(&ps).unwrap();
    let text = to_dlp(&ps);
    assert_eq!(check_dlp(&text).unwrap(), ps.conjecture);

    let mut forged = ps.clone();
    let last = forged.nodes.len() - 1;
    forged.nodes[last].sequent = sq(&[], &["x > 1"]);
    assert!(check_proof(&forged).is_err());

    let mut orphan = ps.clone();
    orphan.nodes[last].parent = Some(0);
    assert!(check_proof(&orphan).is_err());

    let open = ProofState::init(f("x > 0 -> x > 0"));
    assert_eq!(check_proof(&open).unwrap_err().reason, "open goal");
}

#[test]
fn tampered_proof_files_are_rejected() {
    let text = to_dlp(&closed_ghost_proof());
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let tamper = |edit: &dyn Fn(&mut serde_json::Value)| {
        let mut d = doc.clone();
        edit(&mut d);
        check_dlp(&d.to_string())
    };
    assert!(tamper(&|d| d["conjecture"] = "x > 0 -> [{x'=-x}] x > 1".into()).is_err());
    assert!(tamper(&|d| d["nodes"][1]["rule"]["name"] = "DW".into()).is_err());
    assert!(tamper(&|d| d["nodes"][1]["rule"]["terms"][0] = "y/3".into()).is_err());
    assert!(tamper(&|d| d["nodes"][3]["rule"]["name"] = "DW".into()).is_err());
    assert!(tamper(&|d| d["nodes"][1]["rule"]["terms"][0] = "y^2".into()).is_err());
    assert!(tamper(&|d| {
        let n = d["nodes"].as_array_mut().unwrap();
        n.pop();
    })
    .is_err());
    assert!(tamper(&|d| d["nodes"][3]["sequent"]["succ"][0] = "true".into()).is_err());
    assert!(tamper(&|d| d["format"] = "dlp/0".into()).is_err());
    assert!(check_dlp("{").is_err());
}
