mod run {
    use dl_core::sim::*;
    use dl_core::syntax::*;
    use dl_core::parser::parse_program;

    fn state(pairs: &[(&str, f64)]) -> State {
        pairs.iter().map(|(x, v)| (Var::new(x), *v)).collect()
    }

    #[test]
    fn failed_test_has_no_runs() {
        let p = parse_program("?false; x:=1").unwrap();
        assert!(run(&p, &state(&[("x", 0.0)]), &SimConfig::default()).finals.is_empty());
    }

    #[test]
    fn braking_stays_on_parabola() {
        let p = parse_program("a:=-b; {x'=v, v'=a & v>=0}").unwrap();
        let runs = run(&p, &state(&[("x", 0.0), ("v", 1.0), ("b", 1.0), ("a", 0.0)]), &SimConfig::default());
        let mut max_x: f64 = 0.0;
        for (s, trace) in &runs.finals {
            let t = trace.last().unwrap().time;
            assert!((s[&Var::new("x")] - (t - t * t / 2.0)).abs() < 1e-6);
            max_x = max_x.max(s[&Var::new("x")]);
        }
        assert!((max_x - 0.5).abs() < 1e-6);
    }
}

mod reach {
    use dl_core::sim::*;
    use dl_core::syntax::*;
    use std::collections::{BTreeMap, BTreeSet};
    use dl_core::arith::poly::rat;
    use dl_core::parser::parse_program;

    fn st(x: i64) -> ExactState {
        BTreeMap::from([(Var::new("x"), rat(x))])
    }

    #[test]
    fn choice_and_loop() {
        let p = parse_program("x:=1 ++ x:=2").unwrap();
        assert_eq!(discrete_reach(&p, &st(0), 3, 100).unwrap(), BTreeSet::from([st(1), st(2)]));
        let p = parse_program("{x:=x+1}*").unwrap();
        assert_eq!(discrete_reach(&p, &st(0), 3, 100).unwrap(), BTreeSet::from([st(0), st(1), st(2), st(3)]));
    }

    #[test]
    fn while_loop() {
        let p = parse_program("while (x >= 0) { x := x - 1 }").unwrap();
        assert_eq!(discrete_reach(&p, &st(2), 10, 100).unwrap(), BTreeSet::from([st(-1)]));
    }
}

mod falsification {
    use dl_core::kernel::ProofState;
    use dl_core::parser::{parse_formula, parse_problem};
    use dl_core::sim::{falsify, replay, Falsified, SimConfig};
    use dl_core::syntax::Var;
    use dl_core::tactics::{auto, di_prove, AutoConfig};

    fn problem(name: &str) -> dl_core::syntax::Formula {
        let path = format!("{}/../../problems/{name}", env!("CARGO_MANIFEST_DIR"));
        parse_problem(&std::fs::read_to_string(path).unwrap()).unwrap().conjecture()
    }

    #[test]
    fn nonzero_flow_is_refuted() {
        let f = problem("nonzero.dl");
        let cfg = SimConfig::default();
        let Falsified::Counterexample(cex) = falsify(&f, &cfg) else { panic!("no counterexample") };
        assert!(cex.margin > 1e-3, "{cex:?}");
        assert!(cex.initial[&Var::new("x")] < 0.0);
        let again = replay(&f, &cex, &cfg).expect("replays at half step");
        assert!(again > 1e-3);
        let fine = SimConfig { h: cfg.h / 4.0, ..cfg.clone() };
        assert!(replay(&f, &cex, &fine).is_some());
    }

    #[test]
    fn nonzero_flow_is_not_provable() {
        let f = problem("nonzero.dl");
        let ps = ProofState::init(f);
        let cfg = AutoConfig::default();
        assert!(!auto(&ps, &cfg).is_proved());
        let ps = ps.apply(0, dl_core::kernel::Rule::new("impR", Default::default()), &Default::default()).unwrap();
        assert!(di_prove(&ps, 1, None, &cfg).is_err());
        let inv = parse_formula("x != 0").unwrap();
        assert!(di_prove(&ps, 1, Some(&inv), &cfg).is_err());
    }

    #[test]
    fn valid_conjectures_survive() {
        for name in ["braking.dl", "velocity.dl", "rotational.dl"] {
            let cfg = SimConfig { samples: 200, ..SimConfig::default() };
            assert!(matches!(falsify(&problem(name), &cfg), Falsified::Unknown { .. }), "{name}");
        }
    }

    #[test]
    fn same_seed_same_counterexample() {
        let f = problem("braking_noassume.dl");
        let cfg = SimConfig { seed: 7, ..SimConfig::default() };
        let (Falsified::Counterexample(a), Falsified::Counterexample(b)) = (falsify(&f, &cfg), falsify(&f, &cfg)) else {
            panic!("expected counterexamples")
        };
        assert_eq!(a.initial, b.initial);
        assert_eq!(a.margin, b.margin);
    }

    #[test]
    fn refuted_corpus_entries_are_never_proved() {
        let dir = format!("{}/../../problems", env!("CARGO_MANIFEST_DIR"));
        let mut refuted = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_none_or(|e| e != "dl") {
                continue;
            }
            let f = parse_problem(&std::fs::read_to_string(&path).unwrap()).unwrap().conjecture();
            let cfg = SimConfig { samples: 100, ..SimConfig::default() };
            if let Falsified::Counterexample(_) = falsify(&f, &cfg) {
                refuted += 1;
                let cfg = AutoConfig {
                    deadline: Some(std::time::Instant::now() + std::time::Duration::from_secs(10)),
                    ..AutoConfig::default()
                };
                assert!(!auto(&ProofState::init(f), &cfg).is_proved(), "{}", path.display());
            }
        }
        assert!(refuted >= 2);
    }
}
