mod common;

use pedal_core::dsl::{self, render};
use pedal_core::equivalence::{self, branching_bisim, strong_bisim, Kind};
use pedal_core::lts::{Label, Lts};
use pedal_core::mbt::{run_test, LocalAdapter, Mutation, Sut, TesterConfig, Verdict};
use pedal_core::mucalc::{parse_formula, satisfying_states};
use pedal_core::process_ir::build_lts_compiled;
use pedal_core::semantics::{build_lts, eval_guard, eval_stmts, initial_state, step_input, Mode};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_lts(seed: u64) -> Lts {
    common::random_lts(&mut rng(seed), 8, &common::labels_abt()).with_actions(vec!["a".into(), "b".into()])
}

fn sat(lts: &Lts, text: &str) -> Vec<bool> {
    satisfying_states(lts, &parse_formula(text).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn render_then_parse_is_identity(seed in any::<u64>()) {
        let m = common::random_model(&mut rng(seed));
        let text = render(&m);
        let back = dsl::load(&text).unwrap();
        prop_assert_eq!(back.ast(), m.ast());
        prop_assert_eq!(render(&back), text);
    }

    #[test]
    fn empty_body_leaves_state_alone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = common::random_model(&mut r);
        let s = common::random_state(&mut r, &m);
        prop_assert_eq!(eval_stmts(&[], &s), s);
    }

    #[test]
    fn body_splits_at_any_point(seed in any::<u64>(), cut in 0usize..6) {
        let mut r = rng(seed);
        let m = common::random_model(&mut r);
        let s = common::random_state(&mut r, &m);
        let body = common::random_stmts(&mut r, &m);
        let cut = cut.min(body.len());
        let (head, tail) = body.split_at(cut);
        prop_assert_eq!(eval_stmts(&body, &s), eval_stmts(tail, &eval_stmts(head, &s)));
    }

    #[test]
    fn disabled_input_is_rejected(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = common::random_model(&mut r);
        let s = common::random_state(&mut r, &m);
        for rule in m.rules() {
            let next = step_input(&m, &s, &rule.action);
            if eval_guard(&rule.guard, &s) {
                prop_assert_eq!(next.unwrap(), eval_stmts(&rule.do_clause, &s));
            } else {
                prop_assert!(next.is_err());
            }
        }
    }

    #[test]
    fn compiled_matches_reference(seed in any::<u64>()) {
        let m = common::random_model_with(&mut rng(seed), 0.4);
        let r = build_lts(&m, Mode::Reference).unwrap();
        let c = build_lts_compiled(&m).unwrap();
        prop_assert!(strong_bisim(&r, &c).equivalent);
    }

    #[test]
    fn tau_mode_is_branching_equal(seed in any::<u64>()) {
        let m = common::random_model_with(&mut rng(seed), 0.5);
        let r = build_lts(&m, Mode::Reference).unwrap();
        let t = build_lts(&m, Mode::TauConditional).unwrap();
        prop_assert!(branching_bisim(&r, &t).equivalent);
        let has_tau = t.transitions().iter().any(|x| x.label.is_tau());
        prop_assert_eq!(strong_bisim(&r, &t).equivalent, !has_tau);
    }

    #[test]
    fn lts_alternates_phases(seed in any::<u64>()) {
        let m = common::random_model(&mut rng(seed));
        let l = build_lts(&m, Mode::Reference).unwrap();
        let succ = l.successors();
        for t in l.transitions() {
            let after_input = matches!(t.label, Label::Input(_));
            for (next, _) in &succ[t.to] {
                prop_assert_eq!(after_input, matches!(next, Label::Output(..)));
            }
        }
        // Output states have exactly one successor.
        for t in l.transitions().iter().filter(|t| matches!(t.label, Label::Input(_))) {
            prop_assert_eq!(succ[t.to].len(), 1);
        }
    }

    #[test]
    fn aut_round_trip(seed in any::<u64>()) {
        let l = small_lts(seed);
        let text = l.to_aut();
        let back = Lts::from_aut(&text).unwrap();
        prop_assert_eq!(back.to_aut(), text);
        prop_assert!(strong_bisim(&l, &back).equivalent);
    }

    #[test]
    fn refinement_agrees_with_brute_force(seed in any::<u64>(), variant in 0u8..3) {
        let mut r = rng(seed);
        let a = common::random_lts(&mut r, 6, &common::labels_abt());
        let b = match variant {
            0 => common::random_lts(&mut r, 6, &common::labels_abt()),
            1 => common::shuffled_copy(&mut r, &a, false),
            _ => common::shuffled_copy(&mut r, &a, true),
        };
        for (kind, branching) in [(Kind::Strong, false), (Kind::Branching, true)] {
            let res = equivalence::equivalent(&a, &b, kind);
            prop_assert_eq!(res.equivalent, common::brute_force_bisimilar(&a, &b, branching));
            if kind == Kind::Strong {
                if let Some(c) = &res.counterexample {
                    prop_assert!(common::strong_counterexample_valid(&a, &b, c));
                }
            }
        }
        if variant == 1 {
            prop_assert!(strong_bisim(&a, &b).equivalent);
        }
        if variant != 0 {
            prop_assert!(branching_bisim(&a, &b).equivalent);
        }
    }

    #[test]
    fn quotient_is_equivalent_and_minimal(seed in any::<u64>()) {
        let l = small_lts(seed);
        for kind in [Kind::Strong, Kind::Branching] {
            let q = equivalence::quotient(&l, kind);
            prop_assert!(equivalence::equivalent(&l, &q, kind).equivalent);
            let again = equivalence::quotient(&q, kind);
            prop_assert_eq!(again.num_states(), q.num_states());
        }
    }

    #[test]
    fn modalities_are_dual(seed in any::<u64>()) {
        let l = small_lts(seed);
        for act in ["a", "b", "tau", "true"] {
            let dia = sat(&l, &format!("<{act}>true"));
            let boxf = sat(&l, &format!("[{act}]false"));
            for s in 0..l.num_states() {
                prop_assert_ne!(dia[s], boxf[s]);
            }
        }
    }

    #[test]
    fn fixpoints_bracket_reachability(seed in any::<u64>()) {
        let l = small_lts(seed);
        prop_assert!(sat(&l, "nu X. X").iter().all(|&b| b));
        prop_assert!(sat(&l, "mu X. X").iter().all(|&b| !b));
        let reach_b = sat(&l, "mu X. (<b>true || <true>X)");
        let box_star = sat(&l, "[true*]<b>true");
        let never_b = sat(&l, "[true*][b]false");
        for s in 0..l.num_states() {
            // Everything reachable can do b, so some path reaches b unless
            // the state is a deadlock.
            if box_star[s] {
                prop_assert!(reach_b[s]);
            }
            prop_assert!(!(reach_b[s] && never_b[s]));
        }
    }

    #[test]
    fn deadlock_freedom_matches_scan(seed in any::<u64>()) {
        let l = small_lts(seed);
        let holds = sat(&l, "[true*]<true>true")[l.initial()];
        prop_assert_eq!(holds, common::deadlock_free_by_scan(&l));
    }

    #[test]
    fn clean_sut_never_fails(seed in any::<u64>(), tester_seed in any::<u64>()) {
        let m = common::random_model(&mut rng(seed));
        let mut adapter = LocalAdapter::new(Sut::new(&m, &Mutation::None).unwrap());
        let cfg = TesterConfig { seed: tester_seed, max_steps: 200, ..Default::default() };
        let v = run_test(&m, &mut adapter, &cfg);
        // A model with no enabled input at the start stops early.
        prop_assert!(!v.is_fail(), "{:?}", v);
        if let Verdict::Inconclusive { reason, .. } = &v {
            prop_assert!(reason.contains("enabled"), "{}", reason);
        }
    }

    #[test]
    fn initial_state_is_declared_values(seed in any::<u64>()) {
        let m = common::random_model(&mut rng(seed));
        let s = initial_state(&m);
        for (name, v) in m.bool_vars() {
            prop_assert_eq!(s.bvals[name], *v);
        }
        for (name, v) in m.plane_vars() {
            prop_assert_eq!(s.pvals[name], *v);
        }
    }
}
