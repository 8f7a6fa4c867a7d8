use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use abc_core::attributes::{fingerprint, restrict_predicate, satisfies, semantically_equiv, update_env};
use abc_core::component::{deliver, output_steps};
use abc_core::explorer::{build_lts, normalize_extrusion, LabelCanon};
use abc_core::names::canonical_system;
use abc_core::system::system_steps;
use abc_core::*;

const ATTRS: [&str; 3] = ["a", "b", "c"];
const NAMES: [&str; 4] = ["x", "m", "n", "k"];

fn value() -> impl Strategy<Value = Value> {
    let leaf = prop_oneof![
        (-3i64..6).prop_map(Value::Int),
        prop::sample::select(NAMES.to_vec()).prop_map(Value::name),
        any::<bool>().prop_map(Value::Bool),
    ];
    leaf.prop_recursive(2, 6, 3, |inner| prop::collection::vec(inner, 0..3).prop_map(Value::Tuple))
}

fn env() -> impl Strategy<Value = AttributeEnv> {
    prop::collection::btree_map(prop::sample::select(ATTRS.to_vec()).prop_map(Sym::new), value(), 0..4)
}

fn atom() -> impl Strategy<Value = Expression> {
    prop_oneof![prop::sample::select(ATTRS.to_vec()).prop_map(Expression::attr), value().prop_map(Expression::Lit),]
}

fn cmp_op() -> impl Strategy<Value = CmpOp> {
    prop::sample::select(vec![CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge])
}

fn predicate_with(negation: bool) -> impl Strategy<Value = Predicate> {
    let leaf = prop_oneof![
        Just(Predicate::True),
        Just(Predicate::False),
        (cmp_op(), atom(), atom()).prop_map(|(op, l, r)| Predicate::cmp(op, l, r)),
    ];
    leaf.prop_recursive(3, 16, 2, move |inner| {
        let and = (inner.clone(), inner.clone()).prop_map(|(l, r)| Predicate::and(l, r));
        let or = (inner.clone(), inner.clone()).prop_map(|(l, r)| Predicate::or(l, r));
        if negation {
            prop_oneof![and, or, inner.prop_map(Predicate::not)].boxed()
        } else {
            prop_oneof![and, or].boxed()
        }
    })
}

fn predicate() -> impl Strategy<Value = Predicate> {
    predicate_with(true)
}

fn replace(v: &Value, x: &Sym, by: &Value) -> Value {
    match v {
        Value::Name(n) if n == x => by.clone(),
        Value::Tuple(items) => Value::Tuple(items.iter().map(|i| replace(i, x, by)).collect()),
        other => other.clone(),
    }
}

fn fresh_value() -> impl Strategy<Value = Value> {
    (0..4u8).prop_map(|i| Value::name(&format!("v#{i}")))
}

fn seeded() -> impl Strategy<Value = ChaCha8Rng> {
    any::<u64>().prop_map(ChaCha8Rng::seed_from_u64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn restricted_satisfaction_ignores_the_restricted_name(
        pi in predicate(),
        x in prop::sample::select(NAMES.to_vec()).prop_map(Sym::new),
        gamma in env(),
        v in fresh_value(),
    ) {
        let restricted = restrict_predicate(&pi, &x);
        let renamed: AttributeEnv = gamma.iter().map(|(a, val)| (a.clone(), replace(val, &x, &v))).collect();
        prop_assert_eq!(satisfies(&gamma, &restricted), satisfies(&renamed, &restricted));
    }
}

#[test]
fn restricted_satisfaction_depends_on_the_replacement_being_new() {
    let pi = parse_predicate("a = 'v'").unwrap();
    let x = Sym::new("x");
    let restricted = restrict_predicate(&pi, &x);
    assert_eq!(restricted, pi);
    let gamma = env_of(&[("a", Value::name("x"))]);
    let renamed = env_of(&[("a", Value::name("v"))]);
    assert!(!satisfies(&gamma, &restricted));
    assert!(satisfies(&renamed, &restricted));

    let pi = parse_predicate("a = b").unwrap();
    let gamma = env_of(&[("a", Value::name("x")), ("b", Value::name("v"))]);
    let renamed = env_of(&[("a", Value::name("v")), ("b", Value::name("v"))]);
    assert!(!satisfies(&gamma, &pi));
    assert!(satisfies(&renamed, &pi));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn semantic_equivalence_is_an_equivalence(p in predicate(), q in predicate()) {
        let p2 = Predicate::not(Predicate::not(p.clone()));
        let p3 = Predicate::and(p2.clone(), Predicate::True);
        let u = Universe::for_predicates([&p, &q]);
        prop_assert!(semantically_equiv(&p, &p, &u).unwrap());
        prop_assert_eq!(semantically_equiv(&p, &q, &u).unwrap(), semantically_equiv(&q, &p, &u).unwrap());
        prop_assert!(semantically_equiv(&p, &p2, &u).unwrap());
        prop_assert!(semantically_equiv(&p2, &p3, &u).unwrap());
        prop_assert!(semantically_equiv(&p, &p3, &u).unwrap());
        if semantically_equiv(&p, &q, &u).unwrap() {
            prop_assert!(semantically_equiv(&q, &p3, &u).unwrap());
        }
    }

    #[test]
    fn restriction_is_idempotent(p in predicate(), x in prop::sample::select(NAMES.to_vec()).prop_map(Sym::new)) {
        let once = restrict_predicate(&p, &x);
        let twice = restrict_predicate(&once, &x);
        prop_assert_eq!(&once, &twice);
        let u = Universe::for_predicates([&p]);
        prop_assert!(semantically_equiv(&once, &twice, &u).unwrap());
    }

    #[test]
    fn restriction_weakens_negation_free_predicates(
        p in predicate_with(false),
        x in prop::sample::select(NAMES.to_vec()).prop_map(Sym::new),
    ) {
        let r = restrict_predicate(&p, &x);
        let u = Universe::for_predicates([&p]);
        let fr = fingerprint(&r, &u).unwrap();
        let fp = fingerprint(&p, &u).unwrap();
        for (a, b) in fr.iter().zip(fp.iter()) {
            prop_assert!(!*a || *b);
        }
    }

    #[test]
    fn printing_then_parsing_is_the_identity(mut rng in seeded()) {
        let p = generate::program(&mut rng);
        let text = p.to_string();
        let back = parse_program(&text);
        prop_assert!(back.is_ok(), "{:?}\n{}", back, text);
        prop_assert_eq!(back.unwrap(), p);
    }

    #[test]
    fn substitution_only_introduces_range_names(
        mut rng in seeded(),
        sigma in prop::collection::btree_map(prop::sample::select(vec!["p", "q", "x"]).prop_map(Sym::new), value(), 0..3),
    ) {
        let p = generate::program(&mut rng);
        for d in p.definitions.values() {
            let body = &d.body;
            let out = body.substitute(&sigma);
            let mut allowed: BTreeSet<Sym> = body.free_names().into_iter().filter(|n| !sigma.contains_key(n)).collect();
            for v in sigma.values() {
                v.collect_names(&mut allowed);
            }
            prop_assert!(out.free_names().is_subset(&allowed));
            prop_assert_eq!(out.bound_names(), body.bound_names());
        }
    }

    #[test]
    fn delivery_never_invents_names(mut rng in seeded()) {
        let (env, proc) = generate::component(&mut rng, 3);
        let msg = generate::message(&mut rng);
        if let Ok(Delivery::Receives(outcomes)) = deliver(&env, &proc, &Definitions::new(), &msg, &mut rng) {
            prop_assert!(!outcomes.is_empty());
            let mut allowed = proc.free_names();
            for v in &msg.values {
                v.collect_names(&mut allowed);
            }
            for (_, q) in outcomes {
                prop_assert!(q.free_names().is_subset(&allowed), "{} -> {}", proc, q);
            }
        }
    }

    #[test]
    fn messages_for_nobody_are_discarded(mut rng in seeded()) {
        let (env, proc) = generate::component(&mut rng, 3);
        let mut msg = generate::message(&mut rng);
        msg.pred = Predicate::False;
        prop_assert!(deliver(&env, &proc, &Definitions::new(), &msg, &mut rng).unwrap().is_discard());
    }

    #[test]
    fn updates_are_taken_with_the_next_output(mut rng in seeded()) {
        let (env, proc) = generate::component(&mut rng, 3);
        let assigns = vec![(Sym::new("a"), Expression::int(7)), (Sym::new("b"), Expression::this("a"))];
        let Some(b) = env.get(&Sym::new("a")).cloned() else { return Ok(()) };
        let updated = update_env(&env, &[(Sym::new("a"), Value::Int(7)), (Sym::new("b"), b)]);
        let defs = Definitions::new();
        let lhs = output_steps(&env, &Process::upd(assigns, proc.clone()), &defs, &mut ChaCha8Rng::seed_from_u64(1));
        let rhs = output_steps(&updated, &proc, &defs, &mut ChaCha8Rng::seed_from_u64(1));
        match (lhs, rhs) {
            (Ok(l), Ok(r)) => prop_assert_eq!(l, r),
            (l, r) => prop_assert_eq!(l.is_err(), r.is_err()),
        }
    }
}

fn changed_components(before: &System, after: &System) -> usize {
    let b = before.components();
    let a = after.components();
    assert_eq!(a.len(), b.len());
    b.iter().zip(&a).filter(|(x, y)| x != y).count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn silent_steps_change_only_the_sender(mut rng in seeded()) {
        let sys = generate::flat_system(&mut rng, 3, 2);
        let u = Universe::for_system(&sys, &Definitions::new(), &BTreeSet::new());
        if let Ok(steps) = system_steps(&sys, &Definitions::new(), &u, &StepOptions::default()) {
            for (l, t) in steps {
                let changed = changed_components(&sys, &t);
                if l == SystemLabel::Tau {
                    prop_assert!(changed <= 1, "{} -> {}", sys, t);
                }
            }
        }
    }

    #[test]
    fn exploration_is_deterministic_sound_and_complete(mut rng in seeded()) {
        let sys = generate::flat_system(&mut rng, 2, 2);
        let defs = Definitions::new();
        let u = Universe::for_system(&sys, &defs, &BTreeSet::new());
        let opts = ExploreOptions { bounds: Bounds { max_states: 300, max_depth: 6 }, ..Default::default() };
        let Ok(a) = build_lts(&sys, &defs, &u, &opts) else { return Ok(()) };
        let b = build_lts(&sys, &defs, &u, &opts).unwrap();
        prop_assert_eq!(a.to_text(), b.to_text());
        let mut canon = LabelCanon::new(&u);
        for (id, s) in a.states.iter().enumerate() {
            let mut expected = BTreeSet::new();
            for (l, t) in system_steps(s, &defs, &u, &opts.step).unwrap() {
                let (l, t) = normalize_extrusion(s, l, t);
                expected.insert((canon.canonical(&l).unwrap(), canonical_system(&t)));
            }
            let recorded: BTreeSet<_> =
                a.successors(id).map(|t| (t.key.clone(), a.states[t.dst].clone())).collect();
            prop_assert!(recorded.is_subset(&expected));
            if a.truncated.is_none() {
                prop_assert_eq!(&recorded, &expected);
            }
        }
    }

    #[test]
    fn strong_equivalence_implies_weak(mut rng in seeded()) {
        let s1 = generate::flat_system(&mut rng, 2, 2);
        let s2 = generate::flat_system(&mut rng, 2, 2);
        let (p1, p2) = (Program::new(s1), Program::new(s2));
        let opts = ExploreOptions { bounds: Bounds { max_states: 300, max_depth: 8 }, ..Default::default() };
        let Ok(strong) = equivalence::compare_programs(&p1, &p2, Mode::Strong, &opts, 8) else { return Ok(()) };
        let weak = equivalence::compare_programs(&p1, &p2, Mode::Weak, &opts, 8).unwrap();
        if strong.verdict.is_equivalent() && !strong.bounded {
            prop_assert!(weak.verdict.is_equivalent());
        }
        let same = equivalence::compare_programs(&p1, &p1, Mode::Strong, &opts, 8).unwrap();
        prop_assert!(same.verdict.is_equivalent());
    }

    #[test]
    fn bisimilar_states_show_the_same_barbs(mut rng in seeded()) {
        let sys = generate::flat_system(&mut rng, 2, 2);
        let defs = Definitions::new();
        let u = Universe::for_system(&sys, &defs, &BTreeSet::new());
        let opts = ExploreOptions { bounds: Bounds { max_states: 300, max_depth: 8 }, ..Default::default() };
        let Ok(lts) = build_lts(&sys, &defs, &u, &opts) else { return Ok(()) };
        for (mode, weak) in [(Mode::Strong, false), (Mode::Weak, true)] {
            for block in equivalence::classes(&lts, mode).values() {
                let first = equivalence::barbs(&lts, block[0], weak);
                for &s in &block[1..] {
                    prop_assert_eq!(&equivalence::barbs(&lts, s, weak), &first);
                }
            }
        }
    }
}
