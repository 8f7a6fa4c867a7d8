//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the target exits with failure if any criterion fails.

use std::collections::BTreeSet;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use abc_core::attributes::{fingerprint, restrict_predicate, satisfies};
use abc_core::bpi::{correspondence_check, parse_bpi};
use abc_core::component::{deliver, output_steps};
use abc_core::equivalence::{compare_programs, congruence_sample, DEFAULT_MESSAGE_CAP};
use abc_core::explorer::{build_lts, reachable, replay, some_component_has};
use abc_core::system::{external_input_steps, system_steps};
use abc_core::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn load(name: &str) -> Program {
    parse_program(&fs::read_to_string(corpus().join(name)).unwrap()).unwrap()
}

fn files(dir: &Path, ext: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .collect();
    v.sort();
    v
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn name(s: &str) -> Value {
    Value::name(s)
}

fn component(sys: &System, i: usize) -> (AttributeEnv, Process) {
    let c = sys.components();
    (c[i].0.clone(), c[i].1.clone())
}

fn golden_transition() -> Outcome {
    let p = load("running.abc");
    let (env, proc) = component(&p.main, 0);
    ensure(env.get(&Sym::new("id")) == Some(&Value::Int(1)), || "first robot is not id 1".into())?;
    ensure(env.get(&Sym::new("victimPerceived")) == Some(&Value::Bool(true)), || "victim not perceived".into())?;
    let steps =
        output_steps(&env, &proc, &p.definitions, &mut ChaCha8Rng::seed_from_u64(0)).map_err(|e| e.to_string())?;
    ensure(steps.len() == 2, || format!("{} output steps", steps.len()))?;
    let query = parse_predicate("role = 'rescuer' or role = 'helping'").unwrap();
    let u = Universe::for_predicates(steps.iter().map(|s| &s.msg.pred).chain([&query]));
    let ff = fingerprint(&Predicate::False, &u).unwrap();
    let query = fingerprint(&query, &u).unwrap();
    let silent =
        steps.iter().find(|s| fingerprint(&s.msg.pred, &u).unwrap() == ff).ok_or("no send on a false predicate")?;
    ensure(silent.msg.values.is_empty(), || "silent send carries values".into())?;
    ensure(silent.env.get(&Sym::new("state")) == Some(&name("stop")), || {
        format!("state after update: {:?}", silent.env)
    })?;
    let ask = steps.iter().find(|s| fingerprint(&s.msg.pred, &u).unwrap() == query).ok_or("no query output")?;
    ensure(ask.msg.values == vec![Value::Int(1), name("qry"), name("explorer")], || format!("{:?}", ask.msg.values))?;
    Ok(format!("ff-send with state := 'stop', and {} ({})", ask.msg.pred, "1, 'qry', 'explorer'"))
}

fn golden_discard() -> Outcome {
    let p = load("running.abc");
    let u = Universe::for_program(&p);
    let (env, proc) = component(&p.main, 1);
    ensure(env.get(&Sym::new("role")) == Some(&name("explorer")), || "second robot is not an explorer".into())?;
    let msg = Message::new(parse_predicate("role = 'explorer'").unwrap(), vec![name("info")]);
    let d = deliver(&env, &proc, &p.definitions, &msg, &mut ChaCha8Rng::seed_from_u64(0)).map_err(|e| e.to_string())?;
    ensure(d.is_discard(), || format!("{d:?}"))?;
    let alone = System::comp(env, proc);
    let after =
        external_input_steps(&alone, &p.definitions, &u, &msg, &StepOptions::default()).map_err(|e| e.to_string())?;
    ensure(after.iter().all(|s| *s == alone), || format!("component changed: {after:?}"))?;
    Ok(format!("discarded; {} resulting term(s), all identical to the input", after.len()))
}

fn golden_system_step() -> Outcome {
    let p = load("running.abc");
    let u = Universe::for_program(&p);
    let opts = StepOptions::default();
    let start = &p.main;
    let (rescue_label, rescuer) = system_steps(start, &p.definitions, &u, &opts)
        .map_err(|e| e.to_string())?
        .into_iter()
        .find(|(l, s)| *l == SystemLabel::Tau && component(s, 0).0.get(&Sym::new("role")) == Some(&name("rescuer")))
        .ok_or("first robot cannot become a rescuer")?;
    let query = vec![Value::Int(2), name("qry"), name("explorer")];
    let (label, after) = system_steps(&rescuer, &p.definitions, &u, &opts)
        .map_err(|e| e.to_string())?
        .into_iter()
        .find(|(l, _)| matches!(l, SystemLabel::Out { values, .. } if *values == query))
        .ok_or("no query from the second robot")?;
    let expected = parse_process("(this.vPosition, this.count, 'ack', this.role)@(id = 2).0 | P3").unwrap();
    let got = component(&after, 0).1;
    ensure(got == expected, || format!("first robot continues as {got}"))?;
    let before = rescuer.components();
    let now = after.components();
    for i in 2..before.len() {
        ensure(before[i] == now[i], || format!("robot {} changed", i + 1))?;
    }
    Ok(format!("{rescue_label} then {label}; robot 1 continues as {got}; robots 3..{} unchanged", now.len()))
}

fn restriction_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let trials = 10_000;
    let mut failures = Vec::new();
    let mut affected = 0;
    for _ in 0..trials {
        let pi = generate::closed_predicate(&mut rng, 3);
        let x = Sym::new(generate::NAMES.choose(&mut rng).unwrap());
        let gamma = generate::env(&mut rng);
        let v = name(&format!("v#{}", rng.gen_range(0..4)));
        fn swap(val: &Value, x: &Sym, v: &Value) -> Value {
            match val {
                Value::Name(n) if n == x => v.clone(),
                Value::Tuple(t) => Value::Tuple(t.iter().map(|i| swap(i, x, v)).collect()),
                other => other.clone(),
            }
        }
        let moved: AttributeEnv = gamma.iter().map(|(a, val)| (a.clone(), swap(val, &x, &v))).collect();
        if moved != gamma {
            affected += 1;
        }
        let r = restrict_predicate(&pi, &x);
        if satisfies(&gamma, &r) != satisfies(&moved, &r) {
            failures.push(format!("{pi} with {x} in {gamma:?}"));
        }
    }
    ensure(failures.is_empty(), || format!("{} failures, first: {}", failures.len(), failures[0]))?;
    Ok(format!("{trials} trials ({affected} with the restricted name in the environment), 0 failures"))
}

fn encoding_correspondence() -> Outcome {
    let start = Instant::now();
    let terms = files(&corpus().join("bpi"), "bpi");
    ensure(terms.len() >= 20, || format!("only {} terms", terms.len()))?;
    let (mut steps, mut states) = (0, 0);
    let mut kinds = BTreeSet::new();
    for f in &terms {
        let text = fs::read_to_string(f).unwrap();
        for (k, marker) in [("restriction", "nu "), ("sum", "+"), ("recursion", "rec ")] {
            if text.contains(marker) {
                kinds.insert(k);
            }
        }
        let p = parse_bpi(&text).map_err(|e| format!("{}: {e}", f.display()))?;
        let r = correspondence_check(&p, 5, &StepOptions::default()).map_err(|e| e.to_string())?;
        ensure(r.holds(), || format!("{}: {r:?}", f.display()))?;
        steps += r.steps;
        states += r.states;
    }
    ensure(kinds.len() == 3, || format!("corpus covers only {kinds:?}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{} terms, {states} states, {steps} matched steps, 0 mismatches in {elapsed:.2?}", terms.len()))
}

fn full_lts(p: &Program) -> Result<Lts, String> {
    let u = Universe::for_program(p);
    let lts = build_lts(&p.main, &p.definitions, &u, &ExploreOptions::default()).map_err(|e| e.to_string())?;
    ensure(lts.truncated.is_none(), || format!("truncated: {:?}", lts.truncated))?;
    Ok(lts)
}

fn channel_selectivity() -> Outcome {
    let lts = full_lts(&load("channels.abc"))?;
    let mut seen = BTreeSet::new();
    for t in &lts.transitions {
        if let SystemLabel::Out { values, .. } = &t.label {
            if let [Value::Name(tag), v] = values.as_slice() {
                match tag.as_str() {
                    "onA" | "onB" => {
                        seen.insert((tag.to_string(), v.clone()));
                    }
                    _ => {}
                }
            }
        }
    }
    let expected = BTreeSet::from([("onA".to_string(), name("c")), ("onB".to_string(), name("d"))]);
    ensure(seen == expected, || format!("branch outputs {seen:?}"))?;
    Ok(format!("{} states; 'c' only reaches the 'a' branch, 'd' only the 'b' branch", lts.states.len()))
}

fn group_dynamics() -> Outcome {
    let lts = full_lts(&load("groups.abc"))?;
    let group = |s: &System, i: usize| component(s, i).0.get(&Sym::new("group")).cloned();
    let listening = |p: &Process| p.to_string().contains("(_0, _1)");
    let mut before_join = None;
    let mut after_join = None;
    for t in &lts.transitions {
        let SystemLabel::Out { values, .. } = &t.label else { continue };
        if values.first() != Some(&name("msg")) {
            continue;
        }
        let (src, dst) = (&lts.states[t.src], &lts.states[t.dst]);
        let received: Vec<usize> =
            (1..3).filter(|&i| listening(&component(src, i).1) && !listening(&component(dst, i).1)).collect();
        match (group(src, 1), group(src, 2)) {
            (Some(a), Some(c)) if a == name("a") && c == name("c") => before_join = Some(received),
            (Some(a), Some(c)) if a == name("a") && c == name("a") => after_join = Some(received),
            _ => {}
        }
    }
    ensure(before_join == Some(vec![1]), || format!("before the join, receivers {before_join:?}"))?;
    ensure(after_join == Some(vec![1, 2]), || format!("after the join, receivers {after_join:?}"))?;
    Ok("before the join only component 2 receives; after it both components 2 and 3 receive".into())
}

fn publish_subscribe() -> Outcome {
    let p = load("pubsub.abc");
    let u = Universe::for_program(&p);
    let steps = system_steps(&p.main, &p.definitions, &u, &StepOptions::default()).map_err(|e| e.to_string())?;
    ensure(steps.len() == 1, || format!("{} steps", steps.len()))?;
    let (_, after) = &steps[0];
    let topic = component(&p.main, 0).0.get(&Sym::new("topic")).cloned();
    let (mut advanced, mut discarded) = (0, 0);
    for (i, ((env, before), (_, now))) in p.main.components().iter().zip(after.components()).enumerate().skip(1) {
        let subscribed = env.get(&Sym::new("subscription")).cloned() == topic;
        ensure(subscribed == (*before != now), || format!("subscriber {} advanced={}", i, *before != now))?;
        if subscribed {
            advanced += 1;
        } else {
            discarded += 1;
        }
    }
    ensure(advanced == 2 && discarded == 2, || format!("{advanced} advanced, {discarded} discarded"))?;
    Ok(format!("{advanced} matching subscribers advance, {discarded} discard"))
}

fn equivalence_sanity() -> Outcome {
    let opts = ExploreOptions::default();
    let silent = parse_program("attrs: a\n{a := 1}:()@(ff).0").unwrap();
    let idle = parse_program("attrs: a\n{a := 1}:0").unwrap();
    let cmp = |a: &Program, b: &Program, m: Mode| compare_programs(a, b, m, &opts, DEFAULT_MESSAGE_CAP);
    let weak = cmp(&silent, &idle, Mode::Weak).map_err(|e| e.to_string())?;
    let strong = cmp(&silent, &idle, Mode::Strong).map_err(|e| e.to_string())?;
    ensure(weak.verdict.is_equivalent(), || format!("weak: {:?}", weak.verdict))?;
    ensure(!strong.verdict.is_equivalent(), || "strongly equivalent".into())?;

    let mut pairs = vec![(silent.clone(), idle.clone())];
    let mut checked = 1;
    for f in files(&corpus(), "abc") {
        let p = load(f.file_name().unwrap().to_str().unwrap());
        for m in [Mode::Strong, Mode::Weak] {
            let r = cmp(&p, &p, m).map_err(|e| e.to_string())?;
            ensure(r.verdict.is_equivalent(), || format!("{} not {m:?}-equivalent to itself", f.display()))?;
        }
        pairs.push((p.clone(), p));
    }
    let small = [
        "attrs: a\n{a := 1}:('m')@(tt).0",
        "attrs: a\n{a := 1}:()@(ff).('m')@(tt).0",
        "attrs: a\n{a := 2}:('m')@(tt).0",
    ];
    for x in small {
        for y in small {
            let (a, b) = (parse_program(x).unwrap(), parse_program(y).unwrap());
            let s = cmp(&a, &b, Mode::Strong).map_err(|e| e.to_string())?;
            let w = cmp(&a, &b, Mode::Weak).map_err(|e| e.to_string())?;
            ensure(!s.verdict.is_equivalent() || w.verdict.is_equivalent(), || {
                format!("strong but not weak: {x} / {y}")
            })?;
            checked += 1;
        }
    }
    let congruence_pairs: Vec<(Program, Program)> =
        vec![(silent.clone(), idle.clone()), (parse_program(small[0]).unwrap(), parse_program(small[1]).unwrap())];
    let bounds = ExploreOptions { bounds: Bounds { max_states: 2_000, max_depth: 20 }, ..Default::default() };
    let report = congruence_sample(&congruence_pairs, Mode::Weak, 100, 5, &bounds).map_err(|e| e.to_string())?;
    ensure(report.violations.is_empty(), || report.violations.join("\n"))?;
    ensure(report.trials >= 100 && report.inconclusive.len() * 2 < report.trials, || {
        format!("{} of {} contexts inconclusive", report.inconclusive.len(), report.trials)
    })?;
    Ok(format!(
        "ff-send weakly but not strongly equivalent to 0; {} corpus systems reflexive; strong implies weak on {checked} pairs; {} contexts, 0 violations ({} bounded, {} of them inconclusive)",
        pairs.len() - 1,
        report.trials,
        report.bounded,
        report.inconclusive.len()
    ))
}

fn robotics_reachability() -> Outcome {
    let p = load("robotics.abc");
    let u = Universe::for_program(&p);
    let opts = ExploreOptions {
        bounds: Bounds { max_states: 100_000, max_depth: 50 },
        step: StepOptions { repl_bound: 2, ..Default::default() },
        inputs: None,
    };
    let lts = build_lts(&p.main, &p.definitions, &u, &opts).map_err(|e| e.to_string())?;
    let (state, path) = reachable(&lts, some_component_has("role", &name("helper"))).ok_or("no helper state")?;
    let ok = replay(&lts, &path, &p.definitions, &u, &opts.step).map_err(|e| e.to_string())?;
    ensure(ok, || "witness does not replay".into())?;
    Ok(format!("state {state} of {} reached in {} steps; witness replays", lts.states.len(), path.len()))
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_abc")).args(args).output().expect("binary runs");
    out.stdout
}

fn determinism() -> Outcome {
    let robotics = corpus().join("robotics.abc");
    let running = corpus().join("running.abc");
    let (r, q) = (robotics.to_str().unwrap(), running.to_str().unwrap());
    let runs: [&[&str]; 4] = [
        &["explore", q, "--max-states", "500"],
        &["explore", r, "--format", "structured", "--seed", "9"],
        &["step", r, "--seed", "42", "--steps", "25"],
        &["step", q, "--seed", "7", "--steps", "25"],
    ];
    for args in runs {
        let (a, b) = (run_cli(args), run_cli(args));
        ensure(!a.is_empty(), || format!("{args:?} printed nothing"))?;
        ensure(a == b, || format!("{args:?} differs between runs"))?;
    }
    Ok(format!("{} command lines byte-identical across two runs", runs.len()))
}

fn round_trip() -> Outcome {
    let mut n = 0;
    for f in files(&corpus(), "abc") {
        let p = parse_program(&fs::read_to_string(&f).unwrap()).map_err(|e| e.to_string())?;
        let again = parse_program(&p.to_string()).map_err(|e| format!("{}: {e}", f.display()))?;
        ensure(again == p, || format!("{} changes when reprinted", f.display()))?;
        n += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..1000 {
        let p = generate::program(&mut rng);
        let text = p.to_string();
        let again = parse_program(&text).map_err(|e| format!("program {i}: {e}\n{text}"))?;
        ensure(again == p, || format!("program {i} changes when reprinted:\n{text}"))?;
    }
    Ok(format!("{n} corpus models and 1000 generated programs"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("golden output transitions", golden_transition),
        ("golden discard", golden_discard),
        ("golden system step", golden_system_step),
        ("restriction satisfaction invariance", restriction_invariance),
        ("encoding correspondence", encoding_correspondence),
        ("channel selectivity", channel_selectivity),
        ("group dynamics", group_dynamics),
        ("publish/subscribe", publish_subscribe),
        ("equivalence sanity", equivalence_sanity),
        ("robotics reachability", robotics_reachability),
        ("determinism", determinism),
        ("parser round trip", round_trip),
    ];
    let mut failed = Vec::new();
    for (i, (title, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or(e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("[PASS] {:>2}. {title}: {detail}", i + 1),
            Err(why) => {
                println!("[FAIL] {:>2}. {title}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed.len(), criteria.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
