//! Bounded labelled transition systems, traces and reachability.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::attributes::{pred_key, PredKey, Universe};
use crate::component::Message;
use crate::error::{Error, Result};
use crate::syntax::names::canonical_system;
use crate::syntax::*;
use crate::system::{external_input_steps, system_steps, StepOptions, SystemLabel};

/// Label identity used for state-space merging and bisimulation: predicates
/// are compared by meaning, values literally (extruded names are already
/// renamed to canonical placeholders).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CanonicalLabel {
    Tau,
    Out { bound: usize, pred: PredKey, values: Vec<Value> },
    In { pred: PredKey, values: Vec<Value> },
}

impl CanonicalLabel {
    pub fn is_tau(&self) -> bool {
        matches!(self, CanonicalLabel::Tau)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub src: usize,
    pub label: SystemLabel,
    pub key: CanonicalLabel,
    pub dst: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub max_states: usize,
    pub max_depth: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { max_states: 100_000, max_depth: 50 }
    }
}

/// Finite set of environment broadcasts offered to the system as input
/// transitions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MessageUniverse {
    pub messages: Vec<Message>,
}

impl MessageUniverse {
    /// Predicates: `tt` and every output predicate of the programs that
    /// needs no sender attributes. Payloads: every tuple, of each input
    /// arity occurring in the programs, over the programs' name and
    /// integer literals plus the universe witness. At most `cap` messages.
    pub fn for_programs(programs: &[&Program], u: &Universe, cap: usize) -> MessageUniverse {
        let mut preds = BTreeSet::from([Predicate::True]);
        let mut arities = BTreeSet::new();
        let mut atoms = BTreeSet::new();
        let mut visit = |p: &Process| {
            fn go(p: &Process, preds: &mut BTreeSet<Predicate>, arities: &mut BTreeSet<usize>) {
                match p {
                    Process::Out { pred, cont, .. } => {
                        if !pred.has_this() && pred_is_closed(pred) {
                            preds.insert(pred.clone());
                        }
                        go(cont, preds, arities);
                    }
                    Process::In { vars, cont, .. } => {
                        arities.insert(vars.len());
                        go(cont, preds, arities);
                    }
                    Process::Upd { cont, .. } | Process::Aware { cont, .. } => go(cont, preds, arities),
                    Process::Sum(l, r) | Process::Par(l, r) => {
                        go(l, preds, arities);
                        go(r, preds, arities);
                    }
                    Process::Nil | Process::Call { .. } => {}
                }
            }
            go(p, &mut preds, &mut arities);
            p.for_each_expr(&mut |e| {
                e.for_each_leaf(&mut |l| {
                    if let Expression::Lit(v @ (Value::Name(_) | Value::Int(_))) = l {
                        atoms.insert(v.clone());
                    }
                })
            });
        };
        for prog in programs {
            for d in prog.definitions.values() {
                visit(&d.body);
            }
            for (_, p) in all_components(&prog.main) {
                visit(p);
            }
        }
        atoms.insert(u.witness.clone());
        let atoms: Vec<Value> = atoms.into_iter().collect();
        let mut messages = Vec::new();
        'outer: for pred in &preds {
            for &n in &arities {
                let mut idx = vec![0usize; n];
                loop {
                    if messages.len() >= cap {
                        break 'outer;
                    }
                    messages.push(Message::new(pred.clone(), idx.iter().map(|&i| atoms[i].clone()).collect()));
                    let mut k = n;
                    loop {
                        if k == 0 {
                            break;
                        }
                        k -= 1;
                        idx[k] += 1;
                        if idx[k] < atoms.len() {
                            break;
                        }
                        idx[k] = 0;
                    }
                    if idx.iter().all(|&i| i == 0) {
                        break;
                    }
                }
            }
        }
        MessageUniverse { messages }
    }
}

fn pred_is_closed(p: &Predicate) -> bool {
    let mut closed = true;
    p.for_each_expr(&mut |e| e.for_each_leaf(&mut |l| closed &= !matches!(l, Expression::Var(_))));
    closed
}

/// Components including those under replication.
fn all_components(s: &System) -> Vec<(&AttributeEnv, &Process)> {
    let mut out = Vec::new();
    fn walk<'a>(s: &'a System, out: &mut Vec<(&'a AttributeEnv, &'a Process)>) {
        match s {
            System::Comp { env, proc } => out.push((env, proc)),
            System::Par(l, r) => {
                walk(l, out);
                walk(r, out);
            }
            System::Nu { body, .. } | System::Bang { body, .. } => walk(body, out),
        }
    }
    walk(s, &mut out);
    out
}

#[derive(Clone, Debug, Default)]
pub struct ExploreOptions {
    pub bounds: Bounds,
    pub step: StepOptions,
    /// When set, every state also gets one input transition per message
    /// and target.
    pub inputs: Option<MessageUniverse>,
}

#[derive(Clone, Debug)]
pub struct Lts {
    pub states: Vec<System>,
    pub initial: usize,
    pub transitions: Vec<Transition>,
    /// Why exploration stopped early, if it did.
    pub truncated: Option<String>,
    /// Some reached state holds a replication with moves left that has
    /// used up its unfolding bound.
    pub repl_saturated: bool,
}

impl Lts {
    /// Exploration was cut short by a state, depth or unfolding bound.
    pub fn is_bounded(&self) -> bool {
        self.truncated.is_some() || self.repl_saturated
    }
}

fn saturated_bang(sys: &System, bound: u32) -> bool {
    fn active(s: &System) -> bool {
        match s {
            System::Comp { proc, .. } => *proc != Process::Nil,
            System::Par(l, r) => active(l) || active(r),
            System::Bang { body, .. } | System::Nu { body, .. } => active(body),
        }
    }
    match sys {
        System::Comp { .. } => false,
        System::Par(l, r) => saturated_bang(l, bound) || saturated_bang(r, bound),
        System::Bang { body, spawned } => (*spawned >= bound && active(body)) || saturated_bang(body, bound),
        System::Nu { body, .. } => saturated_bang(body, bound),
    }
}

/// Renames the extruded names of an output to `#e0, #e1, …` (smallest
/// indices unused by the source state, in order of first occurrence in
/// the payload) in both the label and the target.
pub fn normalize_extrusion(source: &System, label: SystemLabel, target: System) -> (SystemLabel, System) {
    let SystemLabel::Out { bound, pred, values } = label else {
        return (label, target);
    };
    if bound.is_empty() {
        return (SystemLabel::Out { bound, pred, values }, target);
    }
    let mut order: Vec<Sym> = Vec::new();
    for v in &values {
        let mut ns = BTreeSet::new();
        collect_in_order(v, &mut |n| {
            if bound.contains(n) && !order.contains(n) {
                order.push(n.clone());
            }
            ns.insert(n.clone());
        });
    }
    for b in &bound {
        if !order.contains(b) {
            order.push(b.clone());
        }
    }
    let mut taken = BTreeSet::new();
    source.all_names(&mut taken);
    let mut targets = Vec::new();
    let mut k = 0;
    while targets.len() < order.len() {
        let cand = Sym::new(&format!("#e{k}"));
        if !taken.contains(&cand) {
            targets.push(cand);
        }
        k += 1;
    }
    let temps: Vec<Sym> = (0..order.len()).map(|i| Sym::new(&format!("#tmp{i}"))).collect();
    let mut target = target;
    let mut values = values;
    for (from, tmp) in order.iter().zip(&temps) {
        target = target.rename_free_name(from, tmp);
        values = values.iter().map(|v| v.rename_name(from, tmp)).collect();
    }
    for (tmp, to) in temps.iter().zip(&targets) {
        target = target.rename_free_name(tmp, to);
        values = values.iter().map(|v| v.rename_name(tmp, to)).collect();
    }
    (SystemLabel::Out { bound: targets, pred, values }, target)
}

fn collect_in_order(v: &Value, f: &mut impl FnMut(&Sym)) {
    match v {
        Value::Name(n) => f(n),
        Value::Tuple(items) => items.iter().for_each(|i| collect_in_order(i, f)),
        _ => {}
    }
}

/// Canonical labels with memoized predicate keys.
pub struct LabelCanon<'a> {
    u: &'a Universe,
    cache: HashMap<Predicate, PredKey>,
}

impl<'a> LabelCanon<'a> {
    pub fn new(u: &'a Universe) -> Self {
        LabelCanon { u, cache: HashMap::new() }
    }

    pub fn key_of(&mut self, p: &Predicate) -> Result<PredKey> {
        if let Some(k) = self.cache.get(p) {
            return Ok(k.clone());
        }
        let k = pred_key(p, self.u)?;
        self.cache.insert(p.clone(), k.clone());
        Ok(k)
    }

    pub fn canonical(&mut self, l: &SystemLabel) -> Result<CanonicalLabel> {
        Ok(match l {
            SystemLabel::Tau => CanonicalLabel::Tau,
            SystemLabel::Out { bound, pred, values } => {
                let key = self.key_of(pred)?;
                if key.is_ff() {
                    CanonicalLabel::Tau
                } else {
                    CanonicalLabel::Out { bound: bound.len(), pred: key, values: values.clone() }
                }
            }
            SystemLabel::In(m) => CanonicalLabel::In { pred: self.key_of(&m.pred)?, values: m.values.clone() },
        })
    }
}

/// Breadth-first construction of the state space reachable from `sys`.
pub fn build_lts(sys: &System, defs: &Definitions, u: &Universe, opts: &ExploreOptions) -> Result<Lts> {
    let mut canon = LabelCanon::new(u);
    let init = canonical_system(sys);
    let mut states = vec![init.clone()];
    let mut index: HashMap<System, usize> = HashMap::from([(init, 0)]);
    let mut depth = vec![0usize];
    let mut transitions = Vec::new();
    let mut truncated: Option<String> = None;
    let mut repl_saturated = false;
    let mut queue = VecDeque::from([0usize]);
    let note = |t: &mut Option<String>, why: String| {
        if t.is_none() {
            *t = Some(why);
        }
    };
    while let Some(id) = queue.pop_front() {
        let src = states[id].clone();
        repl_saturated = repl_saturated || saturated_bang(&src, opts.step.repl_bound);
        let mut succ: Vec<(SystemLabel, System)> = match system_steps(&src, defs, u, &opts.step) {
            Ok(s) => s,
            Err(Error::BudgetExceeded(n)) => {
                note(&mut truncated, format!("combination budget {n} exceeded"));
                continue;
            }
            Err(e) => return Err(e),
        };
        if let Some(mu) = &opts.inputs {
            for m in &mu.messages {
                match external_input_steps(&src, defs, u, m, &opts.step) {
                    Ok(ts) => succ.extend(ts.into_iter().map(|t| (SystemLabel::In(m.clone()), t))),
                    Err(Error::BudgetExceeded(n)) => note(&mut truncated, format!("combination budget {n} exceeded")),
                    Err(e) => return Err(e),
                }
            }
        }
        if succ.is_empty() {
            continue;
        }
        if depth[id] >= opts.bounds.max_depth {
            note(&mut truncated, format!("max_depth {} reached", opts.bounds.max_depth));
            continue;
        }
        let mut seen_edges = BTreeSet::new();
        for (label, target) in succ {
            let (label, target) = normalize_extrusion(&src, label, target);
            let target = canonical_system(&target);
            let dst = match index.get(&target) {
                Some(&d) => d,
                None => {
                    if states.len() >= opts.bounds.max_states {
                        note(&mut truncated, format!("max_states {} reached", opts.bounds.max_states));
                        continue;
                    }
                    let d = states.len();
                    states.push(target.clone());
                    index.insert(target, d);
                    depth.push(depth[id] + 1);
                    queue.push_back(d);
                    d
                }
            };
            let key = canon.canonical(&label)?;
            if seen_edges.insert((key.clone(), dst, label.clone())) {
                transitions.push(Transition { src: id, label, key, dst });
            }
        }
    }
    Ok(Lts { states, initial: 0, transitions, truncated, repl_saturated })
}

impl Lts {
    pub fn successors(&self, s: usize) -> impl Iterator<Item = &Transition> {
        self.transitions.iter().filter(move |t| t.src == s)
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.states.len()];
        for (i, t) in self.transitions.iter().enumerate() {
            adj[t.src].push(i);
        }
        adj
    }

    /// Line-oriented dump: `states N`, `init I`, one `trans SRC "LABEL" DST`
    /// per transition, and a final `truncated REASON` line when bounded.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("states {}\ninit {}\n", self.states.len(), self.initial));
        for t in &self.transitions {
            out.push_str(&format!("trans {} \"{}\" {}\n", t.src, escape(&t.label.to_string()), t.dst));
        }
        if let Some(r) = &self.truncated {
            out.push_str(&format!("truncated {r}\n"));
        }
        out
    }

    pub fn to_json(&self, seed: u64, bounds: &Bounds, repl_bound: u32) -> serde_json::Value {
        #[derive(Serialize)]
        struct State {
            id: usize,
            term: String,
        }
        #[derive(Serialize)]
        struct Edge {
            src: usize,
            label: String,
            kind: &'static str,
            dst: usize,
        }
        #[derive(Serialize)]
        struct Dump<'a> {
            seed: u64,
            max_states: usize,
            max_depth: usize,
            repl_bound: u32,
            initial: usize,
            states: Vec<State>,
            transitions: Vec<Edge>,
            truncated: &'a Option<String>,
        }
        let dump = Dump {
            seed,
            max_states: bounds.max_states,
            max_depth: bounds.max_depth,
            repl_bound,
            initial: self.initial,
            states: self.states.iter().enumerate().map(|(id, s)| State { id, term: s.to_string() }).collect(),
            transitions: self
                .transitions
                .iter()
                .map(|t| Edge {
                    src: t.src,
                    label: t.label.to_string(),
                    kind: match t.key {
                        CanonicalLabel::Tau => "tau",
                        CanonicalLabel::Out { .. } => "out",
                        CanonicalLabel::In { .. } => "in",
                    },
                    dst: t.dst,
                })
                .collect(),
            truncated: &self.truncated,
        };
        serde_json::to_value(dump).expect("serializable")
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// First state in breadth-first order satisfying `prop`, with the
/// transitions leading to it.
pub fn reachable(lts: &Lts, prop: impl Fn(&System) -> bool) -> Option<(usize, Vec<Transition>)> {
    let adj = lts.adjacency();
    let mut parent: Vec<Option<usize>> = vec![None; lts.states.len()];
    let mut seen = vec![false; lts.states.len()];
    let mut queue = VecDeque::from([lts.initial]);
    seen[lts.initial] = true;
    while let Some(s) = queue.pop_front() {
        if prop(&lts.states[s]) {
            let mut path = Vec::new();
            let mut cur = s;
            while let Some(t) = parent[cur] {
                path.push(lts.transitions[t].clone());
                cur = lts.transitions[t].src;
            }
            path.reverse();
            return Some((s, path));
        }
        for &t in &adj[s] {
            let d = lts.transitions[t].dst;
            if !seen[d] {
                seen[d] = true;
                parent[d] = Some(t);
                queue.push_back(d);
            }
        }
    }
    None
}

/// State property: some active component has `attr = value`.
pub fn some_component_has(attr: &str, value: &Value) -> impl Fn(&System) -> bool {
    let attr = Sym::new(attr);
    let value = value.clone();
    move |s: &System| s.components().iter().any(|(env, _)| env.get(&attr) == Some(&value))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    Random,
    Interactive,
}

/// A run of at most `steps` transitions. `Random` draws uniformly from a
/// generator seeded with `opts.seed`; `Interactive` prints the enabled
/// transitions to `output` and reads a 0-based index per step from
/// `input`, stopping cleanly at end of input or on an unparsable line.
#[allow(clippy::too_many_arguments)]
pub fn trace(
    sys: &System,
    defs: &Definitions,
    u: &Universe,
    steps: usize,
    opts: &StepOptions,
    policy: Policy,
    input: &mut dyn BufRead,
    output: &mut dyn Write,
) -> Result<Vec<(SystemLabel, System)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut cur = sys.clone();
    let mut out = Vec::new();
    for _ in 0..steps {
        let succ = system_steps(&cur, defs, u, opts)?;
        if succ.is_empty() {
            break;
        }
        let pick = match policy {
            Policy::Random => rng.gen_range(0..succ.len()),
            Policy::Interactive => {
                let _ = writeln!(output, "state: {cur}");
                for (i, (l, _)) in succ.iter().enumerate() {
                    let _ = writeln!(output, "  [{i}] {l}");
                }
                let _ = write!(output, "choice> ");
                let _ = output.flush();
                let mut line = String::new();
                match input.read_line(&mut line) {
                    Ok(0) | Err(_) => break,
                    Ok(_) => match line.trim().parse::<usize>() {
                        Ok(i) if i < succ.len() => i,
                        _ => break,
                    },
                }
            }
        };
        let (l, next) = succ.into_iter().nth(pick).expect("index in range");
        let (l, next) = normalize_extrusion(&cur, l, next);
        out.push((l, next.clone()));
        cur = next;
    }
    Ok(out)
}

/// Rendering of a trace, one transition per line.
pub fn trace_to_text(seed: u64, start: &System, trace: &[(SystemLabel, System)]) -> String {
    let mut s = format!("seed {seed}\nstart {start}\n");
    for (i, (l, st)) in trace.iter().enumerate() {
        s.push_str(&format!("step {i} \"{}\"\n  -> {st}\n", escape(&l.to_string())));
    }
    s
}

/// Replays a path of transitions from the LTS initial state through
/// `system_steps`, checking that every edge is derivable.
pub fn replay(lts: &Lts, path: &[Transition], defs: &Definitions, u: &Universe, opts: &StepOptions) -> Result<bool> {
    let mut canon = LabelCanon::new(u);
    let mut cur = lts.initial;
    for t in path {
        if t.src != cur {
            return Ok(false);
        }
        let src = &lts.states[cur];
        let mut found = false;
        let steps: Vec<(SystemLabel, System)> = match &t.label {
            SystemLabel::In(m) => {
                external_input_steps(src, defs, u, m, opts)?.into_iter().map(|s| (t.label.clone(), s)).collect()
            }
            _ => system_steps(src, defs, u, opts)?,
        };
        for (l, s) in steps {
            let (l, s) = normalize_extrusion(src, l, s);
            if canon.canonical(&l)? == t.key && canonical_system(&s) == lts.states[t.dst] {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(false);
        }
        cur = t.dst;
    }
    Ok(true)
}

/// Groups transitions by source for quick lookup.
pub fn out_edges(lts: &Lts) -> BTreeMap<usize, Vec<&Transition>> {
    let mut m: BTreeMap<usize, Vec<&Transition>> = BTreeMap::new();
    for t in &lts.transitions {
        m.entry(t.src).or_default().push(t);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    fn lts(src: &str) -> (Program, Lts) {
        let p = parse_program(src).unwrap();
        let u = Universe::for_program(&p);
        let l = build_lts(&p.main, &p.definitions, &u, &ExploreOptions::default()).unwrap();
        (p, l)
    }

    #[test]
    fn inert_component_has_one_state() {
        let (_, l) = lts("{a := 1}:0");
        assert_eq!((l.states.len(), l.transitions.len()), (1, 0));
    }

    #[test]
    fn single_silent_move() {
        let (_, l) = lts("{a := 1}:()@(ff).0");
        assert_eq!((l.states.len(), l.transitions.len()), (2, 1));
        assert!(l.transitions[0].key.is_tau());
    }

    #[test]
    fn reachability_with_witness() {
        let (_, l) = lts("{a := 1}:[a := 2]()@(ff).0");
        let (s, path) = reachable(&l, some_component_has("a", &Value::Int(1))).unwrap();
        assert_eq!((s, path.len()), (0, 0));
        let (s, path) = reachable(&l, some_component_has("a", &Value::Int(2))).unwrap();
        assert_eq!((s, path.len()), (1, 1));
        assert!(reachable(&l, some_component_has("a", &Value::Int(3))).is_none());
    }

    #[test]
    fn zero_step_trace_is_empty() {
        let p = parse_program("{a := 1}:()@(ff).0").unwrap();
        let u = Universe::for_program(&p);
        let t = trace(
            &p.main,
            &p.definitions,
            &u,
            0,
            &StepOptions::default(),
            Policy::Random,
            &mut std::io::empty(),
            &mut std::io::sink(),
        )
        .unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn depth_bound_truncates() {
        let p = parse_program("def K = ()@(ff).[a := a + 1]K\n{a := 0}:K").unwrap();
        let u = Universe::for_program(&p);
        let opts = ExploreOptions { bounds: Bounds { max_states: 100, max_depth: 5 }, ..Default::default() };
        let l = build_lts(&p.main, &p.definitions, &u, &opts).unwrap();
        assert!(l.truncated.is_some());
        assert_eq!(l.states.len(), 6);
    }
}
