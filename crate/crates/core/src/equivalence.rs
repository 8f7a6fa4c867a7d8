//! Barbs, strong and weak bisimilarity on finite transition systems, and
//! randomized checking of closure under contexts.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::attributes::{PredKey, Universe};
use crate::error::Result;
use crate::explorer::{build_lts, CanonicalLabel, ExploreOptions, Lts, MessageUniverse};
use crate::syntax::*;
use crate::system::SystemLabel;

/// Predicate meanings a state can expose; never contains `ff`.
pub type BarbSet = BTreeSet<PredKey>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Strong,
    Weak,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessStep {
    pub side: Side,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    /// Moves by either side that the other cannot match, shortest first.
    Distinguished(Vec<WitnessStep>),
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BisimReport {
    pub verdict: Verdict,
    /// Either transition system was truncated or hit its unfolding bound.
    pub bounded: bool,
}

/// Out-edges with a predicate not equivalent to `ff`, closed under silent
/// and output moves when `weak`.
pub fn barbs(lts: &Lts, state: usize, weak: bool) -> BarbSet {
    let adj = lts.adjacency();
    let mut out = BarbSet::new();
    let mut seen = BTreeSet::from([state]);
    let mut queue = VecDeque::from([state]);
    while let Some(s) = queue.pop_front() {
        for &t in &adj[s] {
            let tr = &lts.transitions[t];
            let follow = match &tr.key {
                CanonicalLabel::Out { pred, .. } => {
                    out.insert(pred.clone());
                    true
                }
                CanonicalLabel::Tau => true,
                CanonicalLabel::In { .. } => false,
            };
            if weak && follow && seen.insert(tr.dst) {
                queue.push_back(tr.dst);
            }
        }
    }
    out
}

/// One output predicate per barb of `state`, in barb order.
pub fn barb_predicates(lts: &Lts, state: usize, weak: bool) -> Vec<Predicate> {
    let keys = barbs(lts, state, weak);
    let mut reps: BTreeMap<&PredKey, &Predicate> = BTreeMap::new();
    for t in &lts.transitions {
        if let (CanonicalLabel::Out { pred: k, .. }, SystemLabel::Out { pred, .. }) = (&t.key, &t.label) {
            if keys.contains(k) {
                reps.entry(k).or_insert(pred);
            }
        }
    }
    reps.into_values().cloned().collect()
}

struct Union {
    edges: Vec<Vec<(usize, usize)>>,
    names: Vec<String>,
}

const TAU: usize = 0;

fn union_graph(l1: &Lts, l2: &Lts, mode: Mode) -> (Union, usize) {
    let n1 = l1.states.len();
    let n = n1 + l2.states.len();
    let mut ids: HashMap<CanonicalLabel, usize> = HashMap::from([(CanonicalLabel::Tau, TAU)]);
    let mut names = vec!["tau".to_string()];
    let mut edges: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); n];
    for (off, l) in [(0, l1), (n1, l2)] {
        for t in &l.transitions {
            let id = *ids.entry(t.key.clone()).or_insert_with(|| {
                names.push(t.label.to_string());
                names.len() - 1
            });
            edges[t.src + off].insert((id, t.dst + off));
        }
    }
    let edges = match mode {
        Mode::Strong => edges,
        Mode::Weak => saturate(&edges),
    };
    (Union { edges: edges.into_iter().map(|s| s.into_iter().collect()).collect(), names }, n1)
}

/// `s ⇒ t` edges labelled tau (including `s ⇒ s`) and `s ⇒a⇒ t` for
/// visible `a`.
fn saturate(edges: &[BTreeSet<(usize, usize)>]) -> Vec<BTreeSet<(usize, usize)>> {
    let n = edges.len();
    let closure: Vec<Vec<usize>> = (0..n)
        .map(|s| {
            let mut seen = BTreeSet::from([s]);
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for &(l, d) in &edges[x] {
                    if l == TAU && seen.insert(d) {
                        stack.push(d);
                    }
                }
            }
            seen.into_iter().collect()
        })
        .collect();
    (0..n)
        .map(|s| {
            let mut out = BTreeSet::new();
            for &m in &closure[s] {
                out.insert((TAU, m));
                for &(l, d) in &edges[m] {
                    if l != TAU {
                        for &e in &closure[d] {
                            out.insert((l, e));
                        }
                    }
                }
            }
            out
        })
        .collect()
}

/// Successive partitions, each refining the previous by one step of
/// lookahead, until stable.
fn refine(g: &Union) -> Vec<Vec<usize>> {
    let n = g.edges.len();
    let mut history = vec![vec![0usize; n]];
    loop {
        let cur = history.last().expect("non-empty");
        let mut sigs: HashMap<(usize, Vec<(usize, usize)>), usize> = HashMap::new();
        let mut next = vec![0usize; n];
        for s in 0..n {
            let mut sig: Vec<(usize, usize)> = g.edges[s].iter().map(|&(l, d)| (l, cur[d])).collect();
            sig.sort_unstable();
            sig.dedup();
            let k = sigs.len();
            next[s] = *sigs.entry((cur[s], sig)).or_insert(k);
        }
        let before = cur.iter().collect::<BTreeSet<_>>().len();
        let done = sigs.len() == before;
        history.push(next);
        if done {
            return history;
        }
    }
}

fn separated_at(history: &[Vec<usize>], a: usize, b: usize) -> Option<usize> {
    history.iter().position(|p| p[a] != p[b])
}

fn witness(g: &Union, history: &[Vec<usize>], mut a: usize, mut b: usize) -> Vec<WitnessStep> {
    let mut out = Vec::new();
    while let Some(k) = separated_at(history, a, b) {
        let prev = &history[k - 1];
        let attempt = |x: usize, y: usize| {
            g.edges[x].iter().find_map(|&(l, xd)| {
                let answers: Vec<usize> = g.edges[y].iter().filter(|e| e.0 == l).map(|e| e.1).collect();
                answers.iter().all(|&yd| prev[yd] != prev[xd]).then_some((l, xd, answers))
            })
        };
        if let Some((l, ad, answers)) = attempt(a, b) {
            out.push(WitnessStep { side: Side::Left, label: g.names[l].clone() });
            match answers.first() {
                Some(&bd) => (a, b) = (ad, bd),
                None => break,
            }
        } else if let Some((l, bd, answers)) = attempt(b, a) {
            out.push(WitnessStep { side: Side::Right, label: g.names[l].clone() });
            match answers.first() {
                Some(&ad) => (a, b) = (ad, bd),
                None => break,
            }
        } else {
            break;
        }
    }
    out
}

/// Bisimilarity of `s1` in `l1` and `s2` in `l2`. Both systems must have
/// been built over the same universe for their labels to be comparable.
pub fn bisim(mode: Mode, l1: &Lts, s1: usize, l2: &Lts, s2: usize) -> BisimReport {
    let (g, n1) = union_graph(l1, l2, mode);
    let history = refine(&g);
    let last = history.last().expect("non-empty");
    let verdict = if last[s1] == last[s2 + n1] {
        Verdict::Equivalent
    } else {
        Verdict::Distinguished(witness(&g, &history, s1, s2 + n1))
    };
    BisimReport { verdict, bounded: l1.is_bounded() || l2.is_bounded() }
}

pub fn strong_bisim(l1: &Lts, s1: usize, l2: &Lts, s2: usize) -> BisimReport {
    bisim(Mode::Strong, l1, s1, l2, s2)
}

pub fn weak_bisim(l1: &Lts, s1: usize, l2: &Lts, s2: usize) -> BisimReport {
    bisim(Mode::Weak, l1, s1, l2, s2)
}

/// Default number of environment messages offered as inputs.
pub const DEFAULT_MESSAGE_CAP: usize = 32;

/// Universe, message universe and transition systems for two programs,
/// sharing one domain so labels compare.
pub fn compare_programs(
    a: &Program,
    b: &Program,
    mode: Mode,
    opts: &ExploreOptions,
    message_cap: usize,
) -> Result<BisimReport> {
    let mut u = Universe::for_program(a);
    u.merge(&Universe::for_program(b));
    let mut opts = opts.clone();
    if opts.inputs.is_none() {
        opts.inputs = Some(MessageUniverse::for_programs(&[a, b], &u, message_cap));
    }
    let l1 = build_lts(&a.main, &a.definitions, &u, &opts)?;
    let l2 = build_lts(&b.main, &b.definitions, &u, &opts)?;
    Ok(bisim(mode, &l1, l1.initial, &l2, l2.initial))
}

/// One-hole system contexts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Context {
    Hole,
    ParLeft(Box<Context>, System),
    ParRight(System, Box<Context>),
    Nu(Sym, Box<Context>),
    Bang(Box<Context>),
}

impl Context {
    pub fn fill(&self, s: &System) -> System {
        match self {
            Context::Hole => s.clone(),
            Context::ParLeft(c, r) => System::Par(Box::new(c.fill(s)), Box::new(r.clone())),
            Context::ParRight(l, c) => System::Par(Box::new(l.clone()), Box::new(c.fill(s))),
            Context::Nu(x, c) => System::Nu { name: x.clone(), body: Box::new(c.fill(s)) },
            Context::Bang(c) => System::Bang { body: Box::new(c.fill(s)), spawned: 0 },
        }
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hole =
            System::Comp { env: AttributeEnv::new(), proc: Process::Call { name: Sym::new("HOLE"), args: vec![] } };
        write!(f, "{}", self.fill(&hole))
    }
}

fn filler_pool() -> Vec<System> {
    [
        "{g := 'a'}:(tt)(x).0",
        "{}:('m')@(tt).0",
        "{r := 1}:(tt)(x).(x)@(tt).0",
        "{}:()@(ff).0",
        "{g := 'b'}:('v')@(g = 'b').0",
        "{g := 'a'}:(x = 'm')(x).[g := 'b']0",
    ]
    .iter()
    .map(|s| parse_system(s).expect("filler parses"))
    .collect()
}

/// Random context of nesting depth at most `depth`.
pub fn random_context<R: Rng + ?Sized>(rng: &mut R, depth: usize, names: &[Sym]) -> Context {
    let pool = filler_pool();
    let mut c = Context::Hole;
    for _ in 0..rng.gen_range(0..=depth) {
        c = match rng.gen_range(0..4) {
            0 => Context::ParLeft(Box::new(c), pool.choose(rng).expect("pool").clone()),
            1 => Context::ParRight(pool.choose(rng).expect("pool").clone(), Box::new(c)),
            2 => Context::Nu(names.choose(rng).expect("names").clone(), Box::new(c)),
            _ => Context::Bang(Box::new(c)),
        };
    }
    c
}

#[derive(Clone, Debug, Default)]
pub struct CongruenceReport {
    pub trials: usize,
    /// Trials whose verdict was computed on bounded systems.
    pub bounded: usize,
    /// Bounded trials that came out distinguished; not counted as
    /// violations since the bound alone can separate the two sides.
    pub inconclusive: Vec<String>,
    pub violations: Vec<String>,
}

/// Places each pair in `trials` random contexts and re-checks the
/// equivalence. Pairs are expected to be equivalent beforehand.
pub fn congruence_sample(
    pairs: &[(Program, Program)],
    mode: Mode,
    trials: usize,
    seed: u64,
    opts: &ExploreOptions,
) -> Result<CongruenceReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CongruenceReport::default();
    if pairs.is_empty() {
        return Ok(report);
    }
    for i in 0..trials {
        let (a, b) = &pairs[i % pairs.len()];
        let mut names: BTreeSet<Sym> = a.main.free_names();
        names.extend(b.main.free_names());
        names.extend(["m", "v", "fresh"].map(Sym::new));
        let names: Vec<Sym> = names.into_iter().collect();
        let ctx = random_context(&mut rng, 2, &names);
        let wrap = |p: &Program| Program {
            declared_attrs: p.declared_attrs.clone(),
            definitions: p.definitions.clone(),
            main: ctx.fill(&p.main),
        };
        let r = compare_programs(&wrap(a), &wrap(b), mode, opts, DEFAULT_MESSAGE_CAP)?;
        report.trials += 1;
        if r.bounded {
            report.bounded += 1;
        }
        if !r.verdict.is_equivalent() {
            let what = format!("{ctx}\n  left: {}\n  right: {}", a.main, b.main);
            if r.bounded {
                report.inconclusive.push(what);
            } else {
                report.violations.push(what);
            }
        }
    }
    Ok(report)
}

/// Groups state indices of `lts` by their bisimulation class under `mode`.
pub fn classes(lts: &Lts, mode: Mode) -> BTreeMap<usize, Vec<usize>> {
    let empty = Lts { states: vec![], initial: 0, transitions: vec![], truncated: None, repl_saturated: false };
    let (g, _) = union_graph(lts, &empty, mode);
    let history = refine(&g);
    let last = history.last().expect("non-empty");
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (s, &b) in last.iter().enumerate() {
        out.entry(b).or_default().push(s);
    }
    out
}
