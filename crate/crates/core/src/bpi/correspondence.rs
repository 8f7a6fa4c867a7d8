//! Step-by-step comparison of a broadcast pi-calculus term with its AbC
//! translation.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{bpi_steps, encode_with_defs, BpiLabel, BpiProcess, NameMap};
use crate::attributes::Universe;
use crate::error::Result;
use crate::explorer::{normalize_extrusion, CanonicalLabel, LabelCanon};
use crate::syntax::*;
use crate::system::{system_steps, StepOptions, SystemLabel};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CorrespondenceReport {
    /// Source states visited.
    pub states: usize,
    /// Source transitions matched.
    pub steps: usize,
    /// Some state at the depth bound still had moves.
    pub truncated: bool,
    pub step_mismatches: Vec<String>,
    pub barb_mismatches: Vec<String>,
    pub divergence_mismatches: Vec<String>,
    pub invariance_mismatches: Vec<String>,
}

impl CorrespondenceReport {
    pub fn holds(&self) -> bool {
        self.step_mismatches.is_empty()
            && self.barb_mismatches.is_empty()
            && self.divergence_mismatches.is_empty()
            && self.invariance_mismatches.is_empty()
    }
}

fn translate_label(l: &BpiLabel) -> SystemLabel {
    let payload = |chan: &Sym, values: &[Sym]| {
        let mut vs = vec![Value::Name(chan.clone())];
        vs.extend(values.iter().map(|v| Value::Name(v.clone())));
        let c = Expression::Lit(Value::Name(chan.clone()));
        (Predicate::eq(c.clone(), c), vs)
    };
    match l {
        BpiLabel::Tau => SystemLabel::Tau,
        BpiLabel::Out { bound, chan, values } => {
            let (pred, values) = payload(chan, values);
            SystemLabel::Out { bound: bound.clone(), pred, values }
        }
        BpiLabel::In { chan, values } => {
            let (pred, values) = payload(chan, values);
            SystemLabel::In(crate::component::Message { pred, values })
        }
    }
}

/// Renaming of extruded names performed by normalization.
fn extruded_renaming(before: &SystemLabel, after: &SystemLabel) -> Option<NameMap> {
    match (before, after) {
        (SystemLabel::Out { bound, values: v1, .. }, SystemLabel::Out { values: v2, .. }) if !bound.is_empty() => Some(
            v1.iter()
                .zip(v2)
                .filter_map(|(a, b)| match (a, b) {
                    (Value::Name(a), Value::Name(b)) if bound.contains(a) => Some((a.clone(), b.clone())),
                    _ => None,
                })
                .collect(),
        ),
        _ => None,
    }
}

type Step = (CanonicalLabel, System);

struct Graph {
    index: HashMap<System, usize>,
    edges: Vec<Vec<(bool, usize)>>,
}

impl Graph {
    fn new() -> Self {
        Graph { index: HashMap::new(), edges: vec![] }
    }

    fn node(&mut self, s: &System) -> (usize, bool) {
        if let Some(&i) = self.index.get(s) {
            return (i, false);
        }
        let i = self.edges.len();
        self.index.insert(s.clone(), i);
        self.edges.push(vec![]);
        (i, true)
    }

    /// States from which a cycle of silent moves is reachable through
    /// silent moves.
    fn divergent(&self) -> Vec<bool> {
        let n = self.edges.len();
        let tau: Vec<Vec<usize>> =
            self.edges.iter().map(|es| es.iter().filter(|e| e.0).map(|e| e.1).collect()).collect();
        // states on a silent cycle: those that can reach themselves
        let mut on_cycle = vec![false; n];
        for s in 0..n {
            let mut seen = vec![false; n];
            let mut stack = tau[s].clone();
            while let Some(x) = stack.pop() {
                if x == s {
                    on_cycle[s] = true;
                    break;
                }
                if !seen[x] {
                    seen[x] = true;
                    stack.extend(tau[x].iter().copied());
                }
            }
        }
        (0..n)
            .map(|s| {
                let mut seen = vec![false; n];
                let mut stack = vec![s];
                while let Some(x) = stack.pop() {
                    if on_cycle[x] {
                        return true;
                    }
                    if !seen[x] {
                        seen[x] = true;
                        stack.extend(tau[x].iter().copied());
                    }
                }
                false
            })
            .collect()
    }
}

fn sorted(mut v: Vec<Step>) -> Vec<Step> {
    v.sort();
    v
}

fn describe(steps: &[Step]) -> String {
    steps.iter().map(|(l, s)| format!("    {l:?} -> {s}")).collect::<Vec<_>>().join("\n")
}

fn rename_free(sys: &System, m: &NameMap) -> System {
    let temps: Vec<(Sym, Sym, Sym)> =
        m.iter().enumerate().map(|(i, (k, v))| (k.clone(), Sym::new(&format!("#perm{i}")), v.clone())).collect();
    let mut out = canonical_system(sys);
    for (from, tmp, _) in &temps {
        out = out.rename_free_name(from, tmp);
    }
    for (_, tmp, to) in &temps {
        out = out.rename_free_name(tmp, to);
    }
    out
}

/// Explores `p` to `depth` and checks at every visited state that the
/// translation has exactly the corresponding moves, the same barbs and
/// the same divergence, and that translation commutes with sampled
/// permutations of free names.
pub fn correspondence_check(p: &BpiProcess, depth: usize, opts: &StepOptions) -> Result<CorrespondenceReport> {
    let (main0, defs) = encode_with_defs(p);
    let u = Universe::for_system(&main0, &defs, &BTreeSet::new());
    let mut canon = LabelCanon::new(&u);
    let mut report = CorrespondenceReport::default();

    let key = |q: &BpiProcess| canonical_system(&encode_with_defs(q).0);

    let mut src_graph = Graph::new();
    let mut states: Vec<(BpiProcess, usize)> = vec![];
    let mut queue = VecDeque::new();
    let (i0, _) = src_graph.node(&key(p));
    states.push((p.clone(), 0));
    queue.push_back(i0);
    while let Some(id) = queue.pop_front() {
        let (q, d) = states[id].clone();
        let bsteps = bpi_steps(&q);
        let enc = encode_with_defs(&q).0;
        if d >= depth {
            if !bsteps.is_empty() {
                report.truncated = true;
            }
            continue;
        }
        let mut mapped = Vec::new();
        for (l, q2) in &bsteps {
            let raw = translate_label(l);
            let (sl, target) = normalize_extrusion(&enc, raw.clone(), encode_with_defs(q2).0);
            let target = canonical_system(&target);
            let q2 = &extruded_renaming(&raw, &sl).map_or_else(|| q2.clone(), |m| q2.rename(&m));
            mapped.push((canon.canonical(&sl)?, target.clone()));
            let (j, new) = src_graph.node(&target);
            src_graph.edges[id].push((matches!(l, BpiLabel::Tau), j));
            if new {
                states.push((q2.clone(), d + 1));
                queue.push_back(j);
            }
        }
        let mut target_steps = Vec::new();
        for (l, t) in system_steps(&enc, &defs, &u, opts)? {
            let (l, t) = normalize_extrusion(&enc, l, t);
            target_steps.push((canon.canonical(&l)?, canonical_system(&t)));
        }
        let (mapped, target_steps) = (sorted(mapped), sorted(target_steps));
        if mapped != target_steps {
            report.step_mismatches.push(format!(
                "{q}\n  source moves ({}):\n{}\n  translated moves ({}):\n{}",
                mapped.len(),
                describe(&mapped),
                target_steps.len(),
                describe(&target_steps)
            ));
        } else {
            report.steps += mapped.len();
        }

        let src_barbs: BTreeSet<Sym> = bsteps
            .iter()
            .filter_map(|(l, _)| match l {
                BpiLabel::Out { chan, .. } => Some(chan.clone()),
                _ => None,
            })
            .collect();
        let tgt_barbs: BTreeSet<Sym> = target_steps
            .iter()
            .filter_map(|(l, _)| match l {
                CanonicalLabel::Out { pred, values, .. } if pred.is_tt() => match values.first() {
                    Some(Value::Name(n)) => Some(n.clone()),
                    _ => None,
                },
                _ => None,
            })
            .collect();
        if src_barbs != tgt_barbs {
            report.barb_mismatches.push(format!("{q}: source barbs {src_barbs:?}, translated barbs {tgt_barbs:?}"));
        }
    }
    report.states = states.len();

    // independent exploration of the translation
    let mut tgt_graph = Graph::new();
    let mut tqueue = VecDeque::new();
    let c0 = canonical_system(&main0);
    let (t0, _) = tgt_graph.node(&c0);
    let mut tstates = vec![(c0, 0usize)];
    tqueue.push_back(t0);
    while let Some(id) = tqueue.pop_front() {
        let (s, d) = tstates[id].clone();
        if d >= depth {
            continue;
        }
        for (l, t) in system_steps(&s, &defs, &u, opts)? {
            let (l, t) = normalize_extrusion(&s, l, t);
            let tau = canon.canonical(&l)?.is_tau();
            let t = canonical_system(&t);
            let (j, new) = tgt_graph.node(&t);
            tgt_graph.edges[id].push((tau, j));
            if new {
                tstates.push((t, d + 1));
                tqueue.push_back(j);
            }
        }
    }
    let src_div = src_graph.divergent();
    let tgt_div = tgt_graph.divergent();
    let by_key: BTreeMap<usize, &System> = src_graph.index.iter().map(|(s, &i)| (i, s)).collect();
    for (i, s) in by_key {
        match tgt_graph.index.get(s) {
            Some(&j) if src_div[i] != tgt_div[j] => report.divergence_mismatches.push(format!(
                "{}: source divergent {}, translation divergent {}",
                states[i].0, src_div[i], tgt_div[j]
            )),
            Some(_) => {}
            None => report.divergence_mismatches.push(format!("{}: translation never reaches this state", states[i].0)),
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let free: Vec<Sym> = p.free_names().into_iter().collect();
    for _ in 0..4 {
        let mut pool = free.clone();
        let all = p.all_names();
        pool.push(fresh_name(&Sym::new("f"), &all));
        let mut image = pool.clone();
        image.shuffle(&mut rng);
        let sigma: NameMap = pool.into_iter().zip(image).collect();
        let lhs = canonical_system(&encode_with_defs(&p.rename(&sigma)).0);
        let rhs = canonical_system(&rename_free(&encode_with_defs(p).0, &sigma));
        if lhs != rhs {
            report.invariance_mismatches.push(format!("{p} under {sigma:?}: {lhs} vs {rhs}"));
        }
    }
    Ok(report)
}
