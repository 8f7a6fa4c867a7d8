//! System transitions: broadcast composition over `||`, replication,
//! restriction with predicate hiding and scope opening.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::attributes::{is_ff, restrict_predicate, Universe};
use crate::component::{deliver, output_steps, Delivery, Message};
use crate::error::{Error, Result};
use crate::syntax::names::{fresh_name, program_names};
use crate::syntax::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StepOptions {
    /// Copies a replication may spawn along one path.
    pub repl_bound: u32,
    /// Ceiling on receiver combinations enumerated for one output.
    pub max_combinations: usize,
    pub seed: u64,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions { repl_bound: 2, max_combinations: 100_000, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SystemLabel {
    Out { bound: Vec<Sym>, pred: Predicate, values: Vec<Value> },
    In(Message),
    Tau,
}

impl SystemLabel {
    /// Names of the label; empty for τ and for outputs on a predicate
    /// equivalent to `ff`.
    pub fn names(&self, u: &Universe) -> Result<BTreeSet<Sym>> {
        match self {
            SystemLabel::Tau => Ok(BTreeSet::new()),
            SystemLabel::Out { pred, .. } if is_ff(pred, u)? => Ok(BTreeSet::new()),
            SystemLabel::Out { pred, values, .. } | SystemLabel::In(Message { pred, values }) => {
                let mut out = pred.names();
                values.iter().for_each(|v| v.collect_names(&mut out));
                Ok(out)
            }
        }
    }

    pub fn free_names(&self, u: &Universe) -> Result<BTreeSet<Sym>> {
        let mut out = self.names(u)?;
        if let SystemLabel::Out { bound, .. } = self {
            for b in bound {
                out.remove(b);
            }
        }
        Ok(out)
    }

    pub fn bound_names(&self) -> BTreeSet<Sym> {
        match self {
            SystemLabel::Out { bound, .. } => bound.iter().cloned().collect(),
            _ => BTreeSet::new(),
        }
    }
}

impl std::fmt::Display for SystemLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let values = |f: &mut std::fmt::Formatter<'_>, vs: &[Value]| {
            f.write_str("(")?;
            for (i, v) in vs.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str(")")
        };
        match self {
            SystemLabel::Tau => f.write_str("tau"),
            SystemLabel::Out { bound, pred, values: vs } => {
                if !bound.is_empty() {
                    f.write_str("nu")?;
                    for b in bound {
                        write!(f, " '{b}'")?;
                    }
                    f.write_str(". ")?;
                }
                write!(f, "out[{pred}]")?;
                values(f, vs)
            }
            SystemLabel::In(m) => {
                write!(f, "in[{}]", m.pred)?;
                values(f, &m.values)
            }
        }
    }
}

enum Raw {
    Out { bound: Vec<Sym>, msg: Message },
    Tau,
}

/// Deterministic random source for the steps of one state: derived from
/// the run seed and the state's structure, so results do not depend on
/// exploration order.
pub fn state_rng(seed: u64, sys: &System) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(format!("{sys:?}").as_bytes());
    let digest: [u8; 32] = h.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

/// Smallest `{prefix}{k}` not in `avoid`.
fn indexed_name(prefix: &str, avoid: &BTreeSet<Sym>) -> Sym {
    (0..).map(|k| Sym::new(&format!("{prefix}{k}"))).find(|s| !avoid.contains(s)).expect("unbounded range")
}

struct Stepper<'a> {
    defs: &'a Definitions,
    u: &'a Universe,
    opts: StepOptions,
    rng: ChaCha8Rng,
    avoid: BTreeSet<Sym>,
}

impl<'a> Stepper<'a> {
    fn new(sys: &System, defs: &'a Definitions, u: &'a Universe, opts: StepOptions) -> Self {
        Stepper { defs, u, opts, rng: state_rng(opts.seed, sys), avoid: program_names(sys, defs) }
    }

    fn fresh(&mut self, hint: &Sym) -> Sym {
        let s = fresh_name(hint, &self.avoid);
        self.avoid.insert(s.clone());
        s
    }

    fn extruded(&mut self) -> Sym {
        let s = indexed_name("#e", &self.avoid);
        self.avoid.insert(s.clone());
        s
    }

    fn outputs(&mut self, sys: &System) -> Result<Vec<(Raw, System)>> {
        let mut out = Vec::new();
        match sys {
            System::Comp { env, proc } => {
                for step in output_steps(env, proc, self.defs, &mut self.rng)? {
                    let next = System::Comp { env: step.env, proc: step.proc };
                    if is_ff(&step.msg.pred, self.u)? {
                        out.push((Raw::Tau, next));
                    } else {
                        out.push((Raw::Out { bound: vec![], msg: step.msg }, next));
                    }
                }
            }
            System::Par(l, r) => {
                for (raw, l2) in self.outputs(l)? {
                    self.broadcast(raw, l2, r, false, &mut out)?;
                }
                for (raw, r2) in self.outputs(r)? {
                    self.broadcast(raw, r2, l, true, &mut out)?;
                }
            }
            System::Bang { body, spawned } => {
                if *spawned < self.opts.repl_bound {
                    let again = System::Bang { body: body.clone(), spawned: spawned + 1 };
                    for (raw, b2) in self.outputs(body)? {
                        out.push((raw, System::par(b2, again.clone())));
                    }
                }
            }
            System::Nu { name, body } => {
                for (raw, c2) in self.outputs(body)? {
                    out.push(self.restrict(name, raw, c2)?);
                }
            }
        }
        Ok(out)
    }

    /// Pairs a sender's move with every reaction of its sibling.
    fn broadcast(
        &mut self,
        raw: Raw,
        sender: System,
        sibling: &System,
        sender_right: bool,
        out: &mut Vec<(Raw, System)>,
    ) -> Result<()> {
        let join = |s: System, o: System| if sender_right { System::par(o, s) } else { System::par(s, o) };
        match raw {
            Raw::Tau => out.push((Raw::Tau, join(sender, sibling.clone()))),
            Raw::Out { bound, msg } => {
                for o in self.inputs(sibling, &msg)? {
                    out.push((Raw::Out { bound: bound.clone(), msg: msg.clone() }, join(sender.clone(), o)));
                }
            }
        }
        Ok(())
    }

    fn restrict(&mut self, x: &Sym, raw: Raw, c2: System) -> Result<(Raw, System)> {
        let nu = |name: &Sym, body: System| System::Nu { name: name.clone(), body: Box::new(body) };
        match raw {
            Raw::Tau => Ok((Raw::Tau, nu(x, c2))),
            Raw::Out { bound, msg } => {
                if msg.pred.mentions_name(x) {
                    let hidden = restrict_predicate(&msg.pred, x);
                    if is_ff(&hidden, self.u)? {
                        let inner = bound.iter().rev().fold(c2, |acc, b| nu(b, acc));
                        Ok((Raw::Tau, nu(x, inner)))
                    } else {
                        Ok((Raw::Out { bound, msg: Message { pred: hidden, values: msg.values } }, nu(x, c2)))
                    }
                } else if msg.values.iter().any(|v| v.mentions_name(x)) {
                    let y = self.extruded();
                    let values = msg.values.iter().map(|v| v.rename_name(x, &y)).collect();
                    let mut bound = bound;
                    bound.push(y.clone());
                    Ok((Raw::Out { bound, msg: Message { pred: msg.pred, values } }, c2.rename_free_name(x, &y)))
                } else {
                    Ok((Raw::Out { bound, msg }, nu(x, c2)))
                }
            }
        }
    }

    /// Every state reachable by `sys` receiving `msg` as a whole: each
    /// component receives or, if it cannot, discards and stays unchanged.
    fn inputs(&mut self, sys: &System, msg: &Message) -> Result<Vec<System>> {
        let out = match sys {
            System::Comp { env, proc } => match deliver(env, proc, self.defs, msg, &mut self.rng)? {
                Delivery::Discards => vec![sys.clone()],
                Delivery::Receives(v) => v.into_iter().map(|(env, proc)| System::Comp { env, proc }).collect(),
            },
            System::Par(l, r) => {
                let ls = self.inputs(l, msg)?;
                let rs = self.inputs(r, msg)?;
                if ls.len().saturating_mul(rs.len()) > self.opts.max_combinations {
                    return Err(Error::BudgetExceeded(self.opts.max_combinations));
                }
                let mut v = Vec::with_capacity(ls.len() * rs.len());
                for a in &ls {
                    for b in &rs {
                        v.push(System::par(a.clone(), b.clone()));
                    }
                }
                v
            }
            System::Bang { body, spawned } => {
                let mut v = Vec::new();
                for b2 in self.inputs(body, msg)? {
                    let next = if b2 == **body || *spawned >= self.opts.repl_bound {
                        sys.clone()
                    } else {
                        System::par(b2, System::Bang { body: body.clone(), spawned: spawned + 1 })
                    };
                    if !v.contains(&next) {
                        v.push(next);
                    }
                }
                v
            }
            System::Nu { name, body } => {
                let mentioned = msg.pred.mentions_name(name) || msg.values.iter().any(|v| v.mentions_name(name));
                let (name, body) = if mentioned {
                    let y = self.fresh(name);
                    (y.clone(), body.rename_free_name(name, &y))
                } else {
                    (name.clone(), (**body).clone())
                };
                self.inputs(&body, msg)?
                    .into_iter()
                    .map(|b| System::Nu { name: name.clone(), body: Box::new(b) })
                    .collect()
            }
        };
        Ok(out)
    }
}

/// All transitions `sys` can perform on its own (outputs and τ).
pub fn system_steps(
    sys: &System,
    defs: &Definitions,
    u: &Universe,
    opts: &StepOptions,
) -> Result<Vec<(SystemLabel, System)>> {
    let mut st = Stepper::new(sys, defs, u, *opts);
    Ok(st
        .outputs(sys)?
        .into_iter()
        .map(|(raw, s)| {
            let label = match raw {
                Raw::Tau => SystemLabel::Tau,
                Raw::Out { bound, msg } => SystemLabel::Out { bound, pred: msg.pred, values: msg.values },
            };
            (label, s)
        })
        .collect())
}

/// States reached when the environment broadcasts `msg` to `sys`.
pub fn external_input_steps(
    sys: &System,
    defs: &Definitions,
    u: &Universe,
    msg: &Message,
    opts: &StepOptions,
) -> Result<Vec<System>> {
    let mut st = Stepper::new(sys, defs, u, *opts);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for s in st.inputs(sys, msg)? {
        if seen.insert(s.clone()) {
            out.push(s);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    fn steps(src: &str) -> Vec<(SystemLabel, System)> {
        let p = parse_program(src).unwrap();
        let u = Universe::for_program(&p);
        system_steps(&p.main, &p.definitions, &u, &StepOptions::default()).unwrap()
    }

    #[test]
    fn false_predicate_send_is_silent() {
        let s = steps("{a := 1}:()@(ff).0 || {b := 2}:0");
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].0, SystemLabel::Tau);
        assert_eq!(s[0].1, parse_program("{a := 1}:0 || {b := 2}:0").unwrap().main);
    }

    #[test]
    fn broadcast_reaches_every_receiver() {
        let s = steps("{}:('m')@(tt).0 || {}:(tt)(x).(x)@(tt).0 || {}:(tt)(y).0");
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].1, parse_program("{}:0 || {}:('m')@(tt).0 || {}:0").unwrap().main);
    }

    #[test]
    fn private_channel_broadcast_is_hidden() {
        let s = steps("nu a ({}:('a', 'v')@('a' = 'a').0 || {}:(y = 'a')(y, x).0)");
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].0, SystemLabel::Tau);
    }

    #[test]
    fn partial_hiding_keeps_the_public_part() {
        let s = steps(
            "attrs: keyword, capability\nnu fwd {topic := 'news'}:('m')@(keyword = this.topic or capability = 'fwd').0",
        );
        assert_eq!(s.len(), 1);
        let SystemLabel::Out { bound, pred, .. } = &s[0].0 else { panic!("expected output") };
        assert!(bound.is_empty());
        assert_eq!(*pred, Predicate::or(crate::syntax::parse_predicate("keyword = 'news'").unwrap(), Predicate::False));
    }

    #[test]
    fn sending_a_private_name_opens_its_scope() {
        let s = steps("nu n ({}:('n')@(tt).0 || {}:(tt)(x).(x)@(tt).0)");
        assert_eq!(s.len(), 1);
        let SystemLabel::Out { bound, values, .. } = &s[0].0 else { panic!("expected output") };
        assert_eq!(bound.len(), 1);
        assert_eq!(values, &vec![Value::Name(bound[0].clone())]);
        assert!(s[0].1.free_names().contains(&bound[0]));
    }

    #[test]
    fn replication_spawns_up_to_the_bound() {
        let p = parse_program("!{}:()@(ff).0").unwrap();
        let u = Universe::for_program(&p);
        let opts = StepOptions { repl_bound: 1, ..Default::default() };
        let s = system_steps(&p.main, &p.definitions, &u, &opts).unwrap();
        assert_eq!(s.len(), 1);
        let s2 = system_steps(&s[0].1, &p.definitions, &u, &opts).unwrap();
        assert!(s2.is_empty());
    }

    #[test]
    fn external_input_to_a_receiver() {
        let p = parse_program("{a := 1}:(tt)(x).0").unwrap();
        let u = Universe::for_program(&p);
        let msg = Message::new(Predicate::True, vec![Value::name("ping")]);
        let r = external_input_steps(&p.main, &p.definitions, &u, &msg, &StepOptions::default()).unwrap();
        assert_eq!(r, vec![parse_program("{a := 1}:0").unwrap().main]);
        let nil = parse_program("{}:0").unwrap();
        let r = external_input_steps(&nil.main, &nil.definitions, &u, &msg, &StepOptions::default()).unwrap();
        assert_eq!(r, vec![nil.main]);
    }
}
