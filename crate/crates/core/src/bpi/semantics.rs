//! Broadcast semantics: an output on `a` is heard by every parallel
//! subterm listening on `a`; subterms with no enabled input on `a`
//! discard it unchanged. Restricted channels turn outputs into silent
//! moves and transmitted restricted names are extruded.

use std::collections::BTreeSet;
use std::fmt;

use super::{BpiProcess, Guarded, NameMap};
use crate::component::MAX_UNFOLD;
use crate::syntax::{fresh_name, Sym};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BpiLabel {
    Out { bound: Vec<Sym>, chan: Sym, values: Vec<Sym> },
    In { chan: Sym, values: Vec<Sym> },
    Tau,
}

impl fmt::Display for BpiLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[Sym]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ");
        match self {
            BpiLabel::Tau => write!(f, "tau"),
            BpiLabel::Out { bound, chan, values } => {
                if !bound.is_empty() {
                    write!(f, "nu {}. ", list(bound))?;
                }
                write!(f, "{chan}<{}>", list(values))
            }
            BpiLabel::In { chan, values } => write!(f, "{chan}({})", list(values)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BpiDelivery {
    Receives(Vec<BpiProcess>),
    Discards,
}

/// Guarded-level outputs and silent moves.
fn guarded_outputs(g: &Guarded, depth: usize, out: &mut Vec<(BpiLabel, Guarded)>) {
    match g {
        Guarded::Nil | Guarded::In { .. } | Guarded::Call { .. } => {}
        Guarded::Tau(c) => out.push((BpiLabel::Tau, (**c).clone())),
        Guarded::Out { chan, args, cont } => {
            out.push((BpiLabel::Out { bound: vec![], chan: chan.clone(), values: args.clone() }, (**cont).clone()))
        }
        Guarded::Sum(l, r) => {
            guarded_outputs(l, depth, out);
            guarded_outputs(r, depth, out);
        }
        Guarded::Rec { .. } => {
            if depth < MAX_UNFOLD {
                guarded_outputs(&g.unfold(), depth + 1, out);
            }
        }
    }
}

fn guarded_receives(g: &Guarded, chan: &Sym, values: &[Sym], depth: usize, out: &mut Vec<Guarded>) {
    match g {
        Guarded::Nil | Guarded::Tau(_) | Guarded::Out { .. } | Guarded::Call { .. } => {}
        Guarded::In { chan: c, vars, cont } => {
            if c == chan && vars.len() == values.len() {
                let m: NameMap = vars.iter().cloned().zip(values.iter().cloned()).collect();
                out.push(cont.rename(&m));
            }
        }
        Guarded::Sum(l, r) => {
            guarded_receives(l, chan, values, depth, out);
            guarded_receives(r, chan, values, depth, out);
        }
        Guarded::Rec { .. } => {
            if depth < MAX_UNFOLD {
                guarded_receives(&g.unfold(), chan, values, depth + 1, out);
            }
        }
    }
}

/// Reaction of `p` to a broadcast of `values` on `chan`. `avoid` holds
/// names that restricted binders must not clash with.
pub fn react(p: &BpiProcess, chan: &Sym, values: &[Sym], avoid: &BTreeSet<Sym>) -> BpiDelivery {
    match p {
        BpiProcess::G(g) => {
            let mut out = Vec::new();
            guarded_receives(g, chan, values, 0, &mut out);
            if out.is_empty() {
                BpiDelivery::Discards
            } else {
                BpiDelivery::Receives(out.into_iter().map(BpiProcess::G).collect())
            }
        }
        BpiProcess::Par(l, r) => {
            let side = |q: &BpiProcess| match react(q, chan, values, avoid) {
                BpiDelivery::Receives(v) => (v, true),
                BpiDelivery::Discards => (vec![q.clone()], false),
            };
            let (ls, lrecv) = side(l);
            let (rs, rrecv) = side(r);
            if !lrecv && !rrecv {
                return BpiDelivery::Discards;
            }
            let mut out = Vec::new();
            for a in &ls {
                for b in &rs {
                    out.push(BpiProcess::par(a.clone(), b.clone()));
                }
            }
            BpiDelivery::Receives(out)
        }
        BpiProcess::Nu(x, body) => {
            let (x, body) = if values.contains(x) || chan == x {
                let mut taken = avoid.clone();
                taken.extend(p.all_names());
                taken.extend(values.iter().cloned());
                taken.insert(chan.clone());
                let fresh = fresh_name(x, &taken);
                (fresh.clone(), body.rename(&NameMap::from([(x.clone(), fresh)])))
            } else {
                (x.clone(), (**body).clone())
            };
            match react(&body, chan, values, avoid) {
                BpiDelivery::Receives(v) => {
                    BpiDelivery::Receives(v.into_iter().map(|q| BpiProcess::Nu(x.clone(), Box::new(q))).collect())
                }
                BpiDelivery::Discards => BpiDelivery::Discards,
            }
        }
    }
}

fn steps(p: &BpiProcess, avoid: &BTreeSet<Sym>) -> Vec<(BpiLabel, BpiProcess)> {
    match p {
        BpiProcess::G(g) => {
            let mut out = Vec::new();
            guarded_outputs(g, 0, &mut out);
            out.into_iter().map(|(l, g)| (l, BpiProcess::G(g))).collect()
        }
        BpiProcess::Par(l, r) => {
            let mut out = Vec::new();
            for (sender, other, left) in [(l, r, true), (r, l, false)] {
                for (label, s2) in steps(sender, avoid) {
                    let reactions = match &label {
                        BpiLabel::Out { chan, values, .. } => match react(other, chan, values, avoid) {
                            BpiDelivery::Receives(v) => v,
                            BpiDelivery::Discards => vec![(**other).clone()],
                        },
                        _ => vec![(**other).clone()],
                    };
                    for o2 in reactions {
                        let next = if left { BpiProcess::par(s2.clone(), o2) } else { BpiProcess::par(o2, s2.clone()) };
                        out.push((label.clone(), next));
                    }
                }
            }
            out
        }
        BpiProcess::Nu(x, body) => steps(body, avoid)
            .into_iter()
            .map(|(label, q)| match label {
                BpiLabel::Out { chan, bound, .. } if chan == *x => {
                    let q = bound.iter().rev().fold(q, |acc, b| BpiProcess::Nu(b.clone(), Box::new(acc)));
                    (BpiLabel::Tau, BpiProcess::Nu(x.clone(), Box::new(q)))
                }
                BpiLabel::Out { mut bound, chan, values } if values.contains(x) => {
                    let mut taken = avoid.clone();
                    taken.extend(p.all_names());
                    taken.extend(bound.iter().cloned());
                    let fresh = fresh_name(x, &taken);
                    let m = NameMap::from([(x.clone(), fresh.clone())]);
                    let values = values.iter().map(|v| if v == x { fresh.clone() } else { v.clone() }).collect();
                    bound.push(fresh);
                    (BpiLabel::Out { bound, chan, values }, q.rename(&m))
                }
                other => (other, BpiProcess::Nu(x.clone(), Box::new(q))),
            })
            .collect(),
    }
}

/// Outputs and silent moves of a closed process, one per derivation.
pub fn bpi_steps(p: &BpiProcess) -> Vec<(BpiLabel, BpiProcess)> {
    steps(p, &p.all_names())
}
