//! Transitions of a single component `Γ:P`: the outputs it can perform and
//! its reaction (receive or discard) to a broadcast message.

use rand::Rng;

use crate::attributes::{close_predicate, eval_expr, eval_predicate, satisfies, update_env};
use crate::error::{Error, Result};
use crate::syntax::*;

/// Nesting bound on unfolding calls without an intervening action.
pub const MAX_UNFOLD: usize = 64;

/// A broadcast message: closed sender predicate plus transmitted values.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Message {
    pub pred: Predicate,
    pub values: Vec<Value>,
}

impl Message {
    pub fn new(pred: Predicate, values: Vec<Value>) -> Self {
        Message { pred, values }
    }
}

/// Component-level transition labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ComponentLabel {
    Out(Message),
    In(Message),
    Discard(Message),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputStep {
    pub msg: Message,
    pub env: AttributeEnv,
    pub proc: Process,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Delivery {
    /// One entry per receive derivation.
    Receives(Vec<(AttributeEnv, Process)>),
    Discards,
}

impl Delivery {
    pub fn is_discard(&self) -> bool {
        matches!(self, Delivery::Discards)
    }
}

fn unfold<R: Rng + ?Sized>(
    name: &Sym,
    args: &[Expression],
    env: &AttributeEnv,
    defs: &Definitions,
    rng: &mut R,
) -> Result<Option<Process>> {
    let def = defs.get(name).ok_or_else(|| Error::UnknownDefinition(name.clone()))?;
    let mut s = Subst::new();
    for (x, e) in def.params.iter().zip(args) {
        match eval_expr(e, env, rng) {
            Some(v) => {
                s.insert(x.clone(), v);
            }
            None => return Ok(None),
        }
    }
    Ok(Some(def.body.substitute(&s)))
}

fn eval_all<R: Rng + ?Sized>(exprs: &[Expression], env: &AttributeEnv, rng: &mut R) -> Option<Vec<Value>> {
    exprs.iter().map(|e| eval_expr(e, env, rng)).collect()
}

fn eval_assigns<R: Rng + ?Sized>(
    assigns: &[(Sym, Expression)],
    env: &AttributeEnv,
    rng: &mut R,
) -> Option<Vec<(Sym, Value)>> {
    assigns.iter().map(|(a, e)| Some((a.clone(), eval_expr(e, env, rng)?))).collect()
}

/// Every output `Γ:P` can perform, in syntactic left-to-right order.
/// Updates and awareness guards are taken atomically with the action they
/// prefix.
pub fn output_steps<R: Rng + ?Sized>(
    env: &AttributeEnv,
    proc: &Process,
    defs: &Definitions,
    rng: &mut R,
) -> Result<Vec<OutputStep>> {
    let mut out = Vec::new();
    outputs(env, proc, defs, rng, 0, &mut out)?;
    Ok(out)
}

fn outputs<R: Rng + ?Sized>(
    env: &AttributeEnv,
    proc: &Process,
    defs: &Definitions,
    rng: &mut R,
    depth: usize,
    out: &mut Vec<OutputStep>,
) -> Result<()> {
    match proc {
        Process::Nil | Process::In { .. } => {}
        Process::Out { exprs, pred, cont } => {
            if let (Some(values), Some(pred)) = (eval_all(exprs, env, rng), close_predicate(pred, env)) {
                out.push(OutputStep { msg: Message { pred, values }, env: env.clone(), proc: (**cont).clone() });
            }
        }
        Process::Upd { assigns, cont } => {
            if let Some(vals) = eval_assigns(assigns, env, rng) {
                outputs(&update_env(env, &vals), cont, defs, rng, depth, out)?;
            }
        }
        Process::Aware { pred, cont } => {
            if eval_predicate(env, pred) == Some(true) {
                outputs(env, cont, defs, rng, depth, out)?;
            }
        }
        Process::Sum(l, r) => {
            outputs(env, l, defs, rng, depth, out)?;
            outputs(env, r, defs, rng, depth, out)?;
        }
        Process::Par(l, r) => {
            let mut left = Vec::new();
            outputs(env, l, defs, rng, depth, &mut left)?;
            out.extend(left.into_iter().map(|s| OutputStep { proc: Process::par(s.proc, (**r).clone()), ..s }));
            let mut right = Vec::new();
            outputs(env, r, defs, rng, depth, &mut right)?;
            out.extend(right.into_iter().map(|s| OutputStep { proc: Process::par((**l).clone(), s.proc), ..s }));
        }
        Process::Call { name, args } => {
            if depth < MAX_UNFOLD {
                if let Some(body) = unfold(name, args, env, defs, rng)? {
                    outputs(env, &body, defs, rng, depth + 1, out)?;
                }
            }
        }
    }
    Ok(())
}

/// The reaction of `Γ:P` to `msg`: every receive derivation, or a discard
/// when no thread or branch can receive.
pub fn deliver<R: Rng + ?Sized>(
    env: &AttributeEnv,
    proc: &Process,
    defs: &Definitions,
    msg: &Message,
    rng: &mut R,
) -> Result<Delivery> {
    let mut out = Vec::new();
    receives(env, proc, defs, msg, rng, 0, &mut out)?;
    Ok(if out.is_empty() { Delivery::Discards } else { Delivery::Receives(out) })
}

fn receives<R: Rng + ?Sized>(
    env: &AttributeEnv,
    proc: &Process,
    defs: &Definitions,
    msg: &Message,
    rng: &mut R,
    depth: usize,
    out: &mut Vec<(AttributeEnv, Process)>,
) -> Result<()> {
    match proc {
        Process::Nil | Process::Out { .. } => {}
        Process::In { pred, vars, cont } => {
            if vars.len() != msg.values.len() {
                return Ok(());
            }
            let s: Subst = vars.iter().cloned().zip(msg.values.iter().cloned()).collect();
            if eval_predicate(env, &pred.substitute(&s)) == Some(true) && satisfies(env, &msg.pred) {
                out.push((env.clone(), cont.substitute(&s)));
            }
        }
        Process::Upd { assigns, cont } => {
            if let Some(vals) = eval_assigns(assigns, env, rng) {
                receives(&update_env(env, &vals), cont, defs, msg, rng, depth, out)?;
            }
        }
        Process::Aware { pred, cont } => {
            if eval_predicate(env, pred) == Some(true) {
                receives(env, cont, defs, msg, rng, depth, out)?;
            }
        }
        Process::Sum(l, r) => {
            receives(env, l, defs, msg, rng, depth, out)?;
            receives(env, r, defs, msg, rng, depth, out)?;
        }
        Process::Par(l, r) => {
            let mut left = Vec::new();
            receives(env, l, defs, msg, rng, depth, &mut left)?;
            out.extend(left.into_iter().map(|(e, p)| (e, Process::par(p, (**r).clone()))));
            let mut right = Vec::new();
            receives(env, r, defs, msg, rng, depth, &mut right)?;
            out.extend(right.into_iter().map(|(e, p)| (e, Process::par((**l).clone(), p))));
        }
        Process::Call { name, args } => {
            if depth < MAX_UNFOLD {
                if let Some(body) = unfold(name, args, env, defs, rng)? {
                    receives(env, &body, defs, msg, rng, depth + 1, out)?;
                }
            }
        }
    }
    Ok(())
}
