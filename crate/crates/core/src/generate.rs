//! Seeded generation of random well-formed terms.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::syntax::*;

pub const ATTRS: [&str; 4] = ["a", "b", "c", "d"];
pub const NAMES: [&str; 4] = ["m", "n", "k", "r"];
const VARS: [&str; 4] = ["x", "y", "z", "w"];

pub fn value<R: Rng + ?Sized>(rng: &mut R, depth: usize) -> Value {
    match rng.gen_range(0..if depth == 0 { 3 } else { 4 }) {
        0 => Value::Int(rng.gen_range(-5..10)),
        1 => Value::name(NAMES.choose(rng).unwrap()),
        2 => Value::Bool(rng.gen()),
        _ => Value::Tuple((0..rng.gen_range(0..3)).map(|_| value(rng, depth - 1)).collect()),
    }
}

pub fn env<R: Rng + ?Sized>(rng: &mut R) -> AttributeEnv {
    let mut out = AttributeEnv::new();
    for a in ATTRS {
        if rng.gen_bool(0.6) {
            out.insert(Sym::new(a), value(rng, 1));
        }
    }
    out
}

/// Scope of a term under construction.
#[derive(Clone, Default)]
struct Scope {
    vars: Vec<Sym>,
    in_predicate: bool,
    /// Bare attribute identifiers allowed; false inside sender-side
    /// expressions, where they could not be resolved.
    bare_attrs: bool,
}

fn expr<R: Rng + ?Sized>(rng: &mut R, sc: &Scope, depth: usize) -> Expression {
    let leaf = |rng: &mut R| -> Expression {
        loop {
            match rng.gen_range(0..5) {
                0 => return Expression::Lit(value(rng, 1)),
                1 if !sc.vars.is_empty() => return Expression::Var(sc.vars.choose(rng).unwrap().clone()),
                2 if sc.bare_attrs => return Expression::attr(ATTRS.choose(rng).unwrap()),
                3 => return Expression::this(ATTRS.choose(rng).unwrap()),
                4 if !sc.in_predicate => return Expression::Rand(rng.gen_range(1..9)),
                _ => {}
            }
        }
    };
    if depth == 0 || rng.gen_bool(0.6) {
        return leaf(rng);
    }
    let op = *[ArithOp::Add, ArithOp::Sub, ArithOp::Mul].choose(rng).unwrap();
    Expression::Arith(op, Box::new(expr(rng, sc, depth - 1)), Box::new(expr(rng, sc, depth - 1)))
}

fn predicate_in<R: Rng + ?Sized>(rng: &mut R, sc: &Scope, depth: usize) -> Predicate {
    let sc = Scope { in_predicate: true, ..sc.clone() };
    let choice = if depth == 0 { rng.gen_range(0..3) } else { rng.gen_range(0..6) };
    match choice {
        0 => Predicate::True,
        1 => Predicate::False,
        2 => {
            let op = *[CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge].choose(rng).unwrap();
            Predicate::cmp(op, expr(rng, &sc, 1), expr(rng, &sc, 1))
        }
        3 => Predicate::and(predicate_in(rng, &sc, depth - 1), predicate_in(rng, &sc, depth - 1)),
        4 => Predicate::or(predicate_in(rng, &sc, depth - 1), predicate_in(rng, &sc, depth - 1)),
        _ => Predicate::not(predicate_in(rng, &sc, depth - 1)),
    }
}

/// A predicate over bare attributes and literals only.
pub fn closed_predicate<R: Rng + ?Sized>(rng: &mut R, depth: usize) -> Predicate {
    fn atom<R: Rng + ?Sized>(rng: &mut R) -> Expression {
        if rng.gen_bool(0.5) {
            Expression::attr(ATTRS.choose(rng).unwrap())
        } else {
            Expression::Lit(value(rng, 1))
        }
    }
    let choice = if depth == 0 { rng.gen_range(0..3) } else { rng.gen_range(0..6) };
    match choice {
        0 => Predicate::True,
        1 => Predicate::False,
        2 => {
            let op = *[CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Ge].choose(rng).unwrap();
            Predicate::cmp(op, atom(rng), atom(rng))
        }
        3 => Predicate::and(closed_predicate(rng, depth - 1), closed_predicate(rng, depth - 1)),
        4 => Predicate::or(closed_predicate(rng, depth - 1), closed_predicate(rng, depth - 1)),
        _ => Predicate::not(closed_predicate(rng, depth - 1)),
    }
}

fn process<R: Rng + ?Sized>(rng: &mut R, sc: &Scope, defs: &[(Sym, usize)], depth: usize) -> Process {
    let sender = Scope { bare_attrs: false, ..sc.clone() };
    let receiver = Scope { bare_attrs: true, ..sc.clone() };
    let choice = if depth == 0 { rng.gen_range(0..2) } else { rng.gen_range(0..8) };
    match choice {
        0 => Process::Nil,
        1 if !defs.is_empty() => {
            let (name, arity) = defs.choose(rng).unwrap().clone();
            Process::Call { name, args: (0..arity).map(|_| expr(rng, &sender, 1)).collect() }
        }
        1 => Process::Nil,
        2 => {
            let exprs = (0..rng.gen_range(0..3)).map(|_| expr(rng, &sender, 1)).collect();
            Process::out(exprs, predicate_in(rng, &receiver, 2), process(rng, sc, defs, depth - 1))
        }
        3 => {
            let n = rng.gen_range(0..3);
            let mut vars: Vec<Sym> = VARS.iter().map(|v| Sym::new(v)).collect();
            vars.shuffle(rng);
            vars.truncate(n);
            let mut inner = sc.clone();
            inner.vars.extend(vars.iter().cloned());
            let pred = predicate_in(rng, &Scope { bare_attrs: true, ..inner.clone() }, 2);
            Process::In { pred, vars, cont: Box::new(process(rng, &inner, defs, depth - 1)) }
        }
        4 => {
            let n = rng.gen_range(1..3);
            let assigns = ATTRS.choose_multiple(rng, n).map(|a| (Sym::new(a), expr(rng, &sender, 1))).collect();
            Process::upd(assigns, process(rng, sc, defs, depth - 1))
        }
        5 => Process::aware(predicate_in(rng, &sender, 2), process(rng, sc, defs, depth - 1)),
        6 => Process::sum(process(rng, sc, defs, depth - 1), process(rng, sc, defs, depth - 1)),
        _ => Process::par(process(rng, sc, defs, depth - 1), process(rng, sc, defs, depth - 1)),
    }
}

fn system<R: Rng + ?Sized>(rng: &mut R, defs: &[(Sym, usize)], depth: usize) -> System {
    let choice = if depth == 0 { 0 } else { rng.gen_range(0..5) };
    match choice {
        0 | 1 => System::comp(env(rng), process(rng, &Scope::default(), defs, 3)),
        2 => System::par(system(rng, defs, depth - 1), system(rng, defs, depth - 1)),
        3 => System::bang(system(rng, defs, depth - 1)),
        _ => System::nu(NAMES.choose(rng).unwrap(), system(rng, defs, depth - 1)),
    }
}

/// A component with no free variables and no calls.
pub fn component<R: Rng + ?Sized>(rng: &mut R, depth: usize) -> (AttributeEnv, Process) {
    (env(rng), process(rng, &Scope::default(), &[], depth))
}

/// Parallel composition of `n ≥ 1` components from [`component`].
pub fn flat_system<R: Rng + ?Sized>(rng: &mut R, n: usize, depth: usize) -> System {
    let (e, p) = component(rng, depth);
    let mut out = System::comp(e, p);
    for _ in 1..n {
        let (e, p) = component(rng, depth);
        out = System::par(out, System::comp(e, p));
    }
    out
}

/// A message with a predicate over receiver attributes.
pub fn message<R: Rng + ?Sized>(rng: &mut R) -> crate::component::Message {
    let values = (0..rng.gen_range(0..3)).map(|_| value(rng, 1)).collect();
    crate::component::Message::new(closed_predicate(rng, 2), values)
}

/// A random program that passes name resolution: declared attributes
/// `a`–`d`, up to three definitions, calls with matching arity, variables
/// only under their binders and `rand` only outside predicates.
pub fn program<R: Rng + ?Sized>(rng: &mut R) -> Program {
    let sigs: Vec<(Sym, usize)> =
        (0..rng.gen_range(0..4)).map(|i| (Sym::new(&format!("D{i}")), rng.gen_range(0..3))).collect();
    let mut definitions = Definitions::new();
    for (name, arity) in &sigs {
        let params: Vec<Sym> = ["p", "q"].iter().take(*arity).map(|p| Sym::new(p)).collect();
        let sc = Scope { vars: params.clone(), ..Scope::default() };
        definitions.insert(name.clone(), Definition { params, body: process(rng, &sc, &sigs, 3) });
    }
    let declared_attrs: BTreeSet<Sym> = ATTRS.iter().map(|a| Sym::new(a)).collect();
    Program { declared_attrs, definitions, main: system(rng, &sigs, 3) }
}
