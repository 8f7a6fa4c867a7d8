//! Attribute environments: expression evaluation, predicate satisfaction,
//! closure of `this` references, predicate restriction, and a decision
//! procedure for semantic equivalence of predicates over a finite universe.

use std::collections::BTreeSet;

use bitvec::prelude::*;
use rand::Rng;

use crate::error::{Error, Result};
use crate::syntax::names::fresh_name;
use crate::syntax::*;

pub const DEFAULT_BUDGET: u128 = 1_000_000;

fn arith(op: ArithOp, l: &Value, r: &Value) -> Option<Value> {
    let (a, b) = (l.as_int()?, r.as_int()?);
    let n = match op {
        ArithOp::Add => a.checked_add(b),
        ArithOp::Sub => a.checked_sub(b),
        ArithOp::Mul => a.checked_mul(b),
    }?;
    Some(Value::Int(n))
}

/// Evaluates `e` under `env`. `None` is the undefined outcome: an unbound
/// attribute, a free variable, or arithmetic on non-integers.
pub fn eval_expr<R: Rng + ?Sized>(e: &Expression, env: &AttributeEnv, rng: &mut R) -> Option<Value> {
    match e {
        Expression::Rand(n) => Some(Value::Int(rng.gen_range(0..*n as i64))),
        Expression::Arith(op, l, r) => {
            let l = eval_expr(l, env, rng)?;
            let r = eval_expr(r, env, rng)?;
            arith(*op, &l, &r)
        }
        other => eval_pure(other, env),
    }
}

/// Evaluation without a random source; `rand` is undefined here.
pub fn eval_pure(e: &Expression, env: &AttributeEnv) -> Option<Value> {
    match e {
        Expression::Lit(v) => Some(v.clone()),
        Expression::Var(_) | Expression::Rand(_) => None,
        Expression::Attr(a) | Expression::ThisAttr(a) => env.get(a).cloned(),
        Expression::Arith(op, l, r) => arith(*op, &eval_pure(l, env)?, &eval_pure(r, env)?),
    }
}

fn compare(op: CmpOp, l: &Value, r: &Value) -> bool {
    match op {
        CmpOp::Eq => l == r,
        CmpOp::Ne => l != r,
        _ => match (l, r) {
            (Value::Int(a), Value::Int(b)) => match op {
                CmpOp::Lt => a < b,
                CmpOp::Le => a <= b,
                CmpOp::Gt => a > b,
                CmpOp::Ge => a >= b,
                CmpOp::Eq | CmpOp::Ne => unreachable!(),
            },
            _ => false,
        },
    }
}

/// Three-valued reading of an atom: `None` when an operand is undefined.
fn atom3(op: CmpOp, l: &Expression, r: &Expression, env: &AttributeEnv) -> Option<bool> {
    Some(compare(op, &eval_pure(l, env)?, &eval_pure(r, env)?))
}

/// `env ⊨ pi`. An atom with an undefined operand is false.
pub fn satisfies(env: &AttributeEnv, pi: &Predicate) -> bool {
    match pi {
        Predicate::True => true,
        Predicate::False => false,
        Predicate::Cmp(op, l, r) => atom3(*op, l, r, env).unwrap_or(false),
        Predicate::And(l, r) => satisfies(env, l) && satisfies(env, r),
        Predicate::Or(l, r) => satisfies(env, l) || satisfies(env, r),
        Predicate::Not(p) => !satisfies(env, p),
    }
}

/// Strong Kleene evaluation. `Some(true)` means the predicate, with every
/// attribute reference replaced by its value, is semantically `tt`;
/// `Some(false)` means it is semantically `ff`; `None` means undefined
/// atoms leave it undetermined.
pub fn eval_predicate(env: &AttributeEnv, pi: &Predicate) -> Option<bool> {
    match pi {
        Predicate::True => Some(true),
        Predicate::False => Some(false),
        Predicate::Cmp(op, l, r) => atom3(*op, l, r, env),
        Predicate::And(l, r) => match (eval_predicate(env, l), eval_predicate(env, r)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        Predicate::Or(l, r) => match (eval_predicate(env, l), eval_predicate(env, r)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
        Predicate::Not(p) => eval_predicate(env, p).map(|b| !b),
    }
}

fn fold(e: Expression) -> Expression {
    if let Expression::Arith(op, l, r) = &e {
        if let (Expression::Lit(a), Expression::Lit(b)) = (&**l, &**r) {
            if let Some(v) = arith(*op, a, b) {
                return Expression::Lit(v);
            }
        }
    }
    e
}

fn close_expr(e: &Expression, env: &AttributeEnv) -> Option<Expression> {
    match e {
        Expression::ThisAttr(a) => env.get(a).cloned().map(Expression::Lit),
        Expression::Arith(op, l, r) => {
            Some(fold(Expression::Arith(*op, Box::new(close_expr(l, env)?), Box::new(close_expr(r, env)?))))
        }
        other => Some(other.clone()),
    }
}

/// Replaces every `this.a` by the sender's value of `a`. Bare attribute
/// identifiers stay symbolic. `None` if some referenced attribute is
/// unbound.
pub fn close_predicate(pi: &Predicate, env: &AttributeEnv) -> Option<Predicate> {
    Some(match pi {
        Predicate::True | Predicate::False => pi.clone(),
        Predicate::Cmp(op, l, r) => Predicate::Cmp(*op, close_expr(l, env)?, close_expr(r, env)?),
        Predicate::And(l, r) => Predicate::and(close_predicate(l, env)?, close_predicate(r, env)?),
        Predicate::Or(l, r) => Predicate::or(close_predicate(l, env)?, close_predicate(r, env)?),
        Predicate::Not(p) => Predicate::not(close_predicate(p, env)?),
    })
}

/// `pi ▶ x`: atoms mentioning the name `x` become `ff`.
pub fn restrict_predicate(pi: &Predicate, x: &Sym) -> Predicate {
    match pi {
        Predicate::True | Predicate::False => pi.clone(),
        Predicate::Cmp(_, l, r) => {
            if l.mentions_name(x) || r.mentions_name(x) {
                Predicate::False
            } else {
                pi.clone()
            }
        }
        Predicate::And(l, r) => Predicate::and(restrict_predicate(l, x), restrict_predicate(r, x)),
        Predicate::Or(l, r) => Predicate::or(restrict_predicate(l, x), restrict_predicate(r, x)),
        Predicate::Not(p) => Predicate::not(restrict_predicate(p, x)),
    }
}

/// `env[a ↦ v]` for each assignment, left to right.
pub fn update_env(env: &AttributeEnv, assigns: &[(Sym, Value)]) -> AttributeEnv {
    let mut out = env.clone();
    for (a, v) in assigns {
        out.insert(a.clone(), v.clone());
    }
    out
}

/// Finite domain over which predicate equivalence is decided.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Universe {
    pub values: BTreeSet<Value>,
    /// A name occurring nowhere in the program.
    pub witness: Value,
    pub attrs: BTreeSet<Sym>,
    pub budget: u128,
}

fn collect_expr_values(e: &Expression, out: &mut BTreeSet<Value>) {
    e.for_each_leaf(&mut |l| {
        if let Expression::Lit(v) = l {
            out.insert(v.clone());
        }
    });
}

fn collect_expr_attrs(e: &Expression, out: &mut BTreeSet<Sym>) {
    e.for_each_leaf(&mut |l| {
        if let Expression::Attr(a) | Expression::ThisAttr(a) = l {
            out.insert(a.clone());
        }
    });
}

fn collect_process(p: &Process, values: &mut BTreeSet<Value>, attrs: &mut BTreeSet<Sym>) {
    p.for_each_expr(&mut |e| {
        collect_expr_values(e, values);
        collect_expr_attrs(e, attrs);
    });
    fn updates(p: &Process, attrs: &mut BTreeSet<Sym>) {
        match p {
            Process::Upd { assigns, cont } => {
                attrs.extend(assigns.iter().map(|(a, _)| a.clone()));
                updates(cont, attrs);
            }
            Process::Out { cont, .. } | Process::In { cont, .. } | Process::Aware { cont, .. } => updates(cont, attrs),
            Process::Sum(l, r) | Process::Par(l, r) => {
                updates(l, attrs);
                updates(r, attrs);
            }
            Process::Nil | Process::Call { .. } => {}
        }
    }
    updates(p, attrs);
}

fn collect_system(s: &System, values: &mut BTreeSet<Value>, attrs: &mut BTreeSet<Sym>) {
    match s {
        System::Comp { env, proc } => {
            for (a, v) in env {
                attrs.insert(a.clone());
                values.insert(v.clone());
            }
            collect_process(proc, values, attrs);
        }
        System::Par(l, r) => {
            collect_system(l, values, attrs);
            collect_system(r, values, attrs);
        }
        System::Bang { body, .. } | System::Nu { body, .. } => collect_system(body, values, attrs),
    }
}

impl Universe {
    /// Values and attributes of a program. Integers are widened by their
    /// neighbours so that strict and non-strict orderings are told apart.
    pub fn for_program(program: &Program) -> Universe {
        Universe::for_system(&program.main, &program.definitions, &program.declared_attrs)
    }

    pub fn for_system(sys: &System, defs: &Definitions, declared: &BTreeSet<Sym>) -> Universe {
        let mut values = BTreeSet::new();
        let mut attrs = declared.clone();
        collect_system(sys, &mut values, &mut attrs);
        for d in defs.values() {
            collect_process(&d.body, &mut values, &mut attrs);
        }
        let mut u = Universe { values: BTreeSet::new(), witness: Value::name("w"), attrs, budget: DEFAULT_BUDGET };
        for v in values {
            u.add_value(v);
        }
        u.refresh_witness();
        u
    }

    /// Values and attributes mentioned by some predicates.
    pub fn for_predicates<'a>(preds: impl IntoIterator<Item = &'a Predicate>) -> Universe {
        let mut u = Universe::empty();
        for p in preds {
            p.for_each_expr(&mut |e| {
                let mut vals = BTreeSet::new();
                collect_expr_values(e, &mut vals);
                vals.into_iter().for_each(|v| u.add_value(v));
                collect_expr_attrs(e, &mut u.attrs);
            });
        }
        u
    }

    pub fn empty() -> Universe {
        let mut u = Universe {
            values: BTreeSet::new(),
            witness: Value::name("w"),
            attrs: BTreeSet::new(),
            budget: DEFAULT_BUDGET,
        };
        u.refresh_witness();
        u
    }

    pub fn add_value(&mut self, v: Value) {
        if let Value::Int(n) = v {
            for m in [n.checked_sub(1), Some(n), n.checked_add(1)].into_iter().flatten() {
                self.values.insert(Value::Int(m));
            }
        } else {
            self.values.insert(v);
        }
        if self.values.contains(&self.witness) {
            self.refresh_witness();
        }
    }

    fn refresh_witness(&mut self) {
        let mut names = BTreeSet::new();
        for v in &self.values {
            v.collect_names(&mut names);
        }
        self.witness = Value::Name(fresh_name(&Sym::new("w"), &names));
    }

    /// Union of two universes; the larger budget wins.
    pub fn merge(&mut self, other: &Universe) {
        for v in &other.values {
            self.values.insert(v.clone());
        }
        self.attrs.extend(other.attrs.iter().cloned());
        self.budget = self.budget.max(other.budget);
        self.refresh_witness();
    }

    pub fn with_budget(mut self, budget: u128) -> Universe {
        self.budget = budget;
        self
    }

    fn domain_for(&self, preds: &[&Predicate]) -> Vec<Option<Value>> {
        let mut d: BTreeSet<Value> = self.values.clone();
        for p in preds {
            d.extend(p.constants());
        }
        d.insert(self.witness.clone());
        std::iter::once(None).chain(d.into_iter().map(Some)).collect()
    }

    fn check_budget(&self, domain: usize, attrs: usize) -> Result<u128> {
        let needed = (domain as u128).checked_pow(attrs as u32).unwrap_or(u128::MAX);
        if needed > self.budget {
            return Err(Error::UniverseTooLarge { needed, budget: self.budget });
        }
        Ok(needed)
    }
}

/// Calls `f` on every environment over `attrs` with values from `domain`
/// (`None` = unbound), in lexicographic order; stops early when `f`
/// returns false.
fn for_each_env(attrs: &[Sym], domain: &[Option<Value>], mut f: impl FnMut(&AttributeEnv) -> bool) {
    let mut idx = vec![0usize; attrs.len()];
    loop {
        let env: AttributeEnv =
            attrs.iter().zip(&idx).filter_map(|(a, &i)| domain[i].as_ref().map(|v| (a.clone(), v.clone()))).collect();
        if !f(&env) {
            return;
        }
        let mut k = attrs.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < domain.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Decides `p1 ≅ p2` relative to `u`: equal satisfaction on every
/// environment over the attributes they mention, with values drawn from
/// the universe, the predicates' constants, the witness, or unbound.
pub fn semantically_equiv(p1: &Predicate, p2: &Predicate, u: &Universe) -> Result<bool> {
    let mut attrs = p1.attributes();
    attrs.extend(p2.attributes());
    let attrs: Vec<Sym> = attrs.into_iter().collect();
    if attrs.is_empty() {
        let env = AttributeEnv::new();
        return Ok(satisfies(&env, p1) == satisfies(&env, p2));
    }
    let domain = u.domain_for(&[p1, p2]);
    u.check_budget(domain.len(), attrs.len())?;
    let mut equal = true;
    for_each_env(&attrs, &domain, |env| {
        equal = satisfies(env, p1) == satisfies(env, p2);
        equal
    });
    Ok(equal)
}

pub fn is_ff(p: &Predicate, u: &Universe) -> Result<bool> {
    match p {
        Predicate::False => Ok(true),
        Predicate::True => Ok(false),
        _ => semantically_equiv(p, &Predicate::False, u),
    }
}

pub fn is_tt(p: &Predicate, u: &Universe) -> Result<bool> {
    match p {
        Predicate::True => Ok(true),
        Predicate::False => Ok(false),
        _ => semantically_equiv(p, &Predicate::True, u),
    }
}

/// Satisfaction vector of `p` over every environment on `u.attrs` with
/// values in `u.values ∪ {witness, unbound}`.
pub fn fingerprint(p: &Predicate, u: &Universe) -> Result<BitVec> {
    let attrs: Vec<Sym> = u.attrs.iter().cloned().collect();
    let mut domain: Vec<Option<Value>> = vec![None];
    domain.extend(u.values.iter().cloned().map(Some));
    domain.push(Some(u.witness.clone()));
    let n = u.check_budget(domain.len(), attrs.len())?;
    let mut bits = BitVec::with_capacity(n as usize);
    for_each_env(&attrs, &domain, |env| {
        bits.push(satisfies(env, p));
        true
    });
    Ok(bits)
}

/// Canonical key of a predicate's meaning: the attributes it actually
/// depends on, the value domain used, and its truth table there. Equal
/// keys imply semantic equivalence; equivalent predicates over the same
/// constants get equal keys.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredKey {
    pub attrs: Vec<Sym>,
    pub domain: Vec<Option<Value>>,
    pub table: BitVec,
}

impl PredKey {
    pub fn is_ff(&self) -> bool {
        self.table.not_any()
    }

    pub fn is_tt(&self) -> bool {
        self.table.all()
    }
}

fn truth_table(p: &Predicate, attrs: &[Sym], domain: &[Option<Value>]) -> BitVec {
    let mut bits = BitVec::new();
    for_each_env(attrs, domain, |env| {
        bits.push(satisfies(env, p));
        true
    });
    bits
}

/// Whether the table over `n` attributes with `d` domain points is
/// independent of attribute `k`.
fn independent_of(table: &BitSlice, n: usize, d: usize, k: usize) -> bool {
    let stride = d.pow((n - 1 - k) as u32);
    let block = stride * d;
    (0..table.len()).all(|i| {
        let pos = (i / stride) % d;
        if pos == 0 {
            return true;
        }
        let base = i - pos * stride;
        debug_assert!(base / block == i / block);
        table[i] == table[base]
    })
}

pub fn pred_key(p: &Predicate, u: &Universe) -> Result<PredKey> {
    let mut attrs: Vec<Sym> = p.attributes().into_iter().collect();
    if attrs.is_empty() {
        let mut table = BitVec::new();
        table.push(satisfies(&AttributeEnv::new(), p));
        return Ok(PredKey { attrs, domain: vec![], table });
    }
    let domain = u.domain_for(&[p]);
    u.check_budget(domain.len(), attrs.len())?;
    let mut table = truth_table(p, &attrs, &domain);
    let mut k = attrs.len();
    while k > 0 {
        k -= 1;
        if independent_of(&table, attrs.len(), domain.len(), k) {
            attrs.remove(k);
            table = truth_table(p, &attrs, &domain);
        }
    }
    let domain = if attrs.is_empty() { vec![] } else { domain };
    Ok(PredKey { attrs, domain, table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_predicate;
    use rand::SeedableRng;

    fn env(pairs: &[(&str, Value)]) -> AttributeEnv {
        env_of(pairs)
    }

    fn uni(preds: &[&str]) -> Universe {
        let mut u = Universe::empty();
        for p in preds {
            let p = parse_predicate(p).unwrap();
            u.attrs.extend(p.attributes());
            for v in p.constants() {
                u.add_value(v);
            }
        }
        u
    }

    #[test]
    fn evaluation_reads_attributes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let g = env(&[("id", Value::Int(1))]);
        assert_eq!(eval_expr(&Expression::this("id"), &g, &mut rng), Some(Value::Int(1)));
        assert_eq!(eval_expr(&Expression::int(5), &g, &mut rng), Some(Value::Int(5)));
        assert_eq!(eval_expr(&Expression::attr("missing"), &AttributeEnv::new(), &mut rng), None);
        let c_minus_1 = Expression::Arith(ArithOp::Sub, Box::new(Expression::int(3)), Box::new(Expression::int(1)));
        assert_eq!(eval_expr(&c_minus_1, &g, &mut rng), Some(Value::Int(2)));
    }

    #[test]
    fn rand_stays_in_range() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let v = eval_expr(&Expression::Rand(360), &AttributeEnv::new(), &mut rng).unwrap();
            assert!((0..360).contains(&v.as_int().unwrap()));
        }
    }

    #[test]
    fn satisfaction_examples() {
        let p = parse_predicate("role = 'rescuer' or role = 'helping'").unwrap();
        assert!(satisfies(&env(&[("role", Value::name("rescuer"))]), &p));
        assert!(!satisfies(&env(&[("role", Value::name("rescuer"))]), &Predicate::False));
        let p = parse_predicate("3 <= a").unwrap();
        assert!(!satisfies(&env(&[("a", Value::Int(2))]), &p));
        assert!(satisfies(&env(&[("a", Value::Int(5))]), &p));
    }

    #[test]
    fn undefined_atoms_are_false_and_ordering_needs_integers() {
        let p = parse_predicate("a = 1").unwrap();
        assert!(!satisfies(&AttributeEnv::new(), &p));
        assert!(satisfies(&AttributeEnv::new(), &Predicate::not(p.clone())));
        assert_eq!(eval_predicate(&AttributeEnv::new(), &p), None);
        let q = parse_predicate("a < 'x'").unwrap();
        assert!(!satisfies(&env(&[("a", Value::Int(1))]), &q));
    }

    #[test]
    fn closing_replaces_this_references() {
        let p = parse_predicate("role = 'rescuer' or role = 'helping'").unwrap();
        assert_eq!(close_predicate(&p, &env(&[("role", Value::name("x"))])), Some(p.clone()));
        let q = parse_predicate("y <= this.a").unwrap();
        assert_eq!(close_predicate(&q, &env(&[("a", Value::Int(2))])), Some(parse_predicate("y <= 2").unwrap()));
        assert_eq!(close_predicate(&Predicate::True, &AttributeEnv::new()), Some(Predicate::True));
        assert_eq!(close_predicate(&q, &AttributeEnv::new()), None);
    }

    #[test]
    fn restriction_examples() {
        let n = Sym::new("n");
        assert_eq!(restrict_predicate(&Predicate::True, &n), Predicate::True);
        assert_eq!(restrict_predicate(&parse_predicate("a = 'n'").unwrap(), &n), Predicate::False);
        assert_eq!(
            restrict_predicate(&parse_predicate("a = 'n' or b = 'k'").unwrap(), &n),
            Predicate::or(Predicate::False, parse_predicate("b = 'k'").unwrap())
        );
    }

    #[test]
    fn update_is_last_write_wins() {
        let g = env(&[("state", Value::name("move"))]);
        let g2 = update_env(&g, &[(Sym::new("state"), Value::name("stop"))]);
        assert_eq!(g2.get(&Sym::new("state")), Some(&Value::name("stop")));
        assert_eq!(update_env(&g, &[]), g);
        let g3 = update_env(&g, &[(Sym::new("a"), Value::Int(1)), (Sym::new("a"), Value::Int(2))]);
        assert_eq!(g3.get(&Sym::new("a")), Some(&Value::Int(2)));
    }

    #[test]
    fn equivalence_examples() {
        let u = uni(&["role = 'x'", "role = 'y'"]);
        let ff2 = Predicate::or(Predicate::False, Predicate::False);
        assert!(semantically_equiv(&ff2, &Predicate::False, &u).unwrap());
        assert!(is_tt(&parse_predicate("'a' = 'a'").unwrap(), &u).unwrap());
        let x = parse_predicate("role = 'x'").unwrap();
        let y = parse_predicate("role = 'y'").unwrap();
        assert!(!semantically_equiv(&x, &y, &u).unwrap());
    }

    #[test]
    fn fingerprint_extremes() {
        let u = uni(&["a = 'n'", "b = 2"]);
        assert!(fingerprint(&Predicate::True, &u).unwrap().all());
        assert!(fingerprint(&Predicate::False, &u).unwrap().not_any());
        let r = restrict_predicate(&parse_predicate("a = 'n'").unwrap(), &Sym::new("n"));
        assert_eq!(fingerprint(&r, &u).unwrap(), fingerprint(&Predicate::False, &u).unwrap());
    }

    #[test]
    fn budget_is_enforced() {
        let u = uni(&["a = 1 and b = 2 and c = 3 and d = 4 and e = 5 and f = 6 and g = 7"]).with_budget(1000);
        let p = parse_predicate("a = 1 and b = 2 and c = 3 and d = 4 and e = 5 and f = 6 and g = 7").unwrap();
        assert!(matches!(fingerprint(&p, &u), Err(Error::UniverseTooLarge { .. })));
    }

    #[test]
    fn keys_drop_irrelevant_attributes() {
        let u = uni(&["a = 1", "b = 2"]);
        let p = parse_predicate("a = 1 and (b = 2 or !(b = 2))").unwrap();
        let q = parse_predicate("a = 1").unwrap();
        assert_eq!(pred_key(&p, &u).unwrap(), pred_key(&q, &u).unwrap());
        let t = parse_predicate("'a' = 'a'").unwrap();
        assert_eq!(pred_key(&t, &u).unwrap(), pred_key(&Predicate::True, &u).unwrap());
        assert!(pred_key(&Predicate::False, &u).unwrap().is_ff());
    }
}
