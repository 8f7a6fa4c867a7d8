//! Abstract syntax of AbC systems, processes, predicates and expressions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// An interned-by-sharing symbol. Used for names, variables, attribute
/// identifiers and definition identifiers alike; the AST position decides
/// which of those a symbol denotes.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym(Arc<str>);

impl Sym {
    pub fn new(s: &str) -> Self {
        Sym(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Names produced by the fresh-name generator or by canonicalization
    /// carry a `#`; source identifiers never do.
    pub fn is_generated(&self) -> bool {
        self.0.contains('#')
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Sym {
    fn from(s: &str) -> Self {
        Sym::new(s)
    }
}

/// Carrier set of attribute environments and messages.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Name(Sym),
    Int(i64),
    Bool(bool),
    Tuple(Vec<Value>),
}

impl Value {
    pub fn name(s: &str) -> Self {
        Value::Name(Sym::new(s))
    }

    /// Collects every name atom, descending into tuples.
    pub fn collect_names(&self, out: &mut BTreeSet<Sym>) {
        match self {
            Value::Name(n) => {
                out.insert(n.clone());
            }
            Value::Tuple(items) => items.iter().for_each(|v| v.collect_names(out)),
            Value::Int(_) | Value::Bool(_) => {}
        }
    }

    pub fn mentions_name(&self, name: &Sym) -> bool {
        match self {
            Value::Name(n) => n == name,
            Value::Tuple(items) => items.iter().any(|v| v.mentions_name(name)),
            Value::Int(_) | Value::Bool(_) => false,
        }
    }

    /// Replaces every occurrence of the name `from` by `to`.
    pub fn rename_name(&self, from: &Sym, to: &Sym) -> Value {
        match self {
            Value::Name(n) if n == from => Value::Name(to.clone()),
            Value::Tuple(items) => Value::Tuple(items.iter().map(|v| v.rename_name(from, to)).collect()),
            other => other.clone(),
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expression {
    Lit(Value),
    /// Input-bound or definition-parameter variable.
    Var(Sym),
    /// Bare attribute identifier; inside a sender predicate it denotes the
    /// receiver's attribute.
    Attr(Sym),
    /// `this.a`, the evaluating component's own attribute.
    ThisAttr(Sym),
    Arith(ArithOp, Box<Expression>, Box<Expression>),
    /// Uniform integer in `[0, bound)`.
    Rand(u32),
}

impl Expression {
    pub fn lit(v: Value) -> Self {
        Expression::Lit(v)
    }

    pub fn name(s: &str) -> Self {
        Expression::Lit(Value::name(s))
    }

    pub fn int(n: i64) -> Self {
        Expression::Lit(Value::Int(n))
    }

    pub fn var(s: &str) -> Self {
        Expression::Var(Sym::new(s))
    }

    pub fn attr(s: &str) -> Self {
        Expression::Attr(Sym::new(s))
    }

    pub fn this(s: &str) -> Self {
        Expression::ThisAttr(Sym::new(s))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Predicate {
    True,
    False,
    Cmp(CmpOp, Expression, Expression),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn cmp(op: CmpOp, l: Expression, r: Expression) -> Self {
        Predicate::Cmp(op, l, r)
    }

    pub fn eq(l: Expression, r: Expression) -> Self {
        Predicate::Cmp(CmpOp::Eq, l, r)
    }

    pub fn and(l: Predicate, r: Predicate) -> Self {
        Predicate::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Predicate, r: Predicate) -> Self {
        Predicate::Or(Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(p: Predicate) -> Self {
        Predicate::Not(Box::new(p))
    }
}

/// Attribute environment: a partial map from attribute identifiers to values.
pub type AttributeEnv = BTreeMap<Sym, Value>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Process {
    Nil,
    Out { exprs: Vec<Expression>, pred: Predicate, cont: Box<Process> },
    In { pred: Predicate, vars: Vec<Sym>, cont: Box<Process> },
    Upd { assigns: Vec<(Sym, Expression)>, cont: Box<Process> },
    Aware { pred: Predicate, cont: Box<Process> },
    Sum(Box<Process>, Box<Process>),
    Par(Box<Process>, Box<Process>),
    Call { name: Sym, args: Vec<Expression> },
}

impl Process {
    pub fn out(exprs: Vec<Expression>, pred: Predicate, cont: Process) -> Self {
        Process::Out { exprs, pred, cont: Box::new(cont) }
    }

    pub fn input(pred: Predicate, vars: &[&str], cont: Process) -> Self {
        Process::In { pred, vars: vars.iter().map(|v| Sym::new(v)).collect(), cont: Box::new(cont) }
    }

    pub fn upd(assigns: Vec<(Sym, Expression)>, cont: Process) -> Self {
        Process::Upd { assigns, cont: Box::new(cont) }
    }

    pub fn aware(pred: Predicate, cont: Process) -> Self {
        Process::Aware { pred, cont: Box::new(cont) }
    }

    pub fn sum(l: Process, r: Process) -> Self {
        Process::Sum(Box::new(l), Box::new(r))
    }

    pub fn par(l: Process, r: Process) -> Self {
        Process::Par(Box::new(l), Box::new(r))
    }

    pub fn call(name: &str, args: Vec<Expression>) -> Self {
        Process::Call { name: Sym::new(name), args }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum System {
    Comp {
        env: AttributeEnv,
        proc: Process,
    },
    Par(Box<System>, Box<System>),
    /// Replication. `spawned` counts the copies already unfolded along the
    /// current path; it is always zero for parsed terms and is not printed.
    Bang {
        body: Box<System>,
        spawned: u32,
    },
    Nu {
        name: Sym,
        body: Box<System>,
    },
}

impl System {
    pub fn comp(env: AttributeEnv, proc: Process) -> Self {
        System::Comp { env, proc }
    }

    pub fn par(l: System, r: System) -> Self {
        System::Par(Box::new(l), Box::new(r))
    }

    pub fn bang(body: System) -> Self {
        System::Bang { body: Box::new(body), spawned: 0 }
    }

    pub fn nu(name: &str, body: System) -> Self {
        System::Nu { name: Sym::new(name), body: Box::new(body) }
    }

    /// Left-to-right list of the components of the top-level parallel
    /// spine, looking through restrictions but not into replications.
    pub fn components(&self) -> Vec<(&AttributeEnv, &Process)> {
        let mut out = Vec::new();
        fn walk<'a>(s: &'a System, out: &mut Vec<(&'a AttributeEnv, &'a Process)>) {
            match s {
                System::Comp { env, proc } => out.push((env, proc)),
                System::Par(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                System::Nu { body, .. } => walk(body, out),
                System::Bang { .. } => {}
            }
        }
        walk(self, &mut out);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Definition {
    pub params: Vec<Sym>,
    pub body: Process,
}

/// Process definitions keyed by identifier.
pub type Definitions = BTreeMap<Sym, Definition>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    /// Attribute identifiers from the optional `attrs:` header.
    pub declared_attrs: BTreeSet<Sym>,
    pub definitions: Definitions,
    pub main: System,
}

impl Program {
    pub fn new(main: System) -> Self {
        Program { declared_attrs: BTreeSet::new(), definitions: Definitions::new(), main }
    }
}

/// Convenience constructor for environments in tests and corpus code.
pub fn env_of(pairs: &[(&str, Value)]) -> AttributeEnv {
    pairs.iter().map(|(k, v)| (Sym::new(k), v.clone())).collect()
}
