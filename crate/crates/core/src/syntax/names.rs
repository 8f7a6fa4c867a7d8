//! Free/bound names, substitution, renaming and α-canonical forms.
//!
//! Names and variables live in separate namespaces: restriction binds name
//! literals, input prefixes and definition parameters bind variables. The
//! free names of a term are its name literals (including attribute values
//! in environments) plus its free variables.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;

/// Substitution of variables by values.
pub type Subst = BTreeMap<Sym, Value>;

impl Expression {
    pub fn substitute(&self, s: &Subst) -> Expression {
        match self {
            Expression::Var(x) => match s.get(x) {
                Some(v) => Expression::Lit(v.clone()),
                None => self.clone(),
            },
            Expression::Arith(op, l, r) => Expression::Arith(*op, Box::new(l.substitute(s)), Box::new(r.substitute(s))),
            _ => self.clone(),
        }
    }

    pub fn map_values(&self, f: &impl Fn(&Value) -> Value) -> Expression {
        match self {
            Expression::Lit(v) => Expression::Lit(f(v)),
            Expression::Arith(op, l, r) => Expression::Arith(*op, Box::new(l.map_values(f)), Box::new(r.map_values(f))),
            _ => self.clone(),
        }
    }

    pub fn for_each_leaf<'a>(&'a self, f: &mut impl FnMut(&'a Expression)) {
        match self {
            Expression::Arith(_, l, r) => {
                l.for_each_leaf(f);
                r.for_each_leaf(f);
            }
            leaf => f(leaf),
        }
    }

    pub fn collect_names(&self, out: &mut BTreeSet<Sym>) {
        self.for_each_leaf(&mut |e| match e {
            Expression::Lit(v) => v.collect_names(out),
            Expression::Var(x) => {
                out.insert(x.clone());
            }
            _ => {}
        });
    }

    pub fn mentions_name(&self, name: &Sym) -> bool {
        let mut found = false;
        self.for_each_leaf(&mut |e| {
            if let Expression::Lit(v) = e {
                found |= v.mentions_name(name);
            }
        });
        found
    }

    pub fn has_this(&self) -> bool {
        let mut found = false;
        self.for_each_leaf(&mut |e| found |= matches!(e, Expression::ThisAttr(_)));
        found
    }
}

impl Predicate {
    pub fn map_exprs(&self, f: &impl Fn(&Expression) -> Expression) -> Predicate {
        match self {
            Predicate::True | Predicate::False => self.clone(),
            Predicate::Cmp(op, l, r) => Predicate::Cmp(*op, f(l), f(r)),
            Predicate::And(l, r) => Predicate::and(l.map_exprs(f), r.map_exprs(f)),
            Predicate::Or(l, r) => Predicate::or(l.map_exprs(f), r.map_exprs(f)),
            Predicate::Not(p) => Predicate::not(p.map_exprs(f)),
        }
    }

    pub fn for_each_expr<'a>(&'a self, f: &mut impl FnMut(&'a Expression)) {
        match self {
            Predicate::True | Predicate::False => {}
            Predicate::Cmp(_, l, r) => {
                f(l);
                f(r);
            }
            Predicate::And(l, r) | Predicate::Or(l, r) => {
                l.for_each_expr(f);
                r.for_each_expr(f);
            }
            Predicate::Not(p) => p.for_each_expr(f),
        }
    }

    pub fn substitute(&self, s: &Subst) -> Predicate {
        if s.is_empty() {
            return self.clone();
        }
        self.map_exprs(&|e| e.substitute(s))
    }

    pub fn rename_name(&self, from: &Sym, to: &Sym) -> Predicate {
        self.map_exprs(&|e| e.map_values(&|v| v.rename_name(from, to)))
    }

    /// Names occurring in the predicate; attribute identifiers are not names.
    pub fn names(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.for_each_expr(&mut |e| e.collect_names(&mut out));
        out
    }

    pub fn mentions_name(&self, name: &Sym) -> bool {
        let mut found = false;
        self.for_each_expr(&mut |e| found |= e.mentions_name(name));
        found
    }

    pub fn has_this(&self) -> bool {
        let mut found = false;
        self.for_each_expr(&mut |e| found |= e.has_this());
        found
    }

    /// Attribute identifiers read by the predicate (bare or through `this`).
    pub fn attributes(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.for_each_expr(&mut |e| {
            e.for_each_leaf(&mut |l| {
                if let Expression::Attr(a) | Expression::ThisAttr(a) = l {
                    out.insert(a.clone());
                }
            })
        });
        out
    }

    /// Literal values occurring in the predicate.
    pub fn constants(&self) -> BTreeSet<Value> {
        let mut out = BTreeSet::new();
        self.for_each_expr(&mut |e| {
            e.for_each_leaf(&mut |l| {
                if let Expression::Lit(v) = l {
                    out.insert(v.clone());
                }
            })
        });
        out
    }
}

impl Process {
    /// Applies `f` to every expression, ignoring binders.
    pub fn map_exprs(&self, f: &impl Fn(&Expression) -> Expression) -> Process {
        match self {
            Process::Nil => Process::Nil,
            Process::Out { exprs, pred, cont } => Process::Out {
                exprs: exprs.iter().map(f).collect(),
                pred: pred.map_exprs(f),
                cont: Box::new(cont.map_exprs(f)),
            },
            Process::In { pred, vars, cont } => {
                Process::In { pred: pred.map_exprs(f), vars: vars.clone(), cont: Box::new(cont.map_exprs(f)) }
            }
            Process::Upd { assigns, cont } => Process::Upd {
                assigns: assigns.iter().map(|(a, e)| (a.clone(), f(e))).collect(),
                cont: Box::new(cont.map_exprs(f)),
            },
            Process::Aware { pred, cont } => {
                Process::Aware { pred: pred.map_exprs(f), cont: Box::new(cont.map_exprs(f)) }
            }
            Process::Sum(l, r) => Process::sum(l.map_exprs(f), r.map_exprs(f)),
            Process::Par(l, r) => Process::par(l.map_exprs(f), r.map_exprs(f)),
            Process::Call { name, args } => Process::Call { name: name.clone(), args: args.iter().map(f).collect() },
        }
    }

    pub fn for_each_expr<'a>(&'a self, f: &mut impl FnMut(&'a Expression)) {
        match self {
            Process::Nil => {}
            Process::Out { exprs, pred, cont } => {
                exprs.iter().for_each(&mut *f);
                pred.for_each_expr(f);
                cont.for_each_expr(f);
            }
            Process::In { pred, cont, .. } | Process::Aware { pred, cont } => {
                pred.for_each_expr(f);
                cont.for_each_expr(f);
            }
            Process::Upd { assigns, cont } => {
                assigns.iter().for_each(|(_, e)| f(e));
                cont.for_each_expr(f);
            }
            Process::Sum(l, r) | Process::Par(l, r) => {
                l.for_each_expr(f);
                r.for_each_expr(f);
            }
            Process::Call { args, .. } => args.iter().for_each(f),
        }
    }

    /// Capture-free substitution of values for free variables; an input
    /// prefix shadows the variables it binds.
    pub fn substitute(&self, s: &Subst) -> Process {
        if s.is_empty() {
            return self.clone();
        }
        match self {
            Process::Nil => Process::Nil,
            Process::Out { exprs, pred, cont } => Process::Out {
                exprs: exprs.iter().map(|e| e.substitute(s)).collect(),
                pred: pred.substitute(s),
                cont: Box::new(cont.substitute(s)),
            },
            Process::In { pred, vars, cont } => {
                let inner: Subst;
                let s = if vars.iter().any(|v| s.contains_key(v)) {
                    inner = s.iter().filter(|(k, _)| !vars.contains(k)).map(|(k, v)| (k.clone(), v.clone())).collect();
                    &inner
                } else {
                    s
                };
                Process::In { pred: pred.substitute(s), vars: vars.clone(), cont: Box::new(cont.substitute(s)) }
            }
            Process::Upd { assigns, cont } => Process::Upd {
                assigns: assigns.iter().map(|(a, e)| (a.clone(), e.substitute(s))).collect(),
                cont: Box::new(cont.substitute(s)),
            },
            Process::Aware { pred, cont } => {
                Process::Aware { pred: pred.substitute(s), cont: Box::new(cont.substitute(s)) }
            }
            Process::Sum(l, r) => Process::sum(l.substitute(s), r.substitute(s)),
            Process::Par(l, r) => Process::par(l.substitute(s), r.substitute(s)),
            Process::Call { name, args } => {
                Process::Call { name: name.clone(), args: args.iter().map(|e| e.substitute(s)).collect() }
            }
        }
    }

    pub fn rename_name(&self, from: &Sym, to: &Sym) -> Process {
        self.map_exprs(&|e| e.map_values(&|v| v.rename_name(from, to)))
    }

    pub fn mentions_name(&self, name: &Sym) -> bool {
        let mut found = false;
        self.for_each_expr(&mut |e| found |= e.mentions_name(name));
        found
    }

    /// Name literals occurring anywhere in the process.
    pub fn literal_names(&self, out: &mut BTreeSet<Sym>) {
        self.for_each_expr(&mut |e| {
            e.for_each_leaf(&mut |l| {
                if let Expression::Lit(v) = l {
                    v.collect_names(out)
                }
            })
        });
    }

    pub fn free_vars(&self) -> BTreeSet<Sym> {
        fn go(p: &Process, bound: &mut Vec<Sym>, out: &mut BTreeSet<Sym>) {
            let visit = |e: &Expression, bound: &Vec<Sym>, out: &mut BTreeSet<Sym>| {
                e.for_each_leaf(&mut |l| {
                    if let Expression::Var(x) = l {
                        if !bound.contains(x) {
                            out.insert(x.clone());
                        }
                    }
                })
            };
            match p {
                Process::Nil => {}
                Process::Out { exprs, pred, cont } => {
                    exprs.iter().for_each(|e| visit(e, bound, out));
                    pred.for_each_expr(&mut |e| visit(e, bound, out));
                    go(cont, bound, out);
                }
                Process::In { pred, vars, cont } => {
                    let base = bound.len();
                    bound.extend(vars.iter().cloned());
                    pred.for_each_expr(&mut |e| visit(e, bound, out));
                    go(cont, bound, out);
                    bound.truncate(base);
                }
                Process::Upd { assigns, cont } => {
                    assigns.iter().for_each(|(_, e)| visit(e, bound, out));
                    go(cont, bound, out);
                }
                Process::Aware { pred, cont } => {
                    pred.for_each_expr(&mut |e| visit(e, bound, out));
                    go(cont, bound, out);
                }
                Process::Sum(l, r) | Process::Par(l, r) => {
                    go(l, bound, out);
                    go(r, bound, out);
                }
                Process::Call { args, .. } => args.iter().for_each(|e| visit(e, bound, out)),
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn free_names(&self) -> BTreeSet<Sym> {
        let mut out = self.free_vars();
        self.literal_names(&mut out);
        out
    }

    /// Variables bound by input prefixes.
    pub fn bound_names(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        fn go(p: &Process, out: &mut BTreeSet<Sym>) {
            match p {
                Process::Nil | Process::Call { .. } => {}
                Process::In { vars, cont, .. } => {
                    out.extend(vars.iter().cloned());
                    go(cont, out);
                }
                Process::Out { cont, .. } | Process::Upd { cont, .. } | Process::Aware { cont, .. } => go(cont, out),
                Process::Sum(l, r) | Process::Par(l, r) => {
                    go(l, out);
                    go(r, out);
                }
            }
        }
        go(self, &mut out);
        out
    }

    pub fn has_rand(&self) -> bool {
        let mut found = false;
        self.for_each_expr(&mut |e| e.for_each_leaf(&mut |l| found |= matches!(l, Expression::Rand(_))));
        found
    }
}

fn env_names(env: &AttributeEnv, out: &mut BTreeSet<Sym>) {
    env.values().for_each(|v| v.collect_names(out));
}

impl System {
    /// Renames free occurrences of the name `from`; restrictions of `from`
    /// shadow.
    pub fn rename_free_name(&self, from: &Sym, to: &Sym) -> System {
        match self {
            System::Comp { env, proc } => System::Comp {
                env: env.iter().map(|(a, v)| (a.clone(), v.rename_name(from, to))).collect(),
                proc: proc.rename_name(from, to),
            },
            System::Par(l, r) => System::par(l.rename_free_name(from, to), r.rename_free_name(from, to)),
            System::Bang { body, spawned } => {
                System::Bang { body: Box::new(body.rename_free_name(from, to)), spawned: *spawned }
            }
            System::Nu { name, .. } if name == from => self.clone(),
            System::Nu { name, body } => {
                System::Nu { name: name.clone(), body: Box::new(body.rename_free_name(from, to)) }
            }
        }
    }

    pub fn free_names(&self) -> BTreeSet<Sym> {
        match self {
            System::Comp { env, proc } => {
                let mut out = proc.free_names();
                env_names(env, &mut out);
                out
            }
            System::Par(l, r) => {
                let mut out = l.free_names();
                out.extend(r.free_names());
                out
            }
            System::Bang { body, .. } => body.free_names(),
            System::Nu { name, body } => {
                let mut out = body.free_names();
                out.remove(name);
                out
            }
        }
    }

    pub fn bound_names(&self) -> BTreeSet<Sym> {
        match self {
            System::Comp { proc, .. } => proc.bound_names(),
            System::Par(l, r) => {
                let mut out = l.bound_names();
                out.extend(r.bound_names());
                out
            }
            System::Bang { body, .. } => body.bound_names(),
            System::Nu { name, body } => {
                let mut out = body.bound_names();
                out.insert(name.clone());
                out
            }
        }
    }

    /// Every name literal and restriction binder in the term.
    pub fn all_names(&self, out: &mut BTreeSet<Sym>) {
        match self {
            System::Comp { env, proc } => {
                env_names(env, out);
                proc.literal_names(out);
            }
            System::Par(l, r) => {
                l.all_names(out);
                r.all_names(out);
            }
            System::Bang { body, .. } => body.all_names(out),
            System::Nu { name, body } => {
                out.insert(name.clone());
                body.all_names(out);
            }
        }
    }
}

/// Renames every restriction of `old` (and the occurrences it binds) to
/// `fresh`. `fresh` must not occur in `sys`.
pub fn alpha_rename(sys: &System, old: &Sym, fresh: &Sym) -> System {
    match sys {
        System::Comp { .. } => sys.clone(),
        System::Par(l, r) => System::par(alpha_rename(l, old, fresh), alpha_rename(r, old, fresh)),
        System::Bang { body, spawned } => {
            System::Bang { body: Box::new(alpha_rename(body, old, fresh)), spawned: *spawned }
        }
        System::Nu { name, body } if name == old => {
            let body = alpha_rename(body, old, fresh).rename_free_name(old, fresh);
            System::Nu { name: fresh.clone(), body: Box::new(body) }
        }
        System::Nu { name, body } => System::Nu { name: name.clone(), body: Box::new(alpha_rename(body, old, fresh)) },
    }
}

/// Name literals in a program, including its definitions.
pub fn program_names(sys: &System, defs: &Definitions) -> BTreeSet<Sym> {
    let mut out = BTreeSet::new();
    sys.all_names(&mut out);
    for d in defs.values() {
        d.body.literal_names(&mut out);
    }
    out
}

/// The smallest `base#k` not in `avoid`, where `base` is `hint` without any
/// generated suffix.
pub fn fresh_name(hint: &Sym, avoid: &BTreeSet<Sym>) -> Sym {
    let base = hint.as_str().split('#').next().filter(|b| !b.is_empty()).unwrap_or("n");
    (0..).map(|k| Sym::new(&format!("{base}#{k}"))).find(|s| !avoid.contains(s)).expect("unbounded range")
}

/// α-canonical form: restriction binders become `#b0, #b1, …` in preorder
/// and input variables are named by their binding depth (`_0, _1, …`).
/// Two systems are α-equivalent iff their canonical forms are equal.
pub fn canonical_system(sys: &System) -> System {
    let mut counter = 0usize;
    canon_sys(sys, &mut counter)
}

fn canon_sys(sys: &System, counter: &mut usize) -> System {
    match sys {
        System::Comp { env, proc } => System::Comp { env: env.clone(), proc: canonical_process(proc) },
        System::Par(l, r) => {
            let l = canon_sys(l, counter);
            let r = canon_sys(r, counter);
            System::par(l, r)
        }
        System::Bang { body, spawned } => System::Bang { body: Box::new(canon_sys(body, counter)), spawned: *spawned },
        System::Nu { name, body } => {
            let fresh = Sym::new(&format!("#b{counter}"));
            *counter += 1;
            let body = body.rename_free_name(name, &fresh);
            System::Nu { name: fresh, body: Box::new(canon_sys(&body, counter)) }
        }
    }
}

pub fn canonical_process(p: &Process) -> Process {
    fn go(p: &Process, scope: &mut Vec<(Sym, Sym)>) -> Process {
        let f = |scope: &Vec<(Sym, Sym)>| {
            let scope = scope.clone();
            move |e: &Expression| rename_vars(e, &scope)
        };
        match p {
            Process::In { pred, vars, cont } => {
                let base = scope.len();
                let renamed: Vec<Sym> = (0..vars.len()).map(|i| Sym::new(&format!("_{}", base + i))).collect();
                scope.extend(vars.iter().cloned().zip(renamed.iter().cloned()));
                let pred = pred.map_exprs(&f(scope));
                let cont = go(cont, scope);
                scope.truncate(base);
                Process::In { pred, vars: renamed, cont: Box::new(cont) }
            }
            Process::Nil => Process::Nil,
            Process::Call { name, args } => {
                let g = f(scope);
                Process::Call { name: name.clone(), args: args.iter().map(g).collect() }
            }
            Process::Out { exprs, pred, cont } => {
                let g = f(scope);
                Process::Out {
                    exprs: exprs.iter().map(&g).collect(),
                    pred: pred.map_exprs(&g),
                    cont: Box::new(go(cont, scope)),
                }
            }
            Process::Upd { assigns, cont } => {
                let g = f(scope);
                Process::Upd {
                    assigns: assigns.iter().map(|(a, e)| (a.clone(), g(e))).collect(),
                    cont: Box::new(go(cont, scope)),
                }
            }
            Process::Aware { pred, cont } => {
                let g = f(scope);
                Process::Aware { pred: pred.map_exprs(&g), cont: Box::new(go(cont, scope)) }
            }
            Process::Sum(l, r) => Process::sum(go(l, scope), go(r, scope)),
            Process::Par(l, r) => Process::par(go(l, scope), go(r, scope)),
        }
    }
    go(p, &mut Vec::new())
}

/// Innermost binding wins: `scope` is searched from the end.
fn rename_vars(e: &Expression, scope: &[(Sym, Sym)]) -> Expression {
    match e {
        Expression::Var(x) => match scope.iter().rev().find(|(k, _)| k == x) {
            Some((_, n)) => Expression::Var(n.clone()),
            None => e.clone(),
        },
        Expression::Arith(op, l, r) => {
            Expression::Arith(*op, Box::new(rename_vars(l, scope)), Box::new(rename_vars(r, scope)))
        }
        _ => e.clone(),
    }
}
