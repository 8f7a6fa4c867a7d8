//! Concrete-syntax rendering. Output reparses to the same AST; parentheses
//! are inserted only where precedence requires them.

use std::fmt::{self, Display, Formatter, Write};

use super::ast::*;
use super::lexer::is_identifier;

fn comma_sep<T: Display>(f: &mut Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, it) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{it}")?;
    }
    Ok(())
}

impl Display for Value {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Value::Name(n) => write!(f, "'{n}'"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => f.write_str(if *b { "true" } else { "false" }),
            Value::Tuple(items) => {
                f.write_char('<')?;
                comma_sep(f, items)?;
                f.write_char('>')
            }
        }
    }
}

fn expr_prec(e: &Expression) -> u8 {
    match e {
        Expression::Arith(ArithOp::Add | ArithOp::Sub, ..) => 1,
        Expression::Arith(ArithOp::Mul, ..) => 2,
        _ => 3,
    }
}

fn write_expr(f: &mut Formatter<'_>, e: &Expression, min: u8) -> fmt::Result {
    let prec = expr_prec(e);
    if prec < min {
        f.write_char('(')?;
    }
    match e {
        Expression::Lit(v) => write!(f, "{v}")?,
        Expression::Var(x) | Expression::Attr(x) => write!(f, "{x}")?,
        Expression::ThisAttr(a) => write!(f, "this.{a}")?,
        Expression::Rand(n) => write!(f, "rand({n})")?,
        Expression::Arith(op, l, r) => {
            write_expr(f, l, prec)?;
            write!(f, " {} ", op.symbol())?;
            write_expr(f, r, prec + 1)?;
        }
    }
    if prec < min {
        f.write_char(')')?;
    }
    Ok(())
}

impl Display for Expression {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

fn pred_prec(p: &Predicate) -> u8 {
    match p {
        Predicate::Or(..) => 1,
        Predicate::And(..) => 2,
        _ => 3,
    }
}

/// `guard` is set inside `<…>`, where a bare `>` comparison is
/// parenthesized so that it cannot be read as the closing bracket.
fn write_pred(f: &mut Formatter<'_>, p: &Predicate, min: u8, guard: bool) -> fmt::Result {
    let prec = pred_prec(p);
    let wrap = prec < min || (guard && matches!(p, Predicate::Cmp(CmpOp::Gt, ..)));
    if wrap {
        f.write_char('(')?;
    }
    match p {
        Predicate::True => f.write_str("tt")?,
        Predicate::False => f.write_str("ff")?,
        Predicate::Cmp(op, l, r) => write!(f, "{l} {} {r}", op.symbol())?,
        Predicate::And(l, r) => {
            write_pred(f, l, 2, guard)?;
            f.write_str(" and ")?;
            write_pred(f, r, 3, guard)?;
        }
        Predicate::Or(l, r) => {
            write_pred(f, l, 1, guard)?;
            f.write_str(" or ")?;
            write_pred(f, r, 2, guard)?;
        }
        Predicate::Not(inner) => match **inner {
            Predicate::True | Predicate::False | Predicate::Not(_) => {
                f.write_char('!')?;
                write_pred(f, inner, 3, guard)?;
            }
            _ => write!(f, "!({inner})")?,
        },
    }
    if wrap {
        f.write_char(')')?;
    }
    Ok(())
}

impl Display for Predicate {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_pred(f, self, 0, false)
    }
}

fn proc_prec(p: &Process) -> u8 {
    match p {
        Process::Par(..) => 1,
        Process::Sum(..) => 2,
        _ => 3,
    }
}

fn write_proc(f: &mut Formatter<'_>, p: &Process, min: u8) -> fmt::Result {
    let prec = proc_prec(p);
    if prec < min {
        f.write_char('(')?;
    }
    match p {
        Process::Nil => f.write_char('0')?,
        Process::Out { exprs, pred, cont } => {
            f.write_char('(')?;
            comma_sep(f, exprs)?;
            write!(f, ")@({pred}).")?;
            write_proc(f, cont, 3)?;
        }
        Process::In { pred, vars, cont } => {
            write!(f, "({pred})(")?;
            comma_sep(f, vars)?;
            f.write_str(").")?;
            write_proc(f, cont, 3)?;
        }
        Process::Upd { assigns, cont } => {
            f.write_char('[')?;
            for (i, (a, e)) in assigns.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a} := {e}")?;
            }
            f.write_char(']')?;
            write_proc(f, cont, 3)?;
        }
        Process::Aware { pred, cont } => {
            f.write_char('<')?;
            write_pred(f, pred, 0, true)?;
            f.write_char('>')?;
            write_proc(f, cont, 3)?;
        }
        Process::Sum(l, r) => {
            write_proc(f, l, 2)?;
            f.write_str(" + ")?;
            write_proc(f, r, 3)?;
        }
        Process::Par(l, r) => {
            write_proc(f, l, 1)?;
            f.write_str(" | ")?;
            write_proc(f, r, 2)?;
        }
        Process::Call { name, args } => {
            write!(f, "{name}")?;
            if !args.is_empty() {
                f.write_char('(')?;
                comma_sep(f, args)?;
                f.write_char(')')?;
            }
        }
    }
    if prec < min {
        f.write_char(')')?;
    }
    Ok(())
}

impl Display for Process {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_proc(f, self, 0)
    }
}

/// Restriction binders print bare when they are plain identifiers and
/// quoted otherwise (generated names contain `#`).
fn write_binder(f: &mut Formatter<'_>, name: &Sym) -> fmt::Result {
    if is_identifier(name.as_str()) && !super::parser::is_keyword(name.as_str()) {
        write!(f, "{name}")
    } else {
        write!(f, "'{name}'")
    }
}

pub fn write_env(f: &mut impl Write, env: &AttributeEnv) -> fmt::Result {
    f.write_char('{')?;
    for (i, (a, v)) in env.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a} := {v}")?;
    }
    f.write_char('}')
}

fn write_sys(f: &mut Formatter<'_>, s: &System, atom: bool) -> fmt::Result {
    match s {
        System::Comp { env, proc } => {
            write_env(f, env)?;
            write!(f, ":{proc}")
        }
        System::Par(l, r) => {
            if atom {
                f.write_char('(')?;
            }
            write_sys(f, l, false)?;
            f.write_str(" || ")?;
            write_sys(f, r, true)?;
            if atom {
                f.write_char(')')?;
            }
            Ok(())
        }
        System::Bang { body, .. } => {
            f.write_char('!')?;
            write_sys(f, body, true)
        }
        System::Nu { name, body } => {
            f.write_str("nu ")?;
            write_binder(f, name)?;
            f.write_char(' ')?;
            write_sys(f, body, true)
        }
    }
}

impl Display for System {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_sys(f, self, false)
    }
}

impl Display for Program {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if !self.declared_attrs.is_empty() {
            f.write_str("attrs: ")?;
            let attrs: Vec<_> = self.declared_attrs.iter().collect();
            comma_sep(f, &attrs)?;
            f.write_str("\n\n")?;
        }
        for (name, def) in &self.definitions {
            write!(f, "def {name}")?;
            if !def.params.is_empty() {
                f.write_char('(')?;
                comma_sep(f, &def.params)?;
                f.write_char(')')?;
            }
            writeln!(f, " = {}", def.body)?;
        }
        if !self.definitions.is_empty() {
            f.write_str("\nsystem: ")?;
        }
        let parts = par_spine(&self.main);
        for (i, p) in parts.iter().enumerate() {
            if i > 0 {
                f.write_str("\n  || ")?;
            }
            write_sys(f, p, i > 0)?;
        }
        f.write_char('\n')
    }
}

/// Flattens a left-nested parallel spine so each component gets its own
/// line; right-nested parallels stay grouped.
fn par_spine(s: &System) -> Vec<&System> {
    match s {
        System::Par(l, r) => {
            let mut v = par_spine(l);
            v.push(r);
            v
        }
        other => vec![other],
    }
}

pub fn pretty<T: Display + ?Sized>(node: &T) -> String {
    node.to_string()
}
