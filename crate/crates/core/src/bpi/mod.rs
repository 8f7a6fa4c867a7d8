//! Broadcast pi-calculus: syntax, a reference semantics, the translation
//! into AbC and a checker relating the two.

mod correspondence;
mod encode;
mod parser;
mod semantics;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::syntax::lexer::is_identifier;
use crate::syntax::Sym;

pub use correspondence::{correspondence_check, CorrespondenceReport};
pub use encode::{encode, encode_with_defs};
pub use parser::parse_bpi;
pub use semantics::{bpi_steps, react, BpiDelivery, BpiLabel};

/// Guarded terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Guarded {
    Nil,
    Tau(Box<Guarded>),
    In {
        chan: Sym,
        vars: Vec<Sym>,
        cont: Box<Guarded>,
    },
    Out {
        chan: Sym,
        args: Vec<Sym>,
        cont: Box<Guarded>,
    },
    Sum(Box<Guarded>, Box<Guarded>),
    /// `(rec A(params).body)(args)`
    Rec {
        name: Sym,
        params: Vec<Sym>,
        body: Box<Guarded>,
        args: Vec<Sym>,
    },
    /// Recursive occurrence `A(args)` inside the body of `rec A`.
    Call {
        name: Sym,
        args: Vec<Sym>,
    },
}

/// Process-level terms: guarded terms under parallel composition and
/// restriction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BpiProcess {
    G(Guarded),
    Par(Box<BpiProcess>, Box<BpiProcess>),
    Nu(Sym, Box<BpiProcess>),
}

pub type NameMap = BTreeMap<Sym, Sym>;

impl Guarded {
    /// Capture-avoiding renaming of free names.
    pub fn rename(&self, m: &NameMap) -> Guarded {
        let map = |n: &Sym| m.get(n).cloned().unwrap_or_else(|| n.clone());
        match self {
            Guarded::Nil => Guarded::Nil,
            Guarded::Tau(g) => Guarded::Tau(Box::new(g.rename(m))),
            Guarded::Out { chan, args, cont } => {
                Guarded::Out { chan: map(chan), args: args.iter().map(map).collect(), cont: Box::new(cont.rename(m)) }
            }
            Guarded::In { chan, vars, cont } => {
                let (vars, inner) = rebind(vars, m, cont);
                Guarded::In { chan: map(chan), vars, cont: Box::new(inner) }
            }
            Guarded::Sum(l, r) => Guarded::Sum(Box::new(l.rename(m)), Box::new(r.rename(m))),
            Guarded::Rec { name, params, body, args } => Guarded::Rec {
                name: name.clone(),
                params: params.clone(),
                body: body.clone(),
                args: args.iter().map(map).collect(),
            },
            Guarded::Call { name, args } => Guarded::Call { name: name.clone(), args: args.iter().map(map).collect() },
        }
    }

    pub fn free_names(&self, out: &mut BTreeSet<Sym>) {
        match self {
            Guarded::Nil => {}
            Guarded::Tau(g) => g.free_names(out),
            Guarded::Out { chan, args, cont } => {
                out.insert(chan.clone());
                out.extend(args.iter().cloned());
                cont.free_names(out);
            }
            Guarded::In { chan, vars, cont } => {
                out.insert(chan.clone());
                let mut inner = BTreeSet::new();
                cont.free_names(&mut inner);
                out.extend(inner.into_iter().filter(|n| !vars.contains(n)));
            }
            Guarded::Sum(l, r) => {
                l.free_names(out);
                r.free_names(out);
            }
            Guarded::Rec { args, .. } | Guarded::Call { args, .. } => out.extend(args.iter().cloned()),
        }
    }

    /// Every name occurring anywhere, binders included.
    pub fn all_names(&self, out: &mut BTreeSet<Sym>) {
        match self {
            Guarded::Nil => {}
            Guarded::Tau(g) => g.all_names(out),
            Guarded::Out { chan, args, cont } => {
                out.insert(chan.clone());
                out.extend(args.iter().cloned());
                cont.all_names(out);
            }
            Guarded::In { chan, vars, cont } => {
                out.insert(chan.clone());
                out.extend(vars.iter().cloned());
                cont.all_names(out);
            }
            Guarded::Sum(l, r) => {
                l.all_names(out);
                r.all_names(out);
            }
            Guarded::Rec { params, body, args, .. } => {
                out.extend(params.iter().cloned());
                out.extend(args.iter().cloned());
                body.all_names(out);
            }
            Guarded::Call { args, .. } => out.extend(args.iter().cloned()),
        }
    }

    /// Replaces recursive occurrences of `name` by the recursion itself.
    fn close_calls(&self, name: &Sym, params: &[Sym], body: &Guarded) -> Guarded {
        let go = |g: &Guarded| Box::new(g.close_calls(name, params, body));
        match self {
            Guarded::Nil => Guarded::Nil,
            Guarded::Tau(g) => Guarded::Tau(go(g)),
            Guarded::Out { chan, args, cont } => {
                Guarded::Out { chan: chan.clone(), args: args.clone(), cont: go(cont) }
            }
            Guarded::In { chan, vars, cont } => Guarded::In { chan: chan.clone(), vars: vars.clone(), cont: go(cont) },
            Guarded::Sum(l, r) => Guarded::Sum(go(l), go(r)),
            Guarded::Rec { .. } => self.clone(),
            Guarded::Call { name: n, args } if n == name => Guarded::Rec {
                name: name.clone(),
                params: params.to_vec(),
                body: Box::new(body.clone()),
                args: args.clone(),
            },
            Guarded::Call { .. } => self.clone(),
        }
    }

    /// One unfolding of a recursion; other terms are returned unchanged.
    pub fn unfold(&self) -> Guarded {
        match self {
            Guarded::Rec { name, params, body, args } => {
                let closed = body.close_calls(name, params, body);
                let m: NameMap = params.iter().cloned().zip(args.iter().cloned()).collect();
                closed.rename(&m)
            }
            other => other.clone(),
        }
    }
}

/// Renames binders that would capture an incoming name, then applies `m`
/// under them.
fn rebind(vars: &[Sym], m: &NameMap, cont: &Guarded) -> (Vec<Sym>, Guarded) {
    let mut inner: NameMap = m.iter().filter(|(k, _)| !vars.contains(k)).map(|(k, v)| (k.clone(), v.clone())).collect();
    let incoming: BTreeSet<Sym> = inner.values().cloned().collect();
    let mut avoid = BTreeSet::new();
    cont.all_names(&mut avoid);
    avoid.extend(incoming.iter().cloned());
    avoid.extend(inner.keys().cloned());
    avoid.extend(vars.iter().cloned());
    let mut out = Vec::new();
    for v in vars {
        if incoming.contains(v) {
            let fresh = crate::syntax::fresh_name(v, &avoid);
            avoid.insert(fresh.clone());
            inner.insert(v.clone(), fresh.clone());
            out.push(fresh);
        } else {
            out.push(v.clone());
        }
    }
    (out, cont.rename(&inner))
}

impl BpiProcess {
    pub fn par(l: BpiProcess, r: BpiProcess) -> BpiProcess {
        BpiProcess::Par(Box::new(l), Box::new(r))
    }

    pub fn rename(&self, m: &NameMap) -> BpiProcess {
        match self {
            BpiProcess::G(g) => BpiProcess::G(g.rename(m)),
            BpiProcess::Par(l, r) => BpiProcess::par(l.rename(m), r.rename(m)),
            BpiProcess::Nu(x, p) => {
                let inner: NameMap = m.iter().filter(|(k, _)| *k != x).map(|(k, v)| (k.clone(), v.clone())).collect();
                if inner.values().any(|v| v == x) {
                    let mut avoid = self.all_names();
                    avoid.extend(inner.values().cloned());
                    let fresh = crate::syntax::fresh_name(x, &avoid);
                    let body = p.rename(&NameMap::from([(x.clone(), fresh.clone())]));
                    BpiProcess::Nu(fresh, Box::new(body.rename(&inner)))
                } else {
                    BpiProcess::Nu(x.clone(), Box::new(p.rename(&inner)))
                }
            }
        }
    }

    pub fn free_names(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        match self {
            BpiProcess::G(g) => g.free_names(&mut out),
            BpiProcess::Par(l, r) => {
                out = l.free_names();
                out.extend(r.free_names());
            }
            BpiProcess::Nu(x, p) => {
                out = p.free_names();
                out.remove(x);
            }
        }
        out
    }

    pub fn all_names(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        match self {
            BpiProcess::G(g) => g.all_names(&mut out),
            BpiProcess::Par(l, r) => {
                out = l.all_names();
                out.extend(r.all_names());
            }
            BpiProcess::Nu(x, p) => {
                out = p.all_names();
                out.insert(x.clone());
            }
        }
        out
    }

    /// Free names and restricted names; the names that become literals
    /// under translation.
    pub fn literal_names(&self) -> BTreeSet<Sym> {
        match self {
            BpiProcess::G(g) => {
                let mut out = BTreeSet::new();
                g.free_names(&mut out);
                out
            }
            BpiProcess::Par(l, r) => {
                let mut out = l.literal_names();
                out.extend(r.literal_names());
                out
            }
            BpiProcess::Nu(x, p) => {
                let mut out = p.literal_names();
                out.insert(x.clone());
                out
            }
        }
    }
}

fn write_name(f: &mut fmt::Formatter<'_>, n: &Sym) -> fmt::Result {
    if is_identifier(n.as_str()) {
        write!(f, "{n}")
    } else {
        write!(f, "'{n}'")
    }
}

fn write_names(f: &mut fmt::Formatter<'_>, ns: &[Sym]) -> fmt::Result {
    for (i, n) in ns.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write_name(f, n)?;
    }
    Ok(())
}

impl Guarded {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, atom: bool) -> fmt::Result {
        match self {
            Guarded::Nil => write!(f, "nil"),
            Guarded::Tau(g) => {
                write!(f, "tau.")?;
                g.fmt_prec(f, true)
            }
            Guarded::Out { chan, args, cont } => {
                write_name(f, chan)?;
                write!(f, "<")?;
                write_names(f, args)?;
                write!(f, ">.")?;
                cont.fmt_prec(f, true)
            }
            Guarded::In { chan, vars, cont } => {
                write_name(f, chan)?;
                write!(f, "(")?;
                write_names(f, vars)?;
                write!(f, ").")?;
                cont.fmt_prec(f, true)
            }
            Guarded::Sum(l, r) => {
                if atom {
                    write!(f, "(")?;
                }
                l.fmt_prec(f, false)?;
                write!(f, " + ")?;
                r.fmt_prec(f, true)?;
                if atom {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Guarded::Rec { name, params, body, args } => {
                write!(f, "rec {name}(")?;
                write_names(f, params)?;
                write!(f, ").")?;
                body.fmt_prec(f, true)?;
                write!(f, " @ (")?;
                write_names(f, args)?;
                write!(f, ")")
            }
            Guarded::Call { name, args } => {
                write!(f, "{name}(")?;
                write_names(f, args)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Guarded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false)
    }
}

impl BpiProcess {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, atom: bool) -> fmt::Result {
        match self {
            BpiProcess::G(g) => g.fmt_prec(f, atom),
            BpiProcess::Par(l, r) => {
                if atom {
                    write!(f, "(")?;
                }
                l.fmt_prec(f, false)?;
                write!(f, " | ")?;
                r.fmt_prec(f, true)?;
                if atom {
                    write!(f, ")")?;
                }
                Ok(())
            }
            BpiProcess::Nu(x, p) => {
                write!(f, "nu ")?;
                write_name(f, x)?;
                write!(f, " ")?;
                p.fmt_prec(f, true)
            }
        }
    }
}

impl fmt::Display for BpiProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false)
    }
}
