use std::collections::BTreeSet;

use super::{BpiProcess, Guarded};
use crate::syntax::*;

fn fresh_var(base: &str, avoid: &BTreeSet<Sym>) -> Sym {
    let mut cand = Sym::new(base);
    let mut k = 1;
    while avoid.contains(&cand) {
        cand = Sym::new(&format!("{base}{k}"));
        k += 1;
    }
    cand
}

fn name_expr(n: &Sym, bound: &[Sym]) -> Expression {
    if bound.contains(n) {
        Expression::Var(n.clone())
    } else {
        Expression::Lit(Value::Name(n.clone()))
    }
}

fn guarded(g: &Guarded, bound: &[Sym], defs: &mut Definitions) -> Process {
    match g {
        Guarded::Nil => Process::Nil,
        Guarded::Tau(c) => Process::out(vec![], Predicate::False, guarded(c, bound, defs)),
        Guarded::Out { chan, args, cont } => {
            let c = name_expr(chan, bound);
            let mut exprs = vec![c.clone()];
            exprs.extend(args.iter().map(|a| name_expr(a, bound)));
            Process::out(exprs, Predicate::eq(c.clone(), c), guarded(cont, bound, defs))
        }
        Guarded::In { chan, vars, cont } => {
            let mut inner = bound.to_vec();
            inner.extend(vars.iter().cloned());
            let body = guarded(cont, &inner, defs);
            let mut avoid = BTreeSet::new();
            g.all_names(&mut avoid);
            avoid.extend(bound.iter().cloned());
            let y = fresh_var("y", &avoid);
            let mut all = vec![y.clone()];
            all.extend(vars.iter().cloned());
            Process::In {
                pred: Predicate::eq(Expression::Var(y), name_expr(chan, bound)),
                vars: all,
                cont: Box::new(body),
            }
        }
        Guarded::Sum(l, r) => Process::sum(guarded(l, bound, defs), guarded(r, bound, defs)),
        Guarded::Rec { name, params, body, args } => {
            if !defs.contains_key(name) {
                defs.insert(name.clone(), Definition { params: params.clone(), body: Process::Nil });
                let b = guarded(body, params, defs);
                defs.insert(name.clone(), Definition { params: params.clone(), body: b });
            }
            Process::Call { name: name.clone(), args: args.iter().map(|a| name_expr(a, bound)).collect() }
        }
        Guarded::Call { name, args } => {
            Process::Call { name: name.clone(), args: args.iter().map(|a| name_expr(a, bound)).collect() }
        }
    }
}

fn process(p: &BpiProcess, defs: &mut Definitions) -> System {
    match p {
        BpiProcess::G(g) => System::Comp { env: AttributeEnv::new(), proc: guarded(g, &[], defs) },
        BpiProcess::Par(l, r) => System::par(process(l, defs), process(r, defs)),
        BpiProcess::Nu(x, q) => System::Nu { name: x.clone(), body: Box::new(process(q, defs)) },
    }
}

/// Translation into AbC: each sequential term becomes a component with an
/// empty environment; the channel travels as the first value under the
/// predicate `a = a`, and receivers check it with `y = a` on a fresh `y`.
pub fn encode(p: &BpiProcess) -> Program {
    let (main, definitions) = encode_with_defs(p);
    Program { declared_attrs: Default::default(), definitions, main }
}

pub fn encode_with_defs(p: &BpiProcess) -> (System, Definitions) {
    let mut defs = Definitions::new();
    let main = process(p, &mut defs);
    (main, defs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bpi::parse_bpi;

    fn enc(s: &str) -> String {
        encode(&parse_bpi(s).unwrap()).to_string().trim_end().to_string()
    }

    #[test]
    fn table_rows() {
        assert_eq!(enc("nil"), "{}:0");
        assert_eq!(enc("a<v>.nil"), "{}:('a', 'v')@('a' = 'a').0");
        assert_eq!(enc("tau.nil"), "{}:()@(ff).0");
        assert_eq!(enc("a(x).x<>.nil"), "{}:(y = 'a')(y, x).(x)@(x = x).0");
    }

    #[test]
    fn homomorphic() {
        assert_eq!(enc("nu a (a<>.nil | b(x).nil)"), "nu a ({}:('a')@('a' = 'a').0 || {}:(y = 'b')(y, x).0)");
    }

    #[test]
    fn encoded_text_parses_back() {
        for s in ["a(x).x<x>.nil | nu b a<b>.nil", "rec A(c).(c<c>.A(c) + tau.nil) @ (k)"] {
            let p = encode(&parse_bpi(s).unwrap());
            assert_eq!(parse_program(&p.to_string()).unwrap(), p, "{s}");
        }
    }
}
