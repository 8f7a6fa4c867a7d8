//! Static checks run after parsing a program.

use std::collections::BTreeSet;

use super::ast::*;
use crate::error::ResolveError;

fn collect_declared(sys: &System, out: &mut BTreeSet<Sym>, procs: &mut Vec<Process>) {
    match sys {
        System::Comp { env, proc } => {
            out.extend(env.keys().cloned());
            procs.push(proc.clone());
        }
        System::Par(l, r) => {
            collect_declared(l, out, procs);
            collect_declared(r, out, procs);
        }
        System::Bang { body, .. } | System::Nu { body, .. } => collect_declared(body, out, procs),
    }
}

fn process_declares(p: &Process, out: &mut BTreeSet<Sym>) {
    if let Process::Upd { assigns, .. } = p {
        out.extend(assigns.iter().map(|(a, _)| a.clone()));
    }
    match p {
        Process::Out { cont, .. }
        | Process::In { cont, .. }
        | Process::Upd { cont, .. }
        | Process::Aware { cont, .. } => process_declares(cont, out),
        Process::Sum(l, r) | Process::Par(l, r) => {
            process_declares(l, out);
            process_declares(r, out);
        }
        Process::Nil | Process::Call { .. } => {}
    }
    p.for_each_expr(&mut |e| {
        e.for_each_leaf(&mut |l| {
            if let Expression::ThisAttr(a) = l {
                out.insert(a.clone());
            }
        })
    });
}

fn check_process(p: &Process, attrs: &BTreeSet<Sym>, defs: &Definitions) -> Result<(), ResolveError> {
    let mut err = None;
    p.for_each_expr(&mut |e| {
        e.for_each_leaf(&mut |l| {
            if let Expression::Attr(a) = l {
                if !attrs.contains(a) && err.is_none() {
                    err = Some(ResolveError::UnresolvedIdentifier(a.clone()));
                }
            }
        })
    });
    if let Some(e) = err {
        return Err(e);
    }
    check_calls(p, defs)
}

fn check_calls(p: &Process, defs: &Definitions) -> Result<(), ResolveError> {
    match p {
        Process::Call { name, args } => match defs.get(name) {
            None => Err(ResolveError::UnknownDefinition(name.clone())),
            Some(d) if d.params.len() != args.len() => {
                Err(ResolveError::ArityMismatch { name: name.clone(), expected: d.params.len(), found: args.len() })
            }
            Some(_) => Ok(()),
        },
        Process::Out { cont, .. }
        | Process::In { cont, .. }
        | Process::Upd { cont, .. }
        | Process::Aware { cont, .. } => check_calls(cont, defs),
        Process::Sum(l, r) | Process::Par(l, r) => {
            check_calls(l, defs)?;
            check_calls(r, defs)
        }
        Process::Nil => Ok(()),
    }
}

/// Checks calls, arities, attribute identifiers and definition closure.
pub fn resolve(program: &Program) -> Result<(), ResolveError> {
    let mut attrs = program.declared_attrs.clone();
    let mut procs = Vec::new();
    collect_declared(&program.main, &mut attrs, &mut procs);
    for d in program.definitions.values() {
        process_declares(&d.body, &mut attrs);
    }
    for p in &procs {
        process_declares(p, &mut attrs);
    }
    for (name, d) in &program.definitions {
        if let Some(v) = d.body.free_vars().into_iter().find(|v| !d.params.contains(v)) {
            return Err(ResolveError::FreeVariable { def: name.clone(), var: v });
        }
        let mut seen = BTreeSet::new();
        if let Some(p) = d.params.iter().find(|p| !seen.insert(*p)) {
            return Err(ResolveError::DuplicateBinder(p.clone()));
        }
        check_process(&d.body, &attrs, &program.definitions)?;
    }
    for p in &procs {
        check_process(p, &attrs, &program.definitions)?;
    }
    Ok(())
}
