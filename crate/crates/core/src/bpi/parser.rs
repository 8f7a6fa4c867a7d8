use std::collections::BTreeMap;

use super::{BpiProcess, Guarded};
use crate::error::{Error, ParseError};
use crate::syntax::lexer::{tokenize, Tok, Token};
use crate::syntax::Sym;

const KEYWORDS: [&str; 4] = ["nil", "tau", "nu", "rec"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Recursion identifiers in scope with their arity.
    recs: Vec<(Sym, usize)>,
    arities: BTreeMap<Sym, (usize, Guarded)>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError {
            offset: t.offset,
            line: t.line,
            column: t.column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.describe(),
        }
    }

    fn message(&self, msg: String) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError { offset: t.offset, line: t.line, column: t.column, expected: vec![], found: msg }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&format!("`{}`", tok.text())]))
        }
    }

    fn name(&mut self) -> PResult<Sym> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(Sym::new(&s))
            }
            Tok::Quoted(s) => {
                self.bump();
                Ok(Sym::new(&s))
            }
            _ => Err(self.error(&["name"])),
        }
    }

    fn names_until(&mut self, close: Tok) -> PResult<Vec<Sym>> {
        let mut out = Vec::new();
        if *self.peek() == close {
            self.bump();
            return Ok(out);
        }
        loop {
            out.push(self.name()?);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                t if *t == close => {
                    self.bump();
                    return Ok(out);
                }
                _ => return Err(self.error(&["`,`", &format!("`{}`", close.text())])),
            }
        }
    }

    fn process(&mut self) -> PResult<BpiProcess> {
        let mut p = self.sum_level()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let r = self.sum_level()?;
            p = BpiProcess::par(p, r);
        }
        Ok(p)
    }

    fn sum_level(&mut self) -> PResult<BpiProcess> {
        let first = self.process_atom()?;
        if *self.peek() != Tok::Plus {
            return Ok(first);
        }
        let mut g = self.as_guarded(first)?;
        while *self.peek() == Tok::Plus {
            self.bump();
            let r = self.process_atom()?;
            let r = self.as_guarded(r)?;
            g = Guarded::Sum(Box::new(g), Box::new(r));
        }
        Ok(BpiProcess::G(g))
    }

    fn as_guarded(&self, p: BpiProcess) -> PResult<Guarded> {
        match p {
            BpiProcess::G(g) => Ok(g),
            _ => Err(self.message("parallel composition or restriction under choice".into())),
        }
    }

    fn process_atom(&mut self) -> PResult<BpiProcess> {
        match self.peek().clone() {
            Tok::Ident(k) if k == "nu" => {
                self.bump();
                let x = self.name()?;
                let body = self.process_atom()?;
                Ok(BpiProcess::Nu(x, Box::new(body)))
            }
            Tok::LParen => {
                self.bump();
                let p = self.process()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            _ => Ok(BpiProcess::G(self.prefix()?)),
        }
    }

    fn guarded_atom(&mut self) -> PResult<Guarded> {
        if *self.peek() == Tok::LParen {
            self.bump();
            let mut g = self.guarded_atom()?;
            while *self.peek() == Tok::Plus {
                self.bump();
                let r = self.guarded_atom()?;
                g = Guarded::Sum(Box::new(g), Box::new(r));
            }
            self.expect(Tok::RParen)?;
            return Ok(g);
        }
        self.prefix()
    }

    fn cont(&mut self) -> PResult<Box<Guarded>> {
        self.expect(Tok::Dot)?;
        Ok(Box::new(self.guarded_atom()?))
    }

    fn prefix(&mut self) -> PResult<Guarded> {
        match self.peek().clone() {
            Tok::Ident(k) if k == "nil" => {
                self.bump();
                Ok(Guarded::Nil)
            }
            Tok::Ident(k) if k == "tau" => {
                self.bump();
                Ok(Guarded::Tau(self.cont()?))
            }
            Tok::Ident(k) if k == "rec" => {
                self.bump();
                let name = self.name()?;
                self.expect(Tok::LParen)?;
                let params = self.names_until(Tok::RParen)?;
                self.expect(Tok::Dot)?;
                self.recs.push((name.clone(), params.len()));
                let body = self.guarded_atom();
                self.recs.pop();
                let body = body?;
                let args = if *self.peek() == Tok::At {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    self.names_until(Tok::RParen)?
                } else {
                    vec![]
                };
                if args.len() != params.len() {
                    return Err(self.message(format!(
                        "recursion `{name}` expects {} argument(s), got {}",
                        params.len(),
                        args.len()
                    )));
                }
                let mut fnames = Default::default();
                body.free_names(&mut fnames);
                if let Some(n) = fnames.iter().find(|n| !params.contains(n)) {
                    return Err(
                        self.message(format!("recursion `{name}` has free name `{n}` not among its parameters"))
                    );
                }
                if let Some((_, other)) = self.arities.get(&name) {
                    if *other != body {
                        return Err(self.message(format!("recursion identifier `{name}` defined twice")));
                    }
                }
                self.arities.insert(name.clone(), (params.len(), body.clone()));
                Ok(Guarded::Rec { name, params, body: Box::new(body), args })
            }
            Tok::Ident(_) | Tok::Quoted(_) => {
                let chan = self.name()?;
                match self.peek() {
                    Tok::Lt => {
                        self.bump();
                        let args = self.names_until(Tok::Gt)?;
                        Ok(Guarded::Out { chan, args, cont: self.cont()? })
                    }
                    Tok::LParen => {
                        self.bump();
                        let vars = self.names_until(Tok::RParen)?;
                        if *self.peek() == Tok::Dot {
                            let mut seen = std::collections::BTreeSet::new();
                            if let Some(v) = vars.iter().find(|v| !seen.insert(*v)) {
                                return Err(self.message(format!("input binds `{v}` more than once")));
                            }
                            return Ok(Guarded::In { chan, vars, cont: self.cont()? });
                        }
                        match self.recs.iter().rev().find(|(n, _)| *n == chan) {
                            Some(&(_, arity)) if arity == vars.len() => Ok(Guarded::Call { name: chan, args: vars }),
                            Some(&(_, arity)) => Err(self.message(format!(
                                "recursion `{chan}` expects {arity} argument(s), got {}",
                                vars.len()
                            ))),
                            None => Err(self.error(&["`.`"])),
                        }
                    }
                    _ => Err(self.error(&["`<`", "`(`"])),
                }
            }
            _ => Err(self.error(&["nil", "tau", "rec", "nu", "`(`", "name"])),
        }
    }
}

/// Parses a broadcast pi-calculus term: `nil`, `tau.G`, `a(x, …).G`,
/// `a<v, …>.G`, `G + G`, `P | P`, `nu x P`, `rec A(x, …).G @ (v, …)` with
/// recursive occurrences written `A(v, …)`.
pub fn parse_bpi(text: &str) -> Result<BpiProcess, Error> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, recs: vec![], arities: BTreeMap::new() };
    let out = p.process()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(&["`|`", "`+`", "end of input"]).into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for src in [
            "nil",
            "a<v>.nil | a(x).nil | b(x).nil",
            "nu a (a<v>.nil | a(x).x<>.nil) | b(x).nil",
            "a<>.nil + b(x, y).tau.nil",
            "rec A(x).(x<x>.A(x) + tau.nil) @ (c)",
            "rec A().tau.A() @ ()",
        ] {
            let p = parse_bpi(src).unwrap();
            assert_eq!(parse_bpi(&p.to_string()).unwrap(), p, "{src}");
        }
    }

    #[test]
    fn rejects_parallel_under_choice() {
        assert!(parse_bpi("a<>.nil + (b<>.nil | c<>.nil)").is_err());
    }

    #[test]
    fn rejects_free_names_in_recursion() {
        assert!(parse_bpi("rec A(x).y<x>.A(x) @ (c)").is_err());
    }

    #[test]
    fn call_outside_recursion_is_an_error() {
        assert!(parse_bpi("A(x)").is_err());
    }
}
