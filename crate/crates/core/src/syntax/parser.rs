//! Recursive-descent parser for `.abc` programs.
//!
//! Concrete grammar (lowest precedence first):
//!
//! ```text
//! program  ::= ["attrs:" ident,*] def* ["system:"] system
//! def      ::= "def" Ident ["(" ident,* ")"] "=" process
//! system   ::= sysatom ("||" sysatom)*
//! sysatom  ::= "!" sysatom | "nu" name sysatom | "(" system ")" | env ":" process
//! env      ::= "{" (ident ":=" value),* "}"
//! process  ::= choice ("|" choice)*
//! choice   ::= prefix ("+" prefix)*
//! prefix   ::= "0" | "(" expr,* ")" "@" "(" pred ")" "." prefix
//!            | "(" pred ")" "(" ident,* ")" "." prefix
//!            | "[" (attr ":=" expr),* "]" prefix | "<" pred ">" prefix
//!            | Ident ["(" expr,* ")"] | "(" process ")"
//! pred     ::= conj ("or" conj)* ;  conj ::= neg ("and" neg)*
//! neg      ::= ("!" | "not") neg | "tt" | "ff" | "(" pred ")" | expr cmp expr
//! expr     ::= term (("+" | "-") term)* ; term ::= atom ("*" atom)*
//! atom     ::= value | ident | "this." ident | "rand(" int ")" | "(" expr ")"
//! value    ::= int | "-" int | "'" name "'" | "true" | "false" | "tt" | "ff" | "<" value,* ">"
//! ```
//!
//! A bare identifier in an expression is a variable when an enclosing input
//! or definition binds it, otherwise an attribute identifier; the resolver
//! rejects attribute identifiers that the program never declares.

use std::collections::BTreeSet;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use crate::error::{Error, ParseError, ResolveError};

const KEYWORDS: &[&str] =
    &["nu", "def", "attrs", "system", "this", "tt", "ff", "true", "false", "and", "or", "not", "rand"];

pub(crate) fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

struct Fail;

type PResult<T> = Result<T, Fail>;

type ProgramParts = (BTreeSet<Sym>, Vec<(Sym, Definition)>, System);

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    furthest: Option<ParseError>,
    scopes: Vec<Sym>,
    in_predicate: bool,
    rand_in_predicate: bool,
    /// A `>` outside parentheses ends the current awareness guard.
    gt_closes: bool,
    duplicate_binder: Option<Sym>,
}

impl Parser {
    fn new(toks: Vec<Token>) -> Self {
        Parser {
            toks,
            pos: 0,
            furthest: None,
            scopes: Vec::new(),
            in_predicate: false,
            rand_in_predicate: false,
            gt_closes: false,
            duplicate_binder: None,
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&mut self, expected: &str) -> PResult<T> {
        let tok = &self.toks[self.pos];
        match &mut self.furthest {
            Some(f) if f.offset > tok.offset => {}
            Some(f) if f.offset == tok.offset => {
                if !f.expected.iter().any(|e| e == expected) {
                    f.expected.push(expected.to_string());
                }
            }
            _ => {
                self.furthest = Some(ParseError {
                    offset: tok.offset,
                    line: tok.line,
                    column: tok.column,
                    expected: vec![expected.to_string()],
                    found: tok.tok.describe(),
                })
            }
        }
        Err(Fail)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.fail(&format!("`{}`", t.text()))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> PResult<Sym> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(Sym::new(&s))
            }
            _ => self.fail("identifier"),
        }
    }

    /// Identifier or quoted name; used for restriction binders.
    fn name_binder(&mut self) -> PResult<Sym> {
        if let Tok::Quoted(s) = self.peek().clone() {
            self.bump();
            return Ok(Sym::new(&s));
        }
        self.ident()
    }

    fn comma_list<T>(&mut self, close: Tok, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        let mut out = Vec::new();
        if self.eat(&close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(close.clone())?;
            return Ok(out);
        }
    }

    // ---- values and expressions ----

    fn value(&mut self) -> PResult<Value> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Value::Int(n))
            }
            Tok::Minus => {
                self.bump();
                match self.bump() {
                    Tok::Int(n) => Ok(Value::Int(-n)),
                    _ => {
                        self.pos -= 1;
                        self.fail("integer")
                    }
                }
            }
            Tok::Quoted(s) => {
                self.bump();
                Ok(Value::Name(Sym::new(&s)))
            }
            Tok::Ident(s) if s == "true" || s == "tt" => {
                self.bump();
                Ok(Value::Bool(true))
            }
            Tok::Ident(s) if s == "false" || s == "ff" => {
                self.bump();
                Ok(Value::Bool(false))
            }
            Tok::Lt => {
                self.bump();
                let items = self.comma_list(Tok::Gt, |p| p.value())?;
                Ok(Value::Tuple(items))
            }
            _ => self.fail("value"),
        }
    }

    fn expr(&mut self) -> PResult<Expression> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expression::Arith(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> PResult<Expression> {
        let mut lhs = self.expr_atom()?;
        while self.eat(&Tok::Star) {
            let rhs = self.expr_atom()?;
            lhs = Expression::Arith(ArithOp::Mul, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn expr_atom(&mut self) -> PResult<Expression> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let saved = std::mem::replace(&mut self.gt_closes, false);
                let e = self.expr();
                self.gt_closes = saved;
                let e = e?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) if s == "this" => {
                self.bump();
                self.expect(Tok::Dot)?;
                Ok(Expression::ThisAttr(self.ident()?))
            }
            Tok::Ident(s) if s == "rand" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let n = match self.peek().clone() {
                    Tok::Int(n) if n > 0 && n <= u32::MAX as i64 => {
                        self.bump();
                        n as u32
                    }
                    _ => return self.fail("positive integer"),
                };
                self.expect(Tok::RParen)?;
                if self.in_predicate {
                    self.rand_in_predicate = true;
                }
                Ok(Expression::Rand(n))
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                let sym = Sym::new(&s);
                if self.scopes.contains(&sym) {
                    Ok(Expression::Var(sym))
                } else {
                    Ok(Expression::Attr(sym))
                }
            }
            _ => match self.value() {
                Ok(v) => Ok(Expression::Lit(v)),
                Err(_) => self.fail("expression"),
            },
        }
    }

    // ---- predicates ----

    fn pred(&mut self) -> PResult<Predicate> {
        let saved = self.in_predicate;
        self.in_predicate = true;
        let r = self.pred_or();
        self.in_predicate = saved;
        r
    }

    fn pred_or(&mut self) -> PResult<Predicate> {
        let mut lhs = self.pred_and()?;
        while self.eat_kw("or") {
            let rhs = self.pred_and()?;
            lhs = Predicate::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn pred_and(&mut self) -> PResult<Predicate> {
        let mut lhs = self.pred_not()?;
        while self.eat_kw("and") {
            let rhs = self.pred_not()?;
            lhs = Predicate::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        Some(match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt if !self.gt_closes => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return None,
        })
    }

    fn continues_expression(&self) -> bool {
        self.cmp_op().is_some() || matches!(self.peek(), Tok::Plus | Tok::Minus | Tok::Star)
    }

    fn pred_not(&mut self) -> PResult<Predicate> {
        if self.eat(&Tok::Bang) || self.eat_kw("not") {
            return Ok(Predicate::not(self.pred_not()?));
        }
        let start = self.pos;
        if self.is_kw("tt") || self.is_kw("ff") {
            let t = self.is_kw("tt");
            self.bump();
            if self.cmp_op().is_none() {
                return Ok(if t { Predicate::True } else { Predicate::False });
            }
            self.pos = start;
        }
        let mut grouped = None;
        if *self.peek() == Tok::LParen {
            self.bump();
            let saved = std::mem::replace(&mut self.gt_closes, false);
            let inner = self.pred();
            self.gt_closes = saved;
            if let Ok(p) = inner {
                if self.eat(&Tok::RParen) {
                    if !self.continues_expression() {
                        return Ok(p);
                    }
                    grouped = Some((p, self.pos));
                }
            }
            self.pos = start;
        }
        match self.comparison() {
            Err(_) if grouped.is_some() => {
                let (p, end) = grouped.unwrap();
                self.pos = end;
                Ok(p)
            }
            r => r,
        }
    }

    fn comparison(&mut self) -> PResult<Predicate> {
        let lhs = self.expr()?;
        let Some(op) = self.cmp_op() else {
            return self.fail("comparison operator");
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(Predicate::Cmp(op, lhs, rhs))
    }

    // ---- processes ----

    fn process(&mut self) -> PResult<Process> {
        let mut lhs = self.choice()?;
        while self.eat(&Tok::Bar) {
            let rhs = self.choice()?;
            lhs = Process::par(lhs, rhs);
        }
        Ok(lhs)
    }

    fn choice(&mut self) -> PResult<Process> {
        let mut lhs = self.prefix()?;
        while self.eat(&Tok::Plus) {
            let rhs = self.prefix()?;
            lhs = Process::sum(lhs, rhs);
        }
        Ok(lhs)
    }

    fn continuation(&mut self) -> PResult<Process> {
        self.expect(Tok::Dot)?;
        self.prefix()
    }

    fn prefix(&mut self) -> PResult<Process> {
        match self.peek().clone() {
            Tok::Int(0) => {
                self.bump();
                Ok(Process::Nil)
            }
            Tok::LBracket => {
                self.bump();
                let assigns = self.comma_list(Tok::RBracket, |p| {
                    if p.eat_kw("this") {
                        p.expect(Tok::Dot)?;
                    }
                    let a = p.ident()?;
                    p.expect(Tok::Assign)?;
                    let e = p.expr()?;
                    Ok((a, e))
                })?;
                let cont = self.prefix()?;
                Ok(Process::Upd { assigns, cont: Box::new(cont) })
            }
            Tok::Lt => {
                self.bump();
                let start = self.pos;
                let rand_seen = self.rand_in_predicate;
                let pred = match self.pred() {
                    Ok(p) if self.eat(&Tok::Gt) => p,
                    _ => {
                        self.pos = start;
                        self.rand_in_predicate = rand_seen;
                        let saved = std::mem::replace(&mut self.gt_closes, true);
                        let p = self.pred();
                        self.gt_closes = saved;
                        let p = p?;
                        self.expect(Tok::Gt)?;
                        p
                    }
                };
                let cont = self.prefix()?;
                Ok(Process::Aware { pred, cont: Box::new(cont) })
            }
            Tok::LParen => self.paren_prefix(),
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                let name = Sym::new(&s);
                let args = if self.eat(&Tok::LParen) { self.comma_list(Tok::RParen, |p| p.expr())? } else { vec![] };
                Ok(Process::Call { name, args })
            }
            _ => self.fail("process"),
        }
    }

    fn paren_prefix(&mut self) -> PResult<Process> {
        let start = self.pos;
        // output
        self.bump();
        if let Ok(exprs) = self.comma_list(Tok::RParen, |p| p.expr()) {
            if self.eat(&Tok::At) {
                self.expect(Tok::LParen)?;
                let pred = self.pred()?;
                self.expect(Tok::RParen)?;
                let cont = self.continuation()?;
                return Ok(Process::Out { exprs, pred, cont: Box::new(cont) });
            }
        }
        // input
        self.pos = start;
        self.bump();
        if let Ok(pred_start) = self.input_head() {
            return Ok(pred_start);
        }
        // parenthesized process
        self.pos = start;
        self.bump();
        let p = self.process()?;
        self.expect(Tok::RParen)?;
        Ok(p)
    }

    fn input_head(&mut self) -> PResult<Process> {
        // Variables bind in the predicate, which precedes them textually, so
        // find them first by scanning ahead to the variable list.
        let pred_start = self.pos;
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::LParen => depth += 1,
                Tok::RParen if depth == 0 => break,
                Tok::RParen => depth -= 1,
                Tok::Eof => return self.fail("`)`"),
                _ => {}
            }
            self.bump();
        }
        self.bump();
        if *self.peek() != Tok::LParen {
            return self.fail("`(`");
        }
        self.bump();
        let vars = self.comma_list(Tok::RParen, |p| p.ident())?;
        if *self.peek() != Tok::Dot {
            return self.fail("`.`");
        }
        let after_vars = self.pos;
        let mut seen = BTreeSet::new();
        for v in &vars {
            if !seen.insert(v.clone()) {
                self.duplicate_binder.get_or_insert(v.clone());
            }
        }
        let base = self.scopes.len();
        self.scopes.extend(vars.iter().cloned());
        self.pos = pred_start;
        let pred = self.pred();
        let pred = match pred {
            Ok(p) if *self.peek() == Tok::RParen => p,
            _ => {
                self.scopes.truncate(base);
                return self.fail("`)`");
            }
        };
        self.pos = after_vars;
        let cont = self.continuation();
        self.scopes.truncate(base);
        Ok(Process::In { pred, vars, cont: Box::new(cont?) })
    }

    // ---- systems ----

    fn system(&mut self) -> PResult<System> {
        let mut lhs = self.sys_atom()?;
        while self.eat(&Tok::BarBar) {
            let rhs = self.sys_atom()?;
            lhs = System::par(lhs, rhs);
        }
        Ok(lhs)
    }

    fn sys_atom(&mut self) -> PResult<System> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(System::bang(self.sys_atom()?))
            }
            Tok::Ident(s) if s == "nu" => {
                self.bump();
                let name = self.name_binder()?;
                let body = self.sys_atom()?;
                Ok(System::Nu { name, body: Box::new(body) })
            }
            Tok::LParen => {
                self.bump();
                let s = self.system()?;
                self.expect(Tok::RParen)?;
                Ok(s)
            }
            Tok::LBrace => {
                self.bump();
                let pairs = self.comma_list(Tok::RBrace, |p| {
                    let a = p.ident()?;
                    p.expect(Tok::Assign)?;
                    let v = p.value()?;
                    Ok((a, v))
                })?;
                self.expect(Tok::Colon)?;
                let proc = self.process()?;
                Ok(System::Comp { env: pairs.into_iter().collect(), proc })
            }
            _ => self.fail("component, `!`, `nu` or `(`"),
        }
    }

    // ---- programs ----

    fn program(&mut self) -> PResult<ProgramParts> {
        let mut attrs = BTreeSet::new();
        if self.is_kw("attrs") && *self.peek_at(1) == Tok::Colon {
            self.bump();
            self.bump();
            loop {
                attrs.insert(self.ident()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        let mut defs = Vec::new();
        while self.eat_kw("def") {
            let name = self.ident()?;
            let params = if self.eat(&Tok::LParen) { self.comma_list(Tok::RParen, |p| p.ident())? } else { vec![] };
            self.expect(Tok::Eq)?;
            let base = self.scopes.len();
            self.scopes.extend(params.iter().cloned());
            let body = self.process();
            self.scopes.truncate(base);
            defs.push((name, Definition { params, body: body? }));
        }
        if self.is_kw("system") && *self.peek_at(1) == Tok::Colon {
            self.bump();
            self.bump();
        }
        let main = self.system()?;
        Ok((attrs, defs, main))
    }

    fn finish<T>(&mut self, r: PResult<T>) -> Result<T, Error> {
        let r = match r {
            Ok(v) if *self.peek() == Tok::Eof => Ok(v),
            Ok(_) => self.fail("end of input"),
            Err(f) => Err(f),
        };
        match r {
            Ok(v) => {
                if self.rand_in_predicate {
                    return Err(ResolveError::RandInPredicate.into());
                }
                if let Some(v) = self.duplicate_binder.take() {
                    return Err(ResolveError::DuplicateBinder(v).into());
                }
                Ok(v)
            }
            Err(Fail) => Err(Error::Parse(self.furthest.clone().unwrap_or(ParseError {
                offset: 0,
                line: 1,
                column: 1,
                expected: vec![],
                found: "input".into(),
            }))),
        }
    }
}

fn parser_for(text: &str) -> Result<Parser, Error> {
    Ok(Parser::new(tokenize(text)?))
}

/// Parses and resolves a complete `.abc` program.
pub fn parse_program(text: &str) -> Result<Program, Error> {
    let mut p = parser_for(text)?;
    let r = p.program();
    let (declared_attrs, defs, main) = p.finish(r)?;
    let mut definitions = Definitions::new();
    for (name, def) in defs {
        if definitions.insert(name.clone(), def).is_some() {
            return Err(ResolveError::DuplicateDefinition(name).into());
        }
    }
    let program = Program { declared_attrs, definitions, main };
    super::resolve::resolve(&program)?;
    Ok(program)
}

/// Parses a system with no definitions in scope.
pub fn parse_system(text: &str) -> Result<System, Error> {
    Ok(parse_program(text)?.main)
}

/// Parses a single process. Identifiers are not checked against any
/// attribute declaration.
pub fn parse_process(text: &str) -> Result<Process, Error> {
    let mut p = parser_for(text)?;
    let r = p.process();
    p.finish(r)
}

pub fn parse_predicate(text: &str) -> Result<Predicate, Error> {
    let mut p = parser_for(text)?;
    let r = p.pred();
    p.finish(r)
}

pub fn parse_value(text: &str) -> Result<Value, Error> {
    let mut p = parser_for(text)?;
    let r = p.value();
    p.finish(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_component() {
        let s = parse_system("{id:=1} : 0").unwrap();
        assert_eq!(s, System::comp(env_of(&[("id", Value::Int(1))]), Process::Nil));
    }

    #[test]
    fn restriction_binds_the_parallel_block() {
        let s = parse_system("nu x ( {a:=1}:0 || {a:=2}:0 )").unwrap();
        match s {
            System::Nu { name, body } => {
                assert_eq!(name.as_str(), "x");
                assert!(matches!(*body, System::Par(..)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_process_reports_offset() {
        let err = parse_process("(x").unwrap_err();
        match err {
            Error::Parse(e) => {
                assert_eq!(e.offset, 2);
                assert!(e.expected.iter().any(|x| x == "`)`"), "{:?}", e.expected);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn input_variables_bind_in_their_predicate() {
        let p = parse_process("(x > 2)(x, y).0").unwrap();
        let Process::In { pred, vars, .. } = p else { panic!() };
        assert_eq!(vars.len(), 2);
        assert_eq!(pred, Predicate::cmp(CmpOp::Gt, Expression::var("x"), Expression::int(2)));
    }

    #[test]
    fn negated_group_closes_awareness() {
        let p = parse_process("<!(c > 2)>0").unwrap();
        let inner = Predicate::cmp(CmpOp::Gt, Expression::attr("c"), Expression::int(2));
        assert_eq!(p, Process::aware(Predicate::not(inner), Process::Nil));
    }

    #[test]
    fn output_with_empty_payload() {
        let p = parse_process("()@(ff).0").unwrap();
        assert_eq!(p, Process::out(vec![], Predicate::False, Process::Nil));
    }

    #[test]
    fn awareness_with_ordering_predicate() {
        let p = parse_process("<this.c > 1>0").unwrap();
        assert_eq!(
            p,
            Process::aware(Predicate::cmp(CmpOp::Gt, Expression::this("c"), Expression::int(1)), Process::Nil)
        );
    }

    #[test]
    fn tuple_literal_inside_awareness() {
        let p = parse_process("<this.pos = <3, 4>>0").unwrap();
        let Process::Aware { pred, .. } = p else { panic!() };
        assert_eq!(
            pred,
            Predicate::eq(Expression::this("pos"), Expression::Lit(Value::Tuple(vec![Value::Int(3), Value::Int(4)])))
        );
    }

    #[test]
    fn unknown_attribute_is_rejected() {
        let err = parse_program("{a:=1}:('x')@(b = 1).0").unwrap_err();
        assert!(matches!(err, Error::Resolve(ResolveError::UnresolvedIdentifier(_))));
    }

    #[test]
    fn header_declares_attributes() {
        parse_program("attrs: b\n{a:=1}:('x')@(b = 1).0").unwrap();
    }

    #[test]
    fn arity_mismatch_is_rejected() {
        let err = parse_program("def K(x) = 0\n{}:K").unwrap_err();
        assert!(matches!(err, Error::Resolve(ResolveError::ArityMismatch { .. })));
    }

    #[test]
    fn unknown_definition_is_rejected() {
        let err = parse_program("{}:K").unwrap_err();
        assert!(matches!(err, Error::Resolve(ResolveError::UnknownDefinition(_))));
    }

    #[test]
    fn duplicate_definition_is_rejected() {
        let err = parse_program("def K = 0\ndef K = 0\n{}:K").unwrap_err();
        assert!(matches!(err, Error::Resolve(ResolveError::DuplicateDefinition(_))));
    }

    #[test]
    fn duplicate_input_binder_is_rejected() {
        let err = parse_process("(tt)(x, x).0").unwrap_err();
        assert!(matches!(err, Error::Resolve(ResolveError::DuplicateBinder(_))));
    }

    #[test]
    fn rand_is_rejected_in_predicates() {
        let err = parse_process("(tt)(x).(x)@(x = rand(3)).0").unwrap_err();
        assert_eq!(err, Error::Resolve(ResolveError::RandInPredicate));
    }

    #[test]
    fn parenthesized_arithmetic_starts_a_comparison() {
        let p = parse_predicate("(a + 1) * 2 = 6").unwrap();
        assert!(matches!(p, Predicate::Cmp(CmpOp::Eq, Expression::Arith(ArithOp::Mul, ..), _)));
    }

    #[test]
    fn comments_are_skipped() {
        let s = parse_system("# a comment\n{a:=1}:0 # trailing\n").unwrap();
        assert!(matches!(s, System::Comp { .. }));
    }
}
