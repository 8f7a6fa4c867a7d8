use std::fmt;

use thiserror::Error;

use crate::syntax::Sym;

/// A syntax error with its source position and the set of tokens that
/// would have been accepted there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: unexpected {}", self.line, self.column, self.found)?;
        if !self.expected.is_empty() {
            write!(f, ", expected one of: {}", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ResolveError {
    #[error("unknown process definition `{0}`")]
    UnknownDefinition(Sym),
    #[error("definition `{name}` expects {expected} argument(s), got {found}")]
    ArityMismatch { name: Sym, expected: usize, found: usize },
    #[error("identifier `{0}` is neither a bound variable nor a declared attribute")]
    UnresolvedIdentifier(Sym),
    #[error("duplicate definition `{0}`")]
    DuplicateDefinition(Sym),
    #[error("input binds `{0}` more than once")]
    DuplicateBinder(Sym),
    #[error("definition `{def}` has free variable `{var}` not among its parameters")]
    FreeVariable { def: Sym, var: Sym },
    #[error("`rand` is not allowed inside predicates")]
    RandInPredicate,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("resolve error: {0}")]
    Resolve(#[from] ResolveError),
    #[error("predicate universe too large: {needed} environments exceed budget {budget}")]
    UniverseTooLarge { needed: u128, budget: u128 },
    #[error("transition budget exceeded: more than {0} combinations")]
    BudgetExceeded(usize),
    #[error("call to undefined process `{0}`")]
    UnknownDefinition(Sym),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
