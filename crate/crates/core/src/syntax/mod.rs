pub mod ast;
pub mod lexer;
pub mod names;
pub mod parser;
pub mod pretty;
pub mod resolve;

pub use ast::*;
pub use names::{alpha_rename, canonical_process, canonical_system, fresh_name, Subst};
pub use parser::{parse_predicate, parse_process, parse_program, parse_system, parse_value};
pub use pretty::pretty;
