//! Shared fixtures for the benchmarks.

use std::path::PathBuf;

use abc_core::{parse_program, Program};

pub fn corpus_program(name: &str) -> Program {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    parse_program(&std::fs::read_to_string(path).expect("corpus file")).expect("corpus parses")
}

/// `n` explorers running the same broadcast-and-forward loop.
pub fn swarm(n: usize) -> Program {
    let mut text =
        String::from("attrs: id, role\ndef R() = (this.id, 'ping')@(role = 'explorer').0 | (tt)(x, y).R()\nsystem:\n");
    for i in 0..n {
        if i > 0 {
            text.push_str(" || ");
        }
        text.push_str(&format!("{{id := {i}, role := 'explorer'}}:R()"));
    }
    parse_program(&text).expect("swarm parses")
}
