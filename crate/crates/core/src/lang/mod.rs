//! Front end for the toy C-like input language: a single `int main()` over
//! unbounded integers, with `nondet()` as the only source of input.

pub mod ast;
mod lexer;
mod lower;
mod parser;

use thiserror::Error;

pub use lower::lower;
pub use parser::parse;

use crate::cfa::Cfa;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceProgram {
    pub name: String,
    pub text: String,
}

impl SourceProgram {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        SourceProgram {
            name: name.into(),
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax { line: u32, col: u32, message: String },
    #[error("{line}: use of undeclared variable '{name}'")]
    UndeclaredVariable { name: String, line: u32 },
}

/// Parses and lowers in one step.
pub fn compile(source: &SourceProgram) -> Result<Cfa, ParseError> {
    Ok(lower(&parse(source)?))
}
