//! Text format for programs (`.ogp`) and proof scripts (`.ogpf`).

mod lexer;
mod parser;
mod printer;

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::expr::Expr;
use crate::lang::{validate_wellformed, DiagKind, ProofScript, Program, Span};

pub use printer::{print_proof, print_program};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

impl ParseError {
    pub fn new(span: Span, message: String) -> Self {
        ParseError { span, message }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{source}")]
    Parse { path: PathBuf, source: ParseError },
}

/// Parses a program and resolves every identifier and label it mentions.
pub fn parse(text: &str) -> Result<Program, ParseError> {
    let program = parse_syntax(text)?;
    resolve(&program)?;
    Ok(program)
}

/// Parses without the resolution pass.
pub fn parse_syntax(text: &str) -> Result<Program, ParseError> {
    parser::Parser::new(text)?.program()
}

/// Parses a file of `proof ... end` blocks.
pub fn parse_proofs(text: &str) -> Result<Vec<ProofScript>, ParseError> {
    parser::Parser::new(text)?.proofs_only()
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = parser::Parser::new(text)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

fn resolve(program: &Program) -> Result<(), ParseError> {
    match validate_wellformed(program)
        .into_iter()
        .find(|d| matches!(d.kind, DiagKind::Resolution | DiagKind::Label))
    {
        Some(d) => Err(ParseError::new(d.span, d.message)),
        None => Ok(()),
    }
}

/// Loads a program and, when present, the proof scripts in the sibling
/// `.ogpf` file.
pub fn load(path: &Path) -> Result<Program, LoadError> {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|source| LoadError::Io { path: p.to_path_buf(), source });
    let perr = |p: &Path, source| LoadError::Parse { path: p.to_path_buf(), source };
    let mut program = parse_syntax(&read(path)?).map_err(|e| perr(path, e))?;
    let scripts = path.with_extension("ogpf");
    if scripts != path && scripts.exists() {
        program.proofs.extend(parse_proofs(&read(&scripts)?).map_err(|e| perr(&scripts, e))?);
    }
    resolve(&program).map_err(|e| perr(path, e))?;
    Ok(program)
}
