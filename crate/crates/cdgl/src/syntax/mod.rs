//! Concrete syntax, ASTs, desugaring and printing.

pub mod ast;
pub mod desugar;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod source;

pub use ast::*;
pub use desugar::{desugar, desugar_game, is_core, is_core_game, resugar, resugar_game};
pub use parser::{parse_decimal, parse_rational, Defs};
pub use pretty::fmt_rational;
pub use source::{DeclKind, Source};

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("syntax error at line {line}, column {col}: {msg}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl SyntaxError {
    pub fn new(line: usize, col: usize, msg: impl Into<String>) -> Self {
        SyntaxError { line, col, msg: msg.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Category {
    Term,
    Game,
    Formula,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Term(Term),
    Game(Game),
    Formula(Formula),
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Expr::Term(t) => t.fmt(f),
            Expr::Game(g) => g.fmt(f),
            Expr::Formula(p) => p.fmt(f),
        }
    }
}

/// Parses `text` as the requested category with no named declarations in scope.
pub fn parse(text: &str, cat: Category) -> Result<Expr, SyntaxError> {
    parse_with(text, cat, None)
}

pub fn parse_with(text: &str, cat: Category, defs: Option<&Defs>) -> Result<Expr, SyntaxError> {
    let mut p = parser::Parser::new(text, defs)?;
    let e = match cat {
        Category::Term => Expr::Term(p.term()?),
        Category::Game => Expr::Game(p.game()?),
        Category::Formula => Expr::Formula(p.formula()?),
    };
    p.expect_eof()?;
    Ok(e)
}

pub fn parse_term(text: &str) -> Result<Term, SyntaxError> {
    match parse(text, Category::Term)? {
        Expr::Term(t) => Ok(t),
        _ => unreachable!(),
    }
}

pub fn parse_game(text: &str) -> Result<Game, SyntaxError> {
    match parse(text, Category::Game)? {
        Expr::Game(g) => Ok(g),
        _ => unreachable!(),
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    match parse(text, Category::Formula)? {
        Expr::Formula(f) => Ok(f),
        _ => unreachable!(),
    }
}
