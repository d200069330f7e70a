//! Loader for `.cdgl` declaration files.
//!
//! ```text
//! const T = 1
//! const g
//! term brake = v*v/(2*B)      // macro, inlined at use sites
//! game plant = {t'=1, x'=v, v'=a & t<=T}
//! formula post = x = g & v = 0
//! ```
//!
//! A declaration runs until the next line whose first word is a keyword.

use num_rational::BigRational;

use super::ast::*;
use super::parser::{parse_rational, Defs, Parser};
use super::{Category, Expr, SyntaxError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeclKind {
    Const,
    Term,
    Game,
    Formula,
}

impl DeclKind {
    fn from_word(w: &str) -> Option<Self> {
        match w {
            "const" => Some(DeclKind::Const),
            "term" => Some(DeclKind::Term),
            "game" => Some(DeclKind::Game),
            "formula" => Some(DeclKind::Formula),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Source {
    pub defs: Defs,
    pub order: Vec<(DeclKind, String)>,
}

struct Decl {
    kind: DeclKind,
    line: usize,
    text: String,
}

fn split_decls(src: &str) -> Result<Vec<Decl>, SyntaxError> {
    let mut out: Vec<Decl> = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let trimmed = line.trim_start();
        let word: String = trimmed.chars().take_while(|c| c.is_ascii_alphanumeric() || *c == '_').collect();
        if let Some(kind) = DeclKind::from_word(&word) {
            let indent = line.len() - trimmed.len();
            let body = format!("{}{}", " ".repeat(indent + word.len()), &trimmed[word.len()..]);
            out.push(Decl { kind, line: i + 1, text: body });
        } else if let Some(last) = out.last_mut() {
            last.text.push('\n');
            last.text.push_str(line);
        } else {
            let content = match trimmed.find("//") {
                Some(p) => &trimmed[..p],
                None => trimmed,
            };
            if !content.trim().is_empty() {
                return Err(SyntaxError::new(i + 1, line.len() - trimmed.len() + 1, "expected a declaration keyword"));
            }
        }
    }
    Ok(out)
}

fn shift(mut e: SyntaxError, line: usize) -> SyntaxError {
    e.line += line - 1;
    e
}

impl Source {
    pub fn parse(src: &str) -> Result<Source, SyntaxError> {
        let mut s = Source::default();
        for d in split_decls(src)? {
            s.add_decl(&d).map_err(|e| shift(e, d.line))?;
        }
        Ok(s)
    }

    fn add_decl(&mut self, d: &Decl) -> Result<(), SyntaxError> {
        let mut p = Parser::new(&d.text, Some(&self.defs))?;
        let name = p.ident()?;
        if self.is_declared(&name) {
            return Err(SyntaxError::new(1, 1, format!("`{name}` is declared twice")));
        }
        match d.kind {
            DeclKind::Const => {
                let value = if p.eat(&super::lexer::Tok::EqSign) {
                    let t = p.term()?;
                    Some(const_value(&t).ok_or_else(|| SyntaxError::new(1, 1, format!("const `{name}` needs a rational literal")))?)
                } else {
                    None
                };
                p.expect_eof()?;
                self.defs.consts.insert(name.clone(), value);
            }
            kind => {
                p.expect(super::lexer::Tok::EqSign)?;
                let e = match kind {
                    DeclKind::Term => Expr::Term(p.term()?),
                    DeclKind::Game => Expr::Game(p.game()?),
                    _ => Expr::Formula(p.formula()?),
                };
                p.expect_eof()?;
                match e {
                    Expr::Term(t) => self.defs.terms.insert(name.clone(), t).map(|_| ()),
                    Expr::Game(g) => self.defs.games.insert(name.clone(), g).map(|_| ()),
                    Expr::Formula(f) => self.defs.formulas.insert(name.clone(), f).map(|_| ()),
                };
            }
        }
        self.order.push((d.kind, name));
        Ok(())
    }

    fn is_declared(&self, name: &str) -> bool {
        self.defs.consts.contains_key(name)
            || self.defs.terms.contains_key(name)
            || self.defs.games.contains_key(name)
            || self.defs.formulas.contains_key(name)
    }

    pub fn formula(&self, name: &str) -> Option<&Formula> {
        self.defs.formulas.get(name)
    }

    pub fn game(&self, name: &str) -> Option<&Game> {
        self.defs.games.get(name)
    }

    pub fn term(&self, name: &str) -> Option<&Term> {
        self.defs.terms.get(name)
    }

    /// Parses text with this file's declarations in scope.
    pub fn parse_expr(&self, text: &str, cat: Category) -> Result<Expr, SyntaxError> {
        super::parse_with(text, cat, Some(&self.defs))
    }

    pub fn parse_formula(&self, text: &str) -> Result<Formula, SyntaxError> {
        match self.parse_expr(text, Category::Formula)? {
            Expr::Formula(f) => Ok(f),
            _ => unreachable!(),
        }
    }

    pub fn parse_term(&self, text: &str) -> Result<Term, SyntaxError> {
        match self.parse_expr(text, Category::Term)? {
            Expr::Term(t) => Ok(t),
            _ => unreachable!(),
        }
    }

    pub fn parse_game(&self, text: &str) -> Result<Game, SyntaxError> {
        match self.parse_expr(text, Category::Game)? {
            Expr::Game(g) => Ok(g),
            _ => unreachable!(),
        }
    }

    /// Resolves a declared name or inline text to a formula.
    pub fn resolve_formula(&self, name_or_text: &str) -> Result<Formula, SyntaxError> {
        match self.formula(name_or_text.trim()) {
            Some(f) => Ok(f.clone()),
            None => self.parse_formula(name_or_text),
        }
    }

    pub fn resolve_game(&self, name_or_text: &str) -> Result<Game, SyntaxError> {
        match self.game(name_or_text.trim()) {
            Some(g) => Ok(g.clone()),
            None => self.parse_game(name_or_text),
        }
    }

    /// Values of constants declared with a literal.
    pub fn const_values(&self) -> impl Iterator<Item = (&String, &BigRational)> {
        self.defs.consts.iter().filter_map(|(k, v)| v.as_ref().map(|q| (k, q)))
    }
}

fn const_value(t: &Term) -> Option<BigRational> {
    match t {
        Term::RealLit(q) => Some(q.clone()),
        Term::Neg(a) => const_value(a).map(|q| -q),
        Term::Div(a, b) => {
            let (a, b) = (const_value(a)?, const_value(b)?);
            if b == BigRational::from_integer(0.into()) {
                None
            } else {
                Some(a / b)
            }
        }
        _ => parse_rational(&t.to_string()),
    }
}
