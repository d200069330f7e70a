//! Recursive-descent parser for the concrete syntax.
//!
//! Precedence, loosest first. Formulas: `<->`, `->` (right), `|`, `&`, then
//! prefix `!`, modalities and quantifiers. Games: `++`/`&&` (right), `;`
//! (right), then postfix `*`, `^d`, `^X`. Terms: `+ -`, `* /`, prefix `-`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One};

use super::ast::*;
use super::lexer::{describe, lex, Tok, Token};
use super::SyntaxError;

/// Named declarations visible while parsing.
#[derive(Clone, Debug, Default)]
pub struct Defs {
    /// Constants with a value are inlined as literals.
    pub consts: BTreeMap<String, Option<BigRational>>,
    pub terms: BTreeMap<String, Term>,
    pub games: BTreeMap<String, Game>,
    pub formulas: BTreeMap<String, Formula>,
}

const KEYWORDS: &[&str] = &["tt", "ff", "min", "max", "sqrt", "forall", "exists"];

pub struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    defs: Option<&'a Defs>,
}

type PResult<T> = Result<T, SyntaxError>;

impl<'a> Parser<'a> {
    pub fn new(src: &str, defs: Option<&'a Defs>) -> PResult<Self> {
        Ok(Parser { toks: lex(src)?, pos: 0, defs })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, msg: impl Into<String>) -> SyntaxError {
        let t = &self.toks[self.pos];
        SyntaxError::new(t.line, t.col, msg)
    }

    pub fn expect(&mut self, t: Tok) -> PResult<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.err_here(format!("expected {}, found {}", describe(&t), describe(self.peek()))))
        }
    }

    pub fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub fn expect_eof(&self) -> PResult<()> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.err_here(format!("unexpected {}", describe(self.peek()))))
        }
    }

    pub fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.err_here(format!("expected identifier, found {}", describe(&other)))),
        }
    }

    // ---------- formulas ----------

    pub fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.imply()?;
        if self.eat(&Tok::DArrow) {
            let rhs = self.formula()?;
            return Ok(Formula::Equiv(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn imply(&mut self) -> PResult<Formula> {
        let lhs = self.disj()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.imply()?;
            return Ok(Formula::Imply(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disj(&mut self) -> PResult<Formula> {
        let mut lhs = self.conj()?;
        while self.eat(&Tok::Bar) {
            let rhs = self.conj()?;
            lhs = Formula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> PResult<Formula> {
        let mut lhs = self.unary_formula()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.unary_formula()?;
            lhs = Formula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary_formula(&mut self) -> PResult<Formula> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::Not(Box::new(self.unary_formula()?)))
            }
            Tok::LBrack => {
                self.bump();
                let g = self.game()?;
                self.expect(Tok::RBrack)?;
                Ok(Formula::Box(Box::new(g), Box::new(self.unary_formula()?)))
            }
            Tok::Lt => {
                self.bump();
                let g = self.game()?;
                self.expect(Tok::Gt)?;
                Ok(Formula::Diamond(Box::new(g), Box::new(self.unary_formula()?)))
            }
            Tok::Ident(k) if k == "forall" || k == "exists" => {
                self.bump();
                let x = self.ident()?;
                self.expect(Tok::Dot)?;
                let body = Box::new(self.unary_formula()?);
                Ok(if k == "forall" { Formula::Forall(x, body) } else { Formula::Exists(x, body) })
            }
            _ => self.atom_formula(),
        }
    }

    fn atom_formula(&mut self) -> PResult<Formula> {
        match self.peek().clone() {
            Tok::Ident(k) if k == "tt" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(k) if k == "ff" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(name) if self.is_formula_ref(&name) => {
                self.bump();
                Ok(self.defs.unwrap().formulas[&name].clone())
            }
            Tok::LParen => {
                // Either a parenthesized formula or a comparison whose left
                // operand starts with `(`; try the comparison first.
                let save = self.pos;
                match self.comparison() {
                    Ok(f) => Ok(f),
                    Err(e1) => {
                        let far1 = self.pos;
                        self.pos = save;
                        self.bump();
                        match self.formula().and_then(|f| self.expect(Tok::RParen).map(|_| f)) {
                            Ok(f) => Ok(f),
                            Err(e2) => {
                                let far2 = self.pos;
                                Err(if far1 >= far2 { e1 } else { e2 })
                            }
                        }
                    }
                }
            }
            _ => self.comparison(),
        }
    }

    fn is_formula_ref(&self, name: &str) -> bool {
        let Some(d) = self.defs else { return false };
        if !d.formulas.contains_key(name) {
            return false;
        }
        !matches!(
            self.peek_at(1),
            Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash | Tok::Lt | Tok::Gt | Tok::Le | Tok::Ge | Tok::EqSign | Tok::Ne | Tok::Prime
        )
    }

    fn comparison(&mut self) -> PResult<Formula> {
        let lhs = self.term()?;
        let rel = match self.peek() {
            Tok::Le => Rel::Le,
            Tok::Lt => Rel::Lt,
            Tok::EqSign => Rel::Eq,
            Tok::Ne => Rel::Ne,
            Tok::Gt => Rel::Gt,
            Tok::Ge => Rel::Ge,
            other => return Err(self.err_here(format!("expected comparison operator, found {}", describe(other)))),
        };
        self.bump();
        let rhs = self.term()?;
        Ok(Formula::Cmp(lhs, rel, rhs))
    }

    // ---------- games ----------

    pub fn game(&mut self) -> PResult<Game> {
        let lhs = self.seq_game()?;
        match self.peek() {
            Tok::PlusPlus => {
                self.bump();
                let rhs = self.game()?;
                Ok(Game::Choice(Box::new(lhs), Box::new(rhs)))
            }
            Tok::AmpAmp => {
                self.bump();
                let rhs = self.game()?;
                Ok(Game::DChoice(Box::new(lhs), Box::new(rhs)))
            }
            _ => Ok(lhs),
        }
    }

    fn seq_game(&mut self) -> PResult<Game> {
        let lhs = self.postfix_game()?;
        if self.eat(&Tok::Semi) {
            let rhs = self.seq_game()?;
            return Ok(Game::Seq(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn postfix_game(&mut self) -> PResult<Game> {
        let mut g = self.atom_game()?;
        loop {
            match self.peek().clone() {
                Tok::Star => {
                    self.bump();
                    g = Game::Repeat(Box::new(g));
                }
                Tok::Caret => match self.peek_at(1).clone() {
                    Tok::Ident(d) if d == "d" => {
                        self.bump();
                        self.bump();
                        g = Game::Dual(Box::new(g));
                    }
                    Tok::Ident(x) if x == "X" => {
                        self.bump();
                        self.bump();
                        g = Game::DRepeat(Box::new(g));
                    }
                    Tok::Cross => {
                        self.bump();
                        self.bump();
                        g = Game::DRepeat(Box::new(g));
                    }
                    _ => {
                        self.bump();
                        return Err(self.err_here("expected `d` or `X` after `^`"));
                    }
                },
                _ => return Ok(g),
            }
        }
    }

    fn atom_game(&mut self) -> PResult<Game> {
        match self.peek().clone() {
            Tok::LBrace => {
                self.bump();
                let is_ode = matches!(self.peek(), Tok::Ident(_))
                    && *self.peek_at(1) == Tok::Prime
                    && *self.peek_at(2) == Tok::EqSign;
                let g = if is_ode { self.ode()? } else { self.game()? };
                self.expect(Tok::RBrace)?;
                Ok(g)
            }
            Tok::Question => {
                self.bump();
                Ok(Game::Test(Box::new(self.formula()?)))
            }
            Tok::Ident(name) => {
                let target_follows = matches!(self.peek_at(1), Tok::Assign)
                    || (*self.peek_at(1) == Tok::Prime && *self.peek_at(2) == Tok::Assign);
                if !target_follows {
                    if let Some(g) = self.defs.and_then(|d| d.games.get(&name)) {
                        let g = g.clone();
                        self.bump();
                        return Ok(g);
                    }
                    return Err(self.err_here(format!("unknown game `{name}` (expected assignment or declared game)")));
                }
                let mut x = self.ident()?;
                if self.eat(&Tok::Prime) {
                    x = primed(&x);
                }
                self.expect(Tok::Assign)?;
                if self.eat(&Tok::Star) {
                    return Ok(Game::AssignAny(x));
                }
                Ok(Game::Assign(x, self.term()?))
            }
            other => Err(self.err_here(format!("expected game, found {}", describe(&other)))),
        }
    }

    fn ode(&mut self) -> PResult<Game> {
        let mut eqs = Vec::new();
        loop {
            let x = self.ident()?;
            self.expect(Tok::Prime)?;
            self.expect(Tok::EqSign)?;
            let rhs = self.term()?;
            if eqs.iter().any(|(y, _): &(String, Term)| *y == x) {
                return Err(self.err_here(format!("duplicate ODE variable `{x}`")));
            }
            eqs.push((x, rhs));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        let dom = if self.eat(&Tok::Amp) { self.formula()? } else { Formula::True };
        Ok(Game::Ode(eqs, Box::new(dom)))
    }

    // ---------- terms ----------

    pub fn term(&mut self) -> PResult<Term> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.product()?;
                    lhs = plus(lhs, rhs);
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.product()?;
                    lhs = minus(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> PResult<Term> {
        let mut lhs = self.unary_term()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let rhs = self.unary_term()?;
                    lhs = times(lhs, rhs);
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.unary_term()?;
                    lhs = div(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary_term(&mut self) -> PResult<Term> {
        if *self.peek() == Tok::Minus {
            self.bump();
            if let Tok::Number(_) = self.peek() {
                let q = self.number_literal()?;
                return Ok(Term::RealLit(-q));
            }
            return Ok(neg(self.unary_term()?));
        }
        self.atom_term()
    }

    /// A number, folding an immediately following `/ number` into one literal.
    fn number_literal(&mut self) -> PResult<BigRational> {
        let Tok::Number(s) = self.bump() else { unreachable!() };
        let mut q = parse_decimal(&s);
        if *self.peek() == Tok::Slash {
            if let Tok::Number(d) = self.peek_at(1).clone() {
                let dq = parse_decimal(&d);
                if dq == BigRational::from_integer(0.into()) {
                    return Err(self.err_here("literal division by zero"));
                }
                self.bump();
                self.bump();
                q /= dq;
            }
        }
        Ok(q)
    }

    fn atom_term(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Number(_) => Ok(Term::RealLit(self.number_literal()?)),
            Tok::Ident(f) if f == "min" || f == "max" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let a = self.term()?;
                self.expect(Tok::Comma)?;
                let b = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(if f == "min" { Term::Min(Box::new(a), Box::new(b)) } else { Term::Max(Box::new(a), Box::new(b)) })
            }
            Tok::Ident(f) if f == "sqrt" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let a = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(Term::Sqrt(Box::new(a)))
            }
            Tok::Ident(_) => {
                let x = self.ident()?;
                if self.eat(&Tok::Prime) {
                    return Ok(Term::PrimedVar(x));
                }
                if let Some(d) = self.defs {
                    if let Some(t) = d.terms.get(&x) {
                        return Ok(t.clone());
                    }
                    if let Some(Some(q)) = d.consts.get(&x) {
                        return Ok(Term::RealLit(q.clone()));
                    }
                    if d.games.contains_key(&x) || d.formulas.contains_key(&x) {
                        return Err(self.err_here(format!("`{x}` names a game or formula, not a term")));
                    }
                }
                Ok(Term::Var(x))
            }
            Tok::LParen => {
                self.bump();
                let first = self.term()?;
                let t = if self.eat(&Tok::Comma) {
                    let mut items = vec![first];
                    loop {
                        items.push(self.term()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RParen)?;
                    Term::Tuple(items)
                } else {
                    self.expect(Tok::RParen)?;
                    first
                };
                if self.eat(&Tok::Prime) {
                    return Ok(Term::Differential(Box::new(t)));
                }
                Ok(t)
            }
            other => Err(self.err_here(format!("expected term, found {}", describe(&other)))),
        }
    }
}

/// Parses an exact decimal such as `12` or `0.125`.
pub fn parse_decimal(s: &str) -> BigRational {
    match s.split_once('.') {
        None => BigRational::from_integer(BigInt::from_str_radix(s, 10).expect("lexer digits")),
        Some((i, f)) => {
            let digits = format!("{i}{f}");
            let n = BigInt::from_str_radix(&digits, 10).expect("lexer digits");
            let d = num_traits::pow(BigInt::from(10), f.len());
            BigRational::new(n, d)
        }
    }
}

/// Parses a rational written as `p`, `p/q`, `-p/q` or an exact decimal.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s),
    };
    let valid = |p: &str| !p.is_empty() && p.chars().all(|c| c.is_ascii_digit() || c == '.') && p.matches('.').count() <= 1;
    let q = match body.split_once('/') {
        Some((n, d)) if valid(n) && valid(d) => {
            let dq = parse_decimal(d);
            if dq == BigRational::from_integer(0.into()) {
                return None;
            }
            parse_decimal(n) / dq
        }
        None if valid(body) => parse_decimal(body),
        _ => return None,
    };
    Some(if sign < 0 { -q } else { q })
}

pub fn one() -> BigRational {
    BigRational::one()
}
