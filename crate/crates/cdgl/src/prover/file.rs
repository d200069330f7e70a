//! `.cdglp` proof files.
//!
//! ```text
//! (theorem name (rule payload... (child ...) ...))
//! (theorem name "inline goal" (rule ...))
//! ```
//!
//! Payloads are atoms: names and tags are symbols or strings, indices are
//! numbers, and terms, games and formulas are strings parsed with the
//! declarations of the accompanying `.cdgl` file (a bare symbol naming a
//! declaration also works). Subproofs are lists.

use thiserror::Error;

use super::sexp::{read_all, Pos, Sexp, SexpError};
use super::{Arg, ArgKind, ProofTerm, Rule};
use crate::syntax::{Formula, Source, SyntaxError};

#[derive(Clone, Debug)]
pub struct Theorem {
    pub name: String,
    pub goal: Formula,
    pub proof: ProofTerm,
    pub line: usize,
}

#[derive(Clone, Debug, Default)]
pub struct ProofFile {
    pub theorems: Vec<Theorem>,
}

impl ProofFile {
    pub fn get(&self, name: &str) -> Option<&Theorem> {
        self.theorems.iter().find(|t| t.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ProofFileError {
    #[error(transparent)]
    Sexp(#[from] SexpError),
    #[error("at {pos}: {msg}")]
    Shape { pos: Pos, msg: String },
    #[error("at {pos}: in payload: {err}")]
    Payload { pos: Pos, err: SyntaxError },
}

fn shape(pos: Pos, msg: impl Into<String>) -> ProofFileError {
    ProofFileError::Shape { pos, msg: msg.into() }
}

fn atom_text(e: &Sexp) -> Option<String> {
    match e {
        Sexp::Sym(s, _) | Sexp::Str(s, _) => Some(s.clone()),
        Sexp::Num(n, _) => Some(n.to_string()),
        Sexp::List(..) => None,
    }
}

fn payload(kind: ArgKind, e: &Sexp, src: &Source) -> Result<Arg, ProofFileError> {
    let pos = e.pos();
    let wrap = |err: SyntaxError| ProofFileError::Payload { pos, err };
    let text = atom_text(e).ok_or_else(|| shape(pos, format!("expected a {kind:?} payload, found a list")))?;
    Ok(match kind {
        ArgKind::Name => match e {
            Sexp::Num(..) => return Err(shape(pos, "expected a name")),
            _ => Arg::Name(text),
        },
        ArgKind::Index => match e {
            Sexp::Num(n, _) => Arg::Index(*n as usize),
            _ => return Err(shape(pos, "expected a hypothesis index")),
        },
        ArgKind::Term => Arg::Term(src.parse_term(&text).map_err(wrap)?),
        ArgKind::Formula => Arg::Formula(src.resolve_formula(&text).map_err(wrap)?),
        ArgKind::Game => Arg::Game(src.resolve_game(&text).map_err(wrap)?),
        ArgKind::Tag => Arg::Tag(Some(text)),
    })
}

/// Reads one proof tree.
pub fn parse_proof(e: &Sexp, src: &Source) -> Result<ProofTerm, ProofFileError> {
    let Sexp::List(items, pos) = e else { return Err(shape(e.pos(), "expected a rule application `(rule ...)`")) };
    let Some(Sexp::Sym(name, _)) = items.first() else { return Err(shape(*pos, "expected a rule name")) };
    let rule = Rule::from_name(name).ok_or_else(|| shape(*pos, format!("unknown rule `{name}`")))?;
    let mut rest = items[1..].iter().peekable();
    let mut args = Vec::new();
    for &kind in rule.signature() {
        if kind == ArgKind::Tag {
            match rest.peek() {
                Some(a) if !matches!(a, Sexp::List(..)) => args.push(payload(kind, rest.next().unwrap(), src)?),
                _ => args.push(Arg::Tag(None)),
            }
            continue;
        }
        match rest.next() {
            Some(a) => args.push(payload(kind, a, src)?),
            None => return Err(shape(*pos, format!("`{name}` expects payload {:?}", rule.signature()))),
        }
    }
    let mut children = Vec::new();
    for c in rest {
        if !matches!(c, Sexp::List(..)) {
            return Err(shape(c.pos(), format!("too many payload arguments for `{name}`")));
        }
        children.push(parse_proof(c, src)?);
    }
    Ok(ProofTerm { rule, args, children, line: pos.line })
}

/// Reads every `(theorem ...)` entry.
pub fn parse_proof_file(text: &str, src: &Source) -> Result<ProofFile, ProofFileError> {
    let mut out = ProofFile::default();
    for top in read_all(text)? {
        let pos = top.pos();
        let Sexp::List(items, _) = &top else { return Err(shape(pos, "expected `(theorem ...)`")) };
        match items.first() {
            Some(Sexp::Sym(k, _)) if k == "theorem" => {}
            _ => return Err(shape(pos, "expected `(theorem ...)`")),
        }
        let name = items.get(1).and_then(atom_text).ok_or_else(|| shape(pos, "theorem needs a name"))?;
        let (goal, proof) = match &items[2..] {
            [p] => {
                let g = src.formula(&name).cloned().ok_or_else(|| shape(pos, format!("no formula named `{name}`")))?;
                (g, p)
            }
            [g, p] => {
                let text = atom_text(g).ok_or_else(|| shape(g.pos(), "goal must be a formula string"))?;
                let goal = src.resolve_formula(&text).map_err(|err| ProofFileError::Payload { pos: g.pos(), err })?;
                (goal, p)
            }
            _ => return Err(shape(pos, "expected `(theorem name [goal] proof)`")),
        };
        if out.get(&name).is_some() {
            return Err(shape(pos, format!("theorem `{name}` is defined twice")));
        }
        out.theorems.push(Theorem { name, goal, proof: parse_proof(proof, src)?, line: pos.line });
    }
    Ok(out)
}
