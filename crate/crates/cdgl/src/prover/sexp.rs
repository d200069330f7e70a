//! Minimal S-expression reader for proof files. `;` starts a comment.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Sym(String, Pos),
    Str(String, Pos),
    Num(u64, Pos),
    List(Vec<Sexp>, Pos),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Sym(_, p) | Sexp::Str(_, p) | Sexp::Num(_, p) | Sexp::List(_, p) => *p,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("proof syntax error at {pos}: {msg}")]
pub struct SexpError {
    pub pos: Pos,
    pub msg: String,
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Reader<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn err(&self, msg: impl Into<String>) -> SexpError {
        SexpError { pos: self.pos, msg: msg.into() }
    }

    fn read(&mut self) -> Result<Option<Sexp>, SexpError> {
        self.skip_ws();
        let start = self.pos;
        let Some(&c) = self.chars.peek() else { return Ok(None) };
        match c {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.chars.peek() {
                        None => return Err(SexpError { pos: start, msg: "unclosed `(`".into() }),
                        Some(')') => {
                            self.bump();
                            return Ok(Some(Sexp::List(items, start)));
                        }
                        _ => items.push(self.read()?.expect("nonempty input")),
                    }
                }
            }
            ')' => Err(self.err("unexpected `)`")),
            '"' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(SexpError { pos: start, msg: "unterminated string".into() }),
                        Some('"') => return Ok(Some(Sexp::Str(s, start))),
                        Some('\\') => match self.bump() {
                            Some(c) => s.push(c),
                            None => return Err(self.err("dangling escape")),
                        },
                        Some(c) => s.push(c),
                    }
                }
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == '"' || c == ';' {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                Ok(Some(match s.parse::<u64>() {
                    Ok(n) => Sexp::Num(n, start),
                    Err(_) => Sexp::Sym(s, start),
                }))
            }
        }
    }
}

/// Reads every top-level expression.
pub fn read_all(src: &str) -> Result<Vec<Sexp>, SexpError> {
    let mut r = Reader { chars: src.chars().peekable(), pos: Pos { line: 1, col: 1 } };
    let mut out = Vec::new();
    while let Some(e) = r.read()? {
        out.push(e);
    }
    Ok(out)
}
