use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Lt,
    Gt,
    Le,
    Ge,
    EqSign,
    Ne,
    Comma,
    Semi,
    Prime,
    Assign,
    Question,
    Caret,
    Amp,
    AmpAmp,
    Bar,
    PlusPlus,
    Arrow,
    DArrow,
    Bang,
    Dot,
    Cross,
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Number(s) => format!("number `{s}`"),
        Tok::Eof => "end of input".to_string(),
        other => format!("`{}`", symbol(other)),
    }
}

fn symbol(t: &Tok) -> &'static str {
    match t {
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::Star => "*",
        Tok::Slash => "/",
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::LBrack => "[",
        Tok::RBrack => "]",
        Tok::LBrace => "{",
        Tok::RBrace => "}",
        Tok::Lt => "<",
        Tok::Gt => ">",
        Tok::Le => "<=",
        Tok::Ge => ">=",
        Tok::EqSign => "=",
        Tok::Ne => "!=",
        Tok::Comma => ",",
        Tok::Semi => ";",
        Tok::Prime => "'",
        Tok::Assign => ":=",
        Tok::Question => "?",
        Tok::Caret => "^",
        Tok::Amp => "&",
        Tok::AmpAmp => "&&",
        Tok::Bar => "|",
        Tok::PlusPlus => "++",
        Tok::Arrow => "->",
        Tok::DArrow => "<->",
        Tok::Bang => "!",
        Tok::Dot => ".",
        Tok::Cross => "×",
        _ => "?",
    }
}

/// Splits source text into tokens. Columns are 1-based and count characters.
pub fn lex(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start_col = col;
        let push = |out: &mut Vec<Token>, tok: Tok| out.push(Token { tok, line, col: start_col });
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                i += 1;
                col += 1;
            }
            push(&mut out, Tok::Ident(s));
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                i += 1;
                col += 1;
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                s.push('.');
                i += 1;
                col += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    i += 1;
                    col += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                return Err(SyntaxError::new(line, col, "floating-point exponents are not allowed; use exact decimals or fractions"));
            }
            push(&mut out, Tok::Number(s));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let next2 = chars.get(i + 2).copied();
        let (tok, len) = match (c, next, next2) {
            ('<', Some('-'), Some('>')) => (Tok::DArrow, 3),
            ('<', Some('='), _) => (Tok::Le, 2),
            ('>', Some('='), _) => (Tok::Ge, 2),
            ('!', Some('='), _) => (Tok::Ne, 2),
            (':', Some('='), _) => (Tok::Assign, 2),
            ('&', Some('&'), _) => (Tok::AmpAmp, 2),
            ('+', Some('+'), _) => (Tok::PlusPlus, 2),
            ('-', Some('>'), _) => (Tok::Arrow, 2),
            ('|', Some('|'), _) => (Tok::Bar, 2),
            ('+', _, _) => (Tok::Plus, 1),
            ('-', _, _) => (Tok::Minus, 1),
            ('*', _, _) | ('∗', _, _) => (Tok::Star, 1),
            ('/', _, _) => (Tok::Slash, 1),
            ('(', _, _) => (Tok::LParen, 1),
            (')', _, _) => (Tok::RParen, 1),
            ('[', _, _) => (Tok::LBrack, 1),
            (']', _, _) => (Tok::RBrack, 1),
            ('{', _, _) => (Tok::LBrace, 1),
            ('}', _, _) => (Tok::RBrace, 1),
            ('<', _, _) | ('⟨', _, _) => (Tok::Lt, 1),
            ('>', _, _) | ('⟩', _, _) => (Tok::Gt, 1),
            ('≤', _, _) => (Tok::Le, 1),
            ('≥', _, _) => (Tok::Ge, 1),
            ('≠', _, _) => (Tok::Ne, 1),
            ('=', _, _) => (Tok::EqSign, 1),
            (',', _, _) => (Tok::Comma, 1),
            (';', _, _) => (Tok::Semi, 1),
            ('\'', _, _) | ('′', _, _) => (Tok::Prime, 1),
            ('?', _, _) => (Tok::Question, 1),
            ('^', _, _) => (Tok::Caret, 1),
            ('&', _, _) | ('∧', _, _) => (Tok::Amp, 1),
            ('|', _, _) | ('∨', _, _) => (Tok::Bar, 1),
            ('∪', _, _) => (Tok::PlusPlus, 1),
            ('∩', _, _) => (Tok::AmpAmp, 1),
            ('→', _, _) => (Tok::Arrow, 1),
            ('↔', _, _) => (Tok::DArrow, 1),
            ('!', _, _) | ('¬', _, _) => (Tok::Bang, 1),
            ('.', _, _) => (Tok::Dot, 1),
            ('×', _, _) => (Tok::Cross, 1),
            ('∀', _, _) => (Tok::Ident("forall".into()), 1),
            ('∃', _, _) => (Tok::Ident("exists".into()), 1),
            _ => return Err(SyntaxError::new(line, col, format!("unexpected character `{c}`"))),
        };
        push(&mut out, tok);
        i += len;
        col += len;
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}
