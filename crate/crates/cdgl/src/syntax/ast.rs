//! Abstract syntax for terms, games and formulas.
//!
//! Variables are plain strings. A primed variable is written with a trailing
//! `'` wherever a variable *key* is expected (assignment targets, state keys,
//! variable sets), while terms keep a dedicated [`Term::PrimedVar`] node.

use num_rational::BigRational;
use num_traits::{One, Zero};

/// Comparison relations of the formula language.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Le,
    Lt,
    Eq,
    Ne,
    Gt,
    Ge,
}

impl Rel {
    pub const ALL: [Rel; 6] = [Rel::Le, Rel::Lt, Rel::Eq, Rel::Ne, Rel::Gt, Rel::Ge];

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Eq => "=",
            Rel::Ne => "!=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
        }
    }

    /// The relation obtained by swapping the operands.
    pub fn flip(self) -> Rel {
        match self {
            Rel::Le => Rel::Ge,
            Rel::Lt => Rel::Gt,
            Rel::Ge => Rel::Le,
            Rel::Gt => Rel::Lt,
            r => r,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    RealLit(BigRational),
    Var(String),
    PrimedVar(String),
    Plus(Box<Term>, Box<Term>),
    Times(Box<Term>, Box<Term>),
    /// Divisors are assumed nonzero; evaluation reports a hard error otherwise.
    Div(Box<Term>, Box<Term>),
    Min(Box<Term>, Box<Term>),
    Max(Box<Term>, Box<Term>),
    Neg(Box<Term>),
    Differential(Box<Term>),
    Tuple(Vec<Term>),
    Sqrt(Box<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Game {
    Test(Box<Formula>),
    /// Target is a variable key, possibly primed (`x'`).
    Assign(String, Term),
    AssignAny(String),
    Ode(Vec<(String, Term)>, Box<Formula>),
    Choice(Box<Game>, Box<Game>),
    Seq(Box<Game>, Box<Game>),
    Repeat(Box<Game>),
    Dual(Box<Game>),
    /// Demonic choice, sugar for `{α^d ∪ β^d}^d`.
    DChoice(Box<Game>, Box<Game>),
    /// Demonic repetition, sugar for `{{α^d}*}^d`.
    DRepeat(Box<Game>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Diamond(Box<Game>, Box<Formula>),
    Box(Box<Game>, Box<Formula>),
    Cmp(Term, Rel, Term),
    True,
    False,
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imply(Box<Formula>, Box<Formula>),
    Equiv(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

/// Variable key helpers.
pub fn primed(name: &str) -> String {
    format!("{name}'")
}

pub fn is_primed(key: &str) -> bool {
    key.ends_with('\'')
}

pub fn base_name(key: &str) -> &str {
    key.strip_suffix('\'').unwrap_or(key)
}

// Term constructors, kept terse because the prover builds many formulas.

pub fn lit_int(n: i64) -> Term {
    Term::RealLit(BigRational::from_integer(n.into()))
}

pub fn lit(q: BigRational) -> Term {
    Term::RealLit(q)
}

pub fn var(x: &str) -> Term {
    if let Some(b) = x.strip_suffix('\'') {
        Term::PrimedVar(b.to_string())
    } else {
        Term::Var(x.to_string())
    }
}

pub fn plus(a: Term, b: Term) -> Term {
    Term::Plus(Box::new(a), Box::new(b))
}

pub fn minus(a: Term, b: Term) -> Term {
    Term::Plus(Box::new(a), Box::new(Term::Neg(Box::new(b))))
}

pub fn times(a: Term, b: Term) -> Term {
    Term::Times(Box::new(a), Box::new(b))
}

pub fn div(a: Term, b: Term) -> Term {
    Term::Div(Box::new(a), Box::new(b))
}

pub fn neg(a: Term) -> Term {
    Term::Neg(Box::new(a))
}

pub fn cmp(a: Term, r: Rel, b: Term) -> Formula {
    Formula::Cmp(a, r, b)
}

/// Core encoding of truth, `1>0`.
pub fn tt() -> Formula {
    cmp(lit_int(1), Rel::Gt, lit_int(0))
}

/// Core encoding of falsity, `0>1`.
pub fn ff() -> Formula {
    cmp(lit_int(0), Rel::Gt, lit_int(1))
}

pub fn diamond(g: Game, f: Formula) -> Formula {
    Formula::Diamond(Box::new(g), Box::new(f))
}

pub fn boxf(g: Game, f: Formula) -> Formula {
    Formula::Box(Box::new(g), Box::new(f))
}

pub fn test(f: Formula) -> Game {
    Game::Test(Box::new(f))
}

pub fn seq(a: Game, b: Game) -> Game {
    Game::Seq(Box::new(a), Box::new(b))
}

pub fn choice(a: Game, b: Game) -> Game {
    Game::Choice(Box::new(a), Box::new(b))
}

pub fn dual(a: Game) -> Game {
    Game::Dual(Box::new(a))
}

pub fn assign(x: &str, t: Term) -> Game {
    Game::Assign(x.to_string(), t)
}

pub fn assign_any(x: &str) -> Game {
    Game::AssignAny(x.to_string())
}

/// Core conjunction `⟨?a⟩b`.
pub fn and(a: Formula, b: Formula) -> Formula {
    diamond(test(a), b)
}

/// Core disjunction `⟨?a ∪ ?b⟩tt`.
pub fn or(a: Formula, b: Formula) -> Formula {
    diamond(choice(test(a), test(b)), tt())
}

/// Core implication `[?a]b`.
pub fn imply(a: Formula, b: Formula) -> Formula {
    boxf(test(a), b)
}

/// Core universal `[x:=*]f`.
pub fn forall(x: &str, f: Formula) -> Formula {
    boxf(assign_any(x), f)
}

/// Core existential `⟨x:=*⟩f`.
pub fn exists(x: &str, f: Formula) -> Formula {
    diamond(assign_any(x), f)
}

/// Folds a list into a right-nested core conjunction; empty lists give `tt`.
pub fn and_all(mut fs: Vec<Formula>) -> Formula {
    match fs.len() {
        0 => tt(),
        1 => fs.pop().unwrap(),
        _ => {
            let first = fs.remove(0);
            and(first, and_all(fs))
        }
    }
}

impl Term {
    pub fn is_zero_lit(&self) -> bool {
        matches!(self, Term::RealLit(q) if q.is_zero())
    }

    pub fn is_one_lit(&self) -> bool {
        matches!(self, Term::RealLit(q) if q.is_one())
    }

    /// Number of nodes, used to bound fuzzing and diagnostics.
    pub fn size(&self) -> usize {
        match self {
            Term::RealLit(_) | Term::Var(_) | Term::PrimedVar(_) => 1,
            Term::Plus(a, b) | Term::Times(a, b) | Term::Div(a, b) | Term::Min(a, b) | Term::Max(a, b) => {
                1 + a.size() + b.size()
            }
            Term::Neg(a) | Term::Differential(a) | Term::Sqrt(a) => 1 + a.size(),
            Term::Tuple(ts) => 1 + ts.iter().map(Term::size).sum::<usize>(),
        }
    }
}

impl Formula {
    /// Recognizes the core encoding of a conjunction.
    pub fn as_and(&self) -> Option<(&Formula, &Formula)> {
        match self {
            Formula::Diamond(g, b) => match &**g {
                Game::Test(a) => Some((a, b)),
                _ => None,
            },
            _ => None,
        }
    }

    /// Recognizes the core encoding of a disjunction.
    pub fn as_or(&self) -> Option<(&Formula, &Formula)> {
        match self {
            Formula::Diamond(g, post) if **post == tt() => match &**g {
                Game::Choice(l, r) => match (&**l, &**r) {
                    (Game::Test(a), Game::Test(b)) => Some((a, b)),
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        }
    }

    /// Recognizes the core encoding of an implication.
    pub fn as_imply(&self) -> Option<(&Formula, &Formula)> {
        match self {
            Formula::Box(g, b) => match &**g {
                Game::Test(a) => Some((a, b)),
                _ => None,
            },
            _ => None,
        }
    }
}
