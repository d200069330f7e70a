//! Natural-deduction proof checker.
//!
//! A proof is a tree of rule applications read from a `.cdglp` file. The
//! checker works backwards from the goal: each rule computes its premise
//! sequents from the conclusion and its payload, and the children must prove
//! exactly those premises. First-order leaves go to [`discharge_arith`].

mod arith;
mod file;
mod metric;
mod rules;
pub mod sexp;

pub use arith::{discharge_arith, eval3, is_first_order, ArithVerdict, Tri};
pub use file::{parse_proof, parse_proof_file, ProofFile, ProofFileError, Theorem};
pub use metric::Metric;
pub use rules::{apply_rule, Aux, SolveAux};

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::syntax::{desugar, Formula, Game, Term};

/// `Γ ⊢ φ`. Formulas are kept in core form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sequent {
    pub ctx: Vec<Formula>,
    pub goal: Formula,
}

impl Sequent {
    pub fn new(ctx: Vec<Formula>, goal: Formula) -> Self {
        Sequent { ctx: ctx.iter().map(desugar).collect(), goal: desugar(&goal) }
    }

    pub fn with(&self, extra: Formula, goal: Formula) -> Sequent {
        let mut ctx = self.ctx.clone();
        ctx.push(extra);
        Sequent { ctx, goal }
    }

    pub fn same_ctx(&self, goal: Formula) -> Sequent {
        Sequent { ctx: self.ctx.clone(), goal }
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.ctx.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", crate::syntax::resugar(c))?;
        }
        write!(f, " ⊢ {}", crate::syntax::resugar(&self.goal))
    }
}

impl Serialize for Sequent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArgKind {
    Name,
    Index,
    Term,
    Formula,
    Game,
    /// Optional trailing label.
    Tag,
}

macro_rules! rules {
    ($( $v:ident => $name:literal, $sym:literal, [$($k:ident),*], $n:literal; )*) => {
        /// Every rule the checker implements.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Rule { $($v),* }

        impl Rule {
            pub const ALL: &'static [Rule] = &[$(Rule::$v),*];

            /// Name used in proof files.
            pub fn name(self) -> &'static str {
                match self { $(Rule::$v => $name),* }
            }

            /// Conventional symbol, e.g. `⟨:*⟩I`.
            pub fn symbol(self) -> &'static str {
                match self { $(Rule::$v => $sym),* }
            }

            pub fn signature(self) -> &'static [ArgKind] {
                match self { $(Rule::$v => &[$(ArgKind::$k),*]),* }
            }

            /// Number of premises.
            pub fn arity(self) -> usize {
                match self { $(Rule::$v => $n),* }
            }
        }
    };
}

rules! {
    BoxChoiceI => "box-choice-I", "[∪]I", [], 2;
    BoxChoiceE1 => "box-choice-E1", "[∪]E1", [Game], 1;
    BoxChoiceE2 => "box-choice-E2", "[∪]E2", [Game], 1;
    DiaChoiceI1 => "dia-choice-I1", "⟨∪⟩I1", [], 1;
    DiaChoiceI2 => "dia-choice-I2", "⟨∪⟩I2", [], 1;
    DiaChoiceE => "dia-choice-E", "⟨∪⟩E", [Formula], 3;
    DiaTestI => "dia-test-I", "⟨?⟩I", [], 2;
    DiaTestE1 => "dia-test-E1", "⟨?⟩E1", [Formula], 1;
    DiaTestE2 => "dia-test-E2", "⟨?⟩E2", [Formula], 1;
    BoxTestI => "box-test-I", "[?]I", [], 1;
    BoxTestE => "box-test-E", "[?]E", [Formula], 2;
    Hyp => "hyp", "hyp", [Index], 0;
    BoxRandomI => "box-random-I", "[:*]I", [Name], 1;
    BoxRandomE => "box-random-E", "[:*]E", [Formula, Term], 1;
    DiaRandomI => "dia-random-I", "⟨:*⟩I", [Term], 1;
    DiaRandomE => "dia-random-E", "⟨:*⟩E", [Formula], 2;
    SeqI => "seq-I", "[;]I", [], 1;
    AsgnI => "asgn-I", "[:=]I", [Name], 1;
    Mon => "mon", "M", [Formula], 2;
    DualI => "dual-I", "[d]I", [], 1;
    DiaLoopE => "dia-loop-E", "⟨*⟩E", [Formula], 3;
    BoxLoopE => "box-loop-E", "[*]E", [], 1;
    DiaLoopS => "dia-loop-S", "⟨*⟩S", [], 1;
    DiaLoopG => "dia-loop-G", "⟨*⟩G", [], 1;
    BoxLoopR => "box-loop-R", "[*]R", [], 1;
    Loop => "loop", "loop", [Formula], 3;
    Fp => "fp", "FP", [Formula], 3;
    DiaLoopI => "dia-loop-I", "⟨*⟩I", [Formula, Term, Term, Term, Name], 3;
    Di => "DI", "DI", [], 2;
    Dc => "DC", "DC", [Formula], 2;
    Dw => "DW", "DW", [], 1;
    Dg => "DG", "DG", [Name, Term, Term], 1;
    Dv => "DV", "DV", [Term, Term, Term, Term, Name], 4;
    Bsolve => "bsolve", "bsolve", [Name, Name], 1;
    Dsolve => "dsolve", "dsolve", [Name, Name], 1;
    Gv => "GV", "GV", [Formula], 2;
    Arith => "arith", "FO", [Tag], 0;
}

impl Rule {
    pub fn from_name(s: &str) -> Option<Rule> {
        Rule::ALL.iter().copied().find(|r| r.name() == s)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Rule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// A payload argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Arg {
    Name(String),
    Index(usize),
    Term(Term),
    Formula(Formula),
    Game(Game),
    Tag(Option<String>),
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Name(n) => f.write_str(n),
            Arg::Index(i) => write!(f, "{i}"),
            Arg::Term(t) => write!(f, "\"{t}\""),
            Arg::Formula(p) => write!(f, "\"{p}\""),
            Arg::Game(g) => write!(f, "\"{g}\""),
            Arg::Tag(Some(t)) => write!(f, "\"{t}\""),
            Arg::Tag(None) => Ok(()),
        }
    }
}

/// A rule name with its payload, before children are attached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleInstance {
    pub rule: Rule,
    pub args: Vec<Arg>,
}

impl RuleInstance {
    pub fn new(rule: Rule, args: Vec<Arg>) -> Self {
        RuleInstance { rule, args }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofTerm {
    pub rule: Rule,
    pub args: Vec<Arg>,
    pub children: Vec<ProofTerm>,
    /// Source line, 0 when built in code.
    pub line: usize,
}

impl ProofTerm {
    pub fn new(rule: Rule, args: Vec<Arg>, children: Vec<ProofTerm>) -> Self {
        ProofTerm { rule, args, children, line: 0 }
    }

    pub fn leaf(tag: &str) -> Self {
        ProofTerm::new(Rule::Arith, vec![Arg::Tag(Some(tag.to_string()))], vec![])
    }

    pub fn hyp(i: usize) -> Self {
        ProofTerm::new(Rule::Hyp, vec![Arg::Index(i)], vec![])
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(ProofTerm::size).sum::<usize>()
    }
}

impl fmt::Display for ProofTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.rule.name())?;
        for a in &self.args {
            if !matches!(a, Arg::Tag(None)) {
                write!(f, " {a}")?;
            }
        }
        for c in &self.children {
            write!(f, " {c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{rule}: {reason}")]
pub struct RuleError {
    pub rule: Rule,
    pub reason: String,
}

impl RuleError {
    pub fn new(rule: Rule, reason: impl Into<String>) -> Self {
        RuleError { rule, reason: reason.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    Checked,
    Failed { rule: String, reason: String, path: String },
}

/// An arithmetic leaf the oracle could not settle.
#[derive(Clone, Debug, Serialize)]
pub struct Obligation {
    pub path: String,
    pub tag: Option<String>,
    pub sequent: Sequent,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    #[serde(flatten)]
    pub verdict: Verdict,
    pub obligations: Vec<Obligation>,
    /// Arithmetic leaves certified by the oracle.
    pub proved_leaves: usize,
    #[serde(skip)]
    pub tree: Option<CheckedNode>,
}

impl CheckResult {
    pub fn is_checked(&self) -> bool {
        self.verdict == Verdict::Checked
    }
}

/// A proof node together with the sequent it proves and the data the rule
/// computed (fresh names, solutions). Input to strategy extraction.
#[derive(Clone, Debug)]
pub struct CheckedNode {
    pub rule: Rule,
    pub args: Vec<Arg>,
    pub seq: Sequent,
    pub aux: Aux,
    pub path: String,
    pub leaf: Option<ArithVerdict>,
    pub children: Vec<CheckedNode>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CheckOptions {
    /// Reject proofs with Assumed leaves.
    pub strict: bool,
}

/// Checks `proof` against `ctx ⊢ goal`.
pub fn check(ctx: &[Formula], proof: &ProofTerm, goal: &Formula) -> CheckResult {
    check_with(ctx, proof, goal, CheckOptions::default())
}

pub fn check_with(ctx: &[Formula], proof: &ProofTerm, goal: &Formula, opts: CheckOptions) -> CheckResult {
    let seq = Sequent::new(ctx.to_vec(), goal.clone());
    let mut st = Walk { obligations: Vec::new(), proved: 0, opts };
    match st.node(proof, seq, "0".to_string()) {
        Ok(tree) => CheckResult {
            verdict: Verdict::Checked,
            obligations: st.obligations,
            proved_leaves: st.proved,
            tree: Some(tree),
        },
        Err((rule, reason, path)) => CheckResult {
            verdict: Verdict::Failed { rule: rule.name().to_string(), reason, path },
            obligations: st.obligations,
            proved_leaves: st.proved,
            tree: None,
        },
    }
}

struct Walk {
    obligations: Vec<Obligation>,
    proved: usize,
    opts: CheckOptions,
}

type Fail = (Rule, String, String);

impl Walk {
    fn node(&mut self, p: &ProofTerm, seq: Sequent, path: String) -> Result<CheckedNode, Fail> {
        let fail = |e: RuleError| (e.rule, e.reason, path.clone());
        check_args(p).map_err(fail)?;
        if p.children.len() != p.rule.arity() {
            return Err(fail(RuleError::new(
                p.rule,
                format!("expects {} subproof(s), got {}", p.rule.arity(), p.children.len()),
            )));
        }
        let inst = RuleInstance::new(p.rule, p.args.clone());
        let (premises, aux) = rules::apply(&seq, &inst).map_err(fail)?;
        let mut leaf = None;
        if p.rule == Rule::Arith {
            let v = discharge_arith(&seq);
            let tag = match p.args.first() {
                Some(Arg::Tag(t)) => t.clone(),
                _ => None,
            };
            match &v {
                ArithVerdict::Proved => self.proved += 1,
                ArithVerdict::Assumed => {
                    if self.opts.strict {
                        return Err(fail(RuleError::new(p.rule, "arithmetic leaf not proved (strict mode)")));
                    }
                    self.obligations.push(Obligation { path: path.clone(), tag, sequent: seq.clone() });
                }
                ArithVerdict::Refuted(w) => {
                    return Err(fail(RuleError::new(p.rule, format!("arithmetic leaf refuted at {w}"))));
                }
            }
            leaf = Some(v);
        }
        let mut children = Vec::with_capacity(premises.len());
        for (i, (c, s)) in p.children.iter().zip(premises).enumerate() {
            children.push(self.node(c, s, format!("{path}.{i}"))?);
        }
        Ok(CheckedNode { rule: p.rule, args: p.args.clone(), seq, aux, path, leaf, children })
    }
}

fn check_args(p: &ProofTerm) -> Result<(), RuleError> {
    let sig = p.rule.signature();
    let ok = sig.len() == p.args.len()
        && sig.iter().zip(&p.args).all(|(k, a)| {
            matches!(
                (k, a),
                (ArgKind::Name, Arg::Name(_))
                    | (ArgKind::Index, Arg::Index(_))
                    | (ArgKind::Term, Arg::Term(_))
                    | (ArgKind::Formula, Arg::Formula(_))
                    | (ArgKind::Game, Arg::Game(_))
                    | (ArgKind::Tag, Arg::Tag(_))
            )
        });
    if ok {
        Ok(())
    } else {
        Err(RuleError::new(p.rule, format!("payload does not match signature {sig:?}")))
    }
}
