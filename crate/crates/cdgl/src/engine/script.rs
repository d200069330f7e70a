//! Declarative strategies read from JSON.
//!
//! ```json
//! {"decisions": [{"construct": "ode", "rule": {"uniform": ["1/2", "1"]}}], "seed": 7}
//! ```
//!
//! Each decision point looks up the first rule for its construct. Values
//! are rationals for `assign-any` and `ode` (a duration), `left`/`right`
//! for `choice` and `stop`/`go` for `repeat`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::syntax::parse_rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construct {
    Choice,
    AssignAny,
    Ode,
    Repeat,
}

impl Construct {
    pub fn name(self) -> &'static str {
        match self {
            Construct::Choice => "choice",
            Construct::AssignAny => "assign-any",
            Construct::Ode => "ode",
            Construct::Repeat => "repeat",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecisionRule {
    Fixed(String),
    /// Uniform over `[lo, hi]` on a grid of 2^-32 of the range.
    Uniform([String; 2]),
    /// One entry per occurrence of the construct.
    Table(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub construct: Construct,
    pub rule: DecisionRule,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemonScript {
    pub decisions: Vec<Decision>,
    #[serde(default)]
    pub seed: u64,
}

impl DemonScript {
    pub fn from_json(text: &str) -> Result<DemonScript, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scripts serialize")
    }

    /// A script that always answers `construct` with `value`.
    pub fn fixed(construct: Construct, value: &str) -> DemonScript {
        DemonScript { decisions: vec![Decision { construct, rule: DecisionRule::Fixed(value.into()) }], seed: 0 }
    }

    pub fn uniform(construct: Construct, lo: &str, hi: &str, seed: u64) -> DemonScript {
        DemonScript {
            decisions: vec![Decision { construct, rule: DecisionRule::Uniform([lo.into(), hi.into()]) }],
            seed,
        }
    }

    /// Rejects malformed values before play starts.
    pub fn validate(&self) -> Result<(), EngineError> {
        for d in &self.decisions {
            let vals: Vec<&String> = match &d.rule {
                DecisionRule::Fixed(v) => vec![v],
                DecisionRule::Uniform([lo, hi]) => {
                    if !matches!(d.construct, Construct::AssignAny | Construct::Ode) {
                        return Err(bad(format!("uniform rule for {}", d.construct.name())));
                    }
                    let (a, b) = (rational(lo)?, rational(hi)?);
                    if a > b {
                        return Err(bad(format!("empty range [{lo}, {hi}]")));
                    }
                    vec![]
                }
                DecisionRule::Table(vs) => vs.iter().collect(),
            };
            for v in vals {
                parse_value(d.construct, v)?;
            }
        }
        Ok(())
    }
}

fn bad(msg: String) -> EngineError {
    EngineError::StrategyMismatch(format!("script: {msg}"))
}

fn rational(v: &str) -> Result<BigRational, EngineError> {
    parse_rational(v).ok_or_else(|| bad(format!("`{v}` is not a rational")))
}

/// A decoded scripted answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Answer {
    Value(BigRational),
    Branch(bool),
    Stop(bool),
}

fn parse_value(c: Construct, v: &str) -> Result<Answer, EngineError> {
    match c {
        Construct::Choice => match v {
            "left" => Ok(Answer::Branch(false)),
            "right" => Ok(Answer::Branch(true)),
            _ => Err(bad(format!("choice answer `{v}` is not left/right"))),
        },
        Construct::Repeat => match v {
            "stop" => Ok(Answer::Stop(true)),
            "go" => Ok(Answer::Stop(false)),
            _ => Err(bad(format!("repeat answer `{v}` is not stop/go"))),
        },
        Construct::AssignAny | Construct::Ode => {
            let q = rational(v)?;
            if c == Construct::Ode && q < BigRational::from_integer(0.into()) {
                return Err(bad(format!("negative duration {v}")));
            }
            Ok(Answer::Value(q))
        }
    }
}

/// A script in use: its random stream and per-construct counters.
#[derive(Clone, Debug)]
pub struct ScriptRun {
    pub script: DemonScript,
    rng: ChaCha8Rng,
    used: BTreeMap<Construct, usize>,
}

impl ScriptRun {
    pub fn new(script: DemonScript) -> ScriptRun {
        let rng = ChaCha8Rng::seed_from_u64(script.seed);
        ScriptRun { script, rng, used: BTreeMap::new() }
    }

    pub fn answers(&self, c: Construct) -> bool {
        self.script.decisions.iter().any(|d| d.construct == c)
    }

    pub fn next(&mut self, c: Construct) -> Result<Answer, EngineError> {
        let d = self
            .script
            .decisions
            .iter()
            .find(|d| d.construct == c)
            .ok_or_else(|| EngineError::StrategyMismatch(format!("script has no rule for {}", c.name())))?;
        let n = self.used.entry(c).or_insert(0);
        let i = *n;
        *n += 1;
        match &d.rule {
            DecisionRule::Fixed(v) => parse_value(c, v),
            DecisionRule::Table(vs) => match vs.get(i) {
                Some(v) => parse_value(c, v),
                None => Err(EngineError::ScriptExhausted(format!("{} table has {} entries", c.name(), vs.len()))),
            },
            DecisionRule::Uniform([lo, hi]) => {
                let (a, b) = (rational(lo)?, rational(hi)?);
                let u: u32 = self.rng.gen();
                let frac = BigRational::new(BigInt::from(u), BigInt::from(1u64 << 32));
                Ok(Answer::Value(&a + (b - &a) * frac))
            }
        }
    }
}
