use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde_json::json;

use super::{CliError, Command, Players, RunConfig};
use crate::creal::{CReal, State};
use crate::engine::{
    decision_points, extract, play, Construct, Decision, DecisionRule, DemonScript, Outcome, PlayTrace, Role, Strategy,
};
use crate::prover::{check_with, parse_proof_file, CheckResult, ProofFile, ProofTerm, Verdict};
use crate::statics::{bound_vars, free_vars_formula, free_vars_game, must_bound_vars, term_vars, VarSet};
use crate::syntax::{fmt_rational, resugar, resugar_game, DeclKind, Expr, Game, Source, Term};

pub(super) fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<(), CliError> {
    match cmd {
        Command::Check { source, proofs, theorem, json, verbose } => {
            cmd_check(source, proofs, theorem.as_deref(), *json, *verbose, cfg)
        }
        Command::Extract { source, proofs, theorem } => cmd_extract(source, proofs, theorem, cfg),
        Command::Play { source, proofs, theorem, players, out } => {
            cmd_play(source, proofs, theorem, players, out.as_deref(), cfg)
        }
        Command::Sweep { source, proofs, theorem, players, runs, out } => {
            cmd_sweep(source, proofs, theorem, players, *runs, out, cfg)
        }
        Command::Statics { expr, source } => cmd_statics(expr, source.as_deref()),
        Command::Fmt { file, source } => cmd_fmt(file, source.as_deref()),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_source(path: &Path) -> Result<Source, CliError> {
    Source::parse(&read(path)?).map_err(|e| CliError::Input(format!("{}:{}:{}: {}", path.display(), e.line, e.col, e.msg)))
}

fn load_proofs(path: &Path, src: &Source) -> Result<ProofFile, CliError> {
    parse_proof_file(&read(path)?, src).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn assumed(r: &CheckResult) -> usize {
    r.obligations.len()
}

fn cmd_check(
    source: &Path,
    proofs: &Path,
    only: Option<&str>,
    as_json: bool,
    verbose: bool,
    cfg: &RunConfig,
) -> Result<(), CliError> {
    let src = load_source(source)?;
    let file = load_proofs(proofs, &src)?;
    let thms: Vec<_> = file.theorems.iter().filter(|t| only.is_none_or(|n| n == t.name)).collect();
    if thms.is_empty() {
        return Err(CliError::Usage(match only {
            Some(n) => format!("no theorem `{n}` in {}", proofs.display()),
            None => format!("{} has no theorems", proofs.display()),
        }));
    }
    let results: Vec<_> = thms
        .par_iter()
        .map(|t| {
            let start = Instant::now();
            let r = check_with(&[], &t.proof, &t.goal, cfg.check_options());
            (t, r, start.elapsed())
        })
        .collect();
    let failed = results.iter().filter(|(_, r, _)| !r.is_checked()).count();
    if as_json {
        let out: Vec<_> = results
            .iter()
            .map(|(t, r, d)| json!({"theorem": t.name, "seconds": d.as_secs_f64(), "result": r}))
            .collect();
        out!("{}", serde_json::to_string_pretty(&out).expect("results serialize"));
    } else {
        for (t, r, d) in &results {
            match &r.verdict {
                Verdict::Checked => out!(
                    "{}: Checked ({} proved, {} assumed) in {:.2}s",
                    t.name,
                    r.proved_leaves,
                    assumed(r),
                    d.as_secs_f64()
                ),
                Verdict::Failed { rule, reason, path } => {
                    out!("{}: Failed at {path} ({rule}): {reason}", t.name)
                }
            }
            for o in &r.obligations {
                out!("  assumed {} [{}]", o.path, o.tag.as_deref().unwrap_or("untagged"));
                if verbose {
                    out!("    {}", o.sequent);
                }
            }
        }
    }
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} of {} theorems failed", results.len())));
    }
    Ok(())
}

/// Checks one theorem and extracts its strategy.
fn checked_strategy(source: &Path, proofs: &Path, theorem: &str, cfg: &RunConfig) -> Result<(Source, Strategy), CliError> {
    let src = load_source(source)?;
    let file = load_proofs(proofs, &src)?;
    let thm = file.get(theorem).ok_or_else(|| CliError::Usage(format!("no theorem `{theorem}` in {}", proofs.display())))?;
    let res = check_with(&[], &thm.proof, &thm.goal, cfg.check_options());
    if let Verdict::Failed { rule, reason, path } = &res.verdict {
        return Err(CliError::Failed(format!("{theorem} failed at {path} ({rule}): {reason}")));
    }
    let st = extract(&res, &thm.goal, theorem).map_err(|e| CliError::Failed(e.to_string()))?;
    Ok((src, st))
}

fn cmd_extract(source: &Path, proofs: &Path, theorem: &str, cfg: &RunConfig) -> Result<(), CliError> {
    let (_, st) = checked_strategy(source, proofs, theorem, cfg)?;
    let g = st.game().expect("extracted");
    let names = |v: Vec<Construct>| v.into_iter().map(Construct::name).collect::<Vec<_>>();
    let out = json!({
        "theorem": theorem,
        "role": st.role,
        "provenance": st.provenance.to_string(),
        "game": resugar_game(g).to_string(),
        "postcondition": st.postcondition().map(|p| resugar(p).to_string()),
        "decides": names(decision_points(g, st.role == Role::Angel)),
        "opponent_decides": names(decision_points(g, st.role == Role::Demon)),
    });
    out!("{}", serde_json::to_string_pretty(&out).expect("json"));
    Ok(())
}

/// Value of a closed rational expression such as `T/2`.
fn closed_rational(t: &Term) -> Option<BigRational> {
    Some(match t {
        Term::RealLit(q) => q.clone(),
        Term::Neg(a) => -closed_rational(a)?,
        Term::Plus(a, b) => closed_rational(a)? + closed_rational(b)?,
        Term::Times(a, b) => closed_rational(a)? * closed_rational(b)?,
        Term::Div(a, b) => {
            let d = closed_rational(b)?;
            if d.is_zero() {
                return None;
            }
            closed_rational(a)? / d
        }
        Term::Min(a, b) => closed_rational(a)?.min(closed_rational(b)?),
        Term::Max(a, b) => closed_rational(a)?.max(closed_rational(b)?),
        _ => return None,
    })
}

fn rational_arg(src: &Source, text: &str) -> Result<String, CliError> {
    let t = src.parse_term(text).map_err(|e| CliError::Usage(format!("`{text}`: {}", e.msg)))?;
    let q = closed_rational(&t).ok_or_else(|| CliError::Usage(format!("`{text}` is not a closed rational expression")))?;
    Ok(fmt_rational(&q))
}

/// `fixed:V`, `uniform:LO,HI` or a script file. The short forms answer
/// every value decision (`x:=*` and ODE durations) in `values`.
fn parse_script(spec: &str, src: &Source, seed: u64, values: &[Construct]) -> Result<DemonScript, CliError> {
    let rules = |rule: DecisionRule| DemonScript {
        decisions: values.iter().map(|&construct| Decision { construct, rule: rule.clone() }).collect(),
        seed,
    };
    if let Some(v) = spec.strip_prefix("fixed:") {
        return Ok(rules(DecisionRule::Fixed(rational_arg(src, v)?)));
    }
    if let Some(r) = spec.strip_prefix("uniform:") {
        let (lo, hi) = r.split_once(',').ok_or_else(|| CliError::Usage(format!("expected uniform:LO,HI, got `{spec}`")))?;
        return Ok(rules(DecisionRule::Uniform([rational_arg(src, lo)?, rational_arg(src, hi)?])));
    }
    let text = read(Path::new(spec))?;
    DemonScript::from_json(&text).map_err(|e| CliError::Input(format!("{spec}: {e}")))
}

struct Setup {
    game: Game,
    angel: Strategy,
    demon: Strategy,
    state: State,
}

fn setup(source: &Path, proofs: &Path, theorem: &str, p: &Players, seed: u64, cfg: &RunConfig) -> Result<Setup, CliError> {
    let (src, extracted) = checked_strategy(source, proofs, theorem, cfg)?;
    let role = extracted.role;
    let opponent = role.other();
    let (own, other) = match role {
        Role::Angel => (&p.angel, &p.demon),
        Role::Demon => (&p.demon, &p.angel),
    };
    if own.is_some() {
        return Err(CliError::Usage(format!("{theorem} already supplies the {role} strategy")));
    }
    let game = match &p.game {
        Some(name) => src.resolve_game(name).map_err(|e| CliError::Usage(format!("--game {name}: {}", e.msg)))?,
        None => extracted.game().expect("extracted").clone(),
    };
    let scripted = match other {
        Some(spec) => {
            let mut values: Vec<Construct> = decision_points(&game, opponent == Role::Angel)
                .into_iter()
                .filter(|c| matches!(c, Construct::AssignAny | Construct::Ode))
                .collect();
            if values.is_empty() {
                values.push(Construct::Ode);
            }
            let script = parse_script(spec, &src, seed, &values)?;
            Strategy::scripted(opponent, script, spec).map_err(|e| CliError::Usage(e.to_string()))?
        }
        None => Strategy::passive(opponent),
    };
    let mut state = State::new();
    for kv in &p.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Usage(format!("expected VAR=VALUE, got `{kv}`")))?;
        let q = crate::syntax::parse_rational(&rational_arg(&src, v)?).expect("formatted rational");
        state = state.set(k.trim(), CReal::from_rational(q));
    }
    let (angel, demon) = match role {
        Role::Angel => (extracted, scripted),
        Role::Demon => (scripted, extracted),
    };
    Ok(Setup { game, angel, demon, state })
}

fn summary(tr: &PlayTrace, precision: u32) -> String {
    let mut s = String::new();
    match &tr.evidence.outcome {
        Outcome::Completed => s.push_str("completed"),
        Outcome::Forfeit { loser, reason } => {
            let _ = write!(s, "{loser} forfeits ({reason})");
        }
    }
    let _ = write!(s, " after {} events; final", tr.events.len());
    for (k, iv) in &tr.final_snapshot {
        let _ = write!(s, " {k}={}", fmt_approx(&iv.mid(), precision));
    }
    for rec in [&tr.evidence.angel, &tr.evidence.demon] {
        if let (Some(p), Some(h)) = (&rec.postcondition, rec.holds) {
            let _ = write!(s, "; {p} {}", if h { "holds" } else { "FAILS" });
        }
    }
    s
}

fn fmt_approx(q: &BigRational, precision: u32) -> String {
    let digits = ((precision as f64) * std::f64::consts::LOG10_2).ceil().clamp(1.0, 17.0) as usize;
    let v = crate::creal::to_f64(q);
    let s = format!("{v:.digits$}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn violated(tr: &PlayTrace) -> bool {
    !tr.consistent()
}

fn cmd_play(source: &Path, proofs: &Path, theorem: &str, p: &Players, out: Option<&Path>, cfg: &RunConfig) -> Result<(), CliError> {
    let su = setup(source, proofs, theorem, p, cfg.seed, cfg)?;
    let tr = play(&su.game, &su.angel, &su.demon, &su.state, &cfg.play_config()?)
        .map_err(|e| CliError::Failed(format!("play: {e}")))?;
    match out {
        Some(path) => {
            std::fs::write(path, tr.to_json()).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
            out!("{}", summary(&tr, cfg.precision));
        }
        None => out!("{}", tr.to_json()),
    }
    if violated(&tr) {
        return Err(CliError::Failed("a postcondition fails in the final state".into()));
    }
    Ok(())
}

fn cmd_sweep(
    source: &Path,
    proofs: &Path,
    theorem: &str,
    p: &Players,
    runs: u64,
    out: &PathBuf,
    cfg: &RunConfig,
) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Input(format!("cannot create {}: {e}", out.display())))?;
    let pc = cfg.play_config()?;
    let seeds: Vec<u64> = (0..runs).map(|i| cfg.seed.wrapping_add(i)).collect();
    let setups = seeds.iter().map(|&s| setup(source, proofs, theorem, p, s, cfg).map(|su| (s, su))).collect::<Result<Vec<_>, _>>()?;
    let results: Vec<(u64, Result<PlayTrace, String>)> = setups
        .par_iter()
        .map(|(seed, su)| (*seed, play(&su.game, &su.angel, &su.demon, &su.state, &pc).map_err(|e| e.to_string())))
        .collect();
    let mut bad = 0;
    for (seed, r) in &results {
        match r {
            Ok(tr) => {
                let path = out.join(format!("trace-{seed}.json"));
                std::fs::write(&path, tr.to_json()).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
                if violated(tr) {
                    bad += 1;
                }
                out!("seed {seed}: {}", summary(tr, cfg.precision));
            }
            Err(e) => {
                bad += 1;
                out!("seed {seed}: error: {e}");
            }
        }
    }
    if bad > 0 {
        return Err(CliError::Failed(format!("{bad} of {runs} runs failed")));
    }
    Ok(())
}

fn set_str(s: &VarSet) -> String {
    format!("{{{}}}", s.iter().cloned().collect::<Vec<_>>().join(", "))
}

fn cmd_statics(expr: &str, source: Option<&Path>) -> Result<(), CliError> {
    let src = match source {
        Some(p) => load_source(p)?,
        None => Source::default(),
    };
    let parsed = if let Some(g) = src.game(expr) {
        Expr::Game(g.clone())
    } else if let Some(f) = src.formula(expr) {
        Expr::Formula(f.clone())
    } else if let Some(t) = src.term(expr) {
        Expr::Term(t.clone())
    } else {
        use crate::syntax::Category::*;
        [Game, Formula, Term]
            .into_iter()
            .find_map(|c| src.parse_expr(expr, c).ok())
            .ok_or_else(|| CliError::Usage(format!("`{expr}` is not a game, formula or term")))?
    };
    let empty = VarSet::new();
    let (kind, fv, bv, mbv) = match &parsed {
        Expr::Game(g) => ("game", free_vars_game(g), bound_vars(g), must_bound_vars(g)),
        Expr::Formula(f) => ("formula", free_vars_formula(f), empty.clone(), empty),
        Expr::Term(t) => ("term", term_vars(t), empty.clone(), empty),
    };
    out!("{kind} {}", expr_text(&parsed));
    out!("FV  = {}", set_str(&fv));
    out!("BV  = {}", set_str(&bv));
    out!("MBV = {}", set_str(&mbv));
    Ok(())
}

fn expr_text(e: &Expr) -> String {
    match e {
        Expr::Game(g) => g.to_string(),
        Expr::Formula(f) => f.to_string(),
        Expr::Term(t) => t.to_string(),
    }
}

fn cmd_fmt(file: &Path, source: Option<&Path>) -> Result<(), CliError> {
    if file.extension().is_some_and(|e| e == "cdglp") {
        let src_path = source.map(Path::to_path_buf).unwrap_or_else(|| file.with_extension("cdgl"));
        let src = load_source(&src_path)?;
        let pf = load_proofs(file, &src)?;
        for t in &pf.theorems {
            out!("(theorem {} \"{}\"", t.name, t.goal);
            out!("{}", indent_proof(&t.proof, 1).trim_end());
            out!(")");
        }
        return Ok(());
    }
    let src = load_source(file)?;
    for (kind, name) in &src.order {
        let line = match kind {
            DeclKind::Const => match src.defs.consts[name].as_ref() {
                Some(q) => format!("const {name} = {}", fmt_rational(q)),
                None => format!("const {name}"),
            },
            DeclKind::Term => format!("term {name} = {}", src.defs.terms[name]),
            DeclKind::Game => format!("game {name} = {}", src.defs.games[name]),
            DeclKind::Formula => format!("formula {name} = {}", src.defs.formulas[name]),
        };
        out!("{line}");
    }
    Ok(())
}

fn indent_proof(p: &ProofTerm, depth: usize) -> String {
    let pad = "  ".repeat(depth);
    let mut s = format!("{pad}({}", p.rule.name());
    for a in &p.args {
        let text = a.to_string();
        if !text.is_empty() {
            s.push(' ');
            s.push_str(&text);
        }
    }
    if p.children.is_empty() {
        s.push_str(")\n");
        return s;
    }
    s.push('\n');
    for c in &p.children {
        s.push_str(&indent_proof(c, depth + 1));
    }
    s.pop();
    s.push_str(")\n");
    s
}
