//! C interface to the cdgl checker and strategy engine.
//!
//! A `CdglSession` holds one source file, one proof file and the results of
//! checks run so far. Every call returns a [`CdglStatus`]; on failure the
//! message is available from [`cdgl_last_error`] until the next call on the
//! same session. Strings handed out through `out` parameters belong to the
//! caller and are released with [`cdgl_string_free`].
//!
//! ```c
//! CdglSession *s = cdgl_session_new();
//! char *json = NULL;
//! if (cdgl_load_source(s, src) == CDGL_STATUS_OK &&
//!     cdgl_load_proofs(s, proofs) == CDGL_STATUS_OK &&
//!     cdgl_check(s, "reachAvoid", &json) == CDGL_STATUS_OK) {
//!     puts(json);
//! }
//! cdgl_string_free(json);
//! cdgl_session_free(s);
//! ```

use std::collections::{BTreeMap, HashMap};
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cdgl::cli::RunConfig;
use cdgl::creal::{CReal, State};
use cdgl::engine::{extract, play, DemonScript, Role, Strategy};
use cdgl::prover::{check_with, parse_proof_file, CheckResult, ProofFile};
use cdgl::syntax::{parse_rational, Formula, Source};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CdglStatus {
    Ok = 0,
    /// A required pointer was null.
    NullArgument = 1,
    /// A string argument was not UTF-8.
    InvalidUtf8 = 2,
    /// The source text or a formula did not parse.
    Syntax = 3,
    /// The proof file did not parse.
    ProofFormat = 4,
    /// The configuration was rejected.
    Config = 5,
    /// No such theorem, or nothing loaded yet.
    NotFound = 6,
    /// The proof does not check; the JSON result says where.
    CheckFailed = 7,
    /// Extraction or play failed, or a script or state was malformed.
    PlayFailed = 8,
    /// An internal error; the session should be freed.
    Panic = 9,
}

/// Opaque session handle.
pub struct CdglSession {
    source: Option<Source>,
    proofs: Option<ProofFile>,
    config: RunConfig,
    checked: HashMap<String, (Formula, CheckResult)>,
    last_error: Option<CString>,
}

struct Failure(CdglStatus, String);

type Outcome = Result<(), Failure>;

fn fail<T>(status: CdglStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

fn c_string(s: String) -> *mut c_char {
    // Interior NULs cannot occur in JSON or in our messages, but never panic.
    CString::new(s.replace('\0', " ")).expect("no NUL").into_raw()
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(CdglStatus::NullArgument, format!("{what} is null"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(CdglStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn optional<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

/// Runs `f` on the session, recording any failure as its last error.
unsafe fn with_session(s: *mut CdglSession, f: impl FnOnce(&mut CdglSession) -> Outcome) -> CdglStatus {
    let Some(session) = s.as_mut() else { return CdglStatus::NullArgument };
    session.last_error = None;
    let result = catch_unwind(AssertUnwindSafe(|| f(&mut *session)));
    let (status, msg) = match result {
        Ok(Ok(())) => return CdglStatus::Ok,
        Ok(Err(Failure(status, msg))) => (status, msg),
        Err(_) => (CdglStatus::Panic, "internal error".to_string()),
    };
    session.last_error = CString::new(msg.replace('\0', " ")).ok();
    status
}

unsafe fn write_out(out: *mut *mut c_char, json: String) {
    if !out.is_null() {
        *out = c_string(json);
    }
}

impl CdglSession {
    fn source(&self) -> Result<&Source, Failure> {
        self.source.as_ref().ok_or(Failure(CdglStatus::NotFound, "no source loaded".into()))
    }

    fn check(&mut self, theorem: &str) -> Result<&(Formula, CheckResult), Failure> {
        if !self.checked.contains_key(theorem) {
            let proofs = self.proofs.as_ref().ok_or(Failure(CdglStatus::NotFound, "no proofs loaded".into()))?;
            let thm = proofs
                .get(theorem)
                .ok_or_else(|| Failure(CdglStatus::NotFound, format!("no theorem named {theorem}")))?;
            let res = check_with(&[], &thm.proof, &thm.goal, self.config.check_options());
            self.checked.insert(theorem.to_string(), (thm.goal.clone(), res));
        }
        Ok(&self.checked[theorem])
    }
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cdgl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// A new empty session with the default configuration.
#[no_mangle]
pub extern "C" fn cdgl_session_new() -> *mut CdglSession {
    Box::into_raw(Box::new(CdglSession {
        source: None,
        proofs: None,
        config: RunConfig::default(),
        checked: HashMap::new(),
        last_error: None,
    }))
}

/// Frees a session. Null is ignored.
///
/// # Safety
/// `s` must come from [`cdgl_session_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cdgl_session_free(s: *mut CdglSession) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Message of the last failed call on `s`, or null. Owned by the session.
///
/// # Safety
/// `s` must be a live session or null.
#[no_mangle]
pub unsafe extern "C" fn cdgl_last_error(s: *const CdglSession) -> *const c_char {
    match s.as_ref().and_then(|s| s.last_error.as_ref()) {
        Some(m) => m.as_ptr(),
        None => ptr::null(),
    }
}

/// Frees a string returned through an `out` parameter. Null is ignored.
///
/// # Safety
/// `p` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cdgl_string_free(p: *mut c_char) {
    if !p.is_null() {
        drop(CString::from_raw(p));
    }
}

/// Replaces the run configuration with TOML text (same keys as the CLI's
/// `--config` file). Clears cached check results.
///
/// # Safety
/// `s` must be a live session; `toml` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cdgl_configure(s: *mut CdglSession, toml: *const c_char) -> CdglStatus {
    with_session(s, |session| {
        let text = text(toml, "toml")?;
        session.config = RunConfig::from_toml(text, "config").map_err(|e| Failure(CdglStatus::Config, e.to_string()))?;
        session.checked.clear();
        Ok(())
    })
}

/// Loads `.cdgl` source text, dropping any proofs loaded before.
///
/// # Safety
/// `s` must be a live session; `src` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cdgl_load_source(s: *mut CdglSession, src: *const c_char) -> CdglStatus {
    with_session(s, |session| {
        let parsed = Source::parse(text(src, "source")?).map_err(|e| Failure(CdglStatus::Syntax, e.to_string()))?;
        session.source = Some(parsed);
        session.proofs = None;
        session.checked.clear();
        Ok(())
    })
}

/// Loads `.cdglp` proof text against the loaded source.
///
/// # Safety
/// `s` must be a live session; `proofs` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cdgl_load_proofs(s: *mut CdglSession, proofs: *const c_char) -> CdglStatus {
    with_session(s, |session| {
        let body = text(proofs, "proofs")?;
        let file = parse_proof_file(body, session.source()?).map_err(|e| Failure(CdglStatus::ProofFormat, e.to_string()))?;
        session.proofs = Some(file);
        session.checked.clear();
        Ok(())
    })
}

/// Checks a theorem and writes the result as JSON to `*out` (if `out` is
/// not null), also when the proof fails.
///
/// # Safety
/// `s` must be a live session; `theorem` a NUL-terminated string; `out`
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn cdgl_check(s: *mut CdglSession, theorem: *const c_char, out: *mut *mut c_char) -> CdglStatus {
    with_session(s, |session| {
        let name = text(theorem, "theorem")?;
        let (_, res) = session.check(name)?;
        let json = serde_json::to_string_pretty(res).expect("results serialize");
        let checked = res.is_checked();
        write_out(out, json);
        if checked {
            Ok(())
        } else {
            fail(CdglStatus::CheckFailed, format!("{name}: {:?}", res.verdict))
        }
    })
}

fn parse_state(json: Option<&str>) -> Result<State, Failure> {
    let Some(json) = json else { return Ok(State::new()) };
    let bad = |m: String| Failure(CdglStatus::PlayFailed, m);
    let vals: BTreeMap<String, String> = serde_json::from_str(json).map_err(|e| bad(format!("state: {e}")))?;
    let mut s = State::new();
    for (k, v) in vals {
        let q = parse_rational(&v).ok_or_else(|| bad(format!("state: {k} = `{v}` is not a rational")))?;
        s = s.set(&k, CReal::from_rational(q));
    }
    Ok(s)
}

/// Plays a checked theorem: the extracted strategy against `opponent`, a
/// JSON script (null for a player who never decides). `state` is a JSON
/// object of initial values such as `{"x": "1/2"}`, or null. The trace is
/// written as JSON to `*out`.
///
/// # Safety
/// `s` must be a live session; string arguments NUL-terminated or null
/// where allowed; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn cdgl_play(
    s: *mut CdglSession,
    theorem: *const c_char,
    opponent: *const c_char,
    state: *const c_char,
    out: *mut *mut c_char,
) -> CdglStatus {
    with_session(s, |session| {
        let name = text(theorem, "theorem")?;
        let script = optional(opponent, "opponent")?;
        let start = parse_state(optional(state, "state")?)?;
        let play_cfg = session.config.play_config().map_err(|e| Failure(CdglStatus::Config, e.to_string()))?;
        let (goal, res) = session.check(name)?;
        if !res.is_checked() {
            return fail(CdglStatus::CheckFailed, format!("{name} does not check"));
        }
        let played = |e: cdgl::engine::EngineError| Failure(CdglStatus::PlayFailed, e.to_string());
        let own = extract(res, goal, name).map_err(played)?;
        let other = match script {
            Some(json) => {
                let script = DemonScript::from_json(json).map_err(|e| Failure(CdglStatus::PlayFailed, format!("script: {e}")))?;
                Strategy::scripted(own.role.other(), script, "script").map_err(played)?
            }
            None => Strategy::passive(own.role.other()),
        };
        let (angel, demon) = if own.role == Role::Angel { (&own, &other) } else { (&other, &own) };
        let game = own.game().expect("extracted strategies know their game").clone();
        let trace = play(&game, angel, demon, &start, &play_cfg).map_err(played)?;
        write_out(out, trace.to_json());
        Ok(())
    })
}
