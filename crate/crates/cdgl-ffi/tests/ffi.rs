use std::ffi::{c_char, CStr, CString};
use std::ptr;

use cdgl_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn corpus(name: &str) -> CString {
    let path = format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"));
    c(&std::fs::read_to_string(path).unwrap())
}

unsafe fn take(p: *mut c_char) -> String {
    assert!(!p.is_null());
    let s = CStr::from_ptr(p).to_str().unwrap().to_string();
    cdgl_string_free(p);
    s
}

unsafe fn last_error(s: *const CdglSession) -> String {
    let p = cdgl_last_error(s);
    assert!(!p.is_null(), "expected an error message");
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

struct Session(*mut CdglSession);

impl Session {
    fn new() -> Session {
        Session(cdgl_session_new())
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        unsafe { cdgl_session_free(self.0) }
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(cdgl_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn check_and_play_the_driving_proof() {
    let s = Session::new();
    unsafe {
        assert_eq!(cdgl_load_source(s.0, corpus("driving.cdgl").as_ptr()), CdglStatus::Ok);
        assert_eq!(cdgl_load_proofs(s.0, corpus("driving.cdglp").as_ptr()), CdglStatus::Ok);
        let mut out = ptr::null_mut();
        assert_eq!(cdgl_check(s.0, c("reachAvoid").as_ptr(), &mut out), CdglStatus::Ok);
        let res: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(res["verdict"], "Checked");
        assert_eq!(res["obligations"].as_array().unwrap().len(), 4);
        assert!(cdgl_last_error(s.0).is_null());

        let script = c(r#"{"decisions": [{"construct": "ode", "rule": {"uniform": ["1/2", "1"]}}], "seed": 4}"#);
        let state = c(r#"{"x": "0", "v": "0"}"#);
        let mut out = ptr::null_mut();
        let st = cdgl_play(s.0, c("reachAvoid").as_ptr(), script.as_ptr(), state.as_ptr(), &mut out);
        assert_eq!(st, CdglStatus::Ok, "{}", last_error(s.0));
        let trace: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(trace["evidence"]["angel"]["holds"], true);
        let x = &trace["final"]["x"];
        let bound = |k: &str| cdgl::syntax::parse_rational(x[k].as_str().unwrap()).unwrap();
        let ten = cdgl::syntax::parse_rational("10").unwrap();
        assert!(bound("lo") <= ten && ten <= bound("hi"), "{x}");
        assert!(bound("hi") - bound("lo") < cdgl::syntax::parse_rational("1/1000000").unwrap(), "{x}");
    }
}

#[test]
fn errors_carry_status_and_message() {
    let s = Session::new();
    unsafe {
        assert_eq!(cdgl_load_source(ptr::null_mut(), c("").as_ptr()), CdglStatus::NullArgument);
        assert_eq!(cdgl_load_source(s.0, ptr::null()), CdglStatus::NullArgument);
        assert_eq!(cdgl_load_proofs(s.0, c("(theorem t \"1>0\" (arith))").as_ptr()), CdglStatus::NotFound);
        assert!(last_error(s.0).contains("no source"));

        assert_eq!(cdgl_load_source(s.0, c("formula p = x >= ").as_ptr()), CdglStatus::Syntax);
        assert_eq!(cdgl_load_source(s.0, c("formula p = <x:=1>x>0\nformula q = x>0").as_ptr()), CdglStatus::Ok);
        assert!(cdgl_last_error(s.0).is_null());
        assert_eq!(cdgl_load_proofs(s.0, c("(theorem p (asgn-I").as_ptr()), CdglStatus::ProofFormat);

        let proofs = c("(theorem p (asgn-I x0 (arith)))\n(theorem q (arith))");
        assert_eq!(cdgl_load_proofs(s.0, proofs.as_ptr()), CdglStatus::Ok);
        assert_eq!(cdgl_check(s.0, c("missing").as_ptr(), ptr::null_mut()), CdglStatus::NotFound);

        let mut out = ptr::null_mut();
        assert_eq!(cdgl_check(s.0, c("q").as_ptr(), &mut out), CdglStatus::CheckFailed);
        let res: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(res["verdict"], "Failed");
        assert_eq!(cdgl_play(s.0, c("q").as_ptr(), ptr::null(), ptr::null(), ptr::null_mut()), CdglStatus::CheckFailed);

        let bad_state = c(r#"{"x": "one"}"#);
        assert_eq!(cdgl_play(s.0, c("p").as_ptr(), ptr::null(), bad_state.as_ptr(), ptr::null_mut()), CdglStatus::PlayFailed);
        let foreign = c(r#"{"decisions": [{"construct": "ode", "rule": {"fixed": "1"}}]}"#);
        assert_eq!(cdgl_play(s.0, c("p").as_ptr(), foreign.as_ptr(), ptr::null(), ptr::null_mut()), CdglStatus::PlayFailed);
        assert!(last_error(s.0).contains("never makes"), "{}", last_error(s.0));

        let mut out = ptr::null_mut();
        assert_eq!(cdgl_play(s.0, c("p").as_ptr(), ptr::null(), ptr::null(), &mut out), CdglStatus::Ok);
        assert!(take(out).contains("\"holds\": true"));
    }
}

#[test]
fn configuration_applies_to_checks() {
    let s = Session::new();
    unsafe {
        assert_eq!(cdgl_configure(s.0, c("precision = 0").as_ptr()), CdglStatus::Config);
        assert_eq!(cdgl_configure(s.0, c("colour = 1").as_ptr()), CdglStatus::Config);
        cdgl_load_source(s.0, c("formula p = x*x>=0").as_ptr());
        cdgl_load_proofs(s.0, c("(theorem p (arith \"square\"))").as_ptr());
        assert_eq!(cdgl_check(s.0, c("p").as_ptr(), ptr::null_mut()), CdglStatus::Ok);
        assert_eq!(cdgl_configure(s.0, c("oracle = \"strict\"").as_ptr()), CdglStatus::Ok);
        assert_eq!(cdgl_check(s.0, c("p").as_ptr(), ptr::null_mut()), CdglStatus::CheckFailed);
    }
}

fn header() -> String {
    std::fs::read_to_string(format!("{}/include/cdgl.h", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn header_declares_the_interface() {
    let h = header();
    for f in [
        "cdgl_version", "cdgl_session_new", "cdgl_session_free", "cdgl_last_error", "cdgl_string_free", "cdgl_configure",
        "cdgl_load_source", "cdgl_load_proofs", "cdgl_check", "cdgl_play",
    ] {
        assert!(h.contains(&format!("{f}(")), "{f} missing from header");
    }
    for (name, value) in [("CDGL_STATUS_OK", 0), ("CDGL_STATUS_CHECK_FAILED", 7), ("CDGL_STATUS_PANIC", 9)] {
        assert!(h.contains(&format!("{name} = {value}")), "{name}");
    }
    assert!(h.contains("typedef struct CdglSession CdglSession;"));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let include = format!("{}/include", env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    for (cc, file) in [("cc", "probe.c"), ("c++", "probe.cpp")] {
        let path = dir.path().join(file);
        std::fs::write(&path, "#include \"cdgl.h\"\nint main(void) { CdglStatus s = CDGL_STATUS_OK; return (int)s; }\n").unwrap();
        let Ok(out) = std::process::Command::new(cc).args(["-fsyntax-only", "-Wall", "-Werror", "-I", &include]).arg(&path).output()
        else {
            eprintln!("{cc} not available; skipped");
            continue;
        };
        assert!(out.status.success(), "{cc}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
