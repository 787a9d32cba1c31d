//! C ABI for guardsynth.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `gs_*_free`. Every fallible call returns a [`GsStatus`]; on
//! failure [`gs_last_error`] describes the problem. Strings returned through
//! out-parameters are owned by the caller and released with
//! [`gs_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Duration;

use guardsynth::report::ReportFile;
use guardsynth::semantics::{bfs_reach, DomainBounds};
use guardsynth::solver::SolverConfig;
use guardsynth::synthesis::{synthesize, Outcome, SynthesisReport};
use guardsynth::transform::transform_network;
use guardsynth::{parse_network, parse_query_for, print_network, Network, StateFormula};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    SolverError = 4,
    SynthesisError = 5,
    TransformError = 6,
    SemanticsError = 7,
    InvalidArgument = 8,
    Panic = 9,
}

/// Outcome of a synthesis run.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsOutcome {
    PrioritiesFound = 0,
    ErrorUnreachable = 1,
    InitialIsError = 2,
    CircularityAbort = 3,
    BoundExhausted = 4,
}

impl From<Outcome> for GsOutcome {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::PrioritiesFound => GsOutcome::PrioritiesFound,
            Outcome::ErrorUnreachable => GsOutcome::ErrorUnreachable,
            Outcome::InitialIsError => GsOutcome::InitialIsError,
            Outcome::CircularityAbort => GsOutcome::CircularityAbort,
            Outcome::BoundExhausted => GsOutcome::BoundExhausted,
        }
    }
}

/// A parsed, validated network.
pub struct GsNetwork {
    net: Network,
}

/// An error formula checked against a network.
pub struct GsQuery {
    formula: StateFormula,
}

/// The result of a synthesis run.
pub struct GsReport {
    net: Network,
    formula: StateFormula,
    report: SynthesisReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

struct Fail(GsStatus, String);

fn fail(status: GsStatus, msg: impl std::fmt::Display) -> Fail {
    Fail(status, msg.to_string())
}

/// Runs `f`, turning errors and panics into a status plus the last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            GsStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GsStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(fail(GsStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(GsStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| fail(GsStatus::NullArgument, format!("{what} is null")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(fail(GsStatus::NullArgument, format!("{what} is null")));
    }
    out.write(value);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("nul bytes removed")
        .into_raw()
}

/// The message of the last failed call on this thread; empty after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn gs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn gs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn gs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a network.
///
/// # Safety
/// `source` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_network_parse(
    source: *const c_char,
    out: *mut *mut GsNetwork,
) -> GsStatus {
    guard(|| {
        let src = text(source, "source")?;
        let net = parse_network(src).map_err(|e| fail(GsStatus::ParseError, e))?;
        put(out, Box::into_raw(Box::new(GsNetwork { net })), "out")
    })
}

/// # Safety
/// `net` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gs_network_free(net: *mut GsNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Prints a network in the model language.
///
/// # Safety
/// `net` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_network_print(net: *const GsNetwork, out: *mut *mut c_char) -> GsStatus {
    guard(|| {
        let n = handle(net, "net")?;
        put(out, owned_string(print_network(&n.net)), "out")
    })
}

/// Number of automata, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gs_network_automaton_count(net: *const GsNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.net.automata.len())
}

/// Total number of edges, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gs_network_edge_count(net: *const GsNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.net.edge_count())
}

/// Counts the states reachable within `depth` steps with every variable
/// kept in `lo..=hi`. `exact` is set when the search was exhaustive.
///
/// # Safety
/// `net` must be a live handle; `count` and `exact` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_reach_count(
    net: *const GsNetwork,
    depth: u32,
    lo: i64,
    hi: i64,
    count: *mut usize,
    exact: *mut bool,
) -> GsStatus {
    guard(|| {
        let n = handle(net, "net")?;
        if lo > hi {
            return Err(fail(GsStatus::InvalidArgument, "lo exceeds hi"));
        }
        let reach = bfs_reach(&n.net, depth as usize, &DomainBounds::new(lo, hi))
            .map_err(|e| fail(GsStatus::SemanticsError, e))?;
        put(count, reach.len(), "count")?;
        put(exact, reach.is_exact(), "exact")
    })
}

/// Parses an `EF (...)` formula and checks it against `net`.
///
/// # Safety
/// `source` must be a nul-terminated string, `net` a live handle and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gs_query_parse(
    source: *const c_char,
    net: *const GsNetwork,
    out: *mut *mut GsQuery,
) -> GsStatus {
    guard(|| {
        let src = text(source, "source")?;
        let n = handle(net, "net")?;
        let formula = parse_query_for(src, &n.net).map_err(|e| fail(GsStatus::ParseError, e))?;
        put(out, Box::into_raw(Box::new(GsQuery { formula })), "out")
    })
}

/// # Safety
/// `q` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gs_query_free(q: *mut GsQuery) {
    if !q.is_null() {
        drop(Box::from_raw(q));
    }
}

/// Runs synthesis with unfolding bound `max`. `solver` may be null for
/// `z3` on the search path; `timeout_secs` <= 0 keeps the default.
///
/// # Safety
/// `net` and `query` must be live handles, `solver` null or a
/// nul-terminated string, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gs_synthesize(
    net: *const GsNetwork,
    query: *const GsQuery,
    max: u32,
    solver: *const c_char,
    timeout_secs: f64,
    out: *mut *mut GsReport,
) -> GsStatus {
    guard(|| {
        let n = handle(net, "net")?;
        let q = handle(query, "query")?;
        if max == 0 {
            return Err(fail(GsStatus::InvalidArgument, "max must be at least 1"));
        }
        let mut cfg = if solver.is_null() {
            SolverConfig::default()
        } else {
            SolverConfig::new(text(solver, "solver")?)
        };
        if timeout_secs > 0.0 && timeout_secs.is_finite() {
            cfg = cfg.with_timeout(Duration::from_secs_f64(timeout_secs));
        }
        let report = synthesize(&n.net, &q.formula, max as usize, cfg).map_err(|e| {
            let status = match e {
                guardsynth::synthesis::SynthesisError::Solver(_) => GsStatus::SolverError,
                _ => GsStatus::SynthesisError,
            };
            fail(status, e)
        })?;
        let r = GsReport {
            net: n.net.clone(),
            formula: q.formula.clone(),
            report,
        };
        put(out, Box::into_raw(Box::new(r)), "out")
    })
}

/// # Safety
/// `r` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gs_report_free(r: *mut GsReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gs_report_outcome(r: *const GsReport, out: *mut GsOutcome) -> GsStatus {
    guard(|| {
        let rep = handle(r, "report")?;
        put(out, rep.report.outcome.into(), "out")
    })
}

/// Number of stateful priorities, or 0 for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gs_report_priority_count(r: *const GsReport) -> usize {
    r.as_ref().map_or(0, |rep| rep.report.stateful.len())
}

/// The structured report as JSON.
///
/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gs_report_json(r: *const GsReport, out: *mut *mut c_char) -> GsStatus {
    guard(|| {
        let rep = handle(r, "report")?;
        let json = ReportFile::new(&rep.net, &rep.formula, &rep.report).to_json();
        put(out, owned_string(json), "out")
    })
}

/// Applies the report's priorities to `net`, yielding a new network.
///
/// # Safety
/// `net` and `r` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gs_transform(
    net: *const GsNetwork,
    r: *const GsReport,
    out: *mut *mut GsNetwork,
) -> GsStatus {
    guard(|| {
        let n = handle(net, "net")?;
        let rep = handle(r, "report")?;
        let t = transform_network(&n.net, &rep.report.stateful)
            .map_err(|e| fail(GsStatus::TransformError, e))?;
        put(out, Box::into_raw(Box::new(GsNetwork { net: t.transformed })), "out")
    })
}
