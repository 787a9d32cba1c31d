use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use guardsynth_ffi::*;

const N1: &str = include_str!("../../core/models/n1.net");

fn last_error() -> String {
    unsafe { CStr::from_ptr(gs_last_error()) }.to_string_lossy().into_owned()
}

fn parse(src: &str) -> *mut GsNetwork {
    let src = CString::new(src).unwrap();
    let mut net = ptr::null_mut();
    assert_eq!(unsafe { gs_network_parse(src.as_ptr(), &mut net) }, GsStatus::Ok);
    net
}

#[test]
fn parse_print_and_count() {
    let net = parse(N1);
    unsafe {
        assert_eq!(gs_network_automaton_count(net), 2);
        assert_eq!(gs_network_edge_count(net), 11);
        let mut text = ptr::null_mut();
        assert_eq!(gs_network_print(net, &mut text), GsStatus::Ok);
        let printed = CStr::from_ptr(text).to_str().unwrap().to_owned();
        gs_string_free(text);
        assert_eq!(guardsynth::parse_network(&printed).unwrap(), guardsynth::fixtures::n1());
        let (mut count, mut exact) = (0usize, false);
        assert_eq!(gs_reach_count(net, 30, -64, 64, &mut count, &mut exact), GsStatus::Ok);
        assert!(exact);
        assert_eq!(count, guardsynth::semantics::bfs_reach(&guardsynth::fixtures::n1(), 30, &Default::default()).unwrap().len());
        gs_network_free(net);
    }
}

#[test]
fn errors_set_status_and_message() {
    let bad = CString::new("network N { automaton A { init s; locations t; } }").unwrap();
    let mut net = ptr::null_mut();
    unsafe {
        assert_eq!(gs_network_parse(bad.as_ptr(), &mut net), GsStatus::ParseError);
        assert!(net.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(gs_network_parse(ptr::null(), &mut net), GsStatus::NullArgument);
        assert_eq!(gs_network_print(ptr::null(), &mut ptr::null_mut()), GsStatus::NullArgument);
        assert_eq!(gs_network_edge_count(ptr::null()), 0);
        let invalid = [0xffu8, 0];
        assert_eq!(gs_network_parse(invalid.as_ptr().cast(), &mut net), GsStatus::InvalidUtf8);
        gs_network_free(ptr::null_mut());
        gs_string_free(ptr::null_mut());
    }
}

#[test]
fn synthesize_and_transform_n1() {
    let net = parse(N1);
    let q = CString::new("EF (A0.5 && A1.5)").unwrap();
    unsafe {
        let mut query = ptr::null_mut();
        assert_eq!(gs_query_parse(q.as_ptr(), net, &mut query), GsStatus::Ok);
        let mut rep = ptr::null_mut();
        assert_eq!(gs_synthesize(net, query, 15, ptr::null(), 0.0, &mut rep), GsStatus::Ok);
        let mut outcome = GsOutcome::BoundExhausted;
        assert_eq!(gs_report_outcome(rep, &mut outcome), GsStatus::Ok);
        assert_eq!(outcome, GsOutcome::PrioritiesFound);
        assert_eq!(gs_report_priority_count(rep), 2);

        let mut json = ptr::null_mut();
        assert_eq!(gs_report_json(rep, &mut json), GsStatus::Ok);
        let report = guardsynth::report::ReportFile::from_json(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(report.stateful.len(), 2);
        gs_string_free(json);

        let mut rho = ptr::null_mut();
        assert_eq!(gs_transform(net, rep, &mut rho), GsStatus::Ok);
        assert_eq!(gs_network_edge_count(rho), 11);
        let mut again = ptr::null_mut();
        assert_eq!(gs_transform(rho, rep, &mut again), GsStatus::TransformError);
        assert!(last_error().contains("positional"));

        let bad = CString::new("EF (A0.9)").unwrap();
        let mut q2 = ptr::null_mut();
        assert_eq!(gs_query_parse(bad.as_ptr(), net, &mut q2), GsStatus::ParseError);
        assert_eq!(gs_synthesize(net, query, 0, ptr::null(), 0.0, &mut rep), GsStatus::InvalidArgument);
        let missing = CString::new("/no/such/solver").unwrap();
        let mut r2 = ptr::null_mut();
        assert_eq!(gs_synthesize(net, query, 3, missing.as_ptr(), 0.0, &mut r2), GsStatus::SolverError);

        gs_network_free(rho);
        gs_report_free(rep);
        gs_query_free(query);
        gs_network_free(net);
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(gs_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(crate_dir().join("include/guardsynth.h")).unwrap();
    for name in [
        "gs_network_parse", "gs_network_free", "gs_query_parse", "gs_synthesize",
        "gs_report_json", "gs_transform", "gs_reach_count", "gs_string_free", "gs_last_error",
        "typedef struct GsNetwork GsNetwork;", "GS_STATUS_OK = 0",
    ] {
        assert!(header.contains(name), "{name} missing");
    }
}

/// Compiles and runs the C smoke test against the static library when a C
/// compiler and the archive are available.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let Some(lib_dir) = exe.parent().and_then(Path::parent) else { return };
    let archive = lib_dir.join("libguardsynth_ffi.a");
    if !archive.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C toolchain or static library");
        return;
    }
    let out_dir = tempfile::tempdir().unwrap();
    let bin = out_dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.starts_with("outcome 0 priorities 3 edges 3"), "{stdout}");
}
