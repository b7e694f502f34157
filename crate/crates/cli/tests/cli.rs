use std::io::Write;
use std::path::Path;
use std::process::{Command, Stdio};

use proptest::prelude::*;
use serde_json::Value;

use sepkit::{ComplexMatrix, HilbertDims, C64};
use sepkit_cli::document::{Document, Payload};

const BIN: &str = env!("CARGO_BIN_EXE_sepkit");

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn sepkit(args: &[&str], stdin: Option<&str>) -> Run {
    let mut child = Command::new(BIN)
        .args(args)
        .env_remove("SEPKIT_SEED")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    let out = child.wait_with_output().unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn ok(args: &[&str], stdin: Option<&str>) -> String {
    let r = sepkit(args, stdin);
    assert_eq!(r.code, 0, "{args:?} failed: {}", r.stderr);
    r.stdout
}

fn payload(text: &str) -> Value {
    let v: Value = serde_json::from_str(text).unwrap();
    v["payload"].clone()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn werner_half_fails_the_cut() {
    let state = ok(&["state", "make", "--name", "werner", "--p", "0.5"], None);
    let report = payload(&ok(&["ppt", "--cut", "1|2"], Some(&state)));
    assert!((report["min_eig_pt"].as_f64().unwrap() + 0.125).abs() < 1e-12);
    assert_eq!(report["passes"], Value::Bool(false));
}

#[test]
fn shifts_verify_and_witness_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let (u, w, m) = (
        dir.path().join("u.json"),
        dir.path().join("w.json"),
        dir.path().join("m.json"),
    );
    let raw = ok(&["upb", "builtin", "--name", "shifts"], None);
    ok(&["upb", "verify", "-o", path_str(&u)], Some(&raw));
    let verified: Value = serde_json::from_str(&std::fs::read_to_string(&u).unwrap()).unwrap();
    let eps = &verified["meta"]["certificates"]["epsilon"];
    assert!(eps["value"].as_f64().unwrap() > 0.0);
    assert_eq!(eps["converged"], Value::Bool(true));

    ok(
        &[
            "witness",
            "build",
            "--upb",
            path_str(&u),
            "--C",
            "identity",
            "-o",
            path_str(&w),
        ],
        None,
    );
    let rho = ok(
        &["state", "make", "--name", "maxmixed", "--dims", "2,2,2"],
        None,
    );
    let value = payload(&ok(&["witness", "eval", path_str(&w)], Some(&rho)));
    // Tr(P_S)/8 - epsilon
    let expected = 0.5 - eps["value"].as_f64().unwrap();
    assert!((value["value"].as_f64().unwrap() - expected).abs() < 1e-12);
    assert_eq!(value["detects"], Value::Bool(false));

    ok(
        &["map", "from-witness", path_str(&w), "-o", path_str(&m)],
        None,
    );
    let image = ok(&["map", "apply", path_str(&m), "--on", "2,3"], Some(&rho));
    let doc = Document::from_json(&image).unwrap();
    assert_eq!(doc.dims.as_slice(), &[2, 2]);
}

#[test]
fn maximally_mixed_is_separable() {
    let state = ok(
        &["state", "make", "--name", "maxmixed", "--dims", "2,2"],
        None,
    );
    let verdict = payload(&ok(&["decide", "--restarts", "8"], Some(&state)));
    assert_eq!(verdict["status"], "Separable");
}

#[test]
fn catalog_directory_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let empty = tempfile::tempdir().unwrap();
    let state = ok(&["state", "make", "--name", "pplus"], None);
    let verdict = payload(&ok(
        &["decide", "--catalog", path_str(empty.path())],
        Some(&state),
    ));
    assert_eq!(verdict["status"], "Entangled");
    assert_eq!(verdict["certificate"]["type"], "violated_cut");

    // a non-witness file in the catalog is rejected
    std::fs::write(dir.path().join("a.json"), &state).unwrap();
    let r = sepkit(&["decide", "--catalog", path_str(dir.path())], Some(&state));
    assert_eq!(r.code, 1);
    assert!(
        r.stderr.contains("expected a Witness document"),
        "{}",
        r.stderr
    );
}

#[test]
fn random_separable_is_byte_reproducible() {
    let args = [
        "state",
        "random-separable",
        "--dims",
        "2,3",
        "--k",
        "4",
        "--seed",
        "11",
    ];
    let a = ok(&args, None);
    assert_eq!(a, ok(&args, None));
    let verdict = payload(&ok(&["decide", "--restarts", "8"], Some(&a)));
    assert_eq!(verdict["status"], "Separable");
    assert_eq!(verdict["certificate"]["type"], "decomposition");

    let from_env = Command::new(BIN)
        .args(["state", "random-separable", "--dims", "2,3", "--k", "4"])
        .env("SEPKIT_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(from_env.stdout).unwrap(), a);
}

#[test]
fn optimize_reports_certified_extremum() {
    let dir = tempfile::tempdir().unwrap();
    let op = dir.path().join("x.json");
    let pplus = ok(&["state", "make", "--name", "pplus"], None);
    std::fs::write(&op, pplus).unwrap();
    let args = [
        "optimize",
        "--op",
        path_str(&op),
        "--direction",
        "max",
        "--restarts",
        "64",
        "--seed",
        "7",
    ];
    let r = payload(&ok(&args, None));
    assert!((r["value"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(r["converged"], Value::Bool(true));
}

#[test]
fn exit_codes_and_messages() {
    let r = sepkit(&["state", "make", "--name", "werner", "--p", "1.5"], None);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("outside [0, 1]"), "{}", r.stderr);

    let r = sepkit(&["ppt", "--cut", "1|2"], Some("{"));
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("malformed document"));

    let r = sepkit(&["frobnicate"], None);
    assert_eq!(r.code, 1);

    let state = ok(
        &["state", "make", "--name", "maxmixed", "--dims", "2,2,2"],
        None,
    );
    let r = sepkit(&["ppt", "--cut", "1|2"], Some(&state));
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("must partition"), "{}", r.stderr);

    let raw = ok(&["upb", "builtin", "--name", "shifts"], None);
    let r = sepkit(&["upb", "verify", "--grid", "3"], Some(&raw));
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert!(r.stderr.contains("not certified"));

    let r = sepkit(&["witness", "build", "--upb", "/nonexistent/u.json"], None);
    assert_eq!(r.code, 1);
}

#[test]
fn unverified_set_cannot_build_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let u = dir.path().join("u.json");
    std::fs::write(&u, ok(&["upb", "builtin", "--name", "shifts"], None)).unwrap();
    let r = sepkit(&["witness", "build", "--upb", path_str(&u)], None);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("not been verified"), "{}", r.stderr);
}

#[test]
fn human_output_is_tabular() {
    let state = ok(&["state", "make", "--name", "singlet"], None);
    let text = ok(&["--human", "semisep"], Some(&state));
    assert!(text.contains("min_eig_pt"));
    assert!(text.contains("-5.0000000000000000e-1"), "{text}");
    assert!(text.contains("all cuts pass: false"));
}

#[test]
fn in_process_run_matches_binary() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = sepkit_cli::run(
        [
            "sepkit", "state", "make", "--name", "pplus", "--dims", "3,3",
        ],
        &mut out,
        &mut err,
    );
    assert_eq!(code, 0);
    let expected = ok(&["state", "make", "--name", "pplus", "--dims", "3,3"], None);
    assert_eq!(String::from_utf8(out).unwrap(), expected);
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
        Just(5e-324),
        Just(f64::MAX),
    ]
}

proptest! {
    #[test]
    fn documents_round_trip_bit_exactly(values in prop::collection::vec((finite(), finite()), 9)) {
        let m = ComplexMatrix::from_fn(3, 3, |i, j| {
            let (re, im) = values[3 * i + j];
            C64::new(re, im)
        });
        let doc = Document::new(HilbertDims::new(vec![3]).unwrap(), Payload::Operator { matrix: m.clone() });
        let text = doc.to_json();
        let back = Document::from_json(&text).unwrap();
        let Payload::Operator { matrix } = &back.payload else { panic!("kind changed") };
        for (a, b) in matrix.data().iter().zip(m.data()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        prop_assert_eq!(back.to_json(), text);
    }
}
