use std::path::Path;
use std::process::Command;

use orthoscalar_cli::document::{serialize, Document};
use orthoscalar_core::synthesis::{synthesize, SynthesisOptions};
use orthoscalar_core::{star_quiver, Quiver, Representation, TolerancePolicy, VertexId};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_orthoscalar"))
}

fn exit(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().expect("spawn");
    (out.status.code().expect("exit code"), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn equiangular(seed: u64) -> Representation {
    let q = star_quiver(3).unwrap();
    let dims = [(0, 2), (1, 1), (2, 1), (3, 1)].into_iter().map(|(v, d)| (VertexId(v), d)).collect();
    let chi = [(0, 1.0), (1, 2.0 / 3.0), (2, 2.0 / 3.0), (3, 2.0 / 3.0)]
        .into_iter()
        .map(|(v, x)| (VertexId(v), x))
        .collect();
    let opts = SynthesisOptions::with_seed(seed);
    synthesize(&q, &dims, &chi, &opts, &TolerancePolicy::default()).unwrap().converged().unwrap()
}

fn write(dir: &Path, name: &str, doc: Document) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serialize(&doc)).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn demo_remark6_holds() {
    let (code, out) = exit(&["demo-remark6"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("plain End dimension 2"), "{out}");
    assert!(out.contains("star End dimension 1"), "{out}");
    assert!(out.contains("rank_rel_tol"), "{out}");
}

#[test]
fn schur_on_direct_sum_fails() {
    let dir = tempfile::tempdir().unwrap();
    let t = equiangular(0);
    let sum = t.direct_sum(&t).unwrap();
    let f = write(dir.path(), "sum.json", Document::Representation(sum));
    assert_eq!(exit(&["schur", &f]).0, 1);
    let g = write(dir.path(), "t.json", Document::Representation(t));
    assert_eq!(exit(&["schur", &g]).0, 0);
}

#[test]
fn malformed_file_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ \"kind\": ").unwrap();
    let (code, out) = exit(&["check", path.to_str().unwrap()]);
    assert_eq!(code, 2, "{out}");
    assert!(out.contains("parse-error"), "{out}");
}

#[test]
fn missing_file_is_invalid_input() {
    assert_eq!(exit(&["check", "/nonexistent/t.json"]).0, 2);
}

#[test]
fn check_reads_stdin() {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = bin().args(["check", "-"]).stdin(Stdio::piped()).stdout(Stdio::piped()).spawn().unwrap();
    let text = serialize(&Document::Representation(equiangular(2)));
    child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn random_representation_is_not_orthoscalar() {
    let dir = tempfile::tempdir().unwrap();
    let q = star_quiver(3).unwrap();
    let dims = [(0, 2), (1, 1), (2, 1), (3, 1)].into_iter().map(|(v, d)| (VertexId(v), d)).collect();
    let t = Representation::random(&q, &dims, 5).unwrap();
    let f = write(dir.path(), "r.json", Document::Representation(t));
    assert_eq!(exit(&["check", &f]).0, 1);
}

#[test]
fn doc_format_outcome_matches_exit_code() {
    let (code, out) = exit(&["--format", "doc", "demo-remark6"]);
    assert_eq!(code, 0);
    match orthoscalar_cli::document::parse(&out).unwrap() {
        Document::Report(r) => assert_eq!(r.exit_code(), code),
        other => panic!("unexpected {}", other.kind()),
    }
}

#[test]
fn synthesize_then_project_then_rebuild() {
    let dir = tempfile::tempdir().unwrap();
    let q = write(dir.path(), "q.json", Document::Quiver(star_quiver(3).unwrap()));
    let rep = dir.path().join("t.json");
    let sys = dir.path().join("s.json");
    let back = dir.path().join("b.json");
    let (code, out) = exit(&[
        "--seed", "4", "--output", rep.to_str().unwrap(),
        "synthesize", &q, "--dims", "0:2,1:1,2:1,3:1", "--chi", "0:1,1:2/3,2:2/3,3:2/3",
    ]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(exit(&["--output", sys.to_str().unwrap(), "to-projections", rep.to_str().unwrap()]).0, 0);
    assert_eq!(exit(&["weights", sys.to_str().unwrap()]).0, 0);
    assert_eq!(exit(&["--output", back.to_str().unwrap(), "from-projections", sys.to_str().unwrap()]).0, 0);
    let (code, out) = exit(&["equiv", rep.to_str().unwrap(), back.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn unbalanced_synthesis_fails() {
    let dir = tempfile::tempdir().unwrap();
    let q = write(dir.path(), "q.json", Document::Quiver(star_quiver(3).unwrap()));
    let (code, out) = exit(&["synthesize", &q, "--dims", "0:1,1:1,2:1,3:1", "--chi", "0:1,1:1,2:1,3:1"]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("infeasible-balance"), "{out}");
}

#[test]
fn decompose_end_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let t = equiangular(0);
    let sum = t.direct_sum(&equiangular(9)).unwrap();
    let f = write(dir.path(), "sum.json", Document::Representation(sum));
    let (code, out) = exit(&["decompose", &f]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("2 summands"), "{out}");
    let (code, out) = exit(&["end", "--category", "star", &f]);
    assert_eq!(code, 0);
    assert!(out.contains("dim End = 4"), "{out}");
    let g = write(dir.path(), "t.json", Document::Representation(t));
    let (code, out) = exit(&["--seed", "3", "trace-theorem1", &g]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("endomorphism is scalar"), "{out}");
}

#[test]
fn lemma1_on_instance_file() {
    let dir = tempfile::tempdir().unwrap();
    let inst = orthoscalar_core::rigidity::random_valid_instance(5, 4, 0.5, 8).unwrap();
    let f = write(dir.path(), "i.json", Document::RescalingInstance(inst));
    let cert = dir.path().join("c.json");
    let (code, out) = exit(&["--output", cert.to_str().unwrap(), "lemma1", &f]);
    assert_eq!(code, 0, "{out}");
    assert!(matches!(
        orthoscalar_cli::document::parse(&std::fs::read_to_string(cert).unwrap()).unwrap(),
        Document::Certificate(_)
    ));
}

#[test]
fn wrong_document_kind_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "q.json", Document::Quiver(Quiver::a2()));
    assert_eq!(exit(&["check", &f]).0, 2);
}
