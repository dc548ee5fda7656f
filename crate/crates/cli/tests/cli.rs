use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;

use qalign_core::fixtures;
use qalign_core::jsonl::{read_jsonl_file, write_jsonl_file};
use qalign_core::scorer::{ScoreRequest, ScoreResponse};
use qalign_core::{lemma_align, AlignmentSet};

const BIN: &str = env!("CARGO_BIN_EXE_align");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn align(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("ALIGN_SCORER_ADDR")
        .env_remove("ALIGN_DATASET_DIR")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = align(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn sets(path: &Path) -> Vec<AlignmentSet> {
    read_jsonl_file(path).unwrap()
}

fn decode_with(scorer: &str, out: &Path) -> Vec<AlignmentSet> {
    ok(&["decode", "--pairs", p(&fixture("pairs.jsonl")), "--scorer", scorer, "--out", p(out)]);
    sets(out)
}

#[test]
fn version_lists_schema_versions() {
    let text = ok(&["--version"]);
    for (name, v) in qalign_core::SCHEMA_VERSIONS {
        assert!(text.contains(&format!("{name} v{v}")), "{text}");
    }
}

#[test]
fn eval_of_identical_files_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let gold = fixture("gold.jsonl");
    ok(&["eval", "--pred", p(&gold), "--gold", p(&gold), "--report", p(&report)]);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["corpus"]["f1"], 1.0);
    assert_eq!(v["full_agreement_rate"], 1.0);
    assert_eq!(v["mean_pair_f1"], 1.0);
    assert_eq!(v["per_pair"].as_array().unwrap().len(), fixtures::gold_pairs().len());
}

#[test]
fn eval_counts_missing_predictions_as_empty() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("pred.jsonl");
    write_jsonl_file(&pred, &[fixtures::fire_cheeks_gold()]).unwrap();
    let text = ok(&["eval", "--pred", p(&pred), "--gold", p(&fixture("gold.jsonl"))]);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["corpus"]["tp"], 1);
    assert_eq!(v["corpus"]["fn"], 5);
    assert_eq!(v["pairs_without_prediction"], 3);
    assert_eq!(v["full_agreement_rate"], 0.25);
}

#[test]
fn decode_below_tau_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.jsonl");
    ok(&["decode", "--pairs", p(&fixture("pairs.jsonl")), "--scorer", "constant:0.3", "--tau", "0.5", "--out", p(&out)]);
    let decoded = sets(&out);
    assert_eq!(decoded.len(), fixtures::gold_pairs().len());
    assert!(decoded.iter().all(AlignmentSet::is_empty));
}

#[test]
fn decode_with_gold_oracle_reproduces_gold() {
    let dir = tempfile::tempdir().unwrap();
    let decoded = decode_with(&format!("gold:{}", p(&fixture("gold.jsonl"))), &dir.path().join("out.jsonl"));
    let gold = sets(&fixture("gold.jsonl"));
    assert_eq!(decoded.len(), gold.len());
    for d in &decoded {
        let g = gold.iter().find(|g| g.pair_id == d.pair_id).unwrap();
        assert_eq!(d.as_set(), g.as_set(), "{}", d.pair_id);
    }
}

#[test]
fn export_candidates_labels_gold_edges() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cands.jsonl");
    ok(&["export-candidates", "--pairs", p(&fixture("pairs.jsonl")), "--gold", p(&fixture("gold.jsonl")), "--out", p(&out)]);
    let records: Vec<qalign_core::CandidateRecord> = read_jsonl_file(&out).unwrap();
    let expected: usize = fixtures::gold_pairs().iter().map(|(p, _)| p.qas_a.len() * p.qas_b.len()).sum();
    assert_eq!(records.len(), expected);
    let gold_edges: usize = fixtures::gold_pairs().iter().map(|(_, g)| g.len()).sum();
    assert_eq!(records.iter().filter(|r| r.label == Some(1)).count(), gold_edges);
    assert!(records.iter().all(|r| r.text_a.contains("[Q]") && r.label.is_some()));
}

#[test]
fn lemma_command_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lemma.jsonl");
    ok(&["lemma", "--pairs", p(&fixture("pairs.jsonl")), "--out", p(&out)]);
    let mut expected: Vec<_> = fixtures::gold_pairs().iter().map(|(pair, _)| lemma_align(pair, None)).collect();
    expected.sort_by(|a, b| a.pair_id.cmp(&b.pair_id));
    assert_eq!(sets(&out), expected);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    let pairs = fixture("pairs.jsonl");
    ok(&["decode", "--pairs", p(&pairs), "--scorer", "lemma", "--out", p(&a)]);
    ok(&["--threads", "1", "decode", "--pairs", p(&pairs), "--scorer", "lemma", "--out", p(&b)]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn exec_scorer_matches_in_process_constant() {
    let dir = tempfile::tempdir().unwrap();
    let local = decode_with("constant:0.75", &dir.path().join("local.jsonl"));
    let remote = decode_with(&format!("external:exec:{BIN} score-server --constant 0.75"), &dir.path().join("remote.jsonl"));
    assert_eq!(local.len(), remote.len());
    for (l, r) in local.iter().zip(&remote) {
        assert_eq!(l.pair_id, r.pair_id);
        assert_eq!(l.alignments, r.alignments);
    }
    assert!(local.iter().any(|s| !s.is_empty()));
}

#[test]
fn env_var_overrides_external_address() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.jsonl");
    let status = Command::new(BIN)
        .args(["decode", "--pairs", p(&fixture("pairs.jsonl")), "--scorer", "external:127.0.0.1:1", "--out", p(&out)])
        .env("ALIGN_SCORER_ADDR", format!("exec:{BIN} score-server --constant 0.0"))
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert!(sets(&out).iter().all(AlignmentSet::is_empty));
}

#[test]
fn tcp_scorer_agrees_with_exec_scorer() {
    let mut server = Command::new(BIN)
        .args(["score-server", "--listen", "127.0.0.1:0"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut addr = String::new();
    BufReader::new(server.stdout.take().unwrap()).read_line(&mut addr).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let tcp = decode_with(&format!("external:tcp://{}", addr.trim()), &dir.path().join("tcp.jsonl"));
    let exec = decode_with(&format!("external:exec:{BIN} score-server"), &dir.path().join("exec.jsonl"));
    server.kill().unwrap();
    server.wait().unwrap();
    assert_eq!(tcp, exec);
    assert!(tcp.iter().any(|s| !s.is_empty()));
}

/// Minimal HTTP endpoint answering every candidate with `score`.
fn http_scorer(score: f64) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            std::thread::spawn(move || {
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                loop {
                    let mut length = 0usize;
                    let mut line = String::new();
                    loop {
                        line.clear();
                        if reader.read_line(&mut line).unwrap_or(0) == 0 {
                            return;
                        }
                        if line == "\r\n" {
                            break;
                        }
                        if let Some((k, v)) = line.split_once(':') {
                            if k.eq_ignore_ascii_case("content-length") {
                                length = v.trim().parse().unwrap();
                            }
                        }
                    }
                    let mut body = vec![0; length];
                    reader.read_exact(&mut body).unwrap();
                    let request: ScoreRequest = serde_json::from_slice(&body).unwrap();
                    let reply = ScoreResponse::for_request(&request, |_| score).to_line();
                    write!(
                        stream,
                        "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{reply}",
                        reply.len()
                    )
                    .unwrap();
                }
            });
        }
    });
    format!("http://{addr}/score")
}

#[test]
fn http_scorer_matches_in_process_constant() {
    let url = http_scorer(0.6);
    let dir = tempfile::tempdir().unwrap();
    let remote = decode_with(&format!("external:{url}"), &dir.path().join("http.jsonl"));
    let local = decode_with("constant:0.6", &dir.path().join("local.jsonl"));
    for (l, r) in local.iter().zip(&remote) {
        assert_eq!(l.alignments, r.alignments);
    }
    assert_eq!(local.len(), remote.len());
}

#[test]
fn failing_scorer_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = align(&[
        "decode",
        "--pairs",
        p(&fixture("pairs.jsonl")),
        "--scorer",
        "external:exec:echo not-json",
        "--out",
        p(&dir.path().join("out.jsonl")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("request"));
}

#[test]
fn out_of_range_constant_is_rejected() {
    let out = align(&["decode", "--pairs", p(&fixture("pairs.jsonl")), "--scorer", "constant:1.5", "--out", "-"]);
    assert!(!out.status.success());
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(align(&["decode", "--bogus"]).status.code(), Some(2));
    assert_eq!(align(&["build-dataset", "--source", "ecb", "--sentences", "x", "--out", "y"]).status.code(), Some(2));
    assert_eq!(align(&["build-dataset", "--source", "nope", "--sentences", "x", "--out", "y"]).status.code(), Some(2));
}

#[test]
fn malformed_input_names_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("pairs.jsonl");
    let good = std::fs::read_to_string(fixture("pairs.jsonl")).unwrap();
    let first = good.lines().next().unwrap();
    std::fs::write(&pairs, format!("{first}\n{{\"pair_id\": 3}}\n")).unwrap();
    let out = align(&["lemma", "--pairs", p(&pairs), "--out", "-"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("pairs.jsonl") && err.contains("line 2"), "{err}");
}

#[test]
fn invalid_pair_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("pairs.jsonl");
    let mut pair = fixtures::fire_cheeks_pair();
    pair.qas_a[0].predicate_index = 999;
    write_jsonl_file(&pairs, &[pair]).unwrap();
    let out = align(&["lemma", "--pairs", p(&pairs), "--out", "-"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fire-cheeks"));
}

#[test]
fn selfcheck_passes_on_pristine_checkout() {
    let out = align(&["selfcheck"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{text}");
    assert!(!text.contains("FAIL"), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 7, "{text}");
}

#[test]
fn induce_ecb_with_gold_report() {
    let dir = tempfile::tempdir().unwrap();
    let (out, report) = (dir.path().join("induced.jsonl"), dir.path().join("cmp.json"));
    let pairs = dir.path().join("pairs.jsonl");
    write_jsonl_file(&pairs, &[fixtures::ecb_redundancy_pair(), fixtures::charged_filed_pair()]).unwrap();
    ok(&[
        "induce-ecb",
        "--pairs",
        p(&pairs),
        "--coref",
        p(&fixture("coref.jsonl")),
        "--out",
        p(&out),
        "--gold",
        p(&fixture("gold.jsonl")),
        "--report",
        p(&report),
    ]);
    let induced = sets(&out);
    assert_eq!(induced.iter().map(AlignmentSet::len).collect::<Vec<_>>(), [1, 2]);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let per_pair = v["per_pair"].as_array().unwrap();
    let cf = per_pair.iter().find(|r| r["pair_id"] == "charged-filed").unwrap();
    assert_eq!(cf["gold_covered_by_induced"], 0.5);
    assert_eq!(cf["induced_covered_by_gold"], 1.0);
}

#[test]
fn induce_ecb_uncovered_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("pairs.jsonl");
    write_jsonl_file(&pairs, &[fixtures::fire_cheeks_pair(), fixtures::charged_filed_pair()]).unwrap();
    let coref = fixture("coref.jsonl");
    let out = align(&["induce-ecb", "--pairs", p(&pairs), "--coref", p(&coref), "--out", "-"]);
    assert_eq!(out.status.code(), Some(1));
    let text = ok(&["induce-ecb", "--pairs", p(&pairs), "--coref", p(&coref), "--out", "-", "--skip-uncovered"]);
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn build_dataset_duc_attaches_qas() {
    let dir = tempfile::tempdir().unwrap();
    let sentences = dir.path().join("sentences.jsonl");
    let clusters = dir.path().join("scu.jsonl");
    std::fs::write(
        &sentences,
        concat!(
            r#"{"doc_id":"sum-a","sent_id":"0","tokens":["An","Egyptian","bomb-maker","was","arrested","."],"split":"DEV"}"#,
            "\n",
            r#"{"doc_id":"sum-b","sent_id":"0","tokens":["Police","arrested","the","bomb-maker","."],"split":"DEV","#,
            r#""qas":[{"qa_id":"q0","predicate_index":1,"question_tokens":["Who","was","arrested","?"],"#,
            r#""question_predicate_index":2,"answers":[{"start":2,"end":4}]}]}"#,
            "\n"
        ),
    )
    .unwrap();
    std::fs::write(
        &clusters,
        r#"{"scu_id":"1","label":"Bomb-maker arrested","contributors":[{"doc_id":"sum-a","sent_id":"0","span":{"start":2,"end":5}},{"doc_id":"sum-b","sent_id":"0","span":{"start":1,"end":4}}]}"#,
    )
    .unwrap();
    let out = dir.path().join("pairs.jsonl");
    ok(&["build-dataset", "--source", "duc", "--sentences", p(&sentences), "--scu-clusters", p(&clusters), "--out", p(&out)]);
    let pairs: Vec<qalign_core::SentencePairInstance> = read_jsonl_file(&out).unwrap();
    assert_eq!(pairs.len(), 1);
    assert_eq!(pairs[0].pair_id, "DUC:sum-a:0|sum-b:0");
    assert_eq!(pairs[0].qas_b.len(), 1);
    assert_eq!(pairs[0].split, qalign_core::Split::Dev);
}

#[test]
fn augment_fusion_marks_aligned_spans() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("aug.jsonl");
    ok(&["augment-fusion", "--instances", p(&fixture("fusion.jsonl")), "--out", p(&out)]);
    let rows: Vec<Value> = read_jsonl_file(&out).unwrap();
    assert_eq!(rows[0]["input"], fixtures::POLICE_DOGS_AUGMENTED);
    ok(&["augment-fusion", "--instances", p(&fixture("fusion.jsonl")), "--out", p(&out), "--no-markup"]);
    let rows: Vec<Value> = read_jsonl_file(&out).unwrap();
    let plain = rows[0]["input"].as_str().unwrap();
    assert!(!plain.contains("[P") && plain.matches("</s>").count() == 2, "{plain}");
}

#[test]
fn consolidation_rates_per_system() {
    let dir = tempfile::tempdir().unwrap();
    let (report, details) = (dir.path().join("rates.json"), dir.path().join("details.jsonl"));
    ok(&[
        "analyze-consolidation",
        "--outputs",
        p(&fixture("fusion_outputs.jsonl")),
        "--instances",
        p(&fixture("fusion.jsonl")),
        "--report",
        p(&report),
        "--details",
        p(&details),
    ]);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["systems"]["fuse-align"]["rate"], 1.0);
    assert_eq!(v["systems"]["baseline"]["rate"], 0.0);
    let rows: Vec<Value> = read_jsonl_file(&details).unwrap();
    assert_eq!(rows.len(), 2);
}
