//! Line-delimited JSON reading and writing for every record family
//! (pairs, alignment sets, coreference annotations, fusion instances).
//!
//! Blank lines are skipped. Errors carry the 1-based line number.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub fn read_jsonl<T: DeserializeOwned>(input: impl BufRead) -> Result<Vec<T>> {
    let mut records = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| Error::Jsonl {
            line: idx + 1,
            reason: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

pub fn write_jsonl<T: Serialize>(mut out: impl Write, records: &[T]) -> Result<()> {
    for record in records {
        serde_json::to_writer(&mut out, record).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_jsonl_file<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    read_jsonl(BufReader::new(File::open(path)?))
}

pub fn write_jsonl_file<T: Serialize>(path: impl AsRef<Path>, records: &[T]) -> Result<()> {
    write_jsonl(BufWriter::new(File::create(path)?), records)
}

pub fn to_jsonl_string<T: Serialize>(records: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_jsonl(&mut buf, records)?;
    Ok(String::from_utf8(buf).expect("serde_json emits utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::*;

    #[test]
    fn empty_input_is_empty_collection() {
        let pairs: Vec<SentencePairInstance> = read_jsonl("".as_bytes()).unwrap();
        assert!(pairs.is_empty());
        let sets: Vec<AlignmentSet> = read_jsonl("\n\n".as_bytes()).unwrap();
        assert!(sets.is_empty());
    }

    #[test]
    fn missing_key_names_the_key_and_line() {
        let text = "{\"pair_id\":\"p1\",\"provenance\":\"GOLD\",\"alignments\":[]}\n\
                    {\"pair_id\":\"p2\",\"alignments\":[]}\n";
        let err = read_jsonl::<AlignmentSet>(text.as_bytes()).unwrap_err();
        match err {
            Error::Jsonl { line, reason } => {
                assert_eq!(line, 2);
                assert!(reason.contains("provenance"), "{reason}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn malformed_json_reports_line() {
        let err = read_jsonl::<AlignmentSet>("{not json\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Jsonl { line: 1, .. }));
    }

    #[test]
    fn pair_fixture_matches_programmatic_construction() {
        let line = r#"{"pair_id":"p1","split":"DEV","a":{"doc_id":"d1","sent_id":"3","tokens":["Wade","bought","it","."],"context_tokens":[],"corpus_tag":"ECB"},"b":{"doc_id":"d2","sent_id":"0","tokens":["They","sold","it"],"context_tokens":["Hi","."],"corpus_tag":"ECB"},"qas_a":[{"qa_id":"a0","predicate_index":1,"question_tokens":["Who","bought","something","?"],"question_predicate_index":1,"answers":[{"start":0,"end":1}]}],"qas_b":[]}"#;
        let parsed: Vec<SentencePairInstance> = read_jsonl(line.as_bytes()).unwrap();
        let expected = SentencePairInstance {
            pair_id: "p1".into(),
            split: Split::Dev,
            a: SentenceText::new("d1", "3", &["Wade", "bought", "it", "."]).with_tag(CorpusTag::Ecb),
            b: SentenceText::new("d2", "0", &["They", "sold", "it"])
                .with_context(&["Hi", "."])
                .with_tag(CorpusTag::Ecb),
            qas_a: vec![QARelation::new(
                "a0",
                1,
                &["Who", "bought", "something", "?"],
                1,
                &[(0, 1)],
            )],
            qas_b: vec![],
        };
        assert_eq!(parsed, vec![expected.clone()]);
        // Written form is byte-identical to the input for schema-ordered keys.
        assert_eq!(to_jsonl_string(&[expected]).unwrap(), format!("{line}\n"));
    }
}
