//! Agreement of the rule lemmatizer with a reference lemmatizer on a frozen
//! word list (`data/lemma_oracle.tsv`).

use qalign_core::lemma::LemmaRules;

const ORACLE: &str = include_str!("data/lemma_oracle.tsv");

fn rows() -> Vec<(&'static str, &'static str, &'static str)> {
    ORACLE
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let mut it = l.split('\t');
            (it.next().unwrap(), it.next().unwrap(), it.next().unwrap())
        })
        .collect()
}

#[test]
fn agrees_with_reference_lemmatizer() {
    let rules = LemmaRules::english();
    let rows = rows();
    assert!(rows.len() >= 200);
    let mismatches: Vec<String> = rows
        .iter()
        .filter(|(w, _, l)| rules.lemmatize(w) != *l)
        .map(|(w, pos, l)| format!("{w}/{pos}: got {} want {l}", rules.lemmatize(w)))
        .collect();
    let agreement = 1.0 - mismatches.len() as f64 / rows.len() as f64;
    eprintln!("lemma agreement {:.3} on {} words", agreement, rows.len());
    for m in &mismatches {
        eprintln!("  {m}");
    }
    assert!(agreement >= 0.95, "agreement {agreement:.3}");
}

#[test]
fn idempotent_on_oracle_words() {
    let rules = LemmaRules::english();
    for (w, _, l) in rows() {
        let once = rules.lemmatize(w);
        assert_eq!(rules.lemmatize(&once), once, "{w}");
        let lemma = rules.lemmatize(l);
        assert_eq!(rules.lemmatize(&lemma), lemma, "{l}");
    }
}
