//! Lemma baseline: align QA pairs whose predicates, and the head words of
//! their answers, share a lemma.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::stopwords::is_stopword;
use crate::types::{Alignment, AlignmentSet, AnswerSpan, Provenance, SentencePairInstance, SentenceText};

/// Irregular forms: `(word, lemma)`. Lemmas are themselves fixed points.
const IRREGULAR: &[(&str, &str)] = &[
    // be / have / do
    ("am", "be"), ("is", "be"), ("are", "be"), ("was", "be"), ("were", "be"), ("been", "be"),
    ("being", "be"), ("'s", "'s"), ("has", "have"), ("had", "have"), ("having", "have"),
    ("does", "do"), ("did", "do"), ("done", "do"), ("doing", "do"), ("goes", "go"),
    ("went", "go"), ("gone", "go"), ("going", "go"),
    // strong and irregular verbs
    ("arose", "arise"), ("arisen", "arise"), ("awoke", "awake"), ("awoken", "awake"),
    ("bore", "bear"), ("borne", "bear"), ("beat", "beat"), ("beaten", "beat"),
    ("became", "become"), ("began", "begin"), ("begun", "begin"), ("beginning", "begin"),
    ("bent", "bend"), ("bet", "bet"), ("bound", "bind"), ("bit", "bite"), ("bitten", "bite"),
    ("bled", "bleed"), ("blew", "blow"), ("blown", "blow"), ("broke", "break"),
    ("broken", "break"), ("bred", "breed"), ("brought", "bring"), ("built", "build"),
    ("burnt", "burn"), ("burst", "burst"), ("bought", "buy"), ("caught", "catch"),
    ("chose", "choose"), ("chosen", "choose"), ("clung", "cling"), ("came", "come"),
    ("coming", "come"), ("cost", "cost"), ("crept", "creep"), ("cut", "cut"), ("dealt", "deal"),
    ("dug", "dig"), ("drew", "draw"), ("drawn", "draw"), ("dreamt", "dream"), ("drank", "drink"),
    ("drunk", "drink"), ("drove", "drive"), ("driven", "drive"), ("ate", "eat"), ("eaten", "eat"),
    ("fell", "fall"), ("fallen", "fall"), ("fed", "feed"), ("felt", "feel"), ("fought", "fight"),
    ("found", "find"), ("fled", "flee"), ("flung", "fling"), ("flew", "fly"), ("flown", "fly"),
    ("forbade", "forbid"), ("forbidden", "forbid"), ("forecast", "forecast"),
    ("foresaw", "foresee"), ("foreseen", "foresee"), ("forgot", "forget"),
    ("forgotten", "forget"), ("forgave", "forgive"), ("forgiven", "forgive"),
    ("froze", "freeze"), ("frozen", "freeze"), ("got", "get"), ("gotten", "get"),
    ("getting", "get"), ("gave", "give"), ("given", "give"), ("ground", "grind"),
    ("grew", "grow"), ("grown", "grow"), ("hung", "hang"), ("heard", "hear"), ("hid", "hide"),
    ("hidden", "hide"), ("hit", "hit"), ("held", "hold"), ("hurt", "hurt"), ("kept", "keep"),
    ("knelt", "kneel"), ("knew", "know"), ("known", "know"), ("laid", "lay"), ("led", "lead"),
    ("leapt", "leap"), ("learnt", "learn"), ("left", "leave"), ("lent", "lend"), ("let", "let"),
 ("lain", "lie"), ("lying", "lie"), ("lit", "light"), ("lost", "lose"),
    ("made", "make"), ("meant", "mean"), ("met", "meet"), ("mistook", "mistake"),
    ("mistaken", "mistake"), ("overcame", "overcome"), ("overtook", "overtake"),
    ("overtaken", "overtake"), ("overthrew", "overthrow"), ("overthrown", "overthrow"),
    ("paid", "pay"), ("proved", "prove"), ("proven", "prove"), ("put", "put"), ("quit", "quit"),
    ("read", "read"), ("rebuilt", "rebuild"), ("rid", "rid"), ("rode", "ride"),
    ("ridden", "ride"), ("rang", "ring"), ("rung", "ring"), ("rose", "rise"), ("risen", "rise"),
    ("ran", "run"), ("running", "run"), ("said", "say"), ("saw", "see"), ("seen", "see"),
    ("seeing", "see"), ("sought", "seek"), ("sold", "sell"), ("sent", "send"), ("set", "set"),
    ("shook", "shake"), ("shaken", "shake"), ("shed", "shed"), ("shone", "shine"),
    ("shot", "shoot"), ("showed", "show"), ("shown", "show"), ("shrank", "shrink"),
    ("shrunk", "shrink"), ("shut", "shut"), ("sang", "sing"), ("sung", "sing"),
    ("sank", "sink"), ("sunk", "sink"), ("sat", "sit"), ("slept", "sleep"), ("slid", "slide"),
    ("slung", "sling"), ("spoke", "speak"), ("spoken", "speak"), ("sped", "speed"),
    ("spent", "spend"), ("spun", "spin"), ("spat", "spit"), ("split", "split"),
    ("spread", "spread"), ("sprang", "spring"), ("sprung", "spring"), ("stood", "stand"),
    ("stole", "steal"), ("stolen", "steal"), ("stuck", "stick"), ("stung", "sting"),
    ("stank", "stink"), ("strode", "stride"), ("struck", "strike"), ("stricken", "strike"),
    ("strove", "strive"), ("striven", "strive"), ("swore", "swear"), ("sworn", "swear"),
    ("swept", "sweep"), ("swam", "swim"), ("swum", "swim"), ("swung", "swing"),
    ("took", "take"), ("taken", "take"), ("taught", "teach"), ("tore", "tear"),
    ("torn", "tear"), ("told", "tell"), ("thought", "think"), ("threw", "throw"),
    ("thrown", "throw"), ("thrust", "thrust"), ("trod", "tread"), ("trodden", "tread"),
    ("understood", "understand"), ("undertook", "undertake"), ("undertaken", "undertake"),
    ("upheld", "uphold"), ("upset", "upset"), ("woke", "wake"), ("woken", "wake"),
    ("wore", "wear"), ("worn", "wear"), ("wove", "weave"), ("woven", "weave"), ("wept", "weep"),
    ("won", "win"), ("wound", "wind"), ("withdrew", "withdraw"), ("withdrawn", "withdraw"),
    ("withheld", "withhold"), ("wrung", "wring"), ("wrote", "write"), ("written", "write"),
    // y-stem and ee-stem verbs that the suffix rules get wrong
    ("died", "die"), ("dies", "die"), ("dying", "die"), ("lied", "lie"), ("lies", "lie"),
    ("tied", "tie"), ("ties", "tie"), ("tying", "tie"), ("freed", "free"), ("agreed", "agree"),
    ("proceed", "proceed"), ("succeed", "succeed"), ("exceed", "exceed"), ("indeed", "indeed"),
    ("need", "need"), ("seed", "seed"), ("speed", "speed"), ("feed", "feed"), ("bleed", "bleed"),
    // irregular nouns
    ("men", "man"), ("women", "woman"), ("children", "child"), ("people", "people"),
    ("feet", "foot"), ("teeth", "tooth"), ("mice", "mouse"), ("geese", "goose"),
    ("knives", "knife"), ("wives", "wife"), ("lives", "life"), ("leaves", "leave"),
    ("halves", "half"), ("shelves", "shelf"), ("wolves", "wolf"), ("thieves", "thief"),
    ("heroes", "hero"), ("potatoes", "potato"), ("tomatoes", "tomato"), ("data", "data"),
    ("criteria", "criterion"), ("phenomena", "phenomenon"), ("police", "police"),
    ("news", "news"), ("series", "series"), ("species", "species"),
    // -s words that are not plurals
    ("this", "this"), ("his", "his"), ("its", "its"), ("us", "us"), ("yes", "yes"),
    ("thus", "thus"), ("always", "always"), ("perhaps", "perhaps"), ("whereas", "whereas"),
    ("analysis", "analysis"), ("crisis", "crisis"), ("basis", "basis"), ("status", "status"),
    ("campus", "campus"), ("virus", "virus"), ("bonus", "bonus"), ("census", "census"),
    ("bus", "bus"), ("buses", "bus"), ("gas", "gas"), ("lens", "lens"), ("chaos", "chaos"),
    ("ethics", "ethics"), ("politics", "politics"), ("economics", "economics"),
    // -ing / -ed words that are not inflections
    ("nothing", "nothing"), ("something", "something"), ("anything", "anything"),
    ("everything", "everything"), ("morning", "morning"), ("evening", "evening"),
    ("during", "during"), ("ceiling", "ceiling"), ("hundred", "hundred"), ("bed", "bed"),
    ("red", "red"), ("sacred", "sacred"), ("naked", "naked"), ("wicked", "wicked"),
];


fn irregular() -> &'static HashMap<&'static str, &'static str> {
    static TABLE: OnceLock<HashMap<&'static str, &'static str>> = OnceLock::new();
    TABLE.get_or_init(|| IRREGULAR.iter().copied().collect())
}

/// Rule-based English lemmatizer: an irregular-form table followed by
/// longest-match suffix rules.
#[derive(Debug, Clone)]
pub struct LemmaRules {
    exceptions: HashMap<String, String>,
    /// `(suffix, replacement)`, tried longest suffix first.
    suffix_rules: Vec<(&'static str, &'static str)>,
}

impl Default for LemmaRules {
    fn default() -> Self {
        LemmaRules::english()
    }
}

impl LemmaRules {
    pub fn english() -> Self {
        let mut suffix_rules = vec![
            ("sses", "ss"),
            ("zzes", "zz"),
            ("shes", "sh"),
            ("ches", "ch"),
            ("xes", "x"),
            ("ies", "y"),
            ("ied", "y"),
            ("ing", ""),
            ("ed", ""),
            ("s", ""),
        ];
        suffix_rules.sort_by_key(|(suffix, _)| std::cmp::Reverse(suffix.len()));
        let mut exceptions: HashMap<String, String> = irregular()
            .iter()
            .map(|(w, l)| (w.to_string(), l.to_string()))
            .collect();
        // Table lemmas map to themselves ("bred" -> "breed" must not go on to
        // "bre").
        for lemma in irregular().values() {
            exceptions.entry(lemma.to_string()).or_insert_with(|| lemma.to_string());
        }
        LemmaRules {
            exceptions,
            suffix_rules,
        }
    }

    /// Adds or overrides an exception entry.
    pub fn with_exception(mut self, word: &str, lemma: &str) -> Self {
        self.exceptions.insert(word.to_lowercase(), lemma.to_lowercase());
        self
    }

    pub fn exception_count(&self) -> usize {
        self.exceptions.len()
    }

    /// Lowercased lemma of `word`. Total and idempotent.
    pub fn lemmatize(&self, word: &str) -> String {
        let mut current = word.to_lowercase();
        // Suffix rules strictly shorten the word and table lemmas are fixed
        // points, so this terminates.
        loop {
            let next = self.lemmatize_once(&current);
            if next == current {
                return current;
            }
            current = next;
        }
    }

    fn lemmatize_once(&self, lower: &str) -> String {
        if let Some(lemma) = self.exceptions.get(lower) {
            return lemma.clone();
        }
        if !lower.chars().all(|c| c.is_ascii_lowercase()) {
            return lower.to_string();
        }
        for &(suffix, replacement) in &self.suffix_rules {
            let Some(stem) = lower.strip_suffix(suffix) else {
                continue;
            };
            if let Some(lemma) = apply_rule(stem, suffix, replacement) {
                return lemma;
            }
            // A matching suffix whose guard fails blocks shorter rules.
            return lower.to_string();
        }
        lower.to_string()
    }
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn has_vowel(s: &str) -> bool {
    s.bytes().any(|c| is_vowel(c) || c == b'y')
}

fn apply_rule(stem: &str, suffix: &str, replacement: &str) -> Option<String> {
    match suffix {
        "s" => {
            let b = stem.as_bytes();
            if stem.len() < 3 || !has_vowel(stem) {
                return None;
            }
            let last = b[b.len() - 1];
            // glass, focus, axis, ...
            if matches!(last, b's' | b'u' | b'i') || stem.ends_with('\'') {
                return None;
            }
            Some(stem.to_string())
        }
        "ies" | "ied" => {
            if stem.len() < 2 {
                return None;
            }
            Some(format!("{stem}{replacement}"))
        }
        "ing" | "ed" => {
            if stem.len() < 2 || !has_vowel(stem) {
                return None;
            }
            Some(restore_stem(stem))
        }
        _ => Some(format!("{stem}{replacement}")),
    }
}

/// Repairs a stem left after removing `-ed` / `-ing`.
fn restore_stem(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    let last = b[n - 1];
    let prev = if n >= 2 { b[n - 2] } else { 0 };
    let before = if n >= 3 { b[n - 3] } else { 0 };
    let consonant = |c: u8| c != 0 && !is_vowel(c);

    // stopped -> stop, but called -> call, missed -> miss
    if n >= 3 && last == prev && consonant(last) && !matches!(last, b'l' | b's' | b'z') {
        return stem[..n - 1].to_string();
    }
    // agreed/guaranteed -> ...ee
    if last == b'e' && prev == b'e' {
        return stem.to_string();
    }
    let needs_e = match last {
        // received, forced
        b'v' | b'c' => true,
        // judged, charged, managed, changed
        b'g' => matches!(prev, b'd' | b'r') || is_vowel(prev) || (prev == b'n' && before == b'a'),
        // seized, realized
        b'z' => prev != b'z',
        // caused, closed, released
        b's' => is_vowel(prev),
        // handled, settled / ruled
        b'l' => (consonant(prev) && !matches!(prev, b'l' | b'r') && n >= 3) || is_short_cvc(b),
        // retired, acquired / captured, secured
        b'r' if matches!(prev, b'i' | b'u') => consonant(before) || (prev == b'i' && before == b'u'),
        // combined, examined
        b'n' if prev == b'i' => consonant(before),
        // located, executed, promoted, decided, traded, included, exploded
        b't' if matches!(prev, b'a' | b'u' | b'o') => consonant(before) || is_short_cvc(b),
        b'd' if matches!(prev, b'a' | b'u' | b'o' | b'i') => consonant(before) || is_short_cvc(b),
        // invoked, liked (but walked, looked, picked)
        b'k' => is_vowel(prev) && consonant(before),
        // assumed, consumed
        b'm' if prev == b'u' => consonant(before),
        _ => is_short_cvc(b),
    };
    if needs_e {
        format!("{stem}e")
    } else {
        stem.to_string()
    }
}

/// One-syllable consonant-vowel-consonant stem (fir, hop, vot), where the
/// dropped `-e` is usual.
fn is_short_cvc(b: &[u8]) -> bool {
    let n = b.len();
    if n < 3 {
        return false;
    }
    let (c1, v, c2) = (b[n - 3], b[n - 2], b[n - 1]);
    let consonant = |c: u8| !is_vowel(c);
    if !(consonant(c1) && is_vowel(v) && consonant(c2)) || matches!(c2, b'w' | b'x' | b'y') {
        return false;
    }
    // Exactly one vowel group in the stem.
    let groups = b
        .iter()
        .zip(std::iter::once(&0u8).chain(b.iter()))
        .filter(|(&c, &p)| is_vowel(c) && !is_vowel(p))
        .count();
    groups == 1
}

fn default_rules() -> &'static LemmaRules {
    static RULES: OnceLock<LemmaRules> = OnceLock::new();
    RULES.get_or_init(LemmaRules::english)
}

/// Lemmatizes with the built-in English rules.
pub fn lemmatize(word: &str) -> String {
    default_rules().lemmatize(word)
}

/// Head token of `span`.
///
/// With dependency heads (`heads[i]` is the head of token `i`, `None` for the
/// root) the head is the leftmost token whose head lies outside the span.
/// Without them it is the rightmost token that is not a function word, or the
/// rightmost token if every token is one.
pub fn answer_head(span: AnswerSpan, sent: &SentenceText, heads: Option<&[Option<usize>]>) -> usize {
    debug_assert!(span.is_valid_for(sent.len()));
    if let Some(heads) = heads {
        let outside = (span.start..span.end).find(|&i| match heads.get(i).copied().flatten() {
            Some(h) => !span.contains(h),
            None => true,
        });
        if let Some(i) = outside {
            return i;
        }
    }
    (span.start..span.end)
        .rev()
        .find(|&i| !is_stopword(&sent.tokens[i]) && sent.tokens[i].chars().any(char::is_alphanumeric))
        .unwrap_or(span.end - 1)
}

/// Per-sentence dependency heads for the two sides of a pair.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PairHeads {
    pub pair_id: String,
    pub a: Vec<Option<usize>>,
    pub b: Vec<Option<usize>>,
}

/// Whether the lemma criterion holds for one QA from each side.
pub fn lemma_criterion(
    pair: &SentencePairInstance,
    left: &crate::types::QARelation,
    right: &crate::types::QARelation,
    heads: Option<&PairHeads>,
) -> bool {
    let rules = default_rules();
    let pred_a = rules.lemmatize(&pair.a.tokens[left.predicate_index]);
    let pred_b = rules.lemmatize(&pair.b.tokens[right.predicate_index]);
    if pred_a != pred_b {
        return false;
    }
    let heads_a = heads.map(|h| h.a.as_slice());
    let heads_b = heads.map(|h| h.b.as_slice());
    let head_lemmas = |qa: &crate::types::QARelation, sent: &SentenceText, hs| -> Vec<String> {
        qa.answers
            .iter()
            .map(|&s| rules.lemmatize(&sent.tokens[answer_head(s, sent, hs)]))
            .collect()
    };
    let la = head_lemmas(left, &pair.a, heads_a);
    let lb = head_lemmas(right, &pair.b, heads_b);
    la.iter().any(|x| lb.contains(x))
}

/// Every cross-side QA pair satisfying the lemma criterion, in
/// `(left qa order, right qa order)`.
pub fn lemma_align(pair: &SentencePairInstance, heads: Option<&PairHeads>) -> AlignmentSet {
    let mut set = AlignmentSet::new(pair.pair_id.clone(), Provenance::Lemma);
    for left in &pair.qas_a {
        for right in &pair.qas_b {
            if lemma_criterion(pair, left, right, heads) {
                set.alignments
                    .push(Alignment::one_to_one(left.qa_id.clone(), right.qa_id.clone()));
            }
        }
    }
    set
}
