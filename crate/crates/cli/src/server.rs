//! A small scorer speaking the line protocol, for wiring tests and demos.

use std::collections::BTreeSet;
use std::io::{self, BufReader, Write};
use std::net::TcpListener;

use anyhow::{Context, Result};
use clap::Args;

use qalign_core::candidate::{ANSWER_CLOSE, ANSWER_OPEN, PRED_CLOSE, PRED_OPEN, QUESTION_SEP};
use qalign_core::lemmatize;
use qalign_core::scorer::transport::serve_lines;
use qalign_core::scorer::{ScoreItem, ScoreRequest, ScoreResponse};

#[derive(Debug, Args)]
pub struct ServerArgs {
    /// Answer every candidate with this score instead of lemma overlap.
    #[arg(long)]
    constant: Option<f64>,
    /// Serve TCP connections on this address; prints the bound address.
    #[arg(long)]
    listen: Option<String>,
}

/// Lemmas of the predicate and answer tokens in the sentence part.
fn marked_lemmas(text: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut depth = 0usize;
    let sentence = text.split_once(QUESTION_SEP).map_or(text, |(_, s)| s);
    for tok in sentence.split(' ') {
        match tok {
            PRED_OPEN | ANSWER_OPEN => depth += 1,
            PRED_CLOSE | ANSWER_CLOSE => depth = depth.saturating_sub(1),
            _ if depth > 0 => {
                out.insert(lemmatize(tok));
            }
            _ => {}
        }
    }
    out
}

/// Jaccard overlap of the marked lemmas on both sides.
fn overlap(item: &ScoreItem) -> f64 {
    let (a, b) = (marked_lemmas(&item.text_a), marked_lemmas(&item.text_b));
    let union = a.union(&b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

fn respond(args: &ServerArgs, request: &ScoreRequest) -> ScoreResponse {
    match args.constant {
        Some(x) => ScoreResponse::for_request(request, |_| x),
        None => ScoreResponse::for_request(request, overlap),
    }
}

pub fn run(args: &ServerArgs) -> Result<()> {
    let Some(addr) = &args.listen else {
        return serve_lines(io::stdin().lock(), io::stdout().lock(), |r| respond(args, r))
            .context("serving standard input");
    };
    let listener = TcpListener::bind(addr).with_context(|| format!("cannot listen on {addr}"))?;
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "{}", listener.local_addr()?)?;
    stdout.flush()?;
    drop(stdout);
    std::thread::scope(|scope| {
        for stream in listener.incoming() {
            let stream = match stream {
                Ok(s) => s,
                Err(e) => {
                    log::warn!("accept: {e}");
                    continue;
                }
            };
            scope.spawn(move || {
                let reader = match stream.try_clone() {
                    Ok(s) => BufReader::new(s),
                    Err(e) => return log::warn!("connection: {e}"),
                };
                if let Err(e) = serve_lines(reader, &stream, |r| respond(args, r)) {
                    log::warn!("connection: {e}");
                }
            });
        }
    });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_reads_only_marked_tokens() {
        let item = ScoreItem {
            candidate_id: "c0".into(),
            text_a: "Who [P] fired [/P] someone ? [Q] They [P] fired [/P] [A] the coach [/A] .".into(),
            text_b: "Who [P] fires [/P] someone ? [Q] Owners [P] fire [/P] [A] coaches [/A] today .".into(),
        };
        // {fire, the, coach} vs {fire, coach}
        assert!((overlap(&item) - 2.0 / 3.0).abs() < 1e-12);
        let none = ScoreItem {
            text_a: "x [Q] y".into(),
            ..item
        };
        assert_eq!(overlap(&none), 0.0);
    }
}
