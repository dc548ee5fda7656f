use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::CommandFactory;
use rayon::prelude::*;
use serde::Serialize;

use qalign_core::dataset::{build_duc_pairs, build_ecb_pairs, build_mn_pairs, SentenceRecord};
use qalign_core::ecb::{annotation_for, compare, induce, Comparison, CorefAnnotation};
use qalign_core::eval::coverage_counts;
use qalign_core::fusion::{
    augment, classify_consolidating, consolidation_by_system, ConsolidationReport, FusionInstance, FusionOutput,
    SENTENCE_SEPARATOR,
};
use qalign_core::lemma::PairHeads;
use qalign_core::scorer::transport::connect;
use qalign_core::scorer::{ConstantScorer, ExternalScorer, GoldOracle, LemmaScorer, ScorerSpec};
use qalign_core::{
    candidate_records, corpus_f1, decode, exact_match_f1, lemma_align, score_all, validate_pair, AlignmentSet, DecoderConfig, Prf,
    Provenance, Scorer, SentencePairInstance,
};

use crate::io::{read_records, write_records, write_report, ReportFormat};
use crate::{selfcheck, server, BuildArgs, Cli, Command, DecodeArgs, Source};

pub fn run(cli: Cli) -> Result<ExitCode> {
    let format = cli.report_format;
    match cli.command {
        Command::Lemma { pairs, out, heads } => lemma(&pairs, &out, heads.as_deref()),
        Command::Decode(args) => decode_pairs(&args),
        Command::ExportCandidates { pairs, gold, heads, out } => {
            export_candidates(&pairs, gold.as_deref(), heads.as_deref(), &out)
        }
        Command::Eval { pred, gold, report } => eval(&pred, &gold, report.as_deref(), format),
        Command::InduceEcb {
            pairs,
            coref,
            out,
            gold,
            report,
            skip_uncovered,
        } => induce_ecb(&pairs, &coref, &out, gold.as_deref(), report.as_deref(), skip_uncovered, format),
        Command::BuildDataset(args) => build_dataset(&args),
        Command::AugmentFusion {
            instances,
            out,
            no_markup,
        } => augment_fusion(&instances, &out, no_markup),
        Command::AnalyzeConsolidation {
            outputs,
            instances,
            report,
            details,
        } => analyze_consolidation(&outputs, &instances, report.as_deref(), details.as_deref(), format),
        Command::Selfcheck => Ok(selfcheck::run(cli.seed)),
        Command::ScoreServer(args) => server::run(&args).map(|_| ExitCode::SUCCESS),
    }
}

fn usage_error(message: impl std::fmt::Display) -> ! {
    Cli::command().error(ErrorKind::MissingRequiredArgument, message).exit()
}

/// Pairs with unique ids and no validation errors; warnings are logged.
fn load_pairs(path: &Path) -> Result<Vec<SentencePairInstance>> {
    let pairs: Vec<SentencePairInstance> = read_records(path)?;
    let mut seen = BTreeSet::new();
    for (i, pair) in pairs.iter().enumerate() {
        let line = i + 1;
        if !seen.insert(pair.pair_id.as_str()) {
            bail!("{}: line {line}: duplicate pair_id {}", path.display(), pair.pair_id);
        }
        for v in validate_pair(pair) {
            if v.is_error() {
                bail!("{}: line {line}: pair {}: {v}", path.display(), pair.pair_id);
            }
            log::warn!("{}: line {line}: pair {}: {v}", path.display(), pair.pair_id);
        }
    }
    Ok(pairs)
}

/// Alignment sets keyed by pair id; duplicate ids are an error.
fn load_sets(path: &Path) -> Result<BTreeMap<String, AlignmentSet>> {
    let mut by_id = BTreeMap::new();
    for (i, set) in read_records::<AlignmentSet>(path)?.into_iter().enumerate() {
        let id = set.pair_id.clone();
        if by_id.insert(id.clone(), set).is_some() {
            bail!("{}: line {}: duplicate pair_id {id}", path.display(), i + 1);
        }
    }
    Ok(by_id)
}

fn load_heads(path: Option<&Path>) -> Result<Vec<PairHeads>> {
    path.map(read_records).transpose().map(Option::unwrap_or_default)
}

fn sorted(mut sets: Vec<AlignmentSet>) -> Vec<AlignmentSet> {
    sets.sort_by(|x, y| x.pair_id.cmp(&y.pair_id));
    sets
}

fn lemma(pairs: &Path, out: &Path, heads: Option<&Path>) -> Result<ExitCode> {
    let pairs = load_pairs(pairs)?;
    let heads: BTreeMap<String, PairHeads> = load_heads(heads)?
        .into_iter()
        .map(|h| (h.pair_id.clone(), h))
        .collect();
    let sets = sorted(pairs.par_iter().map(|p| lemma_align(p, heads.get(&p.pair_id))).collect());
    let total: usize = sets.iter().map(AlignmentSet::len).sum();
    write_records(out, &sets)?;
    eprintln!("lemma: {} pairs, {total} alignments", sets.len());
    Ok(ExitCode::SUCCESS)
}

fn build_scorer(args: &DecodeArgs) -> Result<Box<dyn Scorer>> {
    let spec: ScorerSpec = args.scorer.parse()?;
    Ok(match spec {
        ScorerSpec::Lemma => Box::new(LemmaScorer::with_heads(load_heads(args.heads.as_deref())?)),
        ScorerSpec::Constant(x) => Box::new(ConstantScorer(x)),
        ScorerSpec::Gold(path) => {
            let gold: Vec<AlignmentSet> = read_records(Path::new(&path))?;
            Box::new(GoldOracle::new(&gold))
        }
        ScorerSpec::External(addr) => {
            let addr = args.scorer_addr.clone().filter(|a| !a.is_empty()).unwrap_or(addr);
            if addr.is_empty() {
                bail!("external scorer needs an address (external:ADDR or ALIGN_SCORER_ADDR)");
            }
            let transport = connect(&addr, Duration::from_secs(args.timeout_secs))?;
            Box::new(ExternalScorer::new(transport).with_batch_size(args.batch_size))
        }
    })
}

fn decode_pairs(args: &DecodeArgs) -> Result<ExitCode> {
    if !(0.0..=1.0).contains(&args.tau) {
        usage_error(format!("--tau {} outside [0, 1]", args.tau));
    }
    let pairs = load_pairs(&args.pairs)?;
    let scorer = build_scorer(args)?;
    let cfg = DecoderConfig::with_tau(args.tau);
    let sets: Vec<AlignmentSet> = pairs
        .par_iter()
        .map(|p| {
            let edges = score_all(p, scorer.as_ref()).with_context(|| format!("scoring pair {}", p.pair_id))?;
            Ok(decode(&p.pair_id, &edges, &cfg))
        })
        .collect::<Result<_>>()?;
    let sets = sorted(sets);
    let total: usize = sets.iter().map(AlignmentSet::len).sum();
    write_records(&args.out, &sets)?;
    eprintln!("decode: {} pairs, {total} alignments (scorer {}, tau {})", sets.len(), args.scorer, args.tau);
    Ok(ExitCode::SUCCESS)
}

fn export_candidates(pairs: &Path, gold: Option<&Path>, heads: Option<&Path>, out: &Path) -> Result<ExitCode> {
    let mut pairs = load_pairs(pairs)?;
    pairs.sort_by(|x, y| x.pair_id.cmp(&y.pair_id));
    let gold = gold.map(load_sets).transpose()?;
    let heads: BTreeMap<String, PairHeads> = load_heads(heads)?
        .into_iter()
        .map(|h| (h.pair_id.clone(), h))
        .collect();
    let empty = |id: &str| AlignmentSet::new(id, Provenance::Gold);
    let mut records = Vec::new();
    let mut positives = 0;
    for pair in &pairs {
        let g = gold.as_ref().map(|g| g.get(&pair.pair_id).cloned().unwrap_or_else(|| empty(&pair.pair_id)));
        let rs = candidate_records(pair, g.as_ref(), heads.get(&pair.pair_id))
            .with_context(|| format!("pair {}", pair.pair_id))?;
        positives += rs.iter().filter(|r| r.label == Some(1)).count();
        records.extend(rs);
    }
    write_records(out, &records)?;
    eprintln!("export-candidates: {} pairs, {} candidates, {positives} positive", pairs.len(), records.len());
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize)]
struct PairScore {
    pair_id: String,
    #[serde(flatten)]
    prf: Prf,
    full_agreement: bool,
}

#[derive(Debug, Serialize)]
struct EvalReport {
    corpus: Prf,
    per_pair: Vec<PairScore>,
    full_agreement_rate: f64,
    mean_pair_f1: f64,
    pairs_without_prediction: usize,
    pairs_without_gold: usize,
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    if n == 0 {
        return 1.0;
    }
    values.sum::<f64>() / n as f64
}

fn eval(pred: &Path, gold: &Path, report: Option<&Path>, format: ReportFormat) -> Result<ExitCode> {
    let preds = load_sets(pred)?;
    let golds = load_sets(gold)?;
    let ids: BTreeSet<&String> = preds.keys().chain(golds.keys()).collect();
    let empty = |id: &str| AlignmentSet::new(id, Provenance::Model);
    let (mut pred_sets, mut gold_sets) = (Vec::new(), Vec::new());
    for id in &ids {
        pred_sets.push(preds.get(*id).cloned().unwrap_or_else(|| empty(id)));
        gold_sets.push(golds.get(*id).cloned().unwrap_or_else(|| empty(id)));
    }
    let missing_pred = ids.iter().filter(|id| !preds.contains_key(**id)).count();
    let missing_gold = ids.iter().filter(|id| !golds.contains_key(**id)).count();
    if missing_pred + missing_gold > 0 {
        log::warn!("{missing_pred} pairs lack a prediction and {missing_gold} lack gold; missing sets count as empty");
    }
    let per_pair = pred_sets
        .iter()
        .zip(&gold_sets)
        .map(|(p, g)| {
            Ok(PairScore {
                pair_id: p.pair_id.clone(),
                prf: exact_match_f1(p, g)?,
                full_agreement: p.as_set() == g.as_set(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report_body = EvalReport {
        corpus: corpus_f1(&pred_sets, &gold_sets)?,
        full_agreement_rate: mean(per_pair.iter().map(|p| if p.full_agreement { 1.0 } else { 0.0 })),
        mean_pair_f1: mean(per_pair.iter().map(|p| p.prf.f1)),
        per_pair,
        pairs_without_prediction: missing_pred,
        pairs_without_gold: missing_gold,
    };
    write_report(report, &report_body, format)?;
    let c = &report_body.corpus;
    eprintln!(
        "eval: {} pairs, P {:.4} R {:.4} F1 {:.4}; full agreement {:.4}",
        ids.len(),
        c.precision,
        c.recall,
        c.f1,
        report_body.full_agreement_rate
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize)]
struct PairComparison {
    pair_id: String,
    #[serde(flatten)]
    comparison: Comparison,
}

#[derive(Debug, Serialize)]
struct InductionReport {
    pairs: usize,
    /// Pooled over all pairs.
    induced_covered_by_gold: f64,
    gold_covered_by_induced: f64,
    per_pair: Vec<PairComparison>,
}

fn ratio((num, den): (usize, usize)) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

fn induce_ecb(
    pairs: &Path,
    coref: &Path,
    out: &Path,
    gold: Option<&Path>,
    report: Option<&Path>,
    skip_uncovered: bool,
    format: ReportFormat,
) -> Result<ExitCode> {
    let pairs = load_pairs(pairs)?;
    let annotations: Vec<CorefAnnotation> = read_records(coref)?;
    for (i, a) in annotations.iter().enumerate() {
        a.validate().with_context(|| format!("{}: line {}", coref.display(), i + 1))?;
    }
    let mut induced = Vec::new();
    let mut skipped = 0;
    for pair in &pairs {
        let result = match annotation_for(pair, &annotations) {
            Some(a) => induce(pair, a),
            None => Err(qalign_core::Error::MissingCoverage {
                doc_id: format!("{} / {}", pair.a.doc_id, pair.b.doc_id),
            }),
        };
        match result {
            Ok(set) => induced.push(set),
            Err(e @ qalign_core::Error::MissingCoverage { .. }) if skip_uncovered => {
                log::warn!("skipping pair {}: {e}", pair.pair_id);
                skipped += 1;
            }
            Err(e) => return Err(anyhow!(e).context(format!("pair {}", pair.pair_id))),
        }
    }
    let induced = sorted(induced);
    write_records(out, &induced)?;
    let total: usize = induced.iter().map(AlignmentSet::len).sum();
    eprintln!("induce-ecb: {} pairs, {total} alignments, {skipped} skipped", induced.len());

    if let Some(gold) = gold {
        let golds = load_sets(gold)?;
        let mut per_pair = Vec::new();
        let (mut ind_counts, mut gold_counts) = ((0, 0), (0, 0));
        for set in &induced {
            let Some(g) = golds.get(&set.pair_id) else {
                log::warn!("no gold for pair {}", set.pair_id);
                continue;
            };
            let (a, b) = coverage_counts(set, g);
            ind_counts = (ind_counts.0 + a, ind_counts.1 + b);
            let (a, b) = coverage_counts(g, set);
            gold_counts = (gold_counts.0 + a, gold_counts.1 + b);
            per_pair.push(PairComparison {
                pair_id: set.pair_id.clone(),
                comparison: compare(set, g)?,
            });
        }
        let body = InductionReport {
            pairs: per_pair.len(),
            induced_covered_by_gold: ratio(ind_counts),
            gold_covered_by_induced: ratio(gold_counts),
            per_pair,
        };
        write_report(report, &body, format)?;
        eprintln!(
            "induce-ecb: induced covered by gold {:.4}, gold covered by induced {:.4}",
            body.induced_covered_by_gold, body.gold_covered_by_induced
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn required<'a>(value: &'a Option<std::path::PathBuf>, flag: &str, source: &str) -> &'a Path {
    value
        .as_deref()
        .unwrap_or_else(|| usage_error(format!("--source {source} requires {flag}")))
}

fn build_dataset(args: &BuildArgs) -> Result<ExitCode> {
    let input = match args.source {
        Source::Ecb => required(&args.coref, "--coref", "ecb"),
        Source::Duc => required(&args.scu_clusters, "--scu-clusters", "duc"),
        Source::Mn => required(&args.span_alignments, "--span-alignments", "mn"),
    };
    let sentences: Vec<SentenceRecord> = read_records(&args.sentences)?;
    let mut pairs = match args.source {
        Source::Ecb => build_ecb_pairs(&sentences, &read_records::<CorefAnnotation>(input)?, &args.topics)?,
        Source::Duc => build_duc_pairs(&read_records(input)?, &sentences)?,
        Source::Mn => build_mn_pairs(&read_records(input)?, &sentences)?,
    };
    for pair in &pairs {
        if let Some(v) = validate_pair(pair).into_iter().find(|v| v.is_error()) {
            bail!("pair {}: {v}", pair.pair_id);
        }
    }
    pairs.sort_by(|x, y| x.pair_id.cmp(&y.pair_id));
    write_records(&args.out, &pairs)?;
    eprintln!("build-dataset: {} pairs", pairs.len());
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize)]
struct AugmentedInstance {
    cluster_id: String,
    input: String,
    target: String,
}

fn augment_fusion(instances: &Path, out: &Path, no_markup: bool) -> Result<ExitCode> {
    let mut instances: Vec<FusionInstance> = read_records(instances)?;
    instances.sort_by(|x, y| x.cluster_id.cmp(&y.cluster_id));
    let augmented = instances
        .par_iter()
        .map(|inst| {
            inst.validate()?;
            let input = if no_markup {
                let sources: Vec<String> = inst.sources.iter().map(|s| s.tokens.join(" ")).collect();
                sources.join(&format!(" {SENTENCE_SEPARATOR} "))
            } else {
                augment(inst)?
            };
            Ok(AugmentedInstance {
                cluster_id: inst.cluster_id.clone(),
                input,
                target: inst.target.join(" "),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_records(out, &augmented)?;
    eprintln!("augment-fusion: {} instances", augmented.len());
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize)]
struct OutputDetail<'a> {
    cluster_id: &'a str,
    system: &'a str,
    #[serde(flatten)]
    report: ConsolidationReport,
}

fn analyze_consolidation(
    outputs: &Path,
    instances: &Path,
    report: Option<&Path>,
    details: Option<&Path>,
    format: ReportFormat,
) -> Result<ExitCode> {
    let mut outputs: Vec<FusionOutput> = read_records(outputs)?;
    let instances: Vec<FusionInstance> = read_records(instances)?;
    for inst in &instances {
        inst.validate()?;
    }
    outputs.sort_by(|x, y| (&x.system, &x.cluster_id).cmp(&(&y.system, &y.cluster_id)));
    let systems = consolidation_by_system(&outputs, &instances)?;
    if let Some(path) = details {
        let by_cluster: BTreeMap<&str, &FusionInstance> =
            instances.iter().map(|i| (i.cluster_id.as_str(), i)).collect();
        let rows: Vec<OutputDetail> = outputs
            .iter()
            .map(|o| OutputDetail {
                cluster_id: &o.cluster_id,
                system: &o.system,
                report: classify_consolidating(&o.tokens, &by_cluster[o.cluster_id.as_str()].sources),
            })
            .collect();
        write_records(path, &rows)?;
    }
    write_report(report, &serde_json::json!({ "systems": systems }), format)?;
    for (system, s) in &systems {
        eprintln!("{system}: {}/{} consolidating ({:.4})", s.consolidating, s.outputs, s.rate);
    }
    Ok(ExitCode::SUCCESS)
}
