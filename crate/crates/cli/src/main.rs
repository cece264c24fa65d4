mod config;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tweetade::corpus::{
    clean_overlapping_spans, load_classification_dataset, load_labeled_rows, load_span_dataset, load_spans,
    load_tweets, summarize, write_labeled_rows, write_spans, write_tweets, LabeledDataset, LoadOptions,
};
use tweetade::eval::{median_aggregate, score_classification, score_spans, LabelMap, MetricsReport, SpanMatchMode};
use tweetade::models::{
    load_classifier, load_tagger, majority_vote, save_classifier, save_tagger, write_predictions, BaselineClassifier,
    BaselineTagger, Classifier, FileClassifier, FileTagger, Prediction, Tagger, TaggerConfig, TrainConfig,
};
use tweetade::normalize::{EmojiMode, NormalizationConfig, Normalizer, Projection, StripMode};
use tweetade::pipeline::{run_batch, BatchOptions};
use tweetade::resample::{apply_plan, class_counts, SamplingPlan};
use tweetade::tokenize::{align_spans_to_bio, encode, load_vocab, BpeVocab};
use tweetade::{LabelScheme, TOOL_VERSION};

use config::{load_config, RunConfig};

/// Batch tools for mining adverse drug effect mentions from tweets.
///
/// Settings can also come from a `key = value` file given with --config;
/// flags take precedence over file values.
#[derive(Parser, Debug)]
#[command(name = "tweetade", version, about, long_about = None)]
struct Cli {
    /// Run configuration file (`key = value` lines, `#` comments).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Maximum worker threads for parallel stages (0 = one per core).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Input TSV files start with a header line to skip.
    #[arg(long, global = true)]
    header: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that a dataset (and optional span file) loads cleanly.
    Validate(DataArgs),
    /// Print per-class counts as JSON.
    Summarize(DataArgs),
    /// Replace or strip mentions, URLs and emoji; project spans along.
    Normalize(NormalizeArgs),
    /// Random oversampling then undersampling of a two-class dataset.
    Resample(ResampleArgs),
    /// Byte-level BPE token ids and byte offsets as JSON lines.
    Tokenize(TokenizeArgs),
    /// Train a baseline model.
    #[command(subcommand)]
    Train(TrainCommand),
    /// Apply a trained baseline model to tweets.
    Predict(PredictArgs),
    /// Classify every tweet, then extract spans from ADE tweets only.
    Pipeline(PipelineArgs),
    /// Score predictions against gold annotations.
    #[command(subcommand)]
    Score(ScoreCommand),
    /// Combine classification prediction files by majority vote.
    Vote(VoteArgs),
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Tweets TSV: `id<TAB>text[<TAB>label]`.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Label scheme of the third column.
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<LabelScheme>,
    /// Span TSV: `id<TAB>start<TAB>end<TAB>surface`.
    #[arg(long, value_name = "PATH")]
    spans: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct NormArgs {
    /// Emoji handling: keep or demojize (default demojize for `normalize`, keep otherwise).
    #[arg(long, value_parser = parse_from_str::<EmojiMode>)]
    emoji: Option<EmojiMode>,
    /// Entity handling: none (replace with tokens) or strip_entities.
    #[arg(long, value_parser = parse_from_str::<StripMode>)]
    strip: Option<StripMode>,
    /// Replacement for @mentions.
    #[arg(long)]
    user_token: Option<String>,
    /// Replacement for URLs.
    #[arg(long)]
    url_token: Option<String>,
}

#[derive(Args, Debug)]
struct NormalizeArgs {
    /// Tweets TSV; a third label column is carried through.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Normalized tweets TSV to write.
    #[arg(long, value_name = "PATH")]
    output: PathBuf,
    /// Label scheme of the third column, if present.
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<LabelScheme>,
    /// Span TSV on the original tweets to project.
    #[arg(long, value_name = "PATH", requires = "spans_output")]
    spans: Option<PathBuf>,
    /// Projected span TSV to write.
    #[arg(long, value_name = "PATH", requires = "spans")]
    spans_output: Option<PathBuf>,
    #[command(flatten)]
    norm: NormArgs,
}

#[derive(Args, Debug)]
struct ResampleArgs {
    /// Classification TSV.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Resampled classification TSV to write.
    #[arg(long, value_name = "PATH")]
    output: PathBuf,
    /// Label scheme: binary-ADE or ternary-COVID.
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<LabelScheme>,
    /// Target minority/majority ratio after oversampling, in (0, 1].
    #[arg(long)]
    oversample: Option<f64>,
    /// Target minority/majority ratio after undersampling, in (0, 1].
    #[arg(long)]
    undersample: Option<f64>,
    /// Random seed (default 0).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct VocabArgs {
    /// BPE vocabulary JSON (token → id); byte-level symbols only if omitted.
    #[arg(long, value_name = "PATH", requires = "merges")]
    vocab: Option<PathBuf>,
    /// BPE merges file matching --vocab.
    #[arg(long, value_name = "PATH", requires = "vocab")]
    merges: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TokenizeArgs {
    /// Tweets TSV.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// JSON lines to write.
    #[arg(long, value_name = "PATH")]
    output: PathBuf,
    /// Span TSV; adds per-token BIO tags to each line.
    #[arg(long, value_name = "PATH")]
    spans: Option<PathBuf>,
    #[command(flatten)]
    vocab: VocabArgs,
}

#[derive(Subcommand, Debug)]
enum TrainCommand {
    /// Hashed-feature logistic regression classifier.
    Classifier(TrainClassifierArgs),
    /// Averaged-perceptron BIO span tagger.
    Tagger(TrainTaggerArgs),
}

#[derive(Args, Debug)]
struct TrainClassifierArgs {
    /// Classification TSV; ids may repeat (as in `resample` output).
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Model JSON to write.
    #[arg(long, value_name = "PATH")]
    output: PathBuf,
    /// Label scheme: binary-ADE or ternary-COVID.
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<LabelScheme>,
    /// Passes over the data (default 5).
    #[arg(long)]
    epochs: Option<usize>,
    /// Gradient step size (default 0.1).
    #[arg(long)]
    learning_rate: Option<f64>,
    /// L2 penalty on weights (default 1e-4).
    #[arg(long)]
    l2: Option<f64>,
    /// Hashed feature buckets, a power of two in [256, 4194304] (default 65536).
    #[arg(long)]
    feature_dim: Option<usize>,
    /// Examples per gradient step (default 16).
    #[arg(long)]
    batch_size: Option<usize>,
    /// Random seed (default 0).
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    vocab: VocabArgs,
}

#[derive(Args, Debug)]
struct TrainTaggerArgs {
    /// Tweets TSV.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Span TSV for the tweets; overlapping spans are removed first.
    #[arg(long, value_name = "PATH")]
    spans: PathBuf,
    /// Model JSON to write.
    #[arg(long, value_name = "PATH")]
    output: PathBuf,
    /// Passes over the data (default 5).
    #[arg(long)]
    epochs: Option<usize>,
    /// Random seed (default 0).
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    vocab: VocabArgs,
}

#[derive(Args, Debug)]
struct PredictArgs {
    /// Model JSON written by `train classifier` or `train tagger`.
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
    /// Tweets TSV.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Prediction TSV (classifier) or span TSV (tagger) to write.
    #[arg(long, value_name = "PATH")]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    /// Tweets TSV.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// `baseline:MODEL.json` or `file:PREDICTIONS.tsv` (binary-ADE).
    #[arg(long, value_name = "SPEC")]
    classifier: String,
    /// `baseline:MODEL.json` or `file:SPANS.tsv`.
    #[arg(long, value_name = "SPEC")]
    tagger: String,
    /// Label TSV to write (`id<TAB>label`).
    #[arg(long, value_name = "PATH")]
    output_labels: PathBuf,
    /// Span TSV to write, in original-tweet coordinates.
    #[arg(long, value_name = "PATH")]
    output_spans: PathBuf,
    /// Run report JSON; printed to stdout if omitted.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Normalize tweets before both models (spans are projected back).
    #[arg(long)]
    normalize: bool,
    /// Record failing tweets in the report and continue.
    #[arg(long)]
    lenient: bool,
    #[command(flatten)]
    norm: NormArgs,
}

#[derive(Subcommand, Debug)]
enum ScoreCommand {
    /// Per-class precision, recall and F1.
    Classification(ScoreClassificationArgs),
    /// Micro-averaged span matching scores.
    Spans(ScoreSpansArgs),
    /// Element-wise median of several score reports.
    Median(MedianArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum GoldFormat {
    /// `id<TAB>text<TAB>label`
    Dataset,
    /// `id<TAB>label[<TAB>scores]`
    Predictions,
}

#[derive(Args, Debug)]
struct ScoreClassificationArgs {
    /// Gold labels file.
    #[arg(long, value_name = "PATH")]
    gold: PathBuf,
    /// Prediction TSV: `id<TAB>label[<TAB>scores]`.
    #[arg(long, value_name = "PATH")]
    pred: PathBuf,
    /// Label scheme: binary-ADE or ternary-COVID.
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<LabelScheme>,
    /// Layout of the gold file.
    #[arg(long, value_enum, default_value_t = GoldFormat::Dataset)]
    gold_format: GoldFormat,
    /// JSON report path; JSON goes to stdout (table to stderr) if omitted.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScoreSpansArgs {
    /// Gold span TSV.
    #[arg(long, value_name = "PATH")]
    gold: PathBuf,
    /// Predicted span TSV.
    #[arg(long, value_name = "PATH")]
    pred: PathBuf,
    /// strict (identical boundaries) or relaxed (any shared character).
    #[arg(long, value_parser = parse_from_str::<SpanMatchMode>)]
    mode: Option<SpanMatchMode>,
    /// JSON report path; JSON goes to stdout (table to stderr) if omitted.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MedianArgs {
    /// Score reports of identical shape.
    #[arg(long, value_name = "PATH", num_args = 1.., required = true)]
    reports: Vec<PathBuf>,
    /// JSON report path; stdout if omitted.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VoteArgs {
    /// Prediction TSVs covering the same tweets.
    #[arg(long, value_name = "PATH", num_args = 1.., required = true)]
    preds: Vec<PathBuf>,
    /// Label scheme: binary-ADE or ternary-COVID.
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<LabelScheme>,
    /// Combined prediction TSV to write.
    #[arg(long, value_name = "PATH")]
    output: PathBuf,
}

fn parse_scheme(s: &str) -> std::result::Result<LabelScheme, String> {
    s.parse().map_err(|e: tweetade::label::LabelError| e.to_string())
}

fn parse_from_str<T>(s: &str) -> std::result::Result<T, String>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| e.to_string())
}

/// Usage errors exit with 2, everything else with 1.
enum Failure {
    Usage(String),
    Operational(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Operational(e.into())
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn usage(message: impl Into<String>) -> Failure {
    Failure::Usage(message.into())
}

struct Ctx {
    cfg: RunConfig,
    load: LoadOptions,
    jobs: usize,
}

impl Ctx {
    fn scheme(&self, flag: Option<LabelScheme>) -> Result<LabelScheme> {
        flag.or(self.cfg.scheme)
            .ok_or_else(|| usage("a label scheme is required (--scheme or `scheme` in the config file)"))
    }

    fn vocab(&self, args: &VocabArgs) -> Result<(BpeVocab, Value)> {
        let vocab = args.vocab.clone().or_else(|| self.cfg.vocab.clone());
        let merges = args.merges.clone().or_else(|| self.cfg.merges.clone());
        match (vocab, merges) {
            (Some(v), Some(m)) => {
                let loaded = load_vocab(&v, &m)?;
                Ok((loaded, json!({"vocab": v, "merges": m})))
            }
            (None, None) => Ok((BpeVocab::byte_level(Vec::new())?, json!("byte-level"))),
            _ => Err(usage("--vocab and --merges must be given together")),
        }
    }

    fn normalization(&self, args: &NormArgs, default_emoji: EmojiMode) -> Result<NormalizationConfig> {
        let base = NormalizationConfig::default();
        let cfg = NormalizationConfig {
            user_token: args
                .user_token
                .clone()
                .or_else(|| self.cfg.user_token.clone())
                .unwrap_or(base.user_token),
            url_token: args
                .url_token
                .clone()
                .or_else(|| self.cfg.url_token.clone())
                .unwrap_or(base.url_token),
            emoji_mode: args.emoji.or(self.cfg.emoji).unwrap_or(default_emoji),
            strip_mode: args.strip.or(self.cfg.strip).unwrap_or(base.strip_mode),
        };
        cfg.validate().map_err(|e| usage(e.to_string()))?;
        Ok(cfg)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Adds `tool_version` and the effective `config` to a report object.
fn with_provenance(config: Value, body: Value) -> Value {
    let mut map = match body {
        Value::Object(m) => m,
        other => {
            let mut m = serde_json::Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    map.insert("tool_version".into(), TOOL_VERSION.into());
    map.insert("config".into(), config);
    Value::Object(map)
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(anyhow!("writing to stdout: {e}").into()),
        _ => Ok(()),
    }
}

fn emit_json(value: &Value, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).context("serializing report")?;
    match path {
        Some(p) => {
            let mut w = create(p)?;
            writeln!(w, "{text}").with_context(|| format!("cannot write {}", p.display()))?;
            finish(w, p)
        }
        None => stdout(&format!("{text}\n")),
    }
}

fn emit_report(report: &MetricsReport, config: Value, path: Option<&Path>) -> Result<()> {
    let body = serde_json::to_value(report).context("serializing report")?;
    emit_json(&with_provenance(config, body), path)?;
    if path.is_some() {
        stdout(&report.to_table())?;
    } else {
        eprint!("{}", report.to_table());
    }
    Ok(())
}

fn load_data(ctx: &Ctx, args: &DataArgs) -> Result<LabeledDataset> {
    let scheme = args.scheme.or(ctx.cfg.scheme);
    let ds = match (&args.spans, scheme) {
        (Some(spans), s) => load_span_dataset(&args.input, spans, s, ctx.load)?,
        (None, Some(s)) => load_classification_dataset(&args.input, s, ctx.load)?,
        (None, None) => load_tweets(&args.input, None, ctx.load)?,
    };
    Ok(ds)
}

fn validate(ctx: &Ctx, args: &DataArgs) -> Result<()> {
    let ds = load_data(ctx, args)?;
    let s = summarize(&ds);
    let (_, overlapping) = clean_overlapping_spans(&ds);
    stdout(&format!(
        "{}: ok ({} tweets, {} labeled, {} spans)\n",
        args.input.display(),
        ds.len(),
        s.total,
        s.span_count
    ))?;
    if !overlapping.is_empty() {
        eprintln!(
            "note: {} spans overlap another span of the same tweet",
            overlapping.len()
        );
    }
    Ok(())
}

fn summarize_cmd(ctx: &Ctx, args: &DataArgs) -> Result<()> {
    let ds = load_data(ctx, args)?;
    let json = summarize(&ds).to_json(args.spans.is_some());
    stdout(&format!(
        "{}\n",
        serde_json::to_string(&json).context("serializing summary")?
    ))
}

fn normalize_cmd(ctx: &Ctx, args: &NormalizeArgs) -> Result<()> {
    let config = ctx.normalization(&args.norm, EmojiMode::Demojize)?;
    let scheme = args.scheme.or(ctx.cfg.scheme);
    let ds = match &args.spans {
        Some(spans) => load_span_dataset(&args.input, spans, scheme, ctx.load)?,
        None => load_tweets(&args.input, scheme, ctx.load)?,
    };
    let normalizer = Normalizer::new(config.clone()).map_err(|e| usage(e.to_string()))?;

    let mut changed = 0;
    let mut kept = Vec::new();
    let mut dropped = 0;
    let mut tweets = Vec::with_capacity(ds.len());
    for t in ds.tweets() {
        let n = normalizer.normalize(t);
        if n.text != t.text {
            changed += 1;
        }
        for s in ds.spans_for(&t.id) {
            match n.offset_map.project_span(s) {
                Projection::Kept(p) => kept.push(p),
                Projection::Dropped { .. } => dropped += 1,
            }
        }
        tweets.push(n.as_tweet());
    }
    let mut out = LabeledDataset::from_tweets(tweets)?;
    if let Some(s) = ds.scheme() {
        let rows: Vec<_> = out
            .tweets()
            .iter()
            .filter_map(|t| {
                ds.label(&t.id).map(|label| tweetade::LabeledTweet {
                    tweet: t.clone(),
                    label,
                })
            })
            .collect();
        if rows.len() == out.len() {
            out = LabeledDataset::from_labeled(s, rows)?;
        }
    }
    let mut w = create(&args.output)?;
    write_tweets(&mut w, &out)?;
    finish(w, &args.output)?;
    if let Some(path) = &args.spans_output {
        let mut w = create(path)?;
        write_spans(&mut w, &kept)?;
        finish(w, path)?;
    }

    let config = json!({"normalization": config, "input": args.input, "spans": args.spans});
    let body = json!({
        "tweets": ds.len(),
        "changed": changed,
        "spans_kept": kept.len(),
        "spans_dropped": dropped,
    });
    emit_json(&with_provenance(config, body), None)
}

fn counts_json(rows: &[tweetade::LabeledTweet]) -> Value {
    let map: BTreeMap<String, usize> = class_counts(rows)
        .into_iter()
        .map(|(l, n)| (l.to_string(), n))
        .collect();
    json!(map)
}

fn resample_cmd(ctx: &Ctx, args: &ResampleArgs) -> Result<()> {
    let scheme = ctx.scheme(args.scheme)?;
    let over = args
        .oversample
        .or(ctx.cfg.oversample)
        .ok_or_else(|| usage("--oversample is required"))?;
    let under = args
        .undersample
        .or(ctx.cfg.undersample)
        .ok_or_else(|| usage("--undersample is required"))?;
    let seed = args.seed.or(ctx.cfg.seed).unwrap_or(0);
    let plan = SamplingPlan::new(over, under, seed).map_err(|e| usage(e.to_string()))?;
    let ds = load_classification_dataset(&args.input, scheme, ctx.load)?;
    let rows = ds.labeled_rows();
    let out = apply_plan(&rows, &plan)?;
    let mut w = create(&args.output)?;
    write_labeled_rows(&mut w, &out)?;
    finish(w, &args.output)?;
    let config = json!({"scheme": scheme, "plan": plan, "input": args.input});
    emit_json(
        &with_provenance(
            config,
            json!({"before": counts_json(&rows), "after": counts_json(&out)}),
        ),
        None,
    )
}

fn tokenize_cmd(ctx: &Ctx, args: &TokenizeArgs) -> Result<()> {
    let (vocab, _) = ctx.vocab(&args.vocab)?;
    let ds = match &args.spans {
        Some(spans) => load_span_dataset(&args.input, spans, None, ctx.load)?,
        None => load_tweets(&args.input, None, ctx.load)?,
    };
    let mut w = create(&args.output)?;
    for t in ds.tweets() {
        let seq = encode(&t.text, &vocab)?;
        let mut line = json!({"id": t.id, "ids": seq.ids, "offsets": seq.offsets});
        if args.spans.is_some() {
            let tags =
                align_spans_to_bio(&seq, ds.spans_for(&t.id), &t.text).with_context(|| format!("tweet `{}`", t.id))?;
            let tags: Vec<String> = tags.0.iter().map(|t| t.to_string()).collect();
            line["tags"] = json!(tags);
        }
        writeln!(w, "{line}").context("writing tokens")?;
    }
    finish(w, &args.output)
}

fn train_classifier_cmd(ctx: &Ctx, args: &TrainClassifierArgs) -> Result<()> {
    let scheme = ctx.scheme(args.scheme)?;
    let d = TrainConfig::default();
    let config = TrainConfig {
        epochs: args.epochs.or(ctx.cfg.epochs).unwrap_or(d.epochs),
        learning_rate: args.learning_rate.or(ctx.cfg.learning_rate).unwrap_or(d.learning_rate),
        l2: args.l2.or(ctx.cfg.l2).unwrap_or(d.l2),
        seed: args.seed.or(ctx.cfg.seed).unwrap_or(d.seed),
        feature_dim: args.feature_dim.or(ctx.cfg.feature_dim).unwrap_or(d.feature_dim),
        batch_size: args.batch_size.or(ctx.cfg.batch_size).unwrap_or(d.batch_size),
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    let (vocab, vocab_desc) = ctx.vocab(&args.vocab)?;
    let rows = load_labeled_rows(&args.input, scheme, ctx.load)?;
    let model = BaselineClassifier::train(&rows, scheme, vocab, config)?;
    save_classifier(&args.output, &model)?;
    let cfg = json!({"scheme": scheme, "train": config, "vocab": vocab_desc, "input": args.input});
    emit_json(
        &with_provenance(cfg, json!({"examples": rows.len(), "classes": counts_json(&rows)})),
        None,
    )
}

fn train_tagger_cmd(ctx: &Ctx, args: &TrainTaggerArgs) -> Result<()> {
    let d = TaggerConfig::default();
    let config = TaggerConfig {
        epochs: args.epochs.or(ctx.cfg.epochs).unwrap_or(d.epochs),
        seed: args.seed.or(ctx.cfg.seed).unwrap_or(d.seed),
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    let (vocab, vocab_desc) = ctx.vocab(&args.vocab)?;
    let ds = load_span_dataset(&args.input, &args.spans, None, ctx.load)?;
    let (clean, removed) = clean_overlapping_spans(&ds);
    let model = BaselineTagger::train(&clean, vocab, config)?;
    save_tagger(&args.output, &model)?;
    let cfg = json!({"train": config, "vocab": vocab_desc, "input": args.input, "spans": args.spans});
    let body = json!({
        "tweets": clean.len(),
        "spans": clean.all_spans().len(),
        "overlapping_spans_removed": removed.len(),
    });
    emit_json(&with_provenance(cfg, body), None)
}

fn model_format(path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("{} is not JSON", path.display()))?;
    v.get("format")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| anyhow!("{}: no model `format` field", path.display()).into())
}

fn predict_cmd(ctx: &Ctx, args: &PredictArgs) -> Result<()> {
    let ds = load_tweets(&args.input, None, ctx.load)?;
    let mut w = create(&args.output)?;
    match model_format(&args.model)?.as_str() {
        "tweetade-linear-classifier" => {
            let model = load_classifier(&args.model)?;
            let mut rows = Vec::with_capacity(ds.len());
            for t in ds.tweets() {
                rows.push((t.id.clone(), model.predict(t)?));
            }
            write_predictions(&mut w, rows.iter().map(|(id, p)| (id, p))).context("writing predictions")?;
        }
        "tweetade-perceptron-tagger" => {
            let model = load_tagger(&args.model)?;
            let mut spans = Vec::new();
            for t in ds.tweets() {
                spans.extend(model.extract(t)?);
            }
            write_spans(&mut w, &spans)?;
        }
        other => return Err(anyhow!("unsupported model format `{other}`").into()),
    }
    finish(w, &args.output)
}

fn split_spec(spec: &str) -> Result<(&str, PathBuf)> {
    match spec.split_once(':') {
        Some((kind @ ("baseline" | "file"), path)) if !path.is_empty() => Ok((kind, PathBuf::from(path))),
        _ => Err(usage(format!("model spec `{spec}` must be baseline:PATH or file:PATH"))),
    }
}

fn pipeline_cmd(ctx: &Ctx, args: &PipelineArgs) -> Result<()> {
    let normalize = args.normalize || ctx.cfg.normalize.unwrap_or(false);
    let norm = if normalize {
        Some(ctx.normalization(&args.norm, EmojiMode::Keep)?)
    } else {
        None
    };
    let lenient = args.lenient || !ctx.cfg.strict_errors.unwrap_or(true);
    let (ckind, cpath) = split_spec(&args.classifier)?;
    let (tkind, tpath) = split_spec(&args.tagger)?;
    let ds = load_tweets(&args.input, None, ctx.load)?;

    let classifier: Box<dyn Classifier> = match ckind {
        "baseline" => Box::new(load_classifier(&cpath)?),
        _ => Box::new(FileClassifier::load(&cpath, LabelScheme::BinaryAde)?),
    };
    let tagger: Box<dyn Tagger> = match tkind {
        "baseline" => Box::new(load_tagger(&tpath)?),
        _ => Box::new(FileTagger::load(&tpath, ctx.load)?.with_coverage(ds.tweets().iter().map(|t| t.id.clone()))),
    };
    let options = BatchOptions {
        lenient,
        jobs: ctx.jobs,
    };
    let out = run_batch(
        ds.tweets(),
        classifier.as_ref(),
        tagger.as_ref(),
        norm.as_ref(),
        options,
    )?;

    let labels: Vec<(String, Prediction)> = out
        .records
        .iter()
        .map(|r| {
            (
                r.tweet_id.clone(),
                Prediction {
                    label: r.label,
                    scores: None,
                },
            )
        })
        .collect();
    let mut w = create(&args.output_labels)?;
    write_predictions(&mut w, labels.iter().map(|(id, p)| (id, p))).context("writing labels")?;
    finish(w, &args.output_labels)?;
    let spans: Vec<_> = out.records.iter().flat_map(|r| r.spans.iter().cloned()).collect();
    let mut w = create(&args.output_spans)?;
    write_spans(&mut w, &spans)?;
    finish(w, &args.output_spans)?;

    let cfg = json!({
        "input": args.input,
        "classifier": args.classifier,
        "tagger": args.tagger,
        "normalization": norm,
        "strict_errors": !lenient,
    });
    let body = serde_json::to_value(&out.report).context("serializing report")?;
    emit_json(&with_provenance(cfg, body), args.report.as_deref())
}

fn prediction_labels(path: &Path, scheme: LabelScheme) -> Result<LabelMap> {
    Ok(FileClassifier::load(path, scheme)?
        .rows()
        .iter()
        .map(|(id, p)| (id.clone(), p.label))
        .collect())
}

fn score_classification_cmd(ctx: &Ctx, args: &ScoreClassificationArgs) -> Result<()> {
    let scheme = ctx.scheme(args.scheme)?;
    let gold: LabelMap = match args.gold_format {
        GoldFormat::Dataset => load_classification_dataset(&args.gold, scheme, ctx.load)?
            .labels()
            .iter()
            .map(|(id, l)| (id.clone(), *l))
            .collect(),
        GoldFormat::Predictions => prediction_labels(&args.gold, scheme)?,
    };
    let pred = prediction_labels(&args.pred, scheme)?;
    let report = score_classification(&gold, &pred, scheme)?;
    let cfg = json!({"scheme": scheme, "gold": args.gold, "pred": args.pred});
    emit_report(&report, cfg, args.output.as_deref())
}

fn score_spans_cmd(ctx: &Ctx, args: &ScoreSpansArgs) -> Result<()> {
    let mode = args
        .mode
        .or(ctx.cfg.mode)
        .ok_or_else(|| usage("--mode strict|relaxed is required"))?;
    let gold: Vec<_> = load_spans(&args.gold, ctx.load)?.into_iter().map(|(_, s)| s).collect();
    let pred: Vec<_> = load_spans(&args.pred, ctx.load)?.into_iter().map(|(_, s)| s).collect();
    let report = score_spans(&gold, &pred, mode)?;
    let cfg = json!({"mode": mode, "gold": args.gold, "pred": args.pred});
    emit_report(&report, cfg, args.output.as_deref())
}

fn median_cmd(args: &MedianArgs) -> Result<()> {
    let mut reports = Vec::with_capacity(args.reports.len());
    for p in &args.reports {
        let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
        let r: MetricsReport =
            serde_json::from_str(&text).with_context(|| format!("{} is not a score report", p.display()))?;
        reports.push(r);
    }
    let median = median_aggregate(&reports)?;
    let body = serde_json::to_value(&median).context("serializing report")?;
    emit_json(
        &with_provenance(json!({"reports": args.reports}), body),
        args.output.as_deref(),
    )
}

fn vote_cmd(ctx: &Ctx, args: &VoteArgs) -> Result<()> {
    let scheme = ctx.scheme(args.scheme)?;
    let mut maps = Vec::with_capacity(args.preds.len());
    for p in &args.preds {
        maps.push(FileClassifier::load(p, scheme)?.to_map());
    }
    let voted = majority_vote(&maps, scheme)?;
    let mut w = create(&args.output)?;
    write_predictions(&mut w, voted.iter()).context("writing predictions")?;
    finish(w, &args.output)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => load_config(path).map_err(|e| usage(format!("{}: {e}", path.display())))?,
        None => RunConfig::default(),
    };
    let ctx = Ctx {
        load: LoadOptions {
            header: cli.header || cfg.header.unwrap_or(false),
        },
        jobs: cli.jobs.or(cfg.jobs).unwrap_or(0),
        cfg,
    };
    match &cli.command {
        Command::Validate(a) => validate(&ctx, a),
        Command::Summarize(a) => summarize_cmd(&ctx, a),
        Command::Normalize(a) => normalize_cmd(&ctx, a),
        Command::Resample(a) => resample_cmd(&ctx, a),
        Command::Tokenize(a) => tokenize_cmd(&ctx, a),
        Command::Train(TrainCommand::Classifier(a)) => train_classifier_cmd(&ctx, a),
        Command::Train(TrainCommand::Tagger(a)) => train_tagger_cmd(&ctx, a),
        Command::Predict(a) => predict_cmd(&ctx, a),
        Command::Pipeline(a) => pipeline_cmd(&ctx, a),
        Command::Score(ScoreCommand::Classification(a)) => score_classification_cmd(&ctx, a),
        Command::Score(ScoreCommand::Spans(a)) => score_spans_cmd(&ctx, a),
        Command::Score(ScoreCommand::Median(a)) => median_cmd(a),
        Command::Vote(a) => vote_cmd(&ctx, a),
    }
}

/// The error chain joined with `: `, skipping causes the previous message
/// already ends with.
fn describe(e: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in e.chain() {
        let part = cause.to_string();
        if !msg.ends_with(&part) {
            if !msg.is_empty() {
                msg.push_str(": ");
            }
            msg.push_str(&part);
        }
    }
    msg
}

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            eprintln!("run with --help for usage");
            ExitCode::from(2)
        }
        Err(Failure::Operational(e)) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(1)
        }
    }
}
