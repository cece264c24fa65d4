//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails or overruns its time budget.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use regex::Regex;
use sha2::{Digest, Sha256};
use tweetade::eval::{
    display, display_units, f1, match_spans, score_classification, score_spans, LabelMap, SpanMatchMode,
};
use tweetade::models::{
    objective, BaselineClassifier, Classifier, FeatureVector, ModelError, Prediction, Tagger, TrainConfig,
};
use tweetade::normalize::{normalize_tweet, NormalizationConfig, Projection, StripMode};
use tweetade::pipeline::{run_batch, BatchOptions};
use tweetade::resample::{apply_plan, class_counts, random_oversample, SamplingPlan, SeededRng};
use tweetade::text::char_slice;
use tweetade::tokenize::{decode, encode, BpeVocab};
use tweetade::{ClassLabel, LabelScheme, LabeledTweet, SpanAnnotation, Tweet};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- corpus

const WORDS: &[&str] = &[
    "took",
    "my",
    "cipro",
    "and",
    "now",
    "headache",
    "won't",
    "stop",
    "pain",
    "dizzy",
    "café",
    "naïve",
    "Ärger",
    "über",
    "日本語",
    "тошнота",
    "so",
    "tired",
    "lol",
    "#sideeffects",
    "2mg",
    "100%",
    "!!",
    "...",
    "it's",
];

const DECORATIONS: &[&str] = &[
    "😷",
    "🤢",
    "💊",
    "👍🏽",
    "❤️",
    "🇺🇸",
    "👨‍👩‍👧",
    "@bob",
    "@dr_smith",
    "@USER",
    "http://t.co/abc",
    "https://x.io/a?b=c",
    "www.example.com/p",
    "HTTPURL",
    "\u{a0}",
    "\u{301}",
    "e\u{301}",
];

fn synthetic_tweets(n: usize, seed: u64) -> Vec<Tweet> {
    let mut rng = SeededRng::new(seed);
    (0..n)
        .map(|i| {
            let mut text = String::new();
            for k in 0..1 + rng.below(14) {
                if k > 0 && rng.below(5) != 0 {
                    text.push(' ');
                }
                let pool = if rng.below(4) == 0 { DECORATIONS } else { WORDS };
                text.push_str(pool[rng.below(pool.len() as u64) as usize]);
            }
            Tweet::new(format!("s{i}"), text)
        })
        .collect()
}

fn merges(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
    pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

// ---------------------------------------------------------------- 1

fn metric_arithmetic() -> Outcome {
    let a = f1(0.515, 0.752);
    ensure(display(a, 2) == "0.61", || format!("f1(0.515, 0.752) = {a}"))?;
    let b = f1(0.9411, 0.9411);
    ensure(display(b, 2) == "0.94", || format!("f1(0.9411, 0.9411) = {b}"))?;
    let c = f1(0.505, 0.409);
    ensure(display(c, 2) == "0.45", || format!("f1(0.505, 0.409) = {c}"))?;
    let units = (display_units(c, 2) - display_units(0.44, 2)).abs();
    ensure(units <= 1, || format!("{c} is {units} display units from 0.44"))?;
    Ok(format!(
        "0.61, 0.94 exact; median row computes {c:.4} → 0.45 vs printed 0.44 (1 unit at 2 decimals; \
         per-column medians need not satisfy the F1 identity)"
    ))
}

// ---------------------------------------------------------------- 2

fn resampling_counts() -> Outcome {
    let rows: Vec<LabeledTweet> = (0..1_297 + 16_959)
        .map(|i| LabeledTweet {
            tweet: Tweet::new(format!("t{i}"), "x"),
            label: if i < 1_297 { ClassLabel::Ade } else { ClassLabel::NoAde },
        })
        .collect();
    let out =
        apply_plan(&rows, &SamplingPlan::new(0.1, 0.5, 2021).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let counts = class_counts(&out);
    let (ade, no_ade) = (counts[&ClassLabel::Ade], counts[&ClassLabel::NoAde]);
    ensure((ade, no_ade) == (1_696, 3_392), || format!("got ({ade}, {no_ade})"))?;
    ensure(no_ade == 2 * ade, || "majority is not twice the minority".into())?;
    let over = random_oversample(&rows, 0.1, 2021).map_err(|e| e.to_string())?;
    let c = class_counts(&over);
    ensure(c[&ClassLabel::Ade] == 1_696, || {
        format!("oversampling stage gave {}", c[&ClassLabel::Ade])
    })?;
    Ok(format!("(1297, 16959) → ({ade}, {no_ade}); majority = 2 × minority"))
}

// ---------------------------------------------------------------- 3

fn bpe_roundtrip() -> Outcome {
    let vocab = BpeVocab::byte_level(merges(&[
        ("Ġ", "t"),
        ("o", "o"),
        ("Ġt", "oo"),
        ("h", "t"),
        ("ht", "t"),
        ("htt", "p"),
        ("ð", "Ł"),
        ("Ã", "©"),
        ("Ġ", "p"),
        ("a", "i"),
        ("Ġp", "ai"),
        ("Ġpai", "n"),
    ]))
    .map_err(|e| e.to_string())?;
    let tweets = synthetic_tweets(1_000, 3);
    let mut tokens = 0;
    for t in &tweets {
        let seq = encode(&t.text, &vocab).map_err(|e| format!("{}: {e}", t.id))?;
        ensure(seq.tiles(t.text.len()), || {
            format!("offsets of {:?} do not tile", t.text)
        })?;
        let back = decode(&seq.ids, &vocab).map_err(|e| e.to_string())?;
        ensure(back == t.text, || format!("{:?} decoded to {back:?}", t.text))?;
        tokens += seq.len();
    }
    let multibyte = tweets.iter().filter(|t| !t.text.is_ascii()).count();
    Ok(format!(
        "1000/1000 tweets ({multibyte} non-ASCII, {tokens} tokens) round-trip and tile"
    ))
}

// ---------------------------------------------------------------- 4

fn rescan_bpe(text: &str, ranks: &[(String, String)]) -> Vec<String> {
    let mut word: Vec<String> = text.chars().map(String::from).collect();
    loop {
        let best = (0..word.len().saturating_sub(1))
            .filter_map(|i| ranks.iter().position(|(a, b)| *a == word[i] && *b == word[i + 1]))
            .min();
        let Some(rank) = best else { return word };
        let (a, b) = &ranks[rank];
        let mut out = Vec::with_capacity(word.len());
        let mut i = 0;
        while i < word.len() {
            if i + 1 < word.len() && word[i] == *a && word[i + 1] == *b {
                out.push(format!("{a}{b}"));
                i += 2;
            } else {
                out.push(word[i].clone());
                i += 1;
            }
        }
        word = out;
    }
}

fn bpe_oracle() -> Outcome {
    let mut rng = SeededRng::new(4);
    let alphabet = ["a", "b", "c"];
    let mut merged_any = 0;
    for case in 0..10_000 {
        let k = 1 + rng.below(3);
        let len = 1 + rng.below(12);
        let text: String = (0..len).map(|_| alphabet[rng.below(k) as usize]).collect();
        let mut symbols: Vec<String> = alphabet[..k as usize].iter().map(|s| s.to_string()).collect();
        let mut m: Vec<(String, String)> = Vec::new();
        let want = rng.below(5) as usize;
        for _ in 0..want * 4 {
            if m.len() == want {
                break;
            }
            let a = symbols[rng.below(symbols.len() as u64) as usize].clone();
            let b = symbols[rng.below(symbols.len() as u64) as usize].clone();
            if !m.contains(&(a.clone(), b.clone())) {
                symbols.push(format!("{a}{b}"));
                m.push((a, b));
            }
        }
        let vocab = BpeVocab::byte_level(m.clone()).map_err(|e| e.to_string())?;
        let seq = encode(&text, &vocab).map_err(|e| e.to_string())?;
        let got: Vec<&str> = seq.ids.iter().map(|&i| vocab.token(i).unwrap_or("?")).collect();
        let expected = rescan_bpe(&text, &m);
        ensure(got == expected, || {
            format!("case {case}: {text:?} with {m:?}: got {got:?}, oracle {expected:?}")
        })?;
        if expected.len() < text.len() {
            merged_any += 1;
        }
    }
    Ok(format!(
        "10000/10000 agree ({merged_any} cases with at least one merge)"
    ))
}

// ---------------------------------------------------------------- 5

fn max_matching(gold: &[(usize, usize)], pred: &[(usize, usize)], mode: SpanMatchMode) -> u64 {
    fn hit(a: (usize, usize), b: (usize, usize), mode: SpanMatchMode) -> bool {
        match mode {
            SpanMatchMode::Strict => a == b,
            SpanMatchMode::Relaxed => a.0 < b.1 && b.0 < a.1,
        }
    }
    fn go(i: usize, gold: &[(usize, usize)], pred: &[(usize, usize)], used: &mut [bool], mode: SpanMatchMode) -> u64 {
        if i == pred.len() {
            return 0;
        }
        let mut best = go(i + 1, gold, pred, used, mode);
        for k in 0..gold.len() {
            if !used[k] && hit(pred[i], gold[k], mode) {
                used[k] = true;
                best = best.max(1 + go(i + 1, gold, pred, used, mode));
                used[k] = false;
            }
        }
        best
    }
    let mut pred = pred.to_vec();
    pred.sort_unstable();
    pred.dedup();
    go(0, gold, &pred, &mut vec![false; gold.len()], mode)
}

fn non_nested(gold: &[(usize, usize)], pred: &[(usize, usize)]) -> bool {
    let all: Vec<(usize, usize)> = gold.iter().chain(pred).copied().collect();
    all.iter()
        .all(|&a| all.iter().all(|&b| a == b || !(a.0 <= b.0 && b.1 <= a.1)))
}

fn random_spans(rng: &mut SeededRng, distinct: bool) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for _ in 0..rng.below(5) {
        let s = rng.below(40) as usize;
        let span = (s, s + 1 + rng.below(8) as usize);
        if !(distinct && out.contains(&span)) {
            out.push(span);
        }
    }
    out
}

fn span_scorer_properties() -> Outcome {
    let mut rng = SeededRng::new(5);
    let mut compared = 0;
    for case in 0..1_000 {
        let n = 1 + rng.below(50) as usize;
        let mut gold = Vec::new();
        let mut pred = Vec::new();
        for t in 0..n {
            let id = format!("t{t}");
            let g = random_spans(&mut rng, true);
            let p = random_spans(&mut rng, false);
            if non_nested(&g, &p) {
                for mode in [SpanMatchMode::Strict, SpanMatchMode::Relaxed] {
                    let greedy = match_spans(&g, &p, mode).tp;
                    let best = max_matching(&g, &p, mode);
                    ensure(greedy == best, || {
                        format!("case {case}: {g:?} vs {p:?} ({mode}): {greedy} != {best}")
                    })?;
                }
                compared += 1;
            }
            gold.extend(
                g.iter()
                    .map(|&(s, e)| SpanAnnotation::new(id.clone(), s, e, "x".repeat(e - s))),
            );
            pred.extend(
                p.iter()
                    .map(|&(s, e)| SpanAnnotation::new(id.clone(), s, e, "x".repeat(e - s))),
            );
        }
        if gold.is_empty() {
            gold.push(SpanAnnotation::new("t0", 0, 1, "x"));
        }
        let score = |g: &[SpanAnnotation], p: &[SpanAnnotation], mode| {
            score_spans(g, p, mode)
                .map(|r| r.rows[0].metrics.f1)
                .map_err(|e| e.to_string())
        };
        let strict = score(&gold, &pred, SpanMatchMode::Strict)?;
        let relaxed = score(&gold, &pred, SpanMatchMode::Relaxed)?;
        ensure(relaxed >= strict, || {
            format!("case {case}: relaxed {relaxed} < strict {strict}")
        })?;
        for mode in [SpanMatchMode::Strict, SpanMatchMode::Relaxed] {
            let own = score(&gold, &gold, mode)?;
            ensure(own == 1.0, || format!("case {case}: self-score {own} ({mode})"))?;
        }
    }
    Ok(format!(
        "1000 instances; greedy = optimal on {compared} non-nested tweets"
    ))
}

// ---------------------------------------------------------------- 6

fn classification_oracle() -> Outcome {
    let mut rng = SeededRng::new(6);
    for case in 0..500 {
        let scheme = if rng.below(2) == 0 {
            LabelScheme::BinaryAde
        } else {
            LabelScheme::TernaryCovid
        };
        let labels = scheme.labels();
        let k = labels.len() as u64;
        let n = 1 + rng.below(200) as usize;
        let pairs: Vec<(usize, usize)> = (0..n).map(|_| (rng.below(k) as usize, rng.below(k) as usize)).collect();
        let gold: LabelMap = pairs
            .iter()
            .enumerate()
            .map(|(i, &(g, _))| (format!("t{i}"), labels[g]))
            .collect();
        let pred: LabelMap = pairs
            .iter()
            .enumerate()
            .map(|(i, &(_, p))| (format!("t{i}"), labels[p]))
            .collect();
        let report = score_classification(&gold, &pred, scheme).map_err(|e| e.to_string())?;
        for (c, label) in labels.iter().enumerate() {
            let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
            for &(g, p) in &pairs {
                match (g == c, p == c) {
                    (true, true) => tp += 1.0,
                    (false, true) => fp += 1.0,
                    (true, false) => fn_ += 1.0,
                    _ => {}
                }
            }
            let p = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
            let r = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
            let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
            let m = report.row(label.as_str()).ok_or("missing row")?.metrics;
            let worst = (m.precision - p).abs().max((m.recall - r).abs()).max((m.f1 - f).abs());
            ensure(worst <= 1e-12, || format!("case {case} {label}: off by {worst:e}"))?;
        }
    }
    Ok("500/500 instances within 1e-12".into())
}

// ---------------------------------------------------------------- 7

struct KnownLabels(HashMap<String, ClassLabel>);

impl Classifier for KnownLabels {
    fn scheme(&self) -> LabelScheme {
        LabelScheme::BinaryAde
    }
    fn predict(&self, t: &Tweet) -> Result<Prediction, ModelError> {
        let label = *self
            .0
            .get(&t.id)
            .ok_or_else(|| ModelError::MissingPrediction(t.id.clone()))?;
        Ok(Prediction { label, scores: None })
    }
}

/// Marks the first word of every tweet it sees.
struct FirstWord(AtomicUsize);

impl Tagger for FirstWord {
    fn extract(&self, t: &Tweet) -> Result<Vec<SpanAnnotation>, ModelError> {
        self.0.fetch_add(1, Ordering::SeqCst);
        let end = t.text.chars().position(|c| c == ' ').unwrap_or(t.text.chars().count());
        Ok(SpanAnnotation::from_text(t.id.clone(), &t.text, 0, end)
            .into_iter()
            .collect())
    }
}

fn pipeline_conditional() -> Outcome {
    let mut rng = SeededRng::new(7);
    let tweets: Vec<Tweet> = (0..300)
        .map(|i| Tweet::new(format!("p{i}"), format!("word{i} rest of tweet")))
        .collect();
    let labels: HashMap<String, ClassLabel> = tweets
        .iter()
        .map(|t| {
            (
                t.id.clone(),
                if rng.below(3) == 0 {
                    ClassLabel::Ade
                } else {
                    ClassLabel::NoAde
                },
            )
        })
        .collect();
    let expected_ade = labels.values().filter(|&&l| l == ClassLabel::Ade).count();
    let classifier = KnownLabels(labels);
    for jobs in [1, 4] {
        let tagger = FirstWord(AtomicUsize::new(0));
        let out = run_batch(
            &tweets,
            &classifier,
            &tagger,
            None,
            BatchOptions { lenient: false, jobs },
        )
        .map_err(|e| e.to_string())?;
        let calls = tagger.0.load(Ordering::SeqCst);
        ensure(calls == expected_ade, || {
            format!("{calls} tagger calls for {expected_ade} ADE tweets")
        })?;
        ensure(out.report.ade == expected_ade, || {
            format!("report counts {} ADE", out.report.ade)
        })?;
        for r in &out.records {
            let expect_spans = if r.label == ClassLabel::Ade { 1 } else { 0 };
            ensure(r.spans.len() == expect_spans, || {
                format!("{} ({}) has {} spans", r.tweet_id, r.label, r.spans.len())
            })?;
        }
        let order: Vec<&str> = out.records.iter().map(|r| r.tweet_id.as_str()).collect();
        ensure(order.iter().copied().eq(tweets.iter().map(|t| t.id.as_str())), || {
            "records out of input order".into()
        })?;
    }
    Ok(format!(
        "{expected_ade} ADE of 300: tagger called {expected_ade} times; NoADE records span-free"
    ))
}

// ---------------------------------------------------------------- 8

fn separable_rows(per_class: usize, seed: u64) -> Vec<LabeledTweet> {
    let mut rng = SeededRng::new(seed);
    let mut word = |letters: &[u8]| -> String {
        let len = 3 + rng.below(5) as usize;
        (0..len)
            .map(|_| letters[rng.below(letters.len() as u64) as usize] as char)
            .collect()
    };
    let ade_words: Vec<String> = (0..40).map(|_| word(b"abcdefghijklm")).collect();
    let other_words: Vec<String> = (0..40).map(|_| word(b"nopqrstuvwxyz")).collect();
    let mut rng = SeededRng::new(seed ^ 0xff);
    (0..2 * per_class)
        .map(|i| {
            let (words, label) = if i % 2 == 0 {
                (&ade_words, ClassLabel::Ade)
            } else {
                (&other_words, ClassLabel::NoAde)
            };
            let n = 3 + rng.below(8) as usize;
            let text: Vec<&str> = (0..n)
                .map(|_| words[rng.below(words.len() as u64) as usize].as_str())
                .collect();
            LabeledTweet {
                tweet: Tweet::new(format!("r{seed}_{i}"), text.join(" ")),
                label,
            }
        })
        .collect()
}

fn gradient_check() -> Result<f64, String> {
    let (k, dim) = (3, 16);
    let mut rng = SeededRng::new(8);
    let weights: Vec<f64> = (0..k * dim).map(|_| rng.unit() - 0.5).collect();
    let bias: Vec<f64> = (0..k).map(|_| rng.unit() - 0.5).collect();
    let examples: Vec<(FeatureVector, usize)> = (0..12)
        .map(|_| {
            let pairs: Vec<(usize, f64)> = (0..4).map(|_| (rng.below(10) as usize, 0.5 + rng.unit())).collect();
            (FeatureVector::from_pairs(dim, pairs), rng.below(k as u64) as usize)
        })
        .collect();
    let l2 = 0.01;
    let (_, gw, gb) = objective(&weights, &bias, dim, &examples, l2);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let mut check = |analytic: f64, up: f64, down: f64| {
        let numeric = (up - down) / (2.0 * h);
        worst = worst.max((analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8));
    };
    for j in 0..weights.len() {
        let (mut up, mut down) = (weights.clone(), weights.clone());
        up[j] += h;
        down[j] -= h;
        check(
            gw[j],
            objective(&up, &bias, dim, &examples, l2).0,
            objective(&down, &bias, dim, &examples, l2).0,
        );
    }
    for c in 0..k {
        let (mut up, mut down) = (bias.clone(), bias.clone());
        up[c] += h;
        down[c] -= h;
        check(
            gb[c],
            objective(&weights, &up, dim, &examples, l2).0,
            objective(&weights, &down, dim, &examples, l2).0,
        );
    }
    Ok(worst)
}

fn baseline_learnability() -> Outcome {
    let train = separable_rows(500, 1);
    let held_out = separable_rows(250, 2);
    let vocab = BpeVocab::byte_level([]).map_err(|e| e.to_string())?;
    let model = BaselineClassifier::train(&train, LabelScheme::BinaryAde, vocab, TrainConfig::default())
        .map_err(|e| e.to_string())?;
    let gold: LabelMap = held_out.iter().map(|r| (r.tweet.id.clone(), r.label)).collect();
    let mut pred = LabelMap::new();
    for r in &held_out {
        pred.insert(
            r.tweet.id.clone(),
            model.predict(&r.tweet).map_err(|e| e.to_string())?.label,
        );
    }
    let report = score_classification(&gold, &pred, LabelScheme::BinaryAde).map_err(|e| e.to_string())?;
    let f = report.headline().ok_or("no ADE row")?.metrics.f1;
    ensure(f >= 0.95, || format!("held-out ADE F1 {f:.4} < 0.95"))?;
    let worst = gradient_check()?;
    ensure(worst <= 1e-5, || format!("gradient relative error {worst:e}"))?;
    Ok(format!(
        "held-out ADE F1 {f:.4}; max gradient relative error {worst:.1e}"
    ))
}

// ---------------------------------------------------------------- 9

const CLASSIFICATION_ROWS: usize = 240;

fn write_inputs(dir: &Path) -> std::io::Result<()> {
    let mut rng = SeededRng::new(9);
    let side = ["headache", "dizzy", "nausea", "rash"];
    let drugs = ["cipro", "paxil", "advil", "zoloft"];
    let filler = ["today", "feeling", "ok", "after", "lunch", "work", "so", "tired"];
    let mut train = String::new();
    let mut tweets = String::new();
    let mut spans = String::new();
    for i in 0..CLASSIFICATION_ROWS {
        let drug = drugs[rng.below(4) as usize];
        let ade = rng.below(5) == 0;
        let mut text = format!("@user{i} took {drug}");
        let mut span = None;
        if ade {
            text.push_str(" and got ");
            let start = text.chars().count();
            let s = side[rng.below(4) as usize];
            text.push_str(s);
            span = Some((start, start + s.chars().count(), s));
        } else {
            for _ in 0..2 {
                text.push(' ');
                text.push_str(filler[rng.below(8) as usize]);
            }
        }
        if rng.below(3) == 0 {
            text.push_str(" 😷 http://t.co/x");
        }
        let label = if ade { "ADE" } else { "NoADE" };
        train.push_str(&format!("c{i}\t{text}\t{label}\n"));
        tweets.push_str(&format!("c{i}\t{text}\n"));
        if let Some((s, e, surface)) = span {
            spans.push_str(&format!("c{i}\t{s}\t{e}\t{surface}\n"));
        }
    }
    std::fs::write(dir.join("train.tsv"), train)?;
    std::fs::write(dir.join("tweets.tsv"), tweets)?;
    std::fs::write(dir.join("spans.tsv"), spans)
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_tweetade"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!(
            "`tweetade {}` failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

/// Runs every seeded command in `dir` (inputs from `inputs`) and returns the
/// SHA-256 of each output file.
fn seeded_run(inputs: &Path, dir: &Path) -> Result<BTreeMap<String, String>, String> {
    for f in ["train.tsv", "tweets.tsv", "spans.tsv"] {
        std::fs::copy(inputs.join(f), dir.join(f)).map_err(|e| e.to_string())?;
    }
    let steps: &[&[&str]] = &[
        &[
            "resample",
            "--input",
            "train.tsv",
            "--scheme",
            "binary-ADE",
            "--oversample",
            "0.5",
            "--undersample",
            "0.8",
            "--seed",
            "7",
            "--output",
            "resampled.tsv",
        ],
        &[
            "train",
            "classifier",
            "--input",
            "resampled.tsv",
            "--scheme",
            "binary-ADE",
            "--seed",
            "3",
            "--feature-dim",
            "4096",
            "--output",
            "clf.json",
        ],
        &[
            "train",
            "tagger",
            "--input",
            "tweets.tsv",
            "--spans",
            "spans.tsv",
            "--seed",
            "3",
            "--output",
            "tag.json",
        ],
        &[
            "--jobs",
            "0",
            "predict",
            "--model",
            "clf.json",
            "--input",
            "tweets.tsv",
            "--output",
            "pred.tsv",
        ],
        &[
            "predict",
            "--model",
            "tag.json",
            "--input",
            "tweets.tsv",
            "--output",
            "pred_spans.tsv",
        ],
        &[
            "--jobs",
            "0",
            "pipeline",
            "--input",
            "tweets.tsv",
            "--classifier",
            "baseline:clf.json",
            "--tagger",
            "baseline:tag.json",
            "--normalize",
            "--output-labels",
            "labels.tsv",
            "--output-spans",
            "pipeline_spans.tsv",
            "--report",
            "report.json",
        ],
        &[
            "normalize",
            "--input",
            "tweets.tsv",
            "--spans",
            "spans.tsv",
            "--output",
            "normalized.tsv",
            "--spans-output",
            "normalized_spans.tsv",
        ],
        &[
            "tokenize",
            "--input",
            "tweets.tsv",
            "--spans",
            "spans.tsv",
            "--output",
            "tokens.jsonl",
        ],
        &[
            "vote",
            "--preds",
            "pred.tsv",
            "pred.tsv",
            "--scheme",
            "binary-ADE",
            "--output",
            "vote.tsv",
        ],
        &[
            "score",
            "classification",
            "--gold",
            "train.tsv",
            "--pred",
            "pred.tsv",
            "--scheme",
            "binary-ADE",
            "--output",
            "score.json",
        ],
        &[
            "score",
            "spans",
            "--gold",
            "spans.tsv",
            "--pred",
            "pipeline_spans.tsv",
            "--mode",
            "relaxed",
            "--output",
            "span_score.json",
        ],
    ];
    let mut hashes = BTreeMap::new();
    for step in steps {
        run_cli(dir, step)?;
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| e.map(|e| e.path()).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    files.sort();
    for path in files {
        let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
        let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        hashes.insert(
            path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            digest,
        );
    }
    Ok(hashes)
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let inputs = root.path().join("inputs");
    std::fs::create_dir(&inputs).map_err(|e| e.to_string())?;
    write_inputs(&inputs).map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for k in 0..2 {
        let dir = root.path().join(format!("run{k}"));
        std::fs::create_dir(&dir).map_err(|e| e.to_string())?;
        runs.push(seeded_run(&inputs, &dir)?);
    }
    ensure(runs[0].len() >= 14, || format!("only {} files produced", runs[0].len()))?;
    for (name, hash) in &runs[0] {
        let other = runs[1]
            .get(name)
            .ok_or_else(|| format!("{name} missing from second run"))?;
        ensure(hash == other, || format!("{name} differs between runs"))?;
    }
    Ok(format!("{} files byte-identical across 2 runs", runs[0].len()))
}

// ---------------------------------------------------------------- 10

const GOLDEN: &str = include_str!("data/normalize_golden.tsv");

fn normalization() -> Outcome {
    let bertweet = NormalizationConfig::bertweet();
    let mut cases = 0;
    for (line, row) in GOLDEN.lines().enumerate() {
        let (input, expected) = row
            .split_once('\t')
            .ok_or_else(|| format!("golden line {} malformed", line + 1))?;
        let got = normalize_tweet(&Tweet::new("g", input), &bertweet).text;
        ensure(got == expected, || {
            format!("golden line {}: {input:?} → {got:?}, expected {expected:?}", line + 1)
        })?;
        cases += 1;
    }
    ensure(cases == 50, || format!("golden file has {cases} cases"))?;

    let tweets = synthetic_tweets(1_000, 10);
    let configs = [
        NormalizationConfig::default(),
        bertweet.clone(),
        NormalizationConfig {
            strip_mode: StripMode::StripEntities,
            ..bertweet.clone()
        },
    ];
    for config in &configs {
        for t in &tweets {
            let once = normalize_tweet(t, config);
            let twice = normalize_tweet(&once.as_tweet(), config);
            ensure(twice.text == once.text, || {
                format!("not idempotent on {:?}: {:?} → {:?}", t.text, once.text, twice.text)
            })?;
        }
    }

    // spans touching a rewritten mention or URL are dropped, all others kept
    let entity = Regex::new(r"(?i:https?://|www\.)\S*|@\w+").map_err(|e| e.to_string())?;
    let config = NormalizationConfig::default();
    let mut rng = SeededRng::new(10);
    let (mut kept, mut dropped) = (0, 0);
    for t in &tweets {
        let n = normalize_tweet(t, &config);
        let rewritten: Vec<(usize, usize)> = entity
            .find_iter(&t.text)
            .filter(|m| {
                m.as_str()
                    != if m.as_str().starts_with('@') {
                        "@USER"
                    } else {
                        "HTTPURL"
                    }
            })
            .map(|m| (t.text[..m.start()].chars().count(), t.text[..m.end()].chars().count()))
            .collect();
        let len = t.text.chars().count() as u64;
        for _ in 0..8 {
            let a = rng.below(len) as usize;
            let b = a + 1 + rng.below(len - a as u64) as usize;
            let Some(span) = SpanAnnotation::from_text(t.id.clone(), &t.text, a, b) else {
                continue;
            };
            let touches = rewritten.iter().any(|&(s, e)| a < e && s < b);
            match n.offset_map.project_span(&span) {
                Projection::Kept(p) => {
                    ensure(!touches, || format!("kept {a}..{b} over a rewrite in {:?}", t.text))?;
                    ensure(char_slice(&n.text, p.start, p.end) == span.surface, || {
                        format!("moved {a}..{b} wrongly in {:?}", t.text)
                    })?;
                    kept += 1;
                }
                Projection::Dropped { .. } => {
                    ensure(touches, || format!("dropped clean span {a}..{b} in {:?}", t.text))?;
                    dropped += 1;
                }
            }
        }
    }
    Ok(format!(
        "50/50 golden; idempotent on 1000 tweets × {} configs; projection {kept} kept / {dropped} dropped as predicted",
        configs.len()
    ))
}

// ---------------------------------------------------------------- driver

fn main() {
    type Criterion = (u32, &'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        (1, "metric arithmetic", Duration::from_secs(1), metric_arithmetic),
        (2, "resampling counts", Duration::from_secs(1), resampling_counts),
        (3, "BPE round-trip", Duration::from_secs(10), bpe_roundtrip),
        (4, "BPE oracle", Duration::from_secs(30), bpe_oracle),
        (
            5,
            "span-scorer properties",
            Duration::from_secs(30),
            span_scorer_properties,
        ),
        (
            6,
            "classification scorer oracle",
            Duration::from_secs(5),
            classification_oracle,
        ),
        (7, "pipeline conditional", Duration::from_secs(1), pipeline_conditional),
        (
            8,
            "baseline learnability",
            Duration::from_secs(60),
            baseline_learnability,
        ),
        (9, "determinism", Duration::from_secs(60), determinism),
        (10, "normalization", Duration::from_secs(5), normalization),
    ];
    let mut failed = 0;
    for (n, name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS criterion {n:>2} {name} ({elapsed:.2?}): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {n:>2} {name} ({elapsed:.2?}): {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
