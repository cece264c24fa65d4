#![allow(dead_code)]

use tweetade::resample::SeededRng;
use tweetade::Tweet;

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
    "\t",
    "  ",
    "\u{a0}",
    "\u{301}",
];

fn pick<'a>(rng: &mut SeededRng, items: &[&'a str]) -> &'a str {
    items[rng.below(items.len() as u64) as usize]
}

/// Tweet-like text mixing words, emoji, mentions, URLs, odd whitespace and
/// combining marks.
pub fn synthetic_text(rng: &mut SeededRng) -> String {
    let n = 1 + rng.below(14) as usize;
    let mut out = String::new();
    for i in 0..n {
        if i > 0 && rng.below(5) != 0 {
            out.push(' ');
        }
        if rng.below(4) == 0 {
            out.push_str(pick(rng, DECORATIONS));
        } else {
            out.push_str(pick(rng, WORDS));
        }
    }
    out
}

pub fn synthetic_tweets(n: usize, seed: u64) -> Vec<Tweet> {
    let mut rng = SeededRng::new(seed);
    (0..n)
        .map(|i| Tweet::new(format!("s{i}"), synthetic_text(&mut rng)))
        .collect()
}

/// Proptest strategy over the same kind of material, as a list of pieces.
pub fn text_strategy() -> impl proptest::strategy::Strategy<Value = String> {
    use proptest::prelude::*;
    let piece = prop_oneof![
        proptest::sample::select(WORDS.to_vec()),
        proptest::sample::select(DECORATIONS.to_vec()),
        Just(" "),
        Just("@"),
        Just(":"),
    ];
    proptest::collection::vec(piece, 0..16).prop_map(|v| v.concat())
}
