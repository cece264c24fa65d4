mod common;

use proptest::prelude::*;
use regex::Regex;
use tweetade::normalize::{normalize_tweet, NormalizationConfig, Projection, StripMode};
use tweetade::text::char_slice;
use tweetade::{SpanAnnotation, Tweet};

fn configs() -> Vec<NormalizationConfig> {
    vec![
        NormalizationConfig::default(),
        NormalizationConfig::bertweet(),
        NormalizationConfig {
            strip_mode: StripMode::StripEntities,
            ..Default::default()
        },
        NormalizationConfig {
            strip_mode: StripMode::StripEntities,
            ..NormalizationConfig::bertweet()
        },
    ]
}

fn normalized(text: &str, config: &NormalizationConfig) -> String {
    normalize_tweet(&Tweet::new("t", text), config).text
}

/// Character ranges that the default configuration rewrites, found
/// independently of the normalizer.
fn rewritten_ranges(text: &str) -> Vec<(usize, usize)> {
    let re = Regex::new(r"(?i:https?://|www\.)\S*|@\w+").unwrap();
    re.find_iter(text)
        .filter(|m| {
            let token = if m.as_str().starts_with('@') {
                "@USER"
            } else {
                "HTTPURL"
            };
            m.as_str() != token
        })
        .map(|m| (text[..m.start()].chars().count(), text[..m.end()].chars().count()))
        .collect()
}

#[test]
fn replaces_mentions_and_urls() {
    let c = NormalizationConfig::default();
    assert_eq!(
        normalized("@bob took cipro http://t.co/x", &c),
        "@USER took cipro HTTPURL"
    );
    assert_eq!(normalized("see www.site.org/a, @a_b!", &c), "see HTTPURL @USER!");
    assert_eq!(normalized("HTTPS://X.CO", &c), "HTTPURL");
    assert_eq!(normalized("mail me a@b", &c), "mail me a@USER");
    assert_eq!(normalized("no entities here", &c), "no entities here");
}

#[test]
fn idempotent_on_synthetic_corpus() {
    for config in configs() {
        for tweet in common::synthetic_tweets(500, 5) {
            let once = normalize_tweet(&tweet, &config);
            let twice = normalize_tweet(&once.as_tweet(), &config);
            assert_eq!(twice.text, once.text, "{config:?} on {:?}", tweet.text);
            assert!(twice.offset_map.is_identity(), "{:?}", once.text);
        }
    }
}

#[test]
fn offset_maps_are_consistent() {
    for config in configs() {
        for tweet in common::synthetic_tweets(300, 6) {
            let n = normalize_tweet(&tweet, &config);
            let map = &n.offset_map;
            assert!(map.is_consistent());
            assert_eq!(map.source_len(), tweet.text.chars().count());
            assert_eq!(map.target_len(), n.text.chars().count());
            for s in map.segments() {
                if s.kind == tweetade::normalize::SegmentKind::Preserved {
                    assert_eq!(
                        char_slice(&tweet.text, s.source_start, s.source_end),
                        char_slice(&n.text, s.target_start, s.target_end)
                    );
                }
            }
        }
    }
}

fn check_projection(text: &str, start: usize, end: usize) -> Result<(), TestCaseError> {
    let Some(span) = SpanAnnotation::from_text("t", text, start, end) else {
        return Ok(());
    };
    let n = normalize_tweet(&Tweet::new("t", text), &NormalizationConfig::default());
    let hits = rewritten_ranges(text).iter().any(|&(s, e)| start < e && s < end);
    match n.offset_map.project_span(&span) {
        Projection::Kept(p) => {
            prop_assert!(!hits, "kept a span over rewritten text: {:?}", span);
            prop_assert_eq!(char_slice(&n.text, p.start, p.end), span.surface.as_str());
            prop_assert_eq!(&p.surface, &span.surface);
            match n.offset_map.inverted().project_span(&p) {
                Projection::Kept(back) => prop_assert_eq!(back, span),
                other => prop_assert!(false, "inverse dropped {:?}", other),
            }
        }
        Projection::Dropped { overlap, .. } => {
            prop_assert!(hits, "dropped a span clear of rewritten text: {:?}", span);
            prop_assert!(overlap > 0.0 && overlap <= 1.0);
        }
    }
    Ok(())
}

proptest! {
    #[test]
    fn idempotent(text in common::text_strategy()) {
        for config in configs() {
            let once = normalized(&text, &config);
            prop_assert_eq!(normalized(&once, &config), once);
        }
    }

    #[test]
    fn projection_drops_exactly_spans_touching_rewrites(
        text in common::text_strategy(),
        a in 0usize..200,
        b in 0usize..200,
    ) {
        let len = text.chars().count();
        if len > 0 {
            let (s, e) = (a % len, b % len + 1);
            check_projection(&text, s.min(e), s.max(e))?;
        }
    }
}
