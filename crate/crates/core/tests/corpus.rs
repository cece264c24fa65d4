use std::io::Cursor;

use tweetade::corpus::{
    attach_spans, read_classification, read_labeled_rows, read_spans, read_tweets, CorpusError, LoadOptions,
};
use tweetade::{ClassLabel, LabelScheme, LabeledDataset};

fn read_span_dataset_parts(tweets: &str, spans: &str) -> Result<LabeledDataset, CorpusError> {
    let opts = LoadOptions::default();
    let ds = read_tweets(Cursor::new(tweets), None, opts)?;
    attach_spans(ds, read_spans(Cursor::new(spans), opts)?)
}

fn rows(src: &str) -> Result<Vec<tweetade::LabeledTweet>, CorpusError> {
    read_labeled_rows(Cursor::new(src), LabelScheme::BinaryAde, LoadOptions::default())
}

#[test]
fn repeated_ids_are_allowed_in_training_rows() {
    let src = "a\tgot a rash\tADE\nb\tfine\tNoADE\na\tgot a rash\tADE\n";
    let r = rows(src).unwrap();
    assert_eq!(r.len(), 3);
    assert_eq!(r[2].label, ClassLabel::Ade);
    assert!(read_classification(Cursor::new(src), LabelScheme::BinaryAde, LoadOptions::default()).is_err());
}

#[test]
fn conflicting_repeats_are_rejected() {
    let err = rows("a\tgot a rash\tADE\na\tgot a rash\tNoADE\n").unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
    assert!(rows("a\tone\tADE\na\ttwo\tADE\n").is_err());
}

#[test]
fn header_and_column_errors() {
    let opts = LoadOptions { header: true };
    let r = read_labeled_rows(
        Cursor::new("id\ttext\tlabel\na\tx\tADE\n"),
        LabelScheme::BinaryAde,
        opts,
    )
    .unwrap();
    assert_eq!(r.len(), 1);
    let err = rows("a\tx\n").unwrap_err();
    assert!(err.to_string().contains("line 1"), "{err}");
    let err = rows("a\tx\tMaybe\n").unwrap_err();
    assert!(err.to_string().contains("Maybe"), "{err}");
}

#[test]
fn span_files_validate_against_text() {
    let tweets = "t1\tcipro gave me a headache\n";
    let ok = read_span_dataset_parts(tweets, "t1\t16\t24\theadache\n").unwrap();
    assert_eq!(ok.spans_for("t1").len(), 1);
    assert!(read_span_dataset_parts(tweets, "t1\t16\t24\theadach\n").is_err());
    assert!(read_span_dataset_parts(tweets, "t1\t16\t99\theadache\n").is_err());
    assert!(read_span_dataset_parts(tweets, "t9\t0\t1\tc\n").is_err());
}
