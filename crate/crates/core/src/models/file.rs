use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{Classifier, ModelError, Prediction, Tagger};
use crate::corpus::{load_spans, LoadOptions, SpanAnnotation, Tweet};
use crate::label::LabelScheme;

/// Predictions keyed by tweet id.
pub type PredictionMap = BTreeMap<String, Prediction>;

/// Parses `tweet_id<TAB>label[<TAB>score,score,…]` lines. Scores, when
/// present, must be finite and one per class in scheme order. Blank lines
/// are skipped; duplicate ids are an error.
pub fn read_predictions<R: BufRead>(reader: R, scheme: LabelScheme) -> Result<Vec<(String, Prediction)>, ModelError> {
    let mut rows = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line.map_err(|source| ModelError::Io {
            path: "<predictions>".into(),
            source,
        })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let fail = |message: String| ModelError::PredictionFormat { line: line_no, message };
        let cols: Vec<&str> = line.split('\t').collect();
        if !(2..=3).contains(&cols.len()) {
            return Err(fail(format!(
                "expected 2 or 3 tab-separated columns, found {}",
                cols.len()
            )));
        }
        let id = cols[0].to_string();
        if id.is_empty() {
            return Err(fail("empty tweet id".into()));
        }
        let label = scheme.parse_label(cols[1]).map_err(|e| fail(e.to_string()))?;
        let scores = match cols.get(2) {
            None => None,
            Some(csv) => {
                let scores = csv
                    .split(',')
                    .map(|s| s.trim().parse::<f64>().map_err(|_| fail(format!("bad score `{s}`"))))
                    .collect::<Result<Vec<f64>, _>>()?;
                if scores.len() != scheme.num_classes() {
                    return Err(fail(format!(
                        "expected {} scores for {scheme}, found {}",
                        scheme.num_classes(),
                        scores.len()
                    )));
                }
                if scores.iter().any(|s| !s.is_finite()) {
                    return Err(fail("scores must be finite".into()));
                }
                Some(scores)
            }
        };
        if seen.insert(id.clone(), line_no).is_some() {
            return Err(ModelError::DuplicatePrediction { line: line_no, id });
        }
        rows.push((id, Prediction { label, scores }));
    }
    Ok(rows)
}

/// Writes rows in the format read by [`read_predictions`]. Scores use the
/// shortest decimal that parses back to the same value.
pub fn write_predictions<'a, W: Write>(
    mut w: W,
    rows: impl IntoIterator<Item = (&'a String, &'a Prediction)>,
) -> std::io::Result<()> {
    for (id, p) in rows {
        write!(w, "{id}\t{}", p.label)?;
        if let Some(scores) = &p.scores {
            let csv: Vec<String> = scores.iter().map(|s| s.to_string()).collect();
            write!(w, "\t{}", csv.join(","))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>, ModelError> {
    File::open(path).map(BufReader::new).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Replays a prediction file. Tweets without a row are an error.
#[derive(Debug, Clone)]
pub struct FileClassifier {
    scheme: LabelScheme,
    rows: Vec<(String, Prediction)>,
    index: HashMap<String, usize>,
}

impl FileClassifier {
    pub fn from_rows(scheme: LabelScheme, rows: Vec<(String, Prediction)>) -> Result<Self, ModelError> {
        let mut index = HashMap::with_capacity(rows.len());
        for (k, (id, p)) in rows.iter().enumerate() {
            if !scheme.contains(p.label) {
                return Err(ModelError::LabelOutsideScheme { label: p.label, scheme });
            }
            if index.insert(id.clone(), k).is_some() {
                return Err(ModelError::DuplicatePrediction {
                    line: k + 1,
                    id: id.clone(),
                });
            }
        }
        Ok(FileClassifier { scheme, rows, index })
    }

    pub fn read<R: BufRead>(reader: R, scheme: LabelScheme) -> Result<Self, ModelError> {
        FileClassifier::from_rows(scheme, read_predictions(reader, scheme)?)
    }

    pub fn load(path: &Path, scheme: LabelScheme) -> Result<Self, ModelError> {
        FileClassifier::read(open(path)?, scheme).map_err(|e| match e {
            ModelError::Io { source, .. } => ModelError::Io {
                path: path.display().to_string(),
                source,
            },
            other => other,
        })
    }

    /// Rows in file order.
    pub fn rows(&self) -> &[(String, Prediction)] {
        &self.rows
    }

    pub fn to_map(&self) -> PredictionMap {
        self.rows.iter().cloned().collect()
    }

    pub fn write<W: Write>(&self, w: W) -> std::io::Result<()> {
        write_predictions(w, self.rows.iter().map(|(id, p)| (id, p)))
    }

    pub fn get(&self, id: &str) -> Result<&Prediction, ModelError> {
        self.index
            .get(id)
            .map(|&k| &self.rows[k].1)
            .ok_or_else(|| ModelError::MissingPrediction(id.to_string()))
    }
}

impl Classifier for FileClassifier {
    fn scheme(&self) -> LabelScheme {
        self.scheme
    }

    fn predict(&self, tweet: &Tweet) -> Result<Prediction, ModelError> {
        self.get(&tweet.id).cloned()
    }
}

/// Replays a span file. A tweet with no rows is an error unless its id is in
/// the coverage set, which marks "predicted, but no spans".
#[derive(Debug, Clone, Default)]
pub struct FileTagger {
    spans: BTreeMap<String, Vec<SpanAnnotation>>,
    coverage: BTreeSet<String>,
}

impl FileTagger {
    pub fn from_spans(spans: impl IntoIterator<Item = SpanAnnotation>) -> Self {
        let mut map: BTreeMap<String, Vec<SpanAnnotation>> = BTreeMap::new();
        for s in spans {
            map.entry(s.tweet_id.clone()).or_default().push(s);
        }
        for v in map.values_mut() {
            v.sort_by_key(|s| (s.start, s.end));
        }
        FileTagger {
            spans: map,
            coverage: BTreeSet::new(),
        }
    }

    pub fn load(path: &Path, opts: LoadOptions) -> Result<Self, ModelError> {
        let spans = load_spans(path, opts).map_err(|e| ModelError::Persist(e.to_string()))?;
        Ok(FileTagger::from_spans(spans.into_iter().map(|(_, s)| s)))
    }

    pub fn with_coverage(mut self, ids: impl IntoIterator<Item = String>) -> Self {
        self.coverage.extend(ids);
        self
    }
}

impl Tagger for FileTagger {
    fn extract(&self, tweet: &Tweet) -> Result<Vec<SpanAnnotation>, ModelError> {
        let Some(spans) = self.spans.get(&tweet.id) else {
            if self.coverage.contains(&tweet.id) {
                return Ok(Vec::new());
            }
            return Err(ModelError::MissingPrediction(tweet.id.clone()));
        };
        for (k, s) in spans.iter().enumerate() {
            let invalid = |message: String| ModelError::InvalidSpan {
                tweet_id: tweet.id.clone(),
                message,
            };
            s.validate(&tweet.text).map_err(|e| invalid(e.to_string()))?;
            if k > 0 && spans[k - 1].end > s.start {
                return Err(invalid(format!(
                    "{}..{} overlaps {}..{}",
                    spans[k - 1].start,
                    spans[k - 1].end,
                    s.start,
                    s.end
                )));
            }
        }
        Ok(spans.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::ClassLabel;

    #[test]
    fn roundtrip_is_byte_exact() {
        let text = "t2\tADE\t0.7,0.30000000000000004\nt1\tNoADE\n";
        let fc = FileClassifier::read(text.as_bytes(), LabelScheme::BinaryAde).unwrap();
        let mut out = Vec::new();
        fc.write(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
        assert_eq!(fc.get("t1").unwrap().label, ClassLabel::NoAde);
    }

    #[test]
    fn absent_id_is_an_error() {
        let fc = FileClassifier::read("a\tADE\n".as_bytes(), LabelScheme::BinaryAde).unwrap();
        assert!(matches!(
            fc.predict(&Tweet::new("b", "x")),
            Err(ModelError::MissingPrediction(id)) if id == "b"
        ));
    }

    #[test]
    fn format_errors() {
        let bad = [
            "a\n",
            "a\tMaybe\n",
            "a\tADE\t0.5\n",
            "a\tADE\t0.5,NaN\n",
            "a\tADE\na\tNoADE\n",
            "a\tLitNews\n",
        ];
        for text in bad {
            assert!(
                FileClassifier::read(text.as_bytes(), LabelScheme::BinaryAde).is_err(),
                "{text:?}"
            );
        }
    }

    #[test]
    fn tagger_coverage() {
        let tweet = Tweet::new("a", "head pain");
        let ft = FileTagger::from_spans([SpanAnnotation::new("a", 5, 9, "pain")]);
        assert_eq!(ft.extract(&tweet).unwrap().len(), 1);
        let other = Tweet::new("b", "fine");
        assert!(ft.extract(&other).is_err());
        let ft = ft.with_coverage(["b".to_string()]);
        assert!(ft.extract(&other).unwrap().is_empty());
        let wrong = FileTagger::from_spans([SpanAnnotation::new("a", 0, 4, "pain")]);
        assert!(matches!(wrong.extract(&tweet), Err(ModelError::InvalidSpan { .. })));
    }
}
