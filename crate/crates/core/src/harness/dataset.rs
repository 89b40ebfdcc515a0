use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use super::HarnessError;
use crate::inference::AnswerFormat;
use crate::types::{DemoPool, Demonstration};

/// One dataset of a mixed stream. `path` is relative to the manifest file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub name: String,
    pub path: PathBuf,
    #[serde(serialize_with = "format_to_str", deserialize_with = "format_from_str")]
    pub answer_format: AnswerFormat,
    #[serde(default)]
    pub gold_type: Option<String>,
}

fn format_to_str<S: Serializer>(fmt: &AnswerFormat, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(fmt)
}

fn format_from_str<'de, D: Deserializer<'de>>(d: D) -> Result<AnswerFormat, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

/// Batch layout of a streaming run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamSpec {
    pub batches: usize,
    pub batch_size: usize,
    pub shuffle_seed: u64,
}

impl StreamSpec {
    pub fn validate(self) -> Result<Self, HarnessError> {
        if self.batches == 0 || self.batch_size == 0 {
            return Err(HarnessError::BadSpec(format!(
                "batches and batch_size must be >= 1 (got {} x {})",
                self.batches, self.batch_size
            )));
        }
        Ok(self)
    }

    pub fn total(&self) -> usize {
        self.batches * self.batch_size
    }
}

/// One streamed question. `gold_answer` and `gold_type` are for scoring and
/// the gold-label baseline only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamItem {
    pub dataset: String,
    pub question: String,
    pub format: AnswerFormat,
    pub gold_answer: String,
    pub gold_type: Option<String>,
}

#[derive(Deserialize)]
struct RawItem {
    question: String,
    answer: Value,
    #[serde(default)]
    choices: Option<Vec<String>>,
}

/// Reads a JSON array of manifests; relative dataset paths are resolved
/// against the manifest's directory.
pub fn load_manifests(path: impl AsRef<Path>) -> Result<Vec<DatasetManifest>, HarnessError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut manifests: Vec<DatasetManifest> = serde_json::from_str(&text).map_err(|e| HarnessError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new(""));
    for m in &mut manifests {
        if m.path.is_relative() {
            m.path = base.join(&m.path);
        }
    }
    Ok(manifests)
}

/// Loads a dataset's JSONL: `{"question", "answer", optional "choices"}` per
/// line. Numeric answers may be JSON numbers. Choices are appended to the
/// question as `Answer Choices: (A) ... (B) ...`, lettered by the manifest's
/// choice labels.
pub fn load_items(manifest: &DatasetManifest) -> Result<Vec<StreamItem>, HarnessError> {
    let path = &manifest.path;
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut items = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line_err = |message: String| HarnessError::Line {
            path: path.clone(),
            line: idx + 1,
            message,
        };
        let item: RawItem = serde_json::from_str(raw).map_err(|e| line_err(e.to_string()))?;
        let gold_answer = match item.answer {
            Value::String(s) => s,
            Value::Number(n) => n.to_string(),
            Value::Bool(b) => if b { "yes" } else { "no" }.to_owned(),
            _ => return Err(line_err("`answer` must be a string, number or boolean".to_owned())),
        };
        if item.question.trim().is_empty() {
            return Err(line_err("empty question".to_owned()));
        }
        let question = match item.choices {
            Some(choices) if !choices.is_empty() => {
                let labels = &manifest.answer_format.choices;
                if labels.len() < choices.len() {
                    return Err(line_err(format!(
                        "{} choices but the format declares {} labels",
                        choices.len(),
                        labels.len()
                    )));
                }
                let rendered: Vec<String> = labels
                    .iter()
                    .zip(&choices)
                    .map(|(l, c)| format!("({l}) {c}"))
                    .collect();
                format!("{} Answer Choices: {}", item.question.trim(), rendered.join(" "))
            }
            _ => item.question,
        };
        items.push(StreamItem {
            dataset: manifest.name.clone(),
            question,
            format: manifest.answer_format.clone(),
            gold_answer,
            gold_type: manifest.gold_type.clone(),
        });
    }
    Ok(items)
}

/// Pools every manifest's questions, shuffles them with `spec.shuffle_seed`
/// and slices the first `batches * batch_size` into consecutive batches.
pub fn build_mixed_stream(
    manifests: &[DatasetManifest],
    spec: StreamSpec,
) -> Result<Vec<Vec<StreamItem>>, HarnessError> {
    let mut items = Vec::new();
    for m in manifests {
        items.extend(load_items(m)?);
    }
    shuffle_into_batches(items, spec)
}

/// The shuffle-and-slice step of [`build_mixed_stream`] on loaded items.
pub fn shuffle_into_batches(
    mut items: Vec<StreamItem>,
    spec: StreamSpec,
) -> Result<Vec<Vec<StreamItem>>, HarnessError> {
    let spec = spec.validate()?;
    if items.len() < spec.total() {
        return Err(HarnessError::InsufficientData {
            needed: spec.total(),
            available: items.len(),
        });
    }
    items.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.shuffle_seed));
    items.truncate(spec.total());
    let mut batches = Vec::with_capacity(spec.batches);
    let mut rest = items.into_iter();
    for _ in 0..spec.batches {
        batches.push(rest.by_ref().take(spec.batch_size).collect());
    }
    Ok(batches)
}

#[derive(Deserialize)]
struct SeedDemo {
    question: String,
    rationale: String,
    answer: String,
}

/// Builds an initial pool from a directory of `<type>.jsonl` files holding
/// `{"question", "rationale", "answer"}` lines; the file stem is the type
/// label. Files are read in name order.
pub fn seed_pool_from_dir(dir: impl AsRef<Path>) -> Result<DemoPool, HarnessError> {
    let dir = dir.as_ref();
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| HarnessError::io(dir, e))?
        .map(|entry| entry.map(|e| e.path()).map_err(|e| HarnessError::io(dir, e)))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    let mut pool = DemoPool::new();
    for path in files {
        let label = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_owned();
        let text = fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
        for (idx, raw) in text.lines().enumerate() {
            if raw.trim().is_empty() {
                continue;
            }
            let line_err = |message: String| HarnessError::Line {
                path: path.clone(),
                line: idx + 1,
                message,
            };
            let d: SeedDemo = serde_json::from_str(raw).map_err(|e| line_err(e.to_string()))?;
            let demo = Demonstration::new(d.question, d.rationale, d.answer, label.clone())
                .map_err(|e| line_err(e.to_string()))?;
            pool.push(demo).map_err(|e| line_err(e.to_string()))?;
        }
    }
    Ok(pool)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn items(n: usize) -> Vec<StreamItem> {
        (0..n)
            .map(|i| StreamItem {
                dataset: "d".into(),
                question: format!("q{i}"),
                format: AnswerFormat::numeric(),
                gold_answer: i.to_string(),
                gold_type: None,
            })
            .collect()
    }

    #[test]
    fn shuffle_is_a_seeded_permutation() {
        let spec = StreamSpec {
            batches: 1,
            batch_size: 10,
            shuffle_seed: 5,
        };
        let a = shuffle_into_batches(items(10), spec).unwrap();
        let b = shuffle_into_batches(items(10), spec).unwrap();
        assert_eq!(a, b);
        let mut qs: Vec<String> = a[0].iter().map(|i| i.question.clone()).collect();
        assert_ne!(qs, items(10).into_iter().map(|i| i.question).collect::<Vec<_>>());
        qs.sort();
        let mut want: Vec<String> = (0..10).map(|i| format!("q{i}")).collect();
        want.sort();
        assert_eq!(qs, want);
    }

    #[test]
    fn batches_are_disjoint_slices() {
        let spec = StreamSpec {
            batches: 3,
            batch_size: 4,
            shuffle_seed: 1,
        };
        let b = shuffle_into_batches(items(20), spec).unwrap();
        assert_eq!(b.len(), 3);
        let mut all: Vec<&str> = b.iter().flatten().map(|i| i.question.as_str()).collect();
        assert_eq!(all.len(), 12);
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 12);
    }

    #[test]
    fn insufficient_data_and_bad_spec() {
        let spec = StreamSpec {
            batches: 2,
            batch_size: 6,
            shuffle_seed: 0,
        };
        assert!(matches!(
            shuffle_into_batches(items(11), spec),
            Err(HarnessError::InsufficientData { needed: 12, available: 11 })
        ));
        let zero = StreamSpec { batches: 0, ..spec };
        assert!(matches!(shuffle_into_batches(items(11), zero), Err(HarnessError::BadSpec(_))));
    }
}
