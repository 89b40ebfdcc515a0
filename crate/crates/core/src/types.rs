//! Domain values: demonstrations, the typed demo pool, the untyped data
//! cache, and per-question routing outcomes.
//!
//! Pools and caches are plain values. Mutating operations return or modify an
//! owned copy, so a snapshot handed to another thread never changes under it.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

/// A worked example stored in the demo pool.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Demonstration {
    pub question: String,
    /// Step-by-step reasoning.
    pub rationale: String,
    /// Cleaned final answer.
    pub answer: String,
    /// Demonstration family this example belongs to.
    pub type_label: String,
}

impl Demonstration {
    pub fn new(
        question: impl Into<String>,
        rationale: impl Into<String>,
        answer: impl Into<String>,
        type_label: impl Into<String>,
    ) -> Result<Self, InvalidValue> {
        let demo = Self {
            question: question.into(),
            rationale: rationale.into(),
            answer: answer.into(),
            type_label: type_label.into(),
        };
        demo.validate()?;
        Ok(demo)
    }

    /// Checks that every field carries content.
    pub fn validate(&self) -> Result<(), InvalidValue> {
        for (field, value) in [
            ("question", &self.question),
            ("rationale", &self.rationale),
            ("answer", &self.answer),
            ("type_label", &self.type_label),
        ] {
            if value.trim().is_empty() {
                return Err(InvalidValue::EmptyField(field));
            }
        }
        Ok(())
    }
}

/// A zero-shot answered question waiting in the data cache.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CachedRecord {
    pub question: String,
    pub rationale: String,
    pub answer: String,
}

impl CachedRecord {
    pub fn new(
        question: impl Into<String>,
        rationale: impl Into<String>,
        answer: impl Into<String>,
    ) -> Result<Self, InvalidValue> {
        let record = Self {
            question: question.into(),
            rationale: rationale.into(),
            answer: answer.into(),
        };
        record.validate()?;
        Ok(record)
    }

    pub fn validate(&self) -> Result<(), InvalidValue> {
        if self.question.trim().is_empty() {
            return Err(InvalidValue::EmptyField("question"));
        }
        Ok(())
    }

    /// True when the zero-shot derivation produced no rationale or no
    /// extractable answer.
    pub fn is_incomplete(&self) -> bool {
        self.rationale.trim().is_empty() || self.answer.trim().is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InvalidValue {
    #[error("field `{0}` must not be empty")]
    EmptyField(&'static str),
    #[error("duplicate demonstration for type `{type_label}`: {question:?}")]
    DuplicateDemo { question: String, type_label: String },
}

/// Typed demonstration store. Insertion order is preserved and grouping by
/// type label is derived on demand.
#[derive(Debug, Clone, Default)]
pub struct DemoPool {
    demos: Vec<Demonstration>,
    keys: HashSet<(String, String)>,
}

impl PartialEq for DemoPool {
    fn eq(&self, other: &Self) -> bool {
        self.demos == other.demos
    }
}

impl Eq for DemoPool {}

impl DemoPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_demos(demos: impl IntoIterator<Item = Demonstration>) -> Result<Self, InvalidValue> {
        let mut pool = Self::new();
        for demo in demos {
            pool.push(demo)?;
        }
        Ok(pool)
    }

    /// Appends a demonstration, rejecting an existing (question, type_label) pair.
    pub fn push(&mut self, demo: Demonstration) -> Result<(), InvalidValue> {
        demo.validate()?;
        let key = (demo.question.clone(), demo.type_label.clone());
        if self.keys.contains(&key) {
            return Err(InvalidValue::DuplicateDemo {
                question: key.0,
                type_label: key.1,
            });
        }
        self.keys.insert(key);
        self.demos.push(demo);
        Ok(())
    }

    pub fn contains(&self, question: &str, type_label: &str) -> bool {
        self.keys
            .contains(&(question.to_owned(), type_label.to_owned()))
    }

    pub fn len(&self) -> usize {
        self.demos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demos.is_empty()
    }

    pub fn demos(&self) -> &[Demonstration] {
        &self.demos
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Demonstration> {
        self.demos.iter()
    }

    /// All demonstrations of one type, in insertion order. Unknown types
    /// yield an empty list.
    pub fn demos_of_type(&self, type_label: &str) -> Vec<&Demonstration> {
        self.demos
            .iter()
            .filter(|d| d.type_label == type_label)
            .collect()
    }

    /// Distinct type labels in order of first appearance.
    pub fn type_labels(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.demos
            .iter()
            .map(|d| d.type_label.as_str())
            .filter(|t| seen.insert(*t))
            .collect()
    }

    pub fn has_type(&self, type_label: &str) -> bool {
        self.demos.iter().any(|d| d.type_label == type_label)
    }
}

impl<'a> IntoIterator for &'a DemoPool {
    type Item = &'a Demonstration;
    type IntoIter = std::slice::Iter<'a, Demonstration>;

    fn into_iter(self) -> Self::IntoIter {
        self.demos.iter()
    }
}

/// Untyped store of zero-shot results. Grows by appending between updates
/// and only shrinks inside an update.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DataCache {
    records: Vec<CachedRecord>,
}

impl DataCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(records: impl IntoIterator<Item = CachedRecord>) -> Result<Self, InvalidValue> {
        let records = records.into_iter().collect::<Vec<_>>();
        for r in &records {
            r.validate()?;
        }
        Ok(Self { records })
    }

    pub fn push(&mut self, record: CachedRecord) -> Result<(), InvalidValue> {
        record.validate()?;
        self.records.push(record);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[CachedRecord] {
        &self.records
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CachedRecord> {
        self.records.iter()
    }

    /// Copy of the cache without the records at `removed` (indices into
    /// the current record list). Order of the survivors is preserved.
    pub fn without(&self, removed: &HashSet<usize>) -> Self {
        Self {
            records: self
                .records
                .iter()
                .enumerate()
                .filter(|(i, _)| !removed.contains(i))
                .map(|(_, r)| r.clone())
                .collect(),
        }
    }
}

/// Which path a question took through the router.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoutePath {
    /// Type matched: few-shot CoT with the matched family's demos.
    Matched,
    /// No match: zero-shot CoT, result banked in the cache.
    Unmatched,
    /// A comparison strategy that picks its prompt without type matching.
    Baseline,
}

/// Per-question result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteOutcome {
    pub question: String,
    pub answer: String,
    pub rationale: String,
    pub path: RoutePath,
    pub matched_type: Option<String>,
    pub similarity: Option<f64>,
    pub demos_used: usize,
}

impl RouteOutcome {
    /// Checks the path/field consistency rules against a threshold.
    pub fn is_consistent(&self, s_thres: f64) -> bool {
        match self.path {
            RoutePath::Matched => {
                self.matched_type.is_some()
                    && self.similarity.is_some_and(|s| s >= s_thres)
            }
            RoutePath::Unmatched => self.demos_used == 0 && self.matched_type.is_none(),
            RoutePath::Baseline => self.similarity.is_none(),
        }
    }
}
