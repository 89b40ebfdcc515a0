//! Line-delimited JSON persistence for the demo pool and the data cache.
//!
//! Pool line: `{"question", "rationale", "answer", "type_label"}`.
//! Cache line: `{"question", "rationale", "answer"}`.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::types::{CachedRecord, DataCache, DemoPool, Demonstration, InvalidValue};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}:{line}: missing key `{key}`", path.display())]
    MissingKey {
        path: PathBuf,
        line: usize,
        key: &'static str,
    },
    #[error("{}:{line}: {source}", path.display())]
    Invalid {
        path: PathBuf,
        line: usize,
        #[source]
        source: InvalidValue,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreKind {
    Pool,
    Cache,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Loaded {
    Pool(DemoPool),
    Cache(DataCache),
}

pub fn load_jsonl(path: impl AsRef<Path>, kind: StoreKind) -> Result<Loaded, StoreError> {
    match kind {
        StoreKind::Pool => load_pool(path).map(Loaded::Pool),
        StoreKind::Cache => load_cache(path).map(Loaded::Cache),
    }
}

const POOL_KEYS: [&str; 4] = ["question", "rationale", "answer", "type_label"];
const CACHE_KEYS: [&str; 3] = ["question", "rationale", "answer"];

pub fn load_pool(path: impl AsRef<Path>) -> Result<DemoPool, StoreError> {
    let path = path.as_ref();
    let mut pool = DemoPool::new();
    for_each_object(path, &POOL_KEYS, |line, mut fields| {
        let demo = Demonstration {
            question: fields.remove(0),
            rationale: fields.remove(0),
            answer: fields.remove(0),
            type_label: fields.remove(0),
        };
        pool.push(demo).map_err(|source| StoreError::Invalid {
            path: path.to_path_buf(),
            line,
            source,
        })
    })?;
    Ok(pool)
}

pub fn load_cache(path: impl AsRef<Path>) -> Result<DataCache, StoreError> {
    let path = path.as_ref();
    let mut cache = DataCache::new();
    for_each_object(path, &CACHE_KEYS, |line, mut fields| {
        let record = CachedRecord {
            question: fields.remove(0),
            rationale: fields.remove(0),
            answer: fields.remove(0),
        };
        cache.push(record).map_err(|source| StoreError::Invalid {
            path: path.to_path_buf(),
            line,
            source,
        })
    })?;
    Ok(cache)
}

/// Parses every non-blank line as a JSON object and hands the string values
/// of `keys` (in order) to `f` along with the 1-based line number.
fn for_each_object(
    path: &Path,
    keys: &[&'static str],
    mut f: impl FnMut(usize, Vec<String>) -> Result<(), StoreError>,
) -> Result<(), StoreError> {
    let text = fs::read_to_string(path).map_err(|source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| StoreError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let value: Value = serde_json::from_str(raw).map_err(|e| parse_err(e.to_string()))?;
        let Value::Object(obj) = value else {
            return Err(parse_err("expected a JSON object".to_owned()));
        };
        let fields = take_strings(&obj, keys).map_err(|e| match e {
            FieldError::Missing(key) => StoreError::MissingKey {
                path: path.to_path_buf(),
                line,
                key,
            },
            FieldError::NotString(key) => parse_err(format!("key `{key}` must be a string")),
        })?;
        f(line, fields)?;
    }
    Ok(())
}

enum FieldError {
    Missing(&'static str),
    NotString(&'static str),
}

fn take_strings(obj: &Map<String, Value>, keys: &[&'static str]) -> Result<Vec<String>, FieldError> {
    keys.iter()
        .map(|&key| match obj.get(key) {
            None => Err(FieldError::Missing(key)),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(FieldError::NotString(key)),
        })
        .collect()
}

pub fn save_pool(pool: &DemoPool, path: impl AsRef<Path>) -> Result<(), StoreError> {
    write_lines(path.as_ref(), pool.iter())
}

pub fn save_cache(cache: &DataCache, path: impl AsRef<Path>) -> Result<(), StoreError> {
    write_lines(path.as_ref(), cache.iter())
}

/// Writes to a sibling temp file and renames it over `path`, so readers never
/// observe a half-written store.
fn write_lines<'a, T: Serialize + 'a>(
    path: &Path,
    items: impl Iterator<Item = &'a T>,
) -> Result<(), StoreError> {
    let io_err = |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp_name = path.file_name().unwrap_or_default().to_owned();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let file = fs::File::create(&tmp).map_err(io_err)?;
        let mut out = BufWriter::new(file);
        for item in items {
            serde_json::to_writer(&mut out, item)
                .map_err(|e| io_err(io::Error::other(e)))?;
            out.write_all(b"\n").map_err(io_err)?;
        }
        out.flush().map_err(io_err)?;
    }
    fs::rename(&tmp, path).map_err(io_err)
}
