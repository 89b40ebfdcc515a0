//! Encoder contract, vector arithmetic and the memoizing [`Embedder`].
//!
//! Every vector leaving [`encode_batch`] is L2-normalized, so the dot product
//! of two embeddings is their cosine similarity.

mod hash;
mod remote;

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use rayon::prelude::*;

pub use hash::HashEncoder;
pub use remote::{HttpEncoder, SubprocessEncoder};

use crate::transport::TransportError;

/// A fixed-length vector of finite reals. Cloning is cheap.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding(Arc<[f64]>);

impl Embedding {
    pub fn new(values: Vec<f64>) -> Result<Self, EncoderError> {
        if values.is_empty() {
            return Err(EncoderError::EmptyVector);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(EncoderError::NonFinite);
        }
        Ok(Self(values.into()))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Unit-length copy. A zero vector has no direction and is rejected.
    pub fn normalized(&self) -> Result<Self, EncoderError> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(EncoderError::ZeroVector);
        }
        Ok(Self(self.0.iter().map(|v| v / norm).collect()))
    }

    pub fn dot(&self, other: &Embedding) -> Result<f64, EncoderError> {
        dot(self, other)
    }
}

impl AsRef<[f64]> for Embedding {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Σ aᵢ·bᵢ.
pub fn dot(a: &Embedding, b: &Embedding) -> Result<f64, EncoderError> {
    if a.dim() != b.dim() {
        return Err(EncoderError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(a.0.iter().zip(b.0.iter()).map(|(x, y)| x * y).sum())
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EncoderError {
    #[error("nothing to encode")]
    EmptyInput,
    #[error("text #{index} is empty")]
    EmptyText { index: usize },
    #[error("encoder failed on batch {batch}: {source}")]
    Provider {
        batch: usize,
        #[source]
        source: TransportError,
    },
    #[error("encoder returned {got} vectors for batch {batch} of {expected} texts")]
    CountMismatch {
        batch: usize,
        expected: usize,
        got: usize,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("embedding has no entries")]
    EmptyVector,
    #[error("embedding has a non-finite entry")]
    NonFinite,
    #[error("embedding is the zero vector")]
    ZeroVector,
}

/// A text encoder. Implementations must be deterministic within a session
/// and return one vector per input text, in input order. Vectors need not be
/// normalized; [`encode_batch`] does that.
pub trait Encoder: Send + Sync {
    fn name(&self) -> &str;
    /// Declared output dimension, when known up front.
    fn dim(&self) -> Option<usize>;
    fn encode(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, TransportError>;
}

/// Encodes `texts` in chunks of `batch_size`, validating and normalizing
/// every vector. Chunks may be sent concurrently; output order follows input.
pub fn encode_batch(
    encoder: &dyn Encoder,
    texts: &[&str],
    batch_size: usize,
) -> Result<Vec<Embedding>, EncoderError> {
    if texts.is_empty() {
        return Err(EncoderError::EmptyInput);
    }
    if let Some(index) = texts.iter().position(|t| t.trim().is_empty()) {
        return Err(EncoderError::EmptyText { index });
    }
    let batch_size = batch_size.max(1);
    let chunks: Vec<_> = texts.chunks(batch_size).collect();
    let results: Vec<Result<Vec<Vec<f64>>, EncoderError>> = chunks
        .par_iter()
        .enumerate()
        .map(|(batch, chunk)| {
            let raw = encoder
                .encode(chunk)
                .map_err(|source| EncoderError::Provider { batch, source })?;
            if raw.len() != chunk.len() {
                return Err(EncoderError::CountMismatch {
                    batch,
                    expected: chunk.len(),
                    got: raw.len(),
                });
            }
            Ok(raw)
        })
        .collect();

    let mut out = Vec::with_capacity(texts.len());
    let mut dim = encoder.dim();
    for result in results {
        for values in result? {
            let expected = *dim.get_or_insert(values.len());
            if values.len() != expected {
                return Err(EncoderError::DimensionMismatch {
                    expected,
                    got: values.len(),
                });
            }
            out.push(Embedding::new(values)?.normalized()?);
        }
    }
    Ok(out)
}

/// Memoizing front end over one encoder. Each distinct text is encoded once
/// per `Embedder`; all vectors it hands out share one dimension.
pub struct Embedder {
    provider: Arc<dyn Encoder>,
    batch_size: usize,
    memo: RwLock<HashMap<String, Embedding>>,
    dim: OnceLock<usize>,
}

impl Embedder {
    pub fn new(provider: Arc<dyn Encoder>) -> Self {
        Self::with_batch_size(provider, 64)
    }

    pub fn with_batch_size(provider: Arc<dyn Encoder>, batch_size: usize) -> Self {
        Self {
            provider,
            batch_size: batch_size.max(1),
            memo: RwLock::new(HashMap::new()),
            dim: OnceLock::new(),
        }
    }

    pub fn provider_name(&self) -> &str {
        self.provider.name()
    }

    pub fn provider(&self) -> &Arc<dyn Encoder> {
        &self.provider
    }

    /// Number of memoized texts.
    pub fn memo_len(&self) -> usize {
        self.memo.read().unwrap_or_else(|p| p.into_inner()).len()
    }

    pub fn embed_one(&self, text: &str) -> Result<Embedding, EncoderError> {
        Ok(self.embed(&[text])?.remove(0))
    }

    pub fn embed(&self, texts: &[&str]) -> Result<Vec<Embedding>, EncoderError> {
        if texts.is_empty() {
            return Err(EncoderError::EmptyInput);
        }
        let missing: Vec<&str> = {
            let memo = self.memo.read().unwrap_or_else(|p| p.into_inner());
            let mut seen = std::collections::HashSet::new();
            texts
                .iter()
                .copied()
                .filter(|t| !memo.contains_key(*t) && seen.insert(*t))
                .collect()
        };
        if !missing.is_empty() {
            let fresh = encode_batch(self.provider.as_ref(), &missing, self.batch_size)?;
            let dim = *self.dim.get_or_init(|| fresh[0].dim());
            if let Some(bad) = fresh.iter().find(|e| e.dim() != dim) {
                return Err(EncoderError::DimensionMismatch {
                    expected: dim,
                    got: bad.dim(),
                });
            }
            let mut memo = self.memo.write().unwrap_or_else(|p| p.into_inner());
            for (text, emb) in missing.into_iter().zip(fresh) {
                memo.insert(text.to_owned(), emb);
            }
        }
        let memo = self.memo.read().unwrap_or_else(|p| p.into_inner());
        Ok(texts.iter().map(|t| memo[*t].clone()).collect())
    }
}

impl std::fmt::Debug for Embedder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Embedder")
            .field("provider", &self.provider.name())
            .field("memoized", &self.memo_len())
            .finish()
    }
}
