use super::Encoder;
use crate::transport::TransportError;

/// Offline, deterministic encoder: signed feature hashing of character
/// 3-grams, L2-normalized. Texts sharing many 3-grams land close together;
/// unrelated texts are near-orthogonal.
#[derive(Debug, Clone)]
pub struct HashEncoder {
    name: String,
    dim: usize,
    seed: u64,
}

impl HashEncoder {
    /// # Panics
    ///
    /// If `dim < 8`.
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim >= 8, "hash encoder needs dim >= 8, got {dim}");
        Self {
            name: format!("hash-{dim}-{seed}"),
            dim,
            seed,
        }
    }

    pub fn encode_one(&self, text: &str) -> Vec<f64> {
        let normalized: String = text
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ")
            .to_lowercase();
        let chars: Vec<char> = std::iter::once(' ')
            .chain(normalized.chars())
            .chain(std::iter::once(' '))
            .collect();
        let mut v = vec![0.0; self.dim];
        let mut buf = [0u8; 12];
        for gram in chars.windows(3) {
            let mut len = 0;
            for c in gram {
                len += c.encode_utf8(&mut buf[len..]).len();
            }
            let h = self.hash(&buf[..len]);
            let idx = (h % self.dim as u64) as usize;
            v[idx] += if h >> 63 == 1 { -1.0 } else { 1.0 };
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            // Every gram cancelled out; fall back to one bucket for the whole text.
            let h = self.hash(normalized.as_bytes());
            v[(h % self.dim as u64) as usize] = 1.0;
            return v;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        v
    }

    /// Seeded FNV-1a followed by a splitmix64 finalizer.
    fn hash(&self, bytes: &[u8]) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325u64 ^ self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h ^= h >> 30;
        h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h ^= h >> 27;
        h = h.wrapping_mul(0x94d0_49bb_1331_11eb);
        h ^ (h >> 31)
    }
}

impl Encoder for HashEncoder {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> Option<usize> {
        Some(self.dim)
    }

    fn encode(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, TransportError> {
        Ok(texts.iter().map(|t| self.encode_one(t)).collect())
    }
}
