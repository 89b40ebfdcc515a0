//! Provider selection from short textual specs, as given on the command line
//! or in the environment.
//!
//! Encoders: `hash`, `hash:DIM`, `hash:DIM:SEED`, `http:URL`, `subprocess:CMD`.
//! LLMs: `http:URL`, `subprocess:CMD`, `scripted:PATH`.
//! A bare `http` takes its URL from the matching `*_ENDPOINT` variable.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use crate::embedding::{Encoder, HashEncoder, HttpEncoder, SubprocessEncoder};
use crate::harness::{HarnessError, ScriptedLlm};
use crate::inference::{HttpLlm, LlmProvider, SubprocessLlm};

pub const ENCODER_ENV: &str = "COTROUTE_ENCODER";
pub const ENCODER_ENDPOINT_ENV: &str = "COTROUTE_ENCODER_ENDPOINT";
pub const LLM_ENV: &str = "COTROUTE_LLM";
pub const LLM_ENDPOINT_ENV: &str = "COTROUTE_LLM_ENDPOINT";

pub const DEFAULT_HASH_DIM: usize = 256;

#[derive(Debug, thiserror::Error)]
pub enum ProviderError {
    #[error("bad provider spec {spec:?}: {reason}")]
    BadSpec { spec: String, reason: String },
    #[error("no LLM provider given (use a flag or set {LLM_ENV})")]
    NoLlm,
    #[error("failed to start `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Fixture(#[from] HarnessError),
}

fn bad(spec: &str, reason: impl Into<String>) -> ProviderError {
    ProviderError::BadSpec {
        spec: spec.to_owned(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EncoderSpec {
    Hash { dim: usize, seed: u64 },
    Http { url: String, dim: Option<usize> },
    Subprocess { command: String, dim: Option<usize> },
}

impl Default for EncoderSpec {
    fn default() -> Self {
        EncoderSpec::Hash {
            dim: DEFAULT_HASH_DIM,
            seed: 0,
        }
    }
}

impl FromStr for EncoderSpec {
    type Err = ProviderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        match kind {
            "hash" => {
                let mut parts = rest.split(':').filter(|p| !p.is_empty());
                let dim = match parts.next() {
                    Some(d) => d.parse().map_err(|_| bad(s, "DIM must be an integer"))?,
                    None => DEFAULT_HASH_DIM,
                };
                let seed = match parts.next() {
                    Some(v) => v.parse().map_err(|_| bad(s, "SEED must be an integer"))?,
                    None => 0,
                };
                if parts.next().is_some() {
                    return Err(bad(s, "expected hash[:DIM[:SEED]]"));
                }
                if dim < 8 {
                    return Err(bad(s, "DIM must be at least 8"));
                }
                Ok(EncoderSpec::Hash { dim, seed })
            }
            "http" => {
                let url = if rest.is_empty() {
                    std::env::var(ENCODER_ENDPOINT_ENV)
                        .map_err(|_| bad(s, format!("no URL and {ENCODER_ENDPOINT_ENV} is unset")))?
                } else {
                    rest.to_owned()
                };
                Ok(EncoderSpec::Http { url, dim: None })
            }
            "subprocess" if !rest.trim().is_empty() => Ok(EncoderSpec::Subprocess {
                command: rest.to_owned(),
                dim: None,
            }),
            "subprocess" => Err(bad(s, "missing command")),
            _ => Err(bad(s, "expected hash, http or subprocess")),
        }
    }
}

impl fmt::Display for EncoderSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EncoderSpec::Hash { dim, seed } => write!(f, "hash:{dim}:{seed}"),
            EncoderSpec::Http { url, .. } => write!(f, "http:{url}"),
            EncoderSpec::Subprocess { command, .. } => write!(f, "subprocess:{command}"),
        }
    }
}

impl EncoderSpec {
    /// `flag` if given, else `$COTROUTE_ENCODER`, else the hash encoder.
    pub fn resolve(flag: Option<&str>) -> Result<Self, ProviderError> {
        match flag.map(str::to_owned).or_else(|| std::env::var(ENCODER_ENV).ok()) {
            Some(s) => s.parse(),
            None => Ok(Self::default()),
        }
    }

    pub fn build(&self) -> Result<Arc<dyn Encoder>, ProviderError> {
        Ok(match self {
            EncoderSpec::Hash { dim, seed } => Arc::new(HashEncoder::new(*dim, *seed)),
            EncoderSpec::Http { url, dim } => Arc::new(HttpEncoder::new(url.clone(), *dim)),
            EncoderSpec::Subprocess { command, dim } => Arc::new(
                SubprocessEncoder::spawn(command, *dim).map_err(|source| ProviderError::Spawn {
                    command: command.clone(),
                    source,
                })?,
            ),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LlmSpec {
    Http(String),
    Subprocess(String),
    Scripted(PathBuf),
}

impl FromStr for LlmSpec {
    type Err = ProviderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        match kind {
            "http" if rest.is_empty() => std::env::var(LLM_ENDPOINT_ENV)
                .map(LlmSpec::Http)
                .map_err(|_| bad(s, format!("no URL and {LLM_ENDPOINT_ENV} is unset"))),
            "http" => Ok(LlmSpec::Http(rest.to_owned())),
            "subprocess" if !rest.trim().is_empty() => Ok(LlmSpec::Subprocess(rest.to_owned())),
            "scripted" if !rest.is_empty() => Ok(LlmSpec::Scripted(PathBuf::from(rest))),
            "subprocess" | "scripted" => Err(bad(s, "missing argument")),
            _ => Err(bad(s, "expected http, subprocess or scripted")),
        }
    }
}

impl fmt::Display for LlmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LlmSpec::Http(url) => write!(f, "http:{url}"),
            LlmSpec::Subprocess(cmd) => write!(f, "subprocess:{cmd}"),
            LlmSpec::Scripted(path) => write!(f, "scripted:{}", path.display()),
        }
    }
}

impl LlmSpec {
    /// `flag` if given, else `$COTROUTE_LLM`. There is no default LLM.
    pub fn resolve(flag: Option<&str>) -> Result<Self, ProviderError> {
        flag.map(str::to_owned)
            .or_else(|| std::env::var(LLM_ENV).ok())
            .ok_or(ProviderError::NoLlm)?
            .parse()
    }

    pub fn build(&self) -> Result<Arc<dyn LlmProvider>, ProviderError> {
        Ok(match self {
            LlmSpec::Http(url) => Arc::new(HttpLlm::new(url.clone())),
            LlmSpec::Subprocess(command) => Arc::new(SubprocessLlm::spawn(command).map_err(|source| {
                ProviderError::Spawn {
                    command: command.clone(),
                    source,
                }
            })?),
            LlmSpec::Scripted(path) => Arc::new(ScriptedLlm::from_file(path)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoder_specs() {
        assert_eq!("hash".parse::<EncoderSpec>().unwrap(), EncoderSpec::default());
        assert_eq!(
            "hash:64:9".parse::<EncoderSpec>().unwrap(),
            EncoderSpec::Hash { dim: 64, seed: 9 }
        );
        assert_eq!(
            "http:http://localhost:9000/embed".parse::<EncoderSpec>().unwrap(),
            EncoderSpec::Http {
                url: "http://localhost:9000/embed".into(),
                dim: None
            }
        );
        assert!("hash:4".parse::<EncoderSpec>().is_err());
        assert!("hash:x".parse::<EncoderSpec>().is_err());
        assert!("sbert".parse::<EncoderSpec>().is_err());
        assert!("subprocess:".parse::<EncoderSpec>().is_err());
    }

    #[test]
    fn llm_specs() {
        assert_eq!(
            "scripted:fx/llm.json".parse::<LlmSpec>().unwrap(),
            LlmSpec::Scripted("fx/llm.json".into())
        );
        assert_eq!(
            "subprocess:python3 llm.py".parse::<LlmSpec>().unwrap(),
            LlmSpec::Subprocess("python3 llm.py".into())
        );
        assert!("openai".parse::<LlmSpec>().is_err());
        assert_eq!(
            "scripted:a.json".parse::<LlmSpec>().unwrap().to_string(),
            "scripted:a.json"
        );
    }
}
