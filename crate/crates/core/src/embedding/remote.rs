use std::io;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::Encoder;
use crate::transport::{HttpJson, JsonPipe, TransportError};

#[derive(Serialize)]
struct EncodeRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EncodeResponse {
    vectors: Vec<Vec<f64>>,
}

/// Out-of-process encoder reached by HTTP POST of `{"texts": [...]}`,
/// answered with `{"vectors": [[...], ...]}`.
#[derive(Debug)]
pub struct HttpEncoder {
    name: String,
    dim: Option<usize>,
    http: HttpJson,
}

impl HttpEncoder {
    pub fn new(url: impl Into<String>, dim: Option<usize>) -> Self {
        let url = url.into();
        Self {
            name: format!("http:{url}"),
            dim,
            http: HttpJson::new(url, Duration::from_secs(120)),
        }
    }
}

impl Encoder for HttpEncoder {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> Option<usize> {
        self.dim
    }

    fn encode(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, TransportError> {
        let resp: EncodeResponse = self.http.post(&EncodeRequest { texts })?;
        Ok(resp.vectors)
    }
}

/// Same wire contract as [`HttpEncoder`], one JSON line per request over a
/// child process's stdin/stdout.
#[derive(Debug)]
pub struct SubprocessEncoder {
    name: String,
    dim: Option<usize>,
    pipe: JsonPipe,
}

impl SubprocessEncoder {
    pub fn spawn(command: &str, dim: Option<usize>) -> io::Result<Self> {
        Ok(Self {
            name: format!("subprocess:{command}"),
            dim,
            pipe: JsonPipe::spawn(command)?,
        })
    }
}

impl Encoder for SubprocessEncoder {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> Option<usize> {
        self.dim
    }

    fn encode(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, TransportError> {
        let resp: EncodeResponse = self.pipe.request(&EncodeRequest { texts })?;
        Ok(resp.vectors)
    }
}
