use std::io;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::transport::{HttpJson, JsonPipe, TransportError};

/// Wire request: `{"prompt": str, "temperature": num, "top_p": num}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub temperature: f64,
    pub top_p: f64,
}

/// Wire response: `{"completion": str}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResponse {
    pub completion: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LlmError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("gave up after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: TransportError },
    #[error(transparent)]
    Prompt(#[from] super::PromptError),
}

/// A text-completion backend.
pub trait LlmProvider: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, request: &CompletionRequest) -> Result<String, TransportError>;
}

impl<T: LlmProvider + ?Sized> LlmProvider for std::sync::Arc<T> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, TransportError> {
        (**self).complete(request)
    }
}

#[derive(Debug)]
pub struct HttpLlm {
    name: String,
    http: HttpJson,
}

impl HttpLlm {
    pub fn new(url: impl Into<String>) -> Self {
        let url = url.into();
        Self {
            name: format!("http:{url}"),
            http: HttpJson::new(url, Duration::from_secs(300)),
        }
    }
}

impl LlmProvider for HttpLlm {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, TransportError> {
        let resp: CompletionResponse = self.http.post(request)?;
        Ok(resp.completion)
    }
}

#[derive(Debug)]
pub struct SubprocessLlm {
    name: String,
    pipe: JsonPipe,
}

impl SubprocessLlm {
    pub fn spawn(command: &str) -> io::Result<Self> {
        Ok(Self {
            name: format!("subprocess:{command}"),
            pipe: JsonPipe::spawn(command)?,
        })
    }
}

impl LlmProvider for SubprocessLlm {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, TransportError> {
        let resp: CompletionResponse = self.pipe.request(request)?;
        Ok(resp.completion)
    }
}
