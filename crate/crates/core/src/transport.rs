//! JSON request/response transports shared by the remote encoder and LLM
//! providers: HTTP POST, or one JSON line per request over a child process's
//! stdin/stdout.

use std::io::{self, BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    /// Connection-level failure; worth retrying.
    #[error("transport failure: {0}")]
    Transport(String),
    /// The peer answered, but not with what the contract requires.
    #[error("protocol violation: {0}")]
    Protocol(String),
}

impl TransportError {
    pub fn is_transient(&self) -> bool {
        matches!(self, TransportError::Transport(_))
    }
}

pub struct HttpJson {
    url: String,
    agent: ureq::Agent,
}

impl HttpJson {
    pub fn new(url: impl Into<String>, timeout: Duration) -> Self {
        Self {
            url: url.into(),
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    pub fn post<Req: Serialize, Resp: DeserializeOwned>(&self, req: &Req) -> Result<Resp, TransportError> {
        let response = match self.agent.post(&self.url).send_json(req) {
            Ok(r) => r,
            Err(ureq::Error::Status(code, r)) => {
                let body = r.into_string().unwrap_or_default();
                let msg = format!("{} returned HTTP {code}: {}", self.url, body.trim());
                return Err(if code >= 500 || code == 429 {
                    TransportError::Transport(msg)
                } else {
                    TransportError::Protocol(msg)
                });
            }
            Err(e) => return Err(TransportError::Transport(format!("{}: {e}", self.url))),
        };
        response
            .into_json::<Resp>()
            .map_err(|e| TransportError::Protocol(format!("{}: bad response body: {e}", self.url)))
    }
}

impl std::fmt::Debug for HttpJson {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpJson").field("url", &self.url).finish()
    }
}

/// A long-lived child process speaking line-delimited JSON. Requests are
/// serialized through a mutex; each request gets exactly one response line.
pub struct JsonPipe {
    command: String,
    inner: Mutex<PipeInner>,
}

struct PipeInner {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl JsonPipe {
    /// Runs `command` through `sh -c`.
    pub fn spawn(command: &str) -> io::Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Self {
            command: command.to_owned(),
            inner: Mutex::new(PipeInner { child, stdin, stdout }),
        })
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    pub fn request<Req: Serialize, Resp: DeserializeOwned>(&self, req: &Req) -> Result<Resp, TransportError> {
        let mut line = serde_json::to_string(req).map_err(|e| TransportError::Protocol(e.to_string()))?;
        line.push('\n');
        let mut inner = self.inner.lock().unwrap_or_else(|p| p.into_inner());
        let broken = |e: io::Error| TransportError::Transport(format!("`{}`: {e}", self.command));
        inner.stdin.write_all(line.as_bytes()).map_err(broken)?;
        inner.stdin.flush().map_err(broken)?;
        let mut reply = String::new();
        let n = inner.stdout.read_line(&mut reply).map_err(broken)?;
        if n == 0 {
            return Err(TransportError::Transport(format!(
                "`{}` closed its output",
                self.command
            )));
        }
        serde_json::from_str(reply.trim_end())
            .map_err(|e| TransportError::Protocol(format!("`{}`: bad response line: {e}", self.command)))
    }
}

impl Drop for JsonPipe {
    fn drop(&mut self) {
        let inner = self.inner.get_mut().unwrap_or_else(|p| p.into_inner());
        let _ = inner.child.kill();
        let _ = inner.child.wait();
    }
}

impl std::fmt::Debug for JsonPipe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JsonPipe").field("command", &self.command).finish()
    }
}
