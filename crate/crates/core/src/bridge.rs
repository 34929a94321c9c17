//! Client side of the line-delimited JSON protocol used to reach an
//! out-of-process classifier and embedder.
//!
//! One JSON document per line in each direction. Graphs travel as strings in
//! the graphspace text format. Requests carry an `id` that replies echo:
//!
//! ```text
//! > {"op":"predict","id":1,"graphs":["2 1\n0\n1\n0 1\n"]}
//! < {"id":1,"p":[0.93]}
//! > {"op":"embed","id":2,"graph":"1 0\n0\n"}
//! < {"id":2,"vec":[0.1,-0.2]}
//! > {"op":"info","id":3}
//! < {"id":3,"l":64,"model":"gcn-mutag"}
//! < {"id":4,"error":"malformed request"}
//! ```

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::classifier::{Classifier, Prediction};
use crate::embedding::{checked, Embedder, EmbeddingVector};
use crate::graphspace::{to_text, LabeledGraph};

/// Environment variable forwarded to the bridge process naming the model to load.
pub const MODEL_PATH_ENV: &str = "COMMONREC_MODEL_PATH";

#[derive(Debug, thiserror::Error)]
pub enum BridgeError {
    #[error("bridge i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("bridge closed the connection")]
    Closed,
    #[error("bridge did not reply within {0:?}")]
    Timeout(Duration),
    #[error("malformed bridge reply: {0}")]
    Malformed(String),
    #[error("reply id {got} does not match request id {expected}")]
    IdMismatch { expected: u64, got: u64 },
    #[error("bridge reported: {0}")]
    Remote(String),
    #[error("bridge returned {got} values for {expected} graphs")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Debug, Serialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Request {
    Predict { id: u64, graphs: Vec<String> },
    Embed { id: u64, graph: String },
    Info { id: u64 },
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
pub struct Reply {
    pub id: u64,
    #[serde(default)]
    pub p: Option<Vec<f64>>,
    #[serde(default)]
    pub vec: Option<Vec<f64>>,
    #[serde(default)]
    pub l: Option<usize>,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub error: Option<String>,
}

/// Parses one reply line; remote errors surface as `BridgeError::Remote`.
pub fn parse_reply(line: &str) -> Result<Reply, BridgeError> {
    let reply: Reply = serde_json::from_str(line.trim_end()).map_err(|e| BridgeError::Malformed(e.to_string()))?;
    if let Some(msg) = &reply.error {
        return Err(BridgeError::Remote(msg.clone()));
    }
    Ok(reply)
}

/// Moves one request line to the bridge and returns one reply line.
pub trait Transport: Send {
    fn exchange(&mut self, request: &str) -> Result<String, BridgeError>;
}

/// Bridge running as a child process speaking over stdin/stdout.
pub struct ProcessTransport {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
}

impl ProcessTransport {
    pub fn spawn(program: &str, args: &[String], model_path: Option<&str>, timeout: Duration) -> Result<Self, BridgeError> {
        let mut cmd = Command::new(program);
        cmd.args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::inherit());
        if let Some(path) = model_path {
            cmd.env(MODEL_PATH_ENV, path);
        }
        let mut child = cmd.spawn()?;
        let stdin = child.stdin.take().ok_or(BridgeError::Closed)?;
        let stdout = child.stdout.take().ok_or(BridgeError::Closed)?;
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            loop {
                let mut line = String::new();
                match reader.read_line(&mut line) {
                    Ok(0) => break,
                    Ok(_) => {
                        if tx.send(Ok(line)).is_err() {
                            break;
                        }
                    }
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        break;
                    }
                }
            }
        });
        Ok(Self {
            child,
            stdin,
            lines: rx,
            timeout,
        })
    }
}

impl Transport for ProcessTransport {
    fn exchange(&mut self, request: &str) -> Result<String, BridgeError> {
        self.stdin.write_all(request.as_bytes())?;
        self.stdin.write_all(b"\n")?;
        self.stdin.flush()?;
        match self.lines.recv_timeout(self.timeout) {
            Ok(line) => Ok(line?),
            Err(RecvTimeoutError::Timeout) => Err(BridgeError::Timeout(self.timeout)),
            Err(RecvTimeoutError::Disconnected) => Err(BridgeError::Closed),
        }
    }
}

impl Drop for ProcessTransport {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Classifier and embedder backed by a bridge. One request is in flight at a time.
pub struct BridgeClient {
    transport: Mutex<Box<dyn Transport>>,
    next_id: AtomicU64,
    dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BridgeInfo {
    pub dim: usize,
    pub model: Option<String>,
}

impl BridgeClient {
    /// Connects and checks the advertised embedding dimension against `expected_dim`.
    pub fn connect(transport: Box<dyn Transport>, expected_dim: usize) -> crate::Result<Self> {
        let client = Self {
            transport: Mutex::new(transport),
            next_id: AtomicU64::new(1),
            dim: expected_dim,
        };
        let info = client.info()?;
        if info.dim != expected_dim {
            return Err(crate::Error::DimensionMismatch {
                expected: expected_dim,
                got: info.dim,
            });
        }
        Ok(client)
    }

    fn call(&self, make: impl FnOnce(u64) -> Request) -> Result<Reply, BridgeError> {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let line = serde_json::to_string(&make(id)).expect("requests always serialize");
        let raw = {
            let mut t = self.transport.lock().unwrap_or_else(|p| p.into_inner());
            t.exchange(&line)?
        };
        let reply = parse_reply(&raw)?;
        if reply.id != id {
            return Err(BridgeError::IdMismatch { expected: id, got: reply.id });
        }
        Ok(reply)
    }

    pub fn info(&self) -> Result<BridgeInfo, BridgeError> {
        let reply = self.call(|id| Request::Info { id })?;
        let dim = reply.l.ok_or_else(|| BridgeError::Malformed("info reply lacks `l`".into()))?;
        Ok(BridgeInfo { dim, model: reply.model })
    }
}

impl Classifier for BridgeClient {
    fn predict(&self, g: &LabeledGraph) -> crate::Result<Prediction> {
        Ok(self.predict_batch(std::slice::from_ref(g))?[0])
    }

    fn predict_batch(&self, graphs: &[LabeledGraph]) -> crate::Result<Vec<Prediction>> {
        let reply = self.call(|id| Request::Predict {
            id,
            graphs: graphs.iter().map(to_text).collect(),
        })?;
        let p = reply.p.ok_or_else(|| BridgeError::Malformed("predict reply lacks `p`".into()))?;
        if p.len() != graphs.len() {
            return Err(BridgeError::LengthMismatch {
                expected: graphs.len(),
                got: p.len(),
            }
            .into());
        }
        p.into_iter().map(Prediction::new).collect()
    }
}

impl Embedder for BridgeClient {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, g: &LabeledGraph) -> crate::Result<EmbeddingVector> {
        let reply = self.call(|id| Request::Embed { id, graph: to_text(g) })?;
        let coords = reply.vec.ok_or_else(|| BridgeError::Malformed("embed reply lacks `vec`".into()))?;
        checked(self.dim, coords)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_wire_format() {
        let r = Request::Predict {
            id: 7,
            graphs: vec!["1 0\n0\n".into()],
        };
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"op":"predict","id":7,"graphs":["1 0\n0\n"]}"#);
        let r = Request::Embed { id: 2, graph: "0 0\n".into() };
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"op":"embed","id":2,"graph":"0 0\n"}"#);
        let r = Request::Info { id: 3 };
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"op":"info","id":3}"#);
    }

    #[test]
    fn reply_parsing() {
        let r = parse_reply("{\"id\":1,\"p\":[0.25,1.0]}\n").unwrap();
        assert_eq!(r.p, Some(vec![0.25, 1.0]));
        assert!(matches!(parse_reply(r#"{"id":1,"error":"boom"}"#), Err(BridgeError::Remote(m)) if m == "boom"));
        assert!(matches!(parse_reply("not json"), Err(BridgeError::Malformed(_))));
        assert!(matches!(parse_reply(r#"{"p":[1]}"#), Err(BridgeError::Malformed(_))));
    }
}
