use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpStream};
use std::process::{Child, Command, Stdio};
use std::sync::Mutex;

use thiserror::Error;

use super::protocol::{BridgeRequest, BridgeResponse, Capabilities, ErrorBody, RequestBody};

/// Environment variable that overrides any configured bridge endpoint.
pub const BRIDGE_ENV: &str = "ISOCHRONO_BRIDGE";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BridgeError {
    #[error("failed to start bridge worker `{command}`: {message}")]
    Spawn { command: String, message: String },
    #[error("failed to connect to bridge at {address}: {message}")]
    Connect { address: String, message: String },
    #[error("bridge i/o error: {0}")]
    Io(String),
    #[error("bridge closed the connection")]
    Closed,
    #[error("bridge protocol violation: {0}")]
    Protocol(String),
}

struct Connection {
    reader: Box<dyn BufRead + Send>,
    writer: Box<dyn Write + Send>,
    next_id: u64,
    child: Option<Child>,
    broken: bool,
}

impl Drop for Connection {
    fn drop(&mut self) {
        // Closing stdin lets a well-behaved worker exit on its own.
        self.writer = Box::new(std::io::sink());
        if let Some(mut child) = self.child.take() {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

/// Client side of the JSON-lines scorer bridge.
///
/// Access to one connection is serialised; a batch keeps up to `max_in_flight` requests
/// outstanding and reorders responses by correlation id.
pub struct BridgeClient {
    endpoint: String,
    max_in_flight: usize,
    conn: Mutex<Connection>,
}

impl std::fmt::Debug for BridgeClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BridgeClient")
            .field("endpoint", &self.endpoint)
            .field("max_in_flight", &self.max_in_flight)
            .finish()
    }
}

impl BridgeClient {
    /// Connect to `host:port` (optionally prefixed with `tcp://`) or spawn `endpoint` as a
    /// command line and talk to it over stdio.
    pub fn connect(endpoint: &str) -> Result<Self, BridgeError> {
        let endpoint = endpoint.trim();
        let addr_part = endpoint.strip_prefix("tcp://").unwrap_or(endpoint);
        match addr_part.parse::<SocketAddr>() {
            Ok(addr) => Self::connect_tcp(addr),
            Err(_) if endpoint.starts_with("tcp://") => Err(BridgeError::Connect {
                address: endpoint.to_string(),
                message: "not a socket address".into(),
            }),
            Err(_) => Self::spawn(endpoint),
        }
    }

    pub fn connect_tcp(addr: SocketAddr) -> Result<Self, BridgeError> {
        let stream = TcpStream::connect(addr).map_err(|e| BridgeError::Connect {
            address: addr.to_string(),
            message: e.to_string(),
        })?;
        let _ = stream.set_nodelay(true);
        let reader = stream.try_clone().map_err(|e| BridgeError::Io(e.to_string()))?;
        Ok(Self::from_streams(
            format!("tcp://{addr}"),
            BufReader::new(reader),
            stream,
        ))
    }

    pub fn spawn(command_line: &str) -> Result<Self, BridgeError> {
        let mut parts = command_line.split_whitespace();
        let program = parts.next().ok_or_else(|| BridgeError::Spawn {
            command: command_line.to_string(),
            message: "empty command".into(),
        })?;
        let mut child = Command::new(program)
            .args(parts)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| BridgeError::Spawn {
                command: command_line.to_string(),
                message: e.to_string(),
            })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let mut client = Self::from_streams(command_line, BufReader::new(stdout), stdin);
        client.conn.get_mut().expect("fresh mutex").child = Some(child);
        Ok(client)
    }

    pub fn from_streams(
        endpoint: impl Into<String>,
        reader: impl BufRead + Send + 'static,
        writer: impl Write + Send + 'static,
    ) -> Self {
        Self {
            endpoint: endpoint.into(),
            max_in_flight: 16,
            conn: Mutex::new(Connection {
                reader: Box::new(reader),
                writer: Box::new(writer),
                next_id: 1,
                child: None,
                broken: false,
            }),
        }
    }

    pub fn with_max_in_flight(mut self, max_in_flight: usize) -> Self {
        self.max_in_flight = max_in_flight.max(1);
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    /// True once a transport error has been seen; every later call fails with `Closed`.
    pub fn is_broken(&self) -> bool {
        self.conn.lock().unwrap_or_else(|p| p.into_inner()).broken
    }

    /// Send every request and return the responses in request order.
    pub fn call_batch(&self, bodies: Vec<RequestBody>) -> Result<Vec<BridgeResponse>, BridgeError> {
        let mut conn = self.conn.lock().unwrap_or_else(|p| p.into_inner());
        if conn.broken {
            return Err(BridgeError::Closed);
        }
        let result = exchange(&mut conn, bodies, self.max_in_flight);
        if result.is_err() {
            conn.broken = true;
        }
        result
    }

    pub fn call(&self, body: RequestBody) -> Result<BridgeResponse, BridgeError> {
        let mut responses = self.call_batch(vec![body])?;
        Ok(responses.pop().expect("one response per request"))
    }

    pub fn capabilities(&self) -> Result<Capabilities, BridgeError> {
        let response = self.call(RequestBody::Capabilities)?;
        match (response.ok, response.result) {
            (true, Some(value)) => serde_json::from_value(value)
                .map_err(|e| BridgeError::Protocol(format!("bad capabilities result: {e}"))),
            _ => Err(BridgeError::Protocol(format!(
                "capabilities request failed: {:?}",
                response.error
            ))),
        }
    }

    /// Durations for `(text, language)` pairs. Outer error: transport; inner: per item.
    pub fn durations(&self, items: &[(&str, &str)]) -> Result<Vec<Result<f64, ErrorBody>>, BridgeError> {
        let bodies = items
            .iter()
            .map(|(text, language)| RequestBody::Duration {
                text: text.to_string(),
                language: language.to_string(),
            })
            .collect();
        self.call_batch(bodies)?
            .into_iter()
            .map(|r| scalar_result(r, "seconds"))
            .collect()
    }

    pub fn qe_scores(&self, items: Vec<RequestBody>) -> Result<Vec<Result<f64, ErrorBody>>, BridgeError> {
        self.call_batch(items)?
            .into_iter()
            .map(|r| scalar_result(r, "score"))
            .collect()
    }
}

fn scalar_result(response: BridgeResponse, field: &str) -> Result<Result<f64, ErrorBody>, BridgeError> {
    if !response.ok {
        return response
            .error
            .map(Err)
            .ok_or_else(|| BridgeError::Protocol(format!("response {} has ok=false but no error", response.id)));
    }
    response
        .result
        .as_ref()
        .and_then(|v| v.get(field))
        .and_then(serde_json::Value::as_f64)
        .map(Ok)
        .ok_or_else(|| BridgeError::Protocol(format!("response {} lacks numeric `{field}`", response.id)))
}

fn exchange(
    conn: &mut Connection,
    bodies: Vec<RequestBody>,
    max_in_flight: usize,
) -> Result<Vec<BridgeResponse>, BridgeError> {
    let n = bodies.len();
    let base = conn.next_id;
    conn.next_id += n as u64;
    let mut slots: Vec<Option<BridgeResponse>> = vec![None; n];
    let mut pending = bodies.into_iter().enumerate();
    let (mut sent, mut received) = (0usize, 0usize);
    let mut line = String::new();

    while received < n {
        let mut wrote = false;
        while sent < n && sent - received < max_in_flight {
            let (i, body) = pending.next().expect("unsent request");
            let request = BridgeRequest {
                id: base + i as u64,
                body,
            };
            let mut encoded = serde_json::to_string(&request).expect("request serialises");
            encoded.push('\n');
            conn.writer
                .write_all(encoded.as_bytes())
                .map_err(|e| BridgeError::Io(e.to_string()))?;
            sent += 1;
            wrote = true;
        }
        if wrote {
            conn.writer.flush().map_err(|e| BridgeError::Io(e.to_string()))?;
        }

        line.clear();
        let read = conn
            .reader
            .read_line(&mut line)
            .map_err(|e| BridgeError::Io(e.to_string()))?;
        if read == 0 {
            return Err(BridgeError::Closed);
        }
        let response: BridgeResponse = serde_json::from_str(line.trim_end_matches(['\n', '\r']))
            .map_err(|e| BridgeError::Protocol(format!("unparseable response line: {e}")))?;
        if !response.is_well_formed() {
            return Err(BridgeError::Protocol(format!(
                "response {} must carry exactly one of result/error",
                response.id
            )));
        }
        let slot = response
            .id
            .checked_sub(base)
            .map(|k| k as usize)
            .filter(|k| *k < sent)
            .ok_or_else(|| BridgeError::Protocol(format!("unexpected response id {}", response.id)))?;
        if slots[slot].is_some() {
            return Err(BridgeError::Protocol(format!("duplicate response id {}", response.id)));
        }
        slots[slot] = Some(response);
        received += 1;
    }
    Ok(slots.into_iter().map(|s| s.expect("all slots filled")).collect())
}
