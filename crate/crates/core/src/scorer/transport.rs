//! Byte-stream transports for the scorer protocol.
//!
//! Line transports (child-process standard streams, raw TCP) pipeline every
//! request before reading responses, which may arrive in any order and are
//! matched back by `request_id`. The HTTP transport posts one request per
//! body, a few at a time.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::time::Duration;

use super::protocol::{check_response, ScoreRequest, ScoreResponse};
use super::ScorerError;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);
const HTTP_IN_FLIGHT: usize = 4;

pub trait Transport: Send {
    /// Sends `requests` and returns their responses in request order.
    fn exchange(&mut self, requests: &[ScoreRequest]) -> Result<Vec<ScoreResponse>, ScorerError>;
}

/// Scores one request.
pub fn score_batch(request: &ScoreRequest, transport: &mut dyn Transport) -> Result<ScoreResponse, ScorerError> {
    let mut responses = score_batches(std::slice::from_ref(request), transport)?;
    Ok(responses.remove(0))
}

/// Scores several requests, validating every response against its request.
pub fn score_batches(
    requests: &[ScoreRequest],
    transport: &mut dyn Transport,
) -> Result<Vec<ScoreResponse>, ScorerError> {
    for req in requests {
        req.validate()?;
    }
    let responses = transport.exchange(requests)?;
    if responses.len() != requests.len() {
        return Err(ScorerError::Transport {
            request_id: requests.first().map(|r| r.request_id.clone()).unwrap_or_default(),
            reason: format!("{} responses for {} requests", responses.len(), requests.len()),
        });
    }
    for (req, resp) in requests.iter().zip(&responses) {
        check_response(req, resp)?;
    }
    Ok(responses)
}

fn transport_error(request_id: &str, reason: impl ToString) -> ScorerError {
    ScorerError::Transport {
        request_id: request_id.to_string(),
        reason: reason.to_string(),
    }
}

/// Line-delimited JSON over any writer/reader pair.
pub struct LineTransport<W, R> {
    writer: W,
    reader: R,
}

impl<W: Write + Send, R: BufRead + Send> LineTransport<W, R> {
    pub fn new(writer: W, reader: R) -> Self {
        LineTransport { writer, reader }
    }
}

impl<W: Write + Send, R: BufRead + Send> Transport for LineTransport<W, R> {
    fn exchange(&mut self, requests: &[ScoreRequest]) -> Result<Vec<ScoreResponse>, ScorerError> {
        if requests.is_empty() {
            return Ok(Vec::new());
        }
        let writer = &mut self.writer;
        let reader = &mut self.reader;
        std::thread::scope(|scope| {
            // Writing on its own thread keeps a slow reader on the far side
            // from deadlocking against full pipe buffers.
            let sender = scope.spawn(move || -> Result<(), ScorerError> {
                for req in requests {
                    writeln!(writer, "{}", req.to_line()).map_err(|e| transport_error(&req.request_id, e))?;
                }
                writer
                    .flush()
                    .map_err(|e| transport_error(&requests[requests.len() - 1].request_id, e))
            });

            let position: HashMap<&str, usize> = requests
                .iter()
                .enumerate()
                .map(|(i, r)| (r.request_id.as_str(), i))
                .collect();
            let mut slots: Vec<Option<ScoreResponse>> = vec![None; requests.len()];
            let mut pending = requests.len();
            let mut line = String::new();
            while pending > 0 {
                let waiting_on = || {
                    slots
                        .iter()
                        .zip(requests)
                        .find(|(s, _)| s.is_none())
                        .map(|(_, r)| r.request_id.clone())
                        .unwrap_or_default()
                };
                line.clear();
                match reader.read_line(&mut line) {
                    Ok(0) => return Err(transport_error(&waiting_on(), "stream closed before response")),
                    Ok(_) => {}
                    Err(e) if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {
                        return Err(transport_error(&waiting_on(), "timed out waiting for response"))
                    }
                    Err(e) => return Err(transport_error(&waiting_on(), e)),
                }
                if line.trim().is_empty() {
                    continue;
                }
                let resp = ScoreResponse::from_line(line.trim())
                    .map_err(|e| transport_error(&waiting_on(), format!("malformed response: {e}")))?;
                let Some(&i) = position.get(resp.request_id.as_str()) else {
                    return Err(transport_error(&resp.request_id, "response to unknown request"));
                };
                if slots[i].replace(resp).is_none() {
                    pending -= 1;
                }
            }
            sender.join().expect("writer thread panicked")?;
            Ok(slots.into_iter().map(|s| s.expect("all slots filled")).collect())
        })
    }
}

/// A scorer running as a child process, spoken to over its standard streams.
pub struct ChildTransport {
    child: Child,
    inner: Option<LineTransport<ChildStdin, BufReader<ChildStdout>>>,
}

impl ChildTransport {
    /// Runs `command` through the shell.
    pub fn spawn(command: &str) -> Result<Self, ScorerError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| ScorerError::Config(format!("cannot start scorer {command:?}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        Ok(ChildTransport {
            child,
            inner: Some(LineTransport::new(stdin, BufReader::new(stdout))),
        })
    }
}

impl Transport for ChildTransport {
    fn exchange(&mut self, requests: &[ScoreRequest]) -> Result<Vec<ScoreResponse>, ScorerError> {
        self.inner.as_mut().expect("open until drop").exchange(requests)
    }
}

impl Drop for ChildTransport {
    fn drop(&mut self) {
        // Closing stdin asks the scorer to exit.
        self.inner.take();
        if let Ok(None) = self.child.try_wait() {
            std::thread::sleep(Duration::from_millis(50));
            if let Ok(None) = self.child.try_wait() {
                let _ = self.child.kill();
            }
        }
        let _ = self.child.wait();
    }
}

/// Line protocol over a TCP connection.
pub fn tcp_transport(addr: &str, timeout: Duration) -> Result<LineTransport<TcpStream, BufReader<TcpStream>>, ScorerError> {
    let stream = TcpStream::connect(addr).map_err(|e| ScorerError::Config(format!("cannot connect to {addr}: {e}")))?;
    stream
        .set_read_timeout(Some(timeout))
        .and_then(|_| stream.set_write_timeout(Some(timeout)))
        .map_err(|e| ScorerError::Config(e.to_string()))?;
    let reader = stream.try_clone().map_err(|e| ScorerError::Config(e.to_string()))?;
    Ok(LineTransport::new(stream, BufReader::new(reader)))
}

/// One request per HTTP POST body; the response body is one response object.
pub struct HttpTransport {
    url: String,
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(url: &str, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        HttpTransport {
            url: url.to_string(),
            agent,
        }
    }

    fn post(&self, request: &ScoreRequest) -> Result<ScoreResponse, ScorerError> {
        let fail = |e: &dyn std::fmt::Display| transport_error(&request.request_id, e);
        let mut response = self
            .agent
            .post(&self.url)
            .header("Content-Type", "application/json")
            .send(request.to_line())
            .map_err(|e| fail(&e))?;
        let body = response.body_mut().read_to_string().map_err(|e| fail(&e))?;
        ScoreResponse::from_line(body.trim()).map_err(|e| fail(&format!("malformed response: {e}")))
    }
}

impl Transport for HttpTransport {
    fn exchange(&mut self, requests: &[ScoreRequest]) -> Result<Vec<ScoreResponse>, ScorerError> {
        let this = &*self;
        let mut out = Vec::with_capacity(requests.len());
        for chunk in requests.chunks(HTTP_IN_FLIGHT) {
            let results: Vec<_> = std::thread::scope(|scope| {
                let handles: Vec<_> = chunk.iter().map(|req| scope.spawn(move || this.post(req))).collect();
                handles.into_iter().map(|h| h.join().expect("http worker panicked")).collect()
            });
            for r in results {
                out.push(r?);
            }
        }
        Ok(out)
    }
}

/// Opens a transport from an address: `exec:<command>`, `tcp://host:port`,
/// `http://host:port/path`, or a bare `host:port` (TCP).
pub fn connect(addr: &str, timeout: Duration) -> Result<Box<dyn Transport>, ScorerError> {
    if let Some(cmd) = addr.strip_prefix("exec:") {
        return Ok(Box::new(ChildTransport::spawn(cmd)?));
    }
    if addr.starts_with("http://") {
        return Ok(Box::new(HttpTransport::new(addr, timeout)));
    }
    if addr.starts_with("https://") {
        return Err(ScorerError::Config("https scorer endpoints are not supported".into()));
    }
    let hostport = addr.strip_prefix("tcp://").unwrap_or(addr);
    Ok(Box::new(tcp_transport(hostport, timeout)?))
}

/// Server side of the line protocol: answers each request line with
/// `handler`, until the input closes.
pub fn serve_lines(
    input: impl BufRead,
    mut output: impl Write,
    mut handler: impl FnMut(&ScoreRequest) -> ScoreResponse,
) -> std::io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let request = ScoreRequest::from_line(&line)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        writeln!(output, "{}", handler(&request).to_line())?;
        output.flush()?;
    }
    Ok(())
}
