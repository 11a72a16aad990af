//! Streaming inference over stdio or TCP.

use std::io::{self, BufRead, BufReader, Write};
use std::net::TcpListener;
use std::str::FromStr;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Instant;

use tfn_core::Params;

use crate::error::{CliError, CliResult};
use crate::latency::LatencyLog;
use crate::protocol::handle_line;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transport {
    Stdio,
    Tcp(u16),
}

impl FromStr for Transport {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        if s == "stdio" {
            return Ok(Transport::Stdio);
        }
        s.strip_prefix("tcp:")
            .and_then(|p| p.parse().ok())
            .map(Transport::Tcp)
            .ok_or_else(|| {
                CliError::usage(format!("transport must be stdio or tcp:<port>, got '{s}'"))
            })
    }
}

/// Answers every non-empty line of `input` in order. Malformed lines get a
/// one-line error object; the stream stays open.
pub fn serve_stream<R: BufRead, W: Write>(
    params: &Params,
    threshold: f64,
    input: R,
    mut output: W,
) -> io::Result<LatencyLog> {
    let mut log = LatencyLog::default();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let start = Instant::now();
        let mut body = match handle_line(params, threshold, &line, n + 1) {
            Ok(resp) => {
                let body = serde_json::to_vec(&resp).expect("response serializes");
                log.record(resp.elapsed_ms, start.elapsed().as_secs_f64() * 1e3);
                body
            }
            Err(err) => {
                log.errors += 1;
                serde_json::to_vec(&err).expect("error serializes")
            }
        };
        body.push(b'\n');
        output.write_all(&body)?;
        output.flush()?;
    }
    Ok(log)
}

/// Runs until stdin closes or `max_connections` TCP connections have been
/// served, then returns the combined latency log.
pub fn serve(
    params: Params,
    threshold: f64,
    transport: Transport,
    max_connections: Option<usize>,
) -> CliResult<LatencyLog> {
    match transport {
        Transport::Stdio => {
            let stdin = io::stdin();
            let stdout = io::stdout();
            Ok(serve_stream(
                &params,
                threshold,
                stdin.lock(),
                stdout.lock(),
            )?)
        }
        Transport::Tcp(port) => {
            let listener = TcpListener::bind(("127.0.0.1", port))
                .map_err(|e| CliError::io(format!("cannot bind 127.0.0.1:{port}: {e}")))?;
            eprintln!("listening on {}", listener.local_addr()?);
            let params = Arc::new(params);
            let total = Arc::new(Mutex::new(LatencyLog::default()));
            let mut workers = Vec::new();
            for (i, stream) in listener.incoming().enumerate() {
                let stream = match stream {
                    Ok(s) => s,
                    Err(e) => {
                        eprintln!("accept failed: {e}");
                        continue;
                    }
                };
                let (params, total) = (Arc::clone(&params), Arc::clone(&total));
                workers.push(thread::spawn(move || {
                    let reader = match stream.try_clone() {
                        Ok(r) => BufReader::new(r),
                        Err(e) => return eprintln!("connection setup failed: {e}"),
                    };
                    match serve_stream(&params, threshold, reader, &stream) {
                        Ok(log) => total.lock().expect("latency log").merge(log),
                        Err(e) => eprintln!("connection closed with error: {e}"),
                    }
                }));
                if max_connections.is_some_and(|m| i + 1 >= m) {
                    break;
                }
            }
            for w in workers {
                let _ = w.join();
            }
            let log = std::mem::take(&mut *total.lock().expect("latency log"));
            Ok(log)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tfn_core::model::{init_params, Dims, ModelVariant};

    fn tiny() -> Params {
        let dims = Dims {
            input: 3,
            embed_hidden: 4,
            video_out: 2,
            audio_out: 2,
            head_hidden: 4,
        };
        init_params(ModelVariant::TfComplete, &dims, 5)
    }

    #[test]
    fn answers_in_order_and_skips_blank_lines() {
        let input = "{\"id\":\"a\",\"video\":[1,2,3],\"audio\":[0,0,1]}\n\n   \n\
                     not json\n{\"video\":[1,2,3],\"audio\":[1,2]}\n{\"video\":[0,0,0],\"audio\":[0,0,0]}\n";
        let mut out = Vec::new();
        let log = serve_stream(&tiny(), 0.5, input.as_bytes(), &mut out).unwrap();
        let lines: Vec<serde_json::Value> = String::from_utf8(out)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0]["id"], "a");
        assert_eq!(lines[1]["line"], 4);
        assert!(lines[1]["error"].as_str().unwrap().contains("malformed"));
        assert_eq!(lines[2]["id"], "line-5");
        assert!(lines[2]["error"].is_string());
        assert_eq!(lines[3]["id"], "line-6");
        assert_eq!((log.forward_ms.len(), log.errors), (2, 2));
    }

    #[test]
    fn transport_parsing() {
        assert_eq!("stdio".parse::<Transport>().unwrap(), Transport::Stdio);
        assert_eq!(
            "tcp:8080".parse::<Transport>().unwrap(),
            Transport::Tcp(8080)
        );
        assert!("tcp:x".parse::<Transport>().is_err());
        assert!("udp:1".parse::<Transport>().is_err());
    }
}
