#![allow(dead_code)]

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use audit_core::agents::{fence_wrap, oracle_extract, AgentConfig, ChatRequest, ChatResponse, ExtractionRecord, ReplayFixture};
use audit_core::domain::DocKind;
use audit_core::prompts;

pub fn audit(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["audit"];
    full.extend_from_slice(args);
    let code = audit_cli::main_with_args(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

pub fn audit_ok(args: &[&str]) -> String {
    let (code, out, err) = audit(args);
    assert_eq!(code, 0, "audit {args:?} failed: {err}\n{out}");
    out
}

/// Every file under `root` with its bytes, keyed by relative path.
pub fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

/// The document text embedded in an extraction prompt's user message.
pub fn text_from_audit_prompt(user: &str) -> Option<String> {
    let (prefix, suffix) = prompts::AUDIT.user.split_once("{text}")?;
    user.strip_prefix(prefix)?.strip_suffix(suffix).map(String::from)
}

pub fn oracle_reply(text: &str) -> Option<String> {
    [DocKind::Bank, DocKind::Loan]
        .into_iter()
        .find_map(|k| oracle_extract(text, k).ok())
        .map(|r| fence_wrap(&serde_json::to_value(r).unwrap()))
}

/// Writes a replay fixture answering the extraction prompt for `text`.
pub fn write_fixture(dir: &Path, config: &AgentConfig, text: &str, record: &ExtractionRecord) {
    let request = ChatRequest::new(config, prompts::AUDIT.render(&[("text", text)]).unwrap());
    let response = ChatResponse::text(fence_wrap(&serde_json::to_value(record).unwrap()));
    ReplayFixture::new(&request, &response).write_to(dir).unwrap();
}

/// A minimal OpenAI-compatible server whose replies are the oracle's
/// reading of the prompted text.
pub struct MockServer {
    pub url: String,
    pub requests: Arc<AtomicUsize>,
    pub auth_headers: Arc<Mutex<Vec<String>>>,
}

impl MockServer {
    pub fn start() -> MockServer {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1", listener.local_addr().unwrap());
        let requests = Arc::new(AtomicUsize::new(0));
        let auth_headers = Arc::new(Mutex::new(Vec::new()));
        let (count, auth) = (requests.clone(), auth_headers.clone());
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                let count = count.clone();
                let auth = auth.clone();
                thread::spawn(move || {
                    let mut reader = BufReader::new(stream.try_clone().unwrap());
                    let mut length = 0usize;
                    let mut request_line = String::new();
                    reader.read_line(&mut request_line).unwrap();
                    loop {
                        let mut line = String::new();
                        reader.read_line(&mut line).unwrap();
                        let line = line.trim_end();
                        if line.is_empty() {
                            break;
                        }
                        let (name, value) = line.split_once(':').unwrap_or((line, ""));
                        match name.to_ascii_lowercase().as_str() {
                            "content-length" => length = value.trim().parse().unwrap(),
                            "authorization" => auth.lock().unwrap().push(value.trim().to_string()),
                            _ => {}
                        }
                    }
                    let mut body = vec![0; length];
                    reader.read_exact(&mut body).unwrap();
                    count.fetch_add(1, Ordering::SeqCst);

                    let req: serde_json::Value = serde_json::from_slice(&body).unwrap();
                    let user = req["messages"][1]["content"].as_str().unwrap_or_default();
                    let (status, payload) = match text_from_audit_prompt(user).and_then(|t| oracle_reply(&t)) {
                        Some(reply) if request_line.starts_with("POST /v1/chat/completions") => (
                            "200 OK",
                            serde_json::json!({
                                "id": "x",
                                "object": "chat.completion",
                                "model": req["model"],
                                "choices": [{"index": 0, "message": {"role": "assistant", "content": reply}, "finish_reason": "stop"}],
                                "usage": {"prompt_tokens": 5000, "completion_tokens": 100, "total_tokens": 5100},
                            }),
                        ),
                        _ => ("400 Bad Request", serde_json::json!({"error": "unexpected request"})),
                    };
                    let payload = payload.to_string();
                    let _ = write!(
                        stream,
                        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                        payload.len()
                    );
                });
            }
        });
        MockServer { url, requests, auth_headers }
    }
}
