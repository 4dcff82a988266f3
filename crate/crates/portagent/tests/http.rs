//! HttpBackend against a local one-shot HTTP server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use portagent::fixtures::CLOSURE_PROGRAM;
use portagent::http::HttpBackend;
use portagent_core::env::{generate_instances, ExpertiseLevel, ScenarioKind};
use portagent_core::knowledge::KnowledgeBase;
use portagent_core::llm::{Backend, BackendError, ExpertRole, PromptBundle};
use portagent_core::workflow::{run_transfer, TransferStatus, WorkflowConfig};
use portagent_core::FrozenClock;
use serde_json::{json, Value};

struct Request {
    headers: Vec<(String, String)>,
    body: Value,
}

impl Request {
    fn header(&self, name: &str) -> Option<&str> {
        self.headers.iter().find(|(k, _)| k.eq_ignore_ascii_case(name)).map(|(_, v)| v.as_str())
    }
}

/// Serves one canned `(status, body)` per connection and reports each
/// request it received.
fn serve(responses: Vec<(u16, String)>) -> (String, mpsc::Receiver<Request>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for (status, body) in responses {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut headers = Vec::new();
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            loop {
                line.clear();
                reader.read_line(&mut line).unwrap();
                let l = line.trim_end();
                if l.is_empty() {
                    break;
                }
                let (k, v) = l.split_once(':').unwrap();
                headers.push((k.trim().to_owned(), v.trim().to_owned()));
            }
            let len: usize = headers
                .iter()
                .find(|(k, _)| k.eq_ignore_ascii_case("content-length"))
                .map_or(0, |(_, v)| v.parse().unwrap());
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            let _ = tx.send(Request { headers, body: serde_json::from_slice(&buf).unwrap() });
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    (url, rx)
}

fn chat(content: &str) -> String {
    json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string()
}

fn bundle() -> PromptBundle {
    PromptBundle { role: ExpertRole::Coder, system: "sys".into(), user: "usr".into() }
}

#[test]
fn sends_deterministic_chat_request_and_retries_server_errors() {
    let (url, rx) = serve(vec![(503, "busy".into()), (200, chat("hello"))]);
    let mut backend =
        HttpBackend::new(url, "test-model", Some("secret".into())).with_retry(2, Duration::from_millis(10));
    assert_eq!(backend.complete(&bundle()).unwrap(), "hello");

    let reqs: Vec<Request> = rx.try_iter().collect();
    assert_eq!(reqs.len(), 2);
    for r in &reqs {
        assert_eq!(r.body["temperature"], json!(0));
        assert_eq!(r.body["model"], "test-model");
        assert_eq!(r.body["messages"][0], json!({"role": "system", "content": "sys"}));
        assert_eq!(r.body["messages"][1], json!({"role": "user", "content": "usr"}));
        assert_eq!(r.header("authorization"), Some("Bearer secret"));
    }
    assert!(!format!("{backend:?}").contains("secret"));
}

#[test]
fn gives_up_after_retry_budget() {
    let (url, rx) = serve(vec![(500, "a".into()), (500, "b".into())]);
    let mut backend = HttpBackend::new(url, "m", None).with_retry(1, Duration::from_millis(10));
    let err = backend.complete(&bundle()).unwrap_err();
    assert!(matches!(&err, BackendError::Transport(m) if m.contains("500")), "{err}");
    let reqs: Vec<Request> = rx.try_iter().collect();
    assert_eq!(reqs.len(), 2);
    assert_eq!(reqs[0].header("authorization"), None);
}

#[test]
fn malformed_reply_is_not_retried() {
    let (url, rx) = serve(vec![(200, "{\"choices\": []}".into())]);
    let mut backend = HttpBackend::new(url, "m", None).with_retry(3, Duration::from_millis(10));
    assert!(matches!(backend.complete(&bundle()), Err(BackendError::Format(_))));
    assert_eq!(rx.try_iter().count(), 1);
}

#[test]
fn workflow_runs_over_http() {
    let reply = chat(&format!("Plan follows.\n```vds-dsl\n{CLOSURE_PROGRAM}```\n"));
    // Modeler then coder.
    let (url, rx) = serve(vec![(200, reply.clone()), (200, reply)]);
    let env = generate_instances(42, ScenarioKind::RoadClosure, 1).unwrap()[0].env(ExpertiseLevel::Engineer).unwrap();
    let mut kb = KnowledgeBase::default();
    let mut backend = HttpBackend::new(url, "m", None).with_retry(0, Duration::ZERO);
    let out = run_transfer(&env, &mut kb, &mut backend, &WorkflowConfig::default(), &FrozenClock).unwrap();
    assert_eq!(out.status, TransferStatus::Solved);
    assert_eq!(out.iterations, 1);
    assert_eq!(rx.try_iter().count(), 2);
}
