use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;

use agentcomm::config::LlmSection;
use agentcomm::llm::{ChatClient, HttpAgents, Templates};
use agentcomm_core::scenario::ScenarioKind;
use agentcomm_core::session::{run_session, KnowledgeStore, Method, Resources, SessionConfig};
use serde_json::Value;

#[derive(Debug, Clone)]
struct Seen {
    auth: Option<String>,
    body: Value,
}

/// Serves chat completions from `reply(call_index, body) -> (status, content)`.
fn serve<F>(reply: F) -> (String, Arc<Mutex<Vec<Seen>>>)
where
    F: Fn(usize, &Value) -> (u16, String) + Send + 'static,
{
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    thread::spawn(move || {
        for (i, stream) in listener.incoming().enumerate() {
            let Ok(mut stream) = stream else { return };
            let mut r = BufReader::new(stream.try_clone().unwrap());
            let (mut len, mut auth) = (0usize, None);
            loop {
                let mut line = String::new();
                if r.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                    break;
                }
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                if lower.starts_with("authorization:") {
                    auth = Some(line["authorization:".len()..].trim().to_string());
                }
            }
            let mut body = vec![0; len];
            r.read_exact(&mut body).unwrap();
            let body: Value = serde_json::from_slice(&body).unwrap();
            let (status, content) = reply(i, &body);
            log.lock().unwrap().push(Seen { auth, body });
            let payload =
                serde_json::json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string();
            let resp = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                payload.len()
            );
            let _ = stream.write_all(resp.as_bytes());
        }
    });
    (url, seen)
}

fn section(url: &str, token_env: &str) -> LlmSection {
    LlmSection {
        base_url: url.to_string(),
        token_env: token_env.to_string(),
        timeout_s: 5.0,
        retries: 2,
        ..LlmSection::default()
    }
}

#[test]
fn client_sends_the_chat_format_and_retries_server_errors() {
    let (url, seen) = serve(|i, _| if i == 0 { (503, String::new()) } else { (200, " hello ".into()) });
    std::env::set_var("AGENTCOMM_TEST_TOKEN_A", "secret");
    let client = ChatClient::new(&section(&url, "AGENTCOMM_TEST_TOKEN_A"));
    assert_eq!(client.chat("sys", "user text").unwrap(), "hello");
    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 2);
    assert_eq!(seen[1].auth.as_deref(), Some("Bearer secret"));
    assert_eq!(seen[1].body["model"], "local-model");
    assert_eq!(seen[1].body["messages"][1]["content"], "user text");
}

#[test]
fn client_gives_up_on_client_errors() {
    let (url, seen) = serve(|_, _| (400, String::new()));
    let client = ChatClient::new(&section(&url, "AGENTCOMM_TEST_TOKEN_UNSET"));
    assert!(client.chat("s", "u").unwrap_err().to_string().contains("400"));
    assert_eq!(seen.lock().unwrap().len(), 1);
    assert!(seen.lock().unwrap()[0].auth.is_none());
}

#[test]
fn session_runs_against_a_chat_server() {
    let (url, seen) = serve(|_, body| {
        let system = body["messages"][0]["content"].as_str().unwrap_or_default();
        let user = body["messages"][1]["content"].as_str().unwrap_or_default();
        let content = match system {
            "You are the base station agent." if user.contains("Robot:") => "task complete",
            "You are the base station agent." => "Please report every sensor reading.",
            "You are the robot agent." => "Sensor T01 reads 21.5 C at (1.0,2.0).",
            "You are a key-item extractor." => "T01\n21.5 C\n(1.0,2.0)",
            _ => user.rsplit("Message:\n").next().unwrap_or_default(),
        };
        (200, content.to_string())
    });
    let agents = HttpAgents::new(&section(&url, "AGENTCOMM_TEST_TOKEN_UNSET"), Templates::builtin());
    let res = Resources::anchored().unwrap();
    let cfg = SessionConfig::new(Method::LcScIm, ScenarioKind::Case1, 20.0, 3);
    let t = run_session(&cfg, &res, &agents, &KnowledgeStore::default()).unwrap();
    assert_eq!(t.rounds.len(), 1);
    assert!(t.rounds[0].a_hat.contains("21.5 C"), "{}", t.rounds[0].a_hat);
    assert!(seen
        .lock()
        .unwrap()
        .iter()
        .any(|s| s.body["messages"][1]["content"].as_str().unwrap().contains("\"readings\"")));
}
