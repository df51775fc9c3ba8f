use super::dataset::{Prediction, Sample};
use super::HarnessError;
use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

/// Versioned default prompt. `{image}` marks where the image is referred to.
pub const DEFAULT_PROMPT: &str = include_str!("../../assets/prompt_v1.txt");
pub const IMAGE_SLOT: &str = "{image}";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelEndpointConfig {
    pub base_url: String,
    pub path: String,
    pub model: String,
    /// Environment variable holding a bearer token; `None` sends no auth.
    pub token_env: Option<String>,
    pub prompt_template: String,
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub max_in_flight: usize,
}

impl Default for ModelEndpointConfig {
    fn default() -> Self {
        ModelEndpointConfig {
            base_url: String::new(),
            path: "/v1/chat/completions".into(),
            model: String::new(),
            token_env: None,
            prompt_template: DEFAULT_PROMPT.into(),
            timeout_secs: 60.0,
            max_retries: 2,
            max_in_flight: 4,
        }
    }
}

impl ModelEndpointConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self =
            serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.into()));
        if self.base_url.trim().is_empty() {
            return bad("base_url is empty");
        }
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return bad("timeout_secs must be positive");
        }
        if self.max_in_flight == 0 {
            return bad("max_in_flight must be at least 1");
        }
        if !self.prompt_template.contains(IMAGE_SLOT) {
            return bad("prompt_template has no {image} slot");
        }
        Ok(())
    }

    pub fn url(&self) -> String {
        format!(
            "{}/{}",
            self.base_url.trim_end_matches('/'),
            self.path.trim_start_matches('/')
        )
    }

    pub fn prompt(&self) -> String {
        self.prompt_template.replace(IMAGE_SLOT, "the attached image")
    }

    /// The bearer token; a named variable that is unset is a config error.
    pub fn token(&self) -> Result<Option<String>, HarnessError> {
        match &self.token_env {
            None => Ok(None),
            Some(var) => std::env::var(var)
                .map(Some)
                .map_err(|_| HarnessError::Config(format!("environment variable {var} is not set"))),
        }
    }
}

pub trait ModelClient: Sync {
    /// One generation call for an image and prompt, returning the model text.
    fn complete(&self, image: &[u8], mime: &str, prompt: &str) -> Result<String, String>;
}

/// Chat-completions style client: one user message holding an image part
/// (base64 data URL) and a text part.
pub struct HttpModelClient {
    http: reqwest::blocking::Client,
    url: String,
    model: String,
    token: Option<String>,
}

impl HttpModelClient {
    pub fn new(config: &ModelEndpointConfig) -> Result<Self, HarnessError> {
        config.validate()?;
        let token = config.token()?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_secs))
            .build()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(HttpModelClient {
            http,
            url: config.url(),
            model: config.model.clone(),
            token,
        })
    }
}

pub fn request_body(model: &str, image: &[u8], mime: &str, prompt: &str) -> Value {
    let data = base64::engine::general_purpose::STANDARD.encode(image);
    json!({
        "model": model,
        "messages": [{
            "role": "user",
            "content": [
                {"type": "image_url", "image_url": {"url": format!("data:{mime};base64,{data}")}},
                {"type": "text", "text": prompt},
            ],
        }],
    })
}

/// `choices[0].message.content`, either a string or a list of text parts.
pub fn response_text(body: &Value) -> Option<String> {
    let content = body.pointer("/choices/0/message/content")?;
    match content {
        Value::String(s) => Some(s.clone()),
        Value::Array(parts) => Some(parts.iter().filter_map(|p| p.get("text")?.as_str()).collect()),
        _ => None,
    }
}

impl ModelClient for HttpModelClient {
    fn complete(&self, image: &[u8], mime: &str, prompt: &str) -> Result<String, String> {
        let mut req = self
            .http
            .post(&self.url)
            .json(&request_body(&self.model, image, mime, prompt));
        if let Some(t) = &self.token {
            req = req.bearer_auth(t);
        }
        let resp = req.send().map_err(|e| e.to_string())?;
        let status = resp.status();
        if !status.is_success() {
            return Err(format!("HTTP {status}"));
        }
        let body: Value = resp.json().map_err(|e| e.to_string())?;
        response_text(&body).ok_or_else(|| "response has no choices[0].message.content".into())
    }
}

fn mime_for(path: &Path) -> &'static str {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("gif") => "image/gif",
        Some("webp") => "image/webp",
        _ => "application/octet-stream",
    }
}

fn predict(sample: &Sample, client: &dyn ModelClient, prompt: &str, max_retries: u32) -> Prediction {
    let Some(path) = &sample.image_path else {
        return Prediction::failed(&sample.id, "sample has no image_path");
    };
    let image = match std::fs::read(path) {
        Ok(bytes) => bytes,
        Err(e) => return Prediction::failed(&sample.id, format!("{}: {e}", path.display())),
    };
    let mut last = String::new();
    for attempt in 0..=max_retries {
        if attempt > 0 {
            std::thread::sleep(Duration::from_millis(50 * u64::from(attempt)));
        }
        match client.complete(&image, mime_for(path), prompt) {
            Ok(text) => return Prediction::from_output(&sample.id, text),
            Err(e) => last = e,
        }
    }
    Prediction::failed(&sample.id, format!("after {} attempts: {last}", max_retries + 1))
}

/// One prediction per sample, in sample order. At most `max_in_flight`
/// requests run at once; failures become `NoResponse` predictions.
pub fn fetch_with(
    samples: &[Sample],
    client: &dyn ModelClient,
    prompt: &str,
    max_in_flight: usize,
    max_retries: u32,
) -> Vec<Prediction> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Prediction>>> = samples.iter().map(|_| Mutex::new(None)).collect();
    let workers = max_in_flight.max(1).min(samples.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(sample) = samples.get(i) else {
                    break;
                };
                let p = predict(sample, client, prompt, max_retries);
                *slots[i].lock().expect("slot lock") = Some(p);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().expect("slot lock").expect("every slot is filled"))
        .collect()
}

/// Queries the configured endpoint. Configuration problems, including a
/// missing token variable, abort before any request is sent.
pub fn fetch_predictions(samples: &[Sample], config: &ModelEndpointConfig) -> Result<Vec<Prediction>, HarnessError> {
    let client = HttpModelClient::new(config)?;
    Ok(fetch_with(
        samples,
        &client,
        &config.prompt(),
        config.max_in_flight,
        config.max_retries,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::parse_flow;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::Arc;

    const FIXTURE: &str = include_str!("../../tests/fixtures/scheduled_loop.json");

    /// Minimal HTTP server. `reply` maps a request body to (delay, response body).
    fn serve(reply: impl Fn(&str) -> (u64, String) + Send + Sync + 'static) -> (String, Arc<AtomicUsize>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let hits = Arc::new(AtomicUsize::new(0));
        let counter = hits.clone();
        let reply = Arc::new(reply);
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                let reply = reply.clone();
                counter.fetch_add(1, Ordering::SeqCst);
                std::thread::spawn(move || {
                    let mut reader = BufReader::new(stream.try_clone().unwrap());
                    let mut length = 0;
                    loop {
                        let mut header = String::new();
                        if reader.read_line(&mut header).unwrap_or(0) == 0 || header == "\r\n" {
                            break;
                        }
                        if let Some(v) = header.to_ascii_lowercase().strip_prefix("content-length:") {
                            length = v.trim().parse().unwrap_or(0);
                        }
                    }
                    let mut body = vec![0; length];
                    reader.read_exact(&mut body).ok();
                    let (delay, out) = reply(&String::from_utf8_lossy(&body));
                    std::thread::sleep(Duration::from_millis(delay));
                    let _ = write!(
                        stream,
                        "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{out}",
                        out.len()
                    );
                });
            }
        });
        (format!("http://{addr}"), hits)
    }

    fn chat_reply(text: &str) -> String {
        json!({"choices": [{"message": {"role": "assistant", "content": text}}]}).to_string()
    }

    fn samples_with_images(dir: &Path, names: &[&str]) -> Vec<Sample> {
        let reference = parse_flow(FIXTURE).unwrap();
        names
            .iter()
            .map(|n| {
                let path = dir.join(format!("{n}.png"));
                std::fs::write(&path, n.as_bytes()).unwrap();
                let mut s = Sample::new(*n, reference.clone());
                s.image_path = Some(path);
                s
            })
            .collect()
    }

    fn config(base_url: String) -> ModelEndpointConfig {
        ModelEndpointConfig {
            base_url,
            model: "test".into(),
            timeout_secs: 0.5,
            max_retries: 0,
            ..Default::default()
        }
    }

    #[test]
    fn fenced_reply_parses_to_fixture() {
        let (url, _) = serve(|body| {
            assert!(body.contains("data:image/png;base64,"));
            assert!(body.contains("the attached image"));
            (0, chat_reply(&format!("Here it is:\n```json\n{FIXTURE}\n```")))
        });
        let dir = tempfile::tempdir().unwrap();
        let samples = samples_with_images(dir.path(), &["s1", "s2"]);
        let preds = fetch_predictions(&samples, &config(url)).unwrap();
        assert_eq!(preds.len(), 2);
        assert_eq!(preds[0].sample_id, "s1");
        assert_eq!(preds[1].parsed.as_ref().unwrap(), &parse_flow(FIXTURE).unwrap());
    }

    #[test]
    fn timeout_is_isolated() {
        let slow = base64::engine::general_purpose::STANDARD.encode(b"slow");
        let (url, _) = serve(move |body| {
            if body.contains(&slow) {
                (2000, chat_reply(FIXTURE))
            } else {
                (0, chat_reply(FIXTURE))
            }
        });
        let dir = tempfile::tempdir().unwrap();
        let samples = samples_with_images(dir.path(), &["fast", "slow", "quick"]);
        let preds = fetch_predictions(&samples, &config(url)).unwrap();
        assert!(preds[0].parsed.is_ok());
        assert!(matches!(preds[1].parsed, Err(crate::flow::ParseError::NoResponse(_))));
        assert!(preds[2].parsed.is_ok());
    }

    #[test]
    fn missing_token_aborts_before_requests() {
        let (url, hits) = serve(|_| (0, chat_reply(FIXTURE)));
        let dir = tempfile::tempdir().unwrap();
        let samples = samples_with_images(dir.path(), &["a"]);
        let mut cfg = config(url);
        cfg.token_env = Some("FLOWKIT_TEST_TOKEN_THAT_IS_NOT_SET".into());
        assert!(matches!(
            fetch_predictions(&samples, &cfg),
            Err(HarnessError::Config(_))
        ));
        assert_eq!(hits.load(Ordering::SeqCst), 0);
    }

    #[test]
    fn empty_batch_sends_nothing() {
        let (url, hits) = serve(|_| (0, chat_reply("")));
        assert!(fetch_predictions(&[], &config(url)).unwrap().is_empty());
        assert_eq!(hits.load(Ordering::SeqCst), 0);
    }

    struct Flaky(AtomicUsize);

    impl ModelClient for Flaky {
        fn complete(&self, _: &[u8], _: &str, _: &str) -> Result<String, String> {
            if self.0.fetch_add(1, Ordering::SeqCst) < 2 {
                Err("boom".into())
            } else {
                Ok(FIXTURE.into())
            }
        }
    }

    #[test]
    fn retries_then_succeeds() {
        let dir = tempfile::tempdir().unwrap();
        let samples = samples_with_images(dir.path(), &["a"]);
        let client = Flaky(AtomicUsize::new(0));
        let preds = fetch_with(&samples, &client, "p", 1, 2);
        assert!(preds[0].parsed.is_ok());
        let client = Flaky(AtomicUsize::new(0));
        let preds = fetch_with(&samples, &client, "p", 1, 1);
        assert!(preds[0].parsed.is_err());
    }

    #[test]
    fn missing_image_is_recorded() {
        let mut s = Sample::new("x", parse_flow(FIXTURE).unwrap());
        let preds = fetch_with(std::slice::from_ref(&s), &Flaky(AtomicUsize::new(9)), "p", 2, 0);
        assert!(preds[0].parsed.is_err());
        s.image_path = Some("/nonexistent/image.png".into());
        let preds = fetch_with(&[s], &Flaky(AtomicUsize::new(9)), "p", 2, 0);
        assert!(preds[0].parsed.is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = config("http://x".into());
        cfg.validate().unwrap();
        assert_eq!(cfg.url(), "http://x/v1/chat/completions");
        cfg.timeout_secs = 0.0;
        assert!(cfg.validate().is_err());
        cfg = config("http://x".into());
        cfg.prompt_template = "no slot".into();
        assert!(cfg.validate().is_err());
        let parsed: ModelEndpointConfig = serde_json::from_str(r#"{"base_url":"http://h","model":"m"}"#).unwrap();
        assert_eq!(parsed.max_in_flight, 4);
        assert!(parsed.prompt_template.contains(IMAGE_SLOT));
    }
}
