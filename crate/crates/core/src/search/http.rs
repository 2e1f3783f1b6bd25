//! Generic HTTP search adapter.
//!
//! Wire contract: `GET <base_url>?q=<query>&n=<limit>` answering `200 OK` with a
//! JSON array of `{"location", "title", "snippet"}` objects. Non-200 answers and
//! transport failures are retried with exponential backoff.

use std::thread;
use std::time::Duration;

use log::warn;
use reqwest::blocking::Client;
use serde::Deserialize;
use url::Url;

use super::{SearchEngine, SearchError, SearchHit};

pub const DEFAULT_ATTEMPTS: u32 = 3;
pub const DEFAULT_BACKOFF: Duration = Duration::from_millis(500);

#[derive(Debug, Deserialize)]
struct WireHit {
    location: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    snippet: String,
}

#[derive(Debug, Clone)]
pub struct HttpEngine {
    base_url: Url,
    client: Client,
    id: String,
    attempts: u32,
    backoff: Duration,
}

impl HttpEngine {
    pub fn new(base_url: &str) -> Result<Self, SearchError> {
        let base_url = Url::parse(base_url)
            .map_err(|e| SearchError::NotConfigured(format!("invalid adapter URL: {e}")))?;
        let client = Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| SearchError::NotConfigured(e.to_string()))?;
        let id = format!("http:{}", base_url.host_str().unwrap_or("adapter"));
        Ok(Self {
            base_url,
            client,
            id,
            attempts: DEFAULT_ATTEMPTS,
            backoff: DEFAULT_BACKOFF,
        })
    }

    /// Overrides the retry schedule: `attempts` requests, waiting `backoff`, `2*backoff`, ... between them.
    pub fn with_retry(mut self, attempts: u32, backoff: Duration) -> Self {
        self.attempts = attempts.max(1);
        self.backoff = backoff;
        self
    }

    pub fn attempts(&self) -> u32 {
        self.attempts
    }

    pub fn backoff(&self) -> Duration {
        self.backoff
    }

    pub fn request_url(&self, query_text: &str, limit: usize) -> Url {
        let mut url = self.base_url.clone();
        url.query_pairs_mut()
            .append_pair("q", query_text)
            .append_pair("n", &limit.to_string());
        url
    }

    fn fetch(&self, url: &Url) -> Result<String, String> {
        let resp = self
            .client
            .get(url.clone())
            .send()
            .map_err(|e| e.to_string())?;
        let status = resp.status();
        if status != reqwest::StatusCode::OK {
            return Err(format!("HTTP status {status}"));
        }
        resp.text().map_err(|e| e.to_string())
    }

    fn parse(
        &self,
        query_text: &str,
        body: &str,
        limit: usize,
    ) -> Result<Vec<SearchHit>, SearchError> {
        let malformed = |message: String| SearchError::Malformed {
            query: query_text.to_owned(),
            message,
        };
        let items: Vec<WireHit> =
            serde_json::from_str(body).map_err(|e| malformed(e.to_string()))?;
        items
            .into_iter()
            .take(limit)
            .enumerate()
            .map(|(i, item)| {
                if item.location.is_empty() {
                    return Err(malformed(format!("item {i} has an empty location")));
                }
                Ok(SearchHit {
                    location: item.location,
                    title: item.title,
                    snippet: item.snippet,
                    engine: self.id.clone(),
                    rank: i + 1,
                })
            })
            .collect()
    }
}

impl SearchEngine for HttpEngine {
    fn id(&self) -> &str {
        &self.id
    }

    fn execute(&self, query_text: &str, limit: usize) -> Result<Vec<SearchHit>, SearchError> {
        if limit == 0 {
            return Err(SearchError::InvalidLimit);
        }
        let url = self.request_url(query_text, limit);
        let mut delay = self.backoff;
        let mut last_error = String::new();
        for attempt in 1..=self.attempts {
            match self.fetch(&url) {
                Ok(body) => return self.parse(query_text, &body, limit),
                Err(e) => {
                    warn!(
                        "query '{query_text}' attempt {attempt}/{} failed: {e}",
                        self.attempts
                    );
                    last_error = e;
                }
            }
            if attempt < self.attempts {
                thread::sleep(delay);
                delay *= 2;
            }
        }
        Err(SearchError::Transport {
            query: query_text.to_owned(),
            message: last_error,
        })
    }
}
