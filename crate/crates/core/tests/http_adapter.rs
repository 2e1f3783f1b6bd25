//! HTTP adapter against an in-process mock server.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use gaf_core::search::{HttpEngine, SearchEngine, SearchError};

/// Serves the scripted `(status, body)` replies in order, one per connection,
/// and records each request line.
fn serve(replies: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<String>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/search", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    thread::spawn(move || {
        for (status, body) in replies {
            let Ok((mut stream, _)) = listener.accept() else {
                return;
            };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            loop {
                let mut header = String::new();
                reader.read_line(&mut header).unwrap();
                if header == "\r\n" || header.is_empty() {
                    break;
                }
            }
            log.lock().unwrap().push(request_line.trim_end().to_owned());
            let reply = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(reply.as_bytes()).unwrap();
        }
    });
    (url, seen)
}

const THREE_HITS: &str = r#"[
    {"location": "http://a.example/1", "title": "Solar roofs", "snippet": "photovoltaic panels"},
    {"location": "http://b.example/2", "title": "Inverters", "snippet": ""},
    {"location": "http://a.example/3", "title": "Cells", "snippet": "silicon cells", "extra": 1}
]"#;

#[test]
fn success_assigns_contiguous_ranks_and_sends_query() {
    let (url, seen) = serve(vec![(200, THREE_HITS.into())]);
    let engine = HttpEngine::new(&url).unwrap();
    let hits = engine.execute("solar roof & more", 10).unwrap();
    assert_eq!(hits.len(), 3);
    assert_eq!(hits.iter().map(|h| h.rank).collect::<Vec<_>>(), [1, 2, 3]);
    assert_eq!(hits[0].location, "http://a.example/1");
    assert_eq!(hits[1].snippet, "");
    assert!(hits.iter().all(|h| h.engine == engine.id()));
    assert_eq!(
        seen.lock().unwrap()[0],
        "GET /search?q=solar+roof+%26+more&n=10 HTTP/1.1"
    );
}

#[test]
fn long_answers_are_truncated_to_limit() {
    let (url, _) = serve(vec![(200, THREE_HITS.into())]);
    let hits = HttpEngine::new(&url).unwrap().execute("solar", 2).unwrap();
    assert_eq!(hits.len(), 2);
    assert_eq!(hits[1].rank, 2);
}

#[test]
fn non_200_is_retried_then_succeeds() {
    let (url, seen) = serve(vec![(503, String::new()), (200, "[]".into())]);
    let engine = HttpEngine::new(&url)
        .unwrap()
        .with_retry(3, Duration::from_millis(5));
    assert_eq!(engine.execute("solar", 5).unwrap(), vec![]);
    assert_eq!(seen.lock().unwrap().len(), 2);
}

#[test]
fn persistent_failure_is_retryable_transport_error_with_backoff() {
    let (url, seen) = serve(vec![(500, String::new()); 3]);
    let engine = HttpEngine::new(&url)
        .unwrap()
        .with_retry(3, Duration::from_millis(20));
    let t0 = Instant::now();
    let err = engine.execute("solar cells", 5).unwrap_err();
    // waits 20 ms then 40 ms between the three attempts
    assert!(t0.elapsed() >= Duration::from_millis(60));
    assert_eq!(seen.lock().unwrap().len(), 3);
    assert!(err.is_retryable());
    match err {
        SearchError::Transport { query, .. } => assert_eq!(query, "solar cells"),
        other => panic!("expected transport error, got {other:?}"),
    }
}

#[test]
fn default_schedule_is_three_attempts_from_half_a_second() {
    let engine = HttpEngine::new("http://127.0.0.1:1/").unwrap();
    assert_eq!(engine.attempts(), 3);
    assert_eq!(engine.backoff(), Duration::from_millis(500));
}

#[test]
fn malformed_body_is_not_retryable() {
    for body in [
        "{\"not\": \"an array\"}",
        "[{\"title\": \"no location\"}]",
        "[{\"location\": \"\"}]",
        "garbage",
    ] {
        let (url, seen) = serve(vec![(200, body.into())]);
        let err = HttpEngine::new(&url).unwrap().execute("q", 3).unwrap_err();
        assert!(
            matches!(err, SearchError::Malformed { .. }),
            "{body}: {err:?}"
        );
        assert!(!err.is_retryable());
        assert_eq!(seen.lock().unwrap().len(), 1);
    }
}

#[test]
fn unreachable_server_is_transport_error() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/", listener.local_addr().unwrap());
    drop(listener);
    let engine = HttpEngine::new(&url)
        .unwrap()
        .with_retry(2, Duration::from_millis(1));
    assert!(engine.execute("q", 3).unwrap_err().is_retryable());
}

#[test]
fn invalid_base_url_is_rejected() {
    assert!(HttpEngine::new("not a url").is_err());
}
