use std::time::Duration;

use serde::Serialize;

use super::annotator::{parse_annotation, Annotation, Annotator};
use crate::{Error, Result};

#[derive(Serialize)]
struct AnnotateRequest<'a> {
    text: &'a str,
}

/// Client for an external annotation service.
///
/// Sends `POST {base_url}/annotate` with `{"text": ...}` and expects an
/// [`Annotation`] JSON body back.
#[derive(Debug, Clone)]
pub struct HttpAnnotator {
    endpoint: String,
    agent: ureq::Agent,
}

impl HttpAnnotator {
    pub fn new(base_url: &str) -> Self {
        Self::with_timeout(base_url, Duration::from_secs(10))
    }

    pub fn with_timeout(base_url: &str, timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(true)
            .build();
        Self {
            endpoint: format!("{}/annotate", base_url.trim_end_matches('/')),
            agent: config.into(),
        }
    }
}

impl Annotator for HttpAnnotator {
    fn annotate(&self, text: &str) -> Result<Annotation> {
        let unavailable = |e: ureq::Error| Error::AnnotatorUnavailable(e.to_string());
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .send_json(AnnotateRequest { text })
            .map_err(unavailable)?;
        let body = resp.body_mut().read_to_vec().map_err(unavailable)?;
        parse_annotation(&body)
    }
}

#[cfg(test)]
mod tests {
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::thread;

    use super::*;

    /// Serves exactly one canned HTTP response and returns the request body.
    fn one_shot(status: &str, body: &'static str) -> (String, thread::JoinHandle<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let status = status.to_owned();
        let handle = thread::spawn(move || {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            let mut line = String::new();
            loop {
                line.clear();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut req = vec![0; len];
            reader.read_exact(&mut req).unwrap();
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
            String::from_utf8(req).unwrap()
        });
        (url, handle)
    }

    #[test]
    fn posts_text_and_parses_response() {
        let (url, server) = one_shot(
            "200 OK",
            r#"{"tokens":[{"text":"Gandhi","start":0,"end":6}],"entities":[{"start":0,"end":6,"label":"PERSON"}],"noun_phrases":[]}"#,
        );
        let ann = HttpAnnotator::new(&url).annotate("Gandhi").unwrap();
        assert_eq!(ann.entities[0].label, "PERSON");
        let sent: serde_json::Value = serde_json::from_str(&server.join().unwrap()).unwrap();
        assert_eq!(sent["text"], "Gandhi");
    }

    #[test]
    fn server_error_is_unavailable() {
        let (url, server) = one_shot("500 Internal Server Error", "{}");
        let err = HttpAnnotator::new(&url).annotate("x").unwrap_err();
        assert!(matches!(err, Error::AnnotatorUnavailable(_)));
        server.join().unwrap();
    }

    #[test]
    fn unreachable_is_unavailable() {
        let url = {
            let l = TcpListener::bind("127.0.0.1:0").unwrap();
            format!("http://{}", l.local_addr().unwrap())
        };
        let err = HttpAnnotator::with_timeout(&url, Duration::from_secs(2)).annotate("x").unwrap_err();
        assert!(matches!(err, Error::AnnotatorUnavailable(_)));
    }
}
