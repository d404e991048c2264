use std::sync::Arc;
use std::time::Duration;

use serde_json::Value;

use crate::api::ApiService;
use crate::canon;

#[derive(Debug, thiserror::Error)]
#[error("cannot reach {endpoint}: {message}")]
pub struct TransportError {
    pub endpoint: String,
    pub message: String,
}

/// A decoded JSON response.
#[derive(Clone, Debug, PartialEq)]
pub struct Reply {
    pub status: u16,
    pub body: Value,
}

/// Something that answers API requests: the in-process service or a remote server.
pub trait Transport: Send + Sync {
    /// `target` is an absolute path with optional query, e.g. `/api/stats`.
    fn get(&self, target: &str) -> Result<Reply, TransportError>;
    fn put(&self, target: &str, body: &Value) -> Result<Reply, TransportError>;
    /// Identifies the endpoint, e.g. `http://127.0.0.1:8080` or `in-process`.
    fn describe(&self) -> String;
}

/// Calls an [`ApiService`] directly, without sockets.
pub struct InProcess {
    service: Arc<ApiService>,
}

impl InProcess {
    pub fn new(service: Arc<ApiService>) -> Self {
        InProcess { service }
    }

    pub fn service(&self) -> &Arc<ApiService> {
        &self.service
    }
}

impl Transport for InProcess {
    fn get(&self, target: &str) -> Result<Reply, TransportError> {
        let r = self.service.handle("GET", target, "");
        Ok(Reply { status: r.status, body: r.body })
    }

    fn put(&self, target: &str, body: &Value) -> Result<Reply, TransportError> {
        let r = self.service.handle("PUT", target, &canon::render_compact(body));
        Ok(Reply { status: r.status, body: r.body })
    }

    fn describe(&self) -> String {
        "in-process".to_owned()
    }
}

/// Plain-HTTP client for a running server.
pub struct HttpTransport {
    base: String,
    agent: ureq::Agent,
}

impl HttpTransport {
    /// `base` is e.g. `http://127.0.0.1:8080`; a trailing slash is ignored.
    pub fn new(base: &str) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .into();
        HttpTransport { base: base.trim_end_matches('/').to_owned(), agent }
    }

    fn error(&self, target: &str, e: impl std::fmt::Display) -> TransportError {
        TransportError { endpoint: format!("{}{}", self.base, target), message: e.to_string() }
    }

    fn finish(
        &self,
        target: &str,
        resp: Result<ureq::http::Response<ureq::Body>, ureq::Error>,
    ) -> Result<Reply, TransportError> {
        let mut resp = resp.map_err(|e| self.error(target, e))?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(|e| self.error(target, e))?;
        let body = serde_json::from_str(&text).map_err(|e| self.error(target, format!("malformed JSON: {e}")))?;
        Ok(Reply { status, body })
    }
}

impl Transport for HttpTransport {
    fn get(&self, target: &str) -> Result<Reply, TransportError> {
        let url = format!("{}{}", self.base, target);
        self.finish(target, self.agent.get(&url).call())
    }

    fn put(&self, target: &str, body: &Value) -> Result<Reply, TransportError> {
        let url = format!("{}{}", self.base, target);
        let resp = self.agent.put(&url).header("content-type", "application/json").send(canon::render_compact(body));
        self.finish(target, resp)
    }

    fn describe(&self) -> String {
        self.base.clone()
    }
}
