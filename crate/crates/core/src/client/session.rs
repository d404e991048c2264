use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::transport::{Transport, TransportError};
use crate::api::{Page, RequestCounts, Resource, DEFAULT_PAGE_LIMIT, MAX_PAGE_LIMIT};
use crate::canon;
use crate::community::{CloudWrite, ProjectId};

/// A cached response. `NotFound` remembers a 404 so it is not re-queried.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CachedValue {
    List(Vec<Value>),
    Scalar(Value),
    NotFound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub value: CachedValue,
    /// Session-relative sequence number of the fetch.
    pub fetched_at: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Network,
    Cache,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FetchResult {
    pub value: CachedValue,
    pub source: Source,
}

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("{endpoint} answered HTTP {status}: {message}")]
    Status { endpoint: String, status: u16, message: String },
    #[error("{endpoint}: {message}")]
    Protocol { endpoint: String, message: String },
}

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("the cache cannot be flushed while a run is in progress")]
    FlushDuringRun,
    #[error("session file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed session file: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Serialize, Deserialize)]
struct SessionFile {
    endpoint: String,
    next_seq: u64,
    entries: BTreeMap<String, CacheEntry>,
}

/// Fetch layer with a per-session cache keyed by resource path.
pub struct Session {
    transport: Arc<dyn Transport>,
    endpoint: String,
    page_limit: u64,
    entries: BTreeMap<String, CacheEntry>,
    next_seq: u64,
    in_run: bool,
    requests: u64,
}

impl Session {
    pub fn new(transport: Arc<dyn Transport>) -> Self {
        let endpoint = transport.describe();
        Session {
            transport,
            endpoint,
            page_limit: DEFAULT_PAGE_LIMIT,
            entries: BTreeMap::new(),
            next_seq: 0,
            in_run: false,
            requests: 0,
        }
    }

    /// Page size used for list walks, clamped to `1..=100`.
    pub fn with_page_limit(mut self, limit: u64) -> Self {
        self.page_limit = limit.clamp(1, MAX_PAGE_LIMIT);
        self
    }

    /// Overrides the endpoint label checked when a saved session is restored.
    pub fn with_endpoint_label(mut self, label: impl Into<String>) -> Self {
        self.endpoint = label.into();
        self
    }

    pub fn page_limit(&self) -> u64 {
        self.page_limit
    }

    pub fn transport(&self) -> &Arc<dyn Transport> {
        &self.transport
    }

    /// Requests this session has sent.
    pub fn requests_issued(&self) -> u64 {
        self.requests
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn cached(&self, resource: &Resource) -> Option<&CacheEntry> {
        self.entries.get(&resource.path())
    }

    pub fn begin_run(&mut self) {
        self.in_run = true;
    }

    pub fn end_run(&mut self) {
        self.in_run = false;
    }

    /// Drops every entry. Only allowed between runs.
    pub fn flush(&mut self) -> Result<(), SessionError> {
        if self.in_run {
            return Err(SessionError::FlushDuringRun);
        }
        self.entries.clear();
        Ok(())
    }

    fn endpoint_of(&self, target: &str) -> String {
        format!("{}{}", self.transport.describe(), target)
    }

    fn get(&mut self, target: &str) -> Result<(u16, Value), FetchError> {
        self.requests += 1;
        let reply = self.transport.get(target)?;
        Ok((reply.status, reply.body))
    }

    fn status_error(&self, target: &str, status: u16, body: &Value) -> FetchError {
        FetchError::Status {
            endpoint: self.endpoint_of(target),
            status,
            message: body.get("error").and_then(Value::as_str).unwrap_or("").to_owned(),
        }
    }

    /// Returns the complete value for `resource`, from cache when present.
    ///
    /// Lists are walked page by page until `offset ≥ total`. A failure part way
    /// through discards what was fetched. A 404 is cached as `NotFound`.
    pub fn fetch_all(&mut self, resource: &Resource) -> Result<FetchResult, FetchError> {
        let key = resource.path();
        if let Some(entry) = self.entries.get(&key) {
            return Ok(FetchResult { value: entry.value.clone(), source: Source::Cache });
        }
        let value = if resource.is_list() { self.walk(&key)? } else { self.single(&key)? };
        self.next_seq += 1;
        self.entries.insert(key, CacheEntry { value: value.clone(), fetched_at: self.next_seq });
        Ok(FetchResult { value, source: Source::Network })
    }

    fn single(&mut self, key: &str) -> Result<CachedValue, FetchError> {
        match self.get(key)? {
            (200, body) => Ok(CachedValue::Scalar(body)),
            (404, _) => Ok(CachedValue::NotFound),
            (status, body) => Err(self.status_error(key, status, &body)),
        }
    }

    fn walk(&mut self, key: &str) -> Result<CachedValue, FetchError> {
        let limit = self.page_limit;
        let mut items = Vec::new();
        let mut offset = 0u64;
        loop {
            let target = format!("{key}?offset={offset}&limit={limit}");
            let (status, body) = self.get(&target)?;
            match status {
                200 => {}
                404 if offset == 0 => return Ok(CachedValue::NotFound),
                _ => return Err(self.status_error(&target, status, &body)),
            }
            let page: Page = serde_json::from_value(body).map_err(|e| FetchError::Protocol {
                endpoint: self.endpoint_of(&target),
                message: format!("malformed page: {e}"),
            })?;
            let got = page.items.len() as u64;
            items.extend(page.items);
            offset += limit;
            if offset >= page.total {
                if items.len() as u64 != page.total {
                    return Err(FetchError::Protocol {
                        endpoint: self.endpoint_of(key),
                        message: format!("assembled {} items but total is {}", items.len(), page.total),
                    });
                }
                return Ok(CachedValue::List(items));
            }
            if got != limit {
                return Err(FetchError::Protocol {
                    endpoint: self.endpoint_of(&target),
                    message: format!("short page of {got} items before the end of the list"),
                });
            }
        }
    }

    fn cloud_value(&self, target: &str, status: u16, body: Value) -> Result<f64, FetchError> {
        if status != 200 {
            return Err(self.status_error(target, status, &body));
        }
        body.get("value").and_then(Value::as_f64).ok_or_else(|| FetchError::Protocol {
            endpoint: self.endpoint_of(target),
            message: "cloud reply has no numeric value".into(),
        })
    }

    /// Reads a cloud variable. Never cached.
    pub fn cloud_get(&mut self, project: ProjectId, name: &str) -> Result<f64, FetchError> {
        let target = Resource::Cloud { project, name: name.to_owned() }.path();
        let (status, body) = self.get(&target)?;
        self.cloud_value(&target, status, body)
    }

    /// Writes a cloud variable on the service and returns its new value.
    pub fn cloud_write(&mut self, project: ProjectId, name: &str, write: CloudWrite) -> Result<f64, FetchError> {
        let target = Resource::Cloud { project, name: name.to_owned() }.path();
        let body = match write {
            CloudWrite::Set(v) => json!({"set": canon::number(v)}),
            CloudWrite::Change(d) => json!({"change": canon::number(d)}),
        };
        self.requests += 1;
        let reply = self.transport.put(&target, &body)?;
        self.cloud_value(&target, reply.status, reply.body)
    }

    /// The service's request counters (not counted by the service itself).
    pub fn server_requests(&mut self) -> Result<RequestCounts, FetchError> {
        let target = "/api/_debug/requests";
        let reply = self.transport.get(target)?;
        if reply.status != 200 {
            return Err(self.status_error(target, reply.status, &reply.body));
        }
        RequestCounts::from_json(&reply.body).ok_or_else(|| FetchError::Protocol {
            endpoint: self.endpoint_of(target),
            message: "malformed request counters".into(),
        })
    }

    /// Writes the cache to `path` so a later process can resume it.
    pub fn save(&self, path: &Path) -> Result<(), SessionError> {
        let file =
            SessionFile { endpoint: self.endpoint.clone(), next_seq: self.next_seq, entries: self.entries.clone() };
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, canon::render_pretty(&canon::to_value(&file)))?;
        Ok(())
    }

    /// Loads a saved cache. Returns `false` (leaving the cache empty) when the
    /// file is missing or was saved against a different endpoint.
    pub fn restore(&mut self, path: &Path) -> Result<bool, SessionError> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(false),
            Err(e) => return Err(e.into()),
        };
        let file: SessionFile = serde_json::from_str(&text)?;
        if file.endpoint != self.endpoint {
            return Ok(false);
        }
        self.entries = file.entries;
        self.next_seq = file.next_seq;
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::api::ApiService;
    use crate::client::InProcess;
    use crate::community::{fixture, Relation, User};

    fn session(limit: u64) -> (Arc<ApiService>, Session) {
        let svc = Arc::new(ApiService::new(fixture::s0()));
        let s = Session::new(Arc::new(InProcess::new(svc.clone()))).with_page_limit(limit);
        (svc, s)
    }

    fn followers(u: &str) -> Resource {
        Resource::UserList { username: u.into(), relation: Relation::Followers }
    }

    fn names(v: &CachedValue) -> Vec<String> {
        let CachedValue::List(items) = v else { panic!("{v:?}") };
        items.iter().map(|i| i["username"].as_str().unwrap().to_owned()).collect()
    }

    #[test]
    fn walks_pages_then_hits_cache() {
        let (svc, mut s) = session(1);
        let r = s.fetch_all(&followers("alice")).unwrap();
        assert_eq!(r.source, Source::Network);
        assert_eq!(names(&r.value), ["bob", "carol"]);
        assert_eq!(svc.request_counts().kind("list"), 2);
        let r = s.fetch_all(&followers("alice")).unwrap();
        assert_eq!(r.source, Source::Cache);
        assert_eq!(svc.request_counts().kind("list"), 2);
    }

    #[test]
    fn stale_until_flushed() {
        let (svc, mut s) = session(20);
        s.fetch_all(&followers("carol")).unwrap();
        svc.write(|st| st.follow("bob", "carol")).unwrap();
        assert_eq!(names(&s.fetch_all(&followers("carol")).unwrap().value), ["alice"]);
        s.flush().unwrap();
        assert_eq!(names(&s.fetch_all(&followers("carol")).unwrap().value), ["alice", "bob"]);
    }

    #[test]
    fn flush_is_refused_mid_run() {
        let (_, mut s) = session(20);
        s.flush().unwrap();
        s.begin_run();
        assert!(matches!(s.flush(), Err(SessionError::FlushDuringRun)));
        s.end_run();
        s.flush().unwrap();
    }

    #[test]
    fn unknown_user_is_cached_once() {
        let (svc, mut s) = session(20);
        assert_eq!(s.fetch_all(&followers("zed")).unwrap().value, CachedValue::NotFound);
        s.fetch_all(&followers("zed")).unwrap();
        assert_eq!(svc.request_counts().kind("list"), 1);
    }

    #[test]
    fn empty_list_takes_one_request() {
        let (svc, mut s) = session(20);
        svc.write(|st| st.add_user(User::new("dan", "", "UK"))).unwrap();
        let r = s.fetch_all(&followers("dan")).unwrap();
        assert_eq!(r.value, CachedValue::List(vec![]));
        assert_eq!(svc.request_counts().kind("list"), 1);
    }

    #[test]
    fn save_and_restore() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t1.json");
        let (svc, mut s) = session(20);
        s.fetch_all(&followers("alice")).unwrap();
        s.save(&path).unwrap();

        let mut again = Session::new(Arc::new(InProcess::new(svc.clone())));
        assert!(again.restore(&path).unwrap());
        assert_eq!(again.fetch_all(&followers("alice")).unwrap().source, Source::Cache);

        let mut other = Session::new(Arc::new(InProcess::new(svc))).with_endpoint_label("elsewhere");
        assert!(!other.restore(&path).unwrap());
        assert!(other.is_empty());
    }

    #[test]
    fn cloud_round_trip() {
        let (_, mut s) = session(20);
        assert_eq!(s.cloud_get(1, "score").unwrap(), 0.0);
        assert_eq!(s.cloud_write(1, "score", CloudWrite::Change(2.5)).unwrap(), 2.5);
        assert_eq!(s.cloud_write(1, "score", CloudWrite::Set(7.0)).unwrap(), 7.0);
        assert!(s.cloud_get(99, "score").is_err());
    }
}
