use std::collections::BTreeMap;
use std::sync::{Mutex, PoisonError, RwLock};

use serde_json::{json, Value};

use super::query::{translate_request, ApiError, Page, QuerySpec, Resource, Route};
use crate::canon;
use crate::community::{CloudWrite, CommunityStore, RelationList, StoreError};
use crate::program::code_metadata;

/// A response before transport framing.
#[derive(Clone, Debug, PartialEq)]
pub struct ApiReply {
    pub status: u16,
    pub body: Value,
    /// Store revision the response was computed against.
    pub snapshot: u64,
}

/// Requests served, bucketed by resource kind. Debug queries are not counted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RequestCounts {
    pub total: u64,
    pub by_kind: BTreeMap<String, u64>,
}

impl RequestCounts {
    pub fn kind(&self, kind: &str) -> u64 {
        self.by_kind.get(kind).copied().unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        json!({"requests": self.total, "by_kind": self.by_kind})
    }

    pub fn from_json(value: &Value) -> Option<Self> {
        let total = value.get("requests")?.as_u64()?;
        let by_kind = value
            .get("by_kind")?
            .as_object()?
            .iter()
            .map(|(k, v)| v.as_u64().map(|n| (k.clone(), n)))
            .collect::<Option<_>>()?;
        Some(RequestCounts { total, by_kind })
    }
}

fn store_error(e: StoreError) -> ApiError {
    match e {
        StoreError::UnknownUser(_) | StoreError::UnknownProject(_) => ApiError::not_found(e.to_string()),
        StoreError::NonFinite => ApiError::bad_request("value", e.to_string()),
        other => ApiError { status: 500, message: other.to_string(), field: None },
    }
}

/// Runs one read query against a store.
pub fn execute_query(spec: &QuerySpec, store: &CommunityStore) -> Result<Value, ApiError> {
    Ok(match &spec.resource {
        Resource::User(u) => {
            let user = store.user(u).ok_or_else(|| ApiError::not_found(format!("unknown user `{u}`")))?;
            canon::to_value(user)
        }
        Resource::UserList { username, relation } => {
            let items: Vec<Value> = match store.relation_list(username, *relation).map_err(store_error)? {
                RelationList::Projects(ps) => ps.iter().map(|p| canon::to_value(&p.meta())).collect(),
                RelationList::Users(us) => us.iter().map(|u| canon::to_value(*u)).collect(),
            };
            let page =
                spec.page.unwrap_or(super::query::PageRequest { offset: 0, limit: super::query::DEFAULT_PAGE_LIMIT });
            let total = items.len() as u64;
            let start = page.offset.min(total) as usize;
            let end = page.offset.saturating_add(page.limit).min(total) as usize;
            canon::to_value(&Page { items: items[start..end].to_vec(), total, offset: page.offset, limit: page.limit })
        }
        Resource::Project(id) => canon::to_value(&store.project_meta(*id).map_err(store_error)?),
        Resource::ProjectCodeMeta(id) => {
            let project = store.project(*id).ok_or_else(|| ApiError::not_found(format!("unknown project {id}")))?;
            canon::canonicalize(code_metadata(&project.code).to_json())
        }
        Resource::Stats => canon::to_value(&store.stats()),
        Resource::Cloud { project, name } => {
            let value = store.cloud_read(*project, name).map_err(store_error)?;
            cloud_json(*project, name, value)
        }
    })
}

fn cloud_json(project: u64, name: &str, value: f64) -> Value {
    json!({"project_id": project, "name": name, "value": canon::number(value)})
}

/// Parses a cloud PUT body: exactly one of `{"set": v}` or `{"change": d}`.
pub fn parse_cloud_write(body: &str) -> Result<CloudWrite, ApiError> {
    let value: Value =
        serde_json::from_str(body).map_err(|e| ApiError::bad_request("body", format!("invalid JSON body: {e}")))?;
    let obj = value.as_object().ok_or_else(|| ApiError::bad_request("body", "body must be an object"))?;
    if let Some(k) = obj.keys().find(|k| *k != "set" && *k != "change") {
        return Err(ApiError::bad_request("body", format!("unexpected key `{k}`")));
    }
    let number = |field: &'static str, v: &Value| {
        v.as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| ApiError::bad_request(field, format!("`{field}` must be a finite number")))
    };
    match (obj.get("set"), obj.get("change")) {
        (Some(v), None) => Ok(CloudWrite::Set(number("set", v)?)),
        (None, Some(d)) => Ok(CloudWrite::Change(number("change", d)?)),
        (Some(_), Some(_)) => Err(ApiError::bad_request("body", "give either `set` or `change`, not both")),
        (None, None) => Err(ApiError::bad_request("body", "body needs `set` or `change`")),
    }
}

/// The HTTP face of a community store, independent of any socket.
pub struct ApiService {
    store: RwLock<CommunityStore>,
    counts: Mutex<RequestCounts>,
}

impl ApiService {
    pub fn new(store: CommunityStore) -> Self {
        ApiService { store: RwLock::new(store), counts: Mutex::new(RequestCounts::default()) }
    }

    pub fn read<R>(&self, f: impl FnOnce(&CommunityStore) -> R) -> R {
        f(&self.store.read().unwrap_or_else(PoisonError::into_inner))
    }

    pub fn write<R>(&self, f: impl FnOnce(&mut CommunityStore) -> R) -> R {
        f(&mut self.store.write().unwrap_or_else(PoisonError::into_inner))
    }

    pub fn request_counts(&self) -> RequestCounts {
        self.counts.lock().unwrap_or_else(PoisonError::into_inner).clone()
    }

    fn count(&self, kind: &str) {
        let mut c = self.counts.lock().unwrap_or_else(PoisonError::into_inner);
        c.total += 1;
        *c.by_kind.entry(kind.to_owned()).or_default() += 1;
    }

    /// Serves one request. `target` is the path with an optional `?query`.
    pub fn handle(&self, method: &str, target: &str, body: &str) -> ApiReply {
        let (path, query) = target.split_once('?').unwrap_or((target, ""));
        let route = translate_request(method, path, query);
        let kind = match &route {
            Ok(Route::Get(q)) => q.resource.kind(),
            Ok(Route::CloudPut { .. }) => "cloud",
            Ok(Route::DebugRequests) => "debug",
            Err(_) => "other",
        };
        if kind != "debug" {
            self.count(kind);
        }

        let result = route.and_then(|route| match route {
            Route::Get(spec) => {
                let store = self.store.read().unwrap_or_else(PoisonError::into_inner);
                execute_query(&spec, &store).map(|body| (body, store.revision()))
            }
            Route::CloudPut { project, name } => {
                let write = parse_cloud_write(body)?;
                let mut store = self.store.write().unwrap_or_else(PoisonError::into_inner);
                let value = store.cloud_write(project, &name, write).map_err(store_error)?;
                Ok((cloud_json(project, &name, value), store.revision()))
            }
            Route::DebugRequests => Ok((self.request_counts().to_json(), self.read(|s| s.revision()))),
        });

        match result {
            Ok((body, snapshot)) => ApiReply { status: 200, body, snapshot },
            Err(e) => ApiReply { status: e.status, body: e.to_json(), snapshot: self.read(|s| s.revision()) },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::api::query::PageRequest;
    use crate::community::{fixture, Relation};

    fn list(user: &str, relation: Relation, offset: u64, limit: u64) -> QuerySpec {
        QuerySpec {
            resource: Resource::UserList { username: user.into(), relation },
            page: Some(PageRequest { offset, limit }),
        }
    }

    #[test]
    fn paged_followers() {
        let s = fixture::s0();
        let v = execute_query(&list("alice", Relation::Followers, 0, 1), &s).unwrap();
        assert_eq!(v["items"].as_array().unwrap().len(), 1);
        assert_eq!(v["items"][0]["username"], "bob");
        assert_eq!(v["total"], 2);
    }

    #[test]
    fn offset_past_end_is_empty() {
        let s = fixture::s0();
        let v = execute_query(&list("alice", Relation::Shared, 2, 20), &s).unwrap();
        assert_eq!(v["items"], json!([]));
        assert_eq!(v["total"], 2);
    }

    #[test]
    fn code_meta_endpoint() {
        let s = fixture::s0();
        let q = QuerySpec { resource: Resource::ProjectCodeMeta(1), page: None };
        let v = execute_query(&q, &s).unwrap();
        assert_eq!(v["opcode_counts"], json!({"say": 2, "play_sound": 1}));
        assert_eq!(v["categories"], json!(["looks", "sound"]));
    }

    #[test]
    fn item_shapes() {
        let s = fixture::s0();
        let q = QuerySpec { resource: Resource::Project(1), page: None };
        let v = execute_query(&q, &s).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["author", "comments", "description", "favorites", "id", "loves", "title"]);
        let q = QuerySpec { resource: Resource::User("alice".into()), page: None };
        let v = execute_query(&q, &s).unwrap();
        assert_eq!(v, json!({"username": "alice", "about": "hi", "country": "Spain"}));
    }

    #[test]
    fn unknown_keys_are_404() {
        let svc = ApiService::new(fixture::s0());
        for target in ["/api/users/zed", "/api/users/zed/followers", "/api/projects/999", "/api/cloud/999/x"] {
            let r = svc.handle("GET", target, "");
            assert_eq!(r.status, 404, "{target}");
            assert!(r.body["error"].is_string());
        }
    }

    #[test]
    fn cloud_put_rules() {
        let svc = ApiService::new(fixture::s0());
        assert_eq!(svc.handle("PUT", "/api/cloud/1/score", r#"{"set": 5}"#).body["value"], 5);
        assert_eq!(svc.handle("PUT", "/api/cloud/1/score", r#"{"change": -2}"#).body["value"], 3);
        assert_eq!(svc.handle("PUT", "/api/cloud/1/score", r#"{"set": 1, "change": 1}"#).status, 400);
        assert_eq!(svc.handle("PUT", "/api/cloud/1/score", r#"{}"#).status, 400);
        assert_eq!(svc.handle("PUT", "/api/cloud/1/score", r#"{"set": "x"}"#).status, 400);
        assert_eq!(svc.handle("GET", "/api/cloud/1/score", "").body["value"], 3);
    }

    #[test]
    fn requests_are_counted_by_kind() {
        let svc = ApiService::new(fixture::s0());
        svc.handle("GET", "/api/users/alice/followers?limit=1", "");
        svc.handle("GET", "/api/stats", "");
        svc.handle("GET", "/api/_debug/requests", "");
        let c = svc.request_counts();
        assert_eq!((c.total, c.kind("list"), c.kind("stats")), (2, 1, 1));
        let echoed = svc.handle("GET", "/api/_debug/requests", "").body;
        assert_eq!(RequestCounts::from_json(&echoed), Some(c));
    }

    #[test]
    fn snapshot_tracks_writes() {
        let svc = ApiService::new(fixture::s0());
        let before = svc.handle("GET", "/api/stats", "").snapshot;
        svc.handle("PUT", "/api/cloud/1/x", r#"{"change": 1}"#);
        assert!(svc.handle("GET", "/api/stats", "").snapshot > before);
    }
}
