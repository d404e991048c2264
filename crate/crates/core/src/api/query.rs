//! URL ↔ query translation.

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::community::{ProjectId, Relation};

pub const DEFAULT_PAGE_LIMIT: u64 = 20;
pub const MAX_PAGE_LIMIT: u64 = 100;

const SEGMENT: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'_').remove(b'.').remove(b'~');

/// An addressable resource of the community API.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Resource {
    User(String),
    UserList { username: String, relation: Relation },
    Project(ProjectId),
    ProjectCodeMeta(ProjectId),
    Stats,
    Cloud { project: ProjectId, name: String },
}

impl Resource {
    /// Request path without pagination parameters; also the client cache key.
    pub fn path(&self) -> String {
        let enc = |s: &str| utf8_percent_encode(s, SEGMENT).to_string();
        match self {
            Resource::User(u) => format!("/api/users/{}", enc(u)),
            Resource::UserList { username, relation } => {
                format!("/api/users/{}/{}", enc(username), relation.endpoint())
            }
            Resource::Project(id) => format!("/api/projects/{id}"),
            Resource::ProjectCodeMeta(id) => format!("/api/projects/{id}/code-meta"),
            Resource::Stats => "/api/stats".to_owned(),
            Resource::Cloud { project, name } => format!("/api/cloud/{project}/{}", enc(name)),
        }
    }

    pub fn is_list(&self) -> bool {
        matches!(self, Resource::UserList { .. })
    }

    /// Accounting bucket used by the debug request counter.
    pub fn kind(&self) -> &'static str {
        match self {
            Resource::User(_) => "user",
            Resource::UserList { .. } => "list",
            Resource::Project(_) => "project",
            Resource::ProjectCodeMeta(_) => "code_meta",
            Resource::Stats => "stats",
            Resource::Cloud { .. } => "cloud",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PageRequest {
    pub offset: u64,
    pub limit: u64,
}

/// A normalized read query. `page` is present exactly for list resources.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuerySpec {
    pub resource: Resource,
    pub page: Option<PageRequest>,
}

/// One page of a list resource.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Page {
    pub items: Vec<Value>,
    pub total: u64,
    pub offset: u64,
    pub limit: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Route {
    Get(QuerySpec),
    CloudPut { project: ProjectId, name: String },
    DebugRequests,
}

/// HTTP-level failure with a JSON `{error}` body.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("HTTP {status}: {message}")]
pub struct ApiError {
    pub status: u16,
    pub message: String,
    pub field: Option<&'static str>,
}

impl ApiError {
    pub fn not_found(message: impl Into<String>) -> Self {
        ApiError { status: 404, message: message.into(), field: None }
    }

    pub fn bad_request(field: &'static str, message: impl Into<String>) -> Self {
        ApiError { status: 400, message: message.into(), field: Some(field) }
    }

    pub fn to_json(&self) -> Value {
        let mut body = serde_json::Map::new();
        body.insert("error".into(), Value::from(self.message.clone()));
        if let Some(f) = self.field {
            body.insert("field".into(), Value::from(f));
        }
        Value::Object(body)
    }
}

fn decode(segment: &str) -> Result<String, ApiError> {
    percent_decode_str(segment)
        .decode_utf8()
        .map(|s| s.into_owned())
        .map_err(|_| ApiError::not_found("path is not valid UTF-8"))
}

fn parse_page(query: &str) -> Result<PageRequest, ApiError> {
    let mut page = PageRequest { offset: 0, limit: DEFAULT_PAGE_LIMIT };
    for (k, v) in form_urlencoded::parse(query.as_bytes()) {
        match k.as_ref() {
            "offset" => {
                page.offset =
                    v.parse().map_err(|_| ApiError::bad_request("offset", format!("invalid offset `{v}`")))?;
            }
            "limit" => {
                let limit: u64 =
                    v.parse().map_err(|_| ApiError::bad_request("limit", format!("invalid limit `{v}`")))?;
                if limit == 0 {
                    return Err(ApiError::bad_request("limit", "limit must be ≥ 1"));
                }
                page.limit = limit.min(MAX_PAGE_LIMIT);
            }
            _ => {}
        }
    }
    Ok(page)
}

fn reject_paging(query: &str) -> Result<(), ApiError> {
    for (k, _) in form_urlencoded::parse(query.as_bytes()) {
        if k == "offset" || k == "limit" {
            let field = if k == "offset" { "offset" } else { "limit" };
            return Err(ApiError::bad_request(field, format!("`{field}` only applies to list resources")));
        }
    }
    Ok(())
}

/// Maps a request onto the endpoint table.
pub fn translate_request(method: &str, path: &str, query: &str) -> Result<Route, ApiError> {
    let unknown = || ApiError::not_found(format!("no route for {method} {path}"));
    let rest = path.strip_prefix("/api/").ok_or_else(unknown)?;
    let segments: Vec<&str> = rest.split('/').collect();
    let id = |s: &str| s.parse::<ProjectId>().map_err(|_| unknown());

    let is_get = method.eq_ignore_ascii_case("GET");
    let is_put = method.eq_ignore_ascii_case("PUT");
    let method_not_allowed =
        || ApiError { status: 405, message: format!("{method} not allowed on {path}"), field: None };

    if let ["cloud", pid, name] = segments.as_slice() {
        let project = id(pid)?;
        let name = decode(name)?;
        reject_paging(query)?;
        return if is_get {
            Ok(Route::Get(QuerySpec { resource: Resource::Cloud { project, name }, page: None }))
        } else if is_put {
            Ok(Route::CloudPut { project, name })
        } else {
            Err(method_not_allowed())
        };
    }

    let resource = match segments.as_slice() {
        ["_debug", "requests"] => {
            return if is_get { Ok(Route::DebugRequests) } else { Err(method_not_allowed()) };
        }
        ["users", u] if !u.is_empty() => Resource::User(decode(u)?),
        ["users", u, list] if !u.is_empty() => {
            Resource::UserList { username: decode(u)?, relation: Relation::from_endpoint(list).ok_or_else(unknown)? }
        }
        ["projects", pid] => Resource::Project(id(pid)?),
        ["projects", pid, "code-meta"] => Resource::ProjectCodeMeta(id(pid)?),
        ["stats"] => Resource::Stats,
        _ => return Err(unknown()),
    };
    if !is_get {
        return Err(method_not_allowed());
    }
    let page = if resource.is_list() {
        Some(parse_page(query)?)
    } else {
        reject_paging(query)?;
        None
    };
    Ok(Route::Get(QuerySpec { resource, page }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn get(path: &str, query: &str) -> Result<Route, ApiError> {
        translate_request("GET", path, query)
    }

    #[test]
    fn list_routes() {
        let r = get("/api/users/alice/followers", "offset=0&limit=2").unwrap();
        assert_eq!(
            r,
            Route::Get(QuerySpec {
                resource: Resource::UserList { username: "alice".into(), relation: Relation::Followers },
                page: Some(PageRequest { offset: 0, limit: 2 }),
            })
        );
        let Route::Get(q) = get("/api/users/alice/projects", "").unwrap() else { panic!() };
        assert_eq!(q.page, Some(PageRequest { offset: 0, limit: DEFAULT_PAGE_LIMIT }));
    }

    #[test]
    fn limit_is_clamped() {
        let Route::Get(q) = get("/api/users/alice/followers", "limit=500").unwrap() else { panic!() };
        assert_eq!(q.page.unwrap().limit, 100);
    }

    #[test]
    fn bad_requests() {
        assert_eq!(get("/api/bogus", "").unwrap_err().status, 404);
        assert_eq!(get("/api/projects/abc", "").unwrap_err().status, 404);
        let e = get("/api/users/alice/followers", "offset=-1").unwrap_err();
        assert_eq!((e.status, e.field), (400, Some("offset")));
        let e = get("/api/users/alice/followers", "limit=0").unwrap_err();
        assert_eq!((e.status, e.field), (400, Some("limit")));
        assert_eq!(get("/api/stats", "limit=5").unwrap_err().status, 400);
        assert_eq!(translate_request("POST", "/api/stats", "").unwrap_err().status, 405);
    }

    #[test]
    fn entity_and_cloud_routes() {
        assert_eq!(
            get("/api/projects/7/code-meta", "").unwrap(),
            Route::Get(QuerySpec { resource: Resource::ProjectCodeMeta(7), page: None })
        );
        assert_eq!(
            translate_request("PUT", "/api/cloud/1/total%20loves", "").unwrap(),
            Route::CloudPut { project: 1, name: "total loves".into() }
        );
        assert_eq!(get("/api/_debug/requests", "").unwrap(), Route::DebugRequests);
    }

    #[test]
    fn paths_round_trip_through_translation() {
        let resources = [
            Resource::User("a b/c".into()),
            Resource::UserList { username: "ünï".into(), relation: Relation::Favorited },
            Resource::Project(3),
            Resource::ProjectCodeMeta(3),
            Resource::Stats,
            Resource::Cloud { project: 1, name: "total loves".into() },
        ];
        for r in resources {
            let route = get(&r.path(), "").unwrap();
            let Route::Get(q) = route else { panic!() };
            assert_eq!(q.resource, r);
        }
    }
}
