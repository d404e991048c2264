//! Community API: endpoint table, query execution, HTTP server.

mod query;
mod server;
mod service;

pub use query::{
    translate_request, ApiError, Page, PageRequest, QuerySpec, Resource, Route, DEFAULT_PAGE_LIMIT, MAX_PAGE_LIMIT,
};
pub use server::{router, serve, spawn, ServeError, ServerHandle, SNAPSHOT_HEADER};
pub use service::{execute_query, parse_cloud_write, ApiReply, ApiService, RequestCounts};
