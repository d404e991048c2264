//! Interpreter-side fetch layer: transports and the caching session.

mod session;
mod transport;

pub use session::{CacheEntry, CachedValue, FetchError, FetchResult, Session, SessionError, Source};
pub use transport::{HttpTransport, InProcess, Reply, Transport, TransportError};
