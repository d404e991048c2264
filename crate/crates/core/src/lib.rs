//! Community blocks for a block-based language: program model, community data,
//! a tick-driven interpreter, the community API and its caching client.

pub mod api;
pub mod canon;
pub mod client;
pub mod community;
pub mod interp;
pub mod program;
pub mod samples;

pub use community::{CommunityStore, ProjectId, Relation};
pub use interp::{run, RunError, RunOptions, Transcript};
pub use program::{lint, parse_program, serialize_program, Program};
