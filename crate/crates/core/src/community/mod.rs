//! Community data: users, projects, social edges, cloud variables.

pub mod fixture;
mod model;
mod seed;
mod store;

pub use model::{
    CloudVar, CloudWrite, CommunityStats, NewProject, Project, ProjectId, ProjectMeta, Relation, RelationEdge,
    RelationList, User,
};
pub use seed::{load_seed, ConfigError, SeedConfig};
pub use store::{CommunityStore, StoreError, STORE_FORMAT_VERSION};
