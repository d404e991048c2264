use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::program::Program;

pub type ProjectId = u64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct User {
    pub username: String,
    pub about: String,
    pub country: String,
}

impl User {
    pub fn new(username: &str, about: &str, country: &str) -> Self {
        User { username: username.to_owned(), about: about.to_owned(), country: country.to_owned() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub id: ProjectId,
    pub author: String,
    pub title: String,
    pub description: String,
    pub loves: u64,
    pub favorites_count: u64,
    pub comments_count: u64,
    pub code: Program,
    pub created_seq: u64,
}

impl Project {
    pub fn meta(&self) -> ProjectMeta {
        ProjectMeta {
            id: self.id,
            title: self.title.clone(),
            description: self.description.clone(),
            loves: self.loves,
            favorites: self.favorites_count,
            comments: self.comments_count,
            author: self.author.clone(),
        }
    }
}

/// Project social metadata, without code. This is also the API item shape.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectMeta {
    pub id: ProjectId,
    pub title: String,
    pub description: String,
    pub loves: u64,
    pub favorites: u64,
    pub comments: u64,
    pub author: String,
}

/// Input to [`super::CommunityStore::add_project`]; id and sequence are assigned by the store.
#[derive(Clone, Debug)]
pub struct NewProject {
    pub author: String,
    pub title: String,
    pub description: String,
    pub loves: u64,
    pub favorites_count: u64,
    pub comments_count: u64,
    pub code: Program,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RelationEdge {
    Follow { source: String, target: String, seq: u64 },
    Favorite { source: String, target: ProjectId, seq: u64 },
}

impl RelationEdge {
    pub fn seq(&self) -> u64 {
        match self {
            RelationEdge::Follow { seq, .. } | RelationEdge::Favorite { seq, .. } => *seq,
        }
    }

    pub fn source(&self) -> &str {
        match self {
            RelationEdge::Follow { source, .. } | RelationEdge::Favorite { source, .. } => source,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudVar {
    pub project_id: ProjectId,
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityStats {
    pub projects: u64,
    pub users: u64,
    pub comments: u64,
}

/// The four list queries behind the community loops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Shared,
    Favorited,
    Followers,
    Following,
}

impl Relation {
    pub const ALL: [Relation; 4] = [Relation::Shared, Relation::Favorited, Relation::Followers, Relation::Following];

    pub fn name(self) -> &'static str {
        match self {
            Relation::Shared => "shared",
            Relation::Favorited => "favorited",
            Relation::Followers => "followers",
            Relation::Following => "following",
        }
    }

    /// Last path segment of the list endpoint.
    pub fn endpoint(self) -> &'static str {
        match self {
            Relation::Shared => "projects",
            Relation::Favorited => "favorites",
            Relation::Followers => "followers",
            Relation::Following => "following",
        }
    }

    pub fn from_endpoint(segment: &str) -> Option<Relation> {
        Relation::ALL.into_iter().find(|r| r.endpoint() == segment)
    }

    pub fn lists_projects(self) -> bool {
        matches!(self, Relation::Shared | Relation::Favorited)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Relation {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Relation::ALL.into_iter().find(|r| r.name() == s).ok_or(())
    }
}

/// Ordered result of a relation query.
#[derive(Clone, Debug, PartialEq)]
pub enum RelationList<'a> {
    Projects(Vec<&'a Project>),
    Users(Vec<&'a User>),
}

impl RelationList<'_> {
    pub fn len(&self) -> usize {
        match self {
            RelationList::Projects(p) => p.len(),
            RelationList::Users(u) => u.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Cloud variable write mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CloudWrite {
    Set(f64),
    Change(f64),
}
