use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::model::{
    CloudVar, CloudWrite, CommunityStats, NewProject, Project, ProjectId, ProjectMeta, Relation, RelationEdge,
    RelationList, User,
};
use crate::canon;

pub const STORE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("unknown user `{0}`")]
    UnknownUser(String),
    #[error("unknown project {0}")]
    UnknownProject(ProjectId),
    #[error("duplicate user `{0}`")]
    DuplicateUser(String),
    #[error("username must be nonempty")]
    EmptyUsername,
    #[error("duplicate project id {0}")]
    DuplicateProject(ProjectId),
    #[error("duplicate edge: {0}")]
    DuplicateEdge(String),
    #[error("`{0}` cannot follow themself")]
    SelfFollow(String),
    #[error("cloud value must be finite")]
    NonFinite,
    #[error("invalid store: {0}")]
    Invalid(String),
    #[error("unsupported store version {0}")]
    Version(u32),
    #[error("malformed store file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("store file I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// On-disk layout of a store.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoreFile {
    version: u32,
    users: Vec<User>,
    projects: Vec<Project>,
    edges: Vec<RelationEdge>,
    cloud: Vec<CloudVar>,
}

/// In-memory community database: users, projects, relation edges and cloud variables.
#[derive(Clone, Debug, Default)]
pub struct CommunityStore {
    users: Vec<User>,
    user_index: HashMap<String, usize>,
    projects: Vec<Project>,
    project_index: HashMap<ProjectId, usize>,
    edges: Vec<RelationEdge>,
    edge_keys: HashSet<(bool, String, String)>,
    cloud: BTreeMap<(ProjectId, String), f64>,
    next_seq: u64,
    next_project_id: ProjectId,
    revision: u64,
}

impl CommunityStore {
    pub fn new() -> Self {
        CommunityStore { next_seq: 1, next_project_id: 1, ..Default::default() }
    }

    /// Incremented by every write.
    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn users(&self) -> &[User] {
        &self.users
    }

    pub fn projects(&self) -> &[Project] {
        &self.projects
    }

    pub fn edges(&self) -> &[RelationEdge] {
        &self.edges
    }

    pub fn cloud_vars(&self) -> impl Iterator<Item = CloudVar> + '_ {
        self.cloud.iter().map(|((pid, name), v)| CloudVar { project_id: *pid, name: name.clone(), value: *v })
    }

    pub fn user(&self, username: &str) -> Option<&User> {
        self.user_index.get(username).map(|&i| &self.users[i])
    }

    pub fn project(&self, id: ProjectId) -> Option<&Project> {
        self.project_index.get(&id).map(|&i| &self.projects[i])
    }

    fn take_seq(&mut self) -> u64 {
        let seq = self.next_seq;
        self.next_seq += 1;
        seq
    }

    pub fn add_user(&mut self, user: User) -> Result<(), StoreError> {
        if user.username.is_empty() {
            return Err(StoreError::EmptyUsername);
        }
        if self.user_index.contains_key(&user.username) {
            return Err(StoreError::DuplicateUser(user.username));
        }
        self.user_index.insert(user.username.clone(), self.users.len());
        self.users.push(user);
        self.revision += 1;
        Ok(())
    }

    pub fn add_project(&mut self, project: NewProject) -> Result<ProjectId, StoreError> {
        if self.user(&project.author).is_none() {
            return Err(StoreError::UnknownUser(project.author));
        }
        let id = self.next_project_id;
        self.next_project_id += 1;
        let created_seq = self.take_seq();
        self.project_index.insert(id, self.projects.len());
        self.projects.push(Project {
            id,
            author: project.author,
            title: project.title,
            description: project.description,
            loves: project.loves,
            favorites_count: project.favorites_count,
            comments_count: project.comments_count,
            code: project.code,
            created_seq,
        });
        self.revision += 1;
        Ok(id)
    }

    pub fn follow(&mut self, source: &str, target: &str) -> Result<(), StoreError> {
        let seq = self.next_seq;
        self.insert_edge(RelationEdge::Follow { source: source.to_owned(), target: target.to_owned(), seq })?;
        self.next_seq += 1;
        self.revision += 1;
        Ok(())
    }

    /// Records a favorite edge. The project's `favorites_count` is a stored
    /// counter and is not adjusted here.
    pub fn favorite(&mut self, source: &str, project: ProjectId) -> Result<(), StoreError> {
        let seq = self.next_seq;
        self.insert_edge(RelationEdge::Favorite { source: source.to_owned(), target: project, seq })?;
        self.next_seq += 1;
        self.revision += 1;
        Ok(())
    }

    pub(crate) fn set_favorites_count(&mut self, id: ProjectId, count: u64) {
        if let Some(&i) = self.project_index.get(&id) {
            self.projects[i].favorites_count = count;
            self.revision += 1;
        }
    }

    fn insert_edge(&mut self, edge: RelationEdge) -> Result<(), StoreError> {
        let key = match &edge {
            RelationEdge::Follow { source, target, .. } => {
                if self.user(target).is_none() {
                    return Err(StoreError::UnknownUser(target.clone()));
                }
                if source == target {
                    return Err(StoreError::SelfFollow(source.clone()));
                }
                (true, source.clone(), target.clone())
            }
            RelationEdge::Favorite { source, target, .. } => {
                if self.project(*target).is_none() {
                    return Err(StoreError::UnknownProject(*target));
                }
                (false, source.clone(), target.to_string())
            }
        };
        if self.user(edge.source()).is_none() {
            return Err(StoreError::UnknownUser(edge.source().to_owned()));
        }
        if !self.edge_keys.insert(key.clone()) {
            let kind = if key.0 { "follow" } else { "favorite" };
            return Err(StoreError::DuplicateEdge(format!("{kind} {} -> {}", key.1, key.2)));
        }
        self.edges.push(edge);
        Ok(())
    }

    /// The ordered list behind a community loop.
    ///
    /// Shared projects come in creation order; favorites, followers and
    /// followees in edge order.
    pub fn relation_list(&self, username: &str, relation: Relation) -> Result<RelationList<'_>, StoreError> {
        if self.user(username).is_none() {
            return Err(StoreError::UnknownUser(username.to_owned()));
        }
        // Vectors are kept in id / seq order by construction and by `from_file`.
        Ok(match relation {
            Relation::Shared => RelationList::Projects(self.projects.iter().filter(|p| p.author == username).collect()),
            Relation::Favorited => RelationList::Projects(
                self.edges
                    .iter()
                    .filter_map(|e| match e {
                        RelationEdge::Favorite { source, target, .. } if source == username => self.project(*target),
                        _ => None,
                    })
                    .collect(),
            ),
            Relation::Followers => RelationList::Users(
                self.edges
                    .iter()
                    .filter_map(|e| match e {
                        RelationEdge::Follow { source, target, .. } if target == username => self.user(source),
                        _ => None,
                    })
                    .collect(),
            ),
            Relation::Following => RelationList::Users(
                self.edges
                    .iter()
                    .filter_map(|e| match e {
                        RelationEdge::Follow { source, target, .. } if source == username => self.user(target),
                        _ => None,
                    })
                    .collect(),
            ),
        })
    }

    pub fn project_meta(&self, id: ProjectId) -> Result<ProjectMeta, StoreError> {
        self.project(id).map(Project::meta).ok_or(StoreError::UnknownProject(id))
    }

    pub fn stats(&self) -> CommunityStats {
        CommunityStats {
            projects: self.projects.len() as u64,
            users: self.users.len() as u64,
            comments: self.projects.iter().map(|p| p.comments_count).sum(),
        }
    }

    /// Unknown variables read as 0 and are not created.
    pub fn cloud_read(&self, project: ProjectId, name: &str) -> Result<f64, StoreError> {
        if self.project(project).is_none() {
            return Err(StoreError::UnknownProject(project));
        }
        Ok(self.cloud.get(&(project, name.to_owned())).copied().unwrap_or(0.0))
    }

    /// Read-modify-write under `&mut self`; callers sharing a store serialize through one lock.
    pub fn cloud_write(&mut self, project: ProjectId, name: &str, write: CloudWrite) -> Result<f64, StoreError> {
        if self.project(project).is_none() {
            return Err(StoreError::UnknownProject(project));
        }
        let key = (project, name.to_owned());
        let current = self.cloud.get(&key).copied().unwrap_or(0.0);
        let next = match write {
            CloudWrite::Set(v) if v.is_finite() => v,
            CloudWrite::Change(d) if d.is_finite() => current + d,
            _ => return Err(StoreError::NonFinite),
        };
        if !next.is_finite() {
            return Err(StoreError::NonFinite);
        }
        self.cloud.insert(key, next);
        self.revision += 1;
        Ok(next)
    }

    /// Projects whose stored `favorites_count` differs from the number of favorite edges.
    pub fn favorite_count_mismatches(&self) -> Vec<ProjectId> {
        let mut edges: HashMap<ProjectId, u64> = HashMap::new();
        for e in &self.edges {
            if let RelationEdge::Favorite { target, .. } = e {
                *edges.entry(*target).or_default() += 1;
            }
        }
        self.projects
            .iter()
            .filter(|p| edges.get(&p.id).copied().unwrap_or(0) != p.favorites_count)
            .map(|p| p.id)
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        canon::to_value(&StoreFile {
            version: STORE_FORMAT_VERSION,
            users: self.users.clone(),
            projects: self.projects.clone(),
            edges: self.edges.clone(),
            cloud: self.cloud_vars().collect(),
        })
    }

    /// Canonical store file text.
    pub fn to_file_string(&self) -> String {
        canon::render_pretty(&self.to_json())
    }

    /// SHA-256 of the canonical store file, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_file_string().as_bytes()))
    }

    pub fn from_file_str(text: &str) -> Result<Self, StoreError> {
        let file: StoreFile = serde_json::from_str(text)?;
        if file.version != STORE_FORMAT_VERSION {
            return Err(StoreError::Version(file.version));
        }
        let mut store = CommunityStore::new();
        for user in file.users {
            store.add_user(user)?;
        }
        let mut last_seq = 0;
        let mut projects = file.projects;
        projects.sort_by_key(|p| p.id);
        for p in projects {
            if store.project_index.contains_key(&p.id) {
                return Err(StoreError::DuplicateProject(p.id));
            }
            if p.id == 0 {
                return Err(StoreError::Invalid("project ids must be positive".into()));
            }
            if store.user(&p.author).is_none() {
                return Err(StoreError::UnknownUser(p.author));
            }
            if p.created_seq <= last_seq {
                return Err(StoreError::Invalid(format!("project {}: created_seq must increase with id", p.id)));
            }
            last_seq = p.created_seq;
            store.next_project_id = store.next_project_id.max(p.id + 1);
            store.next_seq = store.next_seq.max(p.created_seq + 1);
            store.project_index.insert(p.id, store.projects.len());
            store.projects.push(p);
        }
        let mut edges = file.edges;
        edges.sort_by_key(RelationEdge::seq);
        for pair in edges.windows(2) {
            if pair[0].seq() == pair[1].seq() {
                return Err(StoreError::Invalid(format!("duplicate edge seq {}", pair[0].seq())));
            }
        }
        for e in edges {
            store.next_seq = store.next_seq.max(e.seq() + 1);
            store.insert_edge(e)?;
        }
        for var in file.cloud {
            if !var.value.is_finite() {
                return Err(StoreError::NonFinite);
            }
            if store.project(var.project_id).is_none() {
                return Err(StoreError::UnknownProject(var.project_id));
            }
            store.cloud.insert((var.project_id, var.name), var.value);
        }
        store.revision = 0;
        Ok(store)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        Self::from_file_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), StoreError> {
        std::fs::write(path, self.to_file_string())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::fixture;

    fn names(list: RelationList<'_>) -> Vec<String> {
        match list {
            RelationList::Projects(p) => p.iter().map(|p| p.title.clone()).collect(),
            RelationList::Users(u) => u.iter().map(|u| u.username.clone()).collect(),
        }
    }

    #[test]
    fn relation_lists_on_s0() {
        let s = fixture::s0();
        assert_eq!(names(s.relation_list("alice", Relation::Shared).unwrap()), ["Cat Maze", "Pong"]);
        assert_eq!(names(s.relation_list("alice", Relation::Followers).unwrap()), ["bob", "carol"]);
        assert_eq!(names(s.relation_list("alice", Relation::Following).unwrap()), ["carol"]);
        assert!(s.relation_list("bob", Relation::Favorited).unwrap().is_empty());
        assert_eq!(names(s.relation_list("carol", Relation::Favorited).unwrap()), ["Cat Maze"]);
        assert!(matches!(s.relation_list("nobody", Relation::Shared), Err(StoreError::UnknownUser(_))));
    }

    #[test]
    fn project_meta_on_s0() {
        let s = fixture::s0();
        let p1 = s.project_meta(1).unwrap();
        assert_eq!((p1.title.as_str(), p1.loves, p1.favorites, p1.comments), ("Cat Maze", 3, 2, 1));
        assert_eq!(s.project_meta(2).unwrap().description, "");
        assert!(matches!(s.project_meta(999), Err(StoreError::UnknownProject(999))));
    }

    #[test]
    fn stats() {
        assert_eq!(fixture::s0().stats(), CommunityStats { projects: 3, users: 3, comments: 5 });
        assert_eq!(CommunityStore::new().stats(), CommunityStats::default());
    }

    #[test]
    fn cloud_semantics() {
        let mut s = fixture::s0();
        assert_eq!(s.cloud_read(1, "total loves").unwrap(), 0.0);
        assert_eq!(s.cloud_vars().count(), 0);
        assert_eq!(s.cloud_write(1, "v", CloudWrite::Set(7.0)).unwrap(), 7.0);
        assert_eq!(s.cloud_read(1, "v").unwrap(), 7.0);
        s.cloud_write(1, "v", CloudWrite::Set(5.0)).unwrap();
        assert_eq!(s.cloud_write(1, "v", CloudWrite::Change(-2.0)).unwrap(), 3.0);
        assert_eq!(s.cloud_write(1, "new", CloudWrite::Change(1.0)).unwrap(), 1.0);
        assert!(matches!(s.cloud_write(1, "v", CloudWrite::Set(f64::NAN)), Err(StoreError::NonFinite)));
        assert!(matches!(s.cloud_read(999, "v"), Err(StoreError::UnknownProject(999))));
    }

    #[test]
    fn edge_invariants() {
        let mut s = fixture::s0();
        assert!(matches!(s.follow("bob", "alice"), Err(StoreError::DuplicateEdge(_))));
        assert!(matches!(s.follow("bob", "bob"), Err(StoreError::SelfFollow(_))));
        assert!(matches!(s.favorite("bob", 42), Err(StoreError::UnknownProject(42))));
        assert!(matches!(s.add_user(User::new("bob", "", "")), Err(StoreError::DuplicateUser(_))));
    }

    #[test]
    fn file_round_trip_preserves_digest() {
        let mut s = fixture::s0();
        s.cloud_write(1, "score", CloudWrite::Set(2.5)).unwrap();
        let back = CommunityStore::from_file_str(&s.to_file_string()).unwrap();
        assert_eq!(back.digest(), s.digest());
        assert_eq!(back.cloud_read(1, "score").unwrap(), 2.5);
        let mut back = back;
        back.follow("bob", "carol").unwrap();
        assert!(back.edges().last().unwrap().seq() > s.edges().last().unwrap().seq());
    }

    #[test]
    fn bad_files_are_rejected() {
        let s = fixture::s0();
        let mut v = s.to_json();
        v["version"] = 9.into();
        assert!(matches!(CommunityStore::from_file_str(&v.to_string()), Err(StoreError::Version(9))));
        let mut v = s.to_json();
        v["projects"][0]["author"] = "ghost".into();
        assert!(CommunityStore::from_file_str(&v.to_string()).is_err());
    }
}
