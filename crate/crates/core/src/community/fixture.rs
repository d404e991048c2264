//! Fixture S0: a three-user store small enough to audit by hand.
//!
//! | project | author | title    | loves | favorites | comments | code                 |
//! |---------|--------|----------|-------|-----------|----------|----------------------|
//! | 1       | alice  | Cat Maze | 3     | 2         | 1        | say ×2, play_sound ×1 |
//! | 2       | alice  | Pong     | 1     | 5         | 0        | say ×1               |
//! | 3       | bob    | Quiz     | 0     | 0         | 4        | ask ×1, answer ×1    |
//!
//! Follows in order: bob→alice, carol→alice, alice→carol.
//! Favorites in order: alice→3, carol→1.
//!
//! `favorites_count` values are stored counters and intentionally do not
//! match the two favorite edges.

use super::model::{NewProject, User};
use super::store::CommunityStore;
use crate::program::{Block, Opcode, Program};

pub fn s0() -> CommunityStore {
    let mut s = CommunityStore::new();
    for u in [User::new("alice", "hi", "Spain"), User::new("bob", "", "USA"), User::new("carol", "artist", "Spain")] {
        s.add_user(u).expect("fixture users are distinct");
    }

    let cat_maze = Program::single(
        "Cat",
        vec![],
        vec![
            Block::new(Opcode::Say).arg("Find the cheese!"),
            Block::new(Opcode::PlaySound).field("sound", "meow"),
            Block::new(Opcode::Say).arg("Yum"),
        ],
    );
    let pong = Program::single("Paddle", vec![], vec![Block::new(Opcode::Say).arg("Pong!")]);
    let quiz = Program::single("Host", vec![], vec![Block::new(Opcode::Ask).arg(Block::new(Opcode::Answer))]);

    let projects = [
        ("alice", "Cat Maze", "fun maze", 3, 2, 1, cat_maze),
        ("alice", "Pong", "", 1, 5, 0, pong),
        ("bob", "Quiz", "abc", 0, 0, 4, quiz),
    ];
    for (author, title, description, loves, favorites_count, comments_count, code) in projects {
        s.add_project(NewProject {
            author: author.into(),
            title: title.into(),
            description: description.into(),
            loves,
            favorites_count,
            comments_count,
            code,
        })
        .expect("fixture authors exist");
    }

    for (src, dst) in [("bob", "alice"), ("carol", "alice"), ("alice", "carol")] {
        s.follow(src, dst).expect("fixture follows are valid");
    }
    s.favorite("alice", 3).expect("fixture favorite is valid");
    s.favorite("carol", 1).expect("fixture favorite is valid");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{code_metadata, validate};

    #[test]
    fn fixture_code_metadata() {
        let s = s0();
        for p in s.projects() {
            validate(&p.code).unwrap();
        }
        let m1 = code_metadata(&s.project(1).unwrap().code);
        assert_eq!(m1.count(Opcode::Say), 2);
        assert_eq!(m1.count(Opcode::PlaySound), 1);
        assert_eq!(m1.total_blocks(), 3);
        let m3 = code_metadata(&s.project(3).unwrap().code);
        assert_eq!(m3.count(Opcode::Ask), 1);
        assert_eq!(m3.count(Opcode::Answer), 1);
        assert_eq!(m3.count(Opcode::Say), 0);
    }

    #[test]
    fn shipped_fixture_file_matches() {
        let shipped = include_str!("../../../../fixtures/s0.json");
        assert_eq!(shipped, s0().to_file_string());
    }
}
