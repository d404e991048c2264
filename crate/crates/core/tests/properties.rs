//! Property tests for store, program, interpreter, service and cache invariants.

use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use scb_core::api::{ApiService, Resource};
use scb_core::canon;
use scb_core::client::{CachedValue, InProcess, Session};
use scb_core::community::{fixture, load_seed, CloudWrite, CommunityStore, Relation, RelationList, SeedConfig};
use scb_core::interp::{run, RunOptions, Transcript};
use scb_core::program::random::{random_program, GenOptions};
use scb_core::program::{
    code_metadata, lint, program_to_json, Block, Category, Opcode, Program, Script, Step, RELATIONS,
};

fn small_seed(seed: u64, users: u64) -> SeedConfig {
    SeedConfig { seed, users, ..SeedConfig::default() }
}

fn random(seed: u64, opts: &GenOptions) -> Program {
    random_program(&mut ChaCha8Rng::seed_from_u64(seed), opts)
}

fn run_fresh(store: &CommunityStore, program: &Program, opts: &RunOptions) -> Transcript {
    let service = Arc::new(ApiService::new(store.clone()));
    let mut session = Session::new(Arc::new(InProcess::new(service)));
    run(program, opts, &mut session).unwrap()
}

/// Counts `op` keys in the serialized tree, hats excluded.
fn serialized_nodes(program: &Program) -> u64 {
    fn walk(v: &Value) -> u64 {
        match v {
            Value::Object(m) => {
                let own = u64::from(m.contains_key("op"));
                own + m.iter().filter(|(k, _)| *k != "hat").map(|(_, v)| walk(v)).sum::<u64>()
            }
            Value::Array(items) => items.iter().map(walk).sum(),
            _ => 0,
        }
    }
    walk(&program_to_json(program))
}

fn relation(i: usize) -> Relation {
    RELATIONS[i % RELATIONS.len()].parse().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn seeded_stores_keep_favorite_counts_consistent(seed in any::<u64>(), users in 1u64..40) {
        let store = load_seed(&small_seed(seed, users)).unwrap();
        prop_assert!(store.favorite_count_mismatches().is_empty());
        for p in store.projects() {
            let edges = store
                .edges()
                .iter()
                .filter(|e| matches!(e, scb_core::community::RelationEdge::Favorite { target, .. } if *target == p.id))
                .count() as u64;
            prop_assert_eq!(p.favorites_count, edges);
        }
    }

    #[test]
    fn equal_configs_give_equal_digests(seed in any::<u64>(), users in 1u64..30) {
        let a = load_seed(&small_seed(seed, users)).unwrap();
        let b = load_seed(&small_seed(seed, users)).unwrap();
        prop_assert_eq!(a.digest(), b.digest());
        let reloaded = CommunityStore::from_file_str(&a.to_file_string()).unwrap();
        prop_assert_eq!(reloaded.digest(), a.digest());
    }

    #[test]
    fn relation_lists_are_pure(seed in any::<u64>(), pick in any::<prop::sample::Index>(), r in 0usize..4) {
        let store = load_seed(&small_seed(seed, 20)).unwrap();
        let user = pick.get(store.users()).username.clone();
        let ids = |l: RelationList<'_>| match l {
            RelationList::Projects(ps) => ps.iter().map(|p| p.id.to_string()).collect::<Vec<_>>(),
            RelationList::Users(us) => us.iter().map(|u| u.username.clone()).collect(),
        };
        let first = ids(store.relation_list(&user, relation(r)).unwrap());
        let second = ids(store.relation_list(&user, relation(r)).unwrap());
        prop_assert_eq!(first, second);
    }

    #[test]
    fn cloud_changes_commute(changes in prop::collection::vec(-50i32..50, 0..40), shuffle_seed in any::<u64>()) {
        let mut forward = fixture::s0();
        for d in &changes {
            forward.cloud_write(1, "v", CloudWrite::Change(f64::from(*d))).unwrap();
        }
        let mut shuffled = changes.clone();
        rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut ChaCha8Rng::seed_from_u64(shuffle_seed));
        let mut other = fixture::s0();
        for d in &shuffled {
            other.cloud_write(1, "v", CloudWrite::Change(f64::from(*d))).unwrap();
        }
        let sum: i32 = changes.iter().sum();
        prop_assert_eq!(forward.cloud_read(1, "v").unwrap(), f64::from(sum));
        prop_assert_eq!(other.cloud_read(1, "v").unwrap(), f64::from(sum));
    }

    #[test]
    fn block_total_equals_serialized_node_count(seed in any::<u64>()) {
        let p = random(seed, &GenOptions::community(&["alice"]));
        prop_assert_eq!(code_metadata(&p).total_blocks(), serialized_nodes(&p));
    }

    #[test]
    fn lint_follows_sprite_permutation(seed in any::<u64>()) {
        let p = random(seed, &GenOptions::community(&["alice", "bob"]));
        let n = p.sprites.len();
        let mut reversed = p.clone();
        reversed.sprites.reverse();
        let mut expected: Vec<_> = lint(&p)
            .into_iter()
            .map(|mut d| {
                d.path.sprite = n - 1 - d.path.sprite;
                d
            })
            .collect();
        expected.sort_by(|a, b| a.path.cmp(&b.path).then(a.rule.cmp(&b.rule)));
        prop_assert_eq!(lint(&reversed), expected);
    }

    #[test]
    fn runs_are_deterministic(seed in any::<u64>(), latency in 1u64..6) {
        let p = random(seed, &GenOptions::community(&["alice", "bob", "carol"]));
        let opts = RunOptions::default()
            .viewer("bob")
            .answers(["alice", "carol"])
            .latency_ticks(latency)
            .max_ticks(400)
            .event("key:space@3".parse().unwrap());
        let s0 = fixture::s0();
        prop_assert_eq!(run_fresh(&s0, &p, &opts).render(), run_fresh(&s0, &p, &opts).render());
    }

    #[test]
    fn wait_resumes_after_ceil_of_thirty_ticks_per_second(tenths in 1u32..100) {
        let secs = f64::from(tenths) / 10.0;
        let p = Program::single("S", vec![], vec![Block::new(Opcode::Wait).arg(secs), Block::new(Opcode::Say).arg("x")]);
        let t = run_fresh(&fixture::s0(), &p, &RunOptions::default());
        // Integer form of ⌈secs × 30⌉ for secs = tenths / 10.
        let expected = u64::from(tenths * 3);
        prop_assert_eq!(t.render(), format!("T{expected} S SAY \"x\"\nEND tick={expected} reason=done\n"));
    }

    #[test]
    fn list_route_is_a_slice_of_the_relation_list(
        seed in any::<u64>(),
        pick in any::<prop::sample::Index>(),
        r in 0usize..4,
        offset in 0u64..30,
        limit in 1u64..=100,
    ) {
        let store = load_seed(&small_seed(seed, 25)).unwrap();
        let user = pick.get(store.users()).username.clone();
        let rel = relation(r);
        let all: Vec<Value> = match store.relation_list(&user, rel).unwrap() {
            RelationList::Projects(ps) => ps.iter().map(|p| canon::to_value(&p.meta())).collect(),
            RelationList::Users(us) => us.iter().map(|u| canon::to_value(*u)).collect(),
        };
        let service = ApiService::new(store);
        let target = format!("{}?offset={offset}&limit={limit}", Resource::UserList { username: user, relation: rel }.path());
        let reply = service.handle("GET", &target, "");
        prop_assert_eq!(reply.status, 200);
        let start = (offset as usize).min(all.len());
        let end = (offset.saturating_add(limit) as usize).min(all.len());
        prop_assert_eq!(&reply.body["items"], &Value::Array(all[start..end].to_vec()));
        prop_assert_eq!(reply.body["total"].as_u64(), Some(all.len() as u64));
    }

    #[test]
    fn cold_run_requests_match_list_totals(
        seed in any::<u64>(),
        loops in prop::collection::vec((any::<prop::sample::Index>(), 0usize..4), 1..6),
        limit in 1u64..=30,
    ) {
        let store = load_seed(&small_seed(seed, 15)).unwrap();
        let mut keys = BTreeSet::new();
        let body: Vec<Block> = loops
            .iter()
            .map(|(pick, r)| {
                let user = pick.get(store.users()).username.clone();
                keys.insert((user.clone(), relation(*r).name()));
                Block::new(Opcode::CommForeach).field("relation", relation(*r).name()).arg(user.as_str())
            })
            .collect();
        let p = Program::single("S", vec![], body);
        let service = Arc::new(ApiService::new(store.clone()));
        let mut session = Session::new(Arc::new(InProcess::new(service.clone()))).with_page_limit(limit);
        run(&p, &RunOptions::default(), &mut session).unwrap();

        let mut expected = 0;
        for (user, rel) in &keys {
            let rel: Relation = rel.parse().unwrap();
            let n = store.relation_list(user, rel).unwrap().len() as u64;
            expected += n.div_ceil(limit).max(1);
            let cached = session.cached(&Resource::UserList { username: user.clone(), relation: rel }).unwrap();
            let CachedValue::List(items) = &cached.value else { panic!("list expected") };
            prop_assert_eq!(items.len() as u64, n);
        }
        prop_assert_eq!(service.request_counts().kind("list"), expected);
    }
}

#[test]
fn every_opcode_has_one_listed_category() {
    for op in Opcode::ALL {
        let owners = Category::ALL.iter().filter(|c| c.opcodes().any(|o| o == *op)).count();
        assert_eq!(owners, 1, "{op}");
    }
}

#[test]
fn scripts_run_in_document_order_within_a_tick() {
    let say = |s: &str| Block::new(Opcode::Say).arg(s);
    let mut p = Program::single("A", vec![], vec![say("a1"), Block::new(Opcode::Wait).arg(0.0), say("a2")]);
    p.sprites[0].scripts.push(Script { hat: Block::new(Opcode::WhenFlagClicked), body: vec![say("b1")] });
    let mut second = Program::single("B", vec![], vec![say("c1")]);
    p.sprites.push(second.sprites.remove(0));
    let t = run_fresh(&fixture::s0(), &p, &RunOptions::default());
    assert_eq!(
        t.render(),
        "T0 A SAY \"a1\"\nT0 A SAY \"b1\"\nT0 B SAY \"c1\"\nT1 A SAY \"a2\"\nEND tick=1 reason=done\n"
    );
}

#[test]
fn step_paths_address_nested_accessors() {
    let p = scb_core::samples::misconception1();
    let d = &lint(&p)[0];
    assert_eq!(d.path.steps, [Step::Body(0), Step::Arg(0), Step::Arg(1)]);
}
