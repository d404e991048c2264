//! Code metadata: opcode counts and categories used by a program.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{Map, Value};

use super::ast::{Block, Program};
use super::opcode::{Category, Opcode};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CodeMeta {
    pub opcode_counts: BTreeMap<Opcode, u64>,
    pub categories: BTreeSet<Category>,
}

impl CodeMeta {
    pub fn count(&self, op: Opcode) -> u64 {
        self.opcode_counts.get(&op).copied().unwrap_or(0)
    }

    pub fn uses(&self, category: Category) -> bool {
        self.categories.contains(&category)
    }

    pub fn total_blocks(&self) -> u64 {
        self.opcode_counts.values().sum()
    }

    /// `{"categories": [...], "opcode_counts": {...}}` keyed by opcode name.
    pub fn to_json(&self) -> Value {
        let counts: Map<String, Value> =
            self.opcode_counts.iter().map(|(op, n)| (op.name().to_owned(), Value::from(*n))).collect();
        let mut cats: Vec<&str> = self.categories.iter().map(|c| c.name()).collect();
        cats.sort_unstable();
        let mut m = Map::new();
        m.insert("opcode_counts".into(), Value::Object(counts));
        m.insert("categories".into(), Value::from(cats));
        Value::Object(m)
    }

    /// Inverse of [`CodeMeta::to_json`]; unknown names are rejected.
    pub fn from_json(value: &Value) -> Option<CodeMeta> {
        let mut meta = CodeMeta::default();
        for (name, n) in value.get("opcode_counts")?.as_object()? {
            meta.opcode_counts.insert(name.parse().ok()?, n.as_u64()?);
        }
        for c in value.get("categories")?.as_array()? {
            meta.categories.insert(c.as_str()?.parse().ok()?);
        }
        Some(meta)
    }
}

/// Counts every non-hat block in every script, including nested bodies and
/// argument positions.
pub fn code_metadata(program: &Program) -> CodeMeta {
    let mut meta = CodeMeta::default();
    for script in program.sprites.iter().flat_map(|s| &s.scripts) {
        for block in &script.body {
            tally(block, &mut meta.opcode_counts);
        }
    }
    meta.categories = meta.opcode_counts.iter().filter(|(_, &n)| n > 0).map(|(op, _)| op.category()).collect();
    meta
}

fn tally(block: &Block, counts: &mut BTreeMap<Opcode, u64>) {
    *counts.entry(block.op).or_default() += 1;
    for (_, arg) in block.arg_blocks() {
        tally(arg, counts);
    }
    for child in block.body.iter().chain(&block.else_body) {
        tally(child, counts);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::ast::Variable;

    #[test]
    fn nested_and_argument_blocks_are_counted() {
        let p = Program::single(
            "Stage",
            vec![],
            vec![Block::new(Opcode::Say).arg(Block::new(Opcode::Join).arg("a").arg(Block::new(Opcode::Answer)))],
        );
        let meta = code_metadata(&p);
        assert_eq!(meta.count(Opcode::Say), 1);
        assert_eq!(meta.count(Opcode::Join), 1);
        assert_eq!(meta.count(Opcode::Answer), 1);
        assert_eq!(meta.total_blocks(), 3);
        let cats: Vec<_> = meta.categories.iter().map(|c| c.name()).collect();
        assert_eq!(cats, ["looks", "sensing", "operators"]);
    }

    #[test]
    fn empty_program_has_no_metadata() {
        let p = Program {
            sprites: vec![crate::program::Sprite {
                name: "Stage".into(),
                variables: vec![Variable::local("x", 0.0)],
                scripts: vec![],
            }],
            cloud_project_id: None,
        };
        assert_eq!(code_metadata(&p), CodeMeta::default());
    }

    #[test]
    fn json_round_trip() {
        let p = Program::single(
            "S",
            vec![],
            vec![Block::new(Opcode::Repeat).arg(2.0).body(vec![Block::new(Opcode::PlaySound).field("sound", "pop")])],
        );
        let meta = code_metadata(&p);
        assert_eq!(CodeMeta::from_json(&meta.to_json()), Some(meta));
    }
}
