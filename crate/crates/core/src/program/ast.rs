use std::collections::BTreeMap;

use super::opcode::Opcode;
use crate::community::ProjectId;

/// A literal argument value.
#[derive(Clone, Debug, PartialEq)]
pub enum Literal {
    Text(String),
    Number(f64),
    Bool(bool),
}

/// One argument slot: either a literal or a nested reporter block.
#[derive(Clone, Debug, PartialEq)]
pub enum Arg {
    Literal(Literal),
    Block(Block),
}

impl From<Block> for Arg {
    fn from(block: Block) -> Self {
        Arg::Block(block)
    }
}

impl From<&str> for Arg {
    fn from(text: &str) -> Self {
        Arg::Literal(Literal::Text(text.to_owned()))
    }
}

impl From<String> for Arg {
    fn from(text: String) -> Self {
        Arg::Literal(Literal::Text(text))
    }
}

impl From<f64> for Arg {
    fn from(n: f64) -> Self {
        Arg::Literal(Literal::Number(n))
    }
}

impl From<bool> for Arg {
    fn from(b: bool) -> Self {
        Arg::Literal(Literal::Bool(b))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub op: Opcode,
    pub fields: BTreeMap<String, String>,
    pub args: Vec<Arg>,
    pub body: Vec<Block>,
    pub else_body: Vec<Block>,
}

impl Block {
    pub fn new(op: Opcode) -> Self {
        Block { op, fields: BTreeMap::new(), args: Vec::new(), body: Vec::new(), else_body: Vec::new() }
    }

    pub fn field(mut self, name: &str, value: &str) -> Self {
        self.fields.insert(name.to_owned(), value.to_owned());
        self
    }

    pub fn arg(mut self, arg: impl Into<Arg>) -> Self {
        self.args.push(arg.into());
        self
    }

    pub fn body(mut self, body: Vec<Block>) -> Self {
        self.body = body;
        self
    }

    pub fn else_body(mut self, body: Vec<Block>) -> Self {
        self.else_body = body;
        self
    }

    pub fn field_value(&self, name: &str) -> &str {
        self.fields.get(name).map(String::as_str).unwrap_or("")
    }

    /// Reporter blocks nested in argument position.
    pub fn arg_blocks(&self) -> impl Iterator<Item = (usize, &Block)> {
        self.args.iter().enumerate().filter_map(|(i, a)| match a {
            Arg::Block(b) => Some((i, b)),
            Arg::Literal(_) => None,
        })
    }

    /// Number of blocks in this subtree, counting itself.
    pub fn node_count(&self) -> usize {
        1 + self.arg_blocks().map(|(_, b)| b.node_count()).sum::<usize>()
            + self.body.iter().map(Block::node_count).sum::<usize>()
            + self.else_body.iter().map(Block::node_count).sum::<usize>()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Script {
    pub hat: Block,
    pub body: Vec<Block>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub cloud: bool,
    pub init: f64,
}

impl Variable {
    pub fn local(name: &str, init: f64) -> Self {
        Variable { name: name.to_owned(), cloud: false, init }
    }

    pub fn cloud(name: &str) -> Self {
        Variable { name: name.to_owned(), cloud: true, init: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sprite {
    pub name: String,
    pub variables: Vec<Variable>,
    pub scripts: Vec<Script>,
}

impl Sprite {
    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub sprites: Vec<Sprite>,
    pub cloud_project_id: Option<ProjectId>,
}

impl Program {
    /// A one-sprite, one-script program run on the green flag.
    pub fn single(sprite: &str, variables: Vec<Variable>, body: Vec<Block>) -> Self {
        Program {
            sprites: vec![Sprite {
                name: sprite.to_owned(),
                variables,
                scripts: vec![Script { hat: Block::new(Opcode::WhenFlagClicked), body }],
            }],
            cloud_project_id: None,
        }
    }
}
