//! Random, always-valid program generator.
//!
//! Used by the store seeder (so generated projects carry real code) and by
//! property tests.

use rand::seq::IndexedRandom;
use rand::Rng;

use super::ast::{Arg, Block, Literal, Program, Script, Sprite, Variable};
use super::opcode::{Category, Opcode, PROJECT_FIELDS, RELATIONS, TOTAL_KINDS, USER_FIELDS};

#[derive(Clone, Debug)]
pub struct GenOptions {
    /// Include community loops and accessors.
    pub community: bool,
    /// Include `stop` and `forever`.
    pub unbounded_control: bool,
    pub max_sprites: u32,
    pub max_scripts: u32,
    pub max_statements: u32,
    pub max_depth: u32,
    /// Usernames used as literal loop arguments.
    pub usernames: Vec<String>,
}

impl GenOptions {
    /// Small programs from the non-community part of the table.
    pub fn core() -> Self {
        GenOptions {
            community: false,
            unbounded_control: false,
            max_sprites: 1,
            max_scripts: 2,
            max_statements: 4,
            max_depth: 2,
            usernames: Vec::new(),
        }
    }

    pub fn community(usernames: &[&str]) -> Self {
        GenOptions {
            community: true,
            unbounded_control: true,
            max_sprites: 2,
            max_scripts: 2,
            max_statements: 5,
            max_depth: 3,
            usernames: usernames.iter().map(|s| s.to_string()).collect(),
        }
    }
}

const WORDS: &[&str] = &["hello", "Cat", "maze", "score", "", "42", "Spain", "music", "3.5"];
const SOUNDS: &[&str] = &["meow", "pop", "drum"];
const KEYS: &[&str] = &["space", "a", "up"];
const VARIABLES: &[&str] = &["score", "count"];

struct Gen<'a, R: Rng + ?Sized> {
    rng: &'a mut R,
    opts: &'a GenOptions,
}

pub fn random_program<R: Rng + ?Sized>(rng: &mut R, opts: &GenOptions) -> Program {
    let mut g = Gen { rng, opts };
    let sprite_count = g.rng.random_range(1..=opts.max_sprites.max(1));
    let sprites = (0..sprite_count)
        .map(|i| {
            let variables =
                VARIABLES.iter().map(|name| Variable::local(name, f64::from(g.rng.random_range(0u32..5)))).collect();
            let script_count = g.rng.random_range(1..=opts.max_scripts.max(1));
            let scripts = (0..script_count).map(|_| g.script()).collect();
            Sprite { name: format!("Sprite{}", i + 1), variables, scripts }
        })
        .collect();
    Program { sprites, cloud_project_id: None }
}

impl<R: Rng + ?Sized> Gen<'_, R> {
    fn pick<'s>(&mut self, items: &'s [&'s str]) -> &'s str {
        items.choose(self.rng).copied().unwrap_or_default()
    }

    fn script(&mut self) -> Script {
        let hat = if self.rng.random_bool(0.8) {
            Block::new(Opcode::WhenFlagClicked)
        } else {
            let key = self.pick(KEYS);
            Block::new(Opcode::WhenKeyPressed).field("key", key)
        };
        let body = self.statements(0);
        Script { hat, body }
    }

    fn statements(&mut self, depth: u32) -> Vec<Block> {
        let n = self.rng.random_range(0..=self.opts.max_statements);
        (0..n).map(|_| self.statement(depth)).collect()
    }

    fn statement(&mut self, depth: u32) -> Block {
        let mut choices = vec![
            Opcode::Say,
            Opcode::Say,
            Opcode::Think,
            Opcode::Wait,
            Opcode::SetVar,
            Opcode::ChangeVar,
            Opcode::Ask,
            Opcode::PlaySound,
            Opcode::PenDown,
            Opcode::PenUp,
            Opcode::PenMove,
        ];
        if depth < self.opts.max_depth {
            choices.extend([Opcode::Repeat, Opcode::If, Opcode::IfElse]);
            if self.opts.community {
                choices.extend([Opcode::CommForeach, Opcode::CommForeach]);
            }
            if self.opts.unbounded_control && self.rng.random_bool(0.2) {
                choices.push(Opcode::Forever);
            }
        }
        if self.opts.unbounded_control && self.rng.random_bool(0.1) {
            choices.push(Opcode::Stop);
        }
        let op = *choices.choose(self.rng).expect("nonempty");
        let block = Block::new(op);
        match op {
            Opcode::Wait => block.arg(f64::from(self.rng.random_range(0u32..3)) / 10.0),
            Opcode::SetVar | Opcode::ChangeVar => {
                let var = self.pick(VARIABLES);
                let value = self.arg(depth);
                block.field("var", var).arg(value)
            }
            Opcode::PlaySound => {
                let sound = self.pick(SOUNDS);
                block.field("sound", sound)
            }
            Opcode::PenDown | Opcode::PenUp => block,
            Opcode::Repeat => {
                let times = f64::from(self.rng.random_range(0u32..4));
                block.arg(times).body(self.statements(depth + 1))
            }
            Opcode::Forever => block.body(self.statements(depth + 1)),
            Opcode::If => {
                let cond = self.arg(depth);
                block.arg(cond).body(self.statements(depth + 1))
            }
            Opcode::IfElse => {
                let cond = self.arg(depth);
                let body = self.statements(depth + 1);
                block.arg(cond).body(body).else_body(self.statements(depth + 1))
            }
            Opcode::Stop => {
                let option = self.pick(&["all", "this_script"]);
                block.field("option", option)
            }
            Opcode::CommForeach => {
                let relation = self.pick(RELATIONS);
                let who: Arg = match self.rng.random_range(0..3) {
                    0 => Block::new(Opcode::CommViewerUsername).into(),
                    1 => Block::new(Opcode::CommUserMeta).field("field", "username").into(),
                    _ => match self.opts.usernames.choose(self.rng) {
                        Some(u) => u.clone().into(),
                        None => Block::new(Opcode::CommViewerUsername).into(),
                    },
                };
                block.field("relation", relation).arg(who).body(self.statements(depth + 1))
            }
            // say, think, ask, pen_move
            _ => {
                let value = self.arg(depth);
                block.arg(value)
            }
        }
    }

    fn literal(&mut self) -> Arg {
        match self.rng.random_range(0..4) {
            0 => Arg::Literal(Literal::Number(f64::from(self.rng.random_range(0u32..20)))),
            1 => Arg::Literal(Literal::Number(f64::from(self.rng.random_range(0u32..20)) / 4.0)),
            2 => Arg::Literal(Literal::Bool(self.rng.random_bool(0.5))),
            _ => Arg::Literal(Literal::Text(self.pick(WORDS).to_owned())),
        }
    }

    fn arg(&mut self, depth: u32) -> Arg {
        if depth > self.opts.max_depth || self.rng.random_bool(0.4) {
            return self.literal();
        }
        self.reporter(depth + 1).into()
    }

    fn reporter(&mut self, depth: u32) -> Block {
        let mut choices = vec![
            Opcode::Answer,
            Opcode::Var,
            Opcode::Add,
            Opcode::Sub,
            Opcode::Mul,
            Opcode::Div,
            Opcode::Mod,
            Opcode::Round,
            Opcode::Gt,
            Opcode::Lt,
            Opcode::Eq,
            Opcode::And,
            Opcode::Or,
            Opcode::Not,
            Opcode::Join,
            Opcode::LengthOf,
        ];
        if self.opts.community {
            choices.extend([
                Opcode::CommProjectMeta,
                Opcode::CommProjectMeta,
                Opcode::CommProjectUsesCategory,
                Opcode::CommProjectBlockCount,
                Opcode::CommUserMeta,
                Opcode::CommUserMeta,
                Opcode::CommViewerUsername,
                Opcode::CommTotal,
            ]);
        }
        let op = *choices.choose(self.rng).expect("nonempty");
        let block = Block::new(op);
        match op {
            Opcode::Answer | Opcode::CommViewerUsername => block,
            Opcode::Var => {
                let var = self.pick(VARIABLES);
                block.field("var", var)
            }
            Opcode::CommProjectMeta => {
                let field = self.pick(PROJECT_FIELDS);
                block.field("field", field)
            }
            Opcode::CommUserMeta => {
                let field = self.pick(USER_FIELDS);
                block.field("field", field)
            }
            Opcode::CommTotal => {
                let kind = self.pick(TOTAL_KINDS);
                block.field("kind", kind)
            }
            Opcode::CommProjectUsesCategory => {
                let cat = *Category::ALL.choose(self.rng).expect("nonempty");
                block.field("category", cat.name())
            }
            Opcode::CommProjectBlockCount => {
                let op = *Opcode::ALL.choose(self.rng).expect("nonempty");
                block.field("opcode", op.name())
            }
            _ => {
                let arity = op.spec().arity;
                let mut block = block;
                for _ in 0..arity {
                    let a = self.arg(depth);
                    block = block.arg(a);
                }
                block
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{parse_program, serialize_program, validate};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_programs_are_valid_and_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for opts in [GenOptions::core(), GenOptions::community(&["alice", "bob"])] {
            for _ in 0..50 {
                let p = random_program(&mut rng, &opts);
                validate(&p).unwrap_or_else(|e| panic!("{e}\n{}", serialize_program(&p)));
                assert_eq!(parse_program(&serialize_program(&p)).unwrap(), p);
            }
        }
    }

    #[test]
    fn core_programs_have_no_community_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let p = random_program(&mut rng, &GenOptions::core());
            let meta = crate::program::code_metadata(&p);
            assert!(!meta.uses(Category::Community));
        }
    }
}
