//! Static checks for community-block misuse.
//!
//! * `L1` (error): a project accessor with no enclosing project loop, or a
//!   user accessor with no enclosing user loop. Such accessors have no item
//!   to read and report a neutral default at runtime.
//! * `L2` (warning): a community total inside a loop body. Totals are
//!   fetched once per run and never change between iterations.

use std::fmt;

use super::ast::{Block, Program};
use super::opcode::Opcode;
use super::path::{BlockPath, Step};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    L0,
    L1,
    L2,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::L0 => "L0",
            Rule::L1 => "L1",
            Rule::L2 => "L2",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub rule: Rule,
    pub path: BlockPath,
    pub message: String,
    pub severity: Severity,
}

impl fmt::Display for Diagnostic {
    /// `<severity> <rule> <path> <message>`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.severity, self.rule, self.path, self.message)
    }
}

/// Message for an accessor used where no matching loop item exists.
pub fn out_of_context_message(op: Opcode) -> String {
    if op.needs_user_frame() {
        format!("`{op}` used outside a followers/following loop")
    } else {
        format!("`{op}` used outside a shared/favorited loop")
    }
}

#[derive(Clone, Copy, Default)]
struct Scope {
    project_loop: bool,
    user_loop: bool,
    any_loop: bool,
}

pub fn lint(program: &Program) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (si, sprite) in program.sprites.iter().enumerate() {
        for (ki, script) in sprite.scripts.iter().enumerate() {
            let root = BlockPath::script_root(si, ki);
            for (i, block) in script.body.iter().enumerate() {
                visit(block, &root.child(Step::Body(i)), Scope::default(), &mut out);
            }
        }
    }
    out.sort_by(|a, b| a.path.cmp(&b.path).then(a.rule.cmp(&b.rule)));
    out
}

fn visit(block: &Block, path: &BlockPath, scope: Scope, out: &mut Vec<Diagnostic>) {
    let op = block.op;
    if (op.needs_project_frame() && !scope.project_loop) || (op.needs_user_frame() && !scope.user_loop) {
        out.push(Diagnostic {
            rule: Rule::L1,
            path: path.clone(),
            message: out_of_context_message(op),
            severity: Severity::Error,
        });
    }
    if op == Opcode::CommTotal && scope.any_loop {
        out.push(Diagnostic {
            rule: Rule::L2,
            path: path.clone(),
            message: "community total does not change between loop iterations".into(),
            severity: Severity::Warning,
        });
    }

    // Arguments are evaluated before the block's own loop item exists.
    for (i, arg) in block.arg_blocks() {
        visit(arg, &path.child(Step::Arg(i)), scope, out);
    }

    let mut inner = scope;
    if op.is_loop() {
        inner.any_loop = true;
    }
    if op == Opcode::CommForeach {
        match block.field_value("relation") {
            "shared" | "favorited" => inner.project_loop = true,
            _ => inner.user_loop = true,
        }
    }
    for (i, child) in block.body.iter().enumerate() {
        visit(child, &path.child(Step::Body(i)), inner, out);
    }
    for (i, child) in block.else_body.iter().enumerate() {
        visit(child, &path.child(Step::Else(i)), inner, out);
    }
}
