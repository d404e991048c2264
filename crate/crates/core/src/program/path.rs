use std::fmt;

/// One step from a block to a child block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    Body(usize),
    Else(usize),
    Arg(usize),
}

/// Location of a block: sprite index, script index, then nesting steps.
///
/// Empty `steps` addresses the script's hat. Rendered as `0/1/b2/a0`
/// (sprite 0, script 1, third body statement, its first argument).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockPath {
    pub sprite: usize,
    pub script: usize,
    pub steps: Vec<Step>,
}

impl BlockPath {
    pub fn script_root(sprite: usize, script: usize) -> Self {
        BlockPath { sprite, script, steps: Vec::new() }
    }

    pub fn child(&self, step: Step) -> Self {
        let mut steps = Vec::with_capacity(self.steps.len() + 1);
        steps.extend_from_slice(&self.steps);
        steps.push(step);
        BlockPath { steps, ..*self }
    }
}

impl fmt::Display for BlockPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.sprite, self.script)?;
        for step in &self.steps {
            match step {
                Step::Body(i) => write!(f, "/b{i}")?,
                Step::Else(i) => write!(f, "/e{i}")?,
                Step::Arg(i) => write!(f, "/a{i}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_and_orders_parent_first() {
        let root = BlockPath::script_root(0, 1);
        let stmt = root.child(Step::Body(2));
        let arg = stmt.child(Step::Arg(0));
        assert_eq!(arg.to_string(), "0/1/b2/a0");
        assert!(root < stmt && stmt < arg);
        assert!(BlockPath::script_root(0, 0).child(Step::Body(9)) < BlockPath::script_root(1, 0));
    }
}
