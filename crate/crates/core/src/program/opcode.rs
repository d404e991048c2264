//! The fixed opcode table and category taxonomy.

use std::fmt;
use std::str::FromStr;

/// Block palette category.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Events,
    Looks,
    Control,
    Data,
    Sensing,
    Sound,
    Pen,
    Operators,
    Community,
}

impl Category {
    pub const ALL: [Category; 9] = [
        Category::Events,
        Category::Looks,
        Category::Control,
        Category::Data,
        Category::Sensing,
        Category::Sound,
        Category::Pen,
        Category::Operators,
        Category::Community,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Events => "events",
            Category::Looks => "looks",
            Category::Control => "control",
            Category::Data => "data",
            Category::Sensing => "sensing",
            Category::Sound => "sound",
            Category::Pen => "pen",
            Category::Operators => "operators",
            Category::Community => "community",
        }
    }

    /// Opcodes belonging to this category, in table order.
    pub fn opcodes(self) -> impl Iterator<Item = Opcode> {
        Opcode::ALL.iter().copied().filter(move |op| op.category() == self)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Category::ALL.into_iter().find(|c| c.name() == s).ok_or(())
    }
}

/// Where a block may appear.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Hat,
    Statement,
    Reporter,
}

/// Allowed values of a dropdown field.
#[derive(Clone, Copy, Debug)]
pub enum FieldKind {
    /// Any nonempty text.
    Text,
    /// One of a fixed set of choices.
    Choice(&'static [&'static str]),
    /// Name of a variable declared on the owning sprite.
    Variable,
    /// Name of an opcode from this table.
    Opcode,
    /// Name of a category.
    Category,
}

#[derive(Clone, Copy, Debug)]
pub struct FieldSpec {
    pub name: &'static str,
    pub kind: FieldKind,
}

/// Static description of one opcode.
#[derive(Clone, Copy, Debug)]
pub struct OpSpec {
    pub name: &'static str,
    pub shape: Shape,
    pub category: Category,
    pub arity: usize,
    pub fields: &'static [FieldSpec],
    pub body: bool,
    pub else_body: bool,
}

pub const RELATIONS: &[&str] = &["shared", "favorited", "followers", "following"];
pub const PROJECT_FIELDS: &[&str] = &["title", "description", "loves", "favorites", "comments"];
pub const USER_FIELDS: &[&str] = &["username", "about", "country"];
pub const TOTAL_KINDS: &[&str] = &["projects", "users", "comments"];
pub const STOP_OPTIONS: &[&str] = &["all", "this_script"];

const NO_FIELDS: &[FieldSpec] = &[];
const VAR_FIELD: &[FieldSpec] = &[FieldSpec { name: "var", kind: FieldKind::Variable }];

macro_rules! opcodes {
    ($( $variant:ident => $name:literal, $shape:ident, $cat:ident, $arity:literal, $fields:expr, $body:literal, $else:literal; )*) => {
        /// Every opcode the language knows.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Opcode { $($variant),* }

        impl Opcode {
            pub const ALL: &'static [Opcode] = &[$(Opcode::$variant),*];

            pub fn spec(self) -> &'static OpSpec {
                match self {
                    $(Opcode::$variant => &OpSpec {
                        name: $name,
                        shape: Shape::$shape,
                        category: Category::$cat,
                        arity: $arity,
                        fields: $fields,
                        body: $body,
                        else_body: $else,
                    },)*
                }
            }
        }
    };
}

opcodes! {
    WhenFlagClicked => "whenflagclicked", Hat, Events, 0, NO_FIELDS, false, false;
    WhenKeyPressed => "whenkeypressed", Hat, Events, 0,
        &[FieldSpec { name: "key", kind: FieldKind::Text }], false, false;
    Say => "say", Statement, Looks, 1, NO_FIELDS, false, false;
    Think => "think", Statement, Looks, 1, NO_FIELDS, false, false;
    Wait => "wait", Statement, Control, 1, NO_FIELDS, false, false;
    Repeat => "repeat", Statement, Control, 1, NO_FIELDS, true, false;
    Forever => "forever", Statement, Control, 0, NO_FIELDS, true, false;
    If => "if", Statement, Control, 1, NO_FIELDS, true, false;
    IfElse => "if_else", Statement, Control, 1, NO_FIELDS, true, true;
    Stop => "stop", Statement, Control, 0,
        &[FieldSpec { name: "option", kind: FieldKind::Choice(STOP_OPTIONS) }], false, false;
    SetVar => "set_var", Statement, Data, 1, VAR_FIELD, false, false;
    ChangeVar => "change_var", Statement, Data, 1, VAR_FIELD, false, false;
    Ask => "ask", Statement, Sensing, 1, NO_FIELDS, false, false;
    PlaySound => "play_sound", Statement, Sound, 0,
        &[FieldSpec { name: "sound", kind: FieldKind::Text }], false, false;
    PenDown => "pen_down", Statement, Pen, 0, NO_FIELDS, false, false;
    PenUp => "pen_up", Statement, Pen, 0, NO_FIELDS, false, false;
    PenMove => "pen_move", Statement, Pen, 1, NO_FIELDS, false, false;
    Answer => "answer", Reporter, Sensing, 0, NO_FIELDS, false, false;
    Var => "var", Reporter, Data, 0, VAR_FIELD, false, false;
    Add => "add", Reporter, Operators, 2, NO_FIELDS, false, false;
    Sub => "sub", Reporter, Operators, 2, NO_FIELDS, false, false;
    Mul => "mul", Reporter, Operators, 2, NO_FIELDS, false, false;
    Div => "div", Reporter, Operators, 2, NO_FIELDS, false, false;
    Mod => "mod", Reporter, Operators, 2, NO_FIELDS, false, false;
    Round => "round", Reporter, Operators, 1, NO_FIELDS, false, false;
    Gt => "gt", Reporter, Operators, 2, NO_FIELDS, false, false;
    Lt => "lt", Reporter, Operators, 2, NO_FIELDS, false, false;
    Eq => "eq", Reporter, Operators, 2, NO_FIELDS, false, false;
    And => "and", Reporter, Operators, 2, NO_FIELDS, false, false;
    Or => "or", Reporter, Operators, 2, NO_FIELDS, false, false;
    Not => "not", Reporter, Operators, 1, NO_FIELDS, false, false;
    Join => "join", Reporter, Operators, 2, NO_FIELDS, false, false;
    LengthOf => "length_of", Reporter, Operators, 1, NO_FIELDS, false, false;
    CommForeach => "comm_foreach", Statement, Community, 1,
        &[FieldSpec { name: "relation", kind: FieldKind::Choice(RELATIONS) }], true, false;
    CommProjectMeta => "comm_project_meta", Reporter, Community, 0,
        &[FieldSpec { name: "field", kind: FieldKind::Choice(PROJECT_FIELDS) }], false, false;
    CommProjectUsesCategory => "comm_project_uses_category", Reporter, Community, 0,
        &[FieldSpec { name: "category", kind: FieldKind::Category }], false, false;
    CommProjectBlockCount => "comm_project_block_count", Reporter, Community, 0,
        &[FieldSpec { name: "opcode", kind: FieldKind::Opcode }], false, false;
    CommUserMeta => "comm_user_meta", Reporter, Community, 0,
        &[FieldSpec { name: "field", kind: FieldKind::Choice(USER_FIELDS) }], false, false;
    CommViewerUsername => "comm_viewer_username", Reporter, Community, 0, NO_FIELDS, false, false;
    CommTotal => "comm_total", Reporter, Community, 0,
        &[FieldSpec { name: "kind", kind: FieldKind::Choice(TOTAL_KINDS) }], false, false;
}

impl Opcode {
    pub fn name(self) -> &'static str {
        self.spec().name
    }

    pub fn shape(self) -> Shape {
        self.spec().shape
    }

    pub fn category(self) -> Category {
        self.spec().category
    }

    pub fn is_hat(self) -> bool {
        self.shape() == Shape::Hat
    }

    /// Accessors that read the current project of an enclosing project loop.
    pub fn needs_project_frame(self) -> bool {
        matches!(self, Opcode::CommProjectMeta | Opcode::CommProjectUsesCategory | Opcode::CommProjectBlockCount)
    }

    pub fn needs_user_frame(self) -> bool {
        self == Opcode::CommUserMeta
    }

    pub fn is_loop(self) -> bool {
        matches!(self, Opcode::Repeat | Opcode::Forever | Opcode::CommForeach)
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Opcode {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Opcode::ALL.iter().copied().find(|op| op.name() == s).ok_or(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip_and_are_unique() {
        let mut seen = std::collections::HashSet::new();
        for &op in Opcode::ALL {
            assert!(seen.insert(op.name()));
            assert_eq!(op.name().parse::<Opcode>(), Ok(op));
        }
        assert_eq!(Opcode::ALL.len(), 40);
    }

    #[test]
    fn every_opcode_has_exactly_one_category() {
        let total: usize = Category::ALL.iter().map(|c| c.opcodes().count()).sum();
        assert_eq!(total, Opcode::ALL.len());
        assert_eq!(Opcode::PlaySound.category(), Category::Sound);
        assert_eq!(Opcode::CommForeach.category(), Category::Community);
    }

    #[test]
    fn containers_match_table() {
        assert!(Opcode::IfElse.spec().else_body);
        assert!(Opcode::CommForeach.spec().body);
        assert!(!Opcode::Say.spec().body);
    }
}
