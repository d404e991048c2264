//! Block programs: AST, file format, opcode table, code metadata and lint.

mod ast;
mod codec;
mod lint;
mod meta;
mod opcode;
mod path;
pub mod random;

pub use ast::{Arg, Block, Literal, Program, Script, Sprite, Variable};
pub use codec::{parse_program, program_from_json, program_to_json, serialize_program, validate, ParseError};
pub use lint::{lint, out_of_context_message, Diagnostic, Rule, Severity};
pub use meta::{code_metadata, CodeMeta};
pub use opcode::{
    Category, FieldKind, FieldSpec, OpSpec, Opcode, Shape, PROJECT_FIELDS, RELATIONS, STOP_OPTIONS, TOTAL_KINDS,
    USER_FIELDS,
};
pub use path::{BlockPath, Step};
