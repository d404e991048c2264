//! Headless interpreter: cooperative scheduler over virtual ticks, producing a transcript.

mod machine;
mod transcript;
mod value;

pub use machine::{
    run, Injection, InjectionParseError, RunError, RunOptions, Trigger, DEFAULT_MAX_TICKS, TICKS_PER_SECOND,
};
pub use transcript::{quote, DiagCode, EndReason, Event, Transcript};
pub use value::{compare, equals, format_number, modulo, parse_number, round, Value};
