use std::fmt;

/// Why a DIAG event was emitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DiagCode {
    /// Accessor evaluated with no matching loop item (same rule as the linter).
    L1,
    /// Community loop over a user the service does not know.
    UnknownUser,
    /// `ask` with nothing left in the answer queue.
    NoAnswer,
    /// Cloud write with a non-finite value.
    Cloud,
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagCode::L1 => "L1",
            DiagCode::UnknownUser => "USER",
            DiagCode::NoAnswer => "ANSWER",
            DiagCode::Cloud => "CLOUD",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndReason {
    Done,
    MaxTicks,
}

impl fmt::Display for EndReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EndReason::Done => "done",
            EndReason::MaxTicks => "max_ticks",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Event {
    Say { tick: u64, sprite: String, text: String },
    Think { tick: u64, sprite: String, text: String },
    Ask { tick: u64, sprite: String, text: String },
    Diag { tick: u64, sprite: String, code: DiagCode, path: String, message: String },
    Var { sprite: String, name: String, value: String },
    End { tick: u64, reason: EndReason },
}

/// Double-quoted with `"` and `\` escaped and control characters spelled out.
pub fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() => out.push_str(&format!("\\u{{{:x}}}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Say { tick, sprite, text } => write!(f, "T{tick} {sprite} SAY {}", quote(text)),
            Event::Think { tick, sprite, text } => write!(f, "T{tick} {sprite} THINK {}", quote(text)),
            Event::Ask { tick, sprite, text } => write!(f, "T{tick} {sprite} ASK {}", quote(text)),
            Event::Diag { tick, sprite, code, path, message } => {
                write!(f, "T{tick} {sprite} DIAG {code} {path} {}", quote(message))
            }
            Event::Var { sprite, name, value } => write!(f, "VAR {sprite}.{name}={value}"),
            Event::End { tick, reason } => write!(f, "END tick={tick} reason={reason}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Transcript {
    pub events: Vec<Event>,
}

impl Transcript {
    /// One line per event, each terminated by a newline.
    pub fn render(&self) -> String {
        self.events.iter().map(|e| format!("{e}\n")).collect()
    }

    /// Texts of SAY events in order.
    pub fn says(&self) -> Vec<&str> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::Say { text, .. } => Some(text.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Final value of a variable from the end-of-run dump.
    pub fn var(&self, sprite: &str, name: &str) -> Option<&str> {
        self.events.iter().find_map(|e| match e {
            Event::Var { sprite: s, name: n, value } if s == sprite && n == name => Some(value.as_str()),
            _ => None,
        })
    }

    /// `(code, path)` of every DIAG event.
    pub fn diags(&self) -> Vec<(DiagCode, &str)> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::Diag { code, path, .. } => Some((*code, path.as_str())),
                _ => None,
            })
            .collect()
    }

    pub fn end(&self) -> Option<(u64, EndReason)> {
        match self.events.last() {
            Some(Event::End { tick, reason }) => Some((*tick, *reason)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_grammar() {
        let say = Event::Say { tick: 3, sprite: "Cat".into(), text: "a \"b\"\\\n".into() };
        assert_eq!(say.to_string(), r#"T3 Cat SAY "a \"b\"\\\n""#);
        let diag = Event::Diag {
            tick: 0,
            sprite: "S".into(),
            code: DiagCode::L1,
            path: "0/0/b0/a0".into(),
            message: "m".into(),
        };
        assert_eq!(diag.to_string(), r#"T0 S DIAG L1 0/0/b0/a0 "m""#);
        assert_eq!(
            Event::Var { sprite: "S".into(), name: "total".into(), value: "27".into() }.to_string(),
            "VAR S.total=27"
        );
        assert_eq!(Event::End { tick: 4, reason: EndReason::MaxTicks }.to_string(), "END tick=4 reason=max_ticks");
    }
}
