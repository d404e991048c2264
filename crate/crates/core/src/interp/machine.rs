//! Tick-driven cooperative scheduler and block semantics.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use serde_json::Value as Json;

use super::transcript::{DiagCode, EndReason, Event, Transcript};
use super::value::{self, Value};
use crate::api::Resource;
use crate::client::{CachedValue, FetchError, Session};
use crate::community::{CloudWrite, Relation};
use crate::program::{
    out_of_context_message, validate, Arg, Block, BlockPath, Category, CodeMeta, Opcode, ParseError, Program, Step,
};

/// Scheduler ticks per second of `wait` time.
pub const TICKS_PER_SECOND: f64 = 30.0;
pub const DEFAULT_MAX_TICKS: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Trigger {
    Flag,
    Key(String),
}

/// An event delivered to hat blocks at a given tick.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Injection {
    pub trigger: Trigger,
    pub tick: u64,
}

#[derive(Debug, thiserror::Error)]
#[error("bad event `{0}`: expected `flag@T` or `key:K@T`")]
pub struct InjectionParseError(pub String);

impl FromStr for Injection {
    type Err = InjectionParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || InjectionParseError(s.to_owned());
        let (what, tick) = s.rsplit_once('@').ok_or_else(bad)?;
        let tick = tick.parse().map_err(|_| bad())?;
        let trigger = match what.split_once(':') {
            None if what == "flag" => Trigger::Flag,
            Some(("key", key)) if !key.is_empty() => Trigger::Key(key.to_owned()),
            _ => return Err(bad()),
        };
        Ok(Injection { trigger, tick })
    }
}

impl fmt::Display for Injection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.trigger {
            Trigger::Flag => write!(f, "flag@{}", self.tick),
            Trigger::Key(k) => write!(f, "key:{k}@{}", self.tick),
        }
    }
}

/// Everything about a run except the program and the data source.
#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Username reported by the viewer block. `None` runs anonymously.
    pub viewer: Option<String>,
    /// A flag event at tick 0 is added unless a flag event is listed.
    pub events: Vec<Injection>,
    pub answers: Vec<String>,
    pub max_ticks: u64,
    /// Ticks between issuing a network fetch and its result being usable (min 1).
    pub latency_ticks: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            viewer: None,
            events: Vec::new(),
            answers: Vec::new(),
            max_ticks: DEFAULT_MAX_TICKS,
            latency_ticks: 1,
        }
    }
}

impl RunOptions {
    pub fn viewer(mut self, username: &str) -> Self {
        self.viewer = Some(username.to_owned());
        self
    }

    pub fn event(mut self, injection: Injection) -> Self {
        self.events.push(injection);
        self
    }

    pub fn answers<S: Into<String>>(mut self, answers: impl IntoIterator<Item = S>) -> Self {
        self.answers = answers.into_iter().map(Into::into).collect();
        self
    }

    pub fn max_ticks(mut self, n: u64) -> Self {
        self.max_ticks = n;
        self
    }

    pub fn latency_ticks(mut self, n: u64) -> Self {
        self.latency_ticks = n;
        self
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("unknown viewer `{0}`")]
    UnknownViewer(String),
    #[error("max_ticks must be ≥ 1")]
    ZeroMaxTicks,
    #[error("invalid program: {0}")]
    InvalidProgram(#[from] ParseError),
    #[error(transparent)]
    Fetch(#[from] FetchError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Idle,
    Runnable,
    BlockedOnFetch(u64),
    BlockedUntilTick(u64),
    WaitingForAnswer(u64),
    Done,
}

impl Status {
    fn wake_tick(self) -> Option<u64> {
        match self {
            Status::BlockedOnFetch(t) | Status::BlockedUntilTick(t) | Status::WaitingForAnswer(t) => Some(t),
            _ => None,
        }
    }
}

enum FrameKind {
    Seq,
    Repeat { remaining: u64 },
    Forever,
    Foreach { items: Rc<Vec<Json>>, index: usize, projects: bool },
}

/// A block list being executed, with the container's path.
struct Frame<'p> {
    blocks: &'p [Block],
    pc: usize,
    path: BlockPath,
    else_branch: bool,
    kind: FrameKind,
}

impl Frame<'_> {
    fn child_path(&self, i: usize) -> BlockPath {
        self.path.child(if self.else_branch { Step::Else(i) } else { Step::Body(i) })
    }
}

struct ScriptState<'p> {
    sprite: usize,
    script: usize,
    hat: &'p Block,
    body: &'p [Block],
    frames: Vec<Frame<'p>>,
    status: Status,
    answer: String,
    /// List a suspended `comm_foreach` is waiting on; reused on resume.
    pending_list: Option<Resource>,
}

impl<'p> ScriptState<'p> {
    fn restart(&mut self) {
        self.frames = vec![Frame {
            blocks: self.body,
            pc: 0,
            path: BlockPath::script_root(self.sprite, self.script),
            else_branch: false,
            kind: FrameKind::Seq,
        }];
        self.status = Status::Runnable;
        self.pending_list = None;
    }

    fn advance(&mut self) {
        if let Some(f) = self.frames.last_mut() {
            f.pc += 1;
        }
    }

    fn push(&mut self, blocks: &'p [Block], path: BlockPath, else_branch: bool, kind: FrameKind) {
        self.frames.push(Frame { blocks, pc: 0, path, else_branch, kind });
    }

    /// Item of the innermost loop over projects (or users).
    fn context(&self, projects: bool) -> Option<&Json> {
        self.frames.iter().rev().find_map(|f| match &f.kind {
            FrameKind::Foreach { items, index, projects: p } if *p == projects => items.get(*index),
            _ => None,
        })
    }
}

enum Interrupt {
    Suspend(u64),
    Fatal(RunError),
}

impl From<FetchError> for Interrupt {
    fn from(e: FetchError) -> Self {
        Interrupt::Fatal(RunError::Fetch(e))
    }
}

enum Flow {
    Next,
    Yield,
}

struct Ctx<'p, 's> {
    program: &'p Program,
    session: &'s mut Session,
    viewer: String,
    latency: u64,
    tick: u64,
    vars: Vec<Vec<Value>>,
    answers: VecDeque<String>,
    in_flight: HashMap<String, u64>,
    seen_diags: HashSet<(DiagCode, String)>,
    transcript: Transcript,
    stop_all: bool,
}

/// Runs `program` to completion (or `max_ticks`) and returns its transcript.
pub fn run(program: &Program, options: &RunOptions, session: &mut Session) -> Result<Transcript, RunError> {
    if options.max_ticks == 0 {
        return Err(RunError::ZeroMaxTicks);
    }
    validate(program)?;
    session.begin_run();
    let result = run_inner(program, options, session);
    session.end_run();
    result
}

fn run_inner(program: &Program, options: &RunOptions, session: &mut Session) -> Result<Transcript, RunError> {
    if let Some(v) = &options.viewer {
        if session.fetch_all(&Resource::User(v.clone()))?.value == CachedValue::NotFound {
            return Err(RunError::UnknownViewer(v.clone()));
        }
    }

    let mut vars = Vec::with_capacity(program.sprites.len());
    for sprite in &program.sprites {
        let mut values = Vec::with_capacity(sprite.variables.len());
        for var in &sprite.variables {
            let init = match (var.cloud, program.cloud_project_id) {
                (true, Some(pid)) => session.cloud_get(pid, &var.name)?,
                _ => var.init,
            };
            values.push(Value::Number(init));
        }
        vars.push(values);
    }

    let mut scripts = Vec::new();
    for (si, sprite) in program.sprites.iter().enumerate() {
        for (ki, script) in sprite.scripts.iter().enumerate() {
            scripts.push(ScriptState {
                sprite: si,
                script: ki,
                hat: &script.hat,
                body: &script.body,
                frames: Vec::new(),
                status: Status::Idle,
                answer: String::new(),
                pending_list: None,
            });
        }
    }

    let mut injections = options.events.clone();
    if !injections.iter().any(|i| i.trigger == Trigger::Flag) {
        injections.insert(0, Injection { trigger: Trigger::Flag, tick: 0 });
    }
    injections.sort_by_key(|i| i.tick);

    let mut ctx = Ctx {
        program,
        session,
        viewer: options.viewer.clone().unwrap_or_default(),
        latency: options.latency_ticks.max(1),
        tick: 0,
        vars,
        answers: options.answers.iter().cloned().collect(),
        in_flight: HashMap::new(),
        seen_diags: HashSet::new(),
        transcript: Transcript::default(),
        stop_all: false,
    };

    let mut next_injection = 0;
    loop {
        if ctx.tick >= options.max_ticks {
            ctx.tick = options.max_ticks;
            return Ok(ctx.finish(EndReason::MaxTicks));
        }
        for s in scripts.iter_mut() {
            if s.status.wake_tick().is_some_and(|t| t <= ctx.tick) {
                s.status = Status::Runnable;
            }
        }
        while let Some(inj) = injections.get(next_injection).filter(|i| i.tick <= ctx.tick) {
            for s in scripts.iter_mut() {
                if hat_matches(s.hat, &inj.trigger) {
                    s.restart();
                }
            }
            next_injection += 1;
        }
        for s in scripts.iter_mut() {
            if s.status == Status::Runnable {
                ctx.run_script(s)?;
                if ctx.stop_all {
                    return Ok(ctx.finish(EndReason::Done));
                }
            }
        }

        let any_runnable = scripts.iter().any(|s| s.status == Status::Runnable);
        let next_wake = scripts.iter().filter_map(|s| s.status.wake_tick()).min();
        let next_event = injections.get(next_injection).map(|i| i.tick);
        ctx.tick = match (any_runnable, next_wake, next_event) {
            (true, _, _) => ctx.tick + 1,
            (false, None, None) => return Ok(ctx.finish(EndReason::Done)),
            (false, a, b) => a.into_iter().chain(b).min().unwrap_or(ctx.tick + 1).max(ctx.tick + 1),
        };
    }
}

fn hat_matches(hat: &Block, trigger: &Trigger) -> bool {
    match (hat.op, trigger) {
        (Opcode::WhenFlagClicked, Trigger::Flag) => true,
        (Opcode::WhenKeyPressed, Trigger::Key(k)) => hat.field_value("key").eq_ignore_ascii_case(k),
        _ => false,
    }
}

fn text_of(item: &Json, key: &str) -> Value {
    Value::Text(item.get(key).and_then(Json::as_str).unwrap_or("").to_owned())
}

impl<'p> Ctx<'p, '_> {
    fn finish(mut self, reason: EndReason) -> Transcript {
        for (si, sprite) in self.program.sprites.iter().enumerate() {
            for (vi, var) in sprite.variables.iter().enumerate() {
                self.transcript.events.push(Event::Var {
                    sprite: sprite.name.clone(),
                    name: var.name.clone(),
                    value: self.vars[si][vi].to_text(),
                });
            }
        }
        self.transcript.events.push(Event::End { tick: self.tick, reason });
        self.transcript
    }

    fn sprite_name(&self, s: &ScriptState) -> String {
        self.program.sprites[s.sprite].name.clone()
    }

    fn emit(&mut self, s: &ScriptState, make: fn(u64, String, String) -> Event, text: String) {
        let sprite = self.sprite_name(s);
        self.transcript.events.push(make(self.tick, sprite, text));
    }

    /// Emits a DIAG once per (code, path) per run.
    fn diag(&mut self, s: &ScriptState, code: DiagCode, path: &BlockPath, message: String) {
        let path = path.to_string();
        if self.seen_diags.insert((code, path.clone())) {
            let sprite = self.sprite_name(s);
            self.transcript.events.push(Event::Diag { tick: self.tick, sprite, code, path, message });
        }
    }

    /// Data for `resource`, or a suspension until an in-flight fetch lands.
    fn need(&mut self, resource: &Resource) -> Result<CachedValue, Interrupt> {
        let key = resource.path();
        if let Some(&ready) = self.in_flight.get(&key) {
            if ready > self.tick {
                return Err(Interrupt::Suspend(ready));
            }
        }
        if let Some(entry) = self.session.cached(resource) {
            return Ok(entry.value.clone());
        }
        self.session.fetch_all(resource)?;
        let ready = self.tick + self.latency;
        self.in_flight.insert(key, ready);
        Err(Interrupt::Suspend(ready))
    }

    fn run_script(&mut self, s: &mut ScriptState<'p>) -> Result<(), RunError> {
        loop {
            if self.stop_all {
                return Ok(());
            }
            let Some(frame) = s.frames.last_mut() else {
                s.status = Status::Done;
                return Ok(());
            };
            if frame.pc < frame.blocks.len() {
                let blocks = frame.blocks;
                let block = &blocks[frame.pc];
                let path = frame.child_path(frame.pc);
                match self.exec(s, block, path) {
                    Ok(Flow::Next) => {}
                    Ok(Flow::Yield) => return Ok(()),
                    Err(Interrupt::Suspend(t)) => {
                        s.status = Status::BlockedOnFetch(t);
                        return Ok(());
                    }
                    Err(Interrupt::Fatal(e)) => return Err(e),
                }
                continue;
            }
            // End of a block list: loops yield at the bottom of every iteration.
            match &mut frame.kind {
                FrameKind::Seq => {
                    s.frames.pop();
                }
                FrameKind::Repeat { remaining } => {
                    *remaining -= 1;
                    if *remaining > 0 {
                        frame.pc = 0;
                    } else {
                        s.frames.pop();
                    }
                    return Ok(());
                }
                FrameKind::Forever => {
                    frame.pc = 0;
                    return Ok(());
                }
                FrameKind::Foreach { items, index, .. } => {
                    *index += 1;
                    if *index < items.len() {
                        frame.pc = 0;
                    } else {
                        s.frames.pop();
                    }
                    return Ok(());
                }
            }
        }
    }

    fn arg(&mut self, s: &ScriptState, block: &Block, path: &BlockPath, i: usize) -> Result<Value, Interrupt> {
        match block.args.get(i) {
            Some(Arg::Literal(lit)) => Ok(Value::from(lit)),
            Some(Arg::Block(b)) => self.eval(s, b, &path.child(Step::Arg(i))),
            None => Ok(Value::default()),
        }
    }

    fn exec(&mut self, s: &mut ScriptState<'p>, block: &'p Block, path: BlockPath) -> Result<Flow, Interrupt> {
        match block.op {
            Opcode::Say | Opcode::Think => {
                let text = self.arg(s, block, &path, 0)?.to_text();
                s.advance();
                let make = if block.op == Opcode::Say {
                    |tick, sprite, text| Event::Say { tick, sprite, text }
                } else {
                    |tick, sprite, text| Event::Think { tick, sprite, text }
                };
                self.emit(s, make, text);
            }
            Opcode::Wait => {
                let secs = self.arg(s, block, &path, 0)?.to_number();
                s.advance();
                let ticks = (secs * TICKS_PER_SECOND).ceil();
                let ticks = if ticks >= 1.0 { ticks.min(u64::MAX as f64) as u64 } else { 1 };
                s.status = Status::BlockedUntilTick(self.tick.saturating_add(ticks));
                return Ok(Flow::Yield);
            }
            Opcode::Repeat => {
                let n = value::round(self.arg(s, block, &path, 0)?.to_number());
                s.advance();
                if n >= 1.0 {
                    let remaining = n.min(u64::MAX as f64) as u64;
                    s.push(&block.body, path, false, FrameKind::Repeat { remaining });
                }
            }
            Opcode::Forever => {
                s.advance();
                s.push(&block.body, path, false, FrameKind::Forever);
            }
            Opcode::If | Opcode::IfElse => {
                let cond = self.arg(s, block, &path, 0)?.truthy();
                s.advance();
                if cond {
                    s.push(&block.body, path, false, FrameKind::Seq);
                } else if block.op == Opcode::IfElse {
                    s.push(&block.else_body, path, true, FrameKind::Seq);
                }
            }
            Opcode::Stop => {
                s.advance();
                if block.field_value("option") == "all" {
                    self.stop_all = true;
                }
                s.frames.clear();
                s.status = Status::Done;
                return Ok(Flow::Yield);
            }
            Opcode::SetVar | Opcode::ChangeVar => {
                let v = self.arg(s, block, &path, 0)?;
                s.advance();
                self.assign(s, block, &path, v)?;
            }
            Opcode::Ask => {
                let question = self.arg(s, block, &path, 0)?.to_text();
                s.advance();
                self.emit(s, |tick, sprite, text| Event::Ask { tick, sprite, text }, question);
                s.answer = match self.answers.pop_front() {
                    Some(a) => a,
                    None => {
                        self.diag(s, DiagCode::NoAnswer, &path, "answer queue exhausted".into());
                        String::new()
                    }
                };
                s.status = Status::WaitingForAnswer(self.tick + 1);
                return Ok(Flow::Yield);
            }
            Opcode::PenMove => {
                self.arg(s, block, &path, 0)?;
                s.advance();
            }
            Opcode::CommForeach => return self.exec_foreach(s, block, path),
            _ => s.advance(),
        }
        Ok(Flow::Next)
    }

    fn exec_foreach(&mut self, s: &mut ScriptState<'p>, block: &'p Block, path: BlockPath) -> Result<Flow, Interrupt> {
        let relation: Relation = block.field_value("relation").parse().unwrap_or(Relation::Shared);
        let resource = match s.pending_list.take() {
            Some(r) => r,
            None => {
                let username = self.arg(s, block, &path, 0)?.to_text();
                Resource::UserList { username, relation }
            }
        };
        let data = match self.need(&resource) {
            Err(Interrupt::Suspend(t)) => {
                s.pending_list = Some(resource);
                return Err(Interrupt::Suspend(t));
            }
            other => other?,
        };
        s.advance();
        match data {
            CachedValue::List(items) if !items.is_empty() => {
                let kind = FrameKind::Foreach { items: Rc::new(items), index: 0, projects: relation.lists_projects() };
                s.push(&block.body, path, false, kind);
            }
            CachedValue::NotFound => {
                let Resource::UserList { username, .. } = &resource else { unreachable!() };
                self.diag(s, DiagCode::UnknownUser, &path, format!("unknown user `{username}`"));
            }
            _ => {}
        }
        Ok(Flow::Next)
    }

    fn assign(&mut self, s: &ScriptState, block: &Block, path: &BlockPath, v: Value) -> Result<(), Interrupt> {
        let program = self.program;
        let sprite = &program.sprites[s.sprite];
        let Some(vi) = sprite.variable_index(block.field_value("var")) else { return Ok(()) };
        let var = &sprite.variables[vi];
        if !var.cloud {
            let current = self.vars[s.sprite][vi].to_number();
            self.vars[s.sprite][vi] = match block.op {
                Opcode::SetVar => v,
                _ => Value::Number(current + v.to_number()),
            };
            return Ok(());
        }
        let write = match block.op {
            Opcode::SetVar => match &v {
                Value::Text(t) => value::parse_number(t).map(CloudWrite::Set),
                other => Some(CloudWrite::Set(other.to_number())),
            },
            _ => Some(CloudWrite::Change(v.to_number())),
        };
        let write = write.filter(|w| match w {
            CloudWrite::Set(x) | CloudWrite::Change(x) => x.is_finite(),
        });
        let (Some(write), Some(pid)) = (write, self.program.cloud_project_id) else {
            let msg = format!("cloud variable `{}` only holds finite numbers; `{}` ignored", var.name, v.to_text());
            self.diag(s, DiagCode::Cloud, path, msg);
            return Ok(());
        };
        let stored = self.session.cloud_write(pid, &var.name, write)?;
        self.vars[s.sprite][vi] = Value::Number(stored);
        Ok(())
    }

    fn num2(&mut self, s: &ScriptState, b: &Block, p: &BlockPath) -> Result<(f64, f64), Interrupt> {
        Ok((self.arg(s, b, p, 0)?.to_number(), self.arg(s, b, p, 1)?.to_number()))
    }

    fn val2(&mut self, s: &ScriptState, b: &Block, p: &BlockPath) -> Result<(Value, Value), Interrupt> {
        Ok((self.arg(s, b, p, 0)?, self.arg(s, b, p, 1)?))
    }

    fn eval(&mut self, s: &ScriptState, block: &Block, path: &BlockPath) -> Result<Value, Interrupt> {
        use std::cmp::Ordering;
        Ok(match block.op {
            Opcode::Answer => Value::Text(s.answer.clone()),
            Opcode::Var => {
                let sprite = &self.program.sprites[s.sprite];
                match sprite.variable_index(block.field_value("var")) {
                    Some(vi) => self.vars[s.sprite][vi].clone(),
                    None => Value::default(),
                }
            }
            Opcode::Add => self.num2(s, block, path).map(|(a, b)| Value::Number(a + b))?,
            Opcode::Sub => self.num2(s, block, path).map(|(a, b)| Value::Number(a - b))?,
            Opcode::Mul => self.num2(s, block, path).map(|(a, b)| Value::Number(a * b))?,
            Opcode::Div => self.num2(s, block, path).map(|(a, b)| Value::Number(a / b))?,
            Opcode::Mod => self.num2(s, block, path).map(|(a, b)| Value::Number(value::modulo(a, b)))?,
            Opcode::Round => Value::Number(value::round(self.arg(s, block, path, 0)?.to_number())),
            Opcode::Gt => {
                self.val2(s, block, path).map(|(a, b)| Value::Bool(value::compare(&a, &b) == Ordering::Greater))?
            }
            Opcode::Lt => {
                self.val2(s, block, path).map(|(a, b)| Value::Bool(value::compare(&a, &b) == Ordering::Less))?
            }
            Opcode::Eq => self.val2(s, block, path).map(|(a, b)| Value::Bool(value::equals(&a, &b)))?,
            Opcode::And => self.val2(s, block, path).map(|(a, b)| Value::Bool(a.truthy() && b.truthy()))?,
            Opcode::Or => self.val2(s, block, path).map(|(a, b)| Value::Bool(a.truthy() || b.truthy()))?,
            Opcode::Not => Value::Bool(!self.arg(s, block, path, 0)?.truthy()),
            Opcode::Join => self.val2(s, block, path).map(|(a, b)| Value::Text(a.to_text() + &b.to_text()))?,
            Opcode::LengthOf => Value::Number(self.arg(s, block, path, 0)?.to_text().chars().count() as f64),
            Opcode::CommViewerUsername => Value::Text(self.viewer.clone()),
            Opcode::CommTotal => {
                let kind = block.field_value("kind");
                match self.need(&Resource::Stats)? {
                    CachedValue::Scalar(stats) => Value::Number(stats.get(kind).and_then(Json::as_f64).unwrap_or(0.0)),
                    _ => Value::Number(0.0),
                }
            }
            Opcode::CommProjectMeta => {
                let field = block.field_value("field");
                let numeric = !matches!(field, "title" | "description");
                match s.context(true) {
                    Some(item) if numeric => Value::Number(item.get(field).and_then(Json::as_f64).unwrap_or(0.0)),
                    Some(item) => text_of(item, field),
                    None => {
                        self.diag(s, DiagCode::L1, path, out_of_context_message(block.op));
                        if numeric {
                            Value::Number(0.0)
                        } else {
                            Value::default()
                        }
                    }
                }
            }
            Opcode::CommUserMeta => match s.context(false) {
                Some(item) => text_of(item, block.field_value("field")),
                None => {
                    self.diag(s, DiagCode::L1, path, out_of_context_message(block.op));
                    Value::default()
                }
            },
            Opcode::CommProjectUsesCategory => match self.code_meta(s, block, path)? {
                Some(meta) => {
                    let category: Option<Category> = block.field_value("category").parse().ok();
                    Value::Bool(category.is_some_and(|c| meta.uses(c)))
                }
                None => Value::Bool(false),
            },
            Opcode::CommProjectBlockCount => match self.code_meta(s, block, path)? {
                Some(meta) => {
                    let op: Option<Opcode> = block.field_value("opcode").parse().ok();
                    Value::Number(op.map_or(0, |op| meta.count(op)) as f64)
                }
                None => Value::Number(0.0),
            },
            _ => Value::default(),
        })
    }

    /// Code metadata of the current project item; `None` (plus an L1 DIAG)
    /// outside a project loop.
    fn code_meta(&mut self, s: &ScriptState, block: &Block, path: &BlockPath) -> Result<Option<CodeMeta>, Interrupt> {
        let Some(id) = s.context(true).map(|item| item.get("id").and_then(Json::as_u64)) else {
            self.diag(s, DiagCode::L1, path, out_of_context_message(block.op));
            return Ok(None);
        };
        let Some(id) = id else { return Ok(None) };
        Ok(match self.need(&Resource::ProjectCodeMeta(id))? {
            CachedValue::Scalar(json) => CodeMeta::from_json(&json),
            _ => None,
        })
    }
}
