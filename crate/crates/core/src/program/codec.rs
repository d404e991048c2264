//! JSON program format: decoding with structural validation, canonical encoding.

use std::collections::{BTreeMap, HashSet};

use serde_json::{Map, Value};
use thiserror::Error;

use super::ast::{Arg, Block, Literal, Program, Script, Sprite, Variable};
use super::opcode::{Category, FieldKind, Opcode, Shape};
use super::path::{BlockPath, Step};
use crate::canon;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    /// Rule L0: the document is JSON but not a valid program.
    #[error("L0 {location} [{field}]: {message}")]
    Schema { location: String, field: String, message: String },
}

fn schema(location: impl ToString, field: &str, message: impl Into<String>) -> ParseError {
    ParseError::Schema { location: location.to_string(), field: field.to_owned(), message: message.into() }
}

/// Parses program text and validates it against the opcode table.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    program_from_json(&value)
}

/// Canonical text: sorted keys, integral numbers without fraction, trailing newline.
pub fn serialize_program(program: &Program) -> String {
    canon::render_pretty(&program_to_json(program))
}

/// Checks a program built in code against the same rules the parser applies.
pub fn validate(program: &Program) -> Result<(), ParseError> {
    program_from_json(&program_to_json(program)).map(|_| ())
}

pub fn program_to_json(program: &Program) -> Value {
    let mut map = Map::new();
    map.insert("sprites".into(), Value::Array(program.sprites.iter().map(sprite_to_json).collect()));
    if let Some(id) = program.cloud_project_id {
        map.insert("cloud_project_id".into(), Value::from(id));
    }
    Value::Object(map)
}

fn sprite_to_json(sprite: &Sprite) -> Value {
    let variables = sprite
        .variables
        .iter()
        .map(|v| {
            let mut m = Map::new();
            m.insert("name".into(), Value::from(v.name.clone()));
            m.insert("cloud".into(), Value::from(v.cloud));
            m.insert("init".into(), canon::number(v.init));
            Value::Object(m)
        })
        .collect();
    let scripts = sprite
        .scripts
        .iter()
        .map(|s| {
            let mut m = Map::new();
            m.insert("hat".into(), block_to_json(&s.hat));
            m.insert("body".into(), blocks_to_json(&s.body));
            Value::Object(m)
        })
        .collect();
    let mut m = Map::new();
    m.insert("name".into(), Value::from(sprite.name.clone()));
    m.insert("variables".into(), Value::Array(variables));
    m.insert("scripts".into(), Value::Array(scripts));
    Value::Object(m)
}

fn blocks_to_json(blocks: &[Block]) -> Value {
    Value::Array(blocks.iter().map(block_to_json).collect())
}

fn block_to_json(block: &Block) -> Value {
    let spec = block.op.spec();
    let mut m = Map::new();
    m.insert("op".into(), Value::from(spec.name));
    if !spec.fields.is_empty() || !block.fields.is_empty() {
        let fields = block.fields.iter().map(|(k, v)| (k.clone(), Value::from(v.clone()))).collect();
        m.insert("fields".into(), Value::Object(fields));
    }
    if spec.arity > 0 || !block.args.is_empty() {
        let args = block
            .args
            .iter()
            .map(|a| match a {
                Arg::Literal(Literal::Text(s)) => Value::from(s.clone()),
                Arg::Literal(Literal::Number(n)) => canon::number(*n),
                Arg::Literal(Literal::Bool(b)) => Value::from(*b),
                Arg::Block(b) => block_to_json(b),
            })
            .collect();
        m.insert("args".into(), Value::Array(args));
    }
    if spec.body {
        m.insert("body".into(), blocks_to_json(&block.body));
    }
    if spec.else_body {
        m.insert("else".into(), blocks_to_json(&block.else_body));
    }
    Value::Object(m)
}

pub fn program_from_json(value: &Value) -> Result<Program, ParseError> {
    let obj = as_object(value, "program", "program")?;
    check_keys(obj, &["sprites", "cloud_project_id"], "program")?;
    let cloud_project_id = match obj.get("cloud_project_id") {
        None | Some(Value::Null) => None,
        Some(v) => match v.as_u64() {
            Some(id) if id > 0 => Some(id),
            _ => return Err(schema("program", "cloud_project_id", "cloud_project_id must be a positive integer")),
        },
    };
    let sprites_json = match obj.get("sprites") {
        Some(Value::Array(items)) => items,
        _ => return Err(schema("program", "sprites", "sprites must be an array")),
    };
    if sprites_json.is_empty() {
        return Err(schema("program", "sprites", "a program needs at least one sprite"));
    }
    let mut names = HashSet::new();
    let mut sprites = Vec::with_capacity(sprites_json.len());
    for (i, s) in sprites_json.iter().enumerate() {
        let sprite = sprite_from_json(s, i, cloud_project_id.is_some())?;
        if !names.insert(sprite.name.clone()) {
            return Err(schema(i, "name", format!("duplicate sprite name `{}`", sprite.name)));
        }
        sprites.push(sprite);
    }
    Ok(Program { sprites, cloud_project_id })
}

fn sprite_from_json(value: &Value, index: usize, has_cloud: bool) -> Result<Sprite, ParseError> {
    let obj = as_object(value, index, "sprite")?;
    check_keys(obj, &["name", "variables", "scripts"], index)?;
    let name = match obj.get("name") {
        Some(Value::String(s)) if !s.is_empty() => s.clone(),
        _ => return Err(schema(index, "name", "sprite name must be a nonempty string")),
    };
    let mut variables = Vec::new();
    for v in array_or_empty(obj.get("variables"), index, "variables")? {
        let vo = as_object(v, index, "variables")?;
        check_keys(vo, &["name", "cloud", "init"], index)?;
        let vname = match vo.get("name") {
            Some(Value::String(s)) if !s.is_empty() => s.clone(),
            _ => return Err(schema(index, "variables", "variable name must be a nonempty string")),
        };
        let cloud = match vo.get("cloud") {
            None => false,
            Some(Value::Bool(b)) => *b,
            Some(_) => return Err(schema(index, "cloud", "cloud must be a boolean")),
        };
        let init = match vo.get("init") {
            None => 0.0,
            Some(Value::Number(n)) => n.as_f64().unwrap_or_default(),
            Some(_) => return Err(schema(index, "init", "init must be a number")),
        };
        if cloud && !has_cloud {
            return Err(schema(index, "cloud", format!("cloud variable `{vname}` requires cloud_project_id")));
        }
        if variables.iter().any(|x: &Variable| x.name == vname) {
            return Err(schema(index, "variables", format!("duplicate variable `{vname}`")));
        }
        variables.push(Variable { name: vname, cloud, init });
    }
    let mut sprite = Sprite { name, variables, scripts: Vec::new() };
    let scripts_json = array_or_empty(obj.get("scripts"), index, "scripts")?;
    for (k, s) in scripts_json.iter().enumerate() {
        let root = BlockPath::script_root(index, k);
        let so = as_object(s, &root, "script")?;
        check_keys(so, &["hat", "body"], &root)?;
        let hat_json = so.get("hat").ok_or_else(|| schema(&root, "hat", "script needs a hat block"))?;
        let hat = block_from_json(hat_json, &root, Shape::Hat, &sprite)?;
        let body = statements_from_json(so.get("body"), &root, Step::Body, &sprite, "body")?;
        sprite.scripts.push(Script { hat, body });
    }
    Ok(sprite)
}

fn statements_from_json(
    value: Option<&Value>,
    parent: &BlockPath,
    step: fn(usize) -> Step,
    sprite: &Sprite,
    field: &str,
) -> Result<Vec<Block>, ParseError> {
    array_or_empty(value, parent, field)?
        .iter()
        .enumerate()
        .map(|(i, b)| block_from_json(b, &parent.child(step(i)), Shape::Statement, sprite))
        .collect()
}

fn block_from_json(value: &Value, path: &BlockPath, expected: Shape, sprite: &Sprite) -> Result<Block, ParseError> {
    let obj = as_object(value, path, "block")?;
    check_keys(obj, &["op", "fields", "args", "body", "else"], path)?;
    let op_name = match obj.get("op") {
        Some(Value::String(s)) => s,
        _ => return Err(schema(path, "op", "block needs a string `op`")),
    };
    let op: Opcode = op_name.parse().map_err(|_| schema(path, "op", format!("unknown opcode `{op_name}`")))?;
    let spec = op.spec();
    if spec.shape != expected {
        let msg = match expected {
            Shape::Hat => format!("`{op}` is not a hat block"),
            Shape::Statement => format!("`{op}` cannot be used as a statement"),
            Shape::Reporter => format!("`{op}` cannot be used as an argument"),
        };
        return Err(schema(path, "op", msg));
    }

    let mut fields = BTreeMap::new();
    match obj.get("fields") {
        None => {}
        Some(Value::Object(m)) => {
            for (k, v) in m {
                let Value::String(s) = v else {
                    return Err(schema(path, k, "field values must be strings"));
                };
                fields.insert(k.clone(), s.clone());
            }
        }
        Some(_) => return Err(schema(path, "fields", "fields must be an object")),
    }
    for name in fields.keys() {
        if !spec.fields.iter().any(|f| f.name == name) {
            return Err(schema(path, name, format!("`{op}` has no field `{name}`")));
        }
    }
    for f in spec.fields {
        let Some(v) = fields.get(f.name) else {
            return Err(schema(path, f.name, format!("`{op}` needs field `{}`", f.name)));
        };
        let ok = match f.kind {
            FieldKind::Text => !v.is_empty(),
            FieldKind::Choice(choices) => choices.contains(&v.as_str()),
            FieldKind::Variable => sprite.variable_index(v).is_some(),
            FieldKind::Opcode => v.parse::<Opcode>().is_ok(),
            FieldKind::Category => v.parse::<Category>().is_ok(),
        };
        if !ok {
            let msg = match f.kind {
                FieldKind::Variable => format!("unknown variable `{v}`"),
                FieldKind::Category => format!("unknown category `{v}`"),
                FieldKind::Opcode => format!("unknown opcode `{v}`"),
                _ => format!("invalid value `{v}` for field `{}`", f.name),
            };
            return Err(schema(path, f.name, msg));
        }
    }

    let args_json = array_or_empty(obj.get("args"), path, "args")?;
    if args_json.len() != spec.arity {
        return Err(schema(path, "args", format!("`{op}` takes {} argument(s), got {}", spec.arity, args_json.len())));
    }
    let mut args = Vec::with_capacity(args_json.len());
    for (i, a) in args_json.iter().enumerate() {
        let arg = match a {
            Value::String(s) => Arg::Literal(Literal::Text(s.clone())),
            Value::Number(n) => Arg::Literal(Literal::Number(n.as_f64().unwrap_or_default())),
            Value::Bool(b) => Arg::Literal(Literal::Bool(*b)),
            Value::Object(_) => Arg::Block(block_from_json(a, &path.child(Step::Arg(i)), Shape::Reporter, sprite)?),
            _ => return Err(schema(path, "args", format!("argument {i} must be a literal or a block"))),
        };
        args.push(arg);
    }

    if !spec.body && obj.contains_key("body") {
        return Err(schema(path, "body", format!("`{op}` has no body")));
    }
    if !spec.else_body && obj.contains_key("else") {
        return Err(schema(path, "else", format!("`{op}` has no else branch")));
    }
    let body = statements_from_json(obj.get("body"), path, Step::Body, sprite, "body")?;
    let else_body = statements_from_json(obj.get("else"), path, Step::Else, sprite, "else")?;
    Ok(Block { op, fields, args, body, else_body })
}

fn as_object<'a>(value: &'a Value, location: impl ToString, what: &str) -> Result<&'a Map<String, Value>, ParseError> {
    value.as_object().ok_or_else(|| schema(location, what, format!("{what} must be an object")))
}

fn array_or_empty<'a>(
    value: Option<&'a Value>,
    location: impl ToString,
    field: &str,
) -> Result<&'a [Value], ParseError> {
    match value {
        None => Ok(&[]),
        Some(Value::Array(items)) => Ok(items),
        Some(_) => Err(schema(location, field, format!("{field} must be an array"))),
    }
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str], location: impl ToString) -> Result<(), ParseError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(location, k, format!("unexpected key `{k}`"))),
        None => Ok(()),
    }
}

impl serde::Serialize for Program {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        program_to_json(self).serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for Program {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        program_from_json(&value).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn parse(v: Value) -> Result<Program, ParseError> {
        parse_program(&v.to_string())
    }

    fn one_block(block: Value) -> Value {
        json!({"sprites": [{"name": "Stage", "variables": [{"name": "x", "cloud": false, "init": 0}],
            "scripts": [{"hat": {"op": "whenflagclicked"}, "body": [block]}]}]})
    }

    #[test]
    fn unknown_opcode_is_l0() {
        let err = parse(one_block(json!({"op": "fly_to_moon"}))).unwrap_err();
        match err {
            ParseError::Schema { location, field, message } => {
                assert_eq!(location, "0/0/b0");
                assert_eq!(field, "op");
                assert!(message.contains("fly_to_moon"));
            }
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_program("{\n  \"sprites\": [,]\n}").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn arity_and_shape_are_enforced() {
        assert!(parse(one_block(json!({"op": "say", "args": []}))).is_err());
        assert!(parse(one_block(json!({"op": "answer"}))).is_err());
        let reporter_with_statement = json!({"op": "say", "args": [{"op": "say", "args": ["x"]}]});
        assert!(parse(one_block(reporter_with_statement)).is_err());
        assert!(parse(one_block(json!({"op": "say", "args": ["x"], "body": []}))).is_err());
    }

    #[test]
    fn fields_are_checked() {
        let bad_var = json!({"op": "set_var", "fields": {"var": "nope"}, "args": [1]});
        assert!(parse(one_block(bad_var)).is_err());
        let bad_cat =
            json!({"op": "say", "args": [{"op": "comm_project_uses_category", "fields": {"category": "music"}}]});
        assert!(parse(one_block(bad_cat)).is_err());
        let extra = json!({"op": "say", "fields": {"x": "1"}, "args": ["a"]});
        assert!(parse(one_block(extra)).is_err());
        let ok = json!({"op": "set_var", "fields": {"var": "x"}, "args": [1]});
        assert!(parse(one_block(ok)).is_ok());
    }

    #[test]
    fn cloud_variable_needs_binding() {
        let v =
            json!({"sprites": [{"name": "S", "variables": [{"name": "c", "cloud": true, "init": 0}], "scripts": []}]});
        assert!(parse(v.clone()).is_err());
        let mut bound = v;
        bound["cloud_project_id"] = json!(1);
        assert!(parse(bound).is_ok());
    }

    #[test]
    fn sprite_rules() {
        assert!(parse(json!({"sprites": []})).is_err());
        assert!(parse(json!({"sprites": [{"name": "A"}, {"name": "A"}]})).is_err());
    }

    #[test]
    fn empty_script_body_is_explicit() {
        let p = Program::single("Stage", vec![], vec![]);
        let text = serialize_program(&p);
        assert!(text.contains("\"body\": []"), "{text}");
    }

    #[test]
    fn canonical_form_is_a_fixed_point() {
        let raw = one_block(json!({"args": [{"op": "add", "args": [3.0, 0.5]}], "op": "say"}));
        let raw = json!({"sprites": raw["sprites"], "cloud_project_id": null});
        let text = serialize_program(&parse(raw).unwrap_or_else(|e| panic!("{e}")));
        assert_eq!(serialize_program(&parse_program(&text).unwrap()), text);
    }
}
