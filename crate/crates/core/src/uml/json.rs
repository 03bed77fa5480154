use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use super::{AttributeDef, ClassDef, ClassModel, MethodDef, ParamDef};
use crate::expr::ValueType;

/// A document that does not follow the class-model schema. `pointer` is a
/// JSON pointer to the offending value.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pointer}: {message}")]
pub struct SchemaError {
    pub pointer: String,
    pub message: String,
}

fn err(pointer: &str, message: impl Into<String>) -> SchemaError {
    SchemaError {
        pointer: if pointer.is_empty() { "/".to_owned() } else { pointer.to_owned() },
        message: message.into(),
    }
}

fn object<'a>(v: &'a Json, at: &str, allowed: &[&str]) -> Result<&'a Map<String, Json>, SchemaError> {
    let obj = v.as_object().ok_or_else(|| err(at, "expected an object"))?;
    if let Some(key) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(err(&format!("{at}/{key}"), format!("unknown field `{key}`")));
    }
    Ok(obj)
}

fn string(obj: &Map<String, Json>, key: &str, at: &str) -> Result<String, SchemaError> {
    let at = format!("{at}/{key}");
    match obj.get(key) {
        None => Err(err(&at, "missing required field")),
        Some(v) => v.as_str().map(str::to_owned).ok_or_else(|| err(&at, "expected a string")),
    }
}

fn value_type(v: &Json, at: &str) -> Result<ValueType, SchemaError> {
    let word = v.as_str().ok_or_else(|| err(at, "expected a type name"))?;
    ValueType::from_keyword(word).ok_or_else(|| err(at, format!("unknown type `{word}`")))
}

fn array<'a>(obj: &'a Map<String, Json>, key: &str, at: &str) -> Result<&'a [Json], SchemaError> {
    match obj.get(key) {
        None => Ok(&[]),
        Some(Json::Array(items)) => Ok(items),
        Some(_) => Err(err(&format!("{at}/{key}"), "expected an array")),
    }
}

/// Reads `{"classes": [...]}`. Optional fields may be omitted; unknown
/// fields are rejected.
pub fn read_class_json(text: &str) -> Result<ClassModel, SchemaError> {
    let root: Json = serde_json::from_str(text).map_err(|e| err("", format!("invalid JSON: {e}")))?;
    let top = object(&root, "", &["classes"])?;
    let classes = match top.get("classes") {
        Some(Json::Array(items)) => items,
        Some(_) => return Err(err("/classes", "expected an array")),
        None => return Err(err("/classes", "missing required field")),
    };
    let mut out = Vec::with_capacity(classes.len());
    for (i, c) in classes.iter().enumerate() {
        let at = format!("/classes/{i}");
        let obj = object(c, &at, &["name", "attributes", "methods", "parent"])?;
        let mut class = ClassDef::new(&string(obj, "name", &at)?);
        class.parent = match obj.get("parent") {
            None | Some(Json::Null) => None,
            Some(Json::String(p)) => Some(p.clone()),
            Some(_) => return Err(err(&format!("{at}/parent"), "expected a string or null")),
        };
        for (j, a) in array(obj, "attributes", &at)?.iter().enumerate() {
            let at = format!("{at}/attributes/{j}");
            let a = object(a, &at, &["name", "type"])?;
            let ty = a.get("type").ok_or_else(|| err(&format!("{at}/type"), "missing required field"))?;
            class.attributes.push(AttributeDef {
                name: string(a, "name", &at)?,
                value_type: value_type(ty, &format!("{at}/type"))?,
            });
        }
        for (j, m) in array(obj, "methods", &at)?.iter().enumerate() {
            let at = format!("{at}/methods/{j}");
            let m = object(m, &at, &["name", "params", "returns"])?;
            let mut params = Vec::new();
            for (k, p) in array(m, "params", &at)?.iter().enumerate() {
                let at = format!("{at}/params/{k}");
                let p = object(p, &at, &["name", "type"])?;
                let ty = p.get("type").ok_or_else(|| err(&format!("{at}/type"), "missing required field"))?;
                params.push(ParamDef {
                    name: string(p, "name", &at)?,
                    value_type: value_type(ty, &format!("{at}/type"))?,
                });
            }
            let returns = match m.get("returns") {
                None | Some(Json::Null) => None,
                Some(v) => Some(value_type(v, &format!("{at}/returns"))?),
            };
            class.methods.push(MethodDef {
                name: string(m, "name", &at)?,
                params,
                returns,
            });
        }
        out.push(class);
    }
    Ok(ClassModel { classes: out })
}

/// Every field is written, keys sorted, two-space indentation and a
/// trailing newline, so equal models give equal bytes.
pub fn write_class_json(cm: &ClassModel) -> String {
    let classes: Vec<Json> = cm
        .classes
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "parent": c.parent,
                "attributes": c.attributes.iter().map(|a| json!({
                    "name": a.name,
                    "type": a.value_type.keyword(),
                })).collect::<Vec<_>>(),
                "methods": c.methods.iter().map(|m| json!({
                    "name": m.name,
                    "params": m.params.iter().map(|p| json!({
                        "name": p.name,
                        "type": p.value_type.keyword(),
                    })).collect::<Vec<_>>(),
                    "returns": m.returns.map(ValueType::keyword),
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&json!({ "classes": classes })).expect("plain JSON");
    out.push('\n');
    out
}
