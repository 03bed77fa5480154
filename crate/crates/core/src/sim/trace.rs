use serde_json::{json, Value as Json};

use super::{StoreDelta, Trace, TraceEntry};
use crate::expr::Value;

/// One line per entry:
/// `step<TAB>event<TAB>fired:a,b<TAB>deltas:path=old→new;...`
pub fn trace_to_text(trace: &Trace) -> String {
    trace.entries.iter().map(|e| format!("{}\n", entry_line(e))).collect()
}

fn entry_line(e: &TraceEntry) -> String {
    let fired: Vec<&str> = e.fired.iter().map(|a| a.as_str()).collect();
    let deltas: Vec<String> = e
        .deltas
        .iter()
        .map(|d| format!("{}={}→{}", d.path, text_value(&d.old), text_value(&d.new)))
        .collect();
    format!("{}\t{}\tfired:{}\tdeltas:{}", e.step, e.event, fired.join(","), deltas.join(";"))
}

fn text_value(v: &Option<Value>) -> String {
    v.as_ref().map_or_else(|| "null".to_owned(), Value::to_string)
}

/// Array of `{step, event, fired, deltas: [{path, old, new}]}` objects,
/// pretty-printed with sorted keys.
pub fn trace_to_json(trace: &Trace) -> String {
    let entries: Vec<Json> = trace
        .entries
        .iter()
        .map(|e| {
            json!({
                "step": e.step,
                "event": e.event.as_str(),
                "fired": e.fired.iter().map(|a| a.as_str()).collect::<Vec<_>>(),
                "deltas": e.deltas.iter().map(delta_json).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&Json::Array(entries)).expect("plain JSON");
    out.push('\n');
    out
}

fn delta_json(d: &StoreDelta) -> Json {
    json!({
        "path": d.path.to_string(),
        "old": value_json(&d.old),
        "new": value_json(&d.new),
    })
}

fn value_json(v: &Option<Value>) -> Json {
    match v {
        None => Json::Null,
        Some(Value::Number(n)) if n.fract() == 0.0 && n.abs() < 9.0e15 => json!(*n as i64),
        Some(Value::Number(n)) => json!(n),
        Some(Value::Text(s)) => json!(s),
        Some(Value::Boolean(b)) => json!(b),
        Some(Value::Ref(p)) => json!({ "ref": p.to_string() }),
    }
}
