use std::fmt::Write;

use super::Document;
use crate::expr::{write_quoted, Expr};
use crate::model::{Action, StaticModel, Thimac, ThimacPath};

const INDENT: &str = "    ";

/// Canonical text for a document. Parsing the output yields
/// `doc.canonical()`.
pub fn print(doc: &Document) -> String {
    let doc = doc.canonical();
    let model = &doc.model;
    let mut sections: Vec<String> = Vec::new();

    for root in model.roots() {
        let mut s = String::new();
        print_thimac(model, root, 0, &mut s);
        sections.push(s);
    }
    let edges = |keyword: &str, arrow: &str, edges: &[crate::model::Edge]| {
        edges
            .iter()
            .map(|e| format!("{keyword} {} {arrow} {};\n", e.from, e.to))
            .collect::<String>()
    };
    if !model.flows().is_empty() {
        sections.push(edges("flow", "->", model.flows()));
    }
    if !model.triggers().is_empty() {
        sections.push(edges("trigger", "-->", model.triggers()));
    }
    if !doc.events.is_empty() {
        let mut s = String::new();
        for e in &doc.events {
            write!(s, "event {}", e.id).unwrap();
            if !e.label.is_empty() {
                s.push(' ');
                write_quoted(&mut s, &e.label).unwrap();
            }
            let covers: Vec<&str> = e.covers.iter().map(|a| a.as_str()).collect();
            write!(s, " covers {{ {} }}", covers.join(", ")).unwrap();
            if let Some(input) = &e.input {
                write!(s, " input {input}").unwrap();
            }
            s.push_str(";\n");
        }
        sections.push(s);
    }
    if let Some(b) = &doc.behavior {
        let mut lines = Vec::new();
        for edge in &b.edges {
            let mut line = format!("{} -> {}", edge.from, edge.to);
            if let Some(g) = &edge.guard {
                write!(line, " guard {g}").unwrap();
            }
            lines.push(line);
        }
        let list = |ids: &std::collections::BTreeSet<crate::eventing::EventId>| {
            ids.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(", ")
        };
        if !b.terminals.is_empty() {
            lines.push(format!("terminal {}", list(&b.terminals)));
        }
        if !b.repeatable.is_empty() {
            lines.push(format!("repeatable {}", list(&b.repeatable)));
        }
        if lines.is_empty() {
            sections.push("behavior {}\n".to_owned());
        } else {
            let body: String = lines.iter().map(|l| format!("{INDENT}{l};\n")).collect();
            sections.push(format!("behavior {{\n{body}}}\n"));
        }
    }

    if sections.is_empty() {
        return "\n".to_owned();
    }
    sections.join("\n")
}

fn print_thimac(model: &StaticModel, t: &Thimac, depth: usize, out: &mut String) {
    let pad = INDENT.repeat(depth);
    write!(out, "{pad}thimac {}", t.name).unwrap();
    if t.specializes {
        out.push_str(" specializes");
    }
    let empty = t.store.is_none() && t.actions.is_empty() && t.subthimacs.is_empty();
    if empty {
        out.push_str(" {}\n");
        return;
    }
    out.push_str(" {\n");
    let inner = INDENT.repeat(depth + 1);
    if let Some(store) = &t.store {
        write!(out, "{inner}store").unwrap();
        if let Some(ty) = store.value_type {
            write!(out, ": {ty}").unwrap();
        }
        if let Some(v) = &store.initial {
            write!(out, " = {v}").unwrap();
        }
        out.push_str(";\n");
    }
    for id in &t.actions {
        let action = model.action(id).expect("owner lists only known actions");
        writeln!(out, "{inner}{};", action_body(model, action)).unwrap();
    }
    for child in &t.subthimacs {
        print_thimac(model, child, depth + 1, out);
    }
    writeln!(out, "{pad}}}").unwrap();
}

fn action_body(model: &StaticModel, action: &Action) -> String {
    let mut s = action.kind.keyword().to_owned();
    if !action.has_default_name() {
        write!(s, " {}", action.name).unwrap();
    }
    if let Some(update) = &action.update {
        let scope = &action.owner;
        let mut shorten = |p: &ThimacPath| relative(model, scope, p);
        let expr: Expr = update.expr.map_paths(&mut shorten);
        write!(s, " = {} := {expr}", relative(model, scope, &update.target)).unwrap();
    }
    s
}

/// Shortest trailing part of `path` that resolves back to it from `scope`.
fn relative(model: &StaticModel, scope: &ThimacPath, path: &ThimacPath) -> ThimacPath {
    let segments = path.segments();
    (1..=segments.len())
        .map(|len| &segments[segments.len() - len..])
        .find(|suffix| model.resolve_relative(scope, suffix).as_ref() == Some(path))
        .map(|suffix| ThimacPath::new(suffix.to_vec()))
        .unwrap_or_else(|| path.clone())
}
