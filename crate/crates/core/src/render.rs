//! Graphviz DOT output.
//!
//! The static view draws each thimac as a nested cluster holding its
//! action nodes; flows are solid edges and triggers dashed. The behavior
//! view draws events and the chronology, with guards as edge labels.

use std::fmt::Write;

use crate::eventing::BehavioralModel;
use crate::model::{StaticModel, Thimac};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Target {
    #[default]
    Static,
    Behavior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankDir {
    #[default]
    LR,
    TB,
}

impl RankDir {
    fn as_str(self) -> &'static str {
        match self {
            RankDir::LR => "LR",
            RankDir::TB => "TB",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RenderOptions {
    pub target: Target,
    /// Put store type and initial value into cluster labels.
    pub show_stores: bool,
    pub rankdir: RankDir,
}

/// Quotes `s` as a DOT string.
fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Renders `model`, or `behavior` when the target asks for it. A missing
/// behavior renders as an empty graph.
pub fn emit_dot(model: &StaticModel, behavior: Option<&BehavioralModel>, opts: &RenderOptions) -> String {
    let mut out = String::new();
    writeln!(out, "digraph \"tm\" {{").unwrap();
    writeln!(out, "    rankdir={};", opts.rankdir.as_str()).unwrap();
    match opts.target {
        Target::Static => {
            writeln!(out, "    compound=true;").unwrap();
            writeln!(out, "    node [shape=box];").unwrap();
            for root in model.roots() {
                cluster(model, root, 1, opts, &mut out);
            }
            for f in model.flows() {
                writeln!(out, "    {} -> {};", quote(f.from.as_str()), quote(f.to.as_str())).unwrap();
            }
            for t in model.triggers() {
                writeln!(out, "    {} -> {} [style=dashed];", quote(t.from.as_str()), quote(t.to.as_str())).unwrap();
            }
        }
        Target::Behavior => {
            writeln!(out, "    node [shape=ellipse];").unwrap();
            if let Some(b) = behavior {
                for e in &b.events {
                    let mut label = e.id.as_str().to_owned();
                    if !e.label.is_empty() {
                        label.push('\n');
                        label.push_str(&e.label);
                    }
                    let peripheries = if b.terminals.contains(&e.id) { ", peripheries=2" } else { "" };
                    writeln!(out, "    {} [label={}{peripheries}];", quote(e.id.as_str()), quote(&label)).unwrap();
                }
                for edge in &b.edges {
                    write!(out, "    {} -> {}", quote(edge.from.as_str()), quote(edge.to.as_str())).unwrap();
                    if let Some(g) = &edge.guard {
                        write!(out, " [label={}]", quote(&g.to_string())).unwrap();
                    }
                    out.push_str(";\n");
                }
            }
        }
    }
    out.push_str("}\n");
    out
}

fn cluster(model: &StaticModel, t: &Thimac, depth: usize, opts: &RenderOptions, out: &mut String) {
    let pad = "    ".repeat(depth);
    writeln!(out, "{pad}subgraph {} {{", quote(&format!("cluster_{}", t.path))).unwrap();
    let mut label = t.name.clone();
    if t.specializes {
        label.push_str(" (specializes)");
    }
    if let (true, Some(store)) = (opts.show_stores, &t.store) {
        label.push_str("\nstore");
        if let Some(ty) = store.value_type {
            write!(label, ": {ty}").unwrap();
        }
        if let Some(v) = &store.initial {
            write!(label, " = {v}").unwrap();
        }
    }
    writeln!(out, "{pad}    label={};", quote(&label)).unwrap();
    for id in &t.actions {
        let action = model.action(id).expect("owner lists only known actions");
        let mut label = action.kind.label().to_owned();
        if !action.has_default_name() {
            label.push('\n');
            label.push_str(&action.name);
        }
        writeln!(out, "{pad}    {} [label={}];", quote(id.as_str()), quote(&label)).unwrap();
    }
    for child in &t.subthimacs {
        cluster(model, child, depth + 1, opts, out);
    }
    writeln!(out, "{pad}}}").unwrap();
}
