//! Oracles shared by the property tests and the acceptance run.

use std::collections::{BTreeMap, BTreeSet};

use tmkit::dsl::{parse_str, Document};
use tmkit::eventing::EventId;
use tmkit::expr::Value;
use tmkit::model::{build_model, validate_static, Action, ActionKind, Edge, ThimacDecl, ThimacPath};
use tmkit::render::{emit_dot, RenderOptions};
use tmkit::report::Code;
use tmkit::sim::{init_world, simulate, simulate_observed, Trace, DEFAULT_MAX_STEPS};

use super::dot::parse_dot;

/// Builds a two-action model joined by one flow and reports whether
/// validation flags it as an illegal stage pair. Panics if anything else
/// is reported.
pub fn flags_illegal(from: ActionKind, to: ActionKind, same: bool) -> bool {
    let a = ThimacPath::root("A");
    let b = ThimacPath::root("B");
    let (first, second, roots) = if same {
        (
            Action::named(a.clone(), "first", from),
            Action::named(a, "second", to),
            vec![ThimacDecl::new("A")],
        )
    } else {
        (
            Action::new(a, from),
            Action::new(b, to),
            vec![ThimacDecl::new("A"), ThimacDecl::new("B")],
        )
    };
    let flow = Edge::new(first.id(), second.id());
    let model = build_model(roots, vec![first, second], vec![flow], vec![]).unwrap();
    let report = validate_static(&model);
    assert_eq!(report.errors().count(), usize::from(report.has(Code::IllegalStagePair)));
    report.has(Code::IllegalStagePair)
}

/// Checks all fifty (from, to, same thimac) cases; returns the failures.
pub fn legality_mismatches() -> Vec<String> {
    let mut bad = Vec::new();
    for from in ActionKind::ALL {
        for to in ActionKind::ALL {
            for same in [true, false] {
                if flags_illegal(from, to, same) == super::gen::legal(from, to, same) {
                    bad.push(format!("{from} -> {to} (same thimac: {same})"));
                }
            }
        }
    }
    bad
}

/// Runs a document with an observer and checks that the token count moves
/// only by the number of Create actions in each firing.
pub fn conserves_tokens(
    text: &str,
    fills: &BTreeMap<ThimacPath, Value>,
    inputs: &BTreeMap<EventId, Value>,
) -> Result<Trace, String> {
    let doc = parse_str(text).map_err(|e| e.to_string())?;
    let behavior = doc.behavior_or_default();
    let world = init_world(&doc.model, fills).map_err(|e| e.to_string())?;
    let mut before = world.token_count();
    let mut failure = None;
    let result = simulate_observed(&doc.model, &behavior, world, inputs, 50, &mut |w, entry| {
        let creates = entry
            .fired
            .iter()
            .filter(|a| doc.model.action(a).unwrap().kind == ActionKind::Create)
            .count();
        if w.token_count() != before + creates && failure.is_none() {
            failure = Some(format!("step {}: {} -> {} with {creates} creates", entry.step, before, w.token_count()));
        }
        before = w.token_count();
    })
    .map_err(|e| e.to_string())?;
    match failure {
        Some(f) => Err(f),
        None => Ok(result.trace),
    }
}

/// First firing of every behavioral edge's source comes no later than its
/// target's.
pub fn respects_chronology(doc: &Document, trace: &Trace) -> Result<(), String> {
    let behavior = doc.behavior_or_default();
    for edge in &behavior.edges {
        if let (Some(a), Some(b)) = (trace.first_step(&edge.from), trace.first_step(&edge.to)) {
            if a > b {
                return Err(format!("{} fired at {a}, after {} at {b}", edge.from, edge.to));
            }
        }
    }
    Ok(())
}

pub fn run_fixture(name: &str, fills: &[(&str, Value)], inputs: &[(&str, Value)]) -> (Document, Trace) {
    let doc = parse_str(&super::read_fixture(name)).unwrap();
    let fills = fills.iter().map(|(p, v)| (ThimacPath::parse(p).unwrap(), v.clone())).collect();
    let inputs = inputs.iter().map(|(e, v)| (EventId::new(e), v.clone())).collect();
    let world = init_world(&doc.model, &fills).unwrap();
    let result = simulate(&doc.model, &doc.behavior_or_default(), world, &inputs, DEFAULT_MAX_STEPS).unwrap();
    (doc, result.trace)
}

/// One representative run per corpus model, with every bank transaction.
pub fn corpus_runs() -> Vec<(Document, Trace)> {
    let balances = [
        ("BankAccount.Balance.CheckingBalance", Value::Number(100.0)),
        ("BankAccount.Balance.SavingsBalance", Value::Number(100.0)),
    ];
    vec![
        run_fixture("beef.tm", &[], &[]),
        run_fixture("stack.tm", &[], &[("push", Value::Number(1.0))]),
        run_fixture("human.tm", &[("Human.Weight", Value::Number(150.0))], &[]),
        run_fixture("person.tm", &[], &[("setName", Value::Text("Bob".into()))]),
        run_fixture("bank.tm", &balances, &[("E5", Value::Number(30.0))]),
        run_fixture("bank.tm", &balances, &[("E6", Value::Number(130.0))]),
        run_fixture("bank.tm", &balances, &[("E7", Value::Number(150.0))]),
        run_fixture("bank.tm", &balances, &[("E8", Value::Number(50.0))]),
    ]
}

fn pairs(edges: &[Edge]) -> BTreeSet<(String, String)> {
    edges.iter().map(|e| (e.from.to_string(), e.to.to_string())).collect()
}

/// Node and edge counts match the model and the dashed edges are exactly
/// the triggers.
pub fn static_view_is_faithful(doc: &Document) -> Result<(), String> {
    let dot = emit_dot(&doc.model, None, &RenderOptions::default());
    let g = parse_dot(&dot)?;
    let m = &doc.model;
    if g.nodes.len() != m.actions().len() {
        return Err(format!("{} nodes for {} actions", g.nodes.len(), m.actions().len()));
    }
    if g.edges.len() != m.flows().len() + m.triggers().len() {
        return Err(format!(
            "{} edges for {} flows and {} triggers",
            g.edges.len(),
            m.flows().len(),
            m.triggers().len()
        ));
    }
    let dashed = g.dashed_edges();
    let dashed_set: BTreeSet<_> = dashed.iter().cloned().collect();
    if dashed_set.len() != dashed.len() || dashed_set != pairs(m.triggers()) {
        return Err("dashed edges differ from triggers".into());
    }
    if g.solid_edges().into_iter().collect::<BTreeSet<_>>() != pairs(m.flows()) {
        return Err("solid edges differ from flows".into());
    }
    if g.clusters.len() != m.thimacs().len() {
        return Err(format!("{} clusters for {} thimacs", g.clusters.len(), m.thimacs().len()));
    }
    Ok(())
}
