//! Resolves the syntax tree against the thimac hierarchy and builds the
//! model types.

use std::collections::{BTreeMap, BTreeSet};

use super::lexer::Pos;
use super::parser::{BehaviorAst, EventAst, ExprAst, Item, Member, PathRef, ThimacAst};
use super::{Document, ParseError, ParseErrorKind};
use crate::eventing::{build_behavior, eventize, BehavioralModel, ChronologyEdge, EventError, EventId};
use crate::expr::{BinaryOp, Expr, Guard};
use crate::model::{build_model, Action, ActionId, ActionKind, Edge, Store, StaticModel, ThimacDecl, ThimacPath};

use ParseErrorKind::{Invalid, Redeclared, Unresolved};

const START: Pos = Pos { line: 1, column: 1 };

struct PendingAction {
    action: Action,
    update: Option<(PathRef, ExprAst)>,
    pos: Pos,
}

pub(crate) fn lower(items: Vec<Item>) -> Result<Document, ParseError> {
    let mut roots = Vec::new();
    let mut pending = Vec::new();
    let mut flows = Vec::new();
    let mut triggers = Vec::new();
    let mut events = Vec::new();
    let mut behavior: Option<(BehaviorAst, Pos)> = None;
    let mut root_names = BTreeSet::new();

    for item in items {
        match item {
            Item::Thimac(t) => {
                if !root_names.insert(t.name.text.clone()) {
                    return Err(ParseError::at(
                        Redeclared,
                        t.name.pos,
                        format!("thimac `{}` is already declared", t.name.text),
                    ));
                }
                let path = ThimacPath::root(&t.name.text);
                roots.push(lower_thimac(t, path, &mut pending)?);
            }
            Item::Flow(chain) => flows.push(chain),
            Item::Trigger(chain) => triggers.push(chain),
            Item::Event(e) => events.push(e),
            Item::Behavior(b, pos) => {
                if behavior.is_some() {
                    return Err(ParseError::at(Redeclared, pos, "only one behavior block is allowed"));
                }
                behavior = Some((b, pos));
            }
        }
    }

    let skeleton = build_model(roots.clone(), vec![], vec![], vec![])
        .map_err(|e| ParseError::at(Invalid, START, e.to_string()))?;

    let mut actions = Vec::with_capacity(pending.len());
    for p in pending {
        let mut action = p.action;
        if let Some((target, expr)) = p.update {
            if action.kind != ActionKind::Process {
                return Err(ParseError::at(
                    Invalid,
                    p.pos,
                    format!("only a process can carry an update, not `{}`", action.kind.keyword()),
                ));
            }
            let scope = action.owner.clone();
            let target = resolve_store(&skeleton, Some(&scope), &target)?;
            let expr = lower_expr(&skeleton, Some(&scope), &expr)?;
            action = action.with_update(target, expr);
        }
        actions.push(action);
    }

    let index: BTreeSet<ActionId> = actions.iter().map(Action::id).collect();
    let flow_edges = lower_edges(&index, &flows, "flow")?;
    let trigger_edges = lower_edges(&index, &triggers, "trigger")?;
    let flow_set: BTreeSet<&Edge> = flow_edges.iter().map(|(e, _)| e).collect();
    if let Some((e, pos)) = trigger_edges.iter().find(|(e, _)| flow_set.contains(e)) {
        return Err(ParseError::at(
            Invalid,
            *pos,
            format!("trigger {} --> {} duplicates a flow", e.from, e.to),
        ));
    }

    let model = build_model(
        roots,
        actions,
        flow_edges.into_iter().map(|(e, _)| e).collect(),
        trigger_edges.into_iter().map(|(e, _)| e).collect(),
    )
    .map_err(|e| ParseError::at(Invalid, START, e.to_string()))?;

    let (regions, event_guards) = lower_events(&model, &events)?;
    let behavior = match behavior {
        Some((b, _)) => Some(lower_behavior(&model, &regions, event_guards, b)?),
        None => {
            if let Some((id, (_, pos))) = event_guards.into_iter().next() {
                return Err(no_incoming(&id, pos));
            }
            None
        }
    };
    Ok(Document {
        model,
        events: regions,
        behavior,
    })
}

fn no_incoming(id: &EventId, pos: Pos) -> ParseError {
    ParseError::at(
        Invalid,
        pos,
        format!("event {id} has a guard but no incoming behavior edge to attach it to"),
    )
}

fn lower_thimac(t: ThimacAst, path: ThimacPath, pending: &mut Vec<PendingAction>) -> Result<ThimacDecl, ParseError> {
    let mut decl = ThimacDecl::new(&t.name.text);
    decl.specializes = t.specializes;
    let mut children = BTreeSet::new();
    let mut action_names = BTreeSet::new();
    let mut nested = Vec::new();
    for member in t.members {
        match member {
            Member::Store {
                value_type,
                initial,
                pos,
            } => {
                if decl.store.is_some() {
                    return Err(ParseError::at(
                        Redeclared,
                        pos,
                        format!("thimac {path} already has a store"),
                    ));
                }
                if let (Some(ty), Some(v)) = (value_type, &initial) {
                    if v.value_type() != ty {
                        return Err(ParseError::at(
                            Invalid,
                            pos,
                            format!("store of type {ty} cannot start with {} value {v}", v.value_type()),
                        ));
                    }
                }
                decl.store = Some(Store { value_type, initial });
            }
            Member::Action {
                kind,
                name,
                update,
                pos,
            } => {
                let action = match &name {
                    Some(n) => Action::named(path.clone(), &n.text, kind),
                    None => Action::new(path.clone(), kind),
                };
                if !action_names.insert(action.name.clone()) {
                    return Err(ParseError::at(
                        Redeclared,
                        name.map_or(pos, |n| n.pos),
                        format!("action {} is already declared", action.id()),
                    ));
                }
                pending.push(PendingAction { action, update, pos });
            }
            Member::Thimac(child) => {
                if !children.insert(child.name.text.clone()) {
                    return Err(ParseError::at(
                        Redeclared,
                        child.name.pos,
                        format!("thimac {path} already contains `{}`", child.name.text),
                    ));
                }
                nested.push(child);
            }
        }
    }
    // Children are lowered after the parent's own actions so that actions
    // end up in pre-order of their owners.
    for child in nested {
        let child_path = path.child(&child.name.text);
        decl.children.push(lower_thimac(child, child_path, pending)?);
    }
    Ok(decl)
}

/// Resolves a store path, relative to `scope` when given, else absolute.
fn resolve_store(model: &StaticModel, scope: Option<&ThimacPath>, path: &PathRef) -> Result<ThimacPath, ParseError> {
    let resolved = match scope {
        Some(scope) => model.resolve_relative(scope, &path.segments),
        None => {
            let p = ThimacPath::new(path.segments.clone());
            model.thimac(&p).map(|_| p)
        }
    };
    let Some(resolved) = resolved else {
        return Err(ParseError::at(
            Unresolved,
            path.pos,
            format!("`{}` is not a thimac", path.dotted()),
        ));
    };
    if model.store(&resolved).is_none() {
        return Err(ParseError::at(
            Invalid,
            path.pos,
            format!("thimac {resolved} has no store"),
        ));
    }
    Ok(resolved)
}

fn lower_expr(model: &StaticModel, scope: Option<&ThimacPath>, e: &ExprAst) -> Result<Expr, ParseError> {
    Ok(match e {
        ExprAst::Lit(v) => Expr::Lit(v.clone()),
        ExprAst::Store(p) => Expr::Store(resolve_store(model, scope, p)?),
        ExprAst::Unary(op, inner) => Expr::unary(*op, lower_expr(model, scope, inner)?),
        ExprAst::Binary(op, l, r) => Expr::binary(*op, lower_expr(model, scope, l)?, lower_expr(model, scope, r)?),
    })
}

pub(crate) fn lower_guard(model: &StaticModel, e: &ExprAst) -> Result<Expr, ParseError> {
    lower_expr(model, None, e)
}

fn lower_edges(
    index: &BTreeSet<ActionId>,
    chains: &[Vec<PathRef>],
    kind: &str,
) -> Result<Vec<(Edge, Pos)>, ParseError> {
    let mut out: Vec<(Edge, Pos)> = Vec::new();
    let mut seen = BTreeSet::new();
    for chain in chains {
        let ids = chain
            .iter()
            .map(|p| {
                let id = ActionId::from(p.dotted().as_str());
                if index.contains(&id) {
                    Ok((id, p.pos))
                } else {
                    Err(ParseError::at(Unresolved, p.pos, format!("`{id}` is not an action")))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        for pair in ids.windows(2) {
            let edge = Edge::new(pair[0].0.clone(), pair[1].0.clone());
            if !seen.insert(edge.clone()) {
                return Err(ParseError::at(
                    Redeclared,
                    pair[0].1,
                    format!("{kind} {} -> {} is already declared", edge.from, edge.to),
                ));
            }
            out.push((edge, pair[0].1));
        }
    }
    Ok(out)
}

type EventGuards = BTreeMap<EventId, (Expr, Pos)>;

fn lower_events(model: &StaticModel, events: &[EventAst]) -> Result<(Vec<crate::eventing::EventRegion>, EventGuards), ParseError> {
    let mut regions = Vec::new();
    let mut guards = BTreeMap::new();
    let mut ids = BTreeSet::new();
    for e in events {
        if !ids.insert(e.id.text.clone()) {
            return Err(ParseError::at(
                Redeclared,
                e.id.pos,
                format!("event {} is already declared", e.id.text),
            ));
        }
        for p in &e.covers {
            if model.action(&ActionId::from(p.dotted().as_str())).is_none() {
                return Err(ParseError::at(
                    Unresolved,
                    p.pos,
                    format!("event {} covers `{}`, which is not an action", e.id.text, p.dotted()),
                ));
            }
        }
        let covers = e.covers.iter().map(|p| ActionId::from(p.dotted().as_str()));
        let label = e.label.clone().unwrap_or_default();
        let mut region = eventize(model, &e.id.text, &label, covers)
            .map_err(|err| event_error(err, e.id.pos))?
            .region;
        if let Some(input) = &e.input {
            let path = resolve_store(model, None, input)?;
            region = region.with_input(model, path).map_err(|err| event_error(err, input.pos))?;
        }
        if let Some((g, pos)) = &e.guard {
            guards.insert(region.id.clone(), (lower_guard(model, g)?, *pos));
        }
        regions.push(region);
    }
    Ok((regions, guards))
}

fn event_error(err: EventError, pos: Pos) -> ParseError {
    let kind = match err {
        EventError::UnknownActionPath { .. } | EventError::UnknownEvent(_) => Unresolved,
        EventError::DuplicateEventId(_) | EventError::DuplicateEdge { .. } => Redeclared,
        _ => Invalid,
    };
    ParseError::at(kind, pos, err.to_string())
}

fn lower_behavior(
    model: &StaticModel,
    regions: &[crate::eventing::EventRegion],
    mut event_guards: EventGuards,
    b: BehaviorAst,
) -> Result<BehavioralModel, ParseError> {
    let declared: BTreeSet<&str> = regions.iter().map(|r| r.id.as_str()).collect();
    let known = |name: &super::parser::Name| -> Result<EventId, ParseError> {
        if declared.contains(name.text.as_str()) {
            Ok(EventId::new(&name.text))
        } else {
            Err(ParseError::at(
                Unresolved,
                name.pos,
                format!("event {} is not declared", name.text),
            ))
        }
    };
    let mut edges = Vec::new();
    let mut first_pos = BTreeMap::new();
    for edge in &b.edges {
        let from = known(&edge.from)?;
        let to = known(&edge.to)?;
        let guard = edge.guard.as_ref().map(|(g, _)| lower_guard(model, g)).transpose()?;
        if first_pos.insert((from.clone(), to.clone()), edge.from.pos).is_some() {
            return Err(ParseError::at(
                Redeclared,
                edge.from.pos,
                format!("behavior edge {from} -> {to} is already declared"),
            ));
        }
        edges.push(ChronologyEdge {
            from,
            to,
            guard: guard.map(Guard::new),
        });
    }
    for (id, (g, pos)) in std::mem::take(&mut event_guards) {
        let mut attached = false;
        for edge in edges.iter_mut().filter(|e| e.to == id) {
            let merged = match edge.guard.take() {
                Some(existing) => Expr::binary(BinaryOp::And, existing.expr, g.clone()),
                None => g.clone(),
            };
            edge.guard = Some(Guard::new(merged));
            attached = true;
        }
        if !attached {
            return Err(no_incoming(&id, pos));
        }
    }
    let edge_pos = |from: &EventId| -> Pos {
        first_pos
            .iter()
            .find(|((f, _), _)| f == from)
            .map(|(_, p)| *p)
            .unwrap_or(START)
    };
    let behavior = build_behavior(model, regions, &edges).map_err(|err| {
        let pos = match &err {
            EventError::RepeatedGuard { from, .. } | EventError::GuardPathUnstored { from, .. } => edge_pos(from),
            _ => START,
        };
        event_error(err, pos)
    })?;
    let terminals = b.terminals.iter().map(&known).collect::<Result<Vec<_>, _>>()?;
    let repeatable = b.repeatable.iter().map(&known).collect::<Result<Vec<_>, _>>()?;
    behavior
        .with_terminals(terminals)
        .and_then(|b| b.with_repeatable(repeatable))
        .map_err(|err| event_error(err, START))
}
