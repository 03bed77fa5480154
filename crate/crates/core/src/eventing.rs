//! Event regions over a static model and the chronology that orders them.
//!
//! A region is a subdiagram of the static model; it carries no timestamp.
//! Logical time only appears when the simulator fires it. Chronology edges
//! mean "fires no earlier than", so the behavioral model is a partial order
//! rather than a schedule.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use petgraph::unionfind::UnionFind;
use thiserror::Error;

use crate::expr::Guard;
use crate::model::{is_identifier, ActionId, Edge, StaticModel, ThimacPath};
use crate::report::{Code, Diagnostic, ValidationReport};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(String);

impl EventId {
    pub fn new(id: &str) -> Self {
        EventId(id.to_owned())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for EventId {
    fn from(s: &str) -> Self {
        EventId::new(s)
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRegion {
    pub id: EventId,
    pub label: String,
    pub covers: BTreeSet<ActionId>,
    /// Static flows with both endpoints covered.
    pub flows_within: Vec<Edge>,
    /// Static triggers with both endpoints covered.
    pub triggers_within: Vec<Edge>,
    /// Store that receives the event's input payload when it fires. An event
    /// with an input cannot fire without a payload.
    pub input: Option<ThimacPath>,
}

impl EventRegion {
    pub fn with_input(mut self, model: &StaticModel, path: ThimacPath) -> Result<Self, EventError> {
        if model.store(&path).is_none() {
            return Err(EventError::InputPathUnstored {
                event: self.id,
                path,
            });
        }
        self.input = Some(path);
        Ok(self)
    }

    /// Whether the covered actions form one piece when flows and triggers
    /// inside the region are read as undirected links.
    pub fn is_connected(&self) -> bool {
        let index: BTreeMap<&ActionId, usize> =
            self.covers.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let mut uf = UnionFind::<usize>::new(index.len());
        for e in self.flows_within.iter().chain(&self.triggers_within) {
            uf.union(index[&e.from], index[&e.to]);
        }
        let mut labels = uf.into_labeling();
        labels.sort_unstable();
        labels.dedup();
        labels.len() <= 1
    }

    pub fn covers_action(&self, id: &ActionId) -> bool {
        self.covers.contains(id)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EventError {
    #[error("`{0}` is not a valid event id")]
    InvalidId(String),
    #[error("event {event} covers `{path}`, which is not an action")]
    UnknownActionPath { event: EventId, path: ActionId },
    #[error("event {0} covers no actions")]
    EmptyCover(EventId),
    #[error("event {event} takes input into `{path}`, which has no store")]
    InputPathUnstored { event: EventId, path: ThimacPath },
    #[error("event {0} is declared more than once")]
    DuplicateEventId(EventId),
    #[error("event {0} is not declared")]
    UnknownEvent(EventId),
    #[error("chronology edge {from} -> {to} is declared more than once")]
    DuplicateEdge { from: EventId, to: EventId },
    #[error("guard on {from} -> {to} reads `{path}`, which has no store")]
    GuardPathUnstored {
        from: EventId,
        to: EventId,
        path: ThimacPath,
    },
    #[error("guarded edges out of {from} repeat the guard `{guard}`")]
    RepeatedGuard { from: EventId, guard: String },
}

/// A region plus any non-fatal findings about it.
#[derive(Debug, Clone, PartialEq)]
pub struct Eventized {
    pub region: EventRegion,
    pub warnings: Vec<Diagnostic>,
}

/// Selects a region of `model` and names it as an event.
pub fn eventize<I, A>(model: &StaticModel, id: &str, label: &str, covers: I) -> Result<Eventized, EventError>
where
    I: IntoIterator<Item = A>,
    A: Into<ActionId>,
{
    let event = EventId::new(id);
    if !is_identifier(id) {
        return Err(EventError::InvalidId(id.to_owned()));
    }
    let covers: BTreeSet<ActionId> = covers.into_iter().map(Into::into).collect();
    if covers.is_empty() {
        return Err(EventError::EmptyCover(event));
    }
    if let Some(missing) = covers.iter().find(|a| model.action(a).is_none()) {
        return Err(EventError::UnknownActionPath {
            event,
            path: missing.clone(),
        });
    }
    let within = |edges: &[Edge]| -> Vec<Edge> {
        edges
            .iter()
            .filter(|e| covers.contains(&e.from) && covers.contains(&e.to))
            .cloned()
            .collect()
    };
    let region = EventRegion {
        flows_within: within(model.flows()),
        triggers_within: within(model.triggers()),
        id: event,
        label: label.to_owned(),
        covers,
        input: None,
    };
    let mut warnings = Vec::new();
    if !region.is_connected() {
        warnings.push(disconnected_warning(&region));
    }
    Ok(Eventized { region, warnings })
}

fn disconnected_warning(region: &EventRegion) -> Diagnostic {
    Diagnostic::warning(
        Code::DisconnectedRegion,
        region.id.to_string(),
        "event region is not connected",
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChronologyEdge {
    pub from: EventId,
    pub to: EventId,
    pub guard: Option<Guard>,
}

impl ChronologyEdge {
    pub fn new(from: &str, to: &str) -> Self {
        ChronologyEdge {
            from: from.into(),
            to: to.into(),
            guard: None,
        }
    }

    pub fn guarded(from: &str, to: &str, guard: Guard) -> Self {
        ChronologyEdge {
            from: from.into(),
            to: to.into(),
            guard: Some(guard),
        }
    }
}

/// Directed graph over event regions; cycles are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct BehavioralModel {
    pub events: Vec<EventRegion>,
    pub edges: Vec<ChronologyEdge>,
    /// Explicit terminal events. Empty means every sink is terminal.
    pub terminals: BTreeSet<EventId>,
    /// Events allowed to fire more than once per run.
    pub repeatable: BTreeSet<EventId>,
}

/// Assembles a chronology. Inputs are not modified.
pub fn build_behavior(
    model: &StaticModel,
    events: &[EventRegion],
    edges: &[ChronologyEdge],
) -> Result<BehavioralModel, EventError> {
    let mut ids = BTreeSet::new();
    for e in events {
        if !ids.insert(&e.id) {
            return Err(EventError::DuplicateEventId(e.id.clone()));
        }
    }
    let mut pairs = BTreeSet::new();
    let mut guards_by_source: BTreeMap<&EventId, BTreeSet<String>> = BTreeMap::new();
    for edge in edges {
        for end in [&edge.from, &edge.to] {
            if !ids.contains(end) {
                return Err(EventError::UnknownEvent(end.clone()));
            }
        }
        if !pairs.insert((&edge.from, &edge.to)) {
            return Err(EventError::DuplicateEdge {
                from: edge.from.clone(),
                to: edge.to.clone(),
            });
        }
        if let Some(guard) = &edge.guard {
            if let Some(path) = guard.expr.paths().into_iter().find(|p| model.store(p).is_none()) {
                return Err(EventError::GuardPathUnstored {
                    from: edge.from.clone(),
                    to: edge.to.clone(),
                    path: path.clone(),
                });
            }
            let text = guard.to_string();
            if !guards_by_source.entry(&edge.from).or_default().insert(text.clone()) {
                return Err(EventError::RepeatedGuard {
                    from: edge.from.clone(),
                    guard: text,
                });
            }
        }
    }
    Ok(BehavioralModel {
        events: events.to_vec(),
        edges: edges.to_vec(),
        terminals: BTreeSet::new(),
        repeatable: BTreeSet::new(),
    })
}

impl BehavioralModel {
    pub fn with_terminals<I: IntoIterator<Item = EventId>>(mut self, ids: I) -> Result<Self, EventError> {
        for id in ids {
            self.require(&id)?;
            self.terminals.insert(id);
        }
        Ok(self)
    }

    pub fn with_repeatable<I: IntoIterator<Item = EventId>>(mut self, ids: I) -> Result<Self, EventError> {
        for id in ids {
            self.require(&id)?;
            self.repeatable.insert(id);
        }
        Ok(self)
    }

    fn require(&self, id: &EventId) -> Result<(), EventError> {
        if self.event(id).is_some() {
            Ok(())
        } else {
            Err(EventError::UnknownEvent(id.clone()))
        }
    }

    pub fn event(&self, id: &EventId) -> Option<&EventRegion> {
        self.events.iter().find(|e| &e.id == id)
    }

    pub fn incoming<'a>(&'a self, id: &'a EventId) -> impl Iterator<Item = &'a ChronologyEdge> + 'a {
        self.edges.iter().filter(move |e| &e.to == id)
    }

    pub fn outgoing<'a>(&'a self, id: &'a EventId) -> impl Iterator<Item = &'a ChronologyEdge> + 'a {
        self.edges.iter().filter(move |e| &e.from == id)
    }

    /// Events with no incoming chronology edges.
    pub fn entry_events(&self) -> Vec<&EventId> {
        self.events
            .iter()
            .map(|e| &e.id)
            .filter(|id| self.incoming(id).next().is_none())
            .collect()
    }

    /// Declared terminals, or every sink event when none are declared.
    pub fn terminal_events(&self) -> BTreeSet<EventId> {
        if !self.terminals.is_empty() {
            return self.terminals.clone();
        }
        self.events
            .iter()
            .map(|e| &e.id)
            .filter(|id| self.outgoing(id).next().is_none())
            .cloned()
            .collect()
    }

    pub fn is_repeatable(&self, id: &EventId) -> bool {
        self.repeatable.contains(id)
    }
}

/// Reports cycles and unreachable or disconnected events as warnings, and
/// dangling references as errors.
pub fn check_behavior(behavior: &BehavioralModel, model: &StaticModel) -> ValidationReport {
    let mut report = ValidationReport::default();
    let index: BTreeMap<&EventId, usize> = behavior
        .events
        .iter()
        .enumerate()
        .map(|(i, e)| (&e.id, i))
        .collect();

    for event in &behavior.events {
        for a in event.covers.iter().filter(|a| model.action(a).is_none()) {
            report.push(Diagnostic::error(
                Code::UnknownActionPath,
                event.id.to_string(),
                format!("covers unknown action {a}"),
            ));
        }
        if let Some(path) = event.input.as_ref().filter(|p| model.store(p).is_none()) {
            report.push(Diagnostic::error(
                Code::InputPathUnstored,
                event.id.to_string(),
                format!("input target {path} has no store"),
            ));
        }
        if !event.is_connected() {
            report.push(disconnected_warning(event));
        }
    }

    let mut graph = DiGraph::<usize, ()>::new();
    let nodes: Vec<_> = (0..behavior.events.len()).map(|i| graph.add_node(i)).collect();
    for edge in &behavior.edges {
        let location = format!("{} -> {}", edge.from, edge.to);
        let (from, to) = match (index.get(&edge.from), index.get(&edge.to)) {
            (Some(&f), Some(&t)) => (f, t),
            _ => {
                let missing = if index.contains_key(&edge.from) { &edge.to } else { &edge.from };
                report.push(Diagnostic::error(
                    Code::UnknownEvent,
                    location,
                    format!("event {missing} is not declared"),
                ));
                continue;
            }
        };
        graph.add_edge(nodes[from], nodes[to], ());
        if let Some(guard) = &edge.guard {
            for path in guard.expr.paths() {
                if model.store(path).is_none() {
                    report.push(Diagnostic::error(
                        Code::GuardPathUnstored,
                        location.clone(),
                        format!("guard reads {path}, which has no store"),
                    ));
                }
            }
        }
    }
    for id in behavior.terminals.iter().chain(&behavior.repeatable) {
        if !index.contains_key(id) {
            report.push(Diagnostic::error(
                Code::UnknownEvent,
                id.to_string(),
                format!("event {id} is not declared"),
            ));
        }
    }

    let mut sccs = tarjan_scc(&graph);
    for scc in &mut sccs {
        scc.sort_unstable();
    }
    sccs.sort();
    for scc in sccs {
        let looped = scc.len() > 1 || graph.contains_edge(scc[0], scc[0]);
        if looped {
            let names: Vec<&str> = scc.iter().map(|n| behavior.events[graph[*n]].id.as_str()).collect();
            report.push(Diagnostic::warning(
                Code::Cycle,
                names.join(","),
                "chronology contains a cycle",
            ));
        }
    }

    let mut reached = vec![false; behavior.events.len()];
    let mut queue: VecDeque<usize> = behavior
        .entry_events()
        .into_iter()
        .map(|id| index[id])
        .collect();
    for &i in &queue {
        reached[i] = true;
    }
    while let Some(i) = queue.pop_front() {
        for next in graph.neighbors(nodes[i]) {
            let j = graph[next];
            if !reached[j] {
                reached[j] = true;
                queue.push_back(j);
            }
        }
    }
    for (event, reached) in behavior.events.iter().zip(reached) {
        if !reached {
            report.push(Diagnostic::warning(
                Code::Unreachable,
                event.id.to_string(),
                "event is not reachable from any entry event",
            ));
        }
    }
    report
}
