//! Executes a chronology over a static model.
//!
//! Firing proceeds in rounds. A round takes the events enabled at its start
//! and fires them in event-id order, re-checking each one just before it
//! fires. Every firing is one logical step.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::cmp::Reverse;
use std::fmt;

use thiserror::Error;

use crate::eventing::{BehavioralModel, EventId, EventRegion};
use crate::expr::Value;
use crate::model::{ActionId, ActionKind, Edge, StaticModel, ThimacPath};

mod trace;
mod world;

pub use trace::{trace_to_json, trace_to_text};
pub use world::{evaluate_guard, init_world, GuardEvalError, Location, ThingToken, WorldError, WorldState};

pub const DEFAULT_MAX_STEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct StoreDelta {
    pub path: ThimacPath,
    pub old: Option<Value>,
    pub new: Option<Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub step: u64,
    pub event: EventId,
    /// Covered actions in execution order.
    pub fired: Vec<ActionId>,
    pub deltas: Vec<StoreDelta>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Completed,
    StepBudgetExhausted,
    Stuck,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Completed => "Completed",
            Outcome::StepBudgetExhausted => "StepBudgetExhausted",
            Outcome::Stuck => "Stuck",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
    pub outcome: Outcome,
}

impl Trace {
    pub fn event_sequence(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.event.as_str()).collect()
    }

    pub fn first_step(&self, id: &EventId) -> Option<u64> {
        self.entries.iter().find(|e| &e.event == id).map(|e| e.step)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub trace: Trace,
    pub world: WorldState,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("event {0} needs an input payload but none was given")]
    MissingInput(EventId),
    #[error("input given for {0}, which does not take one")]
    UnexpectedInput(EventId),
    #[error("guard on {from} -> {to}: {error}")]
    GuardEval {
        from: EventId,
        to: EventId,
        error: GuardEvalError,
    },
    #[error("update in {action}: {error}")]
    UpdateEval { action: ActionId, error: GuardEvalError },
    #[error("guards out of {from} hold for more than one successor: {}", join(.to))]
    NonExclusiveGuards { from: EventId, to: Vec<EventId> },
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("maximum step count must be at least 1")]
    ZeroBudget,
}

fn join(ids: &[EventId]) -> String {
    ids.iter().map(EventId::as_str).collect::<Vec<_>>().join(", ")
}

impl SimError {
    /// Short name used in command-line output.
    pub fn name(&self) -> &'static str {
        match self {
            SimError::MissingInput(_) => "MissingInput",
            SimError::UnexpectedInput(_) => "UnexpectedInput",
            SimError::GuardEval { .. } => "GuardEvalError",
            SimError::UpdateEval { .. } => "UpdateEvalError",
            SimError::NonExclusiveGuards { .. } => "NonExclusiveGuards",
            SimError::World(_) => "WorldError",
            SimError::ZeroBudget => "InvalidBudget",
        }
    }
}

pub fn simulate(
    model: &StaticModel,
    behavior: &BehavioralModel,
    world: WorldState,
    inputs: &BTreeMap<EventId, Value>,
    max_steps: usize,
) -> Result<SimResult, SimError> {
    simulate_observed(model, behavior, world, inputs, max_steps, &mut |_, _| {})
}

/// Like [`simulate`], calling `observer` after every firing with the world
/// as it stands afterwards.
pub fn simulate_observed(
    model: &StaticModel,
    behavior: &BehavioralModel,
    world: WorldState,
    inputs: &BTreeMap<EventId, Value>,
    max_steps: usize,
    observer: &mut dyn FnMut(&WorldState, &TraceEntry),
) -> Result<SimResult, SimError> {
    if max_steps == 0 {
        return Err(SimError::ZeroBudget);
    }
    for id in inputs.keys() {
        if behavior.event(id).is_none_or(|e| e.input.is_none()) {
            return Err(SimError::UnexpectedInput(id.clone()));
        }
    }
    let mut run = Run::new(model, behavior, world, inputs);
    let mut entries = Vec::new();
    let outcome = loop {
        let round = run.enabled_set()?;
        if round.is_empty() {
            break run.finish()?;
        }
        let mut exhausted = false;
        for id in round {
            if run.status(id)? != Status::Enabled {
                continue;
            }
            if entries.len() >= max_steps {
                exhausted = true;
                break;
            }
            let entry = run.fire(id)?;
            observer(&run.world, &entry);
            entries.push(entry);
        }
        if exhausted {
            break Outcome::StepBudgetExhausted;
        }
    };
    Ok(SimResult {
        trace: Trace { entries, outcome },
        world: run.world,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Enabled,
    /// Everything holds except that the input payload is missing.
    NeedsInput,
    Blocked,
}

struct Run<'a> {
    model: &'a StaticModel,
    behavior: &'a BehavioralModel,
    world: WorldState,
    inputs: &'a BTreeMap<EventId, Value>,
    fired: BTreeMap<&'a EventId, usize>,
    /// Trigger-gated events and whether their trigger has fired.
    pending: BTreeMap<&'a EventId, bool>,
    /// For each trigger source, the events gated by it.
    gates: BTreeMap<&'a ActionId, Vec<&'a EventId>>,
    /// Event ids in firing priority order.
    order: Vec<&'a EventId>,
}

impl<'a> Run<'a> {
    fn new(
        model: &'a StaticModel,
        behavior: &'a BehavioralModel,
        world: WorldState,
        inputs: &'a BTreeMap<EventId, Value>,
    ) -> Self {
        let mut gates: BTreeMap<&ActionId, Vec<&EventId>> = BTreeMap::new();
        let mut pending = BTreeMap::new();
        for event in &behavior.events {
            for t in model.triggers() {
                if event.covers.contains(&t.to) && !event.covers.contains(&t.from) {
                    let list = gates.entry(&t.from).or_default();
                    if !list.contains(&&event.id) {
                        list.push(&event.id);
                    }
                    pending.insert(&event.id, false);
                }
            }
        }
        let mut order: Vec<&EventId> = behavior.events.iter().map(|e| &e.id).collect();
        order.sort();
        Run {
            model,
            behavior,
            world,
            inputs,
            fired: BTreeMap::new(),
            pending,
            gates,
            order,
        }
    }

    fn region(&self, id: &EventId) -> &'a EventRegion {
        self.behavior.event(id).expect("ids come from the behavior")
    }

    fn guard_holds(&self, edge: &crate::eventing::ChronologyEdge) -> Result<bool, SimError> {
        match &edge.guard {
            None => Ok(true),
            Some(g) => evaluate_guard(g, &self.world).map_err(|error| SimError::GuardEval {
                from: edge.from.clone(),
                to: edge.to.clone(),
                error,
            }),
        }
    }

    fn status(&self, id: &EventId) -> Result<Status, SimError> {
        if self.fired.contains_key(id) && !self.behavior.is_repeatable(id) {
            return Ok(Status::Blocked);
        }
        for edge in self.behavior.incoming(id) {
            if !self.fired.contains_key(&edge.from) || !self.guard_holds(edge)? {
                return Ok(Status::Blocked);
            }
        }
        if self.pending.get(id) == Some(&false) {
            return Ok(Status::Blocked);
        }
        if self.region(id).input.is_some() && !self.inputs.contains_key(id) {
            return Ok(Status::NeedsInput);
        }
        Ok(Status::Enabled)
    }

    fn check_exclusive(&self) -> Result<(), SimError> {
        for source in self.fired.keys() {
            let mut holding = Vec::new();
            let mut guarded = 0;
            for edge in self.behavior.outgoing(source).filter(|e| e.guard.is_some()) {
                guarded += 1;
                if self.guard_holds(edge)? {
                    holding.push(edge.to.clone());
                }
            }
            if guarded > 1 && holding.len() > 1 {
                return Err(SimError::NonExclusiveGuards {
                    from: (*source).clone(),
                    to: holding,
                });
            }
        }
        Ok(())
    }

    fn enabled_set(&self) -> Result<Vec<&'a EventId>, SimError> {
        self.check_exclusive()?;
        let mut out = Vec::new();
        for &id in &self.order {
            if self.status(id)? == Status::Enabled {
                out.push(id);
            }
        }
        Ok(out)
    }

    fn finish(&self) -> Result<Outcome, SimError> {
        let terminals = self.behavior.terminal_events();
        if terminals.iter().any(|t| self.fired.contains_key(t)) {
            return Ok(Outcome::Completed);
        }
        for &id in &self.order {
            if self.status(id)? == Status::NeedsInput {
                return Err(SimError::MissingInput(id.clone()));
            }
        }
        Ok(Outcome::Stuck)
    }

    /// Where a thing arriving at `action` comes to rest. Things created in a
    /// stored thimac sit in its store.
    fn location(&self, action: &ActionId) -> Location {
        let a = self.model.action(action).expect("covered actions exist");
        if a.kind == ActionKind::Create && self.model.store(&a.owner).is_some() {
            Location::Store(a.owner.clone())
        } else {
            Location::Action(action.clone())
        }
    }

    fn fire(&mut self, id: &'a EventId) -> Result<TraceEntry, SimError> {
        let region = self.region(id);
        let mut deltas = Vec::new();
        if let Some(path) = &region.input {
            let payload = self.inputs[id].clone();
            let store = self.model.store(path).expect("inputs target stores");
            world::check_type(path, store.effective_type(), &payload)?;
            deltas.push(self.write(path, Some(payload)));
        }

        let order = execution_order(self.model, region);
        for action_id in &order {
            // A thing arriving at an action comes from wherever the static
            // flows into it start, even outside the region.
            for flow in self.model.flows().iter().filter(|f| &f.to == action_id) {
                let from = self.location(&flow.from);
                let to = self.location(action_id);
                for token in self.world.tokens.iter_mut().filter(|t| t.location == from) {
                    token.location = to.clone();
                }
            }
            let action = self.model.action(action_id).expect("covered actions exist");
            match action.kind {
                ActionKind::Create => {
                    let value = self.world.value(&action.owner).cloned();
                    let token = ThingToken {
                        id: self.world.next_token,
                        value,
                        location: self.location(action_id),
                    };
                    self.world.next_token += 1;
                    self.world.tokens.push(token);
                }
                ActionKind::Process => {
                    if let Some(update) = &action.update {
                        let world = &self.world;
                        let value = update
                            .expr
                            .eval(&|p: &ThimacPath| world.lookup(p))
                            .map_err(|error| SimError::UpdateEval {
                                action: action_id.clone(),
                                error,
                            })?;
                        let store = self.model.store(&update.target).expect("updates target stores");
                        world::check_type(&update.target, store.effective_type(), &value)?;
                        deltas.push(self.write(&update.target, Some(value)));
                    }
                }
                ActionKind::Release | ActionKind::Transfer | ActionKind::Receive => {}
            }
            if let Some(gated) = self.gates.get(action_id) {
                for &g in gated {
                    self.pending.insert(g, true);
                }
            }
        }

        if let Some(p) = self.pending.get_mut(id) {
            *p = false;
        }
        *self.fired.entry(id).or_default() += 1;
        self.world.step += 1;
        Ok(TraceEntry {
            step: self.world.step,
            event: id.clone(),
            fired: order,
            deltas,
        })
    }

    fn write(&mut self, path: &ThimacPath, new: Option<Value>) -> StoreDelta {
        let old = self.world.stores.insert(path.clone(), new.clone()).flatten();
        StoreDelta {
            path: path.clone(),
            old,
            new,
        }
    }
}

/// Kahn's algorithm over the region's flows. Ties, and any actions left on
/// a cycle, go in action-table order.
fn execution_order(model: &StaticModel, region: &EventRegion) -> Vec<ActionId> {
    let rank = |a: &ActionId| model.action_position(a).expect("covered actions exist");
    let mut indegree: BTreeMap<&ActionId, usize> = region.covers.iter().map(|a| (a, 0)).collect();
    // Triggered actions wait for their trigger as well as their inputs.
    let edges: Vec<&Edge> = region.flows_within.iter().chain(&region.triggers_within).collect();
    for f in &edges {
        *indegree.get_mut(&f.to).expect("covered") += 1;
    }
    let mut ready: BinaryHeap<Reverse<(usize, &ActionId)>> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(a, _)| Reverse((rank(a), *a)))
        .collect();
    let mut done = BTreeSet::new();
    let mut out = Vec::with_capacity(region.covers.len());
    while let Some(Reverse((_, a))) = ready.pop() {
        done.insert(a);
        out.push(a.clone());
        for f in edges.iter().filter(|f| &f.from == a) {
            let d = indegree.get_mut(&f.to).expect("covered");
            *d -= 1;
            if *d == 0 {
                ready.push(Reverse((rank(&f.to), &f.to)));
            }
        }
    }
    let mut rest: Vec<&ActionId> = region.covers.iter().filter(|a| !done.contains(a)).collect();
    rest.sort_by_key(|a| rank(a));
    out.extend(rest.into_iter().cloned());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_str;

    fn run(text: &str, inputs: &[(&str, Value)], max: usize) -> Result<SimResult, SimError> {
        let doc = parse_str(text).unwrap();
        let world = init_world(&doc.model, &BTreeMap::new()).unwrap();
        let inputs = inputs.iter().map(|(k, v)| (EventId::new(k), v.clone())).collect();
        simulate(&doc.model, &doc.behavior_or_default(), world, &inputs, max)
    }

    const COUNTER: &str = "thimac C { store: number = 0; create; process = C := C + 1; }\n\
        flow C.create -> C.process;\n\
        event A covers { C.create, C.process };\n\
        event B covers { C.process };\n\
        behavior { A -> B; repeatable B; }";

    #[test]
    fn budget_is_checked_before_each_firing() {
        let r = run(COUNTER, &[], 3).unwrap();
        assert_eq!(r.trace.outcome, Outcome::StepBudgetExhausted);
        assert_eq!(r.trace.event_sequence(), ["A", "B", "B"]);
        assert_eq!(r.world.value(&ThimacPath::root("C")), Some(&Value::Number(3.0)));
        let steps: Vec<u64> = r.trace.entries.iter().map(|e| e.step).collect();
        assert_eq!(steps, [1, 2, 3]);
    }

    #[test]
    fn missing_input_and_stuck() {
        let text = "thimac C { store: number; receive; }\n\
            event A covers { C.receive } input C;";
        assert_eq!(run(text, &[], 10), Err(SimError::MissingInput("A".into())));
        let r = run(text, &[("A", Value::Number(4.0))], 10).unwrap();
        assert_eq!(r.trace.outcome, Outcome::Completed);
        assert_eq!(r.trace.entries[0].deltas[0].new, Some(Value::Number(4.0)));

        let stuck = "thimac C { create; process; }\n\
            event A covers { C.create }; event B covers { C.process };\n\
            behavior { A -> B guard false; }";
        assert_eq!(run(stuck, &[], 10).unwrap().trace.outcome, Outcome::Stuck);
    }

    #[test]
    fn overlapping_guards_are_rejected() {
        let text = "thimac C { store: number = 1; create; process; release; }\n\
            event A covers { C.create }; event B covers { C.process }; event D covers { C.release };\n\
            behavior { A -> B guard C > 0; A -> D guard C >= 0; }";
        assert!(matches!(run(text, &[], 10), Err(SimError::NonExclusiveGuards { .. })));
    }

    #[test]
    fn triggers_gate_their_target_events() {
        let text = "thimac A { create; } thimac B { create; }\n\
            trigger A.create --> B.create;\n\
            event EB covers { B.create }; event EA covers { A.create };";
        let r = run(text, &[], 10).unwrap();
        assert_eq!(r.trace.event_sequence(), ["EA", "EB"]);
    }

    #[test]
    fn tokens_follow_flows() {
        let text = "thimac A { create; release; transfer; } thimac B { transfer; receive; }\n\
            flow A.create -> A.release -> A.transfer -> B.transfer -> B.receive;\n\
            event E covers { A.create, A.release, A.transfer, B.transfer, B.receive };";
        let r = run(text, &[], 10).unwrap();
        assert_eq!(r.world.tokens.len(), 1);
        assert_eq!(r.world.tokens[0].location, Location::Action("B.receive".into()));
        assert_eq!(r.trace.entries[0].fired.first().unwrap().as_str(), "A.create");
    }
}
