//! Random inputs for the property tests.

use std::collections::BTreeSet;
use std::fmt::Write;

use proptest::prelude::*;
use tmkit::expr::ValueType;
use tmkit::model::ActionKind;
use tmkit::uml::{ClassDef, ClassModel};

/// Legal flow pairs, written out independently of the library.
pub fn legal(from: ActionKind, to: ActionKind, same_thimac: bool) -> bool {
    use ActionKind::*;
    let inside = [
        (Transfer, Receive),
        (Receive, Process),
        (Receive, Release),
        (Process, Release),
        (Process, Create),
        (Create, Release),
        (Create, Process),
        (Release, Transfer),
    ];
    if same_thimac {
        inside.contains(&(from, to))
    } else {
        (from, to) == (Transfer, Transfer)
    }
}

const CLASS_NAMES: [&str; 6] = ["Human", "Account", "Savings", "Stack", "Order", "Grill"];
const ATTRIBUTES: [&str; 7] = ["name", "weight", "owner", "balance", "gender", "colour", "size"];
const METHODS: [&str; 7] = ["eat", "deposit", "withdrawal", "open", "close", "run", "print"];

fn members(pool: &'static [&'static str]) -> impl Strategy<Value = Vec<&'static str>> {
    proptest::sample::subsequence(pool, 0..=5).prop_shuffle()
}

fn value_type() -> impl Strategy<Value = ValueType> {
    proptest::sample::select(ValueType::ALL.to_vec())
}

fn class_body() -> impl Strategy<Value = (Vec<(&'static str, ValueType)>, Vec<&'static str>, usize)> {
    (
        members(&ATTRIBUTES).prop_flat_map(|names| {
            let n = names.len();
            (Just(names), proptest::collection::vec(value_type(), n))
                .prop_map(|(names, types)| names.into_iter().zip(types).collect::<Vec<_>>())
        }),
        members(&METHODS),
        any::<usize>(),
    )
}

/// Class models with at most four classes, listed in pre-order of the
/// generalization forest (the order the TM conversion reads them back in).
pub fn class_model() -> impl Strategy<Value = ClassModel> {
    (
        proptest::sample::subsequence(&CLASS_NAMES[..], 1..=4).prop_shuffle(),
        proptest::collection::vec(class_body(), 4),
    )
        .prop_map(|(names, bodies)| {
            let mut classes: Vec<ClassDef> = Vec::new();
            // Ancestors of the previous class, nearest first. A new class
            // may extend any of them, or be a new root, and pre-order holds.
            let mut spine: Vec<usize> = Vec::new();
            for (i, (name, (attrs, methods, pick))) in names.iter().zip(bodies).enumerate() {
                let mut class = ClassDef::new(name);
                for (a, ty) in attrs {
                    class = class.attribute(a, ty);
                }
                for m in methods {
                    class = class.method(m);
                }
                let choice = pick % (spine.len() + 1);
                if choice < spine.len() {
                    let parent = spine[choice];
                    class.parent = Some(classes[parent].name.clone());
                    spine.drain(..choice);
                    spine.insert(0, i);
                } else {
                    spine.clear();
                    spine.push(i);
                }
                classes.push(class);
            }
            ClassModel { classes }
        })
}

#[derive(Debug, Clone)]
pub struct ProgramSpec {
    /// Per thimac: has a store, and which of the five actions it carries.
    pub thimacs: Vec<(bool, Vec<bool>)>,
    pub flow_picks: Vec<(usize, usize)>,
    pub trigger_picks: Vec<(usize, usize)>,
    pub event_of: Vec<usize>,
    pub chronology_picks: Vec<(usize, usize)>,
}

pub fn program_spec() -> impl Strategy<Value = ProgramSpec> {
    (
        proptest::collection::vec((any::<bool>(), proptest::collection::vec(any::<bool>(), 5)), 1..=4),
        proptest::collection::vec((0usize..20, 0usize..20), 0..24),
        proptest::collection::vec((0usize..20, 0usize..20), 0..6),
        proptest::collection::vec(0usize..5, 20),
        proptest::collection::vec((0usize..5, 0usize..5), 0..8),
    )
        .prop_map(|(thimacs, flow_picks, trigger_picks, event_of, chronology_picks)| ProgramSpec {
            thimacs,
            flow_picks,
            trigger_picks,
            event_of,
            chronology_picks,
        })
}

impl ProgramSpec {
    /// DSL text for the spec. Every process on a stored thimac increments
    /// its store; stores start at zero.
    pub fn render(&self) -> String {
        let mut actions: Vec<(usize, ActionKind)> = Vec::new();
        let mut text = String::new();
        for (i, (stored, kinds)) in self.thimacs.iter().enumerate() {
            let mut body = Vec::new();
            if *stored {
                body.push("store: number = 0;".to_owned());
            }
            for (k, kind) in ActionKind::ALL.iter().enumerate() {
                // Every thimac keeps at least one action.
                if kinds[k] || (k == 0 && !kinds.contains(&true)) {
                    actions.push((i, *kind));
                    if *kind == ActionKind::Process && *stored {
                        body.push(format!("process = T{i} := T{i} + 1;"));
                    } else {
                        body.push(format!("{};", kind.keyword()));
                    }
                }
            }
            writeln!(text, "thimac T{i} {{ {} }}", body.join(" ")).unwrap();
        }
        let id = |a: usize| format!("T{}.{}", actions[a].0, actions[a].1.keyword());
        let n = actions.len();
        let mut edges = BTreeSet::new();
        for &(a, b) in &self.flow_picks {
            let (a, b) = (a % n, b % n);
            if a != b && legal(actions[a].1, actions[b].1, actions[a].0 == actions[b].0) && edges.insert((a, b)) {
                writeln!(text, "flow {} -> {};", id(a), id(b)).unwrap();
            }
        }
        for &(a, b) in &self.trigger_picks {
            let (a, b) = (a % n, b % n);
            if a != b && edges.insert((a, b)) {
                writeln!(text, "trigger {} --> {};", id(a), id(b)).unwrap();
            }
        }
        let mut events: Vec<Vec<usize>> = vec![Vec::new(); 5];
        for a in 0..n {
            events[self.event_of[a % self.event_of.len()]].push(a);
        }
        let live: Vec<usize> = (0..5).filter(|&e| !events[e].is_empty()).collect();
        for &e in &live {
            let covers: Vec<String> = events[e].iter().map(|&a| id(a)).collect();
            writeln!(text, "event E{e} covers {{ {} }};", covers.join(", ")).unwrap();
        }
        let mut chronology = BTreeSet::new();
        for &(a, b) in &self.chronology_picks {
            let (a, b) = (a.min(b), a.max(b));
            if a != b && live.contains(&a) && live.contains(&b) {
                chronology.insert((a, b));
            }
        }
        text.push_str("behavior {\n");
        for (a, b) in chronology {
            writeln!(text, "    E{a} -> E{b};").unwrap();
        }
        text.push_str("}\n");
        text
    }
}
