use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::expr::{EvalError, Guard, Value, ValueType};
use crate::model::{ActionId, StaticModel, ThimacPath};

/// Where a thing currently sits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Location {
    Action(ActionId),
    Store(ThimacPath),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Action(a) => write!(f, "{a}"),
            Location::Store(p) => write!(f, "{p}[store]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThingToken {
    pub id: u64,
    pub value: Option<Value>,
    pub location: Location,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    /// One entry per stored thimac; `None` is an unset store.
    pub stores: BTreeMap<ThimacPath, Option<Value>>,
    pub tokens: Vec<ThingToken>,
    /// Logical clock: the number of firings so far.
    pub step: u64,
    pub(crate) next_token: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error("`{0}` has no store to fill")]
    FillPathUnstored(ThimacPath),
    #[error("store {path} holds {expected} values, not {found}")]
    TypeMismatch {
        path: ThimacPath,
        expected: ValueType,
        found: ValueType,
    },
}

pub type GuardEvalError = EvalError;

/// Two passes: every store is created empty, then declared initial values
/// and `fills` are written in that order.
pub fn init_world(model: &StaticModel, fills: &BTreeMap<ThimacPath, Value>) -> Result<WorldState, WorldError> {
    let mut world = WorldState {
        stores: model.stored_paths().into_iter().map(|p| (p.clone(), None)).collect(),
        tokens: Vec::new(),
        step: 0,
        next_token: 0,
    };
    for path in model.stored_paths() {
        let store = model.store(path).expect("stored path");
        if let Some(v) = &store.initial {
            world.stores.insert(path.clone(), Some(v.clone()));
        }
    }
    for (path, value) in fills {
        let Some(store) = model.store(path) else {
            return Err(WorldError::FillPathUnstored(path.clone()));
        };
        check_type(path, store.effective_type(), value)?;
        world.stores.insert(path.clone(), Some(value.clone()));
    }
    Ok(world)
}

pub(crate) fn check_type(path: &ThimacPath, expected: Option<ValueType>, value: &Value) -> Result<(), WorldError> {
    match expected {
        Some(expected) if expected != value.value_type() => Err(WorldError::TypeMismatch {
            path: path.clone(),
            expected,
            found: value.value_type(),
        }),
        _ => Ok(()),
    }
}

impl WorldState {
    pub fn value(&self, path: &ThimacPath) -> Option<&Value> {
        self.stores.get(path).and_then(Option::as_ref)
    }

    pub fn lookup(&self, path: &ThimacPath) -> Result<Option<Value>, EvalError> {
        self.stores
            .get(path)
            .cloned()
            .ok_or_else(|| EvalError::NoStore(path.clone()))
    }

    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }
}

pub fn evaluate_guard(guard: &Guard, world: &WorldState) -> Result<bool, GuardEvalError> {
    guard.expr.eval_bool(&|p: &ThimacPath| world.lookup(p))
}
