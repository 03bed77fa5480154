//! The static (atemporal) TM graph: nested thimacs, the five generic
//! actions, flow and trigger edges, and per-thimac stores.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::expr::{Expr, Value, ValueType};

mod validate;

pub use validate::{is_legal_flow, validate_static};

/// The generic actions. Arrive and accept are merged into `Receive`.
///
/// The declaration order is the canonical action order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionKind {
    Create,
    Process,
    Release,
    Transfer,
    Receive,
}

impl ActionKind {
    pub const ALL: [ActionKind; 5] = [
        ActionKind::Create,
        ActionKind::Process,
        ActionKind::Release,
        ActionKind::Transfer,
        ActionKind::Receive,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            ActionKind::Create => "create",
            ActionKind::Process => "process",
            ActionKind::Release => "release",
            ActionKind::Transfer => "transfer",
            ActionKind::Receive => "receive",
        }
    }

    /// Capitalized word used in diagrams and diagnostics.
    pub fn label(self) -> &'static str {
        match self {
            ActionKind::Create => "Create",
            ActionKind::Process => "Process",
            ActionKind::Release => "Release",
            ActionKind::Transfer => "Transfer",
            ActionKind::Receive => "Receive",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.keyword() == word)
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Dotted path naming a thimac from the root, e.g. `Refrigerator.Sirloin`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ThimacPath(Vec<String>);

impl ThimacPath {
    pub fn new(segments: Vec<String>) -> Self {
        debug_assert!(!segments.is_empty());
        ThimacPath(segments)
    }

    pub fn root(name: &str) -> Self {
        ThimacPath(vec![name.to_owned()])
    }

    /// Parses `A.B.C`; every segment must be an identifier.
    pub fn parse(text: &str) -> Option<Self> {
        let segments: Vec<String> = text.split('.').map(str::to_owned).collect();
        if segments.iter().all(|s| is_identifier(s)) {
            Some(ThimacPath(segments))
        } else {
            None
        }
    }

    pub fn segments(&self) -> &[String] {
        &self.0
    }

    pub fn name(&self) -> &str {
        self.0.last().expect("paths are never empty")
    }

    pub fn child(&self, name: &str) -> Self {
        let mut segments = self.0.clone();
        segments.push(name.to_owned());
        ThimacPath(segments)
    }

    pub fn parent(&self) -> Option<Self> {
        if self.0.len() > 1 {
            Some(ThimacPath(self.0[..self.0.len() - 1].to_vec()))
        } else {
            None
        }
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for ThimacPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("."))
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Identifier of an action: the owner path followed by the action name,
/// e.g. `Cook.Sirloin.receive`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(String);

impl ActionId {
    pub fn new(owner: &ThimacPath, name: &str) -> Self {
        ActionId(format!("{owner}.{name}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for ActionId {
    fn from(s: &str) -> Self {
        ActionId(s.to_owned())
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Assignment executed when a process action fires.
#[derive(Debug, Clone, PartialEq)]
pub struct Update {
    pub target: ThimacPath,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub owner: ThimacPath,
    /// Local name; defaults to the kind keyword.
    pub name: String,
    pub kind: ActionKind,
    /// Only meaningful on `Process` actions.
    pub update: Option<Update>,
}

impl Action {
    pub fn new(owner: ThimacPath, kind: ActionKind) -> Self {
        Action {
            owner,
            name: kind.keyword().to_owned(),
            kind,
            update: None,
        }
    }

    pub fn named(owner: ThimacPath, name: &str, kind: ActionKind) -> Self {
        Action {
            owner,
            name: name.to_owned(),
            kind,
            update: None,
        }
    }

    pub fn with_update(mut self, target: ThimacPath, expr: Expr) -> Self {
        self.update = Some(Update { target, expr });
        self
    }

    pub fn id(&self) -> ActionId {
        ActionId::new(&self.owner, &self.name)
    }

    pub fn has_default_name(&self) -> bool {
        self.name == self.kind.keyword()
    }
}

/// The single storage area of a thimac.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Store {
    pub value_type: Option<ValueType>,
    pub initial: Option<Value>,
}

impl Store {
    pub fn untyped() -> Self {
        Store::default()
    }

    pub fn typed(ty: ValueType) -> Self {
        Store {
            value_type: Some(ty),
            initial: None,
        }
    }

    pub fn with_initial(value: Value) -> Self {
        Store {
            value_type: None,
            initial: Some(value),
        }
    }

    /// Declared type, falling back to the type of the initial value.
    pub fn effective_type(&self) -> Option<ValueType> {
        self.value_type
            .or_else(|| self.initial.as_ref().map(Value::value_type))
    }
}

/// Thimac declaration passed to [`build_model`]. Actions are attached later
/// through their owner paths.
#[derive(Debug, Clone, PartialEq)]
pub struct ThimacDecl {
    pub name: String,
    pub children: Vec<ThimacDecl>,
    pub store: Option<Store>,
    pub specializes: bool,
}

impl ThimacDecl {
    pub fn new(name: &str) -> Self {
        ThimacDecl {
            name: name.to_owned(),
            children: Vec::new(),
            store: None,
            specializes: false,
        }
    }

    pub fn child(mut self, child: ThimacDecl) -> Self {
        self.children.push(child);
        self
    }

    pub fn store(mut self, store: Store) -> Self {
        self.store = Some(store);
        self
    }

    pub fn specializing(mut self) -> Self {
        self.specializes = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thimac {
    pub name: String,
    pub path: ThimacPath,
    pub subthimacs: Vec<Thimac>,
    pub actions: Vec<ActionId>,
    pub store: Option<Store>,
    pub specializes: bool,
}

impl Thimac {
    /// Pre-order walk over this thimac and its descendants.
    pub fn walk(&self) -> Vec<&Thimac> {
        let mut out = vec![self];
        for child in &self.subthimacs {
            out.extend(child.walk());
        }
        out
    }

    pub fn is_leaf(&self) -> bool {
        self.subthimacs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: ActionId,
    pub to: ActionId,
}

impl Edge {
    pub fn new(from: impl Into<ActionId>, to: impl Into<ActionId>) -> Self {
        Edge {
            from: from.into(),
            to: to.into(),
        }
    }
}

impl From<(&str, &str)> for Edge {
    fn from((from, to): (&str, &str)) -> Self {
        Edge::new(from, to)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Flow,
    Trigger,
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeKind::Flow => "flow",
            EdgeKind::Trigger => "trigger",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate action id `{0}`")]
    DuplicateId(ActionId),
    #[error("action `{action}` names owner `{owner}`, which is not a thimac")]
    UnresolvedOwner { action: ActionId, owner: ThimacPath },
    #[error("thimac `{parent}` declares `{name}` more than once")]
    DuplicateSibling { parent: String, name: String },
    #[error("`{0}` is not a valid identifier")]
    InvalidName(String),
    #[error("{kind} endpoint `{endpoint}` is not an action")]
    UnknownEndpoint { kind: EdgeKind, endpoint: ActionId },
    #[error("{kind} {from} -> {to} is declared more than once")]
    DuplicateEdge {
        kind: EdgeKind,
        from: ActionId,
        to: ActionId,
    },
    #[error("trigger {from} --> {to} duplicates a flow")]
    TriggerIsFlow { from: ActionId, to: ActionId },
    #[error("action `{action}` carries an update but is not a process")]
    UpdateOnNonProcess { action: ActionId },
    #[error("update in `{action}` refers to `{path}`, which has no store")]
    UpdatePathUnstored { action: ActionId, path: ThimacPath },
}

/// The atemporal TM graph. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticModel {
    roots: Vec<Thimac>,
    actions: Vec<Action>,
    flows: Vec<Edge>,
    triggers: Vec<Edge>,
    action_index: BTreeMap<ActionId, usize>,
}

/// Builds a model and its lookup tables. Stage legality is left to
/// [`validate_static`].
pub fn build_model(
    roots: Vec<ThimacDecl>,
    actions: Vec<Action>,
    flows: Vec<Edge>,
    triggers: Vec<Edge>,
) -> Result<StaticModel, ModelError> {
    let mut built_roots = Vec::with_capacity(roots.len());
    let mut seen = BTreeSet::new();
    for decl in roots {
        if !seen.insert(decl.name.clone()) {
            return Err(ModelError::DuplicateSibling {
                parent: "<root>".into(),
                name: decl.name,
            });
        }
        built_roots.push(build_thimac(decl, None)?);
    }

    let mut model = StaticModel {
        roots: built_roots,
        actions: Vec::with_capacity(actions.len()),
        flows: Vec::new(),
        triggers: Vec::new(),
        action_index: BTreeMap::new(),
    };

    for action in actions {
        let id = action.id();
        if !is_identifier(&action.name) {
            return Err(ModelError::InvalidName(action.name));
        }
        if model.action_index.contains_key(&id) {
            return Err(ModelError::DuplicateId(id));
        }
        let Some(owner) = model.thimac_mut(&action.owner) else {
            return Err(ModelError::UnresolvedOwner {
                action: id,
                owner: action.owner,
            });
        };
        owner.actions.push(id.clone());
        model.action_index.insert(id, model.actions.len());
        model.actions.push(action);
    }

    for action in &model.actions {
        let Some(update) = &action.update else {
            continue;
        };
        if action.kind != ActionKind::Process {
            return Err(ModelError::UpdateOnNonProcess { action: action.id() });
        }
        for path in std::iter::once(&update.target).chain(update.expr.paths()) {
            if model.store(path).is_none() {
                return Err(ModelError::UpdatePathUnstored {
                    action: action.id(),
                    path: path.clone(),
                });
            }
        }
    }

    model.flows = check_edges(&model, EdgeKind::Flow, flows)?;
    model.triggers = check_edges(&model, EdgeKind::Trigger, triggers)?;
    let flow_set: BTreeSet<&Edge> = model.flows.iter().collect();
    if let Some(e) = model.triggers.iter().find(|e| flow_set.contains(e)) {
        return Err(ModelError::TriggerIsFlow {
            from: e.from.clone(),
            to: e.to.clone(),
        });
    }
    Ok(model)
}

fn build_thimac(decl: ThimacDecl, parent: Option<&ThimacPath>) -> Result<Thimac, ModelError> {
    if !is_identifier(&decl.name) {
        return Err(ModelError::InvalidName(decl.name));
    }
    let path = match parent {
        Some(p) => p.child(&decl.name),
        None => ThimacPath::root(&decl.name),
    };
    let mut seen = BTreeSet::new();
    let mut subthimacs = Vec::with_capacity(decl.children.len());
    for child in decl.children {
        if !seen.insert(child.name.clone()) {
            return Err(ModelError::DuplicateSibling {
                parent: path.to_string(),
                name: child.name,
            });
        }
        subthimacs.push(build_thimac(child, Some(&path))?);
    }
    Ok(Thimac {
        name: decl.name,
        path,
        subthimacs,
        actions: Vec::new(),
        store: decl.store,
        specializes: decl.specializes,
    })
}

fn check_edges(model: &StaticModel, kind: EdgeKind, edges: Vec<Edge>) -> Result<Vec<Edge>, ModelError> {
    let mut seen = BTreeSet::new();
    for edge in &edges {
        for endpoint in [&edge.from, &edge.to] {
            if model.action(endpoint).is_none() {
                return Err(ModelError::UnknownEndpoint {
                    kind,
                    endpoint: endpoint.clone(),
                });
            }
        }
        if !seen.insert(edge) {
            return Err(ModelError::DuplicateEdge {
                kind,
                from: edge.from.clone(),
                to: edge.to.clone(),
            });
        }
    }
    Ok(edges)
}

impl StaticModel {
    pub fn empty() -> Self {
        StaticModel {
            roots: Vec::new(),
            actions: Vec::new(),
            flows: Vec::new(),
            triggers: Vec::new(),
            action_index: BTreeMap::new(),
        }
    }

    pub fn roots(&self) -> &[Thimac] {
        &self.roots
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn flows(&self) -> &[Edge] {
        &self.flows
    }

    pub fn triggers(&self) -> &[Edge] {
        &self.triggers
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn action(&self, id: &ActionId) -> Option<&Action> {
        self.action_index.get(id).map(|&i| &self.actions[i])
    }

    /// Position of an action in the action table.
    pub fn action_position(&self, id: &ActionId) -> Option<usize> {
        self.action_index.get(id).copied()
    }

    pub fn thimac(&self, path: &ThimacPath) -> Option<&Thimac> {
        let (first, rest) = path.segments().split_first()?;
        let mut current = self.roots.iter().find(|t| &t.name == first)?;
        for segment in rest {
            current = current.subthimacs.iter().find(|t| &t.name == segment)?;
        }
        Some(current)
    }

    fn thimac_mut(&mut self, path: &ThimacPath) -> Option<&mut Thimac> {
        let (first, rest) = path.segments().split_first()?;
        let mut current = self.roots.iter_mut().find(|t| &t.name == first)?;
        for segment in rest {
            current = current.subthimacs.iter_mut().find(|t| &t.name == segment)?;
        }
        Some(current)
    }

    pub fn store(&self, path: &ThimacPath) -> Option<&Store> {
        self.thimac(path).and_then(|t| t.store.as_ref())
    }

    /// Every thimac in pre-order (declaration order, parents first).
    pub fn thimacs(&self) -> Vec<&Thimac> {
        self.roots.iter().flat_map(Thimac::walk).collect()
    }

    /// Paths of every thimac that declares a store, in pre-order.
    pub fn stored_paths(&self) -> Vec<&ThimacPath> {
        self.thimacs()
            .into_iter()
            .filter(|t| t.store.is_some())
            .map(|t| &t.path)
            .collect()
    }

    /// Resolves a path relative to `scope`, trying the innermost enclosing
    /// thimac first and ending at the roots.
    pub fn resolve_relative(&self, scope: &ThimacPath, path: &[String]) -> Option<ThimacPath> {
        let scope = scope.segments();
        (0..=scope.len()).rev().find_map(|keep| {
            let mut segments = scope[..keep].to_vec();
            segments.extend_from_slice(path);
            let candidate = ThimacPath::new(segments);
            self.thimac(&candidate).map(|_| candidate)
        })
    }

    fn declarations(&self) -> Vec<ThimacDecl> {
        fn decl(t: &Thimac) -> ThimacDecl {
            ThimacDecl {
                name: t.name.clone(),
                children: t.subthimacs.iter().map(decl).collect(),
                store: t.store.clone(),
                specializes: t.specializes,
            }
        }
        self.roots.iter().map(decl).collect()
    }
}

/// Deterministic ordering: thimacs keep declaration order, actions follow
/// their owners in pre-order and then the fixed kind order, edges sort by
/// endpoint ids. Idempotent.
pub fn canonicalize(model: &StaticModel) -> StaticModel {
    let owner_rank: BTreeMap<&ThimacPath, usize> = model
        .thimacs()
        .into_iter()
        .enumerate()
        .map(|(i, t)| (&t.path, i))
        .collect();
    let mut actions = model.actions.clone();
    actions.sort_by(|a, b| {
        (owner_rank[&a.owner], a.kind, &a.name).cmp(&(owner_rank[&b.owner], b.kind, &b.name))
    });
    let mut flows = model.flows.clone();
    flows.sort();
    let mut triggers = model.triggers.clone();
    triggers.sort();
    build_model(model.declarations(), actions, flows, triggers)
        .expect("reordering a well-formed model keeps it well-formed")
}
