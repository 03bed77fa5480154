//! Conversion between TM static models and UML-style class models.
//!
//! Going from TM to classes drops every action and edge and reads the
//! remaining containment tree: specializing subthimacs become subclasses,
//! stored subthimacs become attributes and action-only subthimacs become
//! methods. The reverse direction expands each attribute into the
//! accessor pattern (a typed store carrying all five actions).

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::dsl::is_reserved;
use crate::expr::ValueType;
use crate::model::{
    build_model, is_identifier, Action, ActionKind, Edge, StaticModel, Store, Thimac, ThimacDecl, ThimacPath,
};
use crate::report::{Code, Diagnostic};

mod json;

pub use json::{read_class_json, write_class_json, SchemaError};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassModel {
    pub classes: Vec<ClassDef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDef {
    pub name: String,
    pub attributes: Vec<AttributeDef>,
    pub methods: Vec<MethodDef>,
    pub parent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeDef {
    pub name: String,
    pub value_type: ValueType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDef {
    pub name: String,
    pub params: Vec<ParamDef>,
    pub returns: Option<ValueType>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamDef {
    pub name: String,
    pub value_type: ValueType,
}

impl ClassDef {
    pub fn new(name: &str) -> Self {
        ClassDef {
            name: name.to_owned(),
            attributes: Vec::new(),
            methods: Vec::new(),
            parent: None,
        }
    }

    pub fn attribute(mut self, name: &str, value_type: ValueType) -> Self {
        self.attributes.push(AttributeDef {
            name: name.to_owned(),
            value_type,
        });
        self
    }

    pub fn method(mut self, name: &str) -> Self {
        self.methods.push(MethodDef {
            name: name.to_owned(),
            params: Vec::new(),
            returns: None,
        });
        self
    }

    pub fn parent(mut self, parent: &str) -> Self {
        self.parent = Some(parent.to_owned());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassModelError {
    #[error("class `{0}` is declared more than once")]
    DuplicateClass(String),
    #[error("`{name}` is not a valid {what} name")]
    InvalidName { what: &'static str, name: String },
    #[error("class {class} declares member `{name}` more than once")]
    DuplicateMember { class: String, name: String },
    #[error("method {class}.{method} declares parameter `{name}` more than once")]
    DuplicateParam { class: String, method: String, name: String },
    #[error("class {class} extends unknown class `{parent}`")]
    UnknownParent { class: String, parent: String },
    #[error("generalization cycle through {}", .0.join(" -> "))]
    CyclicGeneralization(Vec<String>),
    #[error("member `{member}` of {class} clashes with subclass `{subclass}` in the TM form")]
    NameClash {
        class: String,
        member: String,
        subclass: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UmlError {
    #[error("subthimac {0} has a store and action-only children, so it is neither an attribute nor a method")]
    AmbiguousSubthimac(ThimacPath),
    #[error(transparent)]
    Invalid(#[from] ClassModelError),
}

/// A conversion result plus non-fatal findings.
#[derive(Debug, Clone, PartialEq)]
pub struct Converted<T> {
    pub value: T,
    pub warnings: Vec<Diagnostic>,
}

fn is_member_name(name: &str) -> bool {
    is_identifier(name) && !name.starts_with(|c: char| c.is_ascii_uppercase())
}

impl ClassModel {
    pub fn class(&self, name: &str) -> Option<&ClassDef> {
        self.classes.iter().find(|c| c.name == name)
    }

    /// Checks naming, uniqueness, parent resolution and acyclicity.
    pub fn validate(&self) -> Result<(), ClassModelError> {
        let mut names = BTreeSet::new();
        for c in &self.classes {
            if !is_identifier(&c.name) || is_reserved(&c.name) {
                return Err(ClassModelError::InvalidName {
                    what: "class",
                    name: c.name.clone(),
                });
            }
            if !names.insert(c.name.as_str()) {
                return Err(ClassModelError::DuplicateClass(c.name.clone()));
            }
            let mut members = BTreeSet::new();
            let member_names = c.attributes.iter().map(|a| (&a.name, "attribute"));
            let member_names = member_names.chain(c.methods.iter().map(|m| (&m.name, "method")));
            for (name, what) in member_names {
                if !is_member_name(name) {
                    return Err(ClassModelError::InvalidName {
                        what,
                        name: name.clone(),
                    });
                }
                if !members.insert(name.as_str()) {
                    return Err(ClassModelError::DuplicateMember {
                        class: c.name.clone(),
                        name: name.clone(),
                    });
                }
            }
            for m in &c.methods {
                let mut params = BTreeSet::new();
                for p in &m.params {
                    if !is_identifier(&p.name) {
                        return Err(ClassModelError::InvalidName {
                            what: "parameter",
                            name: p.name.clone(),
                        });
                    }
                    if !params.insert(p.name.as_str()) {
                        return Err(ClassModelError::DuplicateParam {
                            class: c.name.clone(),
                            method: m.name.clone(),
                            name: p.name.clone(),
                        });
                    }
                }
            }
        }
        for c in &self.classes {
            if let Some(parent) = &c.parent {
                if !names.contains(parent.as_str()) {
                    return Err(ClassModelError::UnknownParent {
                        class: c.name.clone(),
                        parent: parent.clone(),
                    });
                }
            }
        }
        let parent_of: BTreeMap<&str, &str> = self
            .classes
            .iter()
            .filter_map(|c| c.parent.as_deref().map(|p| (c.name.as_str(), p)))
            .collect();
        for c in &self.classes {
            let mut chain = vec![c.name.clone()];
            let mut current = c.name.as_str();
            while let Some(&p) = parent_of.get(current) {
                chain.push(p.to_owned());
                if p == c.name {
                    return Err(ClassModelError::CyclicGeneralization(chain));
                }
                if chain.len() > self.classes.len() + 1 {
                    break;
                }
                current = p;
            }
        }
        Ok(())
    }

    /// Classes reordered as a pre-order walk of the generalization forest;
    /// roots and siblings keep their relative order.
    pub fn normalized(&self) -> ClassModel {
        let mut out = Vec::with_capacity(self.classes.len());
        fn visit<'a>(cm: &'a ClassModel, c: &'a ClassDef, out: &mut Vec<ClassDef>) {
            out.push(c.clone());
            for child in cm.classes.iter().filter(|k| k.parent.as_deref() == Some(&c.name)) {
                visit(cm, child, out);
            }
        }
        for root in self.classes.iter().filter(|c| c.parent.is_none()) {
            visit(self, root, &mut out);
        }
        ClassModel { classes: out }
    }

    fn children<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a ClassDef> + 'a {
        self.classes.iter().filter(move |c| c.parent.as_deref() == Some(name))
    }
}

fn capitalize(name: &str) -> String {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) => c.to_ascii_uppercase().to_string() + chars.as_str(),
        None => String::new(),
    }
}

fn decapitalize(name: &str) -> String {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) => c.to_ascii_lowercase().to_string() + chars.as_str(),
        None => String::new(),
    }
}

fn is_action_only(t: &Thimac) -> bool {
    t.store.is_none() && t.subthimacs.is_empty() && !t.specializes
}

/// Removes the actions and edges, then reads classes off the containment
/// tree. One class per root thimac, plus one per specializing subthimac.
pub fn tm_to_class(model: &StaticModel) -> Result<Converted<ClassModel>, UmlError> {
    let mut classes = Vec::new();
    let mut warnings = Vec::new();
    for root in model.roots() {
        collect_class(root, None, &mut classes, &mut warnings)?;
    }
    let cm = ClassModel { classes };
    cm.validate()?;
    Ok(Converted { value: cm, warnings })
}

fn collect_class(
    t: &Thimac,
    parent: Option<&str>,
    out: &mut Vec<ClassDef>,
    warnings: &mut Vec<Diagnostic>,
) -> Result<(), UmlError> {
    let mut class = ClassDef::new(&t.name);
    class.parent = parent.map(str::to_owned);
    let mut subclasses = Vec::new();
    for s in &t.subthimacs {
        if s.specializes {
            subclasses.push(s);
        } else if let Some(store) = &s.store {
            if s.subthimacs.iter().any(is_action_only) {
                return Err(UmlError::AmbiguousSubthimac(s.path.clone()));
            }
            let value_type = store.effective_type().unwrap_or_else(|| {
                warnings.push(Diagnostic::warning(
                    Code::UntypedAttribute,
                    s.path.to_string(),
                    "store has no type; attribute defaults to reference",
                ));
                ValueType::Reference
            });
            class = class.attribute(&decapitalize(&s.name), value_type);
        } else if s.subthimacs.is_empty() {
            class = class.method(&decapitalize(&s.name));
        } else {
            warnings.push(Diagnostic::warning(
                Code::UntypedAttribute,
                s.path.to_string(),
                "subthimac without a store holds other thimacs; read as a reference attribute",
            ));
            class = class.attribute(&decapitalize(&s.name), ValueType::Reference);
        }
    }
    let name = class.name.clone();
    out.push(class);
    for s in subclasses {
        collect_class(s, Some(&name), out, warnings)?;
    }
    Ok(())
}

/// The accessor flows laid over each attribute's five actions: a value is
/// transferred in, received, processed into the store by create, and can
/// be released and transferred back out.
pub const ACCESSOR_FLOWS: [(ActionKind, ActionKind); 5] = [
    (ActionKind::Transfer, ActionKind::Receive),
    (ActionKind::Receive, ActionKind::Process),
    (ActionKind::Process, ActionKind::Create),
    (ActionKind::Create, ActionKind::Release),
    (ActionKind::Release, ActionKind::Transfer),
];

/// Expands a class model into a TM scaffold. Method parameters and return
/// types have no TM counterpart and are dropped with a warning.
pub fn class_to_tm(cm: &ClassModel) -> Result<Converted<StaticModel>, UmlError> {
    cm.validate()?;
    let mut actions = Vec::new();
    let mut flows = Vec::new();
    let mut warnings = Vec::new();
    let mut roots = Vec::new();
    for root in cm.classes.iter().filter(|c| c.parent.is_none()) {
        let path = ThimacPath::root(&root.name);
        roots.push(expand_class(cm, root, path, &mut actions, &mut flows, &mut warnings)?);
    }
    let model = build_model(roots, actions, flows, vec![]).expect("expansion of a valid class model is well-formed");
    Ok(Converted { value: model, warnings })
}

fn expand_class(
    cm: &ClassModel,
    class: &ClassDef,
    path: ThimacPath,
    actions: &mut Vec<Action>,
    flows: &mut Vec<Edge>,
    warnings: &mut Vec<Diagnostic>,
) -> Result<ThimacDecl, UmlError> {
    let mut decl = ThimacDecl::new(&class.name);
    decl.specializes = class.parent.is_some();
    actions.push(Action::new(path.clone(), ActionKind::Create));

    let subclass_names: BTreeSet<&str> = cm.children(&class.name).map(|c| c.name.as_str()).collect();
    let members = class.attributes.iter().map(|a| &a.name).chain(class.methods.iter().map(|m| &m.name));
    for member in members {
        let thimac = capitalize(member);
        if subclass_names.contains(thimac.as_str()) {
            return Err(ClassModelError::NameClash {
                class: class.name.clone(),
                member: member.clone(),
                subclass: thimac,
            }
            .into());
        }
    }

    for attr in &class.attributes {
        let name = capitalize(&attr.name);
        let attr_path = path.child(&name);
        decl = decl.child(ThimacDecl::new(&name).store(Store::typed(attr.value_type)));
        for kind in ActionKind::ALL {
            actions.push(Action::new(attr_path.clone(), kind));
        }
        for (from, to) in ACCESSOR_FLOWS {
            let a = Action::new(attr_path.clone(), from).id();
            let b = Action::new(attr_path.clone(), to).id();
            flows.push(Edge::new(a, b));
        }
    }
    for method in &class.methods {
        let name = capitalize(&method.name);
        decl = decl.child(ThimacDecl::new(&name));
        actions.push(Action::new(path.child(&name), ActionKind::Process));
        if !method.params.is_empty() || method.returns.is_some() {
            warnings.push(Diagnostic::warning(
                Code::DroppedSignature,
                format!("{}.{}", class.name, method.name),
                "parameters and return type are not represented in the TM model",
            ));
        }
    }
    for sub in cm.children(&class.name) {
        let sub_path = path.child(&sub.name);
        decl = decl.child(expand_class(cm, sub, sub_path, actions, flows, warnings)?);
    }
    Ok(decl)
}
