//! Object diagrams: objects with attribute values and links between them.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write};

use serde_json::{json, Map, Number, Value as Json};

use crate::model::{Model, Multiplicity};
use crate::ocl::{format_real, write_string_literal, OclType};

/// A runtime value. Bags are kept as sorted vectors so that equal multisets
/// compare equal.
#[derive(Clone, Debug)]
pub enum Value {
    Undefined,
    Boolean(bool),
    Integer(i64),
    Real(f64),
    String(String),
    Object(String),
    Set(BTreeSet<Value>),
    Bag(Vec<Value>),
}

impl Value {
    pub fn bag(mut items: Vec<Value>) -> Value {
        items.sort();
        Value::Bag(items)
    }

    pub fn set(items: impl IntoIterator<Item = Value>) -> Value {
        Value::Set(items.into_iter().collect())
    }

    pub fn is_undefined(&self) -> bool {
        matches!(self, Value::Undefined)
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Boolean(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Integer(v) => Some(*v),
            _ => None,
        }
    }

    /// Elements of a collection value, in order; `None` for scalars.
    pub fn elements(&self) -> Option<Vec<&Value>> {
        match self {
            Value::Set(s) => Some(s.iter().collect()),
            Value::Bag(b) => Some(b.iter().collect()),
            _ => None,
        }
    }

    pub fn is_collection(&self) -> bool {
        matches!(self, Value::Set(_) | Value::Bag(_))
    }

    /// Whether this value may be stored in a slot of type `ty`.
    pub fn fits(&self, ty: &OclType) -> bool {
        matches!(
            (self, ty),
            (Value::Undefined, _)
                | (Value::Boolean(_), OclType::Boolean)
                | (Value::Integer(_), OclType::Integer)
                | (Value::Real(_), OclType::Real)
                | (Value::String(_), OclType::String)
                | (Value::Object(_), OclType::Class(_))
        )
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Undefined => 0,
            Value::Boolean(_) => 1,
            Value::Integer(_) => 2,
            Value::Real(_) => 3,
            Value::String(_) => 4,
            Value::Object(_) => 5,
            Value::Set(_) => 6,
            Value::Bag(_) => 7,
        }
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Boolean(a), Value::Boolean(b)) => a.cmp(b),
            (Value::Integer(a), Value::Integer(b)) => a.cmp(b),
            (Value::Real(a), Value::Real(b)) => a.total_cmp(b),
            (Value::String(a), Value::String(b)) | (Value::Object(a), Value::Object(b)) => a.cmp(b),
            (Value::Set(a), Value::Set(b)) => a.cmp(b),
            (Value::Bag(a), Value::Bag(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

fn write_items<'a>(f: &mut fmt::Formatter<'_>, kind: &str, items: impl Iterator<Item = &'a Value>) -> fmt::Result {
    write!(f, "{kind}{{")?;
    for (i, v) in items.enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{v}")?;
    }
    f.write_str("}")
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Undefined => f.write_str("undefined"),
            Value::Boolean(b) => write!(f, "{b}"),
            Value::Integer(v) => write!(f, "{v}"),
            Value::Real(v) => f.write_str(&format_real(*v)),
            Value::String(s) => write_string_literal(f, s),
            Value::Object(o) => f.write_str(o),
            Value::Set(s) => write_items(f, "Set", s.iter()),
            Value::Bag(b) => write_items(f, "Bag", b.iter()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Object {
    pub class: String,
    pub attrs: BTreeMap<String, Value>,
}

/// A link of a binary association; `ends[i]` is the object at association
/// end `i`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Link {
    pub association: String,
    pub ends: [String; 2],
}

impl Link {
    pub fn new(association: impl Into<String>, a: impl Into<String>, b: impl Into<String>) -> Self {
        Link {
            association: association.into(),
            ends: [a.into(), b.into()],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SystemState {
    pub objects: BTreeMap<String, Object>,
    pub links: BTreeSet<Link>,
}

impl SystemState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_object(&mut self, name: impl Into<String>, class: impl Into<String>) {
        self.objects.insert(
            name.into(),
            Object {
                class: class.into(),
                attrs: BTreeMap::new(),
            },
        );
    }

    pub fn set_attr(&mut self, object: &str, attr: impl Into<String>, value: Value) {
        if let Some(o) = self.objects.get_mut(object) {
            o.attrs.insert(attr.into(), value);
        }
    }

    pub fn attr(&self, object: &str, attr: &str) -> Value {
        self.objects
            .get(object)
            .and_then(|o| o.attrs.get(attr))
            .cloned()
            .unwrap_or(Value::Undefined)
    }

    pub fn add_link(&mut self, link: Link) -> bool {
        self.links.insert(link)
    }

    /// Names of objects whose class conforms to `class`, sorted.
    pub fn instances_of<'a>(&'a self, model: &'a Model, class: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.objects
            .iter()
            .filter(move |(_, o)| model.conforms_to(&o.class, class))
            .map(|(n, _)| n.as_str())
    }

    pub fn links_of<'a>(&'a self, association: &'a str) -> impl Iterator<Item = &'a Link> + 'a {
        self.links.iter().filter(move |l| l.association == association)
    }

    /// Whether `self` is contained in `other`: same objects with the same
    /// classes, same pinned attribute values, same links.
    pub fn is_substate_of(&self, other: &SystemState) -> bool {
        self.objects.iter().all(|(name, o)| {
            other.objects.get(name).is_some_and(|p| {
                p.class == o.class
                    && o.attrs
                        .iter()
                        .filter(|(_, v)| !v.is_undefined())
                        .all(|(a, v)| p.attrs.get(a) == Some(v))
            })
        }) && self.links.is_subset(&other.links)
    }
}

/// A structural defect of a state with respect to a model.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StateError {
    #[error("object `{object}` has unknown class `{class}`")]
    UnknownClass { object: String, class: String },
    #[error("object `{object}` instantiates abstract class `{class}`")]
    AbstractClass { object: String, class: String },
    #[error("object `{object}` has no attribute `{attr}`")]
    UnknownAttribute { object: String, attr: String },
    #[error("attribute `{object}.{attr}` holds {value}, expected a value of type `{expected}`")]
    AttributeType {
        object: String,
        attr: String,
        value: String,
        expected: String,
    },
    #[error("link of unknown association `{association}`")]
    UnknownAssociation { association: String },
    #[error("link `{association}` refers to unknown object `{object}`")]
    UnknownObject { association: String, object: String },
    #[error("object `{object}` of class `{class}` cannot be at end `{role}` of `{association}`")]
    LinkEndType {
        association: String,
        role: String,
        object: String,
        class: String,
    },
}

/// Checks the structural invariants of a state (classes, slot types, link
/// endpoints).
pub fn check_structure(state: &SystemState, model: &Model) -> Vec<StateError> {
    let mut errs = Vec::new();
    for (name, o) in &state.objects {
        let Some(class) = model.class(&o.class) else {
            errs.push(StateError::UnknownClass {
                object: name.clone(),
                class: o.class.clone(),
            });
            continue;
        };
        if class.is_abstract {
            errs.push(StateError::AbstractClass {
                object: name.clone(),
                class: o.class.clone(),
            });
        }
        for (attr, value) in &o.attrs {
            match model.attribute(&o.class, attr) {
                None => errs.push(StateError::UnknownAttribute {
                    object: name.clone(),
                    attr: attr.clone(),
                }),
                Some((_, a)) if !value.fits(&a.ty) => errs.push(StateError::AttributeType {
                    object: name.clone(),
                    attr: attr.clone(),
                    value: value.to_string(),
                    expected: a.ty.to_string(),
                }),
                Some(_) => {}
            }
        }
    }
    for link in &state.links {
        let Some(assoc) = model.association(&link.association) else {
            errs.push(StateError::UnknownAssociation {
                association: link.association.clone(),
            });
            continue;
        };
        for (end, obj) in assoc.ends.iter().zip(&link.ends) {
            match state.objects.get(obj) {
                None => errs.push(StateError::UnknownObject {
                    association: link.association.clone(),
                    object: obj.clone(),
                }),
                Some(o) if !model.conforms_to(&o.class, &end.class) => errs.push(StateError::LinkEndType {
                    association: link.association.clone(),
                    role: end.role.clone(),
                    object: obj.clone(),
                    class: o.class.clone(),
                }),
                Some(_) => {}
            }
        }
    }
    errs
}

/// An object linked to a number of partners outside the multiplicity of the
/// opposite association end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub object: String,
    pub association: String,
    /// Role of the end whose multiplicity is violated.
    pub role: String,
    pub count: usize,
    pub multiplicity: Multiplicity,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "object `{}` has {} `{}` link(s) at role `{}`, multiplicity is {}",
            self.object, self.count, self.association, self.role, self.multiplicity
        )
    }
}

/// Reports every (object, association end) pair whose link count lies
/// outside the end's multiplicity.
pub fn check_model_inherent(state: &SystemState, model: &Model) -> Vec<Violation> {
    let mut out = Vec::new();
    for assoc in &model.associations {
        let mut counts: [BTreeMap<&str, usize>; 2] = Default::default();
        for link in state.links_of(&assoc.name) {
            for (side, c) in counts.iter_mut().enumerate() {
                *c.entry(link.ends[side].as_str()).or_default() += 1;
            }
        }
        for (side, c) in counts.iter().enumerate() {
            let other = &assoc.ends[1 - side];
            for name in state.instances_of(model, &assoc.ends[side].class) {
                let count = c.get(name).copied().unwrap_or(0);
                if !other.multiplicity.admits(count) {
                    out.push(Violation {
                        object: name.to_string(),
                        association: assoc.name.clone(),
                        role: other.role.clone(),
                        count,
                        multiplicity: other.multiplicity,
                    });
                }
            }
        }
    }
    out.sort_by(|a, b| (&a.object, &a.association, &a.role).cmp(&(&b.object, &b.association, &b.role)));
    out
}

fn value_to_json(v: &Value) -> Json {
    match v {
        Value::Undefined => Json::Null,
        Value::Boolean(b) => Json::Bool(*b),
        Value::Integer(i) => Json::Number((*i).into()),
        Value::Real(r) => match Number::from_f64(*r) {
            Some(n) => Json::Number(n),
            None => json!({ "real": format!("{r:?}") }),
        },
        Value::String(s) => Json::String(s.clone()),
        Value::Object(o) => json!({ "ref": o }),
        Value::Set(s) => json!({ "set": s.iter().map(value_to_json).collect::<Vec<_>>() }),
        Value::Bag(b) => json!({ "bag": b.iter().map(value_to_json).collect::<Vec<_>>() }),
    }
}

/// JSON form of a state. Objects and links appear sorted.
pub fn state_to_json(state: &SystemState) -> Json {
    let objects: Vec<Json> = state
        .objects
        .iter()
        .map(|(name, o)| {
            let attrs: Map<String, Json> = o.attrs.iter().map(|(a, v)| (a.clone(), value_to_json(v))).collect();
            json!({ "name": name, "class": o.class, "attrs": attrs })
        })
        .collect();
    let links: Vec<Json> = state
        .links
        .iter()
        .map(|l| json!({ "assoc": l.association, "ends": l.ends }))
        .collect();
    json!({ "objects": objects, "links": links })
}

pub fn export_json(state: &SystemState) -> String {
    serde_json::to_string_pretty(&state_to_json(state)).expect("serializable")
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("invalid state JSON: {0}")]
pub struct StateJsonError(pub String);

fn err<T>(msg: impl Into<String>) -> Result<T, StateJsonError> {
    Err(StateJsonError(msg.into()))
}

fn value_from_json(j: &Json) -> Result<Value, StateJsonError> {
    Ok(match j {
        Json::Null => Value::Undefined,
        Json::Bool(b) => Value::Boolean(*b),
        Json::Number(n) => {
            if let Some(i) = n.as_i64() {
                Value::Integer(i)
            } else if n.is_f64() {
                Value::Real(n.as_f64().expect("f64"))
            } else {
                return err(format!("integer {n} out of range"));
            }
        }
        Json::String(s) => Value::String(s.clone()),
        Json::Object(m) if m.len() == 1 => {
            let (k, v) = m.iter().next().expect("one entry");
            match (k.as_str(), v) {
                ("ref", Json::String(s)) => Value::Object(s.clone()),
                ("real", Json::String(s)) => match s.parse::<f64>() {
                    Ok(r) => Value::Real(r),
                    Err(_) => return err(format!("bad real `{s}`")),
                },
                ("set", Json::Array(items)) => Value::Set(items.iter().map(value_from_json).collect::<Result<_, _>>()?),
                ("bag", Json::Array(items)) => Value::bag(items.iter().map(value_from_json).collect::<Result<_, _>>()?),
                _ => return err(format!("unrecognised value `{j}`")),
            }
        }
        other => return err(format!("unrecognised value `{other}`")),
    })
}

fn field<'a>(m: &'a Map<String, Json>, key: &str) -> Result<&'a Json, StateJsonError> {
    m.get(key).ok_or_else(|| StateJsonError(format!("missing field `{key}`")))
}

fn string_field(m: &Map<String, Json>, key: &str) -> Result<String, StateJsonError> {
    match field(m, key)? {
        Json::String(s) => Ok(s.clone()),
        _ => err(format!("field `{key}` must be a string")),
    }
}

pub fn state_from_json(j: &Json) -> Result<SystemState, StateJsonError> {
    let Json::Object(root) = j else {
        return err("expected an object");
    };
    let mut state = SystemState::new();
    let Json::Array(objects) = field(root, "objects")? else {
        return err("`objects` must be an array");
    };
    for o in objects {
        let Json::Object(o) = o else {
            return err("object entries must be objects");
        };
        let name = string_field(o, "name")?;
        if state.objects.contains_key(&name) {
            return err(format!("duplicate object `{name}`"));
        }
        let mut object = Object {
            class: string_field(o, "class")?,
            attrs: BTreeMap::new(),
        };
        match o.get("attrs") {
            None => {}
            Some(Json::Object(attrs)) => {
                for (a, v) in attrs {
                    object.attrs.insert(a.clone(), value_from_json(v)?);
                }
            }
            Some(_) => return err("`attrs` must be an object"),
        }
        state.objects.insert(name, object);
    }
    let Json::Array(links) = field(root, "links")? else {
        return err("`links` must be an array");
    };
    for l in links {
        let Json::Object(l) = l else {
            return err("link entries must be objects");
        };
        let association = string_field(l, "assoc")?;
        let ends = match field(l, "ends")? {
            Json::Array(e) if e.len() == 2 => match (&e[0], &e[1]) {
                (Json::String(a), Json::String(b)) => [a.clone(), b.clone()],
                _ => return err("link ends must be object names"),
            },
            _ => return err("`ends` must hold two object names"),
        };
        state.links.insert(Link { association, ends });
    }
    Ok(state)
}

pub fn import_json(text: &str) -> Result<SystemState, StateJsonError> {
    let j: Json = serde_json::from_str(text).map_err(|e| StateJsonError(e.to_string()))?;
    state_from_json(&j)
}

fn dot_escape(s: &str, record: bool) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '{' | '}' | '|' | '<' | '>' if record => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out
}

/// Graphviz rendering: one record node per object, one edge per link.
pub fn export_dot(state: &SystemState) -> String {
    let mut out = String::from("digraph state {\n  node [shape=record, fontname=\"Helvetica\"];\n  edge [fontname=\"Helvetica\", dir=none];\n");
    for (name, o) in &state.objects {
        let mut label = dot_escape(&format!("{name}:{}", o.class), true);
        if !o.attrs.is_empty() {
            label.push('|');
            for (a, v) in &o.attrs {
                label.push_str(&dot_escape(&format!("{a} = {v}"), true));
                label.push_str("\\l");
            }
        }
        let _ = writeln!(out, "  \"{}\" [label=\"{{{label}}}\"];", dot_escape(name, false));
    }
    for l in &state.links {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}\"];",
            dot_escape(&l.ends[0], false),
            dot_escape(&l.ends[1], false),
            dot_escape(&l.association, false)
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_model;

    fn model() -> Model {
        parse_model(
            "model M
             class Employee attributes age : Integer end
             class Branch end
             association Employment between Employee [*] role employee; Branch [1] role employer end",
            "m.use",
        )
        .unwrap()
    }

    #[test]
    fn missing_mandatory_link_is_a_violation() {
        let m = model();
        let mut s = SystemState::new();
        s.add_object("e1", "Employee");
        let v = check_model_inherent(&s, &m);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].object.as_str(), v[0].association.as_str()), ("e1", "Employment"));
        s.add_object("b1", "Branch");
        s.add_link(Link::new("Employment", "e1", "b1"));
        assert!(check_model_inherent(&s, &m).is_empty());
        assert!(check_model_inherent(&SystemState::new(), &Model::empty("E")).is_empty());
    }

    #[test]
    fn bag_equality_ignores_insertion_order() {
        let a = Value::bag(vec![Value::Integer(3), Value::Integer(2), Value::Integer(2)]);
        let b = Value::bag(vec![Value::Integer(2), Value::Integer(3), Value::Integer(2)]);
        assert_eq!(a, b);
        assert_ne!(a, Value::set([Value::Integer(2), Value::Integer(3)]));
        assert_eq!(a.to_string(), "Bag{2, 2, 3}");
    }

    #[test]
    fn json_round_trip_with_undefined() {
        let mut s = SystemState::new();
        s.add_object("e1", "Employee");
        s.set_attr("e1", "age", Value::Undefined);
        s.add_object("b1", "Branch");
        s.add_link(Link::new("Employment", "e1", "b1"));
        let text = export_json(&s);
        assert!(text.contains("\"age\": null"));
        assert_eq!(import_json(&text).unwrap(), s);
        let empty = SystemState::new();
        assert_eq!(import_json(&export_json(&empty)).unwrap(), empty);
    }

    #[test]
    fn real_json_keeps_type() {
        let mut s = SystemState::new();
        s.add_object("x", "C");
        s.set_attr("x", "r", Value::Real(1.0));
        s.set_attr("x", "i", Value::Integer(1));
        s.set_attr("x", "n", Value::Real(f64::INFINITY));
        assert_eq!(import_json(&export_json(&s)).unwrap(), s);
    }

    #[test]
    fn dot_output() {
        let empty = export_dot(&SystemState::new());
        assert!(!empty.contains("label"));
        let mut s = SystemState::new();
        s.add_object("b1", "Branch");
        let dot = export_dot(&s);
        assert!(dot.contains("\"b1\" [label=\"{b1:Branch}\"];"), "{dot}");
    }

    #[test]
    fn structure_errors() {
        let m = model();
        let mut s = SystemState::new();
        s.add_object("e1", "Employee");
        s.set_attr("e1", "age", Value::String("x".into()));
        s.add_link(Link::new("Employment", "e1", "nobody"));
        let errs = check_structure(&s, &m);
        assert_eq!(errs.len(), 2);
    }
}
