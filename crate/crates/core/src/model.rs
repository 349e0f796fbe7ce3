//! Class models: classes, attributes, binary associations, generalization and
//! named invariants.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::location::{Origin, SourceLocation};
use crate::ocl::{Expr, OclType};

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub name: String,
    pub classes: Vec<Class>,
    pub associations: Vec<Association>,
    pub invariants: Vec<Invariant>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Class {
    pub name: String,
    pub is_abstract: bool,
    pub attributes: Vec<Attribute>,
    pub parents: Vec<String>,
    pub origin: Origin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Attribute {
    pub name: String,
    pub ty: OclType,
    pub origin: Origin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Upper {
    Bounded(u32),
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Multiplicity {
    pub lower: u32,
    pub upper: Upper,
}

impl Multiplicity {
    pub const ONE: Multiplicity = Multiplicity {
        lower: 1,
        upper: Upper::Bounded(1),
    };
    pub const OPTIONAL: Multiplicity = Multiplicity {
        lower: 0,
        upper: Upper::Bounded(1),
    };
    pub const MANY: Multiplicity = Multiplicity {
        lower: 0,
        upper: Upper::Unbounded,
    };

    pub fn admits(&self, count: usize) -> bool {
        count >= self.lower as usize
            && match self.upper {
                Upper::Bounded(u) => count <= u as usize,
                Upper::Unbounded => true,
            }
    }

    /// Upper bound as a count, `None` if unbounded.
    pub fn upper_count(&self) -> Option<usize> {
        match self.upper {
            Upper::Bounded(u) => Some(u as usize),
            Upper::Unbounded => None,
        }
    }

    pub fn is_single(&self) -> bool {
        self.upper == Upper::Bounded(1)
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.upper {
            Upper::Unbounded if self.lower == 0 => f.write_str("*"),
            Upper::Unbounded => write!(f, "{}..*", self.lower),
            Upper::Bounded(u) if u == self.lower => write!(f, "{u}"),
            Upper::Bounded(u) => write!(f, "{}..{}", self.lower, u),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssociationEnd {
    pub role: String,
    pub class: String,
    pub multiplicity: Multiplicity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Association {
    pub name: String,
    pub ends: [AssociationEnd; 2],
    pub origin: Origin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Invariant {
    pub context: String,
    pub name: String,
    /// Typechecked body.
    pub body: Expr,
    pub source: InvariantSource,
}

/// The text an invariant body was parsed from; spans in `body` index into it.
#[derive(Clone, Debug, Default)]
pub struct InvariantSource {
    pub text: Arc<str>,
    /// Location of the first byte of `text`.
    pub location: Option<SourceLocation>,
}

impl PartialEq for InvariantSource {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl Invariant {
    pub fn qualified_name(&self) -> String {
        format!("{}::{}", self.context, self.name)
    }

    /// Source text of a node of this invariant's body.
    pub fn text_of(&self, expr: &Expr) -> String {
        let text = expr.span.slice(&self.source.text);
        if text.is_empty() {
            expr.to_string()
        } else {
            text.to_string()
        }
    }

    pub fn location_of(&self, expr: &Expr) -> Option<SourceLocation> {
        self.source
            .location
            .as_ref()
            .map(|l| l.advance(&self.source.text, expr.span.start as usize))
    }
}

/// A role reachable from a class: navigating from one end of an association
/// to the other.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoleRef<'a> {
    pub association: &'a Association,
    pub from_end: usize,
    pub to_end: usize,
}

impl<'a> RoleRef<'a> {
    pub fn target(&self) -> &'a AssociationEnd {
        &self.association.ends[self.to_end]
    }
}

impl Model {
    pub fn empty(name: impl Into<String>) -> Self {
        Model {
            name: name.into(),
            classes: vec![],
            associations: vec![],
            invariants: vec![],
        }
    }

    pub fn class(&self, name: &str) -> Option<&Class> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn association(&self, name: &str) -> Option<&Association> {
        self.associations.iter().find(|a| a.name == name)
    }

    pub fn invariant(&self, qualified: &str) -> Option<&Invariant> {
        self.invariants
            .iter()
            .find(|i| i.qualified_name() == qualified)
    }

    /// `name` and all transitive superclasses, nearest first. Tolerates cycles.
    pub fn ancestors(&self, name: &str) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        let mut stack = vec![name];
        while let Some(n) = stack.pop() {
            if out.contains(&n) {
                continue;
            }
            if let Some(c) = self.class(n) {
                out.push(&c.name);
                for p in c.parents.iter().rev() {
                    stack.push(p);
                }
            }
        }
        out
    }

    pub fn conforms_to(&self, sub: &str, sup: &str) -> bool {
        sub == sup || self.ancestors(sub).contains(&sup)
    }

    /// Concrete classes conforming to `name`, in declaration order.
    pub fn concrete_descendants(&self, name: &str) -> Vec<String> {
        self.classes
            .iter()
            .filter(|c| !c.is_abstract && self.conforms_to(&c.name, name))
            .map(|c| c.name.clone())
            .collect()
    }

    /// Attributes of a class including inherited ones, with their declaring class.
    pub fn all_attributes(&self, class: &str) -> Vec<(&str, &Attribute)> {
        let mut out = Vec::new();
        for anc in self.ancestors(class).into_iter().rev() {
            if let Some(c) = self.class(anc) {
                for a in &c.attributes {
                    out.push((c.name.as_str(), a));
                }
            }
        }
        out
    }

    pub fn attribute(&self, class: &str, attr: &str) -> Option<(&str, &Attribute)> {
        self.all_attributes(class)
            .into_iter()
            .find(|(_, a)| a.name == attr)
    }

    /// Roles navigable from instances of `class` (including inherited participation).
    pub fn roles_from(&self, class: &str) -> Vec<RoleRef<'_>> {
        let mut out = Vec::new();
        for assoc in &self.associations {
            for from_end in 0..2 {
                if self.conforms_to(class, &assoc.ends[from_end].class) {
                    out.push(RoleRef {
                        association: assoc,
                        from_end,
                        to_end: 1 - from_end,
                    });
                }
            }
        }
        out
    }

    pub fn role(&self, class: &str, role: &str) -> Option<RoleRef<'_>> {
        self.roles_from(class)
            .into_iter()
            .find(|r| r.target().role == role)
    }

    /// Least common superclass of two classes, if any.
    pub fn common_superclass(&self, a: &str, b: &str) -> Option<String> {
        let bs = self.ancestors(b);
        self.ancestors(a)
            .into_iter()
            .find(|x| bs.contains(x))
            .map(str::to_string)
    }

    /// Whether `sub` conforms to `sup` as OCL types.
    pub fn type_conforms(&self, sub: &OclType, sup: &OclType) -> bool {
        match (sub, sup) {
            (OclType::Void, _) => true,
            (a, b) if a == b => true,
            (OclType::Integer, OclType::Real) => true,
            (OclType::Class(a), OclType::Class(b)) => self.conforms_to(a, b),
            (OclType::Set(a), OclType::Set(b)) | (OclType::Bag(a), OclType::Bag(b)) => {
                self.type_conforms(a, b)
            }
            _ => false,
        }
    }

    /// Least upper bound of two types, if they have one.
    pub fn common_type(&self, a: &OclType, b: &OclType) -> Option<OclType> {
        if self.type_conforms(a, b) {
            return Some(b.clone());
        }
        if self.type_conforms(b, a) {
            return Some(a.clone());
        }
        match (a, b) {
            (OclType::Class(x), OclType::Class(y)) => {
                self.common_superclass(x, y).map(OclType::Class)
            }
            (OclType::Set(x), OclType::Set(y)) => self.common_type(x, y).map(OclType::set),
            (OclType::Bag(x), OclType::Bag(y)) => self.common_type(x, y).map(OclType::bag),
            _ => None,
        }
    }
}

/// Violations of model well-formedness.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("duplicate class `{name}`")]
    DuplicateClass { name: String, location: Option<SourceLocation> },
    #[error("duplicate association `{name}`")]
    DuplicateAssociation { name: String, location: Option<SourceLocation> },
    #[error("duplicate invariant `{name}`")]
    DuplicateInvariant { name: String, location: Option<SourceLocation> },
    #[error("unknown class `{name}`")]
    UnknownClass { name: String, location: Option<SourceLocation> },
    #[error("cyclic generalization involving `{}`", classes.join("`, `"))]
    CyclicGeneralization {
        classes: Vec<String>,
        location: Option<SourceLocation>,
    },
    #[error("attribute `{attribute}` of class `{class}` is declared more than once (including inherited attributes)")]
    DuplicateAttribute {
        class: String,
        attribute: String,
        location: Option<SourceLocation>,
    },
    #[error("attribute `{class}::{attribute}` has type `{ty}`; attributes must be Integer, Real, String or Boolean")]
    UnsupportedAttributeType {
        class: String,
        attribute: String,
        ty: String,
        location: Option<SourceLocation>,
    },
    #[error("role `{role}` is reachable from class `{class}` more than once")]
    DuplicateRole {
        class: String,
        role: String,
        location: Option<SourceLocation>,
    },
    #[error("invalid multiplicity {lower}..{upper} in association `{association}`")]
    InvalidMultiplicity {
        association: String,
        lower: u32,
        upper: u32,
        location: Option<SourceLocation>,
    },
}

impl ModelError {
    pub fn location(&self) -> Option<&SourceLocation> {
        match self {
            ModelError::DuplicateClass { location, .. }
            | ModelError::DuplicateAssociation { location, .. }
            | ModelError::DuplicateInvariant { location, .. }
            | ModelError::UnknownClass { location, .. }
            | ModelError::CyclicGeneralization { location, .. }
            | ModelError::DuplicateAttribute { location, .. }
            | ModelError::UnsupportedAttributeType { location, .. }
            | ModelError::DuplicateRole { location, .. }
            | ModelError::InvalidMultiplicity { location, .. } => location.as_ref(),
        }
    }
}

/// Classes that lie on a generalization cycle, each cycle reported once,
/// members in declaration order.
pub fn generalization_cycles(classes: &[(String, Vec<String>)]) -> Vec<Vec<String>> {
    let index: HashMap<&str, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, (n, _))| (n.as_str(), i))
        .collect();
    let edges: Vec<Vec<usize>> = classes
        .iter()
        .map(|(_, ps)| ps.iter().filter_map(|p| index.get(p.as_str()).copied()).collect())
        .collect();
    // Tarjan's strongly connected components.
    struct Tarjan<'a> {
        edges: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        counter: usize,
        sccs: Vec<Vec<usize>>,
    }
    impl Tarjan<'_> {
        fn visit(&mut self, v: usize) {
            self.index[v] = Some(self.counter);
            self.low[v] = self.counter;
            self.counter += 1;
            self.stack.push(v);
            self.on_stack[v] = true;
            for i in 0..self.edges[v].len() {
                let w = self.edges[v][i];
                match self.index[w] {
                    None => {
                        self.visit(w);
                        self.low[v] = self.low[v].min(self.low[w]);
                    }
                    Some(iw) if self.on_stack[w] => self.low[v] = self.low[v].min(iw),
                    _ => {}
                }
            }
            if Some(self.low[v]) == self.index[v] {
                let mut scc = Vec::new();
                while let Some(w) = self.stack.pop() {
                    self.on_stack[w] = false;
                    scc.push(w);
                    if w == v {
                        break;
                    }
                }
                let cyclic = scc.len() > 1 || self.edges[v].contains(&v);
                if cyclic {
                    scc.sort_unstable();
                    self.sccs.push(scc);
                }
            }
        }
    }
    let n = classes.len();
    let mut t = Tarjan {
        edges: &edges,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: vec![],
        counter: 0,
        sccs: vec![],
    };
    for v in 0..n {
        if t.index[v].is_none() {
            t.visit(v);
        }
    }
    let mut sccs = t.sccs;
    sccs.sort();
    sccs.into_iter()
        .map(|scc| scc.into_iter().map(|i| classes[i].0.clone()).collect())
        .collect()
}

/// Checks every structural invariant of a model. Invariant bodies are not
/// typechecked here.
pub fn check_well_formed(model: &Model) -> Vec<ModelError> {
    let mut errors = Vec::new();
    let loc = |o: &Origin| o.location().cloned();

    let mut seen = HashSet::new();
    for c in &model.classes {
        if !seen.insert(c.name.as_str()) {
            errors.push(ModelError::DuplicateClass {
                name: c.name.clone(),
                location: loc(&c.origin),
            });
        }
    }
    let mut seen = HashSet::new();
    for a in &model.associations {
        if !seen.insert(a.name.as_str()) {
            errors.push(ModelError::DuplicateAssociation {
                name: a.name.clone(),
                location: loc(&a.origin),
            });
        }
    }
    let mut seen = HashSet::new();
    for inv in &model.invariants {
        if !seen.insert(inv.qualified_name()) {
            errors.push(ModelError::DuplicateInvariant {
                name: inv.qualified_name(),
                location: inv.source.location.clone(),
            });
        }
        if model.class(&inv.context).is_none() {
            errors.push(ModelError::UnknownClass {
                name: inv.context.clone(),
                location: inv.source.location.clone(),
            });
        }
    }

    for c in &model.classes {
        for p in &c.parents {
            if model.class(p).is_none() {
                errors.push(ModelError::UnknownClass {
                    name: p.clone(),
                    location: loc(&c.origin),
                });
            }
        }
        for a in &c.attributes {
            if !a.ty.is_basic() {
                errors.push(ModelError::UnsupportedAttributeType {
                    class: c.name.clone(),
                    attribute: a.name.clone(),
                    ty: a.ty.to_string(),
                    location: loc(&a.origin),
                });
            }
        }
    }

    let graph: Vec<(String, Vec<String>)> = model
        .classes
        .iter()
        .map(|c| (c.name.clone(), c.parents.clone()))
        .collect();
    let cycles = generalization_cycles(&graph);
    let cyclic: BTreeSet<&str> = cycles.iter().flatten().map(String::as_str).collect();
    for cycle in &cycles {
        errors.push(ModelError::CyclicGeneralization {
            classes: cycle.clone(),
            location: model.class(&cycle[0]).and_then(|c| loc(&c.origin)),
        });
    }

    for a in &model.associations {
        for end in &a.ends {
            if model.class(&end.class).is_none() {
                errors.push(ModelError::UnknownClass {
                    name: end.class.clone(),
                    location: loc(&a.origin),
                });
            }
            if let Upper::Bounded(u) = end.multiplicity.upper {
                if u == 0 || end.multiplicity.lower > u {
                    errors.push(ModelError::InvalidMultiplicity {
                        association: a.name.clone(),
                        lower: end.multiplicity.lower,
                        upper: u,
                        location: loc(&a.origin),
                    });
                }
            }
        }
    }

    // Inheritance-dependent checks are meaningless on a cyclic hierarchy.
    for c in model.classes.iter().filter(|c| !cyclic.contains(c.name.as_str())) {
        let mut names: BTreeMap<&str, usize> = BTreeMap::new();
        for (_, a) in model.all_attributes(&c.name) {
            *names.entry(a.name.as_str()).or_default() += 1;
        }
        for (name, n) in names {
            if n > 1 && c.attributes.iter().any(|a| a.name == name) {
                errors.push(ModelError::DuplicateAttribute {
                    class: c.name.clone(),
                    attribute: name.to_string(),
                    location: loc(&c.origin),
                });
            }
        }
        let mut roles: BTreeMap<&str, usize> = BTreeMap::new();
        for r in model.roles_from(&c.name) {
            *roles.entry(r.target().role.as_str()).or_default() += 1;
        }
        for (role, n) in roles {
            if n > 1 {
                errors.push(ModelError::DuplicateRole {
                    class: c.name.clone(),
                    role: role.to_string(),
                    location: loc(&c.origin),
                });
            }
        }
    }
    errors
}
