use std::fmt;

/// OCL types supported by the validator.
///
/// `Void` is the element type of an empty collection literal and conforms to
/// every type.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OclType {
    Integer,
    Real,
    String,
    Boolean,
    Class(String),
    Set(Box<OclType>),
    Bag(Box<OclType>),
    Void,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CollectionKind {
    Set,
    Bag,
}

impl CollectionKind {
    pub fn of(self, elem: OclType) -> OclType {
        match self {
            CollectionKind::Set => OclType::Set(Box::new(elem)),
            CollectionKind::Bag => OclType::Bag(Box::new(elem)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CollectionKind::Set => "Set",
            CollectionKind::Bag => "Bag",
        }
    }
}

impl OclType {
    pub fn set(elem: OclType) -> OclType {
        OclType::Set(Box::new(elem))
    }

    pub fn bag(elem: OclType) -> OclType {
        OclType::Bag(Box::new(elem))
    }

    pub fn is_collection(&self) -> bool {
        matches!(self, OclType::Set(_) | OclType::Bag(_))
    }

    pub fn collection_kind(&self) -> Option<CollectionKind> {
        match self {
            OclType::Set(_) => Some(CollectionKind::Set),
            OclType::Bag(_) => Some(CollectionKind::Bag),
            _ => None,
        }
    }

    /// Element type for collections, the type itself otherwise.
    pub fn element(&self) -> &OclType {
        match self {
            OclType::Set(e) | OclType::Bag(e) => e,
            other => other,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, OclType::Integer | OclType::Real)
    }

    pub fn is_basic(&self) -> bool {
        matches!(
            self,
            OclType::Integer | OclType::Real | OclType::String | OclType::Boolean
        )
    }

    pub fn contains_bag(&self) -> bool {
        match self {
            OclType::Bag(_) => true,
            OclType::Set(e) => e.contains_bag(),
            _ => false,
        }
    }

    /// The type the solver semantics works with: every `Bag` becomes a `Set`.
    pub fn solver_view(&self) -> OclType {
        match self {
            OclType::Set(e) | OclType::Bag(e) => OclType::set(e.solver_view()),
            other => other.clone(),
        }
    }

    pub fn basic_from_name(name: &str) -> Option<OclType> {
        match name {
            "Integer" => Some(OclType::Integer),
            "Real" => Some(OclType::Real),
            "String" => Some(OclType::String),
            "Boolean" => Some(OclType::Boolean),
            _ => None,
        }
    }
}

impl fmt::Display for OclType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OclType::Integer => f.write_str("Integer"),
            OclType::Real => f.write_str("Real"),
            OclType::String => f.write_str("String"),
            OclType::Boolean => f.write_str("Boolean"),
            OclType::Class(name) => f.write_str(name),
            OclType::Set(e) => write!(f, "Set({e})"),
            OclType::Bag(e) => write!(f, "Bag({e})"),
            OclType::Void => f.write_str("OclVoid"),
        }
    }
}

/// Standard and solver types of one expression node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeAnnotation {
    pub standard: OclType,
    pub solver: OclType,
}

impl TypeAnnotation {
    pub fn new(standard: OclType) -> Self {
        let solver = standard.solver_view();
        TypeAnnotation { standard, solver }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_view_removes_bags() {
        let t = OclType::bag(OclType::Integer);
        assert_eq!(t.solver_view(), OclType::set(OclType::Integer));
        assert!(!t.solver_view().contains_bag());
        assert_eq!(t.to_string(), "Bag(Integer)");
    }
}
