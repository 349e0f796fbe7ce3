use std::fmt;

use super::types::{CollectionKind, TypeAnnotation};
use crate::location::Span;

#[derive(Clone, Debug, PartialEq)]
pub enum Literal {
    Integer(i64),
    Real(f64),
    String(String),
    Boolean(bool),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    And,
    Or,
    Xor,
    Implies,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Eq => "=",
            BinaryOp::Ne => "<>",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "div",
            BinaryOp::And => "and",
            BinaryOp::Or => "or",
            BinaryOp::Xor => "xor",
            BinaryOp::Implies => "implies",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinaryOp::Implies => 1,
            BinaryOp::Or | BinaryOp::Xor => 2,
            BinaryOp::And => 3,
            BinaryOp::Eq | BinaryOp::Ne => 4,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 5,
            BinaryOp::Add | BinaryOp::Sub => 6,
            BinaryOp::Mul | BinaryOp::Div => 7,
        }
    }

    pub fn is_boolean(self) -> bool {
        matches!(
            self,
            BinaryOp::And | BinaryOp::Or | BinaryOp::Xor | BinaryOp::Implies
        )
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(
            self,
            BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div
        )
    }

    pub fn is_ordering(self) -> bool {
        matches!(
            self,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IteratorKind {
    ForAll,
    Exists,
    Select,
    Reject,
    Collect,
    IsUnique,
    One,
    Closure,
}

impl IteratorKind {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "forAll" => IteratorKind::ForAll,
            "exists" => IteratorKind::Exists,
            "select" => IteratorKind::Select,
            "reject" => IteratorKind::Reject,
            "collect" => IteratorKind::Collect,
            "isUnique" => IteratorKind::IsUnique,
            "one" => IteratorKind::One,
            "closure" => IteratorKind::Closure,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            IteratorKind::ForAll => "forAll",
            IteratorKind::Exists => "exists",
            IteratorKind::Select => "select",
            IteratorKind::Reject => "reject",
            IteratorKind::Collect => "collect",
            IteratorKind::IsUnique => "isUnique",
            IteratorKind::One => "one",
            IteratorKind::Closure => "closure",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CollectionOp {
    Size,
    Sum,
    IsEmpty,
    NotEmpty,
    AsSet,
    Includes,
    Excludes,
    Including,
    Excluding,
    Union,
    Intersection,
}

impl CollectionOp {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "size" => CollectionOp::Size,
            "sum" => CollectionOp::Sum,
            "isEmpty" => CollectionOp::IsEmpty,
            "notEmpty" => CollectionOp::NotEmpty,
            "asSet" => CollectionOp::AsSet,
            "includes" => CollectionOp::Includes,
            "excludes" => CollectionOp::Excludes,
            "including" => CollectionOp::Including,
            "excluding" => CollectionOp::Excluding,
            "union" => CollectionOp::Union,
            "intersection" => CollectionOp::Intersection,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            CollectionOp::Size => "size",
            CollectionOp::Sum => "sum",
            CollectionOp::IsEmpty => "isEmpty",
            CollectionOp::NotEmpty => "notEmpty",
            CollectionOp::AsSet => "asSet",
            CollectionOp::Includes => "includes",
            CollectionOp::Excludes => "excludes",
            CollectionOp::Including => "including",
            CollectionOp::Excluding => "excluding",
            CollectionOp::Union => "union",
            CollectionOp::Intersection => "intersection",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            CollectionOp::Size
            | CollectionOp::Sum
            | CollectionOp::IsEmpty
            | CollectionOp::NotEmpty
            | CollectionOp::AsSet => 0,
            _ => 1,
        }
    }
}

/// An iterator variable as written, with an optional declared type name.
#[derive(Clone, Debug, PartialEq)]
pub struct IterVar {
    pub name: String,
    pub type_name: Option<String>,
}

/// OCL expression tree.
///
/// The parser produces the syntactic forms (`Property`, `DotCall`,
/// `ArrowCall`, `CollectionLiteral` with a raw kind name); typechecking
/// rewrites them into the resolved forms and fills `ann` on every node.
#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
    pub ann: Option<TypeAnnotation>,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.ann == other.ann
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Literal(Literal),
    Var {
        name: String,
        implicit: bool,
    },
    /// `source.name`, or a bare `name` when `source` is absent.
    Property {
        source: Option<Box<Expr>>,
        name: String,
    },
    /// `source.name(args)`
    DotCall {
        source: Box<Expr>,
        name: String,
        args: Vec<Expr>,
    },
    /// `source->name(vars | args)`
    ArrowCall {
        source: Box<Expr>,
        name: String,
        vars: Vec<IterVar>,
        args: Vec<Expr>,
    },
    /// `Kind{items}`; `kind` is the name as written.
    CollectionLiteral {
        kind: String,
        items: Vec<Expr>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    If {
        cond: Box<Expr>,
        then_branch: Box<Expr>,
        else_branch: Box<Expr>,
    },

    // Resolved forms.
    Attribute {
        source: Box<Expr>,
        name: String,
    },
    Navigation {
        source: Box<Expr>,
        role: String,
        association: String,
        /// Index of the association end being navigated to.
        to_end: usize,
    },
    AllInstances {
        class: String,
        /// Concrete classes conforming to `class`.
        extent: Vec<String>,
    },
    SetLiteral {
        kind: CollectionKind,
        items: Vec<Expr>,
    },
    Iterate {
        kind: IteratorKind,
        source: Box<Expr>,
        var: String,
        implicit_var: bool,
        body: Box<Expr>,
    },
    Collection {
        op: CollectionOp,
        source: Box<Expr>,
        args: Vec<Expr>,
    },
    /// A single value used as the source of `->`; denotes a one-element set.
    ImplicitSet {
        operand: Box<Expr>,
    },
    OclAsSet {
        operand: Box<Expr>,
    },
    OclIsKindOf {
        operand: Box<Expr>,
        class: String,
        conforming: Vec<String>,
    },
    OclAsType {
        operand: Box<Expr>,
        class: String,
        conforming: Vec<String>,
    },
    OclIsUndefined {
        operand: Box<Expr>,
    },
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr {
            kind,
            span,
            ann: None,
        }
    }

    pub fn boxed(self) -> Box<Expr> {
        Box::new(self)
    }

    /// Direct children in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        use ExprKind::*;
        match &self.kind {
            Literal(_) | Var { .. } | AllInstances { .. } => vec![],
            Property { source, .. } => source.iter().map(|s| &**s).collect(),
            DotCall { source, args, .. } | ArrowCall { source, args, .. } => {
                std::iter::once(&**source).chain(args.iter()).collect()
            }
            Collection { source, args, .. } => std::iter::once(&**source).chain(args.iter()).collect(),
            CollectionLiteral { items, .. } | SetLiteral { items, .. } => items.iter().collect(),
            Binary { lhs, rhs, .. } => vec![lhs, rhs],
            Unary { operand, .. }
            | ImplicitSet { operand }
            | OclAsSet { operand }
            | OclIsKindOf { operand, .. }
            | OclAsType { operand, .. }
            | OclIsUndefined { operand } => vec![operand],
            If {
                cond,
                then_branch,
                else_branch,
            } => vec![cond, then_branch, else_branch],
            Attribute { source, .. } | Navigation { source, .. } => vec![source],
            Iterate { source, body, .. } => vec![source, body],
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Binary { op, .. } => op.precedence(),
            ExprKind::Unary { .. } => 8,
            ExprKind::Literal(Literal::Integer(v)) if *v < 0 => 8,
            ExprKind::Literal(Literal::Real(v)) if *v < 0.0 => 8,
            _ => 9,
        }
    }

    fn is_implicit_var(&self) -> bool {
        matches!(self.kind, ExprKind::Var { implicit: true, .. })
    }
}

fn write_source(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    if e.precedence() < 9 {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, items: &[Expr]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

pub(crate) fn write_string_literal(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('\'')?;
    for ch in s.chars() {
        match ch {
            '\'' => f.write_str("\\'")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('\'')
}

pub(crate) fn format_real(v: f64) -> String {
    let s = format!("{v:?}");
    if s.contains(['.', 'e', 'E', 'N', 'i']) {
        s
    } else {
        format!("{s}.0")
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Integer(v) => write!(f, "{v}"),
            Literal::Real(v) => f.write_str(&format_real(*v)),
            Literal::String(s) => write_string_literal(f, s),
            Literal::Boolean(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ExprKind::*;
        match &self.kind {
            Literal(l) => write!(f, "{l}"),
            Var { name, .. } => f.write_str(name),
            Property { source, name } => {
                if let Some(s) = source {
                    write_source(f, s)?;
                    f.write_str(".")?;
                }
                f.write_str(name)
            }
            Attribute { source, name } | Navigation { source, role: name, .. } => {
                if !source.is_implicit_var() {
                    write_source(f, source)?;
                    f.write_str(".")?;
                }
                f.write_str(name)
            }
            DotCall { source, name, args } => {
                write_source(f, source)?;
                write!(f, ".{name}(")?;
                write_list(f, args)?;
                f.write_str(")")
            }
            ArrowCall {
                source,
                name,
                vars,
                args,
            } => {
                write_source(f, source)?;
                write!(f, "->{name}(")?;
                if !vars.is_empty() {
                    for (i, v) in vars.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        f.write_str(&v.name)?;
                        if let Some(t) = &v.type_name {
                            write!(f, " : {t}")?;
                        }
                    }
                    f.write_str(" | ")?;
                }
                write_list(f, args)?;
                f.write_str(")")
            }
            CollectionLiteral { kind, items } => {
                write!(f, "{kind}{{")?;
                write_list(f, items)?;
                f.write_str("}")
            }
            SetLiteral { kind, items } => {
                write!(f, "{}{{", kind.name())?;
                write_list(f, items)?;
                f.write_str("}")
            }
            Binary { op, lhs, rhs } => {
                let p = op.precedence();
                if lhs.precedence() < p {
                    write!(f, "({lhs})")?;
                } else {
                    write!(f, "{lhs}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if rhs.precedence() <= p {
                    write!(f, "({rhs})")
                } else {
                    write!(f, "{rhs}")
                }
            }
            Unary { op, operand } => {
                match op {
                    UnaryOp::Not => f.write_str("not ")?,
                    UnaryOp::Neg => f.write_str("-")?,
                }
                if operand.precedence() < 8 || matches!(operand.kind, Unary { .. }) {
                    write!(f, "({operand})")
                } else {
                    write!(f, "{operand}")
                }
            }
            If {
                cond,
                then_branch,
                else_branch,
            } => write!(f, "if {cond} then {then_branch} else {else_branch} endif"),
            AllInstances { class, .. } => write!(f, "{class}.allInstances()"),
            Iterate {
                kind,
                source,
                var,
                implicit_var,
                body,
            } => {
                write_source(f, source)?;
                if *implicit_var {
                    write!(f, "->{}({body})", kind.name())
                } else {
                    write!(f, "->{}({var} | {body})", kind.name())
                }
            }
            Collection { op, source, args } => {
                write_source(f, source)?;
                write!(f, "->{}(", op.name())?;
                write_list(f, args)?;
                f.write_str(")")
            }
            ImplicitSet { operand } => write!(f, "{operand}"),
            OclAsSet { operand } => {
                write_source(f, operand)?;
                f.write_str(".oclAsSet()")
            }
            OclIsKindOf { operand, class, .. } => {
                write_source(f, operand)?;
                write!(f, ".oclIsKindOf({class})")
            }
            OclAsType { operand, class, .. } => {
                write_source(f, operand)?;
                write!(f, ".oclAsType({class})")
            }
            OclIsUndefined { operand } => {
                write_source(f, operand)?;
                f.write_str(".oclIsUndefined()")
            }
        }
    }
}
