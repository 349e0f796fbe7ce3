//! Name resolution and dual typing of OCL expressions.
//!
//! Every node receives a standard OCL type and the type the solver semantics
//! works with, which is the standard type with each `Bag` read as a `Set`.

use super::ast::*;
use super::types::{CollectionKind, OclType, TypeAnnotation};
use crate::location::Span;
use crate::model::Model;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{message}")]
pub struct TypeError {
    pub message: String,
    pub span: Span,
}

impl TypeError {
    fn new(span: Span, message: impl Into<String>) -> Self {
        TypeError {
            message: message.into(),
            span,
        }
    }
}

type Result<T> = std::result::Result<T, TypeError>;

const UNSUPPORTED_COLLECTIONS: &[&str] = &["Sequence", "OrderedSet"];
const UNSUPPORTED_CONVERSIONS: &[&str] = &["asSequence", "asOrderedSet", "asBag"];

/// Typechecks `expr` with the given variable bindings.
///
/// A binding named `self` of class type also serves as the implicit source
/// for bare attribute and role names.
pub fn typecheck(expr: &Expr, env: &[(String, OclType)], model: &Model) -> Result<Expr> {
    let mut checker = Checker {
        model,
        scopes: env.to_vec(),
        implicit: Vec::new(),
        depth: 0,
    };
    if let Some((_, t @ OclType::Class(_))) = env.iter().rev().find(|(n, _)| n == "self") {
        checker.implicit.push(("self".to_string(), t.clone()));
    }
    checker.check(expr)
}

struct Checker<'m> {
    model: &'m Model,
    scopes: Vec<(String, OclType)>,
    implicit: Vec<(String, OclType)>,
    depth: usize,
}

fn annotated(kind: ExprKind, span: Span, ty: OclType) -> Expr {
    Expr {
        kind,
        span,
        ann: Some(TypeAnnotation::new(ty)),
    }
}

fn ty(e: &Expr) -> &OclType {
    &e.ann.as_ref().expect("checked expression carries a type").standard
}

impl Checker<'_> {
    fn lookup_var(&self, name: &str) -> Option<&OclType> {
        self.scopes
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }

    fn has_property(&self, class: &str, name: &str) -> bool {
        self.model.attribute(class, name).is_some() || self.model.role(class, name).is_some()
    }

    fn check(&mut self, e: &Expr) -> Result<Expr> {
        use ExprKind as K;
        let span = e.span;
        match &e.kind {
            K::Literal(l) => {
                let t = match l {
                    Literal::Integer(_) => OclType::Integer,
                    Literal::Real(_) => OclType::Real,
                    Literal::String(_) => OclType::String,
                    Literal::Boolean(_) => OclType::Boolean,
                };
                Ok(annotated(e.kind.clone(), span, t))
            }
            K::Var { name, .. } => {
                let t = self
                    .lookup_var(name)
                    .cloned()
                    .ok_or_else(|| TypeError::new(span, format!("unknown variable `{name}`")))?;
                Ok(annotated(e.kind.clone(), span, t))
            }
            K::Property { source: None, name } => {
                if let Some(t) = self.lookup_var(name) {
                    return Ok(annotated(
                        K::Var {
                            name: name.clone(),
                            implicit: false,
                        },
                        span,
                        t.clone(),
                    ));
                }
                let found = self.implicit.iter().rev().find(|(_, t)| match t {
                    OclType::Class(c) => self.has_property(c, name),
                    _ => false,
                });
                match found {
                    Some((var, t)) => {
                        let source = annotated(
                            K::Var {
                                name: var.clone(),
                                implicit: true,
                            },
                            span,
                            t.clone(),
                        );
                        self.resolve_property(source, name, span)
                    }
                    None if self.model.class(name).is_some() => Err(TypeError::new(
                        span,
                        format!("class `{name}` cannot be used as a value"),
                    )),
                    None => Err(TypeError::new(span, format!("unknown identifier `{name}`"))),
                }
            }
            K::Property {
                source: Some(source),
                name,
            } => {
                let source = self.check(source)?;
                self.resolve_property(source, name, span)
            }
            K::Attribute { source, name } => {
                let source = self.check(source)?;
                self.resolve_property(source, name, span)
            }
            K::Navigation { source, role, .. } => {
                let source = self.check(source)?;
                self.resolve_property(source, role, span)
            }
            K::DotCall { source, name, args } => self.check_dot_call(source, name, args, span),
            K::AllInstances { class, .. } => self.all_instances(class, span),
            K::OclAsSet { operand } => self.check_dot_call(operand, "oclAsSet", &[], span),
            K::OclIsUndefined { operand } => {
                self.check_dot_call(operand, "oclIsUndefined", &[], span)
            }
            K::OclIsKindOf { operand, class, .. } => {
                let operand = self.check(operand)?;
                self.kind_of(operand, class, span, false)
            }
            K::OclAsType { operand, class, .. } => {
                let operand = self.check(operand)?;
                self.kind_of(operand, class, span, true)
            }
            K::ArrowCall {
                source,
                name,
                vars,
                args,
            } => {
                let source = self.check(source)?;
                self.check_arrow(source, name, vars, args, span)
            }
            K::Iterate {
                kind,
                source,
                var,
                implicit_var,
                body,
            } => {
                let source = self.check(source)?;
                let vars = if *implicit_var {
                    vec![]
                } else {
                    vec![IterVar {
                        name: var.clone(),
                        type_name: None,
                    }]
                };
                self.check_arrow(source, kind.name(), &vars, std::slice::from_ref(body), span)
            }
            K::Collection { op, source, args } => {
                let source = self.check(source)?;
                self.check_arrow(source, op.name(), &[], args, span)
            }
            K::ImplicitSet { operand } => {
                let operand = self.check(operand)?;
                Ok(self.as_collection(operand))
            }
            K::CollectionLiteral { kind, items } => {
                let kind = match kind.as_str() {
                    "Set" => CollectionKind::Set,
                    "Bag" => CollectionKind::Bag,
                    k if UNSUPPORTED_COLLECTIONS.contains(&k) => {
                        return Err(TypeError::new(
                            span,
                            format!("collection type `{k}` is not supported; only Set and Bag are"),
                        ))
                    }
                    k => {
                        return Err(TypeError::new(
                            span,
                            format!("unknown collection type `{k}`"),
                        ))
                    }
                };
                self.collection_literal(kind, items, span)
            }
            K::SetLiteral { kind, items } => self.collection_literal(*kind, items, span),
            K::Binary { op, lhs, rhs } => {
                let lhs = self.check(lhs)?;
                let rhs = self.check(rhs)?;
                self.binary(*op, lhs, rhs, span)
            }
            K::Unary { op, operand } => {
                let operand = self.check(operand)?;
                let t = ty(&operand).clone();
                let result = match op {
                    UnaryOp::Not if t == OclType::Boolean => t,
                    UnaryOp::Neg if t.is_numeric() => t,
                    UnaryOp::Not => {
                        return Err(TypeError::new(span, format!("`not` expects Boolean, found `{t}`")))
                    }
                    UnaryOp::Neg => {
                        return Err(TypeError::new(span, format!("`-` expects a number, found `{t}`")))
                    }
                };
                Ok(annotated(
                    K::Unary {
                        op: *op,
                        operand: operand.boxed(),
                    },
                    span,
                    result,
                ))
            }
            K::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let cond = self.check(cond)?;
                if ty(&cond) != &OclType::Boolean {
                    return Err(TypeError::new(
                        cond.span,
                        format!("condition must be Boolean, found `{}`", ty(&cond)),
                    ));
                }
                let then_branch = self.check(then_branch)?;
                let else_branch = self.check(else_branch)?;
                let t = self
                    .model
                    .common_type(ty(&then_branch), ty(&else_branch))
                    .ok_or_else(|| {
                        TypeError::new(
                            span,
                            format!(
                                "branches have incompatible types `{}` and `{}`",
                                ty(&then_branch),
                                ty(&else_branch)
                            ),
                        )
                    })?;
                Ok(annotated(
                    K::If {
                        cond: cond.boxed(),
                        then_branch: then_branch.boxed(),
                        else_branch: else_branch.boxed(),
                    },
                    span,
                    t,
                ))
            }
        }
    }

    fn resolve_property(&mut self, source: Expr, name: &str, span: Span) -> Result<Expr> {
        let (class, from_collection) = match ty(&source) {
            OclType::Class(c) => (c.clone(), false),
            OclType::Set(e) | OclType::Bag(e) => match &**e {
                OclType::Class(c) => (c.clone(), true),
                other => {
                    return Err(TypeError::new(
                        span,
                        format!("cannot access `{name}` on elements of type `{other}`"),
                    ))
                }
            },
            other => {
                return Err(TypeError::new(
                    span,
                    format!("cannot access `{name}` on a value of type `{other}`"),
                ))
            }
        };
        if let Some((_, attr)) = self.model.attribute(&class, name) {
            let t = if from_collection {
                OclType::bag(attr.ty.clone())
            } else {
                attr.ty.clone()
            };
            return Ok(annotated(
                ExprKind::Attribute {
                    source: source.boxed(),
                    name: name.to_string(),
                },
                span,
                t,
            ));
        }
        if let Some(role) = self.model.role(&class, name) {
            let target = role.target();
            let elem = OclType::Class(target.class.clone());
            let t = if from_collection {
                OclType::bag(elem)
            } else if target.multiplicity.is_single() {
                elem
            } else {
                OclType::set(elem)
            };
            return Ok(annotated(
                ExprKind::Navigation {
                    source: source.boxed(),
                    role: name.to_string(),
                    association: role.association.name.clone(),
                    to_end: role.to_end,
                },
                span,
                t,
            ));
        }
        Err(TypeError::new(
            span,
            format!("class `{class}` has no attribute or role `{name}`"),
        ))
    }

    fn all_instances(&self, class: &str, span: Span) -> Result<Expr> {
        if self.model.class(class).is_none() {
            return Err(TypeError::new(span, format!("unknown class `{class}`")));
        }
        Ok(annotated(
            ExprKind::AllInstances {
                class: class.to_string(),
                extent: self.model.concrete_descendants(class),
            },
            span,
            OclType::set(OclType::Class(class.to_string())),
        ))
    }

    fn kind_of(&self, operand: Expr, class: &str, span: Span, cast: bool) -> Result<Expr> {
        if self.model.class(class).is_none() {
            return Err(TypeError::new(span, format!("unknown class `{class}`")));
        }
        if !matches!(ty(&operand), OclType::Class(_)) {
            return Err(TypeError::new(
                span,
                format!("type test on non-object type `{}`", ty(&operand)),
            ));
        }
        let conforming = self.model.concrete_descendants(class);
        if cast {
            Ok(annotated(
                ExprKind::OclAsType {
                    operand: operand.boxed(),
                    class: class.to_string(),
                    conforming,
                },
                span,
                OclType::Class(class.to_string()),
            ))
        } else {
            Ok(annotated(
                ExprKind::OclIsKindOf {
                    operand: operand.boxed(),
                    class: class.to_string(),
                    conforming,
                },
                span,
                OclType::Boolean,
            ))
        }
    }

    fn check_dot_call(&mut self, source: &Expr, name: &str, args: &[Expr], span: Span) -> Result<Expr> {
        let arity = |n: usize| -> Result<()> {
            if args.len() != n {
                Err(TypeError::new(
                    span,
                    format!("`{name}` expects {n} argument(s), found {}", args.len()),
                ))
            } else {
                Ok(())
            }
        };
        match name {
            "allInstances" => {
                arity(0)?;
                match &source.kind {
                    ExprKind::Property { source: None, name: cls }
                        if self.lookup_var(cls).is_none() =>
                    {
                        self.all_instances(cls, span)
                    }
                    _ => Err(TypeError::new(
                        span,
                        "`allInstances` must be applied to a class name",
                    )),
                }
            }
            "oclAsSet" => {
                arity(0)?;
                let operand = self.check(source)?;
                let t = match ty(&operand) {
                    OclType::Set(e) | OclType::Bag(e) => OclType::set((**e).clone()),
                    other => OclType::set(other.clone()),
                };
                Ok(annotated(
                    ExprKind::OclAsSet {
                        operand: operand.boxed(),
                    },
                    span,
                    t,
                ))
            }
            "oclIsUndefined" => {
                arity(0)?;
                let operand = self.check(source)?;
                Ok(annotated(
                    ExprKind::OclIsUndefined {
                        operand: operand.boxed(),
                    },
                    span,
                    OclType::Boolean,
                ))
            }
            "oclIsKindOf" | "oclAsType" => {
                arity(1)?;
                let class = match &args[0].kind {
                    ExprKind::Property { source: None, name } => name.clone(),
                    _ => return Err(TypeError::new(args[0].span, "expected a class name")),
                };
                let operand = self.check(source)?;
                self.kind_of(operand, &class, span, name == "oclAsType")
            }
            n if UNSUPPORTED_CONVERSIONS.contains(&n) => Err(TypeError::new(
                span,
                format!("operation `{n}` is not supported; only Set and Bag collections are"),
            )),
            n => Err(TypeError::new(span, format!("unknown operation `{n}`"))),
        }
    }

    /// Wraps a single value used as a collection into a one-element set.
    fn as_collection(&self, operand: Expr) -> Expr {
        if ty(&operand).is_collection() {
            return operand;
        }
        let t = OclType::set(ty(&operand).clone());
        let span = operand.span;
        annotated(
            ExprKind::ImplicitSet {
                operand: operand.boxed(),
            },
            span,
            t,
        )
    }

    fn check_arrow(
        &mut self,
        source: Expr,
        name: &str,
        vars: &[IterVar],
        args: &[Expr],
        span: Span,
    ) -> Result<Expr> {
        let source = self.as_collection(source);
        if let Some(kind) = IteratorKind::from_name(name) {
            return self.iterate(kind, source, vars, args, span);
        }
        if !vars.is_empty() {
            return Err(TypeError::new(
                span,
                format!("`{name}` does not take iterator variables"),
            ));
        }
        if let Some(op) = CollectionOp::from_name(name) {
            if args.len() != op.arity() {
                return Err(TypeError::new(
                    span,
                    format!("`{name}` expects {} argument(s), found {}", op.arity(), args.len()),
                ));
            }
            let args = args.iter().map(|a| self.check(a)).collect::<Result<Vec<_>>>()?;
            return self.collection_op(op, source, args, span);
        }
        if UNSUPPORTED_CONVERSIONS.contains(&name) {
            return Err(TypeError::new(
                span,
                format!("operation `{name}` is not supported; only Set and Bag collections are"),
            ));
        }
        Err(TypeError::new(span, format!("unknown collection operation `{name}`")))
    }

    fn iterate(
        &mut self,
        kind: IteratorKind,
        source: Expr,
        vars: &[IterVar],
        args: &[Expr],
        span: Span,
    ) -> Result<Expr> {
        if args.len() != 1 {
            return Err(TypeError::new(
                span,
                format!("`{}` expects one body expression", kind.name()),
            ));
        }
        if vars.len() > 1 {
            if !matches!(kind, IteratorKind::ForAll | IteratorKind::Exists) {
                return Err(TypeError::new(
                    span,
                    format!("`{}` takes at most one iterator variable", kind.name()),
                ));
            }
            // forAll(a, b | e) == forAll(a | source->forAll(b | e))
            let inner = Expr::new(
                ExprKind::ArrowCall {
                    source: Box::new(source.clone()),
                    name: kind.name().to_string(),
                    vars: vars[1..].to_vec(),
                    args: args.to_vec(),
                },
                span,
            );
            return self.iterate(kind, source, &vars[..1], std::slice::from_ref(&inner), span);
        }
        let elem = ty(&source).element().clone();
        let (var, implicit) = match vars.first() {
            Some(v) => {
                if let Some(tn) = &v.type_name {
                    let declared = self.resolve_type_name(tn, span)?;
                    if !self.model.type_conforms(&elem, &declared) {
                        return Err(TypeError::new(
                            span,
                            format!("iterator variable `{}` declared `{declared}` but elements are `{elem}`", v.name),
                        ));
                    }
                }
                (v.name.clone(), false)
            }
            None => (format!("$it{}", self.depth + 1), true),
        };
        self.scopes.push((var.clone(), elem.clone()));
        if implicit {
            self.implicit.push((var.clone(), elem.clone()));
        }
        self.depth += 1;
        let body = self.check(&args[0]);
        self.depth -= 1;
        if implicit {
            self.implicit.pop();
        }
        self.scopes.pop();
        let body = body?;
        let body_ty = ty(&body).clone();
        let need_bool = |b: &OclType| -> Result<()> {
            if b != &OclType::Boolean {
                Err(TypeError::new(
                    span,
                    format!("`{}` body must be Boolean, found `{b}`", kind.name()),
                ))
            } else {
                Ok(())
            }
        };
        let result = match kind {
            IteratorKind::ForAll | IteratorKind::Exists | IteratorKind::One => {
                need_bool(&body_ty)?;
                OclType::Boolean
            }
            IteratorKind::Select | IteratorKind::Reject => {
                need_bool(&body_ty)?;
                ty(&source).clone()
            }
            IteratorKind::IsUnique => {
                if body_ty.is_collection() {
                    return Err(TypeError::new(span, "`isUnique` body must not be a collection"));
                }
                OclType::Boolean
            }
            IteratorKind::Collect => OclType::bag(body_ty.element().clone()),
            IteratorKind::Closure => {
                let step = body_ty.element();
                let joined = self.model.common_type(&elem, step).filter(|t| {
                    matches!(t, OclType::Class(_))
                });
                match joined {
                    Some(t) => OclType::set(t),
                    None => {
                        return Err(TypeError::new(
                            span,
                            format!("`closure` body of type `{body_ty}` does not yield elements compatible with `{elem}`"),
                        ))
                    }
                }
            }
        };
        Ok(annotated(
            ExprKind::Iterate {
                kind,
                source: source.boxed(),
                var,
                implicit_var: implicit,
                body: body.boxed(),
            },
            span,
            result,
        ))
    }

    fn resolve_type_name(&self, name: &str, span: Span) -> Result<OclType> {
        if let Some(t) = OclType::basic_from_name(name) {
            return Ok(t);
        }
        if self.model.class(name).is_some() {
            return Ok(OclType::Class(name.to_string()));
        }
        Err(TypeError::new(span, format!("unknown type `{name}`")))
    }

    fn single_arg(&self, arg: &Expr, elem: &OclType, what: &str, span: Span) -> Result<OclType> {
        let at = ty(arg);
        if at.is_collection() {
            return Err(TypeError::new(
                span,
                format!("`{what}` argument must not be a collection (nested collections are not supported)"),
            ));
        }
        self.model.common_type(elem, at).ok_or_else(|| {
            TypeError::new(
                span,
                format!("`{what}` argument of type `{at}` is incompatible with elements of type `{elem}`"),
            )
        })
    }

    fn collection_op(&self, op: CollectionOp, source: Expr, args: Vec<Expr>, span: Span) -> Result<Expr> {
        let st = ty(&source).clone();
        let kind = st.collection_kind().expect("source wrapped into a collection");
        let elem = st.element().clone();
        let result = match op {
            CollectionOp::Size => OclType::Integer,
            CollectionOp::IsEmpty | CollectionOp::NotEmpty => OclType::Boolean,
            CollectionOp::Sum => match elem {
                OclType::Integer | OclType::Real => elem,
                OclType::Void => OclType::Integer,
                other => {
                    return Err(TypeError::new(
                        span,
                        format!("`sum` requires numeric elements, found `{other}`"),
                    ))
                }
            },
            CollectionOp::AsSet => OclType::set(elem),
            CollectionOp::Includes | CollectionOp::Excludes => {
                self.single_arg(&args[0], &elem, op.name(), span)?;
                OclType::Boolean
            }
            CollectionOp::Including | CollectionOp::Excluding => {
                kind.of(self.single_arg(&args[0], &elem, op.name(), span)?)
            }
            CollectionOp::Union | CollectionOp::Intersection => {
                let at = ty(&args[0]);
                let Some(other_kind) = at.collection_kind() else {
                    return Err(TypeError::new(
                        span,
                        format!("`{}` expects a collection argument, found `{at}`", op.name()),
                    ));
                };
                let joined = self.model.common_type(&elem, at.element()).ok_or_else(|| {
                    TypeError::new(
                        span,
                        format!("`{}` of incompatible element types `{elem}` and `{}`", op.name(), at.element()),
                    )
                })?;
                let both_sets = kind == CollectionKind::Set && other_kind == CollectionKind::Set;
                let both_bags = kind == CollectionKind::Bag && other_kind == CollectionKind::Bag;
                let result_kind = match op {
                    CollectionOp::Union if both_sets => CollectionKind::Set,
                    CollectionOp::Union => CollectionKind::Bag,
                    _ if both_bags => CollectionKind::Bag,
                    _ => CollectionKind::Set,
                };
                result_kind.of(joined)
            }
        };
        Ok(annotated(
            ExprKind::Collection {
                op,
                source: source.boxed(),
                args,
            },
            span,
            result,
        ))
    }

    fn collection_literal(&mut self, kind: CollectionKind, items: &[Expr], span: Span) -> Result<Expr> {
        let items = items.iter().map(|i| self.check(i)).collect::<Result<Vec<_>>>()?;
        let mut elem = OclType::Void;
        for item in &items {
            let t = ty(item);
            if t.is_collection() {
                return Err(TypeError::new(
                    item.span,
                    "nested collections are not supported",
                ));
            }
            elem = self.model.common_type(&elem, t).ok_or_else(|| {
                TypeError::new(
                    item.span,
                    format!("collection element of type `{t}` is incompatible with `{elem}`"),
                )
            })?;
        }
        Ok(annotated(ExprKind::SetLiteral { kind, items }, span, kind.of(elem)))
    }

    fn binary(&self, op: BinaryOp, lhs: Expr, rhs: Expr, span: Span) -> Result<Expr> {
        let (lt, rt) = (ty(&lhs).clone(), ty(&rhs).clone());
        let mismatch = || {
            TypeError::new(
                span,
                format!("operator `{}` cannot be applied to `{lt}` and `{rt}`", op.symbol()),
            )
        };
        let result = if op.is_boolean() {
            if lt != OclType::Boolean || rt != OclType::Boolean {
                return Err(mismatch());
            }
            OclType::Boolean
        } else if op.is_arithmetic() {
            match op {
                BinaryOp::Div if lt == OclType::Integer && rt == OclType::Integer => OclType::Integer,
                BinaryOp::Div => return Err(mismatch()),
                _ if lt == OclType::Integer && rt == OclType::Integer => OclType::Integer,
                _ if lt.is_numeric() && rt.is_numeric() => OclType::Real,
                _ => return Err(mismatch()),
            }
        } else if op.is_ordering() {
            let ok = (lt.is_numeric() && rt.is_numeric())
                || (lt == OclType::String && rt == OclType::String);
            if !ok {
                return Err(mismatch());
            }
            OclType::Boolean
        } else {
            // = and <>
            let comparable = match (&lt, &rt) {
                (a, b) if a.is_collection() && b.is_collection() => {
                    let (ea, eb) = (a.element(), b.element());
                    self.model.common_type(ea, eb).is_some()
                        || matches!((ea, eb), (OclType::Class(_), OclType::Class(_)))
                }
                (a, b) if a.is_collection() || b.is_collection() => false,
                (OclType::Class(_), OclType::Class(_)) => true,
                (a, b) => self.model.common_type(a, b).is_some(),
            };
            if !comparable {
                return Err(mismatch());
            }
            OclType::Boolean
        };
        Ok(annotated(
            ExprKind::Binary {
                op,
                lhs: lhs.boxed(),
                rhs: rhs.boxed(),
            },
            span,
            result,
        ))
    }
}
