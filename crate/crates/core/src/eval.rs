//! Evaluation of typechecked OCL expressions over a system state.
//!
//! Two modes are supported. `Standard` follows the usual OCL rules for the
//! supported subset. `Solver` reads every bag as a set at the node producing
//! it and computes integers in a signed two's-complement range of the given
//! bitwidth, wrapping on overflow.

use std::collections::{BTreeSet, HashMap};

use crate::location::Span;
use crate::model::{Invariant, Model};
use crate::ocl::{BinaryOp, CollectionOp, Expr, ExprKind, IteratorKind, Literal, OclType, UnaryOp};
use crate::state::{SystemState, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Standard,
    Solver { bitwidth: u32 },
}

/// Maps `v` into the signed range of a `bits`-wide two's-complement integer.
pub fn wrap(v: i128, bits: u32) -> i64 {
    debug_assert!((1..=64).contains(&bits));
    let m = 1i128 << bits;
    let r = v.rem_euclid(m);
    (if r >= m / 2 { r - m } else { r }) as i64
}

/// Smallest signed range `(min, max)` of a `bits`-wide integer.
pub fn signed_range(bits: u32) -> (i64, i64) {
    let half = 1i128 << (bits - 1);
    ((-half) as i64, (half - 1) as i64)
}

/// A breach of the evaluator's input contract, e.g. an expression that was
/// never typechecked. Domain problems yield `Value::Undefined` instead.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("expression was not typechecked: {0}")]
    Unresolved(String),
    #[error("{0}")]
    Contract(String),
}

type Result<T> = std::result::Result<T, EvalError>;

/// Adjacency of links, per association and end.
struct StateIndex<'s> {
    adj: HashMap<&'s str, [HashMap<&'s str, Vec<&'s str>>; 2]>,
}

impl<'s> StateIndex<'s> {
    fn new(state: &'s SystemState) -> Self {
        let mut adj: HashMap<&str, [HashMap<&str, Vec<&str>>; 2]> = HashMap::new();
        for l in &state.links {
            let sides = adj.entry(l.association.as_str()).or_default();
            for (side, map) in sides.iter_mut().enumerate() {
                map.entry(l.ends[side].as_str())
                    .or_default()
                    .push(l.ends[1 - side].as_str());
            }
        }
        StateIndex { adj }
    }

    /// Objects linked to `obj` when navigating to end `to_end`.
    fn partners(&self, assoc: &str, to_end: usize, obj: &str) -> &[&'s str] {
        self.adj
            .get(assoc)
            .and_then(|sides| sides[1 - to_end].get(obj))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

/// Result of evaluating one invariant over all instances of its context.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantResult {
    pub per_object: Vec<(String, Value)>,
    /// Conjunction over all instances; undefined counts as a violation.
    pub holds: bool,
    pub violators: Vec<String>,
}

pub struct Evaluator<'s> {
    state: &'s SystemState,
    mode: EvalMode,
    index: StateIndex<'s>,
    vars: Vec<(String, Value)>,
    trace: Option<Vec<Span>>,
}

impl<'s> Evaluator<'s> {
    pub fn new(state: &'s SystemState, mode: EvalMode) -> Self {
        Evaluator {
            state,
            mode,
            index: StateIndex::new(state),
            vars: Vec::new(),
            trace: None,
        }
    }

    /// Records the span of every node whose bag result is read as a set.
    pub fn with_collapse_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn collapses(&self) -> &[Span] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn eval(&mut self, expr: &Expr, bindings: &[(String, Value)]) -> Result<Value> {
        let saved = self.vars.len();
        self.vars.extend(bindings.iter().cloned());
        let r = self.node(expr);
        self.vars.truncate(saved);
        r
    }

    pub fn eval_invariant(&mut self, inv: &Invariant, model: &Model) -> Result<InvariantResult> {
        let mut per_object = Vec::new();
        let mut violators = Vec::new();
        let names: Vec<&str> = self.state.instances_of(model, &inv.context).collect();
        for name in names {
            let v = self.eval(&inv.body, &[("self".into(), Value::Object(name.to_string()))])?;
            if v != Value::Boolean(true) {
                violators.push(name.to_string());
            }
            per_object.push((name.to_string(), v));
        }
        Ok(InvariantResult {
            holds: violators.is_empty(),
            per_object,
            violators,
        })
    }

    fn solver_bits(&self) -> Option<u32> {
        match self.mode {
            EvalMode::Solver { bitwidth } => Some(bitwidth),
            EvalMode::Standard => None,
        }
    }

    fn int(&self, v: i128) -> Value {
        match self.solver_bits() {
            Some(bits) => Value::Integer(wrap(v, bits)),
            None => i64::try_from(v).map(Value::Integer).unwrap_or(Value::Undefined),
        }
    }

    fn node(&mut self, e: &Expr) -> Result<Value> {
        let v = self.node_inner(e)?;
        if self.solver_bits().is_some() {
            if let Value::Bag(items) = v {
                if let Some(t) = &mut self.trace {
                    t.push(e.span);
                }
                return Ok(Value::Set(items.into_iter().collect()));
            }
        }
        Ok(v)
    }

    fn lookup(&self, name: &str) -> Result<Value> {
        self.vars
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| EvalError::UnboundVariable(name.to_string()))
    }

    fn node_inner(&mut self, e: &Expr) -> Result<Value> {
        use ExprKind as K;
        match &e.kind {
            K::Literal(l) => Ok(match l {
                Literal::Integer(v) => self.int(*v as i128),
                Literal::Real(v) => Value::Real(*v),
                Literal::String(s) => Value::String(s.clone()),
                Literal::Boolean(b) => Value::Boolean(*b),
            }),
            K::Var { name, .. } => self.lookup(name),
            K::Attribute { source, name } => {
                let src = self.node(source)?;
                Ok(match src {
                    Value::Object(o) => self.state.attr(&o, name),
                    Value::Undefined => Value::Undefined,
                    Value::Set(_) | Value::Bag(_) => Value::bag(
                        src.elements()
                            .expect("collection")
                            .into_iter()
                            .filter_map(|x| match x {
                                Value::Object(o) => Some(self.state.attr(o, name)),
                                _ => None,
                            })
                            .collect(),
                    ),
                    other => return Err(EvalError::Contract(format!("attribute `{name}` of {other}"))),
                })
            }
            K::Navigation {
                source,
                association,
                to_end,
                ..
            } => {
                let src = self.node(source)?;
                let single = matches!(e.ann.as_ref().map(|a| &a.standard), Some(OclType::Class(_)));
                Ok(match src {
                    Value::Object(o) => {
                        let partners = self.index.partners(association, *to_end, &o);
                        if single {
                            partners
                                .first()
                                .map(|p| Value::Object(p.to_string()))
                                .unwrap_or(Value::Undefined)
                        } else {
                            Value::set(partners.iter().map(|p| Value::Object(p.to_string())))
                        }
                    }
                    Value::Undefined => Value::Undefined,
                    Value::Set(_) | Value::Bag(_) => {
                        let mut out = Vec::new();
                        for x in src.elements().expect("collection") {
                            if let Value::Object(o) = x {
                                for p in self.index.partners(association, *to_end, o) {
                                    out.push(Value::Object(p.to_string()));
                                }
                            }
                        }
                        Value::bag(out)
                    }
                    other => return Err(EvalError::Contract(format!("navigation from {other}"))),
                })
            }
            K::AllInstances { extent, .. } => Ok(Value::set(
                self.state
                    .objects
                    .iter()
                    .filter(|(_, o)| extent.contains(&o.class))
                    .map(|(n, _)| Value::Object(n.clone())),
            )),
            K::SetLiteral { kind, items } => {
                let values = items.iter().map(|i| self.node(i)).collect::<Result<Vec<_>>>()?;
                Ok(match kind {
                    crate::ocl::CollectionKind::Set => Value::set(values),
                    crate::ocl::CollectionKind::Bag => Value::bag(values),
                })
            }
            K::Iterate {
                kind,
                source,
                var,
                body,
                ..
            } => {
                let src = self.node(source)?;
                self.iterate(*kind, src, var, body)
            }
            K::Collection { op, source, args } => {
                let src = self.node(source)?;
                let args = args.iter().map(|a| self.node(a)).collect::<Result<Vec<_>>>()?;
                let result_ty = e.ann.as_ref().map(|a| a.standard.clone());
                self.collection_op(*op, src, args, result_ty)
            }
            K::ImplicitSet { operand } | K::OclAsSet { operand } => {
                let v = self.node(operand)?;
                Ok(match v {
                    Value::Undefined => Value::Set(BTreeSet::new()),
                    Value::Set(_) => v,
                    Value::Bag(items) => Value::set(items),
                    other => Value::set([other]),
                })
            }
            K::OclIsKindOf { operand, conforming, .. } => {
                let v = self.node(operand)?;
                Ok(match v {
                    Value::Object(o) => Value::Boolean(
                        self.state
                            .objects
                            .get(&o)
                            .is_some_and(|obj| conforming.contains(&obj.class)),
                    ),
                    _ => Value::Undefined,
                })
            }
            K::OclAsType { operand, conforming, .. } => {
                let v = self.node(operand)?;
                Ok(match &v {
                    Value::Object(o)
                        if self
                            .state
                            .objects
                            .get(o)
                            .is_some_and(|obj| conforming.contains(&obj.class)) =>
                    {
                        v
                    }
                    _ => Value::Undefined,
                })
            }
            K::OclIsUndefined { operand } => Ok(Value::Boolean(self.node(operand)?.is_undefined())),
            K::If {
                cond,
                then_branch,
                else_branch,
            } => match self.node(cond)? {
                Value::Boolean(true) => self.node(then_branch),
                Value::Boolean(false) => self.node(else_branch),
                _ => Ok(Value::Undefined),
            },
            K::Unary { op, operand } => {
                let v = self.node(operand)?;
                Ok(match (op, v) {
                    (UnaryOp::Not, Value::Boolean(b)) => Value::Boolean(!b),
                    (UnaryOp::Neg, Value::Integer(i)) => self.int(-(i as i128)),
                    (UnaryOp::Neg, Value::Real(r)) => Value::Real(-r),
                    (_, Value::Undefined) => Value::Undefined,
                    (op, v) => return Err(EvalError::Contract(format!("{op:?} applied to {v}"))),
                })
            }
            K::Binary { op, lhs, rhs } => {
                let l = self.node(lhs)?;
                let r = self.node(rhs)?;
                self.binary(*op, l, r)
            }
            K::Property { .. } | K::DotCall { .. } | K::ArrowCall { .. } | K::CollectionLiteral { .. } => {
                Err(EvalError::Unresolved(e.to_string()))
            }
        }
    }

    fn with_var<T>(&mut self, var: &str, value: Value, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        self.vars.push((var.to_string(), value));
        let r = f(self);
        self.vars.pop();
        r
    }

    fn iterate(&mut self, kind: IteratorKind, src: Value, var: &str, body: &Expr) -> Result<Value> {
        let items: Vec<Value> = match &src {
            Value::Undefined => return Ok(Value::Undefined),
            Value::Set(s) => s.iter().cloned().collect(),
            Value::Bag(b) => b.clone(),
            other => return Err(EvalError::Contract(format!("iteration over {other}"))),
        };
        let is_bag = matches!(src, Value::Bag(_));
        match kind {
            IteratorKind::ForAll | IteratorKind::Exists => {
                let decisive = kind == IteratorKind::Exists;
                let mut unknown = false;
                for x in items {
                    match self.with_var(var, x, |s| s.node(body))? {
                        Value::Boolean(b) if b == decisive => return Ok(Value::Boolean(decisive)),
                        Value::Boolean(_) => {}
                        _ => unknown = true,
                    }
                }
                Ok(if unknown { Value::Undefined } else { Value::Boolean(!decisive) })
            }
            IteratorKind::Select | IteratorKind::Reject => {
                let keep = kind == IteratorKind::Select;
                let mut out = Vec::new();
                for x in items {
                    match self.with_var(var, x.clone(), |s| s.node(body))? {
                        Value::Boolean(b) => {
                            if b == keep {
                                out.push(x);
                            }
                        }
                        _ => return Ok(Value::Undefined),
                    }
                }
                Ok(if is_bag { Value::bag(out) } else { Value::set(out) })
            }
            IteratorKind::Collect => {
                let mut out = Vec::new();
                for x in items {
                    let v = self.with_var(var, x, |s| s.node(body))?;
                    match v {
                        Value::Set(s) => out.extend(s),
                        Value::Bag(b) => out.extend(b),
                        v => out.push(v),
                    }
                }
                Ok(Value::bag(out))
            }
            IteratorKind::IsUnique => {
                let mut seen = BTreeSet::new();
                for x in items {
                    let v = self.with_var(var, x, |s| s.node(body))?;
                    if !seen.insert(v) {
                        return Ok(Value::Boolean(false));
                    }
                }
                Ok(Value::Boolean(true))
            }
            IteratorKind::One => {
                let mut count = 0;
                for x in items {
                    match self.with_var(var, x, |s| s.node(body))? {
                        Value::Boolean(true) => count += 1,
                        Value::Boolean(false) => {}
                        _ => return Ok(Value::Undefined),
                    }
                }
                Ok(Value::Boolean(count == 1))
            }
            IteratorKind::Closure => {
                let mut result = BTreeSet::new();
                let mut frontier = items;
                while let Some(x) = frontier.pop() {
                    let step = self.with_var(var, x, |s| s.node(body))?;
                    let next: Vec<Value> = match step {
                        Value::Undefined => Vec::new(),
                        Value::Set(s) => s.into_iter().collect(),
                        Value::Bag(b) => b,
                        v => vec![v],
                    };
                    for n in next {
                        if !n.is_undefined() && result.insert(n.clone()) {
                            frontier.push(n);
                        }
                    }
                }
                Ok(Value::Set(result))
            }
        }
    }

    fn collection_op(&mut self, op: CollectionOp, src: Value, args: Vec<Value>, result_ty: Option<OclType>) -> Result<Value> {
        if src.is_undefined() {
            return Ok(Value::Undefined);
        }
        let Some(items) = src.elements() else {
            return Err(EvalError::Contract(format!("{} applied to {src}", op.name())));
        };
        let items: Vec<Value> = items.into_iter().cloned().collect();
        let arg = args.into_iter().next();
        Ok(match op {
            CollectionOp::Size => self.int(items.len() as i128),
            CollectionOp::IsEmpty => Value::Boolean(items.is_empty()),
            CollectionOp::NotEmpty => Value::Boolean(!items.is_empty()),
            CollectionOp::AsSet => Value::set(items),
            CollectionOp::Sum => {
                let real = matches!(result_ty, Some(OclType::Real));
                let mut int_acc: i128 = 0;
                let mut real_acc = 0.0f64;
                let mut any_real = real;
                for x in &items {
                    match x {
                        Value::Integer(i) => {
                            int_acc += *i as i128;
                            real_acc += *i as f64;
                            if let Some(bits) = self.solver_bits() {
                                int_acc = wrap(int_acc, bits) as i128;
                            }
                        }
                        Value::Real(r) => {
                            any_real = true;
                            real_acc += r;
                        }
                        Value::Undefined => return Ok(Value::Undefined),
                        other => return Err(EvalError::Contract(format!("sum over {other}"))),
                    }
                }
                if any_real {
                    Value::Real(real_acc)
                } else {
                    self.int(int_acc)
                }
            }
            CollectionOp::Includes | CollectionOp::Excludes => {
                let arg = arg.ok_or_else(|| EvalError::Contract("missing argument".into()))?;
                let found = items.iter().any(|x| equal(x, &arg) == Some(true) || (x.is_undefined() && arg.is_undefined()));
                Value::Boolean(found == (op == CollectionOp::Includes))
            }
            CollectionOp::Including => {
                let arg = arg.ok_or_else(|| EvalError::Contract("missing argument".into()))?;
                let mut items = items;
                items.push(arg);
                rebuild(&src, items)
            }
            CollectionOp::Excluding => {
                let arg = arg.ok_or_else(|| EvalError::Contract("missing argument".into()))?;
                let items = items.into_iter().filter(|x| x != &arg).collect();
                rebuild(&src, items)
            }
            CollectionOp::Union | CollectionOp::Intersection => {
                let other = arg.ok_or_else(|| EvalError::Contract("missing argument".into()))?;
                if other.is_undefined() {
                    return Ok(Value::Undefined);
                }
                let Some(other_items) = other.elements() else {
                    return Err(EvalError::Contract(format!("{} with {other}", op.name())));
                };
                let other_items: Vec<Value> = other_items.into_iter().cloned().collect();
                let both_sets = matches!(src, Value::Set(_)) && matches!(other, Value::Set(_));
                let both_bags = matches!(src, Value::Bag(_)) && matches!(other, Value::Bag(_));
                if op == CollectionOp::Union {
                    let mut all = items;
                    all.extend(other_items);
                    if both_sets { Value::set(all) } else { Value::bag(all) }
                } else if both_bags {
                    let mut rest = other_items;
                    let mut out = Vec::new();
                    for x in items {
                        if let Some(pos) = rest.iter().position(|y| y == &x) {
                            rest.swap_remove(pos);
                            out.push(x);
                        }
                    }
                    Value::bag(out)
                } else {
                    let other: BTreeSet<Value> = other_items.into_iter().collect();
                    Value::set(items.into_iter().filter(|x| other.contains(x)))
                }
            }
        })
    }

    fn binary(&self, op: BinaryOp, l: Value, r: Value) -> Result<Value> {
        use BinaryOp as B;
        let b = |v: &Value| v.as_bool();
        Ok(match op {
            B::And => match (b(&l), b(&r)) {
                (Some(false), _) | (_, Some(false)) => Value::Boolean(false),
                (Some(true), Some(true)) => Value::Boolean(true),
                _ => Value::Undefined,
            },
            B::Or => match (b(&l), b(&r)) {
                (Some(true), _) | (_, Some(true)) => Value::Boolean(true),
                (Some(false), Some(false)) => Value::Boolean(false),
                _ => Value::Undefined,
            },
            B::Implies => match (b(&l), b(&r)) {
                (Some(false), _) | (_, Some(true)) => Value::Boolean(true),
                (Some(true), Some(false)) => Value::Boolean(false),
                _ => Value::Undefined,
            },
            B::Xor => match (b(&l), b(&r)) {
                (Some(x), Some(y)) => Value::Boolean(x != y),
                _ => Value::Undefined,
            },
            _ if l.is_undefined() || r.is_undefined() => Value::Undefined,
            B::Eq => Value::Boolean(equal(&l, &r).ok_or_else(|| mismatch(op, &l, &r))?),
            B::Ne => Value::Boolean(!equal(&l, &r).ok_or_else(|| mismatch(op, &l, &r))?),
            B::Lt | B::Le | B::Gt | B::Ge => {
                let ord = match (&l, &r) {
                    (Value::Integer(x), Value::Integer(y)) => Some(x.cmp(y)),
                    (Value::String(x), Value::String(y)) => Some(x.cmp(y)),
                    _ => match (as_real(&l), as_real(&r)) {
                        (Some(x), Some(y)) => x.partial_cmp(&y),
                        _ => return Err(mismatch(op, &l, &r)),
                    },
                };
                let Some(ord) = ord else {
                    return Ok(Value::Undefined);
                };
                Value::Boolean(match op {
                    B::Lt => ord.is_lt(),
                    B::Le => ord.is_le(),
                    B::Gt => ord.is_gt(),
                    _ => ord.is_ge(),
                })
            }
            B::Add | B::Sub | B::Mul | B::Div => match (&l, &r) {
                (Value::Integer(x), Value::Integer(y)) => {
                    let (x, y) = (*x as i128, *y as i128);
                    match op {
                        B::Add => self.int(x + y),
                        B::Sub => self.int(x - y),
                        B::Mul => self.int(x * y),
                        _ if y == 0 => Value::Undefined,
                        _ => self.int(x / y),
                    }
                }
                _ => match (as_real(&l), as_real(&r), op) {
                    (Some(x), Some(y), B::Add) => Value::Real(x + y),
                    (Some(x), Some(y), B::Sub) => Value::Real(x - y),
                    (Some(x), Some(y), B::Mul) => Value::Real(x * y),
                    _ => return Err(mismatch(op, &l, &r)),
                },
            },
        })
    }
}

fn mismatch(op: BinaryOp, l: &Value, r: &Value) -> EvalError {
    EvalError::Contract(format!("`{}` applied to {l} and {r}", op.symbol()))
}

fn as_real(v: &Value) -> Option<f64> {
    match v {
        Value::Integer(i) => Some(*i as f64),
        Value::Real(r) => Some(*r),
        _ => None,
    }
}

/// OCL equality of two defined values; `None` if they are not comparable.
/// A set never equals a bag.
fn equal(l: &Value, r: &Value) -> Option<bool> {
    Some(match (l, r) {
        (Value::Integer(_) | Value::Real(_), Value::Integer(_) | Value::Real(_)) => match (l, r) {
            (Value::Integer(x), Value::Integer(y)) => x == y,
            _ => as_real(l)? == as_real(r)?,
        },
        (Value::Set(_), Value::Bag(_)) | (Value::Bag(_), Value::Set(_)) => false,
        (Value::Set(_), Value::Set(_)) | (Value::Bag(_), Value::Bag(_)) => l == r,
        (Value::String(x), Value::String(y)) => x == y,
        (Value::Boolean(x), Value::Boolean(y)) => x == y,
        (Value::Object(x), Value::Object(y)) => x == y,
        _ => return None,
    })
}

fn rebuild(like: &Value, items: Vec<Value>) -> Value {
    match like {
        Value::Bag(_) => Value::bag(items),
        _ => Value::set(items),
    }
}

/// Evaluates `expr` with the given variable bindings.
pub fn eval(expr: &Expr, state: &SystemState, bindings: &[(String, Value)], mode: EvalMode) -> Result<Value> {
    Evaluator::new(state, mode).eval(expr, bindings)
}

/// Evaluates an invariant for every instance of its context class,
/// subclasses included.
pub fn eval_invariant(inv: &Invariant, state: &SystemState, mode: EvalMode, model: &Model) -> Result<InvariantResult> {
    Evaluator::new(state, mode).eval_invariant(inv, model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_model, parse_ocl};
    use crate::state::Link;

    const SOLVER8: EvalMode = EvalMode::Solver { bitwidth: 8 };

    fn model() -> Model {
        parse_model(
            "model M
             class Employee attributes age : Integer end
             class Branch end
             class Group end
             association Employment between Employee [*] role employee; Branch [0..1] role employer end
             association Hierarchy between Group [0..1] role parent; Group [*] role child end",
            "m.use",
        )
        .unwrap()
    }

    fn run(text: &str, ctx: &str, state: &SystemState, self_obj: &str, mode: EvalMode) -> Value {
        let m = model();
        let e = parse_ocl(text, ctx, &m).unwrap();
        eval(&e, state, &[("self".into(), Value::Object(self_obj.into()))], mode).unwrap()
    }

    fn branch_state() -> SystemState {
        let mut s = SystemState::new();
        s.add_object("b1", "Branch");
        for (n, age) in [("e1", 2), ("e2", 2), ("e3", 3)] {
            s.add_object(n, "Employee");
            s.set_attr(n, "age", Value::Integer(age));
            s.add_link(Link::new("Employment", n, "b1"));
        }
        s
    }

    #[test]
    fn sum_over_duplicates_diverges() {
        let s = branch_state();
        let text = "self.employee.age->sum()";
        assert_eq!(run(text, "Branch", &s, "b1", EvalMode::Standard), Value::Integer(7));
        assert_eq!(run(text, "Branch", &s, "b1", SOLVER8), Value::Integer(5));
    }

    #[test]
    fn set_bag_equality() {
        let s = SystemState::new();
        assert_eq!(run("Set{ 1 } = Bag{ 1 }", "Branch", &s, "x", EvalMode::Standard), Value::Boolean(false));
        assert_eq!(run("Set{ 1 } = Bag{ 1 }", "Branch", &s, "x", SOLVER8), Value::Boolean(true));
    }

    #[test]
    fn wrapping_arithmetic() {
        let s = SystemState::new();
        assert_eq!(run("120 + 10", "Branch", &s, "x", SOLVER8), Value::Integer(-126));
        assert_eq!(run("120 + 10", "Branch", &s, "x", EvalMode::Standard), Value::Integer(130));
        assert_eq!(run("Set{2,3}->including(2)->size()", "Branch", &s, "x", EvalMode::Standard), Value::Integer(2));
        assert_eq!(run("Bag{2,3}->including(2)->size()", "Branch", &s, "x", EvalMode::Standard), Value::Integer(3));
        assert_eq!(run("7 div 0", "Branch", &s, "x", EvalMode::Standard), Value::Undefined);
        assert_eq!(run("-7 div 2", "Branch", &s, "x", EvalMode::Standard), Value::Integer(-3));
    }

    #[test]
    fn wrap_matches_twos_complement() {
        for bits in 1..=16u32 {
            let (lo, hi) = signed_range(bits);
            for v in -70000i128..70000 {
                let w = wrap(v, bits) as i128;
                assert!(w >= lo as i128 && w <= hi as i128);
                assert_eq!((w - v).rem_euclid(1 << bits), 0);
            }
        }
    }

    #[test]
    fn kleene_connectives() {
        let mut s = SystemState::new();
        s.add_object("e1", "Employee");
        let und = "self.employer.oclIsUndefined() and self.employer = self.employer";
        assert_eq!(run(und, "Employee", &s, "e1", EvalMode::Standard), Value::Undefined);
        let f = "false and self.employer = self.employer";
        assert_eq!(run(f, "Employee", &s, "e1", EvalMode::Standard), Value::Boolean(false));
        let t = "true or self.employer = self.employer";
        assert_eq!(run(t, "Employee", &s, "e1", EvalMode::Standard), Value::Boolean(true));
    }

    fn groups(links: &[(&str, &str)]) -> SystemState {
        let mut s = SystemState::new();
        for g in ["g1", "g2", "g3"] {
            s.add_object(g, "Group");
        }
        // (child, parent): Hierarchy end 0 is `parent`, end 1 is `child`
        for (child, parent) in links {
            s.add_link(Link::new("Hierarchy", *parent, *child));
        }
        s
    }

    #[test]
    fn closure_cases() {
        let obj = |n: &str| Value::Object(n.into());
        let chain = groups(&[("g1", "g2"), ("g2", "g3")]);
        assert_eq!(
            run("self->closure(parent)", "Group", &chain, "g1", EvalMode::Standard),
            Value::set([obj("g2"), obj("g3")])
        );
        let looped = groups(&[("g1", "g1")]);
        assert_eq!(run("self->closure(parent)", "Group", &looped, "g1", EvalMode::Standard), Value::set([obj("g1")]));
        let isolated = groups(&[]);
        assert_eq!(run("self->closure(parent)", "Group", &isolated, "g1", EvalMode::Standard), Value::set([]));
    }

    #[test]
    fn cycle_free_invariant_on_two_cycle() {
        let m = parse_model(
            "model M class Group end
             association Hierarchy between Group [0..1] role parent; Group [*] role child end
             constraints context Group inv cycleFree: self.parent->closure(parent)->excludes(self)",
            "m.use",
        )
        .unwrap();
        let mut s = SystemState::new();
        s.add_object("g1", "Group");
        s.add_object("g2", "Group");
        s.add_link(Link::new("Hierarchy", "g1", "g2"));
        s.add_link(Link::new("Hierarchy", "g2", "g1"));
        let r = eval_invariant(&m.invariants[0], &s, EvalMode::Standard, &m).unwrap();
        assert!(!r.holds);
        assert_eq!(r.violators, vec!["g1", "g2"]);
        let empty = eval_invariant(&m.invariants[0], &SystemState::new(), EvalMode::Standard, &m).unwrap();
        assert!(empty.holds);
    }

    #[test]
    fn collapse_trace_records_bag_nodes() {
        let m = model();
        let e = parse_ocl("self.employee.age->sum() > 0", "Branch", &m).unwrap();
        let s = branch_state();
        let mut ev = Evaluator::new(&s, SOLVER8).with_collapse_trace();
        ev.eval(&e, &[("self".into(), Value::Object("b1".into()))]).unwrap();
        assert_eq!(ev.collapses().len(), 1);
    }
}
