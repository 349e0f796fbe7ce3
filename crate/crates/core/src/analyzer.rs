//! Static warnings about constructs whose solver reading differs from
//! standard OCL: bags read as sets, sums over such bags, comparisons of sets
//! with bags, and integers outside the configured bitwidth.

use std::fmt;

use serde::Serialize;

use crate::config::{AttributeDomain, Configuration, DomainValue};
use crate::location::SourceLocation;
use crate::model::{Invariant, Model};
use crate::ocl::{BinaryOp, CollectionKind, CollectionOp, Expr, ExprKind, Literal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum WarningKind {
    BagCollapse,
    SumOverDuplicates,
    TypeContradiction,
    BitwidthTooSmall,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Warning {
    pub kind: WarningKind,
    pub message: String,
    /// Absent for values that come from a configuration without a source file.
    pub location: Option<SourceLocation>,
    pub expression_text: String,
    /// Qualified name of the invariant the expression belongs to.
    pub invariant: Option<String>,
    /// Constant result of a contradictory comparison.
    pub constant: Option<bool>,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)?;
        if let Some(l) = &self.location {
            write!(f, "\n  --> {l}")?;
        }
        Ok(())
    }
}

fn bag_collapse_message(expr: &str) -> String {
    format!("WARNING: Collect operation `{expr}' results in unsupported type `Bag'. It will be interpreted as `Set'.")
}

fn sum_message(expr: &str) -> String {
    format!(
        "WARNING: The evaluation of sum expression `{expr}' might be wrong if source contains duplicates (Collection is interpreted as Set)."
    )
}

fn contradiction_message(expr: &str, t1: &str, t2: &str, never: bool) -> String {
    format!(
        "WARNING: Expression `{expr}' can never evaluate to {} because `{t1}' and `{t2}' are unrelated.",
        if never { "true" } else { "false" }
    )
}

fn bitwidth_message(v: i64, k: u32) -> String {
    format!(
        "WARNING: The configured bitwidth is too small for the property Integer max value ({v}). Required bitwidth: {k} or greater."
    )
}

/// Smallest `k` with `-2^(k-1) <= v <= 2^(k-1) - 1`.
pub fn required_bitwidth(v: i64) -> u32 {
    let magnitude = if v < 0 { !v } else { v } as u64;
    65 - magnitude.leading_zeros()
}

fn per_node(model: &Model, mut f: impl FnMut(&Invariant, &Expr) -> Option<Warning>) -> Vec<Warning> {
    let mut out = Vec::new();
    for inv in &model.invariants {
        inv.body.walk(&mut |e| {
            if let Some(w) = f(inv, e) {
                out.push(w);
            }
        });
    }
    out
}

fn warning(inv: &Invariant, e: &Expr, kind: WarningKind, message: String, constant: Option<bool>) -> Warning {
    Warning {
        kind,
        message,
        location: inv.location_of(e),
        expression_text: inv.text_of(e),
        invariant: Some(inv.qualified_name()),
        constant,
    }
}

fn is_collapsed_bag(e: &Expr) -> bool {
    e.ann.as_ref().is_some_and(|a| {
        a.standard.collection_kind() == Some(CollectionKind::Bag)
            && a.solver.collection_kind() == Some(CollectionKind::Set)
    })
}

/// One warning per expression whose standard type is a bag.
pub fn warn_bag_collapse(model: &Model) -> Vec<Warning> {
    per_node(model, |inv, e| {
        is_collapsed_bag(e).then(|| {
            let text = inv.text_of(e);
            warning(inv, e, WarningKind::BagCollapse, bag_collapse_message(&text), None)
        })
    })
}

/// One warning per `sum()` applied to a bag.
pub fn warn_sum_over_duplicates(model: &Model) -> Vec<Warning> {
    per_node(model, |inv, e| match &e.kind {
        ExprKind::Collection {
            op: CollectionOp::Sum,
            source,
            ..
        } if is_collapsed_bag(source) => {
            let text = inv.text_of(e);
            Some(warning(inv, e, WarningKind::SumOverDuplicates, sum_message(&text), None))
        }
        _ => None,
    })
}

/// One warning per `=` or `<>` between a set and a bag.
pub fn warn_type_contradictions(model: &Model) -> Vec<Warning> {
    per_node(model, |inv, e| {
        let ExprKind::Binary { op, lhs, rhs } = &e.kind else {
            return None;
        };
        if !matches!(op, BinaryOp::Eq | BinaryOp::Ne) {
            return None;
        }
        let (lt, rt) = (&lhs.ann.as_ref()?.standard, &rhs.ann.as_ref()?.standard);
        let (lk, rk) = (lt.collection_kind()?, rt.collection_kind()?);
        if lk == rk {
            return None;
        }
        let is_eq = *op == BinaryOp::Eq;
        let text = inv.text_of(e);
        let message = contradiction_message(&text, &lt.to_string(), &rt.to_string(), is_eq);
        Some(warning(inv, e, WarningKind::TypeContradiction, message, Some(!is_eq)))
    })
}

/// At most one warning, naming the integer with the largest bitwidth
/// requirement among invariant literals and configuration bounds.
pub fn warn_bitwidth(model: &Model, config: &Configuration) -> Vec<Warning> {
    let mut candidates: Vec<(i64, Option<SourceLocation>, Option<String>)> = Vec::new();
    for inv in &model.invariants {
        inv.body.walk(&mut |e| {
            if let ExprKind::Literal(Literal::Integer(v)) = &e.kind {
                candidates.push((*v, inv.location_of(e), Some(inv.qualified_name())));
            }
        });
    }
    candidates.push((config.integer_min, config.location_of("Integer_min"), None));
    candidates.push((config.integer_max, config.location_of("Integer_max"), None));
    for (class, attrs) in &config.attribute_domains {
        for (attr, domain) in attrs {
            match domain {
                AttributeDomain::Range { min, max } => {
                    for (v, suffix) in [(min, "min"), (max, "max")] {
                        if let Some(v) = v {
                            candidates.push((*v, config.location_of(&format!("{class}_{attr}_{suffix}")), None));
                        }
                    }
                }
                AttributeDomain::Values(values) => {
                    for v in values {
                        if let DomainValue::Integer(i) = v {
                            candidates.push((*i, config.location_of(&format!("{class}_{attr}")), None));
                        }
                    }
                }
            }
        }
    }
    let mut worst: Option<(u32, i64, Option<SourceLocation>, Option<String>)> = None;
    for (v, loc, inv) in candidates {
        let k = required_bitwidth(v);
        if k > config.bitwidth && worst.as_ref().is_none_or(|w| k > w.0) {
            worst = Some((k, v, loc, inv));
        }
    }
    worst
        .map(|(k, v, location, invariant)| Warning {
            kind: WarningKind::BitwidthTooSmall,
            message: bitwidth_message(v, k),
            location,
            expression_text: v.to_string(),
            invariant,
            constant: None,
        })
        .into_iter()
        .collect()
}

/// Runs all analyses; the bitwidth check needs a configuration.
pub fn analyze(model: &Model, config: Option<&Configuration>) -> Vec<Warning> {
    let mut out = warn_bag_collapse(model);
    out.extend(warn_sum_over_duplicates(model));
    out.extend(warn_type_contradictions(model));
    if let Some(c) = config {
        out.extend(warn_bitwidth(model, c));
    }
    out
}
