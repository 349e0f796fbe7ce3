use super::lexer::{tokenize, Cursor, Tok};
use super::{Diagnostic, ParseError};
use crate::location::SourceLocation;
use crate::model::Model;
use crate::ocl::{typecheck, BinaryOp, Expr, ExprKind, IterVar, Literal, OclType, UnaryOp};

const RESERVED: &[&str] = &[
    "and", "or", "xor", "implies", "not", "div", "if", "then", "else", "endif", "inv", "context",
    "class", "abstract", "association", "constraints", "end", "attributes", "model", "between",
    "role",
];

const COLLECTION_KINDS: &[&str] = &["Set", "Bag", "Sequence", "OrderedSet"];

/// Parses a standalone OCL expression without typechecking it.
pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(text)?;
    let mut cur = Cursor::new(&toks);
    let e = expression(&mut cur)?;
    if cur.peek() != &Tok::Eof {
        return Err(ParseError::at(
            cur.span(),
            format!("unexpected {} after expression", cur.peek()),
        ));
    }
    Ok(e)
}

/// Parses and typechecks an OCL expression with `self` bound to `context`.
pub fn parse_ocl(text: &str, context: &str, model: &Model) -> Result<Expr, Vec<Diagnostic>> {
    let file = "<ocl>";
    let e = parse_expression(text).map_err(|e| vec![Diagnostic::syntax(file, text, e)])?;
    if model.class(context).is_none() {
        return Err(vec![Diagnostic::Type {
            message: format!("unknown context class `{context}`"),
            location: SourceLocation::new(file, 1, 1),
        }]);
    }
    typecheck(&e, &[("self".into(), OclType::Class(context.into()))], model).map_err(|err| {
        vec![Diagnostic::Type {
            message: err.message,
            location: SourceLocation::at_offset(file, text, err.span.start as usize),
        }]
    })
}

pub(super) fn expression(cur: &mut Cursor<'_>) -> Result<Expr, ParseError> {
    binary(cur, 1)
}

fn binary_op(cur: &Cursor<'_>) -> Option<BinaryOp> {
    Some(match cur.peek() {
        Tok::Eq => BinaryOp::Eq,
        Tok::Ne => BinaryOp::Ne,
        Tok::Lt => BinaryOp::Lt,
        Tok::Le => BinaryOp::Le,
        Tok::Gt => BinaryOp::Gt,
        Tok::Ge => BinaryOp::Ge,
        Tok::Plus => BinaryOp::Add,
        Tok::Minus => BinaryOp::Sub,
        Tok::Star => BinaryOp::Mul,
        Tok::Ident(s) => match s.as_str() {
            "and" => BinaryOp::And,
            "or" => BinaryOp::Or,
            "xor" => BinaryOp::Xor,
            "implies" => BinaryOp::Implies,
            "div" => BinaryOp::Div,
            _ => return None,
        },
        _ => return None,
    })
}

fn binary(cur: &mut Cursor<'_>, min_prec: u8) -> Result<Expr, ParseError> {
    let mut lhs = unary(cur)?;
    loop {
        if cur.peek() == &Tok::Slash {
            return Err(ParseError::at(
                cur.span(),
                "real division `/` is not supported; use `div` for integers",
            ));
        }
        let Some(op) = binary_op(cur) else { break };
        let prec = op.precedence();
        if prec < min_prec {
            break;
        }
        cur.bump();
        let rhs = binary(cur, prec + 1)?;
        let span = lhs.span.to(rhs.span);
        lhs = Expr::new(
            ExprKind::Binary {
                op,
                lhs: lhs.boxed(),
                rhs: rhs.boxed(),
            },
            span,
        );
    }
    Ok(lhs)
}

fn unary(cur: &mut Cursor<'_>) -> Result<Expr, ParseError> {
    let start = cur.span();
    if cur.eat_keyword("not") {
        let operand = unary(cur)?;
        let span = start.to(operand.span);
        return Ok(Expr::new(
            ExprKind::Unary {
                op: UnaryOp::Not,
                operand: operand.boxed(),
            },
            span,
        ));
    }
    if cur.eat(&Tok::Minus) {
        let operand = unary(cur)?;
        let span = start.to(operand.span);
        let kind = match operand.kind {
            ExprKind::Literal(Literal::Integer(v)) => ExprKind::Literal(Literal::Integer(-v)),
            ExprKind::Literal(Literal::Real(v)) => ExprKind::Literal(Literal::Real(-v)),
            _ => ExprKind::Unary {
                op: UnaryOp::Neg,
                operand: operand.boxed(),
            },
        };
        return Ok(Expr::new(kind, span));
    }
    postfix(cur)
}

fn call_args(cur: &mut Cursor<'_>) -> Result<Vec<Expr>, ParseError> {
    let mut args = Vec::new();
    if cur.eat(&Tok::RParen) {
        return Ok(args);
    }
    loop {
        args.push(expression(cur)?);
        if cur.eat(&Tok::Comma) {
            continue;
        }
        cur.expect(&Tok::RParen)?;
        return Ok(args);
    }
}

/// Tries to read `v1 [: T], v2 [: T] |`; rewinds and returns `None` otherwise.
fn iterator_vars(cur: &mut Cursor<'_>) -> Option<Vec<IterVar>> {
    let saved = cur.pos;
    let mut vars = Vec::new();
    while let Tok::Ident(name) = cur.peek() {
        if RESERVED.contains(&name.as_str()) {
            break;
        }
        cur.bump();
        let mut type_name = None;
        if cur.eat(&Tok::Colon) {
            match cur.peek() {
                Tok::Ident(t) => {
                    type_name = Some(t.clone());
                    cur.bump();
                }
                _ => break,
            }
        }
        vars.push(IterVar {
            name: name.clone(),
            type_name,
        });
        if cur.eat(&Tok::Comma) {
            continue;
        }
        if cur.eat(&Tok::Bar) {
            return Some(vars);
        }
        break;
    }
    cur.pos = saved;
    None
}

fn postfix(cur: &mut Cursor<'_>) -> Result<Expr, ParseError> {
    let mut e = primary(cur)?;
    loop {
        if cur.eat(&Tok::Dot) {
            let (name, nspan) = cur.expect_ident("a property or operation name")?;
            if cur.eat(&Tok::LParen) {
                let args = call_args(cur)?;
                let span = e.span.to(cur.prev_span());
                e = Expr::new(
                    ExprKind::DotCall {
                        source: e.boxed(),
                        name,
                        args,
                    },
                    span,
                );
            } else {
                let span = e.span.to(nspan);
                e = Expr::new(
                    ExprKind::Property {
                        source: Some(e.boxed()),
                        name,
                    },
                    span,
                );
            }
        } else if cur.eat(&Tok::Arrow) {
            let (name, _) = cur.expect_ident("a collection operation name")?;
            cur.expect(&Tok::LParen)?;
            let vars = iterator_vars(cur).unwrap_or_default();
            let args = call_args(cur)?;
            let span = e.span.to(cur.prev_span());
            e = Expr::new(
                ExprKind::ArrowCall {
                    source: e.boxed(),
                    name,
                    vars,
                    args,
                },
                span,
            );
        } else {
            return Ok(e);
        }
    }
}

fn primary(cur: &mut Cursor<'_>) -> Result<Expr, ParseError> {
    let span = cur.span();
    let lit = |l| Ok(Expr::new(ExprKind::Literal(l), span));
    match cur.peek().clone() {
        Tok::Int(v) => {
            cur.bump();
            lit(Literal::Integer(v))
        }
        Tok::Real(v) => {
            cur.bump();
            lit(Literal::Real(v))
        }
        Tok::Str(s) => {
            cur.bump();
            lit(Literal::String(s))
        }
        Tok::LParen => {
            cur.bump();
            let mut e = expression(cur)?;
            let close = cur.expect(&Tok::RParen)?;
            e.span = span.to(close);
            Ok(e)
        }
        Tok::Ident(name) => match name.as_str() {
            "true" | "false" => {
                cur.bump();
                lit(Literal::Boolean(name == "true"))
            }
            "if" => {
                cur.bump();
                let cond = expression(cur)?;
                cur.expect_keyword("then")?;
                let then_branch = expression(cur)?;
                cur.expect_keyword("else")?;
                let else_branch = expression(cur)?;
                let end = cur.expect_keyword("endif")?;
                Ok(Expr::new(
                    ExprKind::If {
                        cond: cond.boxed(),
                        then_branch: then_branch.boxed(),
                        else_branch: else_branch.boxed(),
                    },
                    span.to(end),
                ))
            }
            n if COLLECTION_KINDS.contains(&n) && cur.peek_at(1) == &Tok::LBrace => {
                cur.bump();
                cur.bump();
                let mut items = Vec::new();
                if !cur.eat(&Tok::RBrace) {
                    loop {
                        items.push(expression(cur)?);
                        if cur.eat(&Tok::Comma) {
                            continue;
                        }
                        cur.expect(&Tok::RBrace)?;
                        break;
                    }
                }
                Ok(Expr::new(
                    ExprKind::CollectionLiteral {
                        kind: name,
                        items,
                    },
                    span.to(cur.prev_span()),
                ))
            }
            n if RESERVED.contains(&n) => Err(ParseError::at(
                span,
                format!("expected an expression, found keyword `{n}`"),
            )),
            _ => {
                cur.bump();
                Ok(Expr::new(ExprKind::Property { source: None, name }, span))
            }
        },
        other => Err(ParseError::at(
            span,
            format!("expected an expression, found {other}"),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_printing() {
        let e = parse_expression("a + b * c = d and not e or f implies g").unwrap();
        assert_eq!(e.to_string(), "a + b * c = d and not e or f implies g");
        let e = parse_expression("(a + b) * c").unwrap();
        assert_eq!(e.to_string(), "(a + b) * c");
        let e = parse_expression("a - (b - c)").unwrap();
        assert_eq!(e.to_string(), "a - (b - c)");
    }

    #[test]
    fn iterator_variables() {
        let e = parse_expression("s->forAll(a, b : T | a <> b)").unwrap();
        let ExprKind::ArrowCall { vars, args, .. } = &e.kind else { panic!() };
        assert_eq!(vars.len(), 2);
        assert_eq!(vars[1].type_name.as_deref(), Some("T"));
        assert_eq!(args.len(), 1);
        let e = parse_expression("s->select(x > 1)").unwrap();
        let ExprKind::ArrowCall { vars, .. } = &e.kind else { panic!() };
        assert!(vars.is_empty());
    }

    #[test]
    fn negative_literals_fold() {
        let e = parse_expression("-129").unwrap();
        assert_eq!(e.kind, ExprKind::Literal(Literal::Integer(-129)));
    }

    #[test]
    fn spans_cover_source() {
        let text = "self.employee.age->sum()";
        let e = parse_expression(text).unwrap();
        assert_eq!(e.span.slice(text), text);
        let ExprKind::ArrowCall { source, .. } = &e.kind else { panic!() };
        assert_eq!(source.span.slice(text), "self.employee.age");
    }

    #[test]
    fn errors() {
        assert!(parse_expression("a +").is_err());
        assert!(parse_expression("a / b").is_err());
        assert!(parse_expression("Set{1,").is_err());
    }
}
