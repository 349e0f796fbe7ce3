use super::lexer::{tokenize, Cursor, Tok};
use super::ParseError;
use crate::location::SourceLocation;
use crate::model::Model;
use crate::ocl::OclType;
use crate::state::{Link, SystemState, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateCommandErrorKind {
    Syntax,
    UnknownClass,
    AbstractInstantiation,
    TypeMismatch,
    DuplicateObjectName,
    UnknownObject,
    UnknownAttribute,
    UnknownAssociation,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{location}: {message}")]
pub struct StateCommandError {
    pub kind: StateCommandErrorKind,
    pub message: String,
    pub location: SourceLocation,
}

/// Runs `!create`, `!set` and `!insert` commands in order, starting from an
/// empty state. Stops at the first failing command.
pub fn parse_state_commands(text: &str, file: &str, model: &Model) -> Result<SystemState, StateCommandError> {
    let mut state = SystemState::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let make = |kind, message: String, col: usize| StateCommandError {
            kind,
            message,
            location: SourceLocation::new(file, idx as u32 + 1, line[..col.min(line.len())].chars().count() as u32 + 1),
        };
        let toks = tokenize(line).map_err(|e| make(StateCommandErrorKind::Syntax, e.message, e.span.start as usize))?;
        let mut cur = Cursor::new(&toks);
        if cur.peek() == &Tok::Eof {
            continue;
        }
        run(&mut cur, model, &mut state).map_err(|(kind, e)| make(kind, e.message, e.span.start as usize))?;
        if cur.peek() != &Tok::Eof {
            return Err(make(
                StateCommandErrorKind::Syntax,
                format!("unexpected {} after command", cur.peek()),
                cur.span().start as usize,
            ));
        }
    }
    Ok(state)
}

type CmdResult = Result<(), (StateCommandErrorKind, ParseError)>;

fn syntax(e: ParseError) -> (StateCommandErrorKind, ParseError) {
    (StateCommandErrorKind::Syntax, e)
}

fn run(cur: &mut Cursor<'_>, model: &Model, state: &mut SystemState) -> CmdResult {
    cur.expect(&Tok::Bang).map_err(syntax)?;
    let (cmd, cmd_span) = cur.expect_ident("`create`, `set` or `insert`").map_err(syntax)?;
    match cmd.as_str() {
        "create" => {
            let mut names = vec![cur.expect_ident("an object name").map_err(syntax)?];
            while cur.eat(&Tok::Comma) {
                names.push(cur.expect_ident("an object name").map_err(syntax)?);
            }
            cur.expect(&Tok::Colon).map_err(syntax)?;
            let (class, cspan) = cur.expect_ident("a class name").map_err(syntax)?;
            let Some(c) = model.class(&class) else {
                return Err((StateCommandErrorKind::UnknownClass, ParseError::at(cspan, format!("unknown class `{class}`"))));
            };
            if c.is_abstract {
                return Err((
                    StateCommandErrorKind::AbstractInstantiation,
                    ParseError::at(cspan, format!("class `{class}` is abstract and cannot be instantiated")),
                ));
            }
            for (name, nspan) in names {
                if state.objects.contains_key(&name) {
                    return Err((
                        StateCommandErrorKind::DuplicateObjectName,
                        ParseError::at(nspan, format!("an object named `{name}` already exists")),
                    ));
                }
                state.add_object(name, class.clone());
            }
            Ok(())
        }
        "set" => {
            let (obj, ospan) = cur.expect_ident("an object name").map_err(syntax)?;
            cur.expect(&Tok::Dot).map_err(syntax)?;
            let (attr, aspan) = cur.expect_ident("an attribute name").map_err(syntax)?;
            cur.expect(&Tok::Assign).map_err(syntax)?;
            let vspan = cur.span();
            let value = literal(cur).map_err(syntax)?;
            let Some(o) = state.objects.get(&obj) else {
                return Err((StateCommandErrorKind::UnknownObject, ParseError::at(ospan, format!("unknown object `{obj}`"))));
            };
            let Some((_, a)) = model.attribute(&o.class, &attr) else {
                return Err((
                    StateCommandErrorKind::UnknownAttribute,
                    ParseError::at(aspan, format!("class `{}` has no attribute `{attr}`", o.class)),
                ));
            };
            let value = match (value, &a.ty) {
                (Value::Integer(i), OclType::Real) => Value::Real(i as f64),
                (v, _) => v,
            };
            if !value.fits(&a.ty) {
                return Err((
                    StateCommandErrorKind::TypeMismatch,
                    ParseError::at(vspan, format!("value {value} does not match type `{}` of `{attr}`", a.ty)),
                ));
            }
            state.set_attr(&obj, attr, value);
            Ok(())
        }
        "insert" => {
            cur.expect(&Tok::LParen).map_err(syntax)?;
            let a = cur.expect_ident("an object name").map_err(syntax)?;
            cur.expect(&Tok::Comma).map_err(syntax)?;
            let b = cur.expect_ident("an object name").map_err(syntax)?;
            cur.expect(&Tok::RParen).map_err(syntax)?;
            cur.expect_keyword("into").map_err(syntax)?;
            let (assoc, asspan) = cur.expect_ident("an association name").map_err(syntax)?;
            let Some(association) = model.association(&assoc) else {
                return Err((
                    StateCommandErrorKind::UnknownAssociation,
                    ParseError::at(asspan, format!("unknown association `{assoc}`")),
                ));
            };
            for ((name, span), end) in [&a, &b].into_iter().zip(&association.ends) {
                let Some(o) = state.objects.get(name) else {
                    return Err((StateCommandErrorKind::UnknownObject, ParseError::at(*span, format!("unknown object `{name}`"))));
                };
                if !model.conforms_to(&o.class, &end.class) {
                    return Err((
                        StateCommandErrorKind::TypeMismatch,
                        ParseError::at(
                            *span,
                            format!("object `{name}` of class `{}` cannot play role `{}` of `{assoc}`", o.class, end.role),
                        ),
                    ));
                }
            }
            state.add_link(Link::new(assoc, a.0, b.0));
            Ok(())
        }
        other => Err(syntax(ParseError::at(
            cmd_span,
            format!("unknown command `!{other}`; expected `!create`, `!set` or `!insert`"),
        ))),
    }
}

fn literal(cur: &mut Cursor<'_>) -> Result<Value, ParseError> {
    let span = cur.span();
    let neg = cur.eat(&Tok::Minus);
    let v = match cur.peek().clone() {
        Tok::Int(v) => Value::Integer(if neg { -v } else { v }),
        Tok::Real(v) => Value::Real(if neg { -v } else { v }),
        Tok::Str(s) if !neg => Value::String(s),
        Tok::Ident(s) if !neg && (s == "true" || s == "false") => Value::Boolean(s == "true"),
        Tok::Ident(s) if !neg && (s == "undefined" || s == "null") => Value::Undefined,
        other => return Err(ParseError::at(span, format!("expected a literal value, found {other}"))),
    };
    cur.bump();
    Ok(v)
}
