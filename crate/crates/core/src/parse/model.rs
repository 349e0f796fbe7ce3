use std::sync::Arc;

use super::lexer::{tokenize, Cursor, Tok};
use super::ocl::expression;
use super::{Diagnostic, ParseError};
use crate::location::{Origin, SourceLocation, Span};
use crate::model::{
    check_well_formed, Association, AssociationEnd, Attribute, Class, Invariant, InvariantSource,
    Model, Multiplicity, Upper,
};
use crate::ocl::{typecheck, Expr, OclType};

struct RawInvariant {
    context: String,
    name: String,
    body: Expr,
}

struct ModelParser<'a> {
    file: &'a str,
    text: &'a str,
    errors: Vec<Diagnostic>,
}

/// Parses a `.use`-style model, checks well-formedness and typechecks every
/// invariant. All problems found are reported together.
pub fn parse_model(text: &str, file: &str) -> Result<Model, Vec<Diagnostic>> {
    let toks = match tokenize(text) {
        Ok(t) => t,
        Err(e) => return Err(vec![Diagnostic::syntax(file, text, e)]),
    };
    let mut p = ModelParser {
        file,
        text,
        errors: Vec::new(),
    };
    let mut cur = Cursor::new(&toks);
    let (model, raw) = match p.model(&mut cur) {
        Ok(r) => r,
        Err(e) => return Err(vec![Diagnostic::syntax(file, text, e)]),
    };
    if !p.errors.is_empty() {
        return Err(p.errors);
    }
    p.finish(model, raw)
}

fn is_item_start(cur: &Cursor<'_>) -> bool {
    ["class", "abstract", "association", "constraints", "context"]
        .iter()
        .any(|k| cur.is_keyword(k))
}

impl ModelParser<'_> {
    fn loc(&self, span: Span) -> SourceLocation {
        SourceLocation::at_offset(self.file, self.text, span.start as usize)
    }

    fn model(&mut self, cur: &mut Cursor<'_>) -> Result<(Model, Vec<RawInvariant>), ParseError> {
        cur.expect_keyword("model")?;
        let (name, _) = cur.expect_ident("a model name")?;
        let mut model = Model::empty(name);
        let mut invariants = Vec::new();
        let mut in_constraints = false;
        while cur.peek() != &Tok::Eof {
            let res = if cur.is_keyword("class") || cur.is_keyword("abstract") {
                in_constraints = false;
                self.class(cur).map(|c| model.classes.push(c))
            } else if cur.is_keyword("association") {
                in_constraints = false;
                self.association(cur).map(|a| model.associations.push(a))
            } else if cur.eat_keyword("constraints") {
                in_constraints = true;
                Ok(())
            } else if cur.is_keyword("context") {
                self.context(cur, &mut invariants)
            } else {
                let what = if in_constraints {
                    "`context`"
                } else {
                    "`class`, `association` or `constraints`"
                };
                Err(ParseError::at(
                    cur.span(),
                    format!("expected {what}, found {}", cur.peek()),
                ))
            };
            if let Err(e) = res {
                self.errors.push(Diagnostic::syntax(self.file, self.text, e));
                // Resynchronise at the next top-level item.
                cur.bump();
                while cur.peek() != &Tok::Eof && !is_item_start(cur) {
                    cur.bump();
                }
            }
        }
        Ok((model, invariants))
    }

    fn class(&mut self, cur: &mut Cursor<'_>) -> Result<Class, ParseError> {
        let start = cur.span();
        let is_abstract = cur.eat_keyword("abstract");
        cur.expect_keyword("class")?;
        let (name, _) = cur.expect_ident("a class name")?;
        let mut parents = Vec::new();
        if cur.eat(&Tok::Lt) {
            loop {
                if cur.is_keyword("end") || cur.is_keyword("attributes") {
                    return Err(ParseError::at(
                        cur.span(),
                        format!("expected a superclass name, found {}", cur.peek()),
                    ));
                }
                parents.push(cur.expect_ident("a superclass name")?.0);
                if !cur.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        let mut attributes = Vec::new();
        if cur.eat_keyword("attributes") {
            while !cur.is_keyword("end") {
                let (aname, aspan) = cur.expect_ident("an attribute name or `end`")?;
                cur.expect(&Tok::Colon)?;
                let (tname, _) = cur.expect_ident("a type name")?;
                let ty = OclType::basic_from_name(&tname).unwrap_or(OclType::Class(tname));
                cur.eat(&Tok::Semi);
                attributes.push(Attribute {
                    name: aname,
                    ty,
                    origin: Origin::at(self.loc(aspan)),
                });
            }
        }
        cur.expect_keyword("end")?;
        Ok(Class {
            name,
            is_abstract,
            attributes,
            parents,
            origin: Origin::at(self.loc(start)),
        })
    }

    fn bound(cur: &mut Cursor<'_>) -> Result<Option<u32>, ParseError> {
        match cur.peek() {
            Tok::Star => {
                cur.bump();
                Ok(None)
            }
            Tok::Int(v) if *v >= 0 && *v <= u32::MAX as i64 => {
                let v = *v as u32;
                cur.bump();
                Ok(Some(v))
            }
            other => Err(ParseError::at(
                cur.span(),
                format!("expected a multiplicity bound, found {other}"),
            )),
        }
    }

    fn multiplicity(cur: &mut Cursor<'_>) -> Result<Multiplicity, ParseError> {
        let open = cur.expect(&Tok::LBracket)?;
        let first = Self::bound(cur)?;
        let m = if cur.eat(&Tok::DotDot) {
            let lower = first.ok_or_else(|| {
                ParseError::at(open, "lower multiplicity bound cannot be `*`")
            })?;
            let upper = Self::bound(cur)?.map_or(Upper::Unbounded, Upper::Bounded);
            Multiplicity { lower, upper }
        } else {
            match first {
                None => Multiplicity::MANY,
                Some(n) => Multiplicity {
                    lower: n,
                    upper: Upper::Bounded(n),
                },
            }
        };
        cur.expect(&Tok::RBracket)?;
        Ok(m)
    }

    fn association_end(cur: &mut Cursor<'_>) -> Result<AssociationEnd, ParseError> {
        let (class, _) = cur.expect_ident("a class name")?;
        let multiplicity = Self::multiplicity(cur)?;
        cur.expect_keyword("role")?;
        let (role, _) = cur.expect_ident("a role name")?;
        cur.eat(&Tok::Semi);
        Ok(AssociationEnd {
            role,
            class,
            multiplicity,
        })
    }

    fn association(&mut self, cur: &mut Cursor<'_>) -> Result<Association, ParseError> {
        let start = cur.expect_keyword("association")?;
        let (name, _) = cur.expect_ident("an association name")?;
        cur.expect_keyword("between")?;
        let a = Self::association_end(cur)?;
        let b = Self::association_end(cur)?;
        if !cur.is_keyword("end") {
            return Err(ParseError::at(
                cur.span(),
                "only binary associations are supported; expected `end`",
            ));
        }
        cur.bump();
        Ok(Association {
            name,
            ends: [a, b],
            origin: Origin::at(self.loc(start)),
        })
    }

    fn context(&mut self, cur: &mut Cursor<'_>, out: &mut Vec<RawInvariant>) -> Result<(), ParseError> {
        cur.expect_keyword("context")?;
        let (context, _) = cur.expect_ident("a context class name")?;
        if !cur.is_keyword("inv") {
            return Err(ParseError::at(
                cur.span(),
                format!("expected `inv`, found {}", cur.peek()),
            ));
        }
        while cur.eat_keyword("inv") {
            let name = match cur.peek() {
                Tok::Ident(n) => {
                    let n = n.clone();
                    cur.bump();
                    n
                }
                _ => format!("inv{}", out.len() + 1),
            };
            cur.expect(&Tok::Colon)?;
            let body = expression(cur)?;
            out.push(RawInvariant {
                context: context.clone(),
                name,
                body,
            });
        }
        Ok(())
    }

    fn finish(mut self, mut model: Model, raw: Vec<RawInvariant>) -> Result<Model, Vec<Diagnostic>> {
        let source: Arc<str> = Arc::from(self.text);
        let file_start = SourceLocation::new(self.file, 1, 1);
        for r in raw {
            model.invariants.push(Invariant {
                context: r.context,
                name: r.name,
                body: r.body,
                source: InvariantSource {
                    text: source.clone(),
                    location: Some(file_start.clone()),
                },
            });
        }
        for err in check_well_formed(&model) {
            let location = err
                .location()
                .cloned()
                .unwrap_or_else(|| SourceLocation::new(self.file, 1, 1));
            self.errors.push(Diagnostic::Model { error: err, location });
        }
        if !self.errors.is_empty() {
            return Err(self.errors);
        }
        let mut checked = Vec::with_capacity(model.invariants.len());
        for inv in &model.invariants {
            let env = [("self".to_string(), OclType::Class(inv.context.clone()))];
            match typecheck(&inv.body, &env, &model) {
                Ok(body) => {
                    let t = &body.ann.as_ref().expect("annotated").standard;
                    if t != &OclType::Boolean {
                        self.errors.push(Diagnostic::Type {
                            message: format!(
                                "invariant `{}` has type `{t}`, expected Boolean",
                                inv.qualified_name()
                            ),
                            location: self.loc(inv.body.span),
                        });
                    }
                    checked.push(body);
                }
                Err(e) => self.errors.push(Diagnostic::Type {
                    message: format!("in invariant `{}`: {}", inv.qualified_name(), e.message),
                    location: self.loc(e.span),
                }),
            }
        }
        if !self.errors.is_empty() {
            return Err(self.errors);
        }
        for (inv, body) in model.invariants.iter_mut().zip(checked) {
            inv.body = body;
        }
        Ok(model)
    }
}
