use std::fmt;

use super::ParseError;
use crate::location::Span;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Real(f64),
    Str(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    ColonColon,
    Assign,
    Dot,
    DotDot,
    Arrow,
    Bar,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Bang,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Int(v) => return write!(f, "`{v}`"),
            Tok::Real(v) => return write!(f, "`{v}`"),
            Tok::Str(s) => return write!(f, "'{s}'"),
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::ColonColon => "::",
            Tok::Assign => ":=",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::Arrow => "->",
            Tok::Bar => "|",
            Tok::Eq => "=",
            Tok::Ne => "<>",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Bang => "!",
            Tok::Eof => return f.write_str("end of input"),
        };
        write!(f, "`{s}`")
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

/// Splits `text` into tokens. `--` starts a comment running to end of line.
pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'-' && bytes.get(i + 1) == Some(&b'-') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            Tok::Ident(text[start..i].to_string())
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let mut real = false;
            if bytes.get(i) == Some(&b'.') && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
                real = true;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if matches!(bytes.get(i), Some(b'e' | b'E')) {
                let mut j = i + 1;
                if matches!(bytes.get(j), Some(b'+' | b'-')) {
                    j += 1;
                }
                if bytes.get(j).is_some_and(u8::is_ascii_digit) {
                    real = true;
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lexeme = &text[start..i];
            if real {
                Tok::Real(lexeme.parse().map_err(|_| {
                    ParseError::at(Span::new(start, i), format!("invalid real literal `{lexeme}`"))
                })?)
            } else {
                Tok::Int(lexeme.parse().map_err(|_| {
                    ParseError::at(
                        Span::new(start, i),
                        format!("integer literal `{lexeme}` is out of range"),
                    )
                })?)
            }
        } else if c == b'\'' {
            i += 1;
            let mut s = String::new();
            loop {
                let Some(ch) = text[i..].chars().next() else {
                    return Err(ParseError::at(
                        Span::new(start, i),
                        "unterminated string literal",
                    ));
                };
                i += ch.len_utf8();
                match ch {
                    '\'' => break,
                    '\\' => {
                        let Some(esc) = text[i..].chars().next() else {
                            continue;
                        };
                        i += esc.len_utf8();
                        s.push(match esc {
                            'n' => '\n',
                            't' => '\t',
                            other => other,
                        });
                    }
                    '\n' => {
                        return Err(ParseError::at(
                            Span::new(start, i),
                            "unterminated string literal",
                        ))
                    }
                    other => s.push(other),
                }
            }
            Tok::Str(s)
        } else {
            let two = bytes.get(i + 1).copied();
            let (tok, len) = match (c, two) {
                (b':', Some(b':')) => (Tok::ColonColon, 2),
                (b':', Some(b'=')) => (Tok::Assign, 2),
                (b'.', Some(b'.')) => (Tok::DotDot, 2),
                (b'-', Some(b'>')) => (Tok::Arrow, 2),
                (b'<', Some(b'>')) => (Tok::Ne, 2),
                (b'<', Some(b'=')) => (Tok::Le, 2),
                (b'>', Some(b'=')) => (Tok::Ge, 2),
                (b'(', _) => (Tok::LParen, 1),
                (b')', _) => (Tok::RParen, 1),
                (b'{', _) => (Tok::LBrace, 1),
                (b'}', _) => (Tok::RBrace, 1),
                (b'[', _) => (Tok::LBracket, 1),
                (b']', _) => (Tok::RBracket, 1),
                (b',', _) => (Tok::Comma, 1),
                (b';', _) => (Tok::Semi, 1),
                (b':', _) => (Tok::Colon, 1),
                (b'.', _) => (Tok::Dot, 1),
                (b'|', _) => (Tok::Bar, 1),
                (b'=', _) => (Tok::Eq, 1),
                (b'<', _) => (Tok::Lt, 1),
                (b'>', _) => (Tok::Gt, 1),
                (b'+', _) => (Tok::Plus, 1),
                (b'-', _) => (Tok::Minus, 1),
                (b'*', _) => (Tok::Star, 1),
                (b'/', _) => (Tok::Slash, 1),
                (b'!', _) => (Tok::Bang, 1),
                _ => {
                    let ch = text[i..].chars().next().unwrap_or('?');
                    return Err(ParseError::at(
                        Span::new(i, i + ch.len_utf8()),
                        format!("unexpected character `{ch}`"),
                    ));
                }
            };
            i += len;
            tok
        };
        out.push(Token {
            tok,
            span: Span::new(start, i),
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(text.len(), text.len()),
    });
    Ok(out)
}

/// Cursor over a token stream.
pub struct Cursor<'t> {
    pub toks: &'t [Token],
    pub pos: usize,
}

impl<'t> Cursor<'t> {
    pub fn new(toks: &'t [Token]) -> Self {
        Cursor { toks, pos: 0 }
    }

    pub fn peek(&self) -> &'t Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, n: usize) -> &'t Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    pub fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    pub fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    pub fn bump(&mut self) -> &'t Token {
        let t = &self.toks[self.pos];
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<Span, ParseError> {
        if self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(ParseError::at(
                self.span(),
                format!("expected {tok}, found {}", self.peek()),
            ))
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<Span, ParseError> {
        if self.is_keyword(kw) {
            Ok(self.bump().span)
        } else {
            Err(ParseError::at(
                self.span(),
                format!("expected `{kw}`, found {}", self.peek()),
            ))
        }
    }

    pub fn expect_ident(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        match self.peek() {
            Tok::Ident(s) => {
                let span = self.bump().span;
                Ok((s.clone(), span))
            }
            other => Err(ParseError::at(
                self.span(),
                format!("expected {what}, found {other}"),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn ranges_are_not_reals() {
        assert_eq!(
            toks("[0..1] 1.5 2e3"),
            vec![
                Tok::LBracket,
                Tok::Int(0),
                Tok::DotDot,
                Tok::Int(1),
                Tok::RBracket,
                Tok::Real(1.5),
                Tok::Real(2000.0),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_strings() {
        assert_eq!(
            toks("a -- note\n'it\\'s' -> b"),
            vec![
                Tok::Ident("a".into()),
                Tok::Str("it's".into()),
                Tok::Arrow,
                Tok::Ident("b".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn reports_bad_character() {
        let err = tokenize("a # b").unwrap_err();
        assert_eq!(err.span, Span::new(2, 3));
    }
}
