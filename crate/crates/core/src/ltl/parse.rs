//! Infix formula parser.
//!
//! Grammar (loosest-binding first):
//!
//! ```text
//! implies ::= temporal ( "->" implies )?
//! temporal ::= or ( ("U" | "W") temporal )?      # right-associative
//! or       ::= and ( "|" and )*
//! and      ::= unary ( "&" unary )*
//! unary    ::= ("!" | "X" | "<>" | "[]") unary
//!            | "(" implies ")" | "true" | "false" | atom
//! ```
//!
//! `a -> b` is stored as `!a | b`; `true`/`false` desugar to `p | !p` /
//! `p & !p` with the alphabet's first atom as pivot; `<> f` is `true U f`
//! and `[] f` is `f W false`. Atoms must be declared in the alphabet.

use super::{Alphabet, Formula, LtlError};

pub fn parse_formula(input: &str, alphabet: &Alphabet) -> Result<Formula, LtlError> {
    let mut p = Parser {
        tokens: lex(input)?,
        pos: 0,
        alphabet,
    };
    let f = p.implies()?;
    match p.peek() {
        None => Ok(f),
        Some(t) => Err(LtlError::Syntax {
            col: t.col,
            msg: format!("unexpected `{}` after formula", t.kind.describe()),
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Ident(String),
    Not,
    And,
    Or,
    Arrow,
    Next,
    Until,
    WeakUntil,
    Eventually,
    Always,
    True,
    False,
    LParen,
    RParen,
}

impl TokKind {
    fn describe(&self) -> String {
        match self {
            TokKind::Ident(s) => s.clone(),
            TokKind::Not => "!".into(),
            TokKind::And => "&".into(),
            TokKind::Or => "|".into(),
            TokKind::Arrow => "->".into(),
            TokKind::Next => "X".into(),
            TokKind::Until => "U".into(),
            TokKind::WeakUntil => "W".into(),
            TokKind::Eventually => "<>".into(),
            TokKind::Always => "[]".into(),
            TokKind::True => "true".into(),
            TokKind::False => "false".into(),
            TokKind::LParen => "(".into(),
            TokKind::RParen => ")".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Tok {
    kind: TokKind,
    col: usize,
}

fn lex(input: &str) -> Result<Vec<Tok>, LtlError> {
    let mut out = Vec::new();
    let chars: Vec<char> = input.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let col = i + 1;
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '!' => {
                out.push(Tok { kind: TokKind::Not, col });
                i += 1;
            }
            '&' => {
                out.push(Tok { kind: TokKind::And, col });
                i += 1;
            }
            '|' => {
                out.push(Tok { kind: TokKind::Or, col });
                i += 1;
            }
            '(' => {
                out.push(Tok { kind: TokKind::LParen, col });
                i += 1;
            }
            ')' => {
                out.push(Tok { kind: TokKind::RParen, col });
                i += 1;
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    out.push(Tok { kind: TokKind::Arrow, col });
                    i += 2;
                } else {
                    return Err(LtlError::Syntax {
                        col,
                        msg: "expected `->`".into(),
                    });
                }
            }
            '<' => {
                if chars.get(i + 1) == Some(&'>') {
                    out.push(Tok { kind: TokKind::Eventually, col });
                    i += 2;
                } else {
                    return Err(LtlError::Syntax {
                        col,
                        msg: "expected `<>`".into(),
                    });
                }
            }
            '[' => {
                if chars.get(i + 1) == Some(&']') {
                    out.push(Tok { kind: TokKind::Always, col });
                    i += 2;
                } else {
                    return Err(LtlError::Syntax {
                        col,
                        msg: "expected `[]`".into(),
                    });
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let kind = match word.as_str() {
                    "X" => TokKind::Next,
                    "U" => TokKind::Until,
                    "W" => TokKind::WeakUntil,
                    "true" => TokKind::True,
                    "false" => TokKind::False,
                    _ => TokKind::Ident(word),
                };
                out.push(Tok { kind, col });
            }
            other => {
                return Err(LtlError::Syntax {
                    col,
                    msg: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Tok>,
    pos: usize,
    alphabet: &'a Alphabet,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, kind: &TokKind) -> bool {
        if self.peek().map(|t| &t.kind) == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn end_col(&self) -> usize {
        self.tokens.last().map(|t| t.col + 1).unwrap_or(1)
    }

    fn implies(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.temporal()?;
        if self.eat(&TokKind::Arrow) {
            let rhs = self.implies()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn temporal(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.or()?;
        match self.peek().map(|t| t.kind.clone()) {
            Some(TokKind::Until) => {
                self.pos += 1;
                let rhs = self.temporal()?;
                Ok(Formula::until(lhs, rhs))
            }
            Some(TokKind::WeakUntil) => {
                self.pos += 1;
                let rhs = self.temporal()?;
                Ok(Formula::weak_until(lhs, rhs))
            }
            _ => Ok(lhs),
        }
    }

    fn or(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.and()?;
        while self.eat(&TokKind::Or) {
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.unary()?;
        while self.eat(&TokKind::And) {
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, LtlError> {
        let Some(tok) = self.bump() else {
            return Err(LtlError::Syntax {
                col: self.end_col(),
                msg: "unexpected end of input".into(),
            });
        };
        match tok.kind {
            TokKind::Not => Ok(Formula::not(self.unary()?)),
            TokKind::Next => Ok(Formula::next(self.unary()?)),
            TokKind::Eventually => {
                let pivot = self.alphabet.pivot()?.to_string();
                Ok(Formula::eventually(self.unary()?, &pivot))
            }
            TokKind::Always => {
                let pivot = self.alphabet.pivot()?.to_string();
                Ok(Formula::always(self.unary()?, &pivot))
            }
            TokKind::LParen => {
                let f = self.implies()?;
                if self.eat(&TokKind::RParen) {
                    Ok(f)
                } else {
                    Err(LtlError::Syntax {
                        col: self.peek().map(|t| t.col).unwrap_or_else(|| self.end_col()),
                        msg: "expected `)`".into(),
                    })
                }
            }
            TokKind::True => Ok(Formula::tt(self.alphabet.pivot()?)),
            TokKind::False => Ok(Formula::ff(self.alphabet.pivot()?)),
            TokKind::Ident(name) => {
                if self.alphabet.bit(&name).is_some() {
                    Ok(Formula::atom(name))
                } else {
                    Err(LtlError::UndeclaredAtom(name))
                }
            }
            other => Err(LtlError::Syntax {
                col: tok.col,
                msg: format!("unexpected `{}`", other.describe()),
            }),
        }
    }
}
