//! Shared lexer and token stream for the textual formats (vit containers,
//! rule files, sort hierarchies).
//!
//! All three formats use the same token inventory: lowercase-initial
//! identifiers are constants, uppercase-initial identifiers are variables,
//! `%` and `#` start line comments.

use std::fmt;

use thiserror::Error;

use crate::term::{PatArg, PatternCondition, PatternLabel, PatternTerm, Symbol, VarName};

/// Source position, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, col {}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Error)]
#[error("{pos}: {msg}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Var(String),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Period,
    Colon,
    Lt,
    Leq,
    Tilde,
    ArrowBi,
    ArrowFwd,
    ArrowBwd,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Var(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Period => write!(f, "`.`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Lt => write!(f, "`<`"),
            Tok::Leq => write!(f, "`=<`"),
            Tok::Tilde => write!(f, "`~`"),
            Tok::ArrowBi => write!(f, "`<->`"),
            Tok::ArrowFwd => write!(f, "`->`"),
            Tok::ArrowBwd => write!(f, "`<-`"),
        }
    }
}

pub fn lex(text: &str) -> Result<Vec<(Pos, Tok)>, SyntaxError> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }

    loop {
        let pos = Pos { line, col };
        let c = match chars.peek() {
            Some(c) => *c,
            None => break,
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '%' | '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
            }
            '(' => {
                bump!();
                toks.push((pos, Tok::LParen));
            }
            ')' => {
                bump!();
                toks.push((pos, Tok::RParen));
            }
            '[' => {
                bump!();
                toks.push((pos, Tok::LBracket));
            }
            ']' => {
                bump!();
                toks.push((pos, Tok::RBracket));
            }
            '{' => {
                bump!();
                toks.push((pos, Tok::LBrace));
            }
            '}' => {
                bump!();
                toks.push((pos, Tok::RBrace));
            }
            ',' => {
                bump!();
                toks.push((pos, Tok::Comma));
            }
            '.' => {
                bump!();
                toks.push((pos, Tok::Period));
            }
            ':' => {
                bump!();
                toks.push((pos, Tok::Colon));
            }
            '~' => {
                bump!();
                toks.push((pos, Tok::Tilde));
            }
            '<' => {
                bump!();
                if chars.peek() == Some(&'-') {
                    bump!();
                    if chars.peek() == Some(&'>') {
                        bump!();
                        toks.push((pos, Tok::ArrowBi));
                    } else {
                        toks.push((pos, Tok::ArrowBwd));
                    }
                } else {
                    toks.push((pos, Tok::Lt));
                }
            }
            '-' => {
                bump!();
                if chars.peek() == Some(&'>') {
                    bump!();
                    toks.push((pos, Tok::ArrowFwd));
                } else {
                    return Err(SyntaxError {
                        pos,
                        msg: "stray `-` (expected `->`)".into(),
                    });
                }
            }
            '=' => {
                bump!();
                if chars.peek() == Some(&'<') {
                    bump!();
                    toks.push((pos, Tok::Leq));
                } else {
                    return Err(SyntaxError {
                        pos,
                        msg: "stray `=` (expected `=<`)".into(),
                    });
                }
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match bump!() {
                        Some('"') => break,
                        Some('\\') => match bump!() {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some(c) => {
                                return Err(SyntaxError {
                                    pos,
                                    msg: format!("unknown escape `\\{c}` in string"),
                                })
                            }
                            None => {
                                return Err(SyntaxError {
                                    pos,
                                    msg: "unterminated string".into(),
                                })
                            }
                        },
                        Some(c) => s.push(c),
                        None => {
                            return Err(SyntaxError {
                                pos,
                                msg: "unterminated string".into(),
                            })
                        }
                    }
                }
                toks.push((pos, Tok::Str(s)));
            }
            c if c.is_ascii_lowercase() || c.is_ascii_uppercase() => {
                let upper = c.is_ascii_uppercase();
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                if upper {
                    toks.push((pos, Tok::Var(s)));
                } else {
                    toks.push((pos, Tok::Ident(s)));
                }
            }
            c => {
                return Err(SyntaxError {
                    pos,
                    msg: format!("unexpected character `{c}`"),
                });
            }
        }
    }
    Ok(toks)
}

/// Cursor over a lexed token list.
pub struct TokStream {
    toks: Vec<(Pos, Tok)>,
    i: usize,
    end: Pos,
}

impl TokStream {
    pub fn new(text: &str) -> Result<Self, SyntaxError> {
        let toks = lex(text)?;
        let end = toks
            .last()
            .map(|(p, _)| Pos {
                line: p.line,
                col: p.col + 1,
            })
            .unwrap_or(Pos { line: 1, col: 1 });
        Ok(TokStream { toks, i: 0, end })
    }

    pub fn pos(&self) -> Pos {
        self.toks.get(self.i).map(|(p, _)| *p).unwrap_or(self.end)
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(_, t)| t)
    }

    pub fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.i + 1).map(|(_, t)| t)
    }

    pub fn advance(&mut self) -> Option<(Pos, Tok)> {
        let t = self.toks.get(self.i).cloned();
        if t.is_some() {
            self.i += 1;
        }
        t
    }

    pub fn at_end(&self) -> bool {
        self.i >= self.toks.len()
    }

    pub fn err(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError {
            pos: self.pos(),
            msg: msg.into(),
        }
    }

    pub fn expect(&mut self, want: &Tok) -> Result<Pos, SyntaxError> {
        match self.advance() {
            Some((pos, ref t)) if t == want => Ok(pos),
            Some((pos, t)) => Err(SyntaxError {
                pos,
                msg: format!("expected {want}, found {t}"),
            }),
            None => Err(SyntaxError {
                pos: self.end,
                msg: format!("expected {want}, found end of input"),
            }),
        }
    }

    pub fn expect_ident(&mut self) -> Result<(Pos, String), SyntaxError> {
        match self.advance() {
            Some((pos, Tok::Ident(s))) => Ok((pos, s)),
            Some((pos, t)) => Err(SyntaxError {
                pos,
                msg: format!("expected identifier, found {t}"),
            }),
            None => Err(SyntaxError {
                pos: self.end,
                msg: "expected identifier, found end of input".into(),
            }),
        }
    }

    pub fn eat(&mut self, want: &Tok) -> bool {
        if self.peek() == Some(want) {
            self.i += 1;
            true
        } else {
            false
        }
    }
}

/// Parses `label:functor(arg, ...)`; the label may be a variable, arguments
/// may be variables or nested terms, parentheses are optional for 0-arity.
pub fn parse_pattern_condition(ts: &mut TokStream) -> Result<(Pos, PatternCondition), SyntaxError> {
    let pos = ts.pos();
    let label = match ts.advance() {
        Some((_, Tok::Ident(s))) => PatternLabel::Sym(Symbol::new_unchecked(s)),
        Some((_, Tok::Var(s))) => PatternLabel::Var(VarName::new_unchecked(s)),
        Some((p, t)) => {
            return Err(SyntaxError {
                pos: p,
                msg: format!("expected condition label, found {t}"),
            })
        }
        None => return Err(ts.err("expected condition label, found end of input")),
    };
    ts.expect(&Tok::Colon)?;
    let body = parse_pattern_term(ts)?;
    Ok((pos, PatternCondition { label, body }))
}

pub fn parse_pattern_term(ts: &mut TokStream) -> Result<PatternTerm, SyntaxError> {
    let (_, name) = ts.expect_ident()?;
    let functor = Symbol::new_unchecked(name);
    let mut args = Vec::new();
    if ts.eat(&Tok::LParen) && !ts.eat(&Tok::RParen) {
        loop {
            args.push(parse_pattern_arg(ts)?);
            if ts.eat(&Tok::Comma) {
                continue;
            }
            ts.expect(&Tok::RParen)?;
            break;
        }
    }
    Ok(PatternTerm { functor, args })
}

fn parse_pattern_arg(ts: &mut TokStream) -> Result<PatArg, SyntaxError> {
    match ts.peek() {
        Some(Tok::Var(_)) => {
            if let Some((_, Tok::Var(s))) = ts.advance() {
                Ok(PatArg::Var(VarName::new_unchecked(s)))
            } else {
                unreachable!()
            }
        }
        Some(Tok::Ident(_)) => Ok(PatArg::Term(parse_pattern_term(ts)?)),
        _ => Err(ts.err("expected argument (constant, term or variable)")),
    }
}
