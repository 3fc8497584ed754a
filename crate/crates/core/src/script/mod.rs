//! A small scripting language for analyses.
//!
//! ```text
//! rep = load_cnf("model.cnf")
//! w = new_weighting(10)
//! set_default_positive_weight(w, 1)
//! opt = optimize(rep, w, "min")
//! print get_weight(w, opt)
//! ```
//!
//! One statement per line: `name = expr`, `print expr`, or a bare call
//! `f(x, ...)`, which is shorthand for `x = f(x, ...)` and is how weightings
//! are updated. Expressions are calls, variable names, integer literals and
//! double-quoted strings. `#` starts a comment.

mod interp;

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

pub use interp::{execute_script, run_script, Interpreter, RuntimeValue, ScriptError, ScriptErrorKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Call { name: String, args: Vec<Expr> },
    Var(String),
    Int(BigInt),
    Str(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatementKind {
    Assign { name: String, expr: Expr },
    Print(Expr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub line: usize,
    pub kind: StatementKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Script {
    pub statements: Vec<Statement>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Int(BigInt),
    Str(String),
    LParen,
    RParen,
    Comma,
    Equals,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "`{s}`"),
            Token::Int(i) => write!(f, "`{i}`"),
            Token::Str(s) => write!(f, "{s:?}"),
            Token::LParen => f.write_str("`(`"),
            Token::RParen => f.write_str("`)`"),
            Token::Comma => f.write_str("`,`"),
            Token::Equals => f.write_str("`=`"),
        }
    }
}

fn tokenize(line_no: usize, line: &str) -> Result<Vec<Token>, ParseError> {
    let err = |message: String| ParseError { line: line_no, message };
    let mut tokens = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '#' => break,
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' | ')' | ',' | '=' => {
                chars.next();
                tokens.push(match c {
                    '(' => Token::LParen,
                    ')' => Token::RParen,
                    ',' => Token::Comma,
                    _ => Token::Equals,
                });
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None => return Err(err("unterminated string".into())),
                        Some('"') => break,
                        Some('\\') => match chars.next() {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            other => return Err(err(format!("bad escape `\\{}`", other.unwrap_or(' ')))),
                        },
                        Some(ch) => s.push(ch),
                    }
                }
                tokens.push(Token::Str(s));
            }
            c if c == '-' || c.is_ascii_digit() => {
                let mut s = String::new();
                s.push(c);
                chars.next();
                while let Some(&d) = chars.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    s.push(d);
                    chars.next();
                }
                let n: BigInt = s.parse().map_err(|_| err(format!("bad integer `{s}`")))?;
                tokens.push(Token::Int(n));
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if !(d.is_alphanumeric() || d == '_') {
                        break;
                    }
                    s.push(d);
                    chars.next();
                }
                tokens.push(Token::Ident(s));
            }
            other => return Err(err(format!("unexpected character `{other}`"))),
        }
    }
    Ok(tokens)
}

struct LineParser {
    tokens: Vec<Token>,
    pos: usize,
    line: usize,
}

impl LineParser {
    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        match self.next() {
            Some(Token::Int(n)) => Ok(Expr::Int(n)),
            Some(Token::Str(s)) => Ok(Expr::Str(s)),
            Some(Token::Ident(name)) => {
                if self.peek() == Some(&Token::LParen) {
                    self.next();
                    let args = self.args()?;
                    Ok(Expr::Call { name, args })
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Some(t) => Err(self.err(format!("expected an expression, found {t}"))),
            None => Err(self.err("expected an expression")),
        }
    }

    /// Arguments after `(`, through the closing `)`.
    fn args(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut args = Vec::new();
        if self.peek() == Some(&Token::RParen) {
            self.next();
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            match self.next() {
                Some(Token::Comma) => {}
                Some(Token::RParen) => return Ok(args),
                Some(t) => return Err(self.err(format!("expected `,` or `)`, found {t}"))),
                None => return Err(self.err("missing `)`")),
            }
        }
    }

    fn statement(&mut self) -> Result<StatementKind, ParseError> {
        let kind = match (self.tokens.first(), self.tokens.get(1)) {
            (Some(Token::Ident(kw)), _) if kw == "print" => {
                self.next();
                StatementKind::Print(self.expr()?)
            }
            (Some(Token::Ident(name)), Some(Token::Equals)) => {
                let name = name.clone();
                self.pos = 2;
                StatementKind::Assign {
                    name,
                    expr: self.expr()?,
                }
            }
            _ => match self.expr()? {
                Expr::Call { name, args } => match args.first() {
                    Some(Expr::Var(target)) => StatementKind::Assign {
                        name: target.clone(),
                        expr: Expr::Call {
                            name,
                            args: args.clone(),
                        },
                    },
                    _ => {
                        return Err(self.err(format!(
                            "a bare call must update a variable given as its first argument (`{name}`)"
                        )))
                    }
                },
                _ => return Err(self.err("expected `print`, an assignment, or a call")),
            },
        };
        if let Some(t) = self.peek() {
            return Err(self.err(format!("unexpected {t} after statement")));
        }
        Ok(kind)
    }
}

pub fn parse_script(text: &str) -> Result<Script, ParseError> {
    let mut statements = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let tokens = tokenize(line, raw)?;
        if tokens.is_empty() {
            continue;
        }
        let mut p = LineParser { tokens, pos: 0, line };
        statements.push(Statement {
            line,
            kind: p.statement()?,
        });
    }
    Ok(Script { statements })
}
