//! The coefficient-expression language used by problem files and the CLI.
//!
//! Expressions are real-valued functions of the single variable `t`. The
//! grammar, which is the contract for problem files:
//!
//! ```text
//! expr    := term { ("+" | "-") term }
//! term    := unary { ("*" | "/") unary }
//! unary   := "-" unary | power
//! power   := atom [ "^" unary ]
//! atom    := number | "t" | "pi" | "e"
//!          | function "(" expr ")"
//!          | "(" expr ")"
//! number  := digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
//! function := "sin" | "cos" | "tan" | "sinh" | "cosh" | "tanh"
//!           | "exp" | "ln" | "sqrt" | "abs" | "erf" | "erfi"
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-t^2`
//! is `-(t^2)` and `2^3^2` is `2^(3^2)`. Whitespace is insignificant.
//! Implicit multiplication is rejected: `2t` is a syntax error, write `2*t`.
//!
//! Parsing and evaluation are pure; an [`Expression`] is immutable and can
//! be shared freely across threads.

use std::fmt;

use thiserror::Error;

use crate::special;

/// Byte range into the original source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Erf,
    Erfi,
}

impl Function {
    fn from_name(name: &str) -> Option<Function> {
        Some(match name {
            "sin" => Function::Sin,
            "cos" => Function::Cos,
            "tan" => Function::Tan,
            "sinh" => Function::Sinh,
            "cosh" => Function::Cosh,
            "tanh" => Function::Tanh,
            "exp" => Function::Exp,
            "ln" => Function::Ln,
            "sqrt" => Function::Sqrt,
            "abs" => Function::Abs,
            "erf" => Function::Erf,
            "erfi" => Function::Erfi,
            _ => return None,
        })
    }

    fn name(&self) -> &'static str {
        match self {
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Tan => "tan",
            Function::Sinh => "sinh",
            Function::Cosh => "cosh",
            Function::Tanh => "tanh",
            Function::Exp => "exp",
            Function::Ln => "ln",
            Function::Sqrt => "sqrt",
            Function::Abs => "abs",
            Function::Erf => "erf",
            Function::Erfi => "erfi",
        }
    }
}

/// A node of the abstract syntax tree, tagged with its source span.
#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub enum NodeKind {
    Number(f64),
    Time,
    Const(Constant),
    Neg(Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    Call(Function, Box<Node>),
}

// Structural equality; spans are ignored so that a reparsed pretty-print
// compares equal to the original tree.
impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (NodeKind::Number(a), NodeKind::Number(b)) => a == b,
            (NodeKind::Time, NodeKind::Time) => true,
            (NodeKind::Const(a), NodeKind::Const(b)) => a == b,
            (NodeKind::Neg(a), NodeKind::Neg(b)) => a == b,
            (NodeKind::Binary(op_a, la, ra), NodeKind::Binary(op_b, lb, rb)) => {
                op_a == op_b && la == lb && ra == rb
            }
            (NodeKind::Call(fa, a), NodeKind::Call(fb, b)) => fa == fb && a == b,
            _ => false,
        }
    }
}

/// A parsed coefficient expression.
#[derive(Debug, Clone)]
pub struct Expression {
    source: String,
    root: Node,
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

/// Parse failure with the byte offset of the problem and what was expected
/// there.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: unexpected character `{found}`")]
    UnexpectedCharacter { offset: usize, found: char },
    #[error("syntax error at byte {offset}: malformed number literal `{text}`")]
    InvalidNumber { offset: usize, text: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("syntax error at byte {offset}: found {found}, expected one of: {}", expected.join(", "))]
    Unexpected {
        offset: usize,
        found: String,
        expected: Vec<&'static str>,
    },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::UnexpectedCharacter { offset, .. }
            | ParseError::InvalidNumber { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::Unexpected { offset, .. } => *offset,
        }
    }
}

/// Evaluation failure, pointing at the offending subexpression.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} in `{fragment}` (bytes {}..{} of the expression)", span.start, span.end)]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub span: Span,
    /// Source slice of the subexpression that failed.
    pub fragment: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalErrorKind {
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of non-positive value {0}")]
    LogDomain(f64),
    #[error("square root of negative value {0}")]
    SqrtDomain(f64),
    #[error("power with no real value (base {base}, exponent {exponent})")]
    PowDomain { base: f64, exponent: f64 },
    #[error("result overflowed the floating-point range")]
    Overflow,
}

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    start: usize,
    end: usize,
}

impl Token {
    fn describe(&self) -> String {
        match &self.kind {
            TokenKind::Number(_) => "a number".to_string(),
            TokenKind::Ident(name) => format!("`{name}`"),
            TokenKind::Plus => "`+`".to_string(),
            TokenKind::Minus => "`-`".to_string(),
            TokenKind::Star => "`*`".to_string(),
            TokenKind::Slash => "`/`".to_string(),
            TokenKind::Caret => "`^`".to_string(),
            TokenKind::LParen => "`(`".to_string(),
            TokenKind::RParen => "`)`".to_string(),
            TokenKind::Eof => "end of input".to_string(),
        }
    }
}

fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0usize;
    while i < source.len() {
        let c = source[i..].chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        let start = i;
        let kind = match c {
            '+' => TokenKind::Plus,
            '-' => TokenKind::Minus,
            '*' => TokenKind::Star,
            '/' => TokenKind::Slash,
            '^' => TokenKind::Caret,
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            '0'..='9' | '.' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j < bytes.len() && bytes[j] == b'.' {
                    j += 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        j = k;
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                    }
                }
                let text = &source[i..j];
                let value: f64 = text.parse().map_err(|_| ParseError::InvalidNumber {
                    offset: i,
                    text: text.to_string(),
                })?;
                if !value.is_finite() {
                    return Err(ParseError::InvalidNumber {
                        offset: i,
                        text: text.to_string(),
                    });
                }
                tokens.push(Token {
                    kind: TokenKind::Number(value),
                    start,
                    end: j,
                });
                i = j;
                continue;
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut j = i;
                while j < bytes.len()
                    && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_')
                {
                    j += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(source[i..j].to_string()),
                    start,
                    end: j,
                });
                i = j;
                continue;
            }
            other => {
                return Err(ParseError::UnexpectedCharacter {
                    offset: i,
                    found: other,
                })
            }
        };
        i += c.len_utf8();
        tokens.push(Token {
            kind,
            start,
            end: i,
        });
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        start: source.len(),
        end: source.len(),
    });
    Ok(tokens)
}

// ---------------------------------------------------------------------------
// Parser (recursive descent)
// ---------------------------------------------------------------------------

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

const EXPR_START: &[&str] = &["a number", "`t`", "`pi`", "`e`", "a function name", "`(`", "`-`"];
const AFTER_EXPR: &[&str] = &["`+`", "`-`", "`*`", "`/`", "`^`", "end of input"];

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> &Token {
        let t = &self.tokens[self.pos];
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &'static [&'static str]) -> ParseError {
        let t = self.peek();
        ParseError::Unexpected {
            offset: t.start,
            found: t.describe(),
            expected: expected.to_vec(),
        }
    }

    fn expect_rparen(&mut self) -> Result<usize, ParseError> {
        if matches!(self.peek().kind, TokenKind::RParen) {
            let end = self.peek().end;
            self.advance();
            Ok(end)
        } else {
            Err(self.unexpected(&["`)`", "`+`", "`-`", "`*`", "`/`", "`^`"]))
        }
    }

    fn parse_expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.parse_term()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Plus => BinaryOp::Add,
                TokenKind::Minus => BinaryOp::Sub,
                _ => break,
            };
            self.advance();
            let rhs = self.parse_term()?;
            let span = Span {
                start: lhs.span.start,
                end: rhs.span.end,
            };
            lhs = Node {
                kind: NodeKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn parse_term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Star => BinaryOp::Mul,
                TokenKind::Slash => BinaryOp::Div,
                _ => break,
            };
            self.advance();
            let rhs = self.parse_unary()?;
            let span = Span {
                start: lhs.span.start,
                end: rhs.span.end,
            };
            lhs = Node {
                kind: NodeKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Node, ParseError> {
        if matches!(self.peek().kind, TokenKind::Minus) {
            let start = self.peek().start;
            self.advance();
            let inner = self.parse_unary()?;
            let span = Span {
                start,
                end: inner.span.end,
            };
            return Ok(Node {
                kind: NodeKind::Neg(Box::new(inner)),
                span,
            });
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Node, ParseError> {
        let base = self.parse_atom()?;
        if matches!(self.peek().kind, TokenKind::Caret) {
            self.advance();
            // right-associative, and the exponent may carry its own sign
            let exponent = self.parse_unary()?;
            let span = Span {
                start: base.span.start,
                end: exponent.span.end,
            };
            return Ok(Node {
                kind: NodeKind::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)),
                span,
            });
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Node, ParseError> {
        let token = self.peek().clone();
        match token.kind {
            TokenKind::Number(v) => {
                self.advance();
                Ok(Node {
                    kind: NodeKind::Number(v),
                    span: Span {
                        start: token.start,
                        end: token.end,
                    },
                })
            }
            TokenKind::Ident(ref name) => {
                self.advance();
                let span = Span {
                    start: token.start,
                    end: token.end,
                };
                match name.as_str() {
                    "t" => Ok(Node {
                        kind: NodeKind::Time,
                        span,
                    }),
                    "pi" => Ok(Node {
                        kind: NodeKind::Const(Constant::Pi),
                        span,
                    }),
                    "e" => Ok(Node {
                        kind: NodeKind::Const(Constant::E),
                        span,
                    }),
                    other => {
                        if let Some(func) = Function::from_name(other) {
                            if !matches!(self.peek().kind, TokenKind::LParen) {
                                return Err(self.unexpected(&["`(`"]));
                            }
                            self.advance();
                            let arg = self.parse_expr()?;
                            let end = self.expect_rparen()?;
                            Ok(Node {
                                kind: NodeKind::Call(func, Box::new(arg)),
                                span: Span {
                                    start: token.start,
                                    end,
                                },
                            })
                        } else {
                            Err(ParseError::UnknownIdentifier {
                                offset: token.start,
                                name: other.to_string(),
                            })
                        }
                    }
                }
            }
            TokenKind::LParen => {
                self.advance();
                let inner = self.parse_expr()?;
                let end = self.expect_rparen()?;
                Ok(Node {
                    kind: inner.kind,
                    span: Span {
                        start: token.start,
                        end,
                    },
                })
            }
            _ => Err(self.unexpected(EXPR_START)),
        }
    }
}

/// Parses an expression over the variable `t`.
pub fn parse(source: &str) -> Result<Expression, ParseError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
    };
    let root = parser.parse_expr()?;
    if !matches!(parser.peek().kind, TokenKind::Eof) {
        return Err(parser.unexpected(AFTER_EXPR));
    }
    Ok(Expression {
        source: source.to_string(),
        root,
    })
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

impl Expression {
    /// Original source text.
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Evaluates at time `t` (which must be finite). Domain failures name
    /// the offending subexpression.
    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        assert!(t.is_finite(), "evaluation time must be finite");
        self.eval_node(&self.root, t)
    }

    /// Evaluation variant for numeric plumbing: domain errors become NaN,
    /// which integrators and probe grids detect downstream.
    pub fn eval_or_nan(&self, t: f64) -> f64 {
        self.eval(t).unwrap_or(f64::NAN)
    }

    fn fail(&self, kind: EvalErrorKind, span: Span) -> EvalError {
        EvalError {
            kind,
            span,
            fragment: self.source[span.start..span.end].to_string(),
        }
    }

    fn eval_node(&self, node: &Node, t: f64) -> Result<f64, EvalError> {
        let value = match &node.kind {
            NodeKind::Number(v) => *v,
            NodeKind::Time => t,
            NodeKind::Const(Constant::Pi) => std::f64::consts::PI,
            NodeKind::Const(Constant::E) => std::f64::consts::E,
            NodeKind::Neg(inner) => -self.eval_node(inner, t)?,
            NodeKind::Binary(op, lhs, rhs) => {
                let a = self.eval_node(lhs, t)?;
                let b = self.eval_node(rhs, t)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(self.fail(EvalErrorKind::DivisionByZero, node.span));
                        }
                        a / b
                    }
                    BinaryOp::Pow => {
                        let v = a.powf(b);
                        if v.is_nan() && !a.is_nan() && !b.is_nan() {
                            return Err(self.fail(
                                EvalErrorKind::PowDomain {
                                    base: a,
                                    exponent: b,
                                },
                                node.span,
                            ));
                        }
                        v
                    }
                }
            }
            NodeKind::Call(func, arg) => {
                let v = self.eval_node(arg, t)?;
                match func {
                    Function::Sin => v.sin(),
                    Function::Cos => v.cos(),
                    Function::Tan => v.tan(),
                    Function::Sinh => v.sinh(),
                    Function::Cosh => v.cosh(),
                    Function::Tanh => v.tanh(),
                    Function::Exp => v.exp(),
                    Function::Ln => {
                        if v <= 0.0 {
                            return Err(self.fail(EvalErrorKind::LogDomain(v), node.span));
                        }
                        v.ln()
                    }
                    Function::Sqrt => {
                        if v < 0.0 {
                            return Err(self.fail(EvalErrorKind::SqrtDomain(v), node.span));
                        }
                        v.sqrt()
                    }
                    Function::Abs => v.abs(),
                    Function::Erf => special::erf(v),
                    Function::Erfi => special::erfi(v)
                        .map_err(|_| self.fail(EvalErrorKind::Overflow, node.span))?,
                }
            }
        };
        if !value.is_finite() {
            return Err(self.fail(EvalErrorKind::Overflow, node.span));
        }
        Ok(value)
    }

    // -----------------------------------------------------------------------
    // Pretty-printing
    // -----------------------------------------------------------------------

    /// Canonical text form; reparsing it yields a structurally identical
    /// tree.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        print_node(&self.root, &mut out);
        out
    }
}

fn precedence(kind: &NodeKind) -> u8 {
    match kind {
        NodeKind::Binary(BinaryOp::Add | BinaryOp::Sub, _, _) => 1,
        NodeKind::Binary(BinaryOp::Mul | BinaryOp::Div, _, _) => 2,
        NodeKind::Neg(_) => 3,
        NodeKind::Binary(BinaryOp::Pow, _, _) => 4,
        _ => 5,
    }
}

fn print_child(child: &Node, min_prec: u8, out: &mut String) {
    if precedence(&child.kind) < min_prec {
        out.push('(');
        print_node(child, out);
        out.push(')');
    } else {
        print_node(child, out);
    }
}

fn print_node(node: &Node, out: &mut String) {
    match &node.kind {
        NodeKind::Number(v) => {
            out.push_str(&format!("{v}"));
        }
        NodeKind::Time => out.push('t'),
        NodeKind::Const(Constant::Pi) => out.push_str("pi"),
        NodeKind::Const(Constant::E) => out.push('e'),
        NodeKind::Neg(inner) => {
            out.push('-');
            print_child(inner, 3, out);
        }
        NodeKind::Binary(op, lhs, rhs) => {
            let (sym, prec) = match op {
                BinaryOp::Add => ("+", 1),
                BinaryOp::Sub => ("-", 1),
                BinaryOp::Mul => ("*", 2),
                BinaryOp::Div => ("/", 2),
                BinaryOp::Pow => ("^", 4),
            };
            if *op == BinaryOp::Pow {
                // right-associative; base must be atomic, exponent may be
                // signed or another power
                print_child(lhs, 5, out);
                out.push(sym.chars().next().unwrap());
                print_child(rhs, 3, out);
            } else {
                print_child(lhs, prec, out);
                out.push_str(&format!(" {sym} "));
                // left-associative: the right operand needs strictly higher
                // precedence to avoid re-association on reparse
                print_child(rhs, prec + 1, out);
            }
        }
        NodeKind::Call(func, arg) => {
            out.push_str(func.name());
            out.push('(');
            print_node(arg, out);
            out.push(')');
        }
    }
}
