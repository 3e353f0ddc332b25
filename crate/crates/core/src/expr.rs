//! Coefficient expressions in one real variable `x`.
//!
//! Grammar:
//!
//! ```text
//! expr      := term (("+" | "-") term)*
//! term      := factor (("*" | "/") factor)*
//! factor    := base ("^" number)?
//! base      := number | "x" | fn "(" expr ")" | "(" expr ")" | "-" factor | piecewise
//! fn        := "exp" | "log" | "sin" | "cos" | "cosh" | "sech" | "abs" | "sgn"
//! piecewise := "pw" "{" (interval ":" expr ";")+ "}"
//! interval  := "[" bound "," bound ")"
//! bound     := ["-"] number | "-inf" | "inf"
//! ```
//!
//! Unary minus binds looser than `^`, so `-x^2` is `-(x^2)`. A sign is also
//! accepted after `^` and in piecewise bounds. `sgn(0)` is `+1`, so a weight
//! written with `sgn` never vanishes on a grid node.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Cosh,
    Sech,
    Abs,
    Sgn,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "cosh" => Func::Cosh,
            "sech" => Func::Sech,
            "abs" => Func::Abs,
            "sgn" => Func::Sgn,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Cosh => "cosh",
            Func::Sech => "sech",
            Func::Abs => "abs",
            Func::Sgn => "sgn",
        }
    }

    fn apply(self, v: f64, x: f64) -> Result<f64> {
        Ok(match self {
            Func::Exp => v.exp(),
            Func::Log => {
                if v <= 0.0 {
                    return Err(Error::domain(x, format!("log of nonpositive value {v}")));
                }
                v.ln()
            }
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Cosh => v.cosh(),
            Func::Sech => 1.0 / v.cosh(),
            Func::Abs => v.abs(),
            Func::Sgn => {
                if v < 0.0 {
                    -1.0
                } else {
                    1.0
                }
            }
        })
    }
}

/// One piece `[lo, hi): expr` of a piecewise expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub expr: Node,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var,
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, f64),
    Neg(Box<Node>),
    Call(Func, Box<Node>),
    Piecewise(Vec<Piece>),
}

impl Node {
    fn eval(&self, x: f64) -> Result<f64> {
        match self {
            Node::Const(c) => Ok(*c),
            Node::Var => Ok(x),
            Node::Add(a, b) => Ok(a.eval(x)? + b.eval(x)?),
            Node::Sub(a, b) => Ok(a.eval(x)? - b.eval(x)?),
            Node::Mul(a, b) => Ok(a.eval(x)? * b.eval(x)?),
            Node::Div(a, b) => {
                let num = a.eval(x)?;
                let den = b.eval(x)?;
                if den == 0.0 {
                    return Err(Error::domain(x, "division by zero"));
                }
                Ok(num / den)
            }
            Node::Pow(b, e) => {
                let v = b.eval(x)?;
                if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
                    if v == 0.0 && *e < 0.0 {
                        return Err(Error::domain(x, "zero raised to a negative power"));
                    }
                    Ok(v.powi(*e as i32))
                } else if v < 0.0 {
                    Err(Error::domain(x, "negative base with fractional exponent"))
                } else {
                    Ok(v.powf(*e))
                }
            }
            Node::Neg(a) => Ok(-a.eval(x)?),
            Node::Call(f, a) => f.apply(a.eval(x)?, x),
            Node::Piecewise(pieces) => {
                for p in pieces {
                    if p.lo <= x && x < p.hi {
                        return p.expr.eval(x);
                    }
                }
                Err(Error::domain(x, "outside every piecewise interval"))
            }
        }
    }

    fn is_atom(&self) -> bool {
        match self {
            Node::Const(c) => *c >= 0.0,
            Node::Var | Node::Call(..) | Node::Piecewise(_) => true,
            _ => false,
        }
    }

    fn visit_piecewise<'a>(&'a self, out: &mut Vec<&'a [Piece]>) {
        match self {
            Node::Const(_) | Node::Var => {}
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.visit_piecewise(out);
                b.visit_piecewise(out);
            }
            Node::Pow(a, _) | Node::Neg(a) | Node::Call(_, a) => a.visit_piecewise(out),
            Node::Piecewise(pieces) => {
                out.push(pieces);
                for p in pieces {
                    p.expr.visit_piecewise(out);
                }
            }
        }
    }
}

fn write_num(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    // Debug formatting is the shortest round-trip form, switching to
    // exponent notation for very large or small magnitudes.
    if v < 0.0 {
        write!(f, "(-{:?})", -v)
    } else {
        write!(f, "{v:?}")
    }
}

fn write_bound(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v == f64::INFINITY {
        write!(f, "inf")
    } else if v == f64::NEG_INFINITY {
        write!(f, "-inf")
    } else {
        write!(f, "{v:?}")
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => write_num(f, *c),
            Node::Var => write!(f, "x"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Pow(a, e) => {
                if a.is_atom() {
                    write!(f, "{a}^")?;
                } else {
                    write!(f, "({a})^")?;
                }
                write!(f, "{e:?}")
            }
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
            Node::Piecewise(pieces) => {
                write!(f, "pw{{")?;
                for p in pieces {
                    write!(f, "[")?;
                    write_bound(f, p.lo)?;
                    write!(f, ", ")?;
                    write_bound(f, p.hi)?;
                    write!(f, "): {}; ", p.expr)?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// A parsed coefficient expression.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffExpr {
    root: Node,
}

impl CoeffExpr {
    pub fn parse(src: &str) -> Result<Self> {
        let tokens = tokenize(src)?;
        if tokens.is_empty() {
            return Err(Error::Syntax {
                pos: 1,
                msg: "empty expression".into(),
            });
        }
        let mut p = Parser {
            tokens,
            at: 0,
            end_pos: src.chars().count() + 1,
        };
        let root = p.expr()?;
        if let Some(t) = p.peek() {
            return Err(Error::Syntax {
                pos: t.pos,
                msg: format!("unexpected {}", t.kind.describe()),
            });
        }
        Ok(CoeffExpr { root })
    }

    pub fn constant(c: f64) -> Self {
        assert!(c.is_finite(), "constant must be finite");
        CoeffExpr {
            root: Node::Const(c),
        }
    }

    pub fn from_node(root: Node) -> Self {
        CoeffExpr { root }
    }

    pub fn node(&self) -> &Node {
        &self.root
    }

    /// Evaluate at `x`; non-finite results are reported as domain errors.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let v = self.root.eval(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::domain(x, format!("non-finite value {v}")))
        }
    }

    /// Sub-intervals of `(lo, hi)` not covered by some piecewise node.
    pub fn piecewise_gaps(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let mut all = Vec::new();
        self.root.visit_piecewise(&mut all);
        let mut gaps = Vec::new();
        for pieces in all {
            let mut iv: Vec<(f64, f64)> = pieces.iter().map(|p| (p.lo, p.hi)).collect();
            iv.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut cursor = lo;
            for (a, b) in iv {
                if a > cursor && cursor < hi {
                    gaps.push((cursor, a.min(hi)));
                }
                cursor = cursor.max(b);
            }
            if cursor < hi {
                gaps.push((cursor, hi));
            }
        }
        gaps
    }
}

impl fmt::Display for CoeffExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl FromStr for CoeffExpr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CoeffExpr::parse(s)
    }
}

impl Serialize for CoeffExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CoeffExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CoeffExpr::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Sym(c) => format!("'{c}'"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    /// 1-based character column.
    pos: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text.parse().map_err(|_| Error::Syntax {
                pos,
                msg: format!("malformed number '{text}'"),
            })?;
            out.push(Token {
                kind: Tok::Num(v),
                pos,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                kind: Tok::Ident(chars[start..i].iter().collect()),
                pos,
            });
        } else if "+-*/^(){}[],:;".contains(c) {
            out.push(Token {
                kind: Tok::Sym(c),
                pos,
            });
            i += 1;
        } else {
            return Err(Error::Syntax {
                pos,
                msg: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    end_pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.at)
    }

    fn pos(&self) -> usize {
        self.peek().map_or(self.end_pos, |t| t.pos)
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Token { kind: Tok::Sym(s), .. }) if *s == c) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            let found = self
                .peek()
                .map_or_else(|| "end of input".to_string(), |t| t.kind.describe());
            Err(Error::Syntax {
                pos: self.pos(),
                msg: format!("expected '{c}', found {found}"),
            })
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_sym('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat_sym('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat_sym('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat_sym('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Node> {
        if self.eat_sym('-') {
            return Ok(Node::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if self.eat_sym('^') {
            let neg = self.eat_sym('-');
            let e = self.number()?;
            return Ok(Node::Pow(Box::new(base), if neg { -e } else { e }));
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<f64> {
        match self.peek() {
            Some(Token {
                kind: Tok::Num(v), ..
            }) => {
                let v = *v;
                self.at += 1;
                Ok(v)
            }
            _ => Err(Error::Syntax {
                pos: self.pos(),
                msg: "expected a number".into(),
            }),
        }
    }

    fn base(&mut self) -> Result<Node> {
        let Some(tok) = self.peek().cloned() else {
            return Err(Error::Syntax {
                pos: self.end_pos,
                msg: "unexpected end of input".into(),
            });
        };
        match tok.kind {
            Tok::Num(v) => {
                self.at += 1;
                Ok(Node::Const(v))
            }
            Tok::Sym('(') => {
                self.at += 1;
                let inner = self.expr()?;
                self.expect_sym(')')?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.at += 1;
                if name == "x" {
                    Ok(Node::Var)
                } else if name == "pw" {
                    self.piecewise()
                } else if let Some(func) = Func::from_name(&name) {
                    self.expect_sym('(')?;
                    let arg = self.expr()?;
                    self.expect_sym(')')?;
                    Ok(Node::Call(func, Box::new(arg)))
                } else {
                    Err(Error::UnknownIdentifier { pos: tok.pos, name })
                }
            }
            other => Err(Error::Syntax {
                pos: tok.pos,
                msg: format!("unexpected {}", other.describe()),
            }),
        }
    }

    fn bound(&mut self) -> Result<f64> {
        let neg = self.eat_sym('-');
        let v = match self.peek().cloned() {
            Some(Token {
                kind: Tok::Ident(s),
                ..
            }) if s == "inf" => {
                self.at += 1;
                f64::INFINITY
            }
            _ => self.number()?,
        };
        Ok(if neg { -v } else { v })
    }

    fn piecewise(&mut self) -> Result<Node> {
        self.expect_sym('{')?;
        let mut pieces: Vec<Piece> = Vec::new();
        loop {
            let start = self.pos();
            self.expect_sym('[')?;
            let lo = self.bound()?;
            self.expect_sym(',')?;
            let hi = self.bound()?;
            self.expect_sym(')')?;
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return Err(Error::Syntax {
                    pos: start,
                    msg: format!("empty interval [{lo}, {hi})"),
                });
            }
            self.expect_sym(':')?;
            let expr = self.expr()?;
            self.expect_sym(';')?;
            for p in &pieces {
                if lo < p.hi && p.lo < hi {
                    return Err(Error::PiecewiseOverlap {
                        a_lo: p.lo,
                        a_hi: p.hi,
                        b_lo: lo,
                        b_hi: hi,
                    });
                }
            }
            pieces.push(Piece { lo, hi, expr });
            if self.eat_sym('}') {
                return Ok(Node::Piecewise(pieces));
            }
        }
    }
}
