//! Expression trees for observable functions.
//!
//! Expressions print to a small infix language (`x1`, numbers, `+ - * ^`,
//! `sin cos sgn abs`) and parse back to the same tree, which is what the
//! model file stores.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// State coordinate, zero-based (`x1` is `Var(0)`).
    Var(usize),
    Const(f64),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    /// Sign with `sgn(0) = 0`.
    Sgn(Box<Expr>),
    Abs(Box<Expr>),
}

impl Expr {
    pub fn var(i: usize) -> Self {
        Expr::Var(i)
    }

    pub fn sin(e: Expr) -> Self {
        Expr::Sin(Box::new(e))
    }

    pub fn cos(e: Expr) -> Self {
        Expr::Cos(Box::new(e))
    }

    pub fn sgn(e: Expr) -> Self {
        Expr::Sgn(Box::new(e))
    }

    pub fn abs(e: Expr) -> Self {
        Expr::Abs(Box::new(e))
    }

    /// `e^k`, collapsing the trivial exponents.
    pub fn pow(e: Expr, k: u32) -> Self {
        match k {
            0 => Expr::Const(1.0),
            1 => e,
            _ => Expr::Pow(Box::new(e), k),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Self {
        match e {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    /// Product of factors, flattening nested products. An empty product is 1.
    pub fn product(factors: Vec<Expr>) -> Self {
        let mut flat = Vec::with_capacity(factors.len());
        for f in factors {
            match f {
                Expr::Mul(inner) => flat.extend(inner),
                Expr::Const(1.0) => {}
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Expr::Const(1.0),
            1 => flat.pop().unwrap(),
            _ => Expr::Mul(flat),
        }
    }

    /// Sum of terms, flattening nested sums. An empty sum is 0.
    pub fn sum(terms: Vec<Expr>) -> Self {
        let mut flat = Vec::with_capacity(terms.len());
        for t in terms {
            match t {
                Expr::Add(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Expr::Const(0.0),
            1 => flat.pop().unwrap(),
            _ => Expr::Add(flat),
        }
    }

    /// Evaluates at `x` without bounds checks beyond slice indexing.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Var(i) => x[*i],
            Expr::Const(c) => *c,
            Expr::Add(ts) => ts.iter().fold(0.0, |acc, t| acc + t.eval(x)),
            Expr::Mul(fs) => fs.iter().fold(1.0, |acc, f| acc * f.eval(x)),
            Expr::Neg(e) => -e.eval(x),
            Expr::Pow(e, k) => e.eval(x).powi(*k as i32),
            Expr::Sin(e) => e.eval(x).sin(),
            Expr::Cos(e) => e.eval(x).cos(),
            Expr::Sgn(e) => sgn(e.eval(x)),
            Expr::Abs(e) => e.eval(x).abs(),
        }
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Var(i) => Some(*i),
            Expr::Const(_) => None,
            Expr::Add(v) | Expr::Mul(v) => v.iter().filter_map(Expr::max_var).max(),
            Expr::Neg(e)
            | Expr::Pow(e, _)
            | Expr::Sin(e)
            | Expr::Cos(e)
            | Expr::Sgn(e)
            | Expr::Abs(e) => e.max_var(),
        }
    }

    pub fn parse(input: &str) -> Result<Expr> {
        Parser::new(input).parse_all()
    }

    fn is_atomic(&self) -> bool {
        match self {
            Expr::Var(_) | Expr::Sin(_) | Expr::Cos(_) | Expr::Sgn(_) | Expr::Abs(_) => true,
            Expr::Const(c) => *c >= 0.0 || c.is_nan(),
            _ => false,
        }
    }
}

pub fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        v * 0.0
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    // `{:?}` is the shortest representation that parses back bit-exactly.
    write!(f, "{c:?}")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Const(c) => write_const(f, *c),
            Expr::Add(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    match (i, t) {
                        (0, t) => write!(f, "{t}")?,
                        (_, Expr::Neg(inner)) => write!(f, " - {}", Paren::for_factor(inner))?,
                        (_, Expr::Const(c)) if *c < 0.0 => {
                            f.write_str(" - ")?;
                            write_const(f, -c)?
                        }
                        (_, t) => write!(f, " + {t}")?,
                    }
                }
                Ok(())
            }
            Expr::Mul(fs) => {
                for (i, x) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    write!(f, "{}", Paren::for_factor(x))?;
                }
                Ok(())
            }
            Expr::Neg(e) => write!(f, "-{}", Paren::for_factor(e)),
            Expr::Pow(e, k) => {
                if e.is_atomic() {
                    write!(f, "{e}^{k}")
                } else {
                    write!(f, "({e})^{k}")
                }
            }
            Expr::Sin(e) => write!(f, "sin({e})"),
            Expr::Cos(e) => write!(f, "cos({e})"),
            Expr::Sgn(e) => write!(f, "sgn({e})"),
            Expr::Abs(e) => write!(f, "abs({e})"),
        }
    }
}

/// Wraps sums, negations and negative constants in parentheses when they
/// appear as a factor.
struct Paren<'a>(&'a Expr, bool);

impl<'a> Paren<'a> {
    fn for_factor(e: &'a Expr) -> Self {
        let wrap = match e {
            Expr::Add(_) | Expr::Neg(_) | Expr::Mul(_) => true,
            Expr::Const(c) => *c < 0.0,
            _ => false,
        };
        Paren(e, wrap)
    }
}

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Expr::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

struct Parser<'a> {
    input: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Self {
        Parser {
            input,
            tokens: Vec::new(),
            pos: 0,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            input: self.input.to_string(),
            msg: msg.into(),
        }
    }

    fn tokenize(&mut self) -> Result<()> {
        let bytes = self.input.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            match c {
                ' ' | '\t' => i += 1,
                '+' | '-' | '*' | '^' | '(' | ')' => {
                    self.tokens.push(match c {
                        '+' => Token::Plus,
                        '-' => Token::Minus,
                        '*' => Token::Star,
                        '^' => Token::Caret,
                        '(' => Token::LParen,
                        _ => Token::RParen,
                    });
                    i += 1;
                }
                '0'..='9' | '.' => {
                    let start = i;
                    while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                        i += 1;
                    }
                    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                        let mut j = i + 1;
                        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                            j += 1;
                        }
                        if j < bytes.len() && bytes[j].is_ascii_digit() {
                            i = j;
                            while i < bytes.len() && bytes[i].is_ascii_digit() {
                                i += 1;
                            }
                        }
                    }
                    let text = &self.input[start..i];
                    let v: f64 = text
                        .parse()
                        .map_err(|_| self.err(format!("bad number `{text}`")))?;
                    self.tokens.push(Token::Num(v));
                }
                c if c.is_ascii_alphabetic() => {
                    let start = i;
                    while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                        i += 1;
                    }
                    self.tokens
                        .push(Token::Ident(self.input[start..i].to_string()));
                }
                other => return Err(self.err(format!("unexpected character `{other}`"))),
            }
        }
        Ok(())
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn parse_all(mut self) -> Result<Expr> {
        self.tokenize()?;
        let e = self.expr()?;
        if self.pos < self.tokens.len() {
            return Err(self.err("trailing input"));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    terms.push(Expr::neg(self.term()?));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Add(terms)
        })
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors = vec![self.unary()?];
        while let Some(Token::Star) = self.peek() {
            self.pos += 1;
            factors.push(self.unary()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Mul(factors)
        })
    }

    fn unary(&mut self) -> Result<Expr> {
        if let Some(Token::Minus) = self.peek() {
            self.pos += 1;
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Token::Caret) = self.peek() {
            self.pos += 1;
            match self.next() {
                Some(Token::Num(k)) if k >= 2.0 && k.fract() == 0.0 && k <= u32::MAX as f64 => {
                    return Ok(Expr::Pow(Box::new(base), k as u32));
                }
                _ => return Err(self.err("exponent must be an integer literal >= 2")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Expr::Const(v)),
            Some(Token::LParen) => {
                let e = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(e),
                    _ => Err(self.err("missing `)`")),
                }
            }
            Some(Token::Ident(name)) => {
                if let Some(idx) = name.strip_prefix('x') {
                    let i: usize = idx
                        .parse()
                        .map_err(|_| self.err(format!("unknown identifier `{name}`")))?;
                    if i == 0 {
                        return Err(self.err("coordinates are numbered from x1"));
                    }
                    return Ok(Expr::Var(i - 1));
                }
                let wrap: fn(Expr) -> Expr = match name.as_str() {
                    "sin" => Expr::sin,
                    "cos" => Expr::cos,
                    "sgn" => Expr::sgn,
                    "abs" => Expr::abs,
                    _ => return Err(self.err(format!("unknown identifier `{name}`"))),
                };
                match self.next() {
                    Some(Token::LParen) => {}
                    _ => return Err(self.err(format!("expected `(` after `{name}`"))),
                }
                let arg = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(wrap(arg)),
                    _ => Err(self.err("missing `)`")),
                }
            }
            Some(t) => Err(self.err(format!("unexpected token {t:?}"))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}
