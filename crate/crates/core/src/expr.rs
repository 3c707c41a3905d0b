//! Coefficient expressions for the potential `q(x)` and the retardation `Δ(x)`.
//!
//! The language is deliberately small:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := atom ('^' factor)?
//! atom   := number | 'x' | 'pi' | '-' atom | func '(' expr ')' | '(' expr ')'
//! func   := 'sin' | 'cos' | 'abs'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus on its right
//! operand only, so `-x^2` reads as `(-x)^2`, exactly as the grammar says.
//! Whitespace is ignored. The typographic minus `−` is accepted as `-`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("malformed expression at offset {offset}: {message}")]
    MalformedExpression { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("domain error: {0}")]
    DomainError(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Abs => v.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Expression tree. The only free variable is `x`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Pi,
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Height of the tree; leaves have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var | Expr::Pi => 0,
            Expr::Neg(e) | Expr::Call(_, e) => 1 + e.depth(),
            Expr::Binary(_, l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, ExprError> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var => x,
            Expr::Pi => std::f64::consts::PI,
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Call(f, e) => f.apply(e.eval(x)?),
            Expr::Binary(op, l, r) => {
                let a = l.eval(x)?;
                let b = r.eval(x)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(ExprError::DomainError(format!(
                                "division by zero at x = {x}"
                            )));
                        }
                        a / b
                    }
                    BinOp::Pow => power(a, b, x)?,
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::DomainError(format!(
                "non-finite value at x = {x}"
            )))
        }
    }
}

fn power(a: f64, b: f64, x: f64) -> Result<f64, ExprError> {
    if b.fract() == 0.0 && b.abs() <= i32::MAX as f64 {
        if a == 0.0 && b < 0.0 {
            return Err(ExprError::DomainError(format!(
                "division by zero (0 to a negative power) at x = {x}"
            )));
        }
        Ok(a.powi(b as i32))
    } else if a < 0.0 {
        Err(ExprError::DomainError(format!(
            "negative base {a} with non-integer exponent {b} at x = {x}"
        )))
    } else {
        Ok(a.powf(b))
    }
}

impl fmt::Display for Expr {
    /// Canonical text. Every binary node is parenthesized, so the output
    /// reparses to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var => f.write_str("x"),
            Expr::Pi => f.write_str("pi"),
            Expr::Neg(e) => write!(f, "-{e}"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
        }
    }
}

/// A parsed coefficient function such as `q(x)` or `Δ(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientExpr {
    pub ast: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivOrder {
    First,
    Second,
}

impl CoefficientExpr {
    pub fn parse(text: &str) -> Result<Self, ExprError> {
        Parser::new(text).parse_all().map(|ast| Self { ast })
    }

    pub fn constant(v: f64) -> Self {
        Self { ast: Expr::Num(v) }
    }

    pub fn eval(&self, x: f64) -> Result<f64, ExprError> {
        self.ast.eval(x)
    }

    pub fn depth(&self) -> usize {
        self.ast.depth()
    }

    /// Central difference of the given order with step `h`.
    ///
    /// The caller keeps `x ± h` inside one smooth piece; nothing here knows
    /// where the interface sits.
    pub fn numeric_derivative(&self, x: f64, order: DerivOrder, h: f64) -> Result<f64, ExprError> {
        let fp = self.eval(x + h)?;
        let fm = self.eval(x - h)?;
        Ok(match order {
            DerivOrder::First => (fp - fm) / (2.0 * h),
            DerivOrder::Second => {
                let f0 = self.eval(x)?;
                (fp - 2.0 * f0 + fm) / (h * h)
            }
        })
    }

    /// True when the tree is a literal zero (possibly negated).
    pub fn is_literal_zero(&self) -> bool {
        let mut e = &self.ast;
        while let Expr::Neg(inner) = e {
            e = inner;
        }
        matches!(e, Expr::Num(v) if *v == 0.0)
    }
}

impl FromStr for CoefficientExpr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl fmt::Display for CoefficientExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ast.fmt(f)
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Self {
        Self {
            chars: text
                .chars()
                .map(|c| if c == '−' { '-' } else { c })
                .collect(),
            pos: 0,
        }
    }

    fn malformed<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::MalformedExpression {
            offset,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_all(mut self) -> Result<Expr, ExprError> {
        let e = self.expr()?;
        match self.peek() {
            None => Ok(e),
            Some(c) => self.malformed(self.pos, format!("unexpected `{c}`")),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some('+') => BinOp::Add,
                Some('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some('*') => BinOp::Mul,
                Some('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat('^') {
            let exponent = self.factor()?;
            Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let start = {
            self.skip_ws();
            self.pos
        };
        match self.peek() {
            None => self.malformed(start, "unexpected end of input"),
            Some('-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.atom()?)))
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    let at = self.pos;
                    return self.malformed(at, "expected `)`");
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.identifier(),
            Some(c) => self.malformed(start, format!("unexpected `{c}`")),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let from = p.pos;
            while p.pos < p.chars.len() && p.chars[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - from
        };
        let mut count = digits(self);
        if self.chars.get(self.pos) == Some(&'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            return self.malformed(start, "expected digits");
        }
        if matches!(self.chars.get(self.pos), Some('e') | Some('E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.chars.get(self.pos), Some('+') | Some('-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                return self.malformed(mark, "malformed exponent");
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Expr::Num(v)),
            _ => self.malformed(start, format!("invalid number `{text}`")),
        }
    }

    fn identifier(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_ascii_alphanumeric() || self.chars[self.pos] == '_')
        {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        let func = match name.as_str() {
            "x" => return Ok(Expr::Var),
            "pi" => return Ok(Expr::Pi),
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "abs" => Func::Abs,
            _ => {
                return Err(ExprError::UnknownIdentifier {
                    name,
                    offset: start,
                })
            }
        };
        if !self.eat('(') {
            let at = self.pos;
            return self.malformed(at, format!("expected `(` after `{name}`"));
        }
        let arg = self.expr()?;
        if !self.eat(')') {
            let at = self.pos;
            return self.malformed(at, "expected `)`");
        }
        Ok(Expr::Call(func, Box::new(arg)))
    }
}
