//! Single-variable arithmetic expressions with exact evaluation.
//!
//! Constants are exact rationals (`1.0` is the integer 1, `0.25` is 1/4).
//! Evaluation first runs on checked `i128` rationals and falls back to
//! arbitrary precision when a step overflows, so results never round.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("parse error at token {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("division by zero")]
    DivisionByZero,
}

fn parse_err<T>(position: usize, message: impl Into<String>) -> Result<T, ExprError> {
    Err(ExprError::Parse {
        position,
        message: message.into(),
    })
}

/// How `/` nodes are evaluated. Explicit floor nodes always floor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    /// Exact rational division.
    #[default]
    Rational,
    /// `/` rounds toward negative infinity, like C integer division on
    /// non-negative operands.
    FloorDiv,
}

impl std::str::FromStr for EvalMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" => Ok(EvalMode::Rational),
            "floor-div" | "floordiv" | "floor" => Ok(EvalMode::FloorDiv),
            other => Err(format!("unknown eval mode `{other}` (rational | floor-div)")),
        }
    }
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalMode::Rational => "rational",
            EvalMode::FloorDiv => "floor-div",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Var,
    Const(BigRational),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// `floor(left / right)` regardless of evaluation mode.
    FloorDiv(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var() -> Expr {
        Expr::Var
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn floor_div(l: Expr, r: Expr) -> Expr {
        Expr::FloorDiv(Box::new(l), Box::new(r))
    }

    pub fn contains_var(&self) -> bool {
        match self {
            Expr::Var => true,
            Expr::Const(_) => false,
            Expr::Bin(_, l, r) | Expr::FloorDiv(l, r) => l.contains_var() || r.contains_var(),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Var | Expr::Const(_) => 1,
            Expr::Bin(_, l, r) | Expr::FloorDiv(l, r) => 1 + l.node_count() + r.node_count(),
        }
    }

    /// True when every division (exact or floor) has a divisor free of the variable.
    pub fn divisors_are_constant(&self) -> bool {
        match self {
            Expr::Var | Expr::Const(_) => true,
            Expr::Bin(BinOp::Div, l, r) | Expr::FloorDiv(l, r) => {
                !r.contains_var() && l.divisors_are_constant() && r.divisors_are_constant()
            }
            Expr::Bin(_, l, r) => l.divisors_are_constant() && r.divisors_are_constant(),
        }
    }

    /// Replaces every exact division with floor division.
    pub fn floorize(&self) -> Expr {
        match self {
            Expr::Var | Expr::Const(_) => self.clone(),
            Expr::Bin(BinOp::Div, l, r) | Expr::FloorDiv(l, r) => {
                Expr::floor_div(l.floorize(), r.floorize())
            }
            Expr::Bin(op, l, r) => Expr::bin(*op, l.floorize(), r.floorize()),
        }
    }

    /// Replaces every variable-free subtree by its exact value.
    pub fn fold_constants(&self) -> Result<Expr, ExprError> {
        if !self.contains_var() {
            return Ok(Expr::Const(self.evaluate(0, EvalMode::Rational)?));
        }
        Ok(match self {
            Expr::Var | Expr::Const(_) => self.clone(),
            Expr::Bin(op, l, r) => Expr::bin(*op, l.fold_constants()?, r.fold_constants()?),
            Expr::FloorDiv(l, r) => Expr::floor_div(l.fold_constants()?, r.fold_constants()?),
        })
    }

    /// Finds a division whose divisor is variable-free and evaluates to zero.
    pub fn has_constant_zero_divisor(&self, mode: EvalMode) -> bool {
        match self {
            Expr::Var | Expr::Const(_) => false,
            Expr::Bin(BinOp::Div, l, r) | Expr::FloorDiv(l, r) => {
                let zero = !r.contains_var()
                    && matches!(r.evaluate(0, mode), Ok(v) if v.is_zero());
                zero || l.has_constant_zero_divisor(mode) || r.has_constant_zero_divisor(mode)
            }
            Expr::Bin(_, l, r) => {
                l.has_constant_zero_divisor(mode) || r.has_constant_zero_divisor(mode)
            }
        }
    }

    /// Evaluates at integer `x`. The result is exact.
    pub fn evaluate(&self, x: i64, mode: EvalMode) -> Result<BigRational, ExprError> {
        match self.eval_small(x as i128, mode)? {
            Some(v) => Ok(BigRational::new_raw(
                BigInt::from(*v.numer()),
                BigInt::from(*v.denom()),
            )),
            None => self.eval_big(&BigRational::from_integer(BigInt::from(x)), mode),
        }
    }

    /// Evaluates and requires an integer result.
    pub fn evaluate_integer(&self, x: i64, mode: EvalMode) -> Result<Option<BigInt>, ExprError> {
        let v = self.evaluate(x, mode)?;
        Ok(v.is_integer().then(|| v.to_integer()))
    }

    /// `Ok(None)` means an intermediate left the i128 range.
    fn eval_small(&self, x: i128, mode: EvalMode) -> Result<Option<Ratio<i128>>, ExprError> {
        let v = match self {
            Expr::Var => Ratio::from_integer(x),
            Expr::Const(c) => match (c.numer().to_i128(), c.denom().to_i128()) {
                (Some(n), Some(d)) => Ratio::new_raw(n, d),
                _ => return Ok(None),
            },
            Expr::Bin(op, l, r) => {
                let (Some(a), Some(b)) = (l.eval_small(x, mode)?, r.eval_small(x, mode)?) else {
                    return Ok(None);
                };
                let out = match op {
                    BinOp::Add => a.checked_add(&b),
                    BinOp::Sub => a.checked_sub(&b),
                    BinOp::Mul => a.checked_mul(&b),
                    BinOp::Div => {
                        if b.is_zero() {
                            return Err(ExprError::DivisionByZero);
                        }
                        match mode {
                            EvalMode::Rational => a.checked_div(&b),
                            EvalMode::FloorDiv => floor_small(&a, &b),
                        }
                    }
                };
                match out {
                    Some(v) => v,
                    None => return Ok(None),
                }
            }
            Expr::FloorDiv(l, r) => {
                let (Some(a), Some(b)) = (l.eval_small(x, mode)?, r.eval_small(x, mode)?) else {
                    return Ok(None);
                };
                if b.is_zero() {
                    return Err(ExprError::DivisionByZero);
                }
                match floor_small(&a, &b) {
                    Some(v) => v,
                    None => return Ok(None),
                }
            }
        };
        Ok(Some(v))
    }

    fn eval_big(&self, x: &BigRational, mode: EvalMode) -> Result<BigRational, ExprError> {
        Ok(match self {
            Expr::Var => x.clone(),
            Expr::Const(c) => c.clone(),
            Expr::Bin(op, l, r) => {
                let a = l.eval_big(x, mode)?;
                let b = r.eval_big(x, mode)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.is_zero() {
                            return Err(ExprError::DivisionByZero);
                        }
                        match mode {
                            EvalMode::Rational => a / b,
                            EvalMode::FloorDiv => (a / b).floor(),
                        }
                    }
                }
            }
            Expr::FloorDiv(l, r) => {
                let a = l.eval_big(x, mode)?;
                let b = r.eval_big(x, mode)?;
                if b.is_zero() {
                    return Err(ExprError::DivisionByZero);
                }
                (a / b).floor()
            }
        })
    }

    /// Canonical infix form with the variable spelled `var`.
    pub fn render(&self, var: &str) -> String {
        let mut s = String::new();
        self.write_canonical(&mut s, var);
        s
    }

    fn write_canonical(&self, out: &mut String, var: &str) {
        match self {
            Expr::Var => out.push_str(var),
            Expr::Const(c) => out.push_str(&format_const(c)),
            Expr::Bin(op, l, r) => {
                out.push('(');
                l.write_canonical(out, var);
                out.push(' ');
                out.push_str(op.symbol());
                out.push(' ');
                r.write_canonical(out, var);
                out.push(')');
            }
            Expr::FloorDiv(l, r) => {
                out.push_str("floor(");
                l.write_canonical(out, var);
                out.push_str(" / ");
                r.write_canonical(out, var);
                out.push(')');
            }
        }
    }
}

/// Canonical form with the variable spelled `x`.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("x"))
    }
}

fn floor_small(a: &Ratio<i128>, b: &Ratio<i128>) -> Option<Ratio<i128>> {
    let q = a.checked_div(b)?;
    // denominator is positive after normalisation
    Some(Ratio::from_integer(q.numer().div_floor(q.denom())))
}

/// Integers print plainly; terminating fractions as decimals; anything else
/// as a parenthesised quotient.
fn format_const(c: &BigRational) -> String {
    if c.is_integer() {
        return c.to_integer().to_string();
    }
    let sign = if c.is_negative() { "-" } else { "" };
    let mut d = c.denom().clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if d == BigInt::from(1) {
        let places = twos.max(fives) as usize;
        let scaled = (c.abs() * BigRational::from_integer(BigInt::from(10).pow(places as u32)))
            .to_integer()
            .to_string();
        let padded = format!("{scaled:0>width$}", width = places + 1);
        let (int, frac) = padded.split_at(padded.len() - places);
        format!("{sign}{int}.{frac}")
    } else {
        format!("({} / {})", c.numer(), c.denom())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn parse_decimal(text: &str) -> BigRational {
    match text.split_once('.') {
        None => BigRational::from_integer(text.parse::<BigInt>().expect("digits")),
        Some((int, frac)) => {
            let digits: BigInt = format!("{int}{frac}").parse().expect("digits");
            let scale = BigInt::from(10).pow(frac.len() as u32);
            BigRational::new(digits, scale)
        }
    }
}

fn lex(text: &str) -> Result<Vec<Tok>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '+' | '-' | '*' | '/' => {
                toks.push(Tok::Op(c));
                i += 1;
            }
            '(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    let frac_start = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    if i == frac_start {
                        return parse_err(toks.len(), "expected digits after `.`");
                    }
                }
                let lit: String = chars[start..i].iter().collect();
                toks.push(Tok::Num(parse_decimal(&lit)));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => return parse_err(toks.len(), format!("unexpected character `{other}`")),
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    var: Option<String>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            if let Some(Tok::Num(n)) = self.peek() {
                let n = -n.clone();
                self.pos += 1;
                return Ok(Expr::Const(n));
            }
            let operand = self.unary()?;
            return Ok(Expr::bin(BinOp::Sub, Expr::int(0), operand));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let at = self.pos;
        match self.next() {
            Some(Tok::Num(n)) => Ok(Expr::Const(n)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) if name == "floor" => {
                if self.next() != Some(Tok::LParen) {
                    return parse_err(at + 1, "expected `(` after floor");
                }
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(match inner {
                    Expr::Bin(BinOp::Div, l, r) => Expr::FloorDiv(l, r),
                    other => Expr::floor_div(other, Expr::int(1)),
                })
            }
            Some(Tok::Ident(name)) => {
                match &self.var {
                    Some(v) if *v != name => {
                        return parse_err(
                            at,
                            format!("second variable `{name}` (already using `{v}`)"),
                        )
                    }
                    _ => self.var = Some(name),
                }
                Ok(Expr::Var)
            }
            Some(Tok::RParen) => parse_err(at, "unexpected `)`"),
            Some(Tok::Op(c)) => parse_err(at, format!("dangling operator `{c}`")),
            None => parse_err(at, "unexpected end of expression"),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        let at = self.pos;
        match self.next() {
            Some(Tok::RParen) => Ok(()),
            _ => parse_err(at, "unbalanced parentheses: expected `)`"),
        }
    }
}

/// A parsed expression together with the variable name it used, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed {
    pub expr: Expr,
    pub var: Option<String>,
}

/// Parses infix text with the usual precedence (`* /` over `+ -`, left
/// associative). Any identifier other than `floor` is the single variable.
pub fn parse_expr_named(text: &str) -> Result<Parsed, ExprError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        var: None,
    };
    let expr = p.expr()?;
    if p.pos < p.toks.len() {
        let message = match p.toks[p.pos] {
            Tok::RParen => "unbalanced parentheses: unexpected `)`".to_string(),
            _ => "trailing input".to_string(),
        };
        return parse_err(p.pos, message);
    }
    Ok(Parsed { expr, var: p.var })
}

pub fn parse_expr(text: &str) -> Result<Expr, ExprError> {
    parse_expr_named(text).map(|p| p.expr)
}

/// Builds a tree from a phenotype's terminal tokens.
pub fn parse_phenotype<S: AsRef<str>>(tokens: &[S]) -> Result<Expr, ExprError> {
    let joined: Vec<&str> = tokens.iter().map(AsRef::as_ref).collect();
    parse_expr(&joined.join(" "))
}
