//! A small expression language for real boundary data `h(x, y)`.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = primary [ "^" exponent ] ;
//! exponent = [ "-" ] integer [ "^" exponent ] ;
//! primary = number | "x" | "y" | "(" expr ")"
//!         | func "(" expr ")"
//!         | ("re_zpow" | "im_zpow") "(" [ "-" ] integer ")" ;
//! func    = "sin" | "cos" | "exp" | "log" | "abs" | "sqrt" ;
//! ```
//!
//! `re_zpow(m)` is `Re((x + iy)^m)` and `im_zpow(m)` is `Im((x + iy)^m)`.
//! Chained exponents associate to the right and are folded into a single
//! integer at parse time.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Sin, Func::Cos, Func::Exp, Func::Log, Func::Abs, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
    /// `Re((x+iy)^m)` when `imag` is false, `Im(..)` otherwise.
    ZPow { imag: bool, m: i32 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("unknown identifier '{0}'")]
    UnknownIdentifier(String),
    #[error("exponent must be an integer literal")]
    NonIntegerExponent,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the source.
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{function} is undefined at {argument}")]
    DomainFault { function: &'static str, argument: f64 },
    #[error("division by zero")]
    DivisionByZero,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, integer: bool },
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

fn syntax(msg: impl Into<String>, position: usize) -> ParseError {
    ParseError {
        kind: ParseErrorKind::Syntax(msg.into()),
        position,
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let simple = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = simple {
            out.push((t, start));
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            let mut integer = true;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                integer = false;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    integer = false;
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let value: f64 = text
                .parse()
                .map_err(|_| syntax(format!("malformed number '{text}'"), start))?;
            out.push((Tok::Num { value, integer }, start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else {
            let ch = src[start..].chars().next().unwrap_or('?');
            return Err(syntax(format!("unexpected character '{ch}'"), start));
        }
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn at(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(format!("expected {what}"), self.at()))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let n = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        let at = self.at();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Num { value, integer: true } if value <= i32::MAX as f64 => {
                self.bump();
                Ok(if negative { -(value as i64) } else { value as i64 })
            }
            Tok::Num { .. } | Tok::LParen | Tok::Ident(_) => Err(ParseError {
                kind: ParseErrorKind::NonIntegerExponent,
                position: at,
            }),
            _ => Err(syntax("expected an integer", self.at())),
        }
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let at = self.at();
        let base = self.integer()?;
        if *self.peek() != Tok::Caret {
            return Ok(base as i32);
        }
        self.bump();
        let e = self.exponent()?;
        let non_integer = ParseError {
            kind: ParseErrorKind::NonIntegerExponent,
            position: at,
        };
        let folded = if e >= 0 {
            base.checked_pow(e as u32)
        } else {
            match base {
                1 => Some(1),
                -1 => Some(if e % 2 == 0 { 1 } else { -1 }),
                _ => None,
            }
        };
        folded
            .filter(|v| i32::try_from(*v).is_ok())
            .map(|v| v as i32)
            .ok_or(non_integer)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let at = self.at();
        match self.bump() {
            Tok::Num { value, .. } => Ok(Expr::Num(value)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::Var(Var::X)),
                "y" => Ok(Expr::Var(Var::Y)),
                "re_zpow" | "im_zpow" => {
                    self.expect(Tok::LParen, "'('")?;
                    let m = self.integer()?;
                    let m = i32::try_from(m).map_err(|_| syntax("power too large", at))?;
                    self.expect(Tok::RParen, "')'")?;
                    Ok(Expr::ZPow {
                        imag: name == "im_zpow",
                        m,
                    })
                }
                other => match Func::from_name(other) {
                    Some(f) => {
                        self.expect(Tok::LParen, "'('")?;
                        let arg = self.expr()?;
                        self.expect(Tok::RParen, "')'")?;
                        Ok(Expr::Call(f, Box::new(arg)))
                    }
                    None => Err(ParseError {
                        kind: ParseErrorKind::UnknownIdentifier(other.to_string()),
                        position: at,
                    }),
                },
            },
            Tok::Eof => Err(syntax("unexpected end of input", at)),
            _ => Err(syntax("expected a number, variable, function or '('", at)),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(syntax("unexpected trailing input", p.at()));
    }
    Ok(e)
}

pub fn eval_expr(e: &Expr, x: f64, y: f64) -> Result<f64, EvalError> {
    Ok(match e {
        Expr::Num(v) => *v,
        Expr::Var(Var::X) => x,
        Expr::Var(Var::Y) => y,
        Expr::Neg(a) => -eval_expr(a, x, y)?,
        Expr::Binary(op, a, b) => {
            let (a, b) = (eval_expr(a, x, y)?, eval_expr(b, x, y)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(EvalError::DivisionByZero);
                    }
                    a / b
                }
            }
        }
        Expr::Pow(a, n) => {
            let a = eval_expr(a, x, y)?;
            if a == 0.0 && *n < 0 {
                return Err(EvalError::DivisionByZero);
            }
            a.powi(*n)
        }
        Expr::Call(f, a) => {
            let v = eval_expr(a, x, y)?;
            let fault = || EvalError::DomainFault {
                function: f.name(),
                argument: v,
            };
            match f {
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Exp => v.exp(),
                Func::Abs => v.abs(),
                Func::Log if v > 0.0 => v.ln(),
                Func::Sqrt if v >= 0.0 => v.sqrt(),
                Func::Log | Func::Sqrt => return Err(fault()),
            }
        }
        Expr::ZPow { imag, m } => {
            let z = Complex64::new(x, y);
            if z.norm() == 0.0 && *m < 0 {
                return Err(EvalError::DivisionByZero);
            }
            let w = z.powi(*m);
            if *imag {
                w.im
            } else {
                w.re
            }
        }
    })
}

impl Expr {
    pub fn eval(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        eval_expr(self, x, y)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(Var::X) => f.write_str("x"),
            Expr::Var(Var::Y) => f.write_str("y"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Pow(a, n) => match **a {
                Expr::Num(_) | Expr::Var(_) | Expr::Call(..) | Expr::ZPow { .. } => {
                    write!(f, "{a}^{n}")
                }
                _ => write!(f, "({a})^{n}"),
            },
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::ZPow { imag, m } => {
                write!(f, "{}({m})", if *imag { "im_zpow" } else { "re_zpow" })
            }
        }
    }
}
