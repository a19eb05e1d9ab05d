//! Weight expressions.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | primary
//! primary := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Identifiers are the variable (`z` for plane fields, `theta`/`t` for
//! angular profiles), the constants `pi`, `e` and `i`, and the functions
//! `re im abs arg log pow sqrt exp sin cos max min`. Expressions are
//! statically typed as real or complex; a field must be real at the top.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Z,
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
    I,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Re,
    Im,
    Abs,
    Arg,
    Log,
    Pow,
    Sqrt,
    Exp,
    Sin,
    Cos,
    Max,
    Min,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "re" => Func::Re,
            "im" => Func::Im,
            "abs" => Func::Abs,
            "arg" => Func::Arg,
            "log" | "ln" => Func::Log,
            "pow" => Func::Pow,
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "max" => Func::Max,
            "min" => Func::Min,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Re => "re",
            Func::Im => "im",
            Func::Abs => "abs",
            Func::Arg => "arg",
            Func::Log => "log",
            Func::Pow => "pow",
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Max => "max",
            Func::Min => "min",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Pow | Func::Max | Func::Min => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ty {
    Real,
    Complex,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("type error: {0}")]
    Type(String),
    #[error("expression is complex-valued; a real top-level value is required")]
    NonReal,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} outside its domain")]
    Domain(&'static str),
    #[error("value is +inf")]
    PlusInfinity,
    #[error("undefined value")]
    Undefined,
}

/// Evaluation result: real values may be `-∞` (as IEEE) internally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Real(f64),
    Complex(Complex64),
}

impl Value {
    fn complex(self) -> Complex64 {
        match self {
            Value::Real(x) => Complex64::new(x, 0.0),
            Value::Complex(c) => c,
        }
    }

    fn real(self) -> f64 {
        match self {
            Value::Real(x) => x,
            Value::Complex(c) => c.re,
        }
    }
}

/// Which free variable an expression may mention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarSet {
    Plane,
    Angle,
}

pub fn parse(src: &str, vars: VarSet) -> Result<Expr, ParseError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, vars };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    e.ty()?;
    Ok(e)
}

/// Parses and requires a real top-level type.
pub fn parse_real(src: &str, vars: VarSet) -> Result<Expr, ParseError> {
    let e = parse(src, vars)?;
    match e.ty()? {
        Ty::Real => Ok(e),
        Ty::Complex => Err(ParseError::NonReal),
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: VarSet,
}

impl Parser<'_> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            Some(x) => Err(self.err(format!("expected `{}`, found `{}`", c as char, x as char))),
            None => Err(self.err(format!("expected `{}`, found end of input", c as char))),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(c) => Err(self.err(format!("unexpected character `{}`", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let s = self.src;
        let mut end = start;
        while end < s.len() && (s[end].is_ascii_digit() || s[end] == b'.') {
            end += 1;
        }
        if end < s.len() && (s[end] == b'e' || s[end] == b'E') {
            let mut k = end + 1;
            if k < s.len() && (s[k] == b'+' || s[k] == b'-') {
                k += 1;
            }
            if k < s.len() && s[k].is_ascii_digit() {
                while k < s.len() && s[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let text = std::str::from_utf8(&s[start..end]).expect("ascii slice");
        let v: f64 = text.parse().map_err(|_| self.err(format!("malformed number `{text}`")))?;
        self.pos = end;
        Ok(Expr::Num(v))
    }

    fn ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        if self.peek() == Some(b'(') {
            let func = Func::from_name(name).ok_or_else(|| ParseError::Syntax {
                pos: start,
                msg: format!("unknown function `{name}`"),
            })?;
            self.pos += 1;
            let mut args = vec![self.expr()?];
            while self.peek() == Some(b',') {
                self.pos += 1;
                args.push(self.expr()?);
            }
            self.expect(b')')?;
            if args.len() != func.arity() {
                return Err(ParseError::Syntax {
                    pos: start,
                    msg: format!("`{name}` takes {} argument(s), got {}", func.arity(), args.len()),
                });
            }
            return Ok(Expr::Call(func, args));
        }
        let unknown = || ParseError::Syntax { pos: start, msg: format!("unknown identifier `{name}`") };
        match (name, self.vars) {
            ("z", VarSet::Plane) => Ok(Expr::Var(Var::Z)),
            ("theta" | "t", VarSet::Angle) => Ok(Expr::Var(Var::Theta)),
            ("pi", _) => Ok(Expr::Const(Constant::Pi)),
            ("e", _) => Ok(Expr::Const(Constant::E)),
            ("i", _) => Ok(Expr::Const(Constant::I)),
            _ => Err(unknown()),
        }
    }
}

impl Expr {
    pub fn ty(&self) -> Result<Ty, ParseError> {
        use Ty::*;
        Ok(match self {
            Expr::Num(_) | Expr::Const(Constant::Pi | Constant::E) | Expr::Var(Var::Theta) => Real,
            Expr::Const(Constant::I) | Expr::Var(Var::Z) => Complex,
            Expr::Neg(a) => a.ty()?,
            Expr::Bin(_, a, b) => {
                if a.ty()? == Real && b.ty()? == Real {
                    Real
                } else {
                    Complex
                }
            }
            Expr::Call(f, args) => {
                let tys = args.iter().map(Expr::ty).collect::<Result<Vec<_>, _>>()?;
                let all_real = tys.iter().all(|t| *t == Real);
                match f {
                    Func::Re | Func::Im | Func::Abs | Func::Arg => Real,
                    Func::Pow => {
                        if tys[1] != Real {
                            return Err(ParseError::Type("pow exponent must be real".into()));
                        }
                        tys[0]
                    }
                    _ if all_real => Real,
                    _ => {
                        return Err(ParseError::Type(format!(
                            "{}() expects real arguments; wrap complex values in re/im/abs",
                            f.name()
                        )))
                    }
                }
            }
        })
    }

    /// True when the expression mentions no variable.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Var(_) => false,
            Expr::Num(_) | Expr::Const(_) => true,
            Expr::Neg(a) => a.is_constant(),
            Expr::Bin(_, a, b) => a.is_constant() && b.is_constant(),
            Expr::Call(_, args) => args.iter().all(Expr::is_constant),
        }
    }

    /// Evaluates a real-typed expression.
    pub fn eval_real(&self, z: Complex64, theta: f64) -> Result<f64, EvalError> {
        let v = self.eval(z, theta)?.real();
        if v.is_nan() {
            Err(EvalError::Undefined)
        } else if v == f64::INFINITY {
            Err(EvalError::PlusInfinity)
        } else {
            Ok(v)
        }
    }

    pub fn eval(&self, z: Complex64, theta: f64) -> Result<Value, EvalError> {
        Ok(match self {
            Expr::Num(x) => Value::Real(*x),
            Expr::Const(Constant::Pi) => Value::Real(std::f64::consts::PI),
            Expr::Const(Constant::E) => Value::Real(std::f64::consts::E),
            Expr::Const(Constant::I) => Value::Complex(Complex64::i()),
            Expr::Var(Var::Z) => Value::Complex(z),
            Expr::Var(Var::Theta) => Value::Real(theta),
            Expr::Neg(a) => match a.eval(z, theta)? {
                Value::Real(x) => Value::Real(-x),
                Value::Complex(c) => Value::Complex(-c),
            },
            Expr::Bin(op, a, b) => binary(*op, a.eval(z, theta)?, b.eval(z, theta)?)?,
            Expr::Call(f, args) => {
                let a = args[0].eval(z, theta)?;
                match f {
                    Func::Re => Value::Real(a.complex().re),
                    Func::Im => Value::Real(match a {
                        Value::Real(_) => 0.0,
                        Value::Complex(c) => c.im,
                    }),
                    Func::Abs => Value::Real(match a {
                        Value::Real(x) => x.abs(),
                        Value::Complex(c) => c.norm(),
                    }),
                    Func::Arg => Value::Real(a.complex().arg()),
                    Func::Log => {
                        let x = a.real();
                        if x < 0.0 || x.is_nan() {
                            return Err(EvalError::Domain("log"));
                        }
                        Value::Real(x.ln())
                    }
                    Func::Sqrt => {
                        let x = a.real();
                        if x < 0.0 {
                            return Err(EvalError::Domain("sqrt"));
                        }
                        Value::Real(x.sqrt())
                    }
                    Func::Exp => Value::Real(a.real().exp()),
                    Func::Sin => Value::Real(a.real().sin()),
                    Func::Cos => Value::Real(a.real().cos()),
                    Func::Pow => {
                        let p = args[1].eval(z, theta)?.real();
                        match a {
                            Value::Real(x) => {
                                if x == 0.0 && p < 0.0 {
                                    return Err(EvalError::DivisionByZero);
                                }
                                let v = x.powf(p);
                                if v.is_nan() {
                                    return Err(EvalError::Domain("pow"));
                                }
                                Value::Real(v)
                            }
                            Value::Complex(c) => {
                                if c == Complex64::new(0.0, 0.0) {
                                    if p < 0.0 {
                                        return Err(EvalError::DivisionByZero);
                                    }
                                    Value::Complex(if p == 0.0 { Complex64::new(1.0, 0.0) } else { c })
                                } else if p.fract() == 0.0 && p.abs() <= 64.0 {
                                    Value::Complex(c.powi(p as i32))
                                } else {
                                    Value::Complex(c.powf(p))
                                }
                            }
                        }
                    }
                    Func::Max => Value::Real(a.real().max(args[1].eval(z, theta)?.real())),
                    Func::Min => Value::Real(a.real().min(args[1].eval(z, theta)?.real())),
                }
            }
        })
    }

    /// `(a, b)` with `self(z) = a z + b` when the expression is affine in `z`.
    pub fn affine(&self) -> Option<(Complex64, Complex64)> {
        let zero = Complex64::new(0.0, 0.0);
        if self.is_constant() {
            return self.eval(zero, 0.0).ok().map(|v| (zero, v.complex()));
        }
        match self {
            Expr::Var(Var::Z) => Some((Complex64::new(1.0, 0.0), zero)),
            Expr::Neg(a) => a.affine().map(|(p, q)| (-p, -q)),
            Expr::Bin(op, a, b) => {
                let (pa, qa) = a.affine()?;
                let (pb, qb) = b.affine()?;
                match op {
                    BinOp::Add => Some((pa + pb, qa + qb)),
                    BinOp::Sub => Some((pa - pb, qa - qb)),
                    BinOp::Mul if pa == zero => Some((qa * pb, qa * qb)),
                    BinOp::Mul if pb == zero => Some((pa * qb, qa * qb)),
                    BinOp::Div if pb == zero && qb != zero => Some((pa / qb, qa / qb)),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    /// Splits a real expression into `Σ cₖ·ln|z − λₖ|` plus a residual that
    /// stays finite at every `λₖ`. Only top-level summands of the form
    /// `c·log(abs(a z + b))` with constant real `c` and `a ≠ 0` are split.
    pub fn split_log_terms(&self) -> (Vec<(Complex64, f64)>, Expr) {
        let mut summands = Vec::new();
        collect_summands(self, 1.0, &mut summands);
        let mut logs = Vec::new();
        let mut residual: Option<Expr> = None;
        let mut constant = 0.0;
        for (coeff, term) in summands {
            if let Some((lambda, offset)) = log_abs_affine(term) {
                logs.push((lambda, coeff));
                constant += coeff * offset;
                continue;
            }
            let scaled = if coeff == 1.0 {
                term.clone()
            } else if coeff == -1.0 {
                Expr::Neg(Box::new(term.clone()))
            } else {
                Expr::Bin(BinOp::Mul, Box::new(Expr::Num(coeff)), Box::new(term.clone()))
            };
            residual = Some(match residual {
                None => scaled,
                Some(r) => Expr::Bin(BinOp::Add, Box::new(r), Box::new(scaled)),
            });
        }
        if logs.is_empty() {
            return (logs, self.clone());
        }
        let residual = match (residual, constant) {
            (None, c) => Expr::Num(c),
            (Some(r), c) if c == 0.0 => r,
            (Some(r), c) => Expr::Bin(BinOp::Add, Box::new(r), Box::new(Expr::Num(c))),
        };
        (logs, residual)
    }
}

fn collect_summands<'a>(e: &'a Expr, coeff: f64, out: &mut Vec<(f64, &'a Expr)>) {
    match e {
        Expr::Bin(BinOp::Add, a, b) => {
            collect_summands(a, coeff, out);
            collect_summands(b, coeff, out);
        }
        Expr::Bin(BinOp::Sub, a, b) => {
            collect_summands(a, coeff, out);
            collect_summands(b, -coeff, out);
        }
        Expr::Neg(a) => collect_summands(a, -coeff, out),
        Expr::Bin(BinOp::Mul, a, b) if real_constant(a).is_some() => {
            collect_summands(b, coeff * real_constant(a).unwrap(), out)
        }
        Expr::Bin(BinOp::Mul, a, b) if real_constant(b).is_some() => {
            collect_summands(a, coeff * real_constant(b).unwrap(), out)
        }
        Expr::Bin(BinOp::Div, a, b) if real_constant(b).is_some_and(|c| c != 0.0) => {
            collect_summands(a, coeff / real_constant(b).unwrap(), out)
        }
        _ => out.push((coeff, e)),
    }
}

fn real_constant(e: &Expr) -> Option<f64> {
    if !e.is_constant() || e.ty().ok()? != Ty::Real {
        return None;
    }
    e.eval_real(Complex64::new(0.0, 0.0), 0.0).ok().filter(|v| v.is_finite())
}

/// For `log(abs(a z + b))`: returns `(λ, ln|a|)` with `λ = -b/a`.
fn log_abs_affine(e: &Expr) -> Option<(Complex64, f64)> {
    let Expr::Call(Func::Log, args) = e else { return None };
    let Expr::Call(Func::Abs, inner) = &args[0] else { return None };
    let (a, b) = inner[0].affine()?;
    if a == Complex64::new(0.0, 0.0) || !a.is_finite() || !b.is_finite() {
        return None;
    }
    Some((-b / a, a.norm().ln()))
}

fn binary(op: BinOp, a: Value, b: Value) -> Result<Value, EvalError> {
    Ok(match (a, b) {
        (Value::Real(x), Value::Real(y)) => Value::Real(match op {
            BinOp::Add => x + y,
            BinOp::Sub => x - y,
            BinOp::Mul => x * y,
            BinOp::Div => {
                if y == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                x / y
            }
        }),
        (a, b) => {
            let (x, y) = (a.complex(), b.complex());
            Value::Complex(match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == Complex64::new(0.0, 0.0) {
                        return Err(EvalError::DivisionByZero);
                    }
                    x / y
                }
            })
        }
    })
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) if *x < 0.0 => write!(f, "(-{})", -x),
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Const(Constant::Pi) => write!(f, "pi"),
            Expr::Const(Constant::E) => write!(f, "e"),
            Expr::Const(Constant::I) => write!(f, "i"),
            Expr::Var(Var::Z) => write!(f, "z"),
            Expr::Var(Var::Theta) => write!(f, "theta"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => {
                let c = match op {
                    BinOp::Add => '+',
                    BinOp::Sub => '-',
                    BinOp::Mul => '*',
                    BinOp::Div => '/',
                };
                write!(f, "({a} {c} {b})")
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}
