//! Expressions over named jet variables.
//!
//! Grammar:
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := factor (('*' | '/') factor)*
//! factor   := '-' factor | base ('^' exponent)?
//! exponent := '-' exponent | base ('^' exponent)?
//! base     := number | name | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! Unary minus binds looser than `^`, so `-p^2` is `-(p^2)`. Names are the
//! declared variables and parameters, the constants `pi` and `i`, and the
//! functions `sin cos exp ln abs sqrt`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::rational::{to_f64, Rational};
use crate::scalar::{Dual, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Abs,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Nonnegative literal.
    Num(Rational),
    Var(usize),
    Param(String),
    Pi,
    I,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

const RESERVED: [&str; 8] = ["pi", "i", "sin", "cos", "exp", "ln", "abs", "sqrt"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("undeclared name `{name}` at offset {offset}")]
    Undeclared { name: String, offset: usize },
    #[error("`{0}` is reserved and cannot be declared")]
    Reserved(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("`{node}` is singular here (magnitude {magnitude:e})")]
    Singular { node: String, magnitude: f64 },
    #[error("abs of non-real value in `{node}`")]
    NonRealAbs { node: String },
    #[error("parameter `{0}` has no value")]
    Unbound(String),
    #[error("`{node}` is not finite")]
    NonFinite { node: String },
    #[error("expected {expected} coordinates, got {got}")]
    Arity { expected: usize, got: usize },
}

/// An expression together with its declared variable and parameter names.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    vars: Vec<String>,
    params: Vec<String>,
    root: Expr,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    vars: &'a [String],
    params: &'a [String],
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.eat('^') {
            let exponent = self.factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => self.err("unexpected end of input"),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.name(),
            Some(c) => self.err(format!("unexpected `{c}`")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let digits = |p: &mut usize| {
            let s = *p;
            while *p < bytes.len() && bytes[*p].is_ascii_digit() {
                *p += 1;
            }
            *p - s
        };
        let mut p = self.pos;
        let int_digits = digits(&mut p);
        let mut frac = String::new();
        if p < bytes.len() && bytes[p] == b'.' {
            p += 1;
            let s = p;
            digits(&mut p);
            frac = self.src[s..p].to_string();
        }
        if int_digits == 0 && frac.is_empty() {
            return self.err("malformed number");
        }
        let mut exp10: i64 = 0;
        if p < bytes.len() && (bytes[p] == b'e' || bytes[p] == b'E') {
            let mut q = p + 1;
            let neg = q < bytes.len() && bytes[q] == b'-';
            if q < bytes.len() && (bytes[q] == b'-' || bytes[q] == b'+') {
                q += 1;
            }
            let s = q;
            if digits(&mut q) > 0 {
                let v: i64 = self.src[s..q].parse().map_err(|_| ParseError::Syntax {
                    offset: s,
                    message: "exponent too large".into(),
                })?;
                exp10 = if neg { -v } else { v };
                p = q;
            }
        }
        let int_part = &self.src[start..start + int_digits];
        let mantissa: BigInt = format!(
            "{}{}",
            if int_part.is_empty() { "0" } else { int_part },
            frac
        )
        .parse()
        .expect("digits");
        let scale = exp10 - frac.len() as i64;
        if scale.abs() > 400 {
            return Err(ParseError::Syntax {
                offset: start,
                message: "number out of range".into(),
            });
        }
        let ten = BigInt::from(10);
        let value = if scale >= 0 {
            Rational::from_integer(mantissa * num_traits::pow(ten, scale as usize))
        } else {
            Rational::new(mantissa, num_traits::pow(ten, (-scale) as usize))
        };
        self.pos = p;
        Ok(Expr::Num(value))
    }

    fn name(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let rest = &self.src[start..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        let name = &rest[..len];
        self.pos += len;
        if let Some(f) = Func::from_name(name) {
            if !self.eat('(') {
                return self.err(format!("expected `(` after `{name}`"));
            }
            let arg = self.expr()?;
            if !self.eat(')') {
                return self.err("expected `)`");
            }
            return Ok(Expr::Call(f, Box::new(arg)));
        }
        match name {
            "pi" => Ok(Expr::Pi),
            "i" => Ok(Expr::I),
            _ => {
                if let Some(k) = self.vars.iter().position(|v| v == name) {
                    Ok(Expr::Var(k))
                } else if self.params.iter().any(|p| p == name) {
                    Ok(Expr::Param(name.to_string()))
                } else {
                    Err(ParseError::Undeclared {
                        name: name.to_string(),
                        offset: start,
                    })
                }
            }
        }
    }
}

fn check_names(names: &[String]) -> Result<(), ParseError> {
    for n in names {
        if RESERVED.contains(&n.as_str()) {
            return Err(ParseError::Reserved(n.clone()));
        }
    }
    Ok(())
}

/// Evaluation settings: parameter values and the smallest admissible
/// magnitude of a divisor or logarithm argument.
#[derive(Debug, Clone, Default)]
pub struct EvalContext {
    pub params: Vec<(String, Complex64)>,
    pub floor: f64,
}

impl EvalContext {
    pub fn with_floor(floor: f64) -> Self {
        EvalContext {
            params: Vec::new(),
            floor,
        }
    }
}

impl Expression {
    pub fn parse(text: &str, vars: &[&str]) -> Result<Self, ParseError> {
        Self::parse_with_params(text, vars, &[])
    }

    pub fn parse_with_params(
        text: &str,
        vars: &[&str],
        params: &[&str],
    ) -> Result<Self, ParseError> {
        let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let params: Vec<String> = params.iter().map(|s| s.to_string()).collect();
        check_names(&vars)?;
        check_names(&params)?;
        let mut p = Parser {
            src: text,
            pos: 0,
            vars: &vars,
            params: &params,
        };
        let root = p.expr()?;
        if p.peek().is_some() {
            return p.err("unexpected trailing input");
        }
        Ok(Expression { vars, params, root })
    }

    pub fn from_parts(vars: Vec<String>, params: Vec<String>, root: Expr) -> Self {
        Expression { vars, params, root }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    /// Parameters that actually occur.
    pub fn used_params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.root.visit(&mut |e| {
            if let Expr::Param(p) = e {
                out.insert(p.clone());
            }
        });
        out
    }

    pub fn depends_on(&self, var: usize) -> bool {
        let mut found = false;
        self.root.visit(&mut |e| found |= *e == Expr::Var(var));
        found
    }

    /// Replaces parameters by literal values.
    pub fn instantiate(&self, values: &[(String, Rational)]) -> Expression {
        let root = self.root.map(&|e| match e {
            Expr::Param(p) => values.iter().find(|(n, _)| n == p).map(|(_, v)| literal(v)),
            _ => None,
        });
        let params = self
            .params
            .iter()
            .filter(|p| !values.iter().any(|(n, _)| n == *p))
            .cloned()
            .collect();
        Expression {
            vars: self.vars.clone(),
            params,
            root,
        }
    }

    /// Replaces variable `k` by `replacements[k]`. The replacements must be
    /// over `new_vars`; parameter lists are merged.
    pub fn substitute(&self, replacements: &[Expression]) -> Expression {
        assert_eq!(
            replacements.len(),
            self.vars.len(),
            "one replacement per variable"
        );
        let root = self.root.map(&|e| match e {
            Expr::Var(k) => Some(replacements[*k].root.clone()),
            _ => None,
        });
        let mut params = self.params.clone();
        for r in replacements {
            for p in &r.params {
                if !params.contains(p) {
                    params.push(p.clone());
                }
            }
        }
        let vars = replacements
            .first()
            .map_or_else(|| self.vars.clone(), |r| r.vars.clone());
        Expression { vars, params, root }
    }

    pub fn eval<S: Scalar>(&self, point: &[S], ctx: &EvalContext) -> Result<S, EvalError> {
        if point.len() != self.vars.len() {
            return Err(EvalError::Arity {
                expected: self.vars.len(),
                got: point.len(),
            });
        }
        self.root.eval(point, ctx, &self.vars)
    }

    pub fn eval_c(&self, point: &[Complex64]) -> Result<Complex64, EvalError> {
        self.eval(point, &EvalContext::default())
    }

    /// Value and first partials with respect to the listed variables.
    pub fn eval_with_derivatives(
        &self,
        point: &[Complex64],
        wrt: &[usize],
        ctx: &EvalContext,
    ) -> Result<(Complex64, Vec<Complex64>), EvalError> {
        let seeded: Vec<Dual<Complex64>> = point
            .iter()
            .enumerate()
            .map(|(k, &v)| match wrt.iter().position(|&w| w == k) {
                Some(slot) => Dual::variable(v, slot, wrt.len()),
                None => Dual::constant_of(v),
            })
            .collect();
        let d = self.eval(&seeded, ctx)?;
        Ok((d.v, (0..wrt.len()).map(|k| d.partial(k)).collect()))
    }

    /// Gradient with respect to every variable, over any scalar type.
    pub fn gradient<S: Scalar>(
        &self,
        point: &[S],
        ctx: &EvalContext,
    ) -> Result<(S, Vec<S>), EvalError> {
        let n = point.len();
        let seeded: Vec<Dual<S>> = point
            .iter()
            .enumerate()
            .map(|(k, v)| Dual::variable(v.clone(), k, n))
            .collect();
        let d = self.eval(&seeded, ctx)?;
        Ok((d.v.clone(), (0..n).map(|k| d.partial(k)).collect()))
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.root.visit(&mut |_| n += 1);
        n
    }
}

fn literal(v: &Rational) -> Expr {
    if v.is_negative() {
        Expr::Neg(Box::new(Expr::Num(-v)))
    } else {
        Expr::Num(v.clone())
    }
}

fn guard<S: Scalar>(x: &S, ctx: &EvalContext, node: &dyn Fn() -> String) -> Result<(), EvalError> {
    let m = x.value().norm();
    if !m.is_finite() {
        return Err(EvalError::NonFinite { node: node() });
    }
    if m == 0.0 || m < ctx.floor {
        return Err(EvalError::Singular {
            node: node(),
            magnitude: m,
        });
    }
    Ok(())
}

impl Expr {
    fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Neg(a) | Expr::Call(_, a) => a.visit(f),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    /// Bottom-up rewrite; `f` returns a replacement for leaves it handles.
    fn map(&self, f: &dyn Fn(&Expr) -> Option<Expr>) -> Expr {
        if let Some(r) = f(self) {
            return r;
        }
        let b = |e: &Expr| Box::new(e.map(f));
        match self {
            Expr::Neg(a) => Expr::Neg(b(a)),
            Expr::Call(g, a) => Expr::Call(*g, b(a)),
            Expr::Add(x, y) => Expr::Add(b(x), b(y)),
            Expr::Sub(x, y) => Expr::Sub(b(x), b(y)),
            Expr::Mul(x, y) => Expr::Mul(b(x), b(y)),
            Expr::Div(x, y) => Expr::Div(b(x), b(y)),
            Expr::Pow(x, y) => Expr::Pow(b(x), b(y)),
            leaf => leaf.clone(),
        }
    }

    fn has_vars(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e, Expr::Var(_)));
        found
    }

    fn eval<S: Scalar>(
        &self,
        point: &[S],
        ctx: &EvalContext,
        names: &[String],
    ) -> Result<S, EvalError> {
        let node = || Printer { names }.to_string(self);
        let ev = |e: &Expr| e.eval(point, ctx, names);
        Ok(match self {
            Expr::Num(r) => S::real(to_f64(r)),
            Expr::Var(k) => point[*k].clone(),
            Expr::Param(p) => {
                let v = ctx
                    .params
                    .iter()
                    .find(|(n, _)| n == p)
                    .ok_or_else(|| EvalError::Unbound(p.clone()))?;
                S::constant(v.1)
            }
            Expr::Pi => S::real(std::f64::consts::PI),
            Expr::I => S::constant(Complex64::new(0.0, 1.0)),
            Expr::Neg(a) => -ev(a)?,
            Expr::Add(a, b) => ev(a)? + ev(b)?,
            Expr::Sub(a, b) => ev(a)? - ev(b)?,
            Expr::Mul(a, b) => ev(a)? * ev(b)?,
            Expr::Div(a, b) => {
                let d = ev(b)?;
                guard(&d, ctx, &node)?;
                ev(a)?.div(&d)
            }
            Expr::Pow(a, b) => {
                let base = ev(a)?;
                if !b.has_vars() {
                    let e = b.eval::<Complex64>(&[], ctx, names)?;
                    let rounded = e.re.round();
                    if e.im == 0.0 && (e.re - rounded).abs() < 1e-12 && rounded.abs() <= 64.0 {
                        if rounded < 0.0 {
                            guard(&base, ctx, &node)?;
                        }
                        return Ok(base.powi(rounded as i64));
                    }
                    guard(&base, ctx, &node)?;
                    return Ok(base.pow(&S::constant(e)));
                }
                guard(&base, ctx, &node)?;
                base.pow(&ev(b)?)
            }
            Expr::Call(f, a) => {
                let x = ev(a)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Sqrt => x.sqrt(),
                    Func::Ln => {
                        guard(&x, ctx, &node)?;
                        x.ln()
                    }
                    Func::Abs => {
                        let v = x.value();
                        if v.im.abs() > 1e-12 * (1.0 + v.re.abs()) {
                            return Err(EvalError::NonRealAbs { node: node() });
                        }
                        x.abs()
                    }
                }
            }
        })
    }
}

/// Precedence levels: sum 1, product 2, negation 3, power 4, atom 5.
struct Printer<'a> {
    names: &'a [String],
}

fn format_decimal(r: &Rational) -> String {
    let mut den = r.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    let shift = twos.max(fives);
    if !den.is_one() {
        return format!("({}/{})", r.numer(), r.denom());
    }
    let scaled =
        (r * Rational::from_integer(num_traits::pow(BigInt::from(10), shift))).to_integer();
    if shift == 0 {
        return scaled.to_string();
    }
    let digits = format!("{:0>width$}", scaled.to_string(), width = shift + 1);
    let (int, frac) = digits.split_at(digits.len() - shift);
    format!("{int}.{frac}")
}

impl Printer<'_> {
    fn level(e: &Expr) -> u8 {
        match e {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn at(&self, e: &Expr, min: u8) -> String {
        let s = self.to_string(e);
        if Self::level(e) < min {
            format!("({s})")
        } else {
            s
        }
    }

    fn to_string(&self, e: &Expr) -> String {
        match e {
            Expr::Num(r) => format_decimal(r),
            Expr::Var(k) => self
                .names
                .get(*k)
                .cloned()
                .unwrap_or_else(|| format!("v{k}")),
            Expr::Param(p) => p.clone(),
            Expr::Pi => "pi".into(),
            Expr::I => "i".into(),
            Expr::Neg(a) => format!("-{}", self.at(a, 3)),
            Expr::Add(a, b) => format!("{} + {}", self.at(a, 1), self.at(b, 2)),
            Expr::Sub(a, b) => format!("{} - {}", self.at(a, 1), self.at(b, 2)),
            Expr::Mul(a, b) => format!("{}*{}", self.at(a, 2), self.at(b, 3)),
            Expr::Div(a, b) => format!("{}/{}", self.at(a, 2), self.at(b, 3)),
            Expr::Pow(a, b) => format!("{}^{}", self.at(a, 5), self.at(b, 3)),
            Expr::Call(f, a) => format!("{}({})", f.name(), self.to_string(a)),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Printer { names: &self.vars }.to_string(&self.root))
    }
}

/// Literal value of a parameter-free, variable-free expression.
pub fn constant_value(e: &Expression) -> Option<f64> {
    let zeros = vec![Complex64::new(0.0, 0.0); e.vars().len()];
    if e.root.has_vars() {
        return None;
    }
    let v = e.eval(&zeros, &EvalContext::default()).ok()?;
    (v.im == 0.0).then_some(v.re).and_then(|x| x.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    const XYP: [&str; 3] = ["x", "y", "p"];

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn parses_catalog_style_input() {
        assert!(Expression::parse("p^2/(3*x*p - 4*y)", &XYP).is_ok());
        assert!(Expression::parse("sin(x/p)", &XYP).is_ok());
        assert_eq!(
            Expression::parse("x +", &XYP),
            Err(ParseError::Syntax {
                offset: 3,
                message: "unexpected end of input".into()
            })
        );
        assert_eq!(
            Expression::parse("x + z", &XYP),
            Err(ParseError::Undeclared {
                name: "z".into(),
                offset: 4
            })
        );
        assert_eq!(
            Expression::parse("x", &["pi"]),
            Err(ParseError::Reserved("pi".into()))
        );
        assert!(matches!(
            Expression::parse("sin x", &XYP),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            Expression::parse("x y", &XYP),
            Err(ParseError::Syntax { .. })
        ));
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = Expression::parse("-p^2", &XYP).unwrap();
        assert_eq!(e.eval_c(&[c(1.0), c(1.0), c(3.0)]).unwrap(), c(-9.0));
        let e = Expression::parse("p^-2", &XYP).unwrap();
        assert_eq!(e.eval_c(&[c(1.0), c(1.0), c(2.0)]).unwrap(), c(0.25));
    }

    #[test]
    fn printing_round_trips() {
        for text in [
            "p^2/(3*x*p - 4*y)",
            "x - (y - p)",
            "-(x + y)*p",
            "(-x)^2",
            "x^y^2",
            "2*pi*i*x/(p/y)",
            "ln(abs(p)) + 0.25*sqrt(x) - 1.5e-3",
            "-u^-2",
        ] {
            let vars = ["x", "y", "p", "u"];
            let e = Expression::parse(text, &vars).unwrap();
            let again = Expression::parse(&e.to_string(), &vars).unwrap();
            assert_eq!(e, again, "{text} -> {e}");
        }
    }

    #[test]
    fn derivatives_by_hand() {
        let e = Expression::parse("x^2", &["x"]).unwrap();
        let (_, d) = e
            .eval_with_derivatives(&[c(3.0)], &[0], &EvalContext::default())
            .unwrap();
        assert_eq!(d[0], c(6.0));
        let q = Expression::parse("y - x*p/2", &XYP).unwrap();
        let pt = [c(1.7), c(-0.4), c(0.9)];
        let (_, d) = q
            .eval_with_derivatives(&pt, &[2], &EvalContext::default())
            .unwrap();
        assert!((d[0] - c(-0.85)).norm() < 1e-15);
    }

    #[test]
    fn division_by_zero_names_node() {
        let e = Expression::parse("1/(x - 1)", &["x"]).unwrap();
        match e.eval_c(&[c(1.0)]) {
            Err(EvalError::Singular { node, .. }) => assert_eq!(node, "1/(x - 1)"),
            other => panic!("{other:?}"),
        }
        let ln = Expression::parse("ln(x)", &["x"]).unwrap();
        assert!(matches!(
            ln.eval(&[c(1e-9)], &EvalContext::with_floor(1e-6)),
            Err(EvalError::Singular { .. })
        ));
        let abs = Expression::parse("abs(x)", &["x"]).unwrap();
        assert!(matches!(
            abs.eval_c(&[Complex64::new(1.0, 1.0)]),
            Err(EvalError::NonRealAbs { .. })
        ));
        assert_eq!(abs.eval_c(&[c(-2.0)]).unwrap(), c(2.0));
    }

    #[test]
    fn parameters_and_substitution() {
        let e = Expression::parse_with_params("x + 2*n*pi*p", &XYP, &["n"]).unwrap();
        assert!(matches!(
            e.eval_c(&[c(0.0), c(0.0), c(1.0)]),
            Err(EvalError::Unbound(_))
        ));
        let one = e.instantiate(&[("n".into(), Rational::from_integer(1.into()))]);
        let v = one.eval_c(&[c(0.0), c(0.0), c(1.0)]).unwrap();
        assert!((v - c(2.0 * std::f64::consts::PI)).norm() < 1e-14);
        let minus = e.instantiate(&[("n".into(), Rational::from_integer((-2).into()))]);
        assert_eq!(minus.to_string(), "x + 2*-2*pi*p");
        let legendre = ["p", "x*p - y", "x"].map(|s| Expression::parse(s, &XYP).unwrap());
        let twice: Vec<Expression> = legendre.iter().map(|e| e.substitute(&legendre)).collect();
        let pt = [c(0.3), c(-1.1), c(0.8)];
        for (k, comp) in twice.iter().enumerate() {
            assert!((comp.eval_c(&pt).unwrap() - pt[k]).norm() < 1e-15);
        }
    }

    #[test]
    fn decimal_literals_are_exact() {
        let e = Expression::parse("0.1 + 2.50", &["x"]).unwrap();
        assert_eq!(e.to_string(), "0.1 + 2.5");
        assert_eq!(constant_value(&e), Some(2.6));
        assert_eq!(
            format_decimal(&(Rational::one() / Rational::from_integer(3.into()))),
            "(1/3)"
        );
        assert_eq!(format_decimal(&Rational::new(1.into(), 40.into())), "0.025");
    }
}
