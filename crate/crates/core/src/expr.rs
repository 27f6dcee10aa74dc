//! Expressions in the time variable `t`.
//!
//! Grammar, from lowest to highest precedence:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' '-'? integer)?
//! atom   := number | 'pi' | 't' | ident '(' expr (',' expr)? ')' | '(' expr ')'
//! ```
//!
//! Unary functions: `sin cos tan abs tanh arctan floor exp`.
//! Binary functions: `min max`, and `pow(expr, integer)` as a spelling of `^`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::error::EvalError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Abs,
    Tanh,
    Arctan,
    Floor,
    Exp,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Abs => "abs",
            Func::Tanh => "tanh",
            Func::Arctan => "arctan",
            Func::Floor => "floor",
            Func::Exp => "exp",
        }
    }

    fn apply<T: Scalar>(self, x: T) -> T {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Abs => x.abs(),
            Func::Tanh => x.tanh(),
            Func::Arctan => x.atan(),
            Func::Floor => x.floor(),
            Func::Exp => x.exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func2 {
    Min,
    Max,
}

/// Abstract syntax tree of a parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Pi,
    Time,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
    Call2(Func2, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn parse(source: &str) -> Result<Self, ParseError> {
        Parser::new(source).parse()
    }

    /// Returns the value if the expression does not depend on `t`.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            Expr::Pi => Some(std::f64::consts::PI),
            _ => None,
        }
    }

    /// Evaluates at time `t`. Division by an exact zero and any non-finite
    /// result are reported as errors.
    pub fn eval<T: Scalar>(&self, t: T) -> Result<T, EvalError> {
        let v = self.eval_raw(t)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { t: t.as_f64() })
        }
    }

    fn eval_raw<T: Scalar>(&self, t: T) -> Result<T, EvalError> {
        Ok(match self {
            Expr::Const(c) => T::lit(*c),
            Expr::Pi => T::PI(),
            Expr::Time => t,
            Expr::Neg(e) => -e.eval_raw(t)?,
            Expr::Binary(op, l, r) => {
                let l = l.eval_raw(t)?;
                let r = r.eval_raw(t)?;
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r == T::zero() {
                            return Err(EvalError::DivisionByZero { t: t.as_f64() });
                        }
                        l / r
                    }
                }
            }
            Expr::Pow(base, n) => {
                let b = base.eval_raw(t)?;
                if *n < 0 && b == T::zero() {
                    return Err(EvalError::DivisionByZero { t: t.as_f64() });
                }
                b.powi(*n)
            }
            Expr::Call(f, arg) => f.apply(arg.eval_raw(t)?),
            Expr::Call2(f, l, r) => {
                let l = l.eval_raw(t)?;
                let r = r.eval_raw(t)?;
                match f {
                    Func2::Min => l.min(r),
                    Func2::Max => l.max(r),
                }
            }
        })
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

/// Prints an expression that parses back to an equivalent tree. Binary
/// operations are always parenthesized.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
                write!(f, "(-{:?})", -c)
            }
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Pi => f.write_str("pi"),
            Expr::Time => f.write_str("t"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, l, r) => {
                let sym = match op {
                    BinOp::Add => '+',
                    BinOp::Sub => '-',
                    BinOp::Mul => '*',
                    BinOp::Div => '/',
                };
                write!(f, "({l} {sym} {r})")
            }
            Expr::Pow(b, n) => match **b {
                Expr::Pi | Expr::Time | Expr::Call(..) | Expr::Call2(..) => write!(f, "{b}^{n}"),
                Expr::Const(c) if c >= 0.0 && c.is_sign_positive() => write!(f, "{b}^{n}"),
                _ => write!(f, "({b})^{n}"),
            },
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
            Expr::Call2(func, l, r) => {
                let name = match func {
                    Func2::Min => "min",
                    Func2::Max => "max",
                };
                write!(f, "{name}({l}, {r})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    UnexpectedChar(char),
    UnexpectedEnd,
    UnknownIdentifier(String),
    ExpectedInteger,
    BadNumber,
    Arity { name: String, expected: usize },
    TrailingInput,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Empty => f.write_str("empty expression"),
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character '{c}'"),
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input"),
            ParseErrorKind::UnknownIdentifier(id) => write!(f, "unknown identifier '{id}'"),
            ParseErrorKind::ExpectedInteger => f.write_str("expected an integer exponent"),
            ParseErrorKind::BadNumber => f.write_str("malformed number"),
            ParseErrorKind::Arity { name, expected } => {
                write!(f, "'{name}' takes {expected} argument(s)")
            }
            ParseErrorKind::TrailingInput => f.write_str("unexpected trailing input"),
        }
    }
}

/// Syntax error with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn err<T>(&self, kind: ParseErrorKind) -> Result<T, ParseError> {
        Err(ParseError { kind, offset: self.pos })
    }

    fn skip_ws(&mut self) {
        while matches!(self.src.get(self.pos), Some(c) if c.is_ascii_whitespace()) {
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
            Some(x) => self.err(ParseErrorKind::UnexpectedChar(x as char)),
            None => self.err(ParseErrorKind::UnexpectedEnd),
        }
    }

    fn parse(mut self) -> Result<Expr, ParseError> {
        if self.peek().is_none() {
            return self.err(ParseErrorKind::Empty);
        }
        let e = self.expr()?;
        if self.peek().is_some() {
            return self.err(ParseErrorKind::TrailingInput);
        }
        Ok(e)
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
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.factor()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let n = self.integer()?;
            return Ok(Expr::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i32, ParseError> {
        let negative = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        self.skip_ws();
        let start = self.pos;
        while matches!(self.src.get(self.pos), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err(ParseErrorKind::ExpectedInteger);
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        let n: i32 = digits.parse().map_err(|_| ParseError {
            kind: ParseErrorKind::ExpectedInteger,
            offset: start,
        })?;
        Ok(if negative { -n } else { n })
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while matches!(p.src.get(p.pos), Some(c) if c.is_ascii_digit()) {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if exp_start == self.pos {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Expr::Const(v)),
            _ => Err(ParseError {
                kind: ParseErrorKind::BadNumber,
                offset: start,
            }),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => self.err(ParseErrorKind::UnexpectedEnd),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(c) => self.err(ParseErrorKind::UnexpectedChar(c as char)),
        }
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while matches!(self.src.get(self.pos), Some(c) if c.is_ascii_alphanumeric() || *c == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
        let unary = match name {
            "t" => return Ok(Expr::Time),
            "pi" => return Ok(Expr::Pi),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "tan" => Some(Func::Tan),
            "abs" => Some(Func::Abs),
            "tanh" => Some(Func::Tanh),
            "arctan" => Some(Func::Arctan),
            "floor" => Some(Func::Floor),
            "exp" => Some(Func::Exp),
            "min" | "max" | "pow" => None,
            _ => {
                return Err(ParseError {
                    kind: ParseErrorKind::UnknownIdentifier(name.to_string()),
                    offset: start,
                })
            }
        };
        let name = name.to_string();
        self.expect(b'(')?;
        let first = self.expr()?;
        if let Some(func) = unary {
            if self.peek() == Some(b',') {
                return self.err(ParseErrorKind::Arity { name, expected: 1 });
            }
            self.expect(b')')?;
            return Ok(Expr::Call(func, Box::new(first)));
        }
        if self.peek() != Some(b',') {
            return self.err(ParseErrorKind::Arity { name, expected: 2 });
        }
        self.pos += 1;
        let e = if name == "pow" {
            let n = self.integer()?;
            Expr::Pow(Box::new(first), n)
        } else {
            let second = self.expr()?;
            let f = if name == "min" { Func2::Min } else { Func2::Max };
            Expr::Call2(f, Box::new(first), Box::new(second))
        };
        self.expect(b')')?;
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn eval(src: &str, t: f64) -> f64 {
        Expr::parse(src).unwrap().eval(t).unwrap()
    }

    #[test]
    fn constant_one() {
        assert_eq!(Expr::parse("1").unwrap(), Expr::Const(1.0));
    }

    #[test]
    fn shifted_squared_sine() {
        assert_abs_diff_eq!(eval("2+sin(pi*t)^2", 0.0), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eval("2+sin(pi*t)^2", 0.5), 3.0, epsilon = 1e-15);
    }

    #[test]
    fn sawtooth() {
        assert_abs_diff_eq!(eval("t-floor(t)", 3.25), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn precedence() {
        assert_eq!(eval("1+2*3", 0.0), 7.0);
        assert_eq!(eval("-2^2", 0.0), -4.0);
        assert_eq!(eval("2*3^2", 0.0), 18.0);
        assert_eq!(eval("8/2/2", 0.0), 2.0);
        assert_eq!(eval("5-3-1", 0.0), 1.0);
        assert_eq!(eval("(1+2)*3", 0.0), 9.0);
        assert_eq!(eval("t^-1", 4.0), 0.25);
        assert_eq!(eval("pow(t, 3)", 2.0), 8.0);
        assert_eq!(eval("min(t, 1) + max(t, 1)", 3.0), 4.0);
        assert_eq!(eval("abs(-t)", 2.5), 2.5);
        assert_eq!(eval("1.5e1 + .5", 0.0), 15.5);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let e = Expr::parse("1 + * 2").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnexpectedChar('*'));
        assert_eq!(e.offset, 4);

        let e = Expr::parse("2 + foo(t)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownIdentifier("foo".into()));
        assert_eq!(e.offset, 4);

        assert_eq!(Expr::parse("").unwrap_err().kind, ParseErrorKind::Empty);
        assert_eq!(Expr::parse("(t").unwrap_err().kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(Expr::parse("t t").unwrap_err().kind, ParseErrorKind::TrailingInput);
        assert_eq!(Expr::parse("t^x").unwrap_err().kind, ParseErrorKind::ExpectedInteger);
        assert!(matches!(
            Expr::parse("sin(t, 2)").unwrap_err().kind,
            ParseErrorKind::Arity { expected: 1, .. }
        ));
        assert!(matches!(
            Expr::parse("max(t)").unwrap_err().kind,
            ParseErrorKind::Arity { expected: 2, .. }
        ));
    }

    #[test]
    fn division_by_zero_is_reported() {
        let e = Expr::parse("1/(t-1)").unwrap();
        assert_eq!(e.eval(1.0_f64), Err(EvalError::DivisionByZero { t: 1.0 }));
        assert!(e.eval(2.0_f64).is_ok());
    }

    #[test]
    fn overflow_is_reported() {
        let e = Expr::parse("exp(t)").unwrap();
        assert!(matches!(e.eval(1000.0_f64), Err(EvalError::NonFinite { .. })));
    }

    #[test]
    fn evaluates_in_single_precision() {
        let e = Expr::parse("2+sin(pi*t)^2").unwrap();
        assert!((e.eval(0.5_f32).unwrap() - 3.0).abs() < 1e-6);
    }

    #[test]
    fn printed_form_reparses() {
        for src in [
            "2+sin(pi*t)^2",
            "t-floor(t)",
            "-t^2",
            "(-1.5)*t",
            "pow(-t, 3)",
            "1e-7/t",
        ] {
            let e = Expr::parse(src).unwrap();
            let back = Expr::parse(&e.to_string()).unwrap();
            assert_eq!(e, back, "{src} -> {e}");
        }
    }
}
