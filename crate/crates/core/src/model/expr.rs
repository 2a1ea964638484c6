//! Arithmetic expressions in the sequence index `j`.
//!
//! Grammar (right-associative `^`):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' factor)?
//! base   := number | 'j' | func '(' expr ')' | '(' expr ')' | '-' base
//! func   := 'exp' | 'log' | 'pow2'
//! ```
//!
//! A unary minus directly in front of a numeric literal is folded into the
//! literal, so `-3` is `Lit(-3)` while `-(3)` is `Neg(Lit(3))`. The printer
//! relies on this to make `parse(print(e)) == e` hold structurally.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Pow2,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Pow2 => "pow2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(f64),
    Index,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("{what} is undefined at j = {j}")]
    Undefined { what: &'static str, j: f64 },
    #[error("result overflows binary64 at j = {j}")]
    Overflow { j: f64 },
}

impl Expr {
    pub fn lit(v: f64) -> Self {
        Expr::Lit(v)
    }

    pub fn index() -> Self {
        Expr::Index
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Self {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn call(f: Func, a: Expr) -> Self {
        Expr::Call(f, Box::new(a))
    }

    pub fn neg(a: Expr) -> Self {
        Expr::Neg(Box::new(a))
    }

    pub fn add(self, b: Expr) -> Self {
        Expr::bin(BinOp::Add, self, b)
    }

    pub fn sub(self, b: Expr) -> Self {
        Expr::bin(BinOp::Sub, self, b)
    }

    pub fn mul(self, b: Expr) -> Self {
        Expr::bin(BinOp::Mul, self, b)
    }

    pub fn div(self, b: Expr) -> Self {
        Expr::bin(BinOp::Div, self, b)
    }

    pub fn pow(self, b: Expr) -> Self {
        Expr::bin(BinOp::Pow, self, b)
    }

    /// Evaluates at index `j`. Results must be finite; intermediate
    /// underflow to zero is allowed.
    pub fn eval(&self, j: f64) -> Result<f64, ExprError> {
        let v = match self {
            Expr::Lit(v) => *v,
            Expr::Index => j,
            Expr::Neg(a) => -a.eval(j)?,
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(j)?, b.eval(j)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(ExprError::Undefined { what: "division by zero", j });
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        if a < 0.0 && b.fract() != 0.0 {
                            return Err(ExprError::Undefined { what: "fractional power of a negative number", j });
                        }
                        if a == 0.0 && b < 0.0 {
                            return Err(ExprError::Undefined { what: "negative power of zero", j });
                        }
                        a.powf(b)
                    }
                }
            }
            Expr::Call(f, a) => {
                let a = a.eval(j)?;
                match f {
                    Func::Exp => a.exp(),
                    Func::Pow2 => a.exp2(),
                    Func::Log => {
                        if a <= 0.0 {
                            return Err(ExprError::Undefined { what: "log of a non-positive number", j });
                        }
                        a.ln()
                    }
                }
            }
        };
        if v.is_nan() {
            Err(ExprError::Undefined { what: "expression", j })
        } else if v.is_infinite() {
            Err(ExprError::Overflow { j })
        } else {
            Ok(v)
        }
    }

    /// True if the expression does not mention `j`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Lit(_) => true,
            Expr::Index => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Bin(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    /// Symbolic limit as `j → +∞`.
    pub fn limit(&self) -> Limit {
        use Limit::*;
        match self {
            Expr::Lit(v) => Finite(*v),
            Expr::Index => PlusInfinity,
            Expr::Neg(a) => a.limit().neg(),
            Expr::Call(f, a) => {
                let base = match f {
                    Func::Exp => std::f64::consts::E,
                    Func::Pow2 => 2.0,
                    Func::Log => {
                        return match a.limit() {
                            PlusInfinity => PlusInfinity,
                            Finite(v) if v > 0.0 => Finite(v.ln()),
                            _ => Unknown,
                        }
                    }
                };
                Limit::pow(Finite(base), a.limit())
            }
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.limit(), b.limit());
                match op {
                    BinOp::Add => Limit::add(a, b),
                    BinOp::Sub => Limit::add(a, b.neg()),
                    BinOp::Mul => Limit::mul(a, b),
                    BinOp::Div => Limit::div(a, b),
                    BinOp::Pow => Limit::pow(a, b),
                }
            }
        }
    }
}

/// Outcome of the symbolic limit analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limit {
    PlusInfinity,
    MinusInfinity,
    Finite(f64),
    Unknown,
}

impl Limit {
    fn neg(self) -> Self {
        match self {
            Limit::PlusInfinity => Limit::MinusInfinity,
            Limit::MinusInfinity => Limit::PlusInfinity,
            Limit::Finite(v) => Limit::Finite(-v),
            Limit::Unknown => Limit::Unknown,
        }
    }

    fn sign(self) -> Option<f64> {
        match self {
            Limit::PlusInfinity => Some(1.0),
            Limit::MinusInfinity => Some(-1.0),
            _ => None,
        }
    }

    fn add(a: Self, b: Self) -> Self {
        use Limit::*;
        match (a, b) {
            (Finite(x), Finite(y)) => Finite(x + y),
            (Unknown, _) | (_, Unknown) => Unknown,
            (PlusInfinity, MinusInfinity) | (MinusInfinity, PlusInfinity) => Unknown,
            (PlusInfinity, _) | (_, PlusInfinity) => PlusInfinity,
            (MinusInfinity, _) | (_, MinusInfinity) => MinusInfinity,
        }
    }

    fn from_sign(s: f64) -> Self {
        if s > 0.0 {
            Limit::PlusInfinity
        } else {
            Limit::MinusInfinity
        }
    }

    fn mul(a: Self, b: Self) -> Self {
        use Limit::*;
        match (a, b) {
            (Finite(x), Finite(y)) => Finite(x * y),
            (Unknown, _) | (_, Unknown) => Unknown,
            (Finite(x), inf) | (inf, Finite(x)) => {
                if x == 0.0 {
                    Unknown
                } else {
                    Limit::from_sign(x.signum() * inf.sign().unwrap_or(0.0))
                }
            }
            (x, y) => Limit::from_sign(x.sign().unwrap_or(0.0) * y.sign().unwrap_or(0.0)),
        }
    }

    fn div(a: Self, b: Self) -> Self {
        use Limit::*;
        match (a, b) {
            (Finite(x), Finite(y)) if y != 0.0 => Finite(x / y),
            (Finite(_), PlusInfinity | MinusInfinity) => Finite(0.0),
            (PlusInfinity | MinusInfinity, Finite(y)) if y != 0.0 => Limit::from_sign(a.sign().unwrap_or(0.0) * y.signum()),
            _ => Unknown,
        }
    }

    fn pow(base: Self, exponent: Self) -> Self {
        use Limit::*;
        match (base, exponent) {
            (Finite(a), Finite(b)) => {
                let v = a.powf(b);
                if v.is_finite() {
                    Finite(v)
                } else {
                    Unknown
                }
            }
            (Finite(a), PlusInfinity) if a > 1.0 => PlusInfinity,
            (Finite(a), PlusInfinity) if (0.0..1.0).contains(&a) => Finite(0.0),
            (Finite(a), MinusInfinity) if a > 1.0 => Finite(0.0),
            (Finite(a), MinusInfinity) if a > 0.0 && a < 1.0 => PlusInfinity,
            (PlusInfinity, Finite(b)) if b > 0.0 => PlusInfinity,
            (PlusInfinity, Finite(b)) if b < 0.0 => Finite(0.0),
            (PlusInfinity, PlusInfinity) => PlusInfinity,
            (PlusInfinity, MinusInfinity) => Finite(0.0),
            _ => Unknown,
        }
    }
}

// ---------------------------------------------------------------------------
// printing

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // overflowing literals parse to infinity; print one back
            Expr::Lit(v) if v.is_infinite() => write!(f, "{}1e999", if *v < 0.0 { "-" } else { "" }),
            // shortest round-tripping form
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Index => write!(f, "j"),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {sym} {b})")
            }
        }
    }
}

// ---------------------------------------------------------------------------
// parsing

#[derive(Debug, Clone, PartialEq, Error)]
#[error("at offset {offset}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    /// Byte offset into the parsed text.
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "identifier '{s}'"),
            Tok::Sym(c) => write!(f, "'{c}'"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    /// Returns the next token and its starting offset without consuming it.
    fn peek(&mut self) -> Result<(Tok, usize, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let Some(c) = rest.chars().next() else {
            return Ok((Tok::End, start, start));
        };
        if c.is_ascii_digit() || c == '.' {
            let mut end = 0;
            let bytes = rest.as_bytes();
            while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                end += 1;
            }
            if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                let mut k = end + 1;
                if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                    k += 1;
                }
                if k < bytes.len() && bytes[k].is_ascii_digit() {
                    while k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                    }
                    end = k;
                }
            }
            let text = &rest[..end];
            let v: f64 = text.parse().map_err(|_| ParseError {
                offset: start,
                expected: vec!["number"],
                found: format!("'{text}'"),
            })?;
            return Ok((Tok::Num(v), start, start + end));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let end = rest
                .char_indices()
                .find(|(_, ch)| !(ch.is_ascii_alphanumeric() || *ch == '_'))
                .map_or(rest.len(), |(i, _)| i);
            return Ok((Tok::Ident(rest[..end].to_string()), start, start + end));
        }
        Ok((Tok::Sym(c), start, start + c.len_utf8()))
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        let (t, start, end) = self.peek()?;
        self.pos = end;
        Ok((t, start))
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, offset: usize, expected: Vec<&'static str>, found: &Tok) -> Result<T, ParseError> {
        Err(ParseError { offset, expected, found: found.to_string() })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let (t, _, _) = self.lex.peek()?;
            let op = match t {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.lex.next()?;
            let rhs = self.term()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let (t, _, _) = self.lex.peek()?;
            let op = match t {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.lex.next()?;
            let rhs = self.factor()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if let (Tok::Sym('^'), _, _) = self.lex.peek()? {
            self.lex.next()?;
            let exponent = self.factor()?;
            return Ok(Expr::bin(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let (t, at) = self.lex.next()?;
        match t {
            Tok::Num(v) => Ok(Expr::Lit(v)),
            Tok::Ident(ref s) if s == "j" => Ok(Expr::Index),
            Tok::Ident(ref s) => {
                let func = match s.as_str() {
                    "exp" => Func::Exp,
                    "log" => Func::Log,
                    "pow2" => Func::Pow2,
                    _ => return self.err(at, vec!["number", "'j'", "exp", "log", "pow2", "'('", "'-'"], &t),
                };
                self.expect('(')?;
                let arg = self.expr()?;
                self.expect(')')?;
                Ok(Expr::call(func, arg))
            }
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Sym('-') => {
                if let (Tok::Num(v), _, _) = self.lex.peek()? {
                    self.lex.next()?;
                    return Ok(Expr::Lit(-v));
                }
                Ok(Expr::neg(self.base()?))
            }
            other => self.err(at, vec!["number", "'j'", "exp", "log", "pow2", "'('", "'-'"], &other),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        let (t, at) = self.lex.next()?;
        if t == Tok::Sym(c) {
            Ok(())
        } else {
            let expected = match c {
                '(' => "'('",
                ')' => "')'",
                _ => "symbol",
            };
            self.err(at, vec![expected], &t)
        }
    }
}

/// Parses a complete expression; trailing input is an error.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { lex: Lexer { src, pos: 0 } };
    let e = p.expr()?;
    let (t, at) = p.lex.next()?;
    if t != Tok::End {
        return p.err(at, vec!["operator", "end of input"], &t);
    }
    Ok(e)
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expr(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expr("1 + 2 * 3 ^ 2 ^ 0.5").unwrap();
        let expected = 1.0 + 2.0 * 3f64.powf(2f64.powf(0.5));
        assert_eq!(e.eval(0.0).unwrap(), expected);
        assert_eq!(parse_expr("8 - 2 - 1").unwrap().eval(0.0).unwrap(), 5.0);
        assert_eq!(parse_expr("8 / 2 / 2").unwrap().eval(0.0).unwrap(), 2.0);
    }

    #[test]
    fn radius_of_the_ball_chain() {
        // r_j = 2^{-8^j}
        let e = parse_expr("pow2(-(8^j))").unwrap();
        let expected = Expr::call(Func::Pow2, Expr::neg(Expr::lit(8.0).pow(Expr::Index)));
        assert_eq!(e, expected);
        assert_eq!(e.eval(1.0).unwrap(), 2f64.powi(-8));
        assert_eq!(e.eval(2.0).unwrap(), 2f64.powi(-64));
    }

    #[test]
    fn unary_minus_binds_to_base() {
        assert_eq!(parse_expr("-3").unwrap(), Expr::Lit(-3.0));
        assert_eq!(parse_expr("-j").unwrap(), Expr::neg(Expr::Index));
        assert_eq!(parse_expr("2*-j").unwrap().eval(3.0).unwrap(), -6.0);
    }

    #[test]
    fn overflowing_literals_print_back() {
        let e = parse_expr("-1e400 + j").unwrap();
        assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn errors_carry_position_and_expectations() {
        let err = parse_expr("1 + * 2").unwrap_err();
        assert_eq!(err.offset, 4);
        assert!(err.expected.contains(&"number"));
        let err = parse_expr("sin(j)").unwrap_err();
        assert_eq!(err.offset, 0);
        let err = parse_expr("(1 + 2").unwrap_err();
        assert_eq!(err.expected, vec!["')'"]);
        assert!(parse_expr("1 2").is_err());
    }

    #[test]
    fn evaluation_errors_are_typed() {
        assert!(matches!(parse_expr("log(0 - j)").unwrap().eval(1.0), Err(ExprError::Undefined { .. })));
        assert!(matches!(parse_expr("1/(j-1)").unwrap().eval(1.0), Err(ExprError::Undefined { .. })));
        assert!(matches!(parse_expr("pow2(4^j)").unwrap().eval(5.0), Err(ExprError::Overflow { .. })));
    }

    #[test]
    fn limits() {
        assert_eq!(parse_expr("0.75*pow2(4^j)").unwrap().limit(), Limit::PlusInfinity);
        assert_eq!(parse_expr("pow2(-(8^j))").unwrap().limit(), Limit::Finite(0.0));
        assert_eq!(parse_expr("exp(-(2^j))").unwrap().limit(), Limit::Finite(0.0));
        assert_eq!(parse_expr("j - j").unwrap().limit(), Limit::Unknown);
        assert_eq!(parse_expr("3").unwrap().limit(), Limit::Finite(3.0));
        assert_eq!(parse_expr("1/j").unwrap().limit(), Limit::Finite(0.0));
        assert_eq!(parse_expr("log(j)").unwrap().limit(), Limit::PlusInfinity);
        assert_eq!(parse_expr("-(j^2)").unwrap().limit(), Limit::MinusInfinity);
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-1e3f64..1e3).prop_map(Expr::Lit),
            Just(Expr::Index),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Expr::neg),
                (inner.clone(), inner.clone(), 0..5usize).prop_map(|(a, b, k)| {
                    let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow][k];
                    Expr::bin(op, a, b)
                }),
                (inner, 0..3usize).prop_map(|(a, k)| Expr::call([Func::Exp, Func::Log, Func::Pow2][k], a)),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let printed = e.to_string();
            prop_assert_eq!(parse_expr(&printed).unwrap(), e);
        }

        #[test]
        fn evaluation_is_referentially_transparent(e in arb_expr(), j in 0u32..12) {
            let a = e.eval(j as f64);
            let b = e.eval(j as f64);
            match (a, b) {
                (Ok(x), Ok(y)) => prop_assert_eq!(x.to_bits(), y.to_bits()),
                (x, y) => prop_assert_eq!(x, y),
            }
        }
    }
}
