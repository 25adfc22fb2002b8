//! Small arithmetic expression language for custom norms and vierbein entries.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' exponent)?
//! exponent:= '-' exponent | power          (right associative)
//! atom    := number | name | name '(' sum (',' sum)* ')' | '(' sum ')'
//! ```
//!
//! Variables are `x1..xm` (base) and `y1..ym` (fiber); any other bare name
//! must be a declared parameter.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::jet::{DomainError, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// Base coordinate `x{i+1}`.
    X(usize),
    /// Fiber coordinate `y{i+1}`.
    Y(usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::Y(i) => write!(f, "y{}", i + 1),
        }
    }
}

impl Var {
    fn parse(name: &str) -> Option<Var> {
        let (kind, digits) = name.split_at(1);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
            return None;
        }
        let i: usize = digits.parse().ok()?;
        match kind {
            "x" => Some(Var::X(i - 1)),
            "y" => Some(Var::Y(i - 1)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Abs,
    Pow,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "abs" => Func::Abs,
            "pow" => Func::Pow,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Pow => "pow",
        }
    }

    fn arity(self) -> usize {
        if self == Func::Pow {
            2
        } else {
            1
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

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Num(f64),
    Var(Var),
    Param(String),
    Neg(Box<Expression>),
    Binary(BinOp, Box<Expression>, Box<Expression>),
    Call(Func, Vec<Expression>),
}

/// Fully parenthesized, so that `parse(e.to_string()) == e`.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Num(v) => write!(f, "{v:?}"),
            Expression::Var(v) => write!(f, "{v}"),
            Expression::Param(p) => write!(f, "{p}"),
            Expression::Neg(e) => write!(f, "(-{e})"),
            Expression::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expression::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("column {column}: unexpected character '{found}'")]
    Lexical { column: usize, found: char },
    #[error("column {column}: malformed number '{text}'")]
    Number { column: usize, text: String },
    #[error("column {column}: unknown variable {name}")]
    UnknownVariable { column: usize, name: String },
    #[error("column {column}: unknown identifier {name}")]
    UnknownIdentifier { column: usize, name: String },
    #[error("column {column}: {name} expects {expected} argument(s), got {found}")]
    Arity {
        column: usize,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("column {column}: expected {expected}")]
    Syntax { column: usize, expected: String },
    #[error("empty expression")]
    Empty,
}

impl ParseError {
    /// 1-based column of the failure, when the input was non-empty.
    pub fn column(&self) -> Option<usize> {
        match self {
            ParseError::Lexical { column, .. }
            | ParseError::Number { column, .. }
            | ParseError::UnknownVariable { column, .. }
            | ParseError::UnknownIdentifier { column, .. }
            | ParseError::Arity { column, .. }
            | ParseError::Syntax { column, .. } => Some(*column),
            ParseError::Empty => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("unbound {0}")]
    Unbound(String),
}

/// Names an expression may refer to.
#[derive(Debug, Clone, Default)]
pub struct Scope {
    pub vars: BTreeSet<Var>,
    pub params: BTreeSet<String>,
}

impl Scope {
    /// Fiber variables `y1..ym`.
    pub fn fiber(m: usize) -> Scope {
        Scope {
            vars: (0..m).map(Var::Y).collect(),
            params: BTreeSet::new(),
        }
    }

    /// Base variables `x1..xm`.
    pub fn base(m: usize) -> Scope {
        Scope {
            vars: (0..m).map(Var::X).collect(),
            params: BTreeSet::new(),
        }
    }

    pub fn with_params<I, S>(mut self, params: I) -> Scope
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.params.extend(params.into_iter().map(Into::into));
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
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
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse::<f64>().map_err(|_| ParseError::Number {
                column,
                text: s.clone(),
            })?;
            out.push((Tok::Num(v), column));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), column));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                _ => return Err(ParseError::Lexical { column, found: c }),
            };
            out.push((tok, column));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_column: usize,
    scope: &'a Scope,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_column, |(_, c)| *c)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ParseError::Syntax {
                column: self.column(),
                expected: what.to_string(),
            })
        }
    }

    fn sum(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.product()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.pos += 1;
            let rhs = self.product()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expression, ParseError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(Expression::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expression, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exponent = self.exponent()?;
            return Ok(Expression::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Expression, ParseError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(Expression::Neg(Box::new(self.exponent()?)));
        }
        self.power()
    }

    fn atom(&mut self) -> Result<Expression, ParseError> {
        let column = self.column();
        let Some((tok, _)) = self.toks.get(self.pos).cloned() else {
            return Err(ParseError::Syntax {
                column,
                expected: "operand".into(),
            });
        };
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Expression::Num(v)),
            Tok::LParen => {
                let e = self.sum()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.peek() == Some(&Tok::LParen) {
                    let Some(func) = Func::from_name(&name) else {
                        return Err(ParseError::UnknownIdentifier { column, name });
                    };
                    self.pos += 1;
                    let mut args = vec![self.sum()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        args.push(self.sum()?);
                    }
                    self.expect(Tok::RParen, "')'")?;
                    if args.len() != func.arity() {
                        return Err(ParseError::Arity {
                            column,
                            name,
                            expected: func.arity(),
                            found: args.len(),
                        });
                    }
                    return Ok(Expression::Call(func, args));
                }
                if let Some(var) = Var::parse(&name) {
                    if self.scope.vars.contains(&var) {
                        return Ok(Expression::Var(var));
                    }
                    if !self.scope.params.contains(&name) {
                        return Err(ParseError::UnknownVariable { column, name });
                    }
                }
                if self.scope.params.contains(&name) {
                    return Ok(Expression::Param(name));
                }
                if let Some(func) = Func::from_name(&name) {
                    return Err(ParseError::Arity {
                        column,
                        name,
                        expected: func.arity(),
                        found: 0,
                    });
                }
                Err(ParseError::UnknownIdentifier { column, name })
            }
            _ => Err(ParseError::Syntax {
                column,
                expected: "operand".into(),
            }),
        }
    }
}

/// Parses `text`, accepting only names declared in `scope`.
pub fn parse(text: &str, scope: &Scope) -> Result<Expression, ParseError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end_column: text.chars().count() + 1,
        scope,
    };
    let e = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(ParseError::Syntax {
            column: p.column(),
            expected: "operator or end of input".into(),
        });
    }
    Ok(e)
}

/// Variable values and parameter values for one evaluation.
pub struct Bindings<'a, S> {
    pub x: &'a [S],
    pub y: &'a [S],
    pub params: &'a BTreeMap<String, f64>,
}

fn domain(function: &str, argument: f64, e: &Expression) -> EvalError {
    EvalError::Domain(DomainError {
        function: function.to_string(),
        argument,
        expression: e.to_string(),
    })
}

impl Expression {
    /// Value when the expression references no variables.
    pub fn constant_value(&self, params: &BTreeMap<String, f64>) -> Option<f64> {
        if self.has_vars() {
            return None;
        }
        let b = Bindings::<f64> {
            x: &[],
            y: &[],
            params,
        };
        self.eval(&b).ok()
    }

    pub fn has_vars(&self) -> bool {
        match self {
            Expression::Var(_) => true,
            Expression::Num(_) | Expression::Param(_) => false,
            Expression::Neg(e) => e.has_vars(),
            Expression::Binary(_, a, b) => a.has_vars() || b.has_vars(),
            Expression::Call(_, args) => args.iter().any(Expression::has_vars),
        }
    }

    /// Variables referenced anywhere in the tree.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expression::Var(v) => {
                out.insert(*v);
            }
            Expression::Num(_) | Expression::Param(_) => {}
            Expression::Neg(e) => e.collect_vars(out),
            Expression::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expression::Call(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Bottom-up evaluation over reals or jets.
    pub fn eval<S: Scalar>(&self, b: &Bindings<'_, S>) -> Result<S, EvalError> {
        match self {
            Expression::Num(v) => Ok(S::from_f64(*v)),
            Expression::Var(v) => {
                let slot = match v {
                    Var::X(i) => b.x.get(*i),
                    Var::Y(i) => b.y.get(*i),
                };
                slot.cloned().ok_or_else(|| EvalError::Unbound(v.to_string()))
            }
            Expression::Param(p) => b
                .params
                .get(p)
                .map(|v| S::from_f64(*v))
                .ok_or_else(|| EvalError::Unbound(p.clone())),
            Expression::Neg(e) => Ok(-e.eval(b)?),
            Expression::Binary(op, lhs, rhs) => {
                if *op == BinOp::Pow {
                    return self.eval_pow(lhs, rhs, b);
                }
                let l = lhs.eval(b)?;
                let r = rhs.eval(b)?;
                Ok(match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r.re() == 0.0 {
                            return Err(domain("division", 0.0, self));
                        }
                        l / r
                    }
                    BinOp::Pow => unreachable!(),
                })
            }
            Expression::Call(func, args) => {
                if *func == Func::Pow {
                    return self.eval_pow(&args[0], &args[1], b);
                }
                let a = args[0].eval(b)?;
                let v = a.re();
                Ok(match func {
                    Func::Sqrt if v < 0.0 => return Err(domain("sqrt", v, self)),
                    Func::Sqrt if v == 0.0 => return Err(domain("sqrt", v, self)),
                    Func::Sqrt => a.sqrt(),
                    Func::Exp => a.exp(),
                    Func::Log if v <= 0.0 => return Err(domain("log", v, self)),
                    Func::Log => a.ln(),
                    Func::Abs if v == 0.0 => return Err(domain("abs", v, self)),
                    Func::Abs => a.abs(),
                    Func::Pow => unreachable!(),
                })
            }
        }
    }

    fn eval_pow<S: Scalar>(
        &self,
        base: &Expression,
        exponent: &Expression,
        b: &Bindings<'_, S>,
    ) -> Result<S, EvalError> {
        let x = base.eval(b)?;
        if let Some(p) = exponent.constant_value(b.params) {
            if p.fract() == 0.0 && p.abs() <= 64.0 {
                if p < 0.0 && x.re() == 0.0 {
                    return Err(domain("pow", 0.0, self));
                }
                return Ok(x.powi(p as i32));
            }
            if x.re() <= 0.0 {
                return Err(domain("pow", x.re(), self));
            }
            return Ok(x.powf(p));
        }
        let p = exponent.eval(b)?;
        if x.re() <= 0.0 {
            return Err(domain("pow", x.re(), self));
        }
        Ok((p * x.ln()).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::lift;
    use proptest::prelude::*;

    fn eval_f64(text: &str) -> f64 {
        let e = parse(text, &Scope::default()).unwrap();
        e.eval(&Bindings::<f64> {
            x: &[],
            y: &[],
            params: &BTreeMap::new(),
        })
        .unwrap()
    }

    #[test]
    fn precedence_fixtures() {
        assert_eq!(eval_f64("2+3*4"), 14.0);
        assert_eq!(eval_f64("2^3^2"), 512.0);
        assert_eq!(eval_f64("-2^2"), -4.0);
        assert_eq!(eval_f64("(2+3)*4"), 20.0);
        assert_eq!(eval_f64("8/4/2"), 1.0);
        assert_eq!(eval_f64("2^-1"), 0.5);
        assert_eq!(eval_f64("1.5e1 - 5"), 10.0);
        assert_eq!(eval_f64("pow(2, 10)"), 1024.0);
    }

    #[test]
    fn rational_power_parses() {
        let e = parse("(y1*y2*y3)^(2/3)", &Scope::fiber(3)).unwrap();
        let Expression::Binary(BinOp::Pow, _, exp) = &e else {
            panic!("expected power node, got {e:?}");
        };
        assert_eq!(exp.constant_value(&BTreeMap::new()), Some(2.0 / 3.0));
    }

    #[test]
    fn scope_errors_carry_columns() {
        let err = parse("y1*x1", &Scope::fiber(2)).unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownVariable {
                column: 4,
                name: "x1".into()
            }
        );
        assert_eq!(err.to_string(), "column 4: unknown variable x1");

        let err = parse("y1 + y3", &Scope::fiber(2)).unwrap_err();
        assert_eq!(err.column(), Some(6));
        let err = parse("y1 # 2", &Scope::fiber(2)).unwrap_err();
        assert_eq!(err, ParseError::Lexical { column: 4, found: '#' });
        let err = parse("sqrt(y1, y2)", &Scope::fiber(2)).unwrap_err();
        assert!(matches!(err, ParseError::Arity { column: 1, expected: 1, found: 2, .. }));
        let err = parse("foo(y1)", &Scope::fiber(2)).unwrap_err();
        assert!(matches!(err, ParseError::UnknownIdentifier { column: 1, .. }));
        let err = parse("(y1 + y2", &Scope::fiber(2)).unwrap_err();
        assert_eq!(err.column(), Some(9));
        let err = parse("y1 y2", &Scope::fiber(2)).unwrap_err();
        assert_eq!(err.column(), Some(4));
        assert_eq!(parse("   ", &Scope::fiber(2)).unwrap_err(), ParseError::Empty);
    }

    #[test]
    fn randers_with_parameter() {
        let scope = Scope::fiber(2).with_params(["b1"]);
        let e = parse("0.5*(sqrt(y1^2+y2^2)+b1*y1)^2", &scope).unwrap();
        let params = BTreeMap::from([("b1".to_string(), 0.25)]);
        let v = e
            .eval(&Bindings {
                x: &[],
                y: &[3.0, 4.0],
                params: &params,
            })
            .unwrap();
        assert!((v - 0.5 * (5.75f64).powi(2)).abs() < 1e-14);
        assert!(parse("0.5*(sqrt(y1^2+y2^2)+b1*y1)^2", &Scope::fiber(2)).is_err());
    }

    #[test]
    fn evaluation_examples() {
        let e = parse("y1+2*y2", &Scope::fiber(2)).unwrap();
        let v: f64 = e
            .eval(&Bindings {
                x: &[],
                y: &[1.0, 3.0],
                params: &BTreeMap::new(),
            })
            .unwrap();
        assert_eq!(v, 7.0);

        let e = parse("(y1*y2*y3)^(2/3)", &Scope::fiber(3)).unwrap();
        let params = BTreeMap::new();
        let v: f64 = e
            .eval(&Bindings {
                x: &[],
                y: &[1.0, 1.0, 1.0],
                params: &params,
            })
            .unwrap();
        assert_eq!(v, 1.0);
        let y = lift(&[1.0, 1.0, 1.0], 2).unwrap();
        let j = e
            .eval(&Bindings {
                x: &[],
                y: &y,
                params: &params,
            })
            .unwrap();
        assert_eq!(*j.value(), 1.0);
        assert!((j.partial(&[0, 1]) - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn domain_errors_name_subexpression() {
        let e = parse("sqrt(y1 - 2)", &Scope::fiber(1)).unwrap();
        let err = e
            .eval(&Bindings::<f64> {
                x: &[],
                y: &[1.0],
                params: &BTreeMap::new(),
            })
            .unwrap_err();
        match err {
            EvalError::Domain(d) => {
                assert_eq!(d.function, "sqrt");
                assert_eq!(d.argument, -1.0);
                assert!(d.expression.contains("y1"));
            }
            other => panic!("{other:?}"),
        }
        let e = parse("(y1)^(0.5)", &Scope::fiber(1)).unwrap();
        assert!(e
            .eval(&Bindings::<f64> {
                x: &[],
                y: &[-1.0],
                params: &BTreeMap::new()
            })
            .is_err());
        // integer powers accept negative bases
        let e = parse("y1^3", &Scope::fiber(1)).unwrap();
        let v: f64 = e
            .eval(&Bindings {
                x: &[],
                y: &[-2.0],
                params: &BTreeMap::new(),
            })
            .unwrap();
        assert_eq!(v, -8.0);
    }

    fn arb_expr() -> impl Strategy<Value = Expression> {
        let leaf = prop_oneof![
            (0.0f64..100.0).prop_map(Expression::Num),
            (0usize..3).prop_map(|i| Expression::Var(Var::Y(i))),
            (0usize..2).prop_map(|i| Expression::Var(Var::X(i))),
            Just(Expression::Param("k".into())),
        ];
        leaf.prop_recursive(4, 32, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expression::Neg(Box::new(e))),
                (
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Div),
                        Just(BinOp::Pow)
                    ],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, a, b)| Expression::Binary(op, Box::new(a), Box::new(b))),
                inner.clone().prop_map(|a| Expression::Call(Func::Exp, vec![a])),
                (inner.clone(), inner).prop_map(|(a, b)| Expression::Call(Func::Pow, vec![a, b])),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let scope = Scope {
                vars: [Var::Y(0), Var::Y(1), Var::Y(2), Var::X(0), Var::X(1)].into_iter().collect(),
                params: ["k".to_string()].into_iter().collect(),
            };
            let printed = e.to_string();
            let back = parse(&printed, &scope).unwrap();
            prop_assert_eq!(back, e);
        }

        #[test]
        fn real_and_jet_values_agree(a in 0.5f64..3.0, b in 0.5f64..3.0) {
            let e = parse("exp(y1/y2) * sqrt(y1^2 + y2) - log(y2)^3 / (1 + y1)", &Scope::fiber(2)).unwrap();
            let params = BTreeMap::new();
            let real: f64 = e.eval(&Bindings { x: &[], y: &[a, b], params: &params }).unwrap();
            let jets = lift(&[a, b], 3).unwrap();
            let jet = e.eval(&Bindings { x: &[], y: &jets, params: &params }).unwrap();
            prop_assert!((real - *jet.value()).abs() <= 1e-14 * real.abs().max(1.0));
        }
    }
}
