//! Small arithmetic expression language for coefficient fields.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := ("-" | "+") unary | power
//! power   := primary ("^" unary)?          right associative
//! primary := number | variable | constant | func "(" args ")" | "(" expr ")"
//! ```
//!
//! Variables are `x1..xn`, `t` and `s`; constants `pi` and `e`; functions
//! `exp, ln, sin, cos, abs, pow(a, b), lnln`. Unary minus binds looser than
//! `^`, so `-2^2 = -4`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    /// Spatial coordinate, zero-based (`x1` is `X(0)`).
    X(usize),
    T,
    S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Abs,
    Pow,
    LnLn,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "abs" => Func::Abs,
            "pow" => Func::Pow,
            "lnln" => Func::LnLn,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
            Func::Pow => "pow",
            Func::LnLn => "lnln",
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

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// Evaluation point: spatial coordinates, time and solution value.
#[derive(Debug, Clone, Copy)]
pub struct Env<'a> {
    pub x: &'a [f64],
    pub t: f64,
    pub s: f64,
}

impl<'a> Env<'a> {
    pub fn new(x: &'a [f64], t: f64, s: f64) -> Self {
        Env { x, t, s }
    }
}

/// Which of the variable groups an expression reads.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Deps {
    pub x: bool,
    pub t: bool,
    pub s: bool,
}

/// A parsed, constant-folded expression.
#[derive(Debug, Clone)]
pub struct Expr {
    root: Node,
    deps: Deps,
    max_x: usize,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

fn domain_err(what: impl Into<String>) -> Error {
    Error::EvalDomain(what.into())
}

fn checked(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain_err(format!("{what} produced a non-finite value")))
    }
}

fn lnln(v: f64) -> Result<f64> {
    if v > 1.0 {
        checked(v.ln().ln(), "lnln")
    } else {
        Err(domain_err(format!("lnln requires an argument > 1, got {v}")))
    }
}

fn apply_pow(a: f64, b: f64) -> Result<f64> {
    if a == 0.0 && b < 0.0 {
        return Err(domain_err("zero raised to a negative power"));
    }
    let v = a.powf(b);
    if v.is_nan() {
        return Err(domain_err(format!("{a} ^ {b} is undefined")));
    }
    checked(v, "power")
}

impl Node {
    fn eval(&self, env: &Env) -> Result<f64> {
        match self {
            Node::Num(v) => Ok(*v),
            Node::Var(Var::X(i)) => env
                .x
                .get(*i)
                .copied()
                .ok_or_else(|| Error::UnknownVariable(format!("x{}", i + 1))),
            Node::Var(Var::T) => Ok(env.t),
            Node::Var(Var::S) => Ok(env.s),
            Node::Neg(a) => Ok(-a.eval(env)?),
            Node::Bin(op, a, b) => {
                let a = a.eval(env)?;
                let b = b.eval(env)?;
                match op {
                    BinOp::Add => checked(a + b, "addition"),
                    BinOp::Sub => checked(a - b, "subtraction"),
                    BinOp::Mul => checked(a * b, "multiplication"),
                    BinOp::Div => {
                        if b == 0.0 {
                            Err(domain_err("division by zero"))
                        } else {
                            checked(a / b, "division")
                        }
                    }
                    BinOp::Pow => apply_pow(a, b),
                }
            }
            Node::Call(f, args) => {
                let a = args[0].eval(env)?;
                match f {
                    Func::Exp => checked(a.exp(), "exp"),
                    Func::Ln => {
                        if a > 0.0 {
                            Ok(a.ln())
                        } else {
                            Err(domain_err(format!("ln of non-positive value {a}")))
                        }
                    }
                    Func::Sin => Ok(a.sin()),
                    Func::Cos => Ok(a.cos()),
                    Func::Abs => Ok(a.abs()),
                    Func::Pow => apply_pow(a, args[1].eval(env)?),
                    Func::LnLn => lnln(a),
                }
            }
        }
    }

    fn collect(&self, deps: &mut Deps, max_x: &mut usize) {
        match self {
            Node::Num(_) => {}
            Node::Var(Var::X(i)) => {
                deps.x = true;
                *max_x = (*max_x).max(i + 1);
            }
            Node::Var(Var::T) => deps.t = true,
            Node::Var(Var::S) => deps.s = true,
            Node::Neg(a) => a.collect(deps, max_x),
            Node::Bin(_, a, b) => {
                a.collect(deps, max_x);
                b.collect(deps, max_x);
            }
            Node::Call(_, args) => args.iter().for_each(|a| a.collect(deps, max_x)),
        }
    }

    fn is_const(&self) -> bool {
        let mut deps = Deps::default();
        let mut m = 0;
        self.collect(&mut deps, &mut m);
        deps == Deps::default()
    }

    /// Replace variable-free subtrees by their value when that value is
    /// well defined; undefined subtrees are kept so the error surfaces at
    /// evaluation time.
    fn fold(self) -> Node {
        let node = match self {
            Node::Neg(a) => Node::Neg(Box::new(a.fold())),
            Node::Bin(op, a, b) => Node::Bin(op, Box::new(a.fold()), Box::new(b.fold())),
            Node::Call(f, args) => Node::Call(f, args.into_iter().map(Node::fold).collect()),
            other => other,
        };
        if !matches!(node, Node::Num(_)) && node.is_const() {
            if let Ok(v) = node.eval(&Env::new(&[], 0.0, 0.0)) {
                return Node::Num(v);
            }
        }
        node
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => {
                write!(f, "(-{:?})", -v)
            }
            Node::Num(v) => write!(f, "{v:?}"),
            Node::Var(Var::X(i)) => write!(f, "x{}", i + 1),
            Node::Var(Var::T) => write!(f, "t"),
            Node::Var(Var::S) => write!(f, "s"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {sym} {b})")
            }
            Node::Call(func, args) => {
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

impl Expr {
    /// Parse and constant-fold `source`.
    pub fn parse(source: &str) -> Result<Expr> {
        let mut p = Parser::new(source)?;
        let root = p.expr()?;
        p.expect_end()?;
        Ok(Expr::from_node(root))
    }

    pub fn constant(v: f64) -> Expr {
        Expr::from_node(Node::Num(v))
    }

    /// Wrap (and constant-fold) a syntax tree.
    pub fn from_node(root: Node) -> Expr {
        Expr::from_folded(root.fold())
    }

    /// Product `self * other`.
    pub fn times(&self, other: &Expr) -> Expr {
        Expr::from_node(Node::Bin(
            BinOp::Mul,
            Box::new(self.root.clone()),
            Box::new(other.root.clone()),
        ))
    }

    /// `-s * self`, the multiplicative drift form `B(x,t,s) = -s B0(x,t)`.
    pub fn times_minus_s(&self) -> Expr {
        Expr::from_node(Node::Bin(
            BinOp::Mul,
            Box::new(Node::Neg(Box::new(Node::Var(Var::S)))),
            Box::new(self.root.clone()),
        ))
    }

    fn from_folded(root: Node) -> Expr {
        let mut deps = Deps::default();
        let mut max_x = 0;
        root.collect(&mut deps, &mut max_x);
        Expr { root, deps, max_x }
    }

    pub fn node(&self) -> &Node {
        &self.root
    }

    pub fn eval(&self, env: &Env) -> Result<f64> {
        self.root.eval(env)
    }

    /// Evaluate at `(x, t, s)`.
    pub fn at(&self, x: &[f64], t: f64, s: f64) -> Result<f64> {
        self.root.eval(&Env::new(x, t, s))
    }

    /// Evaluate a function of time only.
    pub fn at_t(&self, t: f64) -> Result<f64> {
        self.root.eval(&Env::new(&[], t, 0.0))
    }

    pub fn deps(&self) -> Deps {
        self.deps
    }

    /// The value if the expression reads no variables.
    pub fn as_constant(&self) -> Option<f64> {
        match self.root {
            Node::Num(v) => Some(v),
            _ => None,
        }
    }

    /// Check that only `x1..x{dim}`, `t` and (when allowed) `s` occur.
    pub fn validate(&self, dim: usize, allow_x: bool, allow_s: bool) -> Result<()> {
        if self.max_x > dim || (self.deps.x && !allow_x) {
            return Err(Error::UnknownVariable(format!(
                "x{} (admissible spatial variables: {})",
                self.max_x,
                if allow_x {
                    format!("x1..x{dim}")
                } else {
                    "none".into()
                }
            )));
        }
        if self.deps.s && !allow_s {
            return Err(Error::UnknownVariable(
                "s (this coefficient may not depend on the solution)".into(),
            ));
        }
        Ok(())
    }

    /// Fully parenthesized canonical form; reparsing it yields an
    /// expression with identical values.
    pub fn canonical(&self) -> String {
        self.root.to_string()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Expr> {
        Expr::parse(s)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.canonical())
    }
}

/// Accepts either an expression string or a bare JSON number.
impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Expr, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Num(f64),
            Text(String),
        }
        match Wire::deserialize(deserializer)? {
            Wire::Num(v) => Ok(Expr::constant(v)),
            Wire::Text(s) => Expr::parse(&s).map_err(serde::de::Error::custom),
        }
    }
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
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
}

fn parse_err(pos: usize, expected: &[&str], found: &Tok) -> Error {
    Error::Parse {
        pos,
        expected: expected.iter().map(|s| s.to_string()).collect(),
        found: found.to_string(),
    }
}

const OPERAND: &[&str] = &["number", "variable", "function", "(", "-"];

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
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
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| Error::Parse {
                pos: start,
                expected: vec!["number".into()],
                found: format!("`{text}`"),
            })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or(c);
            return Err(Error::Parse {
                pos: i,
                expected: vec!["operator".into(), "operand".into()],
                found: format!("`{ch}`"),
            });
        }
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

impl Parser {
    fn new(src: &str) -> Result<Self> {
        Ok(Parser {
            toks: tokenize(src)?,
            idx: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.idx].1
    }

    fn pos(&self) -> usize {
        self.toks[self.idx].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.idx].1.clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char, expected: &[&str]) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(parse_err(self.pos(), expected, self.peek()))
        }
    }

    fn expect_end(&self) -> Result<()> {
        if *self.peek() == Tok::End {
            Ok(())
        } else {
            Err(parse_err(
                self.pos(),
                &["+", "-", "*", "/", "^", "end of input"],
                self.peek(),
            ))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat('-') {
            Ok(Node::Neg(Box::new(self.unary()?)))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.eat('^') {
            let exp = self.unary()?;
            Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Node> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::Sym('(') => {
                let inner = self.expr()?;
                self.expect_sym(')', &[")", "+", "-", "*", "/", "^"])?;
                Ok(inner)
            }
            Tok::Ident(name) => self.identifier(pos, name),
            other => Err(parse_err(pos, OPERAND, &other)),
        }
    }

    fn identifier(&mut self, pos: usize, name: String) -> Result<Node> {
        if let Some(func) = Func::from_name(&name) {
            self.expect_sym('(', &["("])?;
            let mut args = vec![self.expr()?];
            while self.eat(',') {
                args.push(self.expr()?);
            }
            self.expect_sym(')', &[")", ","])?;
            if args.len() != func.arity() {
                return Err(Error::Parse {
                    pos,
                    expected: vec![format!("{} argument(s) to {}", func.arity(), name)],
                    found: format!("{} argument(s)", args.len()),
                });
            }
            return Ok(Node::Call(func, args));
        }
        match name.as_str() {
            "t" => Ok(Node::Var(Var::T)),
            "s" => Ok(Node::Var(Var::S)),
            "pi" => Ok(Node::Num(std::f64::consts::PI)),
            "e" => Ok(Node::Num(std::f64::consts::E)),
            _ => {
                if let Some(digits) = name.strip_prefix('x') {
                    if let Ok(k) = digits.parse::<usize>() {
                        if k >= 1 && !digits.starts_with('0') {
                            return Ok(Node::Var(Var::X(k - 1)));
                        }
                    }
                }
                Err(Error::UnknownVariable(name))
            }
        }
    }
}
