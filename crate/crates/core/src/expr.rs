//! A small expression language for custom `F²` rules, evaluated generically
//! over [`Scalar`] so custom metrics get exact jets like the built-ins.
//!
//! Grammar (usual precedence, `^` binds tightest and is right-associative):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'pi' | ident | ident '(' args ')' | '(' expr ')'
//! ```
//!
//! Scalars `x1..xn` and `y1..yn` are the chart coordinates and the fiber
//! components (1-based). The vectors `x` and `y` may appear as arguments of
//! `dot(a, b)` and `norm2(a)`. Unary functions: `sqrt`, `exp`, `ln`, `sin`,
//! `cos`.

use std::sync::Arc;

use thiserror::Error;

use crate::ad::{DynRule, Jet, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("unexpected character {ch:?} at offset {pos}")]
    Character { ch: char, pos: usize },
    #[error("unexpected {found} at offset {pos}, expected {expected}")]
    Syntax {
        found: String,
        expected: &'static str,
        pos: usize,
    },
    #[error("unknown identifier {name:?} at offset {pos}")]
    Unknown { name: String, pos: usize },
    #[error("{name:?} at offset {pos} is out of range for dimension {dim}")]
    Range { name: String, pos: usize, dim: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum VecVar {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sqrt,
    Exp,
    Ln,
    Sin,
    Cos,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    X(usize),
    Y(usize),
    Dot(VecVar, VecVar),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == '.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == 'e' || bytes[i] == 'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == '+' || bytes[j] == '-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = bytes[start..i].iter().collect();
            let v = text.parse().map_err(|_| ExprError::Syntax {
                found: text.clone(),
                expected: "a number",
                pos: start,
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(bytes[start..i].iter().collect()), start));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Sym(c), i));
            i += 1;
        } else {
            return Err(ExprError::Character { ch: c, pos: i });
        }
    }
    out.push((Tok::End, bytes.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: &'static str) -> ExprError {
        let found = match self.peek() {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Sym(c) => format!("{c:?}"),
            Tok::End => "end of input".into(),
        };
        ExprError::Syntax {
            found,
            expected,
            pos: self.pos(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(match c {
                ')' => "')'",
                '(' => "'('",
                _ => "','",
            }))
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Sym('-') => {
                    self.bump();
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Sym('/') => {
                    self.bump();
                    lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if *self.peek() == Tok::Sym('^') {
            self.bump();
            return Ok(Node::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn vector_arg(&mut self) -> Result<VecVar, ExprError> {
        match self.bump() {
            (Tok::Ident(s), _) if s == "x" => Ok(VecVar::X),
            (Tok::Ident(s), _) if s == "y" => Ok(VecVar::Y),
            (tok, _) => {
                if tok != Tok::End {
                    self.at -= 1;
                }
                Err(self.error("the vector 'x' or 'y'"))
            }
        }
    }

    fn component(&self, name: &str, pos: usize) -> Result<Option<Node>, ExprError> {
        let (head, tail) = name.split_at(1);
        if (head == "x" || head == "y") && !tail.is_empty() && tail.bytes().all(|b| b.is_ascii_digit()) {
            let k: usize = tail.parse().unwrap_or(0);
            if k == 0 || k > self.dim {
                return Err(ExprError::Range {
                    name: name.into(),
                    pos,
                    dim: self.dim,
                });
            }
            return Ok(Some(if head == "x" { Node::X(k - 1) } else { Node::Y(k - 1) }));
        }
        Ok(None)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        match self.bump() {
            (Tok::Num(v), _) => Ok(Node::Num(v)),
            (Tok::Sym('('), _) => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            (Tok::Ident(name), pos) => {
                if name == "pi" {
                    return Ok(Node::Num(std::f64::consts::PI));
                }
                if let Some(node) = self.component(&name, pos)? {
                    return Ok(node);
                }
                let func = match name.as_str() {
                    "sqrt" => Some(Func::Sqrt),
                    "exp" => Some(Func::Exp),
                    "ln" => Some(Func::Ln),
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    _ => None,
                };
                match name.as_str() {
                    "dot" => {
                        self.expect('(')?;
                        let a = self.vector_arg()?;
                        self.expect(',')?;
                        let b = self.vector_arg()?;
                        self.expect(')')?;
                        Ok(Node::Dot(a, b))
                    }
                    "norm2" => {
                        self.expect('(')?;
                        let a = self.vector_arg()?;
                        self.expect(')')?;
                        Ok(Node::Dot(a, a))
                    }
                    _ => match func {
                        Some(f) => {
                            self.expect('(')?;
                            let arg = self.expr()?;
                            self.expect(')')?;
                            Ok(Node::Call(f, Box::new(arg)))
                        }
                        None => Err(ExprError::Unknown { name, pos }),
                    },
                }
            }
            (tok, _) => {
                if tok != Tok::End {
                    self.at -= 1;
                }
                Err(self.error("a number, variable, function call or '('"))
            }
        }
    }
}

impl Node {
    /// Value of a subtree free of variables.
    fn constant(&self) -> Option<f64> {
        Some(match self {
            Node::Num(v) => *v,
            Node::X(_) | Node::Y(_) | Node::Dot(..) => return None,
            Node::Neg(a) => -a.constant()?,
            Node::Add(a, b) => a.constant()? + b.constant()?,
            Node::Sub(a, b) => a.constant()? - b.constant()?,
            Node::Mul(a, b) => a.constant()? * b.constant()?,
            Node::Div(a, b) => a.constant()? / b.constant()?,
            Node::Pow(a, b) => a.constant()?.powf(b.constant()?),
            Node::Call(f, a) => {
                let v = a.constant()?;
                match f {
                    Func::Sqrt => v.sqrt(),
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                }
            }
        })
    }

    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        let pick = |v: VecVar| if v == VecVar::X { x } else { y };
        match self {
            Node::Num(v) => x[0].constant_like(*v),
            Node::X(i) => x[*i].clone(),
            Node::Y(i) => y[*i].clone(),
            Node::Dot(a, b) => crate::ad::dot(pick(*a), pick(*b)),
            Node::Neg(a) => -a.eval(x, y),
            Node::Add(a, b) => a.eval(x, y) + b.eval(x, y),
            Node::Sub(a, b) => a.eval(x, y) - b.eval(x, y),
            Node::Mul(a, b) => a.eval(x, y) * b.eval(x, y),
            Node::Div(a, b) => a.eval(x, y) / b.eval(x, y),
            Node::Pow(a, b) => {
                let base = a.eval(x, y);
                match b.constant() {
                    Some(p) if p.fract() == 0.0 && p.abs() <= 64.0 => base.powi(p as i32),
                    Some(p) => base.powf(p),
                    _ => (base.ln() * b.eval(x, y)).exp(),
                }
            }
            Node::Call(f, a) => {
                let v = a.eval(x, y);
                match f {
                    Func::Sqrt => v.sqrt(),
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                }
            }
        }
    }
}

/// A parsed scalar expression in `x1..xn, y1..yn`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    dim: usize,
    root: Node,
}

impl Expr {
    pub fn parse(src: &str, dim: usize) -> Result<Self, ExprError> {
        let mut p = Parser {
            toks: tokenize(src)?,
            at: 0,
            dim,
        };
        let root = p.expr()?;
        if *p.peek() != Tok::End {
            return Err(p.error("an operator or end of input"));
        }
        Ok(Self {
            source: src.to_string(),
            dim,
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        self.root.eval(x, y)
    }

    pub fn into_rule(self) -> Arc<dyn DynRule> {
        Arc::new(self)
    }
}

impl DynRule for Expr {
    fn eval_f64(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        vec![self.eval(x, y)]
    }

    fn eval_jet(&self, x: &[Jet], y: &[Jet]) -> Vec<Jet> {
        vec![self.eval(x, y)]
    }
}
