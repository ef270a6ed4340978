//! Declarative multi-tower architectures.
//!
//! An architecture is written as an expression over named inputs:
//!
//! * `H` — an input block passed through unchanged,
//! * `f4(X)` — four dense layers of the default width applied to `X`,
//!   `f[128,64](X)` — dense layers with explicit widths,
//! * `e(X, Y, ...)` — elementwise (Hadamard) product, equal widths required,
//! * `X | Y | ...` — horizontal concatenation.
//!
//! The expression output feeds the head: hidden dense layers followed by a
//! single sigmoid unit. `e(f1(H), f2(e(f4(S), f4(D))))` is a valid spec.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Elu,
}

impl Activation {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "elu" => Ok(Activation::Elu),
            other => Err(Error::Spec(format!("unknown activation `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Elu => "elu",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Input(String),
    /// Explicit widths; `None` entries take the spec's default width.
    Dense(Vec<Option<usize>>, Box<Expr>),
    Hadamard(Vec<Expr>),
    Concat(Vec<Expr>),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Input(name) => write!(f, "{name}"),
            Expr::Dense(widths, inner) => {
                if widths.iter().all(Option::is_none) {
                    write!(f, "f{}({inner})", widths.len())
                } else {
                    let ws: Vec<String> = widths
                        .iter()
                        .map(|w| w.map_or_else(|| "_".to_string(), |w| w.to_string()))
                        .collect();
                    write!(f, "f[{}]({inner})", ws.join(","))
                }
            }
            Expr::Hadamard(args) => {
                let parts: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                write!(f, "e({})", parts.join(","))
            }
            Expr::Concat(args) => {
                let parts: Vec<String> = args
                    .iter()
                    .map(|a| match a {
                        Expr::Concat(_) => format!("({a})"),
                        _ => a.to_string(),
                    })
                    .collect();
                write!(f, "{}", parts.join("|"))
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src,
            chars: src.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
        }
    }

    fn err(&self, msg: &str) -> Error {
        Error::Spec(format!("{msg} at position {} in `{}`", self.pos, self.src))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{c}`")))
        }
    }

    fn number(&mut self) -> Result<usize> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| self.err("expected a number"))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut parts = vec![self.term()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            parts.push(self.term()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Expr::Concat(parts) })
    }

    fn args(&mut self) -> Result<Vec<Expr>> {
        self.eat('(')?;
        let mut args = vec![self.expr()?];
        while self.peek() == Some(',') {
            self.pos += 1;
            args.push(self.expr()?);
        }
        self.eat(')')?;
        Ok(args)
    }

    fn term(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.eat(')')?;
                Ok(e)
            }
            Some('e') if self.chars.get(self.pos + 1) == Some(&'(') => {
                self.pos += 1;
                let args = self.args()?;
                if args.len() < 2 {
                    return Err(self.err("hadamard needs at least two operands"));
                }
                Ok(Expr::Hadamard(args))
            }
            Some('f') => {
                self.pos += 1;
                if self.peek() == Some('_') {
                    self.pos += 1;
                }
                let widths = if self.peek() == Some('[') {
                    self.pos += 1;
                    let mut ws = vec![Some(self.number()?)];
                    while self.peek() == Some(',') {
                        self.pos += 1;
                        ws.push(Some(self.number()?));
                    }
                    self.eat(']')?;
                    ws
                } else {
                    vec![None; self.number()?]
                };
                if widths.is_empty() || widths.contains(&Some(0)) {
                    return Err(self.err("dense stacks need at least one layer of positive width"));
                }
                let mut args = self.args()?;
                if args.len() != 1 {
                    return Err(self.err("dense stack takes one operand"));
                }
                Ok(Expr::Dense(widths, Box::new(args.pop().unwrap())))
            }
            Some(c) if c.is_ascii_uppercase() => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                    self.pos += 1;
                }
                Ok(Expr::Input(self.chars[start..self.pos].iter().collect()))
            }
            _ => Err(self.err("expected an input name, `e(`, `f<n>(` or `(`")),
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser::new(src);
        let e = p.expr()?;
        if p.pos != p.chars.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }

    /// Input names in order of first reference.
    pub fn inputs(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Input(n) => {
                    if !out.contains(n) {
                        out.push(n.clone());
                    }
                }
                Expr::Dense(_, inner) => walk(inner, out),
                Expr::Hadamard(a) | Expr::Concat(a) => a.iter().for_each(|x| walk(x, out)),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

/// A fully bound architecture: expression, input widths and layer sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerSpec {
    pub arch: Expr,
    pub inputs: Vec<(String, usize)>,
    pub activation: Activation,
    /// Width of dense layers without an explicit size.
    pub width: usize,
    /// Hidden head widths; a final one-unit sigmoid layer is always added.
    pub head: Vec<usize>,
}

pub const DEFAULT_WIDTH: usize = 64;
pub const DEFAULT_HEAD: [usize; 2] = [64, 16];

impl TowerSpec {
    pub fn new(arch: &str, inputs: &[(&str, usize)], activation: Activation, width: usize, head: &[usize]) -> Result<Self> {
        let spec = TowerSpec {
            arch: Expr::parse(arch)?,
            inputs: inputs.iter().map(|(n, d)| (n.to_string(), *d)).collect(),
            activation,
            width,
            head: head.to_vec(),
        };
        spec.output_dim()?;
        Ok(spec)
    }

    /// Logistic regression over the named blocks, concatenated in order.
    pub fn logistic(inputs: &[(&str, usize)]) -> Result<Self> {
        let arch: Vec<&str> = inputs.iter().map(|(n, _)| *n).collect();
        TowerSpec::new(&arch.join("|"), inputs, Activation::Relu, DEFAULT_WIDTH, &[])
    }

    pub fn input_dim(&self, name: &str) -> Option<usize> {
        self.inputs.iter().find(|(n, _)| n == name).map(|(_, d)| *d)
    }

    /// Width of the architecture output (the head's input). Checks that every
    /// referenced input is declared and that Hadamard operands agree.
    pub fn output_dim(&self) -> Result<usize> {
        if self.width == 0 || self.head.contains(&0) {
            return Err(Error::Spec("layer widths must be positive".into()));
        }
        for (name, dim) in &self.inputs {
            if *dim == 0 {
                return Err(Error::Spec(format!("input `{name}` has zero width")));
            }
        }
        self.dim_of(&self.arch)
    }

    fn dim_of(&self, e: &Expr) -> Result<usize> {
        match e {
            Expr::Input(n) => self
                .input_dim(n)
                .ok_or_else(|| Error::Spec(format!("input `{n}` is not declared"))),
            Expr::Dense(widths, inner) => {
                self.dim_of(inner)?;
                Ok(widths.last().copied().flatten().unwrap_or(self.width))
            }
            Expr::Hadamard(args) => {
                let dims = args.iter().map(|a| self.dim_of(a)).collect::<Result<Vec<_>>>()?;
                if dims.windows(2).any(|w| w[0] != w[1]) {
                    return Err(Error::Spec(format!("hadamard operands have different widths {dims:?} in `{e}`")));
                }
                Ok(dims[0])
            }
            Expr::Concat(args) => args.iter().map(|a| self.dim_of(a)).sum(),
        }
    }

    /// One-line description, e.g. `arch=e(S,D) inputs=S:64,D:64 ...`.
    pub fn describe(&self) -> String {
        let inputs: Vec<String> = self.inputs.iter().map(|(n, d)| format!("{n}:{d}")).collect();
        let head: Vec<String> = self.head.iter().map(|h| h.to_string()).collect();
        format!(
            "arch={} inputs={} activation={} width={} head={}",
            self.arch,
            inputs.join(","),
            self.activation.name(),
            self.width,
            head.join(",")
        )
    }
}
