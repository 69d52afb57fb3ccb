//! Arithmetic expressions over the state `x1, x2` and control `u1, u2`.
//!
//! Integrands, averaged constraints and implicit domains are all written in
//! this small language. Parsing is precedence climbing with the table
//!
//! | operator        | binding            |
//! |-----------------|--------------------|
//! | `^`             | tightest, right    |
//! | unary `-`       |                    |
//! | `*` `/`         | left               |
//! | `+` `-`         | loosest, left      |
//!
//! so `-x1^2` is `-(x1^2)`. Parsed expressions are compiled once into a stack
//! program; [`Expr::evaluate`] runs that program and never lets a NaN escape.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// The four variables an expression may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X1,
    X2,
    U1,
    U2,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X1 => "x1",
            Var::X2 => "x2",
            Var::U1 => "u1",
            Var::U2 => "u2",
        }
    }

    fn from_name(s: &str) -> Option<Var> {
        match s {
            "x1" => Some(Var::X1),
            "x2" => Some(Var::X2),
            "u1" => Some(Var::U1),
            "u2" => Some(Var::U2),
            _ => None,
        }
    }

    fn slot(self) -> usize {
        match self {
            Var::X1 => 0,
            Var::X2 => 1,
            Var::U1 => 2,
            Var::U2 => 3,
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

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Sqrt,
    Sin,
    Cos,
    Exp,
    Min,
    Max,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }
}

/// Syntax tree node. `offset` is the byte position of the token that
/// produced the node; equality ignores it.
#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Const(f64),
    Pi,
    Var(Var),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Node {
    pub fn new(kind: NodeKind) -> Node {
        Node { kind, offset: 0 }
    }

    fn is_constant(&self) -> bool {
        match &self.kind {
            NodeKind::Const(_) | NodeKind::Pi => true,
            NodeKind::Var(_) => false,
            NodeKind::Neg(a) => a.is_constant(),
            NodeKind::Binary(_, a, b) => a.is_constant() && b.is_constant(),
            NodeKind::Call(_, args) => args.iter().all(Node::is_constant),
        }
    }

    fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        match &self.kind {
            NodeKind::Var(v) => f(*v),
            NodeKind::Const(_) | NodeKind::Pi => {}
            NodeKind::Neg(a) => a.visit_vars(f),
            NodeKind::Binary(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            NodeKind::Call(_, args) => args.iter().for_each(|a| a.visit_vars(f)),
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NodeKind::Const(c) => write!(f, "{c:?}"),
            NodeKind::Pi => f.write_str("pi"),
            NodeKind::Var(v) => f.write_str(v.name()),
            NodeKind::Neg(a) => write!(f, "(-{a})"),
            NodeKind::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            NodeKind::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Push(f64),
    Load(usize),
    Neg,
    Add,
    Sub,
    Mul,
    Div(usize),
    Pow(usize),
    Call1(Func, usize),
    Min,
    Max,
}

/// A parsed, compiled expression.
#[derive(Debug, Clone)]
pub struct Expr {
    root: Node,
    program: Vec<Op>,
    stack_depth: usize,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Expr> {
        parse(s)
    }
}

impl Expr {
    /// Builds an expression from a tree (programmatic construction).
    pub fn from_node(root: Node) -> Expr {
        let mut program = Vec::new();
        let mut depth = 0;
        let mut max_depth = 0;
        compile(&root, &mut program, &mut depth, &mut max_depth);
        Expr {
            root,
            program,
            stack_depth: max_depth,
        }
    }

    pub fn constant(c: f64) -> Expr {
        Expr::from_node(Node::new(NodeKind::Const(c)))
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// True when no variable appears.
    pub fn is_constant(&self) -> bool {
        self.root.is_constant()
    }

    /// True when `u1` or `u2` appears.
    pub fn uses_control(&self) -> bool {
        let mut hit = false;
        self.root
            .visit_vars(&mut |v| hit |= matches!(v, Var::U1 | Var::U2));
        hit
    }

    /// Evaluates at state `x` and control `u`.
    pub fn evaluate(&self, x: [f64; 2], u: [f64; 2]) -> Result<f64> {
        let vars = [x[0], x[1], u[0], u[1]];
        if self.stack_depth <= 32 {
            let mut stack = [0.0f64; 32];
            run(&self.program, &vars, &mut stack, self.root.offset)
        } else {
            let mut stack = vec![0.0f64; self.stack_depth];
            run(&self.program, &vars, &mut stack, self.root.offset)
        }
    }
}

fn compile(node: &Node, out: &mut Vec<Op>, depth: &mut usize, max_depth: &mut usize) {
    let mut push = |out: &mut Vec<Op>, op: Op, delta: isize| {
        out.push(op);
        *depth = (*depth as isize + delta) as usize;
        *max_depth = (*max_depth).max(*depth);
    };
    match &node.kind {
        NodeKind::Const(c) => push(out, Op::Push(*c), 1),
        NodeKind::Pi => push(out, Op::Push(PI), 1),
        NodeKind::Var(v) => push(out, Op::Load(v.slot()), 1),
        NodeKind::Neg(a) => {
            compile(a, out, depth, max_depth);
            out.push(Op::Neg);
        }
        NodeKind::Binary(op, a, b) => {
            compile(a, out, depth, max_depth);
            compile(b, out, depth, max_depth);
            let op = match op {
                BinOp::Add => Op::Add,
                BinOp::Sub => Op::Sub,
                BinOp::Mul => Op::Mul,
                BinOp::Div => Op::Div(node.offset),
                BinOp::Pow => Op::Pow(node.offset),
            };
            out.push(op);
            *depth -= 1;
        }
        NodeKind::Call(func, args) => {
            for a in args {
                compile(a, out, depth, max_depth);
            }
            match func {
                Func::Min => {
                    out.push(Op::Min);
                    *depth -= 1;
                }
                Func::Max => {
                    out.push(Op::Max);
                    *depth -= 1;
                }
                f => out.push(Op::Call1(*f, node.offset)),
            }
        }
    }
}

fn eval_err(offset: usize, msg: impl Into<String>) -> Error {
    Error::Eval {
        offset,
        msg: msg.into(),
    }
}

fn run(program: &[Op], vars: &[f64; 4], stack: &mut [f64], root_offset: usize) -> Result<f64> {
    let mut sp = 0usize;
    for op in program {
        match *op {
            Op::Push(c) => {
                stack[sp] = c;
                sp += 1;
            }
            Op::Load(k) => {
                stack[sp] = vars[k];
                sp += 1;
            }
            Op::Neg => stack[sp - 1] = -stack[sp - 1],
            Op::Call1(func, offset) => {
                let a = stack[sp - 1];
                stack[sp - 1] = match func {
                    Func::Abs => a.abs(),
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(eval_err(offset, format!("sqrt of negative value {a}")));
                        }
                        a.sqrt()
                    }
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => {
                        let v = a.exp();
                        if !v.is_finite() {
                            return Err(eval_err(offset, format!("exp overflow at {a}")));
                        }
                        v
                    }
                    Func::Min | Func::Max => unreachable!("binary functions compile to Min/Max"),
                };
            }
            _ => {
                sp -= 1;
                let b = stack[sp];
                let a = stack[sp - 1];
                stack[sp - 1] = match *op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Min => a.min(b),
                    Op::Max => a.max(b),
                    Op::Div(offset) => {
                        if b == 0.0 {
                            return Err(eval_err(offset, "division by zero"));
                        }
                        a / b
                    }
                    Op::Pow(offset) => {
                        let v = if b.fract() == 0.0 && b.abs() <= i32::MAX as f64 {
                            a.powi(b as i32)
                        } else {
                            a.powf(b)
                        };
                        if !v.is_finite() {
                            return Err(eval_err(
                                offset,
                                format!("{a} ^ {b} is not a finite real number"),
                            ));
                        }
                        v
                    }
                    _ => unreachable!(),
                };
            }
        }
    }
    debug_assert_eq!(sp, 1);
    let v = stack[0];
    if !v.is_finite() {
        return Err(eval_err(root_offset, format!("non-finite result {v}")));
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// Lexer and parser

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(Tok, usize)> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        if start == bytes.len() {
            return Ok((Tok::End, start));
        }
        let c = bytes[start] as char;
        if c.is_ascii_digit() || c == '.' {
            let mut end = start;
            while end < bytes.len() && ((bytes[end] as char).is_ascii_digit() || bytes[end] == b'.')
            {
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
            let text = &self.src[start..end];
            let v: f64 = text.parse().map_err(|_| Error::Syntax {
                offset: start,
                msg: format!("malformed number `{text}`"),
            })?;
            self.pos = end;
            return Ok((Tok::Num(v), start));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = start;
            while end < bytes.len() && ((bytes[end] as char).is_ascii_alphanumeric() || bytes[end] == b'_')
            {
                end += 1;
            }
            self.pos = end;
            return Ok((Tok::Ident(self.src[start..end].to_string()), start));
        }
        if "+-*/^(),".contains(c) {
            self.pos += 1;
            return Ok((Tok::Sym(c), start));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(Error::Syntax {
            offset: start,
            msg: format!("unexpected character `{ch}`"),
        })
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    offset: usize,
}

const UNARY_BP: u8 = 30;

fn infix_bp(c: char) -> Option<(u8, u8, BinOp)> {
    Some(match c {
        '+' => (10, 11, BinOp::Add),
        '-' => (10, 11, BinOp::Sub),
        '*' => (20, 21, BinOp::Mul),
        '/' => (20, 21, BinOp::Div),
        '^' => (41, 40, BinOp::Pow),
        _ => return None,
    })
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<()> {
        let (tok, offset) = self.lexer.next()?;
        self.tok = tok;
        self.offset = offset;
        Ok(())
    }

    fn syntax(&self, msg: impl Into<String>) -> Error {
        Error::Syntax {
            offset: self.offset,
            msg: msg.into(),
        }
    }

    fn expr_bp(&mut self, min_bp: u8) -> Result<Node> {
        let mut lhs = self.prefix()?;
        loop {
            let c = match self.tok {
                Tok::Sym(c) => c,
                Tok::End => break,
                _ => return Err(self.syntax("expected an operator")),
            };
            let Some((l_bp, r_bp, op)) = infix_bp(c) else {
                break;
            };
            if l_bp < min_bp {
                break;
            }
            let offset = self.offset;
            self.bump()?;
            let rhs = self.expr_bp(r_bp)?;
            if op == BinOp::Pow && !rhs.is_constant() {
                return Err(Error::Syntax {
                    offset: rhs.offset,
                    msg: "exponent must be a constant".into(),
                });
            }
            lhs = Node {
                kind: NodeKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                offset,
            };
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Node> {
        let offset = self.offset;
        match std::mem::replace(&mut self.tok, Tok::End) {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Node {
                    kind: NodeKind::Const(v),
                    offset,
                })
            }
            Tok::Sym('-') => {
                self.bump()?;
                let a = self.expr_bp(UNARY_BP)?;
                Ok(Node {
                    kind: NodeKind::Neg(Box::new(a)),
                    offset,
                })
            }
            Tok::Sym('(') => {
                self.bump()?;
                let inner = self.expr_bp(0)?;
                if self.tok != Tok::Sym(')') {
                    return Err(self.syntax("expected `)`"));
                }
                self.bump()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump()?;
                if let Some(v) = Var::from_name(&name) {
                    return Ok(Node {
                        kind: NodeKind::Var(v),
                        offset,
                    });
                }
                if name == "pi" {
                    return Ok(Node {
                        kind: NodeKind::Pi,
                        offset,
                    });
                }
                let Some(func) = Func::from_name(&name) else {
                    return Err(Error::UnknownIdentifier { name, offset });
                };
                if self.tok != Tok::Sym('(') {
                    return Err(self.syntax(format!("expected `(` after `{name}`")));
                }
                self.bump()?;
                let mut args = Vec::new();
                if self.tok != Tok::Sym(')') {
                    loop {
                        args.push(self.expr_bp(0)?);
                        match self.tok {
                            Tok::Sym(',') => self.bump()?,
                            Tok::Sym(')') => break,
                            _ => return Err(self.syntax("expected `,` or `)`")),
                        }
                    }
                }
                self.bump()?;
                if args.len() != func.arity() {
                    return Err(Error::Arity {
                        name,
                        expected: func.arity(),
                        got: args.len(),
                        offset,
                    });
                }
                Ok(Node {
                    kind: NodeKind::Call(func, args),
                    offset,
                })
            }
            Tok::End => Err(self.syntax("unexpected end of input")),
            Tok::Sym(c) => Err(self.syntax(format!("unexpected `{c}`"))),
        }
    }
}

/// Parses `text` into a compiled expression.
pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser {
        lexer: Lexer { src: text, pos: 0 },
        tok: Tok::End,
        offset: 0,
    };
    p.bump()?;
    if p.tok == Tok::End {
        return Err(p.syntax("empty expression"));
    }
    let root = p.expr_bp(0)?;
    if p.tok != Tok::End {
        return Err(p.syntax("trailing input"));
    }
    Ok(Expr::from_node(root))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(v: Var) -> Node {
        Node::new(NodeKind::Var(v))
    }
    fn num(c: f64) -> Node {
        Node::new(NodeKind::Const(c))
    }
    fn bin(op: BinOp, a: Node, b: Node) -> Node {
        Node::new(NodeKind::Binary(op, Box::new(a), Box::new(b)))
    }

    #[test]
    fn parses_cheeger_integrand() {
        let e = parse("x1*u2").unwrap();
        assert_eq!(e.root(), &bin(BinOp::Mul, var(Var::X1), var(Var::U2)));
    }

    #[test]
    fn parses_scalar_example_integrand() {
        let e = parse("1 - x1 - x1^2").unwrap();
        let expected = bin(
            BinOp::Sub,
            bin(BinOp::Sub, num(1.0), var(Var::X1)),
            bin(BinOp::Pow, var(Var::X1), num(2.0)),
        );
        assert_eq!(e.root(), &expected);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = parse("-x1^2").unwrap();
        let expected = Node::new(NodeKind::Neg(Box::new(bin(
            BinOp::Pow,
            var(Var::X1),
            num(2.0),
        ))));
        assert_eq!(e.root(), &expected);
        assert_eq!(e.evaluate([3.0, 0.0], [0.0; 2]).unwrap(), -9.0);
    }

    #[test]
    fn power_is_right_associative() {
        let e = parse("2^3^2").unwrap();
        assert_eq!(e.evaluate([0.0; 2], [0.0; 2]).unwrap(), 512.0);
        let e = parse("2^-1").unwrap();
        assert_eq!(e.evaluate([0.0; 2], [0.0; 2]).unwrap(), 0.5);
    }

    #[test]
    fn unary_minus_binds_tighter_than_product() {
        // (-2)*3 and -(2*3) agree numerically, so check the tree shape.
        let e = parse("-x1*x2").unwrap();
        assert!(matches!(e.root().kind, NodeKind::Binary(BinOp::Mul, _, _)));
    }

    #[test]
    fn evaluates_examples() {
        let e = parse("x1*u2").unwrap();
        assert_eq!(e.evaluate([2.0, 0.0], [0.0, 1.0]).unwrap(), 2.0);
        let e = parse("(x1^2+x2^2)^2 - x1^3").unwrap();
        assert!((e.evaluate([0.5, 0.0], [0.0; 2]).unwrap() + 0.0625).abs() < 1e-15);
        let e = parse("abs(x1)").unwrap();
        assert_eq!(e.evaluate([-3.0, 0.0], [0.0; 2]).unwrap(), 3.0);
        let e = parse("max(x1, x2) + min(u1, u2) + 2*pi").unwrap();
        let v = e.evaluate([1.0, 2.0], [3.0, -1.0]).unwrap();
        assert!((v - (2.0 - 1.0 + 2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn evaluation_errors_are_located() {
        let e = parse("1 / x1").unwrap();
        match e.evaluate([0.0, 0.0], [0.0; 2]) {
            Err(Error::Eval { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("expected eval error, got {other:?}"),
        }
        let e = parse("x2 + sqrt(x1)").unwrap();
        match e.evaluate([-1.0, 0.0], [0.0; 2]) {
            Err(Error::Eval { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("expected eval error, got {other:?}"),
        }
        let e = parse("x1 ^ 0.5").unwrap();
        assert!(e.evaluate([-1.0, 0.0], [0.0; 2]).is_err());
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse(""), Err(Error::Syntax { .. })));
        assert!(matches!(parse("x1 +"), Err(Error::Syntax { offset: 4, .. })));
        assert!(matches!(parse("x1 x2"), Err(Error::Syntax { offset: 3, .. })));
        assert!(matches!(parse("(x1"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("x1 # 2"), Err(Error::Syntax { offset: 3, .. })));
        assert!(matches!(parse("2x1"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("x1^x2"), Err(Error::Syntax { .. })));
        assert!(matches!(
            parse("y + 1"),
            Err(Error::UnknownIdentifier { offset: 0, .. })
        ));
        assert!(matches!(
            parse("min(x1)"),
            Err(Error::Arity {
                expected: 2,
                got: 1,
                ..
            })
        ));
        assert!(matches!(parse("sqrt(x1, x2)"), Err(Error::Arity { .. })));
    }

    #[test]
    fn display_reparses_identically() {
        for src in [
            "x1*u2",
            "1 - x1 - x1^2",
            "-x1^2",
            "(x1^2+x2^2)^2 - x1^3",
            "max(abs(x1), -sqrt(x2 + 1e-7)) / exp(-pi)",
            "2^-1^2",
        ] {
            let e = parse(src).unwrap();
            let printed = e.to_string();
            let again = parse(&printed).unwrap();
            assert_eq!(e, again, "{src} -> {printed}");
        }
    }

    #[test]
    fn detects_control_use() {
        assert!(parse("x1*u2").unwrap().uses_control());
        assert!(!parse("x1*x2").unwrap().uses_control());
        assert!(parse("3*pi").unwrap().is_constant());
    }
}
