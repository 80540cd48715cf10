//! The scalar expression language used for Lagrangians, Hamiltonians and
//! vector-field components.
//!
//! Coordinates are written `q1..qn`, `v1..vn` (velocities, or the momentum
//! slot of a Hamiltonian chart) and `z1..zq` (action variables), all 1-based.
//! Any other identifier that is not a function name or `pi`/`e` is a named
//! parameter, resolved when the expression is bound to a model.

mod eval;
mod lexer;
mod parser;

use std::fmt;

pub use eval::{evaluate, BoundExpr};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse_expression;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoordKind {
    Q,
    V,
    Z,
}

impl CoordKind {
    pub fn prefix(self) -> char {
        match self {
            CoordKind::Q => 'q',
            CoordKind::V => 'v',
            CoordKind::Z => 'z',
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
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Tanh,
    Abs,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
        }
    }
}

/// Parsed expression tree. Trees are immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Constant(f64),
    CoordVar {
        kind: CoordKind,
        index: usize,
    },
    Param(String),
    Neg(Box<ExprAst>),
    Binary {
        op: BinOp,
        left: Box<ExprAst>,
        right: Box<ExprAst>,
    },
    Call {
        func: Func,
        arg: Box<ExprAst>,
    },
}

impl ExprAst {
    pub fn constant(v: f64) -> Self {
        ExprAst::Constant(v)
    }

    pub fn q(index: usize) -> Self {
        ExprAst::CoordVar {
            kind: CoordKind::Q,
            index,
        }
    }

    pub fn v(index: usize) -> Self {
        ExprAst::CoordVar {
            kind: CoordKind::V,
            index,
        }
    }

    pub fn z(index: usize) -> Self {
        ExprAst::CoordVar {
            kind: CoordKind::Z,
            index,
        }
    }

    pub fn binary(op: BinOp, left: ExprAst, right: ExprAst) -> Self {
        ExprAst::Binary {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// True when some coordinate variable of `kind` occurs in the tree.
    pub fn mentions(&self, kind: CoordKind) -> bool {
        match self {
            ExprAst::CoordVar { kind: k, .. } => *k == kind,
            ExprAst::Constant(_) | ExprAst::Param(_) => false,
            ExprAst::Neg(a) | ExprAst::Call { arg: a, .. } => a.mentions(kind),
            ExprAst::Binary { left, right, .. } => left.mentions(kind) || right.mentions(kind),
        }
    }

    /// True when the tree references no coordinates at all.
    pub fn is_coordinate_free(&self) -> bool {
        !(self.mentions(CoordKind::Q) || self.mentions(CoordKind::V) || self.mentions(CoordKind::Z))
    }

    fn precedence(&self) -> u8 {
        match self {
            ExprAst::Binary { op, .. } => op.precedence(),
            ExprAst::Neg(_) => 3,
            _ => 5,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &ExprAst, min_prec: u8) -> fmt::Result {
    if child.precedence() < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

fn write_constant(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c == std::f64::consts::PI {
        f.write_str("pi")
    } else if c == std::f64::consts::E {
        f.write_str("e")
    } else if c.is_infinite() {
        f.write_str("1e999")
    } else if c != 0.0 && !(1e-4..1e16).contains(&c.abs()) {
        write!(f, "{c:e}")
    } else {
        write!(f, "{c}")
    }
}

/// Prints with the minimum parentheses needed for the parser to rebuild the
/// same tree.
impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprAst::Constant(c) => write_constant(f, *c),
            ExprAst::CoordVar { kind, index } => write!(f, "{}{}", kind.prefix(), index),
            ExprAst::Param(name) => f.write_str(name),
            ExprAst::Neg(a) => {
                f.write_str("-")?;
                write_child(f, a, 3)
            }
            ExprAst::Call { func, arg } => write!(f, "{}({})", func.name(), arg),
            ExprAst::Binary { op, left, right } => {
                let p = op.precedence();
                let (lmin, rmin) = match op {
                    BinOp::Pow => (p + 1, p),
                    _ => (p, p + 1),
                };
                write_child(f, left, lmin)?;
                write!(f, " {} ", op.symbol())?;
                write_child(f, right, rmin)
            }
        }
    }
}

/// Errors raised while tokenizing or parsing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("illegal character '{character}' at position {position}")]
    IllegalCharacter { position: usize, character: char },
    #[error("syntax error at position {position}: expected {}", expected.join(" or "))]
    SyntaxError { position: usize, expected: Vec<String> },
    #[error("unknown function '{name}' at position {position}")]
    UnknownFunction { name: String, position: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::IllegalCharacter { position, .. }
            | ParseError::SyntaxError { position, .. }
            | ParseError::UnknownFunction { position, .. } => *position,
        }
    }
}

/// Errors raised while binding or evaluating.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound parameter '{0}'")]
    UnboundParameter(String),
    #[error("coordinate {kind}{index} out of range (dimension {limit})")]
    IndexOutOfRange { kind: char, index: usize, limit: usize },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}
