//! Binding of parameters and coordinate slots, and evaluation over any
//! [`Real`] scalar.

use std::fmt;

use super::{BinOp, CoordKind, EvalError, ExprAst, Func};
use crate::calculus::Real;
use crate::point::{Dims, ExtendedPoint};
use crate::{Params, Result};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Slot(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    /// Power with a coordinate-free exponent, folded at bind time.
    PowConst(Box<Node>, f64),
    Call(Func, Box<Node>),
}

/// An expression with parameters substituted and coordinates resolved to
/// slots of a fixed [`Dims`]. Coordinate-free subtrees are folded.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundExpr {
    root: Node,
    dims: Dims,
    source: ExprAst,
}

impl BoundExpr {
    pub fn bind(ast: &ExprAst, dims: Dims, params: &Params) -> Result<Self, EvalError> {
        Ok(BoundExpr {
            root: lower(ast, dims, params)?,
            dims,
            source: ast.clone(),
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn source(&self) -> &ExprAst {
        &self.source
    }

    /// Folded constant value, if the expression has no coordinates.
    pub fn as_constant(&self) -> Option<f64> {
        match self.root {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn eval<T: Real>(&self, x: &[T]) -> Result<T, EvalError> {
        if x.len() != self.dims.dim() {
            return Err(EvalError::DimensionMismatch {
                expected: self.dims.dim(),
                got: x.len(),
            });
        }
        eval_node(&self.root, x)
    }
}

impl fmt::Display for BoundExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.source.fmt(f)
    }
}

/// One-shot evaluation of `ast` at `point`.
pub fn evaluate(ast: &ExprAst, point: &ExtendedPoint, params: &Params) -> Result<f64> {
    let bound = BoundExpr::bind(ast, point.dims(), params)?;
    Ok(bound.eval(point.coords())?)
}

fn lower(ast: &ExprAst, dims: Dims, params: &Params) -> Result<Node, EvalError> {
    let node = match ast {
        ExprAst::Constant(c) => Node::Const(*c),
        ExprAst::Param(name) => match params.get(name) {
            Some(v) => Node::Const(*v),
            None => return Err(EvalError::UnboundParameter(name.clone())),
        },
        ExprAst::CoordVar { kind, index } => {
            let limit = match kind {
                CoordKind::Q | CoordKind::V => dims.n,
                CoordKind::Z => dims.qcount,
            };
            if *index == 0 || *index > limit {
                return Err(EvalError::IndexOutOfRange {
                    kind: kind.prefix(),
                    index: *index,
                    limit,
                });
            }
            Node::Slot(match kind {
                CoordKind::Q => dims.q_slot(index - 1),
                CoordKind::V => dims.v_slot(index - 1),
                CoordKind::Z => dims.z_slot(index - 1),
            })
        }
        ExprAst::Neg(a) => Node::Neg(Box::new(lower(a, dims, params)?)),
        ExprAst::Call { func, arg } => Node::Call(*func, Box::new(lower(arg, dims, params)?)),
        ExprAst::Binary { op, left, right } => {
            let l = lower(left, dims, params)?;
            let r = lower(right, dims, params)?;
            match (op, &r) {
                (BinOp::Pow, Node::Const(c)) => Node::PowConst(Box::new(l), *c),
                _ => Node::Bin(*op, Box::new(l), Box::new(r)),
            }
        }
    };
    fold(node)
}

fn fold(node: Node) -> Result<Node, EvalError> {
    let constant = match &node {
        Node::Neg(a) | Node::Call(_, a) | Node::PowConst(a, _) => matches!(**a, Node::Const(_)),
        Node::Bin(_, a, b) => matches!((&**a, &**b), (Node::Const(_), Node::Const(_))),
        _ => false,
    };
    if constant {
        Ok(Node::Const(eval_node::<f64>(&node, &[])?))
    } else {
        Ok(node)
    }
}

fn domain(msg: String) -> EvalError {
    EvalError::DomainError(msg)
}

fn eval_node<T: Real>(node: &Node, x: &[T]) -> Result<T, EvalError> {
    Ok(match node {
        Node::Const(c) => T::from_f64(*c),
        Node::Slot(i) => x[*i],
        Node::Neg(a) => -eval_node(a, x)?,
        Node::Bin(op, a, b) => {
            let (l, r) = (eval_node(a, x)?, eval_node(b, x)?);
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => {
                    if r.value() == 0.0 {
                        return Err(domain("division by zero".into()));
                    }
                    l / r
                }
                BinOp::Pow => {
                    if l.value() <= 0.0 {
                        return Err(domain(format!(
                            "power with variable exponent needs a positive base, got {}",
                            l.value()
                        )));
                    }
                    (r * l.ln()).exp()
                }
            }
        }
        Node::PowConst(a, c) => {
            let b = eval_node(a, x)?;
            let bv = b.value();
            if bv < 0.0 && c.fract() != 0.0 {
                return Err(domain(format!("{bv} raised to non-integer power {c}")));
            }
            if bv == 0.0 && *c < 0.0 {
                return Err(domain(format!("zero raised to negative power {c}")));
            }
            b.powc(*c)
        }
        Node::Call(func, a) => {
            let v = eval_node(a, x)?;
            match func {
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Exp => v.exp(),
                Func::Tanh => v.tanh(),
                Func::Abs => v.abs(),
                Func::Log => {
                    if v.value() <= 0.0 {
                        return Err(domain(format!("log of non-positive value {}", v.value())));
                    }
                    v.ln()
                }
                Func::Sqrt => {
                    if v.value() < 0.0 {
                        return Err(domain(format!("sqrt of negative value {}", v.value())));
                    }
                    v.sqrt()
                }
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn dims11() -> Dims {
        Dims::new(1, 1).unwrap()
    }

    fn params(pairs: &[(&str, f64)]) -> Params {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn eval_at(src: &str, coords: &[f64], p: &Params) -> Result<f64> {
        let dims = Dims::new(1, coords.len() - 2).unwrap();
        let point = ExtendedPoint::new(dims, coords.to_vec()).unwrap();
        evaluate(&parse_expression(src).unwrap(), &point, p)
    }

    #[test]
    fn damped_oscillator_value() {
        let p = params(&[("gamma", 0.3)]);
        let v = eval_at("v1^2/2 - q1^2/2 - gamma*z1", &[1.0, 2.0, 0.5], &p).unwrap();
        assert!((v - 1.35).abs() < 1e-15);
    }

    #[test]
    fn unbound_and_out_of_range() {
        let ast = parse_expression("k*q1").unwrap();
        assert_eq!(
            BoundExpr::bind(&ast, dims11(), &Params::new()).unwrap_err(),
            EvalError::UnboundParameter("k".into())
        );
        let ast = parse_expression("z2").unwrap();
        assert!(matches!(
            BoundExpr::bind(&ast, dims11(), &Params::new()),
            Err(EvalError::IndexOutOfRange {
                kind: 'z',
                index: 2,
                limit: 1
            })
        ));
    }

    #[test]
    fn domain_errors() {
        let p = Params::new();
        let cases = [
            ("log(q1)", 0.0),
            ("sqrt(q1 - 1)", 0.0),
            ("1/q1", 0.0),
            ("q1^0.5", -1.0),
            ("q1^v1", 0.0),
            ("q1^(-1)", 0.0),
        ];
        for (src, q) in cases {
            let err = eval_at(src, &[q, 1.0, 0.0], &p);
            assert!(
                matches!(err, Err(crate::Error::Eval(EvalError::DomainError(_)))),
                "{src}: {err:?}"
            );
        }
    }

    #[test]
    fn coordinate_free_subtrees_fold() {
        let ast = parse_expression("2^3 * k + sin(0)").unwrap();
        let b = BoundExpr::bind(&ast, dims11(), &params(&[("k", 0.5)])).unwrap();
        assert_eq!(b.as_constant(), Some(4.0));
    }

    #[test]
    fn dimension_mismatch_on_eval() {
        let b = BoundExpr::bind(&parse_expression("q1").unwrap(), dims11(), &Params::new()).unwrap();
        assert!(matches!(
            b.eval(&[1.0, 2.0]),
            Err(EvalError::DimensionMismatch { expected: 3, got: 2 })
        ));
    }
}
