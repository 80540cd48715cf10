use std::sync::Arc;

use nalgebra::DMatrix;

use crate::calculus::{gradient_at, second_partial_at, ScalarField};
use crate::expr::{BoundExpr, CoordKind, ExprAst};
use crate::geometry::VectorField;
use crate::lagrangian::LagrangianSystem;
use crate::point::Dims;
use crate::{Error, Params, Result};

/// `Y = Y^i(q) d/dq^i` on the configuration space.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseVectorField {
    components: Vec<ExprAst>,
}

impl BaseVectorField {
    pub fn new(components: Vec<ExprAst>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Model("a base vector field needs at least one component".into()));
        }
        for c in &components {
            if c.mentions(CoordKind::V) || c.mentions(CoordKind::Z) {
                return Err(Error::Model(format!(
                    "base vector field component '{c}' may only depend on q"
                )));
            }
        }
        Ok(BaseVectorField { components })
    }

    pub fn components(&self) -> &[ExprAst] {
        &self.components
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    fn bind(&self, dims: Dims, params: &Params) -> Result<Vec<BoundExpr>> {
        if dims.n != self.n() {
            return Err(Error::DimensionMismatch {
                expected: dims.n,
                got: self.n(),
            });
        }
        self.components
            .iter()
            .map(|c| BoundExpr::bind(c, dims, params).map_err(Error::from))
            .collect()
    }
}

/// `Y^c = Y^i d/dq^i + v^j (dY^i/dq^j) d/dv^i`.
#[derive(Debug, Clone)]
pub struct CompleteLift {
    dims: Dims,
    y: Vec<BoundExpr>,
}

/// `Y^v = Y^i d/dv^i`.
#[derive(Debug, Clone)]
pub struct VerticalLift {
    dims: Dims,
    y: Vec<BoundExpr>,
}

pub fn complete_lift(y: &BaseVectorField, dims: Dims, params: &Params) -> Result<CompleteLift> {
    Ok(CompleteLift {
        dims,
        y: y.bind(dims, params)?,
    })
}

pub fn vertical_lift(y: &BaseVectorField, dims: Dims, params: &Params) -> Result<VerticalLift> {
    Ok(VerticalLift {
        dims,
        y: y.bind(dims, params)?,
    })
}

impl VectorField for CompleteLift {
    fn dim(&self) -> usize {
        self.dims.dim()
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let d = self.dims;
        d.check_len(x.len())?;
        let mut out = vec![0.0; d.dim()];
        for (i, yi) in self.y.iter().enumerate() {
            out[d.q_slot(i)] = yi.eval(x)?;
            let g = gradient_at(yi, x)?;
            out[d.v_slot(i)] = (0..d.n).map(|j| x[d.v_slot(j)] * g[d.q_slot(j)]).sum();
        }
        Ok(out)
    }

    fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let d = self.dims;
        let dim = d.dim();
        let mut jac = DMatrix::zeros(dim, dim);
        for (i, yi) in self.y.iter().enumerate() {
            let g = gradient_at(yi, x)?;
            for b in 0..dim {
                jac[(d.q_slot(i), b)] = g[b];
            }
            for j in 0..d.n {
                // d/dv_j of v^k dY/dq^k
                jac[(d.v_slot(i), d.v_slot(j))] = g[d.q_slot(j)];
                for b in d.q_range() {
                    jac[(d.v_slot(i), b)] += x[d.v_slot(j)] * second_partial_at(yi, x, d.q_slot(j), b)?;
                }
            }
        }
        Ok(jac)
    }
}

impl VectorField for VerticalLift {
    fn dim(&self) -> usize {
        self.dims.dim()
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let d = self.dims;
        d.check_len(x.len())?;
        let mut out = vec![0.0; d.dim()];
        for (i, yi) in self.y.iter().enumerate() {
            out[d.v_slot(i)] = yi.eval(x)?;
        }
        Ok(out)
    }

    fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let d = self.dims;
        let mut jac = DMatrix::zeros(d.dim(), d.dim());
        for (i, yi) in self.y.iter().enumerate() {
            for (b, g) in gradient_at(yi, x)?.into_iter().enumerate() {
                jac[(d.v_slot(i), b)] = g;
            }
        }
        Ok(jac)
    }
}

/// The vertical endomorphism `S`: `dq^i` components move to `dv^i`, the
/// rest vanish.
pub fn vertical_endomorphism(dims: Dims, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; dims.dim()];
    for i in 0..dims.n {
        out[dims.v_slot(i)] = x[dims.q_slot(i)];
    }
    out
}

/// `X^v(L) = dL(S X) = L_{v_i} X^{q_i}` as a scalar field.
#[derive(Clone)]
pub struct VerticalDerivative {
    pub lagrangian: LagrangianSystem,
    pub field: Arc<dyn VectorField>,
}

impl VerticalDerivative {
    pub fn new(lagrangian: LagrangianSystem, field: Arc<dyn VectorField>) -> Self {
        VerticalDerivative { lagrangian, field }
    }
}

impl ScalarField for VerticalDerivative {
    fn dims(&self) -> Dims {
        self.lagrangian.dims()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let d = self.dims();
        let b = self.lagrangian.blocks(x)?;
        let xv = self.field.eval(x)?;
        Ok((0..d.n).map(|i| b.lv(d, i) * xv[d.q_slot(i)]).sum())
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let d = self.dims();
        let b = self.lagrangian.blocks(x)?;
        let xv = self.field.eval(x)?;
        let jx = self.field.jacobian(x)?;
        let mut g = vec![0.0; d.dim()];
        for i in 0..d.n {
            let row = b.v_row(d, i);
            let lv = b.lv(d, i);
            for (k, gk) in g.iter_mut().enumerate() {
                *gk += row[k] * xv[d.q_slot(i)] + lv * jx[(d.q_slot(i), k)];
            }
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::geometry::fd_jacobian;

    fn base(src: &[&str]) -> BaseVectorField {
        BaseVectorField::new(src.iter().map(|s| parse_expression(s).unwrap()).collect()).unwrap()
    }

    #[test]
    fn lifts_of_simple_fields() {
        let d = Dims::new(1, 1).unwrap();
        let x = [1.5, -2.0, 0.3];
        let c = complete_lift(&base(&["1"]), d, &Params::new()).unwrap();
        assert_eq!(c.eval(&x).unwrap(), vec![1.0, 0.0, 0.0]);
        let v = vertical_lift(&base(&["1"]), d, &Params::new()).unwrap();
        assert_eq!(v.eval(&x).unwrap(), vec![0.0, 1.0, 0.0]);

        let c = complete_lift(&base(&["q1"]), d, &Params::new()).unwrap();
        assert_eq!(c.eval(&x).unwrap(), vec![1.5, -2.0, 0.0]);
        let c = complete_lift(&base(&["q1^2"]), d, &Params::new()).unwrap();
        assert_eq!(c.eval(&x).unwrap(), vec![2.25, 2.0 * 1.5 * -2.0, 0.0]);
        let v = vertical_lift(&base(&["q1^2"]), d, &Params::new()).unwrap();
        assert_eq!(v.eval(&x).unwrap(), vec![0.0, 2.25, 0.0]);
        // S(Y^c) = Y^v
        assert_eq!(vertical_endomorphism(d, &c.eval(&x).unwrap()), v.eval(&x).unwrap());
    }

    #[test]
    fn lift_jacobians_match_differences() {
        let d = Dims::new(2, 1).unwrap();
        let y = base(&["q1*q2^2", "sin(q1) - q2"]);
        let x = [0.4, -0.8, 1.2, 0.7, 0.0];
        let c = complete_lift(&y, d, &Params::new()).unwrap();
        let fd = fd_jacobian(|p| c.eval(p), &x).unwrap();
        assert!((c.jacobian(&x).unwrap() - fd).amax() < 1e-10);
        let v = vertical_lift(&y, d, &Params::new()).unwrap();
        let fd = fd_jacobian(|p| v.eval(p), &x).unwrap();
        assert!((v.jacobian(&x).unwrap() - fd).amax() < 1e-10);
    }

    #[test]
    fn base_fields_reject_velocities() {
        assert!(BaseVectorField::new(vec![parse_expression("v1").unwrap()]).is_err());
    }
}
