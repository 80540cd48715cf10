use nalgebra::DMatrix;

use crate::calculus::gradient_at;
use crate::expr::{BoundExpr, ExprAst};
use crate::point::Dims;
use crate::{Error, Params, Result};

/// A tangent vector field on the extended phase space, evaluated pointwise.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// `J[a][b] = dX^a / dx^b`. The default is a fourth-order central
    /// difference.
    fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        fd_jacobian(|y| self.eval(y), x)
    }
}

/// Fourth-order central-difference Jacobian of a vector-valued map.
pub fn fd_jacobian<F>(f: F, x: &[f64]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let f0 = f(x)?;
    let m = f0.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut y = x.to_vec();
    for b in 0..n {
        let h = 1e-3 * (1.0 + x[b].abs());
        let mut at = |d: f64| -> Result<Vec<f64>> {
            y[b] = x[b] + d;
            let r = f(&y);
            y[b] = x[b];
            r
        };
        let (p2, p1, m1, m2) = (at(2.0 * h)?, at(h)?, at(-h)?, at(-2.0 * h)?);
        for a in 0..m {
            jac[(a, b)] = (-p2[a] + 8.0 * p1[a] - 8.0 * m1[a] + m2[a]) / (12.0 * h);
        }
    }
    Ok(jac)
}

/// Lie bracket `[A, B]^a = A^b dB^a/dx^b - B^b dA^a/dx^b`.
pub fn commutator(a: &dyn VectorField, b: &dyn VectorField, x: &[f64]) -> Result<Vec<f64>> {
    let (va, vb) = (a.eval(x)?, b.eval(x)?);
    let (ja, jb) = (a.jacobian(x)?, b.jacobian(x)?);
    let va = nalgebra::DVector::from_vec(va);
    let vb = nalgebra::DVector::from_vec(vb);
    Ok((jb * va - ja * vb).as_slice().to_vec())
}

/// Component expressions of a 1-form in the coordinate cobasis.
#[derive(Debug, Clone, PartialEq)]
pub struct CovectorField {
    pub components: Vec<ExprAst>,
}

/// Component expressions of a vector field, ordered `F (dq), G (dv), H (dz)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldSpec {
    pub components: Vec<ExprAst>,
}

fn bind_all(components: &[ExprAst], dims: Dims, params: &Params) -> Result<Vec<BoundExpr>> {
    dims.check_len(components.len())?;
    components
        .iter()
        .map(|c| BoundExpr::bind(c, dims, params).map_err(Error::from))
        .collect()
}

impl CovectorField {
    pub fn new(components: Vec<ExprAst>) -> Self {
        CovectorField { components }
    }

    pub fn bind(&self, dims: Dims, params: &Params) -> Result<Vec<BoundExpr>> {
        bind_all(&self.components, dims, params)
    }
}

impl VectorFieldSpec {
    pub fn new(components: Vec<ExprAst>) -> Self {
        VectorFieldSpec { components }
    }

    pub fn bind(&self, dims: Dims, params: &Params) -> Result<BoundVectorField> {
        Ok(BoundVectorField {
            components: bind_all(&self.components, dims, params)?,
        })
    }
}

/// A [`VectorFieldSpec`] bound to dimensions, with an exact Jacobian.
#[derive(Debug, Clone)]
pub struct BoundVectorField {
    components: Vec<BoundExpr>,
}

impl BoundVectorField {
    pub fn components(&self) -> &[BoundExpr] {
        &self.components
    }
}

impl VectorField for BoundVectorField {
    fn dim(&self) -> usize {
        self.components.len()
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.eval(x).map_err(Error::from)).collect()
    }

    fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.components.len();
        let mut j = DMatrix::zeros(n, x.len());
        for (a, c) in self.components.iter().enumerate() {
            for (b, d) in gradient_at(c, x)?.into_iter().enumerate() {
                j[(a, b)] = d;
            }
        }
        Ok(j)
    }
}

/// A fixed vector, the same at every point.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantField(pub Vec<f64>);

impl VectorField for ConstantField {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn eval(&self, _x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.0.clone())
    }

    fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(DMatrix::zeros(self.0.len(), x.len()))
    }
}
