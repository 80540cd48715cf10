//! Exact first and second partial derivatives of expression fields by
//! hyper-dual evaluation, plus a central-difference oracle used to
//! cross-check them.

mod hyperdual;
pub mod oracle;

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::DMatrix;

pub use hyperdual::HyperDual;
pub use oracle::{finite_difference_oracle, FdApprox};

use crate::expr::{BoundExpr, EvalError, ExprAst};
use crate::point::Dims;
pub use crate::point::ExtendedPoint;
use crate::{Params, Result};

/// Scalar type that expression trees can be evaluated over.
pub trait Real:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    /// The plain real part, with all infinitesimal parts dropped.
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn tanh(self) -> Self;
    fn abs(self) -> Self;
    /// `self^c` for a constant exponent.
    fn powc(self, c: f64) -> Self;
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn powc(self, c: f64) -> Self {
        if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 {
            self.powi(c as i32)
        } else {
            self.powf(c)
        }
    }
}

/// Which coordinates a Hessian block ranges over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoordSelector {
    Q,
    V,
    Z,
    All,
    Slots(Vec<usize>),
}

impl CoordSelector {
    pub fn slots(&self, dims: Dims) -> Vec<usize> {
        match self {
            CoordSelector::Q => dims.q_range().collect(),
            CoordSelector::V => dims.v_range().collect(),
            CoordSelector::Z => dims.z_range().collect(),
            CoordSelector::All => (0..dims.dim()).collect(),
            CoordSelector::Slots(s) => s.clone(),
        }
    }
}

fn lift<T: Real>(x: &[T]) -> Vec<HyperDual<T>> {
    x.iter().map(|&c| HyperDual::constant(c)).collect()
}

/// Value and full gradient, one hyper-dual pass per coordinate.
pub fn value_and_gradient_at<T: Real>(f: &BoundExpr, x: &[T]) -> Result<(T, Vec<T>), EvalError> {
    let mut seeded = lift(x);
    let mut grad = Vec::with_capacity(x.len());
    let mut value = None;
    for i in 0..x.len() {
        seeded[i] = HyperDual::seeded(x[i], true, false);
        let r = f.eval(&seeded)?;
        seeded[i] = HyperDual::constant(x[i]);
        value.get_or_insert(r.value);
        grad.push(r.d_a);
    }
    let value = match value {
        Some(v) => v,
        None => f.eval(x)?,
    };
    Ok((value, grad))
}

pub fn gradient_at<T: Real>(f: &BoundExpr, x: &[T]) -> Result<Vec<T>, EvalError> {
    value_and_gradient_at(f, x).map(|(_, g)| g)
}

/// Mixed second partial `d2f / dx_i dx_j`.
pub fn second_partial_at<T: Real>(f: &BoundExpr, x: &[T], i: usize, j: usize) -> Result<T, EvalError> {
    let mut seeded = lift(x);
    if i == j {
        seeded[i] = HyperDual::seeded(x[i], true, true);
    } else {
        seeded[i] = HyperDual::seeded(x[i], true, false);
        seeded[j] = HyperDual::seeded(x[j], false, true);
    }
    Ok(f.eval(&seeded)?.d_ab)
}

/// Block of second partials; entry `(r, c)` is `d2f / dx_rows[r] dx_cols[c]`.
pub fn hessian_block_at<T: Real>(
    f: &BoundExpr,
    x: &[T],
    rows: &[usize],
    cols: &[usize],
) -> Result<Vec<Vec<T>>, EvalError> {
    let symmetric = rows == cols;
    let mut out = vec![vec![T::from_f64(0.0); cols.len()]; rows.len()];
    for (r, &i) in rows.iter().enumerate() {
        for (c, &j) in cols.iter().enumerate() {
            if symmetric && c < r {
                out[r][c] = out[c][r];
            } else {
                out[r][c] = second_partial_at(f, x, i, j)?;
            }
        }
    }
    Ok(out)
}

/// Gradient of `field` at `point`, parameters bound from `params`.
pub fn gradient(field: &ExprAst, point: &ExtendedPoint, params: &Params) -> Result<Vec<f64>> {
    let bound = BoundExpr::bind(field, point.dims(), params)?;
    Ok(gradient_at(&bound, point.coords())?)
}

/// Hessian block of `field` across the selected coordinate sets.
pub fn hessian_block(
    field: &ExprAst,
    point: &ExtendedPoint,
    params: &Params,
    rows: &CoordSelector,
    cols: &CoordSelector,
) -> Result<DMatrix<f64>> {
    let dims = point.dims();
    let bound = BoundExpr::bind(field, dims, params)?;
    let (r, c) = (rows.slots(dims), cols.slots(dims));
    for &s in r.iter().chain(&c) {
        if s >= dims.dim() {
            return Err(crate::Error::DimensionMismatch {
                expected: dims.dim(),
                got: s + 1,
            });
        }
    }
    let block = hessian_block_at(&bound, point.coords(), &r, &c)?;
    Ok(DMatrix::from_fn(r.len(), c.len(), |i, j| block[i][j]))
}

/// A scalar function on the extended phase space with an exact gradient.
pub trait ScalarField: Send + Sync {
    fn dims(&self) -> Dims;
    fn value(&self, x: &[f64]) -> Result<f64>;
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Directional derivative `V(f) = df(V)`.
    fn derivative_along(&self, x: &[f64], direction: &[f64]) -> Result<f64> {
        let g = self.gradient(x)?;
        Ok(g.iter().zip(direction).map(|(a, b)| a * b).sum())
    }
}

impl ScalarField for BoundExpr {
    fn dims(&self) -> Dims {
        BoundExpr::dims(self)
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval(x)?)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(gradient_at(self, x)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn point(n: usize, q: usize, c: &[f64]) -> ExtendedPoint {
        ExtendedPoint::new(Dims::new(n, q).unwrap(), c.to_vec()).unwrap()
    }

    fn grad(src: &str, p: &ExtendedPoint) -> Vec<f64> {
        gradient(&parse_expression(src).unwrap(), p, &Params::new()).unwrap()
    }

    #[test]
    fn gradient_examples() {
        assert_eq!(
            grad("v1^2/2 - q1^2/2", &point(1, 1, &[1.0, 2.0, 0.0])),
            vec![-1.0, 2.0, 0.0]
        );
        assert_eq!(
            grad("z1 + z2", &point(1, 2, &[0.3, -0.2, 5.0, 1.0])),
            vec![0.0, 0.0, 1.0, 1.0]
        );
        let g = grad("sin(q1)*v1", &point(1, 1, &[std::f64::consts::FRAC_PI_2, 3.0, 0.0]));
        assert!(g[0].abs() < 1e-15 && (g[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn velocity_hessian_examples() {
        let p = point(1, 1, &[0.4, -1.2, 0.7]);
        let l = parse_expression("v1^2/2 - q1^2/2 - 0.1*z1").unwrap();
        let w = hessian_block(&l, &p, &Params::new(), &CoordSelector::V, &CoordSelector::V).unwrap();
        assert_eq!(w, DMatrix::from_row_slice(1, 1, &[1.0]));

        let p2 = point(2, 1, &[0.0, 0.0, 1.5, -2.0, 0.0]);
        let l2 = parse_expression("v1*v2").unwrap();
        let w2 = hessian_block(&l2, &p2, &Params::new(), &CoordSelector::V, &CoordSelector::V).unwrap();
        assert_eq!(w2, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn mixed_velocity_action_block() {
        // d2/dv dz of exp(z) v^2/2 = v exp(z)
        let p = point(1, 1, &[0.2, 1.3, -0.4]);
        let l = parse_expression("exp(z1)*v1^2/2").unwrap();
        let b = hessian_block(&l, &p, &Params::new(), &CoordSelector::V, &CoordSelector::Z).unwrap();
        assert!((b[(0, 0)] - 1.3 * (-0.4f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn selectors_out_of_range_are_rejected() {
        let p = point(1, 1, &[0.0, 0.0, 0.0]);
        let l = parse_expression("q1").unwrap();
        let sel = CoordSelector::Slots(vec![7]);
        assert!(hessian_block(&l, &p, &Params::new(), &sel, &CoordSelector::V).is_err());
    }
}
