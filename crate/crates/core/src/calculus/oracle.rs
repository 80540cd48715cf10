//! Central finite differences, evaluated with plain `f64` only, as an
//! independent check on the hyper-dual derivatives.

use nalgebra::DMatrix;

use crate::expr::{BoundExpr, ExprAst};
use crate::point::ExtendedPoint;
use crate::{Params, Result};

/// Default step for first-order differences.
pub const FIRST_ORDER_STEP: f64 = 1e-5;
/// Default step for second-order differences.
pub const SECOND_ORDER_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub enum FdApprox {
    Gradient(Vec<f64>),
    Hessian(DMatrix<f64>),
}

/// `order` 1 gives the gradient, 2 the full Hessian. The step along each
/// coordinate is `h * max(1, |x_i|)`.
pub fn finite_difference_oracle(
    field: &ExprAst,
    point: &ExtendedPoint,
    params: &Params,
    order: u8,
    h: f64,
) -> Result<FdApprox> {
    if !(h > 0.0) {
        return Err(crate::Error::Model(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let bound = BoundExpr::bind(field, point.dims(), params)?;
    let x = point.coords();
    match order {
        1 => Ok(FdApprox::Gradient(fd_gradient(&bound, x, h)?)),
        2 => Ok(FdApprox::Hessian(fd_hessian(&bound, x, h)?)),
        other => Err(crate::Error::Model(format!("unsupported difference order {other}"))),
    }
}

fn shifted(f: &BoundExpr, x: &[f64], moves: &[(usize, f64)]) -> Result<f64> {
    let mut y = x.to_vec();
    for &(i, d) in moves {
        y[i] += d;
    }
    Ok(f.eval(&y)?)
}

/// Step along coordinate `i`: `h` scaled by `max(1, |x_i|)`.
fn step(h: f64, xi: f64) -> f64 {
    h * xi.abs().max(1.0)
}

pub fn fd_gradient(f: &BoundExpr, x: &[f64], h: f64) -> Result<Vec<f64>> {
    (0..x.len())
        .map(|i| {
            let h = step(h, x[i]);
            Ok((shifted(f, x, &[(i, h)])? - shifted(f, x, &[(i, -h)])?) / (2.0 * h))
        })
        .collect()
}

pub fn fd_hessian(f: &BoundExpr, x: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let n = x.len();
    let f0 = f.eval(x)?;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let hi = step(h, x[i]);
        m[(i, i)] = (shifted(f, x, &[(i, hi)])? - 2.0 * f0 + shifted(f, x, &[(i, -hi)])?) / (hi * hi);
        for j in 0..i {
            let hj = step(h, x[j]);
            let v = (shifted(f, x, &[(i, hi), (j, hj)])?
                - shifted(f, x, &[(i, hi), (j, -hj)])?
                - shifted(f, x, &[(i, -hi), (j, hj)])?
                + shifted(f, x, &[(i, -hi), (j, -hj)])?)
                / (4.0 * hi * hj);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}
