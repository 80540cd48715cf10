//! Derivative blocks of a Lagrangian and the closed-form dynamics, generic
//! over the scalar so the same code yields values (over `f64`) and exact
//! Jacobians (over hyper-duals).

#![allow(clippy::needless_range_loop)]

use crate::calculus::{gradient_at, second_partial_at, Real};
use crate::expr::{BoundExpr, EvalError};
use crate::point::Dims;

/// First and second partials of `L` at one point.
#[derive(Debug, Clone)]
pub struct Blocks<T> {
    pub l: T,
    /// Full gradient, length `2n + q`.
    pub grad: Vec<T>,
    /// `W[i][j] = L_{v_i v_j}`.
    pub w: Vec<Vec<T>>,
    /// `lvq[i][j] = L_{v_i q_j}`.
    pub lvq: Vec<Vec<T>>,
    /// `lvz[i][k] = L_{v_i z_k}`.
    pub lvz: Vec<Vec<T>>,
}

impl<T: Real> Blocks<T> {
    pub fn compute(f: &BoundExpr, x: &[T], dims: Dims) -> Result<Self, EvalError> {
        let n = dims.n;
        let l = f.eval(x)?;
        let grad = gradient_at(f, x)?;
        let zero = T::from_f64(0.0);
        let mut w = vec![vec![zero; n]; n];
        let mut lvq = vec![vec![zero; n]; n];
        let mut lvz = vec![vec![zero; dims.qcount]; n];
        for i in 0..n {
            let vi = dims.v_slot(i);
            for j in 0..n {
                if j >= i {
                    w[i][j] = second_partial_at(f, x, vi, dims.v_slot(j))?;
                } else {
                    w[i][j] = w[j][i];
                }
                lvq[i][j] = second_partial_at(f, x, vi, dims.q_slot(j))?;
            }
            for k in 0..dims.qcount {
                lvz[i][k] = second_partial_at(f, x, vi, dims.z_slot(k))?;
            }
        }
        Ok(Blocks { l, grad, w, lvq, lvz })
    }

    pub fn lq(&self, dims: Dims, i: usize) -> T {
        self.grad[dims.q_slot(i)]
    }

    pub fn lv(&self, dims: Dims, i: usize) -> T {
        self.grad[dims.v_slot(i)]
    }

    pub fn lz(&self, dims: Dims, k: usize) -> T {
        self.grad[dims.z_slot(k)]
    }

    pub fn lz_sum(&self, dims: Dims) -> T {
        (0..dims.qcount).fold(T::from_f64(0.0), |s, k| s + self.lz(dims, k))
    }

    /// Row `i` of the full Hessian restricted to `v_i`.
    pub fn v_row(&self, dims: Dims, i: usize) -> Vec<T> {
        let mut row = Vec::with_capacity(dims.dim());
        row.extend_from_slice(&self.lvq[i]);
        row.extend_from_slice(&self.w[i]);
        row.extend_from_slice(&self.lvz[i]);
        row
    }

    pub fn energy(&self, x: &[T], dims: Dims) -> T {
        (0..dims.n).fold(-self.l, |e, i| e + x[dims.v_slot(i)] * self.lv(dims, i))
    }

    /// Right-hand side of `W a = L_q - L_{qv} v + sum_l (-L L_{z_l v} + L_{z_l} L_v)`.
    pub fn acceleration_rhs(&self, x: &[T], dims: Dims) -> Vec<T> {
        let lz_sum = self.lz_sum(dims);
        (0..dims.n)
            .map(|k| {
                let mut r = self.lq(dims, k);
                for j in 0..dims.n {
                    r = r - self.lvq[k][j] * x[dims.v_slot(j)];
                }
                for l in 0..dims.qcount {
                    r = r - self.l * self.lvz[k][l];
                }
                r + lz_sum * self.lv(dims, k)
            })
            .collect()
    }

    /// Components of the energy field: `(v, W^{-1} rhs, L, .., L)`.
    pub fn field(&self, x: &[T], dims: Dims) -> Option<Vec<T>> {
        let a = solve(self.w.clone(), self.acceleration_rhs(x, dims))?;
        let mut out = Vec::with_capacity(dims.dim());
        out.extend(dims.v_range().map(|s| x[s]));
        out.extend(a);
        out.extend(std::iter::repeat_n(self.l, dims.qcount));
        Some(out)
    }
}

/// Gaussian elimination with partial pivoting on the real parts. `None`
/// when a pivot vanishes exactly.
pub fn solve<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].value().abs().total_cmp(&a[j][col].value().abs()))?;
        if a[pivot][col].value() == 0.0 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                let t = a[col][k];
                a[row][k] = a[row][k] - factor * t;
            }
            let t = b[col];
            b[row] = b[row] - factor * t;
        }
    }
    let mut x = vec![T::from_f64(0.0); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s = s - a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}
