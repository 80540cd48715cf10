use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::fields::{commutator, VectorField};
use super::QContactStructure;
use crate::calculus::ScalarField;
use crate::{Error, Result};

/// Relative singular-value floor below which the defining system is treated
/// as rank deficient.
const SOLVE_RANK_RTOL: f64 = 1e-10;

fn check_field_dims(s: &QContactStructure, f: &dyn ScalarField, x: &[f64]) -> Result<()> {
    let dims = s.dims();
    dims.check_len(x.len())?;
    if f.dims() != dims {
        return Err(Error::DimensionMismatch {
            expected: dims.dim(),
            got: f.dims().dim(),
        });
    }
    Ok(())
}

/// `sum_i R_i(f)` at `x`.
pub fn reeb_derivative_sum(s: &QContactStructure, f: &dyn ScalarField, x: &[f64]) -> Result<f64> {
    check_field_dims(s, f, x)?;
    let df = DVector::from_vec(f.gradient(x)?);
    let reeb = s.reeb(x)?;
    Ok((reeb * df).sum())
}

/// Solves `lambda_i(X) = -H` and `i_X d lambda_1 = dH - sum_i dH(R_i) lambda_i`
/// as one stacked least-squares system.
pub fn hamiltonian_vector_field(s: &QContactStructure, h: &dyn ScalarField, x: &[f64]) -> Result<Vec<f64>> {
    check_field_dims(s, h, x)?;
    let hv = h.value(x)?;
    let dh = DVector::from_vec(h.gradient(x)?);
    let forms = s.forms(x)?;
    let reeb = s.reeb(x)?;
    let omega = super::differential_from_jacobian(&s.coframe().form_jacobians(x)?[0]);
    solve_defining_system(&forms, &reeb, &omega, hv, &dh, s.tolerance())
}

pub(crate) fn solve_defining_system(
    forms: &DMatrix<f64>,
    reeb: &DMatrix<f64>,
    omega: &DMatrix<f64>,
    h: f64,
    dh: &DVector<f64>,
    tol: f64,
) -> Result<Vec<f64>> {
    let (q, dim) = forms.shape();
    let reeb_dh = reeb * dh;
    let mut rhs = DVector::zeros(dim + q);
    let top = dh - forms.transpose() * &reeb_dh;
    rhs.rows_mut(0, dim).copy_from(&top);
    rhs.rows_mut(dim, q).fill(-h);

    let mut a = DMatrix::zeros(dim + q, dim);
    a.view_mut((0, 0), (dim, dim)).copy_from(&omega.transpose());
    a.view_mut((dim, 0), (q, dim)).copy_from(forms);

    // Row then column equilibration; coefficients of very different size
    // (heavy masses, large momenta) otherwise dominate the rank decision.
    let row_scale: Vec<f64> = a
        .row_iter()
        .map(|r| {
            let m = r.amax();
            if m > 0.0 {
                1.0 / m
            } else {
                1.0
            }
        })
        .collect();
    let mut scaled = a.clone();
    for (i, s) in row_scale.iter().enumerate() {
        scaled.row_mut(i).scale_mut(*s);
    }
    let col_scale: Vec<f64> = scaled
        .column_iter()
        .map(|c| {
            let m = c.amax();
            if m > 0.0 {
                1.0 / m
            } else {
                1.0
            }
        })
        .collect();
    for (j, s) in col_scale.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*s);
    }
    let scaled_rhs = DVector::from_iterator(dim + q, rhs.iter().zip(&row_scale).map(|(r, s)| r * s));

    let svd = scaled.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin < SOLVE_RANK_RTOL * smax {
        return Err(Error::InconsistentSystem {
            residual: f64::NAN,
            reason: format!(
                "defining system is rank deficient (singular values {smin:e} / {smax:e}); \
                 the Hamiltonian field is not unique"
            ),
        });
    }
    let y = svd.solve(&scaled_rhs, 0.0).map_err(|e| Error::InconsistentSystem {
        residual: f64::NAN,
        reason: e.to_string(),
    })?;
    let sol = DVector::from_iterator(dim, y.iter().zip(&col_scale).map(|(v, s)| v * s));

    let residual = (&a * &sol - &rhs).norm();
    if !(residual <= tol * (1.0 + rhs.norm())) {
        return Err(Error::InconsistentSystem {
            residual,
            reason: "structure and Hamiltonian do not admit a solution of the defining equations".into(),
        });
    }
    Ok(sol.as_slice().to_vec())
}

/// `X_H` as a [`VectorField`], re-solved at every evaluation.
#[derive(Clone)]
pub struct HamiltonianField {
    pub structure: QContactStructure,
    pub hamiltonian: Arc<dyn ScalarField>,
}

impl HamiltonianField {
    pub fn new(structure: QContactStructure, hamiltonian: Arc<dyn ScalarField>) -> Self {
        HamiltonianField { structure, hamiltonian }
    }
}

impl VectorField for HamiltonianField {
    fn dim(&self) -> usize {
        self.structure.dims().dim()
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        hamiltonian_vector_field(&self.structure, self.hamiltonian.as_ref(), x)
    }
}

/// `{f, g} = -X_f(g) - g sum_i R_i(f)`.
pub fn qcontact_bracket(s: &QContactStructure, f: &dyn ScalarField, g: &dyn ScalarField, x: &[f64]) -> Result<f64> {
    let xf = hamiltonian_vector_field(s, f, x)?;
    Ok(-g.derivative_along(x, &xf)? - g.value(x)? * reeb_derivative_sum(s, f, x)?)
}

/// `X_H(f) + f sum_i R_i(H)`; zero when `f` is dissipated.
pub fn dissipated_quantity_residual(
    s: &QContactStructure,
    h: &dyn ScalarField,
    f: &dyn ScalarField,
    x: &[f64],
) -> Result<f64> {
    check_field_dims(s, f, x)?;
    let xh = hamiltonian_vector_field(s, h, x)?;
    Ok(f.derivative_along(x, &xh)? + f.value(x)? * reeb_derivative_sum(s, h, x)?)
}

/// `X_H(H) + H sum_i R_i(H)`.
pub fn dissipation_residual(s: &QContactStructure, h: &dyn ScalarField, x: &[f64]) -> Result<f64> {
    dissipated_quantity_residual(s, h, h, x)
}

/// `X_H(g)`; zero when `g` is conserved.
pub fn conserved_quantity_residual(
    s: &QContactStructure,
    h: &dyn ScalarField,
    g: &dyn ScalarField,
    x: &[f64],
) -> Result<f64> {
    check_field_dims(s, g, x)?;
    let xh = hamiltonian_vector_field(s, h, x)?;
    g.derivative_along(x, &xh)
}

/// Components of `L_X lambda_i` for every form, by
/// `(L_X lambda)_b = X^c d_c lambda_b + lambda_c d_b X^c`.
pub fn lie_derivative_coframe(s: &QContactStructure, field: &dyn VectorField, x: &[f64]) -> Result<Vec<Vec<f64>>> {
    s.dims().check_len(x.len())?;
    let xv = DVector::from_vec(field.eval(x)?);
    let jx = field.jacobian(x)?;
    let forms = s.forms(x)?;
    let jacs = s.coframe().form_jacobians(x)?;
    Ok(jacs
        .iter()
        .enumerate()
        .map(|(i, j)| {
            let lam = forms.row(i).transpose();
            (j * &xv + jx.transpose() * lam).as_slice().to_vec()
        })
        .collect())
}

/// The bracket recovered from the commutator of Hamiltonian fields,
/// `lambda_j([X_f, X_g])`, with finite-difference Jacobians. With
/// `lambda_i(X_h) = -h` this is `X_{f,g} = [X_g, X_f]`. Any form index gives
/// the same value on a uniform structure.
pub fn bracket_via_commutator(
    s: &QContactStructure,
    f: Arc<dyn ScalarField>,
    g: Arc<dyn ScalarField>,
    x: &[f64],
    form_index: usize,
) -> Result<f64> {
    let q = s.dims().qcount;
    if form_index >= q {
        return Err(Error::DimensionMismatch {
            expected: q,
            got: form_index + 1,
        });
    }
    let xf = HamiltonianField::new(s.clone(), f);
    let xg = HamiltonianField::new(s.clone(), g);
    let c = commutator(&xf, &xg, x)?;
    let forms = s.forms(x)?;
    let lam = forms.row(form_index);
    Ok(lam.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>())
}
