//! Uniform q-contact structures in coordinates on `R^(2n+q)`.
//!
//! A structure is a coframe of `q` one-forms `lambda_i` together with their
//! Reeb fields `R_i`. All differentials are taken numerically from the
//! coframe components, so any [`Coframe`] implementation (expression based,
//! or induced by a Lagrangian) works with the same solver and checks.

mod fields;
mod hamiltonian;
mod verify;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

pub use fields::{
    commutator, fd_jacobian, BoundVectorField, ConstantField, CovectorField, VectorField, VectorFieldSpec,
};
pub use hamiltonian::{
    bracket_via_commutator, conserved_quantity_residual, dissipated_quantity_residual, dissipation_residual,
    hamiltonian_vector_field, lie_derivative_coframe, qcontact_bracket, reeb_derivative_sum, HamiltonianField,
};
pub use verify::{verify_structure, StructureReport, RANK_RTOL};

use crate::calculus::gradient_at;
use crate::expr::{BoundExpr, ExprAst};
use crate::point::{Dims, ExtendedPoint};
use crate::{Error, Params, Result};

/// Default absolute tolerance for structural checks and the solver.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Pointwise data of a coframe and its Reeb fields.
pub trait Coframe: Send + Sync {
    fn dims(&self) -> Dims;

    /// `q x (2n+q)`; row `i` holds the components of `lambda_i`.
    fn forms(&self, x: &[f64]) -> Result<DMatrix<f64>>;

    /// One matrix per form with `J[c][b] = d(lambda_i)_c / dx^b`.
    fn form_jacobians(&self, x: &[f64]) -> Result<Vec<DMatrix<f64>>>;

    /// `q x (2n+q)`; row `k` holds the components of `R_k`.
    fn reeb(&self, x: &[f64]) -> Result<DMatrix<f64>>;
}

/// `d lambda` from the Jacobian of its components: `J^T - J`.
pub fn differential_from_jacobian(j: &DMatrix<f64>) -> DMatrix<f64> {
    j.transpose() - j
}

/// Antisymmetric matrix of `d(form)` at `point`:
/// entry `(a, b)` is `d_a c_b - d_b c_a`.
pub fn exterior_derivative_matrix(
    form: &CovectorField,
    point: &ExtendedPoint,
    params: &Params,
) -> Result<DMatrix<f64>> {
    let bound = form.bind(point.dims(), params)?;
    let j = component_jacobian(&bound, point.coords())?;
    Ok(differential_from_jacobian(&j))
}

fn component_jacobian(components: &[BoundExpr], x: &[f64]) -> Result<DMatrix<f64>> {
    let mut j = DMatrix::zeros(components.len(), x.len());
    for (c, e) in components.iter().enumerate() {
        for (b, d) in gradient_at(e, x)?.into_iter().enumerate() {
            j[(c, b)] = d;
        }
    }
    Ok(j)
}

/// Coframe and Reeb fields given by component expressions.
#[derive(Debug, Clone)]
pub struct ExpressionCoframe {
    dims: Dims,
    forms: Vec<Vec<BoundExpr>>,
    reeb: Vec<Vec<BoundExpr>>,
}

impl ExpressionCoframe {
    pub fn new(dims: Dims, coframe: &[CovectorField], reeb: &[VectorFieldSpec], params: &Params) -> Result<Self> {
        if coframe.len() != dims.qcount || reeb.len() != dims.qcount {
            return Err(Error::Model(format!(
                "expected {} coframe forms and Reeb fields, got {} and {}",
                dims.qcount,
                coframe.len(),
                reeb.len()
            )));
        }
        let forms = coframe.iter().map(|f| f.bind(dims, params)).collect::<Result<_>>()?;
        let reeb = reeb
            .iter()
            .map(|r| Ok(r.bind(dims, params)?.components().to_vec()))
            .collect::<Result<_>>()?;
        Ok(ExpressionCoframe { dims, forms, reeb })
    }
}

fn eval_rows(rows: &[Vec<BoundExpr>], x: &[f64]) -> Result<DMatrix<f64>> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut m = DMatrix::zeros(rows.len(), cols);
    for (i, row) in rows.iter().enumerate() {
        for (c, e) in row.iter().enumerate() {
            m[(i, c)] = e.eval(x)?;
        }
    }
    Ok(m)
}

impl Coframe for ExpressionCoframe {
    fn dims(&self) -> Dims {
        self.dims
    }

    fn forms(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.dims.check_len(x.len())?;
        eval_rows(&self.forms, x)
    }

    fn form_jacobians(&self, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        self.dims.check_len(x.len())?;
        self.forms.iter().map(|f| component_jacobian(f, x)).collect()
    }

    fn reeb(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.dims.check_len(x.len())?;
        eval_rows(&self.reeb, x)
    }
}

/// A uniform q-contact structure: a named coframe with Reeb fields, the
/// parameters used to bind scalar fields on it, and a solver tolerance.
#[derive(Clone)]
pub struct QContactStructure {
    name: String,
    frame: Arc<dyn Coframe>,
    params: Params,
    tolerance: f64,
}

impl fmt::Debug for QContactStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QContactStructure")
            .field("name", &self.name)
            .field("dims", &self.dims())
            .field("params", &self.params)
            .field("tolerance", &self.tolerance)
            .finish()
    }
}

impl QContactStructure {
    pub fn new(name: impl Into<String>, frame: Arc<dyn Coframe>, params: Params) -> Self {
        QContactStructure {
            name: name.into(),
            frame,
            params,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn from_expressions(
        name: impl Into<String>,
        dims: Dims,
        coframe: &[CovectorField],
        reeb: &[VectorFieldSpec],
        params: Params,
    ) -> Result<Self> {
        let frame = ExpressionCoframe::new(dims, coframe, reeb, &params)?;
        Ok(Self::new(name, Arc::new(frame), params))
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dims(&self) -> Dims {
        self.frame.dims()
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn coframe(&self) -> &Arc<dyn Coframe> {
        &self.frame
    }

    /// Binds an expression with this structure's dimensions and parameters.
    pub fn bind(&self, ast: &ExprAst) -> Result<BoundExpr> {
        Ok(BoundExpr::bind(ast, self.dims(), &self.params)?)
    }

    pub fn forms(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.frame.forms(x)
    }

    pub fn reeb(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.frame.reeb(x)
    }

    /// `d lambda_i` for every form.
    pub fn differentials(&self, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        Ok(self
            .frame
            .form_jacobians(x)?
            .iter()
            .map(differential_from_jacobian)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn covector(src: &[&str]) -> CovectorField {
        CovectorField::new(src.iter().map(|s| parse_expression(s).unwrap()).collect())
    }

    fn pt(n: usize, q: usize, c: &[f64]) -> ExtendedPoint {
        ExtendedPoint::new(Dims::new(n, q).unwrap(), c.to_vec()).unwrap()
    }

    #[test]
    fn standard_contact_form_differential() {
        let m = exterior_derivative_matrix(
            &covector(&["-v1", "0", "1"]),
            &pt(1, 1, &[0.3, 0.8, -1.0]),
            &Params::new(),
        )
        .unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(m, expected);
    }

    #[test]
    fn two_contact_forms_share_differential() {
        let p = pt(1, 2, &[0.4, -0.9, 1.0, 2.0]);
        let l1 = exterior_derivative_matrix(&covector(&["-v1", "0", "1", "0"]), &p, &Params::new());
        let l2 = exterior_derivative_matrix(&covector(&["0", "q1", "0", "1"]), &p, &Params::new());
        assert_eq!(l1.unwrap(), l2.unwrap());
    }

    #[test]
    fn closed_form_has_zero_differential() {
        let m = exterior_derivative_matrix(&covector(&["0", "0", "1"]), &pt(1, 1, &[1.0, 2.0, 3.0]), &Params::new())
            .unwrap();
        assert!(m.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn wrong_form_count_is_rejected() {
        let d = Dims::new(1, 2).unwrap();
        let r = QContactStructure::from_expressions("x", d, &[covector(&["-v1", "0", "1", "0"])], &[], Params::new());
        assert!(r.is_err());
    }
}
