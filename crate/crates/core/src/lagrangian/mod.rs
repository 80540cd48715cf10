//! Contact Lagrangian systems on `TQ x R^q`.
//!
//! From a regular Lagrangian `L(q, v, z)` this builds the coframe
//! `lambda_i = dz_i - L_{v_j} dq_j`, its Reeb fields, the energy
//! `E_L = v L_v - L` and the closed-form energy field
//!
//! ```text
//! q' = v
//! W v' = L_q - L_{qv} v + sum_l (L_{z_l} L_v - L L_{z_l v})
//! z_l' = L
//! ```
//!
//! where `W = L_{vv}`. Derivative blocks are cached per point because the
//! field, residuals and symmetry checks all revisit the same points.

mod local;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;

pub use local::Blocks;

use crate::calculus::{HyperDual, ScalarField};
use crate::expr::{parse_expression, BoundExpr, ExprAst};
use crate::geometry::{Coframe, QContactStructure, VectorField};
use crate::point::Dims;
use crate::{Error, Params, Result};

/// `|det W|` must reach this fraction of `max(1, |W|_F^n)`.
pub const REGULARITY_RTOL: f64 = 1e-10;

const CACHE_LIMIT: usize = 4096;

/// Velocity Hessian at a point with its determinant and 2-norm condition
/// number.
#[derive(Debug, Clone, PartialEq)]
pub struct Regularity {
    pub w: DMatrix<f64>,
    pub det: f64,
    pub condition_number: f64,
}

struct Inner {
    name: String,
    dims: Dims,
    ast: ExprAst,
    params: Params,
    bound: BoundExpr,
    cache: Mutex<HashMap<Vec<u64>, Arc<Blocks<f64>>>>,
}

/// A Lagrangian with its derived contact data. Cloning is cheap and clones
/// share the derivative cache.
#[derive(Clone)]
pub struct LagrangianSystem {
    inner: Arc<Inner>,
}

impl std::fmt::Debug for LagrangianSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LagrangianSystem")
            .field("name", &self.inner.name)
            .field("dims", &self.inner.dims)
            .field("lagrangian", &self.inner.ast.to_string())
            .field("params", &self.inner.params)
            .finish()
    }
}

impl LagrangianSystem {
    pub fn new(name: impl Into<String>, dims: Dims, lagrangian: &ExprAst, params: Params) -> Result<Self> {
        let bound = BoundExpr::bind(lagrangian, dims, &params)?;
        Ok(LagrangianSystem {
            inner: Arc::new(Inner {
                name: name.into(),
                dims,
                ast: lagrangian.clone(),
                params,
                bound,
                cache: Mutex::new(HashMap::new()),
            }),
        })
    }

    pub fn parse(name: impl Into<String>, dims: Dims, source: &str, params: Params) -> Result<Self> {
        Self::new(name, dims, &parse_expression(source)?, params)
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    pub fn dims(&self) -> Dims {
        self.inner.dims
    }

    pub fn expression(&self) -> &ExprAst {
        &self.inner.ast
    }

    pub fn params(&self) -> &Params {
        &self.inner.params
    }

    /// `L` bound to this system's dimensions.
    pub fn bound(&self) -> &BoundExpr {
        &self.inner.bound
    }

    /// Binds another expression with this system's dimensions and parameters.
    pub fn bind(&self, ast: &ExprAst) -> Result<BoundExpr> {
        Ok(BoundExpr::bind(ast, self.dims(), self.params())?)
    }

    /// Derivative blocks at `x`, cached.
    pub fn blocks(&self, x: &[f64]) -> Result<Arc<Blocks<f64>>> {
        let dims = self.dims();
        dims.check_len(x.len())?;
        let key: Vec<u64> = x.iter().map(|c| c.to_bits()).collect();
        if let Some(b) = self.lock_cache().get(&key) {
            return Ok(b.clone());
        }
        let blocks = Arc::new(Blocks::compute(self.bound(), x, dims)?);
        let mut cache = self.lock_cache();
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, blocks.clone());
        Ok(blocks)
    }

    fn lock_cache(&self) -> std::sync::MutexGuard<'_, HashMap<Vec<u64>, Arc<Blocks<f64>>>> {
        // a poisoned cache holds only complete entries
        self.inner.cache.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn lagrangian(&self, x: &[f64]) -> Result<f64> {
        Ok(self.blocks(x)?.l)
    }

    /// `W`, its determinant and condition number; fails when `L` is not
    /// regular at `x`.
    pub fn regularity_check(&self, x: &[f64]) -> Result<Regularity> {
        let b = self.blocks(x)?;
        regularity_of(&b, x, self.dims())
    }

    /// Rows are the components of `lambda_i = dz_i - L_{v_j} dq_j`.
    pub fn contact_coframe(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.regularity_check(x)?;
        Ok(coframe_rows(&*self.blocks(x)?, self.dims()))
    }

    /// Rows are the components of `R_k = dz_k - W^{ij} L_{v_i z_k} dv_j`.
    pub fn reeb_fields(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let b = self.blocks(x)?;
        regularity_of(&b, x, self.dims())?;
        reeb_rows(&b, x, self.dims())
    }

    /// `E_L = v L_v - L`.
    pub fn energy(&self, x: &[f64]) -> Result<f64> {
        Ok(self.blocks(x)?.energy(x, self.dims()))
    }

    /// `dE_L`, from `d_b E = v_i L_{v_i b} - L_b` off the velocity slots and
    /// `v_i L_{v_i b}` on them.
    pub fn energy_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let dims = self.dims();
        let b = self.blocks(x)?;
        let mut g: Vec<f64> = b.grad.iter().map(|d| -d).collect();
        for s in dims.v_range() {
            g[s] = 0.0;
        }
        for i in 0..dims.n {
            let vi = x[dims.v_slot(i)];
            for (gb, h) in g.iter_mut().zip(b.v_row(dims, i)) {
                *gb += vi * h;
            }
        }
        Ok(g)
    }

    /// The closed-form energy field `X_{E_L}` at `x`.
    pub fn lagrangian_vector_field(&self, x: &[f64]) -> Result<Vec<f64>> {
        let b = self.blocks(x)?;
        regularity_of(&b, x, self.dims())?;
        b.field(x, self.dims()).ok_or_else(|| singular(x, 0.0))
    }

    /// `J[a][b] = d X^a / d x^b` of the energy field, exact by nested
    /// hyper-dual evaluation.
    pub fn vector_field_jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let dims = self.dims();
        self.regularity_check(x)?;
        let dim = dims.dim();
        let mut jac = DMatrix::zeros(dim, dim);
        let mut seeded: Vec<HyperDual<f64>> = x.iter().map(|&c| HyperDual::constant(c)).collect();
        for b in 0..dim {
            seeded[b] = HyperDual::seeded(x[b], true, false);
            let blocks = Blocks::compute(self.bound(), &seeded, dims)?;
            let field = blocks.field(&seeded, dims).ok_or_else(|| singular(x, 0.0))?;
            for (a, c) in field.iter().enumerate() {
                jac[(a, b)] = c.d_a;
            }
            seeded[b] = HyperDual::constant(x[b]);
        }
        Ok(jac)
    }

    /// `d/dt L_{v_k} - L_{q_k} - (sum_i L_{z_i}) L_{v_k}` for the state `x`
    /// moving with `q' = v`, `v' = acceleration`, `z_i' = L`.
    pub fn herglotz_residual(&self, x: &[f64], acceleration: &[f64]) -> Result<Vec<f64>> {
        Ok(self.herglotz_terms(x, acceleration)?.0)
    }

    /// Residual together with a per-component force scale: one plus the sum
    /// of the magnitudes of the terms that make up the residual.
    pub fn herglotz_terms(&self, x: &[f64], acceleration: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let dims = self.dims();
        if acceleration.len() != dims.n {
            return Err(Error::DimensionMismatch {
                expected: dims.n,
                got: acceleration.len(),
            });
        }
        let b = self.blocks(x)?;
        regularity_of(&b, x, dims)?;
        let lz_sum = b.lz_sum(dims);
        let mut residual = Vec::with_capacity(dims.n);
        let mut scale = Vec::with_capacity(dims.n);
        for k in 0..dims.n {
            let mut terms = Vec::with_capacity(2 * dims.n + dims.qcount + 2);
            for j in 0..dims.n {
                terms.push(b.lvq[k][j] * x[dims.v_slot(j)]);
                terms.push(b.w[k][j] * acceleration[j]);
            }
            for l in 0..dims.qcount {
                terms.push(b.lvz[k][l] * b.l);
            }
            terms.push(-b.lq(dims, k));
            terms.push(-lz_sum * b.lv(dims, k));
            residual.push(terms.iter().sum());
            scale.push(1.0 + terms.iter().map(|t| t.abs()).sum::<f64>());
        }
        Ok((residual, scale))
    }

    /// The induced q-contact structure `(lambda^L, R)`.
    pub fn to_general_structure(&self) -> QContactStructure {
        QContactStructure::new(
            self.name(),
            Arc::new(LagrangianCoframe(self.clone())),
            self.params().clone(),
        )
    }

    pub fn energy_field(&self) -> EnergyField {
        EnergyField(self.clone())
    }

    pub fn vector_field(&self) -> LagrangianField {
        LagrangianField(self.clone())
    }
}

fn singular(x: &[f64], det: f64) -> Error {
    Error::SingularLagrangian { point: x.to_vec(), det }
}

fn regularity_of(b: &Blocks<f64>, x: &[f64], dims: Dims) -> Result<Regularity> {
    let n = dims.n;
    let w = DMatrix::from_fn(n, n, |i, j| b.w[i][j]);
    let det = w.determinant();
    let scale = w.norm().powi(n as i32).max(1.0);
    if !(det.abs() >= REGULARITY_RTOL * scale) {
        return Err(singular(x, det));
    }
    let sv = w.clone().singular_values();
    let condition_number = sv.max() / sv.min();
    Ok(Regularity {
        w,
        det,
        condition_number,
    })
}

fn coframe_rows(b: &Blocks<f64>, dims: Dims) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dims.qcount, dims.dim());
    for i in 0..dims.qcount {
        for j in 0..dims.n {
            m[(i, dims.q_slot(j))] = -b.lv(dims, j);
        }
        m[(i, dims.z_slot(i))] = 1.0;
    }
    m
}

fn reeb_rows(b: &Blocks<f64>, x: &[f64], dims: Dims) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(dims.qcount, dims.dim());
    for k in 0..dims.qcount {
        let col: Vec<f64> = (0..dims.n).map(|i| b.lvz[i][k]).collect();
        let y = local::solve(b.w.clone(), col).ok_or_else(|| singular(x, 0.0))?;
        for j in 0..dims.n {
            m[(k, dims.v_slot(j))] = -y[j];
        }
        m[(k, dims.z_slot(k))] = 1.0;
    }
    Ok(m)
}

/// The induced coframe of a Lagrangian system.
struct LagrangianCoframe(LagrangianSystem);

impl Coframe for LagrangianCoframe {
    fn dims(&self) -> Dims {
        self.0.dims()
    }

    fn forms(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.0.contact_coframe(x)
    }

    fn form_jacobians(&self, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        let dims = self.0.dims();
        let b = self.0.blocks(x)?;
        let mut j = DMatrix::zeros(dims.dim(), dims.dim());
        for i in 0..dims.n {
            for (col, h) in b.v_row(dims, i).into_iter().enumerate() {
                j[(dims.q_slot(i), col)] = -h;
            }
        }
        Ok(vec![j; dims.qcount])
    }

    fn reeb(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.0.reeb_fields(x)
    }
}

/// `E_L` as a scalar field.
#[derive(Clone, Debug)]
pub struct EnergyField(pub LagrangianSystem);

impl ScalarField for EnergyField {
    fn dims(&self) -> Dims {
        self.0.dims()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.0.energy(x)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.0.energy_gradient(x)
    }
}

/// `X_{E_L}` as a vector field with exact Jacobian.
#[derive(Clone, Debug)]
pub struct LagrangianField(pub LagrangianSystem);

impl VectorField for LagrangianField {
    fn dim(&self) -> usize {
        self.0.dims().dim()
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.0.lagrangian_vector_field(x)
    }

    fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.0.vector_field_jacobian(x)
    }
}
