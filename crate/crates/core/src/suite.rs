//! Verification suites run by `qcontact verify`.
//!
//! Every check name produced here is listed in `docs/checks.md`. A check
//! that cannot be evaluated is reported as failed with the error as detail;
//! it never aborts the rest of the suite.

use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::calculus::oracle::{fd_gradient, fd_hessian, FIRST_ORDER_STEP, SECOND_ORDER_STEP};
use crate::calculus::{gradient_at, hessian_block_at, ScalarField};
use crate::dynamics::{
    herglotz_along, integrate, integrate_ode, integrate_pontryagin, verify_stationarity, IntegratorConfig, Method,
    Sampling, Trajectory, DEFAULT_ABS_TOL, DEFAULT_REL_TOL, EXTREMAL_TOLERANCE,
};
use crate::expr::parse_expression;
use crate::geometry::{
    conserved_quantity_residual, hamiltonian_vector_field, qcontact_bracket, reeb_derivative_sum, verify_structure,
    QContactStructure, VectorField,
};
use crate::lagrangian::LagrangianSystem;
use crate::models::Model;
use crate::point::ExtendedPoint;
use crate::report::CheckResult;
use crate::sampling::{uniform_points, DEFAULT_RADIUS};
use crate::symmetry::{
    cartan_symmetry_check, hamiltonian_noether_check, lift_commutator_residual, BaseVectorField, CLASSIFY_RTOL,
};
use crate::{Error, Result};

/// Relative tolerance for pointwise identities that hold exactly.
pub const IDENTITY_RTOL: f64 = 1e-9;
/// Relative tolerance for the closed-form field against the general solver.
pub const ORACLE_RTOL: f64 = 1e-7;
/// Relative tolerance for derivatives against central differences.
pub const JET_RTOL: f64 = 1e-6;
/// Relative tolerance for quantities integrated along a trajectory.
pub const FLOW_RTOL: f64 = 1e-7;
/// Absolute tolerance for the drift of `z_i - z_j`.
pub const DIFFERENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Structure,
    Dynamics,
    Noether,
    Pontryagin,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "structure" => Suite::Structure,
            "dynamics" => Suite::Dynamics,
            "noether" => Suite::Noether,
            "pontryagin" => Suite::Pontryagin,
            "all" => Suite::All,
            other => return Err(Error::Model(format!("unknown suite '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    /// Random points in addition to the model's initial state.
    pub points: usize,
    pub seed: u64,
    /// Overrides the structure's own tolerance for the structural checks.
    pub tolerance: Option<f64>,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Output spacing of the trajectories used by the flow checks.
    pub sample_interval: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            points: 20,
            seed: 42,
            tolerance: None,
            abs_tol: DEFAULT_ABS_TOL,
            rel_tol: DEFAULT_REL_TOL,
            sample_interval: 0.01,
        }
    }
}

impl SuiteOptions {
    pub fn sample_points(&self, model: &Model) -> Vec<Vec<f64>> {
        let mut pts = vec![model.initial.clone()];
        pts.extend(uniform_points(model.dims(), self.points, self.seed, DEFAULT_RADIUS));
        pts
    }

    fn integrator(&self, model: &Model) -> IntegratorConfig {
        IntegratorConfig::rk45(model.t_span.0, model.t_span.1, self.abs_tol, self.rel_tol)
            .with_sampling(Sampling::Interval(self.sample_interval))
    }
}

/// Runs one suite, or all four, on `model`.
pub fn run_suite(model: &Model, suite: Suite, opts: &SuiteOptions) -> Vec<CheckResult> {
    match suite {
        Suite::Structure => structure_checks(model, opts),
        Suite::Dynamics => dynamics_checks(model, opts),
        Suite::Noether => noether_checks(model, opts),
        Suite::Pontryagin => pontryagin_checks(model, opts),
        Suite::All => {
            let parts: [fn(&Model, &SuiteOptions) -> Vec<CheckResult>; 4] =
                [structure_checks, dynamics_checks, noether_checks, pontryagin_checks];
            std::thread::scope(|scope| {
                let handles: Vec<_> = parts.iter().map(|f| scope.spawn(move || f(model, opts))).collect();
                handles
                    .into_iter()
                    .flat_map(|h| h.join().expect("suite thread panicked"))
                    .collect()
            })
        }
    }
}

fn guarded(name: &str, tol: f64, f: impl FnOnce() -> Result<CheckResult>) -> CheckResult {
    f().unwrap_or_else(|e| CheckResult::errored(name, tol, e.to_string()))
}

/// Pointwise relative residuals collected into one check.
fn pointwise(name: &str, tol: f64, points: &[Vec<f64>], mut f: impl FnMut(&[f64]) -> Result<f64>) -> CheckResult {
    guarded(name, tol, || {
        let samples = points.iter().map(|x| f(x)).collect::<Result<Vec<_>>>()?;
        Ok(CheckResult::from_samples(name, samples, tol))
    })
}

fn amax(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn structure_checks(model: &Model, opts: &SuiteOptions) -> Vec<CheckResult> {
    let mut s = model.structure();
    if let Some(tol) = opts.tolerance {
        s = s.with_tolerance(tol);
    }
    let points = opts.sample_points(model);
    let mut out = match verify_structure(&s, &points) {
        Ok(r) => r.checks,
        Err(e) => vec![CheckResult::errored("structure", s.tolerance(), e.to_string())],
    };
    let h = match model.hamiltonian() {
        Ok(h) => h,
        Err(e) => {
            out.push(CheckResult::errored("hamiltonian", s.tolerance(), e.to_string()));
            return out;
        }
    };
    out.push(pointwise("dissipation-law", IDENTITY_RTOL, &points, |x| {
        let xh = hamiltonian_vector_field(&s, h.as_ref(), x)?;
        let rate = h.derivative_along(x, &xh)?;
        let damping = h.value(x)? * reeb_derivative_sum(&s, h.as_ref(), x)?;
        Ok((rate + damping).abs() / (1.0 + rate.abs() + damping.abs()))
    }));
    out.push(pointwise("bracket-self", IDENTITY_RTOL, &points, |x| {
        let b = qcontact_bracket(&s, h.as_ref(), h.as_ref(), x)?;
        let xh = hamiltonian_vector_field(&s, h.as_ref(), x)?;
        Ok(b.abs() / (1.0 + h.derivative_along(x, &xh)?.abs()))
    }));
    if let Some(l) = model.lagrangian() {
        out.extend(lagrangian_structure_checks(l, &s, &points));
    }
    out
}

fn lagrangian_structure_checks(l: &LagrangianSystem, s: &QContactStructure, points: &[Vec<f64>]) -> Vec<CheckResult> {
    let energy = l.energy_field();
    vec![
        pointwise("regularity", 0.0, points, |x| {
            l.regularity_check(x)?;
            Ok(0.0)
        }),
        pointwise("field-oracle", ORACLE_RTOL, points, |x| {
            let closed = l.lagrangian_vector_field(x)?;
            let solved = hamiltonian_vector_field(s, &energy, x)?;
            let diff: Vec<f64> = closed.iter().zip(&solved).map(|(a, b)| a - b).collect();
            Ok(amax(&diff) / (1.0 + amax(&closed)))
        }),
        pointwise("jet-gradient", JET_RTOL, points, |x| jet_mismatch(l, x).map(|j| j.0)),
        pointwise("jet-hessian", JET_RTOL, points, |x| jet_mismatch(l, x).map(|j| j.1)),
    ]
}

/// Relative mismatch of hyper-dual gradient and Hessian of `L` against
/// central differences, scaled by `1 + max |entry|`.
pub fn jet_mismatch(l: &LagrangianSystem, x: &[f64]) -> Result<(f64, f64)> {
    let f = l.bound();
    let g = gradient_at(f, x)?;
    let gd = fd_gradient(f, x, FIRST_ORDER_STEP)?;
    let gdiff: Vec<f64> = g.iter().zip(&gd).map(|(a, b)| a - b).collect();
    let all: Vec<usize> = (0..x.len()).collect();
    let hess = hessian_block_at(f, x, &all, &all)?;
    let h = DMatrix::from_fn(x.len(), x.len(), |i, j| hess[i][j]);
    let hd = fd_hessian(f, x, SECOND_ORDER_STEP)?;
    Ok((amax(&gdiff) / (1.0 + amax(&g)), (&h - hd).amax() / (1.0 + h.amax())))
}

/// Integrates the dissipation law in the form `H(x(t)) exp(w(t)) = H(x(0))`
/// with `w' = sum_i R_i(H)` carried as an extra state, and returns the
/// largest deviation relative to `1 + |H(x(0))|`.
pub fn dissipation_drift(model: &Model, config: &IntegratorConfig) -> Result<f64> {
    let s = model.structure();
    let h = model.hamiltonian()?;
    let field = model.vector_field()?;
    let mut y0 = model.initial.clone();
    y0.push(0.0);
    let dim = model.dims().dim();
    let sol = integrate_ode(
        |_, y| {
            let x = &y[..dim];
            let mut d = field.eval(x)?;
            d.push(reeb_derivative_sum(&s, h.as_ref(), x)?);
            Ok(d)
        },
        &y0,
        config,
    )?;
    let h0 = h.value(&model.initial)?;
    let mut worst: f64 = 0.0;
    for y in &sol.states {
        let r = h.value(&y[..dim])? * y[dim].exp() - h0;
        worst = worst.max(r.abs() / (1.0 + h0.abs()));
    }
    Ok(worst)
}

/// Largest drift of `z_i - z_j` over all pairs along a trajectory.
pub fn difference_drift(traj: &Trajectory) -> f64 {
    let d = traj.dims;
    let first = &traj.states[0];
    let mut worst: f64 = 0.0;
    for x in &traj.states {
        for i in 0..d.qcount {
            for j in i + 1..d.qcount {
                let now = x[d.z_slot(i)] - x[d.z_slot(j)];
                let then = first[d.z_slot(i)] - first[d.z_slot(j)];
                worst = worst.max((now - then).abs());
            }
        }
    }
    worst
}

fn model_trajectory(model: &Model, config: &IntegratorConfig) -> Result<Trajectory> {
    let field = model.vector_field()?;
    let initial = ExtendedPoint::new(model.dims(), model.initial.clone())?;
    integrate(field.as_ref(), &initial, config)
}

fn dynamics_checks(model: &Model, opts: &SuiteOptions) -> Vec<CheckResult> {
    let config = opts.integrator(model);
    let mut out = vec![guarded("dissipation-drift", FLOW_RTOL, || {
        Ok(CheckResult::new(
            "dissipation-drift",
            dissipation_drift(model, &config)?,
            FLOW_RTOL,
        ))
    })];
    let Some(l) = model.lagrangian() else {
        return out;
    };
    let traj = match model_trajectory(model, &config) {
        Ok(t) => t,
        Err(e) => {
            out.push(CheckResult::errored("trajectory", FLOW_RTOL, e.to_string()));
            return out;
        }
    };
    out.push(guarded("herglotz-residual", FLOW_RTOL, || {
        let series = herglotz_along(&traj, l)?;
        Ok(CheckResult::from_samples(
            "herglotz-residual",
            series.normalized,
            FLOW_RTOL,
        ))
    }));
    if model.dims().qcount > 1 {
        out.push(CheckResult::new(
            "difference-invariants",
            difference_drift(&traj),
            DIFFERENCE_TOL,
        ));
    }
    out
}

/// `R_k` as a vector field, differentiated by finite differences.
struct ReebField {
    structure: QContactStructure,
    index: usize,
}

impl VectorField for ReebField {
    fn dim(&self) -> usize {
        self.structure.dims().dim()
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.structure.reeb(x)?.row(self.index).iter().copied().collect())
    }
}

fn base_fields(n: usize) -> Result<Vec<BaseVectorField>> {
    let make = |f: &dyn Fn(usize) -> String| {
        BaseVectorField::new(
            (1..=n)
                .map(|i| parse_expression(&f(i)))
                .collect::<std::result::Result<_, _>>()?,
        )
    };
    Ok(vec![
        make(&|_| "1".into())?,
        make(&|i| format!("q{i}"))?,
        make(&|i| format!("q{i}^2 + 1"))?,
    ])
}

fn noether_checks(model: &Model, opts: &SuiteOptions) -> Vec<CheckResult> {
    let points = opts.sample_points(model);
    let s = model.structure();
    let mut out = Vec::new();
    out.push(guarded("hamiltonian-noether", 0.0, || {
        let h = model.hamiltonian()?;
        let r = hamiltonian_noether_check(&s, h.clone(), h, &points, CLASSIFY_RTOL)?;
        let flags: Vec<String> = r.flags.iter().map(|(k, v)| format!("{k}={v}")).collect();
        Ok(CheckResult::new("hamiltonian-noether", if r.pass { 0.0 } else { 1.0 }, 0.0).with_detail(flags.join(", ")))
    }));
    let Some(l) = model.lagrangian() else {
        return out;
    };
    out.push(guarded("lift-commutator", CLASSIFY_RTOL, || {
        let mut worst: f64 = 0.0;
        for y in base_fields(l.dims().n)? {
            for x in &points {
                worst = worst.max(lift_commutator_residual(l, &y, x)?);
            }
        }
        Ok(CheckResult::new("lift-commutator", worst, CLASSIFY_RTOL))
    }));
    out.push(guarded("reeb-cartan", CLASSIFY_RTOL, || {
        let zero: Arc<dyn ScalarField> = Arc::new(l.bind(&parse_expression("0")?)?);
        let f = vec![zero; l.dims().qcount];
        let mut worst: f64 = 0.0;
        for k in 0..l.dims().qcount {
            let field = Arc::new(ReebField {
                structure: s.clone(),
                index: k,
            });
            let r = cartan_symmetry_check(l, field, &f, &points, CLASSIFY_RTOL)?;
            for p in &r.parts {
                worst = worst.max(p.max_residual);
            }
        }
        Ok(CheckResult::new("reeb-cartan", worst, CLASSIFY_RTOL))
    }));
    let d = l.dims();
    if d.qcount > 1 {
        let energy = l.energy_field();
        out.push(pointwise("difference-conserved", IDENTITY_RTOL, &points, |x| {
            let mut worst: f64 = 0.0;
            for i in 1..d.qcount {
                let g = l.bind(&parse_expression(&format!("z1 - z{}", i + 1))?)?;
                let xe = l.lagrangian_vector_field(x)?;
                let r = conserved_quantity_residual(&s, &energy, &g, x)?;
                worst = worst.max(r.abs() / (1.0 + xe[d.z_slot(0)].abs()));
            }
            Ok(worst)
        }));
    }
    out
}

fn pontryagin_checks(model: &Model, opts: &SuiteOptions) -> Vec<CheckResult> {
    let Some(l) = model.lagrangian() else {
        return Vec::new();
    };
    let config = opts.integrator(model);
    let run = model_trajectory(model, &config)
        .and_then(|traj| integrate_pontryagin(l, &traj, Method::rk45(opts.abs_tol, opts.rel_tol)))
        .and_then(|run| verify_stationarity(&run, l, EXTREMAL_TOLERANCE));
    match run {
        Ok(report) => report.checks(),
        Err(e) => vec![CheckResult::errored("pontryagin", EXTREMAL_TOLERANCE, e.to_string())],
    }
}
