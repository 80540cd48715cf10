//! Lifts of configuration-space fields and the symmetry checks built on them.
//!
//! Residuals are reported raw; every pass/fail flag compares a residual
//! divided by `1 + scale` against the tolerance, where `scale` is the sum of
//! the magnitudes of the terms that cancel.

mod lifts;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

pub use lifts::{
    complete_lift, vertical_endomorphism, vertical_lift, BaseVectorField, CompleteLift, VerticalDerivative,
    VerticalLift,
};

use crate::calculus::ScalarField;
use crate::dynamics::Trajectory;
use crate::geometry::{
    commutator, dissipated_quantity_residual, hamiltonian_vector_field, lie_derivative_coframe, qcontact_bracket,
    reeb_derivative_sum, HamiltonianField, QContactStructure, VectorField,
};
use crate::lagrangian::LagrangianSystem;
use crate::report::CheckResult;
use crate::{Error, Result};

/// Default relative tolerance for classifying a field or function.
pub const CLASSIFY_RTOL: f64 = 1e-7;

/// Outcome of one symmetry check over a set of points or samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub check: String,
    pub points: usize,
    /// Largest raw residual over all parts.
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Individual conditions; their residuals are the relative ones.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<CheckResult>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub flags: BTreeMap<String, bool>,
}

impl SymmetryReport {
    fn from_parts(check: &str, points: usize, tolerance: f64, raw: f64, parts: Vec<CheckResult>) -> Self {
        SymmetryReport {
            check: check.into(),
            points,
            max_residual: raw,
            tolerance,
            pass: parts.iter().all(|p| p.pass),
            parts,
            flags: BTreeMap::new(),
        }
    }

    pub fn part(&self, name: &str) -> Option<&CheckResult> {
        self.parts.iter().find(|p| p.name == name)
    }

    /// The parts as flat check results, for inclusion in a run report.
    pub fn into_checks(self) -> Vec<CheckResult> {
        self.parts
    }
}

fn rel(r: f64, scale: f64) -> f64 {
    r.abs() / (1.0 + scale)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn amax(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn nonempty(points: &[Vec<f64>]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::Model("symmetry checks need at least one point".into()));
    }
    Ok(())
}

/// Raw max accumulator that lets NaN through.
fn worse(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b.abs())
    }
}

/// `-X(L) - [X_E, X]^v(L) + sum_i L_{z_i} H_i` with its scale, where `H_i`
/// is the `z_i` component of `X` and `[.]^v(L) = dL(S[.])`.
pub fn noether_condition_terms(l: &LagrangianSystem, field: &dyn VectorField, x: &[f64]) -> Result<(f64, f64)> {
    let d = l.dims();
    d.check_len(x.len())?;
    let b = l.blocks(x)?;
    let xv = field.eval(x)?;
    let xl = dot(&b.grad, &xv);
    let c = commutator(&l.vector_field(), field, x)?;
    let cv: f64 = (0..d.n).map(|i| b.lv(d, i) * c[d.q_slot(i)]).sum();
    let zh: f64 = (0..d.qcount).map(|i| b.lz(d, i) * xv[d.z_slot(i)]).sum();
    Ok((-xl - cv + zh, xl.abs() + cv.abs() + zh.abs()))
}

pub fn noether_condition_residual(l: &LagrangianSystem, field: &dyn VectorField, x: &[f64]) -> Result<f64> {
    Ok(noether_condition_terms(l, field, x)?.0)
}

/// Evaluates the Noether-type condition at every point.
pub fn noether_condition_check(
    l: &LagrangianSystem,
    field: &dyn VectorField,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<SymmetryReport> {
    nonempty(points)?;
    let mut raw = 0.0;
    let mut relative = Vec::with_capacity(points.len());
    for x in points {
        let (r, s) = noether_condition_terms(l, field, x)?;
        raw = worse(raw, r);
        relative.push(rel(r, s));
    }
    let part = CheckResult::from_samples("noether-condition", relative, tol);
    Ok(SymmetryReport::from_parts(
        "noether-condition",
        points.len(),
        tol,
        raw,
        vec![part],
    ))
}

/// `d/dt f + f sum_i R_i(E_L)` sampled along a trajectory, with the time
/// derivative taken by the chain rule `df(X_E)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowDissipation {
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub max_relative: f64,
}

pub fn dissipated_along_flow(l: &LagrangianSystem, f: &dyn ScalarField, traj: &Trajectory) -> Result<FlowDissipation> {
    let s = l.to_general_structure();
    let energy = l.energy_field();
    let mut residuals = Vec::with_capacity(traj.len());
    let (mut raw, mut relative) = (0.0, 0.0);
    for x in &traj.states {
        let xe = l.lagrangian_vector_field(x)?;
        let rate = f.derivative_along(x, &xe)?;
        let damping = f.value(x)? * reeb_derivative_sum(&s, &energy, x)?;
        let r = rate + damping;
        raw = worse(raw, r);
        relative = worse(relative, rel(r, rate.abs() + damping.abs()));
        residuals.push(r);
    }
    Ok(FlowDissipation {
        residuals,
        max_residual: raw,
        max_relative: relative,
    })
}

/// `[Y, X_E]`, zero for a dynamical symmetry.
pub fn dynamical_symmetry_residual(l: &LagrangianSystem, y: &dyn VectorField, x: &[f64]) -> Result<Vec<f64>> {
    commutator(y, &l.vector_field(), x)
}

pub fn dynamical_symmetry_check(
    l: &LagrangianSystem,
    y: &dyn VectorField,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<SymmetryReport> {
    nonempty(points)?;
    let xe_field = l.vector_field();
    let mut raw = 0.0;
    let mut relative = Vec::with_capacity(points.len());
    for x in points {
        let c = commutator(y, &xe_field, x)?;
        let (yv, xe) = (y.eval(x)?, xe_field.eval(x)?);
        let scale = amax((xe_field.jacobian(x)? * nalgebra::DVector::from_vec(yv)).as_slice())
            + amax((y.jacobian(x)? * nalgebra::DVector::from_vec(xe)).as_slice());
        let r = amax(&c);
        raw = worse(raw, r);
        relative.push(rel(r, scale));
    }
    let part = CheckResult::from_samples("dynamical-symmetry", relative, tol);
    Ok(SymmetryReport::from_parts(
        "dynamical-symmetry",
        points.len(),
        tol,
        raw,
        vec![part],
    ))
}

/// Largest component of `L_Y lambda_i - target_i` over all forms, with the
/// scale of the two Lie derivative terms.
fn lie_mismatch(
    s: &QContactStructure,
    y: &dyn VectorField,
    x: &[f64],
    targets: Option<&[Vec<f64>]>,
) -> Result<(f64, f64)> {
    let lie = lie_derivative_coframe(s, y, x)?;
    let yv = nalgebra::DVector::from_vec(y.eval(x)?);
    let jy = y.jacobian(x)?;
    let forms = s.forms(x)?;
    let jacs = s.coframe().form_jacobians(x)?;
    let (mut r, mut scale) = (0.0f64, 0.0f64);
    for (i, li) in lie.iter().enumerate() {
        let t1 = &jacs[i] * &yv;
        let t2 = jy.transpose() * forms.row(i).transpose();
        scale = scale.max(t1.amax() + t2.amax());
        for (k, v) in li.iter().enumerate() {
            let target = targets.map_or(0.0, |t| t[i][k]);
            scale = scale.max(target.abs());
            r = worse(r, v - target);
        }
    }
    Ok((r, scale))
}

/// Noether symmetry of the Lagrangian system: `Y(E_L) = 0` and
/// `L_Y lambda_i = 0` for every form of the induced structure.
pub fn noether_symmetry_check(
    l: &LagrangianSystem,
    y: &dyn VectorField,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<SymmetryReport> {
    nonempty(points)?;
    let s = l.to_general_structure();
    let mut raw = 0.0;
    let (mut energy, mut coframe) = (Vec::new(), Vec::new());
    for x in points {
        let yv = y.eval(x)?;
        let de = l.energy_gradient(x)?;
        let ye = dot(&de, &yv);
        raw = worse(raw, ye);
        energy.push(rel(ye, amax(&de) * amax(&yv)));
        let (r, scale) = lie_mismatch(&s, y, x, None)?;
        raw = worse(raw, r);
        coframe.push(rel(r, scale));
    }
    let parts = vec![
        CheckResult::from_samples("noether-energy", energy, tol),
        CheckResult::from_samples("noether-coframe", coframe, tol),
    ];
    Ok(SymmetryReport::from_parts(
        "noether-symmetry",
        points.len(),
        tol,
        raw,
        parts,
    ))
}

/// Raw Cartan residuals at one point: `max |L_X lambda_i - df_i|` and
/// `max |R_k(f_i - H_i + X^v(L))|`, with `H_i` the `z_i` component of `X`.
pub fn cartan_symmetry_residual(
    l: &LagrangianSystem,
    field: Arc<dyn VectorField>,
    f: &[Arc<dyn ScalarField>],
    x: &[f64],
) -> Result<(f64, f64)> {
    let (lie, reeb, _, _) = cartan_terms(l, field, f, x)?;
    Ok((lie, reeb))
}

fn cartan_terms(
    l: &LagrangianSystem,
    field: Arc<dyn VectorField>,
    f: &[Arc<dyn ScalarField>],
    x: &[f64],
) -> Result<(f64, f64, f64, f64)> {
    let d = l.dims();
    if f.len() != d.qcount {
        return Err(Error::DimensionMismatch {
            expected: d.qcount,
            got: f.len(),
        });
    }
    let s = l.to_general_structure();
    let df = f.iter().map(|fi| fi.gradient(x)).collect::<Result<Vec<_>>>()?;
    let (lie, lie_scale) = lie_mismatch(&s, field.as_ref(), x, Some(&df))?;

    let jx = field.jacobian(x)?;
    let xvl = VerticalDerivative::new(l.clone(), field.clone()).gradient(x)?;
    let reeb = l.reeb_fields(x)?;
    let (mut r, mut scale) = (0.0f64, 0.0f64);
    for (i, dfi) in df.iter().enumerate() {
        let dh = jx.row(d.z_slot(i));
        for k in 0..d.qcount {
            let rk: Vec<f64> = reeb.row(k).iter().copied().collect();
            let a = dot(dfi, &rk);
            let b = dot(dh.transpose().as_slice(), &rk);
            let c = dot(&xvl, &rk);
            r = worse(r, a - b + c);
            scale = scale.max(a.abs() + b.abs() + c.abs());
        }
    }
    Ok((lie, r, lie_scale, scale))
}

/// Cartan symmetry with functions `f_i`, checked at every point.
pub fn cartan_symmetry_check(
    l: &LagrangianSystem,
    field: Arc<dyn VectorField>,
    f: &[Arc<dyn ScalarField>],
    points: &[Vec<f64>],
    tol: f64,
) -> Result<SymmetryReport> {
    nonempty(points)?;
    let mut raw = 0.0;
    let (mut lie, mut reeb) = (Vec::new(), Vec::new());
    for x in points {
        let (a, b, sa, sb) = cartan_terms(l, field.clone(), f, x)?;
        raw = worse(worse(raw, a), b);
        lie.push(rel(a, sa));
        reeb.push(rel(b, sb));
    }
    let parts = vec![
        CheckResult::from_samples("cartan-lie", lie, tol),
        CheckResult::from_samples("cartan-reeb", reeb, tol),
    ];
    Ok(SymmetryReport::from_parts(
        "cartan-symmetry",
        points.len(),
        tol,
        raw,
        parts,
    ))
}

/// Relates `X_f` being a Noether symmetry of `(s, H)` to `f` being
/// dissipated. The report passes when both implications hold on the sample:
/// a Noether symmetry gives a dissipated `f`, and a dissipated `f` with
/// `R_i(f) = 0` gives a Noether symmetry. The individual classifications are
/// in `flags`.
pub fn hamiltonian_noether_check(
    s: &QContactStructure,
    h: Arc<dyn ScalarField>,
    f: Arc<dyn ScalarField>,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<SymmetryReport> {
    nonempty(points)?;
    let xf = HamiltonianField::new(s.clone(), f.clone());
    let mut raw = 0.0;
    let (mut energy, mut coframe, mut dissipated, mut reeb) = (vec![], vec![], vec![], vec![]);
    for x in points {
        let xfv = hamiltonian_vector_field(s, f.as_ref(), x)?;
        let dh = h.gradient(x)?;
        let e = dot(&dh, &xfv);
        energy.push(rel(e, amax(&dh) * amax(&xfv)));
        let (c, cs) = lie_mismatch(s, &xf, x, None)?;
        coframe.push(rel(c, cs));
        let dis = dissipated_quantity_residual(s, h.as_ref(), f.as_ref(), x)?;
        let xh = hamiltonian_vector_field(s, h.as_ref(), x)?;
        let dscale = f.derivative_along(x, &xh)?.abs() + (f.value(x)? * reeb_derivative_sum(s, h.as_ref(), x)?).abs();
        dissipated.push(rel(dis, dscale));
        let df = f.gradient(x)?;
        let rf = s.reeb(x)?;
        let rmax = rf
            .row_iter()
            .map(|r| dot(r.transpose().as_slice(), &df).abs())
            .fold(0.0, f64::max);
        reeb.push(rel(rmax, amax(&df)));
        raw = worse(worse(worse(worse(raw, e), c), dis), rmax);
    }
    let parts = vec![
        CheckResult::from_samples("xf-energy", energy, tol),
        CheckResult::from_samples("xf-coframe", coframe, tol),
        CheckResult::from_samples("f-dissipated", dissipated, tol),
        CheckResult::from_samples("f-reeb-invariant", reeb, tol),
    ];
    let noether = parts[0].pass && parts[1].pass;
    let is_dissipated = parts[2].pass;
    let converse = is_dissipated && parts[3].pass;
    let consistent = (!noether || is_dissipated) && (!converse || noether);
    let mut report = SymmetryReport::from_parts("hamiltonian-noether", points.len(), tol, raw, parts);
    report.pass = consistent;
    report.flags.insert("noether-symmetry".into(), noether);
    report.flags.insert("dissipated".into(), is_dissipated);
    report.flags.insert("converse-hypothesis".into(), converse);
    Ok(report)
}

/// `({E_L, Y^v(L)}, Y^c(L))` at one point, the bracket taken on the induced
/// structure.
pub fn corollary_terms(l: &LagrangianSystem, y: &BaseVectorField, x: &[f64]) -> Result<(f64, f64)> {
    let d = l.dims();
    let s = l.to_general_structure();
    let yv: Arc<dyn VectorField> = Arc::new(complete_lift(y, d, l.params())?);
    let g = VerticalDerivative::new(l.clone(), yv.clone());
    let bracket = qcontact_bracket(&s, &l.energy_field(), &g, x)?;
    let ycl = dot(&l.blocks(x)?.grad, &yv.eval(x)?);
    Ok((bracket, ycl))
}

/// `max |S [X_E, Y^c]|`, which vanishes for every base field `Y`.
pub fn lift_commutator_residual(l: &LagrangianSystem, y: &BaseVectorField, x: &[f64]) -> Result<f64> {
    let c = commutator(&l.vector_field(), &complete_lift(y, l.dims(), l.params())?, x)?;
    Ok(amax(&vertical_endomorphism(l.dims(), &c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::point::Dims;
    use crate::Params;

    fn e1() -> LagrangianSystem {
        let mut p = Params::new();
        p.insert("g1".into(), 0.1);
        p.insert("g2".into(), 0.2);
        LagrangianSystem::parse("e1", Dims::new(1, 2).unwrap(), "v1^2/2 - q1^2/2 - g1*z1 - g2*z2", p).unwrap()
    }

    fn base(src: &[&str]) -> BaseVectorField {
        BaseVectorField::new(src.iter().map(|s| parse_expression(s).unwrap()).collect()).unwrap()
    }

    fn spec_field(l: &LagrangianSystem, src: &[&str]) -> Arc<dyn VectorField> {
        let spec = crate::geometry::VectorFieldSpec::new(src.iter().map(|s| parse_expression(s).unwrap()).collect());
        Arc::new(spec.bind(l.dims(), l.params()).unwrap())
    }

    fn scalar(l: &LagrangianSystem, src: &str) -> Arc<dyn ScalarField> {
        Arc::new(l.bind(&parse_expression(src).unwrap()).unwrap())
    }

    fn pts() -> Vec<Vec<f64>> {
        crate::sampling::uniform_points(Dims::new(1, 2).unwrap(), 10, 7, 2.0)
    }

    #[test]
    fn the_vertical_bracket_of_a_complete_lift_vanishes() {
        let l = e1();
        for x in pts() {
            assert!(lift_commutator_residual(&l, &base(&["q1^2 + 1"]), &x).unwrap() < 1e-12);
        }
    }

    #[test]
    fn the_corollary_bracket_carries_the_opposite_sign() {
        let l = e1();
        let y = base(&["1"]);
        let (b, ycl) = corollary_terms(&l, &y, &[0.7, 1.1, 0.0, 0.0]).unwrap();
        assert!((b - 0.7).abs() < 1e-9, "{b}");
        assert!((ycl + 0.7).abs() < 1e-12, "{ycl}");
    }

    #[test]
    fn antisymmetric_shift_is_a_noether_symmetry_for_equal_damping() {
        let mut p = Params::new();
        p.insert("g".into(), 0.15);
        let l = LagrangianSystem::parse("eq", Dims::new(1, 2).unwrap(), "v1^2/2 - q1^2/2 - g*z1 - g*z2", p).unwrap();
        let y = spec_field(&l, &["0", "0", "1", "-1"]);
        let r = noether_symmetry_check(&l, y.as_ref(), &pts(), CLASSIFY_RTOL).unwrap();
        assert!(r.pass, "{r:?}");
        let r = noether_symmetry_check(
            &e1(),
            spec_field(&e1(), &["0", "0", "1", "-1"]).as_ref(),
            &pts(),
            CLASSIFY_RTOL,
        )
        .unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn cartan_examples() {
        let l = e1();
        let x = spec_field(&l, &["0", "1", "z1", "z2"]);
        let f = vec![scalar(&l, "z1 - q1"), scalar(&l, "z2 - q1")];
        let r = cartan_symmetry_check(&l, x, &f, &pts(), CLASSIFY_RTOL).unwrap();
        assert!(r.pass, "{r:?}");

        let x = spec_field(&l, &["0", "v1", "0", "0"]);
        let f = vec![scalar(&l, "0"), scalar(&l, "0")];
        let p = vec![vec![0.3, 1.5, 0.0, 0.0]];
        let r = cartan_symmetry_check(&l, x.clone(), &f, &p, CLASSIFY_RTOL).unwrap();
        assert!(!r.pass);
        let (lie, _) = cartan_symmetry_residual(&l, x, &f, &p[0]).unwrap();
        assert!((lie - 1.5).abs() < 1e-12);
    }

    #[test]
    fn noether_condition_holds_for_a_translation_with_free_motion() {
        let l = LagrangianSystem::parse("free", Dims::new(1, 2).unwrap(), "v1^2/2 - z1 - z2", Params::new()).unwrap();
        let y = complete_lift(&base(&["1"]), l.dims(), l.params()).unwrap();
        let r = noether_condition_check(&l, &y, &pts(), CLASSIFY_RTOL).unwrap();
        assert!(r.pass && r.max_residual < 1e-12, "{r:?}");
    }

    #[test]
    fn energy_is_dissipated_but_its_field_is_not_a_noether_symmetry() {
        let l = e1();
        let s = l.to_general_structure();
        let e: Arc<dyn ScalarField> = Arc::new(l.energy_field());
        let r = hamiltonian_noether_check(&s, e.clone(), e, &pts(), CLASSIFY_RTOL).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.flags["dissipated"]);
        assert!(!r.flags["converse-hypothesis"]);
    }

    #[test]
    fn empty_point_sets_are_rejected() {
        let l = e1();
        let y = spec_field(&l, &["0", "0", "1", "-1"]);
        assert!(noether_symmetry_check(&l, y.as_ref(), &[], 1e-7).is_err());
    }
}
