use std::sync::Arc;

use proptest::prelude::*;
use qcontact::calculus::ScalarField;
use qcontact::dynamics::{integrate, IntegratorConfig, Sampling};
use qcontact::expr::parse_expression;
use qcontact::geometry::{qcontact_bracket, VectorField, VectorFieldSpec};
use qcontact::lagrangian::LagrangianSystem;
use qcontact::models::{self, E1_GAMMAS};
use qcontact::sampling::uniform_points;
use qcontact::symmetry::{
    complete_lift, corollary_terms, dissipated_along_flow, dynamical_symmetry_check, dynamical_symmetry_residual,
    hamiltonian_noether_check, lift_commutator_residual, noether_condition_check, noether_condition_residual,
    vertical_endomorphism, vertical_lift, BaseVectorField, VerticalDerivative, CLASSIFY_RTOL,
};
use qcontact::ExtendedPoint;

fn e1() -> LagrangianSystem {
    models::e1(&E1_GAMMAS).unwrap()
}

fn base(src: &[&str]) -> BaseVectorField {
    BaseVectorField::new(src.iter().map(|s| parse_expression(s).unwrap()).collect()).unwrap()
}

fn field(l: &LagrangianSystem, src: &[String]) -> Arc<dyn VectorField> {
    let comps = src.iter().map(|s| parse_expression(s).unwrap()).collect();
    Arc::new(VectorFieldSpec::new(comps).bind(l.dims(), l.params()).unwrap())
}

fn lagrangians() -> Vec<LagrangianSystem> {
    models::builtin_lagrangians()
        .unwrap()
        .iter()
        .map(|m| m.lagrangian().unwrap().clone())
        .collect()
}

/// Polynomial of degree two in the named variables with the given
/// coefficients, cycled as needed.
fn poly(vars: &[String], coeffs: &[f64]) -> String {
    let mut c = coeffs.iter().cycle();
    let mut terms = vec![format!("{:.4}", c.next().unwrap())];
    for (i, a) in vars.iter().enumerate() {
        terms.push(format!("{:.4}*{a}", c.next().unwrap()));
        for b in &vars[i..] {
            terms.push(format!("{:.4}*{a}*{b}", c.next().unwrap()));
        }
    }
    terms.join(" + ").replace("+ -", "- ")
}

#[test]
fn lift_examples() {
    let d = e1().dims();
    let p = Default::default();
    let x = [1.5, -0.5, 0.2, 0.3];
    let yc = complete_lift(&base(&["q1"]), d, &p).unwrap();
    assert_eq!(yc.eval(&x).unwrap(), [1.5, -0.5, 0.0, 0.0]);
    let yv = vertical_lift(&base(&["q1"]), d, &p).unwrap();
    assert_eq!(yv.eval(&x).unwrap(), [0.0, 1.5, 0.0, 0.0]);
    let yc = complete_lift(&base(&["q1^2"]), d, &p).unwrap();
    assert_eq!(yc.eval(&x).unwrap(), [2.25, -1.5, 0.0, 0.0]);
    assert!(BaseVectorField::new(vec![parse_expression("v1").unwrap()]).is_err());
}

#[test]
fn field_of_the_energy_is_not_a_symmetry_of_the_condition() {
    // residual for X = X_E is -X_E(L) + L sum_i L_{z_i}
    let l = e1();
    let xe: Arc<dyn VectorField> = Arc::new(l.vector_field());
    for x in uniform_points(l.dims(), 5, 1, 2.0) {
        let r = noether_condition_residual(&l, xe.as_ref(), &x).unwrap();
        let grad = l.blocks(&x).unwrap().grad.clone();
        let xel: f64 = grad
            .iter()
            .zip(l.lagrangian_vector_field(&x).unwrap())
            .map(|(a, b)| a * b)
            .sum();
        let expected = -xel + l.lagrangian(&x).unwrap() * (-0.3);
        assert!(
            (r - expected).abs() < 1e-12 * (1.0 + expected.abs()),
            "{r} vs {expected}"
        );
    }
}

#[test]
fn vertical_lifts_leave_the_condition_at_zero() {
    // X = Y^v has no q component, so X^v(L) vanishes identically
    let l = e1();
    let yv = vertical_lift(&base(&["q1^2"]), l.dims(), l.params()).unwrap();
    for x in uniform_points(l.dims(), 5, 2, 2.0) {
        assert!(noether_condition_residual(&l, &yv, &x).unwrap().abs() < 1e-12);
    }
}

#[test]
fn dynamical_symmetry_examples() {
    let eq = models::e1(&[0.1, 0.1]).unwrap();
    let pts = uniform_points(eq.dims(), 10, 4, 2.0);
    let shift = field(&eq, &["0".into(), "0".into(), "1".into(), "-1".into()]);
    let r = dynamical_symmetry_check(&eq, shift.as_ref(), &pts, 1e-9).unwrap();
    assert!(r.pass && r.max_residual <= 1e-9, "{r:?}");

    let xe: Arc<dyn VectorField> = Arc::new(eq.vector_field());
    assert!(dynamical_symmetry_residual(&eq, xe.as_ref(), &pts[0])
        .unwrap()
        .iter()
        .all(|c| c.abs() < 1e-12));

    let scale = field(&eq, &["q1".into(), "0".into(), "0".into(), "0".into()]);
    assert!(
        !dynamical_symmetry_check(&eq, scale.as_ref(), &pts, CLASSIFY_RTOL)
            .unwrap()
            .pass
    );
}

#[test]
fn hamiltonian_noether_on_the_two_contact_example() {
    let m = models::two_contact_r4().unwrap();
    let h = m.hamiltonian().unwrap();
    let pts = uniform_points(m.dims(), 10, 5, 2.0);
    let r = hamiltonian_noether_check(&m.structure(), h.clone(), h, &pts, CLASSIFY_RTOL).unwrap();
    assert!(r.pass, "{r:?}");
    for flag in ["noether-symmetry", "dissipated", "converse-hypothesis"] {
        assert!(r.flags[flag], "{flag}");
    }
}

#[test]
fn doubled_energy_is_dissipated_along_free_motion() {
    let model = models::builtin("free2contact").unwrap();
    let l = model.lagrangian().unwrap();
    let f = l.bind(&parse_expression("-(v1^2 + 2*z1 + 2*z2)").unwrap()).unwrap();
    let config = IntegratorConfig::rk45(0.0, 5.0, 1e-11, 1e-11).with_sampling(Sampling::Interval(0.05));
    let traj = integrate(
        &l.vector_field(),
        &ExtendedPoint::new(model.dims(), model.initial.clone()).unwrap(),
        &config,
    )
    .unwrap();
    let flow = dissipated_along_flow(l, &f, &traj).unwrap();
    assert!(flow.max_residual <= 1e-8, "{flow:?}");
}

fn free_trajectory(l: &LagrangianSystem, initial: &[f64]) -> qcontact::dynamics::Trajectory {
    let config = IntegratorConfig::rk45(0.0, 3.0, 1e-11, 1e-11).with_sampling(Sampling::Interval(0.05));
    integrate(
        &l.vector_field(),
        &ExtendedPoint::new(l.dims(), initial.to_vec()).unwrap(),
        &config,
    )
    .unwrap()
}

#[test]
fn a_solution_of_the_condition_yields_a_dissipated_quantity() {
    let model = models::builtin("free2contact").unwrap();
    let l = model.lagrangian().unwrap();
    let y: Arc<dyn VectorField> = Arc::new(complete_lift(&base(&["1"]), l.dims(), l.params()).unwrap());
    let pts = uniform_points(l.dims(), 20, 11, 2.0);
    let r = noether_condition_check(l, y.as_ref(), &pts, 1e-9).unwrap();
    assert!(r.pass && r.max_residual <= 1e-12, "{r:?}");
    let f = VerticalDerivative::new(l.clone(), y);
    for x0 in [vec![0.0, 1.0, 0.0, 0.0], vec![0.5, -1.5, 0.3, -0.2]] {
        let flow = dissipated_along_flow(l, &f, &free_trajectory(l, &x0)).unwrap();
        assert!(flow.max_residual <= 1e-6, "{flow:?}");
    }
}

#[test]
fn a_dynamical_symmetry_with_equal_coframe_values_gives_a_dissipated_quantity() {
    let model = models::builtin("free2contact").unwrap();
    let l = model.lagrangian().unwrap();
    let lag = "(v1^2/2 - z1 - z2)";
    let y = field(
        l,
        &["2*v1".into(), "-4*v1".into(), format!("2*{lag}"), format!("2*{lag}")],
    );
    let pts = uniform_points(l.dims(), 20, 12, 2.0);
    let r = dynamical_symmetry_check(l, y.as_ref(), &pts, CLASSIFY_RTOL).unwrap();
    assert!(r.pass, "{r:?}");
    let s = l.to_general_structure();
    for x in &pts {
        let yv = y.eval(x).unwrap();
        let forms = s.forms(x).unwrap();
        let values: Vec<f64> = forms
            .row_iter()
            .map(|row| row.iter().zip(&yv).map(|(a, b)| a * b).sum())
            .collect();
        assert!((values[0] - values[1]).abs() < 1e-12, "{values:?}");
    }
    // lambda_1(Y) = -2 E_L here
    let f = l.bind(&parse_expression("-(v1^2 + 2*z1 + 2*z2)").unwrap()).unwrap();
    let flow = dissipated_along_flow(l, &f, &free_trajectory(l, &[0.2, 0.7, -0.1, 0.4])).unwrap();
    assert!(flow.max_residual <= 1e-6, "{flow:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn vertical_lift_is_the_image_of_the_complete_lift(
        coeffs in proptest::collection::vec(-2.0f64..2.0, 6),
        x in proptest::collection::vec(-2.0f64..2.0, 4),
    ) {
        let l = e1();
        let y = base(&[&poly(&["q1".into()], &coeffs)]);
        let yc = complete_lift(&y, l.dims(), l.params()).unwrap().eval(&x).unwrap();
        let yv = vertical_lift(&y, l.dims(), l.params()).unwrap().eval(&x).unwrap();
        prop_assert_eq!(vertical_endomorphism(l.dims(), &yc), yv);
    }

    #[test]
    fn complete_lifts_commute_with_the_field_under_s(
        coeffs in proptest::collection::vec(-2.0f64..2.0, 6),
        which in 0usize..3,
        seed in 0u64..1000,
    ) {
        let l = &lagrangians()[which];
        let y = base(&[&poly(&["q1".into()], &coeffs)]);
        for x in uniform_points(l.dims(), 3, seed, 2.0) {
            prop_assert!(lift_commutator_residual(l, &y, &x).unwrap() <= 1e-7);
        }
    }

    #[test]
    fn the_condition_equals_the_bracket_with_the_vertical_derivative(
        coeffs in proptest::collection::vec(-1.5f64..1.5, 12),
        x in proptest::collection::vec(-1.5f64..1.5, 4),
    ) {
        let l = e1();
        let vars: Vec<String> = ["q1", "v1", "z1", "z2"].iter().map(|s| s.to_string()).collect();
        let comps: Vec<String> = (0..4).map(|k| poly(&vars, &coeffs[3 * k..])).collect();
        let xf = field(&l, &comps);
        let r = noether_condition_residual(&l, xf.as_ref(), &x).unwrap();
        let g = VerticalDerivative::new(l.clone(), xf.clone());
        let b = qcontact_bracket(&l.to_general_structure(), &l.energy_field(), &g, &x).unwrap();
        prop_assert!((r - b).abs() <= 1e-9 * (1.0 + r.abs() + g.value(&x).unwrap().abs()), "{} vs {}", r, b);
    }

    #[test]
    fn corollary_bracket_is_minus_the_complete_lift_derivative(
        coeffs in proptest::collection::vec(-2.0f64..2.0, 6),
        which in 0usize..3,
        x in proptest::collection::vec(-2.0f64..2.0, 5),
    ) {
        let l = &lagrangians()[which];
        let y = base(&[&poly(&["q1".into()], &coeffs)]);
        let (bracket, ycl) = corollary_terms(l, &y, &x[..l.dims().dim()]).unwrap();
        prop_assert!((bracket + ycl).abs() <= 1e-8 * (1.0 + ycl.abs()), "{} vs {}", bracket, ycl);
    }
}
