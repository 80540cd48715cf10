use proptest::prelude::*;
use qcontact::geometry::{hamiltonian_vector_field, VectorField};
use qcontact::lagrangian::LagrangianSystem;
use qcontact::models::{self, E1_GAMMAS};
use qcontact::{Dims, Error, Params};

fn e1() -> LagrangianSystem {
    models::e1(&E1_GAMMAS).unwrap()
}

fn coupled() -> LagrangianSystem {
    let params: Params = [("c".to_string(), 0.3)].into_iter().collect();
    LagrangianSystem::parse(
        "coupled",
        Dims::new(2, 2).unwrap(),
        "v1^2/2 + v2^2 + c*v1*v2 - q1^2*q2/3 - (1 + v1^2/10)*z1 - c*z2",
        params,
    )
    .unwrap()
}

fn state(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-2.0f64..2.0, dim)
}

#[test]
fn e1_field_and_energy_at_a_known_point() {
    let l = e1();
    let x = [1.0, 1.0, 0.0, 0.0];
    let xe = l.lagrangian_vector_field(&x).unwrap();
    for (a, b) in xe.iter().zip([1.0, -1.3, 0.0, 0.0]) {
        assert!((a - b).abs() < 1e-14, "{xe:?}");
    }
    assert!((l.energy(&[1.0, 1.0, 2.0, -1.0]).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn e1_reeb_fields_are_coordinate_fields() {
    let r = e1().reeb_fields(&[0.4, -0.7, 1.0, 2.0]).unwrap();
    assert_eq!(
        r,
        nalgebra::DMatrix::from_row_slice(2, 4, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0])
    );
}

#[test]
fn singular_lagrangians_are_rejected() {
    let l = LagrangianSystem::parse("linear", Dims::new(1, 1).unwrap(), "v1 - q1^2 - z1", Params::new()).unwrap();
    let x = [0.5, 0.5, 0.0];
    assert!(matches!(
        l.lagrangian_vector_field(&x),
        Err(Error::SingularLagrangian { .. })
    ));
    assert!(matches!(l.regularity_check(&x), Err(Error::SingularLagrangian { .. })));
}

#[test]
fn rocket_energy_at_launch() {
    let model = models::builtin("rocket").unwrap();
    let e = model.lagrangian().unwrap().energy(&model.initial).unwrap();
    assert!((e - 7.405e7).abs() < 1.0, "{e}");
}

#[test]
fn field_jacobian_matches_differences() {
    let l = coupled();
    let x = [0.3, -0.4, 0.8, 0.1, 0.2, -0.5];
    let exact = l.vector_field_jacobian(&x).unwrap();
    let fd = qcontact::geometry::fd_jacobian(|y| l.lagrangian_vector_field(y), &x).unwrap();
    assert!((&exact - &fd).amax() < 1e-7 * (1.0 + exact.amax()), "{exact}\n{fd}");
    assert_eq!(l.vector_field().jacobian(&x).unwrap(), exact);
}

proptest! {
    #[test]
    fn energy_is_velocity_action_minus_lagrangian(x in state(4)) {
        let l = e1();
        let expected = x[1] * x[1] / 2.0 + x[0] * x[0] / 2.0 + 0.1 * x[2] + 0.2 * x[3];
        prop_assert!((l.energy(&x).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn closed_form_field_matches_the_general_solver(x in state(6)) {
        let l = coupled();
        let closed = l.lagrangian_vector_field(&x).unwrap();
        let solved = hamiltonian_vector_field(&l.to_general_structure(), &l.energy_field(), &x).unwrap();
        for (a, b) in closed.iter().zip(&solved) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{:?} vs {:?}", closed, solved);
        }
    }

    #[test]
    fn the_field_solves_the_herglotz_equations(x in state(6)) {
        let l = coupled();
        let d = l.dims();
        let xe = l.lagrangian_vector_field(&x).unwrap();
        let acc: Vec<f64> = d.v_range().map(|s| xe[s]).collect();
        let (r, scale) = l.herglotz_terms(&x, &acc).unwrap();
        for (ri, si) in r.iter().zip(&scale) {
            prop_assert!(ri.abs() / si < 1e-12);
        }
        // z moves with L, q with v
        let lag = l.lagrangian(&x).unwrap();
        for k in d.z_range() {
            prop_assert!((xe[k] - lag).abs() < 1e-14);
        }
        for i in 0..d.n {
            prop_assert_eq!(xe[d.q_slot(i)], x[d.v_slot(i)]);
        }
    }

    #[test]
    fn induced_coframe_pairs_the_field_to_minus_energy(x in state(6)) {
        let l = coupled();
        let forms = l.contact_coframe(&x).unwrap();
        let xe = l.lagrangian_vector_field(&x).unwrap();
        let e = l.energy(&x).unwrap();
        for row in forms.row_iter() {
            let pairing: f64 = row.iter().zip(&xe).map(|(a, b)| a * b).sum();
            prop_assert!((pairing + e).abs() <= 1e-12 * (1.0 + e.abs()));
        }
    }
}
