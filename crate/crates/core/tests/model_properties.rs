use omnicrawl::design::{climb_margin, optimize_torques, verify_solution};
use omnicrawl::statics::{
    assemble_equalities, assemble_inequalities, posture_from_geometry, EquationVariant,
    FrictionSidedness, PipeScenario, Posture, RobotParams,
};
use omnicrawl::Error;
use proptest::prelude::*;
use std::f64::consts::PI;

/// Optima of the same problems solved with scipy's HiGHS backend.
const HIGHS_OPTIMA: [(f64, f64, EquationVariant, f64); 6] = [
    (0.075, 0.7, EquationVariant::AsPrinted, 0.65674816640917),
    (0.075, 0.7, EquationVariant::SymmetryCorrected, 0.6863590652280089),
    (0.075, 0.3, EquationVariant::AsPrinted, 1.5493161140341156),
    (0.075, 0.55, EquationVariant::AsPrinted, 0.8396821559378731),
    (0.075, 0.9, EquationVariant::AsPrinted, 0.5072310834612276),
    (0.090, 0.7, EquationVariant::AsPrinted, 0.6291161501473274),
];

#[test]
fn optima_match_independent_solver() {
    let params = RobotParams::table_i();
    for (d, mu, variant, expected) in HIGHS_OPTIMA {
        let s = PipeScenario::new(d, mu).with_variant(variant);
        let sol = optimize_torques(&params, &s).unwrap();
        assert!(
            (sol.objective - expected).abs() < 1e-9,
            "{d} {mu} {variant:?}: {} vs {expected}",
            sol.objective
        );
    }
}

#[test]
fn sidedness_and_contact_flags_do_not_move_baseline() {
    let params = RobotParams::table_i();
    let base = optimize_torques(&params, &PipeScenario::new(0.075, 0.7)).unwrap();
    for sided in [FrictionSidedness::OneSidedAsPrinted, FrictionSidedness::TwoSidedPhysical] {
        for nn in [true, false] {
            let mut s = PipeScenario::new(0.075, 0.7);
            s.friction_sidedness = sided;
            s.normals_nonnegative = nn;
            let sol = optimize_torques(&params, &s).unwrap();
            assert!((sol.objective - base.objective).abs() < 1e-9);
            assert!(verify_solution(&sol, &params, 1e-8).unwrap().pass);
        }
    }
}

#[test]
fn objective_non_increasing_in_friction() {
    let params = RobotParams::table_i();
    for d in [0.065, 0.075, 0.09, 0.1] {
        let mut prev = f64::INFINITY;
        for k in 0..=30 {
            let mu = 0.2 + 0.025 * k as f64;
            match optimize_torques(&params, &PipeScenario::new(d, mu)) {
                Ok(sol) => {
                    assert!(sol.objective <= prev + 1e-9, "D={d} mu={mu}");
                    prev = sol.objective;
                }
                Err(Error::NoStaticEquilibrium { .. }) => assert!(prev.is_infinite()),
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn every_solution_has_nonnegative_slip_margin() {
    let params = RobotParams::table_i();
    for mu in [0.4, 0.55, 0.7, 0.9] {
        let s = PipeScenario::new(0.08, mu);
        let sol = optimize_torques(&params, &s).unwrap();
        let m = climb_margin(&sol, &params, &s);
        assert!(m.min_slip_margin >= -1e-9);
        assert!(m.modules.iter().all(|x| x.friction_utilization <= 1.0 + 1e-9));
    }
}

fn geometry() -> impl Strategy<Value = (RobotParams, f64)> {
    (0.03..0.08f64, 0.03..0.12f64, 0.0..1.0f64).prop_map(|(d, link, frac)| {
        let mut p = RobotParams::table_i();
        p.module_diameter = d;
        p.link_lengths = [link, link];
        (p, d + frac * link)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn equal_links_give_supplementary_angles((params, pipe) in geometry()) {
        let posture = posture_from_geometry(&params, &PipeScenario::new(pipe, 0.7)).unwrap();
        prop_assert!((posture.theta1 + posture.theta2 - PI).abs() <= 4.0 * f64::EPSILON);
        prop_assert!(posture.theta1 >= PI / 2.0 - 1e-15 && posture.theta1 <= PI);
        prop_assert!(posture.theta2 >= 0.0 && posture.theta2 <= PI / 2.0 + 1e-15);
    }

    #[test]
    fn rhs_linear_in_masses(alpha in 0.1..10.0f64, mm in 0.05..0.5f64, ml in 0.005..0.1f64) {
        let mut p = RobotParams::table_i();
        p.module_mass = mm;
        p.link_mass = ml;
        let s = PipeScenario::new(0.075, 0.7);
        let posture = posture_from_geometry(&p, &s).unwrap();
        let a = assemble_equalities(&p, &s, &posture);
        let b = assemble_equalities(&p.with_scaled_masses(alpha), &s, &posture);
        prop_assert_eq!(a.matrix, b.matrix);
        for (x, y) in a.rhs.iter().zip(&b.rhs) {
            prop_assert!((alpha * x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn matrix_ignores_friction_and_motor(mu in 0.0..2.0f64, tau_max in 0.1..5.0f64) {
        let base = RobotParams::table_i();
        let mut p = base;
        p.motor_torque_max = tau_max;
        let posture = posture_from_geometry(&base, &PipeScenario::new(0.075, 0.7)).unwrap();
        let a = assemble_equalities(&base, &PipeScenario::new(0.075, 0.7), &posture);
        let b = assemble_equalities(&p, &PipeScenario::new(0.075, mu), &posture);
        prop_assert_eq!(a.matrix, b.matrix);
        prop_assert_eq!(a.rhs, b.rhs);
    }

    #[test]
    fn inequalities_ignore_posture(d in 0.05..0.11f64) {
        // The set is assembled without a posture; only D differs here.
        let p = RobotParams::table_i();
        let a = assemble_inequalities(&p, &PipeScenario::new(0.075, 0.7));
        let b = assemble_inequalities(&p, &PipeScenario::new(d, 0.7));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn variants_differ_only_in_j3_j4(t1 in 1.6..3.1f64, t2 in 0.05..1.5f64) {
        let p = RobotParams::table_i();
        let s = PipeScenario::new(0.075, 0.7);
        let posture = Posture { theta1: t1, theta2: t2 };
        let a = assemble_equalities(&p, &s, &posture);
        let b = assemble_equalities(&p, &s.with_variant(EquationVariant::SymmetryCorrected), &posture);
        for r in 0..4 {
            prop_assert_eq!(a.matrix[r], b.matrix[r]);
            prop_assert_eq!(a.rhs[r], b.rhs[r]);
        }
        prop_assert_eq!(a.matrix[6], b.matrix[6]);
    }
}
