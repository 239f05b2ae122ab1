use proptest::prelude::*;
use rotordyn::control::{attitude_fl_pid, AttitudeRef};
use rotordyn::dynamics::{
    coriolis_matrix, lagrange_derivative_wrench, ne_attitude_in_eta, rotated_inertia, Lagrange,
};
use rotordyn::integrator::Sample;
use rotordyn::kinematics::{rotation, w_inverse, w_matrix, RateMap};
use rotordyn::lab::{rmse, CoordGroup};
use rotordyn::{
    BodyState, Compensator, EulerAngles, Gains, GenState, Mat3, Outcome, QuadParams, Trajectory,
    Vec3, Wrench,
};

fn angles() -> impl Strategy<Value = EulerAngles> {
    (-3.1f64..3.1, -1.3f64..1.3, -3.1f64..3.1)
        .prop_map(|(phi, theta, psi)| EulerAngles::new(phi, theta, psi))
}

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(a, b, c)| Vec3::new(a, b, c))
}

proptest! {
    #[test]
    fn rotation_is_proper_orthogonal(eta in angles()) {
        let r = rotation(&eta, Default::default());
        prop_assert!((r.transpose() * r - Mat3::identity()).amax() < 1e-14);
        prop_assert!((r.determinant() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rate_map_inverse(eta in angles()) {
        let seq = Default::default();
        let w = w_matrix(&eta, seq);
        let inv = w_inverse(&eta, seq).unwrap();
        prop_assert!((w * inv - Mat3::identity()).amax() < 1e-12);
        prop_assert!((w.determinant() - eta.theta.cos()).abs() < 1e-14);
    }

    #[test]
    fn coriolis_is_passive(eta in angles(), rate in vec3(3.0)) {
        let params = QuadParams::default();
        let c = coriolis_matrix(&eta, &rate, &params);
        // J̇_R = C + Cᵀ along the motion, so η̇ᵀ(J̇_R − 2C)η̇ vanishes.
        let h = 1e-6;
        let fwd = EulerAngles::from_vec(&(eta.to_vec() + rate * h));
        let back = EulerAngles::from_vec(&(eta.to_vec() - rate * h));
        let jr_dot = (rotated_inertia(&fwd, &params) - rotated_inertia(&back, &params)) / (2.0 * h);
        let q = rate.dot(&((jr_dot - c * 2.0) * rate));
        prop_assert!(q.abs() < 1e-8 * (1.0 + rate.norm_squared()));
    }

    #[test]
    fn revised_model_matches_newton_euler_attitude(eta in angles(), rate in vec3(2.0), torque in vec3(0.05), thrust in 0.0f64..10.0) {
        let params = QuadParams::default();
        let s = GenState { eta, eta_dot: rate, ..Default::default() };
        let got = lagrange_derivative_wrench(&s, &Wrench { thrust, torque }, Lagrange::Revised, &params).unwrap();
        let want = ne_attitude_in_eta(&s, &torque, &params).unwrap();
        let scale = 1.0 + want.norm();
        prop_assert!((got.eta_ddot - want).norm() < 1e-9 * scale);
        let r = rotation(&eta, params.sequence);
        let p_ddot = r * Vec3::z() * (thrust / params.mass) - Vec3::z() * params.gravity;
        prop_assert!((got.p_ddot - p_ddot).amax() < 1e-12 * (1.0 + p_ddot.norm()));
    }

    #[test]
    fn body_generalized_round_trip(eta in angles(), v in vec3(5.0), omega in vec3(3.0), p in vec3(100.0)) {
        let seq = Default::default();
        let b = BodyState { p, eta, v, omega };
        let back = b.to_generalized(seq).unwrap().to_body(seq);
        prop_assert!((back.v - v).amax() < 1e-12);
        prop_assert!((back.omega - omega).amax() < 1e-10 * (1.0 + omega.norm() / eta.theta.cos()));
    }

    #[test]
    fn compensators_coincide_at_level_attitude(rate in vec3(2.0), err in vec3(0.5), integral in vec3(0.1), psi in -3.1f64..3.1) {
        // W and J_R depend only on roll and pitch.
        let params = QuadParams::default();
        let s = GenState { eta: EulerAngles::new(0.0, 0.0, psi), eta_dot: rate, ..Default::default() };
        let reference = AttitudeRef { eta: s.eta.to_vec() + err, ..Default::default() };
        let g = Gains::default();
        let a = attitude_fl_pid(Compensator::Literature, &s, &reference, &integral, &g, &params).unwrap();
        let b = attitude_fl_pid(Compensator::Revised, &s, &reference, &integral, &g, &params).unwrap();
        prop_assert!((a - b).amax() < 1e-12 * (1.0 + a.amax()));
    }

    #[test]
    fn rmse_is_symmetric_and_bounded(offsets in prop::collection::vec(vec3(10.0), 1..20)) {
        let make = |f: &dyn Fn(usize) -> Vec3| Trajectory {
            dt: 0.1,
            samples: (0..offsets.len())
                .map(|i| Sample { t: i as f64 * 0.1, state: GenState { p: f(i), ..Default::default() } })
                .collect(),
            outcome: Outcome::Completed,
        };
        let a = make(&|i| offsets[i]);
        let b = make(&|_| Vec3::zeros());
        let ab = rmse(&a, &b, CoordGroup::P).unwrap();
        let ba = rmse(&b, &a, CoordGroup::P).unwrap();
        prop_assert_eq!(ab, ba);
        let max = offsets.iter().map(|o| o.amax()).fold(0.0, f64::max);
        prop_assert!(ab >= 0.0 && ab <= max + 1e-12);
        prop_assert_eq!(rmse(&a, &b, CoordGroup::Eta).unwrap(), 0.0);
    }

    #[test]
    fn rate_map_partials_match_central_differences(eta in angles(), k in 0usize..3) {
        let seq = Default::default();
        let map = RateMap::new(&eta, seq);
        let h = 1e-6;
        let mut plus = eta.to_vec();
        plus[k] += h;
        let mut minus = eta.to_vec();
        minus[k] -= h;
        let fd = (w_matrix(&EulerAngles::from_vec(&plus), seq) - w_matrix(&EulerAngles::from_vec(&minus), seq)) / (2.0 * h);
        prop_assert!((fd - map.dw[k]).amax() < 1e-8);
    }
}
