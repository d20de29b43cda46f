use gffi_core::asymptotics::{
    cubic_roots, cycle_cancellation_check, d_action, frozen_boundary, green, omega, omega_unchecked, wick_moment,
    MacroPoint,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn interior() -> impl Strategy<Value = MacroPoint> {
    (0.05f64..0.95, 0.1f64..2.5, 0.2f64..3.0).prop_map(|(f, eta, tau)| {
        let (q1, q2) = frozen_boundary(eta, tau);
        MacroPoint::new(q1 + (q2 - q1) * f, eta, tau)
    })
}

fn outside_disk() -> impl Strategy<Value = Complex64> {
    (1.01f64..6.0, 0.01f64..3.13).prop_map(|(r, a)| Complex64::from_polar(r, a))
}

proptest! {
    #[test]
    fn omega_is_upper_critical_point(p in interior()) {
        let om = omega(&p).unwrap();
        prop_assert!(om.im > 0.0);
        let d = om.arg() / std::f64::consts::PI;
        prop_assert!(d > 0.0 && d < 1.0);
        prop_assert!(d_action(&p, om).unwrap().norm() <= 1e-9);
    }

    #[test]
    fn inverse_omega(p in interior()) {
        let plus = omega(&p).unwrap();
        let minus = omega_unchecked(&MacroPoint::new(-p.nu, p.eta, p.tau)).unwrap();
        prop_assert!((plus.conj() * minus - 1.0).norm() <= 1e-9);
    }

    #[test]
    fn cubic_roots_satisfy_cubic(a in 0.1f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, d in 0.1f64..3.0) {
        for z in cubic_roots(a, b, c, d).unwrap() {
            let v = ((a * z + b) * z + c) * z + d;
            prop_assert!(v.norm() <= 1e-9 * (1.0 + z.norm().powi(3)), "residual {v} at {z}");
        }
    }

    #[test]
    fn green_positive_and_symmetric(z in outside_disk(), w in outside_disk()) {
        let g = green(z, w).unwrap();
        prop_assert!(g >= 0.0);
        prop_assert!((g - green(w, z).unwrap()).abs() <= 1e-12 * (1.0 + g));
    }

    #[test]
    fn second_order_wick_is_green(z in outside_disk(), w in outside_disk()) {
        prop_assert_eq!(wick_moment(&[z, w]).unwrap(), green(z, w).unwrap());
    }

    #[test]
    fn odd_wick_moments_vanish(z in outside_disk(), w in outside_disk(), u in outside_disk()) {
        prop_assert_eq!(wick_moment(&[z, w, u]).unwrap(), 0.0);
    }

    #[test]
    fn cycles_cancel(pts in prop::collection::vec(outside_disk(), 3..=5)) {
        prop_assert!(cycle_cancellation_check(&pts).unwrap().relative() < 1e-10);
    }
}
