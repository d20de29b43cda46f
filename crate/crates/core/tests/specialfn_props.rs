use gffi_core::specialfn::{jacobi, jacobi_on_circle, JacobiParam};
use num_complex::Complex64;
use proptest::prelude::*;

fn param() -> impl Strategy<Value = JacobiParam> {
    prop_oneof![Just(JacobiParam::MinusHalf), Just(JacobiParam::PlusHalf)]
}

proptest! {
    #[test]
    fn symmetric_under_inversion(a in param(), s in 0u32..20, r in 0.6f64..1.6, phi in 0.0f64..std::f64::consts::TAU) {
        let z = Complex64::from_polar(r, phi);
        let p = jacobi(a, s, z).unwrap();
        let q = jacobi(a, s, z.inv()).unwrap();
        prop_assert!((p - q).norm() <= 1e-12 * (1.0 + p.norm()), "{p} vs {q}");
    }

    #[test]
    fn real_on_unit_circle(a in param(), s in 0u32..20, theta in 0.0f64..std::f64::consts::TAU) {
        let v = jacobi(a, s, Complex64::from_polar(1.0, theta)).unwrap();
        prop_assert!(v.im.abs() <= 1e-12 * (1.0 + v.re.abs()));
        prop_assert!((v.re - jacobi_on_circle(a, s, theta)).abs() <= 1e-10 * (1.0 + v.re.abs()));
    }
}
