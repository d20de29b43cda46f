//! Jacobi polynomials with parameters (a, -1/2), a = ±1/2, written as
//! symmetric Laurent polynomials in z on the unit circle.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JacobiParam {
    #[serde(rename = "-1/2")]
    MinusHalf,
    #[serde(rename = "+1/2")]
    PlusHalf,
}

impl JacobiParam {
    pub fn value(self) -> f64 {
        match self {
            JacobiParam::MinusHalf => -0.5,
            JacobiParam::PlusHalf => 0.5,
        }
    }

    /// δ = a + 1/2.
    pub fn delta(self) -> i64 {
        match self {
            JacobiParam::MinusHalf => 0,
            JacobiParam::PlusHalf => 1,
        }
    }

    pub fn from_value(a: f64) -> Result<Self> {
        if a == -0.5 {
            Ok(JacobiParam::MinusHalf)
        } else if a == 0.5 {
            Ok(JacobiParam::PlusHalf)
        } else {
            Err(Error::InvalidArgument(format!("a must be -1/2 or +1/2, got {a}")))
        }
    }
}

const NEAR_ONE: f64 = 1e-4;

pub fn jacobi(a: JacobiParam, s: u32, z: Complex64) -> Result<Complex64> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::Singular("jacobi evaluated at z = 0".into()));
    }
    let si = s as i32;
    Ok(match a {
        JacobiParam::MinusHalf => (z.powi(si) + z.powi(-si)) * 0.5,
        JacobiParam::PlusHalf => {
            if (z - 1.0).norm() < NEAR_ONE {
                (-si..=si).map(|j| z.powi(j)).sum()
            } else {
                let w = z.sqrt();
                (w.powi(2 * si + 1) - w.powi(-2 * si - 1)) / (w - w.inv())
            }
        }
    })
}

/// Value on the unit circle z = e^{iθ}; both families are real there.
pub fn jacobi_on_circle(a: JacobiParam, s: u32, theta: f64) -> f64 {
    match a {
        JacobiParam::MinusHalf => (s as f64 * theta).cos(),
        JacobiParam::PlusHalf => {
            let h = (0.5 * theta).sin();
            if h.abs() < NEAR_ONE {
                1.0 + 2.0 * (1..=s).map(|k| (k as f64 * theta).cos()).sum::<f64>()
            } else {
                ((s as f64 + 0.5) * theta).sin() / h
            }
        }
    }
}

pub fn weight(a: JacobiParam, s: i64) -> Result<f64> {
    if s < 0 {
        return Err(Error::InvalidArgument(format!("weight needs s >= 0, got {s}")));
    }
    Ok(match (a, s) {
        (JacobiParam::MinusHalf, 0) => 1.0,
        (JacobiParam::MinusHalf, _) => 2.0,
        (JacobiParam::PlusHalf, _) => 1.0,
    })
}

/// Density of m_a(dz) against dθ at z = e^{iθ}.
pub fn measure_density(a: JacobiParam, theta: f64) -> f64 {
    match a {
        JacobiParam::MinusHalf => 0.5,
        JacobiParam::PlusHalf => {
            let h = (0.5 * theta).sin();
            h * h
        }
    }
}

/// Coefficients d_i with J_s(z) = Σ d_i (x − 1)^i, x = (z + 1/z)/2.
pub fn taylor_at_one(a: JacobiParam, s: u32) -> Vec<f64> {
    match a {
        JacobiParam::MinusHalf => chebyshev_taylor(s),
        JacobiParam::PlusHalf => {
            let mut d = vec![0.0; s as usize + 1];
            d[0] = 1.0;
            for k in 1..=s {
                for (i, c) in chebyshev_taylor(k).into_iter().enumerate() {
                    d[i] += 2.0 * c;
                }
            }
            d
        }
    }
}

fn chebyshev_taylor(s: u32) -> Vec<f64> {
    let mut d = Vec::with_capacity(s as usize + 1);
    d.push(1.0);
    let s = s as f64;
    for i in 0..s as usize {
        let fi = i as f64;
        let next = d[i] * 2.0 * (s + fi) * (s - fi) / ((2.0 * fi + 1.0) * (2.0 * fi + 2.0));
        d.push(next);
    }
    d
}

/// Trapezoid approximation of (W/π)∫ J_{s1} J_{s2} dm_a over the circle.
pub fn orthogonality_integral(a: JacobiParam, s1: u32, s2: u32, nodes: usize) -> f64 {
    let h = 2.0 * PI / nodes as f64;
    let sum: f64 = (0..nodes)
        .map(|k| {
            let th = h * k as f64;
            jacobi_on_circle(a, s1, th) * jacobi_on_circle(a, s2, th) * measure_density(a, th)
        })
        .sum();
    weight(a, s1 as i64).unwrap() / PI * sum * h
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: [JacobiParam; 2] = [JacobiParam::MinusHalf, JacobiParam::PlusHalf];

    #[test]
    fn closed_form_examples() {
        let z = Complex64::from_polar(1.0, 0.7);
        assert_eq!(jacobi(JacobiParam::MinusHalf, 0, z).unwrap(), Complex64::new(1.0, 0.0));
        let v = jacobi(JacobiParam::MinusHalf, 2, Complex64::from_polar(1.0, PI / 3.0)).unwrap();
        assert!((v.re + 0.5).abs() < 1e-14 && v.im.abs() < 1e-14);
        let v = jacobi(JacobiParam::PlusHalf, 1, Complex64::new(1.0 + 1e-9, 0.0)).unwrap();
        assert!((v.re - 3.0).abs() < 1e-8);
        assert!(jacobi(JacobiParam::PlusHalf, 1, Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn weights_and_densities() {
        assert_eq!(weight(JacobiParam::MinusHalf, 0).unwrap(), 1.0);
        assert_eq!(weight(JacobiParam::MinusHalf, 3).unwrap(), 2.0);
        assert_eq!(weight(JacobiParam::PlusHalf, 7).unwrap(), 1.0);
        assert!(weight(JacobiParam::PlusHalf, -1).is_err());
        assert_eq!(measure_density(JacobiParam::MinusHalf, 1.3), 0.5);
        assert!((measure_density(JacobiParam::PlusHalf, PI) - 1.0).abs() < 1e-15);
        assert_eq!(measure_density(JacobiParam::PlusHalf, 0.0), 0.0);
    }

    #[test]
    fn circle_form_matches_complex_form() {
        for a in A {
            for s in 0..12 {
                for th in [0.0, 1e-6, 0.3, 2.0, 3.1, 5.9] {
                    let c = jacobi(a, s, Complex64::from_polar(1.0, th)).unwrap();
                    assert!((c.re - jacobi_on_circle(a, s, th)).abs() < 1e-9, "{a:?} {s} {th}");
                }
            }
        }
    }

    #[test]
    fn taylor_coefficients_reproduce_polynomial() {
        for a in A {
            for s in 0..10u32 {
                let d = taylor_at_one(a, s);
                for th in [0.2, 1.1, 2.9] {
                    let u = f64::cos(th) - 1.0;
                    let p: f64 = d.iter().rev().fold(0.0, |acc, c| acc * u + c);
                    assert!((p - jacobi_on_circle(a, s, th)).abs() < 1e-9 * (1.0 + p.abs()));
                }
            }
        }
    }

    #[test]
    fn orthogonality_small() {
        for a in A {
            for s1 in 0..6 {
                for s2 in 0..6 {
                    let v = orthogonality_integral(a, s1, s2, 64);
                    let want = if s1 == s2 { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-12);
                }
            }
        }
    }
}
