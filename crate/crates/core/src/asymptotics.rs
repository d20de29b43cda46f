//! Action G(ν,η,τ,z) = τ(z+1/z)/2 + η log((z+1/z)/2 − 1) − ν log z, its
//! critical point Ω, the liquid region and the Gaussian field quantities.

use crate::error::{Error, Result};
use itertools::Itertools;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroPoint {
    pub nu: f64,
    pub eta: f64,
    pub tau: f64,
}

impl MacroPoint {
    pub fn new(nu: f64, eta: f64, tau: f64) -> Self {
        MacroPoint { nu, eta, tau }
    }

    pub fn in_domain(&self) -> bool {
        if !(self.eta > 0.0 && self.tau > 0.0) {
            return false;
        }
        let (q1, q2) = frozen_boundary(self.eta, self.tau);
        q1 < self.nu && self.nu < q2
    }

    fn require_domain(&self) -> Result<()> {
        if self.in_domain() {
            Ok(())
        } else {
            Err(Error::OutOfDomain(format!("{self:?}")))
        }
    }
}

pub fn frozen_boundary(eta: f64, tau: f64) -> (f64, f64) {
    let r = tau / eta;
    let base = -r * r / 2.0 + 5.0 * r + 1.0;
    let corr = 0.5 * r * r * (1.0 + 4.0 / r).powf(1.5);
    let q2 = eta * (base + corr).sqrt();
    let q1 = if r < 0.5 { eta * (base - corr).max(0.0).sqrt() } else { 0.0 };
    (q1, q2)
}

pub fn action(p: &MacroPoint, z: Complex64) -> Result<Complex64> {
    guard(z)?;
    let zz = (z + z.inv()) * 0.5;
    Ok(p.tau * zz + p.eta * (zz - 1.0).ln() - p.nu * z.ln())
}

pub fn d_action(p: &MacroPoint, z: Complex64) -> Result<Complex64> {
    guard(z)?;
    Ok(cubic(p, z) / (2.0 * z * z * (z - 1.0)))
}

pub fn d2_action(p: &MacroPoint, z: Complex64) -> Result<Complex64> {
    guard(z)?;
    let z2 = z * z;
    Ok(p.tau / (z2 * z) + p.eta * (1.0 - 2.0 * z - z2) / (z2 * (z - 1.0) * (z - 1.0)) + p.nu / z2)
}

/// ∂²G/∂z∂ν.
pub fn d_action_dnu_dz(z: Complex64) -> Result<Complex64> {
    if z.norm() == 0.0 {
        return Err(Error::Singular("z = 0".into()));
    }
    Ok(-z.inv())
}

fn guard(z: Complex64) -> Result<()> {
    if z.norm() == 0.0 || (z - 1.0).norm() == 0.0 {
        return Err(Error::Singular(format!("action undefined at z = {z}")));
    }
    Ok(())
}

fn coefficients(p: &MacroPoint) -> [f64; 4] {
    // τz³ + (2η−2ν−τ)z² + (2η+2ν−τ)z + τ, highest degree first
    let (nu, eta, tau) = (p.nu, p.eta, p.tau);
    [tau, 2.0 * eta - 2.0 * nu - tau, 2.0 * eta + 2.0 * nu - tau, tau]
}

fn cubic(p: &MacroPoint, z: Complex64) -> Complex64 {
    let c = coefficients(p);
    ((z * c[0] + c[1]) * z + c[2]) * z + c[3]
}

/// Roots of a z³ + b z² + c z + d by Cardano's formula, each polished by
/// Newton steps on the polynomial.
pub fn cubic_roots(a: f64, b: f64, c: f64, d: f64) -> Result<[Complex64; 3]> {
    if a == 0.0 {
        return Err(Error::Singular("leading coefficient vanishes".into()));
    }
    let (b, c, d) = (b / a, c / a, d / a);
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = Complex64::new(q * q / 4.0 + p * p * p / 27.0, 0.0).sqrt();
    let qh = Complex64::new(-q / 2.0, 0.0);
    let (u1, u2) = (qh + disc, qh - disc);
    let big = if u1.norm() >= u2.norm() { u1 } else { u2 };
    let cbrt = big.powf(1.0 / 3.0);
    let omega = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let mut roots = [Complex64::new(0.0, 0.0); 3];
    for (k, r) in roots.iter_mut().enumerate() {
        let ck = cbrt * omega.powi(k as i32);
        let t = if ck.norm() == 0.0 { ck } else { ck - p / (3.0 * ck) };
        *r = t - b / 3.0;
    }
    let f = |z: Complex64| ((z + b) * z + c) * z + d;
    let df = |z: Complex64| (3.0 * z + 2.0 * b) * z + c;
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let g = df(*r);
            if g.norm() == 0.0 {
                break;
            }
            let step = f(*r) / g;
            if !step.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    Ok(roots)
}

/// Root of the critical-point cubic in the upper half-plane, with no
/// domain check (used for (−ν, η, τ)).
pub fn omega_unchecked(p: &MacroPoint) -> Result<Complex64> {
    let c = coefficients(p);
    let roots = cubic_roots(c[0], c[1], c[2], c[3])?;
    let best = roots.iter().copied().max_by(|x, y| x.im.total_cmp(&y.im)).expect("three roots");
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    if best.im <= 1e-12 * scale {
        return Err(Error::OutOfDomain(format!("no critical point in the upper half-plane at {p:?}")));
    }
    let mut z = best;
    if let (Ok(g1), Ok(g2)) = (d_action(p, z), d2_action(p, z)) {
        let step = g1 / g2;
        if step.is_finite() {
            z -= step;
        }
    }
    Ok(z)
}

pub fn omega(p: &MacroPoint) -> Result<Complex64> {
    p.require_domain()?;
    omega_unchecked(p)
}

pub fn density(p: &MacroPoint) -> Result<f64> {
    Ok(omega(p)?.arg() / PI)
}

pub fn theta(p: &MacroPoint) -> Result<f64> {
    let g2 = d2_action(p, omega(p)?)?;
    Ok(half_arg(g2))
}

fn half_arg(g2: Complex64) -> f64 {
    (0.5 * g2.arg()).rem_euclid(PI)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleData {
    pub omega: Complex64,
    pub g: Complex64,
    pub g2: Complex64,
    pub theta: f64,
}

pub fn saddle_data(p: &MacroPoint) -> Result<SaddleData> {
    let om = omega(p)?;
    let g2 = d2_action(p, om)?;
    Ok(SaddleData { omega: om, g: action(p, om)?, g2, theta: half_arg(g2) })
}

/// 𝒢(z,w) = (1/2π) log |(Z − W̄)/(Z − W)| with Z = z + 1/z, W = w + 1/w.
pub fn green(z: Complex64, w: Complex64) -> Result<f64> {
    if !(z.im > 0.0 && w.im > 0.0) {
        return Err(Error::InvalidArgument(format!("green needs upper half-plane points, got {z}, {w}")));
    }
    let v = log_ratio(z, w);
    if v.is_infinite() {
        return Err(Error::Singular("coincident points".into()));
    }
    Ok(v / (2.0 * PI))
}

fn log_ratio(z: Complex64, w: Complex64) -> f64 {
    let (zz, ww) = (z + z.inv(), w + w.inv());
    (zz - ww.conj()).norm().ln() - (zz - ww).norm().ln()
}

/// Σ over fixed-point-free involutions of Π cov(i, σ(i)).
pub fn wick_sum<F: Fn(usize, usize) -> f64>(k: usize, cov: &F) -> f64 {
    fn rec<F: Fn(usize, usize) -> f64>(rest: &mut Vec<usize>, cov: &F) -> f64 {
        if rest.is_empty() {
            return 1.0;
        }
        let first = rest.remove(0);
        let mut total = 0.0;
        for j in 0..rest.len() {
            let partner = rest.remove(j);
            total += cov(first, partner) * rec(rest, cov);
            rest.insert(j, partner);
        }
        rest.insert(0, first);
        total
    }
    if k % 2 == 1 {
        return 0.0;
    }
    rec(&mut (0..k).collect(), cov)
}

pub fn wick_moment(values: &[Complex64]) -> Result<f64> {
    for (i, a) in values.iter().enumerate() {
        if values[..i].contains(a) {
            return Err(Error::InvalidArgument("wick_moment needs distinct points".into()));
        }
        if a.im <= 0.0 {
            return Err(Error::InvalidArgument(format!("{a} is not in the upper half-plane")));
        }
    }
    Ok(wick_sum(values.len(), &|i, j| green(values[i], values[j]).unwrap()))
}

/// f(u,v) = (1/v)(1 − u⁻²)/(v + 1/v − u − 1/u).
pub fn cross_factor(u: Complex64, v: Complex64) -> Complex64 {
    (1.0 - u.powi(-2)) / (v * (v + v.inv() - u - u.inv()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CycleResidual {
    pub residual: Complex64,
    /// Σ of term moduli, for relative comparison.
    pub scale: f64,
}

impl CycleResidual {
    pub fn relative(&self) -> f64 {
        self.residual.norm() / self.scale
    }
}

/// Σ over l-cycles σ of Π f(z_σ(i), z_σ(i+1)) / G′_ν(z_σ(i)), G′_ν = −1/z.
pub fn cycle_cancellation_check(points: &[Complex64]) -> Result<CycleResidual> {
    let l = points.len();
    if l < 3 {
        return Err(Error::InvalidArgument("need at least three points".into()));
    }
    let us: Vec<Complex64> = points.iter().map(|z| z + z.inv()).collect();
    for i in 0..l {
        if points[i].norm() == 0.0 {
            return Err(Error::Singular("point at the origin".into()));
        }
        for j in 0..i {
            if (us[i] - us[j]).norm() < 1e-12 * (1.0 + us[i].norm()) {
                return Err(Error::Singular(format!("z+1/z coincides for points {j} and {i}")));
            }
        }
    }
    let mut residual = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for rest in (1..l).permutations(l - 1) {
        let order: Vec<usize> = std::iter::once(0).chain(rest).collect();
        let mut term = Complex64::new(1.0, 0.0);
        for i in 0..l {
            let (a, b) = (points[order[i]], points[order[(i + 1) % l]]);
            term *= cross_factor(a, b) / d_action_dnu_dz(a)?;
        }
        residual += term;
        scale += term.norm();
    }
    Ok(CycleResidual { residual, scale })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SaddleEstimate {
    pub envelope: f64,
    pub terms: [Complex64; 4],
}

impl SaddleEstimate {
    pub fn value(&self) -> Complex64 {
        self.terms.iter().sum()
    }
}

pub const MIN_CURVATURE: f64 = 1e-6;

/// Main term of the two-point saddle expansion of
/// (2πi)⁻² ∫∫ e^{N G₁(u) − N G₂(w)} f(u,w) dw du.
pub fn saddle_kernel_estimate(p1: &MacroPoint, p2: &MacroPoint, n: f64) -> Result<SaddleEstimate> {
    let s1 = saddle_data(p1)?;
    let s2 = saddle_data(p2)?;
    if s1.g2.norm() < MIN_CURVATURE || s2.g2.norm() < MIN_CURVATURE {
        return Err(Error::Singular("second derivative too small near the edge".into()));
    }
    let pre = (n * (s1.g.re - s2.g.re)).exp() / (2.0 * PI * n * (s1.g2.norm() * s2.g2.norm()).sqrt());
    let ph1 = Complex64::from_polar(1.0, n * s1.g.im - s1.theta);
    let ph2 = Complex64::from_polar(1.0, n * s2.g.im + s2.theta);
    let (o1, o2) = (s1.omega, s2.omega);
    let terms = [
        cross_factor(o1, o2) * ph1 / ph2 * pre,
        cross_factor(o1, o2.conj()) * ph1 * ph2 * pre,
        cross_factor(o1.conj(), o2) / (ph1 * ph2) * pre,
        cross_factor(o1.conj(), o2.conj()) * ph2 / ph1 * pre,
    ];
    Ok(SaddleEstimate { envelope: terms.iter().map(|t| t.norm()).sum(), terms })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn boundary_examples() {
        let (q1, q2) = frozen_boundary(1.0, 1.0);
        assert_eq!(q1, 0.0);
        assert!((q2 - (5.5f64 + 0.5 * 5f64.powf(1.5)).sqrt()).abs() < 1e-12);
        assert!((q2 - 3.3301906767855614).abs() < 1e-12);
        let (q1, q2) = frozen_boundary(1.0, 0.3);
        assert!(q1 > 0.0 && q1 < q2);
    }

    #[test]
    fn omega_near_wall() {
        let om = omega(&MacroPoint::new(1e-9, 1.0, 1.0)).unwrap();
        assert!((om - c(0.0, 1.0)).norm() < 1e-8);
        let d = density(&MacroPoint::new(1e-9, 1.0, 1.0)).unwrap();
        assert!((d - 0.5).abs() < 1e-8);
    }

    #[test]
    fn omega_reference_values() {
        let om = omega(&MacroPoint::new(1.0, 1.0, 1.0)).unwrap();
        assert!((om - c(0.6478, 1.7214)).norm() < 1e-3, "{om}");
        let om = omega(&MacroPoint::new(3.0, 1.0, 1.0)).unwrap();
        assert!((om - c(2.565, 1.043)).norm() < 1e-3, "{om}");
    }

    #[test]
    fn inverse_omega() {
        let p = MacroPoint::new(0.5, 1.0, 1.0);
        let plus = omega(&p).unwrap();
        let minus = omega_unchecked(&MacroPoint::new(-0.5, 1.0, 1.0)).unwrap();
        assert!((plus.conj() * minus - 1.0).norm() < 1e-9);
    }

    #[test]
    fn action_derivatives() {
        let p = MacroPoint::new(0.7, 1.3, 0.9);
        let z = c(0.4, 1.7);
        let h = 1e-5;
        let fd = (action(&p, z + h).unwrap() - action(&p, z - h).unwrap()) / (2.0 * h);
        assert!((fd - d_action(&p, z).unwrap()).norm() < 1e-8);
        let fd2 = (d_action(&p, z + h).unwrap() - d_action(&p, z - h).unwrap()) / (2.0 * h);
        assert!((fd2 - d2_action(&p, z).unwrap()).norm() < 1e-7);
        assert_eq!(d_action_dnu_dz(c(2.0, 0.0)).unwrap(), c(-0.5, 0.0));
        assert!((action(&p, z.conj()).unwrap() - action(&p, z).unwrap().conj()).norm() < 1e-13);
        assert!(action(&p, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn out_of_domain_errors() {
        assert!(omega(&MacroPoint::new(3.5, 1.0, 1.0)).is_err());
        assert!(density(&MacroPoint::new(-0.1, 1.0, 1.0)).is_err());
    }

    #[test]
    fn green_examples() {
        let g = green(c(0.0, 2.0), c(0.0, 3.0)).unwrap();
        assert!((g - (25.0f64 / 7.0).ln() / (2.0 * PI)).abs() < 1e-14);
        assert!((g - 0.20265).abs() < 1e-4);
        let (z, w) = (c(0.3, 1.4), c(-1.2, 0.8));
        assert!((green(z, w).unwrap() - green(w, z).unwrap()).abs() < 1e-15);
        assert!(log_ratio(z, c(2.5, 0.0)).abs() < 1e-15);
        assert!(green(z, z).is_err());
    }

    #[test]
    fn wick_examples() {
        let pts = [c(0.1, 1.5), c(0.7, 1.2), c(-0.4, 2.0), c(1.1, 1.8)];
        assert_eq!(wick_moment(&pts[..3]).unwrap(), 0.0);
        assert_eq!(wick_moment(&pts[..2]).unwrap(), green(pts[0], pts[1]).unwrap());
        assert!((wick_sum(4, &|_, _| 0.3) - 0.27).abs() < 1e-15);
        assert_eq!(wick_sum(6, &|_, _| 1.0), 15.0);
    }

    #[test]
    fn cycles_cancel() {
        let pts = [c(0.3, 1.2), c(-0.5, 0.9), c(1.4, 2.1), c(0.2, -1.3), c(2.2, 0.4)];
        for l in 3..=5 {
            assert!(cycle_cancellation_check(&pts[..l]).unwrap().relative() < 1e-10);
        }
    }

    #[test]
    fn saddle_real_on_diagonal() {
        let p = MacroPoint::new(0.8, 1.0, 1.0);
        let e = saddle_kernel_estimate(&p, &p, 50.0).unwrap();
        assert!(e.value().im.abs() < 1e-12 * e.envelope);
        let e2 = saddle_kernel_estimate(&p, &p, 100.0).unwrap();
        assert!((e2.envelope / e.envelope - 0.5).abs() < 1e-12);
    }
}
