//! Correlation kernel of the particle process and derived determinants.
//!
//! ```text
//! K = W/(2π²i) ∮∮ e^{tZ/2 − tV/2} J_{s1}(z) J_{s2}(v) (Z/2−1)^{n1} /
//!     (V/2−1)^{n2} (1 − v⁻²)/(Z − V) m_{a1}(dz) dv
//!   + 1[(n1,a1) ⊵ (n2,a2)] (W/π) ∮ J_{s1}(z) J_{s2}(z) (Z/2−1)^{n1−n2} m_{a1}(dz)
//! ```
//!
//! with Z = z + 1/z, V = v + 1/v, z on the unit circle and |v| = r > 1.

use crate::error::{Error, Result};
use crate::lattice::{delta_of, LevelIndex, LozengePattern};
use crate::specialfn::{jacobi, jacobi_on_circle, measure_density, taylor_at_one, weight};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use twofloat::TwoFloat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Trapezoid rule on both contours.
    #[default]
    DoubleContour,
    /// The v-integral done by residues; one trapezoid sum over z remains.
    Reduced,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub nodes: usize,
    pub v_radius: f64,
    pub tol: f64,
    pub max_doublings: u32,
    pub method: Method,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { nodes: 512, v_radius: 1.25, tol: 1e-9, max_doublings: 6, method: Method::DoubleContour }
    }
}

impl QuadratureSpec {
    pub fn reduced() -> Self {
        QuadratureSpec { method: Method::Reduced, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.nodes.is_power_of_two() || self.nodes < 4 {
            return Err(Error::InvalidArgument(format!("nodes must be a power of two >= 4, got {}", self.nodes)));
        }
        if !(self.v_radius > 1.0 && self.v_radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("v_radius must exceed 1, got {}", self.v_radius)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelQuery {
    pub lv1: LevelIndex,
    pub s1: u32,
    pub lv2: LevelIndex,
    pub s2: u32,
    pub t: f64,
}

impl KernelQuery {
    /// Query on linear levels; negative positions are rejected.
    pub fn linear(x1: i64, l1: usize, x2: i64, l2: usize, t: f64) -> Result<Self> {
        if x1 < 0 || x2 < 0 {
            return Err(Error::InvalidArgument(format!("positions must be >= 0, got {x1}, {x2}")));
        }
        Ok(KernelQuery {
            lv1: LevelIndex::from_linear(l1)?,
            s1: x1 as u32,
            lv2: LevelIndex::from_linear(l2)?,
            s2: x2 as u32,
            t,
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidArgument(format!("t must be finite and >= 0, got {}", self.t)));
        }
        if self.lv1.n == 0 || self.lv2.n == 0 {
            return Err(Error::InvalidArgument("levels start at n = 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelEval {
    pub value: f64,
    pub imag: f64,
    pub nodes: usize,
    pub last_change: f64,
}

/// Largest relative rounding floor accepted as convergence.
pub const ROUNDING_LIMIT: f64 = 1e-6;

pub fn kernel_eval(q: &KernelQuery, spec: &QuadratureSpec) -> Result<KernelEval> {
    q.validate()?;
    spec.validate()?;
    let rule = |m: usize| match spec.method {
        Method::DoubleContour => double_contour(q, m, spec.v_radius),
        Method::Reduced => (Complex64::new(reduced(q, m), 0.0), 0.0),
    };
    let mut m = spec.nodes;
    let (mut prev, _) = rule(m);
    let mut change = f64::INFINITY;
    for _ in 0..spec.max_doublings {
        m *= 2;
        let (cur, scale) = rule(m);
        change = (cur.re - prev.re).abs();
        prev = cur;
        // rounding floor of the summed terms, accepted up to ROUNDING_LIMIT
        let scale_v = 1.0 + cur.re.abs();
        let target = (spec.tol * scale_v).max((64.0 * f64::EPSILON * scale).min(ROUNDING_LIMIT * scale_v));
        if change < target {
            if cur.im.abs() > target {
                return Err(Error::ImaginaryResidue { residue: cur.im.abs() });
            }
            return Ok(KernelEval { value: cur.re, imag: cur.im, nodes: m, last_change: change });
        }
    }
    Err(Error::NonConvergence { nodes: m, change })
}

pub fn kernel_value(q: &KernelQuery, spec: &QuadratureSpec) -> Result<f64> {
    kernel_eval(q, spec).map(|e| e.value)
}

/// Returns the estimate and the magnitude sum of its terms.
fn double_contour(q: &KernelQuery, m: usize, r: f64) -> (Complex64, f64) {
    let (n1, n2) = (q.lv1.n as i32, q.lv2.n as i32);
    let w = weight(q.lv1.a, q.s1 as i64).unwrap();
    let h = 2.0 * PI / m as f64;
    // θ and −θ share x = cos θ, so fold the z-sum onto 0..=m/2
    let half = m / 2;
    let zs: Vec<(f64, f64, f64)> = (0..=half)
        .map(|k| {
            let th = h * k as f64;
            let x = th.cos();
            let mult = if k == 0 || k == half { 1.0 } else { 2.0 };
            let j1 = jacobi_on_circle(q.lv1.a, q.s1, th);
            let rho = measure_density(q.lv1.a, th);
            (x, mult * j1 * rho, (q.t * x).exp())
        })
        .collect();
    let vs: Vec<(Complex64, Complex64)> = (0..m)
        .map(|k| {
            let v = Complex64::from_polar(r, h * k as f64);
            let vv = v + v.inv();
            let j2 = jacobi(q.lv2.a, q.s2, v).unwrap();
            let b = (-q.t * vv * 0.5).exp() * j2 * (vv * 0.5 - 1.0).powi(-n2) * (1.0 - v.powi(-2)) * v;
            (vv, b)
        })
        .collect();
    let mut dbl = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    for &(x, a, e) in &zs {
        let zz = 2.0 * x;
        let (inner, im) = vs.iter().fold((Complex64::new(0.0, 0.0), 0.0), |(s, m), &(vv, b)| {
            let u = b / (zz - vv);
            (s + u, m + u.norm())
        });
        let f = a * e * (x - 1.0).powi(n1);
        dbl += inner * f;
        mag += im * f.abs();
    }
    let c = w / (2.0 * PI * PI) * h * h;
    let mut total = dbl * c;
    if q.lv1.dominates(q.lv2) {
        debug_assert!(n1 >= n2);
        let extra: f64 = zs
            .iter()
            .enumerate()
            .map(|(k, &(x, a, _))| a * jacobi_on_circle(q.lv2.a, q.s2, h * k as f64) * (x - 1.0).powi(n1 - n2))
            .sum();
        total += w / PI * h * extra;
    }
    (total, mag * c.abs())
}

/// Poisson cdf F_k(λ) and upper tail S_k(λ) = 1 − F_k(λ), each accurate
/// in its own right.
fn poisson_split(k: i64, lambda: f64, lnfact: &[f64]) -> (f64, f64) {
    if k < 0 {
        return (0.0, 1.0);
    }
    if lambda == 0.0 {
        return (1.0, 0.0);
    }
    let pmf = |m: usize| (-lambda + m as f64 * lambda.ln() - lnfact[m]).exp();
    if lambda <= k as f64 + 1.0 {
        let s = tail_series(k as usize + 1, lambda, pmf(k as usize + 1));
        (1.0 - s, s)
    } else {
        let f: f64 = (0..=k as usize).map(pmf).sum();
        (f, 1.0 - f)
    }
}

/// Σ_{m ≥ m0} of terms starting at `first` with ratio λ/(m+1).
fn tail_series(m0: usize, lambda: f64, first: f64) -> f64 {
    let mut term = first;
    let mut sum = 0.0;
    let mut m = m0;
    loop {
        sum += term;
        m += 1;
        term *= lambda / m as f64;
        if term < 1e-17 * sum && m as f64 > lambda {
            return sum;
        }
        if term == 0.0 {
            return sum;
        }
    }
}

fn reduced(q: &KernelQuery, m: usize) -> f64 {
    if q.lv1.dominates(q.lv2) {
        reduced_dominant(q, m)
    } else {
        reduced_other(q, m)
    }
}

/// Taylor coefficients of J_s at x = 1 in double-double precision.
fn taylor_at_one_dd(q: &KernelQuery) -> Vec<TwoFloat> {
    let cheb = |s: u32| {
        let mut d = vec![TwoFloat::from(1.0)];
        let sf = s as f64;
        for i in 0..s as usize {
            let fi = i as f64;
            let next = d[i] * (2.0 * (sf + fi) * (sf - fi)) / ((2.0 * fi + 1.0) * (2.0 * fi + 2.0));
            d.push(next);
        }
        d
    };
    match q.lv2.a {
        crate::specialfn::JacobiParam::MinusHalf => cheb(q.s2),
        crate::specialfn::JacobiParam::PlusHalf => {
            let mut d = vec![TwoFloat::from(0.0); q.s2 as usize + 1];
            d[0] = TwoFloat::from(1.0);
            for k in 1..=q.s2 {
                for (i, c) in cheb(k).into_iter().enumerate() {
                    d[i] += c * 2.0;
                }
            }
            d
        }
    }
}

/// (n1,a1) ⊵ (n2,a2): Φ(u) = e^{tu} u^{n1−n2} Σ_{j<n2} c_j u^j with
/// c_j = Σ_i d_i (−t)^{j−i}/(j−i)!. The sum cancels heavily for large
/// n2 and t, so it runs in double-double arithmetic.
fn reduced_dominant(q: &KernelQuery, m: usize) -> f64 {
    let (n1, n2) = (q.lv1.n as i32, q.lv2.n as usize);
    let t = q.t;
    let d = taylor_at_one_dd(q);
    let mut w = vec![TwoFloat::from(1.0); n2];
    for j in 1..n2 {
        w[j] = w[j - 1] * (-t) / j as f64;
    }
    let c: Vec<TwoFloat> =
        (0..n2).map(|j| (0..=j.min(d.len() - 1)).fold(TwoFloat::from(0.0), |acc, i| acc + d[i] * w[j - i])).collect();
    let wgt = weight(q.lv1.a, q.s1 as i64).unwrap();
    let h = 2.0 * PI / m as f64;
    let mut acc = 0.0;
    for k in 0..m / 2 {
        let th = h * (k as f64 + 0.5);
        let sh = (0.5 * th).sin();
        let u = -2.0 * sh * sh;
        let poly = c.iter().rev().fold(TwoFloat::from(0.0), |p, &cj| p * u + cj);
        let phi = (t * u).exp() * u.powi(n1 - n2 as i32) * f64::from(poly);
        acc += 2.0 * jacobi_on_circle(q.lv1.a, q.s1, th) * measure_density(q.lv1.a, th) * phi;
    }
    wgt / PI * h * acc
}

/// Otherwise: Φ(u) = −Σ_i d_i u^{i+n1−n2} S_{n2−1−i}(λ), λ = −tu, with the
/// negative powers absorbed into the Poisson tail.
fn reduced_other(q: &KernelQuery, m: usize) -> f64 {
    let (n1, n2) = (q.lv1.n as i64, q.lv2.n as i64);
    let e = n1 - n2;
    let t = q.t;
    let d = taylor_at_one(q.lv2.a, q.s2);
    let top = (n2 + q.s2 as i64 + 2) as usize;
    let mut lnfact = vec![0.0; top + 1];
    for j in 1..=top {
        lnfact[j] = lnfact[j - 1] + (j as f64).ln();
    }
    let w = weight(q.lv1.a, q.s1 as i64).unwrap();
    let h = 2.0 * PI / m as f64;
    let mut acc = 0.0;
    for k in 0..m / 2 {
        // half-offset nodes keep x away from 1; θ and −θ fold together
        let th = h * (k as f64 + 0.5);
        let sh = (0.5 * th).sin();
        let u = -2.0 * sh * sh;
        let lambda = -t * u;
        let phi: f64 = d
            .iter()
            .enumerate()
            .map(|(i, &di)| -di * scaled_tail(n2 - 1 - i as i64, i as i64 + e, lambda, t, u, &lnfact))
            .sum();
        acc += 2.0 * jacobi_on_circle(q.lv1.a, q.s1, th) * measure_density(q.lv1.a, th) * phi;
    }
    w / PI * h * acc
}

/// u^p · S_k(λ) with λ = −t·u, finite even when p < 0.
fn scaled_tail(k: i64, p: i64, lambda: f64, t: f64, u: f64, lnfact: &[f64]) -> f64 {
    if k < 0 {
        return u.powi(p as i32);
    }
    if lambda == 0.0 {
        return 0.0;
    }
    if p >= 0 || lambda > k as f64 + 1.0 {
        let (_, s) = poisson_split(k, lambda, lnfact);
        return u.powi(p as i32) * s;
    }
    // u^p = (−λ/t)^p, so u^p e^{−λ} λ^m/m! = (−1)^p t^{−p} e^{−λ} λ^{m+p}/m!
    let m0 = (k + 1) as usize;
    let first = (-lambda + (m0 as i64 + p) as f64 * lambda.ln() - lnfact[m0] - p as f64 * t.ln()).exp();
    let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
    sign * tail_series(m0, lambda, first)
}

/// 𝒞₀(n,a,s) = (−1)^s (−2)^{n−1} for a = −1/2 and (−1)^s (−2)^n for a = +1/2.
pub fn conjugation_factor(lv: LevelIndex, s: i64) -> f64 {
    let pow = lv.n as i32 - 1 + lv.delta() as i32;
    let sign = if (s + pow as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    sign * 2f64.powi(pow)
}

pub fn conjugation(lv1: LevelIndex, s1: i64, lv2: LevelIndex, s2: i64) -> f64 {
    conjugation_factor(lv1, s1) / conjugation_factor(lv2, s2)
}

/// K̃ = c₀K on linear levels.
pub fn conjugated_kernel(x1: i64, l1: usize, x2: i64, l2: usize, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    let q = KernelQuery::linear(x1, l1, x2, l2, t)?;
    Ok(conjugation(q.lv1, x1, q.lv2, x2) * kernel_value(&q, spec)?)
}

fn determinant(rows: usize, entries: Vec<f64>) -> f64 {
    DMatrix::from_row_slice(rows, rows, &entries).determinant()
}

/// det[K(pᵢ, pⱼ)] for points given as (linear level, position).
pub fn correlation_det(points: &[(usize, i64)], t: f64, spec: &QuadratureSpec) -> Result<f64> {
    for (i, a) in points.iter().enumerate() {
        if points[..i].contains(a) {
            return Err(Error::InvalidArgument(format!("repeated point {a:?}")));
        }
    }
    correlation_det_unchecked(points, t, spec)
}

/// Same as [`correlation_det`] without the distinctness check.
pub fn correlation_det_unchecked(points: &[(usize, i64)], t: f64, spec: &QuadratureSpec) -> Result<f64> {
    let k = points.len();
    let entries = (0..k * k)
        .into_par_iter()
        .map(|ij| {
            let (a, b) = (points[ij / k], points[ij % k]);
            kernel_value(&KernelQuery::linear(a.1, a.0, b.1, b.0, t)?, spec)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(determinant(k, entries))
}

/// Lozenges need every black and white position above the wall layer.
pub const LOZENGE_MIN_POSITION: i64 = 2;

pub fn lozenge_probability(pattern: &LozengePattern, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    let es = pattern.entries();
    for e in es {
        let (bx, _) = e.black();
        if bx < LOZENGE_MIN_POSITION || e.x < LOZENGE_MIN_POSITION {
            return Err(Error::InvalidArgument(format!(
                "lozenge {e:?} touches positions below {LOZENGE_MIN_POSITION}"
            )));
        }
    }
    let k = es.len();
    let entries = (0..k * k)
        .into_par_iter()
        .map(|ij| {
            let (bx, bl) = es[ij / k].black();
            let (wx, wl) = es[ij % k].white();
            conjugated_kernel(bx, bl, wx, wl, t, spec)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(determinant(k, entries))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TriangleReport {
    pub max_black_sum: f64,
    pub max_white_sum: f64,
    pub samples: usize,
}

impl TriangleReport {
    pub fn max_residual(&self) -> f64 {
        self.max_black_sum.max(self.max_white_sum)
    }
}

/// Residuals of the two three-term sums of K̃ around a black triangle
/// (second argument varies) and around a white triangle (first argument
/// varies).
pub fn check_triangle_identities(
    samples: &[(i64, usize, i64, usize)],
    t: f64,
    spec: &QuadratureSpec,
) -> Result<TriangleReport> {
    if let Some(s) = samples.iter().find(|s| s.0 <= 1 || s.2 <= 1 || s.1 == 0 || s.3 == 0) {
        return Err(Error::InvalidArgument(format!("sample {s:?} has coordinates <= 1")));
    }
    let res = samples
        .par_iter()
        .map(|&(x, l, xp, lp)| -> Result<(f64, f64)> {
            let kt = |a: i64, b: usize, c: i64, d: usize| conjugated_kernel(a, b, c, d, t, spec);
            let target = if (x, l) == (xp, lp) { 1.0 } else { 0.0 };
            let dp = delta_of(lp);
            let black = kt(x, l, xp, lp)? + kt(x, l, xp - 1 + dp, lp + 1)? + kt(x, l, xp + dp, lp + 1)?;
            let white = if l >= 2 {
                let d = delta_of(l);
                kt(x, l, xp, lp)? + kt(x - 1 + d, l - 1, xp, lp)? + kt(x + d, l - 1, xp, lp)? - target
            } else {
                0.0
            };
            Ok(((black - target).abs(), white.abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TriangleReport {
        max_black_sum: res.iter().map(|r| r.0).fold(0.0, f64::max),
        max_white_sum: res.iter().map(|r| r.1).fold(0.0, f64::max),
        samples: samples.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FarRightRow {
    pub x: i64,
    /// K̃(x,ℓ, x−1+δ_ℓ, ℓ+1): a type-II lozenge above (x,ℓ).
    pub type_ii: f64,
    /// K̃(x,ℓ, x+δ_ℓ, ℓ+1): a type-III lozenge above (x,ℓ).
    pub type_iii: f64,
}

pub fn check_far_right_limits(l: usize, t: f64, grid: &[i64], spec: &QuadratureSpec) -> Result<Vec<FarRightRow>> {
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("grid must be increasing".into()));
    }
    let d = delta_of(l);
    grid.iter()
        .map(|&x| {
            Ok(FarRightRow {
                x,
                type_ii: conjugated_kernel(x, l, x - 1 + d, l + 1, t, spec)?,
                type_iii: conjugated_kernel(x, l, x + d, l + 1, t, spec)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{packed_configuration, LozengeEntry, LozengeType};

    #[test]
    fn t_zero_is_packed_indicator() {
        let cfg = packed_configuration(4).unwrap();
        let spec = QuadratureSpec::default();
        for l in 1..=4 {
            for s in 0..=6 {
                let v = kernel_value(&KernelQuery::linear(s, l, s, l, 0.0).unwrap(), &spec).unwrap();
                let want = if cfg.occupied(s, l) { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-8, "l={l} s={s} v={v}");
            }
        }
    }

    #[test]
    fn routes_agree() {
        let d = QuadratureSpec::default();
        let r = QuadratureSpec::reduced();
        for &(x1, l1, x2, l2, t) in &[
            (0, 1, 0, 1, 0.5),
            (2, 3, 1, 4, 1.0),
            (3, 4, 2, 3, 2.0),
            (1, 2, 4, 5, 0.7),
            (5, 6, 5, 6, 3.0),
            (0, 2, 3, 2, 1.5),
            (4, 7, 2, 2, 2.5),
        ] {
            let q = KernelQuery::linear(x1, l1, x2, l2, t).unwrap();
            let a = kernel_value(&q, &d).unwrap();
            let b = kernel_value(&q, &r).unwrap();
            assert!((a - b).abs() < 1e-8, "{q:?}: {a} vs {b}");
        }
    }

    #[test]
    fn radius_invariance() {
        let q = KernelQuery::linear(3, 4, 2, 5, 1.0).unwrap();
        let base = kernel_value(&q, &QuadratureSpec::default()).unwrap();
        for r in [1.1, 1.4, 1.6] {
            let spec = QuadratureSpec { v_radius: r, ..Default::default() };
            assert!((kernel_value(&q, &spec).unwrap() - base).abs() < 1e-8);
        }
    }

    #[test]
    fn conjugation_values() {
        let l1 = LevelIndex::from_linear(1).unwrap();
        let l2 = LevelIndex::from_linear(2).unwrap();
        assert_eq!(conjugation_factor(l1, 0), 1.0);
        assert_eq!(conjugation_factor(l2, 1), 2.0);
        assert_eq!(conjugation(l2, 3, l2, 3), 1.0);
    }

    #[test]
    fn determinant_edge_cases() {
        let spec = QuadratureSpec::default();
        let one = correlation_det(&[(3, 1)], 1.0, &spec).unwrap();
        let k = kernel_value(&KernelQuery::linear(1, 3, 1, 3, 1.0).unwrap(), &spec).unwrap();
        assert!((one - k).abs() < 1e-14);
        assert!(correlation_det(&[(3, 1), (3, 1)], 1.0, &spec).is_err());
        let dup = correlation_det_unchecked(&[(3, 1), (3, 1)], 1.0, &spec).unwrap();
        assert!(dup.abs() < 1e-12);
    }

    #[test]
    fn conjugation_leaves_determinants_alone() {
        let spec = QuadratureSpec::default();
        let pts = [(3usize, 2i64), (4, 1), (5, 3)];
        let plain = correlation_det(&pts, 1.0, &spec).unwrap();
        let mut m = Vec::new();
        for a in &pts {
            for b in &pts {
                m.push(conjugated_kernel(a.1, a.0, b.1, b.0, 1.0, &spec).unwrap());
            }
        }
        assert!((determinant(3, m) - plain).abs() < 1e-8);
    }

    #[test]
    fn triangle_examples() {
        let spec = QuadratureSpec::default();
        let rep = check_triangle_identities(&[(3, 2, 3, 2), (3, 2, 4, 3), (4, 5, 2, 3)], 0.5, &spec).unwrap();
        assert!(rep.max_residual() < 1e-6, "{rep:?}");
        assert!(check_triangle_identities(&[(1, 2, 3, 2)], 0.5, &spec).is_err());
    }

    #[test]
    fn single_lozenges() {
        let spec = QuadratureSpec::default();
        let e = LozengeEntry { x: 2, level: 3, kind: LozengeType::I };
        let p = lozenge_probability(&LozengePattern::new(vec![e]).unwrap(), 1.0, &spec).unwrap();
        let rho = correlation_det(&[(3, 2)], 1.0, &spec).unwrap();
        assert!((p - rho).abs() < 1e-12);
        let near_wall = LozengeEntry { x: 1, level: 3, kind: LozengeType::II };
        assert!(lozenge_probability(&LozengePattern::new(vec![near_wall]).unwrap(), 1.0, &spec).is_err());
    }

    #[test]
    fn three_types_share_each_white_triangle() {
        let spec = QuadratureSpec::default();
        for (x, l) in [(3, 3), (3, 4), (4, 5)] {
            let total: f64 = [LozengeType::I, LozengeType::II, LozengeType::III]
                .iter()
                .map(|&kind| {
                    let pat = LozengePattern::new(vec![LozengeEntry { x, level: l, kind }]).unwrap();
                    lozenge_probability(&pat, 1.2, &spec).unwrap()
                })
                .sum();
            assert!((total - 1.0).abs() < 1e-8);
        }
    }
}
