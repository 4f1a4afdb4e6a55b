//! Correlation kernel of the simple process `Y(n)` and its determinants.
//!
//! The `x`-integrals use `x = cos θ` with a midpoint grid on `[0, π]`; the
//! Jacobi weights then become `1` (`a = −1/2`) or `1 − cos θ` (`a = +1/2`).
//! The `u`-integral runs over a circle of radius `ρ > 1` (trapezoid rule), or
//! is taken by residues when [`KernelMethod::Residue`] is selected.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{invalid, Error, Result};
use crate::lattice::{level_label, Convention, HalfParam};
use crate::linalg::determinant_f64;
use crate::scalar::Real;
use crate::Extended;

/// A space-time point `(r, a, s)` of the kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KernelPoint {
    pub r: usize,
    pub a: HalfParam,
    pub s: u64,
}

impl KernelPoint {
    pub fn new(r: usize, a: HalfParam, s: u64) -> Self {
        Self { r, a, s }
    }

    /// Site `s` on physical level `k`.
    pub fn at_level(k: usize, s: u64) -> Result<Self> {
        let l = level_label(k, Convention::TMatrix)?;
        Ok(Self::new(l.r, l.a, s))
    }

    fn order_key(&self) -> i64 {
        4 * self.r as i64 + self.a.twice()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    #[default]
    Double,
    /// Double-double arithmetic (about 106 bits).
    Extended,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelMethod {
    /// Tensor quadrature over `[−1,1] × C`.
    #[default]
    Contour,
    /// `u`-integral by residues at `u = x` and `u = 1`; double precision only.
    Residue,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub n_x: usize,
    pub n_u: usize,
    pub contour_radius: f64,
    pub precision: Precision,
    pub method: KernelMethod,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            n_x: 512,
            n_u: 512,
            contour_radius: 1.5,
            precision: Precision::Double,
            method: KernelMethod::Contour,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_x == 0 || self.n_u == 0 {
            return Err(invalid("quadrature needs at least one node"));
        }
        if !(self.contour_radius > 1.0) || !self.contour_radius.is_finite() {
            return Err(invalid(format!(
                "contour radius {} does not enclose [-1,1]",
                self.contour_radius
            )));
        }
        Ok(())
    }

    pub fn doubled(&self) -> Self {
        Self {
            n_x: 2 * self.n_x,
            n_u: 2 * self.n_u,
            ..*self
        }
    }
}

/// Kernel value with the imaginary part of the double integral, which is
/// zero in exact arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelValue<T> {
    pub value: T,
    pub imag_residue: T,
}

pub const IMAG_RESIDUE_THRESHOLD: f64 = 1e-8;

impl<T: Real> KernelValue<T> {
    pub fn is_accurate(&self) -> bool {
        self.imag_residue.to_f64().abs() < IMAG_RESIDUE_THRESHOLD
    }
}

/// `W^{(a,−1/2)}(s)`.
pub fn w_weight(a: HalfParam, s: u64) -> u32 {
    if a == HalfParam::MinusHalf && s > 0 {
        2
    } else {
        1
    }
}

/// `J^{(a,−1/2)}_s(x)` through `x = (z + 1/z)/2`.
pub fn jacobi_eval(a: HalfParam, s: u64, x: Complex<f64>) -> Complex<f64> {
    let one = Complex::new(1.0, 0.0);
    let mut z = x + (x - one).sqrt() * (x + one).sqrt();
    if z.norm() < 1.0 {
        z = z.inv();
    }
    let s = s as i32;
    match a {
        HalfParam::MinusHalf => (z.powi(s) + z.powi(-s)) * 0.5,
        // (z^{s+1/2} − z^{−s−1/2}) / (z^{1/2} − z^{−1/2}) summed as a
        // geometric series, which is continuous at z = ±1
        HalfParam::PlusHalf => (-s..=s).map(|j| z.powi(j)).sum(),
    }
}

/// Same polynomials by the Chebyshev recurrence, for any field.
fn jacobi_cheb<T: Real>(a: HalfParam, s: u64, x: Complex<T>) -> Complex<T> {
    let one = Complex::new(T::one(), T::zero());
    let two = T::two();
    let (mut prev, mut cur) = (one, x);
    let mut acc = one;
    if s == 0 {
        return one;
    }
    if a == HalfParam::PlusHalf {
        acc = acc + cur.scale(two);
    }
    for _ in 1..s {
        let next = cur * x.scale(two) - prev;
        prev = cur;
        cur = next;
        if a == HalfParam::PlusHalf {
            acc = acc + cur.scale(two);
        }
    }
    match a {
        HalfParam::MinusHalf => cur,
        HalfParam::PlusHalf => acc,
    }
}

fn jacobi_theta<T: Real>(a: HalfParam, s: u64, theta: T) -> T {
    match a {
        HalfParam::MinusHalf => (T::from_f64(s as f64) * theta).cos(),
        HalfParam::PlusHalf => (1..=s).fold(T::one(), |acc, j| {
            acc + T::two() * (T::from_f64(j as f64) * theta).cos()
        }),
    }
}

fn weight_theta<T: Real>(a: HalfParam, theta: T) -> T {
    match a {
        HalfParam::MinusHalf => T::one(),
        HalfParam::PlusHalf => T::one() - theta.cos(),
    }
}

/// `c = α + α²/2`, so that `1/φ_α(x) = 1 + c(1 − x)`.
fn c_of<T: Real>(alpha: T) -> T {
    alpha + alpha * alpha * T::half()
}

/// `φ_α(x) = (1 + α(1−x) + α²(1−x)/2)^{−1}`.
pub fn phi_alpha(x: Complex<f64>, alpha: f64) -> Result<Complex<f64>> {
    let den = Complex::new(1.0, 0.0) + (Complex::new(1.0, 0.0) - x) * c_of(alpha);
    if den.norm() <= f64::EPSILON * (1.0 + x.norm()) {
        return Err(Error::SingularPoint(format!(
            "phi_alpha has a pole at x = {} for alpha = {alpha}",
            1.0 + 1.0 / c_of(alpha)
        )));
    }
    Ok(den.inv())
}

struct ThetaGrid<T> {
    theta: Vec<T>,
    x: Vec<T>,
}

impl<T: Real> ThetaGrid<T> {
    fn new(n: usize) -> Self {
        let h = T::PI() / T::from_usize(n);
        let theta: Vec<T> = (0..n).map(|i| (T::from_usize(i) + T::half()) * h).collect();
        let x = theta.iter().map(|t| t.cos()).collect();
        Self { theta, x }
    }

    fn step(&self) -> T {
        T::PI() / T::from_usize(self.theta.len())
    }
}

/// `∫ J_{s1} J_{s2} (x−1)^e (1−x)^{a1} (1+x)^{−1/2} dx` by the midpoint rule in `θ`.
fn first_term<T: Real>(grid: &ThetaGrid<T>, p1: &KernelPoint, p2: &KernelPoint) -> T {
    let e = (p1.r - p2.r) as i32;
    let h = grid.step();
    grid.theta
        .iter()
        .zip(&grid.x)
        .fold(T::zero(), |acc, (&t, &x)| {
            acc + jacobi_theta(p1.a, p1.s, t)
                * jacobi_theta(p2.a, p2.s, t)
                * (x - T::one()).powi(e)
                * weight_theta(p1.a, t)
                * h
        })
}

/// Kernel by tensor quadrature in the scalar type `T`.
pub fn kernel_contour<T: Real>(
    p1: &KernelPoint,
    p2: &KernelPoint,
    n: u32,
    alpha: T,
    n_x: usize,
    n_u: usize,
    radius: T,
) -> KernelValue<T> {
    let grid = ThetaGrid::<T>::new(n_x);
    let one = T::one();
    let c = c_of(alpha);
    let first = if p1.order_key() >= p2.order_key() {
        first_term(&grid, p1, p2)
    } else {
        T::zero()
    };
    // g_k = J(u) / φ(u)^n / (u−1)^{r2} · u / n_u, so that
    // (1/2πi)∮ f(u)/(x−u) du ≈ Σ_k g_k / (x − u_k)
    let nu_t = T::from_usize(n_u);
    let nodes: Vec<(Complex<T>, Complex<T>)> = (0..n_u)
        .map(|k| {
            let psi = T::two() * T::PI() * T::from_usize(k) / nu_t;
            let u = Complex::new(radius * psi.cos(), radius * psi.sin());
            let cu = Complex::new(one, T::zero());
            let inv_phi = cu + (cu - u).scale(c);
            let mut g = jacobi_cheb(p2.a, p2.s, u) * num_traits::pow(inv_phi, n as usize) * u;
            g = g / num_traits::pow(u - cu, p2.r);
            (u, g.unscale(nu_t))
        })
        .collect();
    let h = grid.step();
    let mut second = Complex::new(T::zero(), T::zero());
    for (&t, &x) in grid.theta.iter().zip(&grid.x) {
        let inner = nodes
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &(u, g)| {
                acc + g / (Complex::new(x, T::zero()) - u)
            });
        let phi_n = (one / (one + c * (one - x))).powi(n as i32);
        let outer = phi_n
            * jacobi_theta(p1.a, p1.s, t)
            * (x - one).powi(p1.r as i32)
            * weight_theta(p1.a, t)
            * h;
        second = second + inner.scale(outer);
    }
    let pref = T::from_f64(f64::from(w_weight(p1.a, p1.s))) / T::PI();
    KernelValue {
        value: pref * (first + second.re),
        imag_residue: pref * second.im,
    }
}

/// Coefficients `d_j` of `J^{(a,−1/2)}_s(1 + t) = Σ d_j t^j`.
fn taylor_at_one(a: HalfParam, s: u64) -> Vec<f64> {
    fn cheb(m: u64) -> Vec<f64> {
        if m == 0 {
            return vec![1.0];
        }
        (0..=m)
            .map(|j| {
                let m = m as f64;
                let j = j as f64;
                m / (m + j) * ln_binomial((m + j) as u64, (2.0 * j) as u64).exp() * 2f64.powf(j)
            })
            .collect()
    }
    match a {
        HalfParam::MinusHalf => cheb(s),
        HalfParam::PlusHalf => {
            let mut d = vec![0.0; s as usize + 1];
            d[0] = 1.0;
            for m in 1..=s {
                for (j, v) in cheb(m).into_iter().enumerate() {
                    d[j] += 2.0 * v;
                }
            }
            d
        }
    }
}

/// Kernel with the `u`-integral taken by residues. Stable for large `n`
/// because the `u = 1` residue reduces to binomial probabilities.
pub fn kernel_residue(p1: &KernelPoint, p2: &KernelPoint, n: u32, alpha: f64, n_x: usize) -> f64 {
    let grid = ThetaGrid::<f64>::new(n_x);
    let c = c_of(alpha);
    let first = if p1.order_key() >= p2.order_key() {
        first_term(&grid, p1, p2)
    } else {
        0.0
    };
    let d = taylor_at_one(p2.a, p2.s);
    let (r1, r2) = (p1.r as i64, p2.r as i64);
    let h = grid.step();
    let ln_c = c.ln();
    let ln_binom: Vec<f64> = (0..=u64::from(n))
        .map(|i| ln_binomial(u64::from(n), i))
        .collect();
    let mut second = 0.0;
    for (&t, &x) in grid.theta.iter().zip(&grid.x) {
        let y = 1.0 - x;
        let ln_y = y.ln();
        let ln_norm = f64::from(n) * (c * y).ln_1p();
        let mut tot = 0.0;
        for (j, &dj) in d.iter().enumerate() {
            if dj == 0.0 {
                continue;
            }
            let e = j as i64 + r1 - r2;
            let lo = (r2 - j as i64).max(0).max(-e);
            let sign = if e.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let mut acc = 0.0;
            for i in lo..=i64::from(n) {
                let lg = ln_binom[i as usize] + i as f64 * ln_c + (i + e) as f64 * ln_y - ln_norm;
                acc += lg.exp();
            }
            tot += dj * sign * acc;
        }
        second -= jacobi_theta(p1.a, p1.s, t) * weight_theta(p1.a, t) * h * tot;
    }
    f64::from(w_weight(p1.a, p1.s)) / std::f64::consts::PI * (first + second)
}

/// `K_n(p1, p2)` for `φ = φ_α`.
pub fn kernel_k(
    p1: &KernelPoint,
    p2: &KernelPoint,
    n: u32,
    alpha: f64,
    quad: &QuadratureSpec,
) -> Result<KernelValue<f64>> {
    quad.validate()?;
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(invalid(format!(
            "alpha must be finite and >= 0, got {alpha}"
        )));
    }
    match (quad.method, quad.precision) {
        (KernelMethod::Residue, _) => Ok(KernelValue {
            value: kernel_residue(p1, p2, n, alpha, quad.n_x),
            imag_residue: 0.0,
        }),
        (KernelMethod::Contour, Precision::Double) => Ok(kernel_contour(
            p1,
            p2,
            n,
            alpha,
            quad.n_x,
            quad.n_u,
            quad.contour_radius,
        )),
        (KernelMethod::Contour, Precision::Extended) => {
            let v = kernel_contour(
                p1,
                p2,
                n,
                Extended::from_f64(alpha),
                quad.n_x,
                quad.n_u,
                Extended::from_f64(quad.contour_radius),
            );
            Ok(KernelValue {
                value: v.value.to_f64(),
                imag_residue: v.imag_residue.to_f64(),
            })
        }
    }
}

/// `det[K(p_i, p_j)]`, with the matrix filled in parallel.
pub fn correlation(
    points: &[KernelPoint],
    n: u32,
    alpha: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let m = kernel_matrix(points, n, alpha, quad)?;
    Ok(determinant_f64(&m))
}

pub fn kernel_matrix(
    points: &[KernelPoint],
    n: u32,
    alpha: f64,
    quad: &QuadratureSpec,
) -> Result<Vec<Vec<f64>>> {
    let len = points.len();
    let flat = (0..len * len)
        .into_par_iter()
        .map(|idx| {
            kernel_k(&points[idx / len], &points[idx % len], n, alpha, quad).map(|v| v.value)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(flat.chunks(len).map(<[f64]>::to_vec).collect())
}

/// `I_a^φ(l, s)` for `φ = φ_α` by quadrature of its defining integral.
pub fn i_integral(a: HalfParam, l: u64, s: u64, alpha: f64, n_x: usize) -> f64 {
    let grid = ThetaGrid::<f64>::new(n_x);
    let c = c_of(alpha);
    let h = grid.step();
    let sum: f64 = grid
        .theta
        .iter()
        .zip(&grid.x)
        .map(|(&t, &x)| {
            jacobi_theta(a, s, t) * jacobi_theta(a, l, t) * weight_theta(a, t) * h
                / (1.0 + c * (1.0 - x))
        })
        .sum();
    f64::from(w_weight(a, s)) / std::f64::consts::PI * sum
}

/// `W/π ∫ J_{s1} J_{s2} w` for equal labels: should be `1_{s1=s2}`.
pub fn orthonormality(a: HalfParam, s1: u64, s2: u64, n_x: usize) -> f64 {
    let grid = ThetaGrid::<f64>::new(n_x);
    let p1 = KernelPoint::new(1, a, s1);
    let p2 = KernelPoint::new(1, a, s2);
    f64::from(w_weight(a, s1)) / std::f64::consts::PI * first_term(&grid, &p1, &p2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transition::i_closed;

    #[test]
    fn jacobi_values() {
        let x = Complex::new(0.3, 0.0);
        assert!((jacobi_eval(HalfParam::MinusHalf, 0, x) - 1.0).norm() < 1e-15);
        let v = jacobi_eval(HalfParam::MinusHalf, 2, Complex::new(0.5, 0.0));
        assert!((v - Complex::new(-0.5, 0.0)).norm() < 1e-14);
        assert!((jacobi_eval(HalfParam::PlusHalf, 0, Complex::new(1.0, 0.0)) - 1.0).norm() < 1e-15);
        for a in [HalfParam::MinusHalf, HalfParam::PlusHalf] {
            for s in 0..6 {
                for z in [
                    Complex::new(0.3, 0.0),
                    Complex::new(1.2, 0.7),
                    Complex::new(-1.4, 0.1),
                ] {
                    let d = jacobi_eval(a, s, z) - jacobi_cheb(a, s, z);
                    assert!(d.norm() < 1e-11 * (1.0 + jacobi_eval(a, s, z).norm()));
                }
                let t = 0.9f64;
                let d = jacobi_eval(a, s, Complex::new(t.cos(), 0.0)).re - jacobi_theta(a, s, t);
                assert!(d.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn weights_and_phi() {
        assert_eq!(w_weight(HalfParam::MinusHalf, 3), 2);
        assert_eq!(w_weight(HalfParam::MinusHalf, 0), 1);
        assert_eq!(w_weight(HalfParam::PlusHalf, 0), 1);
        let one = Complex::new(1.0, 0.0);
        assert!((phi_alpha(one, 1.3).unwrap() - one).norm() < 1e-15);
        assert!((phi_alpha(Complex::new(0.0, 0.0), 1.0).unwrap().re - 0.4).abs() < 1e-15);
        assert!((phi_alpha(Complex::new(-0.7, 0.2), 0.0).unwrap() - one).norm() < 1e-15);
        assert!(matches!(
            phi_alpha(Complex::new(1.0 + 1.0 / 1.5, 0.0), 1.0),
            Err(Error::SingularPoint(_))
        ));
    }

    #[test]
    fn taylor_coefficients_reproduce_polynomials() {
        for a in [HalfParam::MinusHalf, HalfParam::PlusHalf] {
            for s in 0..7 {
                let d = taylor_at_one(a, s);
                let t = -0.37f64;
                let v: f64 = d
                    .iter()
                    .enumerate()
                    .map(|(j, dj)| dj * t.powi(j as i32))
                    .sum();
                let w = jacobi_theta(a, s, (1.0 + t).acos());
                assert!((v - w).abs() < 1e-11, "{a:?} {s}: {v} vs {w}");
            }
        }
    }

    #[test]
    fn i_integral_matches_closed_form() {
        let q = 0.5;
        let alpha = 2.0 * q / (1.0 - q);
        for a in [HalfParam::MinusHalf, HalfParam::PlusHalf] {
            for l in 0..=10 {
                for s in 0..=10 {
                    let num = i_integral(a, l, s, alpha, 256);
                    assert!((num - i_closed(a, l, s, &q)).abs() < 1e-10, "{a:?} {l} {s}");
                }
            }
        }
    }

    #[test]
    fn orthonormal() {
        for a in [HalfParam::MinusHalf, HalfParam::PlusHalf] {
            for s1 in 0..8 {
                for s2 in 0..8 {
                    let v = orthonormality(a, s1, s2, 64);
                    assert!((v - f64::from(u8::from(s1 == s2))).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn bad_contour_rejected() {
        let q = QuadratureSpec {
            contour_radius: 0.9,
            ..Default::default()
        };
        let p = KernelPoint::new(1, HalfParam::MinusHalf, 0);
        assert!(kernel_k(&p, &p, 1, 1.0, &q).is_err());
    }
}
