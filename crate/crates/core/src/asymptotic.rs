//! Limit kernels: the discrete Jacobi kernel `L` and the symmetric Pearcey
//! kernel `𝒦`, their scaling maps, and convergence tables against the
//! finite-`N` kernel.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{invalid, Error, Result};
use crate::kernel::{kernel_residue, w_weight, KernelPoint};
use crate::lattice::HalfParam;
use crate::quad::composite;

/// Macroscopic time `t`, level `ell` and jump parameter `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MacroParams {
    pub t: f64,
    pub ell: f64,
    pub alpha: f64,
}

impl MacroParams {
    pub fn new(t: f64, ell: f64, alpha: f64) -> Result<Self> {
        if !(t > 0.0 && ell > 0.0 && alpha >= 0.0) || !(t + ell + alpha).is_finite() {
            return Err(invalid(format!(
                "need t > 0, ell > 0, alpha >= 0 (got t={t}, ell={ell}, alpha={alpha})"
            )));
        }
        Ok(Self { t, ell, alpha })
    }

    /// Parameters on the critical curve at `t = 1`.
    pub fn critical(alpha: f64) -> Result<Self> {
        Self::new(1.0, critical_curve(1.0, alpha), alpha)
    }

    fn c(&self) -> f64 {
        self.alpha + self.alpha * self.alpha / 2.0
    }
}

/// `θ = 1 + 2ℓ / ((ℓ − t)(2α + α²))`.
pub fn theta(m: &MacroParams) -> Result<f64> {
    if m.ell == m.t {
        return Err(Error::Domain("theta is discontinuous at ell = t".into()));
    }
    if m.alpha == 0.0 {
        return Err(Error::Domain("theta is undefined at alpha = 0".into()));
    }
    Ok(1.0 + 2.0 * m.ell / ((m.ell - m.t) * (2.0 * m.alpha + m.alpha * m.alpha)))
}

/// `ℓ* = (1 − (1+α)^{−2}) t`.
pub fn critical_curve(t: f64, alpha: f64) -> f64 {
    (1.0 - (1.0 + alpha).powi(-2)) * t
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `ℓ < ℓ*`: limit is the discrete Jacobi kernel at `θ ∈ (−1,1)`.
    Liquid,
    /// `ℓ ≥ ℓ*`: correlations tend to a triangular matrix with unit diagonal.
    Frozen,
}

pub fn regime(m: &MacroParams) -> Regime {
    if m.ell >= critical_curve(m.t, m.alpha) {
        Regime::Frozen
    } else {
        Regime::Liquid
    }
}

/// Nodes per unit `θ`-length in the discrete Jacobi quadrature.
const L_PANELS_PER_UNIT: usize = 8;
const L_ORDER: usize = 32;

fn l_integral(p1: &KernelPoint, p2: &KernelPoint, th_lo: f64, th_hi: f64) -> f64 {
    if th_hi <= th_lo {
        return 0.0;
    }
    let panels = ((th_hi - th_lo) * L_PANELS_PER_UNIT as f64).ceil().max(1.0) as usize;
    let e = p1.r as i32 - p2.r as i32;
    let jac = |a: HalfParam, s: u64, t: f64| match a {
        HalfParam::MinusHalf => (s as f64 * t).cos(),
        HalfParam::PlusHalf => 1.0 + 2.0 * (1..=s).map(|j| (j as f64 * t).cos()).sum::<f64>(),
    };
    let w = |a: HalfParam, t: f64| match a {
        HalfParam::MinusHalf => 1.0,
        HalfParam::PlusHalf => 1.0 - t.cos(),
    };
    composite(th_lo, th_hi, panels, L_ORDER)
        .into_iter()
        .map(|(t, wt)| {
            wt * jac(p1.a, p1.s, t) * jac(p2.a, p2.s, t) * (t.cos() - 1.0).powi(e) * w(p1.a, t)
        })
        .sum::<f64>()
        * f64::from(w_weight(p1.a, p1.s))
        / PI
}

fn order_key(p: &KernelPoint) -> i64 {
    4 * p.r as i64 + p.a.twice()
}

/// `L(p1, p2; u)` for `u ∈ [−1, 1]`.
fn discrete_jacobi_closed(p1: &KernelPoint, p2: &KernelPoint, u: f64) -> f64 {
    let th_u = u.clamp(-1.0, 1.0).acos();
    if order_key(p1) >= order_key(p2) {
        // x ∈ [u, 1] is θ ∈ [0, arccos u]
        l_integral(p1, p2, 0.0, th_u)
    } else {
        -l_integral(p1, p2, th_u, PI)
    }
}

/// Discrete Jacobi kernel `L(p1, p2; u)` for `−1 < u < 1`.
pub fn discrete_jacobi_l(p1: &KernelPoint, p2: &KernelPoint, u: f64) -> Result<f64> {
    if !(u > -1.0 && u < 1.0) {
        return Err(invalid(format!("u = {u} must lie in (-1, 1)")));
    }
    Ok(discrete_jacobi_closed(p1, p2, u))
}

/// Full-interval first term `1_{2r1+a1 ≥ 2r2+a2} W/π ∫_{−1}^{1} …`, which is
/// also the limit of `K` in the frozen regime.
pub fn frozen_limit(p1: &KernelPoint, p2: &KernelPoint) -> f64 {
    discrete_jacobi_closed(p1, p2, -1.0)
}

/// Large-`N` limit of `K(p1, p2)` in the regime of `m`.
pub fn jacobi_limit(p1: &KernelPoint, p2: &KernelPoint, m: &MacroParams) -> Result<f64> {
    match regime(m) {
        Regime::Frozen => Ok(frozen_limit(p1, p2)),
        Regime::Liquid => Ok(discrete_jacobi_closed(p1, p2, theta(m)?)),
    }
}

/// Arguments of the symmetric Pearcey kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PearceyParams {
    pub sigma1: f64,
    pub eta1: f64,
    pub sigma2: f64,
    pub eta2: f64,
}

impl PearceyParams {
    pub fn new(sigma1: f64, eta1: f64, sigma2: f64, eta2: f64) -> Self {
        Self {
            sigma1,
            eta1,
            sigma2,
            eta2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PearceyQuadrature {
    /// Gauss–Legendre panels per unit length (radial and angular).
    pub panels_per_unit: usize,
    pub order: usize,
}

impl Default for PearceyQuadrature {
    fn default() -> Self {
        Self {
            panels_per_unit: 4,
            order: 16,
        }
    }
}

impl PearceyQuadrature {
    pub fn doubled(&self) -> Self {
        Self {
            panels_per_unit: 2 * self.panels_per_unit,
            ..*self
        }
    }
}

/// Truncation radius for the quartic-decay integrals.
pub fn pearcey_radius(p: &PearceyParams) -> f64 {
    let eta = p.eta1.abs().max(p.eta2.abs());
    4f64.max((2.0 * eta).sqrt() + 4.0)
}

/// Symmetric Pearcey kernel `𝒦(σ1, η1, σ2, η2)`.
///
/// With `u = r e^{±iπ/4}` the two rays combine into `2i Im(…)`, and the
/// quarter plane `(x, r)` is integrated in polar coordinates, which removes
/// the `u/(u² − x²)` singularity at the origin.
pub fn symmetric_pearcey(p: &PearceyParams, quad: &PearceyQuadrature) -> Result<f64> {
    if p.sigma1 < 0.0 {
        return Err(invalid("sigma1 must be >= 0"));
    }
    let radius = pearcey_radius(p);
    // |exp(−η1 x² − x⁴)| at the cutoff; on the u-rays u⁴ = −r⁴ and η2 u² is a phase
    let tail = (-p.eta1 * radius * radius - radius.powi(4))
        .exp()
        .max((-radius.powi(4)).exp());
    if tail > 1e-14 {
        return Err(Error::Accuracy(format!(
            "truncation tail {tail:.2e} at radius {radius}; eta values too large"
        )));
    }
    let radial = composite(
        0.0,
        radius,
        (radius * quad.panels_per_unit as f64).ceil() as usize,
        quad.order,
    );
    let angular = composite(
        0.0,
        FRAC_PI_2,
        (FRAC_PI_2 * quad.panels_per_unit as f64).ceil() as usize,
        quad.order,
    );
    let rot = Complex64::from_polar(1.0, FRAC_PI_4);
    let sum: f64 = radial
        .par_iter()
        .map(|&(rho, wr)| {
            let mut acc = 0.0;
            for &(beta, wb) in &angular {
                let x = rho * beta.cos();
                let u = rot * (rho * beta.sin());
                let u2 = u * u;
                let f = (-p.eta1 * x * x + u2 * p.eta2 + u2 * u2 - x.powi(4)).exp()
                    * (p.sigma1 * x).cos()
                    * (u * p.sigma2).cos()
                    * u
                    / (u2 - x * x)
                    * rot;
                acc += wb * f.im;
            }
            acc * wr * rho
        })
        .sum();
    Ok(-4.0 / (PI * PI) * sum - pearcey_gaussian_term(p))
}

/// The reflected Gaussian subtracted from the double integral; zero unless
/// `η2 < η1`.
pub fn pearcey_gaussian_term(p: &PearceyParams) -> f64 {
    if p.eta2 >= p.eta1 {
        return 0.0;
    }
    let d = p.eta2 - p.eta1;
    let g = ((p.sigma1 + p.sigma2).powi(2) / (4.0 * d)).exp()
        + ((p.sigma1 - p.sigma2).powi(2) / (4.0 * d)).exp();
    g / (2.0 * (PI * (p.eta1 - p.eta2)).sqrt())
}

/// `c_α = (1+α)(α(2+α))^{−1/4}`.
pub fn c_alpha(alpha: f64) -> f64 {
    (1.0 + alpha) * (alpha * (2.0 + alpha)).powf(-0.25)
}

/// Integer coordinates for one Pearcey point at size `N`, with the rounding
/// residuals (`exact − rounded`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PearceyScaling {
    pub n: u32,
    pub r: usize,
    pub s: u64,
    pub r_residual: f64,
    pub s_residual: f64,
}

pub fn pearcey_scaling(big_n: u32, alpha: f64, sigma: f64, eta: f64) -> Result<PearceyScaling> {
    if big_n == 0 {
        return Err(invalid("N must be >= 1"));
    }
    if !(alpha > 0.0) {
        return Err(invalid("the Pearcey scaling needs alpha > 0"));
    }
    let nf = f64::from(big_n);
    let s_exact = 2f64.powf(-1.25) * sigma / c_alpha(alpha) * nf.powf(0.25);
    let r_exact = critical_curve(1.0, alpha) * nf + eta * (nf / 2.0).sqrt();
    let (s, r) = (s_exact.round(), r_exact.round());
    if s < 0.0 || r < 0.0 {
        return Err(Error::OutOfRegime(format!(
            "sigma={sigma}, eta={eta} give s={s}, r={r} at N={big_n}"
        )));
    }
    Ok(PearceyScaling {
        n: big_n,
        r: r as usize,
        s: s as u64,
        r_residual: r_exact - r,
        s_residual: s_exact - s,
    })
}

/// `(−2)^{r2−r1} (−1)^{s1−s2} N^{1/4} / (c_α 2^{5/4})`.
pub fn pearcey_prefactor(big_n: u32, alpha: f64, p1: &KernelPoint, p2: &KernelPoint) -> f64 {
    let dr = p2.r as i32 - p1.r as i32;
    let sign = if (p1.s + p2.s) % 2 == 0 { 1.0 } else { -1.0 };
    (-2f64).powi(dr) * sign * f64::from(big_n).powf(0.25) / (c_alpha(alpha) * 2f64.powf(1.25))
}

/// `A(z) = −t log(1 + c(1−z)) + ℓ log(z − 1)` with `log(z−1) = ln(1−z) + iπ`,
/// so the only cut is `z ∈ [1, ∞)`.
pub fn a_func(z: Complex64, m: &MacroParams) -> Result<Complex64> {
    if z.im == 0.0 && z.re >= 1.0 {
        return Err(Error::Domain(format!(
            "A(z) evaluated on its cut at z = {z}"
        )));
    }
    let one = Complex64::new(1.0, 0.0);
    let first = (one + (one - z) * m.c()).ln() * (-m.t);
    let second = ((one - z).ln() + Complex64::new(0.0, PI)) * m.ell;
    Ok(first + second)
}

/// `A′(z) = t c / (1 + c(1−z)) + ℓ / (z − 1)`.
pub fn a_derivative(z: Complex64, m: &MacroParams) -> Result<Complex64> {
    if z == Complex64::new(1.0, 0.0) {
        return Err(Error::Domain("A'(z) has a pole at z = 1".into()));
    }
    let one = Complex64::new(1.0, 0.0);
    Ok(m.t * m.c() / (one + (one - z) * m.c()) + m.ell / (z - one))
}

/// `−α(2+α) / (8(1+α)⁴)`.
pub fn a_quadratic_coefficient(alpha: f64) -> f64 {
    -alpha * (2.0 + alpha) / (8.0 * (1.0 + alpha).powi(4))
}

/// Second Taylor coefficient of `A` at `z = −1` on the critical curve
/// (`t = 1`), by a Cauchy integral on a circle of the given radius.
pub fn a_quadratic_numeric(alpha: f64, radius: f64, nodes: usize) -> Result<f64> {
    let m = MacroParams::critical(alpha)?;
    let center = Complex64::new(-1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..nodes {
        let w = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64);
        acc += a_func(center + w * radius, &m)? / (w * w);
    }
    Ok((acc / (nodes as f64 * radius * radius)).re)
}

/// `max_{|z+1|=ρ} |A(z) − A(−1) − κ(z+1)²| / ρ³` with `κ` the closed-form
/// quadratic coefficient, on the critical curve at `t = 1`.
pub fn a_expansion_check(alpha: f64, radius: f64) -> Result<f64> {
    let m = MacroParams::critical(alpha)?;
    let center = Complex64::new(-1.0, 0.0);
    let a0 = a_func(center, &m)?;
    let kappa = a_quadratic_coefficient(alpha);
    let mut worst = 0.0f64;
    for k in 0..64 {
        let w = Complex64::from_polar(radius, 2.0 * PI * k as f64 / 64.0);
        let d = a_func(center + w, &m)? - a0 - w * w * kappa;
        worst = worst.max(d.norm() / radius.powi(3));
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendRow {
    pub big_n: u32,
    pub scaled_k: f64,
    pub limit_value: f64,
    pub abs_diff: f64,
}

/// Point relative to the moving base level `r = round(ℓN)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RelativePoint {
    pub dr: usize,
    pub a: HalfParam,
    pub s: u64,
}

/// Number of `θ`-nodes used for the finite-`N` kernel at size `N`.
fn finite_n_nodes(big_n: u32) -> usize {
    4096.max(16 * big_n as usize)
}

/// `|K_N − lim|` along `N` for `n = round(tN)`, `r_i = round(ℓN) + dr_i`.
pub fn jacobi_trend(
    m: &MacroParams,
    p1: RelativePoint,
    p2: RelativePoint,
    sizes: &[u32],
) -> Result<Vec<TrendRow>> {
    sizes
        .par_iter()
        .map(|&big_n| {
            let base = (m.ell * f64::from(big_n)).round() as usize;
            let n = (m.t * f64::from(big_n)).round() as u32;
            let k1 = KernelPoint::new(base + p1.dr, p1.a, p1.s);
            let k2 = KernelPoint::new(base + p2.dr, p2.a, p2.s);
            let k = kernel_residue(&k1, &k2, n, m.alpha, finite_n_nodes(big_n));
            let lim = jacobi_limit(&k1, &k2, m)?;
            Ok(TrendRow {
                big_n,
                scaled_k: k,
                limit_value: lim,
                abs_diff: (k - lim).abs(),
            })
        })
        .collect()
}

/// Pearcey trend row: the literal prefactor-scaled kernel and the scaled
/// complement `prefactor · (F − K)`, `F` the frozen limit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PearceyTrendRow {
    pub big_n: u32,
    pub kernel: f64,
    pub scaled_literal: f64,
    pub scaled_complement: f64,
    pub limit_value: f64,
    pub literal_diff: f64,
    pub complement_diff: f64,
}

pub fn pearcey_trend(
    alpha: f64,
    a: HalfParam,
    p: &PearceyParams,
    sizes: &[u32],
    quad: &PearceyQuadrature,
) -> Result<Vec<PearceyTrendRow>> {
    let limit = symmetric_pearcey(p, quad)?;
    sizes
        .par_iter()
        .map(|&big_n| {
            let c1 = pearcey_scaling(big_n, alpha, p.sigma1, p.eta1)?;
            let c2 = pearcey_scaling(big_n, alpha, p.sigma2, p.eta2)?;
            let k1 = KernelPoint::new(c1.r, a, c1.s);
            let k2 = KernelPoint::new(c2.r, a, c2.s);
            let k = kernel_residue(&k1, &k2, big_n, alpha, finite_n_nodes(big_n));
            let pref = pearcey_prefactor(big_n, alpha, &k1, &k2);
            let literal = pref * k;
            let complement = pref * (frozen_limit(&k1, &k2) - k);
            Ok(PearceyTrendRow {
                big_n,
                kernel: k,
                scaled_literal: literal,
                scaled_complement: complement,
                limit_value: limit,
                literal_diff: (literal - limit).abs(),
                complement_diff: (complement - limit).abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::orthonormality;

    #[test]
    fn theta_examples() {
        let m = MacroParams::new(1.0, 0.5, 1.0).unwrap();
        assert!((theta(&m).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let f = MacroParams::new(1.0, 0.9, 1.0).unwrap();
        assert!(theta(&f).unwrap() < -1.0);
        assert!(theta(&MacroParams::new(1.0, 1.0, 1.0).unwrap()).is_err());
        for &t in &[0.3, 1.0, 2.5] {
            for &a in &[0.2, 1.0, 3.0] {
                let m = MacroParams::new(t, critical_curve(t, a), a).unwrap();
                assert!((theta(&m).unwrap() + 1.0).abs() < 1e-12);
                let below = MacroParams::new(t, 0.5 * critical_curve(t, a), a).unwrap();
                let th = theta(&below).unwrap();
                assert!(th > -1.0 && th < 1.0);
            }
        }
    }

    #[test]
    fn critical_curve_examples() {
        assert_eq!(critical_curve(1.0, 1.0), 0.75);
        assert_eq!(critical_curve(1.0, 0.0), 0.0);
        assert!((critical_curve(2.0, 1e9) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn l_limits_and_additivity() {
        let p = |a, s| KernelPoint::new(3, a, s);
        for a in [HalfParam::MinusHalf, HalfParam::PlusHalf] {
            for s in 0..4 {
                // the θ-gap near u = −1 is about sqrt(2(1+u))
                let v = discrete_jacobi_l(&p(a, s), &p(a, s), -1.0 + 1e-12).unwrap();
                assert!((v - 1.0).abs() < 1e-5);
                assert!((frozen_limit(&p(a, s), &p(a, s)) - 1.0).abs() < 1e-12);
            }
        }
        let v = discrete_jacobi_l(
            &p(HalfParam::MinusHalf, 1),
            &p(HalfParam::MinusHalf, 3),
            -1.0 + 1e-12,
        )
        .unwrap();
        assert!(v.abs() < 1e-5);
        // [u,1] plus [−1,u] equals the full interval
        let p1 = KernelPoint::new(4, HalfParam::PlusHalf, 2);
        let p2 = KernelPoint::new(3, HalfParam::MinusHalf, 1);
        let u = 0.2;
        let upper = discrete_jacobi_l(&p1, &p2, u).unwrap();
        let lower = l_integral(&p1, &p2, u.acos(), PI);
        assert!((upper + lower - frozen_limit(&p1, &p2)).abs() < 1e-10);
        // the other branch is minus the lower piece
        let v = discrete_jacobi_l(&p2, &p1, u).unwrap();
        assert!((v + l_integral(&p2, &p1, u.acos(), PI)).abs() < 1e-14);
        assert!(discrete_jacobi_l(&p1, &p2, 1.0).is_err());
        assert!(
            (frozen_limit(&p(HalfParam::PlusHalf, 2), &p(HalfParam::PlusHalf, 2))
                - orthonormality(HalfParam::PlusHalf, 2, 2, 64))
            .abs()
                < 1e-10
        );
    }

    #[test]
    fn pearcey_symmetries() {
        let q = PearceyQuadrature::default();
        let base = PearceyParams::new(1.0, 0.5, 0.7, -0.3);
        let flipped = PearceyParams::new(1.0, 0.5, -0.7, -0.3);
        let a = symmetric_pearcey(&base, &q).unwrap();
        let b = symmetric_pearcey(&flipped, &q).unwrap();
        assert!((a - b).abs() < 1e-12);
        let fine = symmetric_pearcey(&base, &q.doubled()).unwrap();
        assert!((a - fine).abs() < 1e-8);
        let origin = symmetric_pearcey(&PearceyParams::new(0.0, 0.0, 0.0, 0.0), &q).unwrap();
        assert!((origin - 0.22006905899983).abs() < 1e-9, "{origin}");
        assert!(symmetric_pearcey(&PearceyParams::new(-1.0, 0.0, 0.0, 0.0), &q).is_err());
    }

    #[test]
    fn scaling_examples() {
        assert!((c_alpha(1.0) - 2.0 * 3f64.powf(-0.25)).abs() < 1e-15);
        let s = pearcey_scaling(10_000, 1.0, 0.0, 0.0).unwrap();
        assert_eq!((s.s, s.r), (0, 7500));
        let s = pearcey_scaling(10_000, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(s.s, 3);
        assert!(pearcey_scaling(100, 1.0, 0.0, -100.0).is_err());
    }

    #[test]
    fn a_saddle_and_expansion() {
        let m = MacroParams::new(1.0, 0.5, 1.0).unwrap();
        let th = Complex64::new(1.0 / 3.0, 0.0);
        let h = 1e-5;
        let fd = (a_func(th + h, &m).unwrap() - a_func(th - h, &m).unwrap()) / (2.0 * h);
        assert!(fd.norm() < 1e-10, "{fd}");
        assert!(a_derivative(th, &m).unwrap().norm() < 1e-14);
        assert_eq!(a_quadratic_coefficient(1.0), -3.0 / 128.0);
        let num = a_quadratic_numeric(1.0, 0.1, 64).unwrap();
        assert!((num - a_quadratic_coefficient(1.0)).abs() < 1e-12);
        let c1 = a_expansion_check(1.0, 1e-3).unwrap();
        let c2 = a_expansion_check(1.0, 5e-4).unwrap();
        assert!(c1.is_finite() && c2.is_finite() && c2 < 1.5 * c1);
        assert!(a_func(Complex64::new(2.0, 0.0), &m).is_err());
    }
}
