//! Exact single-level and multi-level transition kernels.
//!
//! Everything here is generic over [`Scalar`]: use [`crate::Rational`] for the
//! exact identities and `f64` for quick tables.

use std::collections::{BTreeMap, HashMap};
use std::sync::{OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::lattice::{
    interlaces_unchecked, level_label, particles_on_level, Convention, HalfParam, InterlacedState,
    Partition,
};
use crate::linalg::determinant;
use crate::scalar::{powu, Scalar};

/// `R(x,y) = (1−q)/(1+q) · (q^|x−y| + q^(x+y)) / (1 + 1_{y=0})`.
pub fn reflect_r<S: Scalar>(x: u64, y: u64, q: &S) -> S {
    let one = S::one();
    let num = powu(q, x.abs_diff(y)) + powu(q, x + y);
    let mut v = (one.clone() - q.clone()) / (one.clone() + q.clone()) * num;
    if y == 0 {
        v = v / S::from_u8(2).unwrap();
    }
    v
}

pub fn psi<S: Scalar>(m: &S, s: u64, l: u64) -> S {
    if l < s {
        S::zero()
    } else if s == 0 {
        m.clone()
    } else {
        S::one()
    }
}

/// `f_{s,m}(l) = q^{l−s} ψ_m(s,l)`.
pub fn f_sm<S: Scalar>(s: u64, m: &S, l: u64, q: &S) -> S {
    if l < s {
        S::zero()
    } else {
        powu(q, l - s) * psi(m, s, l)
    }
}

/// `Σ_{s=0}^{terms-1} f_{s,1}(x) f_{s,1/(1+q)}(y)`.
pub fn f_pair_sum<S: Scalar>(x: u64, y: u64, q: &S, terms: u64) -> S {
    let m2 = S::one() / (S::one() + q.clone());
    (0..terms).fold(S::zero(), |acc, s| {
        acc + f_sm(s, &S::one(), x, q) * f_sm(s, &m2, y, q)
    })
}

/// Limit of [`f_pair_sum`] as the number of terms grows.
pub fn f_pair_closed<S: Scalar>(x: u64, y: u64, q: &S) -> S {
    let one = S::one();
    if x.min(y) == 0 {
        powu(q, x + y) / (one + q.clone())
    } else {
        (powu(q, x + y + 1) - powu(q, x.abs_diff(y))) / (q.clone() * q.clone() - one)
    }
}

/// `det[ψ_m(c_i − i + r, λ_j − j + r)]`.
pub fn interlace_det<S: Scalar>(c: &Partition, lambda: &Partition, m: &S) -> Result<S> {
    if c.len() != lambda.len() {
        return Err(invalid("interlace_det needs partitions of equal length"));
    }
    let cs = c.shifted();
    let ls = lambda.shifted();
    let mat = cs
        .iter()
        .map(|&ci| ls.iter().map(|&lj| psi(m, ci, lj)).collect())
        .collect();
    Ok(determinant(mat))
}

/// Closed forms of `I_a^φ(l,s)` for `φ = φ_α`, `α = 2q/(1−q)`.
pub fn i_closed<S: Scalar>(a: HalfParam, l: u64, s: u64, q: &S) -> S {
    match a {
        HalfParam::MinusHalf => reflect_r(l, s, q),
        HalfParam::PlusHalf => {
            let one = S::one();
            (q.clone() - one.clone()) / (q.clone() + one)
                * (powu(q, s + l + 1) - powu(q, s.abs_diff(l)))
        }
    }
}

/// Branching multiplicity `κ^k_{k−1}(λ, μ)` for `λ` on level `k`, `μ` on `k−1`.
pub fn kappa(k: usize, lambda: &Partition, mu: &Partition) -> Result<u8> {
    check_level(k, lambda)?;
    if k < 2 {
        return Err(invalid("kappa needs k >= 2"));
    }
    check_level(k - 1, mu)?;
    if !interlaces_unchecked(mu.parts(), lambda.parts()) {
        return Ok(0);
    }
    Ok(if k % 2 == 1 || mu.last() == 0 { 1 } else { 2 })
}

fn check_level(k: usize, p: &Partition) -> Result<()> {
    if k == 0 || p.len() != particles_on_level(k) {
        return Err(invalid(format!(
            "partition {p} does not live on level {k} ({} parts expected)",
            particles_on_level(k)
        )));
    }
    Ok(())
}

/// Memoized `dim_N(λ)` defined by the branching recursion with `dim_2 ≡ 1`.
#[derive(Default)]
pub struct DimTable {
    cache: RwLock<HashMap<(usize, Partition), BigUint>>,
}

impl DimTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn global() -> &'static DimTable {
        static TABLE: OnceLock<DimTable> = OnceLock::new();
        TABLE.get_or_init(DimTable::new)
    }

    /// `dim_index(λ)` for `λ` on level `index − 1`.
    pub fn dim(&self, index: usize, lambda: &Partition) -> Result<BigUint> {
        if index < 2 {
            return Err(invalid("dim index starts at 2"));
        }
        check_level(index - 1, lambda)?;
        Ok(self.dim_unchecked(index, lambda))
    }

    fn dim_unchecked(&self, index: usize, lambda: &Partition) -> BigUint {
        if index == 2 {
            return BigUint::one();
        }
        let key = (index, lambda.clone());
        if let Some(v) = self.cache.read().expect("dim cache poisoned").get(&key) {
            return v.clone();
        }
        let k = index - 1;
        let mut total = BigUint::zero();
        for mu in interlaced_below(lambda, particles_on_level(k - 1)) {
            let mult = if k % 2 == 1 || mu.last() == 0 {
                1u32
            } else {
                2
            };
            total += self.dim_unchecked(k, &mu) * mult;
        }
        self.cache
            .write()
            .expect("dim cache poisoned")
            .insert(key, total.clone());
        total
    }

    pub fn len(&self) -> usize {
        self.cache.read().expect("dim cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn dim(index: usize, lambda: &Partition) -> Result<BigUint> {
    DimTable::global().dim(index, lambda)
}

fn dim_scalar<S: Scalar>(index: usize, lambda: &Partition) -> S {
    S::from_bigint(&BigInt::from(
        DimTable::global().dim_unchecked(index, lambda),
    ))
}

/// All `μ` of length `len` with `μ ≺ λ`.
pub fn interlaced_below(lambda: &Partition, len: usize) -> Vec<Partition> {
    let l = lambda.parts();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(l: &[u64], len: usize, cur: &mut Vec<u64>, out: &mut Vec<Partition>) {
        let i = cur.len();
        if i == len {
            out.push(Partition::new(cur.clone()).expect("interlaced parts are ordered"));
            return;
        }
        let lo = l.get(i + 1).copied().unwrap_or(0);
        for v in lo..=l[i] {
            cur.push(v);
            rec(l, len, cur, out);
            cur.pop();
        }
    }
    rec(l, len, &mut cur, &mut out);
    out
}

/// All `c` of length `len` with `c ≺ λ` and `c ≺ β`.
fn common_below(lambda: &Partition, beta: &Partition, len: usize) -> Vec<Partition> {
    let (l, b) = (lambda.parts(), beta.parts());
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(l: &[u64], b: &[u64], len: usize, cur: &mut Vec<u64>, out: &mut Vec<Partition>) {
        let i = cur.len();
        if i == len {
            out.push(Partition::new(cur.clone()).expect("interlaced parts are ordered"));
            return;
        }
        let lo = l
            .get(i + 1)
            .copied()
            .unwrap_or(0)
            .max(b.get(i + 1).copied().unwrap_or(0));
        let hi = l[i].min(b[i]);
        for v in lo..=hi {
            cur.push(v);
            rec(l, b, len, cur, out);
            cur.pop();
        }
    }
    if len == 0 {
        return vec![Partition::zeros(0)];
    }
    rec(l, b, len, &mut cur, &mut out);
    out
}

/// One-step transition probability of level `k` of the particle system.
pub fn p_level<S: Scalar>(k: usize, lambda: &Partition, beta: &Partition, q: &S) -> Result<S> {
    check_level(k, lambda)?;
    check_level(k, beta)?;
    let one = S::one();
    let one_minus_q = one.clone() - q.clone();
    let r = k / 2;
    let dims = dim_scalar::<S>(k + 1, beta) / dim_scalar::<S>(k + 1, lambda);
    let top_sum = lambda.parts()[..r].iter().sum::<u64>() + beta.parts()[..r].iter().sum::<u64>();
    let mut total = S::zero();
    for c in common_below(lambda, beta, r) {
        let w = powu(q, top_sum - 2 * c.size());
        total = total
            + if k % 2 == 1 || c.last() > 0 {
                w
            } else {
                w / (one.clone() + q.clone())
            };
    }
    let mut v = powu(&one_minus_q, 2 * r as u64) * dims * total;
    if k % 2 == 1 {
        v = v * reflect_r(lambda.part(r + 1), beta.part(r + 1), q);
    }
    Ok(v)
}

/// `T^φ_{r,a}(μ,λ) = det[I_a(μ_i−i+r, λ_j−j+r)] · dim(λ)/dim(μ)`.
pub fn t_level<S: Scalar>(
    r: usize,
    a: HalfParam,
    mu: &Partition,
    lambda: &Partition,
    q: &S,
) -> Result<S> {
    if mu.len() != r || lambda.len() != r {
        return Err(invalid(format!(
            "T_(r={r}) needs partitions with {r} parts"
        )));
    }
    let ms = mu.shifted();
    let ls = lambda.shifted();
    let mat = ms
        .iter()
        .map(|&mi| ls.iter().map(|&lj| i_closed(a, mi, lj, q)).collect())
        .collect();
    let index = match a {
        HalfParam::MinusHalf => 2 * r,
        HalfParam::PlusHalf => 2 * r + 1,
    };
    if index < 2 {
        return Ok(determinant(mat));
    }
    Ok(determinant(mat) * dim_scalar::<S>(index, lambda) / dim_scalar::<S>(index, mu))
}

/// `T_k^φ` with the level-to-`(r,a)` assignment of the T-matrix convention.
pub fn t_level_k<S: Scalar>(k: usize, mu: &Partition, lambda: &Partition, q: &S) -> Result<S> {
    check_level(k, mu)?;
    check_level(k, lambda)?;
    let label = level_label(k, Convention::TMatrix)?;
    t_level(label.r, label.a, mu, lambda, q)
}

/// `T^k_{k−1}(λ,μ) = dim_k(μ)/dim_{k+1}(λ) · κ`.
pub fn t_link<S: Scalar>(k: usize, lambda: &Partition, mu: &Partition) -> Result<S> {
    let kap = kappa(k, lambda, mu)?;
    if kap == 0 {
        return Ok(S::zero());
    }
    Ok(dim_scalar::<S>(k, mu) / dim_scalar::<S>(k + 1, lambda) * S::from_u8(kap).unwrap())
}

/// `Δ^k_{k−1}(λ,μ)` through the finite intertwined form
/// `Σ_{ν≺λ} T^k_{k−1}(λ,ν) T_{k−1}(ν,μ)`.
pub fn delta<S: Scalar>(k: usize, lambda: &Partition, mu: &Partition, q: &S) -> Result<S> {
    check_level(k, lambda)?;
    check_level(k - 1, mu)?;
    let mut total = S::zero();
    for nu in interlaced_below(lambda, particles_on_level(k - 1)) {
        let link: S = t_link(k, lambda, &nu)?;
        if link.is_zero() {
            continue;
        }
        total = total + link * t_level_k(k - 1, &nu, mu, q)?;
    }
    Ok(total)
}

/// A truncated sum together with a rigorous bound on what was dropped.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bounded<S> {
    pub value: S,
    /// The true value lies in `[value, value + bound]`.
    pub bound: S,
}

/// `Δ^k_{k−1}(λ,μ) = Σ_ν T_k(λ,ν) T^k_{k−1}(ν,μ)` over `ν` with parts `<= cap`.
/// Since `T^k_{k−1} <= 1` entrywise and rows of `T_k` sum to one, the tail is
/// at most the row mass of `T_k` outside the box.
pub fn delta_truncated<S: Scalar>(
    k: usize,
    lambda: &Partition,
    mu: &Partition,
    q: &S,
    cap: u64,
) -> Result<Bounded<S>> {
    check_level(k, lambda)?;
    check_level(k - 1, mu)?;
    let mut value = S::zero();
    let mut mass = S::zero();
    for nu in Partition::enumerate(particles_on_level(k), cap) {
        let t = t_level_k(k, lambda, &nu, q)?;
        mass = mass + t.clone();
        let link: S = t_link(k, &nu, mu)?;
        if !link.is_zero() {
            value = value + t * link;
        }
    }
    let bound = S::one() - mass;
    Ok(Bounded {
        value,
        bound: if bound < S::zero() { S::zero() } else { bound },
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum DeltaMethod {
    /// Exact finite sum through the intertwining relation.
    #[default]
    Intertwined,
    /// Truncated `ν`-sum with parts `<= cap`, with an error radius.
    Truncated { cap: u64 },
}

/// Which first argument `Δ^j_{j−1}` receives in the product formula.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum DeltaArgument {
    /// `Δ(μ^(j), λ^(j−1))`: source state on level `j`. Rows sum to one.
    #[default]
    Source,
    /// `Δ(λ^(j), λ^(j−1))`, both arguments from the target state.
    Target,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MultilevelOptions {
    pub delta: DeltaMethod,
    pub argument: DeltaArgument,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultilevelEntry<S> {
    pub value: S,
    pub error_radius: f64,
}

/// Multi-level transition probability `T^φ(from, to)`.
pub fn t_multilevel<S: Scalar>(
    from: &InterlacedState,
    to: &InterlacedState,
    q: &S,
    opts: MultilevelOptions,
) -> Result<MultilevelEntry<S>> {
    if from.num_levels() != to.num_levels() {
        return Err(invalid("states must have the same number of levels"));
    }
    let mut value = t_level_k(1, from.level(1), to.level(1), q)?;
    // product of Δ_trunc / (Δ_trunc + bound) over the factors
    let mut shrink = 1.0f64;
    for j in 2..=from.num_levels() {
        let first = match opts.argument {
            DeltaArgument::Source => from.level(j),
            DeltaArgument::Target => to.level(j),
        };
        let d = match opts.delta {
            DeltaMethod::Intertwined => delta(j, first, to.level(j - 1), q)?,
            DeltaMethod::Truncated { cap } => {
                let b = delta_truncated(j, first, to.level(j - 1), q, cap)?;
                let dv = b.value.to_f64_lossy();
                shrink *= dv / (dv + b.bound.to_f64_lossy());
                b.value
            }
        };
        if d.is_zero() {
            return Err(Error::DegenerateDenominator {
                level: j,
                detail: format!("{} -> {}", from, to),
            });
        }
        let t = t_level_k(j, from.level(j), to.level(j), q)?;
        let link: S = t_link(j, to.level(j), to.level(j - 1))?;
        value = value * t * link / d;
    }
    let error_radius = value.to_f64_lossy().abs() * (1.0 - shrink);
    Ok(MultilevelEntry {
        value,
        error_radius,
    })
}

/// Dense matrix over a truncated index set of partitions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionMatrix<S> {
    pub index: Vec<Partition>,
    pub entries: Vec<Vec<S>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LevelKernel {
    /// Particle-system kernel `P_k`.
    Particle,
    /// `T_k^φ` with `φ = φ_α`.
    Jacobi,
}

impl<S: Scalar> TransitionMatrix<S> {
    pub fn build(k: usize, kind: LevelKernel, q: &S, cap: u64) -> Result<Self> {
        if k == 0 {
            return Err(invalid("levels start at 1"));
        }
        let index = Partition::enumerate(particles_on_level(k), cap);
        let entries = index
            .iter()
            .map(|from| {
                index
                    .iter()
                    .map(|to| match kind {
                        LevelKernel::Particle => p_level(k, from, to, q),
                        LevelKernel::Jacobi => t_level_k(k, from, to, q),
                    })
                    .collect::<Result<Vec<S>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { index, entries })
    }

    pub fn row_sums(&self) -> Vec<S> {
        self.entries
            .iter()
            .map(|row| row.iter().fold(S::zero(), |a, b| a + b.clone()))
            .collect()
    }

    pub fn position(&self, p: &Partition) -> Option<usize> {
        self.index.iter().position(|x| x == p)
    }

    /// Row vector times matrix.
    pub fn apply_left(&self, row: &[S]) -> Vec<S> {
        let n = self.index.len();
        let mut out = vec![S::zero(); n];
        for (i, ri) in row.iter().enumerate() {
            if ri.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                let e = &self.entries[i][j];
                if !e.is_zero() {
                    *o = o.clone() + ri.clone() * e.clone();
                }
            }
        }
        out
    }
}

/// Distribution over a truncated index set with the missing mass reported.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelDistribution<S> {
    pub index: Vec<Partition>,
    pub probs: Vec<S>,
    /// `1 − Σ probs`: mass that left the truncated index set.
    pub leakage: S,
}

impl<S: Scalar> LevelDistribution<S> {
    pub fn get(&self, p: &Partition) -> S {
        self.index
            .iter()
            .position(|x| x == p)
            .map_or_else(S::zero, |i| self.probs[i].clone())
    }
}

/// Row at the zero partition of `(T_k)^n` on parts `<= cap`.
pub fn evolve_level<S: Scalar>(
    k: usize,
    n: usize,
    q: &S,
    cap: u64,
) -> Result<LevelDistribution<S>> {
    let m = TransitionMatrix::build(k, LevelKernel::Jacobi, q, cap)?;
    Ok(evolve_with(&m, n))
}

pub fn evolve_with<S: Scalar>(m: &TransitionMatrix<S>, n: usize) -> LevelDistribution<S> {
    let mut row = vec![S::zero(); m.index.len()];
    row[0] = S::one();
    for _ in 0..n {
        row = m.apply_left(&row);
    }
    let total = row.iter().fold(S::zero(), |a, b| a + b.clone());
    LevelDistribution {
        index: m.index.clone(),
        leakage: S::one() - total,
        probs: row,
    }
}

/// `T^{φⁿ}(𝟎, ·)` on states whose top level has parts `<= cap`, via the
/// single-level `n`-step row and the Gibbs links between levels.
pub fn multilevel_from_packed<S: Scalar>(
    num_levels: usize,
    n: usize,
    q: &S,
    cap: u64,
) -> Result<(BTreeMap<InterlacedState, S>, S)> {
    if num_levels == 0 {
        return Err(invalid("need at least one level"));
    }
    let top = evolve_level(num_levels, n, q, cap)?;
    let mut out = BTreeMap::new();
    for (lam, p) in top.index.iter().zip(&top.probs) {
        if p.is_zero() {
            continue;
        }
        let mut stack = vec![(vec![lam.clone()], p.clone())];
        while let Some((chain, w)) = stack.pop() {
            let k = num_levels + 1 - chain.len();
            if k == 1 {
                let mut levels = chain.clone();
                levels.reverse();
                out.insert(InterlacedState::new(levels, 2 * n as u64)?, w);
                continue;
            }
            let upper = chain.last().expect("non-empty chain");
            for mu in interlaced_below(upper, particles_on_level(k - 1)) {
                let link: S = t_link(k, upper, &mu)?;
                let mut next = chain.clone();
                next.push(mu);
                stack.push((next, w.clone() * link));
            }
        }
    }
    Ok((out, top.leakage))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn p(v: &[u64]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn reflection_kernel_values() {
        let q = r(1, 2);
        assert_eq!(reflect_r(0, 0, &q), r(1, 3));
        assert_eq!(reflect_r(1, 1, &q), r(5, 12));
        let q0 = r(0, 1);
        for x in 0..4 {
            for y in 0..4 {
                assert_eq!(reflect_r(x, y, &q0), r(i64::from(x == y), 1));
            }
        }
    }

    #[test]
    fn reflection_rows_sum_to_one() {
        // tail after y = 60 is below 2^-58
        for x in 0..5u64 {
            let s: f64 = (0..60).map(|y| reflect_r(x, y, &0.5f64)).sum();
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn psi_and_f() {
        assert_eq!(psi(&r(2, 1), 0, 3), r(2, 1));
        assert_eq!(psi(&r(2, 1), 4, 3), r(0, 1));
        assert_eq!(psi(&r(2, 1), 2, 3), r(1, 1));
        assert_eq!(f_sm(1, &r(1, 1), 3, &r(1, 2)), r(1, 4));
    }

    #[test]
    fn f_pair_sum_converges_geometrically() {
        let q = 0.5f64;
        for x in 0..6 {
            for y in 0..6 {
                let closed = f_pair_closed(x, y, &q);
                let mut prev = f64::INFINITY;
                for terms in [4u64, 8, 16] {
                    let err = (f_pair_sum(x, y, &q, terms + x.min(y)) - closed).abs();
                    assert!(err <= prev);
                    prev = err;
                }
                assert!(
                    prev < 1e-9 * closed.abs().max(1.0),
                    "x={x} y={y} err={prev}"
                );
                // equals (1-q)^-2 I_{1/2}(x,y)
                let i = i_closed(HalfParam::PlusHalf, x, y, &q) / ((1.0 - q) * (1.0 - q));
                assert!((i - closed).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn interlace_determinant_cases() {
        assert_eq!(
            interlace_det(&p(&[0]), &p(&[2]), &r(3, 1)).unwrap(),
            r(3, 1)
        );
        assert_eq!(
            interlace_det(&p(&[1, 0]), &p(&[2, 1]), &r(2, 1)).unwrap(),
            r(2, 1)
        );
        assert_eq!(
            interlace_det(&p(&[3, 0]), &p(&[2, 1]), &r(5, 7)).unwrap(),
            r(0, 1)
        );
        assert!(interlace_det(&p(&[0]), &p(&[2, 1]), &r(1, 1)).is_err());
        // exhaustive check of the three cases against direct interlacing
        let m = r(7, 3);
        for c in Partition::enumerate(3, 3) {
            for l in Partition::enumerate(3, 3) {
                let expect = if !interlaces_unchecked(c.parts(), l.parts()) {
                    r(0, 1)
                } else if c.last() == 0 {
                    m.clone()
                } else {
                    r(1, 1)
                };
                assert_eq!(interlace_det(&c, &l, &m).unwrap(), expect, "{c} {l}");
            }
        }
    }

    #[test]
    fn i_closed_values() {
        let q = r(1, 2);
        assert_eq!(i_closed(HalfParam::MinusHalf, 0, 0, &q), r(1, 3));
        assert_eq!(i_closed(HalfParam::PlusHalf, 0, 0, &q), r(1, 6));
        assert_eq!(
            i_closed(HalfParam::PlusHalf, 0, 1, &q),
            i_closed(HalfParam::PlusHalf, 1, 0, &q)
        );
    }

    #[test]
    fn dims() {
        assert_eq!(dim(2, &p(&[5])).unwrap(), BigUint::from(1u32));
        assert_eq!(dim(3, &p(&[0])).unwrap(), BigUint::from(1u32));
        for l in 0..10u32 {
            assert_eq!(dim(3, &p(&[l as u64])).unwrap(), BigUint::from(2 * l + 1));
        }
        assert!(dim(1, &p(&[0])).is_err());
        assert!(dim(4, &p(&[0])).is_err());
        // SO(4) = SU(2)xSU(2): dim (l1,l2) = (l1+l2+1)(l1-l2+1)
        for l in Partition::enumerate(2, 5) {
            let (a, b) = (l.part(1), l.part(2));
            assert_eq!(
                dim(4, &l).unwrap(),
                BigUint::from((a + b + 1) * (a - b + 1))
            );
        }
    }

    #[test]
    fn kappa_cases() {
        assert_eq!(kappa(2, &p(&[3]), &p(&[0])).unwrap(), 1);
        assert_eq!(kappa(2, &p(&[3]), &p(&[2])).unwrap(), 2);
        assert_eq!(kappa(3, &p(&[2, 1]), &p(&[1])).unwrap(), 1);
        assert_eq!(kappa(3, &p(&[2, 1]), &p(&[0])).unwrap(), 0);
        assert!(kappa(3, &p(&[2]), &p(&[1])).is_err());
    }

    #[test]
    fn level_one_is_reflection() {
        let q = r(1, 2);
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(
                    p_level(1, &p(&[a]), &p(&[b]), &q).unwrap(),
                    reflect_r(a, b, &q)
                );
                assert_eq!(
                    t_level_k(1, &p(&[a]), &p(&[b]), &q).unwrap(),
                    reflect_r(a, b, &q)
                );
            }
        }
    }

    #[test]
    fn p3_example_positive() {
        let v = p_level(3, &p(&[1, 0]), &p(&[0, 0]), &r(1, 2)).unwrap();
        assert!(v > r(0, 1));
    }

    #[test]
    fn t_link_examples() {
        assert_eq!(t_link::<Rational>(2, &p(&[3]), &p(&[2])).unwrap(), r(2, 7));
        assert_eq!(
            t_link::<Rational>(3, &p(&[2, 1]), &p(&[0])).unwrap(),
            r(0, 1)
        );
        for k in 2..=5 {
            for lam in Partition::enumerate(particles_on_level(k), 4) {
                let s = interlaced_below(&lam, particles_on_level(k - 1))
                    .iter()
                    .fold(r(0, 1), |a, mu| {
                        a + t_link::<Rational>(k, &lam, mu).unwrap()
                    });
                assert_eq!(s, r(1, 1), "k={k} lam={lam}");
            }
        }
    }

    #[test]
    fn delta_routes_agree() {
        let q = r(1, 2);
        for k in 2..=3 {
            for lam in Partition::enumerate(particles_on_level(k), 2) {
                for mu in Partition::enumerate(particles_on_level(k - 1), 2) {
                    let exact = delta(k, &lam, &mu, &q).unwrap();
                    let t = delta_truncated(k, &lam, &mu, &q, 12).unwrap();
                    assert!(t.value <= exact);
                    assert!(
                        exact <= t.value.clone() + t.bound.clone(),
                        "k={k} {lam} {mu}"
                    );
                    assert!(t.bound < r(1, 100), "bound {}", t.bound.to_f64_lossy());
                }
            }
        }
    }

    #[test]
    fn truncation_leakage_shrinks() {
        let q = 0.5f64;
        let a = evolve_level(1, 3, &q, 10).unwrap().leakage;
        let b = evolve_level(1, 3, &q, 20).unwrap().leakage;
        assert!(b < a && b >= 0.0);
        let d0 = evolve_level(2, 0, &q, 5).unwrap();
        assert_eq!(d0.probs[0], 1.0);
        assert_eq!(d0.leakage, 0.0);
    }

    #[test]
    fn two_steps_on_level_one_is_convolution() {
        let q = r(1, 2);
        let d = evolve_level(1, 2, &q, 12).unwrap();
        for s in 0..=12u64 {
            let direct = (0..=12u64).fold(r(0, 1), |a, m| {
                a + reflect_r(0, m, &q) * reflect_r(m, s, &q)
            });
            assert_eq!(d.get(&p(&[s])), direct);
        }
    }

    #[test]
    fn multilevel_single_level_reduces() {
        let q = r(1, 2);
        let from = InterlacedState::from_parts(&[&[2]], 0).unwrap();
        let to = InterlacedState::from_parts(&[&[1]], 0).unwrap();
        let e = t_multilevel(&from, &to, &q, MultilevelOptions::default()).unwrap();
        assert_eq!(e.value, reflect_r(2, 1, &q));
        assert_eq!(e.error_radius, 0.0);
    }

    #[test]
    fn multilevel_truncated_delta_brackets_exact() {
        let q = r(1, 2);
        let from = InterlacedState::from_parts(&[&[0], &[1], &[1, 0]], 0).unwrap();
        let to = InterlacedState::from_parts(&[&[0], &[0], &[0, 0]], 0).unwrap();
        let exact = t_multilevel(&from, &to, &q, MultilevelOptions::default()).unwrap();
        assert_eq!(exact.value, r(1, 144));
        let opts = MultilevelOptions {
            delta: DeltaMethod::Truncated { cap: 14 },
            ..Default::default()
        };
        let approx = t_multilevel(&from, &to, &q, opts).unwrap();
        let diff = (approx.value.to_f64_lossy() - exact.value.to_f64_lossy()).abs();
        assert!(diff <= approx.error_radius + 1e-18);
        assert!(approx.error_radius < 1e-3, "{}", approx.error_radius);
    }
}
