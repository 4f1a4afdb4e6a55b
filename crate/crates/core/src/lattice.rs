//! Partitions, interlacing arrays and the level bookkeeping shared by every
//! other module.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Number of particles on level `k` (levels start at 1).
pub fn particles_on_level(k: usize) -> usize {
    k.div_ceil(2)
}

/// One level's particle positions, nonincreasing, zeros included.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct Partition(Vec<u64>);

impl Partition {
    pub fn new(parts: Vec<u64>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid(format!("parts must be nonincreasing: {parts:?}")));
        }
        Ok(Self(parts))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn parts(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `parts[i]` with the 1-based index used throughout the formulas.
    pub fn part(&self, i: usize) -> u64 {
        self.0[i - 1]
    }

    pub fn first(&self) -> u64 {
        self.0.first().copied().unwrap_or(0)
    }

    pub fn last(&self) -> u64 {
        self.0.last().copied().unwrap_or(0)
    }

    pub fn size(&self) -> u64 {
        self.0.iter().sum()
    }

    /// Strict positions `parts[i] + len - i` (1-based `i`), used as Jacobi
    /// indices and as the simple-process coordinates.
    pub fn shifted(&self) -> Vec<u64> {
        let n = self.0.len() as u64;
        self.0
            .iter()
            .enumerate()
            .map(|(i, &p)| p + n - 1 - i as u64)
            .collect()
    }

    /// All partitions of length `len` with parts `<= cap`, in graded
    /// lexicographic order (by size, then lexicographically).
    pub fn enumerate(len: usize, cap: u64) -> Vec<Partition> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(len);
        fn rec(len: usize, upper: u64, cur: &mut Vec<u64>, out: &mut Vec<Partition>) {
            if cur.len() == len {
                out.push(Partition(cur.clone()));
                return;
            }
            for v in 0..=upper {
                cur.push(v);
                rec(len, v, cur, out);
                cur.pop();
            }
        }
        rec(len, cap, &mut cur, &mut out);
        out.sort_by(|a, b| a.size().cmp(&b.size()).then_with(|| a.0.cmp(&b.0)));
        out
    }
}

impl TryFrom<Vec<u64>> for Partition {
    type Error = Error;
    fn try_from(v: Vec<u64>) -> Result<Self> {
        Partition::new(v)
    }
}

impl From<Partition> for Vec<u64> {
    fn from(p: Partition) -> Self {
        p.0
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// `mu ≺ lambda`: `lambda[i+1] <= mu[i] <= lambda[i]` for every meaningful `i`.
pub fn interlaces(mu: &Partition, lambda: &Partition) -> Result<bool> {
    if lambda.len() != mu.len() && lambda.len() != mu.len() + 1 {
        return Err(invalid(format!(
            "interlacing needs len(lambda) in {{len(mu), len(mu)+1}}, got {} and {}",
            mu.len(),
            lambda.len()
        )));
    }
    Ok(interlaces_unchecked(mu.parts(), lambda.parts()))
}

pub(crate) fn interlaces_unchecked(mu: &[u64], lambda: &[u64]) -> bool {
    mu.iter()
        .enumerate()
        .all(|(i, &m)| m <= lambda[i] && lambda.get(i + 1).is_none_or(|&below| below <= m))
}

/// Positions of the simple process: `x_i + ⌊(k+1)/2⌋ - i`.
pub fn shift_to_simple(level_k: usize, x: &Partition) -> Result<Vec<u64>> {
    if x.len() != particles_on_level(level_k) {
        return Err(invalid(format!(
            "level {level_k} carries {} particles, got {}",
            particles_on_level(level_k),
            x.len()
        )));
    }
    Ok(x.shifted())
}

/// Full configuration `(λ^(1) ≺ λ^(2) ≺ …)` at a half-integer time.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "StateRepr", into = "StateRepr")]
pub struct InterlacedState {
    levels: Vec<Partition>,
    half_steps: u64,
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    time: f64,
    levels: Vec<Vec<u64>>,
}

impl TryFrom<StateRepr> for InterlacedState {
    type Error = Error;
    fn try_from(r: StateRepr) -> Result<Self> {
        let doubled = r.time * 2.0;
        if !(doubled >= 0.0 && doubled.fract() == 0.0) {
            return Err(invalid(format!(
                "time must be a nonnegative half-integer, got {}",
                r.time
            )));
        }
        let levels = r
            .levels
            .into_iter()
            .map(Partition::new)
            .collect::<Result<Vec<_>>>()?;
        InterlacedState::new(levels, doubled as u64)
    }
}

impl From<InterlacedState> for StateRepr {
    fn from(s: InterlacedState) -> Self {
        StateRepr {
            time: s.time(),
            levels: s.levels.into_iter().map(Vec::from).collect(),
        }
    }
}

impl InterlacedState {
    /// Validates level lengths and interlacing between adjacent levels.
    pub fn new(levels: Vec<Partition>, half_steps: u64) -> Result<Self> {
        validate_levels(&levels)?;
        Ok(Self { levels, half_steps })
    }

    /// Builds a state from raw level vectors at integer time `n`.
    pub fn from_parts(levels: &[&[u64]], n: u64) -> Result<Self> {
        let levels = levels
            .iter()
            .map(|l| Partition::new(l.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(levels, 2 * n)
    }

    pub(crate) fn from_validated(levels: Vec<Partition>, half_steps: u64) -> Self {
        debug_assert!(validate_levels(&levels).is_ok());
        Self { levels, half_steps }
    }

    pub fn levels(&self) -> &[Partition] {
        &self.levels
    }

    /// Level `k`, 1-based.
    pub fn level(&self, k: usize) -> &Partition {
        &self.levels[k - 1]
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn half_steps(&self) -> u64 {
        self.half_steps
    }

    pub fn time(&self) -> f64 {
        self.half_steps as f64 / 2.0
    }

    pub fn is_integer_time(&self) -> bool {
        self.half_steps % 2 == 0
    }

    /// Shifted positions of level `k`.
    pub fn simple_level(&self, k: usize) -> Vec<u64> {
        self.levels[k - 1].shifted()
    }

    pub fn truncated(&self, num_levels: usize) -> Self {
        Self {
            levels: self.levels[..num_levels.min(self.levels.len())].to_vec(),
            half_steps: self.half_steps,
        }
    }
}

impl fmt::Display for InterlacedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.levels.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            if l.len() == 1 {
                write!(f, "{}", l.first())?;
            } else {
                write!(f, "{l}")?;
            }
        }
        write!(f, ")")
    }
}

pub fn validate_levels(levels: &[Partition]) -> Result<()> {
    for (i, l) in levels.iter().enumerate() {
        let k = i + 1;
        if l.len() != particles_on_level(k) {
            return Err(invalid(format!(
                "level {k} must carry {} particles, got {}",
                particles_on_level(k),
                l.len()
            )));
        }
    }
    for k in 1..levels.len() {
        if !interlaces_unchecked(levels[k - 1].parts(), levels[k].parts()) {
            return Err(Error::NotInterlaced {
                lower: k,
                upper: k + 1,
            });
        }
    }
    Ok(())
}

/// All particles at the wall.
pub fn densely_packed(num_levels: usize) -> Result<InterlacedState> {
    if num_levels == 0 {
        return Err(invalid("need at least one level"));
    }
    let levels = (1..=num_levels)
        .map(|k| Partition::zeros(particles_on_level(k)))
        .collect();
    Ok(InterlacedState::from_validated(levels, 0))
}

/// Number of simple-process particles on `level` strictly to the right of `site`.
pub fn height_function(state: &InterlacedState, level: usize, site: u64) -> Result<usize> {
    if level == 0 || level > state.num_levels() {
        return Err(invalid(format!(
            "level {level} outside 1..={}",
            state.num_levels()
        )));
    }
    Ok(state
        .simple_level(level)
        .iter()
        .filter(|&&x| x > site)
        .count())
}

/// Jacobi parameter `a ∈ {−1/2, +1/2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HalfParam {
    #[serde(rename = "-1/2")]
    MinusHalf,
    #[serde(rename = "+1/2")]
    PlusHalf,
}

impl HalfParam {
    pub fn value(self) -> f64 {
        match self {
            HalfParam::MinusHalf => -0.5,
            HalfParam::PlusHalf => 0.5,
        }
    }

    /// `2a` as an integer.
    pub fn twice(self) -> i64 {
        match self {
            HalfParam::MinusHalf => -1,
            HalfParam::PlusHalf => 1,
        }
    }
}

/// How a physical level maps to the `(r, a)` labels of the kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// Solve `2r + 1/2 + a = k`.
    KernelThm,
    /// `(⌊(k+1)/2⌋, −1/2)` for odd `k`, `(k/2, +1/2)` for even `k`.
    TMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelLabel {
    pub k: usize,
    pub r: usize,
    pub a: HalfParam,
}

impl LevelLabel {
    /// The `2r + a` ordering key of the kernel's indicator term, doubled.
    pub fn order_key(&self) -> i64 {
        4 * self.r as i64 + self.a.twice()
    }
}

pub fn level_label(k: usize, convention: Convention) -> Result<LevelLabel> {
    if k == 0 {
        return Err(invalid("levels start at 1"));
    }
    let (r, a) = match convention {
        Convention::KernelThm => {
            if k % 2 == 0 {
                (k / 2, HalfParam::MinusHalf)
            } else {
                ((k - 1) / 2, HalfParam::PlusHalf)
            }
        }
        Convention::TMatrix => {
            let a = if k % 2 == 0 {
                HalfParam::PlusHalf
            } else {
                HalfParam::MinusHalf
            };
            (particles_on_level(k), a)
        }
    };
    Ok(LevelLabel { k, r, a })
}

/// Geometric jump parameter `q ∈ [0,1)` and `α = 2q/(1−q)`, both exact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelParams {
    q: BigRational,
    alpha: BigRational,
}

impl ModelParams {
    pub fn new(q: BigRational) -> Result<Self> {
        if q.is_negative() || q >= BigRational::one() {
            return Err(invalid(format!("q must lie in [0,1), got {q}")));
        }
        let two = BigRational::from_integer(BigInt::from(2));
        let alpha = &two * &q / (BigRational::one() - &q);
        Ok(Self { q, alpha })
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(invalid("zero denominator"));
        }
        Self::new(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Inverse of `α = 2q/(1−q)`: `q = α/(2+α)`.
    pub fn from_alpha(alpha: BigRational) -> Result<Self> {
        if alpha.is_negative() {
            return Err(invalid(format!("alpha must be nonnegative, got {alpha}")));
        }
        let two = BigRational::from_integer(BigInt::from(2));
        let q = &alpha / (two + &alpha);
        Self::new(q)
    }

    /// Parses `"1/2"`, `"3"` or a finite decimal such as `"0.3"` exactly.
    pub fn parse_rational(s: &str) -> Result<BigRational> {
        parse_rational(s)
    }

    pub fn q(&self) -> &BigRational {
        &self.q
    }

    pub fn alpha(&self) -> &BigRational {
        &self.alpha
    }

    pub fn q_f64(&self) -> f64 {
        self.q.to_f64().unwrap_or(f64::NAN)
    }

    pub fn alpha_f64(&self) -> f64 {
        self.alpha.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_frozen(&self) -> bool {
        self.q.is_zero()
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || invalid(format!("malformed rational '{s}'"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        let frac_num: BigInt = frac.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let mut value = BigRational::from_integer(int_part.abs()) + BigRational::new(frac_num, den);
        if negative {
            value = -value;
        }
        return Ok(value);
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[u64]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn interlacing_examples() {
        assert!(interlaces(&p(&[0]), &p(&[0, 0])).unwrap());
        assert!(interlaces(&p(&[1]), &p(&[1, 0])).unwrap());
        assert!(!interlaces(&p(&[2]), &p(&[1, 0])).unwrap());
        assert!(interlaces(&p(&[3, 1]), &p(&[3, 2])).unwrap());
        assert!(matches!(
            interlaces(&p(&[1]), &p(&[1, 0, 0])),
            Err(Error::InvalidArguments(_))
        ));
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift_to_simple(3, &p(&[3, 2])).unwrap(), vec![4, 2]);
        assert_eq!(shift_to_simple(1, &p(&[1])).unwrap(), vec![1]);
        assert_eq!(shift_to_simple(4, &p(&[0, 0])).unwrap(), vec![1, 0]);
        assert!(shift_to_simple(4, &p(&[0])).is_err());
    }

    #[test]
    fn packed_states() {
        let s = densely_packed(3).unwrap();
        assert_eq!(s.levels(), &[p(&[0]), p(&[0]), p(&[0, 0])]);
        assert_eq!(densely_packed(1).unwrap().levels(), &[p(&[0])]);
        assert_eq!(densely_packed(4).unwrap().level(4), &p(&[0, 0]));
        assert!(densely_packed(0).is_err());
    }

    #[test]
    fn heights() {
        let s = densely_packed(4).unwrap();
        assert_eq!(height_function(&s, 4, 0).unwrap(), 1);
        assert_eq!(height_function(&s, 1, 5).unwrap(), 0);
        // worked-example state at time n: level 3 is (3,2), shifted (4,2)
        let fig = InterlacedState::from_parts(&[&[1], &[3], &[3, 2], &[3, 3]], 0).unwrap();
        assert_eq!(fig.simple_level(3), vec![4, 2]);
        assert_eq!(height_function(&fig, 3, 1).unwrap(), 2);
        assert!(height_function(&fig, 5, 0).is_err());
    }

    #[test]
    fn labels() {
        let l = level_label(2, Convention::KernelThm).unwrap();
        assert_eq!((l.r, l.a), (1, HalfParam::MinusHalf));
        let l = level_label(1, Convention::TMatrix).unwrap();
        assert_eq!((l.r, l.a), (1, HalfParam::MinusHalf));
        let l = level_label(4, Convention::TMatrix).unwrap();
        assert_eq!((l.r, l.a), (2, HalfParam::PlusHalf));
        let l = level_label(1, Convention::KernelThm).unwrap();
        assert_eq!((l.r, l.a), (0, HalfParam::PlusHalf));
        for k in 1..20 {
            let l = level_label(k, Convention::KernelThm).unwrap();
            assert_eq!(4 * l.r as i64 + 1 + l.a.twice(), 2 * k as i64);
        }
    }

    #[test]
    fn params_and_parsing() {
        let m = ModelParams::from_ratio(1, 2).unwrap();
        assert_eq!(m.alpha(), &BigRational::from_integer(2.into()));
        assert!(ModelParams::from_ratio(1, 1).is_err());
        assert!(ModelParams::from_ratio(-1, 3).is_err());
        let back = ModelParams::from_alpha(m.alpha().clone()).unwrap();
        assert_eq!(back.q(), m.q());
        assert_eq!(
            parse_rational("0.3").unwrap(),
            BigRational::new(3.into(), 10.into())
        );
        assert_eq!(
            parse_rational(" 1/4").unwrap(),
            BigRational::new(1.into(), 4.into())
        );
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/2").is_err());
        assert!(parse_rational("0.").is_err());
    }

    #[test]
    fn state_json_is_stable() {
        let s = densely_packed(3).unwrap();
        let js = serde_json::to_string(&s).unwrap();
        assert_eq!(js, r#"{"time":0.0,"levels":[[0],[0],[0,0]]}"#);
        let back: InterlacedState = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"time":0.0,"levels":[[2],[1],[1,0]]}"#;
        assert!(serde_json::from_str::<InterlacedState>(bad).is_err());
        let bad_time = r#"{"time":0.3,"levels":[[0]]}"#;
        assert!(serde_json::from_str::<InterlacedState>(bad_time).is_err());
    }

    #[test]
    fn graded_order() {
        let e = Partition::enumerate(2, 2);
        let v: Vec<Vec<u64>> = e.into_iter().map(Vec::from).collect();
        assert_eq!(
            v,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![1, 1],
                vec![2, 0],
                vec![2, 1],
                vec![2, 2]
            ]
        );
    }
}
