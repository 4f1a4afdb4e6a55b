//! The two-half-step update: left jumps at integer times, right jumps at
//! half-integer times, with pushing from below, blocking, and reflection of
//! the bottom particles of odd levels at the wall.

use std::io::Write;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::{densely_packed, particles_on_level, InterlacedState, ModelParams, Partition};

/// Realizations of `ξ^k_i(n+1/2)` (`left`) and `ξ^k_i(n+1)` (`right`),
/// indexed `[k-1][i-1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseDraws {
    pub xi_left: Vec<Vec<u64>>,
    pub xi_right: Vec<Vec<u64>>,
}

impl NoiseDraws {
    pub fn zeros(num_levels: usize) -> Self {
        let shape: Vec<Vec<u64>> = (1..=num_levels)
            .map(|k| vec![0; particles_on_level(k)])
            .collect();
        Self {
            xi_left: shape.clone(),
            xi_right: shape,
        }
    }

    /// Left draws first (level by level), then right draws.
    pub fn sample<R: RngCore + ?Sized>(num_levels: usize, geo: &Geometric, rng: &mut R) -> Self {
        let mut d = Self::zeros(num_levels);
        for row in d.xi_left.iter_mut().chain(d.xi_right.iter_mut()) {
            for x in row.iter_mut() {
                *x = geo.sample(rng);
            }
        }
        d
    }

    pub fn num_levels(&self) -> usize {
        self.xi_left.len()
    }

    fn check(&self, num_levels: usize) -> Result<()> {
        let ok = |rows: &Vec<Vec<u64>>| {
            rows.len() >= num_levels
                && rows
                    .iter()
                    .take(num_levels)
                    .enumerate()
                    .all(|(i, r)| r.len() == particles_on_level(i + 1))
        };
        if ok(&self.xi_left) && ok(&self.xi_right) {
            Ok(())
        } else {
            Err(invalid(
                "noise draws do not cover every particle of the state",
            ))
        }
    }

    pub fn set_left(&mut self, k: usize, i: usize, v: u64) -> &mut Self {
        self.xi_left[k - 1][i - 1] = v;
        self
    }

    pub fn set_right(&mut self, k: usize, i: usize, v: u64) -> &mut Self {
        self.xi_right[k - 1][i - 1] = v;
        self
    }
}

/// Geometric law `P(x) = q^x (1-q)`, sampled by inversion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Geometric {
    ln_q: f64,
}

impl Geometric {
    pub fn new(q: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&q) {
            return Err(invalid(format!(
                "geometric parameter must lie in [0,1), got {q}"
            )));
        }
        Ok(Self { ln_q: q.ln() })
    }

    pub fn from_params(params: &ModelParams) -> Self {
        Self {
            ln_q: params.q_f64().ln(),
        }
    }

    /// `U = (u64 + 1)·2⁻⁶⁴ ∈ (0,1]`, so the tail is cut only below `2⁻⁶⁴`.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.ln_q == f64::NEG_INFINITY {
            return 0;
        }
        let u = (rng.next_u64() as f64 + 1.0) * (-64.0f64).exp2();
        (u.ln() / self.ln_q).floor() as u64
    }
}

pub fn sample_geometric<R: RngCore + ?Sized>(q: &BigRational, rng: &mut R) -> Result<u64> {
    if q.is_negative() || *q >= BigRational::one() {
        return Err(invalid(format!(
            "geometric parameter must lie in [0,1), got {q}"
        )));
    }
    if q.is_zero() {
        return Ok(0);
    }
    Ok(Geometric::new(q.to_f64().unwrap_or(f64::NAN))?.sample(rng))
}

/// Right-jump rule for the bottom particle of an odd level.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BottomRule {
    /// `min(|X(n+½) + ξ(n+1) − ξ(n+½)|, X^{k−1}_{(k−1)/2}(n+½))`.
    #[default]
    Reflected,
    /// Pushed position inside `|·|`, blocker taken at time `n`.
    HalfStepPositionTimeNBlocker,
    /// `min(|X(n) + ξ(n+1) − ξ(n+½)|, X^{k−1}_{(k−1)/2}(n))`: position and blocker both at time `n`.
    TimeNPosition,
}

/// Left jumps `n → n+½`.
pub fn left_halfstep(state: &InterlacedState, draws: &NoiseDraws) -> Result<InterlacedState> {
    if !state.is_integer_time() {
        return Err(invalid("left jumps start from an integer time"));
    }
    draws.check(state.num_levels())?;
    let mut out: Vec<Partition> = Vec::with_capacity(state.num_levels());
    for k in 1..=state.num_levels() {
        let cur = state.level(k).parts();
        let n = cur.len();
        let old_below: &[u64] = if k > 1 {
            state.level(k - 1).parts()
        } else {
            &[]
        };
        let new_below: &[u64] = if k > 1 { out[k - 2].parts() } else { &[] };
        let mut next = vec![0u64; n];
        for i in (1..=n).rev() {
            next[i - 1] = if k % 2 == 1 && i == n {
                // bottom particle: only pushed
                if i >= 2 {
                    cur[i - 1].min(new_below[i - 2])
                } else {
                    cur[i - 1]
                }
            } else {
                let pushed = if i == 1 {
                    cur[0]
                } else {
                    cur[i - 1].min(new_below[i - 2])
                };
                old_below[i - 1].max(pushed.saturating_sub(draws.xi_left[k - 1][i - 1]))
            };
        }
        out.push(Partition::new(next)?);
    }
    finish(out, state.half_steps() + 1)
}

/// Right jumps `n+½ → n+1` with the default bottom rule.
pub fn right_halfstep(half: &InterlacedState, draws: &NoiseDraws) -> Result<InterlacedState> {
    right_halfstep_with_rule(None, half, draws, BottomRule::Reflected)
}

/// Right jumps with an explicit bottom rule. `previous` (the time-`n`
/// state) is required by the non-default rules.
pub fn right_halfstep_with_rule(
    previous: Option<&InterlacedState>,
    half: &InterlacedState,
    draws: &NoiseDraws,
    rule: BottomRule,
) -> Result<InterlacedState> {
    if half.is_integer_time() {
        return Err(invalid("right jumps start from a half-integer time"));
    }
    draws.check(half.num_levels())?;
    let prev = match (rule, previous) {
        (BottomRule::Reflected, _) => None,
        (_, Some(p)) if p.num_levels() == half.num_levels() => Some(p),
        _ => return Err(invalid("this bottom rule needs the time-n state")),
    };
    let mut out: Vec<Partition> = Vec::with_capacity(half.num_levels());
    for k in 1..=half.num_levels() {
        let mid = half.level(k).parts();
        let n = mid.len();
        let half_below: &[u64] = if k > 1 {
            half.level(k - 1).parts()
        } else {
            &[]
        };
        let new_below: &[u64] = if k > 1 { out[k - 2].parts() } else { &[] };
        let mut next = vec![0u64; n];
        for i in (1..=n).rev() {
            next[i - 1] = if k % 2 == 1 && i == n {
                let xl = draws.xi_left[k - 1][i - 1] as i128;
                let xr = draws.xi_right[k - 1][i - 1] as i128;
                let (start, blocker) = match rule {
                    BottomRule::Reflected => (mid[i - 1], blocker_at(half, k, i)),
                    BottomRule::HalfStepPositionTimeNBlocker => {
                        let p = prev.expect("checked above");
                        (mid[i - 1], blocker_at(p, k, i))
                    }
                    BottomRule::TimeNPosition => {
                        let p = prev.expect("checked above");
                        (p.level(k).part(i), blocker_at(p, k, i))
                    }
                };
                let reflected = (start as i128 + xr - xl).unsigned_abs() as u64;
                blocker.map_or(reflected, |b| reflected.min(b))
            } else {
                let push = if k > 1 { new_below[i - 1] } else { 0 };
                let moved = mid[i - 1].max(push) + draws.xi_right[k - 1][i - 1];
                if i == 1 {
                    moved
                } else {
                    moved.min(half_below[i - 2])
                }
            };
        }
        out.push(Partition::new(next)?);
    }
    finish(out, half.half_steps() + 1)
}

fn blocker_at(state: &InterlacedState, k: usize, i: usize) -> Option<u64> {
    if k > 1 && i >= 2 {
        Some(state.level(k - 1).part(i - 1))
    } else {
        None
    }
}

fn finish(levels: Vec<Partition>, half_steps: u64) -> Result<InterlacedState> {
    InterlacedState::new(levels, half_steps)
}

/// Applies both half-steps with pre-drawn noise.
pub fn step_with_draws(
    state: &InterlacedState,
    draws: &NoiseDraws,
    rule: BottomRule,
) -> Result<(InterlacedState, InterlacedState)> {
    let half = left_halfstep(state, draws)?;
    let full = right_halfstep_with_rule(Some(state), &half, draws, rule)?;
    Ok((half, full))
}

/// One unit of time: sample noise, then left and right half-steps.
pub fn step<R: RngCore + ?Sized>(
    state: &InterlacedState,
    params: &ModelParams,
    rng: &mut R,
) -> Result<InterlacedState> {
    let geo = Geometric::from_params(params);
    let draws = NoiseDraws::sample(state.num_levels(), &geo, rng);
    Ok(step_with_draws(state, &draws, BottomRule::Reflected)?.1)
}

/// Trajectory at integer times `0..=n_steps` from the densely packed start.
pub fn simulate<R: RngCore + ?Sized>(
    params: &ModelParams,
    num_levels: usize,
    n_steps: usize,
    rng: &mut R,
) -> Result<Vec<InterlacedState>> {
    simulate_with_rule(params, num_levels, n_steps, BottomRule::Reflected, rng)
}

pub fn simulate_with_rule<R: RngCore + ?Sized>(
    params: &ModelParams,
    num_levels: usize,
    n_steps: usize,
    rule: BottomRule,
    rng: &mut R,
) -> Result<Vec<InterlacedState>> {
    let geo = Geometric::from_params(params);
    let mut traj = Vec::with_capacity(n_steps + 1);
    let mut state = densely_packed(num_levels)?;
    traj.push(state.clone());
    for _ in 0..n_steps {
        let draws = NoiseDraws::sample(num_levels, &geo, rng);
        state = step_with_draws(&state, &draws, rule)?.1;
        traj.push(state.clone());
    }
    Ok(traj)
}

/// Runs `n_steps` from `start` and returns only the final state.
pub fn run_from<R: RngCore + ?Sized>(
    start: &InterlacedState,
    geo: &Geometric,
    n_steps: usize,
    rule: BottomRule,
    rng: &mut R,
) -> Result<InterlacedState> {
    let mut state = start.clone();
    for _ in 0..n_steps {
        let draws = NoiseDraws::sample(state.num_levels(), geo, rng);
        state = step_with_draws(&state, &draws, rule)?.1;
    }
    Ok(state)
}

/// One JSON object per line.
pub fn write_jsonl<W: Write>(traj: &[InterlacedState], mut out: W) -> std::io::Result<()> {
    for s in traj {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// `time,level,index,shifted_position` rows.
pub fn write_csv<W: Write>(traj: &[InterlacedState], mut out: W) -> std::io::Result<()> {
    writeln!(out, "time,level,index,shifted_position")?;
    for s in traj {
        for k in 1..=s.num_levels() {
            for (i, x) in s.simple_level(k).iter().enumerate() {
                writeln!(out, "{},{},{},{}", s.time(), k, i + 1, x)?;
            }
        }
    }
    Ok(())
}
