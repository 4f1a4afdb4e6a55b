//! Seeded ensembles, empirical observables and goodness-of-fit tests.
//!
//! Trajectory `i` draws from ChaCha8 stream `i` keyed by the master seed, so
//! an ensemble does not depend on thread count or scheduling.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::dynamics::{run_from, step_with_draws, BottomRule, Geometric, NoiseDraws};
use crate::error::{invalid, Result};
use crate::lattice::{densely_packed, particles_on_level, InterlacedState, ModelParams, Partition};

/// Default significance level: `p < 1e-3` fails.
pub const DEFAULT_ALPHA: f64 = 1e-3;
/// Minimum expected count per chi-square bin.
pub const MIN_EXPECTED: f64 = 5.0;

pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleSpec {
    pub q: String,
    #[serde(skip)]
    pub geometric: Geometric,
    pub num_levels: usize,
    pub n_steps: usize,
    pub num_trajectories: u64,
    pub seed: u64,
    pub rule: BottomRule,
}

impl EnsembleSpec {
    pub fn new(
        params: &ModelParams,
        num_levels: usize,
        n_steps: usize,
        num_trajectories: u64,
        seed: u64,
    ) -> Result<Self> {
        if num_levels == 0 {
            return Err(invalid("need at least one level"));
        }
        Ok(Self {
            q: params.q().to_string(),
            geometric: Geometric::from_params(params),
            num_levels,
            n_steps,
            num_trajectories,
            seed,
            rule: BottomRule::default(),
        })
    }

    pub fn with_rule(mut self, rule: BottomRule) -> Self {
        self.rule = rule;
        self
    }

    /// Final state of trajectory `index`, started from `start`.
    pub fn run_one(&self, start: &InterlacedState, index: u64) -> Result<InterlacedState> {
        let mut rng = trajectory_rng(self.seed, index);
        run_from(start, &self.geometric, self.n_steps, self.rule, &mut rng)
    }

    /// Parallel histogram of `key(final state)` over the ensemble.
    pub fn histogram<K, F>(&self, start: &InterlacedState, key: F) -> Result<BTreeMap<K, u64>>
    where
        K: Ord + Send,
        F: Fn(&InterlacedState) -> K + Sync,
    {
        (0..self.num_trajectories)
            .into_par_iter()
            .map(|i| self.run_one(start, i).map(|s| key(&s)))
            .try_fold(BTreeMap::new, |mut acc, k| {
                *acc.entry(k?).or_insert(0u64) += 1;
                Ok(acc)
            })
            .try_reduce(BTreeMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                Ok(a)
            })
    }

    /// Number of trajectories for which each predicate holds.
    pub fn event_counts<F>(&self, start: &InterlacedState, events: &[F]) -> Result<Vec<u64>>
    where
        F: Fn(&InterlacedState) -> bool + Sync,
    {
        (0..self.num_trajectories)
            .into_par_iter()
            .map(|i| self.run_one(start, i))
            .try_fold(
                || vec![0u64; events.len()],
                |mut acc, s| {
                    let s = s?;
                    for (a, e) in acc.iter_mut().zip(events) {
                        *a += u64::from(e(&s));
                    }
                    Ok(acc)
                },
            )
            .try_reduce(
                || vec![0u64; events.len()],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    Ok(a)
                },
            )
    }
}

/// Sample mean of an indicator with its standard error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Observable {
    pub label: String,
    pub value: f64,
    pub stderr: f64,
}

impl Observable {
    pub fn from_count(label: impl Into<String>, hits: u64, total: u64) -> Self {
        let m = total as f64;
        let p = hits as f64 / m;
        Self {
            label: label.into(),
            value: p,
            // sample std of a 0/1 variable, divided by √M
            stderr: (p * (1.0 - p) / (m - 1.0).max(1.0)).sqrt(),
        }
    }

    /// `|value − reference|` in units of the standard error.
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = (self.value - reference).abs();
        if self.stderr == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / self.stderr
        }
    }
}

/// Joint occupation of `sites` (shifted coordinates) on level `k` at time `n`,
/// one estimate per site set.
pub fn empirical_correlations(
    spec: &EnsembleSpec,
    k: usize,
    site_sets: &[Vec<u64>],
) -> Result<Vec<Observable>> {
    if k == 0 || k > spec.num_levels {
        return Err(invalid(format!(
            "level {k} outside 1..={}",
            spec.num_levels
        )));
    }
    if spec.num_trajectories < 2 {
        return Err(invalid("need at least two trajectories"));
    }
    let start = densely_packed(spec.num_levels)?;
    let events: Vec<_> = site_sets
        .iter()
        .map(|set| {
            move |s: &InterlacedState| {
                let simple = s.simple_level(k);
                set.iter().all(|x| simple.contains(x))
            }
        })
        .collect();
    let counts = spec.event_counts(&start, &events)?;
    Ok(site_sets
        .iter()
        .zip(counts)
        .map(|(set, c)| Observable::from_count(format!("{set:?}"), c, spec.num_trajectories))
        .collect())
}

/// Per-site density of the simple process on level `k`.
pub fn empirical_level_density(
    spec: &EnsembleSpec,
    k: usize,
    sites: &[u64],
) -> Result<Vec<Observable>> {
    let sets: Vec<Vec<u64>> = sites.iter().map(|&s| vec![s]).collect();
    empirical_correlations(spec, k, &sets)
}

/// Histogram of level `k` at time `n_steps` from the densely packed start.
pub fn empirical_level_distribution(
    spec: &EnsembleSpec,
    k: usize,
) -> Result<BTreeMap<Partition, u64>> {
    if k == 0 || k > spec.num_levels {
        return Err(invalid(format!(
            "level {k} outside 1..={}",
            spec.num_levels
        )));
    }
    let start = densely_packed(spec.num_levels)?;
    spec.histogram(&start, |s| s.level(k).clone())
}

/// Histogram of whole states at time `n_steps` from the densely packed start.
pub fn empirical_multilevel_distribution(
    spec: &EnsembleSpec,
) -> Result<BTreeMap<InterlacedState, u64>> {
    let start = densely_packed(spec.num_levels)?;
    spec.histogram(&start, InterlacedState::clone)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub threshold: f64,
    pub bins: usize,
    pub verdict: Verdict,
    pub note: Option<String>,
}

/// Chi-square goodness of fit of `counts` against exact probabilities.
/// Bins with expected count below [`MIN_EXPECTED`] are pooled together with
/// the mass outside `expected` (including `leakage`).
pub fn chi_square_exact<K: Ord + Clone>(
    counts: &BTreeMap<K, u64>,
    expected: &BTreeMap<K, f64>,
    threshold: f64,
) -> ChiSquareReport {
    let total: u64 = counts.values().sum();
    let m = total as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    let mut seen_exp = 0.0;
    for (key, &p) in expected {
        let e = p * m;
        let o = counts.get(key).copied().unwrap_or(0) as f64;
        seen_exp += e;
        if e >= MIN_EXPECTED {
            bins.push((o, e));
        } else {
            pooled_obs += o;
            pooled_exp += e;
        }
    }
    pooled_obs += counts
        .iter()
        .filter(|(k, _)| !expected.contains_key(*k))
        .map(|(_, &v)| v as f64)
        .sum::<f64>();
    pooled_exp += (m - seen_exp).max(0.0);
    let mut note = None;
    if pooled_exp >= MIN_EXPECTED {
        bins.push((pooled_obs, pooled_exp));
    } else if pooled_obs > 0.0 || pooled_exp > 0.0 {
        if let Some(last) = bins
            .iter_mut()
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
        {
            last.0 += pooled_obs;
            last.1 += pooled_exp;
        }
    }
    if bins.len() < 2 {
        note = Some("fewer than two bins with expected count >= 5; increase trajectories".into());
        return ChiSquareReport {
            statistic: 0.0,
            dof: 0,
            p_value: f64::NAN,
            threshold,
            bins: bins.len(),
            verdict: Verdict::Inconclusive,
            note,
        };
    }
    let statistic: f64 = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = bins.len() - 1;
    let p_value = ChiSquared::new(dof as f64)
        .map(|d| d.sf(statistic))
        .unwrap_or(f64::NAN);
    ChiSquareReport {
        statistic,
        dof,
        p_value,
        threshold,
        bins: bins.len(),
        verdict: if p_value >= threshold {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        note,
    }
}

/// Two-sample chi-square homogeneity test.
pub fn chi_square_two_sample<K: Ord + Clone>(
    a: &BTreeMap<K, u64>,
    b: &BTreeMap<K, u64>,
    threshold: f64,
) -> ChiSquareReport {
    let (na, nb) = (
        a.values().sum::<u64>() as f64,
        b.values().sum::<u64>() as f64,
    );
    let mut keys: Vec<&K> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pool = (0.0, 0.0);
    for k in keys {
        let (x, y) = (
            a.get(k).copied().unwrap_or(0) as f64,
            b.get(k).copied().unwrap_or(0) as f64,
        );
        let expected_min = (x + y) * na.min(nb) / (na + nb);
        if expected_min >= MIN_EXPECTED {
            cells.push((x, y));
        } else {
            pool.0 += x;
            pool.1 += y;
        }
    }
    if pool.0 + pool.1 > 0.0 {
        cells.push(pool);
    }
    let n = na + nb;
    let statistic: f64 = cells
        .iter()
        .map(|&(x, y)| {
            let row = x + y;
            let (ea, eb) = (row * na / n, row * nb / n);
            (x - ea).powi(2) / ea + (y - eb).powi(2) / eb
        })
        .sum();
    if cells.len() < 2 {
        return ChiSquareReport {
            statistic,
            dof: 0,
            p_value: 1.0,
            threshold,
            bins: cells.len(),
            verdict: if statistic == 0.0 {
                Verdict::Pass
            } else {
                Verdict::Inconclusive
            },
            note: Some("single pooled cell".into()),
        };
    }
    let dof = cells.len() - 1;
    let p_value = ChiSquared::new(dof as f64)
        .map(|d| d.sf(statistic))
        .unwrap_or(f64::NAN);
    ChiSquareReport {
        statistic,
        dof,
        p_value,
        threshold,
        bins: cells.len(),
        verdict: if p_value >= threshold {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        note: None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TvReport {
    pub distance: f64,
    pub bound: f64,
    pub leakage: f64,
    pub verdict: Verdict,
}

/// Total-variation distance between empirical frequencies and an exact law,
/// against the 99% sampling bound
/// `½ Σ √(p(1−p)/M) + √(ln 100 / 2M) + leakage`.
pub fn total_variation<K: Ord>(
    counts: &BTreeMap<K, u64>,
    exact: &BTreeMap<K, f64>,
    leakage: f64,
) -> TvReport {
    let m = counts.values().sum::<u64>() as f64;
    let mut distance = 0.0;
    let mut spread = 0.0;
    for (k, &p) in exact {
        let f = counts.get(k).copied().unwrap_or(0) as f64 / m;
        distance += (f - p).abs();
        let p = p.max(0.0);
        spread += (p * (1.0 - p).max(0.0) / m).sqrt();
    }
    distance += counts
        .iter()
        .filter(|(k, _)| !exact.contains_key(*k))
        .map(|(_, &v)| v as f64 / m)
        .sum::<f64>();
    distance *= 0.5;
    let bound = 0.5 * spread + (100f64.ln() / (2.0 * m)).sqrt() + leakage.abs();
    TvReport {
        distance,
        bound,
        leakage,
        verdict: if distance <= bound {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    }
}

/// A particle that moved below the position its blocker held at time `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockingViolation {
    pub level: usize,
    pub index: usize,
    pub value: u64,
    pub lower_bound: u64,
}

/// Every particle except the bottom one of an odd level satisfies
/// `X^k_i(n+1) ≥ X^{k−1}_i(n)`: it cannot end to the left of where the
/// particle below it started. Returns the first violation of `from → to`.
pub fn blocking_witness(from: &InterlacedState, to: &InterlacedState) -> Option<BlockingViolation> {
    for k in 2..=from.num_levels().min(to.num_levels()) {
        let below = from.level(k - 1);
        for i in 1..=particles_on_level(k) {
            if i > below.len() {
                continue;
            }
            let value = to.level(k).part(i);
            let lower_bound = below.part(i);
            if value < lower_bound {
                return Some(BlockingViolation {
                    level: k,
                    index: i,
                    value,
                    lower_bound,
                });
            }
        }
    }
    None
}

/// Exhaustively applies one step to `from` for every draw vector with entries
/// `<= max_draw`, returning whether `to` was ever produced.
pub fn reachable_with_bounded_draws(
    from: &InterlacedState,
    to: &InterlacedState,
    max_draw: u64,
    rule: BottomRule,
) -> Result<bool> {
    let levels = from.num_levels();
    let slots: Vec<(usize, usize)> = (1..=levels)
        .flat_map(|k| (1..=particles_on_level(k)).map(move |i| (k, i)))
        .collect();
    let dims = 2 * slots.len();
    let combos = (max_draw + 1)
        .checked_pow(dims as u32)
        .ok_or_else(|| invalid("too many draw combinations"))?;
    let target = to.levels();
    (0..combos)
        .into_par_iter()
        .try_fold(
            || false,
            |found, mut code| {
                if found {
                    return Ok(true);
                }
                let mut draws = NoiseDraws::zeros(levels);
                for (j, &(k, i)) in slots.iter().enumerate() {
                    draws.set_left(k, i, code % (max_draw + 1));
                    code /= max_draw + 1;
                    let _ = j;
                }
                for &(k, i) in &slots {
                    draws.set_right(k, i, code % (max_draw + 1));
                    code /= max_draw + 1;
                }
                let (_, full) = step_with_draws(from, &draws, rule)?;
                Ok(full.levels() == target)
            },
        )
        .try_reduce(|| false, |a, b| Ok(a || b))
}

/// Machine-readable record of one statistical check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestRecord {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub seed: Option<u64>,
    pub runtime_secs: f64,
    pub detail: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleReport {
    pub num_trajectories: u64,
    pub seed: u64,
    pub observables: Vec<Observable>,
    pub tests: Vec<TestRecord>,
}

/// Runs `f` and records its wall-clock duration.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t0 = Instant::now();
    let out = f();
    (out, t0.elapsed().as_secs_f64())
}
