//! Verification suites shared by the `verify` command and the acceptance
//! test target. Each suite returns one [`CriterionResult`].

use std::collections::BTreeMap;

use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::asymptotic::{
    a_expansion_check, a_quadratic_coefficient, a_quadratic_numeric, jacobi_trend,
    pearcey_gaussian_term, pearcey_trend, symmetric_pearcey, MacroParams, PearceyParams,
    PearceyQuadrature, RelativePoint,
};
use crate::dynamics::{step_with_draws, BottomRule, NoiseDraws};
use crate::error::Result;
use crate::kernel::{correlation, kernel_k, KernelPoint, QuadratureSpec};
use crate::lattice::{
    level_label, particles_on_level, Convention, HalfParam, InterlacedState, ModelParams, Partition,
};
use crate::montecarlo::{
    blocking_witness, chi_square_exact, empirical_correlations, empirical_multilevel_distribution,
    reachable_with_bounded_draws, timed, total_variation, EnsembleSpec, Verdict, DEFAULT_ALPHA,
};
use crate::transition::{
    dim, evolve_level, evolve_with, interlaced_below, kappa, multilevel_from_packed, p_level,
    t_level_k, t_multilevel, LevelKernel, MultilevelOptions, TransitionMatrix,
};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    /// Non-blocking criteria are reports: they never fail a run.
    pub blocking: bool,
    pub statistic: f64,
    pub threshold: f64,
    pub seed: Option<u64>,
    pub runtime_secs: f64,
    pub detail: serde_json::Value,
}

impl CriterionResult {
    pub fn verdict(&self) -> &'static str {
        match (self.passed, self.blocking) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "FAIL (report)",
        }
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{} [{:>2}] {}: statistic={:.3e} threshold={:.3e} ({:.1}s)",
            self.verdict(),
            self.id,
            self.name,
            self.statistic,
            self.threshold,
            self.runtime_secs
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub qs: Vec<String>,
    pub max_level: usize,
    pub max_part: u64,
    pub trajectories: Option<u64>,
    pub seed: u64,
    pub quad: QuadratureSpec,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            qs: vec!["1/4".into(), "1/2".into()],
            max_level: 5,
            max_part: 4,
            trajectories: None,
            seed: 20240601,
            quad: QuadratureSpec::default(),
        }
    }
}

impl VerifyConfig {
    fn params(&self) -> Result<Vec<ModelParams>> {
        self.qs
            .iter()
            .map(|q| ModelParams::new(ModelParams::parse_rational(q)?))
            .collect()
    }

    fn first_q(&self) -> Result<ModelParams> {
        match self.params()?.into_iter().next() {
            Some(p) => Ok(p),
            None => ModelParams::from_ratio(1, 2),
        }
    }
}

fn finish(
    id: u8,
    name: &str,
    blocking: bool,
    (passed, statistic, threshold, seed, detail): (bool, f64, f64, Option<u64>, serde_json::Value),
    runtime_secs: f64,
) -> CriterionResult {
    CriterionResult {
        id,
        name: name.into(),
        passed,
        blocking,
        statistic,
        threshold,
        seed,
        runtime_secs,
        detail,
    }
}

type Outcome = Result<(bool, f64, f64, Option<u64>, serde_json::Value)>;

fn run(id: u8, name: &str, blocking: bool, f: impl FnOnce() -> Outcome) -> Result<CriterionResult> {
    let (out, secs) = timed(f);
    Ok(finish(id, name, blocking, out?, secs))
}

/// `P_k = T_k^φ` entrywise, exactly.
pub fn identity(cfg: &VerifyConfig) -> Result<CriterionResult> {
    run(1, "exact P_k = T_k identity", true, || {
        let mut mismatches = 0u64;
        let mut checked = 0u64;
        let mut first = None;
        for params in cfg.params()? {
            let q = params.q().clone();
            for k in 1..=cfg.max_level {
                let idx = Partition::enumerate(particles_on_level(k), cfg.max_part);
                let rows: Vec<Result<(u64, Option<String>)>> = idx
                    .par_iter()
                    .map(|lam| {
                        let mut bad = 0;
                        let mut example = None;
                        for beta in &idx {
                            let p = p_level(k, lam, beta, &q)?;
                            let t = t_level_k(k, lam, beta, &q)?;
                            if p != t {
                                bad += 1;
                                example.get_or_insert(format!(
                                    "q={q} k={k} {lam}->{beta}: P={p} T={t}"
                                ));
                            }
                        }
                        Ok((bad, example))
                    })
                    .collect();
                for r in rows {
                    let (bad, ex) = r?;
                    mismatches += bad;
                    if first.is_none() {
                        first = ex;
                    }
                }
                checked += (idx.len() * idx.len()) as u64;
            }
        }
        Ok((
            mismatches == 0,
            mismatches as f64,
            0.0,
            None,
            json!({"checked": checked, "mismatches": mismatches, "first_mismatch": first,
                   "max_level": cfg.max_level, "max_part": cfg.max_part, "qs": cfg.qs}),
        ))
    })
}

/// `max(λ_r, β_r) > min(λ_{r−1}, β_{r−1})` forces `P = T = 0`.
pub fn vanishing(cfg: &VerifyConfig) -> Result<CriterionResult> {
    run(2, "vanishing entries", true, || {
        let mut violations = 0u64;
        let mut cases = 0u64;
        for params in cfg.params()? {
            let q = params.q().clone();
            for k in 3..=cfg.max_level {
                let r = particles_on_level(k);
                let idx = Partition::enumerate(r, cfg.max_part);
                for lam in &idx {
                    for beta in &idx {
                        if lam.part(r).max(beta.part(r)) <= lam.part(r - 1).min(beta.part(r - 1)) {
                            continue;
                        }
                        cases += 1;
                        if !p_level(k, lam, beta, &q)?.is_zero()
                            || !t_level_k(k, lam, beta, &q)?.is_zero()
                        {
                            violations += 1;
                        }
                    }
                }
            }
        }
        Ok((
            violations == 0 && cases > 0,
            violations as f64,
            0.0,
            None,
            json!({"cases": cases, "violations": violations}),
        ))
    })
}

/// Branching consistency of `dim` and `dim_3(λ) = 2λ + 1`.
pub fn dims(max_level: usize, max_part: u64) -> Result<CriterionResult> {
    run(3, "dim branching consistency", true, || {
        let mut failures = 0u64;
        let mut checked = 0u64;
        for k in 2..=max_level {
            for lam in Partition::enumerate(particles_on_level(k), max_part) {
                let mut total = num_bigint::BigUint::zero();
                for mu in interlaced_below(&lam, particles_on_level(k - 1)) {
                    total += dim(k, &mu)? * u32::from(kappa(k, &lam, &mu)?);
                }
                checked += 1;
                if total != dim(k + 1, &lam)? {
                    failures += 1;
                }
            }
        }
        for l in 0..=max_part {
            checked += 1;
            if dim(3, &Partition::new(vec![l])?)? != num_bigint::BigUint::from(2 * l + 1) {
                failures += 1;
            }
        }
        Ok((
            failures == 0,
            failures as f64,
            0.0,
            None,
            json!({"checked": checked, "max_level": max_level + 1, "max_part": max_part}),
        ))
    })
}

fn r_power_row(q: &Rational, n: usize, cap: u64) -> Result<Vec<f64>> {
    let d = evolve_level(1, n, q, cap)?;
    Ok(d.probs
        .iter()
        .map(|p| p.to_f64().unwrap_or(f64::NAN))
        .collect())
}

/// Level-1 diagonal kernel against `Rⁿ(0, s)` under both level conventions.
pub fn kernel_level_one(cfg: &VerifyConfig) -> Result<CriterionResult> {
    run(4, "level-1 kernel oracle", true, || {
        let params = ModelParams::from_ratio(1, 2)?;
        let alpha = params.alpha_f64();
        let tol = 1e-8;
        let mut errors = BTreeMap::new();
        for conv in [Convention::KernelThm, Convention::TMatrix] {
            let label = level_label(1, conv)?;
            let mut worst = 0.0f64;
            for n in 0..=6usize {
                // mass beyond 60 is below 1e-15 at n ≤ 6
                let row = r_power_row(params.q(), n, 60)?;
                for s in 0..=12u64 {
                    let p = KernelPoint::new(label.r, label.a, s);
                    let k = kernel_k(&p, &p, n as u32, alpha, &cfg.quad)?;
                    worst = worst.max((k.value - row[s as usize]).abs());
                }
            }
            errors.insert(format!("{conv:?}"), worst);
        }
        let passing: Vec<&String> = errors
            .iter()
            .filter(|(_, &e)| e < tol)
            .map(|(c, _)| c)
            .collect();
        let stat = errors["TMatrix"];
        Ok((
            passing.len() == 1,
            stat,
            tol,
            None,
            json!({"max_abs_error": errors, "passing_convention": passing, "quadrature": cfg.quad}),
        ))
    })
}

/// `n = 0`: diagonal kernel equals the packed indicator.
pub fn kernel_n_zero(cfg: &VerifyConfig) -> Result<CriterionResult> {
    run(5, "n=0 kernel oracle", true, || {
        let mut worst = 0.0f64;
        for k in 1..=5 {
            let np = particles_on_level(k) as u64;
            for s in 0..=np + 4 {
                let p = KernelPoint::at_level(k, s)?;
                let v = kernel_k(&p, &p, 0, 1.0, &cfg.quad)?.value;
                let target = if s < np { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        Ok((worst < 1e-8, worst, 1e-8, None, json!({"levels": 5})))
    })
}

/// The worked example: initial state, noise and expected shifted positions.
pub struct WorkedExample {
    pub state: InterlacedState,
    pub draws: NoiseDraws,
    pub half_shifted: Vec<Vec<u64>>,
    pub full_shifted: Vec<Vec<u64>>,
}

pub fn worked_example() -> WorkedExample {
    let state = InterlacedState::from_parts(&[&[1], &[3], &[3, 2], &[3, 3]], 0)
        .expect("worked example is interlaced");
    let mut draws = NoiseDraws::zeros(4);
    draws.set_left(1, 1, 1).set_right(1, 1, 3);
    draws.set_left(2, 1, 3).set_right(2, 1, 1);
    draws.set_left(3, 1, 1).set_right(3, 1, 0);
    draws.set_left(3, 2, 1).set_right(3, 2, 0);
    draws.set_left(4, 1, 0).set_right(4, 1, 1);
    draws.set_left(4, 2, 2).set_right(4, 2, 2);
    WorkedExample {
        state,
        draws,
        half_shifted: vec![vec![1], vec![1], vec![4, 1], vec![4, 2]],
        full_shifted: vec![vec![3], vec![4], vec![5, 0], vec![6, 3]],
    }
}

pub fn worked_example_check() -> Result<CriterionResult> {
    run(6, "dynamics worked example", true, || {
        let ex = worked_example();
        let (half, full) = step_with_draws(&ex.state, &ex.draws, BottomRule::Reflected)?;
        let shifted = |s: &InterlacedState| -> Vec<Vec<u64>> {
            (1..=s.num_levels()).map(|k| s.simple_level(k)).collect()
        };
        let (h, f) = (shifted(&half), shifted(&full));
        let mismatches = h
            .iter()
            .flatten()
            .zip(ex.half_shifted.iter().flatten())
            .chain(f.iter().flatten().zip(ex.full_shifted.iter().flatten()))
            .filter(|(a, b)| a != b)
            .count();
        Ok((
            mismatches == 0,
            mismatches as f64,
            0.0,
            None,
            json!({"half_step": h, "full_step": f}),
        ))
    })
}

/// One- and two-step level marginals of the dynamics against `P_k` rows.
pub fn dynamics_vs_p(cfg: &VerifyConfig) -> Result<CriterionResult> {
    let m = cfg.trajectories.unwrap_or(1_000_000);
    run(7, "dynamics vs P_k (chi-square)", true, || {
        let params = cfg.first_q()?;
        let q = params.q_f64();
        let mut worst_p = 1.0f64;
        let mut tests = Vec::new();
        let mut all_pass = true;
        for n in 1..=2usize {
            let spec = EnsembleSpec::new(&params, 4, n, m, cfg.seed + n as u64)?;
            let hist = empirical_multilevel_distribution(&spec)?;
            for k in 1..=4 {
                let mut counts: BTreeMap<Partition, u64> = BTreeMap::new();
                for (s, c) in &hist {
                    *counts.entry(s.level(k).clone()).or_insert(0) += c;
                }
                let pm = TransitionMatrix::build(k, LevelKernel::Particle, &q, 16)?;
                let d = evolve_with(&pm, n);
                let exact: BTreeMap<Partition, f64> = d.index.into_iter().zip(d.probs).collect();
                let rep = chi_square_exact(&counts, &exact, DEFAULT_ALPHA);
                all_pass &= rep.verdict == Verdict::Pass;
                if rep.p_value.is_finite() {
                    worst_p = worst_p.min(rep.p_value);
                }
                tests.push(json!({"n": n, "level": k, "report": rep}));
            }
        }
        Ok((
            all_pass,
            worst_p,
            DEFAULT_ALPHA,
            Some(cfg.seed),
            json!({"trajectories": m, "q": params.q().to_string(), "tests": tests}),
        ))
    })
}

/// Level-3 one- and two-point correlations at `n = 2` against Monte Carlo.
pub fn correlations(cfg: &VerifyConfig) -> Result<CriterionResult> {
    let m = cfg.trajectories.unwrap_or(200_000);
    run(8, "determinantal correlations vs MC", true, || {
        let params = cfg.first_q()?;
        let alpha = params.alpha_f64();
        let (k, n) = (3usize, 2u32);
        let mut sets: Vec<Vec<u64>> = (0..6).map(|s| vec![s]).collect();
        for a in 0..5u64 {
            for b in a + 1..5 {
                sets.push(vec![a, b]);
            }
        }
        let spec = EnsembleSpec::new(&params, k, n as usize, m, cfg.seed)?;
        let emp = empirical_correlations(&spec, k, &sets)?;
        let mut worst = 0.0f64;
        let mut rows = Vec::new();
        for (set, o) in sets.iter().zip(&emp) {
            let pts: Vec<KernelPoint> = set
                .iter()
                .map(|&s| KernelPoint::at_level(k, s))
                .collect::<Result<_>>()?;
            let exact = correlation(&pts, n, alpha, &cfg.quad)?;
            let z = o.z_score(exact);
            worst = worst.max(z);
            rows.push(
                json!({"sites": set, "det_k": exact, "mc": o.value, "stderr": o.stderr, "z": z}),
            );
        }
        Ok((
            worst <= 4.0,
            worst,
            4.0,
            Some(cfg.seed),
            json!({"trajectories": m, "rows": rows}),
        ))
    })
}

/// The forbidden transition `((0),(1),(1,0)) → ((0),(0),(0,0))`.
pub fn counterexample(cfg: &VerifyConfig) -> Result<CriterionResult> {
    let m = cfg.trajectories.unwrap_or(1_000_000);
    run(9, "counterexample", true, || {
        let params = cfg.first_q()?;
        let from = InterlacedState::from_parts(&[&[0], &[1], &[1, 0]], 0)?;
        let to = InterlacedState::from_parts(&[&[0], &[0], &[0, 0]], 2)?;
        let witness = blocking_witness(&from, &to);
        let reachable = reachable_with_bounded_draws(&from, &to, 2, BottomRule::Reflected)?;
        let spec = EnsembleSpec::new(&params, 3, 1, m, cfg.seed)?;
        let target = to.levels().to_vec();
        let hits = spec.event_counts(
            &from,
            &[|s: &InterlacedState| s.levels() == target.as_slice()],
        )?[0];
        let t = t_multilevel(&from, &to, params.q(), MultilevelOptions::default())?;
        let positive = t.value > Rational::zero();
        Ok((
            witness.is_some() && !reachable && hits == 0 && positive,
            t.value.to_f64().unwrap_or(f64::NAN),
            0.0,
            Some(cfg.seed),
            json!({"witness": witness, "reachable_with_draws_le_2": reachable,
                   "mc_hits": hits, "trajectories": m, "t_multilevel": t.value.to_string()}),
        ))
    })
}

/// Multi-level law from the packed state against `T^{φⁿ}(𝟎, ·)`.
pub fn conjecture(cfg: &VerifyConfig) -> Result<CriterionResult> {
    let m = cfg.trajectories.unwrap_or(500_000);
    run(10, "multi-level conjecture (report)", false, || {
        let params = ModelParams::from_ratio(3, 10)?;
        let q = params.q_f64();
        let mut rows = Vec::new();
        let mut pass = true;
        let mut worst_ratio = 0.0f64;
        for levels in 1..=3usize {
            for n in 1..=3usize {
                let (exact, leakage) = multilevel_from_packed(levels, n, &q, 20)?;
                let spec =
                    EnsembleSpec::new(&params, levels, n, m, cfg.seed + (10 * levels + n) as u64)?;
                let hist = empirical_multilevel_distribution(&spec)?;
                let tv = total_variation(&hist, &exact, leakage);
                pass &= tv.verdict == Verdict::Pass;
                worst_ratio = worst_ratio.max(tv.distance / tv.bound);
                rows.push(json!({"levels": levels, "n": n, "tv": tv}));
            }
        }
        Ok((
            pass,
            worst_ratio,
            1.0,
            Some(cfg.seed),
            json!({"trajectories": m, "q": "3/10", "rows": rows}),
        ))
    })
}

/// `|K_N − L(θ)|` decreasing in `N`, plus the frozen regime.
pub fn jacobi_trend_check() -> Result<CriterionResult> {
    run(11, "discrete Jacobi convergence trend", true, || {
        let sizes = [50u32, 100, 200, 400];
        let m = MacroParams::new(1.0, 0.5, 1.0)?;
        let pairs = [
            (HalfParam::MinusHalf, 0, 0),
            (HalfParam::MinusHalf, 1, 1),
            (HalfParam::MinusHalf, 0, 2),
            (HalfParam::PlusHalf, 1, 0),
            (HalfParam::PlusHalf, 2, 2),
        ];
        let mut monotone = true;
        let mut tables = Vec::new();
        let mut last_diff = 0.0f64;
        for (a, s1, s2) in pairs {
            let rows = jacobi_trend(
                &m,
                RelativePoint { dr: 0, a, s: s1 },
                RelativePoint { dr: 0, a, s: s2 },
                &sizes,
            )?;
            monotone &= rows.windows(2).all(|w| w[1].abs_diff < w[0].abs_diff);
            last_diff = last_diff.max(rows.last().map_or(0.0, |r| r.abs_diff));
            tables.push(json!({"a": a, "s1": s1, "s2": s2, "rows": rows}));
        }
        let frozen = MacroParams::new(1.0, 0.9, 1.0)?;
        let mut frozen_err = 0.0f64;
        let mut frozen_rows = Vec::new();
        for a in [HalfParam::MinusHalf, HalfParam::PlusHalf] {
            for s in [0u64, 1, 3] {
                let p = RelativePoint { dr: 0, a, s };
                let row = jacobi_trend(&frozen, p, p, &[400])?.remove(0);
                frozen_err = frozen_err.max((row.scaled_k - 1.0).abs());
                frozen_rows.push(row);
            }
        }
        Ok((
            monotone && frozen_err < 1e-2,
            last_diff,
            1e-2,
            None,
            json!({"liquid": tables, "frozen_max_error": frozen_err, "frozen": frozen_rows,
                   "monotone": monotone}),
        ))
    })
}

/// Self-consistency of `𝒦` and `A(z)`, plus the finite-`N` trend report.
pub fn pearcey_check() -> Result<CriterionResult> {
    run(12, "Pearcey self-consistency", true, || {
        let quad = PearceyQuadrature::default();
        let base = PearceyParams::new(0.8, 0.4, 0.6, -0.2);
        let v = symmetric_pearcey(&base, &quad)?;
        let flipped = symmetric_pearcey(&PearceyParams::new(0.8, 0.4, -0.6, -0.2), &quad)?;
        let even_err = (v - flipped).abs();
        let no_gauss = PearceyParams::new(0.8, -0.2, 0.6, 0.4);
        let gauss = pearcey_gaussian_term(&no_gauss);
        let doubled = symmetric_pearcey(&base, &quad.doubled())?;
        let self_conv = (v - doubled).abs();
        let coeff = a_quadratic_coefficient(1.0);
        let numeric = a_quadratic_numeric(1.0, 0.1, 64)?;
        let coeff_err = (numeric - coeff).abs();
        let c1 = a_expansion_check(1.0, 1e-3)?;
        let c2 = a_expansion_check(1.0, 5e-4)?;
        let bounded = c1.is_finite() && c2.is_finite() && c2 <= 2.0 * c1;
        let trend = [HalfParam::MinusHalf, HalfParam::PlusHalf]
            .into_iter()
            .map(|a| {
                pearcey_trend(
                    1.0,
                    a,
                    &PearceyParams::new(0.0, 0.0, 0.0, 0.0),
                    &[100, 200, 400, 800],
                    &quad,
                )
                .map(|rows| json!({"a": a, "rows": rows}))
            })
            .collect::<Result<Vec<_>>>()?;
        let pass =
            even_err < 1e-12 && gauss == 0.0 && self_conv < 1e-8 && coeff_err < 1e-6 && bounded;
        Ok((
            pass,
            self_conv.max(coeff_err).max(even_err),
            1e-8,
            None,
            json!({"evenness_error": even_err, "gaussian_term_eta2_ge_eta1": gauss,
                   "panel_doubling_change": self_conv, "quadratic_coefficient": coeff,
                   "quadratic_numeric": numeric, "expansion_ratio": [c1, c2],
                   "trend": trend}),
        ))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Identity,
    Vanishing,
    Dims,
    KernelLevel1,
    KernelN0,
    WorkedExample,
    DynamicsP,
    Correlations,
    Counterexample,
    Conjecture,
    JacobiTrend,
    Pearcey,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::Identity,
        Suite::Vanishing,
        Suite::Dims,
        Suite::KernelLevel1,
        Suite::KernelN0,
        Suite::WorkedExample,
        Suite::DynamicsP,
        Suite::Correlations,
        Suite::Counterexample,
        Suite::Conjecture,
        Suite::JacobiTrend,
        Suite::Pearcey,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identity => "identity",
            Suite::Vanishing => "vanishing",
            Suite::Dims => "dims",
            Suite::KernelLevel1 => "kernel-level1",
            Suite::KernelN0 => "kernel-n0",
            Suite::WorkedExample => "worked-example",
            Suite::DynamicsP => "dynamics-p",
            Suite::Correlations => "correlations",
            Suite::Counterexample => "counterexample",
            Suite::Conjecture => "conjecture",
            Suite::JacobiTrend => "jacobi-trend",
            Suite::Pearcey => "pearcey",
        }
    }

    pub fn from_name(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }

    pub fn run(self, cfg: &VerifyConfig) -> Result<CriterionResult> {
        match self {
            Suite::Identity => identity(cfg),
            Suite::Vanishing => vanishing(cfg),
            Suite::Dims => dims(cfg.max_level.max(6), u64::max(cfg.max_part, 6)),
            Suite::KernelLevel1 => kernel_level_one(cfg),
            Suite::KernelN0 => kernel_n_zero(cfg),
            Suite::WorkedExample => worked_example_check(),
            Suite::DynamicsP => dynamics_vs_p(cfg),
            Suite::Correlations => correlations(cfg),
            Suite::Counterexample => counterexample(cfg),
            Suite::Conjecture => conjecture(cfg),
            Suite::JacobiTrend => jacobi_trend_check(),
            Suite::Pearcey => pearcey_check(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub results: Vec<CriterionResult>,
    pub all_blocking_passed: bool,
}

pub fn run_suites(suites: &[Suite], cfg: &VerifyConfig) -> Result<VerifyReport> {
    let results = suites
        .iter()
        .map(|s| s.run(cfg))
        .collect::<Result<Vec<_>>>()?;
    let all_blocking_passed = results.iter().all(|r| r.passed || !r.blocking);
    Ok(VerifyReport {
        config: cfg.clone(),
        results,
        all_blocking_passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_suites_pass() {
        let cfg = VerifyConfig {
            max_level: 3,
            max_part: 2,
            ..Default::default()
        };
        for s in [Suite::Identity, Suite::Vanishing, Suite::WorkedExample] {
            let r = s.run(&cfg).unwrap();
            assert!(r.passed, "{}", r.summary_line());
        }
        assert!(dims(4, 3).unwrap().passed);
        assert_eq!(Suite::from_name("kernel-n0"), Some(Suite::KernelN0));
    }
}
