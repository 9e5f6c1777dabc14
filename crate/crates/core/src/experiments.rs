//! Monte Carlo experiment drivers: annealed persistence campaigns, exponent
//! fits, sign-change rate and sign-persistence measurements on Brownian
//! paths, localization diagnostics, and the closed-form-versus-simulation
//! verification suites.
//!
//! Trials are independent given their derived seeds, so campaigns may run on
//! any number of workers with bitwise-identical results.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::env::{potential, EnvDistribution, EnvError};
use crate::extrema::{self, ExtremaError};
use crate::plpath::{interpolate_potential, sample_two_sided_bm, BmGridSpec, PathError};
use crate::seeds::{child_seed, tags};
use crate::stats::{self, wilson_interval, Z_95};
use crate::walk::{self, FunctionalSpec, WalkError};

/// `(3 − √5)/2`, the persistence exponent.
pub fn persistence_exponent() -> f64 {
    (3.0 - 5f64.sqrt()) / 2.0
}

/// `1/2 + 7√5/30`, the limit of the normalised sign-persistence probability.
pub fn sign_persistence_limit() -> f64 {
    0.5 + 7.0 * 5f64.sqrt() / 30.0
}

#[derive(Debug, Error, PartialEq)]
pub enum ExperimentError {
    #[error("horizons must be a strictly increasing nonempty list")]
    BadHorizons,
    #[error("campaign needs n_envs >= 1 and walks_per_env >= 1")]
    BadTrialCounts,
    #[error("threshold must satisfy u <= 0, got {0}")]
    BadThreshold(f64),
    #[error("exponent fit needs at least 3 estimates strictly inside (0, 1), have {0}")]
    DegenerateFit(usize),
    #[error("rate function is +infinity for negative arguments, got {0}")]
    NegativeRateArgument(f64),
    #[error("t values must be positive (the interval [1, e^t] is empty otherwise)")]
    BadTValue(f64),
    #[error("x values must be at least 1, got {0}")]
    BadXValue(f64),
    #[error("localization diagnostic needs N >= 1000, got {0}")]
    HorizonTooShort(u64),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Extrema(#[from] ExtremaError),
}

/// Point estimate with a 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithCi {
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_trials: u64,
}

impl EstimateWithCi {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(successes, trials, Z_95);
        Self {
            point: successes as f64 / trials as f64,
            ci_low,
            ci_high,
            n_trials: trials,
        }
    }

    pub fn overlaps(&self, other: &EstimateWithCi) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

/// How trials relate across horizons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// One walk per trial serves every horizon through its first violation
    /// time; per-horizon estimates are pathwise consistent.
    Shared,
    /// A fresh environment and walk per (trial, horizon) pair.
    Independent,
}

/// An annealed persistence campaign: a fresh environment is sampled for each
/// trial, so frequencies estimate the environment-averaged probability.
#[derive(Debug, Clone)]
pub struct PersistenceCampaign {
    pub distribution: EnvDistribution,
    pub horizons: Vec<u64>,
    pub functional: FunctionalSpec,
    pub threshold: f64,
    pub n_envs: u64,
    pub walks_per_env: u64,
    pub master_seed: u64,
    pub mode: SamplingMode,
}

impl PersistenceCampaign {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.horizons.is_empty() || self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ExperimentError::BadHorizons);
        }
        if self.n_envs < 1 || self.walks_per_env < 1 {
            return Err(ExperimentError::BadTrialCounts);
        }
        if !(self.threshold <= 0.0) {
            return Err(ExperimentError::BadThreshold(self.threshold));
        }
        self.functional.validate()?;
        Ok(())
    }

    pub fn n_trials(&self) -> u64 {
        self.n_envs * self.walks_per_env
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HorizonEstimate {
    pub horizon: u64,
    pub estimate: EstimateWithCi,
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignResult {
    pub per_horizon: Vec<HorizonEstimate>,
    /// Per-trial first violation times in shared mode (`None` = survived to
    /// the largest horizon).
    pub first_violations: Option<Vec<Option<u64>>>,
}

/// Runs a persistence campaign. Per-trial seeds derive from
/// `(master_seed, trial index)`, so any worker count gives the same result.
pub fn run_persistence(campaign: &PersistenceCampaign) -> Result<CampaignResult, ExperimentError> {
    campaign.validate()?;
    let n_trials = campaign.n_trials();
    let n_max = *campaign.horizons.last().expect("nonempty");
    match campaign.mode {
        SamplingMode::Shared => {
            let violations: Result<Vec<Option<u64>>, WalkError> = (0..n_trials)
                .into_par_iter()
                .map(|t| {
                    let env_ix = t / campaign.walks_per_env;
                    let env = campaign
                        .distribution
                        .lazy_environment(child_seed(campaign.master_seed, tags::ENV, env_ix));
                    walk::first_violation_time(
                        &env,
                        &campaign.functional,
                        campaign.threshold,
                        n_max,
                        child_seed(campaign.master_seed, tags::WALK, t),
                    )
                })
                .collect();
            let violations = violations?;
            let per_horizon = campaign
                .horizons
                .iter()
                .map(|&h| {
                    let survived = violations
                        .iter()
                        .filter(|v| v.map_or(true, |n| n > h))
                        .count() as u64;
                    HorizonEstimate {
                        horizon: h,
                        estimate: EstimateWithCi::from_counts(survived, n_trials),
                    }
                })
                .collect();
            Ok(CampaignResult {
                per_horizon,
                first_violations: Some(violations),
            })
        }
        SamplingMode::Independent => {
            let n_h = campaign.horizons.len() as u64;
            let outcomes: Result<Vec<bool>, WalkError> = (0..n_trials * n_h)
                .into_par_iter()
                .map(|k| {
                    let horizon = campaign.horizons[(k % n_h) as usize];
                    let t = k / n_h;
                    let env_ix = t / campaign.walks_per_env;
                    let env = campaign.distribution.lazy_environment(child_seed(
                        campaign.master_seed,
                        tags::ENV,
                        env_ix * n_h + (k % n_h),
                    ));
                    walk::first_violation_time(
                        &env,
                        &campaign.functional,
                        campaign.threshold,
                        horizon,
                        child_seed(campaign.master_seed, tags::WALK, k),
                    )
                    .map(|v| v.is_none())
                })
                .collect();
            let outcomes = outcomes?;
            let per_horizon = campaign
                .horizons
                .iter()
                .enumerate()
                .map(|(i, &h)| {
                    let survived = outcomes
                        .iter()
                        .skip(i)
                        .step_by(campaign.horizons.len())
                        .filter(|&&s| s)
                        .count() as u64;
                    HorizonEstimate {
                        horizon: h,
                        estimate: EstimateWithCi::from_counts(survived, n_trials),
                    }
                })
                .collect();
            Ok(CampaignResult {
                per_horizon,
                first_violations: None,
            })
        }
    }
}

/// Least-squares fit of `log p̂` against `log log N`.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub r_squared: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    /// The fitted `(log log N, log p̂)` pairs.
    pub points: Vec<(f64, f64)>,
    /// Estimates dropped because `p̂` hit 0 or 1.
    pub excluded: usize,
}

pub fn fit_exponent(estimates: &[HorizonEstimate]) -> Result<ExponentFit, ExperimentError> {
    let mut points = Vec::new();
    let mut excluded = 0usize;
    for h in estimates {
        let p = h.estimate.point;
        if p > 0.0 && p < 1.0 {
            points.push(((h.horizon as f64).ln().ln(), p.ln()));
        } else {
            excluded += 1;
        }
    }
    if points.len() < 3 {
        return Err(ExperimentError::DegenerateFit(points.len()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let fit = stats::ols_fit(&xs, &ys);
    let (ci95_low, ci95_high) = fit.slope_ci95();
    Ok(ExponentFit {
        slope: fit.slope,
        intercept: fit.intercept,
        stderr: fit.stderr_slope,
        r_squared: fit.r_squared,
        ci95_low,
        ci95_high,
        points,
        excluded,
    })
}

/// The large-deviation rate of the normalised sign-change count:
/// `I(x) = x log(2x(x + √(x² + 5/4))) + 3/2 − (x + √(x² + 5/4))` for
/// `x > 0`, with `I(0) = (3 − √5)/2` by the continuity convention.
pub fn rate_function(x: f64) -> Result<f64, ExperimentError> {
    if !(x >= 0.0) {
        return Err(ExperimentError::NegativeRateArgument(x));
    }
    if x == 0.0 {
        return Ok(persistence_exponent());
    }
    let s = (x * x + 1.25).sqrt();
    Ok(x * (2.0 * x * (x + s)).ln() + 1.5 - (x + s))
}

fn rate_function_derivative(x: f64) -> f64 {
    let s = (x * x + 1.25).sqrt();
    let u = x + s;
    let du = 1.0 + x / s;
    (2.0 * x * u).ln() + 1.0 + x * du / u - du
}

/// The unique zero of the rate function (`I(x*) = 0`, the almost-sure
/// sign-change rate), located by bisection on the derivative of the closed
/// form.
pub fn rate_function_zero() -> f64 {
    let mut lo = 1e-9;
    let mut hi = 5.0;
    debug_assert!(rate_function_derivative(lo) < 0.0 && rate_function_derivative(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rate_function_derivative(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One row of the sign-change rate experiment.
#[derive(Debug, Clone, Serialize)]
pub struct RateCheckRow {
    pub t: f64,
    /// Mean of `k(e^t)/t` over the uncensored samples.
    pub mean_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_effective: u64,
    pub n_censored: u64,
}

/// Estimates the normalised count of valley-bottom sign changes in
/// `[1, e^t]` per `t` in `t_values`. Samples whose window cannot certify up
/// to `e^t` are censored and counted.
pub fn sign_change_rate_check(
    spec: &BmGridSpec,
    t_values: &[f64],
    n_samples: u64,
    seed: u64,
) -> Result<Vec<RateCheckRow>, ExperimentError> {
    spec.validate()?;
    for &t in t_values {
        if !(t > 0.0 && t.is_finite()) {
            return Err(ExperimentError::BadTValue(t));
        }
    }
    let x_top = t_values.iter().fold(1.0f64, |m, &t| m.max(t.exp()));
    let per_sample: Vec<Vec<Option<f64>>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let path = match sample_two_sided_bm(spec, child_seed(seed, tags::BM_SAMPLE, i)) {
                Ok(p) => p,
                Err(_) => return vec![None; t_values.len()],
            };
            match extrema::sweep_sign_changes(&path, 1.0, x_top, 0.0) {
                Ok(rec) => t_values
                    .iter()
                    .map(|&t| {
                        let x = t.exp();
                        if rec.covers(x) {
                            Some(rec.count_up_to(x) as f64 / t)
                        } else {
                            None
                        }
                    })
                    .collect(),
                Err(_) => vec![None; t_values.len()],
            }
        })
        .collect();
    let mut rows = Vec::with_capacity(t_values.len());
    for (j, &t) in t_values.iter().enumerate() {
        let rates: Vec<f64> = per_sample.iter().filter_map(|s| s[j]).collect();
        let n_eff = rates.len() as u64;
        let n_censored = n_samples - n_eff;
        if rates.len() < 2 {
            rows.push(RateCheckRow {
                t,
                mean_rate: f64::NAN,
                ci_low: f64::NAN,
                ci_high: f64::NAN,
                n_effective: n_eff,
                n_censored,
            });
            continue;
        }
        let (mean, var) = stats::mean_var(&rates);
        let half = Z_95 * (var / rates.len() as f64).sqrt();
        rows.push(RateCheckRow {
            t,
            mean_rate: mean,
            ci_low: mean - half,
            ci_high: mean + half,
            n_effective: n_eff,
            n_censored,
        });
    }
    Ok(rows)
}

/// One row of the sign-persistence experiment.
#[derive(Debug, Clone, Serialize)]
pub struct SignPersistenceRow {
    pub x: f64,
    /// Frequency of paths whose valley bottom keeps one sign on `[1, x]`.
    pub q_hat: EstimateWithCi,
    /// `q̂(x) · x^{(3−√5)/2}`; approaches `1/2 + 7√5/30` for large `x`.
    pub normalized: f64,
    pub n_censored: u64,
}

/// Estimates `q(x) = P(b keeps one sign throughout [1, x])` for each `x`.
pub fn sign_persistence_constant(
    spec: &BmGridSpec,
    x_values: &[f64],
    n_samples: u64,
    seed: u64,
) -> Result<Vec<SignPersistenceRow>, ExperimentError> {
    spec.validate()?;
    for &x in x_values {
        if !(x >= 1.0 && x.is_finite()) {
            return Err(ExperimentError::BadXValue(x));
        }
    }
    let x_top = x_values.iter().fold(1.0f64, |m, &x| m.max(x));
    let per_sample: Vec<Vec<Option<bool>>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let path = match sample_two_sided_bm(spec, child_seed(seed, tags::BM_SAMPLE, i)) {
                Ok(p) => p,
                Err(_) => return vec![None; x_values.len()],
            };
            match extrema::sweep_sign_changes(&path, 1.0, x_top, 0.0) {
                Ok(rec) => x_values
                    .iter()
                    .map(|&x| {
                        if rec.covers(x) {
                            Some(rec.count_up_to(x) == 0)
                        } else {
                            None
                        }
                    })
                    .collect(),
                Err(_) => vec![None; x_values.len()],
            }
        })
        .collect();
    let exponent = persistence_exponent();
    let mut rows = Vec::with_capacity(x_values.len());
    for (j, &x) in x_values.iter().enumerate() {
        let outcomes: Vec<bool> = per_sample.iter().filter_map(|s| s[j]).collect();
        let n_eff = outcomes.len() as u64;
        let survived = outcomes.iter().filter(|&&s| s).count() as u64;
        let q_hat = if n_eff > 0 {
            EstimateWithCi::from_counts(survived, n_eff)
        } else {
            EstimateWithCi {
                point: f64::NAN,
                ci_low: f64::NAN,
                ci_high: f64::NAN,
                n_trials: 0,
            }
        };
        rows.push(SignPersistenceRow {
            x,
            normalized: q_hat.point * x.powf(exponent),
            q_hat,
            n_censored: n_samples - n_eff,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalizationRow {
    pub trial: u64,
    pub final_position: i64,
    /// Valley bottom of the interpolated potential at scale `log N`;
    /// `None` when the window refused to certify it.
    pub bottom: Option<f64>,
    /// `(S_N − b) / log² N`.
    pub scaled_deviation: Option<f64>,
    /// `σ² S_N / log² N`.
    pub scaled_position: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalizationReport {
    pub n_steps: u64,
    pub rows: Vec<LocalizationRow>,
    pub median_abs_scaled_position: f64,
    pub median_abs_scaled_deviation: f64,
    pub n_censored: u64,
}

/// Simulates walks to time `N` and compares their endpoint with the valley
/// bottom of the potential at scale `log N`. Report only; no hard threshold.
pub fn localization_diagnostic(
    dist: &EnvDistribution,
    n_steps: u64,
    n_trials: u64,
    seed: u64,
) -> Result<LocalizationReport, ExperimentError> {
    if n_steps < 1_000 {
        return Err(ExperimentError::HorizonTooShort(n_steps));
    }
    let log_n = (n_steps as f64).ln();
    let scale = log_n * log_n;
    let sigma = dist.sigma();
    // window wide enough to certify scale-log N valleys of the potential
    let half_width = (((log_n / sigma) * (log_n / sigma) * 40.0) as i64).clamp(256, 4_000_000);
    let rows: Result<Vec<LocalizationRow>, ExperimentError> = (0..n_trials)
        .into_par_iter()
        .map(|t| {
            let env = dist.lazy_environment(child_seed(seed, tags::ENV, t));
            let final_position =
                walk::final_position(&env, n_steps, child_seed(seed, tags::WALK, t))?;
            let wide = env.extended_window(-half_width, half_width)?;
            let path = interpolate_potential(&potential(&wide));
            let bottom = extrema::valley_bottom(&path, log_n).ok().map(|(loc, _)| loc);
            Ok(LocalizationRow {
                trial: t,
                final_position,
                bottom,
                scaled_deviation: bottom.map(|b| (final_position as f64 - b) / scale),
                scaled_position: sigma * sigma * final_position as f64 / scale,
            })
        })
        .collect();
    let rows = rows?;
    let median = |mut v: Vec<f64>| -> f64 {
        if v.is_empty() {
            return f64::NAN;
        }
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let n_censored = rows.iter().filter(|r| r.bottom.is_none()).count() as u64;
    Ok(LocalizationReport {
        n_steps,
        median_abs_scaled_position: median(rows.iter().map(|r| r.scaled_position.abs()).collect()),
        median_abs_scaled_deviation: median(
            rows.iter()
                .filter_map(|r| r.scaled_deviation.map(f64::abs))
                .collect(),
        ),
        n_censored,
        rows,
    })
}

/// Closed-form-versus-simulation verification suites. The CLI exposes them
/// through `verify-formulas`; they also carry the quantitative acceptance
/// checks.
pub mod verify {
    use super::*;
    use crate::env::Environment;
    use crate::quenched;
    use crate::stats::binomial_se;
    use rand::Rng;

    /// One cross-validation case.
    #[derive(Debug, Clone, Serialize)]
    pub struct VerifyRow {
        pub case_id: String,
        pub closed_form: f64,
        pub mc_estimate: f64,
        pub se: f64,
        pub pass: bool,
    }

    #[derive(Debug, Clone, Serialize)]
    pub struct VerifyReport {
        pub name: &'static str,
        pub rows: Vec<VerifyRow>,
    }

    impl VerifyReport {
        pub fn n_pass(&self) -> usize {
            self.rows.iter().filter(|r| r.pass).count()
        }

        pub fn all_pass(&self) -> bool {
            self.rows.iter().all(|r| r.pass)
        }
    }

    pub(crate) struct Case {
        pub env: Environment,
        pub p: i64,
        pub q: i64,
        pub r: i64,
    }

    /// Random two-point environment on `[-10, 10]` with a random triple
    /// `p < q < r`, kept narrow enough that exit times stay affordable.
    pub(crate) fn random_case(master_seed: u64, index: u64) -> Case {
        let mut rng = crate::seeds::rng_from_seed(child_seed(master_seed, tags::CASE, index));
        let delta: f64 = rng.random_range(0.05..0.20);
        let p_omega = if rng.random::<bool>() {
            0.5 + delta
        } else {
            0.5 - delta
        };
        let dist = EnvDistribution::two_point(p_omega).expect("valid two-point parameter");
        let env = dist
            .sample_environment(10, child_seed(master_seed, tags::ENV, index))
            .expect("half-width 10 valid");
        let q: i64 = rng.random_range(-4..=4);
        let d_down: i64 = rng.random_range(1..=5);
        let d_up: i64 = rng.random_range(1..=5);
        let p = (q - d_down).max(-10);
        let r = (q + d_up).min(10);
        Case { env, p, q, r }
    }

    /// Exit probabilities: closed form against exit-trial frequencies.
    pub fn verify_exit_probabilities(
        n_cases: u64,
        trials_per_case: u64,
        master_seed: u64,
    ) -> VerifyReport {
        let rows = (0..n_cases)
            .into_par_iter()
            .map(|i| {
                let case = random_case(master_seed, i);
                let pot = potential(&case.env);
                let closed = quenched::exit_prob(&pot, case.p, case.q, case.r)
                    .expect("cases are in-window and ordered");
                let mut high = 0u64;
                for t in 0..trials_per_case {
                    let rec = walk::exit_trial(
                        &case.env,
                        case.q,
                        case.p,
                        case.r,
                        child_seed(master_seed, tags::TRIAL, i * trials_per_case + t),
                    )
                    .expect("exit trials terminate");
                    if rec.exited_high {
                        high += 1;
                    }
                }
                let freq = high as f64 / trials_per_case as f64;
                let se = binomial_se(closed, trials_per_case);
                VerifyRow {
                    case_id: format!("exit_prob/{i:03}"),
                    closed_form: closed,
                    mc_estimate: freq,
                    se,
                    pass: (freq - closed).abs() <= 4.0 * se,
                }
            })
            .collect();
        VerifyReport {
            name: "exit_prob",
            rows,
        }
    }

    /// Expected local times: the closed form against the mean of simulated
    /// `L(z, exit)`.
    pub fn verify_expected_local_times(
        n_cases: u64,
        trials_per_case: u64,
        master_seed: u64,
    ) -> VerifyReport {
        let rows = (0..n_cases)
            .into_par_iter()
            .map(|i| {
                let case = random_case(master_seed, i);
                let pot = potential(&case.env);
                let mut rng =
                    crate::seeds::rng_from_seed(child_seed(master_seed, tags::CASE, i | (1 << 63)));
                let z: i64 = rng.random_range(case.p + 1..case.r);
                let closed = quenched::expected_local_time(&pot, &case.env, case.q, z, case.p, case.r)
                    .expect("valid case");
                let mut sum = 0.0;
                let mut sumsq = 0.0;
                for t in 0..trials_per_case {
                    let rec = walk::exit_trial(
                        &case.env,
                        case.q,
                        case.p,
                        case.r,
                        child_seed(master_seed, tags::TRIAL, i * trials_per_case + t),
                    )
                    .expect("exit trials terminate");
                    let l = rec.local_times.get(&z).copied().unwrap_or(0) as f64;
                    sum += l;
                    sumsq += l * l;
                }
                let n = trials_per_case as f64;
                let mean = sum / n;
                let var = (sumsq / n - mean * mean).max(0.0) * n / (n - 1.0);
                let se = (var / n).sqrt();
                VerifyRow {
                    case_id: format!("local_time/{i:03}"),
                    closed_form: closed,
                    mc_estimate: mean,
                    se,
                    pass: (mean - closed).abs() <= 4.0 * se.max(1e-9),
                }
            })
            .collect();
        VerifyReport {
            name: "expected_local_time",
            rows,
        }
    }

    /// Geometric law of the local time at the start site: mean match plus a
    /// chi-square goodness-of-fit test at `p > 0.001`.
    pub fn verify_geometric_law(
        n_cases: u64,
        trials_per_case: u64,
        master_seed: u64,
    ) -> VerifyReport {
        let rows: Vec<Vec<VerifyRow>> = (0..n_cases)
            .into_par_iter()
            .map(|i| {
                let case = random_case(master_seed, i);
                let pot = potential(&case.env);
                let mut rng =
                    crate::seeds::rng_from_seed(child_seed(master_seed, tags::CASE, i | (1 << 63)));
                let z: i64 = rng.random_range(case.p + 1..case.r);
                let param = quenched::local_time_geometric_param(&pot, &case.env, z, case.p, case.r)
                    .expect("valid case");
                let mut counts: Vec<u64> = Vec::new();
                let mut sum = 0.0;
                let mut sumsq = 0.0;
                for t in 0..trials_per_case {
                    let rec = walk::exit_trial(
                        &case.env,
                        z,
                        case.p,
                        case.r,
                        child_seed(master_seed, tags::TRIAL, i * trials_per_case + t),
                    )
                    .expect("exit trials terminate");
                    let l = rec.local_times.get(&z).copied().unwrap_or(0);
                    let l = l.max(1); // the walk starts at z, so L >= 1
                    if counts.len() < l as usize {
                        counts.resize(l as usize, 0);
                    }
                    counts[(l - 1) as usize] += 1;
                    sum += l as f64;
                    sumsq += (l * l) as f64;
                }
                let n = trials_per_case as f64;
                let mean = sum / n;
                let var = (sumsq / n - mean * mean).max(0.0) * n / (n - 1.0);
                let se = (var / n).sqrt();
                let mean_row = VerifyRow {
                    case_id: format!("geom_mean/{i:03}"),
                    closed_form: 1.0 / param,
                    mc_estimate: mean,
                    se,
                    pass: (mean - 1.0 / param).abs() <= 4.0 * se.max(1e-9),
                };
                // expected geometric bin masses on {1, 2, ...} with tail mass
                // folded into the last bin
                let observed: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
                let mut expected: Vec<f64> = (0..counts.len())
                    .map(|k| n * param * (1.0 - param).powi(k as i32))
                    .collect();
                if !expected.is_empty() {
                    let below: f64 = expected[..expected.len() - 1].iter().sum();
                    let last = expected.len() - 1;
                    expected[last] = n - below;
                }
                let gof = stats::chi_square_gof(&observed, &expected, 5.0);
                let chi_row = VerifyRow {
                    case_id: format!("geom_chi2/{i:03}"),
                    closed_form: 0.001,
                    mc_estimate: gof.p_value,
                    se: 0.0,
                    pass: gof.p_value > 0.001,
                };
                vec![mean_row, chi_row]
            })
            .collect();
        VerifyReport {
            name: "geometric_law",
            rows: rows.into_iter().flatten().collect(),
        }
    }

    /// Exit-time bound: simulated mean exit times must sit below the double
    /// sum, which must sit below the coarse closed-form bound.
    pub fn verify_exit_time_bounds(
        n_cases: u64,
        trials_per_case: u64,
        master_seed: u64,
    ) -> VerifyReport {
        let rows = (0..n_cases)
            .into_par_iter()
            .map(|i| {
                let case = random_case(master_seed, i);
                let pot = potential(&case.env);
                let bound = quenched::exit_time_bound(&pot, &case.env, case.p, case.q, case.r)
                    .expect("valid case");
                let coarse =
                    quenched::exit_time_bound_coarse(&pot, &case.env, case.p, case.q, case.r)
                        .expect("valid case");
                let mut sum = 0.0;
                let mut sumsq = 0.0;
                for t in 0..trials_per_case {
                    let rec = walk::exit_trial(
                        &case.env,
                        case.q,
                        case.p,
                        case.r,
                        child_seed(master_seed, tags::TRIAL, i * trials_per_case + t),
                    )
                    .expect("exit trials terminate");
                    sum += rec.exit_time as f64;
                    sumsq += (rec.exit_time * rec.exit_time) as f64;
                }
                let n = trials_per_case as f64;
                let mean = sum / n;
                let var = (sumsq / n - mean * mean).max(0.0) * n / (n - 1.0);
                VerifyRow {
                    case_id: format!("exit_time_bound/{i:03}"),
                    closed_form: bound,
                    mc_estimate: mean,
                    se: (var / n).sqrt(),
                    pass: mean <= bound && bound <= coarse * (1.0 + 1e-12),
                }
            })
            .collect();
        VerifyReport {
            name: "exit_time_bound",
            rows,
        }
    }

    /// The default suite run by the CLI: moderate case and trial counts.
    pub fn default_suite(master_seed: u64) -> Vec<VerifyReport> {
        vec![
            verify_exit_probabilities(40, 4_000, child_seed(master_seed, tags::CASE, 1)),
            verify_expected_local_times(40, 4_000, child_seed(master_seed, tags::CASE, 2)),
            verify_geometric_law(20, 8_000, child_seed(master_seed, tags::CASE, 3)),
            verify_exit_time_bounds(40, 2_000, child_seed(master_seed, tags::CASE, 4)),
        ]
    }
}
