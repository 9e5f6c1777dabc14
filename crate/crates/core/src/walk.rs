//! Quenched trajectory simulation: the nearest-neighbour Markov chain in a
//! fixed environment, hitting and exit times, per-site local times, additive
//! functionals `Σ f(S_k)` and persistence trials.
//!
//! Walks never observe a window boundary: sampled environments carry an
//! extension handle and the per-walk [`EnvCursor`] grows the window block by
//! block, deterministically in the environment seed alone.

use std::collections::BTreeMap;

use rand_chacha::rand_core::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{EnvDistribution, EnvError, Environment, OMEGA_BLOCK};
use crate::seeds;
use crate::stats::CompensatedSum;

/// Safety cap on exit trials; recurrence makes non-termination measure-zero,
/// the cap turns pathological seeds into diagnostics instead of hangs.
pub const EXIT_TRIAL_STEP_CAP: u64 = 1_000_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum WalkError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("functional running sum overflowed its accumulator at |x| = {at}")]
    AccumulatorOverflow { at: i64 },
    #[error("exit trial exceeded the {0}-step safety cap")]
    ExitCapExceeded(u64),
    #[error("exit interval must satisfy p < start < r, got p={p}, start={start}, r={r}")]
    BadExitInterval { p: i64, start: i64, r: i64 },
    #[error("functional alpha must be finite and nonnegative, got {0}")]
    BadAlpha(f64),
    #[error("custom functional table must be nonempty with f(x) >= 1 for x > 0 and f(x) <= -1 for x < 0")]
    BadTable,
    #[error("persistence horizon must be at least 1")]
    BadHorizon,
    #[error("persistence threshold must satisfy u <= 0, got {0}")]
    BadThreshold(f64),
    #[error("hitting-time cap must be at least 1")]
    BadCap,
}

/// Additive functional families admissible for persistence trials:
/// `f(0) = 0`, `f(x) ≥ 1` for `x > 0`, `f(x) ≤ −1` for `x < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionalSpec {
    /// `f(x) = sgn(x)`.
    Sign,
    /// `f(x) = sgn(x) |x|^α`, `α ≥ 0`.
    SignedPower { alpha: f64 },
    /// `f(x) = sgn(x) |x|^{log(2+|x|)^α}`, `α ≥ 0`.
    SignedPowerLog { alpha: f64 },
    /// Explicit values `f(1..=n)` and `f(-1..=-m)`; sites beyond the table
    /// take the nearest endpoint value.
    CustomTable {
        positive: Vec<f64>,
        negative: Vec<f64>,
    },
}

impl FunctionalSpec {
    pub fn validate(&self) -> Result<(), WalkError> {
        match self {
            FunctionalSpec::Sign => Ok(()),
            FunctionalSpec::SignedPower { alpha } | FunctionalSpec::SignedPowerLog { alpha } => {
                if alpha.is_finite() && *alpha >= 0.0 {
                    Ok(())
                } else {
                    Err(WalkError::BadAlpha(*alpha))
                }
            }
            FunctionalSpec::CustomTable { positive, negative } => {
                let pos_ok = !positive.is_empty()
                    && positive.iter().all(|&v| v.is_finite() && v >= 1.0);
                let neg_ok = !negative.is_empty()
                    && negative.iter().all(|&v| v.is_finite() && v <= -1.0);
                if pos_ok && neg_ok {
                    Ok(())
                } else {
                    Err(WalkError::BadTable)
                }
            }
        }
    }

    /// True when `f` takes integer values everywhere, which selects the
    /// exact 128-bit accumulator.
    pub fn is_integer_valued(&self) -> bool {
        match self {
            FunctionalSpec::Sign => true,
            FunctionalSpec::SignedPower { alpha } => alpha.fract() == 0.0 && *alpha <= 127.0,
            FunctionalSpec::SignedPowerLog { .. } => false,
            FunctionalSpec::CustomTable { positive, negative } => positive
                .iter()
                .chain(negative)
                .all(|v| v.fract() == 0.0 && v.abs() < 1e18),
        }
    }

    pub fn eval(&self, x: i64) -> f64 {
        let sgn = (x > 0) as i64 as f64 - (x < 0) as i64 as f64;
        match self {
            FunctionalSpec::Sign => sgn,
            FunctionalSpec::SignedPower { alpha } => sgn * (x.abs() as f64).powf(*alpha),
            FunctionalSpec::SignedPowerLog { alpha } => {
                let a = x.abs() as f64;
                sgn * a.powf((2.0 + a).ln().powf(*alpha))
            }
            FunctionalSpec::CustomTable { positive, negative } => {
                if x == 0 {
                    0.0
                } else if x > 0 {
                    let idx = ((x - 1) as usize).min(positive.len() - 1);
                    positive[idx]
                } else {
                    let idx = ((-x - 1) as usize).min(negative.len() - 1);
                    negative[idx]
                }
            }
        }
    }

    /// Exact integer value; `None` signals per-term overflow (callers abort
    /// with [`WalkError::AccumulatorOverflow`]). Only meaningful when
    /// [`Self::is_integer_valued`] holds.
    pub fn eval_int(&self, x: i64) -> Option<i128> {
        let sgn = (x > 0) as i128 - (x < 0) as i128;
        match self {
            FunctionalSpec::Sign => Some(sgn),
            FunctionalSpec::SignedPower { alpha } => {
                let base = x.unsigned_abs() as i128;
                base.checked_pow(*alpha as u32).map(|m| sgn * m)
            }
            FunctionalSpec::CustomTable { .. } => Some(self.eval(x) as i128),
            FunctionalSpec::SignedPowerLog { .. } => None,
        }
    }
}

/// Running sum of `f(S_k)`: exact 128-bit integers for integer-valued `f`,
/// compensated double-precision summation otherwise.
#[derive(Debug, Clone)]
pub enum FunctionalSum {
    Int(i128),
    Float(CompensatedSum),
}

impl FunctionalSum {
    pub fn new(spec: &FunctionalSpec) -> Self {
        if spec.is_integer_valued() {
            FunctionalSum::Int(0)
        } else {
            FunctionalSum::Float(CompensatedSum::new())
        }
    }

    #[inline]
    pub fn add(&mut self, spec: &FunctionalSpec, x: i64) -> Result<(), WalkError> {
        match self {
            FunctionalSum::Int(sum) => {
                let term = spec
                    .eval_int(x)
                    .ok_or(WalkError::AccumulatorOverflow { at: x })?;
                *sum = sum
                    .checked_add(term)
                    .ok_or(WalkError::AccumulatorOverflow { at: x })?;
            }
            FunctionalSum::Float(acc) => {
                acc.add(spec.eval(x));
                if !acc.value().is_finite() {
                    return Err(WalkError::AccumulatorOverflow { at: x });
                }
            }
        }
        Ok(())
    }

    pub fn value(&self) -> f64 {
        match self {
            FunctionalSum::Int(s) => *s as f64,
            FunctionalSum::Float(acc) => acc.value(),
        }
    }

    #[inline]
    pub fn greater_than(&self, u: f64) -> bool {
        self.value() > u
    }
}

/// Trial configuration for one persistence run: survive means
/// `Σ_{k=0}^n f(S_k) > u` for every `n ∈ [1, N]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersistenceTrialConfig {
    pub horizon: u64,
    pub threshold: f64,
    pub functional: FunctionalSpec,
}

impl PersistenceTrialConfig {
    pub fn validate(&self) -> Result<(), WalkError> {
        if self.horizon < 1 {
            return Err(WalkError::BadHorizon);
        }
        if !(self.threshold <= 0.0) {
            return Err(WalkError::BadThreshold(self.threshold));
        }
        self.functional.validate()
    }
}

/// Trajectory summary of one quenched walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkRecord {
    pub n_steps: u64,
    pub final_position: i64,
    /// Sparse visit counts `L(x, n)`; Sinai-localised walks visit
    /// `O(log² n)` sites so a map is the right shape.
    pub local_times: BTreeMap<i64, u64>,
    /// First hit times of the requested targets; `None` means not hit.
    pub hitting_times: BTreeMap<i64, Option<u64>>,
    /// `min_{1 ≤ n ≤ N} Σ_{k=0}^n f(S_k)` when a functional was attached.
    pub functional_min: Option<f64>,
    /// Smallest `n ≥ 1` with running sum ≤ u, when a threshold was attached.
    pub first_violation: Option<u64>,
}

/// Walk-local environment view with lazy block extension.
pub struct EnvCursor<'a> {
    thresholds: Vec<u64>,
    lo: i64,
    source: Option<(&'a EnvDistribution, u64)>,
}

#[inline]
fn to_threshold(omega: f64) -> u64 {
    // P(step right) = threshold / 2^64; exact to one part in 2^64
    (omega * 18_446_744_073_709_551_616.0) as u64
}

impl<'a> EnvCursor<'a> {
    pub fn new(env: &'a Environment) -> Self {
        Self {
            thresholds: env.omegas.iter().map(|&w| to_threshold(w)).collect(),
            lo: env.offset,
            source: env.extension_parts(),
        }
    }

    #[inline]
    pub fn threshold(&mut self, site: i64) -> Result<u64, WalkError> {
        let idx = site - self.lo;
        if idx >= 0 && (idx as usize) < self.thresholds.len() {
            return Ok(self.thresholds[idx as usize]);
        }
        self.extend_to(site)?;
        Ok(self.thresholds[(site - self.lo) as usize])
    }

    #[cold]
    fn extend_to(&mut self, site: i64) -> Result<(), WalkError> {
        let (dist, seed) = self
            .source
            .ok_or(WalkError::Env(EnvError::WindowExhausted(site)))?;
        let block_len = OMEGA_BLOCK as i64;
        while site < self.lo {
            let block_idx = (self.lo - 1).div_euclid(block_len);
            let block = dist.sample_block(seed, block_idx);
            let base = block_idx * block_len;
            let take = (self.lo - base) as usize;
            let mut grown = Vec::with_capacity(take + self.thresholds.len());
            grown.extend(block[..take].iter().map(|&w| to_threshold(w)));
            grown.extend_from_slice(&self.thresholds);
            self.thresholds = grown;
            self.lo = base;
        }
        loop {
            let next = self.lo + self.thresholds.len() as i64;
            if site < next {
                break;
            }
            let block_idx = next.div_euclid(block_len);
            let block = dist.sample_block(seed, block_idx);
            let skip = (next - block_idx * block_len) as usize;
            self.thresholds
                .extend(block[skip..].iter().map(|&w| to_threshold(w)));
        }
        Ok(())
    }
}

/// Simulates `n_steps` steps from the origin and records local times.
pub fn simulate(env: &Environment, n_steps: u64, seed: u64) -> Result<WalkRecord, WalkError> {
    simulate_with_targets(env, n_steps, &[], seed)
}

/// [`simulate`] that additionally records first hit times of `targets`.
pub fn simulate_with_targets(
    env: &Environment,
    n_steps: u64,
    targets: &[i64],
    seed: u64,
) -> Result<WalkRecord, WalkError> {
    let mut cursor = EnvCursor::new(env);
    let mut rng = seeds::rng_from_seed(seed);
    let mut pos = 0i64;
    let mut local = BTreeMap::new();
    local.insert(0i64, 1u64);
    let mut hits: BTreeMap<i64, Option<u64>> = targets
        .iter()
        .map(|&t| (t, if t == 0 { Some(0) } else { None }))
        .collect();
    for n in 1..=n_steps {
        let thr = cursor.threshold(pos)?;
        pos += if rng.next_u64() < thr { 1 } else { -1 };
        *local.entry(pos).or_insert(0) += 1;
        if let Some(slot) = hits.get_mut(&pos) {
            if slot.is_none() {
                *slot = Some(n);
            }
        }
    }
    Ok(WalkRecord {
        n_steps,
        final_position: pos,
        local_times: local,
        hitting_times: hits,
        functional_min: None,
        first_violation: None,
    })
}

/// Simulates with an attached functional: fills `functional_min` and, given
/// a threshold, `first_violation` (the walk still runs to `n_steps`).
pub fn simulate_with_functional(
    env: &Environment,
    n_steps: u64,
    functional: &FunctionalSpec,
    threshold: f64,
    seed: u64,
) -> Result<WalkRecord, WalkError> {
    functional.validate()?;
    let mut cursor = EnvCursor::new(env);
    let mut rng = seeds::rng_from_seed(seed);
    let mut pos = 0i64;
    let mut local = BTreeMap::new();
    local.insert(0i64, 1u64);
    let mut acc = FunctionalSum::new(functional);
    let mut min_sum = f64::INFINITY;
    let mut first_violation = None;
    for n in 1..=n_steps {
        let thr = cursor.threshold(pos)?;
        pos += if rng.next_u64() < thr { 1 } else { -1 };
        *local.entry(pos).or_insert(0) += 1;
        acc.add(functional, pos)?;
        let value = acc.value();
        min_sum = min_sum.min(value);
        if first_violation.is_none() && !acc.greater_than(threshold) {
            first_violation = Some(n);
        }
    }
    Ok(WalkRecord {
        n_steps,
        final_position: pos,
        local_times: local,
        hitting_times: BTreeMap::new(),
        functional_min: (n_steps > 0).then_some(min_sum),
        first_violation,
    })
}

/// Endpoint `S_N` alone, without recording anything along the way.
pub fn final_position(env: &Environment, n_steps: u64, seed: u64) -> Result<i64, WalkError> {
    let mut cursor = EnvCursor::new(env);
    let mut rng = seeds::rng_from_seed(seed);
    let mut pos = 0i64;
    for _ in 0..n_steps {
        let thr = cursor.threshold(pos)?;
        pos += if rng.next_u64() < thr { 1 } else { -1 };
    }
    Ok(pos)
}

/// Bare trajectory `S_0..S_n`; testing and streaming aid.
pub fn walk_positions(env: &Environment, n_steps: u64, seed: u64) -> Result<Vec<i64>, WalkError> {
    let mut cursor = EnvCursor::new(env);
    let mut rng = seeds::rng_from_seed(seed);
    let mut pos = 0i64;
    let mut out = Vec::with_capacity(n_steps as usize + 1);
    out.push(0);
    for _ in 0..n_steps {
        let thr = cursor.threshold(pos)?;
        pos += if rng.next_u64() < thr { 1 } else { -1 };
        out.push(pos);
    }
    Ok(out)
}

/// First `k ≤ cap` with `S_k = target`, or `None` when capped.
pub fn hitting_time(
    env: &Environment,
    target: i64,
    cap: u64,
    seed: u64,
) -> Result<Option<u64>, WalkError> {
    if cap < 1 {
        return Err(WalkError::BadCap);
    }
    if target == 0 {
        return Ok(Some(0));
    }
    let mut cursor = EnvCursor::new(env);
    let mut rng = seeds::rng_from_seed(seed);
    let mut pos = 0i64;
    for k in 1..=cap {
        let thr = cursor.threshold(pos)?;
        pos += if rng.next_u64() < thr { 1 } else { -1 };
        if pos == target {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Outcome of a two-boundary exit trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitRecord {
    /// True when the walk left through `r`, false through `p`.
    pub exited_high: bool,
    pub exit_time: u64,
    /// Visit counts for sites strictly inside `(p, r)`.
    pub local_times: BTreeMap<i64, u64>,
}

/// Runs from `start` until the first hit of `p` or `r` (`p < start < r`).
pub fn exit_trial(
    env: &Environment,
    start: i64,
    p: i64,
    r: i64,
    seed: u64,
) -> Result<ExitRecord, WalkError> {
    if !(p < start && start < r) {
        return Err(WalkError::BadExitInterval { p, start, r });
    }
    let mut cursor = EnvCursor::new(env);
    let mut rng = seeds::rng_from_seed(seed);
    let mut pos = start;
    let mut local = BTreeMap::new();
    local.insert(start, 1u64);
    for k in 1..=EXIT_TRIAL_STEP_CAP {
        let thr = cursor.threshold(pos)?;
        pos += if rng.next_u64() < thr { 1 } else { -1 };
        if pos == p || pos == r {
            return Ok(ExitRecord {
                exited_high: pos == r,
                exit_time: k,
                local_times: local,
            });
        }
        *local.entry(pos).or_insert(0) += 1;
    }
    Err(WalkError::ExitCapExceeded(EXIT_TRIAL_STEP_CAP))
}

/// Running sums `Σ_{k=0}^n f(S_k)` along a trajectory `S_0..S_N`.
pub fn additive_functional_path(
    positions: &[i64],
    functional: &FunctionalSpec,
) -> Result<Vec<f64>, WalkError> {
    functional.validate()?;
    let mut acc = FunctionalSum::new(functional);
    let mut out = Vec::with_capacity(positions.len());
    for &x in positions {
        acc.add(functional, x)?;
        out.push(acc.value());
    }
    Ok(out)
}

/// Exact integer running sums; only for integer-valued functionals.
pub fn additive_functional_path_int(
    positions: &[i64],
    functional: &FunctionalSpec,
) -> Result<Vec<i128>, WalkError> {
    functional.validate()?;
    let mut sum = 0i128;
    let mut out = Vec::with_capacity(positions.len());
    for &x in positions {
        let term = functional
            .eval_int(x)
            .ok_or(WalkError::AccumulatorOverflow { at: x })?;
        sum = sum
            .checked_add(term)
            .ok_or(WalkError::AccumulatorOverflow { at: x })?;
        out.push(sum);
    }
    Ok(out)
}

/// Site-ordered evaluation `Σ_x f(x) L(x, n)`.
pub fn local_time_weighted_sum(
    local_times: &BTreeMap<i64, u64>,
    functional: &FunctionalSpec,
) -> Result<f64, WalkError> {
    functional.validate()?;
    if functional.is_integer_valued() {
        return Ok(local_time_weighted_sum_int(local_times, functional)? as f64);
    }
    let mut acc = CompensatedSum::new();
    for (&x, &count) in local_times {
        acc.add(functional.eval(x) * count as f64);
    }
    Ok(acc.value())
}

/// Exact integer site-ordered sum for integer-valued functionals.
pub fn local_time_weighted_sum_int(
    local_times: &BTreeMap<i64, u64>,
    functional: &FunctionalSpec,
) -> Result<i128, WalkError> {
    let mut sum = 0i128;
    for (&x, &count) in local_times {
        let term = functional
            .eval_int(x)
            .ok_or(WalkError::AccumulatorOverflow { at: x })?;
        sum = term
            .checked_mul(count as i128)
            .and_then(|t| sum.checked_add(t))
            .ok_or(WalkError::AccumulatorOverflow { at: x })?;
    }
    Ok(sum)
}

/// Smallest `n ∈ [1, n_max]` with `Σ_{k=0}^n f(S_k) ≤ u`, or `None` when the
/// sum stays above `u` throughout.
pub fn first_violation_time(
    env: &Environment,
    functional: &FunctionalSpec,
    threshold: f64,
    n_max: u64,
    seed: u64,
) -> Result<Option<u64>, WalkError> {
    functional.validate()?;
    let mut cursor = EnvCursor::new(env);
    let mut rng = seeds::rng_from_seed(seed);
    let mut pos = 0i64;
    let mut acc = FunctionalSum::new(functional);
    for n in 1..=n_max {
        let thr = cursor.threshold(pos)?;
        pos += if rng.next_u64() < thr { 1 } else { -1 };
        acc.add(functional, pos)?;
        if !acc.greater_than(threshold) {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// One persistence trial: true iff the running sum stays above `u` for every
/// `n ∈ [1, N]`. Exits at the first violation.
pub fn persistence_trial(
    env: &Environment,
    cfg: &PersistenceTrialConfig,
    seed: u64,
) -> Result<bool, WalkError> {
    cfg.validate()?;
    Ok(first_violation_time(env, &cfg.functional, cfg.threshold, cfg.horizon, seed)?.is_none())
}
