//! Exact quenched quantities for a fixed environment: hitting probabilities,
//! exit-time bounds, expected local times and the geometric local-time
//! parameter.
//!
//! Every sum of `e^{V(k)}` terms is evaluated with max-shifted exponentials
//! ([`LogSumAccumulator`]); deep valleys overflow double precision in linear
//! space long before they stop being interesting.

use thiserror::Error;

use crate::env::{Environment, Potential};

#[derive(Debug, Error, PartialEq)]
pub enum QuenchedError {
    #[error("indices must satisfy {requirement}, got ({a}, {b}, {c})")]
    BadOrdering {
        requirement: &'static str,
        a: i64,
        b: i64,
        c: i64,
    },
    #[error("index range [{lo}, {hi}] leaves the potential window [{wlo}, {whi}]")]
    OutOfWindow { lo: i64, hi: i64, wlo: i64, whi: i64 },
    #[error("local-time site {z} must satisfy p < z \u{2264} q < r or p < q < z < r")]
    BadLocalTimeSite { z: i64 },
}

/// Streaming `log Σ e^{v_k}` with a running maximum shift.
///
/// Relative error stays below 1e-12 for the window sizes used here; the
/// shifted terms are all ≤ 1 so the residual sum never overflows.
#[derive(Debug, Clone, Copy)]
pub struct LogSumAccumulator {
    max_exponent: f64,
    residual_sum: f64,
}

impl Default for LogSumAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumAccumulator {
    pub fn new() -> Self {
        Self {
            max_exponent: f64::NEG_INFINITY,
            residual_sum: 0.0,
        }
    }

    /// Adds a term `e^v`.
    pub fn push(&mut self, v: f64) {
        if v <= self.max_exponent {
            self.residual_sum += (v - self.max_exponent).exp();
        } else {
            self.residual_sum = self.residual_sum * (self.max_exponent - v).exp() + 1.0;
            self.max_exponent = v;
        }
    }

    /// `log Σ e^{v_k}`; `−∞` when empty.
    pub fn log_sum(&self) -> f64 {
        if self.max_exponent == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max_exponent + self.residual_sum.ln()
        }
    }
}

/// `log Σ_{k=lo}^{hi} e^{V(k)}`.
pub fn log_sum_exp_range(pot: &Potential, lo: i64, hi: i64) -> Result<f64, QuenchedError> {
    let (wlo, whi) = pot.window();
    if lo > hi || lo < wlo || hi > whi {
        return Err(QuenchedError::OutOfWindow { lo, hi, wlo, whi });
    }
    let mut acc = LogSumAccumulator::new();
    for k in lo..=hi {
        acc.push(pot.values[(k - wlo) as usize]);
    }
    Ok(acc.log_sum())
}

fn require_ordering(
    ok: bool,
    requirement: &'static str,
    a: i64,
    b: i64,
    c: i64,
) -> Result<(), QuenchedError> {
    if ok {
        Ok(())
    } else {
        Err(QuenchedError::BadOrdering { requirement, a, b, c })
    }
}

/// Quenched probability of exiting upwards: `P_ω^q[τ(r) < τ(p)]` for
/// `p < q < r`, evaluated as a ratio of `e^{V(k)}` sums in log-space.
pub fn exit_prob(pot: &Potential, p: i64, q: i64, r: i64) -> Result<f64, QuenchedError> {
    require_ordering(p < q && q < r, "p < q < r", p, q, r)?;
    let num = log_sum_exp_range(pot, p, q - 1)?;
    let den = log_sum_exp_range(pot, p, r - 1)?;
    Ok((num - den).exp())
}

/// Quenched probability of exiting downwards: `P_ω^q[τ(p) < τ(r)]`, the
/// mirrored ratio.
pub fn exit_prob_down(pot: &Potential, p: i64, q: i64, r: i64) -> Result<f64, QuenchedError> {
    require_ordering(p < q && q < r, "p < q < r", p, q, r)?;
    let num = log_sum_exp_range(pot, q, r - 1)?;
    let den = log_sum_exp_range(pot, p, r - 1)?;
    Ok((num - den).exp())
}

/// Upper bound on `E_ω^h[τ(g) ∧ τ(i)]` for `g < h < i`:
/// the double sum `Σ_{k=h}^{i−1} Σ_{ℓ=g}^{k} exp[V(k) − V(ℓ)]/ω_ℓ`.
///
/// This is a bound, not an identity; callers should only assert one-sided
/// dominance against simulated exit times.
pub fn exit_time_bound(
    pot: &Potential,
    env: &Environment,
    g: i64,
    h: i64,
    i: i64,
) -> Result<f64, QuenchedError> {
    require_ordering(g < h && h < i, "g < h < i", g, h, i)?;
    let (wlo, whi) = pot.window();
    if g < wlo || i - 1 > whi {
        return Err(QuenchedError::OutOfWindow { lo: g, hi: i - 1, wlo, whi });
    }
    let mut acc = LogSumAccumulator::new();
    for k in h..=(i - 1) {
        let vk = pot.values[(k - wlo) as usize];
        for l in g..=k {
            let vl = pot.values[(l - wlo) as usize];
            let omega = env
                .omega(l)
                .map_err(|_| QuenchedError::OutOfWindow { lo: l, hi: l, wlo, whi })?;
            acc.push(vk - vl - omega.ln());
        }
    }
    Ok(acc.log_sum().exp())
}

/// The coarser closed-form bound `ε₀^{-1} (i−g)² exp[max_{g≤ℓ≤k≤i−1}(V(k)−V(ℓ))]`,
/// which dominates [`exit_time_bound`].
pub fn exit_time_bound_coarse(
    pot: &Potential,
    env: &Environment,
    g: i64,
    h: i64,
    i: i64,
) -> Result<f64, QuenchedError> {
    require_ordering(g < h && h < i, "g < h < i", g, h, i)?;
    let gap = pot.max_drawup(g, i - 1).map_err(|_| {
        let (wlo, whi) = pot.window();
        QuenchedError::OutOfWindow { lo: g, hi: i - 1, wlo, whi }
    })?;
    let span = (i - g) as f64;
    Ok((gap + 2.0 * span.ln() - env.epsilon0.ln()).exp())
}

/// `ω_z P_ω^{z+1}[τ(z) > τ(r)] + (1−ω_z) P_ω^{z−1}[τ(z) > τ(p)]` for
/// `p < z < r`: the success parameter of the geometric number of visits to
/// `z` before leaving `(p, r)`, when started at `z`.
pub fn local_time_geometric_param(
    pot: &Potential,
    env: &Environment,
    z: i64,
    p: i64,
    r: i64,
) -> Result<f64, QuenchedError> {
    require_ordering(p < z && z < r, "p < z < r", p, z, r)?;
    let (wlo, whi) = pot.window();
    let vz = pot.value(z).map_err(|_| QuenchedError::OutOfWindow { lo: z, hi: z, wlo, whi })?;
    let vz1 = pot
        .value(z - 1)
        .map_err(|_| QuenchedError::OutOfWindow { lo: z - 1, hi: z - 1, wlo, whi })?;
    // escape up without returning: e^{V(z)} / Σ_{k=z}^{r−1} e^{V(k)}
    let up = (vz - log_sum_exp_range(pot, z, r - 1)?).exp();
    // escape down without returning: e^{V(z−1)} / Σ_{k=p}^{z−1} e^{V(k)}
    let down = (vz1 - log_sum_exp_range(pot, p, z - 1)?).exp();
    let omega = env
        .omega(z)
        .map_err(|_| QuenchedError::OutOfWindow { lo: z, hi: z, wlo, whi })?;
    Ok(omega * up + (1.0 - omega) * down)
}

/// `E_ω^q[L(z, τ(p) ∧ τ(r))]`: the reach probability of `z` from `q`
/// divided by the geometric escape parameter at `z`. Valid for
/// `p < z ≤ q < r` and `p < q < z < r`.
pub fn expected_local_time(
    pot: &Potential,
    env: &Environment,
    q: i64,
    z: i64,
    p: i64,
    r: i64,
) -> Result<f64, QuenchedError> {
    require_ordering(p < q && q < r, "p < q < r", p, q, r)?;
    let first_branch = p < z && z <= q;
    let second_branch = q < z && z < r;
    if !(first_branch || second_branch) {
        return Err(QuenchedError::BadLocalTimeSite { z });
    }
    let reach = if z == q {
        1.0
    } else if first_branch {
        // from q above z: p is shielded by z, so reach = P_ω^q[τ(z) < τ(r)]
        (log_sum_exp_range(pot, q, r - 1)? - log_sum_exp_range(pot, z, r - 1)?).exp()
    } else {
        // from q below z: r is shielded by z, so reach = P_ω^q[τ(z) < τ(p)]
        (log_sum_exp_range(pot, p, q - 1)? - log_sum_exp_range(pot, p, z - 1)?).exp()
    };
    Ok(reach / local_time_geometric_param(pot, env, z, p, r)?)
}
