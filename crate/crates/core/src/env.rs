//! Random environments and their potential.
//!
//! An environment is a window of i.i.d. site transition probabilities
//! `ω_i ∈ [ε₀, 1−ε₀]`. Valid distribution families are centred — the law of
//! `log((1−ω)/ω)` has mean zero — and non-degenerate (`σ > 0`), which is the
//! recurrent regime. The potential `V` is the cumulative log-odds landscape:
//! `V(0) = 0` and `V(n) − V(n−1) = log((1−ω_n)/ω_n)` for `n > 0`, with the
//! mirrored relation on the negative side.
//!
//! Site values are generated in fixed blocks of [`OMEGA_BLOCK`] sites keyed
//! by `(environment seed, block index)`, so a window can be extended lazily
//! during a walk and every access order yields the same environment.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seeds;

/// Number of sites drawn per RNG block.
pub const OMEGA_BLOCK: usize = 64;

/// Tolerance on the analytic mean of the log-odds law.
pub const CENTERING_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("transition probability {0} outside (0, 1)")]
    OmegaOutOfRange(f64),
    #[error("epsilon0 must lie in (0, 1/2), got {0}")]
    BadEpsilon(f64),
    #[error("log-odds law not centred: analytic mean {0:e} exceeds tolerance 1e-12")]
    NotCentered(f64),
    #[error("degenerate log-odds law: sigma = 0")]
    DegenerateSigma,
    #[error("probability table is empty")]
    EmptyTable,
    #[error("table weight {0} must be positive and finite")]
    BadWeight(f64),
    #[error("uniform log-odds half-width must be positive and finite, got {0}")]
    BadLambda(f64),
    #[error("half-width must be at least 1")]
    BadHalfWidth,
    #[error("site {site} outside window [{lo}, {hi}]")]
    OutOfWindow { site: i64, lo: i64, hi: i64 },
    #[error("site {0} beyond the sampled window and the environment carries no extension")]
    WindowExhausted(i64),
    #[error("environment window [{lo}, {hi}] does not contain site 0")]
    WindowExcludesOrigin { lo: i64, hi: i64 },
    #[error("potential index {n} must be nonnegative")]
    NegativeIndex { n: i64 },
}

/// Named family of site-probability laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionKind {
    /// `ω ∈ {p, 1−p}` with probability 1/2 each; centred by symmetry.
    TwoPoint { p: f64 },
    /// `log((1−ω)/ω)` uniform on `[−λ, λ]`; centred by symmetry, `σ² = λ²/3`.
    UniformLogOdds { lambda: f64 },
    /// Finite table of `(ω, weight)` atoms; the weighted log-odds mean must
    /// vanish to within [`CENTERING_TOLERANCE`].
    DiscreteTable { entries: Vec<(f64, f64)> },
    /// `ω ≡ value`. Violates centring unless `value = 1/2` and is only
    /// accepted through [`EnvDistribution::constant_diagnostic`].
    ConstantDiagnostic { omega: f64 },
}

/// A validated environment law: ellipticity bound, centring and `σ` are
/// fixed at construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvDistribution {
    kind: DistributionKind,
    epsilon0: f64,
    sigma: f64,
    diagnostic: bool,
}

fn log_odds(omega: f64) -> f64 {
    ((1.0 - omega) / omega).ln()
}

impl EnvDistribution {
    /// Two-point family `ω ∈ {p, 1−p}`, each with probability 1/2.
    pub fn two_point(p: f64) -> Result<Self, EnvError> {
        if !(p.is_finite() && p > 0.0 && p < 1.0) {
            return Err(EnvError::OmegaOutOfRange(p));
        }
        if p == 0.5 {
            return Err(EnvError::DegenerateSigma);
        }
        Ok(Self {
            kind: DistributionKind::TwoPoint { p },
            epsilon0: p.min(1.0 - p),
            sigma: log_odds(p).abs(),
            diagnostic: false,
        })
    }

    /// Log-odds uniform on `[−λ, λ]`.
    pub fn uniform_log_odds(lambda: f64) -> Result<Self, EnvError> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(EnvError::BadLambda(lambda));
        }
        Ok(Self {
            kind: DistributionKind::UniformLogOdds { lambda },
            epsilon0: 1.0 / (1.0 + lambda.exp()),
            sigma: lambda / 3f64.sqrt(),
            diagnostic: false,
        })
    }

    /// Finite table of `(ω, weight)` atoms. Weights are normalised; the
    /// analytic log-odds mean must vanish to within 1e-12.
    pub fn discrete_table(entries: Vec<(f64, f64)>) -> Result<Self, EnvError> {
        if entries.is_empty() {
            return Err(EnvError::EmptyTable);
        }
        let mut total = 0.0;
        for &(omega, weight) in &entries {
            if !(omega.is_finite() && omega > 0.0 && omega < 1.0) {
                return Err(EnvError::OmegaOutOfRange(omega));
            }
            if !(weight.is_finite() && weight > 0.0) {
                return Err(EnvError::BadWeight(weight));
            }
            total += weight;
        }
        let mean: f64 = entries
            .iter()
            .map(|&(o, w)| w / total * log_odds(o))
            .sum();
        if mean.abs() > CENTERING_TOLERANCE {
            return Err(EnvError::NotCentered(mean));
        }
        let sigma2: f64 = entries
            .iter()
            .map(|&(o, w)| {
                let u = log_odds(o);
                w / total * u * u
            })
            .sum();
        if sigma2 <= 0.0 {
            return Err(EnvError::DegenerateSigma);
        }
        let epsilon0 = entries
            .iter()
            .map(|&(o, _)| o.min(1.0 - o))
            .fold(f64::INFINITY, f64::min);
        Ok(Self {
            kind: DistributionKind::DiscreteTable { entries },
            epsilon0,
            sigma: sigma2.sqrt(),
            diagnostic: false,
        })
    }

    /// Builds a centred table by mirroring every atom `(ω, w)` with
    /// `(1−ω, w)`, so the log-odds law is symmetric by construction.
    pub fn mirror_table(half: Vec<(f64, f64)>) -> Result<Self, EnvError> {
        let mut entries = half.clone();
        entries.extend(half.into_iter().map(|(o, w)| (1.0 - o, w)));
        Self::discrete_table(entries)
    }

    /// Constant `ω` for diagnostics (simple random walk, forced drift).
    /// Exempt from the centring and non-degeneracy checks; campaigns built
    /// on it are flagged as diagnostic runs.
    pub fn constant_diagnostic(omega: f64) -> Result<Self, EnvError> {
        if !(omega.is_finite() && omega > 0.0 && omega < 1.0) {
            return Err(EnvError::OmegaOutOfRange(omega));
        }
        Ok(Self {
            kind: DistributionKind::ConstantDiagnostic { omega },
            epsilon0: omega.min(1.0 - omega),
            sigma: log_odds(omega).abs(),
            diagnostic: true,
        })
    }

    pub fn kind(&self) -> &DistributionKind {
        &self.kind
    }

    /// Ellipticity bound: every sampled `ω` lies in `[ε₀, 1−ε₀]`.
    pub fn epsilon0(&self) -> f64 {
        self.epsilon0
    }

    /// `σ = (E log²((1−ω)/ω))^{1/2}`, in closed form per family.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn is_diagnostic(&self) -> bool {
        self.diagnostic
    }

    /// Analytic mean of the log-odds law (zero for the valid families).
    pub fn log_odds_mean(&self) -> f64 {
        match &self.kind {
            DistributionKind::TwoPoint { .. } | DistributionKind::UniformLogOdds { .. } => 0.0,
            DistributionKind::DiscreteTable { entries } => {
                let total: f64 = entries.iter().map(|&(_, w)| w).sum();
                entries
                    .iter()
                    .map(|&(o, w)| w / total * log_odds(o))
                    .sum()
            }
            DistributionKind::ConstantDiagnostic { omega } => log_odds(*omega),
        }
    }

    fn draw_omega(&self, rng: &mut ChaCha8Rng) -> f64 {
        match &self.kind {
            DistributionKind::TwoPoint { p } => {
                if rng.random::<bool>() {
                    *p
                } else {
                    1.0 - *p
                }
            }
            DistributionKind::UniformLogOdds { lambda } => {
                let u: f64 = rng.random_range(-lambda..=*lambda);
                1.0 / (1.0 + u.exp())
            }
            DistributionKind::DiscreteTable { entries } => {
                let total: f64 = entries.iter().map(|&(_, w)| w).sum();
                let mut target = rng.random::<f64>() * total;
                for &(o, w) in entries {
                    target -= w;
                    if target <= 0.0 {
                        return o;
                    }
                }
                entries.last().expect("non-empty table").0
            }
            DistributionKind::ConstantDiagnostic { omega } => *omega,
        }
    }

    /// Sites of block `k` (covering `[64k, 64k + 63]`) for a given
    /// environment seed. Blocks are independent ChaCha streams, so any
    /// subset of blocks can be generated in any order.
    pub(crate) fn sample_block(&self, env_seed: u64, block: i64) -> Vec<f64> {
        let stream = if block >= 0 {
            2 * block as u64
        } else {
            2 * (-(block + 1)) as u64 + 1
        };
        let mut rng = seeds::rng_from_seed(env_seed);
        rng.set_stream(stream);
        (0..OMEGA_BLOCK).map(|_| self.draw_omega(&mut rng)).collect()
    }

    /// Samples an environment on the window `[−half_width, half_width]`.
    /// Deterministic in `(self, seed)`; the result carries an extension
    /// handle so walks can grow the window on demand.
    pub fn sample_environment(&self, half_width: u32, seed: u64) -> Result<Environment, EnvError> {
        if half_width < 1 {
            return Err(EnvError::BadHalfWidth);
        }
        let lo = -(half_width as i64);
        let hi = half_width as i64;
        let omegas = self.materialize(seed, lo, hi);
        Ok(Environment {
            offset: lo,
            epsilon0: self.epsilon0,
            omegas,
            sigma: self.sigma,
            extension: Some(Extension {
                dist: self.clone(),
                env_seed: seed,
            }),
        })
    }

    /// Minimal environment (one block each side of the origin) used when the
    /// visited range is not known in advance; it grows lazily via the
    /// extension handle.
    pub fn lazy_environment(&self, seed: u64) -> Environment {
        self.sample_environment(1, seed)
            .expect("half-width 1 is valid")
    }

    fn materialize(&self, seed: u64, lo: i64, hi: i64) -> Vec<f64> {
        let block_lo = lo.div_euclid(OMEGA_BLOCK as i64);
        let block_hi = hi.div_euclid(OMEGA_BLOCK as i64);
        let mut omegas = Vec::with_capacity((hi - lo + 1) as usize);
        for b in block_lo..=block_hi {
            let block = self.sample_block(seed, b);
            let base = b * OMEGA_BLOCK as i64;
            for (j, &omega) in block.iter().enumerate() {
                let site = base + j as i64;
                if site >= lo && site <= hi {
                    omegas.push(omega);
                }
            }
        }
        omegas
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Extension {
    dist: EnvDistribution,
    env_seed: u64,
}

fn nan() -> f64 {
    f64::NAN
}

/// A realised window of site transition probabilities.
///
/// Serialises to exactly `{offset, epsilon0, omegas[]}`; the `σ` of the
/// generating law and the lazy-extension handle are runtime-only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    pub offset: i64,
    pub epsilon0: f64,
    pub omegas: Vec<f64>,
    #[serde(skip, default = "nan")]
    sigma: f64,
    #[serde(skip, default)]
    extension: Option<Extension>,
}

impl Environment {
    /// Builds an environment from explicit values (no extension handle).
    /// The window must contain site 0 and every value must lie in
    /// `[ε₀, 1−ε₀]`.
    pub fn from_omegas(offset: i64, omegas: Vec<f64>, epsilon0: f64) -> Result<Self, EnvError> {
        if !(epsilon0 > 0.0 && epsilon0 < 0.5) {
            return Err(EnvError::BadEpsilon(epsilon0));
        }
        let hi = offset + omegas.len() as i64 - 1;
        if offset > 0 || hi < 0 {
            return Err(EnvError::WindowExcludesOrigin { lo: offset, hi });
        }
        for &omega in &omegas {
            if !(omega >= epsilon0 && omega <= 1.0 - epsilon0) {
                return Err(EnvError::OmegaOutOfRange(omega));
            }
        }
        Ok(Self {
            offset,
            epsilon0,
            omegas,
            sigma: f64::NAN,
            extension: None,
        })
    }

    /// Constant `ω` on `[−half_width, half_width]`; test and diagnostic aid.
    pub fn constant(omega: f64, half_width: u32) -> Result<Self, EnvError> {
        let n = 2 * half_width as usize + 1;
        let epsilon0 = omega.min(1.0 - omega);
        if !(epsilon0 > 0.0) {
            return Err(EnvError::OmegaOutOfRange(omega));
        }
        // ω = 1/2 needs an ε₀ strictly below 1/2 to satisfy the bound shape
        let epsilon0 = epsilon0.min(0.499_999);
        Self::from_omegas(-(half_width as i64), vec![omega; n], epsilon0)
    }

    /// Window `[lo, hi]` of materialised sites.
    pub fn window(&self) -> (i64, i64) {
        (self.offset, self.offset + self.omegas.len() as i64 - 1)
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// σ of the generating law; `NaN` when unknown (hand-built or
    /// deserialised environments).
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `ω` at a site inside the materialised window.
    pub fn omega(&self, site: i64) -> Result<f64, EnvError> {
        let (lo, hi) = self.window();
        if site < lo || site > hi {
            return Err(EnvError::OutOfWindow { site, lo, hi });
        }
        Ok(self.omegas[(site - lo) as usize])
    }

    /// `log((1−ω)/ω)` at a site inside the window.
    pub fn log_odds(&self, site: i64) -> Result<f64, EnvError> {
        Ok(log_odds(self.omega(site)?))
    }

    /// Materialises an enlarged window `[lo, hi]` of the same environment.
    /// Requires the extension handle (sampled environments carry one).
    pub fn extended_window(&self, lo: i64, hi: i64) -> Result<Environment, EnvError> {
        let (base_lo, base_hi) = self.window();
        if lo >= base_lo && hi <= base_hi {
            return Ok(self.clone());
        }
        let ext = self
            .extension
            .as_ref()
            .ok_or(EnvError::WindowExhausted(if lo < base_lo { lo } else { hi }))?;
        let omegas = ext.dist.materialize(ext.env_seed, lo, hi);
        Ok(Environment {
            offset: lo,
            epsilon0: self.epsilon0,
            omegas,
            sigma: self.sigma,
            extension: self.extension.clone(),
        })
    }

    pub(crate) fn extension_parts(&self) -> Option<(&EnvDistribution, u64)> {
        self.extension.as_ref().map(|e| (&e.dist, e.env_seed))
    }
}

/// The cumulative log-odds landscape of an environment.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    pub offset: i64,
    pub values: Vec<f64>,
    /// σ of the generating law, `NaN` when unknown.
    pub sigma: f64,
}

/// Computes the potential on the environment window: `V(0) = 0`,
/// `V(n) = Σ_{i=1}^n log((1−ω_i)/ω_i)` for `n > 0` and
/// `V(n) = −Σ_{i=n+1}^0 log((1−ω_i)/ω_i)` for `n < 0`.
pub fn potential(env: &Environment) -> Potential {
    let (lo, hi) = env.window();
    let len = env.len();
    let mut values = vec![0.0; len];
    let at = |site: i64| (site - lo) as usize;
    for n in 1..=hi {
        values[at(n)] = values[at(n - 1)] + log_odds(env.omegas[at(n)]);
    }
    for n in (lo..0).rev() {
        values[at(n)] = values[at(n + 1)] - log_odds(env.omegas[at(n + 1)]);
    }
    Potential {
        offset: lo,
        values,
        sigma: env.sigma(),
    }
}

impl Potential {
    pub fn window(&self) -> (i64, i64) {
        (self.offset, self.offset + self.values.len() as i64 - 1)
    }

    /// `V(n)` for `n` inside the window.
    pub fn value(&self, n: i64) -> Result<f64, EnvError> {
        let (lo, hi) = self.window();
        if n < lo || n > hi {
            return Err(EnvError::OutOfWindow { site: n, lo, hi });
        }
        Ok(self.values[(n - lo) as usize])
    }

    /// `min{V(k), 0 ≤ k ≤ n}` for `n ≥ 0` inside the window.
    pub fn running_min(&self, n: i64) -> Result<f64, EnvError> {
        if n < 0 {
            return Err(EnvError::NegativeIndex { n });
        }
        let (lo, hi) = self.window();
        if n > hi || lo > 0 {
            return Err(EnvError::OutOfWindow { site: n, lo, hi });
        }
        let mut min = f64::INFINITY;
        for k in 0..=n {
            min = min.min(self.values[(k - lo) as usize]);
        }
        Ok(min)
    }

    /// `max{V(k) − V(ℓ): lo ≤ ℓ ≤ k ≤ hi}` (largest drawup on the range).
    pub fn max_drawup(&self, lo: i64, hi: i64) -> Result<f64, EnvError> {
        let (wlo, whi) = self.window();
        if lo < wlo || hi > whi || lo > hi {
            return Err(EnvError::OutOfWindow {
                site: if lo < wlo { lo } else { hi },
                lo: wlo,
                hi: whi,
            });
        }
        let mut running_min = f64::INFINITY;
        let mut best = 0.0f64;
        for k in lo..=hi {
            let v = self.values[(k - wlo) as usize];
            running_min = running_min.min(v);
            best = best.max(v - running_min);
        }
        Ok(best)
    }
}
