//! Piecewise-linear continuous paths: discretised two-sided Brownian motion,
//! interpolated potentials, and range/first-passage utilities.
//!
//! All first-passage solves are exact on segments (closed-form linear
//! crossing), never grid-snapped; the grid enters only through where the
//! breakpoints sit.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::Potential;
use crate::seeds::{self, tags};

#[derive(Debug, Error, PartialEq)]
pub enum PathError {
    #[error("a path needs at least two breakpoints")]
    TooFewBreakpoints,
    #[error("breakpoint times must be strictly increasing and finite")]
    BadBreakpoints,
    #[error("path values must be finite")]
    NonFiniteValue,
    #[error("path span [{t_min}, {t_max}] must contain t = 0")]
    SpanExcludesOrigin { t_min: f64, t_max: f64 },
    #[error("range level r must be nonnegative, got {0}")]
    NegativeRange(f64),
    #[error("time {t} outside the path span [{t_min}, {t_max}]")]
    OutOfSpan { t: f64, t_min: f64, t_max: f64 },
    #[error("grid spec invalid: {0}")]
    BadGridSpec(&'static str),
}

/// A continuous path given by breakpoints, linear in between.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearPath {
    ts: Vec<f64>,
    vs: Vec<f64>,
}

impl PiecewiseLinearPath {
    /// Validates strictly increasing finite times, finite values, and a span
    /// containing `t = 0`.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, PathError> {
        if points.len() < 2 {
            return Err(PathError::TooFewBreakpoints);
        }
        for w in points.windows(2) {
            if !(w[0].0.is_finite() && w[1].0.is_finite() && w[0].0 < w[1].0) {
                return Err(PathError::BadBreakpoints);
            }
        }
        if points.iter().any(|&(_, v)| !v.is_finite()) {
            return Err(PathError::NonFiniteValue);
        }
        let (t_min, t_max) = (points[0].0, points[points.len() - 1].0);
        if t_min > 0.0 || t_max < 0.0 {
            return Err(PathError::SpanExcludesOrigin { t_min, t_max });
        }
        let (ts, vs) = points.into_iter().unzip();
        Ok(Self { ts, vs })
    }

    pub fn t_min(&self) -> f64 {
        self.ts[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.ts.last().expect("non-empty")
    }

    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> &[f64] {
        &self.ts
    }

    pub fn values(&self) -> &[f64] {
        &self.vs
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.ts.iter().copied().zip(self.vs.iter().copied())
    }

    /// Value at `t` by linear interpolation; exact at breakpoints.
    pub fn value_at(&self, t: f64) -> Result<f64, PathError> {
        if !(t >= self.t_min() && t <= self.t_max()) {
            return Err(PathError::OutOfSpan {
                t,
                t_min: self.t_min(),
                t_max: self.t_max(),
            });
        }
        match self
            .ts
            .binary_search_by(|probe| probe.partial_cmp(&t).expect("finite"))
        {
            Ok(i) => Ok(self.vs[i]),
            Err(i) => {
                let (t0, t1) = (self.ts[i - 1], self.ts[i]);
                let (v0, v1) = (self.vs[i - 1], self.vs[i]);
                Ok(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
            }
        }
    }

    /// First `t ≥ 0` with `Z(t) − min_{[0,t]} Z ≥ r`, solved exactly on the
    /// crossing segment; `None` when the window never reaches range `r`.
    pub fn range_first_passage(&self, r: f64) -> Result<Option<f64>, PathError> {
        if r < 0.0 || !r.is_finite() {
            return Err(PathError::NegativeRange(r));
        }
        if r == 0.0 {
            return Ok(Some(0.0));
        }
        let start = self.value_at(0.0)?;
        let mut run_min = start;
        let mut prev_t = 0.0;
        let mut prev_v = start;
        let first = self.ts.partition_point(|&t| t <= 0.0);
        for i in first..self.ts.len() {
            let (t1, v1) = (self.ts[i], self.vs[i]);
            if v1 > prev_v {
                // rising segment: the running min is frozen at run_min
                let target = run_min + r;
                if v1 >= target {
                    let frac = if prev_v >= target {
                        0.0
                    } else {
                        (target - prev_v) / (v1 - prev_v)
                    };
                    return Ok(Some(prev_t + frac * (t1 - prev_t)));
                }
            }
            run_min = run_min.min(v1);
            prev_t = t1;
            prev_v = v1;
        }
        Ok(None)
    }

    /// Exact piecewise-linear running minimum and maximum of the restriction
    /// to `[0, t_max]`.
    pub fn running_extremes(&self) -> Result<(Self, Self), PathError> {
        let start = self.value_at(0.0)?;
        let first = self.ts.partition_point(|&t| t <= 0.0);
        let mut min_pts = vec![(0.0, start)];
        let mut max_pts = vec![(0.0, start)];
        let mut run_min = start;
        let mut run_max = start;
        let mut prev_t = 0.0;
        let mut prev_v = start;
        for i in first..self.ts.len() {
            let (t1, v1) = (self.ts[i], self.vs[i]);
            if v1 < run_min {
                // crossing point where the segment dips below the old minimum
                if prev_v > run_min {
                    let frac = (run_min - prev_v) / (v1 - prev_v);
                    min_pts.push((prev_t + frac * (t1 - prev_t), run_min));
                }
                min_pts.push((t1, v1));
                run_min = v1;
            } else {
                min_pts.push((t1, run_min));
            }
            if v1 > run_max {
                if prev_v < run_max {
                    let frac = (run_max - prev_v) / (v1 - prev_v);
                    max_pts.push((prev_t + frac * (t1 - prev_t), run_max));
                }
                max_pts.push((t1, v1));
                run_max = v1;
            } else {
                max_pts.push((t1, run_max));
            }
            prev_t = t1;
            prev_v = v1;
        }
        Ok((Self::from_dedup(min_pts)?, Self::from_dedup(max_pts)?))
    }

    fn from_dedup(points: Vec<(f64, f64)>) -> Result<Self, PathError> {
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(points.len());
        for (t, v) in points {
            if let Some(&(lt, _)) = out.last() {
                if t <= lt {
                    continue;
                }
            }
            out.push((t, v));
        }
        if out.len() < 2 {
            // single-point restriction: widen to a flat stub so the type
            // invariants hold
            let (t, v) = out[0];
            out.push((t + 1e-12, v));
        }
        Self::new_unchecked_span(out)
    }

    fn new_unchecked_span(points: Vec<(f64, f64)>) -> Result<Self, PathError> {
        if points.len() < 2 {
            return Err(PathError::TooFewBreakpoints);
        }
        for w in points.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(PathError::BadBreakpoints);
            }
        }
        let (ts, vs) = points.into_iter().unzip();
        Ok(Self { ts, vs })
    }
}

/// Grid on which two-sided Brownian motion is sampled.
///
/// With `stretch = 0` the grid is uniform with step `dt`. With
/// `stretch = κ > 0` the cell width grows as `max(dt, κ·|t|)`, which keeps
/// the relative height resolution uniform across scales and makes horizons
/// of 10^8 and beyond affordable (valley structure at scale `x` lives at
/// distances of order `x²`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BmGridSpec {
    pub dt: f64,
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default = "default_sigma_scale")]
    pub sigma_scale: f64,
    #[serde(default)]
    pub stretch: f64,
}

fn default_sigma_scale() -> f64 {
    1.0
}

impl BmGridSpec {
    pub fn uniform(dt: f64, t_min: f64, t_max: f64) -> Self {
        Self {
            dt,
            t_min,
            t_max,
            sigma_scale: 1.0,
            stretch: 0.0,
        }
    }

    pub fn stretched(dt: f64, t_min: f64, t_max: f64, stretch: f64) -> Self {
        Self {
            dt,
            t_min,
            t_max,
            sigma_scale: 1.0,
            stretch,
        }
    }

    pub fn validate(&self) -> Result<(), PathError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(PathError::BadGridSpec("dt must be positive"));
        }
        if !(self.t_min <= 0.0 && self.t_max >= 0.0 && self.t_max > self.t_min) {
            return Err(PathError::BadGridSpec(
                "need t_min <= 0 <= t_max with t_min < t_max",
            ));
        }
        if !(self.sigma_scale.is_finite() && self.sigma_scale > 0.0) {
            return Err(PathError::BadGridSpec("sigma_scale must be positive"));
        }
        if !(self.stretch.is_finite() && self.stretch >= 0.0) {
            return Err(PathError::BadGridSpec("stretch must be nonnegative"));
        }
        Ok(())
    }

    fn half_grid(&self, horizon: f64) -> Vec<f64> {
        let mut ts = vec![0.0];
        let mut t = 0.0;
        while t < horizon {
            let cell = self.dt.max(self.stretch * t);
            t = (t + cell).min(horizon);
            ts.push(t);
        }
        ts
    }
}

/// Samples two-sided Brownian motion on the grid: independent Gaussian
/// increments of variance `Δt · sigma_scale²` per cell, two independent
/// halves glued at `W(0) = 0`, linear interpolation in between.
///
/// The halves use sub-seeds derived from the master seed with the fixed
/// tags [`tags::BM_LEFT`] and [`tags::BM_RIGHT`].
pub fn sample_two_sided_bm(spec: &BmGridSpec, seed: u64) -> Result<PiecewiseLinearPath, PathError> {
    spec.validate()?;
    let mut points = Vec::new();
    if spec.t_min < 0.0 {
        let grid = spec.half_grid(-spec.t_min);
        let mut rng = seeds::rng_from_seed(seeds::child_seed(seed, tags::BM_LEFT, 0));
        let mut value = 0.0;
        let mut left = Vec::with_capacity(grid.len() - 1);
        for w in grid.windows(2) {
            let dt = w[1] - w[0];
            let z: f64 = rng.sample(StandardNormal);
            value += z * (dt.sqrt() * spec.sigma_scale);
            left.push((-w[1], value));
        }
        left.reverse();
        points.extend(left);
    }
    points.push((0.0, 0.0));
    if spec.t_max > 0.0 {
        let grid = spec.half_grid(spec.t_max);
        let mut rng = seeds::rng_from_seed(seeds::child_seed(seed, tags::BM_RIGHT, 0));
        let mut value = 0.0;
        for w in grid.windows(2) {
            let dt = w[1] - w[0];
            let z: f64 = rng.sample(StandardNormal);
            value += z * (dt.sqrt() * spec.sigma_scale);
            points.push((w[1], value));
        }
    }
    PiecewiseLinearPath::new(points)
}

/// The potential as a continuous path: breakpoints at the integer sites.
pub fn interpolate_potential(pot: &Potential) -> PiecewiseLinearPath {
    let points = pot
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| ((pot.offset + i as i64) as f64, v))
        .collect();
    PiecewiseLinearPath::new(points).expect("potential windows contain 0 and are finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{potential, Environment};
    use crate::stats::{ks_test_two_sample, mean_var};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(PiecewiseLinearPath::new(vec![(0.0, 1.0)]).is_err());
        assert!(PiecewiseLinearPath::new(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(PiecewiseLinearPath::new(vec![(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(PiecewiseLinearPath::new(vec![(-1.0, f64::NAN), (2.0, 2.0)]).is_err());
    }

    #[test]
    fn interpolation_exact_at_breakpoints_linear_between() {
        let p = PiecewiseLinearPath::new(vec![(-1.0, 2.0), (1.0, 4.0), (2.0, 0.0)]).unwrap();
        assert_eq!(p.value_at(-1.0).unwrap(), 2.0);
        assert_eq!(p.value_at(1.0).unwrap(), 4.0);
        assert_abs_diff_eq!(p.value_at(0.0).unwrap(), 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.value_at(1.5).unwrap(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn bm_variance_at_unit_time() {
        let spec = BmGridSpec::uniform(1e-3, 0.0, 1.0);
        let n = 10_000;
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let path = sample_two_sided_bm(&spec, i as u64).unwrap();
                path.value_at(1.0).unwrap()
            })
            .collect();
        let (mean, var) = mean_var(&samples);
        // chi-square sampling error of the variance: sd ≈ var·sqrt(2/n)
        let se_var = (2.0 / n as f64).sqrt();
        assert!(mean.abs() < 4.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 4.0 * se_var, "var {var}");
    }

    #[test]
    fn bm_starts_at_zero_and_is_deterministic() {
        let spec = BmGridSpec::uniform(1e-2, -2.0, 2.0);
        let a = sample_two_sided_bm(&spec, 42).unwrap();
        let b = sample_two_sided_bm(&spec, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.value_at(0.0).unwrap(), 0.0);
    }

    #[test]
    fn bm_covariance_is_min_of_times() {
        let spec = BmGridSpec::uniform(1e-2, 0.0, 1.0);
        let n = 10_000usize;
        let mut cross = 0.0;
        for i in 0..n {
            let path = sample_two_sided_bm(&spec, 900 + i as u64).unwrap();
            cross += path.value_at(0.5).unwrap() * path.value_at(1.0).unwrap();
        }
        let cov = cross / n as f64;
        // Var(W(0.5)·W(1)) ≈ 1.25; allow 4 standard errors on the mean
        let se = (1.3f64 / n as f64).sqrt();
        assert!((cov - 0.5).abs() < 4.0 * se, "cov {cov}");
    }

    #[test]
    fn bm_scaling_matches_in_law() {
        // W(r t)/sqrt(r) at matched grid points vs W(t): two-sample KS
        let r = 4.0;
        let base = BmGridSpec::uniform(1e-3, 0.0, 1.0);
        let scaled = BmGridSpec::uniform(1e-3 * r, 0.0, r);
        let n = 2000;
        let a: Vec<f64> = (0..n)
            .map(|i| {
                sample_two_sided_bm(&base, i as u64)
                    .unwrap()
                    .value_at(1.0)
                    .unwrap()
            })
            .collect();
        let b: Vec<f64> = (0..n)
            .map(|i| {
                sample_two_sided_bm(&scaled, 10_000 + i as u64)
                    .unwrap()
                    .value_at(r)
                    .unwrap()
                    / r.sqrt()
            })
            .collect();
        let (_, p) = ks_test_two_sample(&a, &b);
        assert!(p > 0.001, "KS p = {p}");
    }

    #[test]
    fn stretched_grid_has_logarithmic_point_count() {
        let spec = BmGridSpec::stretched(1e-3, 0.0, 1e8, 1e-3);
        spec.validate().unwrap();
        let path = sample_two_sided_bm(&spec, 3).unwrap();
        assert!(path.len() < 40_000, "len {}", path.len());
        assert_eq!(path.t_max(), 1e8);
    }

    #[test]
    fn interpolate_constant_potential_is_flat() {
        let env = Environment::constant(0.5, 3).unwrap();
        let path = interpolate_potential(&potential(&env));
        assert!(path.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn interpolate_drift_potential_is_straight_line() {
        let env = Environment::constant(0.3, 4).unwrap();
        let path = interpolate_potential(&potential(&env));
        let step = (7.0f64 / 3.0).ln();
        // slope log(7/3) on the right half, exact at half-integer points too
        assert_abs_diff_eq!(path.value_at(2.5).unwrap(), 2.5 * step, epsilon = 1e-12);
    }

    #[test]
    fn potential_round_trip_at_integers() {
        let env = Environment::constant(0.3, 4).unwrap();
        let pot = potential(&env);
        let path = interpolate_potential(&pot);
        for n in -4..=4i64 {
            assert_eq!(path.value_at(n as f64).unwrap(), pot.value(n).unwrap());
        }
    }

    #[test]
    fn range_first_passage_trivial_cases() {
        let rising = PiecewiseLinearPath::new(vec![(0.0, 0.0), (10.0, 10.0)]).unwrap();
        assert_eq!(rising.range_first_passage(0.0).unwrap(), Some(0.0));
        assert_abs_diff_eq!(
            rising.range_first_passage(2.0).unwrap().unwrap(),
            2.0,
            epsilon = 1e-12
        );
        let falling = PiecewiseLinearPath::new(vec![(0.0, 0.0), (10.0, -10.0)]).unwrap();
        assert_eq!(falling.range_first_passage(2.0).unwrap(), None);
        assert!(falling.range_first_passage(-1.0).is_err());
    }

    #[test]
    fn range_first_passage_tail_bounded_by_reflection_estimate() {
        // P(d(r) > T) <= 2r/sqrt(T), checked by Monte Carlo where the bound
        // is informative
        let (r, t_hor) = (0.8, 9.0);
        let spec = BmGridSpec::uniform(1e-3, 0.0, t_hor);
        let n = 4000u64;
        let mut exceed = 0u64;
        for i in 0..n {
            let d = sample_two_sided_bm(&spec, 31_000 + i)
                .unwrap()
                .range_first_passage(r)
                .unwrap();
            if d.is_none() {
                exceed += 1;
            }
        }
        let bound = 2.0 * r / t_hor.sqrt();
        let freq = exceed as f64 / n as f64;
        let se = (bound * (1.0 - bound) / n as f64).sqrt();
        assert!(freq <= bound + 4.0 * se, "freq {freq} vs bound {bound}");
    }

    #[test]
    fn running_extremes_of_v_shape() {
        let v = PiecewiseLinearPath::new(vec![(0.0, 2.0), (1.0, 0.0), (2.0, 2.0)]).unwrap();
        let (min_p, max_p) = v.running_extremes().unwrap();
        assert_eq!(min_p.value_at(0.5).unwrap(), 1.0);
        assert_eq!(min_p.value_at(1.5).unwrap(), 0.0);
        assert_eq!(max_p.value_at(0.5).unwrap(), 2.0);
        assert_eq!(max_p.value_at(2.0).unwrap(), 2.0);
    }

    #[test]
    fn running_extremes_of_monotone_path() {
        let up = PiecewiseLinearPath::new(vec![(0.0, 0.0), (3.0, 3.0)]).unwrap();
        let (min_p, max_p) = up.running_extremes().unwrap();
        assert_eq!(min_p.value_at(2.0).unwrap(), 0.0);
        assert_eq!(max_p.value_at(2.0).unwrap(), 2.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn running_extremes_match_grid_scan(seed in any::<u64>()) {
            let spec = BmGridSpec::uniform(1e-2, 0.0, 2.0);
            let path = sample_two_sided_bm(&spec, seed).unwrap();
            let (min_p, max_p) = path.running_extremes().unwrap();
            let mut run_min = f64::INFINITY;
            let mut run_max = f64::NEG_INFINITY;
            for (t, v) in path.breakpoints() {
                if t < 0.0 { continue; }
                run_min = run_min.min(v);
                run_max = run_max.max(v);
                prop_assert!((min_p.value_at(t).unwrap() - run_min).abs() < 1e-12);
                prop_assert!((max_p.value_at(t).unwrap() - run_max).abs() < 1e-12);
                prop_assert!(min_p.value_at(t).unwrap() <= v + 1e-12);
            }
        }

        #[test]
        fn range_first_passage_monotone_in_r(seed in any::<u64>()) {
            let spec = BmGridSpec::uniform(1e-2, 0.0, 4.0);
            let path = sample_two_sided_bm(&spec, seed).unwrap();
            let mut last = Some(0.0);
            for k in 1..=8 {
                let r = k as f64 * 0.25;
                let d = path.range_first_passage(r).unwrap();
                match (last, d) {
                    (Some(a), Some(b)) => prop_assert!(b >= a),
                    (None, Some(_)) => prop_assert!(false, "passage reappeared after none"),
                    _ => {}
                }
                last = d;
            }
        }
    }
}
