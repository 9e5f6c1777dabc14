//! Small statistics toolbox used by the verification suites: Wilson
//! intervals, compensated summation, Kolmogorov–Smirnov and chi-square
//! goodness-of-fit tests, Pearson correlation and ordinary least squares.

use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

/// z quantile for a two-sided 95% interval.
pub const Z_95: f64 = 1.959963984540054;

/// Wilson score interval for a binomial proportion.
///
/// Chosen over Wald because its coverage stays honest for small estimated
/// probabilities at large trial counts.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0, "wilson_interval needs at least one trial");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = p + z2 / (2.0 * n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (
        ((centre - half) / denom).max(0.0),
        ((centre + half) / denom).min(1.0),
    )
}

/// Standard error of a binomial frequency estimate at probability `p`.
pub fn binomial_se(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Kahan compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Sample mean and unbiased variance.
pub fn mean_var(data: &[f64]) -> (f64, f64) {
    assert!(!data.is_empty());
    let n = data.len() as f64;
    let mut acc = CompensatedSum::new();
    for &x in data {
        acc.add(x);
    }
    let mean = acc.value() / n;
    if data.len() < 2 {
        return (mean, 0.0);
    }
    let mut sq = CompensatedSum::new();
    for &x in data {
        sq.add((x - mean) * (x - mean));
    }
    (mean, sq.value() / (n - 1.0))
}

/// Pearson correlation coefficient.
pub fn pearson_correlation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    assert!(a.len() >= 2);
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let mut cov = CompensatedSum::new();
    for (&x, &y) in a.iter().zip(b) {
        cov.add((x - ma) * (y - mb));
    }
    cov.value() / ((a.len() - 1) as f64 * (va * vb).sqrt())
}

/// Survival function of the Kolmogorov distribution,
/// `Q(t) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2 k² t²)`.
pub fn kolmogorov_sf(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * t * t).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
///
/// Returns `(d, p)` with the asymptotic p-value using Stephens' small-sample
/// adjustment.
pub fn ks_test_cdf<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> (f64, f64) {
    assert!(data.len() >= 2);
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN in KS sample"));
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    let sn = n.sqrt();
    (d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d))
}

/// Two-sample Kolmogorov–Smirnov test; returns `(d, p)`.
pub fn ks_test_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert!(a.len() >= 2 && b.len() >= 2);
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|u, v| u.partial_cmp(v).expect("NaN in KS sample"));
    ys.sort_by(|u, v| u.partial_cmp(v).expect("NaN in KS sample"));
    let (n, m) = (xs.len(), ys.len());
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = xs[i];
        let y = ys[j];
        if x <= y {
            i += 1;
        }
        if y <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let sn = ne.sqrt();
    (d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d))
}

/// Result of a chi-square goodness-of-fit test.
#[derive(Debug, Clone, Copy)]
pub struct ChiSquareGof {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Chi-square goodness of fit of observed counts against expected counts.
///
/// Bins with expected count below `min_expected` are merged into their right
/// neighbour (the final bin absorbs any remainder). The parameters of the
/// null are assumed known, so dof = bins − 1.
pub fn chi_square_gof(observed: &[f64], expected: &[f64], min_expected: f64) -> ChiSquareGof {
    assert_eq!(observed.len(), expected.len());
    let mut obs_bins = Vec::new();
    let mut exp_bins = Vec::new();
    let mut o_acc = 0.0;
    let mut e_acc = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        o_acc += o;
        e_acc += e;
        if e_acc >= min_expected {
            obs_bins.push(o_acc);
            exp_bins.push(e_acc);
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        if let (Some(o), Some(e)) = (obs_bins.last_mut(), exp_bins.last_mut()) {
            *o += o_acc;
            *e += e_acc;
        } else {
            obs_bins.push(o_acc);
            exp_bins.push(e_acc);
        }
    }
    if obs_bins.len() < 2 {
        return ChiSquareGof {
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
        };
    }
    let statistic: f64 = obs_bins
        .iter()
        .zip(&exp_bins)
        .map(|(&o, &e)| (o - e) * (o - e) / e)
        .sum();
    let dof = obs_bins.len() - 1;
    let chi = ChiSquared::new(dof as f64).expect("positive dof");
    ChiSquareGof {
        statistic,
        dof,
        p_value: 1.0 - chi.cdf(statistic),
    }
}

/// Ordinary least squares fit of `y` against `x`.
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr_slope: f64,
    pub r_squared: f64,
    pub n: usize,
}

impl OlsFit {
    /// Two-sided 95% confidence interval for the slope (Student t with
    /// n − 2 degrees of freedom).
    pub fn slope_ci95(&self) -> (f64, f64) {
        let dof = (self.n - 2) as f64;
        let t = if dof > 0.0 {
            StudentsT::new(0.0, 1.0, dof)
                .expect("valid dof")
                .inverse_cdf(0.975)
        } else {
            f64::INFINITY
        };
        (
            self.slope - t * self.stderr_slope,
            self.slope + t * self.stderr_slope,
        )
    }
}

pub fn ols_fit(x: &[f64], y: &[f64]) -> OlsFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|&v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(&u, &v)| (u - mx) * (v - my)).sum();
    let syy: f64 = y.iter().map(|&v| (v - my) * (v - my)).sum();
    assert!(sxx > 0.0, "degenerate abscissae in OLS");
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&u, &v)| {
            let r = v - (intercept + slope * u);
            r * r
        })
        .sum();
    let dof = x.len().saturating_sub(2);
    let stderr_slope = if dof > 0 {
        (ss_res / dof as f64 / sxx).sqrt()
    } else {
        0.0
    };
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    OlsFit {
        slope,
        intercept,
        stderr_slope,
        r_squared,
        n: x.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn wilson_interval_brackets_point_estimate() {
        let (lo, hi) = wilson_interval(30, 100, Z_95);
        assert!(lo < 0.3 && 0.3 < hi);
        assert!(lo > 0.0 && hi < 1.0);
    }

    #[test]
    fn wilson_interval_extreme_counts_stay_in_unit_interval() {
        let (lo, lo_hi) = wilson_interval(0, 50, Z_95);
        let (hi_lo, hi) = wilson_interval(50, 50, Z_95);
        assert!((0.0..1e-12).contains(&lo));
        assert!((1.0 - 1e-12..=1.0).contains(&hi));
        assert!(lo_hi > 0.0 && lo_hi < 0.2);
        assert!(hi_lo > 0.8 && hi_lo < 1.0);
    }

    #[test]
    fn compensated_sum_beats_naive_on_cancellation() {
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        assert_abs_diff_eq!(acc.value(), 1.0 + 1e-12, epsilon = 1e-15);
    }

    #[test]
    fn ks_uniform_sample_accepts_uniform_cdf() {
        // deterministic low-discrepancy sample
        let data: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let (d, p) = ks_test_cdf(&data, |x| x.clamp(0.0, 1.0));
        assert!(d < 0.01);
        assert!(p > 0.9);
    }

    #[test]
    fn ks_two_sample_detects_shift() {
        let a: Vec<f64> = (0..500).map(|i| i as f64 / 500.0).collect();
        let b: Vec<f64> = (0..500).map(|i| i as f64 / 500.0 + 0.5).collect();
        let (d, p) = ks_test_two_sample(&a, &b);
        assert!(d > 0.4);
        assert!(p < 1e-6);
    }

    #[test]
    fn chi_square_exact_match_has_p_one() {
        let obs = [10.0, 20.0, 30.0, 40.0];
        let res = chi_square_gof(&obs, &obs, 5.0);
        assert_eq!(res.statistic, 0.0);
        assert!(res.p_value > 0.999);
    }

    #[test]
    fn chi_square_merges_sparse_bins() {
        let obs = [50.0, 1.0, 1.0, 1.0, 47.0];
        let exp = [50.0, 1.0, 1.0, 1.0, 47.0];
        let res = chi_square_gof(&obs, &exp, 5.0);
        assert!(res.dof < 4);
    }

    #[test]
    fn ols_recovers_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let fit = ols_fit(&x, &y);
        assert_abs_diff_eq!(fit.slope, 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
        assert!(fit.stderr_slope < 1e-10);
    }

    #[test]
    fn pearson_of_identical_series_is_one() {
        let a = [1.0, 2.0, 4.0, 8.0];
        assert_abs_diff_eq!(pearson_correlation(&a, &a), 1.0, epsilon = 1e-12);
    }
}
