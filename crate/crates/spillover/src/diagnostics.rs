//! Descriptive statistics, normality, and stationarity diagnostics for
//! return series.
//!
//! Conventions shared by the tests:
//!
//! - Skewness and kurtosis are moment ratios m3 / m2^{3/2} and m4 / m2^2
//!   with biased central moments (divisor n); kurtosis is raw, not excess.
//! - Unit-root regressions include a constant and no trend. The
//!   Dickey-Fuller lag order is picked by AIC on a common sample, and
//!   Dickey-Fuller / Phillips-Perron critical values come from MacKinnon's
//!   (2010) response surface evaluated at the regression sample size.
//! - Long-run variances use the Bartlett kernel: gamma_0 +
//!   2 sum_{j<=q} (1 - j/(q+1)) gamma_j.
//! - Every test reports its statistic, the 1/5/10% critical values, the
//!   rejection tail, and the strongest level at which it rejects.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{Cholesky, DMatrix, DVector};
use thiserror::Error;

use crate::ingest::ReturnPanel;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("too few observations: need at least {needed}, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("series {0:?} has no variation")]
    DegenerateSeries(String),
    #[error("singular regression in {0}")]
    SingularRegression(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Location, dispersion, and shape of one series.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptiveStats {
    pub name: String,
    pub n_obs: usize,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (divisor n - 1).
    pub std_dev: f64,
    pub skewness: f64,
    /// Raw kurtosis; 3 for a normal distribution.
    pub kurtosis: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SignificanceLevel {
    OnePercent,
    FivePercent,
    TenPercent,
}

impl SignificanceLevel {
    pub fn alpha(&self) -> f64 {
        match self {
            SignificanceLevel::OnePercent => 0.01,
            SignificanceLevel::FivePercent => 0.05,
            SignificanceLevel::TenPercent => 0.10,
        }
    }
}

impl fmt::Display for SignificanceLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignificanceLevel::OnePercent => write!(f, "1%"),
            SignificanceLevel::FivePercent => write!(f, "5%"),
            SignificanceLevel::TenPercent => write!(f, "10%"),
        }
    }
}

/// Which side of the critical values rejects the null.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    Left,
    Right,
}

/// Outcome of one hypothesis test.
#[derive(Debug, Clone)]
pub struct TestResult {
    pub test_name: String,
    pub statistic: f64,
    /// Critical values ordered strongest first: 1%, 5%, 10%.
    pub critical_values: Vec<(SignificanceLevel, f64)>,
    pub tail: Tail,
    /// Strongest level at which the null is rejected, if any.
    pub rejected_at: Option<SignificanceLevel>,
    /// Auxiliary quantities (lag orders, bandwidths, sample sizes, ...).
    pub nuisance: BTreeMap<String, f64>,
}

impl TestResult {
    fn new(
        test_name: &str,
        statistic: f64,
        critical_values: Vec<(SignificanceLevel, f64)>,
        tail: Tail,
        nuisance: BTreeMap<String, f64>,
    ) -> Self {
        let mut result = TestResult {
            test_name: test_name.to_string(),
            statistic,
            critical_values,
            tail,
            rejected_at: None,
            nuisance,
        };
        result.rejected_at = result.recompute_rejection();
        result
    }

    /// Re-derives `rejected_at` from the stored statistic and critical
    /// values; equals the stored field by construction.
    pub fn recompute_rejection(&self) -> Option<SignificanceLevel> {
        let mut strongest: Option<SignificanceLevel> = None;
        for (level, cv) in &self.critical_values {
            let rejects = match self.tail {
                Tail::Left => self.statistic < *cv,
                Tail::Right => self.statistic > *cv,
            };
            if rejects {
                strongest = Some(match strongest {
                    None => *level,
                    Some(s) => s.min(*level),
                });
            }
        }
        strongest
    }
}

fn central_moments(series: &[f64]) -> (f64, f64, f64, f64) {
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in series {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (mean, m2 / n, m3 / n, m4 / n)
}

fn median(series: &[f64]) -> f64 {
    let mut sorted = series.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Moments and shape statistics per series. Needs at least 4 observations
/// and nonzero variance in every series.
pub fn descriptive_stats(
    panel: &ReturnPanel,
) -> Result<Vec<DescriptiveStats>, DiagnosticsError> {
    let t = panel.n_obs();
    if t < 4 {
        return Err(DiagnosticsError::TooFewObservations { needed: 4, got: t });
    }
    let mut out = Vec::with_capacity(panel.n_series());
    for (idx, name) in panel.names().iter().enumerate() {
        let series = panel.series(idx);
        let (mean, m2, m3, m4) = central_moments(&series);
        if m2 <= 0.0 {
            return Err(DiagnosticsError::DegenerateSeries(name.clone()));
        }
        out.push(DescriptiveStats {
            name: name.clone(),
            n_obs: t,
            mean,
            median: median(&series),
            std_dev: (m2 * t as f64 / (t as f64 - 1.0)).sqrt(),
            skewness: m3 / m2.powf(1.5),
            kurtosis: m4 / (m2 * m2),
        });
    }
    Ok(out)
}

/// Jarque-Bera statistic from a sample size and precomputed shape
/// statistics: n/6 (S^2 + (K - 3)^2 / 4) with raw kurtosis K.
pub fn jarque_bera_statistic(n_obs: usize, skewness: f64, kurtosis: f64) -> f64 {
    let k = kurtosis - 3.0;
    n_obs as f64 / 6.0 * (skewness * skewness + k * k / 4.0)
}

/// Chi-square(2) upper-tail critical values.
const JB_CRITICAL: [(SignificanceLevel, f64); 3] = [
    (SignificanceLevel::OnePercent, 9.210340),
    (SignificanceLevel::FivePercent, 5.991465),
    (SignificanceLevel::TenPercent, 4.605170),
];

/// Jarque-Bera normality test; the null is normal shape.
pub fn jarque_bera(series: &[f64], name: &str) -> Result<TestResult, DiagnosticsError> {
    let n = series.len();
    if n < 4 {
        return Err(DiagnosticsError::TooFewObservations { needed: 4, got: n });
    }
    let (_, m2, m3, m4) = central_moments(series);
    if m2 <= 0.0 {
        return Err(DiagnosticsError::DegenerateSeries(name.to_string()));
    }
    let skewness = m3 / m2.powf(1.5);
    let kurtosis = m4 / (m2 * m2);
    let statistic = jarque_bera_statistic(n, skewness, kurtosis);
    let mut nuisance = BTreeMap::new();
    nuisance.insert("skewness".to_string(), skewness);
    nuisance.insert("kurtosis".to_string(), kurtosis);
    nuisance.insert("nobs".to_string(), n as f64);
    Ok(TestResult::new(
        "jarque_bera",
        statistic,
        JB_CRITICAL.to_vec(),
        Tail::Right,
        nuisance,
    ))
}

/// MacKinnon (2010) response-surface coefficients for the constant-only
/// Dickey-Fuller distribution: cv = b0 + b1/n + b2/n^2 + b3/n^3.
const DF_SURFACE: [(SignificanceLevel, [f64; 4]); 3] = [
    (SignificanceLevel::OnePercent, [-3.43035, -6.5393, -16.786, -79.433]),
    (SignificanceLevel::FivePercent, [-2.86154, -2.8903, -4.234, -40.040]),
    (SignificanceLevel::TenPercent, [-2.56677, -1.5384, -2.809, 0.0]),
];

fn dickey_fuller_critical_values(n_obs: usize) -> Vec<(SignificanceLevel, f64)> {
    let n = n_obs as f64;
    DF_SURFACE
        .iter()
        .map(|(level, b)| (*level, b[0] + b[1] / n + b[2] / (n * n) + b[3] / (n * n * n)))
        .collect()
}

struct Ols {
    beta: DVector<f64>,
    residuals: DVector<f64>,
    /// Standard errors of the coefficients.
    se: DVector<f64>,
    /// Residual variance SSR / (n - k).
    s2: f64,
    ssr: f64,
}

fn ols(y: &DVector<f64>, x: &DMatrix<f64>, context: &str) -> Result<Ols, DiagnosticsError> {
    let n = x.nrows();
    let k = x.ncols();
    let xtx = x.transpose() * x;
    let chol = Cholesky::new(xtx)
        .ok_or_else(|| DiagnosticsError::SingularRegression(context.to_string()))?;
    let beta = chol.solve(&(x.transpose() * y));
    let residuals = y - x * &beta;
    let ssr = residuals.dot(&residuals);
    let s2 = ssr / (n - k) as f64;
    let xtx_inv = chol.inverse();
    let se = DVector::from_fn(k, |i, _| (s2 * xtx_inv[(i, i)]).sqrt());
    Ok(Ols { beta, residuals, se, s2, ssr })
}

/// Rule-of-thumb lag bound: floor(12 (T/100)^{1/4}).
pub fn default_adf_max_lag(n_obs: usize) -> usize {
    (12.0 * (n_obs as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Builds the Dickey-Fuller regression for `lag` augmentation terms, using
/// rows `start..` of the differenced series. Columns: intercept, lagged
/// level, then lagged differences.
fn df_design(
    series: &[f64],
    lag: usize,
    start: usize,
) -> (DVector<f64>, DMatrix<f64>) {
    let dy: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let n = dy.len() - start;
    let k = 2 + lag;
    let mut y = DVector::zeros(n);
    let mut x = DMatrix::zeros(n, k);
    for (row, t) in (start..dy.len()).enumerate() {
        y[row] = dy[t];
        x[(row, 0)] = 1.0;
        x[(row, 1)] = series[t];
        for j in 1..=lag {
            x[(row, 1 + j)] = dy[t - j];
        }
    }
    (y, x)
}

fn adf_pick_lag(series: &[f64], max_lag: usize) -> Result<usize, DiagnosticsError> {
    let n_dy = series.len() - 1;
    // Common sample across candidates: rows max_lag.. of the differences.
    let n_common = n_dy.saturating_sub(max_lag);
    if n_common < max_lag + 3 {
        return Err(DiagnosticsError::TooFewObservations {
            needed: 2 * max_lag + 4,
            got: series.len(),
        });
    }
    let mut best: Option<(usize, f64)> = None;
    for lag in 0..=max_lag {
        let (y, x) = df_design(series, lag, max_lag);
        let fit = ols(&y, &x, "dickey-fuller lag selection")?;
        let n = y.len() as f64;
        let k = x.ncols() as f64;
        let aic = (fit.ssr / n).ln() + 2.0 * k / n;
        if best.is_none_or(|(_, b)| aic < b) {
            best = Some((lag, aic));
        }
    }
    Ok(best.expect("at least lag 0").0)
}

/// Augmented Dickey-Fuller test with constant; the null is a unit root.
/// The augmentation lag is chosen by AIC over 0..=`max_lag` (default
/// [`default_adf_max_lag`]) on a common sample, then the test regression is
/// refit on the longest sample for that lag.
pub fn adf_test(series: &[f64], max_lag: Option<usize>) -> Result<TestResult, DiagnosticsError> {
    let t = series.len();
    if t < 20 {
        return Err(DiagnosticsError::TooFewObservations { needed: 20, got: t });
    }
    let max_lag = max_lag.unwrap_or_else(|| default_adf_max_lag(t));
    let lag = if max_lag == 0 { 0 } else { adf_pick_lag(series, max_lag)? };
    let (y, x) = df_design(series, lag, lag);
    let fit = ols(&y, &x, "dickey-fuller")?;
    let statistic = fit.beta[1] / fit.se[1];
    let n_obs = y.len();
    let mut nuisance = BTreeMap::new();
    nuisance.insert("lag".to_string(), lag as f64);
    nuisance.insert("nobs".to_string(), n_obs as f64);
    Ok(TestResult::new(
        "adf",
        statistic,
        dickey_fuller_critical_values(n_obs),
        Tail::Left,
        nuisance,
    ))
}

/// Bartlett-kernel long-run variance of a mean-adjusted-as-given series:
/// gamma_0 + 2 sum_{j<=q} (1 - j/(q+1)) gamma_j with gamma_j averaged
/// over the full length.
fn bartlett_long_run_variance(u: &[f64], bandwidth: usize) -> f64 {
    let n = u.len() as f64;
    let gamma = |j: usize| -> f64 {
        u.iter().skip(j).zip(u.iter()).map(|(a, b)| a * b).sum::<f64>() / n
    };
    let mut lrv = gamma(0);
    for j in 1..=bandwidth.min(u.len() - 1) {
        let weight = 1.0 - j as f64 / (bandwidth as f64 + 1.0);
        lrv += 2.0 * weight * gamma(j);
    }
    lrv
}

/// Phillips-Perron Z-tau test with constant; the null is a unit root.
/// Bandwidth defaults to floor(4 (n/100)^{2/9}) with n the regression
/// sample size. At bandwidth 0 the statistic equals the lag-0
/// Dickey-Fuller statistic.
pub fn pp_test(series: &[f64]) -> Result<TestResult, DiagnosticsError> {
    pp_test_with_bandwidth(series, None)
}

/// [`pp_test`] with an explicit Bartlett bandwidth.
pub fn pp_test_with_bandwidth(
    series: &[f64],
    bandwidth: Option<usize>,
) -> Result<TestResult, DiagnosticsError> {
    let t = series.len();
    if t < 20 {
        return Err(DiagnosticsError::TooFewObservations { needed: 20, got: t });
    }
    let (y, x) = df_design(series, 0, 0);
    let fit = ols(&y, &x, "phillips-perron")?;
    let n = y.len();
    let tau = fit.beta[1] / fit.se[1];
    let bandwidth =
        bandwidth.unwrap_or_else(|| (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize);
    let u: Vec<f64> = fit.residuals.iter().copied().collect();
    let gamma0 = fit.ssr / n as f64;
    let lambda2 = bartlett_long_run_variance(&u, bandwidth);
    let statistic = if bandwidth == 0 {
        tau
    } else {
        let lambda = lambda2.sqrt();
        let s = fit.s2.sqrt();
        (gamma0 / lambda2).sqrt() * tau
            - n as f64 * fit.se[1] * (lambda2 - gamma0) / (2.0 * lambda * s)
    };
    let mut nuisance = BTreeMap::new();
    nuisance.insert("bandwidth".to_string(), bandwidth as f64);
    nuisance.insert("nobs".to_string(), n as f64);
    Ok(TestResult::new(
        "pp",
        statistic,
        dickey_fuller_critical_values(n),
        Tail::Left,
        nuisance,
    ))
}

/// Level-stationarity critical values (right tail).
const KPSS_CRITICAL: [(SignificanceLevel, f64); 3] = [
    (SignificanceLevel::OnePercent, 0.739),
    (SignificanceLevel::FivePercent, 0.463),
    (SignificanceLevel::TenPercent, 0.347),
];

/// KPSS level-stationarity test; the null is stationarity around a
/// constant, so rejection is evidence of a unit root. Bandwidth defaults
/// to floor(4 (T/100)^{1/4}).
pub fn kpss_test(series: &[f64]) -> Result<TestResult, DiagnosticsError> {
    kpss_test_with_bandwidth(series, None)
}

/// [`kpss_test`] with an explicit Bartlett bandwidth.
pub fn kpss_test_with_bandwidth(
    series: &[f64],
    bandwidth: Option<usize>,
) -> Result<TestResult, DiagnosticsError> {
    let t = series.len();
    if t < 20 {
        return Err(DiagnosticsError::TooFewObservations { needed: 20, got: t });
    }
    let n = t as f64;
    let mean = series.iter().sum::<f64>() / n;
    let demeaned: Vec<f64> = series.iter().map(|v| v - mean).collect();
    if demeaned.iter().all(|v| *v == 0.0) {
        return Err(DiagnosticsError::DegenerateSeries("kpss input".to_string()));
    }
    let bandwidth =
        bandwidth.unwrap_or_else(|| (4.0 * (n / 100.0).powf(0.25)).floor() as usize);
    let lambda2 = bartlett_long_run_variance(&demeaned, bandwidth);
    let mut partial = 0.0;
    let mut sum_s2 = 0.0;
    for v in &demeaned {
        partial += v;
        sum_s2 += partial * partial;
    }
    let statistic = sum_s2 / (n * n) / lambda2;
    let mut nuisance = BTreeMap::new();
    nuisance.insert("bandwidth".to_string(), bandwidth as f64);
    nuisance.insert("nobs".to_string(), n);
    Ok(TestResult::new(
        "kpss",
        statistic,
        KPSS_CRITICAL.to_vec(),
        Tail::Right,
        nuisance,
    ))
}

/// Asymptotic critical values for the minimum-t intercept-break statistic
/// (left tail).
const ZA_CRITICAL: [(SignificanceLevel, f64); 3] = [
    (SignificanceLevel::OnePercent, -5.34),
    (SignificanceLevel::FivePercent, -4.80),
    (SignificanceLevel::TenPercent, -4.58),
];

/// Zivot-Andrews test allowing one intercept break under the alternative;
/// the null is a unit root with no break. The augmentation lag is chosen
/// once by the Dickey-Fuller AIC rule, then the unit-root t-statistic is
/// minimized over break dates in the middle 1 - 2 x `trim` of the sample.
pub fn za_test(series: &[f64]) -> Result<TestResult, DiagnosticsError> {
    za_test_with_trim(series, 0.15)
}

/// [`za_test`] with an explicit trimming fraction in (0, 0.5).
pub fn za_test_with_trim(series: &[f64], trim: f64) -> Result<TestResult, DiagnosticsError> {
    let t = series.len();
    if t < 50 {
        return Err(DiagnosticsError::TooFewObservations { needed: 50, got: t });
    }
    if !(trim > 0.0 && trim < 0.5) {
        return Err(DiagnosticsError::InvalidArgument(format!(
            "trim {trim} outside (0, 0.5)"
        )));
    }
    let max_lag = default_adf_max_lag(t);
    let lag = adf_pick_lag(series, max_lag)?;

    let first_break = ((trim * t as f64).ceil() as usize).max(lag + 2);
    let last_break = ((1.0 - trim) * t as f64).floor() as usize;
    if first_break >= last_break {
        return Err(DiagnosticsError::TooFewObservations { needed: 50, got: t });
    }

    let dy: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let start = lag; // row index into dy; current period is start + 1
    let n = dy.len() - start;
    let k = 3 + lag;
    let mut best: Option<(f64, usize)> = None;
    for tb in first_break..=last_break {
        let mut y = DVector::zeros(n);
        let mut x = DMatrix::zeros(n, k);
        for (row, s) in (start..dy.len()).enumerate() {
            // Current period of this row, as an index into `series`.
            let current = s + 1;
            y[row] = dy[s];
            x[(row, 0)] = 1.0;
            x[(row, 1)] = if current >= tb { 1.0 } else { 0.0 };
            x[(row, 2)] = series[s];
            for j in 1..=lag {
                x[(row, 2 + j)] = dy[s - j];
            }
        }
        let fit = ols(&y, &x, "zivot-andrews")?;
        let stat = fit.beta[2] / fit.se[2];
        if best.is_none_or(|(b, _)| stat < b) {
            best = Some((stat, tb));
        }
    }
    let (statistic, break_index) = best.expect("nonempty break range");
    let mut nuisance = BTreeMap::new();
    nuisance.insert("lag".to_string(), lag as f64);
    nuisance.insert("break_index".to_string(), break_index as f64);
    nuisance.insert("nobs".to_string(), n as f64);
    Ok(TestResult::new(
        "za",
        statistic,
        ZA_CRITICAL.to_vec(),
        Tail::Left,
        nuisance,
    ))
}

/// Pearson correlation matrix of the panel columns. Exactly symmetric with
/// a unit diagonal.
pub fn correlation_matrix(panel: &ReturnPanel) -> Result<DMatrix<f64>, DiagnosticsError> {
    let t = panel.n_obs();
    if t < 3 {
        return Err(DiagnosticsError::TooFewObservations { needed: 3, got: t });
    }
    let m = panel.n_series();
    let data = panel.returns();
    let means: Vec<f64> = (0..m).map(|j| data.column(j).sum() / t as f64).collect();
    let mut centered = data.clone();
    for j in 0..m {
        for i in 0..t {
            centered[(i, j)] -= means[j];
        }
    }
    let mut scale = vec![0.0_f64; m];
    for (j, s) in scale.iter_mut().enumerate() {
        *s = centered.column(j).norm();
        if *s == 0.0 {
            return Err(DiagnosticsError::DegenerateSeries(panel.names()[j].clone()));
        }
    }
    let mut corr = DMatrix::identity(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            let rho = centered.column(i).dot(&centered.column(j)) / (scale[i] * scale[j]);
            corr[(i, j)] = rho;
            corr[(j, i)] = rho;
        }
    }
    Ok(corr)
}
