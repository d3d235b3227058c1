//! Constant-parameter vector autoregression.
//!
//! Model: y_t = c + B_1 y_{t-1} + ... + B_r y_{t-r} + e_t with
//! e_t ~ (0, Sigma). Estimation is equation-by-equation OLS with an
//! intercept. Lag order can be fixed or chosen by AIC on a common sample.
//! Stability is judged by the spectral radius of the companion matrix, and
//! the moving-average representation y_t = sum_h A_h e_{t-h} is obtained
//! from the usual recursion A_0 = I, A_h = sum_i B_i A_{h-i}.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::ingest::{Month, ReturnPanel};

/// Observations discarded before a simulated sample is recorded.
pub const SIMULATION_BURN_IN: usize = 500;

/// Models with a companion spectral radius above 1 - this margin are
/// treated as unstable.
pub const STABILITY_MARGIN: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum VarError {
    #[error("insufficient data: lag {lag} with {n_series} series needs at least {needed} observations, got {got}")]
    InsufficientData { lag: usize, n_series: usize, needed: usize, got: usize },
    #[error("singular design matrix in OLS fit")]
    SingularDesign,
    #[error("lag order must be at least 1")]
    ZeroLag,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("innovation covariance is not symmetric")]
    AsymmetricCovariance,
    #[error("innovation covariance is not positive-definite")]
    NonPositiveDefiniteCovariance,
    #[error("model is unstable: companion spectral radius {0}")]
    UnstableModel(f64),
}

/// Estimated (or specified) VAR with innovation covariance.
#[derive(Debug, Clone)]
pub struct VarModel {
    names: Vec<String>,
    intercept: DVector<f64>,
    coefficients: Vec<DMatrix<f64>>,
    sigma: DMatrix<f64>,
}

impl VarModel {
    /// Validates shapes, requires at least one lag matrix, and requires
    /// `sigma` to be symmetric (to 1e-12, relative) and positive-definite.
    /// The stored covariance is the symmetrized (sigma + sigma')/2.
    pub fn new(
        names: Vec<String>,
        intercept: DVector<f64>,
        coefficients: Vec<DMatrix<f64>>,
        sigma: DMatrix<f64>,
    ) -> Result<Self, VarError> {
        let m = names.len();
        if m == 0 {
            return Err(VarError::ShapeMismatch("no series".to_string()));
        }
        if coefficients.is_empty() {
            return Err(VarError::ZeroLag);
        }
        if intercept.len() != m {
            return Err(VarError::ShapeMismatch(format!(
                "intercept has {} entries for {} series",
                intercept.len(),
                m
            )));
        }
        for (i, b) in coefficients.iter().enumerate() {
            if b.nrows() != m || b.ncols() != m {
                return Err(VarError::ShapeMismatch(format!(
                    "lag matrix {} is {}x{}, expected {m}x{m}",
                    i + 1,
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        if sigma.nrows() != m || sigma.ncols() != m {
            return Err(VarError::ShapeMismatch(format!(
                "covariance is {}x{}, expected {m}x{m}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        let scale = sigma.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        for i in 0..m {
            for j in (i + 1)..m {
                if (sigma[(i, j)] - sigma[(j, i)]).abs() > 1e-12 * scale {
                    return Err(VarError::AsymmetricCovariance);
                }
            }
        }
        let sigma = (&sigma + sigma.transpose()) * 0.5;
        if Cholesky::new(sigma.clone()).is_none() {
            return Err(VarError::NonPositiveDefiniteCovariance);
        }
        Ok(VarModel { names, intercept, coefficients, sigma })
    }

    pub fn n_series(&self) -> usize {
        self.names.len()
    }

    pub fn lag_order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn intercept(&self) -> &DVector<f64> {
        &self.intercept
    }

    /// Lag matrices B_1 .. B_r.
    pub fn coefficients(&self) -> &[DMatrix<f64>] {
        &self.coefficients
    }

    /// Innovation covariance (symmetric positive-definite).
    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// Companion matrix: lag matrices across the top block row, identity
    /// blocks on the subdiagonal.
    pub fn companion_matrix(&self) -> DMatrix<f64> {
        let m = self.n_series();
        let r = self.lag_order();
        let mut companion = DMatrix::zeros(m * r, m * r);
        for (i, b) in self.coefficients.iter().enumerate() {
            companion.view_mut((0, i * m), (m, m)).copy_from(b);
        }
        for i in 1..r {
            for j in 0..m {
                companion[(i * m + j, (i - 1) * m + j)] = 1.0;
            }
        }
        companion
    }

    /// Largest modulus among companion eigenvalues.
    pub fn spectral_radius(&self) -> f64 {
        self.companion_matrix()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Stable when the spectral radius is below 1 by at least
    /// [`STABILITY_MARGIN`].
    pub fn is_stable(&self) -> bool {
        self.spectral_radius() < 1.0 - STABILITY_MARGIN
    }
}

/// Per-equation OLS output on a target range, shared by the constant and
/// time-varying estimators.
pub(crate) struct OlsFit {
    /// K x M stacked coefficients; row 0 is the intercept, then lag 1
    /// coefficients for every series, then lag 2, and so on.
    pub beta: DMatrix<f64>,
    /// Degrees-of-freedom corrected residual covariance E'E / (n - K).
    pub sigma: DMatrix<f64>,
    /// (X'X)^{-1} of the common design matrix.
    pub xtx_inv: DMatrix<f64>,
    pub n_obs: usize,
}

/// Regression of rows `first_target..last_target` of `data` on an intercept
/// and `lag` own lags. `first_target` must be at least `lag`.
pub(crate) fn ols_on_range(
    data: &DMatrix<f64>,
    lag: usize,
    first_target: usize,
    last_target: usize,
) -> Result<OlsFit, VarError> {
    let m = data.ncols();
    if lag == 0 {
        return Err(VarError::ZeroLag);
    }
    assert!(first_target >= lag && last_target <= data.nrows());
    let k = 1 + m * lag;
    let n = last_target.saturating_sub(first_target);
    // One spare observation keeps the residual covariance divisor positive.
    if n < k + 1 {
        return Err(VarError::InsufficientData {
            lag,
            n_series: m,
            needed: lag + k + 1,
            got: lag + n,
        });
    }

    let mut x = DMatrix::zeros(n, k);
    let mut y = DMatrix::zeros(n, m);
    for (row, t) in (first_target..last_target).enumerate() {
        x[(row, 0)] = 1.0;
        for l in 1..=lag {
            for j in 0..m {
                x[(row, 1 + (l - 1) * m + j)] = data[(t - l, j)];
            }
        }
        for j in 0..m {
            y[(row, j)] = data[(t, j)];
        }
    }

    let xtx = x.transpose() * &x;
    let chol = Cholesky::new(xtx).ok_or(VarError::SingularDesign)?;
    let xty = x.transpose() * &y;
    let beta = chol.solve(&xty);
    let xtx_inv = chol.inverse();
    let residuals = &y - &x * &beta;
    let sigma = (residuals.transpose() * &residuals) / (n - k) as f64;
    Ok(OlsFit { beta, sigma, xtx_inv, n_obs: n })
}

/// Splits a K x M stacked coefficient matrix into intercept and lag blocks.
pub(crate) fn split_beta(
    beta: &DMatrix<f64>,
    m: usize,
    lag: usize,
) -> (DVector<f64>, Vec<DMatrix<f64>>) {
    let intercept = DVector::from_fn(m, |eq, _| beta[(0, eq)]);
    let coefficients = (1..=lag)
        .map(|l| DMatrix::from_fn(m, m, |eq, j| beta[(1 + (l - 1) * m + j, eq)]))
        .collect();
    (intercept, coefficients)
}

/// OLS fit of a VAR(`lag`) with intercept on the full panel.
pub fn fit_ols(panel: &ReturnPanel, lag: usize) -> Result<VarModel, VarError> {
    if lag == 0 {
        return Err(VarError::ZeroLag);
    }
    let data = panel.returns();
    let t = data.nrows();
    if t <= lag {
        let m = data.ncols();
        return Err(VarError::InsufficientData {
            lag,
            n_series: m,
            needed: lag + (1 + m * lag) + 1,
            got: t,
        });
    }
    let fit = ols_on_range(data, lag, lag, t)?;
    let (intercept, coefficients) = split_beta(&fit.beta, data.ncols(), lag);
    VarModel::new(panel.names().to_vec(), intercept, coefficients, fit.sigma)
}

/// AIC lag selection over 1..=`max_lag` on a common sample that drops the
/// first `max_lag` rows for every candidate. AIC uses the maximum-likelihood
/// covariance: ln det(E'E/n) + 2(r M^2 + M)/n. Ties go to the smaller lag.
pub fn select_lag_aic(panel: &ReturnPanel, max_lag: usize) -> Result<usize, VarError> {
    if max_lag == 0 {
        return Err(VarError::ZeroLag);
    }
    let data = panel.returns();
    let m = data.ncols();
    let t = data.nrows();
    let n = t.saturating_sub(max_lag);
    let k_max = 1 + m * max_lag;
    if n < k_max + 1 {
        return Err(VarError::InsufficientData {
            lag: max_lag,
            n_series: m,
            needed: max_lag + k_max + 1,
            got: t,
        });
    }

    let mut best: Option<(usize, f64)> = None;
    for lag in 1..=max_lag {
        let fit = ols_on_range(data, lag, max_lag, t)?;
        // Rebuild the ML covariance from the df-corrected one.
        let k = 1 + m * lag;
        let sigma_ml = &fit.sigma * ((fit.n_obs - k) as f64 / fit.n_obs as f64);
        let chol = Cholesky::new(sigma_ml).ok_or(VarError::SingularDesign)?;
        let ln_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let n_params = (lag * m * m + m) as f64;
        let aic = ln_det + 2.0 * n_params / fit.n_obs as f64;
        if best.is_none_or(|(_, b)| aic < b) {
            best = Some((lag, aic));
        }
    }
    Ok(best.expect("at least one candidate").0)
}

/// Moving-average coefficients A_0 .. A_{horizon-1}. A_0 = I and
/// A_h = sum_{i=1..min(h,r)} B_i A_{h-i}. `horizon` must be at least 1.
pub fn vma_coefficients(model: &VarModel, horizon: usize) -> Vec<DMatrix<f64>> {
    assert!(horizon >= 1, "horizon must be at least 1");
    let m = model.n_series();
    let r = model.lag_order();
    let mut out: Vec<DMatrix<f64>> = Vec::with_capacity(horizon);
    out.push(DMatrix::identity(m, m));
    for h in 1..horizon {
        let mut a = DMatrix::zeros(m, m);
        for i in 1..=r.min(h) {
            a += &model.coefficients()[i - 1] * &out[h - i];
        }
        out.push(a);
    }
    out
}

/// Simulates `length` observations from a stable model with Gaussian
/// innovations, after discarding [`SIMULATION_BURN_IN`] start-up draws.
/// Dates are synthetic months from 2000-01. Deterministic in `seed`.
pub fn simulate(model: &VarModel, length: usize, seed: u64) -> Result<ReturnPanel, VarError> {
    simulate_with_burn_in(model, length, seed, SIMULATION_BURN_IN)
}

/// [`simulate`] with an explicit burn-in length.
pub fn simulate_with_burn_in(
    model: &VarModel,
    length: usize,
    seed: u64,
    burn_in: usize,
) -> Result<ReturnPanel, VarError> {
    let radius = model.spectral_radius();
    if radius >= 1.0 - STABILITY_MARGIN {
        return Err(VarError::UnstableModel(radius));
    }
    let chol = Cholesky::new(model.sigma().clone())
        .ok_or(VarError::NonPositiveDefiniteCovariance)?;
    let l = chol.l();

    let m = model.n_series();
    let r = model.lag_order();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // history[0] is the most recent observation.
    let mut history: Vec<DVector<f64>> = vec![DVector::zeros(m); r];
    let mut out = DMatrix::zeros(length, m);
    for t in 0..burn_in + length {
        let z = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut y = model.intercept() + &l * z;
        for (b, lagged) in model.coefficients().iter().zip(&history) {
            y += b * lagged;
        }
        history.rotate_right(1);
        history[0] = y.clone();
        if t >= burn_in {
            for j in 0..m {
                out[(t - burn_in, j)] = y[j];
            }
        }
    }

    let mut dates = Vec::with_capacity(length);
    let mut cur = Month::new(2000, 1).expect("valid month");
    for _ in 0..length {
        dates.push(cur);
        cur = cur.next();
    }
    ReturnPanel::new(dates, model.names().to_vec(), out)
        .map_err(|e| VarError::ShapeMismatch(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn names(m: usize) -> Vec<String> {
        (0..m).map(|i| format!("s{i}")).collect()
    }

    fn var1(b: DMatrix<f64>, sigma: DMatrix<f64>) -> VarModel {
        let m = b.nrows();
        VarModel::new(names(m), DVector::zeros(m), vec![b], sigma).unwrap()
    }

    #[test]
    fn constructor_validates_covariance() {
        let b = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]);
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.2, 1.0]);
        assert!(matches!(
            VarModel::new(names(2), DVector::zeros(2), vec![b.clone()], asym),
            Err(VarError::AsymmetricCovariance)
        ));
        let indef = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            VarModel::new(names(2), DVector::zeros(2), vec![b.clone()], indef),
            Err(VarError::NonPositiveDefiniteCovariance)
        ));
        assert!(matches!(
            VarModel::new(names(2), DVector::zeros(2), vec![], DMatrix::identity(2, 2)),
            Err(VarError::ZeroLag)
        ));
    }

    #[test]
    fn stability_matches_known_radii() {
        let half = var1(
            DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]),
            DMatrix::identity(2, 2),
        );
        assert_relative_eq!(half.spectral_radius(), 0.5, epsilon = 1e-10);
        assert!(half.is_stable());

        let unit = var1(DMatrix::identity(2, 2), DMatrix::identity(2, 2));
        assert_relative_eq!(unit.spectral_radius(), 1.0, epsilon = 1e-9);
        assert!(!unit.is_stable());

        // Triangular case: eigenvalues are the diagonal entries.
        let tri = var1(
            DMatrix::from_row_slice(2, 2, &[0.9, 0.5, 0.0, 0.3]),
            DMatrix::identity(2, 2),
        );
        assert_relative_eq!(tri.spectral_radius(), 0.9, epsilon = 1e-10);
        assert!(tri.is_stable());
    }

    #[test]
    fn companion_of_var2_has_block_structure() {
        let b1 = DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.3, 0.4]);
        let b2 = DMatrix::from_row_slice(2, 2, &[0.05, 0.0, 0.0, 0.05]);
        let model = VarModel::new(
            names(2),
            DVector::zeros(2),
            vec![b1.clone(), b2.clone()],
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let c = model.companion_matrix();
        assert_eq!(c.nrows(), 4);
        assert_eq!(c[(0, 0)], 0.1);
        assert_eq!(c[(0, 2)], 0.05);
        assert_eq!(c[(2, 0)], 1.0);
        assert_eq!(c[(3, 1)], 1.0);
        assert_eq!(c[(2, 2)], 0.0);
    }

    #[test]
    fn vma_of_zero_model_is_identity_then_zeros() {
        let model = var1(DMatrix::zeros(3, 3), DMatrix::identity(3, 3));
        let a = vma_coefficients(&model, 4);
        assert_eq!(a.len(), 4);
        assert_eq!(a[0], DMatrix::identity(3, 3));
        for ah in &a[1..] {
            assert_eq!(*ah, DMatrix::zeros(3, 3));
        }
    }

    #[test]
    fn vma_of_var1_is_matrix_powers() {
        let b = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.4]);
        let model = var1(b.clone(), DMatrix::identity(2, 2));
        let a = vma_coefficients(&model, 4);
        assert_relative_eq!((&a[2] - &b * &b).norm(), 0.0, epsilon = 1e-14);
        assert_relative_eq!((&a[3] - &b * &b * &b).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn vma_of_var2_matches_hand_recursion() {
        let b1 = DMatrix::from_row_slice(2, 2, &[0.2, 0.1, 0.0, 0.3]);
        let b2 = DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.05, 0.1]);
        let model = VarModel::new(
            names(2),
            DVector::zeros(2),
            vec![b1.clone(), b2.clone()],
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let a = vma_coefficients(&model, 4);
        assert_eq!(a[1], b1);
        let a2 = &b1 * &a[1] + &b2;
        assert_relative_eq!((&a[2] - a2).norm(), 0.0, epsilon = 1e-14);
        let a3 = &b1 * &a[2] + &b2 * &a[1];
        assert_relative_eq!((&a[3] - a3).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn simulate_is_deterministic_in_the_seed() {
        let model = var1(
            DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.5]),
            DMatrix::identity(2, 2),
        );
        let a = simulate(&model, 50, 7).unwrap();
        let b = simulate(&model, 50, 7).unwrap();
        assert_eq!(a.returns(), b.returns());
        let c = simulate(&model, 50, 8).unwrap();
        assert_ne!(a.returns(), c.returns());
        assert_eq!(a.dates()[0], Month::new(2000, 1).unwrap());
    }

    #[test]
    fn simulate_rejects_unstable_models() {
        let model = var1(DMatrix::identity(2, 2) * 1.01, DMatrix::identity(2, 2));
        assert!(matches!(
            simulate(&model, 10, 0),
            Err(VarError::UnstableModel(_))
        ));
    }

    #[test]
    fn simulate_reproduces_innovation_covariance() {
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]);
        let model = var1(DMatrix::zeros(2, 2), sigma.clone());
        let panel = simulate(&model, 100_000, 42).unwrap();
        let data = panel.returns();
        let n = data.nrows() as f64;
        let mean0 = data.column(0).sum() / n;
        let mean1 = data.column(1).sum() / n;
        let mut cov = [0.0_f64; 3];
        for t in 0..data.nrows() {
            let d0 = data[(t, 0)] - mean0;
            let d1 = data[(t, 1)] - mean1;
            cov[0] += d0 * d0;
            cov[1] += d0 * d1;
            cov[2] += d1 * d1;
        }
        for c in &mut cov {
            *c /= n - 1.0;
        }
        assert_relative_eq!(cov[0], 1.0, epsilon = 0.02);
        assert_relative_eq!(cov[1], 0.3, epsilon = 0.02);
        assert_relative_eq!(cov[2], 1.0, epsilon = 0.02);
    }

    #[test]
    fn simulate_reproduces_autocorrelation() {
        let model = var1(
            DMatrix::from_row_slice(1, 1, &[0.5]),
            DMatrix::identity(1, 1),
        );
        let panel = simulate(&model, 100_000, 3).unwrap();
        let y = panel.series(0);
        let n = y.len();
        let mean = y.iter().sum::<f64>() / n as f64;
        let mut num = 0.0;
        let mut den = 0.0;
        for t in 0..n {
            den += (y[t] - mean).powi(2);
            if t > 0 {
                num += (y[t] - mean) * (y[t - 1] - mean);
            }
        }
        assert_relative_eq!(num / den, 0.5, epsilon = 0.03);
    }

    #[test]
    fn fit_ols_recovers_generating_coefficients() {
        let b = DMatrix::from_row_slice(2, 2, &[0.5, 0.2, -0.1, 0.4]);
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.25, 0.25, 0.8]);
        let model = VarModel::new(
            names(2),
            DVector::from_column_slice(&[0.1, -0.2]),
            vec![b.clone()],
            sigma.clone(),
        )
        .unwrap();
        let panel = simulate(&model, 5000, 11).unwrap();
        let fitted = fit_ols(&panel, 1).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(
                    fitted.coefficients()[0][(i, j)],
                    b[(i, j)],
                    epsilon = 0.03
                );
                assert_relative_eq!(fitted.sigma()[(i, j)], sigma[(i, j)], epsilon = 0.05);
            }
        }
        assert_relative_eq!(fitted.intercept()[0], 0.1, epsilon = 0.05);
        assert_relative_eq!(fitted.intercept()[1], -0.2, epsilon = 0.05);
    }

    #[test]
    fn fit_ols_on_white_noise_finds_no_dynamics() {
        let model = var1(DMatrix::zeros(2, 2), DMatrix::identity(2, 2));
        let panel = simulate(&model, 2000, 21).unwrap();
        let fitted = fit_ols(&panel, 1).unwrap();
        // 2 se under the null is about 0.045 here; 0.1 keeps noise out.
        for v in fitted.coefficients()[0].iter() {
            assert!(v.abs() < 0.1, "coefficient {v} too large for white noise");
        }
    }

    #[test]
    fn fit_ols_needs_more_rows_than_parameters() {
        let model = var1(
            DMatrix::from_row_slice(2, 2, &[0.3, 0.0, 0.0, 0.3]),
            DMatrix::identity(2, 2),
        );
        // K = 3 per equation at lag 1 with M=2; T must be at least 5.
        let small = simulate(&model, 4, 5).unwrap();
        assert!(matches!(
            fit_ols(&small, 1),
            Err(VarError::InsufficientData { needed: 5, got: 4, .. })
        ));
        // T = 5 is estimable but leaves one residual degree of freedom, so
        // the 2x2 residual covariance is rank one and fails its Cholesky.
        let saturated = simulate(&model, 5, 5).unwrap();
        assert!(matches!(
            fit_ols(&saturated, 1),
            Err(VarError::NonPositiveDefiniteCovariance)
        ));
        let just_enough = simulate(&model, 6, 5).unwrap();
        assert!(fit_ols(&just_enough, 1).is_ok());
    }

    #[test]
    fn select_lag_prefers_the_generating_order() {
        let b = DMatrix::from_row_slice(2, 2, &[0.6, 0.2, -0.2, 0.5]);
        let model = var1(b, DMatrix::identity(2, 2));
        let mut hits = 0;
        for seed in 0..100 {
            let panel = simulate(&model, 2000, 1000 + seed).unwrap();
            if select_lag_aic(&panel, 4).unwrap() == 1 {
                hits += 1;
            }
        }
        assert!(hits >= 90, "selected lag 1 in only {hits}/100 replications");
    }

    #[test]
    fn select_lag_with_max_one_returns_one() {
        let model = var1(
            DMatrix::from_row_slice(2, 2, &[0.4, 0.0, 0.0, 0.4]),
            DMatrix::identity(2, 2),
        );
        let panel = simulate(&model, 200, 9).unwrap();
        assert_eq!(select_lag_aic(&panel, 1).unwrap(), 1);
    }

    #[test]
    fn select_lag_is_invariant_to_column_order() {
        let b = DMatrix::from_row_slice(3, 3, &[0.5, 0.1, 0.0, 0.0, 0.4, 0.2, 0.1, 0.0, 0.3]);
        let model = VarModel::new(
            names(3),
            DVector::zeros(3),
            vec![b],
            DMatrix::identity(3, 3),
        )
        .unwrap();
        let panel = simulate(&model, 400, 17).unwrap();
        let reordered = panel
            .select(&["s2".to_string(), "s0".to_string(), "s1".to_string()])
            .unwrap();
        assert_eq!(
            select_lag_aic(&panel, 4).unwrap(),
            select_lag_aic(&reordered, 4).unwrap()
        );
    }
}
