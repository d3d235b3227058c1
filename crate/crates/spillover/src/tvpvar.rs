//! Time-varying-parameter VAR estimated with a forgetting-factor Kalman
//! filter.
//!
//! The VAR coefficients form the state vector beta_t, stacked equation by
//! equation: for each equation its intercept, then lag-1 coefficients for
//! every series, then lag 2, and so on. The measurement equation for
//! observation y_t uses X_t = I_M (x) x_t' with x_t = [1, y_{t-1}', ...,
//! y_{t-r}']. Instead of a state-noise covariance, the prediction step
//! inflates the state covariance by 1/kappa1, and the measurement
//! covariance is an exponentially weighted moving average of prediction
//! errors with decay kappa2:
//!
//!   P_{t|t-1} = P_{t-1} / kappa1
//!   e_t       = y_t - X_t beta_{t-1}
//!   S_t       = kappa2 S_{t-1} + (1 - kappa2) e_t e_t'
//!   F_t       = X_t P_{t|t-1} X_t' + S_t
//!   K_t       = P_{t|t-1} X_t' F_t^{-1}
//!   beta_t    = beta_{t-1} + K_t e_t
//!   P_t       = P_{t|t-1} - K_t X_t P_{t|t-1}
//!
//! At kappa1 = kappa2 = 1 nothing is forgotten and the filter reduces to
//! recursive least squares, so a diffuse prior reproduces full-sample OLS
//! at the final step. The prior comes from OLS on the first `prior_window`
//! observations, with state covariance Sigma_hat (x) (X'X)^{-1} scaled by
//! `prior_scale`; the filter then runs over every observation from the
//! first one with a full lag history, revisiting the prior window.

use nalgebra::{Cholesky, DMatrix, DVector};
use thiserror::Error;

use crate::ingest::{Month, ReturnPanel};
use crate::var::{ols_on_range, split_beta, VarError, VarModel};

/// Relative ridge added before Cholesky factorizations: 1e-10 x trace.
const JITTER_SCALE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum TvpError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("numerical breakdown at step {t} ({date}): {message}")]
    NumericalBreakdown { t: usize, date: Month, message: String },
    #[error("path index {index} out of range for {len} steps")]
    IndexOutOfRange { index: usize, len: usize },
    #[error(transparent)]
    Var(#[from] VarError),
}

/// Filter settings. Defaults: monthly-data forgetting factors 0.99 and
/// 0.96, lag 1, a 36-observation prior window, and prior covariance scaled
/// by 4.
#[derive(Debug, Clone, PartialEq)]
pub struct TvpConfig {
    /// State forgetting factor in (0, 1]; 1 keeps all history.
    pub kappa1: f64,
    /// Measurement-covariance decay in (0, 1]; 1 freezes the prior
    /// covariance.
    pub kappa2: f64,
    pub lag_order: usize,
    /// Observations used for the OLS prior.
    pub prior_window: usize,
    /// Multiplier on the prior state covariance; large values make the
    /// prior diffuse.
    pub prior_scale: f64,
}

impl Default for TvpConfig {
    fn default() -> Self {
        TvpConfig {
            kappa1: 0.99,
            kappa2: 0.96,
            lag_order: 1,
            prior_window: 36,
            prior_scale: 4.0,
        }
    }
}

impl TvpConfig {
    fn validate(&self, n_series: usize) -> Result<(), TvpError> {
        if !(self.kappa1 > 0.0 && self.kappa1 <= 1.0) {
            return Err(TvpError::InvalidConfig(format!(
                "kappa1 {} outside (0, 1]",
                self.kappa1
            )));
        }
        if !(self.kappa2 > 0.0 && self.kappa2 <= 1.0) {
            return Err(TvpError::InvalidConfig(format!(
                "kappa2 {} outside (0, 1]",
                self.kappa2
            )));
        }
        if self.lag_order == 0 {
            return Err(TvpError::InvalidConfig("lag order must be at least 1".to_string()));
        }
        if !(self.prior_scale > 0.0 && self.prior_scale.is_finite()) {
            return Err(TvpError::InvalidConfig(format!(
                "prior scale {} must be positive",
                self.prior_scale
            )));
        }
        let k = 1 + n_series * self.lag_order;
        let needed = self.lag_order + k + 1;
        if self.prior_window < needed {
            return Err(TvpError::InvalidConfig(format!(
                "prior window {} cannot identify {k} coefficients per equation; need {needed}",
                self.prior_window
            )));
        }
        Ok(())
    }
}

/// Filtered coefficient path. Step i corresponds to `dates()[i]`, the date
/// of the i-th observation with a full lag history.
#[derive(Debug, Clone)]
pub struct TvpVarPath {
    names: Vec<String>,
    dates: Vec<Month>,
    lag_order: usize,
    config: TvpConfig,
    states: Vec<DVector<f64>>,
    measurement_cov: Vec<DMatrix<f64>>,
    state_cov: Vec<DMatrix<f64>>,
}

impl TvpVarPath {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dates(&self) -> &[Month] {
        &self.dates
    }

    pub fn lag_order(&self) -> usize {
        self.lag_order
    }

    pub fn config(&self) -> &TvpConfig {
        &self.config
    }

    /// Stacked coefficient vector at step `index`.
    pub fn state(&self, index: usize) -> Result<&DVector<f64>, TvpError> {
        self.states
            .get(index)
            .ok_or(TvpError::IndexOutOfRange { index, len: self.len() })
    }

    /// Measurement covariance S_t at step `index`.
    pub fn measurement_cov(&self, index: usize) -> Result<&DMatrix<f64>, TvpError> {
        self.measurement_cov
            .get(index)
            .ok_or(TvpError::IndexOutOfRange { index, len: self.len() })
    }

    /// State covariance P_t at step `index`.
    pub fn state_cov(&self, index: usize) -> Result<&DMatrix<f64>, TvpError> {
        self.state_cov
            .get(index)
            .ok_or(TvpError::IndexOutOfRange { index, len: self.len() })
    }

    /// Snapshot of the model at step `index`: unpacked coefficients with
    /// the jittered measurement covariance as innovation covariance.
    pub fn model_at(&self, index: usize) -> Result<VarModel, TvpError> {
        let state = self.state(index)?;
        let s = &self.measurement_cov[index];
        let m = self.names.len();
        let k = 1 + m * self.lag_order;
        let beta = DMatrix::from_fn(k, m, |row, eq| state[eq * k + row]);
        let (intercept, coefficients) = split_beta(&beta, m, self.lag_order);
        let mut sigma = (s + s.transpose()) * 0.5;
        let jitter = JITTER_SCALE * sigma.trace();
        for i in 0..m {
            sigma[(i, i)] += jitter;
        }
        Ok(VarModel::new(self.names.to_vec(), intercept, coefficients, sigma)?)
    }
}

/// Runs the filter over the whole panel. The prior is OLS on the first
/// `prior_window` observations; filtering starts at the first observation
/// with `lag_order` predecessors and also revisits the prior window.
pub fn fit_tvp(panel: &ReturnPanel, config: &TvpConfig) -> Result<TvpVarPath, TvpError> {
    let m = panel.n_series();
    let t_total = panel.n_obs();
    let r = config.lag_order;
    config.validate(m)?;
    if t_total < config.prior_window + 1 {
        return Err(TvpError::InsufficientData {
            needed: config.prior_window + 1,
            got: t_total,
        });
    }

    let data = panel.returns();
    let k = 1 + m * r;
    let dim = m * k;

    // OLS prior on the first prior_window observations.
    let prior = ols_on_range(data, r, r, config.prior_window)?;
    let mut beta = DVector::zeros(dim);
    for eq in 0..m {
        for row in 0..k {
            beta[eq * k + row] = prior.beta[(row, eq)];
        }
    }
    let mut s = prior.sigma.clone();
    // Kronecker structure: block (eq_a, eq_b) of P_0 is
    // prior_scale x sigma[(a, b)] x (X'X)^{-1}.
    let mut p = DMatrix::zeros(dim, dim);
    for eq_a in 0..m {
        for eq_b in 0..m {
            let scale = config.prior_scale * prior.sigma[(eq_a, eq_b)];
            for a in 0..k {
                for b in 0..k {
                    p[(eq_a * k + a, eq_b * k + b)] = scale * prior.xtx_inv[(a, b)];
                }
            }
        }
    }

    let steps = t_total - r;
    let mut states = Vec::with_capacity(steps);
    let mut measurement_cov = Vec::with_capacity(steps);
    let mut state_cov = Vec::with_capacity(steps);

    let mut x = DVector::zeros(k);
    for t in r..t_total {
        let date = panel.dates()[t];
        x[0] = 1.0;
        for l in 1..=r {
            for j in 0..m {
                x[1 + (l - 1) * m + j] = data[(t - l, j)];
            }
        }

        // Prediction: inflate the state covariance, forecast y_t.
        let p_pred = &p / config.kappa1;
        let mut error = DVector::zeros(m);
        for eq in 0..m {
            let mut fitted = 0.0;
            for row in 0..k {
                fitted += beta[eq * k + row] * x[row];
            }
            error[eq] = data[(t, eq)] - fitted;
        }

        s = &s * config.kappa2 + (&error * error.transpose()) * (1.0 - config.kappa2);
        s = (&s + s.transpose()) * 0.5;

        // px = P_pred X_t' (dim x M); f = X_t px + S_t (M x M).
        let mut px = DMatrix::zeros(dim, m);
        for eq in 0..m {
            let block = p_pred.view((0, eq * k), (dim, k));
            let mut col = px.column_mut(eq);
            col.gemv(1.0, &block, &x, 0.0);
        }
        let mut f = DMatrix::zeros(m, m);
        for row_eq in 0..m {
            for col_eq in 0..m {
                let mut acc = 0.0;
                for row in 0..k {
                    acc += x[row] * px[(row_eq * k + row, col_eq)];
                }
                f[(row_eq, col_eq)] = acc + s[(row_eq, col_eq)];
            }
        }
        f = (&f + f.transpose()) * 0.5;
        // Jitter only on Cholesky failure: an unconditional ridge scaled by
        // trace(F) is huge while the prior is still diffuse and visibly
        // biases the collapsed posterior directions.
        let mut chol = Cholesky::new(f.clone());
        let mut jitter = JITTER_SCALE * f.trace();
        while chol.is_none() && jitter.is_finite() && jitter < f.trace() {
            let mut bumped = f.clone();
            for i in 0..m {
                bumped[(i, i)] += jitter;
            }
            chol = Cholesky::new(bumped);
            jitter *= 100.0;
        }
        let chol = chol.ok_or_else(|| TvpError::NumericalBreakdown {
            t,
            date,
            message: "prediction-error covariance is not positive-definite".to_string(),
        })?;
        // gain = px F^{-1}, via F gain' = px'.
        let gain = chol.solve(&px.transpose()).transpose();

        beta += &gain * &error;
        p = &p_pred - &gain * px.transpose();
        p = (&p + p.transpose()) * 0.5;

        if beta.iter().any(|v| !v.is_finite())
            || p.iter().any(|v| !v.is_finite())
            || s.iter().any(|v| !v.is_finite())
        {
            return Err(TvpError::NumericalBreakdown {
                t,
                date,
                message: "non-finite state or covariance".to_string(),
            });
        }

        states.push(beta.clone());
        measurement_cov.push(s.clone());
        state_cov.push(p.clone());
    }

    Ok(TvpVarPath {
        names: panel.names().to_vec(),
        dates: panel.dates()[r..].to_vec(),
        lag_order: r,
        config: config.clone(),
        states,
        measurement_cov,
        state_cov,
    })
}
