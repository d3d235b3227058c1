//! Generalized forecast-error-variance decomposition and time-domain
//! spillover measures.
//!
//! For a stable VAR with moving-average matrices A_h and innovation
//! covariance Sigma, the generalized decomposition at horizon H is
//!
//!   raw[i][j] = sigma_jj^{-1} sum_{h<H} (e_i' A_h Sigma e_j)^2
//!              / sum_{h<H} (e_i' A_h Sigma A_h' e_i)
//!
//! which does not depend on variable ordering. Rows are then normalized to
//! sum to one; entry (i, j) is the share of i's forecast-error variance
//! attributed to shocks in j. Spillover measures aggregate the off-diagonal
//! shares in percent: FROM is a row sum, TO a column sum, NET their
//! difference, and NPDC the pairwise net exchange.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::var::{vma_coefficients, VarModel, STABILITY_MARGIN};

#[derive(Debug, Error)]
pub enum ConnectednessError {
    #[error("model is unstable: companion spectral radius {0}")]
    UnstableModel(f64),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("row {0} of the decomposition has no variance to distribute")]
    DegenerateRow(usize),
}

/// Forecast-error-variance decomposition at a fixed horizon.
#[derive(Debug, Clone)]
pub struct FevdTable {
    names: Vec<String>,
    horizon: usize,
    raw: DMatrix<f64>,
    normalized: DMatrix<f64>,
}

impl FevdTable {
    /// Wraps a nonnegative raw decomposition, normalizing each row to sum
    /// to one. Rows of zeros are rejected.
    pub fn from_raw(
        names: Vec<String>,
        horizon: usize,
        raw: DMatrix<f64>,
    ) -> Result<Self, ConnectednessError> {
        let m = names.len();
        if raw.nrows() != m || raw.ncols() != m {
            return Err(ConnectednessError::ShapeMismatch(format!(
                "decomposition is {}x{} for {m} names",
                raw.nrows(),
                raw.ncols()
            )));
        }
        let mut normalized = raw.clone();
        for i in 0..m {
            let row_sum: f64 = raw.row(i).sum();
            if row_sum <= 0.0 || !row_sum.is_finite() {
                return Err(ConnectednessError::DegenerateRow(i));
            }
            for j in 0..m {
                normalized[(i, j)] = raw[(i, j)] / row_sum;
            }
        }
        Ok(FevdTable { names, horizon, raw, normalized })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_series(&self) -> usize {
        self.names.len()
    }

    /// Decomposition before row normalization.
    pub fn raw(&self) -> &DMatrix<f64> {
        &self.raw
    }

    /// Row-normalized decomposition; every row sums to one.
    pub fn normalized(&self) -> &DMatrix<f64> {
        &self.normalized
    }
}

/// Generalized FEVD of a stable model at forecast horizon `horizon`.
pub fn gfevd(model: &VarModel, horizon: usize) -> Result<FevdTable, ConnectednessError> {
    if horizon == 0 {
        return Err(ConnectednessError::ZeroHorizon);
    }
    let radius = model.spectral_radius();
    if radius >= 1.0 - STABILITY_MARGIN {
        return Err(ConnectednessError::UnstableModel(radius));
    }
    let m = model.n_series();
    let sigma = model.sigma();
    let a = vma_coefficients(model, horizon);

    let mut numerator: DMatrix<f64> = DMatrix::zeros(m, m);
    let mut denominator = vec![0.0_f64; m];
    for ah in &a {
        let as_ = ah * sigma;
        // as_[i][j] = e_i' A_h Sigma e_j; (A_h Sigma A_h')_{ii} accumulates
        // the forecast-error variance of series i.
        let asat = &as_ * ah.transpose();
        for i in 0..m {
            denominator[i] += asat[(i, i)];
            for j in 0..m {
                numerator[(i, j)] += as_[(i, j)] * as_[(i, j)];
            }
        }
    }
    let raw = DMatrix::from_fn(m, m, |i, j| {
        numerator[(i, j)] / (sigma[(j, j)] * denominator[i])
    });
    FevdTable::from_raw(model.names().to_vec(), horizon, raw)
}

/// Directional spillover measures in percent, either for the full table or
/// for one frequency band of it.
#[derive(Debug, Clone)]
pub struct SpilloverSummary {
    /// Band label when the summary covers one frequency band.
    pub band: Option<String>,
    pub names: Vec<String>,
    /// Total spillover index: average over series of `from`.
    pub tsi: f64,
    /// to[j]: spillovers transmitted by series j to all others.
    pub to: Vec<f64>,
    /// from[i]: spillovers received by series i from all others.
    pub from: Vec<f64>,
    /// net[i] = to[i] - from[i].
    pub net: Vec<f64>,
    /// npdc[(i, j)] = 100 (share i receives from j - share j receives
    /// from i); antisymmetric by construction.
    pub npdc: DMatrix<f64>,
}

/// Directional measures of a full-table decomposition.
pub fn spillover_summary(fevd: &FevdTable) -> SpilloverSummary {
    summary_of_shares(fevd.normalized(), fevd.names(), None)
}

/// Shared aggregation: `shares[(i, j)]` is the variance share of series i
/// attributed to j, on any scale whose full-table rows sum to one (a band
/// slice of such a table is also fine).
pub(crate) fn summary_of_shares(
    shares: &DMatrix<f64>,
    names: &[String],
    band: Option<String>,
) -> SpilloverSummary {
    let m = names.len();
    let mut to = vec![0.0_f64; m];
    let mut from = vec![0.0_f64; m];
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            from[i] += 100.0 * shares[(i, j)];
            to[j] += 100.0 * shares[(i, j)];
        }
    }
    let tsi = from.iter().sum::<f64>() / m as f64;
    let net: Vec<f64> = (0..m).map(|i| to[i] - from[i]).collect();
    let mut npdc = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            let d = 100.0 * (shares[(i, j)] - shares[(j, i)]);
            npdc[(i, j)] = d;
            npdc[(j, i)] = -d;
        }
    }
    SpilloverSummary { band, names: names.to_vec(), tsi, to, from, net, npdc }
}
