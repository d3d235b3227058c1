//! Frequency-band decomposition of the generalized FEVD.
//!
//! The moving-average transfer function Psi(w) = sum_h A_h e^{-iwh} is
//! evaluated on a dense DFT grid w_k = 2 pi k / N. The per-frequency
//! contribution of shocks in j to the variance of i is
//! sigma_jj^{-1} |(Psi(w_k) Sigma)_{ij}|^2, and by Parseval its grid average
//! equals the time-domain numerator exactly. Frequencies above the Nyquist
//! point fold back onto (0, pi], so a partition of (0, pi] into bands splits
//! every variance share into band shares that reconstruct the time-domain
//! table by plain addition. Band tables keep the time-domain row
//! denominator: summed over bands, each row adds to one.
//!
//! Band bounds are half-open intervals (lower, upper] in radians per month;
//! the zero frequency joins the band whose lower bound is 0. A frequency w
//! corresponds to a cycle period of 2 pi / w months, so with monthly data
//! the conventional view is pi / w "round trips" — the bands
//! (pi/4, pi], (pi/12, pi/4], (0, pi/12] cover periods of 1-4, 4-12, and
//! 12+ months.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::connectedness::{summary_of_shares, FevdTable, SpilloverSummary};
use crate::var::{vma_coefficients, VarModel, STABILITY_MARGIN};

/// Default DFT grid size; raised to 2 x horizon when the horizon is long.
pub const DEFAULT_GRID_SIZE: usize = 1024;

#[derive(Debug, Error)]
pub enum FrequencyError {
    #[error("model is unstable: companion spectral radius {0}")]
    UnstableModel(f64),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("invalid band: {0}")]
    InvalidBand(String),
    #[error("bands do not partition (0, pi]: {0}")]
    InvalidPartition(String),
    #[error("DFT grid of {size} points cannot resolve horizon {horizon}; need at least {needed}")]
    GridTooCoarse { size: usize, horizon: usize, needed: usize },
    #[error("no band labeled {0:?}")]
    UnknownBand(String),
}

/// Half-open frequency interval (lower, upper] in radians per month.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyBand {
    label: String,
    lower: f64,
    upper: f64,
}

impl FrequencyBand {
    /// Requires a nonempty label and 0 <= lower < upper <= pi.
    pub fn new(label: &str, lower: f64, upper: f64) -> Result<Self, FrequencyError> {
        if label.is_empty() {
            return Err(FrequencyError::InvalidBand("empty label".to_string()));
        }
        if !(lower.is_finite() && upper.is_finite()) || lower < 0.0 || upper <= lower {
            return Err(FrequencyError::InvalidBand(format!(
                "bounds ({lower}, {upper}] are not an interval in [0, pi]"
            )));
        }
        // Allow a hair above pi so bounds computed as fractions of pi pass.
        if upper > PI * (1.0 + 1e-12) {
            return Err(FrequencyError::InvalidBand(format!(
                "upper bound {upper} exceeds pi"
            )));
        }
        Ok(FrequencyBand { label: label.to_string(), lower, upper: upper.min(PI) })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Whether a folded frequency belongs to this band. Zero belongs to the
    /// band that starts at zero.
    pub fn contains(&self, w: f64) -> bool {
        if w == 0.0 {
            self.lower == 0.0
        } else {
            self.lower < w && w <= self.upper
        }
    }

    /// Cycle-period range in months implied by the bounds, e.g. "4-12
    /// months" or "12+ months" for a band reaching frequency zero.
    pub fn month_range(&self) -> String {
        let min_months = PI / self.upper;
        if self.lower == 0.0 {
            format!("{}+ months", format_months(min_months))
        } else {
            let max_months = PI / self.lower;
            format!(
                "{}-{} months",
                format_months(min_months),
                format_months(max_months)
            )
        }
    }
}

fn format_months(m: f64) -> String {
    if (m - m.round()).abs() < 1e-6 {
        format!("{}", m.round() as i64)
    } else {
        format!("{m:.1}")
    }
}

/// Short, medium, and long bands: periods of 1-4, 4-12, and 12+ months.
pub fn default_bands() -> Vec<FrequencyBand> {
    vec![
        FrequencyBand::new("short", PI / 4.0, PI).expect("valid band"),
        FrequencyBand::new("medium", PI / 12.0, PI / 4.0).expect("valid band"),
        FrequencyBand::new("long", 0.0, PI / 12.0).expect("valid band"),
    ]
}

/// Checks that the bands tile (0, pi] exactly: distinct labels, one band
/// starting at 0, one ending at pi, and adjacent bounds meeting with no gap
/// or overlap (to 1e-12).
pub fn validate_partition(bands: &[FrequencyBand]) -> Result<(), FrequencyError> {
    if bands.is_empty() {
        return Err(FrequencyError::InvalidPartition("no bands".to_string()));
    }
    for (i, a) in bands.iter().enumerate() {
        for b in bands.iter().skip(i + 1) {
            if a.label == b.label {
                return Err(FrequencyError::InvalidPartition(format!(
                    "duplicate label {:?}",
                    a.label
                )));
            }
        }
    }
    let mut sorted: Vec<&FrequencyBand> = bands.iter().collect();
    sorted.sort_by(|a, b| a.lower.partial_cmp(&b.lower).expect("finite bounds"));
    if sorted[0].lower != 0.0 {
        return Err(FrequencyError::InvalidPartition(format!(
            "lowest band starts at {}, not 0",
            sorted[0].lower
        )));
    }
    for pair in sorted.windows(2) {
        if (pair[0].upper - pair[1].lower).abs() > 1e-12 {
            return Err(FrequencyError::InvalidPartition(format!(
                "bands {:?} and {:?} do not meet: {} vs {}",
                pair[0].label, pair[1].label, pair[0].upper, pair[1].lower
            )));
        }
    }
    let top = sorted.last().expect("nonempty").upper;
    if (top - PI).abs() > 1e-12 {
        return Err(FrequencyError::InvalidPartition(format!(
            "highest band ends at {top}, not pi"
        )));
    }
    Ok(())
}

/// Frequency decomposition of a FEVD over a band partition.
#[derive(Debug, Clone)]
pub struct SpectralFevd {
    bands: Vec<FrequencyBand>,
    /// Band variance-share tables, aligned with `bands`. Rows are scaled by
    /// the time-domain row total, so the sum across bands equals the
    /// row-normalized time-domain table.
    band_shares: Vec<DMatrix<f64>>,
    /// Per-grid-point contribution matrices sigma_jj^{-1} |(Psi_k Sigma)|^2,
    /// before the 1/N grid average.
    frequency_numerators: Vec<DMatrix<f64>>,
    time_domain: FevdTable,
    grid_size: usize,
}

impl SpectralFevd {
    pub fn bands(&self) -> &[FrequencyBand] {
        &self.bands
    }

    pub fn names(&self) -> &[String] {
        self.time_domain.names()
    }

    pub fn horizon(&self) -> usize {
        self.time_domain.horizon()
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn time_domain(&self) -> &FevdTable {
        &self.time_domain
    }

    pub fn band_tables(&self) -> impl Iterator<Item = (&FrequencyBand, &DMatrix<f64>)> {
        self.bands.iter().zip(self.band_shares.iter())
    }

    pub fn band_table(&self, label: &str) -> Result<&DMatrix<f64>, FrequencyError> {
        self.bands
            .iter()
            .position(|b| b.label() == label)
            .map(|i| &self.band_shares[i])
            .ok_or_else(|| FrequencyError::UnknownBand(label.to_string()))
    }

    pub fn frequency_numerators(&self) -> &[DMatrix<f64>] {
        &self.frequency_numerators
    }
}

/// Spectral FEVD of a stable model over a band partition. `grid_size`
/// defaults to max([`DEFAULT_GRID_SIZE`], 2 x horizon) and must be at least
/// 2 x horizon.
pub fn spectral_gfevd(
    model: &VarModel,
    horizon: usize,
    bands: &[FrequencyBand],
    grid_size: Option<usize>,
) -> Result<SpectralFevd, FrequencyError> {
    if horizon == 0 {
        return Err(FrequencyError::ZeroHorizon);
    }
    validate_partition(bands)?;
    let n = grid_size.unwrap_or_else(|| DEFAULT_GRID_SIZE.max(2 * horizon));
    if n < 2 * horizon {
        return Err(FrequencyError::GridTooCoarse {
            size: n,
            horizon,
            needed: 2 * horizon,
        });
    }
    let radius = model.spectral_radius();
    if radius >= 1.0 - STABILITY_MARGIN {
        return Err(FrequencyError::UnstableModel(radius));
    }

    let m = model.n_series();
    let sigma = model.sigma();
    let a = vma_coefficients(model, horizon);
    // Time-domain row totals normalize every band table, so the band sum
    // reconstructs the row-normalized table.
    let mut row_totals = vec![0.0_f64; m];
    for ah in &a {
        let as_ = ah * sigma;
        for i in 0..m {
            for j in 0..m {
                row_totals[i] += as_[(i, j)] * as_[(i, j)] / sigma[(j, j)];
            }
        }
    }

    let mut frequency_numerators = Vec::with_capacity(n);
    let mut band_shares = vec![DMatrix::zeros(m, m); bands.len()];
    let two_pi = 2.0 * PI;
    for k in 0..n {
        let w = two_pi * (k as f64) / (n as f64);
        let mut psi_re = DMatrix::zeros(m, m);
        let mut psi_im = DMatrix::zeros(m, m);
        for (h, ah) in a.iter().enumerate() {
            let angle = w * h as f64;
            psi_re += ah * angle.cos();
            psi_im -= ah * angle.sin();
        }
        let f_re = &psi_re * sigma;
        let f_im = &psi_im * sigma;
        let contribution = DMatrix::from_fn(m, m, |i, j| {
            (f_re[(i, j)] * f_re[(i, j)] + f_im[(i, j)] * f_im[(i, j)]) / sigma[(j, j)]
        });

        // Frequencies beyond Nyquist fold back onto (0, pi].
        let folded = if k == 0 { 0.0 } else { w.min(two_pi - w) };
        let band_idx = bands
            .iter()
            .position(|b| b.contains(folded))
            .unwrap_or_else(|| panic!("validated partition must cover folded frequency {folded}"));
        band_shares[band_idx] += &contribution / n as f64;
        frequency_numerators.push(contribution);
    }
    for table in &mut band_shares {
        for i in 0..m {
            for j in 0..m {
                table[(i, j)] /= row_totals[i];
            }
        }
    }

    let time_domain = crate::connectedness::gfevd(model, horizon).map_err(|e| match e {
        crate::connectedness::ConnectednessError::UnstableModel(r) => {
            FrequencyError::UnstableModel(r)
        }
        other => FrequencyError::InvalidBand(other.to_string()),
    })?;

    Ok(SpectralFevd {
        bands: bands.to_vec(),
        band_shares,
        frequency_numerators,
        time_domain,
        grid_size: n,
    })
}

/// Directional spillover measures within one band. Shares keep the
/// time-domain denominator, so band TSIs add up to the total TSI.
pub fn band_summary(
    spectral: &SpectralFevd,
    label: &str,
) -> Result<SpilloverSummary, FrequencyError> {
    let table = spectral.band_table(label)?;
    Ok(summary_of_shares(
        table,
        spectral.names(),
        Some(label.to_string()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectedness::{gfevd, spillover_summary};
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};

    fn names(m: usize) -> Vec<String> {
        (0..m).map(|i| format!("s{i}")).collect()
    }

    fn model(coefficients: Vec<DMatrix<f64>>, sigma: DMatrix<f64>) -> VarModel {
        let m = sigma.nrows();
        VarModel::new(names(m), DVector::zeros(m), coefficients, sigma).unwrap()
    }

    fn test_model() -> VarModel {
        let b = DMatrix::from_row_slice(3, 3, &[0.5, 0.15, 0.0, 0.1, 0.3, 0.2, 0.0, 0.1, 0.4]);
        let sigma =
            DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.1, 0.3, 0.8, 0.0, 0.1, 0.0, 0.5]);
        model(vec![b], sigma)
    }

    #[test]
    fn default_bands_partition_and_label_months() {
        let bands = default_bands();
        validate_partition(&bands).unwrap();
        assert_eq!(bands[0].label(), "short");
        assert_eq!(bands[0].month_range(), "1-4 months");
        assert_eq!(bands[1].month_range(), "4-12 months");
        assert_eq!(bands[2].month_range(), "12+ months");
        assert!(bands[0].contains(PI));
        assert!(!bands[0].contains(PI / 4.0));
        assert!(bands[1].contains(PI / 4.0));
        assert!(bands[2].contains(0.0));
        assert!(!bands[1].contains(0.0));
    }

    #[test]
    fn bad_partitions_are_rejected() {
        let gap = vec![
            FrequencyBand::new("hi", PI / 2.0, PI).unwrap(),
            FrequencyBand::new("lo", 0.0, PI / 3.0).unwrap(),
        ];
        assert!(matches!(
            validate_partition(&gap),
            Err(FrequencyError::InvalidPartition(_))
        ));
        let overlap = vec![
            FrequencyBand::new("hi", PI / 3.0, PI).unwrap(),
            FrequencyBand::new("lo", 0.0, PI / 2.0).unwrap(),
        ];
        assert!(validate_partition(&overlap).is_err());
        let short = vec![FrequencyBand::new("lo", 0.0, PI / 2.0).unwrap()];
        assert!(validate_partition(&short).is_err());
        let misses_zero = vec![FrequencyBand::new("hi", PI / 2.0, PI).unwrap()];
        assert!(validate_partition(&misses_zero).is_err());
        let dup = vec![
            FrequencyBand::new("x", PI / 2.0, PI).unwrap(),
            FrequencyBand::new("x", 0.0, PI / 2.0).unwrap(),
        ];
        assert!(validate_partition(&dup).is_err());
        assert!(validate_partition(&[]).is_err());
        assert!(FrequencyBand::new("bad", 0.5, 0.5).is_err());
        assert!(FrequencyBand::new("bad", -0.1, 1.0).is_err());
        assert!(FrequencyBand::new("bad", 0.0, 4.0).is_err());
        assert!(FrequencyBand::new("", 0.0, PI).is_err());
    }

    #[test]
    fn single_band_reproduces_the_time_domain() {
        let m = test_model();
        let all = vec![FrequencyBand::new("all", 0.0, PI).unwrap()];
        let spectral = spectral_gfevd(&m, 10, &all, None).unwrap();
        let table = spectral.band_table("all").unwrap();
        let time = gfevd(&m, 10).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(
                    table[(i, j)],
                    time.normalized()[(i, j)],
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn bands_reconstruct_the_time_domain_table() {
        let m = test_model();
        let spectral = spectral_gfevd(&m, 12, &default_bands(), None).unwrap();
        let time = spectral.time_domain().normalized();
        for i in 0..3 {
            for j in 0..3 {
                let sum: f64 = spectral.band_tables().map(|(_, t)| t[(i, j)]).sum();
                assert_relative_eq!(sum, time[(i, j)], epsilon = 1e-10);
            }
        }
        let total = spillover_summary(spectral.time_domain()).tsi;
        let band_total: f64 = spectral
            .bands()
            .iter()
            .map(|b| band_summary(&spectral, b.label()).unwrap().tsi)
            .sum();
        assert_relative_eq!(band_total, total, epsilon = 1e-10);
    }

    #[test]
    fn refining_a_band_preserves_its_mass() {
        let m = test_model();
        let coarse = default_bands();
        let mid = (PI / 4.0 + PI) / 2.0;
        let fine = vec![
            FrequencyBand::new("short-hi", mid, PI).unwrap(),
            FrequencyBand::new("short-lo", PI / 4.0, mid).unwrap(),
            FrequencyBand::new("medium", PI / 12.0, PI / 4.0).unwrap(),
            FrequencyBand::new("long", 0.0, PI / 12.0).unwrap(),
        ];
        let a = spectral_gfevd(&m, 10, &coarse, Some(512)).unwrap();
        let b = spectral_gfevd(&m, 10, &fine, Some(512)).unwrap();
        let short = a.band_table("short").unwrap();
        let hi = b.band_table("short-hi").unwrap();
        let lo = b.band_table("short-lo").unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(
                    short[(i, j)],
                    hi[(i, j)] + lo[(i, j)],
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn white_noise_spreads_by_grid_share_with_no_spillovers() {
        let m = model(vec![DMatrix::zeros(2, 2)], DMatrix::identity(2, 2));
        let n = 1024;
        let spectral = spectral_gfevd(&m, 6, &default_bands(), Some(n)).unwrap();
        // Psi(w) = I at every frequency: off-diagonals stay zero and each
        // band's diagonal share equals its share of folded grid points.
        let short = spectral.band_table("short").unwrap();
        assert_relative_eq!(short[(0, 1)], 0.0, epsilon = 1e-15);
        assert_relative_eq!(short[(0, 0)], 0.75, epsilon = 2.0 / n as f64);
        for band in spectral.bands() {
            let s = band_summary(&spectral, band.label()).unwrap();
            assert_relative_eq!(s.tsi, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn grid_points_fold_conjugate_symmetrically() {
        let m = test_model();
        let n = 16;
        let spectral = spectral_gfevd(&m, 8, &default_bands(), Some(n)).unwrap();
        let nums = spectral.frequency_numerators();
        assert_eq!(nums.len(), n);
        for k in 1..n / 2 {
            for i in 0..3 {
                for j in 0..3 {
                    assert_relative_eq!(
                        nums[k][(i, j)],
                        nums[n - k][(i, j)],
                        epsilon = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn grid_must_cover_twice_the_horizon() {
        let m = test_model();
        assert!(matches!(
            spectral_gfevd(&m, 600, &default_bands(), Some(1024)),
            Err(FrequencyError::GridTooCoarse { needed: 1200, .. })
        ));
        // Default grid grows with the horizon instead of failing.
        let ok = spectral_gfevd(&m, 600, &default_bands(), None).unwrap();
        assert_eq!(ok.grid_size(), 1200);
        assert!(matches!(
            spectral_gfevd(&m, 0, &default_bands(), None),
            Err(FrequencyError::ZeroHorizon)
        ));
    }

    #[test]
    fn unknown_band_labels_are_reported() {
        let m = test_model();
        let spectral = spectral_gfevd(&m, 5, &default_bands(), Some(64)).unwrap();
        assert!(matches!(
            spectral.band_table("annual"),
            Err(FrequencyError::UnknownBand(_))
        ));
        assert!(matches!(
            band_summary(&spectral, "annual"),
            Err(FrequencyError::UnknownBand(_))
        ));
    }
}
