//! Monthly price panels: CSV ingestion, date alignment, log-return transform.
//!
//! A price panel is a T x M matrix of strictly positive levels indexed by
//! calendar month. Panels from different files are aligned on the
//! intersection of their dates before analysis. Returns are continuously
//! compounded: r_t = ln(p_t) - ln(p_{t-1}), so a return panel has one row
//! fewer than its source and carries the date of the later month.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input file not found: {0}")]
    MissingFile(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("row {row}, column {col}: cannot parse {value:?} as a number")]
    UnparseableCell { row: usize, col: usize, value: String },
    #[error("row {row}, column {col}: price {value} is not strictly positive")]
    NonPositivePrice { row: usize, col: usize, value: f64 },
    #[error("duplicate date {0}")]
    DuplicateDate(Month),
    #[error("dates are not strictly increasing near {0}")]
    UnorderedDates(Month),
    #[error("duplicate series name {0:?}")]
    DuplicateSeriesName(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("no common dates across panels")]
    EmptyIntersection,
    #[error("too few observations: need at least {needed}, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("row {row}, column {col}: value is not finite")]
    NonFiniteValue { row: usize, col: usize },
    #[error("unknown series {0:?}")]
    UnknownSeries(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Calendar month, ordered chronologically. Renders as `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Month {
    year: i32,
    month: u8,
}

impl Month {
    /// `month` is 1-based; returns `None` outside 1..=12.
    pub fn new(year: i32, month: u8) -> Option<Self> {
        (1..=12).contains(&month).then_some(Month { year, month })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    /// 1-based month number.
    pub fn month(&self) -> u8 {
        self.month
    }

    /// The following calendar month.
    pub fn next(self) -> Month {
        if self.month == 12 {
            Month { year: self.year + 1, month: 1 }
        } else {
            Month { year: self.year, month: self.month + 1 }
        }
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for Month {
    type Err = String;

    /// Accepts `YYYY-MM` and `YYYY-MM-DD` (day ignored).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.trim().splitn(3, '-');
        let year = parts
            .next()
            .and_then(|p| p.parse::<i32>().ok())
            .ok_or_else(|| format!("bad year in {s:?}"))?;
        let month = parts
            .next()
            .and_then(|p| p.parse::<u8>().ok())
            .ok_or_else(|| format!("bad month in {s:?}"))?;
        Month::new(year, month).ok_or_else(|| format!("month out of range in {s:?}"))
    }
}

fn check_dates(dates: &[Month]) -> Result<(), IngestError> {
    for pair in dates.windows(2) {
        if pair[1] == pair[0] {
            return Err(IngestError::DuplicateDate(pair[0]));
        }
        if pair[1] < pair[0] {
            return Err(IngestError::UnorderedDates(pair[1]));
        }
    }
    Ok(())
}

fn check_names(names: &[String]) -> Result<(), IngestError> {
    let mut seen = BTreeSet::new();
    for name in names {
        if !seen.insert(name.as_str()) {
            return Err(IngestError::DuplicateSeriesName(name.clone()));
        }
    }
    Ok(())
}

/// Panel of strictly positive price levels, one row per month.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    dates: Vec<Month>,
    names: Vec<String>,
    values: DMatrix<f64>,
}

impl PricePanel {
    /// Validates shapes, strictly increasing dates, distinct names, and
    /// strictly positive finite values.
    pub fn new(
        dates: Vec<Month>,
        names: Vec<String>,
        values: DMatrix<f64>,
    ) -> Result<Self, IngestError> {
        if values.nrows() != dates.len() || values.ncols() != names.len() {
            return Err(IngestError::ShapeMismatch(format!(
                "{} dates, {} names, {}x{} values",
                dates.len(),
                names.len(),
                values.nrows(),
                values.ncols()
            )));
        }
        check_dates(&dates)?;
        check_names(&names)?;
        for row in 0..values.nrows() {
            for col in 0..values.ncols() {
                let v = values[(row, col)];
                if !v.is_finite() {
                    return Err(IngestError::NonFiniteValue { row: row + 1, col: col + 1 });
                }
                if v <= 0.0 {
                    return Err(IngestError::NonPositivePrice {
                        row: row + 1,
                        col: col + 1,
                        value: v,
                    });
                }
            }
        }
        Ok(PricePanel { dates, names, values })
    }

    pub fn dates(&self) -> &[Month] {
        &self.dates
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn n_obs(&self) -> usize {
        self.dates.len()
    }

    pub fn n_series(&self) -> usize {
        self.names.len()
    }
}

/// Panel of log returns, one row per month transition.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    dates: Vec<Month>,
    names: Vec<String>,
    returns: DMatrix<f64>,
}

impl ReturnPanel {
    /// Validates shapes, strictly increasing dates, distinct names, and
    /// finite values. Returns may be zero or negative.
    pub fn new(
        dates: Vec<Month>,
        names: Vec<String>,
        returns: DMatrix<f64>,
    ) -> Result<Self, IngestError> {
        if returns.nrows() != dates.len() || returns.ncols() != names.len() {
            return Err(IngestError::ShapeMismatch(format!(
                "{} dates, {} names, {}x{} returns",
                dates.len(),
                names.len(),
                returns.nrows(),
                returns.ncols()
            )));
        }
        check_dates(&dates)?;
        check_names(&names)?;
        for row in 0..returns.nrows() {
            for col in 0..returns.ncols() {
                if !returns[(row, col)].is_finite() {
                    return Err(IngestError::NonFiniteValue { row: row + 1, col: col + 1 });
                }
            }
        }
        Ok(ReturnPanel { dates, names, returns })
    }

    pub fn dates(&self) -> &[Month] {
        &self.dates
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn returns(&self) -> &DMatrix<f64> {
        &self.returns
    }

    pub fn n_obs(&self) -> usize {
        self.dates.len()
    }

    pub fn n_series(&self) -> usize {
        self.names.len()
    }

    /// One series as a contiguous vector.
    pub fn series(&self, col: usize) -> Vec<f64> {
        self.returns.column(col).iter().copied().collect()
    }

    /// Restricts the panel to the named series, in the order given.
    pub fn select(&self, keep: &[String]) -> Result<ReturnPanel, IngestError> {
        check_names(keep)?;
        let mut cols = Vec::with_capacity(keep.len());
        for name in keep {
            let idx = self
                .names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| IngestError::UnknownSeries(name.clone()))?;
            cols.push(idx);
        }
        let returns = DMatrix::from_fn(self.n_obs(), cols.len(), |r, c| {
            self.returns[(r, cols[c])]
        });
        ReturnPanel::new(self.dates.clone(), keep.to_vec(), returns)
    }
}

/// Reads a wide CSV of monthly prices: one date column (`YYYY-MM` or
/// `YYYY-MM-DD`), every other column a price series. Rows are sorted by
/// date; every cell must parse as a strictly positive number.
pub fn load_csv(path: &Path, date_column: &str) -> Result<PricePanel, IngestError> {
    if !path.is_file() {
        return Err(IngestError::MissingFile(path.display().to_string()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;

    let headers = reader.headers()?.clone();
    let date_idx = headers
        .iter()
        .position(|h| h == date_column)
        .ok_or_else(|| {
            IngestError::MalformedHeader(format!("no column named {date_column:?}"))
        })?;
    let mut names = Vec::new();
    let mut value_cols = Vec::new();
    for (idx, name) in headers.iter().enumerate() {
        if idx == date_idx {
            continue;
        }
        if name.is_empty() {
            return Err(IngestError::MalformedHeader(format!(
                "empty name for column {}",
                idx + 1
            )));
        }
        names.push(name.to_string());
        value_cols.push(idx);
    }
    if names.is_empty() {
        return Err(IngestError::MalformedHeader(
            "no series columns besides the date column".to_string(),
        ));
    }
    check_names(&names)?;

    let mut rows: Vec<(Month, Vec<f64>)> = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = row_idx + 1;
        if record.len() != headers.len() {
            return Err(IngestError::MalformedHeader(format!(
                "row {row} has {} fields, header has {}",
                record.len(),
                headers.len()
            )));
        }
        let date_cell = &record[date_idx];
        let date = Month::from_str(date_cell).map_err(|_| IngestError::UnparseableCell {
            row,
            col: date_idx + 1,
            value: date_cell.to_string(),
        })?;
        let mut values = Vec::with_capacity(value_cols.len());
        for &col_idx in &value_cols {
            let cell = &record[col_idx];
            let value: f64 = cell.parse().map_err(|_| IngestError::UnparseableCell {
                row,
                col: col_idx + 1,
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(IngestError::UnparseableCell {
                    row,
                    col: col_idx + 1,
                    value: cell.to_string(),
                });
            }
            if value <= 0.0 {
                return Err(IngestError::NonPositivePrice {
                    row,
                    col: col_idx + 1,
                    value,
                });
            }
            values.push(value);
        }
        rows.push((date, values));
    }

    rows.sort_by_key(|(date, _)| *date);
    for pair in rows.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(IngestError::DuplicateDate(pair[0].0));
        }
    }

    let dates: Vec<Month> = rows.iter().map(|(d, _)| *d).collect();
    let values = DMatrix::from_fn(rows.len(), names.len(), |r, c| rows[r].1[c]);
    PricePanel::new(dates, names, values)
}

/// Log returns of a price panel: one row fewer, dated by the later month.
pub fn to_log_returns(panel: &PricePanel) -> Result<ReturnPanel, IngestError> {
    if panel.n_obs() < 2 {
        return Err(IngestError::TooFewObservations { needed: 2, got: panel.n_obs() });
    }
    let t = panel.n_obs() - 1;
    let m = panel.n_series();
    let returns = DMatrix::from_fn(t, m, |r, c| {
        (panel.values[(r + 1, c)] / panel.values[(r, c)]).ln()
    });
    ReturnPanel::new(panel.dates[1..].to_vec(), panel.names.clone(), returns)
}

/// Joins panels column-wise on the intersection of their dates, preserving
/// panel order and within-panel column order. Series names must be unique
/// across all panels.
pub fn align(panels: &[PricePanel]) -> Result<PricePanel, IngestError> {
    let all_names: Vec<String> = panels
        .iter()
        .flat_map(|p| p.names.iter().cloned())
        .collect();
    check_names(&all_names)?;

    let mut common: Option<BTreeSet<Month>> = None;
    for panel in panels {
        let dates: BTreeSet<Month> = panel.dates.iter().copied().collect();
        common = Some(match common {
            None => dates,
            Some(acc) => acc.intersection(&dates).copied().collect(),
        });
    }
    let common = common.unwrap_or_default();
    if common.is_empty() {
        return Err(IngestError::EmptyIntersection);
    }
    let dates: Vec<Month> = common.into_iter().collect();

    let mut values = DMatrix::zeros(dates.len(), all_names.len());
    let mut out_col = 0;
    for panel in panels {
        // Dates are strictly increasing in both lists, so a merge walk finds
        // each common date exactly once.
        let mut src_row = 0;
        for (out_row, date) in dates.iter().enumerate() {
            while panel.dates[src_row] < *date {
                src_row += 1;
            }
            debug_assert_eq!(panel.dates[src_row], *date);
            for c in 0..panel.n_series() {
                values[(out_row, out_col + c)] = panel.values[(src_row, c)];
            }
        }
        out_col += panel.n_series();
    }
    PricePanel::new(dates, all_names, values)
}
