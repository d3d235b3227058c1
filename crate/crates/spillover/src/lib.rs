//! Spillover connectedness analysis for monthly return panels.
//!
//! The crate estimates vector autoregressions on log returns, computes
//! generalized forecast-error-variance decompositions, aggregates them into
//! total / directional / net / pairwise spillover measures in both the time
//! domain and across frequency bands, derives directed spillover networks
//! with centrality rankings, and tracks all of it through time with a
//! forgetting-factor Kalman filter.
//!
//! Modules are layered bottom-up:
//!
//! - [`ingest`]: monthly price panels, alignment, log returns
//! - [`diagnostics`]: descriptive statistics, normality and unit-root tests
//! - [`var`]: constant-parameter VAR estimation, stability, moving-average form
//! - [`tvpvar`]: time-varying-parameter VAR via forgetting factors
//! - [`connectedness`]: generalized FEVD and time-domain spillover measures
//! - [`frequency`]: spectral decomposition of the FEVD into frequency bands
//! - [`network`]: net-pairwise spillover networks and centrality measures
//! - [`pipeline`]: configuration, orchestration, and file outputs

pub mod connectedness;
pub mod diagnostics;
pub mod frequency;
pub mod ingest;
pub mod network;
pub mod pipeline;
pub mod tvpvar;
pub mod var;
