//! Shared generators and independent oracles for the integration suites.
//!
//! The oracles recompute every quantity from first principles with scalar
//! loops over plain `Vec` storage, so a disagreement points at the
//! production implementation rather than at a shared code path.

#![allow(dead_code)]
// Index loops mirror the subscripts in the definitions being checked.
#![allow(clippy::needless_range_loop)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spillover::frequency::FrequencyBand;
use spillover::network::SpilloverNetwork;
use spillover::var::VarModel;

pub type Mat = Vec<Vec<f64>>;

pub fn zeros(rows: usize, cols: usize) -> Mat {
    vec![vec![0.0; cols]; rows]
}

fn identity(n: usize) -> Mat {
    let mut out = zeros(n, n);
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    out
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (rows, inner, cols) = (a.len(), b.len(), b[0].len());
    let mut out = zeros(rows, cols);
    for i in 0..rows {
        for k in 0..inner {
            let aik = a[i][k];
            for j in 0..cols {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// Moving-average terms by raising the companion matrix to powers, instead
/// of the production convolution recursion.
pub fn oracle_vma(model: &VarModel, horizon: usize) -> Vec<Mat> {
    let m = model.n_series();
    let p = model.lag_order();
    let dim = m * p;
    let mut companion = zeros(dim, dim);
    for (l, block) in model.coefficients().iter().enumerate() {
        for i in 0..m {
            for j in 0..m {
                companion[i][l * m + j] = block[(i, j)];
            }
        }
    }
    for i in m..dim {
        companion[i][i - m] = 1.0;
    }
    let mut power = identity(dim);
    let mut terms = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let mut top = zeros(m, m);
        for i in 0..m {
            top[i][..m].copy_from_slice(&power[i][..m]);
        }
        terms.push(top);
        power = matmul(&power, &companion);
    }
    terms
}

/// Generalized FEVD by direct summation of the defining triple products.
/// Returns (raw, row-normalized) shares.
pub fn oracle_gfevd(model: &VarModel, horizon: usize) -> (Mat, Mat) {
    let m = model.n_series();
    let sigma = model.sigma();
    let terms = oracle_vma(model, horizon);
    let mut numerator = zeros(m, m);
    let mut denominator = vec![0.0_f64; m];
    for a in &terms {
        for i in 0..m {
            for j in 0..m {
                // e_i' A_h Sigma e_j
                let mut dot = 0.0;
                for k in 0..m {
                    dot += a[i][k] * sigma[(k, j)];
                }
                numerator[i][j] += dot * dot;
            }
            // (A_h Sigma A_h')_{ii}
            let mut variance = 0.0;
            for k in 0..m {
                for l in 0..m {
                    variance += a[i][k] * sigma[(k, l)] * a[i][l];
                }
            }
            denominator[i] += variance;
        }
    }
    let mut raw = zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            raw[i][j] = numerator[i][j] / (sigma[(j, j)] * denominator[i]);
        }
    }
    let mut normalized = zeros(m, m);
    for i in 0..m {
        let row_sum: f64 = raw[i].iter().sum();
        for j in 0..m {
            normalized[i][j] = raw[i][j] / row_sum;
        }
    }
    (raw, normalized)
}

/// Frequency-band variance shares by an explicit scalar DFT of the
/// moving-average filter, normalized by the time-domain row totals.
/// Returns one matrix per band, in band order.
pub fn oracle_band_shares(
    model: &VarModel,
    horizon: usize,
    bands: &[FrequencyBand],
    grid_size: usize,
) -> Vec<Mat> {
    let m = model.n_series();
    let sigma = model.sigma();
    let terms = oracle_vma(model, horizon);
    // Row totals on the numerator scale, sum over j and h of
    // (e_i' A_h Sigma e_j)^2 / sigma_jj; the forecast-error variance of
    // row i divides both sides of the share and cancels.
    let mut row_totals = vec![0.0_f64; m];
    for a in &terms {
        for i in 0..m {
            for j in 0..m {
                let mut dot = 0.0;
                for k in 0..m {
                    dot += a[i][k] * sigma[(k, j)];
                }
                row_totals[i] += dot * dot / sigma[(j, j)];
            }
        }
    }

    let mut shares = vec![zeros(m, m); bands.len()];
    let two_pi = 2.0 * std::f64::consts::PI;
    for k in 0..grid_size {
        let omega = two_pi * k as f64 / grid_size as f64;
        // Psi(omega) = sum_h A_h e^{-i omega h}, entry by entry.
        let mut psi_re = zeros(m, m);
        let mut psi_im = zeros(m, m);
        for (h, a) in terms.iter().enumerate() {
            let angle = omega * h as f64;
            let (sin, cos) = angle.sin_cos();
            for i in 0..m {
                for j in 0..m {
                    psi_re[i][j] += a[i][j] * cos;
                    psi_im[i][j] -= a[i][j] * sin;
                }
            }
        }
        // Fold conjugate frequencies onto [0, pi] before band lookup.
        let folded = omega.min(two_pi - omega);
        let band_index = bands
            .iter()
            .position(|b| b.contains(folded))
            .unwrap_or_else(|| panic!("no band contains folded frequency {folded}"));
        for i in 0..m {
            for j in 0..m {
                // (Psi Sigma)_{ij} as a complex number.
                let mut re = 0.0;
                let mut im = 0.0;
                for l in 0..m {
                    re += psi_re[i][l] * sigma[(l, j)];
                    im += psi_im[i][l] * sigma[(l, j)];
                }
                shares[band_index][i][j] +=
                    (re * re + im * im) / (sigma[(j, j)] * grid_size as f64);
            }
        }
    }
    // The per-frequency numerators average back to the time-domain ones,
    // so dividing by the raw row totals is the whole normalization.
    for band in &mut shares {
        for (i, row) in band.iter_mut().enumerate() {
            for v in row.iter_mut() {
                *v /= row_totals[i];
            }
        }
    }
    shares
}

/// A reproducible stable VAR with a random dense covariance. Coefficients
/// are rescaled so the companion spectral radius is at most `max_radius`.
pub fn random_stable_var(seed: u64, m: usize, lag: usize, max_radius: f64) -> VarModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..m).map(|i| format!("s{i}")).collect();
    let mut coefficients: Vec<DMatrix<f64>> = (0..lag)
        .map(|_| DMatrix::from_fn(m, m, |_, _| rng.random::<f64>() * 0.9 - 0.45))
        .collect();
    let mut lower = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            lower[(i, j)] = if i == j {
                0.5 + rng.random::<f64>()
            } else {
                rng.random::<f64>() - 0.5
            };
        }
    }
    let sigma = &lower * lower.transpose();
    let intercept = DVector::from_fn(m, |_, _| rng.random::<f64>() * 0.02 - 0.01);

    let probe = VarModel::new(names.clone(), intercept.clone(), coefficients.clone(), sigma.clone())
        .expect("probe model");
    let radius = probe.spectral_radius();
    if radius > max_radius {
        // Scaling lag matrix l by s^l scales every companion eigenvalue by s.
        let s = max_radius / radius;
        for (l, block) in coefficients.iter_mut().enumerate() {
            *block *= s.powi(l as i32 + 1);
        }
    }
    VarModel::new(names, intercept, coefficients, sigma).expect("stable model")
}

fn network_lengths(network: &SpilloverNetwork) -> Mat {
    let m = network.names.len();
    let mut lengths = vec![vec![f64::INFINITY; m]; m];
    for edge in &network.edges {
        lengths[edge.source][edge.target] = 1.0 / edge.weight;
    }
    lengths
}

/// Closeness centrality checked with Floyd-Warshall distances.
pub fn oracle_closeness(network: &SpilloverNetwork) -> Vec<f64> {
    let m = network.names.len();
    let mut dist = network_lengths(network);
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                let through = dist[i][k] + dist[k][j];
                if through < dist[i][j] {
                    dist[i][j] = through;
                }
            }
        }
    }
    (0..m)
        .map(|i| {
            let mut reachable = 0.0;
            let mut total = 0.0;
            for j in 0..m {
                if j != i && dist[i][j].is_finite() {
                    reachable += 1.0;
                    total += dist[i][j];
                }
            }
            if total > 0.0 {
                reachable / total
            } else {
                0.0
            }
        })
        .collect()
}

fn all_paths(
    lengths: &Mat,
    current: usize,
    target: usize,
    visited: &mut Vec<bool>,
    trail: &mut Vec<usize>,
    length: f64,
    found: &mut Vec<(f64, Vec<usize>)>,
) {
    if current == target {
        found.push((length, trail.clone()));
        return;
    }
    for (next, len) in lengths[current].iter().enumerate() {
        if len.is_finite() && !visited[next] {
            visited[next] = true;
            trail.push(next);
            all_paths(lengths, next, target, visited, trail, length + len, found);
            trail.pop();
            visited[next] = false;
        }
    }
}

/// Betweenness centrality checked by enumerating every simple path per
/// ordered pair and counting the shortest ones through each interior node.
/// Exponential in the node count; intended for small test networks.
pub fn oracle_betweenness(network: &SpilloverNetwork) -> Vec<f64> {
    let m = network.names.len();
    let lengths = network_lengths(network);
    let mut scores = vec![0.0_f64; m];
    for s in 0..m {
        for t in 0..m {
            if s == t {
                continue;
            }
            let mut found = Vec::new();
            let mut visited = vec![false; m];
            visited[s] = true;
            all_paths(&lengths, s, t, &mut visited, &mut vec![s], 0.0, &mut found);
            if found.is_empty() {
                continue;
            }
            let best = found.iter().map(|(l, _)| *l).fold(f64::INFINITY, f64::min);
            let shortest: Vec<&Vec<usize>> = found
                .iter()
                .filter(|(l, _)| (l - best).abs() <= 1e-9 * best.max(1.0))
                .map(|(_, path)| path)
                .collect();
            let total = shortest.len() as f64;
            for v in 0..m {
                if v == s || v == t {
                    continue;
                }
                let through = shortest.iter().filter(|path| path.contains(&v)).count();
                scores[v] += through as f64 / total;
            }
        }
    }
    scores
}

/// Eigenvector centrality checked with a dense symmetric eigensolver on
/// the symmetrized weights, scaled to unit maximum.
pub fn oracle_eigenvector(network: &SpilloverNetwork) -> Vec<f64> {
    let m = network.names.len();
    let mut w = DMatrix::zeros(m, m);
    for edge in &network.edges {
        let half = edge.weight * 0.5;
        w[(edge.source, edge.target)] += half;
        w[(edge.target, edge.source)] += half;
    }
    let eigen = nalgebra::SymmetricEigen::new(w);
    let mut top = 0;
    for i in 0..m {
        if eigen.eigenvalues[i] > eigen.eigenvalues[top] {
            top = i;
        }
    }
    let v: DVector<f64> = eigen.eigenvectors.column(top).into_owned();
    let peak = v.amax();
    (0..m).map(|i| (v[i] / peak).abs()).collect()
}
