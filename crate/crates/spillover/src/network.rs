//! Net-pairwise spillover networks and centrality rankings.
//!
//! The network has one node per series and a directed edge from the net
//! transmitter to the net receiver of every pair whose net pairwise
//! spillover exceeds a small threshold; the edge weight is that net
//! spillover, so all weights are positive and each pair contributes at most
//! one edge. Shortest-path measures treat strong spillovers as short:
//! the length of an edge is the reciprocal of its weight.

use nalgebra::DMatrix;
use std::fmt;
use thiserror::Error;

use crate::connectedness::SpilloverSummary;

/// Pairwise spillovers at or below this size (in percentage points) are
/// treated as zero and produce no edge.
pub const EDGE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("network has no edges")]
    NoEdges,
    #[error("power iteration did not converge within {0} iterations")]
    NonConvergence(usize),
}

/// Directed edge from net transmitter to net receiver; `weight` is the
/// positive net pairwise spillover in percentage points.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// Directed weighted network of net pairwise spillovers.
#[derive(Debug, Clone)]
pub struct SpilloverNetwork {
    pub names: Vec<String>,
    /// Band label when built from a band summary.
    pub band: Option<String>,
    /// Net total spillover per node; positive for net transmitters.
    pub net: Vec<f64>,
    pub edges: Vec<Edge>,
}

/// Builds the network from a spillover summary. For each pair, the net
/// receiver i (with npdc[(i, j)] > [`EDGE_THRESHOLD`]) gets an incoming
/// edge from j weighted by npdc[(i, j)].
pub fn build_network(summary: &SpilloverSummary) -> SpilloverNetwork {
    let m = summary.names.len();
    let mut edges = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            let d = summary.npdc[(i, j)];
            if d > EDGE_THRESHOLD {
                edges.push(Edge { source: j, target: i, weight: d });
            } else if -d > EDGE_THRESHOLD {
                edges.push(Edge { source: i, target: j, weight: -d });
            }
        }
    }
    SpilloverNetwork {
        names: summary.names.clone(),
        band: summary.band.clone(),
        net: summary.net.clone(),
        edges,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CentralityMeasure {
    Degree,
    Closeness,
    Betweenness,
    Eigenvector,
}

impl fmt::Display for CentralityMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CentralityMeasure::Degree => write!(f, "degree"),
            CentralityMeasure::Closeness => write!(f, "closeness"),
            CentralityMeasure::Betweenness => write!(f, "betweenness"),
            CentralityMeasure::Eigenvector => write!(f, "eigenvector"),
        }
    }
}

/// Scores in node order plus node names sorted by descending score.
/// Ties keep input order (the sort is stable).
#[derive(Debug, Clone)]
pub struct CentralityRanking {
    pub measure: CentralityMeasure,
    pub scores: Vec<f64>,
    pub ranking: Vec<String>,
}

fn ranked(network: &SpilloverNetwork, measure: CentralityMeasure, scores: Vec<f64>) -> CentralityRanking {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|a, b| scores[*b].partial_cmp(&scores[*a]).expect("finite scores"));
    let ranking = order.iter().map(|&i| network.names[i].clone()).collect();
    CentralityRanking { measure, scores, ranking }
}

/// Degree centrality: (in-degree + out-degree) / (M - 1), ignoring
/// weights.
pub fn degree_centrality(network: &SpilloverNetwork) -> CentralityRanking {
    let m = network.names.len();
    let mut degree = vec![0.0_f64; m];
    for edge in &network.edges {
        degree[edge.source] += 1.0;
        degree[edge.target] += 1.0;
    }
    if m > 1 {
        for d in &mut degree {
            *d /= (m - 1) as f64;
        }
    }
    ranked(network, CentralityMeasure::Degree, degree)
}

/// Out-neighbor adjacency with shortest-path lengths 1/weight.
fn adjacency(network: &SpilloverNetwork) -> Vec<Vec<(usize, f64)>> {
    let mut adj = vec![Vec::new(); network.names.len()];
    for edge in &network.edges {
        adj[edge.source].push((edge.target, 1.0 / edge.weight));
    }
    adj
}

fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let m = adj.len();
    let mut dist = vec![f64::INFINITY; m];
    let mut visited = vec![false; m];
    dist[source] = 0.0;
    loop {
        let mut next: Option<usize> = None;
        for v in 0..m {
            if !visited[v]
                && dist[v].is_finite()
                && next.is_none_or(|n| dist[v] < dist[n])
            {
                next = Some(v);
            }
        }
        let Some(v) = next else { break };
        visited[v] = true;
        for &(w, len) in &adj[v] {
            let candidate = dist[v] + len;
            if candidate < dist[w] {
                dist[w] = candidate;
            }
        }
    }
    dist
}

/// Out-closeness: reachable count divided by the summed shortest-path
/// lengths to the reachable nodes; 0 when nothing is reachable.
pub fn closeness_centrality(network: &SpilloverNetwork) -> CentralityRanking {
    let adj = adjacency(network);
    let m = adj.len();
    let mut scores = vec![0.0_f64; m];
    for (s, score) in scores.iter_mut().enumerate() {
        let dist = dijkstra(&adj, s);
        let mut reachable = 0.0;
        let mut total = 0.0;
        for (v, d) in dist.iter().enumerate() {
            if v != s && d.is_finite() {
                reachable += 1.0;
                total += d;
            }
        }
        if total > 0.0 {
            *score = reachable / total;
        }
    }
    ranked(network, CentralityMeasure::Closeness, scores)
}

fn close_enough(a: f64, b: f64) -> bool {
    // An unset distance is infinite and never ties.
    a.is_finite() && b.is_finite() && (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Betweenness centrality: for every ordered pair (s, t), a node gets the
/// fraction of shortest s-t paths passing through it, accumulated by
/// Brandes' algorithm. Path-length ties are detected with a relative
/// 1e-12 tolerance.
pub fn betweenness_centrality(network: &SpilloverNetwork) -> CentralityRanking {
    let adj = adjacency(network);
    let m = adj.len();
    let mut scores = vec![0.0_f64; m];
    for s in 0..m {
        let mut dist = vec![f64::INFINITY; m];
        let mut n_paths = vec![0.0_f64; m];
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut visited = vec![false; m];
        let mut order = Vec::with_capacity(m);
        dist[s] = 0.0;
        n_paths[s] = 1.0;
        loop {
            let mut next: Option<usize> = None;
            for v in 0..m {
                if !visited[v]
                    && dist[v].is_finite()
                    && next.is_none_or(|n| dist[v] < dist[n])
                {
                    next = Some(v);
                }
            }
            let Some(v) = next else { break };
            visited[v] = true;
            order.push(v);
            for &(w, len) in &adj[v] {
                let candidate = dist[v] + len;
                if close_enough(candidate, dist[w]) {
                    n_paths[w] += n_paths[v];
                    preds[w].push(v);
                } else if candidate < dist[w] {
                    dist[w] = candidate;
                    n_paths[w] = n_paths[v];
                    preds[w] = vec![v];
                }
            }
        }
        let mut dependency = vec![0.0_f64; m];
        for &v in order.iter().rev() {
            for &u in &preds[v] {
                dependency[u] += n_paths[u] / n_paths[v] * (1.0 + dependency[v]);
            }
            if v != s {
                scores[v] += dependency[v];
            }
        }
    }
    ranked(network, CentralityMeasure::Betweenness, scores)
}

/// Eigenvector centrality of the symmetrized weight matrix (W + W')/2,
/// computed by power iteration from a uniform start vector (tolerance
/// 1e-10, at most 1000 iterations) and normalized to unit maximum.
pub fn eigenvector_centrality(
    network: &SpilloverNetwork,
) -> Result<CentralityRanking, NetworkError> {
    const MAX_ITERATIONS: usize = 1000;
    const TOLERANCE: f64 = 1e-10;
    let m = network.names.len();
    if network.edges.is_empty() {
        return Err(NetworkError::NoEdges);
    }
    let mut w = DMatrix::zeros(m, m);
    for edge in &network.edges {
        let half = edge.weight * 0.5;
        w[(edge.source, edge.target)] += half;
        w[(edge.target, edge.source)] += half;
    }
    // A positive diagonal shift keeps the dominant eigenvalue simple and
    // the iterate entrywise nonnegative without changing the eigenvector.
    let shift = (0..m).map(|i| w.row(i).sum()).fold(0.0_f64, f64::max);
    for i in 0..m {
        w[(i, i)] += shift;
    }

    let mut v = DMatrix::from_element(m, 1, 1.0 / (m as f64).sqrt());
    for _ in 0..MAX_ITERATIONS {
        let mut next = &w * &v;
        let norm = next.norm();
        next /= norm;
        let delta = (&next - &v).abs().max();
        v = next;
        if delta < TOLERANCE {
            let peak = v.abs().max();
            let scores = (0..m).map(|i| (v[(i, 0)] / peak).abs()).collect();
            return Ok(ranked(network, CentralityMeasure::Eigenvector, scores));
        }
    }
    Err(NetworkError::NonConvergence(MAX_ITERATIONS))
}
