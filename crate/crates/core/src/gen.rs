//! Seeded instance generators, including the lower-bound family.

use crate::metric::{FiniteMetric, TerminalInstance};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Instance families. `k` and `eps` are shared by all kinds; the lower-bound
/// kind derives `k` from the sphere net instead.
#[derive(Debug, Clone, PartialEq)]
pub enum GenSpec {
    /// 1D points `0, spacing, 2*spacing, ...`.
    Line { n: usize, spacing: f64 },
    /// Uniform points in the unit square.
    UniformSquare { n: usize },
    /// `k` cluster centers in `[0,1]^dim`; remaining points scatter around
    /// them with the given spread. Terminals are the centers.
    GaussianClusters { n: usize, dim: usize, spread: f64 },
    /// 2D integer grid, row-major, truncated to `n` points.
    Grid { n: usize },
    /// Claim-style family: `K` is an `eps`-separated net of the unit sphere
    /// in `R^ceil(log2 lambda)`, cross distances 1, non-terminal pairs 2.
    /// `k` is ignored; the terminal count is the net size capped at `n/2`.
    LowerBound { lambda: u32, n: usize },
    /// `K` is a unit grid; the rest of the metric is a random shortest-path
    /// completion with non-terminal edge weights of order the `K` diameter.
    Completion { n: usize },
}

/// Farthest-point sampling for terminal selection: start at index 0, then
/// repeatedly take the point maximizing the distance to the chosen set
/// (lowest index on ties). Deterministic given the metric.
pub fn farthest_point_terminals(metric: &FiniteMetric, k: usize) -> Vec<usize> {
    let n = metric.n();
    let mut chosen = vec![0usize];
    let mut dist: Vec<f64> = (0..n).map(|x| metric.dist(0, x)).collect();
    while chosen.len() < k.min(n) {
        let mut best = 0usize;
        let mut best_d = -1.0;
        for (x, &d) in dist.iter().enumerate() {
            if d > best_d {
                best_d = d;
                best = x;
            }
        }
        chosen.push(best);
        for x in 0..n {
            dist[x] = dist[x].min(metric.dist(best, x));
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Greedy separation-only net over explicit coordinates: keeps a point iff
/// it is farther than `sep` from every kept point.
fn separated_subset(samples: &[Vec<f64>], sep: f64) -> Vec<Vec<f64>> {
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for s in samples {
        let ok = kept.iter().all(|q| {
            let d2: f64 = q.iter().zip(s).map(|(a, b)| (a - b) * (a - b)).sum();
            d2.sqrt() > sep
        });
        if ok {
            kept.push(s.clone());
        }
    }
    kept
}

pub fn gen_instance(spec: &GenSpec, k: usize, eps: f64, seed: u64) -> Result<TerminalInstance> {
    match *spec {
        GenSpec::Line { n, spacing } => {
            if n < 2 || !(spacing > 0.0) {
                return Err(Error::BadGenParams(format!(
                    "line needs n >= 2 and positive spacing, got n={n}, spacing={spacing}"
                )));
            }
            let coords: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 * spacing]).collect();
            let m = FiniteMetric::from_points(coords)?;
            let terminals = farthest_point_terminals(&m, k);
            TerminalInstance::new(m, terminals, eps)
        }
        GenSpec::UniformSquare { n } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let coords: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
                .collect();
            let m = FiniteMetric::from_points(coords)?;
            let terminals = farthest_point_terminals(&m, k);
            TerminalInstance::new(m, terminals, eps)
        }
        GenSpec::GaussianClusters { n, dim, spread } => {
            if k == 0 || n < k || dim == 0 || !(spread > 0.0) {
                return Err(Error::BadGenParams(format!(
                    "gaussian-clusters needs 1 <= k <= n, dim >= 1, spread > 0 \
                     (n={n}, k={k}, dim={dim}, spread={spread})"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let centers: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
                .collect();
            let mut coords = centers.clone();
            while coords.len() < n {
                let c = &centers[rng.gen_range(0..k)];
                coords.push(
                    c.iter()
                        .map(|&x| x + (rng.gen::<f64>() * 2.0 - 1.0) * spread)
                        .collect(),
                );
            }
            let m = FiniteMetric::from_points(coords)?;
            TerminalInstance::new(m, (0..k).collect(), eps)
        }
        GenSpec::Grid { n } => {
            let side = (n as f64).sqrt().ceil() as usize;
            let coords: Vec<Vec<f64>> = (0..n)
                .map(|i| vec![(i % side) as f64, (i / side) as f64])
                .collect();
            let m = FiniteMetric::from_points(coords)?;
            let terminals = farthest_point_terminals(&m, k);
            TerminalInstance::new(m, terminals, eps)
        }
        GenSpec::LowerBound { lambda, n } => gen_lower_bound(lambda, eps, n, seed),
        GenSpec::Completion { n } => gen_completion(n, k, eps, seed),
    }
}

/// The lower-bound family. `n` is the total point count; the terminal count
/// is the sphere net size, capped at `n/2` (a subset of a separated set
/// stays separated, which is all the detour argument needs).
fn gen_lower_bound(lambda: u32, eps: f64, n: usize, seed: u64) -> Result<TerminalInstance> {
    if lambda < 2 {
        return Err(Error::BadGenParams(format!("lambda must be >= 2, got {lambda}")));
    }
    if n < 4 {
        return Err(Error::BadGenParams(format!("lower-bound needs n >= 4, got {n}")));
    }
    let t = (lambda as f64).log2().ceil().max(1.0) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Vec<f64>> = (0..10_000 * t)
        .map(|_| {
            loop {
                let v: Vec<f64> = (0..t).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
                let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-6 {
                    return v.iter().map(|x| x / norm).collect();
                }
            }
        })
        .collect();
    let mut net = separated_subset(&samples, eps);
    net.truncate(n / 2);
    let k = net.len();
    if k < 2 {
        return Err(Error::BadGenParams(
            "sphere net degenerated to fewer than 2 terminals".into(),
        ));
    }
    let mut matrix = vec![0.0f64; n * n];
    let set = |m: &mut Vec<f64>, i: usize, j: usize, v: f64| {
        m[i * n + j] = v;
        m[j * n + i] = v;
    };
    for i in 0..n {
        for j in (i + 1)..n {
            let d = if i < k && j < k {
                net[i]
                    .iter()
                    .zip(&net[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            } else if i < k || j < k {
                1.0
            } else {
                2.0
            };
            set(&mut matrix, i, j, d);
        }
    }
    let m = FiniteMetric::from_matrix(n, matrix)?;
    TerminalInstance::new(m, (0..k).collect(), eps)
}

/// Unit-grid terminals plus a random shortest-path completion: every edge
/// touching a non-terminal gets a weight in `[diam(K)/2, diam(K)]`, then the
/// whole graph is closed under shortest paths.
fn gen_completion(n: usize, k: usize, eps: f64, seed: u64) -> Result<TerminalInstance> {
    if k < 2 || n < k {
        return Err(Error::BadGenParams(format!(
            "completion needs 2 <= k <= n, got n={n}, k={k}"
        )));
    }
    let side = (k as f64).sqrt().ceil() as usize;
    let grid: Vec<(f64, f64)> = (0..k)
        .map(|i| ((i % side) as f64, (i / side) as f64))
        .collect();
    let mut diam: f64 = 0.0;
    let dist_k = |a: (f64, f64), b: (f64, f64)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    for i in 0..k {
        for j in (i + 1)..k {
            diam = diam.max(dist_k(grid[i], grid[j]));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in w.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let d = if i < k && j < k {
                dist_k(grid[i], grid[j])
            } else {
                diam * (0.5 + 0.5 * rng.gen::<f64>())
            };
            w[i][j] = d;
            w[j][i] = d;
        }
    }
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = w[i][l] + w[l][j];
                if via < w[i][j] {
                    w[i][j] = via;
                }
            }
        }
    }
    let mut matrix = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            matrix[i * n + j] = w[i][j];
        }
    }
    let m = FiniteMetric::from_matrix(n, matrix)?;
    TerminalInstance::new(m, (0..k).collect(), eps)
}
