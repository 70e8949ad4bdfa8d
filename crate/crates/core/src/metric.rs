//! Finite metric spaces and terminal instances.

use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Relative tolerance for distance comparisons. Values within relative
/// `1e-9` of each other are treated as equal for separation and covering.
pub const REL_TOL: f64 = 1e-9;

/// `a <= b` up to relative tolerance.
#[inline]
pub fn approx_le(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * a.abs().max(b.abs())
}

/// `a >= b` up to relative tolerance.
#[inline]
pub fn approx_ge(a: f64, b: f64) -> bool {
    approx_le(b, a)
}

/// `a == b` up to relative tolerance.
#[inline]
pub fn approx_eq(a: f64, b: f64) -> bool {
    approx_le(a, b) && approx_le(b, a)
}

/// Above this point count, Euclidean distances are computed on demand
/// instead of materializing the n^2 matrix.
const MATRIX_CACHE_LIMIT: usize = 5000;

/// Triangle inequality is checked exhaustively up to this size, sampled above.
const TRIANGLE_EXHAUSTIVE_LIMIT: usize = 200;
const TRIANGLE_SAMPLES: usize = 100_000;

enum MetricData {
    Explicit { matrix: Vec<f64> },
    Euclidean { coords: Vec<Vec<f64>>, cache: Option<Vec<f64>> },
}

/// A finite metric space `(X, d)` over points `0..n`, backed either by an
/// explicit distance matrix or by a Euclidean point list.
pub struct FiniteMetric {
    n: usize,
    data: MetricData,
}

impl FiniteMetric {
    /// Builds from a flattened row-major `n x n` distance matrix.
    pub fn from_matrix(n: usize, matrix: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyPointList);
        }
        if matrix.len() != n * n {
            return Err(Error::InvalidMetric(format!(
                "matrix has {} entries, expected {}",
                matrix.len(),
                n * n
            )));
        }
        let m = FiniteMetric { n, data: MetricData::Explicit { matrix } };
        m.validate()?;
        Ok(m)
    }

    /// Builds from a Euclidean point list; all points must share a dimension.
    pub fn from_points(coords: Vec<Vec<f64>>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyPointList);
        }
        let dim = coords[0].len();
        if coords.iter().any(|c| c.len() != dim) {
            return Err(Error::InvalidMetric("inconsistent point dimensions".into()));
        }
        let n = coords.len();
        let cache = if n <= MATRIX_CACHE_LIMIT {
            let mut matrix = vec![0.0; n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = euclid(&coords[i], &coords[j]);
                    matrix[i * n + j] = d;
                    matrix[j * n + i] = d;
                }
            }
            Some(matrix)
        } else {
            None
        };
        Ok(FiniteMetric { n, data: MetricData::Euclidean { coords, cache } })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.data {
            MetricData::Explicit { matrix } => matrix[i * self.n + j],
            MetricData::Euclidean { coords, cache } => match cache {
                Some(m) => m[i * self.n + j],
                None => euclid(&coords[i], &coords[j]),
            },
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.data, MetricData::Euclidean { .. })
    }

    /// Point coordinates, when the metric is Euclidean.
    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        match &self.data {
            MetricData::Euclidean { coords, .. } => Some(coords),
            MetricData::Explicit { .. } => None,
        }
    }

    pub fn diameter(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                d = d.max(self.dist(i, j));
            }
        }
        d
    }

    /// Smallest strictly positive pairwise distance, if any.
    pub fn min_positive_distance(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = self.dist(i, j);
                if d > 0.0 && best.map_or(true, |b| d < b) {
                    best = Some(d);
                }
            }
        }
        best
    }

    /// Distance from `x` to the closest point of `set`, with the lowest-index
    /// minimizer. Panics on an empty set.
    pub fn nearest_in(&self, x: usize, set: &[usize]) -> (usize, f64) {
        assert!(!set.is_empty(), "nearest_in on empty set");
        let mut best = (set[0], self.dist(x, set[0]));
        for &p in &set[1..] {
            let d = self.dist(x, p);
            if d < best.1 {
                best = (p, d);
            }
        }
        best
    }

    /// Checks zero diagonal, symmetry, nonnegativity, and the triangle
    /// inequality (exhaustively for small n, on deterministic samples above).
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if self.dist(i, i) != 0.0 {
                return Err(Error::InvalidMetric(format!("dist({i},{i}) != 0")));
            }
            for j in (i + 1)..n {
                let d = self.dist(i, j);
                if !(d >= 0.0) {
                    return Err(Error::InvalidMetric(format!("dist({i},{j}) = {d} < 0")));
                }
                if !approx_eq(d, self.dist(j, i)) {
                    return Err(Error::InvalidMetric(format!("asymmetric pair ({i},{j})")));
                }
            }
        }
        let check = |i: usize, l: usize, j: usize| -> Result<()> {
            let lhs = self.dist(i, j);
            let rhs = self.dist(i, l) + self.dist(l, j);
            if !approx_le(lhs, rhs) {
                return Err(Error::InvalidMetric(format!(
                    "triangle inequality fails on ({i},{l},{j}): {lhs} > {rhs}"
                )));
            }
            Ok(())
        };
        if n <= TRIANGLE_EXHAUSTIVE_LIMIT {
            for i in 0..n {
                for l in 0..n {
                    for j in 0..n {
                        check(i, l, j)?;
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x7452_494e);
            for _ in 0..TRIANGLE_SAMPLES {
                let i = rng.gen_range(0..n);
                let l = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                check(i, l, j)?;
            }
        }
        Ok(())
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A [`FiniteMetric`] together with a terminal set `K` and parameter `ε`.
pub struct TerminalInstance {
    pub metric: FiniteMetric,
    terminals: Vec<usize>,
    is_terminal: Vec<bool>,
    eps: f64,
    delta: f64,
    big_delta: f64,
}

impl TerminalInstance {
    pub fn new(metric: FiniteMetric, mut terminals: Vec<usize>, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::BadEpsilon(eps));
        }
        if eps > 1.0 / 20.0 {
            log::warn!(
                "eps = {eps} exceeds 1/20; certified stretch constants assume eps <= 1/20"
            );
        }
        if terminals.is_empty() {
            return Err(Error::NeedOneTerminal);
        }
        terminals.sort_unstable();
        let n = metric.n();
        let mut is_terminal = vec![false; n];
        for &t in &terminals {
            if t >= n {
                return Err(Error::IndexOutOfRange(t, n));
            }
            if is_terminal[t] {
                return Err(Error::DuplicateTerminal(t));
            }
            is_terminal[t] = true;
        }
        let mut delta = f64::INFINITY;
        let mut big_delta = 0.0f64;
        for (a, &u) in terminals.iter().enumerate() {
            for &v in &terminals[a + 1..] {
                let d = metric.dist(u, v);
                delta = delta.min(d);
                big_delta = big_delta.max(d);
            }
        }
        if terminals.len() >= 2 && !(delta > 0.0) {
            return Err(Error::InvalidMetric(
                "two distinct terminals at distance zero".into(),
            ));
        }
        Ok(TerminalInstance { metric, terminals, is_terminal, eps, delta, big_delta })
    }

    pub fn n(&self) -> usize {
        self.metric.n()
    }

    pub fn k(&self) -> usize {
        self.terminals.len()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn terminals(&self) -> &[usize] {
        &self.terminals
    }

    #[inline]
    pub fn is_terminal(&self, x: usize) -> bool {
        self.is_terminal[x]
    }

    /// Minimum distance over distinct terminal pairs; infinite when k = 1.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Maximum distance over terminal pairs.
    pub fn big_delta(&self) -> f64 {
        self.big_delta
    }

    /// Aspect ratio of the terminal set.
    pub fn aspect_ratio(&self) -> f64 {
        self.big_delta / self.delta
    }

    /// Nearest terminal to `x`, ties broken by smallest index.
    pub fn nearest_terminal(&self, x: usize) -> (usize, f64) {
        self.metric.nearest_in(x, &self.terminals)
    }

    /// Distance from `x` to the terminal set.
    pub fn dist_to_terminals(&self, x: usize) -> f64 {
        self.nearest_terminal(x).1
    }
}
