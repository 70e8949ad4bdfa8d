//! Brute-force ground truth and stretch auditing.
//!
//! Everything here is deliberately independent of the construction code:
//! shortest paths are recomputed from plain edge lists, and an all-pairs
//! Floyd-Warshall implementation cross-checks the Dijkstra used for audits.

use crate::metric::{approx_le, TerminalInstance};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(PartialEq)]
struct HeapItem {
    dist: f64,
    node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Exact single-source shortest paths from each of `sources` over the given
/// undirected weighted edge list. Unreachable nodes get `f64::INFINITY`.
pub fn graph_distances(
    n: usize,
    edges: &[(usize, usize, f64)],
    sources: &[usize],
) -> Vec<Vec<f64>> {
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(a, b, w) in edges {
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    sources
        .par_iter()
        .map(|&s| {
            let mut dist = vec![f64::INFINITY; n];
            dist[s] = 0.0;
            let mut heap = BinaryHeap::new();
            heap.push(HeapItem { dist: 0.0, node: s });
            while let Some(HeapItem { dist: d, node: u }) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &(v, w) in &adj[u] {
                    let nd = d + w;
                    if nd < dist[v] {
                        dist[v] = nd;
                        heap.push(HeapItem { dist: nd, node: v });
                    }
                }
            }
            dist
        })
        .collect()
}

/// Independent all-pairs shortest paths, used to cross-check
/// [`graph_distances`] in tests.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(a, b, w) in edges {
        if w < d[a][b] {
            d[a][b] = w;
            d[b][a] = w;
        }
    }
    for l in 0..n {
        for i in 0..n {
            if d[i][l].is_infinite() {
                continue;
            }
            for j in 0..n {
                let via = d[i][l] + d[l][j];
                if via < d[i][j] {
                    d[i][j] = via;
                    d[j][i] = via;
                }
            }
        }
    }
    d
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceSummary {
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub delta: f64,
    pub diameter_k: f64,
    pub aspect_ratio_k: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_x: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aspect_ratio_y: Option<f64>,
}

impl InstanceSummary {
    pub fn from_instance(inst: &TerminalInstance) -> Self {
        InstanceSummary {
            n: inst.n(),
            k: inst.k(),
            eps: inst.eps(),
            delta: inst.delta(),
            diameter_k: inst.big_delta(),
            aspect_ratio_k: inst.aspect_ratio(),
            lambda_x: None,
            lambda_k: None,
            aspect_ratio_y: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WorstPair {
    pub x: usize,
    pub terminal: usize,
    pub true_dist: f64,
    pub reported_dist: f64,
    pub stretch: f64,
}

/// Per-pair and aggregate distortion statistics over `K x X`.
#[derive(Debug, Clone, Serialize)]
pub struct StretchReport {
    pub instance: InstanceSummary,
    pub structure_kind: String,
    /// Structure-specific size counters (edge counts, label sizes, |Y|, ...).
    pub counters: Vec<(String, f64)>,
    pub pairs_audited: usize,
    pub max_stretch: f64,
    pub min_stretch: f64,
    pub mean_stretch: f64,
    pub p50_stretch: f64,
    pub p90_stretch: f64,
    pub p99_stretch: f64,
    pub certified_bound: f64,
    /// Smallest allowed ratio; 1.0 for non-contracting structures.
    pub contraction_bound: f64,
    pub worst_pairs: Vec<WorstPair>,
    pub pass: bool,
}

/// Audits every pair in `K x X`: `eval(v, x)` must return the structure's
/// reported distance for terminal `v` and point `x`. Identical indices count
/// as stretch 1.
pub fn audit_kx<F>(
    inst: &TerminalInstance,
    structure_kind: &str,
    counters: Vec<(String, f64)>,
    certified_bound: f64,
    contraction_bound: f64,
    eval: F,
) -> StretchReport
where
    F: Fn(usize, usize) -> f64 + Sync + Send,
{
    let n = inst.n();
    let eval = &eval;
    let mut pairs: Vec<WorstPair> = inst
        .terminals()
        .par_iter()
        .flat_map_iter(|&v| {
            (0..n).map(move |x| {
                let d = inst.metric.dist(v, x);
                let rep = if x == v { 0.0 } else { eval(v, x) };
                let stretch = if x == v {
                    1.0
                } else if d == 0.0 {
                    if rep.abs() <= 1e-12 {
                        1.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    rep / d
                };
                WorstPair { x, terminal: v, true_dist: d, reported_dist: rep, stretch }
            })
        })
        .collect();
    let stretches: Vec<f64> = pairs.iter().map(|p| p.stretch).collect();
    let max = stretches.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = stretches.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = stretches.iter().sum::<f64>() / stretches.len() as f64;
    let mut sorted = stretches;
    sorted.sort_by(|a, b| a.total_cmp(b));
    let pct = |q: f64| sorted[((sorted.len() - 1) as f64 * q) as usize];
    pairs.sort_by(|a, b| b.stretch.total_cmp(&a.stretch));
    pairs.truncate(10);
    let pass = approx_le(max, certified_bound) && approx_le(contraction_bound, min);
    StretchReport {
        instance: InstanceSummary::from_instance(inst),
        structure_kind: structure_kind.to_string(),
        counters,
        pairs_audited: inst.k() * n,
        max_stretch: max,
        min_stretch: min,
        mean_stretch: mean,
        p50_stretch: pct(0.5),
        p90_stretch: pct(0.9),
        p99_stretch: pct(0.99),
        certified_bound,
        contraction_bound,
        worst_pairs: pairs,
        pass,
    }
}

/// Audits a spanner edge list over `K x X` via exact shortest paths.
pub fn audit_spanner_kx(
    inst: &TerminalInstance,
    edges: &[(usize, usize, f64)],
    structure_kind: &str,
    mut counters: Vec<(String, f64)>,
    certified_bound: f64,
) -> StretchReport {
    counters.push(("edge_count".into(), edges.len() as f64));
    let tables = graph_distances(inst.n(), edges, inst.terminals());
    let index_of: std::collections::HashMap<usize, usize> = inst
        .terminals()
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    audit_kx(inst, structure_kind, counters, certified_bound, 1.0, |v, x| {
        tables[index_of[&v]][x]
    })
}

/// Audits an embedding over `K x X` under the `l_p` norm of coordinate
/// differences (`p = f64::INFINITY` for the max norm). Distances are compared
/// in the same units as `inst`.
#[allow(clippy::too_many_arguments)]
pub fn audit_embedding_kx(
    inst: &TerminalInstance,
    coords: &[Vec<f64>],
    p: f64,
    structure_kind: &str,
    mut counters: Vec<(String, f64)>,
    certified_bound: f64,
    contraction_bound: f64,
) -> StretchReport {
    counters.push(("dimension".into(), coords[0].len() as f64));
    audit_kx(
        inst,
        structure_kind,
        counters,
        certified_bound,
        contraction_bound,
        |v, x| norm_dist(&coords[v], &coords[x], p),
    )
}

pub fn norm_dist(a: &[f64], b: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    } else {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

/// Report for the lower-bound family: verifies that for every cross pair
/// `(x, v)` the cheapest detour avoiding the direct edge exceeds
/// `(1 + eps) d(x, v)`, so any `(1 + eps)` terminal spanner must keep all
/// `|K| * (n - |K|)` cross edges.
#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundReport {
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub cross_pairs: usize,
    pub required_cross_edges: usize,
    pub min_detour_ratio: f64,
    pub min_terminal_separation: f64,
    /// Implied constant c in the |K| = lambda^(log2(c/eps)) shape.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub implied_c: Option<f64>,
    pub pass: bool,
}

/// Runs the detour audit on a lower-bound instance. The instance must follow
/// the cross-distance rule (1 for terminal/non-terminal pairs, 2 between
/// non-terminals); anything else is rejected as the wrong kind.
pub fn lower_bound_audit(inst: &TerminalInstance, lambda: Option<u32>) -> Result<LowerBoundReport> {
    let n = inst.n();
    let eps = inst.eps();
    let metric = &inst.metric;
    for x in 0..n {
        for y in (x + 1)..n {
            let d = metric.dist(x, y);
            let tx = inst.is_terminal(x);
            let ty = inst.is_terminal(y);
            let ok = match (tx, ty) {
                (true, true) => d <= 2.0 + 1e-9,
                (false, false) => (d - 2.0).abs() < 1e-9,
                _ => (d - 1.0).abs() < 1e-9,
            };
            if !ok {
                return Err(Error::WrongInstanceKind(format!(
                    "pair ({x},{y}) violates the lower-bound distance rule (d = {d})"
                )));
            }
        }
    }
    let mut min_sep = f64::INFINITY;
    for (a, &u) in inst.terminals().iter().enumerate() {
        for &v in &inst.terminals()[a + 1..] {
            min_sep = min_sep.min(metric.dist(u, v));
        }
    }
    let mut min_detour_ratio = f64::INFINITY;
    let mut cross_pairs = 0usize;
    for x in 0..n {
        if inst.is_terminal(x) {
            continue;
        }
        for &v in inst.terminals() {
            cross_pairs += 1;
            // in a metric, the cheapest path avoiding the direct edge is a
            // two-hop detour through some intermediate point
            let mut detour = f64::INFINITY;
            for w in 0..n {
                if w == x || w == v {
                    continue;
                }
                detour = detour.min(metric.dist(x, w) + metric.dist(w, v));
            }
            min_detour_ratio = min_detour_ratio.min(detour / metric.dist(x, v));
        }
    }
    let k = inst.k();
    let implied_c = lambda.and_then(|l| {
        if l > 1 {
            Some(eps * 2f64.powf((k as f64).log2() / (l as f64).log2()))
        } else {
            None
        }
    });
    let pass = min_detour_ratio > 1.0 + eps && min_sep > eps;
    Ok(LowerBoundReport {
        n,
        k,
        eps,
        cross_pairs,
        required_cross_edges: k * (n - k),
        min_detour_ratio,
        min_terminal_separation: min_sep,
        implied_c,
        pass,
    })
}
