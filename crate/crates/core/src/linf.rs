//! Direct terminal embedding into `l_inf` for doubling `K` and arbitrary
//! `X`: contracted metrics per scale, terminal nets split into separated
//! families, and truncated distance-to-family coordinates.

use crate::metric::{approx_le, TerminalInstance};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::HashMap;

/// Per-scale contracted metrics `d_i`: shortest paths over the complete
/// graph after zeroing every terminal-incident edge shorter than
/// `2^(i-1) * eps / k`. All entries are in rescaled units where the minimum
/// positive distance of `X` is 1.
pub struct ContractedMetricFamily {
    /// Rescaling factor: original distances divided by this give the
    /// rescaled ones.
    pub scale: f64,
    /// Rescaled input metric.
    pub base: Vec<Vec<f64>>,
    /// `d_i` matrix per level `i`.
    pub levels: Vec<Vec<Vec<f64>>>,
    /// Zeroing threshold `2^(i-1) * eps / k` per level.
    pub thresholds: Vec<f64>,
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let r = self.find(self.0[x]);
            self.0[x] = r;
        }
        self.0[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Shortest paths after zeroing the given terminal-incident edges: the
/// zero-edge components are contracted and all-pairs shortest paths run on
/// the quotient graph.
fn contracted_distances(base: &[Vec<f64>], zero: &[(usize, usize)]) -> Vec<Vec<f64>> {
    let n = base.len();
    let mut dsu = Dsu::new(n);
    for &(a, b) in zero {
        dsu.union(a, b);
    }
    let mut comp_of = vec![0usize; n];
    let mut comp_index: HashMap<usize, usize> = HashMap::new();
    for x in 0..n {
        let r = dsu.find(x);
        let next = comp_index.len();
        let c = *comp_index.entry(r).or_insert(next);
        comp_of[x] = c;
    }
    let m = comp_index.len();
    let mut q = vec![vec![f64::INFINITY; m]; m];
    for (i, row) in q.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for x in 0..n {
        for y in (x + 1)..n {
            let (cx, cy) = (comp_of[x], comp_of[y]);
            if cx != cy && base[x][y] < q[cx][cy] {
                q[cx][cy] = base[x][y];
                q[cy][cx] = base[x][y];
            }
        }
    }
    for l in 0..m {
        for i in 0..m {
            if q[i][l].is_infinite() {
                continue;
            }
            for j in 0..m {
                let via = q[i][l] + q[l][j];
                if via < q[i][j] {
                    q[i][j] = via;
                    q[j][i] = via;
                }
            }
        }
    }
    (0..n)
        .map(|x| (0..n).map(|y| q[comp_of[x]][comp_of[y]]).collect())
        .collect()
}

/// Number of levels: enough scales that every `K x X` distance has a level
/// `i` with `2^(i-1) <= d < 2^i` in rescaled units.
fn level_count(diameter_rescaled: f64) -> usize {
    (diameter_rescaled.log2().floor() as i32 + 2).max(1) as usize
}

pub fn build_contracted_metrics(inst: &TerminalInstance) -> Result<ContractedMetricFamily> {
    let n = inst.n();
    let scale = inst
        .metric
        .min_positive_distance()
        .ok_or_else(|| Error::InvalidMetric("all points coincide".into()))?;
    let base: Vec<Vec<f64>> = (0..n)
        .map(|x| (0..n).map(|y| inst.metric.dist(x, y) / scale).collect())
        .collect();
    let diameter = inst.metric.diameter() / scale;
    let eps = inst.eps();
    let k = inst.k() as f64;
    let imax = level_count(diameter);
    let thresholds: Vec<f64> = (0..imax)
        .map(|i| 2f64.powi(i as i32 - 1) * eps / k)
        .collect();
    let levels: Vec<Vec<Vec<f64>>> = thresholds
        .par_iter()
        .map(|&thr| {
            let mut zero: Vec<(usize, usize)> = Vec::new();
            for x in 0..n {
                for &v in inst.terminals() {
                    if x != v && base[x][v] < thr {
                        zero.push((x, v));
                    }
                }
            }
            if zero.is_empty() {
                base.clone()
            } else {
                contracted_distances(&base, &zero)
            }
        })
        .collect();
    Ok(ContractedMetricFamily { scale, base, levels, thresholds })
}

impl ContractedMetricFamily {
    /// Audits `d(x,y) - eps * 2^i <= d_i(x,y) <= d(x,y)` on every level and
    /// pair (rescaled units).
    pub fn sandwich_audit(&self, eps: f64) -> Result<()> {
        let n = self.base.len();
        for (i, d_i) in self.levels.iter().enumerate() {
            let slack = eps * 2f64.powi(i as i32);
            for x in 0..n {
                for y in 0..n {
                    let d = self.base[x][y];
                    if !approx_le(d_i[x][y], d) || !approx_le(d - slack, d_i[x][y]) {
                        return Err(Error::InvalidMetric(format!(
                            "sandwich violated at level {i}, pair ({x},{y}): \
                             d = {d}, d_i = {}",
                            d_i[x][y]
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Greedy net over an explicit distance matrix restricted to `points`,
/// ascending-index scan; duplicates (distance 0) are covered by the lower
/// index.
fn greedy_net_matrix(points: &[usize], d: &[Vec<f64>], r: f64) -> Vec<usize> {
    let mut net = Vec::new();
    let mut covered = vec![false; points.len()];
    for (pi, &p) in points.iter().enumerate() {
        if covered[pi] {
            continue;
        }
        net.push(p);
        for (qi, &q) in points.iter().enumerate() {
            if !covered[qi] && approx_le(d[p][q], r) {
                covered[qi] = true;
            }
        }
    }
    net
}

/// Splits `net` into families pairwise `d_i`-separated by at least `sep`:
/// for ascending `j`, greedily absorb every unassigned point compatible with
/// the current family.
pub fn build_separated_families(net: &[usize], d: &[Vec<f64>], sep: f64) -> Vec<Vec<usize>> {
    let mut unassigned: Vec<usize> = net.to_vec();
    let mut families = Vec::new();
    while !unassigned.is_empty() {
        let mut family: Vec<usize> = Vec::new();
        let mut rest = Vec::new();
        for &p in &unassigned {
            if family
                .iter()
                .all(|&q| d[p][q] >= sep * (1.0 - 1e-12))
            {
                family.push(p);
            } else {
                rest.push(p);
            }
        }
        families.push(family);
        unassigned = rest;
    }
    families
}

pub struct LinfLevel {
    /// Net radius `r_i = eps * 2^(i-2)`.
    pub radius: f64,
    pub net: Vec<usize>,
    pub families: Vec<Vec<usize>>,
}

pub struct LinfEmbedding {
    /// Max family count over levels.
    pub t: usize,
    /// Output dimension `D = ceil(2 t log2(2 k_eff / eps))`.
    pub dim: usize,
    pub eps: f64,
    /// `max(k, 4)`; the expansion analysis needs at least 4 terminals.
    pub k_eff: usize,
    pub scale: f64,
    pub levels: Vec<LinfLevel>,
    pub cmf: ContractedMetricFamily,
    /// `f(x)` per point, in original (un-rescaled) units.
    pub coords: Vec<Vec<f64>>,
}

pub fn embed_linf(inst: &TerminalInstance) -> Result<LinfEmbedding> {
    if inst.k() == 0 {
        return Err(Error::NeedOneTerminal);
    }
    let eps = inst.eps();
    let k_eff = inst.k().max(4);
    if inst.k() < 4 {
        log::warn!(
            "linf embedding with k = {} < 4: dimension formula uses k_eff = 4",
            inst.k()
        );
    }
    let cmf = build_contracted_metrics(inst)?;
    let mut levels = Vec::with_capacity(cmf.levels.len());
    let mut t = 1usize;
    for (i, d_i) in cmf.levels.iter().enumerate() {
        let radius = eps * 2f64.powi(i as i32 - 2);
        let net = greedy_net_matrix(inst.terminals(), d_i, radius);
        let families = build_separated_families(&net, d_i, 5.0 * 2f64.powi(i as i32));
        t = t.max(families.len());
        levels.push(LinfLevel { radius, net, families });
    }
    let dim = (2.0 * t as f64 * (2.0 * k_eff as f64 / eps).log2()).ceil() as usize;
    let n = inst.n();
    let mut coords = vec![vec![0.0f64; dim]; n];
    for (i, level) in levels.iter().enumerate() {
        let cap = 2f64.powi(i as i32 + 1);
        let d_i = &cmf.levels[i];
        for (j, family) in level.families.iter().enumerate() {
            let h = (i * t + j) % dim;
            for (x, row) in coords.iter_mut().enumerate() {
                let g = family
                    .iter()
                    .map(|&u| d_i[x][u])
                    .fold(f64::INFINITY, f64::min)
                    .min(cap);
                row[h] += g * cmf.scale;
            }
        }
    }
    Ok(LinfEmbedding { t, dim, eps, k_eff, scale: cmf.scale, levels, cmf, coords })
}

impl LinfEmbedding {
    /// Coordinate function `g_ij(x) = min(2^(i+1), d_i(x, N_ij))` in
    /// rescaled units.
    pub fn g(&self, x: usize, i: usize, j: usize) -> f64 {
        let cap = 2f64.powi(i as i32 + 1);
        self.levels[i].families[j]
            .iter()
            .map(|&u| self.cmf.levels[i][x][u])
            .fold(f64::INFINITY, f64::min)
            .min(cap)
    }

    /// `l_inf` distance between the images of `x` and `y`, original units.
    pub fn image_dist(&self, x: usize, y: usize) -> f64 {
        self.coords[x]
            .iter()
            .zip(&self.coords[y])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Validates the per-level structure: net covering/separation under
    /// `d_i`, family separation, and that families partition the net.
    pub fn validate(&self, inst: &TerminalInstance) -> Result<()> {
        for (i, level) in self.levels.iter().enumerate() {
            let d_i = &self.cmf.levels[i];
            for &v in inst.terminals() {
                if !level
                    .net
                    .iter()
                    .any(|&u| approx_le(d_i[v][u], level.radius))
                {
                    return Err(Error::InvalidMetric(format!(
                        "level {i}: terminal {v} uncovered by the net"
                    )));
                }
            }
            let sep = 5.0 * 2f64.powi(i as i32);
            let mut assigned = 0usize;
            for family in &level.families {
                assigned += family.len();
                for (a, &u) in family.iter().enumerate() {
                    for &v in &family[a + 1..] {
                        if d_i[u][v] < sep * (1.0 - 1e-9) {
                            return Err(Error::InvalidMetric(format!(
                                "level {i}: family members {u},{v} too close"
                            )));
                        }
                    }
                }
            }
            if assigned != level.net.len() {
                return Err(Error::InvalidMetric(format!(
                    "level {i}: families do not partition the net"
                )));
            }
        }
        Ok(())
    }

    /// Samples `(pair, coordinate)` checks of the Lipschitz and truncation
    /// properties: `|g_ij(x) - g_ij(y)| <= d_i(x,y) <= d(x,y)` and
    /// `0 <= g_ij <= 2^(i+1)`.
    pub fn coordinate_property_audit(&self, samples: usize, seed: u64) -> Result<()> {
        let n = self.coords.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let x = rng.gen_range(0..n);
            let y = rng.gen_range(0..n);
            let i = rng.gen_range(0..self.levels.len());
            if self.levels[i].families.is_empty() {
                continue;
            }
            let j = rng.gen_range(0..self.levels[i].families.len());
            let gx = self.g(x, i, j);
            let gy = self.g(y, i, j);
            let cap = 2f64.powi(i as i32 + 1);
            if !(0.0..=cap * (1.0 + 1e-12)).contains(&gx) {
                return Err(Error::InvalidMetric(format!(
                    "truncation violated: g_{{{i},{j}}}({x}) = {gx}"
                )));
            }
            let d_i = self.cmf.levels[i][x][y];
            if !approx_le((gx - gy).abs(), d_i) || !approx_le(d_i, self.cmf.base[x][y]) {
                return Err(Error::InvalidMetric(format!(
                    "Lipschitz violated at level {i}, family {j}, pair ({x},{y})"
                )));
            }
        }
        Ok(())
    }

    /// Audits the scale-vanishing property: for terminals `v` and any `x`,
    /// levels far above the pair's own scale contribute identical
    /// coordinates, `g_ij(x) = g_ij(v)`.
    pub fn scale_vanishing_audit(&self, inst: &TerminalInstance, samples: usize, seed: u64) -> Result<()> {
        let n = self.coords.len();
        let window = (2.0 * self.k_eff as f64 / self.eps).log2();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let x = rng.gen_range(0..n);
            let v = inst.terminals()[rng.gen_range(0..inst.k())];
            let d = self.cmf.base[x][v];
            if d == 0.0 {
                continue;
            }
            let i_pair = d.log2().floor() as i32 + 1;
            for (i, level) in self.levels.iter().enumerate() {
                if (i as f64) <= i_pair as f64 + window {
                    continue;
                }
                for j in 0..level.families.len() {
                    let gx = self.g(x, i, j);
                    let gv = self.g(v, i, j);
                    if (gx - gv).abs() > 1e-9 * gx.abs().max(1.0) {
                        return Err(Error::InvalidMetric(format!(
                            "scale vanishing violated: pair ({x},{v}) at level {i}, \
                             family {j}: {gx} vs {gv}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// For a `K x X` pair, a coordinate witnessing the contraction bound:
    /// some `h` with `|f_h(x) - f_h(v)| >= (1 - 3 eps) d(x,v)`.
    pub fn contraction_witness(&self, x: usize, v: usize, d: f64) -> Option<usize> {
        let need = (1.0 - 3.0 * self.eps) * d;
        (0..self.dim).find(|&h| {
            (self.coords[x][h] - self.coords[v][h]).abs() >= need * (1.0 - 1e-9)
        })
    }
}
