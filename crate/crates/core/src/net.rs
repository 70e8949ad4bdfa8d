//! Greedy terminal nets, doubling-constant estimation, packing audits.

use crate::metric::{approx_le, FiniteMetric};
use crate::{Error, Result};
use rayon::prelude::*;
use std::collections::HashSet;

/// An `r`-net: pairwise separation `> r`, covering radius `<= r`, with
/// terminal members listed before non-terminal members.
#[derive(Debug, Clone)]
pub struct Net {
    pub radius: f64,
    pub members: Vec<usize>,
    pub terminal_prefix_len: usize,
}

impl Net {
    pub fn terminal_members(&self) -> &[usize] {
        &self.members[..self.terminal_prefix_len]
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.contains(&x)
    }

    /// Checks separation and covering against `ground`.
    pub fn validate(&self, ground: &[usize], metric: &FiniteMetric) -> Result<()> {
        for (a, &u) in self.members.iter().enumerate() {
            for &v in &self.members[a + 1..] {
                if approx_le(metric.dist(u, v), self.radius) {
                    return Err(Error::InvalidMetric(format!(
                        "net separation fails: d({u},{v}) = {} <= r = {}",
                        metric.dist(u, v),
                        self.radius
                    )));
                }
            }
        }
        for &x in ground {
            if !self
                .members
                .iter()
                .any(|&u| approx_le(metric.dist(x, u), self.radius))
            {
                return Err(Error::InvalidMetric(format!(
                    "net covering fails at point {x} for r = {}",
                    self.radius
                )));
            }
        }
        Ok(())
    }
}

/// Greedy terminal `r`-net of `ground`. Candidates are scanned with all
/// `priority` members first (ascending index), then the rest ascending; each
/// picked center removes every point within `r` of it.
pub fn greedy_net(
    ground: &[usize],
    metric: &FiniteMetric,
    r: f64,
    priority: &[usize],
) -> Result<Net> {
    greedy_net_seeded(&[], ground, metric, r, priority)
}

/// As [`greedy_net`], but the points of `seeds` are scanned first, in the
/// given order, before the remaining priority members. Seeds that are
/// pairwise more than `r` apart are therefore all picked.
pub fn greedy_net_seeded(
    seeds: &[usize],
    ground: &[usize],
    metric: &FiniteMetric,
    r: f64,
    priority: &[usize],
) -> Result<Net> {
    if ground.is_empty() {
        return Err(Error::EmptyGroundSet);
    }
    if !(r > 0.0) {
        return Err(Error::BadRadius(r));
    }
    let ground_set: HashSet<usize> = ground.iter().copied().collect();
    let prio_set: HashSet<usize> = priority.iter().copied().collect();
    let seed_set: HashSet<usize> = seeds.iter().copied().collect();

    let mut order: Vec<usize> = Vec::with_capacity(ground.len());
    order.extend(seeds.iter().copied().filter(|s| ground_set.contains(s)));
    let mut rest_prio: Vec<usize> = ground
        .iter()
        .copied()
        .filter(|p| prio_set.contains(p) && !seed_set.contains(p))
        .collect();
    rest_prio.sort_unstable();
    order.extend(rest_prio);
    let mut rest: Vec<usize> = ground
        .iter()
        .copied()
        .filter(|p| !prio_set.contains(p) && !seed_set.contains(p))
        .collect();
    rest.sort_unstable();
    order.extend(rest);

    let mut covered: HashSet<usize> = HashSet::new();
    let mut members = Vec::new();
    for &c in &order {
        if covered.contains(&c) {
            continue;
        }
        members.push(c);
        for &x in ground {
            if !covered.contains(&x) && approx_le(metric.dist(c, x), r) {
                covered.insert(x);
            }
        }
    }
    let terminal_prefix_len = members
        .iter()
        .take_while(|m| prio_set.contains(m) || seed_set.contains(m))
        .count();
    Ok(Net { radius: r, members, terminal_prefix_len })
}

/// Builds a finer terminal net seeded with the terminal members of `coarse`,
/// so that every terminal of the coarse net survives into the fine net.
pub fn refine_net(
    coarse: &Net,
    ground: &[usize],
    metric: &FiniteMetric,
    r: f64,
    priority: &[usize],
) -> Result<Net> {
    greedy_net_seeded(coarse.terminal_members(), ground, metric, r, priority)
}

/// Point count above which the doubling-constant estimate switches from the
/// exhaustive (all centers, all half-distance radii) mode to sampling.
pub const DOUBLING_EXHAUSTIVE_LIMIT: usize = 500;

/// Estimated doubling constant: the maximum, over sampled `(x, r)`, of the
/// size of a greedy set cover of `B(x, 2r)` by balls of radius `r` centered
/// in the ball. Exhaustive (hence deterministic) for `n <= 500`: every
/// center `x` and every radius `r = d(x, y)/2`.
pub fn estimate_doubling_constant(metric: &FiniteMetric) -> u32 {
    let all: Vec<usize> = (0..metric.n()).collect();
    estimate_doubling_constant_on(metric, &all)
}

/// As [`estimate_doubling_constant`], restricted to the sub-space `points`.
pub fn estimate_doubling_constant_on(metric: &FiniteMetric, points: &[usize]) -> u32 {
    let n = points.len();
    if n <= 1 {
        return 1;
    }
    let exhaustive = n <= DOUBLING_EXHAUSTIVE_LIMIT;
    let centers: Vec<usize> = if exhaustive {
        points.to_vec()
    } else {
        // deterministic stride sample of centers
        let step = n.div_ceil(DOUBLING_EXHAUSTIVE_LIMIT.min(200));
        points.iter().copied().step_by(step.max(1)).collect()
    };
    centers
        .par_iter()
        .map(|&x| {
            let mut by_dist: Vec<(f64, usize)> =
                points.iter().map(|&y| (metric.dist(x, y), y)).collect();
            by_dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut radii: Vec<f64> = by_dist
                .iter()
                .map(|&(d, _)| d)
                .filter(|&d| d > 0.0)
                .collect();
            radii.dedup();
            if !exhaustive && radii.len() > 64 {
                let step = radii.len().div_ceil(64);
                radii = radii.into_iter().step_by(step).collect();
            }
            let mut best = 1u32;
            for v in radii {
                // ball B(x, 2r) with 2r = v; prefix of the sorted order
                let cut = by_dist.partition_point(|&(d, _)| approx_le(d, v));
                if cut as u32 <= best {
                    continue;
                }
                let ball: Vec<usize> = by_dist[..cut].iter().map(|&(_, y)| y).collect();
                // cheap upper estimate first; refine only when it could raise
                // the running maximum
                let net = greedy_net(&ball, metric, v / 2.0, &[]).expect("nonempty ball");
                if net.members.len() as u32 > best {
                    best = best.max(greedy_cover_size(&ball, metric, v / 2.0));
                }
            }
            best
        })
        .max()
        .unwrap_or(1)
}

/// Size of a greedy set cover of `ball` by radius-`r` balls centered at its
/// points: repeatedly picks the center covering the most uncovered points
/// (lowest index on ties). Much closer to the minimum cover than a greedy
/// net, which matters on grid-like inputs.
fn greedy_cover_size(ball: &[usize], metric: &FiniteMetric, r: f64) -> u32 {
    let m = ball.len();
    let mut uncovered = vec![true; m];
    let mut left = m;
    let mut picked = 0u32;
    while left > 0 {
        let mut best_c = 0usize;
        let mut best_gain = 0usize;
        for (ci, &c) in ball.iter().enumerate() {
            let gain = (0..m)
                .filter(|&xi| uncovered[xi] && approx_le(metric.dist(c, ball[xi]), r))
                .count();
            if gain > best_gain {
                best_gain = gain;
                best_c = ci;
            }
        }
        debug_assert!(best_gain > 0);
        for xi in 0..m {
            if uncovered[xi] && approx_le(metric.dist(ball[best_c], ball[xi]), r) {
                uncovered[xi] = false;
                left -= 1;
            }
        }
        picked += 1;
    }
    picked
}

/// Checks the net-packing bound: for every point `x`,
/// `|B(x, q) ∩ N| <= λ̂^ceil(log2(ceil(2q/r)))`.
/// A consistency test of the λ̂ estimate, not a correctness gate.
pub fn packing_audit(net: &Net, metric: &FiniteMetric, q: f64, lambda_hat: u32) -> bool {
    assert!(q > 0.0, "packing_audit requires q > 0");
    let m = (2.0 * q / net.radius).ceil().max(1.0) as u64;
    let exponent = m.next_power_of_two().trailing_zeros();
    let bound = (lambda_hat as f64).powi(exponent as i32);
    (0..metric.n()).all(|x| {
        let count = net
            .members
            .iter()
            .filter(|&&u| approx_le(metric.dist(x, u), q))
            .count();
        (count as f64) <= bound
    })
}
