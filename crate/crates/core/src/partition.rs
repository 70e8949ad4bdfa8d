//! Multi-scale partial partitions built from terminal nets.
//!
//! Level `i` carves the residual set `R_i` into balls of radius
//! `r_i = 2^i * eps^2 * delta` around the points of a terminal `r_i`-net.
//! Clusters whose center is at distance at least `r_i / eps` from the
//! terminal set are final and are not partitioned at lower levels.

use crate::metric::{approx_ge, approx_le, TerminalInstance};
use crate::net::{greedy_net, refine_net, Net};
use crate::{Error, Result};
use std::collections::HashSet;
use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub struct Cluster {
    pub center: usize,
    pub members: Vec<usize>,
    pub is_final: bool,
}

#[derive(Debug, Clone)]
pub struct Level {
    pub radius: f64,
    pub net: Net,
    pub clusters: Vec<Cluster>,
    /// The residual set this level partitioned.
    pub residual: Vec<usize>,
}

/// Output of the partial-partition construction: one [`Level`] per scale
/// `0..=top_level`, built top-down.
pub struct PartialPartition {
    pub top_level: usize,
    pub levels: Vec<Level>,
}

impl PartialPartition {
    pub fn radius(&self, i: usize) -> f64 {
        self.levels[i].radius
    }

    /// The unique final cluster containing `x`, if any, as `(level, cluster)`.
    pub fn final_cluster_of(&self, x: usize) -> Option<(usize, usize)> {
        for (i, level) in self.levels.iter().enumerate() {
            for (j, c) in level.clusters.iter().enumerate() {
                if c.is_final && c.members.contains(&x) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Highest level whose net contains `u`.
    pub fn max_net_level(&self, u: usize) -> Option<usize> {
        (0..self.levels.len())
            .rev()
            .find(|&i| self.levels[i].net.contains(u))
    }

    /// Per-level text dump for golden-file tests.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, level) in self.levels.iter().enumerate() {
            writeln!(out, "level {i}, r_i = {:.6}", level.radius).unwrap();
            for c in &level.clusters {
                writeln!(
                    out,
                    "  center {} final {} members {:?}",
                    c.center, c.is_final, c.members
                )
                .unwrap();
            }
        }
        out
    }

    /// Exhaustive structural validation of the partition invariants.
    pub fn validate(&self, inst: &TerminalInstance) -> Result<()> {
        let m = &inst.metric;
        let eps = inst.eps();
        let r0 = eps * eps * inst.delta();
        let fail = |msg: String| Err(Error::InvalidMetric(msg));
        if !crate::metric::approx_eq(self.levels[0].radius, r0) {
            return fail(format!("r_0 = {} != eps^2*delta = {r0}", self.levels[0].radius));
        }
        if !approx_ge(self.levels[self.top_level].radius, inst.big_delta()) {
            return fail("r_s < Delta".into());
        }
        let mut final_seen: HashSet<usize> = HashSet::new();
        for (i, level) in self.levels.iter().enumerate() {
            let mut covered: HashSet<usize> = HashSet::new();
            for c in &level.clusters {
                if c.members.is_empty() || !c.members.contains(&c.center) {
                    return fail(format!("level {i}: cluster lacks its center"));
                }
                for &x in &c.members {
                    if !covered.insert(x) {
                        return fail(format!("level {i}: point {x} in two clusters"));
                    }
                    if !approx_le(m.dist(c.center, x), level.radius) {
                        return fail(format!("level {i}: member outside ball"));
                    }
                    if c.is_final && !final_seen.insert(x) {
                        return fail(format!("point {x} in two final clusters"));
                    }
                }
                let d_k = inst.dist_to_terminals(c.center);
                let should_be_final = approx_ge(d_k, level.radius / eps);
                if c.is_final != should_be_final {
                    return fail(format!("level {i}: finality flag mismatch"));
                }
                let has_terminal = c.members.iter().any(|&x| inst.is_terminal(x));
                if has_terminal && (c.is_final || !inst.is_terminal(c.center)) {
                    return fail(format!(
                        "level {i}: terminal-bearing cluster must be non-final with terminal center"
                    ));
                }
            }
            let residual: HashSet<usize> = level.residual.iter().copied().collect();
            if covered != residual {
                return fail(format!("level {i}: clusters do not partition the residual"));
            }
        }
        // level 0: every terminal centers its own cluster
        for &u in inst.terminals() {
            let c = self.levels[0]
                .clusters
                .iter()
                .find(|c| c.members.contains(&u));
            match c {
                Some(c) if c.center == u => {}
                _ => return fail(format!("terminal {u} does not center its level-0 cluster")),
            }
        }
        // monotone terminal membership down the hierarchy
        for i in 0..self.top_level {
            for &u in self.levels[i + 1].net.terminal_members() {
                if inst.is_terminal(u) && !self.levels[i].net.contains(u) {
                    return fail(format!("terminal {u} in N_{} but not N_{i}", i + 1));
                }
            }
        }
        Ok(())
    }
}

/// Runs the partial-partition construction on `inst`. Requires `k >= 2`
/// (with a single terminal the enclosing structures degenerate to a star
/// and skip the partition entirely).
pub fn build_partial_partitions(inst: &TerminalInstance) -> Result<PartialPartition> {
    if inst.k() < 2 {
        return Err(Error::NeedTwoTerminals);
    }
    let eps = inst.eps();
    let delta = inst.delta();
    let big_delta = inst.big_delta();
    let ratio = big_delta / (eps * eps * delta);
    let mut s = ratio.log2().ceil().max(0.0) as usize;
    while 2f64.powi(s as i32) * eps * eps * delta < big_delta {
        s += 1;
    }

    let n = inst.n();
    let metric = &inst.metric;
    let terminals = inst.terminals();
    let mut levels: Vec<Option<Level>> = (0..=s).map(|_| None).collect();
    let mut residual: Vec<usize> = (0..n).collect();
    let mut coarser: Option<Net> = None;

    for i in (0..=s).rev() {
        let r_i = 2f64.powi(i as i32) * eps * eps * delta;
        let net = match &coarser {
            None => greedy_net(&residual, metric, r_i, terminals)?,
            Some(above) => refine_net(above, &residual, metric, r_i, terminals)?,
        };
        let mut remaining: HashSet<usize> = residual.iter().copied().collect();
        let mut clusters = Vec::with_capacity(net.members.len());
        let mut next_residual: Vec<usize> = Vec::new();
        for &center in &net.members {
            let mut members: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&x| approx_le(metric.dist(center, x), r_i))
                .collect();
            members.sort_unstable();
            for &x in &members {
                remaining.remove(&x);
            }
            let is_final = approx_ge(inst.dist_to_terminals(center), r_i / eps);
            if !is_final {
                next_residual.extend(&members);
            }
            clusters.push(Cluster { center, members, is_final });
        }
        debug_assert!(remaining.is_empty(), "net failed to cover its residual");
        next_residual.sort_unstable();
        levels[i] = Some(Level { radius: r_i, net: net.clone(), clusters, residual });
        residual = next_residual;
        coarser = Some(net);
    }

    Ok(PartialPartition {
        top_level: s,
        levels: levels.into_iter().map(Option::unwrap).collect(),
    })
}
