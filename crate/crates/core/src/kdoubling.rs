//! Terminal structures when only `K` is doubling: each point keeps a small
//! net of nearby terminals instead of hanging on a single one.

use crate::base::{build_base_labeling, build_base_spanner, BaseLabeling};
use crate::metric::TerminalInstance;
use crate::net::greedy_net_seeded;
use crate::spanner::{HangMap, SpannerMode, TerminalSpanner};
use crate::{Error, Result};
use std::collections::HashMap;

/// Spanner, labeling, and per-point terminal nets in one structure: the
/// spanner edge list feeds graph audits, the labeling answers queries.
pub struct KDoublingStructure {
    pub spanner: TerminalSpanner,
    pub labeling: BaseLabeling,
    /// For each `x` outside `K`: the net `N(x)` with exact distances.
    pub point_nets: HashMap<usize, Vec<(usize, f64)>>,
    pub certified_stretch: f64,
}

/// For `x` outside `K`, with `u` its nearest terminal at distance `R`:
/// a greedy `eps R`-net of `B(x, 2R/eps) ∩ K`, seeded with `u` so the
/// nearest terminal always survives into the net.
fn point_net(
    inst: &TerminalInstance,
    x: usize,
) -> Result<Vec<(usize, f64)>> {
    let (u, big_r) = inst.nearest_terminal(x);
    if big_r == 0.0 {
        return Ok(vec![(u, 0.0)]);
    }
    let eps = inst.eps();
    let reach = 2.0 * big_r / eps;
    let ball: Vec<usize> = inst
        .terminals()
        .iter()
        .copied()
        .filter(|&v| inst.metric.dist(x, v) <= reach)
        .collect();
    let net = greedy_net_seeded(&[u], &ball, &inst.metric, eps * big_r, &[])?;
    Ok(net
        .members
        .iter()
        .map(|&v| (v, inst.metric.dist(x, v)))
        .collect())
}

/// Builds the K-doubling terminal structure: base spanner and labeling on
/// `K` with `eps_base = eps`, plus edges from every outside point to its net
/// `N(x)`. Certified stretch on `K x X` pairs is `1 + 3 eps`.
pub fn build_k_doubling(inst: &TerminalInstance) -> Result<KDoublingStructure> {
    if inst.k() == 0 {
        return Err(Error::NeedOneTerminal);
    }
    let eps = inst.eps();
    let base = build_base_spanner(inst.terminals(), &inst.metric, eps)?;
    let labeling = build_base_labeling(inst.terminals(), &inst.metric, eps)?;
    let base_edge_count = base.edges.len();
    let mut edges = base.edges;
    let mut point_nets: HashMap<usize, Vec<(usize, f64)>> = HashMap::new();
    for x in 0..inst.n() {
        if inst.is_terminal(x) {
            continue;
        }
        let net = point_net(inst, x)?;
        for &(v, d) in &net {
            edges.push((x, v, d));
        }
        point_nets.insert(x, net);
    }
    let spanner = TerminalSpanner {
        mode: SpannerMode::KDoubling,
        y: inst.terminals().to_vec(),
        base_edge_count,
        edges,
        hang: HangMap::default(),
        point_nets: point_nets
            .iter()
            .map(|(&x, net)| (x, net.iter().map(|&(v, _)| v).collect()))
            .collect(),
        eps,
        certified_stretch: 1.0 + 3.0 * eps,
    };
    Ok(KDoublingStructure {
        spanner,
        labeling,
        point_nets,
        certified_stretch: 1.0 + 3.0 * eps,
    })
}

impl KDoublingStructure {
    /// Reported distance `min over v' in N(x) of d(x,v') + decode(v, v')`;
    /// plain decode when `x` is itself a terminal.
    pub fn query(&self, x: usize, v: usize) -> Result<f64> {
        if !self.labeling.contains(v) {
            return Err(Error::NotInBaseSet(v));
        }
        if self.labeling.contains(x) {
            return self.labeling.decode(x, v);
        }
        let net = self.point_nets.get(&x).ok_or(Error::UnknownVertex(x))?;
        let mut best = f64::INFINITY;
        for &(vp, d) in net {
            best = best.min(d + self.labeling.decode(v, vp)?);
        }
        Ok(best)
    }

    pub fn max_net_size(&self) -> usize {
        self.point_nets.values().map(|n| n.len()).max().unwrap_or(0)
    }
}
