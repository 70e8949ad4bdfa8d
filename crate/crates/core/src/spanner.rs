//! Terminal structures for doubling `X`: hang every point outside the
//! enriched set `Y` on one member of `Y`, then compose with the base
//! structures built on `Y`.

use crate::base::{build_base_labeling, build_base_spanner, BaseLabeling};
use crate::marking::{mark_clusters, EnrichedSet};
use crate::metric::TerminalInstance;
use crate::partition::{build_partial_partitions, PartialPartition};
use crate::{Error, Result};
use serde::Serialize;
use std::collections::{HashMap, HashSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HangReason {
    FinalMarkedCenter,
    NearestTerminal,
}

#[derive(Debug, Clone, Serialize)]
pub struct Hang {
    pub target: usize,
    pub dist: f64,
    pub reason: HangReason,
}

/// One hang per point of `X \ Y`; members of `Y` are absent.
#[derive(Debug, Clone, Default, Serialize)]
pub struct HangMap {
    pub hangs: HashMap<usize, Hang>,
}

impl HangMap {
    pub fn get(&self, x: usize) -> Option<&Hang> {
        self.hangs.get(&x)
    }

    pub fn len(&self) -> usize {
        self.hangs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hangs.is_empty()
    }
}

/// Hangs every `x` outside `Y`: on its cluster center if `x` lies in a final
/// marked cluster, otherwise on its nearest terminal (lowest index on ties).
pub fn hang_points(
    pp: &PartialPartition,
    es: &EnrichedSet,
    inst: &TerminalInstance,
) -> HangMap {
    let mut hangs = HashMap::new();
    for x in 0..inst.n() {
        if es.y_set.contains(&x) {
            continue;
        }
        let hang = match pp.final_cluster_of(x) {
            Some((i, j)) if es.marked.contains(&(i, j)) => {
                let c = pp.levels[i].clusters[j].center;
                Hang {
                    target: c,
                    dist: inst.metric.dist(x, c),
                    reason: HangReason::FinalMarkedCenter,
                }
            }
            _ => {
                let (u, d) = inst.nearest_terminal(x);
                Hang { target: u, dist: d, reason: HangReason::NearestTerminal }
            }
        };
        hangs.insert(x, hang);
    }
    HangMap { hangs }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpannerMode {
    XDoubling,
    KDoubling,
}

/// A terminal spanner: base spanner over `Y` (or `K`) plus one hang edge per
/// hanged point, or per-point net edges in K-doubling mode.
pub struct TerminalSpanner {
    pub mode: SpannerMode,
    /// Vertex set of the base part.
    pub y: Vec<usize>,
    pub base_edge_count: usize,
    /// Combined edge list over indices of the full instance.
    pub edges: Vec<(usize, usize, f64)>,
    pub hang: HangMap,
    /// K-doubling mode only: the net `N(x)` of each point outside `K`.
    pub point_nets: HashMap<usize, Vec<usize>>,
    pub eps: f64,
    pub certified_stretch: f64,
}

/// Builds the doubling-`X` terminal spanner: base spanner on the enriched
/// set `Y` with `eps_base = eps`, plus one hang edge per point of `X \ Y`.
/// Certified stretch on `K x X` pairs is `1 + 12 eps`.
pub fn build_terminal_spanner(inst: &TerminalInstance) -> Result<TerminalSpanner> {
    let pp = build_partial_partitions(inst)?;
    let es = mark_clusters(&pp, inst)?;
    let hm = hang_points(&pp, &es, inst);
    build_terminal_spanner_from(inst, &es, hm)
}

pub fn build_terminal_spanner_from(
    inst: &TerminalInstance,
    es: &EnrichedSet,
    hm: HangMap,
) -> Result<TerminalSpanner> {
    let base = build_base_spanner(&es.y, &inst.metric, inst.eps())?;
    let base_edge_count = base.edges.len();
    let mut edges = base.edges;
    let mut hanged: Vec<usize> = hm.hangs.keys().copied().collect();
    hanged.sort_unstable();
    for x in hanged {
        let h = &hm.hangs[&x];
        edges.push((x, h.target, h.dist));
    }
    Ok(TerminalSpanner {
        mode: SpannerMode::XDoubling,
        y: es.y.clone(),
        base_edge_count,
        edges,
        hang: hm,
        point_nets: HashMap::new(),
        eps: inst.eps(),
        certified_stretch: 1.0 + 12.0 * inst.eps(),
    })
}

/// Distance labeling for `K x X` queries: the base labeling on `Y` plus, per
/// hanged point, the hang target and exact hang distance.
pub struct TerminalLabeling {
    pub base: BaseLabeling,
    pub hang: HangMap,
    y_set: HashSet<usize>,
    pub certified_stretch: f64,
}

pub fn build_terminal_labeling(inst: &TerminalInstance) -> Result<TerminalLabeling> {
    let pp = build_partial_partitions(inst)?;
    let es = mark_clusters(&pp, inst)?;
    let hm = hang_points(&pp, &es, inst);
    let base = build_base_labeling(&es.y, &inst.metric, inst.eps())?;
    Ok(extend_labeling(base, hm, 1.0 + 12.0 * inst.eps()))
}

/// Wraps a base labeling on `Y` with a hang map covering `X \ Y`.
pub fn extend_labeling(base: BaseLabeling, hm: HangMap, certified: f64) -> TerminalLabeling {
    let y_set = base.vertices.iter().copied().collect();
    TerminalLabeling { base, hang: hm, y_set, certified_stretch: certified }
}

impl TerminalLabeling {
    /// Reported distance between any `x` and `v in Y`. For hanged `x` this is
    /// `d(x, u(x)) + decode(u(x), v)`.
    pub fn query(&self, x: usize, v: usize) -> Result<f64> {
        if !self.y_set.contains(&v) {
            return Err(Error::NotInBaseSet(v));
        }
        if self.y_set.contains(&x) {
            return self.base.decode(x, v);
        }
        let h = self
            .hang
            .get(x)
            .ok_or(Error::UnknownVertex(x))?;
        if v == h.target {
            return Ok(h.dist);
        }
        Ok(h.dist + self.base.decode(h.target, v)?)
    }

    /// Label record count of `x`: its base label size, or 1 if hanged.
    pub fn label_size(&self, x: usize) -> usize {
        if self.y_set.contains(&x) {
            self.base.label_size(x)
        } else {
            1
        }
    }
}

/// Appends one coordinate: members of the base map get 0, each hanged point
/// gets its hang target's image with the hang distance appended. Works for
/// any `l_p` norm on the receiving side.
pub fn extend_embedding(
    base: &HashMap<usize, Vec<f64>>,
    hm: &HangMap,
) -> Result<HashMap<usize, Vec<f64>>> {
    let mut out: HashMap<usize, Vec<f64>> = HashMap::with_capacity(base.len() + hm.len());
    for (&y, coords) in base {
        let mut c = coords.clone();
        c.push(0.0);
        out.insert(y, c);
    }
    for (&x, h) in &hm.hangs {
        let mut c = base
            .get(&h.target)
            .ok_or(Error::UnknownVertex(h.target))?
            .clone();
        c.push(h.dist);
        out.insert(x, c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::{audit_spanner_kx, graph_distances, norm_dist};
    use crate::metric::{approx_eq, FiniteMetric};

    fn line_inst(xs: &[f64], k: &[usize], eps: f64) -> TerminalInstance {
        let m = FiniteMetric::from_points(xs.iter().map(|&x| vec![x]).collect()).unwrap();
        TerminalInstance::new(m, k.to_vec(), eps).unwrap()
    }

    fn pipeline(inst: &TerminalInstance) -> (PartialPartition, EnrichedSet, HangMap) {
        let pp = build_partial_partitions(inst).unwrap();
        let es = mark_clusters(&pp, inst).unwrap();
        let hm = hang_points(&pp, &es, inst);
        (pp, es, hm)
    }

    #[test]
    fn members_of_y_are_not_hanged() {
        let inst = line_inst(&[0.0, 1.0, 100.0], &[0, 2], 0.05);
        let (_, es, hm) = pipeline(&inst);
        for &y in &es.y {
            assert!(hm.get(y).is_none());
        }
        // here Y swallows all three points, so nothing hangs at all
        assert!(hm.is_empty());
    }

    #[test]
    fn hang_reasons_and_targets() {
        // K = {0, 1} keeps the terminal diameter tiny, so the partition has
        // few levels and far points fall outside every marking window
        let inst = line_inst(&[0.0, 1.0, 30.0, 30.5, 100.0], &[0, 1], 0.2);
        let (_, es, hm) = pipeline(&inst);
        assert_eq!(es.y, vec![0, 1, 2]);
        // 30.5 sits in the final marked cluster centered at 30, which is not
        // its nearest terminal
        let h3 = hm.get(3).unwrap();
        assert_eq!(h3.target, 2);
        assert_eq!(h3.reason, HangReason::FinalMarkedCenter);
        assert!(approx_eq(h3.dist, 0.5));
        // 100 is final but unmarked: nearest terminal, lowest index on ties
        let h4 = hm.get(4).unwrap();
        assert_eq!(h4.target, 1);
        assert_eq!(h4.reason, HangReason::NearestTerminal);
        assert!(approx_eq(h4.dist, 99.0));
    }

    #[test]
    fn spanner_edge_count_identity() {
        let inst = line_inst(&[0.0, 1.0, 30.0, 30.5, 100.0], &[0, 1], 0.2);
        let sp = build_terminal_spanner(&inst).unwrap();
        assert_eq!(
            sp.edges.len(),
            sp.base_edge_count + (inst.n() - sp.y.len())
        );
        let report = audit_spanner_kx(&inst, &sp.edges, "spanner", vec![], sp.certified_stretch);
        assert!(report.pass, "max stretch {}", report.max_stretch);
    }

    #[test]
    fn collinear_instance_spanner_is_exact() {
        // all three points land in Y, so the spanner is the base spanner and
        // every K x X distance is exact
        let inst = line_inst(&[0.0, 1.0, 100.0], &[0, 2], 0.05);
        let sp = build_terminal_spanner(&inst).unwrap();
        assert!(sp.hang.is_empty());
        let report = audit_spanner_kx(&inst, &sp.edges, "spanner", vec![], sp.certified_stretch);
        assert!(report.pass);
        assert!(approx_eq(report.max_stretch, 1.0));
    }

    #[test]
    fn all_terminal_instance_is_pure_base() {
        let inst = line_inst(&[0.0, 2.0, 5.0, 9.0], &[0, 1, 2, 3], 0.1);
        let sp = build_terminal_spanner(&inst).unwrap();
        assert!(sp.hang.is_empty());
        assert_eq!(sp.edges.len(), sp.base_edge_count);
        let report = audit_spanner_kx(&inst, &sp.edges, "spanner", vec![], 1.0 + inst.eps());
        assert!(report.pass);
    }

    #[test]
    fn labeling_query_contract() {
        let inst = line_inst(&[0.0, 1.0, 30.0, 30.5, 100.0], &[0, 1], 0.2);
        let tl = build_terminal_labeling(&inst).unwrap();
        // v = u(x): exactly the hang distance
        assert!(approx_eq(tl.query(3, 2).unwrap(), 0.5));
        // hanged x, terminal v: d(x,u) + decode(u,v)
        let q = tl.query(4, 0).unwrap();
        assert!(q >= 100.0 - 1e-9 && q <= (1.0 + 12.0 * 0.2) * 100.0);
        // extension sandwich for every hanged x and v in Y
        for (&x, h) in &tl.hang.hangs {
            assert!(approx_eq(tl.query(x, h.target).unwrap(), h.dist));
            for &v in &tl.base.vertices {
                let dxv = tl.query(x, v).unwrap();
                let duv = tl.base.decode(h.target, v).unwrap();
                assert!(dxv >= h.dist.max(duv) - 1e-9);
                assert!(dxv <= h.dist + duv + 1e-9);
            }
        }
        // non-Y query side rejected
        assert!(tl.query(0, 4).is_err());
        // hanged points store a single record
        assert_eq!(tl.label_size(4), 1);
    }

    #[test]
    fn labeling_matches_spanner_graph() {
        let inst = line_inst(&[0.0, 1.0, 30.0, 30.5, 100.0], &[0, 1], 0.2);
        let sp = build_terminal_spanner(&inst).unwrap();
        let tl = build_terminal_labeling(&inst).unwrap();
        let tables = graph_distances(inst.n(), &sp.edges, inst.terminals());
        for (ti, &v) in inst.terminals().iter().enumerate() {
            for x in 0..inst.n() {
                if x == v {
                    continue;
                }
                let d = inst.metric.dist(v, x);
                let q = tl.query(x, v).unwrap();
                assert!(q >= d * (1.0 - 1e-9));
                assert!(q <= tl.certified_stretch * d * (1.0 + 1e-9));
                // the graph can only be at least as good as the labeling path
                assert!(tables[ti][x] <= q * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn embedding_extension_rules() {
        let mut base: HashMap<usize, Vec<f64>> = HashMap::new();
        base.insert(0, vec![0.0, 0.0]);
        base.insert(1, vec![3.0, 0.0]);
        let mut hm = HangMap::default();
        hm.hangs.insert(
            2,
            Hang { target: 1, dist: 4.0, reason: HangReason::NearestTerminal },
        );
        let ext = extend_embedding(&base, &hm).unwrap();
        assert_eq!(ext[&0], vec![0.0, 0.0, 0.0]);
        assert_eq!(ext[&2], vec![3.0, 0.0, 4.0]);
        // v = u: image distance is the hang distance, any norm
        assert!(approx_eq(norm_dist(&ext[&2], &ext[&1], 2.0), 4.0));
        assert!(approx_eq(norm_dist(&ext[&2], &ext[&1], f64::INFINITY), 4.0));
        // p = 2 composes by Pythagoras: 3-4-5
        assert!(approx_eq(norm_dist(&ext[&2], &ext[&0], 2.0), 5.0));
        // p = inf takes the max rule
        assert!(approx_eq(norm_dist(&ext[&2], &ext[&0], f64::INFINITY), 4.0));
    }
}
