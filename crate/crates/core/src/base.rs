//! Black-box (1 + eps) base structures over a point subset: a hierarchical
//! net spanner, a distance labeling, and an oracle wrapper. These are the
//! structures the terminal extension machinery hangs points onto.

use crate::metric::{approx_le, FiniteMetric};
use crate::net::{greedy_net, Net};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Nested greedy nets over a point subset, shared by the spanner and the
/// labeling. Level radii are `2^l * (min distance) / 2`; the bottom level
/// holds every point, so the closest pair is connected at level 0.
pub struct NetHierarchy {
    pub points: Vec<usize>,
    pub radii: Vec<f64>,
    pub levels: Vec<Vec<usize>>,
    /// Per level, covering net point of every member of the previous level.
    pub parents: Vec<HashMap<usize, usize>>,
}

pub fn build_hierarchy(points: &[usize], metric: &FiniteMetric) -> Result<NetHierarchy> {
    if points.is_empty() {
        return Err(Error::EmptyPointList);
    }
    let mut sorted = points.to_vec();
    sorted.sort_unstable();
    sorted.dedup();

    let mut min_d = f64::INFINITY;
    let mut max_d = 0.0f64;
    for (a, &u) in sorted.iter().enumerate() {
        for &v in &sorted[a + 1..] {
            let d = metric.dist(u, v);
            if d > 0.0 {
                min_d = min_d.min(d);
            }
            max_d = max_d.max(d);
        }
    }
    if !min_d.is_finite() {
        // single point or all coincident: one trivial level
        return Ok(NetHierarchy {
            points: sorted.clone(),
            radii: vec![1.0],
            levels: vec![vec![sorted[0]]],
            parents: vec![sorted.iter().map(|&p| (p, sorted[0])).collect()],
        });
    }

    // r_0 = min_d / 2 keeps every point in the bottom net
    let r0 = min_d / 2.0;
    let mut radii = Vec::new();
    let mut levels: Vec<Vec<usize>> = Vec::new();
    let mut parents: Vec<HashMap<usize, usize>> = Vec::new();
    let mut below: Vec<usize> = sorted.clone();
    let mut l = 0i32;
    loop {
        let r = r0 * 2f64.powi(l);
        let net: Net = greedy_net(&below, metric, r, &[])?;
        let mut parent = HashMap::with_capacity(below.len());
        for &p in &below {
            let (q, _) = metric.nearest_in(p, &net.members);
            parent.insert(p, q);
        }
        radii.push(r);
        parents.push(parent);
        let members = net.members;
        let done = members.len() == 1 || r >= max_d;
        levels.push(members.clone());
        if done {
            break;
        }
        below = members;
        l += 1;
    }
    Ok(NetHierarchy { points: sorted, radii, levels, parents })
}

impl NetHierarchy {
    /// Ancestor of `p` at level `l` obtained by following parent pointers.
    pub fn ancestor(&self, p: usize, l: usize) -> usize {
        let mut cur = p;
        for lvl in 0..=l {
            cur = self.parents[lvl][&cur];
        }
        cur
    }
}

/// A weighted graph over a point subset whose shortest-path metric
/// approximates `d` within `1 + eps_base` on all pairs of the subset.
/// Edge weights are exact distances, so the graph never contracts.
pub struct BaseSpanner {
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, usize, f64)>,
    pub eps_base: f64,
    pub cross_factor: f64,
}

/// Cross-edge factor sufficient for `1 + eps` stretch in the net spanner.
pub fn default_cross_factor(eps_base: f64) -> f64 {
    4.0 + 16.0 / eps_base
}

pub fn build_base_spanner(
    points: &[usize],
    metric: &FiniteMetric,
    eps_base: f64,
) -> Result<BaseSpanner> {
    build_base_spanner_with_factor(points, metric, eps_base, default_cross_factor(eps_base))
}

pub fn build_base_spanner_with_factor(
    points: &[usize],
    metric: &FiniteMetric,
    eps_base: f64,
    cross_factor: f64,
) -> Result<BaseSpanner> {
    if !(eps_base > 0.0 && eps_base < 1.0) {
        return Err(Error::BadEpsilon(eps_base));
    }
    let h = build_hierarchy(points, metric)?;
    let mut edge_set: HashMap<(usize, usize), f64> = HashMap::new();
    let mut add = |a: usize, b: usize| {
        if a != b {
            let key = (a.min(b), a.max(b));
            edge_set.entry(key).or_insert_with(|| metric.dist(a, b));
        }
    };
    for (l, members) in h.levels.iter().enumerate() {
        let r = h.radii[l];
        // parent edges from the level below (or from all points at l = 0)
        for (&p, &q) in &h.parents[l] {
            add(p, q);
        }
        // cross edges within the level
        for (a, &u) in members.iter().enumerate() {
            for &v in &members[a + 1..] {
                if approx_le(metric.dist(u, v), cross_factor * r) {
                    add(u, v);
                }
            }
        }
    }
    let mut edges: Vec<(usize, usize, f64)> = edge_set
        .into_iter()
        .map(|((a, b), w)| (a, b, w))
        .collect();
    edges.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)));
    Ok(BaseSpanner { vertices: h.points, edges, eps_base, cross_factor })
}

/// One stored label entry: a net point of some hierarchy level together with
/// the exact distance to it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelEntry {
    pub level: usize,
    pub center: usize,
    pub dist: f64,
}

/// Distance labeling over a point subset: each vertex stores, per hierarchy
/// level `l`, every net point within `(2 + 8/eps_base) * r_l`. Decoding takes
/// the best level-aligned common net point; the result lies in
/// `[d, (1 + eps_base) d]`.
pub struct BaseLabeling {
    pub vertices: Vec<usize>,
    pub labels: HashMap<usize, Vec<LabelEntry>>,
    lookup: HashMap<usize, HashMap<(usize, usize), f64>>,
    pub eps_base: f64,
    pub storage_factor: f64,
    pub radii: Vec<f64>,
}

pub fn build_base_labeling(
    points: &[usize],
    metric: &FiniteMetric,
    eps_base: f64,
) -> Result<BaseLabeling> {
    if !(eps_base > 0.0 && eps_base < 1.0) {
        return Err(Error::BadEpsilon(eps_base));
    }
    let h = build_hierarchy(points, metric)?;
    let storage_factor = 2.0 + 8.0 / eps_base;
    let mut labels: HashMap<usize, Vec<LabelEntry>> = HashMap::new();
    for &u in &h.points {
        let mut lab = Vec::new();
        for (l, members) in h.levels.iter().enumerate() {
            let reach = storage_factor * h.radii[l];
            for &p in members {
                let d = metric.dist(u, p);
                if approx_le(d, reach) {
                    lab.push(LabelEntry { level: l, center: p, dist: d });
                }
            }
        }
        labels.insert(u, lab);
    }
    let lookup = labels
        .iter()
        .map(|(&u, lab)| {
            let map = lab
                .iter()
                .map(|e| ((e.level, e.center), e.dist))
                .collect::<HashMap<_, _>>();
            (u, map)
        })
        .collect();
    Ok(BaseLabeling {
        vertices: h.points,
        labels,
        lookup,
        eps_base,
        storage_factor,
        radii: h.radii,
    })
}

impl BaseLabeling {
    /// Rebuilds a labeling from serialized parts (labels as stored on disk).
    pub fn from_parts(
        vertices: Vec<usize>,
        labels: HashMap<usize, Vec<LabelEntry>>,
        eps_base: f64,
        storage_factor: f64,
        radii: Vec<f64>,
    ) -> Self {
        let lookup = labels
            .iter()
            .map(|(&u, lab)| {
                let map = lab
                    .iter()
                    .map(|e| ((e.level, e.center), e.dist))
                    .collect::<HashMap<_, _>>();
                (u, map)
            })
            .collect();
        BaseLabeling { vertices, labels, lookup, eps_base, storage_factor, radii }
    }

    pub fn contains(&self, u: usize) -> bool {
        self.labels.contains_key(&u)
    }

    /// Approximate distance from the two labels alone.
    pub fn decode(&self, u: usize, v: usize) -> Result<f64> {
        Ok(self.decode_counted(u, v)?.0)
    }

    /// As [`decode`](Self::decode), also returning the number of label
    /// entries touched by the query.
    pub fn decode_counted(&self, u: usize, v: usize) -> Result<(f64, usize)> {
        let lu = self.labels.get(&u).ok_or(Error::UnknownVertex(u))?;
        let lv = self.labels.get(&v).ok_or(Error::UnknownVertex(v))?;
        if u == v {
            return Ok((0.0, 0));
        }
        // iterate the smaller label, probe the other's hash map
        let (small, big_map, touched) = if lu.len() <= lv.len() {
            (lu, &self.lookup[&v], lu.len())
        } else {
            (lv, &self.lookup[&u], lv.len())
        };
        let mut best = f64::INFINITY;
        for e in small {
            if let Some(&d_other) = big_map.get(&(e.level, e.center)) {
                best = best.min(e.dist + d_other);
            }
        }
        if !best.is_finite() {
            return Err(Error::InvalidMetric(format!(
                "labels of {u} and {v} share no entry"
            )));
        }
        Ok((best, touched))
    }

    pub fn label_size(&self, u: usize) -> usize {
        self.labels.get(&u).map_or(0, |l| l.len())
    }

    pub fn max_label_size(&self) -> usize {
        self.labels.values().map(|l| l.len()).max().unwrap_or(0)
    }
}

/// Centralized distance oracle: the labeling with one shared store.
pub struct BaseOracle {
    pub labeling: BaseLabeling,
}

impl BaseOracle {
    pub fn new(labeling: BaseLabeling) -> Self {
        BaseOracle { labeling }
    }

    pub fn query(&self, u: usize, v: usize) -> Result<f64> {
        self.labeling.decode(u, v)
    }

    pub fn query_counted(&self, u: usize, v: usize) -> Result<(f64, usize)> {
        self.labeling.decode_counted(u, v)
    }
}
