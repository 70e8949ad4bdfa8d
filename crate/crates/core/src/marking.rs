//! Cluster marking and the enriched terminal set `Y`.

use crate::metric::{approx_ge, approx_le, TerminalInstance};
use crate::partition::PartialPartition;
use crate::{Error, Result};
use serde::Serialize;
use std::collections::{HashMap, HashSet};

/// The enriched set `Y`: centers of clusters marked by some terminal under
/// both marking conditions. Always contains `K`.
pub struct EnrichedSet {
    /// Marked-cluster centers, terminals first, ascending index within class.
    pub y: Vec<usize>,
    pub y_set: HashSet<usize>,
    /// Marked clusters as `(level, cluster index)`.
    pub marked: HashSet<(usize, usize)>,
    /// For each y, one `(terminal, level, cluster index)` that marked it.
    pub witness: HashMap<usize, (usize, usize, usize)>,
    /// Highest net level of each terminal.
    pub max_level: HashMap<usize, usize>,
    /// Number of clusters marked by each terminal, in terminal order.
    pub per_terminal_marks: Vec<(usize, usize)>,
    /// `b = ceil(log2(1/eps))`.
    pub b: u32,
}

pub fn scale_count(eps: f64) -> u32 {
    (1.0 / eps).log2().ceil().max(0.0) as u32
}

impl EnrichedSet {
    /// Degenerate enriched set `Y = K`, used by the single-terminal shortcut.
    pub fn terminals_only(inst: &TerminalInstance) -> Self {
        let y: Vec<usize> = inst.terminals().to_vec();
        EnrichedSet {
            y_set: y.iter().copied().collect(),
            y,
            marked: HashSet::new(),
            witness: HashMap::new(),
            max_level: HashMap::new(),
            per_terminal_marks: Vec::new(),
            b: scale_count(inst.eps()),
        }
    }
}

/// Marks every cluster `C_{i,j}` whose center satisfies, for some terminal
/// `u` with top net level `i_u`: `i_u - 2b <= i <= i_u` and
/// `d(u, x_{i,j}) <= 2 r_{i_u} / eps^2`.
pub fn mark_clusters(pp: &PartialPartition, inst: &TerminalInstance) -> Result<EnrichedSet> {
    let eps = inst.eps();
    let b = scale_count(eps);
    let metric = &inst.metric;

    let mut marked: HashSet<(usize, usize)> = HashSet::new();
    let mut witness: HashMap<usize, (usize, usize, usize)> = HashMap::new();
    let mut max_level = HashMap::new();
    let mut per_terminal_marks = Vec::new();

    for &u in inst.terminals() {
        let i_u = pp
            .max_net_level(u)
            .ok_or_else(|| Error::InvalidMetric(format!("terminal {u} missing from all nets")))?;
        max_level.insert(u, i_u);
        let reach = 2.0 * pp.radius(i_u) / (eps * eps);
        let lo = i_u.saturating_sub(2 * b as usize);
        let mut marks = 0usize;
        for i in lo..=i_u {
            for (j, c) in pp.levels[i].clusters.iter().enumerate() {
                if approx_le(metric.dist(u, c.center), reach) {
                    marks += 1;
                    if marked.insert((i, j)) {
                        witness.insert(c.center, (u, i, j));
                    }
                }
            }
        }
        per_terminal_marks.push((u, marks));
    }

    let mut y_set: HashSet<usize> = marked
        .iter()
        .map(|&(i, j)| pp.levels[i].clusters[j].center)
        .collect();
    // every terminal self-marks the cluster it centers at level i_u
    for &u in inst.terminals() {
        if !y_set.contains(&u) {
            return Err(Error::InvalidMetric(format!("terminal {u} not in Y")));
        }
    }
    y_set.extend(inst.terminals());
    let mut y: Vec<usize> = inst.terminals().to_vec();
    let mut others: Vec<usize> = y_set
        .iter()
        .copied()
        .filter(|&p| !inst.is_terminal(p))
        .collect();
    others.sort_unstable();
    y.extend(others);

    Ok(EnrichedSet { y, y_set, marked, witness, max_level, per_terminal_marks, b })
}

/// Size audit for the enriched set against `|Y| <= k * lambda^(5b)`.
#[derive(Debug, Clone, Serialize)]
pub struct EnrichedSizeReport {
    pub y_size: usize,
    pub k: usize,
    pub lambda_hat: u32,
    pub b: u32,
    pub bound: f64,
    pub max_marks_per_terminal: usize,
    pub per_terminal_marks: Vec<(usize, usize)>,
    pub pass: bool,
}

pub fn enriched_size_audit(es: &EnrichedSet, lambda_hat: u32, k: usize) -> EnrichedSizeReport {
    let bound = (k as f64) * (lambda_hat as f64).powi(5 * es.b as i32);
    let max_marks = es
        .per_terminal_marks
        .iter()
        .map(|&(_, c)| c)
        .max()
        .unwrap_or(0);
    EnrichedSizeReport {
        y_size: es.y.len(),
        k,
        lambda_hat,
        b: es.b,
        bound,
        max_marks_per_terminal: max_marks,
        per_terminal_marks: es.per_terminal_marks.clone(),
        pass: (es.y.len() as f64) <= bound,
    }
}

/// Witnesses the structural precondition used by the stretch analysis of
/// final non-marked clusters: for every point `x` in such a cluster at level
/// `i < s`, some terminal `u'` has `d(x, u') in [r_i/(2 eps), 3 r_i / eps]`
/// and every other terminal `w` has `d(u', w) <= r_i` or
/// `d(u', w) >= r_i / eps^2`.
pub fn marking_witness_check(
    pp: &PartialPartition,
    es: &EnrichedSet,
    inst: &TerminalInstance,
) -> Result<()> {
    let eps = inst.eps();
    let metric = &inst.metric;
    for (i, level) in pp.levels.iter().enumerate() {
        if i >= pp.top_level {
            continue;
        }
        let r_i = level.radius;
        for (j, c) in level.clusters.iter().enumerate() {
            if !c.is_final || es.marked.contains(&(i, j)) {
                continue;
            }
            for &x in &c.members {
                let found = inst.terminals().iter().any(|&u| {
                    let d = metric.dist(x, u);
                    approx_ge(d, r_i / (2.0 * eps))
                        && approx_le(d, 3.0 * r_i / eps)
                        && inst.terminals().iter().all(|&w| {
                            w == u || {
                                let dw = metric.dist(u, w);
                                approx_le(dw, r_i) || approx_ge(dw, r_i / (eps * eps))
                            }
                        })
                });
                if !found {
                    return Err(Error::InvalidMetric(format!(
                        "no stretch witness terminal for point {x} in final non-marked \
                         cluster at level {i}"
                    )));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::FiniteMetric;
    use crate::partition::build_partial_partitions;

    fn line_inst(xs: &[f64], k: &[usize], eps: f64) -> TerminalInstance {
        let m = FiniteMetric::from_points(xs.iter().map(|&x| vec![x]).collect()).unwrap();
        TerminalInstance::new(m, k.to_vec(), eps).unwrap()
    }

    #[test]
    fn collinear_enriched_set_is_terminals() {
        let inst = line_inst(&[0.0, 1.0, 100.0], &[0, 2], 0.05);
        let pp = build_partial_partitions(&inst).unwrap();
        let es = mark_clusters(&pp, &inst).unwrap();
        // terminal 0 tops out at level s, so its marking window spans every
        // level and its reach 2 r_s / eps^2 exceeds the diameter; point 1,
        // which centers singleton clusters at levels 0 and 1, gets marked too
        assert_eq!(es.y, vec![0, 2, 1]);
        let report = enriched_size_audit(&es, 2, 2);
        assert!(report.pass);
    }

    #[test]
    fn terminals_always_in_y() {
        let inst = line_inst(&[0.0, 2.0, 4.5, 9.0, 20.0, 33.0], &[0, 3, 5], 0.1);
        let pp = build_partial_partitions(&inst).unwrap();
        let es = mark_clusters(&pp, &inst).unwrap();
        for &u in inst.terminals() {
            assert!(es.y_set.contains(&u));
        }
        marking_witness_check(&pp, &es, &inst).unwrap();
    }

    #[test]
    fn non_terminal_center_can_be_marked() {
        // point at 60 becomes a net center between the two terminals and lies
        // well inside the marking reach 2 r_{i_u} / eps^2
        let inst = line_inst(&[0.0, 60.0, 100.0], &[0, 2], 0.1);
        let pp = build_partial_partitions(&inst).unwrap();
        let es = mark_clusters(&pp, &inst).unwrap();
        assert!(es.y_set.contains(&1), "Y = {:?}", es.y);
        assert!(es.witness.contains_key(&1));
    }

    #[test]
    fn all_terminal_instance_audit() {
        let inst = line_inst(&[0.0, 1.0, 3.0, 7.0], &[0, 1, 2, 3], 0.1);
        let pp = build_partial_partitions(&inst).unwrap();
        let es = mark_clusters(&pp, &inst).unwrap();
        assert_eq!(es.y.len(), 4);
        let report = enriched_size_audit(&es, 2, 4);
        assert!(report.pass);
        // per-terminal marks bounded by (2b+1) * lambda^(4b+2) trivially
        let b = es.b as i32;
        let cap = (2.0 * b as f64 + 1.0) * 2f64.powi(4 * b + 2);
        assert!(report.max_marks_per_terminal as f64 <= cap);
    }
}
