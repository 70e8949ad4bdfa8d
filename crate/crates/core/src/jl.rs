//! Random-projection terminal embedding for Euclidean instances: project
//! the enriched set `Y`, then extend to all of `X` with one extra
//! coordinate per hanged point.

use crate::marking::mark_clusters;
use crate::metric::TerminalInstance;
use crate::partition::build_partial_partitions;
use crate::spanner::{extend_embedding, hang_points, HangMap};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProjectionMode {
    /// i.i.d. N(0,1) entries scaled by `1/sqrt(target_dim)`.
    Gaussian,
    /// Exact isometry `[I; 0]`; needs `target_dim >= ambient`.
    Orthonormal,
}

pub struct JlEmbedding {
    pub target_dim: usize,
    pub mode: ProjectionMode,
    pub seed: u64,
    pub y: Vec<usize>,
    pub hang: HangMap,
    /// Image of every point, `target_dim + 1` coordinates.
    pub coords: Vec<Vec<f64>>,
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    loop {
        let u1: f64 = rng.gen();
        if u1 > 0.0 {
            let u2: f64 = rng.gen();
            return (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        }
    }
}

/// Projects the ambient coordinates of `Y` to `target_dim` dimensions and
/// extends to `X` via hanging (one extra coordinate). Gaussian mode.
pub fn embed_l2_terminal(
    inst: &TerminalInstance,
    target_dim: usize,
    seed: u64,
) -> Result<JlEmbedding> {
    embed_l2_terminal_mode(inst, target_dim, seed, ProjectionMode::Gaussian)
}

pub fn embed_l2_terminal_mode(
    inst: &TerminalInstance,
    target_dim: usize,
    seed: u64,
    mode: ProjectionMode,
) -> Result<JlEmbedding> {
    let ambient_coords = inst.metric.coords().ok_or(Error::NotEuclidean)?;
    let ambient = ambient_coords[0].len();
    if target_dim == 0 {
        return Err(Error::BadGenParams("target_dim must be positive".into()));
    }
    if mode == ProjectionMode::Orthonormal && target_dim < ambient {
        return Err(Error::BadGenParams(format!(
            "orthonormal mode needs target_dim >= ambient dimension ({target_dim} < {ambient})"
        )));
    }

    let pp = build_partial_partitions(inst)?;
    let es = mark_clusters(&pp, inst)?;
    let hm = hang_points(&pp, &es, inst);

    let project: Vec<Vec<f64>> = match mode {
        ProjectionMode::Orthonormal => (0..target_dim)
            .map(|r| {
                let mut row = vec![0.0; ambient];
                if r < ambient {
                    row[r] = 1.0;
                }
                row
            })
            .collect(),
        ProjectionMode::Gaussian => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = 1.0 / (target_dim as f64).sqrt();
            (0..target_dim)
                .map(|_| (0..ambient).map(|_| gaussian(&mut rng) * s).collect())
                .collect()
        }
    };

    let mut base: HashMap<usize, Vec<f64>> = HashMap::with_capacity(es.y.len());
    for &y in &es.y {
        let p = &ambient_coords[y];
        let img: Vec<f64> = project
            .iter()
            .map(|row| row.iter().zip(p).map(|(a, b)| a * b).sum())
            .collect();
        base.insert(y, img);
    }
    let full = extend_embedding(&base, &hm)?;
    let coords: Vec<Vec<f64>> = (0..inst.n())
        .map(|x| full[&x].clone())
        .collect();
    Ok(JlEmbedding { target_dim, mode, seed, y: es.y, hang: hm, coords })
}

/// One seed's outcome in a Monte-Carlo sweep.
#[derive(Debug, Clone, Serialize)]
pub struct JlSeedOutcome {
    pub seed: u64,
    pub max_distortion: f64,
    pub min_ratio: f64,
    pub pass: bool,
}

/// Sweep report: the guarantee is probabilistic, so the audit reports the
/// per-seed failure rate against a distortion threshold instead of
/// asserting every seed.
#[derive(Debug, Clone, Serialize)]
pub struct JlSweepReport {
    pub target_dim: usize,
    pub threshold: f64,
    pub outcomes: Vec<JlSeedOutcome>,
    pub pass_fraction: f64,
}

/// Runs the Gaussian embedding once per seed and audits `K x X` distortion
/// (max of expansion and 1/contraction) against `threshold`.
pub fn jl_seed_sweep(
    inst: &TerminalInstance,
    target_dim: usize,
    seeds: &[u64],
    threshold: f64,
) -> Result<JlSweepReport> {
    let mut outcomes = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let emb = embed_l2_terminal(inst, target_dim, seed)?;
        let mut max_ratio = 1.0f64;
        let mut min_ratio = 1.0f64;
        for &v in inst.terminals() {
            for x in 0..inst.n() {
                if x == v {
                    continue;
                }
                let d = inst.metric.dist(x, v);
                if d == 0.0 {
                    continue;
                }
                let img = crate::audit::norm_dist(&emb.coords[x], &emb.coords[v], 2.0);
                let ratio = img / d;
                max_ratio = max_ratio.max(ratio);
                min_ratio = min_ratio.min(ratio);
            }
        }
        let distortion = max_ratio.max(1.0 / min_ratio);
        outcomes.push(JlSeedOutcome {
            seed,
            max_distortion: distortion,
            min_ratio,
            pass: distortion <= threshold,
        });
    }
    let pass_fraction =
        outcomes.iter().filter(|o| o.pass).count() as f64 / outcomes.len().max(1) as f64;
    Ok(JlSweepReport { target_dim, threshold, outcomes, pass_fraction })
}
