//! File formats: point sets, distance matrices, terminal lists, spanner
//! edge lists, labeling records, and embedding tables.

use crate::base::{BaseLabeling, LabelEntry};
use crate::metric::FiniteMetric;
use crate::spanner::{Hang, HangMap, HangReason, TerminalLabeling};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

fn parse_f64(tok: &str, path: &Path) -> Result<f64> {
    tok.parse()
        .map_err(|_| Error::Parse(format!("{}: bad number {tok:?}", path.display())))
}

fn parse_usize(tok: &str, path: &Path) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::Parse(format!("{}: bad index {tok:?}", path.display())))
}

/// One point per line, whitespace-separated real coordinates.
pub fn write_points(path: &Path, coords: &[Vec<f64>]) -> Result<()> {
    let mut out = String::new();
    for p in coords {
        let strs: Vec<String> = p.iter().map(|c| format!("{c}")).collect();
        writeln!(out, "{}", strs.join(" ")).unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_points(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    let mut coords = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: Result<Vec<f64>> = line
            .split_whitespace()
            .map(|t| parse_f64(t, path))
            .collect();
        coords.push(row?);
    }
    if coords.is_empty() {
        return Err(Error::Parse(format!("{}: no points", path.display())));
    }
    Ok(coords)
}

/// First line `n`, then `n` lines of `n` reals.
pub fn write_matrix(path: &Path, metric: &FiniteMetric) -> Result<()> {
    let n = metric.n();
    let mut out = format!("{n}\n");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format!("{}", metric.dist(i, j))).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<FiniteMetric> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let n = parse_usize(
        lines
            .next()
            .ok_or_else(|| Error::Parse(format!("{}: empty file", path.display())))?
            .trim(),
        path,
    )?;
    let mut matrix = Vec::with_capacity(n * n);
    for _ in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("{}: truncated matrix", path.display())))?;
        let row: Result<Vec<f64>> = line
            .split_whitespace()
            .map(|t| parse_f64(t, path))
            .collect();
        let row = row?;
        if row.len() != n {
            return Err(Error::Parse(format!(
                "{}: expected {n} entries per row, got {}",
                path.display(),
                row.len()
            )));
        }
        matrix.extend(row);
    }
    FiniteMetric::from_matrix(n, matrix)
}

/// Whitespace-separated 0-based indices.
pub fn write_terminals(path: &Path, terminals: &[usize]) -> Result<()> {
    let strs: Vec<String> = terminals.iter().map(|t| t.to_string()).collect();
    fs::write(path, strs.join(" ") + "\n")?;
    Ok(())
}

pub fn read_terminals(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)?;
    text.split_whitespace()
        .map(|t| parse_usize(t, path))
        .collect()
}

/// Reads an instance metric from either a point-set file or a matrix file,
/// keyed on the `.matrix` extension.
pub fn read_metric(path: &Path) -> Result<FiniteMetric> {
    if path.extension().and_then(|e| e.to_str()) == Some("matrix") {
        read_matrix(path)
    } else {
        FiniteMetric::from_points(read_points(path)?)
    }
}

/// One `i j w` line per edge.
pub fn write_edges(path: &Path, edges: &[(usize, usize, f64)]) -> Result<()> {
    let mut out = String::new();
    for &(a, b, w) in edges {
        writeln!(out, "{a} {b} {w}").unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_edges(path: &Path) -> Result<Vec<(usize, usize, f64)>> {
    let text = fs::read_to_string(path)?;
    let mut edges = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(Error::Parse(format!(
                "{}: expected `i j w`, got {line:?}",
                path.display()
            )));
        }
        edges.push((
            parse_usize(toks[0], path)?,
            parse_usize(toks[1], path)?,
            parse_f64(toks[2], path)?,
        ));
    }
    Ok(edges)
}

/// Serialized terminal labeling: base label records plus hang records.
#[derive(Serialize, Deserialize)]
pub struct LabelingFile {
    pub eps_base: f64,
    pub storage_factor: f64,
    pub certified_stretch: f64,
    pub radii: Vec<f64>,
    pub vertices: Vec<usize>,
    pub labels: Vec<(usize, Vec<LabelEntry>)>,
    pub hangs: Vec<(usize, usize, f64, String)>,
}

pub fn write_labeling(path: &Path, tl: &TerminalLabeling) -> Result<()> {
    let mut labels: Vec<(usize, Vec<LabelEntry>)> = tl
        .base
        .labels
        .iter()
        .map(|(&u, l)| (u, l.clone()))
        .collect();
    labels.sort_by_key(|&(u, _)| u);
    let mut hangs: Vec<(usize, usize, f64, String)> = tl
        .hang
        .hangs
        .iter()
        .map(|(&x, h)| {
            let reason = match h.reason {
                HangReason::FinalMarkedCenter => "final-marked-center",
                HangReason::NearestTerminal => "nearest-terminal",
            };
            (x, h.target, h.dist, reason.to_string())
        })
        .collect();
    hangs.sort_by_key(|&(x, ..)| x);
    let file = LabelingFile {
        eps_base: tl.base.eps_base,
        storage_factor: tl.base.storage_factor,
        certified_stretch: tl.certified_stretch,
        radii: tl.base.radii.clone(),
        vertices: tl.base.vertices.clone(),
        labels,
        hangs,
    };
    let json = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::Parse(format!("labeling serialization: {e}")))?;
    fs::write(path, json)?;
    Ok(())
}

pub fn read_labeling(path: &Path) -> Result<TerminalLabeling> {
    let text = fs::read_to_string(path)?;
    let file: LabelingFile = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let labels: HashMap<usize, Vec<LabelEntry>> = file.labels.into_iter().collect();
    let base = BaseLabeling::from_parts(
        file.vertices,
        labels,
        file.eps_base,
        file.storage_factor,
        file.radii,
    );
    let mut hm = HangMap::default();
    for (x, target, dist, reason) in file.hangs {
        let reason = match reason.as_str() {
            "final-marked-center" => HangReason::FinalMarkedCenter,
            "nearest-terminal" => HangReason::NearestTerminal,
            other => {
                return Err(Error::Parse(format!(
                    "{}: unknown hang reason {other:?}",
                    path.display()
                )))
            }
        };
        hm.hangs.insert(x, Hang { target, dist, reason });
    }
    Ok(crate::spanner::extend_labeling(base, hm, file.certified_stretch))
}

/// Embedding table: header `D t eps scale`, then one line of `D` reals per
/// point.
pub fn write_embedding(
    path: &Path,
    dim: usize,
    t: usize,
    eps: f64,
    scale: f64,
    coords: &[Vec<f64>],
) -> Result<()> {
    let mut out = format!("{dim} {t} {eps} {scale}\n");
    for row in coords {
        let strs: Vec<String> = row.iter().map(|c| format!("{c}")).collect();
        writeln!(out, "{}", strs.join(" ")).unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

pub struct EmbeddingFile {
    pub dim: usize,
    pub t: usize,
    pub eps: f64,
    pub scale: f64,
    pub coords: Vec<Vec<f64>>,
}

pub fn read_embedding(path: &Path) -> Result<EmbeddingFile> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty file", path.display())))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 4 {
        return Err(Error::Parse(format!(
            "{}: header must be `D t eps scale`",
            path.display()
        )));
    }
    let dim = parse_usize(toks[0], path)?;
    let t = parse_usize(toks[1], path)?;
    let eps = parse_f64(toks[2], path)?;
    let scale = parse_f64(toks[3], path)?;
    let mut coords = Vec::new();
    for line in lines {
        let row: Result<Vec<f64>> = line
            .split_whitespace()
            .map(|tk| parse_f64(tk, path))
            .collect();
        let row = row?;
        if row.len() != dim {
            return Err(Error::Parse(format!(
                "{}: expected {dim} coordinates per point, got {}",
                path.display(),
                row.len()
            )));
        }
        coords.push(row);
    }
    Ok(EmbeddingFile { dim, t, eps, scale, coords })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{approx_eq, TerminalInstance};
    use crate::spanner::build_terminal_labeling;
    use std::env;

    fn tmp(name: &str) -> std::path::PathBuf {
        env::temp_dir().join(format!("termspan-io-{}-{name}", std::process::id()))
    }

    #[test]
    fn points_roundtrip() {
        let p = tmp("points");
        let coords = vec![vec![0.0, 1.5], vec![2.25, -3.0]];
        write_points(&p, &coords).unwrap();
        assert_eq!(read_points(&p).unwrap(), coords);
        fs::remove_file(&p).unwrap();
    }

    #[test]
    fn matrix_roundtrip() {
        let p = tmp("matrix");
        let m = FiniteMetric::from_matrix(3, vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.5, 2.0, 1.5, 0.0])
            .unwrap();
        write_matrix(&p, &m).unwrap();
        let back = read_matrix(&p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(back.dist(i, j), m.dist(i, j));
            }
        }
        fs::remove_file(&p).unwrap();
    }

    #[test]
    fn terminals_and_edges_roundtrip() {
        let pt = tmp("terminals");
        write_terminals(&pt, &[0, 3, 7]).unwrap();
        assert_eq!(read_terminals(&pt).unwrap(), vec![0, 3, 7]);
        fs::remove_file(&pt).unwrap();

        let pe = tmp("edges");
        let edges = vec![(0, 1, 2.5), (1, 2, 0.125)];
        write_edges(&pe, &edges).unwrap();
        assert_eq!(read_edges(&pe).unwrap(), edges);
        fs::remove_file(&pe).unwrap();
    }

    #[test]
    fn labeling_roundtrip_preserves_queries() {
        let m = FiniteMetric::from_points(
            [0.0, 1.0, 30.0, 30.5, 100.0].iter().map(|&x| vec![x]).collect(),
        )
        .unwrap();
        let inst = TerminalInstance::new(m, vec![0, 1], 0.2).unwrap();
        let tl = build_terminal_labeling(&inst).unwrap();
        let p = tmp("labeling");
        write_labeling(&p, &tl).unwrap();
        let back = read_labeling(&p).unwrap();
        for x in 0..5 {
            for &v in &tl.base.vertices {
                assert!(approx_eq(
                    tl.query(x, v).unwrap(),
                    back.query(x, v).unwrap()
                ));
            }
        }
        fs::remove_file(&p).unwrap();
    }

    #[test]
    fn embedding_roundtrip() {
        let p = tmp("embedding");
        let coords = vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]];
        write_embedding(&p, 3, 2, 0.1, 1.5, &coords).unwrap();
        let back = read_embedding(&p).unwrap();
        assert_eq!(back.dim, 3);
        assert_eq!(back.t, 2);
        assert_eq!(back.eps, 0.1);
        assert_eq!(back.scale, 1.5);
        assert_eq!(back.coords, coords);
        fs::remove_file(&p).unwrap();
    }
}
