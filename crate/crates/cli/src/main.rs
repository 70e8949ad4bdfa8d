use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use termspan::audit::{
    audit_embedding_kx, audit_kx, audit_spanner_kx, lower_bound_audit, StretchReport,
};
use termspan::gen::{gen_instance, GenSpec};
use termspan::io;
use termspan::jl::embed_l2_terminal;
use termspan::kdoubling::build_k_doubling;
use termspan::linf::embed_linf;
use termspan::metric::TerminalInstance;
use termspan::net::estimate_doubling_constant_on;
use termspan::spanner::{build_terminal_labeling, build_terminal_spanner};

/// Builds and audits terminal metric structures: spanners, distance
/// labelings, and embeddings whose guarantees hold for terminal-to-point
/// pairs.
#[derive(Parser)]
#[command(name = "termspan", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seeded instance (points/matrix + terminals files).
    Gen(GenArgs),
    /// Build a structure from an instance and write it out.
    Build(BuildArgs),
    /// Audit a structure file against exact distances; exit 0 iff it passes.
    Audit(AuditArgs),
    /// Generate a lower-bound instance and run the detour audit on it.
    LowerBound(LowerBoundArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Line,
    UniformSquare,
    GaussianClusters,
    Grid,
    LowerBound,
    Completion,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dimension for gaussian-clusters.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Cluster spread for gaussian-clusters.
    #[arg(long, default_value_t = 0.03)]
    spread: f64,
    /// Doubling parameter for the lower-bound kind.
    #[arg(long, default_value_t = 4)]
    lambda: u32,
    /// Output prefix; writes <out>.points or <out>.matrix and
    /// <out>.terminals.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Structure {
    Spanner,
    SpannerK,
    Oracle,
    Labeling,
    EmbedLinf,
    EmbedL2,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, value_enum)]
    structure: Structure,
    /// Instance file: .matrix or a point-set file.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    terminals: PathBuf,
    #[arg(long)]
    eps: f64,
    /// Target dimension for embed-l2.
    #[arg(long)]
    target_dim: Option<usize>,
    /// Projection seed for embed-l2.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long, value_enum)]
    structure: Structure,
    /// The built structure file.
    #[arg(long)]
    file: PathBuf,
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    terminals: PathBuf,
    #[arg(long)]
    eps: f64,
    /// Distortion threshold for embed-l2 (probabilistic guarantee).
    #[arg(long, default_value_t = 1.25)]
    threshold: f64,
    /// Report JSON output; stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct LowerBoundArgs {
    #[arg(long)]
    lambda: u32,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn load_instance(instance: &Path, terminals: &Path, eps: f64) -> anyhow::Result<TerminalInstance> {
    let metric = io::read_metric(instance)
        .with_context(|| format!("reading instance {}", instance.display()))?;
    let terms = io::read_terminals(terminals)
        .with_context(|| format!("reading terminals {}", terminals.display()))?;
    Ok(TerminalInstance::new(metric, terms, eps)?)
}

fn emit_report<T: serde::Serialize>(report: &T, out: Option<&Path>) -> anyhow::Result<()> {
    let json = serde_json::to_string_pretty(report)?;
    match out {
        Some(p) => std::fs::write(p, json + "\n")?,
        None => println!("{json}"),
    }
    Ok(())
}

fn run_gen(a: GenArgs) -> anyhow::Result<bool> {
    let spec = match a.kind {
        Kind::Line => GenSpec::Line { n: a.n, spacing: 1.0 },
        Kind::UniformSquare => GenSpec::UniformSquare { n: a.n },
        Kind::GaussianClusters => {
            GenSpec::GaussianClusters { n: a.n, dim: a.dim, spread: a.spread }
        }
        Kind::Grid => GenSpec::Grid { n: a.n },
        Kind::LowerBound => GenSpec::LowerBound { lambda: a.lambda, n: a.n },
        Kind::Completion => GenSpec::Completion { n: a.n },
    };
    let inst = gen_instance(&spec, a.k, a.eps, a.seed)?;
    let metric_path = if let Some(coords) = inst.metric.coords() {
        let p = a.out.with_extension("points");
        io::write_points(&p, coords)?;
        p
    } else {
        let p = a.out.with_extension("matrix");
        io::write_matrix(&p, &inst.metric)?;
        p
    };
    let term_path = a.out.with_extension("terminals");
    io::write_terminals(&term_path, inst.terminals())?;
    println!(
        "wrote {} and {} (n = {}, k = {})",
        metric_path.display(),
        term_path.display(),
        inst.n(),
        inst.k()
    );
    Ok(true)
}

fn run_build(a: BuildArgs) -> anyhow::Result<bool> {
    let inst = load_instance(&a.instance, &a.terminals, a.eps)?;
    match a.structure {
        Structure::Spanner => {
            let sp = build_terminal_spanner(&inst)?;
            io::write_edges(&a.out, &sp.edges)?;
            println!(
                "spanner: {} edges ({} base + {} hang), |Y| = {}",
                sp.edges.len(),
                sp.base_edge_count,
                sp.edges.len() - sp.base_edge_count,
                sp.y.len()
            );
        }
        Structure::SpannerK => {
            let s = build_k_doubling(&inst)?;
            io::write_edges(&a.out, &s.spanner.edges)?;
            println!(
                "k-doubling spanner: {} edges ({} base), max |N(x)| = {}",
                s.spanner.edges.len(),
                s.spanner.base_edge_count,
                s.max_net_size()
            );
        }
        Structure::Oracle | Structure::Labeling => {
            let tl = build_terminal_labeling(&inst)?;
            io::write_labeling(&a.out, &tl)?;
            println!(
                "labeling: {} base vertices, {} hanged points, max label size {}",
                tl.base.vertices.len(),
                tl.hang.len(),
                tl.base.max_label_size()
            );
        }
        Structure::EmbedLinf => {
            let emb = embed_linf(&inst)?;
            io::write_embedding(&a.out, emb.dim, emb.t, a.eps, emb.scale, &emb.coords)?;
            println!("linf embedding: D = {}, t = {}", emb.dim, emb.t);
        }
        Structure::EmbedL2 => {
            let dim = a
                .target_dim
                .context("embed-l2 requires --target-dim")?;
            let emb = embed_l2_terminal(&inst, dim, a.seed)?;
            io::write_embedding(&a.out, dim + 1, 0, a.eps, 1.0, &emb.coords)?;
            println!("l2 embedding: {} + 1 dimensions, seed {}", dim, a.seed);
        }
    }
    Ok(true)
}

fn run_audit(a: AuditArgs) -> anyhow::Result<bool> {
    let inst = load_instance(&a.instance, &a.terminals, a.eps)?;
    let lambda = estimate_doubling_constant_on(&inst.metric, inst.terminals());
    let report: StretchReport = match a.structure {
        Structure::Spanner | Structure::SpannerK => {
            let edges = io::read_edges(&a.file)?;
            let (kind, bound) = match a.structure {
                Structure::Spanner => ("terminal-spanner", 1.0 + 12.0 * a.eps),
                _ => ("k-doubling-spanner", 1.0 + 3.0 * a.eps),
            };
            audit_spanner_kx(
                &inst,
                &edges,
                kind,
                vec![("lambda_k".into(), lambda as f64)],
                bound,
            )
        }
        Structure::Oracle | Structure::Labeling => {
            let tl = io::read_labeling(&a.file)?;
            let certified = tl.certified_stretch;
            audit_kx(
                &inst,
                "terminal-labeling",
                vec![("lambda_k".into(), lambda as f64)],
                certified,
                1.0,
                |v, x| tl.query(x, v).unwrap_or(f64::INFINITY),
            )
        }
        Structure::EmbedLinf => {
            let emb = io::read_embedding(&a.file)?;
            audit_embedding_kx(
                &inst,
                &emb.coords,
                f64::INFINITY,
                "linf-embedding",
                vec![("t".into(), emb.t as f64)],
                1.0 + a.eps,
                1.0 - 3.0 * a.eps,
            )
        }
        Structure::EmbedL2 => {
            let emb = io::read_embedding(&a.file)?;
            audit_embedding_kx(
                &inst,
                &emb.coords,
                2.0,
                "l2-embedding",
                vec![],
                a.threshold,
                1.0 / a.threshold,
            )
        }
    };
    emit_report(&report, a.report.as_deref())?;
    Ok(report.pass)
}

fn run_lower_bound(a: LowerBoundArgs) -> anyhow::Result<bool> {
    let inst = gen_instance(&GenSpec::LowerBound { lambda: a.lambda, n: a.n }, 0, a.eps, a.seed)?;
    if inst.n() != a.n {
        // the generator sizes X directly from n
        bail!("internal: generated n = {} != requested {}", inst.n(), a.n);
    }
    let report = lower_bound_audit(&inst, Some(a.lambda))?;
    emit_report(&report, a.report.as_deref())?;
    Ok(report.pass)
}

fn main() -> ExitCode {
    env_logger::init();
    if let Ok(threads) = std::env::var("TERMSPAN_AUDIT_THREADS") {
        if let Ok(t) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
    }
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Gen(a) => run_gen(a),
        Cmd::Build(a) => run_build(a),
        Cmd::Audit(a) => run_audit(a),
        Cmd::LowerBound(a) => run_lower_bound(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("audit failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
