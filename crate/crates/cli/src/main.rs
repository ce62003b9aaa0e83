//! `spanner`: build, verify and benchmark geometric t-spanners and
//! k-vertex fault-tolerant spanners.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use spanner_cli::{fmt_g, generate, read_points, write_points, PointSetFile, RunConfig};
use spanner_core::spanner::build_spanner_flat;
use spanner_core::verify::{full_report, VerificationReport};
use spanner_core::vfts::build_vfts_flat;
use spanner_core::{choose_parameters, SpannerGraph};

const DEFAULT_CHUNK_LIMIT: usize = 56_000_000;

#[derive(Parser)]
#[command(name = "spanner", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a point set file.
    Generate(GenArgs),
    /// Build a spanner from a point set file and optionally verify it.
    Build(BuildArgs),
    /// Run a size/seed grid and emit a CSV of build statistics.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Generator: uniform | clustered | grid | exp-line | circle-center | parallel-sides
    #[arg(long = "gen", default_value = "uniform")]
    gen: String,
    #[arg(long = "n")]
    n: usize,
    #[arg(long = "dim", default_value_t = 2)]
    dim: usize,
    #[arg(long = "seed", default_value_t = 0)]
    seed: u64,
    /// Cluster spread for the clustered generator.
    #[arg(long = "spread", default_value_t = 0.01)]
    spread: f64,
    /// Output file (JSON). Writes to stdout when omitted.
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    /// Input point set (JSON, or CSV with --csv).
    input: PathBuf,
    /// Interpret the input as headerless CSV, one point per row.
    #[arg(long = "csv")]
    csv: bool,
    /// Stretch target.
    #[arg(long = "t", default_value_t = 2.0)]
    t: f64,
    /// Fault parameter; 0 builds the plain spanner.
    #[arg(long = "k", default_value_t = 0)]
    k: usize,
    /// Run the verification oracles (stretch / fault tolerance / degree).
    #[arg(long = "verify")]
    verify: bool,
    /// Force exhaustive fault-set verification (may be slow).
    #[arg(long = "verify-exhaustive")]
    verify_exhaustive: bool,
    /// Max fault-set evaluations for the fault-tolerance oracle.
    #[arg(long = "budget", default_value_t = 1_000_000)]
    budget: u64,
    /// Write the graph JSON here.
    #[arg(long = "out")]
    out: Option<PathBuf>,
    /// Write the verification report JSON here.
    #[arg(long = "report")]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated point counts.
    #[arg(long = "sizes", value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    /// Number of seeds per size (seeds 0..count).
    #[arg(long = "seeds", default_value_t = 5)]
    seeds: u64,
    #[arg(long = "t", default_value_t = 2.0)]
    t: f64,
    #[arg(long = "k", default_value_t = 0)]
    k: usize,
    #[arg(long = "dim", default_value_t = 2)]
    dim: usize,
    #[arg(long = "gen", default_value = "uniform")]
    gen: String,
    /// Skip the O(n^2) EMST weight baseline above this size (column = NaN).
    #[arg(long = "emst-max", default_value_t = 20_000)]
    emst_max: usize,
    /// Output CSV file. Writes to stdout when omitted.
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Generate(a) => cmd_generate(a),
        Cmd::Build(a) => cmd_build(a),
        Cmd::Bench(a) => cmd_bench(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn cmd_generate(a: GenArgs) -> Result<ExitCode> {
    let file = generate(&a.gen, a.n, a.dim, a.seed, a.spread)?;
    match &a.out {
        Some(p) => write_points(p, &file)?,
        None => println!("{}", serde_json::to_string(&file)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn build_graph(points: &PointSetFile, t: f64, k: usize) -> Result<(SpannerGraph, u64, f64)> {
    let flat = points.flat();
    let start = Instant::now();
    let (graph, stats) = if k == 0 {
        build_spanner_flat(flat, points.dim, t, DEFAULT_CHUNK_LIMIT)?
    } else {
        build_vfts_flat(flat, points.dim, t, k, DEFAULT_CHUNK_LIMIT)?
    };
    let ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((graph, stats.pairs, ms))
}

fn cmd_build(a: BuildArgs) -> Result<ExitCode> {
    let points = read_points(&a.input, a.csv)?;
    let (graph, pairs, ms) = build_graph(&points, a.t, a.k)?;
    let params = choose_parameters(a.t, points.dim, a.k)?;
    let frame = spanner_core::build_frame(params.alpha, points.dim)?;

    println!("n = {}, dim = {}, t = {}, k = {}", points.len(), points.dim, a.t, a.k);
    println!(
        "built in {} ms: {} edges, max degree {}, {} pairs processed",
        fmt_g(ms),
        graph.edge_count(),
        graph.max_degree(),
        pairs
    );

    if let Some(p) = &a.out {
        std::fs::write(p, graph.to_json().to_string() + "\n")
            .with_context(|| format!("writing {p:?}"))?;
    }

    let mut pass = true;
    if a.verify || a.verify_exhaustive || a.report.is_some() {
        let budget = if a.verify_exhaustive { u64::MAX } else { a.budget };
        let core_points = points.to_core_points();
        let report = full_report(&graph, &core_points, a.t, a.k, budget);
        print_report(&report);
        if a.verify || a.verify_exhaustive {
            pass &= report.stretch <= a.t;
            if a.k == 0 {
                pass &= report.max_degree <= frame.len();
            } else {
                pass &= report.vfts_ok;
            }
        }
        if let Some(p) = &a.report {
            let mut v = serde_json::to_value(&report)?;
            v["params"] = serde_json::to_value(&params)?;
            std::fs::write(p, v.to_string() + "\n").with_context(|| format!("writing {p:?}"))?;
        }
    }
    if pass {
        Ok(ExitCode::SUCCESS)
    } else {
        println!("verification FAILED");
        Ok(ExitCode::from(1))
    }
}

fn print_report(r: &VerificationReport) {
    println!("stretch        = {}", fmt_g(r.stretch));
    println!("max_degree     = {}", r.max_degree);
    println!("edge_count     = {}", r.edge_count);
    println!("weight         = {}", fmt_g(r.weight));
    println!("emst_weight    = {}", fmt_g(r.emst_weight));
    println!("weight_ratio   = {}", fmt_g(r.weight_ratio));
    println!("vfts_ok        = {} ({})", r.vfts_ok, r.vfts_mode);
    println!("worst_pair     = ({}, {})", r.worst_pair.0, r.worst_pair.1);
}

fn cmd_bench(a: BenchArgs) -> Result<ExitCode> {
    if a.sizes.is_empty() {
        bail!("need at least one size");
    }
    let mut rows = String::from("n,k,t,build_ms,edges,max_degree,weight_ratio\n");
    for &n in &a.sizes {
        for seed in 0..a.seeds {
            let cfg = RunConfig {
                t: a.t,
                k: a.k,
                seed,
                n,
                dim: a.dim,
                generator: a.gen.clone(),
                spread: 0.01,
                budget: 0,
            };
            let points = generate(&cfg.generator, cfg.n, cfg.dim, cfg.seed, cfg.spread)?;
            let (graph, _, ms) = build_graph(&points, cfg.t, cfg.k)?;
            let ratio = if n <= a.emst_max {
                let flat = points.flat();
                let w = graph.weight(&flat, points.dim);
                let e = spanner_core::verify::emst_weight_flat(&flat, points.dim);
                if e > 0.0 { w / e } else { f64::NAN }
            } else {
                f64::NAN
            };
            rows.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                n,
                cfg.k,
                cfg.t,
                fmt_g(ms),
                graph.edge_count(),
                graph.max_degree(),
                fmt_g(ratio)
            ));
        }
    }
    match &a.out {
        Some(p) => std::fs::write(p, rows).with_context(|| format!("writing {p:?}"))?,
        None => print!("{rows}"),
    }
    Ok(ExitCode::SUCCESS)
}
