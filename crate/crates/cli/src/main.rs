//! Command-line driver: graph statistics, partitioning, single BFS traces
//! and the full paired benchmark.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bfspart_core::bench::{emit_report, run_experiment, ExperimentConfig, GraphSource};
use bfspart_core::bfs::bfs_trace;
use bfspart_core::frontier::build_frontier_profile;
use bfspart_core::multilevel::partition_kway;
use bfspart_core::partition::{
    export_partition, import_partition, PartitionFormat, WeightedGraph,
};
use bfspart_core::strategies::StrategyKind;
use bfspart_core::{degree_stats, Error, Graph, Result};

#[derive(Parser)]
#[command(
    name = "bfspart",
    version,
    about = "Frontier-aware graph partitioning for parallel BFS"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Graph input shared by all subcommands: a file or a generator spec.
#[derive(Args)]
struct GraphInput {
    /// Edge-list file (whitespace separated, '%'/'#' comments)
    #[arg(long, conflicts_with = "gen")]
    graph: Option<PathBuf>,

    /// Generator spec: "er:N:M" or "plaw:N:ALPHA"
    #[arg(long)]
    gen: Option<String>,

    /// Degree cap for statistics and weight tables
    #[arg(long, default_value_t = 300)]
    kmax: usize,

    /// Seed for generators and every downstream random choice
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl GraphInput {
    fn source(&self) -> Result<GraphSource> {
        match (&self.graph, &self.gen) {
            (Some(path), None) => Ok(GraphSource::File(path.clone())),
            (None, Some(spec)) => parse_gen_spec(spec),
            (None, None) => Err(Error::InvalidArgument(
                "one of --graph or --gen is required".into(),
            )),
            (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
        }
    }

    fn load(&self) -> Result<Graph> {
        self.source()?.load(self.kmax, self.seed)
    }
}

fn parse_gen_spec(spec: &str) -> Result<GraphSource> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = |msg: &str| Error::InvalidArgument(format!("generator spec {spec:?}: {msg}"));
    match parts.as_slice() {
        ["er", n, m] => Ok(GraphSource::Er {
            n: n.parse().map_err(|_| bad("N must be an integer"))?,
            m: m.parse().map_err(|_| bad("M must be an integer"))?,
        }),
        ["plaw", n, alpha] => Ok(GraphSource::PowerLaw {
            n: n.parse().map_err(|_| bad("N must be an integer"))?,
            alpha: alpha.parse().map_err(|_| bad("ALPHA must be a number"))?,
        }),
        _ => Err(bad("expected er:N:M or plaw:N:ALPHA")),
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PartFormatArg {
    Native,
    Metis,
}

impl From<PartFormatArg> for PartitionFormat {
    fn from(f: PartFormatArg) -> PartitionFormat {
        match f {
            PartFormatArg::Native => PartitionFormat::Native,
            PartFormatArg::Metis => PartitionFormat::Metis,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RecordFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Degree statistics: p_k, the joint degree matrix and assortativity
    Stats {
        #[command(flatten)]
        input: GraphInput,
        /// Output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Partition a graph and write the vertex-block assignment
    Partition {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long, default_value_t = 100)]
        partitions: usize,
        /// Balance tolerance
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        /// Optional "u v weight" edge list overriding unit weights
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Output format: native "vertex block" lines or one block per line
        #[arg(long, value_enum, default_value = "native")]
        format: PartFormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace one BFS run and report per-iteration message counts
    Bfs {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        root: u32,
        /// Partition file; crossing messages are counted against it
        #[arg(long)]
        partition: PathBuf,
        #[arg(long, value_enum, default_value = "native")]
        partition_format: PartFormatArg,
        /// Also print the frontier profile predicted from this run's sizes
        #[arg(long)]
        profile: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Paired benchmark of the competing weighting strategies
    Bench {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long, default_value_t = 100)]
        partitions: usize,
        #[arg(long, default_value_t = 500)]
        roots: usize,
        #[arg(long = "burn-in", default_value_t = 10)]
        burn_in: usize,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        /// Strategies to compare: baseline, emp, smooth, avg or all
        #[arg(long = "strategy", value_delimiter = ',', default_value = "all")]
        strategy: Vec<String>,
        /// Per-root record format (summary.json is always written)
        #[arg(long, value_enum, default_value = "csv")]
        format: RecordFormat,
        /// Output directory
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stats { input, out } => {
            let g = input.load()?;
            let stats = degree_stats(&g, input.kmax)?;
            let comps = g.components();
            let mut doc = stats.to_json();
            doc["largest_component"] = serde_json::json!(comps.largest().1);
            write_output(out, &(serde_json::to_string_pretty(&doc)? + "\n"))
        }
        Command::Partition {
            input,
            partitions,
            epsilon,
            weights,
            format,
            out,
        } => {
            let g = Arc::new(input.load()?);
            let wg = match weights {
                Some(path) => read_weighted_edge_list(Arc::clone(&g), &fs::read_to_string(path)?)?,
                None => WeightedGraph::unit(Arc::clone(&g)),
            };
            let part = partition_kway(&wg, partitions, epsilon, input.seed)?;
            let mut buf = Vec::new();
            match format {
                PartFormatArg::Native => export_partition(&part, &mut buf)?,
                PartFormatArg::Metis => {
                    for v in 0..part.len() as u32 {
                        writeln!(buf, "{}", part.block_of(v))?;
                    }
                }
            }
            write_output(out, std::str::from_utf8(&buf).expect("ascii output"))
        }
        Command::Bfs {
            input,
            root,
            partition,
            partition_format,
            profile,
            out,
        } => {
            let g = input.load()?;
            let text = fs::read_to_string(partition)?;
            let part = import_partition(&text, g.vertex_count(), partition_format.into())?;
            let trace = bfs_trace(&g, &part, root)?;
            let mut doc = trace.to_json();
            if profile {
                let stats = degree_stats(&g, input.kmax)?;
                let prof = build_frontier_profile(&stats, &trace.frontier_sizes)?;
                doc["profile"] = prof.to_json();
            }
            write_output(out, &(serde_json::to_string_pretty(&doc)? + "\n"))
        }
        Command::Bench {
            input,
            partitions,
            roots,
            burn_in,
            epsilon,
            strategy,
            format,
            out,
        } => {
            let mut cfg = ExperimentConfig::new(input.source()?);
            cfg.partitions = partitions;
            cfg.roots = roots;
            cfg.burn_in_runs = burn_in;
            cfg.k_cap = input.kmax;
            cfg.epsilon = epsilon;
            cfg.seed = input.seed;
            cfg.strategies = parse_strategies(&strategy)?;
            let report = run_experiment(&cfg)?;
            let files = emit_report(&report, &out)?;
            if matches!(format, RecordFormat::Json) {
                let records: Vec<serde_json::Value> = report
                    .records
                    .iter()
                    .map(|r| {
                        serde_json::json!({
                            "root": r.root,
                            "strategy": r.strategy.as_str(),
                            "peak_iteration": r.peak_iteration,
                            "cross_at_peak": r.cross_at_peak,
                            "cross_total": r.cross_total,
                            "rho_peak_pct": r.rho_peak,
                            "rho_total_pct": r.rho_total,
                        })
                    })
                    .collect();
                fs::write(
                    out.join("results.json"),
                    serde_json::to_string_pretty(&records)? + "\n",
                )?;
            }
            for s in &report.summaries {
                println!(
                    "{}: mean rho_peak {:+.3}% (95% CI [{:+.3}, {:+.3}]), mean rho_total {:+.3}%, peak share {:.3}",
                    s.strategy,
                    s.mean_rho_peak,
                    s.ci95_rho_peak.0,
                    s.ci95_rho_peak.1,
                    s.mean_rho_total,
                    s.mean_peak_share,
                );
            }
            println!("report written to {}", out.display());
            let _ = files;
            Ok(())
        }
    }
}

fn parse_strategies(raw: &[String]) -> Result<Vec<StrategyKind>> {
    let mut out = Vec::new();
    for item in raw {
        if item == "all" {
            for s in [StrategyKind::Emp, StrategyKind::Smooth, StrategyKind::Avg] {
                if !out.contains(&s) {
                    out.push(s);
                }
            }
        } else {
            let s: StrategyKind = item.parse()?;
            if !out.contains(&s) {
                out.push(s);
            }
        }
    }
    Ok(out)
}

/// Parses "u v weight" lines into a weighted view of `g`; every edge of the
/// graph must be covered.
fn read_weighted_edge_list(g: Arc<Graph>, text: &str) -> Result<WeightedGraph> {
    let mut table: HashMap<(u32, u32), f64> = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') || trimmed.starts_with('#') {
            continue;
        }
        let mut tok = trimmed.split_whitespace();
        let parse_err = |msg: String| Error::Parse {
            line: lineno,
            message: msg,
        };
        let u: u32 = tok
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err("bad source vertex".into()))?;
        let v: u32 = tok
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err("bad target vertex".into()))?;
        let w: f64 = tok
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err("bad weight".into()))?;
        table.insert((u.min(v), u.max(v)), w);
    }
    let mut missing = None;
    let wg = WeightedGraph::from_fn(g, |u, v| {
        match table.get(&(u.min(v), u.max(v))) {
            Some(&w) => w,
            None => {
                missing.get_or_insert((u, v));
                f64::NAN
            }
        }
    });
    match (wg, missing) {
        (Ok(wg), None) => Ok(wg),
        (_, Some((u, v))) => Err(Error::InvalidArgument(format!(
            "weight file misses edge ({u}, {v})"
        ))),
        (Err(e), None) => Err(e),
    }
}

fn write_output(out: Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
