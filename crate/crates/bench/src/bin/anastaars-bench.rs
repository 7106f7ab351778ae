use std::path::PathBuf;

use anastaars_bench::aggregate::{aggregate_dir, describe, DEFAULT_GRID_POINTS};
use anastaars_bench::selftest::run_selftest;
use anastaars_bench::{plot_dir, run_experiment, ExperimentSpec};
use anastaars_core::qaoa::brute_force_maxcut;
use anastaars_core::GraphSource;
use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "anastaars-bench", version, about = "QAOA MaxCut optimizer benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every cell of an experiment spec and write trajectories plus a manifest.
    Run {
        #[arg(long)]
        spec: PathBuf,
        /// Output directory; overrides `out` in the spec.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Base seed; overrides `seed` in the spec.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Median trajectories per (graph, p, B, model) from a finished run.
    Aggregate {
        #[arg(long)]
        out: PathBuf,
        /// Points on the cumulative-shot grid.
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        points: usize,
    },
    /// SVG charts for every median table of a run.
    Plot {
        #[arg(long)]
        out: PathBuf,
    },
    /// Brute-force MaxCut of a graph (`chvatal`, `cycle6` or an edge-list file).
    Maxcut { graph: String },
    /// Quick invariant checks.
    Selftest,
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run { spec, out, seed, jobs } => {
            let mut spec = ExperimentSpec::from_path(&spec).with_context(|| format!("loading {}", spec.display()))?;
            if let Some(out) = out {
                spec.out = out;
            }
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            let result = run_experiment(&spec, jobs)?;
            println!(
                "wrote {} trajectories and {}",
                result.entries.len(),
                result.manifest.display()
            );
        }
        Command::Aggregate { out, points } => {
            for (path, table) in aggregate_dir(&out, points)? {
                println!("{}  -> {}", describe(&table), path.display());
            }
        }
        Command::Plot { out } => {
            for path in plot_dir(&out)? {
                println!("{}", path.display());
            }
        }
        Command::Maxcut { graph } => {
            let source: GraphSource = graph.parse()?;
            let g = source.load()?;
            let (best, assignment) = brute_force_maxcut(&g)?;
            let side: String = (0..g.n())
                .map(|i| if assignment >> i & 1 == 1 { '1' } else { '0' })
                .collect();
            println!(
                "{}: n = {}, |E| = {}, maxcut = {best}, partition = {side}",
                source.label(),
                g.n(),
                g.edges().len()
            );
        }
        Command::Selftest => {
            let checks = run_selftest();
            let failed = checks.iter().filter(|c| !c.passed).count();
            for c in &checks {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if failed > 0 {
                bail!("{failed} of {} checks failed", checks.len());
            }
        }
    }
    Ok(())
}
