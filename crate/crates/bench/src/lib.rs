//! Experiment driver for the QAOA MaxCut benchmarks: spec files, parallel
//! trial sweeps with one CSV per run, median aggregation and SVG plots.

pub mod aggregate;
pub mod error;
pub mod experiment;
pub mod plot;
pub mod selftest;
pub mod spec;

use std::path::{Path, PathBuf};

pub use aggregate::{aggregate_dir, aggregate_median, MedianTable, StepSeries};
pub use error::{BenchError, Result};
pub use experiment::{run_experiment, ExperimentOutput, ManifestEntry, TrajectoryRow};
pub use plot::{emit_plot, YAxis};
pub use spec::{Budget, ExperimentSpec};

pub const PLOT_DIR: &str = "plots";

/// Renders every median table under `out_dir/median` into `out_dir/plots`,
/// once with the objective and once with the approximation ratio.
pub fn plot_dir(out_dir: &Path) -> Result<Vec<PathBuf>> {
    let median = out_dir.join(aggregate::MEDIAN_DIR);
    let mut inputs: Vec<PathBuf> = std::fs::read_dir(&median)
        .map_err(|e| BenchError::io(&median, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    inputs.sort();
    if inputs.is_empty() {
        return Err(BenchError::EmptyPlot(format!("no tables in {}", median.display())));
    }
    let tables = inputs
        .iter()
        .map(|p| MedianTable::read_csv(p))
        .collect::<Result<Vec<_>>>()?;
    write_plots(out_dir, &tables)
}

fn write_plots(out_dir: &Path, tables: &[MedianTable]) -> Result<Vec<PathBuf>> {
    let dir = out_dir.join(PLOT_DIR);
    std::fs::create_dir_all(&dir).map_err(|e| BenchError::io(&dir, e))?;
    let mut written = Vec::new();
    for table in tables {
        for (axis, suffix) in [(YAxis::Objective, ""), (YAxis::Ratio, "_ratio")] {
            let path = dir.join(format!("{}{suffix}.svg", table.file_stem()));
            emit_plot(table, &path, axis)?;
            written.push(path);
        }
    }
    Ok(written)
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub experiment: ExperimentOutput,
    pub tables: Vec<(PathBuf, MedianTable)>,
    pub plots: Vec<PathBuf>,
}

/// Run, aggregate and plot in one go.
pub fn run_pipeline(spec: &ExperimentSpec, jobs: usize, grid_points: usize) -> Result<PipelineOutput> {
    let experiment = run_experiment(spec, jobs)?;
    let tables = aggregate_dir(&spec.out, grid_points)?;
    let only_tables: Vec<MedianTable> = tables.iter().map(|(_, t)| t.clone()).collect();
    let plots = write_plots(&spec.out, &only_tables)?;
    Ok(PipelineOutput {
        experiment,
        tables,
        plots,
    })
}
