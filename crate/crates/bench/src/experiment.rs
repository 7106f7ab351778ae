//! Running an experiment sweep: one optimizer run per cell, one CSV per run.

use std::hash::Hasher;
use std::path::{Path, PathBuf};

use anastaars_core::optimizer::next_dimension;
use anastaars_core::parallel::{map_items, with_jobs};
use anastaars_core::qaoa::brute_force_maxcut;
use anastaars_core::{run, seeded_rng, Algorithm, OptimizerConfig, QaoaOracle, Trajectory};
use fnv::FnvHasher;
use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::spec::ExperimentSpec;

/// Initial angles are drawn uniformly from `[-X0_HALF_WIDTH, X0_HALF_WIDTH]^{2p}`.
pub const X0_HALF_WIDTH: f64 = 1.0;

pub const MANIFEST_FILE: &str = "manifest.csv";
pub const TRAJECTORY_DIR: &str = "trajectories";
pub const SPEC_COPY_FILE: &str = "spec.txt";

/// One (graph, p, B, optimizer, trial) combination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub graph: String,
    pub layers: usize,
    pub shots: usize,
    pub optimizer: Algorithm,
    pub trial: usize,
}

impl Cell {
    /// Seed shared by all optimizers of the same (graph, p, B, trial), so
    /// that they start from the same point and draw the same random stream.
    pub fn seed(&self, base_seed: u64) -> u64 {
        let mut h = FnvHasher::default();
        h.write(format!("{}|p={}|B={}|trial={}", self.graph, self.layers, self.shots, self.trial).as_bytes());
        base_seed ^ h.finish()
    }

    pub fn file_name(&self, model: &str) -> String {
        format!(
            "{}_p{}_B{}_{}_{}_t{:03}.csv",
            self.graph, self.layers, self.shots, self.optimizer, model, self.trial
        )
    }
}

/// All cells of a spec, in a fixed order (graph, p, B, optimizer, trial).
pub fn expand_cells(spec: &ExperimentSpec) -> Vec<Cell> {
    let graph = spec.graph.label();
    let mut cells = Vec::new();
    for &layers in &spec.layers {
        for &shots in &spec.shots {
            for &optimizer in &spec.optimizers {
                for trial in 0..spec.trials {
                    cells.push(Cell {
                        graph: graph.clone(),
                        layers,
                        shots,
                        optimizer,
                        trial,
                    });
                }
            }
        }
    }
    cells
}

pub fn initial_point(layers: usize, seed_rng: &mut impl Rng) -> DVector<f64> {
    DVector::from_fn(2 * layers, |_, _| seed_rng.random_range(-X0_HALF_WIDTH..=X0_HALF_WIDTH))
}

/// One CSV row per iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub k: usize,
    pub q: usize,
    pub success: bool,
    pub rho_tilde: f64,
    pub delta: f64,
    pub noise_estimate: f64,
    pub shots_cumulative: u64,
    pub estimate_f0: f64,
    pub true_value: Option<f64>,
    pub best_true_so_far: Option<f64>,
}

pub fn trajectory_rows(t: &Trajectory) -> Vec<TrajectoryRow> {
    let mut best = t.initial_true_value;
    t.records
        .iter()
        .map(|r| {
            best = match (best, r.incumbent_true_value) {
                (Some(b), Some(v)) => Some(b.min(v)),
                (b, v) => b.or(v),
            };
            TrajectoryRow {
                k: r.k,
                q: r.q,
                success: r.success,
                rho_tilde: r.rho_tilde,
                delta: r.delta,
                noise_estimate: r.noise_estimate,
                shots_cumulative: r.shots_used_cumulative,
                estimate_f0: r.f0_estimate,
                true_value: r.incumbent_true_value,
                best_true_so_far: best,
            }
        })
        .collect()
}

pub fn write_trajectory(path: &Path, rows: &[TrajectoryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| BenchError::csv(path, e))?;
    if rows.is_empty() {
        // serde only emits the header together with the first record
        w.write_record([
            "k",
            "q",
            "success",
            "rho_tilde",
            "delta",
            "noise_estimate",
            "shots_cumulative",
            "estimate_f0",
            "true_value",
            "best_true_so_far",
        ])
        .map_err(|e| BenchError::csv(path, e))?;
    }
    for row in rows {
        w.serialize(row).map_err(|e| BenchError::csv(path, e))?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

pub fn read_trajectory(path: &Path) -> Result<Vec<TrajectoryRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| BenchError::csv(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| BenchError::csv(path, e))
}

/// Checks a logged `q` sequence against the reset/extend policy: the first
/// iteration uses `q0`; afterwards `q` either follows the policy or falls back
/// to a fresh `q0` set. Returns the first offending row index.
pub fn check_q_trace(q0: usize, q_max: usize, rows: &[TrajectoryRow]) -> std::result::Result<(), usize> {
    let cfg = OptimizerConfig {
        q0,
        q_max,
        ..OptimizerConfig::qaoa_defaults(q_max)
    };
    for (i, row) in rows.iter().enumerate() {
        let legal = match i.checked_sub(1).map(|j| &rows[j]) {
            None => row.q == q0,
            Some(prev) => row.q == next_dimension(&cfg, prev.q, prev.success) || row.q == q0,
        };
        if !legal || row.q > q_max {
            return Err(i);
        }
    }
    Ok(())
}

/// Manifest line describing one finished cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub graph: String,
    pub p: usize,
    pub shots: usize,
    pub optimizer: String,
    pub model: String,
    pub trial: usize,
    pub seed: u64,
    pub budget: u64,
    pub q0: usize,
    pub q_max: usize,
    pub x0_half_width: f64,
    pub initial_true_value: f64,
    pub maxcut: f64,
    pub iterations: usize,
    pub shots_used: u64,
    /// Path relative to the output directory.
    pub file: String,
}

pub fn write_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| BenchError::csv(path, e))?;
    for e in entries {
        w.serialize(e).map_err(|err| BenchError::csv(path, err))?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| BenchError::csv(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| BenchError::csv(path, e))
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub out_dir: PathBuf,
    pub manifest: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

impl ExperimentOutput {
    pub fn trajectory_paths(&self) -> Vec<PathBuf> {
        self.entries.iter().map(|e| self.out_dir.join(&e.file)).collect()
    }
}

fn run_cell(spec: &ExperimentSpec, oracle: &QaoaOracle, maxcut: f64, cell: &Cell, dir: &Path) -> Result<ManifestEntry> {
    let seed = cell.seed(spec.seed);
    let config = spec.optimizer_config(cell.layers, cell.shots, seed);
    let mut rng = seeded_rng(seed);
    let x0 = initial_point(cell.layers, &mut rng);
    let trajectory = run(cell.optimizer, &config, oracle, x0, &mut rng)?;
    let rows = trajectory_rows(&trajectory);
    let name = cell.file_name(spec.model.as_str());
    write_trajectory(&dir.join(&name), &rows)?;
    Ok(ManifestEntry {
        graph: cell.graph.clone(),
        p: cell.layers,
        shots: cell.shots,
        optimizer: cell.optimizer.to_string(),
        model: spec.model.to_string(),
        trial: cell.trial,
        seed,
        budget: config.max_evaluations,
        q0: config.q0,
        q_max: config.q_max,
        x0_half_width: X0_HALF_WIDTH,
        initial_true_value: trajectory.initial_true_value.unwrap_or(f64::NAN),
        maxcut,
        iterations: rows.len(),
        shots_used: trajectory.shots_used,
        file: format!("{TRAJECTORY_DIR}/{name}"),
    })
}

/// Runs every cell of `spec` on up to `jobs` threads (`0` = all cores) and
/// writes the trajectories, a manifest and a copy of the spec under `spec.out`.
/// Output bytes do not depend on `jobs`.
pub fn run_experiment(spec: &ExperimentSpec, jobs: usize) -> Result<ExperimentOutput> {
    spec.validate()?;
    let graph = spec.graph.load()?;
    let (maxcut, _) = brute_force_maxcut(&graph)?;
    let dir = spec.out.join(TRAJECTORY_DIR);
    std::fs::create_dir_all(&dir).map_err(|e| BenchError::io(&dir, e))?;
    let spec_copy = spec.out.join(SPEC_COPY_FILE);
    std::fs::write(&spec_copy, spec.to_text()).map_err(|e| BenchError::io(&spec_copy, e))?;

    let oracles = spec
        .layers
        .iter()
        .map(|&p| Ok((p, QaoaOracle::new(graph.clone(), p)?)))
        .collect::<Result<Vec<_>>>()?;
    let cells = expand_cells(spec);
    let results = with_jobs(jobs, || {
        map_items(&cells, |cell| {
            let oracle = &oracles.iter().find(|(p, _)| *p == cell.layers).expect("oracle per p").1;
            run_cell(spec, oracle, maxcut, cell, &dir)
        })
    });
    let entries = results.into_iter().collect::<Result<Vec<_>>>()?;
    let manifest = spec.out.join(MANIFEST_FILE);
    write_manifest(&manifest, &entries)?;
    Ok(ExperimentOutput {
        out_dir: spec.out.clone(),
        manifest,
        entries,
    })
}
