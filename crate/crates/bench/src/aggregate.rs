//! Median trajectories across trials on a common shot grid.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{BenchError, Result};
use crate::experiment::{read_manifest, read_trajectory, ManifestEntry, MANIFEST_FILE};

pub const MEDIAN_DIR: &str = "median";
pub const DEFAULT_GRID_POINTS: usize = 101;

/// A trial's best-so-far value as a right-continuous step function of the
/// cumulative shot count.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSeries {
    pub initial: f64,
    /// `(shots_cumulative, best_so_far)`, shots strictly increasing.
    pub steps: Vec<(u64, f64)>,
}

impl StepSeries {
    /// Value after `shots` shots: the last logged value at or before `shots`,
    /// or the initial value before the first iteration finished.
    pub fn value_at(&self, shots: u64) -> f64 {
        let n = self.steps.partition_point(|&(s, _)| s <= shots);
        if n == 0 {
            self.initial
        } else {
            self.steps[n - 1].1
        }
    }
}

/// `points` evenly spaced shot counts from 0 to `budget`.
pub fn shot_grid(budget: u64, points: usize) -> Vec<u64> {
    match points {
        0 => Vec::new(),
        1 => vec![budget],
        _ => (0..points)
            .map(|i| (budget as u128 * i as u128 / (points - 1) as u128) as u64)
            .collect(),
    }
}

/// Quantile of sorted data with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], prob: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = prob * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub optimizer: String,
    pub trials: usize,
    pub median: Vec<f64>,
    pub q25: Vec<f64>,
    pub q75: Vec<f64>,
}

/// Pointwise median and quartiles of `trials` on `grid`.
pub fn aggregate_median(optimizer: &str, trials: &[StepSeries], grid: &[u64]) -> Result<Series> {
    if trials.is_empty() {
        return Err(BenchError::EmptyCell(optimizer.to_string()));
    }
    let mut series = Series {
        optimizer: optimizer.to_string(),
        trials: trials.len(),
        median: Vec::with_capacity(grid.len()),
        q25: Vec::with_capacity(grid.len()),
        q75: Vec::with_capacity(grid.len()),
    };
    let mut column = Vec::with_capacity(trials.len());
    for &g in grid {
        column.clear();
        column.extend(trials.iter().map(|t| t.value_at(g)));
        column.sort_by(f64::total_cmp);
        series.median.push(quantile(&column, 0.5));
        series.q25.push(quantile(&column, 0.25));
        series.q75.push(quantile(&column, 0.75));
    }
    Ok(series)
}

/// Medians of every optimizer for one (graph, p, B, model) group.
#[derive(Debug, Clone, PartialEq)]
pub struct MedianTable {
    pub graph: String,
    pub p: usize,
    pub shots: usize,
    pub model: String,
    pub maxcut: f64,
    pub grid: Vec<u64>,
    pub series: Vec<Series>,
}

impl MedianTable {
    pub fn file_stem(&self) -> String {
        format!("{}_p{}_B{}_{}", self.graph, self.p, self.shots, self.model)
    }

    /// Approximation ratio `-value / maxcut` for an objective value.
    pub fn ratio(&self, value: f64) -> f64 {
        -value / self.maxcut
    }

    /// Writes the table as CSV: one metadata comment line, then
    /// `shots,<opt>_median,<opt>_q25,<opt>_q75,<opt>_ratio,...`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut text = format!(
            "# graph={} p={} shots={} model={} maxcut={} trials={}\n",
            self.graph,
            self.p,
            self.shots,
            self.model,
            self.maxcut,
            self.series
                .iter()
                .map(|s| format!("{}:{}", s.optimizer, s.trials))
                .collect::<Vec<_>>()
                .join(",")
        );
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["shots".to_string()];
        for s in &self.series {
            for col in ["median", "q25", "q75", "ratio"] {
                header.push(format!("{}_{col}", s.optimizer));
            }
        }
        w.write_record(&header).map_err(|e| BenchError::csv(path, e))?;
        for (i, g) in self.grid.iter().enumerate() {
            let mut row = vec![g.to_string()];
            for s in &self.series {
                row.push(s.median[i].to_string());
                row.push(s.q25[i].to_string());
                row.push(s.q75[i].to_string());
                row.push(self.ratio(s.median[i]).to_string());
            }
            w.write_record(&row).map_err(|e| BenchError::csv(path, e))?;
        }
        let body = w.into_inner().map_err(|e| BenchError::table(path, e.to_string()))?;
        text.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
        std::fs::write(path, text).map_err(|e| BenchError::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let (meta_line, body) = text
            .split_once('\n')
            .ok_or_else(|| BenchError::table(path, "empty file"))?;
        let meta: BTreeMap<&str, &str> = meta_line
            .trim_start_matches('#')
            .split_whitespace()
            .filter_map(|kv| kv.split_once('='))
            .collect();
        let field = |k: &str| {
            meta.get(k)
                .copied()
                .ok_or_else(|| BenchError::table(path, format!("metadata lacks '{k}'")))
        };
        let num = |k: &str| -> Result<f64> {
            field(k)?
                .parse()
                .map_err(|_| BenchError::table(path, format!("bad '{k}'")))
        };
        let trials: Vec<(String, usize)> = field("trials")?
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| {
                let (name, n) = s.split_once(':').unwrap_or((s, "0"));
                (name.to_string(), n.parse().unwrap_or(0))
            })
            .collect();

        let mut r = csv::Reader::from_reader(body.as_bytes());
        let headers = r.headers().map_err(|e| BenchError::csv(path, e))?.clone();
        let expected = 1 + 4 * trials.len();
        if headers.len() != expected {
            return Err(BenchError::table(
                path,
                format!("expected {expected} columns, found {}", headers.len()),
            ));
        }
        let mut series: Vec<Series> = trials
            .into_iter()
            .map(|(optimizer, trials)| Series {
                optimizer,
                trials,
                median: Vec::new(),
                q25: Vec::new(),
                q75: Vec::new(),
            })
            .collect();
        let mut grid = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| BenchError::csv(path, e))?;
            let parse = |i: usize| -> Result<f64> {
                rec[i]
                    .parse()
                    .map_err(|_| BenchError::table(path, format!("bad number '{}'", &rec[i])))
            };
            grid.push(
                rec[0]
                    .parse()
                    .map_err(|_| BenchError::table(path, format!("bad shot count '{}'", &rec[0])))?,
            );
            for (j, s) in series.iter_mut().enumerate() {
                s.median.push(parse(1 + 4 * j)?);
                s.q25.push(parse(2 + 4 * j)?);
                s.q75.push(parse(3 + 4 * j)?);
            }
        }
        Ok(MedianTable {
            graph: field("graph")?.to_string(),
            p: num("p")? as usize,
            shots: num("shots")? as usize,
            model: field("model")?.to_string(),
            maxcut: num("maxcut")?,
            grid,
            series,
        })
    }
}

/// Groups the manifest under `out_dir` by (graph, p, B, model), aggregates
/// every group on a `points`-point grid up to its budget, and writes one CSV
/// per group into `out_dir/median/`.
pub fn aggregate_dir(out_dir: &Path, points: usize) -> Result<Vec<(PathBuf, MedianTable)>> {
    let entries = read_manifest(&out_dir.join(MANIFEST_FILE))?;
    if entries.is_empty() {
        return Err(BenchError::EmptyCell(format!("manifest in {}", out_dir.display())));
    }
    type Key = (String, usize, usize, String);
    let mut groups: BTreeMap<Key, Vec<&ManifestEntry>> = BTreeMap::new();
    for e in &entries {
        groups
            .entry((e.graph.clone(), e.p, e.shots, e.model.clone()))
            .or_default()
            .push(e);
    }
    let dir = out_dir.join(MEDIAN_DIR);
    std::fs::create_dir_all(&dir).map_err(|e| BenchError::io(&dir, e))?;
    let mut written = Vec::new();
    for ((graph, p, shots, model), members) in groups {
        let budget = members.iter().map(|e| e.budget).max().unwrap_or(0);
        let grid = shot_grid(budget, points);
        // optimizers in manifest order
        let mut names: Vec<&str> = Vec::new();
        for e in &members {
            if !names.contains(&e.optimizer.as_str()) {
                names.push(&e.optimizer);
            }
        }
        let mut series = Vec::new();
        for name in names {
            let trials = members
                .iter()
                .filter(|e| e.optimizer == name)
                .map(|e| load_step_series(out_dir, e))
                .collect::<Result<Vec<_>>>()?;
            series.push(aggregate_median(name, &trials, &grid)?);
        }
        let table = MedianTable {
            graph,
            p,
            shots,
            model,
            maxcut: members[0].maxcut,
            grid,
            series,
        };
        let path = dir.join(format!("{}.csv", table.file_stem()));
        table.write_csv(&path)?;
        written.push((path, table));
    }
    Ok(written)
}

pub fn load_step_series(out_dir: &Path, entry: &ManifestEntry) -> Result<StepSeries> {
    let path = out_dir.join(&entry.file);
    let rows = read_trajectory(&path)?;
    let mut steps = Vec::with_capacity(rows.len());
    for r in rows {
        let v = r
            .best_true_so_far
            .ok_or_else(|| BenchError::table(&path, format!("row {} has no true value", r.k)))?;
        steps.push((r.shots_cumulative, v));
    }
    Ok(StepSeries {
        initial: entry.initial_true_value,
        steps,
    })
}

/// Summary line for a table: final median of each optimizer.
pub fn describe(table: &MedianTable) -> String {
    let mut s = format!("{}:", table.file_stem());
    for series in &table.series {
        if let Some(v) = series.median.last() {
            let _ = write!(s, " {}={:.4} (ratio {:.4})", series.optimizer, v, table.ratio(*v));
        }
    }
    s
}
