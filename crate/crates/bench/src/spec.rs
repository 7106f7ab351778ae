//! Experiment specifications in flat `key = value` form.
//!
//! ```text
//! # lines starting with '#' are comments
//! graph = cycle6
//! p = 5, 15, 25
//! shots = 50, 1000
//! optimizers = anastaars, stars
//! model = mfn
//! trials = 10
//! budget_at_1000 = 550000
//! seed = 7
//! out = results/sweep
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anastaars_core::{Algorithm, GraphSource, ModelKind, OptimizerConfig};

use crate::error::{BenchError, Result};

/// Reference budget of the QAOA sweeps: total shots per trial at `B = 1000`.
pub const DEFAULT_BUDGET_AT_1000: u64 = 550_000;

/// How the total shot budget of a trial is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    /// Total shots at `B = 1000`; other `B` get a proportional share.
    ScaledFrom1000(u64),
    /// Same total for every `B`.
    Fixed(u64),
}

impl Budget {
    pub fn for_shots(self, shots: usize) -> u64 {
        match self {
            Budget::ScaledFrom1000(total) => total * shots as u64 / 1000,
            Budget::Fixed(total) => total,
        }
    }
}

/// Subspace dimension bound, either absolute or tied to `d = 2p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimBound {
    Full,
    Fixed(usize),
}

impl DimBound {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            DimBound::Full => d,
            DimBound::Fixed(q) => q.min(d),
        }
    }
}

impl FromStr for DimBound {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "d" => Ok(DimBound::Full),
            _ => s
                .parse()
                .map(DimBound::Fixed)
                .map_err(|_| BenchError::Spec(format!("expected an integer or 'd', got '{s}'"))),
        }
    }
}

/// Optimizer parameters that may be overridden from the spec file. Unset
/// fields keep the QAOA defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub gamma: Option<f64>,
    pub eta1: Option<f64>,
    pub eta2: Option<f64>,
    pub delta0: Option<f64>,
    pub delta_max: Option<f64>,
    pub r: Option<f64>,
    pub q0: Option<DimBound>,
    pub q_max: Option<DimBound>,
    pub stars_noise_term: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub graph: GraphSource,
    pub layers: Vec<usize>,
    pub shots: Vec<usize>,
    pub optimizers: Vec<Algorithm>,
    pub model: ModelKind,
    pub trials: usize,
    pub budget: Budget,
    pub seed: u64,
    pub out: PathBuf,
    pub overrides: Overrides,
}

impl ExperimentSpec {
    /// Spec with the QAOA defaults for everything but the graph and sweep lists.
    pub fn new(graph: GraphSource, layers: Vec<usize>, shots: Vec<usize>, out: impl Into<PathBuf>) -> Self {
        Self {
            graph,
            layers,
            shots,
            optimizers: vec![Algorithm::Anastaars, Algorithm::Stars],
            model: ModelKind::Mfn,
            trials: 30,
            budget: Budget::ScaledFrom1000(DEFAULT_BUDGET_AT_1000),
            seed: 0,
            out: out.into(),
            overrides: Overrides::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(BenchError::Spec(m.into()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.layers.is_empty() || self.layers.contains(&0) {
            return bad("p list must be nonempty with every p >= 1");
        }
        if self.shots.is_empty() || self.shots.contains(&0) {
            return bad("shots list must be nonempty with every B >= 1");
        }
        if self.optimizers.is_empty() {
            return bad("optimizer list is empty");
        }
        for &b in &self.shots {
            if self.budget.for_shots(b) < b as u64 {
                return Err(BenchError::Spec(format!("budget for B = {b} is below one estimate")));
            }
        }
        for &p in &self.layers {
            self.optimizer_config(p, self.shots[0], 0)
                .validate(2 * p)
                .map_err(|e| BenchError::Spec(format!("p = {p}: {e}")))?;
        }
        Ok(())
    }

    /// Optimizer settings for one cell.
    pub fn optimizer_config(&self, layers: usize, shots: usize, seed: u64) -> OptimizerConfig {
        let d = 2 * layers;
        let base = OptimizerConfig::qaoa_defaults(d);
        let o = &self.overrides;
        OptimizerConfig {
            gamma: o.gamma.unwrap_or(base.gamma),
            eta1: o.eta1.unwrap_or(base.eta1),
            eta2: o.eta2.unwrap_or(base.eta2),
            delta0: o.delta0.unwrap_or(base.delta0),
            delta_max: o.delta_max.unwrap_or(base.delta_max),
            r: o.r.unwrap_or(base.r),
            q0: o.q0.map_or(base.q0, |b| b.resolve(d)),
            q_max: o.q_max.map_or(base.q_max, |b| b.resolve(d)),
            model_kind: self.model,
            shots_per_estimate: shots,
            max_evaluations: self.budget.for_shots(shots),
            seed,
            stars_noise_term: o.stars_noise_term.unwrap_or(base.stars_noise_term),
            ..base
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        text.parse()
    }

    /// Renders the spec back into the text format.
    pub fn to_text(&self) -> String {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let mut s = format!(
            "graph = {}\np = {}\nshots = {}\noptimizers = {}\nmodel = {}\ntrials = {}\n",
            self.graph,
            join(&self.layers),
            join(&self.shots),
            self.optimizers
                .iter()
                .map(|a| a.as_str())
                .collect::<Vec<_>>()
                .join(", "),
            self.model,
            self.trials
        );
        match self.budget {
            Budget::ScaledFrom1000(b) => s += &format!("budget_at_1000 = {b}\n"),
            Budget::Fixed(b) => s += &format!("budget = {b}\n"),
        }
        s += &format!("seed = {}\nout = {}\n", self.seed, self.out.display());
        let o = &self.overrides;
        let floats = [
            ("gamma", o.gamma),
            ("eta1", o.eta1),
            ("eta2", o.eta2),
            ("delta0", o.delta0),
            ("delta_max", o.delta_max),
            ("r", o.r),
        ];
        for (k, v) in floats {
            if let Some(v) = v {
                s += &format!("{k} = {v}\n");
            }
        }
        for (k, v) in [("q0", o.q0), ("q_max", o.q_max)] {
            match v {
                Some(DimBound::Full) => s += &format!("{k} = d\n"),
                Some(DimBound::Fixed(q)) => s += &format!("{k} = {q}\n"),
                None => {}
            }
        }
        if let Some(b) = o.stars_noise_term {
            s += &format!("stars_noise_term = {b}\n");
        }
        s
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| BenchError::Spec(format!("{key}: cannot parse '{s}'")))
        })
        .collect()
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| BenchError::Spec(format!("{key}: cannot parse '{value}'")))
}

impl FromStr for ExperimentSpec {
    type Err = BenchError;

    fn from_str(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| BenchError::Spec(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let k = k.trim().to_string();
            if kv.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(BenchError::Spec(format!("line {}: duplicate key '{k}'", lineno + 1)));
            }
        }
        let mut take = |k: &str| kv.remove(k);
        let required = |k: &str, v: Option<String>| v.ok_or_else(|| BenchError::Spec(format!("missing key '{k}'")));

        let graph: GraphSource = parse_one("graph", &required("graph", take("graph"))?)?;
        let layers = parse_list("p", &required("p", take("p"))?)?;
        let shots = parse_list("shots", &required("shots", take("shots"))?)?;
        let out = PathBuf::from(required("out", take("out"))?);
        let mut spec = ExperimentSpec::new(graph, layers, shots, out);

        if let Some(v) = take("optimizers") {
            spec.optimizers = parse_list("optimizers", &v)?;
        }
        if let Some(v) = take("model") {
            spec.model = parse_one("model", &v)?;
        }
        if let Some(v) = take("trials") {
            spec.trials = parse_one("trials", &v)?;
        }
        if let Some(v) = take("seed") {
            spec.seed = parse_one("seed", &v)?;
        }
        match (take("budget"), take("budget_at_1000")) {
            (Some(_), Some(_)) => {
                return Err(BenchError::Spec(
                    "give either 'budget' or 'budget_at_1000', not both".into(),
                ))
            }
            (Some(v), None) => spec.budget = Budget::Fixed(parse_one("budget", &v)?),
            (None, Some(v)) => spec.budget = Budget::ScaledFrom1000(parse_one("budget_at_1000", &v)?),
            (None, None) => {}
        }
        let o = &mut spec.overrides;
        for (key, slot) in [
            ("gamma", &mut o.gamma),
            ("eta1", &mut o.eta1),
            ("eta2", &mut o.eta2),
            ("delta0", &mut o.delta0),
            ("delta_max", &mut o.delta_max),
            ("r", &mut o.r),
        ] {
            if let Some(v) = take(key) {
                *slot = Some(parse_one(key, &v)?);
            }
        }
        if let Some(v) = take("q0") {
            o.q0 = Some(v.parse()?);
        }
        if let Some(v) = take("q_max") {
            o.q_max = Some(v.parse()?);
        }
        if let Some(v) = take("stars_noise_term") {
            o.stars_noise_term = Some(parse_one("stars_noise_term", &v)?);
        }
        if let Some(k) = kv.keys().next() {
            return Err(BenchError::Spec(format!("unknown key '{k}'")));
        }
        spec.validate()?;
        Ok(spec)
    }
}
