//! Exact statevector simulation of QAOA MaxCut circuits.
//!
//! Basis index `x` stores qubit `i` in bit `i`; bit value `b` maps to spin
//! `1 − 2b`. The phase layer is diagonal in the computational basis and the
//! mixer is applied qubit by qubit as a stride-`2^i` butterfly.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::oracle::StochasticObjective;

/// Largest vertex count accepted by the dense simulator.
pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
}

impl Graph {
    /// Validates and normalizes the edge list so that `u < v`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Graph("graph needs at least one vertex".into()));
        }
        if n > MAX_QUBITS {
            return Err(Error::Graph(format!(
                "{n} vertices exceeds the {MAX_QUBITS}-qubit limit"
            )));
        }
        let mut out: Vec<Edge> = Vec::new();
        for (a, b, w) in edges {
            if a == b {
                return Err(Error::Graph(format!("self-loop at vertex {a}")));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if v >= n {
                return Err(Error::Graph(format!("edge ({a}, {b}) references a vertex >= {n}")));
            }
            if !w.is_finite() {
                return Err(Error::Graph(format!("edge ({a}, {b}) has non-finite weight")));
            }
            if out.iter().any(|e| e.u == u && e.v == v) {
                return Err(Error::Graph(format!("duplicate edge ({u}, {v})")));
            }
            out.push(Edge { u, v, w });
        }
        Ok(Self { n, edges: out })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    pub fn degree(&self, vertex: usize) -> usize {
        self.edges.iter().filter(|e| e.u == vertex || e.v == vertex).count()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        self.edges.iter().any(|e| e.u == u && e.v == v)
    }

    /// Writes the `n <count>` / `u v w` edge-list format.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("n {}\n", self.n);
        for e in &self.edges {
            s.push_str(&format!("{} {} {}\n", e.u, e.v, e.w));
        }
        s
    }
}

impl FromStr for Graph {
    type Err = Error;

    /// Parses `n <count>` followed by one `u v [w]` line per edge. Blank lines
    /// and `#` comments are ignored; a missing weight means 1.
    fn from_str(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |what: &str| Error::Graph(format!("line {}: {what}: `{raw}`", lineno + 1));
            if n.is_none() {
                if fields.len() != 2 || fields[0] != "n" {
                    return Err(bad("expected header `n <count>`"));
                }
                n = Some(fields[1].parse().map_err(|_| bad("invalid vertex count"))?);
                continue;
            }
            if fields.len() != 2 && fields.len() != 3 {
                return Err(bad("expected `u v [w]`"));
            }
            let u: usize = fields[0].parse().map_err(|_| bad("invalid vertex"))?;
            let v: usize = fields[1].parse().map_err(|_| bad("invalid vertex"))?;
            let w: f64 = match fields.get(2) {
                Some(t) => t.parse().map_err(|_| bad("invalid weight"))?,
                None => 1.0,
            };
            edges.push((u, v, w));
        }
        let n = n.ok_or_else(|| Error::Graph("missing `n <count>` header".into()))?;
        Graph::new(n, edges)
    }
}

/// Unit-weight `n`-cycle.
pub fn cycle_graph(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::Graph(format!("a cycle needs at least 3 vertices, got {n}")));
    }
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n, 1.0)))
}

/// The Chvátal graph: 12 vertices, 24 edges, 4-regular, triangle-free, unit weights.
pub fn chvatal_graph() -> Graph {
    const ADJ: [(usize, &[usize]); 10] = [
        (0, &[1, 4, 6, 9]),
        (1, &[2, 5, 7]),
        (2, &[3, 6, 8]),
        (3, &[4, 7, 9]),
        (4, &[5, 8]),
        (5, &[10, 11]),
        (6, &[10, 11]),
        (7, &[8, 11]),
        (8, &[10]),
        (9, &[10, 11]),
    ];
    let edges = ADJ.iter().flat_map(|&(u, vs)| vs.iter().map(move |&v| (u, v, 1.0)));
    Graph::new(12, edges).expect("static Chvátal edge list is valid")
}

/// Total weight of edges whose endpoints fall on different sides of `assignment`.
pub fn cut_value(graph: &Graph, assignment: u64) -> f64 {
    graph
        .edges
        .iter()
        .filter(|e| ((assignment >> e.u) ^ (assignment >> e.v)) & 1 == 1)
        .map(|e| e.w)
        .sum()
}

/// Exact MaxCut by enumeration; vertex `n − 1` is pinned to side 0 using the
/// global-flip symmetry.
pub fn brute_force_maxcut(graph: &Graph) -> Result<(f64, u64)> {
    let n = graph.n;
    if n > MAX_QUBITS {
        return Err(Error::Graph(format!("{n} vertices is too many to enumerate")));
    }
    let half = 1u64 << (n - 1);
    let mut best = (f64::NEG_INFINITY, 0u64);
    for x in 0..half {
        let c = cut_value(graph, x);
        if c > best.0 {
            best = (c, x);
        }
    }
    Ok(best)
}

/// Diagonal of the cut Hamiltonian: `values[x] = cut_value(graph, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutDiagonal {
    n: usize,
    values: Vec<f64>,
}

impl CutDiagonal {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn build_cut_diagonal(graph: &Graph) -> Result<CutDiagonal> {
    let n = graph.n;
    if n > MAX_QUBITS {
        return Err(Error::Graph(format!(
            "{n} vertices exceeds the {MAX_QUBITS}-qubit limit"
        )));
    }
    let dim = 1usize << n;
    let mut values = vec![0.0; dim];
    for e in &graph.edges {
        for (x, val) in values.iter_mut().enumerate() {
            if ((x >> e.u) ^ (x >> e.v)) & 1 == 1 {
                *val += e.w;
            }
        }
    }
    Ok(CutDiagonal { n, values })
}

/// `x = (γ_1, …, γ_p, β_1, …, β_p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QaoaAngles {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
}

impl QaoaAngles {
    pub fn new(gamma: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if gamma.len() != beta.len() {
            return Err(Error::Dimension(format!(
                "{} phase angles but {} mixer angles",
                gamma.len(),
                beta.len()
            )));
        }
        Ok(Self { gamma, beta })
    }

    pub fn zeros(p: usize) -> Self {
        Self {
            gamma: vec![0.0; p],
            beta: vec![0.0; p],
        }
    }

    /// Splits a parameter vector of length `2p`.
    pub fn from_params(x: &[f64]) -> Result<Self> {
        if !x.len().is_multiple_of(2) {
            return Err(Error::Dimension(format!("parameter vector has odd length {}", x.len())));
        }
        let p = x.len() / 2;
        Ok(Self {
            gamma: x[..p].to_vec(),
            beta: x[p..].to_vec(),
        })
    }

    pub fn layers(&self) -> usize {
        self.gamma.len()
    }

    pub fn to_params(&self) -> Vec<f64> {
        self.gamma.iter().chain(self.beta.iter()).copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|+⟩^⊗n`.
    pub fn uniform(n: usize) -> Self {
        let dim = 1usize << n;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self {
            n,
            amplitudes: vec![a; dim],
        }
    }

    pub fn from_amplitudes(n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1usize << n {
            return Err(Error::Dimension(format!(
                "{} amplitudes for {n} qubits",
                amplitudes.len()
            )));
        }
        Ok(Self { n, amplitudes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Multiplies amplitude `x` by `exp(−i γ values[x])`.
    pub fn apply_phase(&mut self, diag: &CutDiagonal, gamma: f64) {
        for (a, &c) in self.amplitudes.iter_mut().zip(diag.values.iter()) {
            *a *= Complex64::from_polar(1.0, -gamma * c);
        }
    }

    /// Applies `exp(−i β X)` to every qubit.
    pub fn apply_mixer(&mut self, beta: f64) {
        let c = Complex64::new(beta.cos(), 0.0);
        let s = Complex64::new(0.0, -beta.sin());
        for qubit in 0..self.n {
            let stride = 1usize << qubit;
            for block in self.amplitudes.chunks_exact_mut(2 * stride) {
                let (lo, hi) = block.split_at_mut(stride);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x0, x1) = (*a, *b);
                    *a = c * x0 + s * x1;
                    *b = s * x0 + c * x1;
                }
            }
        }
    }

    pub fn expectation(&self, diag: &CutDiagonal) -> f64 {
        self.amplitudes
            .iter()
            .zip(diag.values.iter())
            .map(|(a, &v)| a.norm_sqr() * v)
            .sum()
    }
}

fn check_sizes(graph: &Graph, diag: &CutDiagonal) -> Result<()> {
    if diag.n != graph.n {
        return Err(Error::Dimension(format!(
            "diagonal is for {} qubits, graph has {} vertices",
            diag.n, graph.n
        )));
    }
    Ok(())
}

/// Prepares `e^{−iβ_p H_M} e^{−iγ_p H_P} ⋯ e^{−iβ_1 H_M} e^{−iγ_1 H_P} |+⟩^⊗n`.
pub fn prepare_state_with(graph: &Graph, diag: &CutDiagonal, angles: &QaoaAngles) -> Result<StateVector> {
    check_sizes(graph, diag)?;
    if angles.gamma.len() != angles.beta.len() {
        return Err(Error::Dimension("angle vectors differ in length".into()));
    }
    let mut state = StateVector::uniform(graph.n);
    for (&g, &b) in angles.gamma.iter().zip(angles.beta.iter()) {
        state.apply_phase(diag, g);
        state.apply_mixer(b);
    }
    Ok(state)
}

pub fn prepare_qaoa_state(graph: &Graph, angles: &QaoaAngles) -> Result<StateVector> {
    let diag = build_cut_diagonal(graph)?;
    prepare_state_with(graph, &diag, angles)
}

/// `⟨ψ(γ, β)| H_P |ψ(γ, β)⟩`.
pub fn exact_expectation(graph: &Graph, angles: &QaoaAngles) -> Result<f64> {
    let diag = build_cut_diagonal(graph)?;
    Ok(prepare_state_with(graph, &diag, angles)?.expectation(&diag))
}

/// Mean cut value over `shots` computational-basis measurements of `state`,
/// drawn by inverse CDF on the cumulative probabilities.
pub fn sample_shots<R: Rng + ?Sized>(
    state: &StateVector,
    diag: &CutDiagonal,
    shots: usize,
    rng: &mut R,
) -> Result<f64> {
    let draws = sample_shot_values(state, diag, shots, rng)?;
    Ok(draws.iter().sum::<f64>() / shots as f64)
}

/// Per-shot cut values of `shots` measurements.
pub fn sample_shot_values<R: Rng + ?Sized>(
    state: &StateVector,
    diag: &CutDiagonal,
    shots: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if shots == 0 {
        return Err(Error::Oracle("shot count must be at least 1".into()));
    }
    if state.n != diag.n {
        return Err(Error::Dimension("state and diagonal sizes differ".into()));
    }
    let mut cdf = Vec::with_capacity(state.amplitudes.len());
    let mut acc = 0.0;
    for a in &state.amplitudes {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    if (acc - 1.0).abs() > 1e-8 {
        return Err(Error::Unnormalized(acc));
    }
    let last = cdf.len() - 1;
    Ok((0..shots)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * acc;
            let idx = cdf.partition_point(|&c| c <= u).min(last);
            diag.values[idx]
        })
        .collect())
}

/// Minimization objective `−⟨H_P⟩` over `x ∈ R^{2p}`; each sample is one shot.
#[derive(Debug, Clone)]
pub struct QaoaOracle {
    graph: Graph,
    diag: CutDiagonal,
    layers: usize,
}

impl QaoaOracle {
    pub fn new(graph: Graph, layers: usize) -> Result<Self> {
        let diag = build_cut_diagonal(&graph)?;
        Ok(Self { graph, diag, layers })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn diagonal(&self) -> &CutDiagonal {
        &self.diag
    }

    fn state(&self, x: &[f64]) -> Result<StateVector> {
        if x.len() != 2 * self.layers {
            return Err(Error::Dimension(format!(
                "expected {} parameters for p = {}, got {}",
                2 * self.layers,
                self.layers,
                x.len()
            )));
        }
        prepare_state_with(&self.graph, &self.diag, &QaoaAngles::from_params(x)?)
    }

    pub fn expectation(&self, x: &[f64]) -> Result<f64> {
        Ok(self.state(x)?.expectation(&self.diag))
    }
}

impl StochasticObjective for QaoaOracle {
    fn dim(&self) -> usize {
        2 * self.layers
    }

    fn sample_batch(&self, x: &[f64], shots: usize, rng: &mut dyn rand::RngCore) -> Result<Vec<f64>> {
        let state = self.state(x)?;
        let cuts = sample_shot_values(&state, &self.diag, shots, rng)?;
        Ok(cuts.into_iter().map(|c| -c).collect())
    }

    fn true_value(&self, x: &[f64]) -> Option<f64> {
        self.expectation(x).ok().map(|e| -e)
    }
}

pub fn qaoa_oracle(graph: Graph, layers: usize) -> Result<QaoaOracle> {
    QaoaOracle::new(graph, layers)
}

/// Named graph sources accepted on the command line and in experiment specs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GraphSource {
    Chvatal,
    Cycle6,
    File(String),
}

impl GraphSource {
    pub fn load(&self) -> Result<Graph> {
        match self {
            GraphSource::Chvatal => Ok(chvatal_graph()),
            GraphSource::Cycle6 => cycle_graph(6),
            GraphSource::File(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| Error::Graph(format!("cannot read `{path}`: {e}")))?;
                text.parse()
            }
        }
    }

    /// Short identifier used in file names.
    pub fn label(&self) -> String {
        match self {
            GraphSource::Chvatal => "chvatal".into(),
            GraphSource::Cycle6 => "cycle6".into(),
            GraphSource::File(path) => std::path::Path::new(path)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "graph".into()),
        }
    }
}

impl fmt::Display for GraphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSource::File(p) => write!(f, "{p}"),
            other => f.write_str(&other.label()),
        }
    }
}

impl FromStr for GraphSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        Ok(match t.to_ascii_lowercase().as_str() {
            "chvatal" => GraphSource::Chvatal,
            "cycle6" => GraphSource::Cycle6,
            _ if t.is_empty() => return Err(Error::Graph("empty graph source".into())),
            _ => GraphSource::File(t.to_string()),
        })
    }
}
