//! Paired ANASTAARS vs STARS runs on the 6-cycle QAOA objective.
//!
//! `cargo run --release -p anastaars-core --example paired_qaoa -- [p] [shots] [budget] [trials]`

use anastaars_core::parallel::map_items;
use anastaars_core::{cycle_graph, qaoa_oracle, run, seeded_rng, Algorithm, OptimizerConfig};
use nalgebra::DVector;
use rand::Rng;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: u64| args.get(i).and_then(|s| s.parse().ok()).unwrap_or(default);
    let p = arg(0, 5) as usize;
    let shots = arg(1, 100) as usize;
    let budget = arg(2, 100_000);
    let trials = arg(3, 30);

    let oracle = qaoa_oracle(cycle_graph(6).unwrap(), p).unwrap();
    let config = OptimizerConfig {
        shots_per_estimate: shots,
        max_evaluations: budget,
        ..OptimizerConfig::qaoa_defaults(2 * p)
    };
    let seeds: Vec<u64> = (0..trials).collect();
    let results = map_items(&seeds, |&seed| {
        let mut init = seeded_rng(seed ^ 0xA5A5);
        let x0 = DVector::from_fn(2 * p, |_, _| init.random_range(-1.0..=1.0));
        [Algorithm::Anastaars, Algorithm::Stars].map(|alg| {
            let t = run(alg, &config, &oracle, x0.clone(), &mut seeded_rng(seed)).unwrap();
            let succ = t.records.iter().filter(|r| r.success).count();
            (
                t.initial_true_value.unwrap(),
                t.best_true_value().unwrap(),
                t.records.len(),
                succ,
            )
        })
    });
    for (i, alg) in ["anastaars", "stars"].iter().enumerate() {
        let init = median(results.iter().map(|r| r[i].0).collect());
        let best = median(results.iter().map(|r| r[i].1).collect());
        let iters = median(results.iter().map(|r| r[i].2 as f64).collect());
        let succ = median(results.iter().map(|r| r[i].3 as f64).collect());
        println!("{alg:10} median initial {init:.4} median best {best:.4} iters {iters} successes {succ}");
    }
}
