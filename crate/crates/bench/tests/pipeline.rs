use std::path::Path;
use std::process::Command;

use anastaars_bench::aggregate::{aggregate_median, shot_grid, StepSeries};
use anastaars_bench::experiment::{read_trajectory, MANIFEST_FILE};
use anastaars_bench::{run_pipeline, Budget, ExperimentSpec};
use anastaars_core::{seeded_rng, GraphSource};
use rand::Rng;

/// Reference aggregation by linear scan and explicit middle-element median.
fn brute_median(trials: &[StepSeries], at: u64) -> f64 {
    let mut vals: Vec<f64> = trials
        .iter()
        .map(|t| {
            let mut v = t.initial;
            for &(s, b) in &t.steps {
                if s <= at {
                    v = b;
                }
            }
            v
        })
        .collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = vals.len();
    if n % 2 == 1 {
        vals[n / 2]
    } else {
        0.5 * (vals[n / 2 - 1] + vals[n / 2])
    }
}

#[test]
fn staggered_medians_match_reference() {
    let mut rng = seeded_rng(21);
    for n_trials in [1usize, 2, 5, 8, 11] {
        let trials: Vec<StepSeries> = (0..n_trials)
            .map(|_| {
                let mut shots = 0u64;
                let mut best = rng.random_range(-3.0..0.0);
                let initial = best;
                let steps = (0..rng.random_range(1..40))
                    .map(|_| {
                        shots += rng.random_range(1..700);
                        if rng.random_bool(0.3) {
                            best -= rng.random_range(0.0..0.5);
                        }
                        (shots, best)
                    })
                    .collect();
                StepSeries { initial, steps }
            })
            .collect();
        let grid = shot_grid(10_000, 100);
        let s = aggregate_median("x", &trials, &grid).unwrap();
        for (i, &g) in grid.iter().enumerate() {
            assert_eq!(s.median[i], brute_median(&trials, g), "n = {n_trials}, shots = {g}");
            assert!(s.q25[i] <= s.median[i] && s.median[i] <= s.q75[i]);
        }
        assert!(
            s.median.windows(2).all(|w| w[1] <= w[0]),
            "median of monotone series is monotone"
        );
    }
}

fn small_spec(out: &Path) -> ExperimentSpec {
    ExperimentSpec {
        trials: 3,
        budget: Budget::Fixed(4000),
        seed: 5,
        ..ExperimentSpec::new(GraphSource::Cycle6, vec![2, 3], vec![50], out)
    }
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    for sub in ["", "trajectories", "median", "plots"] {
        let d = dir.join(sub);
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_file() {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                // the spec copy records the output directory itself
                if !rel.ends_with("spec.txt") {
                    files.push((rel, std::fs::read(&p).unwrap()));
                }
            }
        }
    }
    files.sort();
    files
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let pa = run_pipeline(&small_spec(a.path()), 1, 51).unwrap();
    run_pipeline(&small_spec(b.path()), 4, 51).unwrap();
    let (fa, fb) = (read_all(a.path()), read_all(b.path()));
    assert_eq!(fa.len(), 12 + 1 + 2 + 4);
    assert_eq!(fa, fb);
    assert_eq!(pa.plots.len(), 4);
    for path in pa.experiment.trajectory_paths() {
        let rows = read_trajectory(&path).unwrap();
        assert!(rows.windows(2).all(|w| w[1].best_true_so_far <= w[0].best_true_so_far));
    }
}

#[test]
fn cli_runs_the_whole_pipeline() {
    let bin = env!("CARGO_BIN_EXE_anastaars-bench");
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.txt");
    let out = dir.path().join("out");
    std::fs::write(
        &spec,
        "graph = cycle6\np = 2\nshots = 20\ntrials = 2\nbudget = 1000\nout = ignored\n",
    )
    .unwrap();
    let run = |args: &[&str]| {
        let o = Command::new(bin).args(args).output().unwrap();
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap()
    };
    let out_s = out.to_str().unwrap();
    run(&[
        "run",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        out_s,
        "--seed",
        "3",
        "--jobs",
        "2",
    ]);
    assert!(out.join(MANIFEST_FILE).exists());
    assert!(run(&["aggregate", "--out", out_s]).contains("cycle6_p2_B20_mfn"));
    assert_eq!(run(&["plot", "--out", out_s]).lines().count(), 2);

    let graph = dir.path().join("square.txt");
    std::fs::write(&graph, "# 4-cycle\nn 4\n0 1\n1 2\n2 3\n3 0\n").unwrap();
    assert!(run(&["maxcut", graph.to_str().unwrap()]).contains("maxcut = 4"));
    assert!(run(&["selftest"]).lines().all(|l| l.starts_with("[PASS]")));

    let bad = Command::new(bin)
        .args(["run", "--spec", "/nonexistent/spec.txt"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
}
