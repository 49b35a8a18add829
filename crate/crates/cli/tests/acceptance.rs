//! One PASS/FAIL line per acceptance criterion. Datasets are read from
//! `WWLS_DATA_DIR` or the workspace `data/` directory, one subdirectory per
//! dataset. Exits nonzero when any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wwls::experiment::{run_noise_experiment, saturation_index, spearman, NoiseConfig, NoiseMetric};
use wwls::hash::collision_report;
use wwls::ot::oracle::brute_force_emd;
use wwls::ted::{ted_bound, EXACT_TED_LIMIT};
use wwls::{
    emd_weights, gen_random_graph, knn_eval, pairwise_matrix, parse_tud_dataset, sinkhorn, wwls_distance, CostMatrix,
    Execution, Graph, HashParams, Histogram, LabeledDataset, MatrixMode, SinkhornOptions, Solver, TinyTree,
    DEFAULT_MODULUS,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn data_dir() -> PathBuf {
    std::env::var_os("WWLS_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

fn dataset(name: &str) -> Result<LabeledDataset, String> {
    let dir = data_dir().join(name);
    if !dir.join(format!("{name}_A.txt")).exists() {
        return Err(format!("dataset not found at {}", dir.display()));
    }
    parse_tud_dataset(&dir, name).map_err(|e| e.to_string())
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn table_counts() -> Outcome {
    const EXPECTED: [usize; 7] = [232, 10646, 25852, 41879, 58327, 75047, 91940];
    let dir = data_dir().join("ENZYMES");
    if !dir.join("ENZYMES_A.txt").exists() {
        return Err(format!("dataset not found at {}", dir.display()));
    }
    let out = Command::new(env!("CARGO_BIN_EXE_wwls"))
        .args(["hash-stats", "--name", "ENZYMES", "--h-max", "7", "--dataset"])
        .arg(&dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let text = String::from_utf8_lossy(&out.stdout);
    let mut canonical = Vec::new();
    let mut mismatched = Vec::new();
    for line in text.lines().skip(1) {
        let f: Vec<usize> = line.split(',').map(|x| x.parse().unwrap()).collect();
        // h, wl, canonical, canonical_cumulative, hash_k1, hash_k2, ...
        canonical.push(f[2]);
        if f[5] != f[2] {
            mismatched.push(f[0]);
        }
    }
    let detail = format!("canonical {canonical:?}, expected {EXPECTED:?}, k=2 differs at h {mismatched:?}");
    if canonical == EXPECTED && mismatched.is_empty() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn collisions(name: &str) -> Outcome {
    let ds = dataset(name)?;
    let mut summary = Vec::new();
    for seed in [0, 1, 2] {
        let params = HashParams::new(DEFAULT_MODULUS, 2, 7, seed).map_err(|e| e.to_string())?;
        let r = collision_report(&ds, 7, &params).map_err(|e| e.to_string())?;
        if !r.is_bijective() {
            return Err(format!("seed {seed}: {r:?}"));
        }
        summary.push(r.canonical_types);
    }
    Ok(format!("{name}: {} canonical types up to h=7, no collisions under seeds 0, 1, 2", summary[0]))
}

fn random_tree(r: &mut ChaCha8Rng, h: usize) -> TinyTree {
    loop {
        let n = r.random_range(2..6);
        let g = gen_random_graph(n, 0.5, r.random()).unwrap();
        let g = g.with_labels((0..n).map(|_| r.random_range(0..3)).collect()).unwrap();
        let v = r.random_range(0..n);
        if let Some(t) = TinyTree::from_wl_unfolding(&g, v, h, EXACT_TED_LIMIT) {
            return t;
        }
    }
}

fn ted_sandwich() -> Outcome {
    let mut r = rng(3);
    let params = HashParams::new(DEFAULT_MODULUS, 2, 2, 0).unwrap();
    let mut tight = 0;
    for i in 0..100 {
        let h = 1 + i % 2;
        let (t1, t2) = (random_tree(&mut r, h), random_tree(&mut r, h));
        let b = ted_bound(&t1, &t2, h, &params).map_err(|e| e.to_string())?;
        if !b.holds() {
            return Err(format!("pair {i}: {b:?}"));
        }
        tight += usize::from(b.l1 == b.exact);
    }
    Ok(format!("100 pairs hold exactly; upper bound tight in {tight}"))
}

fn random_weights(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
    let s: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / s).collect();
    let drift = 1.0 - w.iter().sum::<f64>();
    w[0] += drift;
    w
}

fn ot_exactness() -> Outcome {
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for &n in &[3, 4] {
        for _ in 0..200 {
            let a = random_weights(&mut r, n);
            let b = random_weights(&mut r, n);
            let c = CostMatrix::from_fn(n, n, |_, _| r.random::<f64>()).unwrap();
            let cost = emd_weights(&a, &b, &c).map_err(|e| e.to_string())?.cost;
            worst = worst.max((cost - brute_force_emd(&a, &b, c.data())).abs());
        }
    }
    if worst > 1e-9 {
        return Err(format!("exact vs vertex enumeration off by {worst:e}"));
    }
    let mut rel = 0.0f64;
    let mut unconverged = 0;
    for _ in 0..20 {
        let a = Histogram::new(random_weights(&mut r, 10)).unwrap();
        let b = Histogram::new(random_weights(&mut r, 10)).unwrap();
        let c = CostMatrix::from_fn(10, 10, |_, _| r.random::<f64>()).unwrap();
        let exact = emd_weights(a.weights(), b.weights(), &c).unwrap().cost;
        let s = sinkhorn(&a, &b, &c, &SinkhornOptions::with_epsilon(1e-3)).map_err(|e| e.to_string())?;
        unconverged += usize::from(!s.converged);
        rel = rel.max((s.plan.cost - exact).abs() / exact);
    }
    let detail = format!(
        "3x3/4x4 max error {worst:.1e}; 10x10 Sinkhorn max relative error {:.3}% ({unconverged}/20 hit max_iter)",
        rel * 100.0
    );
    if rel < 0.02 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn labeled_graph(r: &mut ChaCha8Rng) -> Graph {
    let n = r.random_range(2..20);
    let g = gen_random_graph(n, r.random_range(0.1..0.5), r.random()).unwrap();
    g.with_labels((0..n).map(|_| r.random_range(0..4)).collect()).unwrap()
}

fn metric_axioms() -> Outcome {
    let mut r = rng(5);
    for i in 0..200 {
        let params = HashParams::new(DEFAULT_MODULUS, 2, 1 + i % 3, i as u64).unwrap();
        let (g1, g2) = (labeled_graph(&mut r), labeled_graph(&mut r));
        let d = |a: &Graph, b: &Graph| wwls_distance(a, b, &params, &Solver::Exact).map_err(|e| e.to_string());
        let (ab, ba) = (d(&g1, &g2)?, d(&g2, &g1)?);
        if (ab - ba).abs() > 1e-9 {
            return Err(format!("pair {i}: asymmetric {ab} vs {ba}"));
        }
        if d(&g1, &g1)? != 0.0 {
            return Err(format!("pair {i}: nonzero self distance"));
        }
        let mut perm: Vec<usize> = (0..g1.node_count()).collect();
        perm.shuffle(&mut r);
        let pd = d(&g1, &g1.permuted(&perm).unwrap())?;
        if pd != 0.0 {
            return Err(format!("pair {i}: permuted copy at distance {pd}"));
        }
    }
    Ok("200 pairs symmetric, zero on identical and permuted copies".into())
}

fn noise_sensitivity() -> Outcome {
    let config = NoiseConfig::default();
    let result = run_noise_experiment(&config, Execution::Parallel).map_err(|e| e.to_string())?;
    let levels: Vec<f64> = (0..=config.max_noise).map(|c| c as f64).collect();
    let rho = spearman(&levels, &result.mean_curve(NoiseMetric::Wwls)).unwrap_or(f64::NAN);
    let earlier = result
        .trials
        .iter()
        .filter(|t| {
            match (
                saturation_index(t.curve(NoiseMetric::Wwl), 0.9),
                saturation_index(t.curve(NoiseMetric::Wwls), 0.9),
            ) {
                (Some(b), Some(w)) => b < w,
                _ => false,
            }
        })
        .count();
    let detail = format!(
        "n={} p={} rewire 0..{}: Spearman {rho:.4} (need >= 0.95); WWL saturates earlier in {earlier}/{} trials (need >= 15)",
        config.nodes, config.p, config.max_noise, config.trials
    );
    if rho >= 0.95 && earlier >= 15 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn classification() -> Outcome {
    let ds = dataset("MUTAG")?;
    let params = HashParams::new(DEFAULT_MODULUS, 2, 2, 0).unwrap();
    let m = pairwise_matrix(ds.graphs(), &params, MatrixMode::Distance, &Solver::Exact, Execution::Parallel)
        .map_err(|e| e.to_string())?;
    let report = knn_eval(&m, ds.class_labels(), 1).map_err(|e| e.to_string())?;
    let margin = (report.accuracy - report.majority_rate) * 100.0;
    let detail = format!(
        "MUTAG 1-NN {:.2}% vs majority {:.2}% (+{margin:.2} points, need >= 10)",
        report.accuracy * 100.0,
        report.majority_rate * 100.0
    );
    if margin >= 10.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mutag = data_dir().join("MUTAG");
    let mutag = mutag.to_str().unwrap();
    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("distance", vec!["distance", "--dataset", mutag, "--name", "MUTAG"]),
        ("kernel", vec!["kernel", "--gen", "random", "--n", "15", "--p", "0.2", "--gamma", "0.05", "--format", "json"]),
        ("sinkhorn", vec!["distance", "--gen", "grid", "--count", "4", "--solver", "sinkhorn", "--eps", "0.05"]),
        ("hash-stats", vec!["hash-stats", "--dataset", mutag, "--name", "MUTAG", "--h-max", "4"]),
        ("noise", vec!["noise", "--trials", "4", "--max-noise", "8"]),
        ("knn", vec!["knn", "--dataset", mutag, "--name", "MUTAG", "--format", "json"]),
    ];
    for (tag, args) in &runs {
        let mut outputs = Vec::new();
        for round in 0..2 {
            let out = tmp.path().join(format!("{tag}-{round}.out"));
            let status = Command::new(env!("CARGO_BIN_EXE_wwls"))
                .args(args)
                .arg("--out")
                .arg(&out)
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                return Err(format!("{tag}: exit status {status}"));
            }
            let meta = std::fs::read_to_string(format!("{}.meta.json", out.display())).map_err(|e| e.to_string())?;
            let meta = meta.replace(&format!("{tag}-{round}.out"), "OUT");
            outputs.push((std::fs::read(&out).map_err(|e| e.to_string())?, meta));
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{tag}: reruns differ"));
        }
    }
    Ok(format!("{} commands byte-identical across reruns, sidecars included", runs.len()))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1", "subtree type counts on ENZYMES", table_counts),
        ("2a", "hash/canonical agreement on MUTAG", || collisions("MUTAG")),
        ("2b", "hash/canonical agreement on PROTEINS", || collisions("PROTEINS")),
        ("2c", "hash/canonical agreement on NCI1", || collisions("NCI1")),
        ("3", "L1 sandwich around the exact tree edit distance", ted_sandwich),
        ("4", "exact and entropic transport", ot_exactness),
        ("5", "distance axioms", metric_axioms),
        ("6", "edge noise sensitivity", noise_sensitivity),
        ("7", "nearest-neighbor sanity on MUTAG", classification),
        ("8", "CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (id, title, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {id}: {title} ({secs:.1}s) {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {id}: {title} ({secs:.1}s) {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
