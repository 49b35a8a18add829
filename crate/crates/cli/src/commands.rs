use serde::Serialize;
use wwls::experiment::{run_noise_experiment, saturation_index, spearman, GraphKind, NoiseConfig, NoiseMetric};
use wwls::hash::audit_subtree_types;
use wwls::{
    gen_cycle, gen_grid, gen_random_graph, knn_eval, pairwise_matrix, parse_tud_dataset,
    Execution, HashParams, LabeledDataset, MatrixMode, NoiseMode, PairwiseMatrix, SinkhornOptions, Solver,
};

use crate::config::{
    Cli, Command, Format, GenKind, HashArgs, HashStatsArgs, InputArgs, KnnArgs, MatrixArgs, NoiseArgs,
    NoiseModeArg, SolverArgs, SolverKind,
};
use crate::output::{csv_line, emit, float, json};
use crate::CliError;

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let exec = execution(cli.jobs)?;
    let name = cli.command.name();
    match &cli.command {
        Command::Distance(args) => {
            let m = matrix(args, MatrixMode::Distance, exec)?;
            emit(&args.output, name, cli, &matrix_body(&m, args.output.format))
        }
        Command::Kernel(args) => {
            if !(args.gamma > 0.0 && args.gamma.is_finite()) {
                return Err(CliError::Input(format!("--gamma must be positive, got {}", args.gamma)));
            }
            let m = matrix(&args.matrix, MatrixMode::Kernel { gamma: args.gamma }, exec)?;
            emit(&args.matrix.output, name, cli, &matrix_body(&m, args.matrix.output.format))
        }
        Command::HashStats(args) => emit(&args.output, name, cli, &hash_stats(args)?),
        Command::Noise(args) => emit(&args.output, name, cli, &noise(args, exec)?),
        Command::Knn(args) => emit(&args.matrix.output, name, cli, &knn(args, exec)?),
    }
}

fn execution(jobs: Option<usize>) -> Result<Execution, CliError> {
    match jobs {
        None => Ok(Execution::Parallel),
        Some(0) => Err(CliError::Input("--jobs must be at least 1".into())),
        Some(1) => Ok(Execution::Sequential),
        Some(j) => {
            wwls::par::configure_threads(j);
            Ok(Execution::Parallel)
        }
    }
}

fn load(input: &InputArgs, seed: u64) -> Result<LabeledDataset, CliError> {
    let ds = match (&input.dataset, input.gen) {
        (Some(dir), _) => {
            let name = input.name.as_deref().expect("clap enforces --name");
            parse_tud_dataset(dir, name)?
        }
        (None, Some(kind)) => {
            if input.count == 0 {
                return Err(CliError::Input("--count must be at least 1".into()));
            }
            let graphs = (0..input.count)
                .map(|i| match kind {
                    GenKind::Random => gen_random_graph(input.n, input.p, seed.wrapping_add(i as u64)),
                    GenKind::Cycle => gen_cycle(input.n + i),
                    GenKind::Grid => {
                        let rows = ((input.n as f64).sqrt() as usize).max(1);
                        gen_grid(rows, (input.n / rows).max(1) + i)
                    }
                })
                .collect::<wwls::Result<Vec<_>>>()?;
            let classes = vec![0; graphs.len()];
            LabeledDataset::new(format!("{kind:?}").to_lowercase(), graphs, classes)?
        }
        (None, None) => unreachable!("clap requires --dataset or --gen"),
    };
    Ok(if input.degree_labels { ds.degree_labeled() } else { ds })
}

fn params(hash: &HashArgs) -> Result<HashParams, CliError> {
    Ok(HashParams::new(hash.modulus, hash.k, hash.h, hash.seed)?)
}

fn solver(args: &SolverArgs) -> Result<Solver, CliError> {
    match args.solver {
        SolverKind::Exact => Ok(Solver::Exact),
        SolverKind::Sinkhorn if args.eps > 0.0 && args.eps.is_finite() => {
            Ok(Solver::Sinkhorn(SinkhornOptions::with_epsilon(args.eps)))
        }
        SolverKind::Sinkhorn => Err(CliError::Input(format!("--eps must be positive, got {}", args.eps))),
    }
}

fn matrix(args: &MatrixArgs, mode: MatrixMode, exec: Execution) -> Result<PairwiseMatrix, CliError> {
    let ds = load(&args.input, args.hash.seed)?;
    let params = params(&args.hash)?;
    let solver = solver(&args.solver)?;
    Ok(pairwise_matrix(ds.graphs(), &params, mode, &solver, exec)?)
}

#[derive(Serialize)]
struct MatrixJson<'a> {
    n: usize,
    values: Vec<&'a [f64]>,
    metadata: &'a wwls::metric::MatrixMetadata,
}

fn matrix_body(m: &PairwiseMatrix, format: Format) -> String {
    match format {
        Format::Csv => m.rows().map(|r| csv_line(r.iter().map(|&x| float(x)))).collect(),
        Format::Json => json(&MatrixJson {
            n: m.n,
            values: m.rows().collect(),
            metadata: &m.metadata,
        }),
    }
}

#[derive(Serialize)]
struct HashStatsRow {
    h: usize,
    wl: usize,
    canonical: usize,
    canonical_cumulative: usize,
    hash_k1: usize,
    hash_k2: usize,
    /// canonical types merged by hashing
    collisions_k1: usize,
    collisions_k2: usize,
}

fn hash_stats(args: &HashStatsArgs) -> Result<String, CliError> {
    if args.h_max == 0 {
        return Err(CliError::Input("--h-max must be at least 1".into()));
    }
    let ds = load(&args.input, args.seed)?;
    let params = [1, 2]
        .map(|k| HashParams::new(args.modulus, k, args.h_max, args.seed))
        .into_iter()
        .collect::<wwls::Result<Vec<_>>>()?;
    let rows: Vec<HashStatsRow> = audit_subtree_types(&ds, args.h_max, &params)?
        .into_iter()
        .map(|r| HashStatsRow {
            h: r.height,
            wl: r.wl,
            canonical: r.canonical,
            canonical_cumulative: r.canonical_cumulative,
            hash_k1: r.hashed[0],
            hash_k2: r.hashed[1],
            collisions_k1: r.canonical.saturating_sub(r.hashed[0]),
            collisions_k2: r.canonical.saturating_sub(r.hashed[1]),
        })
        .collect();
    Ok(match args.output.format {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut s = csv_line(
                ["h", "wl", "canonical", "canonical_cumulative", "hash_k1", "hash_k2", "collisions_k1", "collisions_k2"]
                    .map(String::from),
            );
            for r in &rows {
                s += &csv_line(
                    [
                        r.h,
                        r.wl,
                        r.canonical,
                        r.canonical_cumulative,
                        r.hash_k1,
                        r.hash_k2,
                        r.collisions_k1,
                        r.collisions_k2,
                    ]
                    .map(|x| x.to_string()),
                );
            }
            s
        }
    })
}

#[derive(Serialize)]
struct NoiseSummary {
    h: usize,
    metric: NoiseMetric,
    /// rank correlation between noise level and mean distance
    spearman: Option<f64>,
    /// per trial, first noise level reaching 90% of that trial's maximum
    saturation: Vec<Option<usize>>,
}

#[derive(Serialize)]
struct NoiseJson {
    rows: Vec<(usize, wwls::experiment::NoiseRow)>,
    summary: Vec<NoiseSummary>,
}

fn noise(args: &NoiseArgs, exec: Execution) -> Result<String, CliError> {
    if args.max_noise == 0 || args.trials == 0 {
        return Err(CliError::Input("--max-noise and --trials must be at least 1".into()));
    }
    let heights: Vec<usize> = if args.sweep_h { (1..=args.hash.h).collect() } else { vec![args.hash.h] };
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &h in &heights {
        let config = NoiseConfig {
            kind: match args.kind {
                GenKind::Random => GraphKind::Random,
                GenKind::Cycle => GraphKind::Cycle,
                GenKind::Grid => GraphKind::Grid,
            },
            nodes: args.n,
            p: args.p,
            mode: match args.mode {
                NoiseModeArg::Rewire => NoiseMode::Rewire,
                NoiseModeArg::Add => NoiseMode::Add,
            },
            max_noise: args.max_noise,
            trials: args.trials,
            h,
            k: args.hash.k,
            modulus: args.hash.modulus,
            seed: args.hash.seed,
        };
        let result = run_noise_experiment(&config, exec)?;
        let levels: Vec<f64> = (0..=args.max_noise).map(|c| c as f64).collect();
        for metric in NoiseMetric::ALL {
            summary.push(NoiseSummary {
                h,
                metric,
                spearman: spearman(&levels, &result.mean_curve(metric)),
                saturation: result.trials.iter().map(|t| saturation_index(t.curve(metric), 0.9)).collect(),
            });
        }
        rows.extend(result.rows.into_iter().map(|r| (h, r)));
    }
    Ok(match args.output.format {
        Format::Json => json(&NoiseJson { rows, summary }),
        Format::Csv => {
            let mut header = vec!["noise", "metric", "mean", "std"];
            if args.sweep_h {
                header.insert(0, "h");
            }
            let mut s = csv_line(header.into_iter().map(String::from));
            for (h, r) in rows {
                let mut fields = vec![r.noise.to_string(), r.metric.name().to_string(), float(r.mean), float(r.std)];
                if args.sweep_h {
                    fields.insert(0, h.to_string());
                }
                s += &csv_line(fields);
            }
            s
        }
    })
}

fn knn(args: &KnnArgs, exec: Execution) -> Result<String, CliError> {
    let ds = load(&args.matrix.input, args.matrix.hash.seed)?;
    let params = params(&args.matrix.hash)?;
    let solver = solver(&args.matrix.solver)?;
    let m = pairwise_matrix(ds.graphs(), &params, MatrixMode::Distance, &solver, exec)?;
    let report = knn_eval(&m, ds.class_labels(), args.k_neighbors).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(match args.matrix.output.format {
        Format::Json => json(&report),
        Format::Csv => {
            csv_line(["accuracy", "correct", "total", "majority_rate"].map(String::from))
                + &csv_line([
                    float(report.accuracy),
                    report.correct.to_string(),
                    report.total.to_string(),
                    float(report.majority_rate),
                ])
        }
    })
}
