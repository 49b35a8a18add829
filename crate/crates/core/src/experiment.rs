//! Edge-noise sensitivity experiment: distances between a graph and nested
//! noisy copies of it, for WWLS, the categorical WWL baseline and the
//! aligned Laplacian difference.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generate::{gen_cycle, gen_grid, gen_random_graph, perturb_sequence, NoiseMode};
use crate::graph::{laplacian_frobenius, Graph};
use crate::hash::{HashParams, DEFAULT_MODULUS};
use crate::metric::{embedded_distance, wwl_baseline_distance, GraphEmbedding, Solver};
use crate::par::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Random,
    Cycle,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMetric {
    Wwls,
    Wwl,
    Laplacian,
}

impl NoiseMetric {
    pub const ALL: [NoiseMetric; 3] = [NoiseMetric::Wwls, NoiseMetric::Wwl, NoiseMetric::Laplacian];

    pub fn name(self) -> &'static str {
        match self {
            NoiseMetric::Wwls => "wwls",
            NoiseMetric::Wwl => "wwl",
            NoiseMetric::Laplacian => "laplacian",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub kind: GraphKind,
    /// node count; grids use the closest square `side x side` layout
    pub nodes: usize,
    /// edge probability of random base graphs
    pub p: f64,
    pub mode: NoiseMode,
    pub max_noise: usize,
    pub trials: usize,
    pub h: usize,
    pub k: usize,
    pub modulus: u64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            kind: GraphKind::Random,
            nodes: 50,
            p: 0.1,
            mode: NoiseMode::Rewire,
            max_noise: 30,
            trials: 20,
            h: 2,
            k: 2,
            modulus: DEFAULT_MODULUS,
            seed: 0,
        }
    }
}

/// Raw distances of one trial, `values[metric][noise]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialCurves {
    pub trial: usize,
    pub values: Vec<Vec<f64>>,
}

impl TrialCurves {
    pub fn curve(&self, metric: NoiseMetric) -> &[f64] {
        &self.values[metric as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseRow {
    pub noise: usize,
    pub metric: NoiseMetric,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseResult {
    pub config: NoiseConfig,
    pub trials: Vec<TrialCurves>,
    /// per metric, per noise level; each series divided by its largest mean
    pub rows: Vec<NoiseRow>,
}

impl NoiseResult {
    pub fn mean_curve(&self, metric: NoiseMetric) -> Vec<f64> {
        self.rows.iter().filter(|r| r.metric == metric).map(|r| r.mean).collect()
    }
}

fn base_graph(config: &NoiseConfig, trial_seed: u64) -> Result<Graph> {
    match config.kind {
        GraphKind::Random => gen_random_graph(config.nodes, config.p, trial_seed),
        GraphKind::Cycle => gen_cycle(config.nodes),
        GraphKind::Grid => {
            let side = (config.nodes as f64).sqrt().round().max(1.0) as usize;
            gen_grid(side, side)
        }
    }
}

fn trial_seeds(seed: u64, trial: usize) -> (u64, u64) {
    let base = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(2 * trial as u64);
    (base, base.wrapping_add(1))
}

pub fn run_trial(config: &NoiseConfig, params: &HashParams, trial: usize) -> Result<TrialCurves> {
    let (graph_seed, noise_seed) = trial_seeds(config.seed, trial);
    let g = base_graph(config, graph_seed)?;
    let noisy = perturb_sequence(&g, config.mode, config.max_noise, noise_seed)?;
    let base = GraphEmbedding::new(&g, params)?;
    let mut values: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(noisy.len())).collect();
    for other in &noisy {
        let e = GraphEmbedding::new(other, params)?;
        values[NoiseMetric::Wwls as usize].push(embedded_distance(&base, &e, &Solver::Exact)?);
        values[NoiseMetric::Wwl as usize].push(wwl_baseline_distance(&g, other, config.h)?);
        values[NoiseMetric::Laplacian as usize].push(laplacian_frobenius(&g, other)?);
    }
    Ok(TrialCurves { trial, values })
}

pub fn run_noise_experiment(config: &NoiseConfig, exec: Execution) -> Result<NoiseResult> {
    if config.max_noise == 0 || config.trials == 0 {
        return Err(Error::InvalidParameter("max_noise and trials must both be at least 1".into()));
    }
    let params = HashParams::new(config.modulus, config.k, config.h, config.seed)?;
    let trials = par::map_range(exec, config.trials, |t| run_trial(config, &params, t))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for metric in NoiseMetric::ALL {
        let stats: Vec<(f64, f64)> = (0..=config.max_noise)
            .map(|c| mean_std(trials.iter().map(|t| t.curve(metric)[c])))
            .collect();
        let scale = stats.iter().map(|s| s.0).fold(0.0, f64::max);
        let scale = if scale > 0.0 { scale } else { 1.0 };
        rows.extend(stats.into_iter().enumerate().map(|(noise, (mean, std))| NoiseRow {
            noise,
            metric,
            mean: mean / scale,
            std: std / scale,
        }));
    }
    Ok(NoiseResult {
        config: config.clone(),
        trials,
        rows,
    })
}

/// Mean and population standard deviation.
fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut r = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // tied values share their average rank
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            r[o] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties. None when either
/// side is constant or the lengths differ.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let (mx, my) = (mean_std(rx.iter().copied()).0, mean_std(ry.iter().copied()).0);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
}

/// First index whose value reaches `fraction` of the curve's maximum.
pub fn saturation_index(curve: &[f64], fraction: f64) -> Option<usize> {
    let max = curve.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_nan() || max <= 0.0 {
        return None;
    }
    curve.iter().position(|&v| v >= fraction * max)
}
