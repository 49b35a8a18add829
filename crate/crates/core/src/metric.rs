//! WWLS distance and kernel, pairwise dataset matrices, the categorical WWL
//! baseline and a leave-one-out nearest-neighbor check.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::bocs::{l1_unchecked, BocsVector};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hash::{HashParams, ParamsId, RootHashTable, SubtreeKey, WlRelabeler};
use crate::ot::{emd_uniform_int, sinkhorn, CostMatrix, Histogram, SinkhornOptions};
use crate::par::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Solver {
    #[default]
    Exact,
    Sinkhorn(SinkhornOptions),
}

/// Bag-of-complete-subtree vector of every node's WL subtree.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphEmbedding {
    params: ParamsId,
    nodes: Vec<BocsVector>,
}

impl GraphEmbedding {
    /// The WL subtree of `v` holds one copy of `T(u)` at height `h - d` for
    /// every walk of length `d` from `v` to `u`, so the bag follows from walk
    /// counts and root hashes without expanding the tree.
    pub fn new(g: &Graph, params: &HashParams) -> Result<Self> {
        let h = params.iterations();
        let table = RootHashTable::build(g, params, h)?;
        let n = g.node_count();
        let nodes = (0..n)
            .map(|v| {
                let mut counts: BTreeMap<SubtreeKey, u64> = BTreeMap::new();
                let mut walks = vec![0u64; n];
                walks[v] = 1;
                for depth in 0..=h {
                    for (u, &w) in walks.iter().enumerate() {
                        if w > 0 {
                            *counts.entry(table.key(u, h - depth)).or_insert(0) += w;
                        }
                    }
                    if depth == h {
                        break;
                    }
                    let mut next = vec![0u64; n];
                    for (u, &w) in walks.iter().enumerate() {
                        if w > 0 {
                            for &x in g.neighbors(u) {
                                next[x] += w;
                            }
                        }
                    }
                    walks = next;
                }
                counts
                    .into_iter()
                    .map(|(k, c)| {
                        u32::try_from(c)
                            .map(|c| (k, c))
                            .map_err(|_| Error::InvalidParameter(format!("WL subtree of node {v} is too large to count")))
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(|entries| BocsVector::from_counts(params.id(), entries))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params: params.id(),
            nodes,
        })
    }

    pub fn params(&self) -> ParamsId {
        self.params
    }

    pub fn nodes(&self) -> &[BocsVector] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// L1 ground distances between the nodes of two graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundMatrix {
    pub params: ParamsId,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<u64>,
}

impl GroundMatrix {
    pub fn new(e1: &GraphEmbedding, e2: &GraphEmbedding) -> Result<Self> {
        if e1.params != e2.params {
            return Err(Error::ParamsMismatch);
        }
        let mut entries = Vec::with_capacity(e1.len() * e2.len());
        for a in &e1.nodes {
            for b in &e2.nodes {
                entries.push(l1_unchecked(a.entries(), b.entries()));
            }
        }
        Ok(Self {
            params: e1.params,
            rows: e1.len(),
            cols: e2.len(),
            entries,
        })
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.cols + j]
    }
}

fn uniform_transport(rows: usize, cols: usize, costs: &[u64], solver: &Solver) -> Result<f64> {
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyGraph);
    }
    match solver {
        Solver::Exact => {
            let costs: Vec<i64> = costs
                .iter()
                .map(|&c| i64::try_from(c).map_err(|_| Error::InvalidParameter(format!("ground cost {c} overflows"))))
                .collect::<Result<_>>()?;
            Ok(emd_uniform_int(rows, cols, &costs)?.1)
        }
        Solver::Sinkhorn(options) => {
            let c = CostMatrix::new(rows, cols, costs.iter().map(|&c| c as f64).collect())?;
            let r = sinkhorn(&Histogram::uniform(rows)?, &Histogram::uniform(cols)?, &c, options)?;
            Ok(r.plan.cost)
        }
    }
}

/// WWLS distance between two embedded graphs.
pub fn embedded_distance(e1: &GraphEmbedding, e2: &GraphEmbedding, solver: &Solver) -> Result<f64> {
    if e1.is_empty() || e2.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let ground = GroundMatrix::new(e1, e2)?;
    uniform_transport(ground.rows, ground.cols, &ground.entries, solver)
}

/// 1-Wasserstein distance between the uniform node distributions of `g1`
/// and `g2` under the L1 distance of their nodes' subtree bags. With the
/// Sinkhorn solver a non-converged plan is still used.
pub fn wwls_distance(g1: &Graph, g2: &Graph, params: &HashParams, solver: &Solver) -> Result<f64> {
    if g1.is_empty() || g2.is_empty() {
        return Err(Error::EmptyGraph);
    }
    embedded_distance(&GraphEmbedding::new(g1, params)?, &GraphEmbedding::new(g2, params)?, solver)
}

/// WWL distance with categorical WL features: the ground distance is the
/// fraction of the `h + 1` WL labels that differ.
pub fn wwl_baseline_distance(g1: &Graph, g2: &Graph, h: usize) -> Result<f64> {
    if g1.is_empty() || g2.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut relabeler = WlRelabeler::new();
    let f1 = relabeler.relabel(g1, h);
    let f2 = relabeler.relabel(g2, h);
    let mut costs = Vec::with_capacity(f1.len() * f2.len());
    for a in &f1 {
        for b in &f2 {
            costs.push(a.iter().zip(b).filter(|(x, y)| x != y).count() as u64);
        }
    }
    Ok(uniform_transport(f1.len(), f2.len(), &costs, &Solver::Exact)? / (h + 1) as f64)
}

pub fn kernel_from_distance(distance: f64, gamma: f64) -> f64 {
    (-gamma * distance).exp()
}

/// `exp(-gamma * wwls_distance)` with the exact solver.
pub fn kernel_value(g1: &Graph, g2: &Graph, params: &HashParams, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(kernel_from_distance(wwls_distance(g1, g2, params, &Solver::Exact)?, gamma))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MatrixMode {
    Distance,
    Kernel { gamma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixMetadata {
    pub h: usize,
    pub k: usize,
    pub modulus: u64,
    pub seed: u64,
    pub mode: MatrixMode,
    pub solver: Solver,
}

/// Symmetric `n x n` matrix of distances or kernel values, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseMatrix {
    pub n: usize,
    pub values: Vec<f64>,
    pub metadata: MatrixMetadata,
}

impl PairwiseMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.n.max(1))
    }
}

/// All pairwise WWLS distances (or kernel values) of `graphs`. Embeddings
/// are built once per graph; each unordered pair is solved once and written
/// to both halves.
pub fn pairwise_matrix(
    graphs: &[Graph],
    params: &HashParams,
    mode: MatrixMode,
    solver: &Solver,
    exec: Execution,
) -> Result<PairwiseMatrix> {
    if graphs.is_empty() {
        return Err(Error::InvalidParameter("dataset has no graphs".into()));
    }
    if let MatrixMode::Kernel { gamma } = mode {
        check_gamma(gamma)?;
    }
    if let Some(i) = graphs.iter().position(Graph::is_empty) {
        return Err(Error::Pair {
            i,
            j: i,
            source: Box::new(Error::EmptyGraph),
        });
    }
    let embeddings = par::map_with(exec, graphs, |g| GraphEmbedding::new(g, params))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let n = graphs.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let solved = par::map_with(exec, &pairs, |&(i, j)| {
        embedded_distance(&embeddings[i], &embeddings[j], solver).map_err(|e| Error::Pair {
            i,
            j,
            source: Box::new(e),
        })
    });

    let transform = |d: f64| match mode {
        MatrixMode::Distance => d,
        MatrixMode::Kernel { gamma } => kernel_from_distance(d, gamma),
    };
    let mut values = vec![transform(0.0); n * n];
    for (&(i, j), d) in pairs.iter().zip(solved) {
        let v = transform(d?);
        values[i * n + j] = v;
        values[j * n + i] = v;
    }
    Ok(PairwiseMatrix {
        n,
        values,
        metadata: MatrixMetadata {
            h: params.iterations(),
            k: params.slots(),
            modulus: params.modulus(),
            seed: params.seed(),
            mode,
            solver: *solver,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnnReport {
    pub k_neighbors: usize,
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    pub classes: Vec<i64>,
    /// `confusion[true][predicted]`, indexed like `classes`
    pub confusion: Vec<Vec<usize>>,
    pub majority_rate: f64,
}

/// Leave-one-out k-nearest-neighbor classification on a distance matrix.
/// Votes are tied by smallest mean distance, then by lowest class id.
pub fn knn_eval(matrix: &PairwiseMatrix, labels: &[i64], k_neighbors: usize) -> Result<KnnReport> {
    if matrix.metadata.mode != MatrixMode::Distance {
        return Err(Error::InvalidParameter("nearest neighbors need a distance matrix".into()));
    }
    let n = matrix.n;
    if labels.len() != n {
        return Err(Error::SizeMismatch(format!("{} labels for a {n}x{n} matrix", labels.len())));
    }
    if k_neighbors == 0 || k_neighbors >= n {
        return Err(Error::InvalidParameter(format!(
            "k_neighbors must lie in 1..{n}, got {k_neighbors}"
        )));
    }
    let mut classes = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let index = |c: i64| classes.binary_search(&c).expect("label is listed");
    let mut confusion = vec![vec![0; classes.len()]; classes.len()];
    let mut correct = 0;
    for i in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| matrix.get(i, a).total_cmp(&matrix.get(i, b)).then(a.cmp(&b)));
        let mut votes: BTreeMap<i64, (usize, f64)> = BTreeMap::new();
        for &j in &others[..k_neighbors] {
            let e = votes.entry(labels[j]).or_insert((0, 0.0));
            e.0 += 1;
            e.1 += matrix.get(i, j);
        }
        // BTreeMap order makes the lowest class win remaining ties
        let mut best: Option<(i64, usize, f64)> = None;
        for (&class, &(count, sum)) in &votes {
            let mean = sum / count as f64;
            let better = match best {
                None => true,
                Some((_, bc, bm)) => count > bc || (count == bc && mean < bm),
            };
            if better {
                best = Some((class, count, mean));
            }
        }
        let predicted = best.expect("at least one neighbor").0;
        confusion[index(labels[i])][index(predicted)] += 1;
        if predicted == labels[i] {
            correct += 1;
        }
    }
    let majority = classes
        .iter()
        .map(|&c| labels.iter().filter(|&&l| l == c).count())
        .max()
        .unwrap_or(0);
    Ok(KnnReport {
        k_neighbors,
        accuracy: correct as f64 / n as f64,
        correct,
        total: n,
        classes,
        confusion,
        majority_rate: majority as f64 / n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bocs::bocs_from_multiset;
    use crate::generate::{gen_cycle, gen_grid, gen_random_graph, rng};
    use crate::hash::{node_subtree_hashes, DEFAULT_MODULUS};
    use rand::seq::SliceRandom;

    fn params(h: usize) -> HashParams {
        HashParams::new(DEFAULT_MODULUS, 2, h, 7).unwrap()
    }

    fn labeled_random(n: usize, p: f64, seed: u64) -> Graph {
        let g = gen_random_graph(n, p, seed).unwrap();
        let labels = (0..n as u64).map(|v| (v * 7 + seed) % 3).collect();
        g.with_labels(labels).unwrap()
    }

    #[test]
    fn embedding_matches_tree_traversal() {
        for seed in 0..5 {
            let g = labeled_random(9, 0.3, seed);
            for h in 0..4 {
                let p = params(h);
                let e = GraphEmbedding::new(&g, &p).unwrap();
                for v in 0..g.node_count() {
                    let dfs = bocs_from_multiset(&node_subtree_hashes(&g, v, &p).unwrap());
                    assert_eq!(e.nodes()[v], dfs, "seed {seed} h {h} node {v}");
                }
            }
        }
    }

    #[test]
    fn identical_and_permuted_graphs() {
        let p = params(2);
        let g = labeled_random(20, 0.2, 3);
        assert_eq!(wwls_distance(&g, &g, &p, &Solver::Exact).unwrap(), 0.0);
        let mut perm: Vec<usize> = (0..20).collect();
        perm.shuffle(&mut rng(4));
        let pg = g.permuted(&perm).unwrap();
        assert_eq!(wwls_distance(&g, &pg, &p, &Solver::Exact).unwrap(), 0.0);
        assert_eq!(kernel_value(&g, &pg, &p, 0.3).unwrap(), 1.0);
    }

    #[test]
    fn single_nodes() {
        let p = params(0);
        let a = Graph::from_edges(vec![1], []).unwrap();
        let b = Graph::from_edges(vec![2], []).unwrap();
        assert_eq!(wwls_distance(&a, &b, &p, &Solver::Exact).unwrap(), 2.0);
        assert!((kernel_value(&a, &b, &p, 0.5).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        for h in 0..4 {
            assert_eq!(wwl_baseline_distance(&a, &b, h).unwrap(), 1.0);
            assert_eq!(wwl_baseline_distance(&a, &a, h).unwrap(), 0.0);
        }
    }

    #[test]
    fn errors() {
        let p = params(1);
        let empty = Graph::empty(vec![]);
        let g = gen_cycle(4).unwrap();
        assert!(matches!(wwls_distance(&empty, &g, &p, &Solver::Exact), Err(Error::EmptyGraph)));
        assert!(matches!(wwl_baseline_distance(&g, &empty, 1), Err(Error::EmptyGraph)));
        assert!(kernel_value(&g, &g, &p, 0.0).is_err());
        assert!(kernel_value(&g, &g, &p, -1.0).is_err());
        let other = HashParams::new(DEFAULT_MODULUS, 2, 1, 8).unwrap();
        let e1 = GraphEmbedding::new(&g, &p).unwrap();
        let e2 = GraphEmbedding::new(&g, &other).unwrap();
        assert!(matches!(embedded_distance(&e1, &e2, &Solver::Exact), Err(Error::ParamsMismatch)));
        let err = pairwise_matrix(&[g.clone(), empty], &p, MatrixMode::Distance, &Solver::Exact, Execution::Sequential);
        assert!(matches!(err, Err(Error::Pair { i: 1, .. })));
        assert!(pairwise_matrix(&[], &p, MatrixMode::Distance, &Solver::Exact, Execution::Sequential).is_err());
    }

    #[test]
    fn ground_matrix_transposes() {
        let p = params(2);
        let e1 = GraphEmbedding::new(&labeled_random(6, 0.4, 1), &p).unwrap();
        let e2 = GraphEmbedding::new(&labeled_random(8, 0.4, 2), &p).unwrap();
        let a = GroundMatrix::new(&e1, &e2).unwrap();
        let b = GroundMatrix::new(&e2, &e1).unwrap();
        for i in 0..a.rows {
            for j in 0..a.cols {
                assert_eq!(a.get(i, j), b.get(j, i));
            }
        }
    }

    #[test]
    fn sinkhorn_tracks_exact() {
        let p = params(2);
        let solver = Solver::Sinkhorn(SinkhornOptions::with_epsilon(1e-3));
        for seed in 0..4 {
            let g1 = labeled_random(12, 0.25, seed);
            let g2 = labeled_random(10, 0.3, seed + 100);
            let exact = wwls_distance(&g1, &g2, &p, &Solver::Exact).unwrap();
            let approx = wwls_distance(&g1, &g2, &p, &solver).unwrap();
            assert!((approx - exact).abs() / exact.max(1.0) < 0.02, "{approx} vs {exact}");
        }
    }

    #[test]
    fn matrices() {
        let p = params(1);
        let graphs: Vec<Graph> = (0..6).map(|s| labeled_random(7, 0.35, s)).collect();
        let d = pairwise_matrix(&graphs, &p, MatrixMode::Distance, &Solver::Exact, Execution::Sequential).unwrap();
        let dp = pairwise_matrix(&graphs, &p, MatrixMode::Distance, &Solver::Exact, Execution::Parallel).unwrap();
        assert_eq!(d, dp);
        let kernel = MatrixMode::Kernel { gamma: 0.1 };
        let k = pairwise_matrix(&graphs, &p, kernel, &Solver::Exact, Execution::Sequential).unwrap();
        for i in 0..6 {
            assert_eq!(d.get(i, i), 0.0);
            assert_eq!(k.get(i, i), 1.0);
            for j in 0..6 {
                assert_eq!(d.get(i, j), d.get(j, i));
                assert_eq!(k.get(i, j), (-0.1 * d.get(i, j)).exp());
                assert!(k.get(i, j) > 0.0 && k.get(i, j) <= 1.0);
            }
        }
        let single = pairwise_matrix(&graphs[..1], &p, kernel, &Solver::Exact, Execution::Sequential).unwrap();
        assert_eq!(single.values, vec![1.0]);
        assert!(pairwise_matrix(&graphs, &p, MatrixMode::Kernel { gamma: 0.0 }, &Solver::Exact, Execution::Sequential).is_err());
    }

    fn matrix_from(n: usize, f: impl Fn(usize, usize) -> f64) -> PairwiseMatrix {
        PairwiseMatrix {
            n,
            values: (0..n * n).map(|x| f(x / n, x % n)).collect(),
            metadata: MatrixMetadata {
                h: 0,
                k: 1,
                modulus: DEFAULT_MODULUS,
                seed: 0,
                mode: MatrixMode::Distance,
                solver: Solver::Exact,
            },
        }
    }

    #[test]
    fn knn_on_clusters() {
        // two cycles and two grids of varying size
        let p = params(2);
        let graphs = vec![
            gen_cycle(6).unwrap(),
            gen_cycle(8).unwrap(),
            gen_cycle(10).unwrap(),
            gen_grid(3, 3).unwrap(),
            gen_grid(3, 4).unwrap(),
            gen_grid(4, 4).unwrap(),
        ];
        let m = pairwise_matrix(&graphs, &p, MatrixMode::Distance, &Solver::Exact, Execution::Sequential).unwrap();
        let r = knn_eval(&m, &[0, 0, 0, 1, 1, 1], 1).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.confusion, vec![vec![3, 0], vec![0, 3]]);
        assert_eq!(r.majority_rate, 0.5);
    }

    #[test]
    fn knn_tie_breaks() {
        // node 0 sees one neighbor of class 5 at distance 1 and one of class 3 at distance 2
        let m = matrix_from(3, |i, j| match (i.min(j), i.max(j)) {
            (a, b) if a == b => 0.0,
            (0, 1) => 1.0,
            (0, 2) => 2.0,
            _ => 3.0,
        });
        let r = knn_eval(&m, &[3, 5, 3], 2).unwrap();
        // node 0: votes 5 (mean 1) vs 3 (mean 2) -> 5, wrong
        assert_eq!(r.confusion[0][1], 1);
        // equal distances fall to the lowest class
        let flat = matrix_from(3, |i, j| if i == j { 0.0 } else { 1.0 });
        let r = knn_eval(&flat, &[7, 2, 9], 2).unwrap();
        assert_eq!(r.correct, 0);
        assert_eq!(r.confusion[0][0], 0);
        assert!(knn_eval(&flat, &[1, 2, 3], 3).is_err());
        assert!(knn_eval(&flat, &[1, 2], 1).is_err());
    }

    #[test]
    fn knn_null_model() {
        // shuffled labels on a random distance matrix hover around the prior
        let n = 60;
        let mut r = rng(1);
        use rand::Rng;
        let base: Vec<f64> = (0..n * n).map(|_| r.random::<f64>()).collect();
        let m = matrix_from(n, |i, j| if i == j { 0.0 } else { base[i.min(j) * n + i.max(j)] });
        let mut labels: Vec<i64> = (0..n as i64).map(|i| i % 2).collect();
        let mut total = 0.0;
        for _ in 0..10 {
            labels.shuffle(&mut r);
            total += knn_eval(&m, &labels, 1).unwrap().accuracy;
        }
        assert!((total / 10.0 - 0.5).abs() < 0.15);
    }
}
