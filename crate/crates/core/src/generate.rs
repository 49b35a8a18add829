//! Synthetic graphs and seeded edge noise.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi `G(n, p)`: every unordered pair is an edge independently
/// with probability `p`.
pub fn gen_random_graph(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidParameter("random graph needs at least one node".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::unlabeled(n, edges)
}

/// Cycle on `n` nodes. `n = 1` is a single node and `n = 2` a single edge,
/// since the graph is simple.
pub fn gen_cycle(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidParameter("cycle needs at least one node".into()));
    }
    let edges = (0..n).map(|i| (i, (i + 1) % n)).filter(|&(u, v)| u != v);
    Graph::unlabeled(n, edges)
}

/// `rows x cols` 4-neighbor lattice, nodes numbered row-major.
pub fn gen_grid(rows: usize, cols: usize) -> Result<Graph> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParameter("grid needs at least one row and column".into()));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    Graph::unlabeled(rows * cols, edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    /// Replace an edge `a-b` by `a-c`.
    Rewire,
    /// Insert an absent edge.
    Add,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub mode: NoiseMode,
    pub count: usize,
    pub seed: u64,
}

/// Applies `spec.count` seeded noise operations to a copy of `g`.
///
/// Operations are drawn from one random stream, so the graph produced with
/// `count = c` is the graph produced with `count = c - 1` plus one more
/// operation. Labels are carried along unchanged.
pub fn perturb(g: &Graph, spec: &NoiseSpec) -> Result<Graph> {
    let mut adj = matrix(g);
    let mut rng = rng(spec.seed);
    for index in 0..spec.count {
        noise_once(spec.mode, &mut adj, &mut rng, index)?;
    }
    from_matrix(g, &adj)
}

/// The graphs `perturb` yields for counts `0..=max_count`, in one pass.
pub fn perturb_sequence(g: &Graph, mode: NoiseMode, max_count: usize, seed: u64) -> Result<Vec<Graph>> {
    let mut adj = matrix(g);
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(max_count + 1);
    out.push(g.clone());
    for index in 0..max_count {
        noise_once(mode, &mut adj, &mut rng, index)?;
        out.push(from_matrix(g, &adj)?);
    }
    Ok(out)
}

fn matrix(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut adj = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        adj[u][v] = true;
        adj[v][u] = true;
    }
    adj
}

fn from_matrix(g: &Graph, adj: &[Vec<bool>]) -> Result<Graph> {
    let n = adj.len();
    let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|&(u, v)| adj[u][v]);
    Graph::from_edges(g.labels().to_vec(), edges.collect::<Vec<_>>())
}

fn noise_once(mode: NoiseMode, adj: &mut [Vec<bool>], rng: &mut ChaCha8Rng, index: usize) -> Result<()> {
    match mode {
        NoiseMode::Rewire => rewire_once(adj, rng, index),
        NoiseMode::Add => add_once(adj, rng, index),
    }
}

fn free_partners(adj: &[Vec<bool>], a: usize) -> Vec<usize> {
    (0..adj.len()).filter(|&c| c != a && !adj[a][c]).collect()
}

fn rewire_once(adj: &mut [Vec<bool>], rng: &mut ChaCha8Rng, index: usize) -> Result<()> {
    let n = adj.len();
    // An edge is rewirable through its lower endpoint when that endpoint has a
    // free partner, otherwise through its upper endpoint.
    let free: Vec<bool> = adj.iter().map(|row| row.iter().filter(|&&e| e).count() + 1 < n).collect();
    let mut candidates = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if !adj[u][v] {
                continue;
            }
            if free[u] {
                candidates.push((u, v));
            } else if free[v] {
                candidates.push((v, u));
            }
        }
    }
    let &(a, b) = candidates.choose(rng).ok_or(Error::NoiseExhausted {
        index,
        reason: "no edge can be rewired",
    })?;
    let partners = free_partners(adj, a);
    let c = *partners.choose(rng).expect("anchor has a free partner");
    adj[a][b] = false;
    adj[b][a] = false;
    adj[a][c] = true;
    adj[c][a] = true;
    Ok(())
}

fn add_once(adj: &mut [Vec<bool>], rng: &mut ChaCha8Rng, index: usize) -> Result<()> {
    let n = adj.len();
    let absent: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|&(u, v)| !adj[u][v])
        .collect();
    let &(u, v) = absent.choose(rng).ok_or(Error::NoiseExhausted {
        index,
        reason: "graph is complete",
    })?;
    adj[u][v] = true;
    adj[v][u] = true;
    Ok(())
}
