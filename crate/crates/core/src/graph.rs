//! Undirected node-labeled graphs.

use crate::error::{Error, Result};

/// Undirected simple graph with a nonnegative integer label per node.
///
/// Neighbor lists are kept sorted and symmetric; there are no self-loops and
/// no parallel edges. Once built a `Graph` is never mutated in place.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    labels: Vec<u64>,
}

impl Graph {
    /// Graph with the given labels and no edges.
    pub fn empty(labels: Vec<u64>) -> Self {
        Self {
            adjacency: vec![Vec::new(); labels.len()],
            labels,
        }
    }

    /// Builds a graph from an undirected edge list.
    ///
    /// Repeated edges (in either orientation) are merged. Self-loops and
    /// endpoints outside `0..labels.len()` are rejected.
    pub fn from_edges<I>(labels: Vec<u64>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let n = labels.len();
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop on node {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { adjacency, labels })
    }

    /// Unlabeled (all zero) graph from an edge list.
    pub fn unlabeled<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_edges(vec![0; node_count], edges)
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn label(&self, v: usize) -> u64 {
        self.labels[v]
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Same structure with new labels.
    pub fn with_labels(&self, labels: Vec<u64>) -> Result<Self> {
        if labels.len() != self.node_count() {
            return Err(Error::SizeMismatch(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.node_count()
            )));
        }
        Ok(Self {
            adjacency: self.adjacency.clone(),
            labels,
        })
    }

    /// Relabels node indices: node `v` of `self` becomes node `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidParameter("not a permutation of the node set".into()));
        }
        let mut labels = vec![0; n];
        for (v, &p) in perm.iter().enumerate() {
            labels[p] = self.labels[v];
        }
        Self::from_edges(labels, self.edges().map(|(u, v)| (perm[u], perm[v])))
    }

    /// Reverses every neighbor list. Only useful for checking that downstream
    /// code does not depend on neighbor order.
    pub fn with_reversed_neighbor_order(&self) -> ReversedNeighbors<'_> {
        ReversedNeighbors(self)
    }
}

/// Read-only view of a graph that yields neighbors in descending order.
pub struct ReversedNeighbors<'a>(&'a Graph);

impl Adjacency for ReversedNeighbors<'_> {
    fn node_count(&self) -> usize {
        self.0.node_count()
    }
    fn label(&self, v: usize) -> u64 {
        self.0.label(v)
    }
    fn degree(&self, v: usize) -> usize {
        self.0.degree(v)
    }
    fn neighbor(&self, v: usize, i: usize) -> usize {
        let list = self.0.neighbors(v);
        list[list.len() - 1 - i]
    }
}

/// Minimal read access needed by the subtree traversals.
pub trait Adjacency {
    fn node_count(&self) -> usize;
    fn label(&self, v: usize) -> u64;
    fn degree(&self, v: usize) -> usize;
    /// The `i`-th neighbor of `v`, `i < degree(v)`.
    fn neighbor(&self, v: usize, i: usize) -> usize;
}

impl Adjacency for Graph {
    fn node_count(&self) -> usize {
        Graph::node_count(self)
    }
    fn label(&self, v: usize) -> u64 {
        Graph::label(self, v)
    }
    fn degree(&self, v: usize) -> usize {
        Graph::degree(self, v)
    }
    fn neighbor(&self, v: usize, i: usize) -> usize {
        self.adjacency[v][i]
    }
}

/// A named collection of graphs with one class label per graph.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    graphs: Vec<Graph>,
    class_labels: Vec<i64>,
}

impl LabeledDataset {
    pub fn new(name: impl Into<String>, graphs: Vec<Graph>, class_labels: Vec<i64>) -> Result<Self> {
        if graphs.len() != class_labels.len() {
            return Err(Error::SizeMismatch(format!(
                "{} graphs but {} class labels",
                graphs.len(),
                class_labels.len()
            )));
        }
        Ok(Self {
            name: name.into(),
            graphs,
            class_labels,
        })
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn class_labels(&self) -> &[i64] {
        &self.class_labels
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Distinct class labels in ascending order.
    pub fn classes(&self) -> Vec<i64> {
        let mut c = self.class_labels.clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// Applies [`assign_degree_labels`] to every graph.
    pub fn degree_labeled(&self) -> Self {
        Self {
            name: self.name.clone(),
            graphs: self.graphs.iter().map(assign_degree_labels).collect(),
            class_labels: self.class_labels.clone(),
        }
    }

    pub fn total_nodes(&self) -> usize {
        self.graphs.iter().map(Graph::node_count).sum()
    }
}

/// Replaces every label by the node's degree.
pub fn assign_degree_labels(g: &Graph) -> Graph {
    let labels = (0..g.node_count()).map(|v| g.degree(v) as u64).collect();
    Graph {
        adjacency: g.adjacency.clone(),
        labels,
    }
}

/// Frobenius norm of `L(g1) - L(g2)` with `L = D - A`, using node indices as
/// the alignment between the two graphs.
pub fn laplacian_frobenius(g1: &Graph, g2: &Graph) -> Result<f64> {
    if g1.node_count() != g2.node_count() {
        return Err(Error::SizeMismatch(format!(
            "laplacians of {} and {} nodes",
            g1.node_count(),
            g2.node_count()
        )));
    }
    let mut sum = 0.0f64;
    for v in 0..g1.node_count() {
        let dd = g1.degree(v) as f64 - g2.degree(v) as f64;
        sum += dd * dd;
        // symmetric difference of the neighbor sets, each off-diagonal entry is +-1
        let (a, b) = (g1.neighbors(v), g2.neighbors(v));
        let (mut i, mut j, mut diff) = (0, 0, 0usize);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    diff += 1;
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    diff += 1;
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        diff += (a.len() - i) + (b.len() - j);
        sum += diff as f64;
    }
    Ok(sum.sqrt())
}
