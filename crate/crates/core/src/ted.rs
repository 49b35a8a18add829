//! Exact unordered tree edit distance for tiny trees, used to check the L1
//! approximation against ground truth.

use crate::bocs::{l1_ted, BocsVector};
use crate::error::{Error, Result};
use crate::graph::Adjacency;
use crate::hash::{add_mod, mul_mod, HashParams, SubtreeKey};

/// Largest tree accepted by [`exact_ted`].
pub const EXACT_TED_LIMIT: usize = 8;

/// Rooted unordered labeled tree stored as a parent array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TinyTree {
    parent: Vec<Option<usize>>,
    labels: Vec<u64>,
    children: Vec<Vec<usize>>,
    root: usize,
}

impl TinyTree {
    pub fn new(parent: Vec<Option<usize>>, labels: Vec<u64>) -> Result<Self> {
        let n = parent.len();
        if n == 0 || labels.len() != n {
            return Err(Error::InvalidGraph("tree needs one label per node and at least one node".into()));
        }
        let roots: Vec<usize> = (0..n).filter(|&v| parent[v].is_none()).collect();
        let [root] = roots[..] else {
            return Err(Error::InvalidGraph(format!("tree has {} roots", roots.len())));
        };
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return Err(Error::InvalidGraph(format!("parent {p} of node {v} out of range")));
                }
                children[p].push(v);
            }
        }
        // every node must reach the root without revisiting
        for start in 0..n {
            let (mut v, mut steps) = (start, 0);
            while let Some(p) = parent[v] {
                v = p;
                steps += 1;
                if steps > n {
                    return Err(Error::InvalidGraph("parent array contains a cycle".into()));
                }
            }
        }
        Ok(Self {
            parent,
            labels,
            children,
            root,
        })
    }

    /// Materializes the height-`h` WL unfolding tree of `v`, or `None` when it
    /// would exceed `max_nodes` nodes.
    pub fn from_wl_unfolding<G: Adjacency + ?Sized>(g: &G, v: usize, h: usize, max_nodes: usize) -> Option<Self> {
        let mut parent = vec![None];
        let mut labels = vec![g.label(v)];
        let mut frontier = vec![(0usize, v)];
        for _ in 0..h {
            let mut next = Vec::new();
            for &(tree_node, graph_node) in &frontier {
                for i in 0..g.degree(graph_node) {
                    let u = g.neighbor(graph_node, i);
                    if parent.len() == max_nodes {
                        return None;
                    }
                    parent.push(Some(tree_node));
                    labels.push(g.label(u));
                    next.push((parent.len() - 1, u));
                }
            }
            frontier = next;
        }
        Self::new(parent, labels).ok()
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn label(&self, v: usize) -> u64 {
        self.labels[v]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Height of the complete subtree below every node.
    pub fn heights(&self) -> Vec<usize> {
        let mut height = vec![0; self.len()];
        for v in self.post_order() {
            height[v] = self.children[v].iter().map(|&c| height[c] + 1).max().unwrap_or(0);
        }
        height
    }

    fn post_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.len());
        let mut stack = vec![(self.root, false)];
        while let Some((v, expanded)) = stack.pop() {
            if expanded {
                order.push(v);
            } else {
                stack.push((v, true));
                stack.extend(self.children[v].iter().map(|&c| (c, false)));
            }
        }
        order
    }

    /// Bag of complete subtrees of this tree under `params`, hashing each
    /// node by the height of its own complete subtree.
    pub fn bocs(&self, params: &HashParams) -> Result<BocsVector> {
        let height = self.heights();
        if height[self.root] > params.iterations() {
            return Err(Error::InvalidParameter(format!(
                "tree of height {} needs parameters covering that many iterations",
                height[self.root]
            )));
        }
        let (k, m) = (params.slots(), params.modulus());
        let mut residues = vec![Vec::new(); self.len()];
        for v in self.post_order() {
            let label = self.labels[v] % m;
            residues[v] = if self.children[v].is_empty() {
                vec![label; k]
            } else {
                (0..k)
                    .map(|s| {
                        let (x, xp) = params.vars(s, height[v]);
                        self.children[v].iter().fold(add_mod(xp, label, m), |acc, &c| {
                            mul_mod(acc, add_mod(x, residues[c][s], m), m)
                        })
                    })
                    .collect()
            };
        }
        Ok(BocsVector::from_counts(
            params.id(),
            residues.into_iter().enumerate().map(|(v, r)| {
                (
                    SubtreeKey {
                        height: height[v] as u32,
                        residues: r.into(),
                    },
                    1,
                )
            }),
        ))
    }

    fn ancestor_masks(&self) -> Vec<u32> {
        (0..self.len())
            .map(|v| {
                let mut mask = 0u32;
                let mut cur = self.parent[v];
                while let Some(p) = cur {
                    mask |= 1 << p;
                    cur = self.parent[p];
                }
                mask
            })
            .collect()
    }
}

struct MappingSearch<'a> {
    t1: &'a TinyTree,
    t2: &'a TinyTree,
    anc1: Vec<u32>,
    anc2: Vec<u32>,
    /// image of each node of t1 already decided
    image: Vec<Option<usize>>,
    used: u32,
    best: usize,
}

impl MappingSearch<'_> {
    fn is_anc(masks: &[u32], a: usize, b: usize) -> bool {
        masks[b] & (1 << a) != 0
    }

    fn consistent(&self, b: usize, b2: usize) -> bool {
        (0..b).all(|a| match self.image[a] {
            None => true,
            Some(a2) => {
                Self::is_anc(&self.anc1, a, b) == Self::is_anc(&self.anc2, a2, b2)
                    && Self::is_anc(&self.anc1, b, a) == Self::is_anc(&self.anc2, b2, a2)
            }
        })
    }

    /// Assigns node `i` of t1; `cost` counts relabels and deletions so far.
    fn search(&mut self, i: usize, cost: usize, mapped: usize) {
        let n1 = self.t1.len();
        let n2 = self.t2.len();
        let left1 = n1 - i;
        let left2 = n2 - mapped;
        if cost + left1.abs_diff(left2) >= self.best {
            return;
        }
        if i == n1 {
            // unmapped nodes of t2 are insertions
            self.best = cost + (n2 - mapped);
            return;
        }
        for b2 in 0..n2 {
            if self.used & (1 << b2) != 0 || !self.consistent(i, b2) {
                continue;
            }
            let relabel = usize::from(self.t1.labels[i] != self.t2.labels[b2]);
            self.image[i] = Some(b2);
            self.used |= 1 << b2;
            self.search(i + 1, cost + relabel, mapped + 1);
            self.used &= !(1 << b2);
            self.image[i] = None;
        }
        self.search(i + 1, cost + 1, mapped);
    }
}

/// Unit-cost unordered tree edit distance (relabel, insert, delete), by
/// exhaustive search over ancestor-preserving one-to-one node mappings.
pub fn exact_ted(t1: &TinyTree, t2: &TinyTree) -> Result<usize> {
    for t in [t1, t2] {
        if t.len() > EXACT_TED_LIMIT {
            return Err(Error::TreeTooLarge {
                nodes: t.len(),
                limit: EXACT_TED_LIMIT,
            });
        }
    }
    let mut search = MappingSearch {
        t1,
        t2,
        anc1: t1.ancestor_masks(),
        anc2: t2.ancestor_masks(),
        image: vec![None; t1.len()],
        used: 0,
        best: t1.len() + t2.len() + 1,
    };
    search.search(0, 0, 0);
    Ok(search.best)
}

/// Both sides of the sandwich `d_phi / (2h + 2) <= d_TED <= d_phi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TedBound {
    pub l1: u64,
    pub exact: u64,
    pub height: usize,
}

impl TedBound {
    pub fn holds(&self) -> bool {
        self.l1 <= (2 * self.height as u64 + 2) * self.exact && self.exact <= self.l1
    }
}

pub fn ted_bound(t1: &TinyTree, t2: &TinyTree, h: usize, params: &HashParams) -> Result<TedBound> {
    let l1 = l1_ted(&t1.bocs(params)?, &t2.bocs(params)?)?;
    let exact = exact_ted(t1, t2)? as u64;
    Ok(TedBound { l1, exact, height: h })
}

/// Whether the L1 approximation brackets the exact edit distance.
pub fn check_ted_bound(t1: &TinyTree, t2: &TinyTree, h: usize, params: &HashParams) -> Result<bool> {
    Ok(ted_bound(t1, t2, h, params)?.holds())
}
