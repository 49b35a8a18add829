//! Complete-subtree hashing of Weisfeiler–Lehman unfolding trees.
//!
//! The WL subtree `T(v)` of height `h` is the rooted unfolding of the graph
//! around `v` in which every tree node expands into *all* graph neighbors,
//! including the one it was reached from. Each complete subtree `t(u)` of
//! `T(v)` is identified by a polynomial evaluated at random points of `Z/MZ`:
//!
//! ```text
//! p(u) = label(u)                                         if t(u) is a single node
//! p(u) = (x'_eta + label(u)) * prod_children (x_eta + p(c))   otherwise
//! ```
//!
//! where `eta` is the height of `t(u)`. The product commutes, so sibling order
//! is irrelevant, and distinct complete subtrees collide only with
//! probability bounded by their leaf counts over `M`. Using `k` independent
//! variable draws ("slots") drives the collision probability down to the
//! `k`-th power.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Adjacency, Graph, LabeledDataset};
use crate::par;

/// Default modulus, `10^9 + 7`.
pub const DEFAULT_MODULUS: u64 = 1_000_000_007;

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub(crate) fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Identity of a parameter set, carried by derived vectors so that values
/// built under different parameters are never mixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParamsId {
    pub modulus: u64,
    pub slots: usize,
    pub iterations: usize,
    pub seed: u64,
}

/// Modulus, slot count, WL iteration count and the random evaluation points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashParams {
    id: ParamsId,
    /// `(x, x')` for slot `s` and height `eta` at `s * iterations + eta - 1`.
    vars: Vec<(u64, u64)>,
}

impl HashParams {
    pub fn new(modulus: u64, slots: usize, iterations: usize, seed: u64) -> Result<Self> {
        if !is_prime(modulus) {
            return Err(Error::NotPrime(modulus));
        }
        if slots == 0 {
            return Err(Error::InvalidParameter("at least one hash slot is required".into()));
        }
        use rand::Rng;
        let mut rng = crate::generate::rng(seed);
        let vars = (0..slots * iterations)
            .map(|_| (rng.random_range(0..modulus), rng.random_range(0..modulus)))
            .collect();
        Ok(Self {
            id: ParamsId {
                modulus,
                slots,
                iterations,
                seed,
            },
            vars,
        })
    }

    pub fn id(&self) -> ParamsId {
        self.id
    }

    pub fn modulus(&self) -> u64 {
        self.id.modulus
    }

    pub fn slots(&self) -> usize {
        self.id.slots
    }

    pub fn iterations(&self) -> usize {
        self.id.iterations
    }

    pub fn seed(&self) -> u64 {
        self.id.seed
    }

    /// Evaluation points `(x, x')` used for subtrees of height `height >= 1`.
    pub fn vars(&self, slot: usize, height: usize) -> (u64, u64) {
        assert!(height >= 1 && height <= self.id.iterations && slot < self.id.slots);
        self.vars[slot * self.id.iterations + height - 1]
    }

    /// All variable pairs, slot-major.
    pub fn all_vars(&self) -> &[(u64, u64)] {
        &self.vars
    }
}

/// Hash identity of one complete-subtree type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubtreeKey {
    pub height: u32,
    pub residues: Box<[u64]>,
}

/// Multiset of complete-subtree keys of one WL subtree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubtreeMultiset {
    pub params: ParamsId,
    pub counts: BTreeMap<SubtreeKey, u32>,
}

impl SubtreeMultiset {
    /// Number of complete subtrees, i.e. nodes of the WL subtree.
    pub fn total(&self) -> u64 {
        self.counts.values().map(|&c| c as u64).sum()
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }
}

/// Residues of one complete subtree, computed bottom-up during the DFS.
struct Visit<'a, G: ?Sized> {
    g: &'a G,
    params: &'a HashParams,
    height: usize,
    counts: BTreeMap<SubtreeKey, u32>,
}

impl<G: Adjacency + ?Sized> Visit<'_, G> {
    fn leaf(&self, u: usize) -> Vec<u64> {
        vec![self.g.label(u) % self.params.modulus(); self.params.slots()]
    }

    fn visit(&mut self, u: usize, depth: usize) -> Vec<u64> {
        let eta = self.height - depth;
        let degree = self.g.degree(u);
        let (residues, subtree_height) = if eta == 0 || degree == 0 {
            (self.leaf(u), 0)
        } else {
            let m = self.params.modulus();
            let label = self.g.label(u) % m;
            let mut acc: Vec<u64> = (0..self.params.slots())
                .map(|s| add_mod(self.params.vars(s, eta).1, label, m))
                .collect();
            for i in 0..degree {
                let child = self.visit(self.g.neighbor(u, i), depth + 1);
                for (s, (a, c)) in acc.iter_mut().zip(child).enumerate() {
                    let x = self.params.vars(s, eta).0;
                    *a = mul_mod(*a, add_mod(x, c, m), m);
                }
            }
            (acc, eta)
        };
        let key = SubtreeKey {
            height: subtree_height as u32,
            residues: residues.clone().into_boxed_slice(),
        };
        *self.counts.entry(key).or_insert(0) += 1;
        residues
    }
}

/// Hashes every complete subtree of the height-`params.iterations()` WL
/// subtree rooted at `v` in one post-order DFS.
pub fn node_subtree_hashes<G: Adjacency + ?Sized>(
    g: &G,
    v: usize,
    params: &HashParams,
) -> Result<SubtreeMultiset> {
    node_subtree_hashes_at(g, v, params, params.iterations())
}

/// As [`node_subtree_hashes`] but for a WL subtree of height
/// `height <= params.iterations()`.
pub fn node_subtree_hashes_at<G: Adjacency + ?Sized>(
    g: &G,
    v: usize,
    params: &HashParams,
    height: usize,
) -> Result<SubtreeMultiset> {
    if v >= g.node_count() {
        return Err(Error::InvalidParameter(format!(
            "node {v} outside a graph of {} nodes",
            g.node_count()
        )));
    }
    if height > params.iterations() {
        return Err(Error::InvalidParameter(format!(
            "height {height} exceeds the {} iterations the parameters cover",
            params.iterations()
        )));
    }
    let mut visit = Visit {
        g,
        params,
        height,
        counts: BTreeMap::new(),
    };
    visit.visit(v, 0);
    Ok(SubtreeMultiset {
        params: params.id(),
        counts: visit.counts,
    })
}

/// Root residues of `T(u)` for every node `u` and every height `0..=max_height`.
///
/// `p(u)` at height `eta` depends only on `u` and `eta`, so one sweep per
/// height over the edges yields the same root values as a DFS from each node.
#[derive(Debug, Clone)]
pub struct RootHashTable {
    slots: usize,
    /// `levels[eta][u * slots + s]`
    levels: Vec<Vec<u64>>,
    /// nodes without neighbors keep the leaf key at every height
    isolated: Vec<bool>,
}

impl RootHashTable {
    pub fn build(g: &Graph, params: &HashParams, max_height: usize) -> Result<Self> {
        if max_height > params.iterations() {
            return Err(Error::InvalidParameter(format!(
                "height {max_height} exceeds the {} iterations the parameters cover",
                params.iterations()
            )));
        }
        let (n, k, m) = (g.node_count(), params.slots(), params.modulus());
        let mut levels = Vec::with_capacity(max_height + 1);
        levels.push(
            (0..n)
                .flat_map(|u| std::iter::repeat_n(g.label(u) % m, k))
                .collect::<Vec<_>>(),
        );
        for eta in 1..=max_height {
            let prev = &levels[eta - 1];
            let mut cur = Vec::with_capacity(n * k);
            for u in 0..n {
                let label = g.label(u) % m;
                for s in 0..k {
                    if g.degree(u) == 0 {
                        cur.push(label);
                        continue;
                    }
                    let (x, xp) = params.vars(s, eta);
                    let mut acc = add_mod(xp, label, m);
                    for &w in g.neighbors(u) {
                        acc = mul_mod(acc, add_mod(x, prev[w * k + s], m), m);
                    }
                    cur.push(acc);
                }
            }
            levels.push(cur);
        }
        Ok(Self {
            slots: k,
            levels,
            isolated: (0..n).map(|u| g.degree(u) == 0).collect(),
        })
    }

    pub fn max_height(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn residues(&self, u: usize, height: usize) -> &[u64] {
        &self.levels[height][u * self.slots..(u + 1) * self.slots]
    }

    pub fn key(&self, u: usize, height: usize) -> SubtreeKey {
        SubtreeKey {
            height: if self.isolated[u] { 0 } else { height as u32 },
            residues: self.residues(u, height).into(),
        }
    }
}

fn canonical_visit<G: Adjacency + ?Sized>(
    g: &G,
    u: usize,
    remaining: usize,
    out: &mut BTreeMap<String, u32>,
) -> String {
    let mut children: Vec<String> = if remaining == 0 {
        Vec::new()
    } else {
        (0..g.degree(u))
            .map(|i| canonical_visit(g, g.neighbor(u, i), remaining - 1, out))
            .collect()
    };
    children.sort_unstable();
    let code = if children.is_empty() {
        format!("({})", g.label(u))
    } else {
        format!("({}|{})", g.label(u), children.concat())
    };
    *out.entry(code.clone()).or_insert(0) += 1;
    code
}

/// Collision-free encodings of every complete subtree of `T(v)` at height
/// `height`: `(label)` for a single node, `(label|c1c2...)` with the child
/// encodings sorted lexicographically otherwise. Two complete subtrees are
/// isomorphic exactly when their encodings are equal.
pub fn canonical_subtree_encodings<G: Adjacency + ?Sized>(
    g: &G,
    v: usize,
    height: usize,
) -> Result<BTreeMap<String, u32>> {
    if v >= g.node_count() {
        return Err(Error::InvalidParameter(format!(
            "node {v} outside a graph of {} nodes",
            g.node_count()
        )));
    }
    let mut out = BTreeMap::new();
    canonical_visit(g, v, height, &mut out);
    Ok(out)
}

/// Interns rooted unordered labeled trees as small integers: a tree is the
/// pair (root label, sorted ids of its child trees). Equal ids mean
/// isomorphic trees, with no probability of error.
#[derive(Debug, Default, Clone)]
pub struct CanonicalInterner {
    ids: HashMap<(u64, Box<[u32]>), u32>,
}

impl CanonicalInterner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, label: u64, mut children: Vec<u32>) -> u32 {
        children.sort_unstable();
        let next = self.ids.len() as u32;
        *self.ids.entry((label, children.into_boxed_slice())).or_insert(next)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Canonical ids of `T(u)` for every node and height `0..=max_height`,
    /// indexed `[height][node]`.
    pub fn root_ids(&mut self, g: &Graph, max_height: usize) -> Vec<Vec<u32>> {
        let n = g.node_count();
        let mut levels: Vec<Vec<u32>> = Vec::with_capacity(max_height + 1);
        levels.push((0..n).map(|u| self.intern(g.label(u), Vec::new())).collect());
        for eta in 1..=max_height {
            let cur = (0..n)
                .map(|u| {
                    let children = g.neighbors(u).iter().map(|&w| levels[eta - 1][w]).collect();
                    self.intern(g.label(u), children)
                })
                .collect();
            levels.push(cur);
        }
        levels
    }
}

/// Classic WL relabeling with an injective dictionary shared by every graph
/// passed to the same relabeler.
///
/// Integer values are only meaningful within one relabeler; equality is what
/// carries information.
#[derive(Debug, Default, Clone)]
pub struct WlRelabeler {
    dictionary: HashMap<(u64, Box<[u64]>), u64>,
}

impl WlRelabeler {
    pub fn new() -> Self {
        Self::default()
    }

    /// WL feature of every node: the `h + 1` labels of iterations `0..=h`,
    /// indexed `[node][iteration]`.
    pub fn relabel(&mut self, g: &Graph, h: usize) -> Vec<Vec<u64>> {
        let n = g.node_count();
        let mut features: Vec<Vec<u64>> = (0..n).map(|v| vec![g.label(v)]).collect();
        for t in 0..h {
            let next: Vec<u64> = (0..n)
                .map(|v| {
                    let mut neigh: Vec<u64> = g.neighbors(v).iter().map(|&u| features[u][t]).collect();
                    neigh.sort_unstable();
                    let len = self.dictionary.len() as u64;
                    *self
                        .dictionary
                        .entry((features[v][t], neigh.into_boxed_slice()))
                        .or_insert(len)
                })
                .collect();
            for (f, l) in features.iter_mut().zip(next) {
                f.push(l);
            }
        }
        features
    }
}

/// WL features of one graph with a fresh dictionary.
pub fn wl_relabel(g: &Graph, h: usize) -> Vec<Vec<u64>> {
    WlRelabeler::new().relabel(g, h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeCountMethod {
    Hash,
    Canonical,
    Wl,
}

/// Number of distinct height-`h` WL subtree types `T(v)` over every node of
/// the dataset, under the chosen identity.
pub fn count_subtree_types(
    ds: &LabeledDataset,
    h: usize,
    params: &HashParams,
    method: TypeCountMethod,
) -> Result<usize> {
    if params.iterations() < h {
        return Err(Error::InvalidParameter(format!(
            "parameters cover {} iterations, {h} requested",
            params.iterations()
        )));
    }
    Ok(match method {
        TypeCountMethod::Hash => {
            let tables = hash_tables(ds, params, h)?;
            let mut seen = HashSet::new();
            for (g, t) in ds.graphs().iter().zip(&tables) {
                seen.extend((0..g.node_count()).map(|u| t.key(u, h)));
            }
            seen.len()
        }
        TypeCountMethod::Canonical => {
            let mut interner = CanonicalInterner::new();
            let mut seen = HashSet::new();
            for g in ds.graphs() {
                seen.extend(interner.root_ids(g, h).pop().unwrap_or_default());
            }
            seen.len()
        }
        TypeCountMethod::Wl => {
            let mut relabeler = WlRelabeler::new();
            let mut seen = HashSet::new();
            for g in ds.graphs() {
                seen.extend(relabeler.relabel(g, h).into_iter().map(|f| f[h]));
            }
            seen.len()
        }
    })
}

fn hash_tables(ds: &LabeledDataset, params: &HashParams, max_height: usize) -> Result<Vec<RootHashTable>> {
    par::map(ds.graphs(), |g| RootHashTable::build(g, params, max_height))
        .into_iter()
        .collect()
}

/// One row of a subtree type audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRow {
    pub height: usize,
    /// distinct WL labels at iteration `height`
    pub wl: usize,
    /// distinct canonical types of `T(v)` at `height`
    pub canonical: usize,
    /// distinct canonical types over all heights `0..=height`
    pub canonical_cumulative: usize,
    /// distinct hash keys at `height`, one entry per parameter set
    pub hashed: Vec<usize>,
}

/// Counts distinct root subtree types for every height `1..=max_height`
/// under WL labels, canonical ids and each of the given hash parameters.
pub fn audit_subtree_types(
    ds: &LabeledDataset,
    max_height: usize,
    params: &[HashParams],
) -> Result<Vec<AuditRow>> {
    let mut interner = CanonicalInterner::new();
    let canonical: Vec<Vec<Vec<u32>>> = ds.graphs().iter().map(|g| interner.root_ids(g, max_height)).collect();
    let mut relabeler = WlRelabeler::new();
    let wl: Vec<Vec<Vec<u64>>> = ds.graphs().iter().map(|g| relabeler.relabel(g, max_height)).collect();
    let tables = params
        .iter()
        .map(|p| hash_tables(ds, p, max_height))
        .collect::<Result<Vec<_>>>()?;

    let mut cumulative: HashSet<u32> = canonical.iter().flat_map(|levels| levels[0].iter().copied()).collect();
    let mut rows = Vec::with_capacity(max_height);
    for h in 1..=max_height {
        let canon: HashSet<u32> = canonical.iter().flat_map(|levels| levels[h].iter().copied()).collect();
        cumulative.extend(canon.iter().copied());
        let wl_count = wl.iter().flat_map(|f| f.iter().map(|x| x[h])).collect::<HashSet<_>>().len();
        let hashed = tables
            .iter()
            .map(|per_graph| {
                ds.graphs()
                    .iter()
                    .zip(per_graph)
                    .flat_map(|(g, t)| (0..g.node_count()).map(move |u| t.key(u, h)))
                    .collect::<HashSet<_>>()
                    .len()
            })
            .collect();
        rows.push(AuditRow {
            height: h,
            wl: wl_count,
            canonical: canon.len(),
            canonical_cumulative: cumulative.len(),
            hashed,
        });
    }
    Ok(rows)
}

/// Agreement between canonical types and hash keys over every complete
/// subtree type `T(u)`, `u` any node, heights `0..=max_height`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub canonical_types: usize,
    pub hash_keys: usize,
    /// hash keys shared by two or more canonical types
    pub colliding_keys: usize,
    /// canonical types that received more than one key; nonzero means a bug
    pub split_types: usize,
}

impl CollisionReport {
    pub fn is_bijective(&self) -> bool {
        self.colliding_keys == 0 && self.split_types == 0
    }
}

pub fn collision_report(ds: &LabeledDataset, max_height: usize, params: &HashParams) -> Result<CollisionReport> {
    let tables = hash_tables(ds, params, max_height)?;
    let mut interner = CanonicalInterner::new();
    let mut key_of: HashMap<u32, SubtreeKey> = HashMap::new();
    let mut types_of: HashMap<SubtreeKey, HashSet<u32>> = HashMap::new();
    let mut split = HashSet::new();
    for (g, table) in ds.graphs().iter().zip(&tables) {
        let ids = interner.root_ids(g, max_height);
        for (h, level) in ids.iter().enumerate() {
            for (u, &id) in level.iter().enumerate() {
                let key = table.key(u, h);
                match key_of.get(&id) {
                    Some(k) if *k != key => {
                        split.insert(id);
                    }
                    Some(_) => {}
                    None => {
                        key_of.insert(id, key.clone());
                    }
                }
                types_of.entry(key).or_default().insert(id);
            }
        }
    }
    Ok(CollisionReport {
        canonical_types: key_of.len(),
        hash_keys: types_of.len(),
        colliding_keys: types_of.values().filter(|s| s.len() > 1).count(),
        split_types: split.len(),
    })
}

/// Lower and upper bounds on the probability that `n` generated hashes
/// contain a collision, for `slots` independent residues modulo `modulus`
/// and complete subtrees with at most `max_leaves` leaves.
pub fn collision_probability_bounds(n: f64, modulus: u64, slots: u32, max_leaves: f64) -> (f64, f64) {
    let pairs = n * (n - 1.0) / 2.0;
    let m = modulus as f64;
    let lower = -(-pairs / m.powi(slots as i32)).exp_m1();
    let q = (2.0 * max_leaves / m).powi(slots as i32).min(1.0);
    let upper = -(pairs * (-q).ln_1p()).exp_m1();
    (lower, upper)
}
