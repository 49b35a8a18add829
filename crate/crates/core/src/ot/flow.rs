//! Successive shortest paths on the dense bipartite transport network.
//!
//! Sources are the rows, sinks the columns, every row-column arc is
//! uncapacitated. Dijkstra runs on reduced costs maintained by node
//! potentials, from a super source attached to every row with remaining
//! supply, and stops at the first column with remaining demand.

use std::ops::{Add, Sub};

pub(crate) trait Amount: Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> {
    const ZERO: Self;
    const INFINITY: Self;
    /// Amount large enough to still carry flow.
    fn significant(self) -> bool;
    /// Reduced costs can dip below zero by rounding only.
    fn clamp_reduced(self) -> Self;
    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Amount for i64 {
    const ZERO: Self = 0;
    const INFINITY: Self = i64::MAX / 4;
    fn significant(self) -> bool {
        self > 0
    }
    fn clamp_reduced(self) -> Self {
        debug_assert!(self >= 0, "negative reduced cost {self}");
        self
    }
}

impl Amount for f64 {
    const ZERO: Self = 0.0;
    const INFINITY: Self = f64::INFINITY;
    fn significant(self) -> bool {
        self > 1e-15
    }
    fn clamp_reduced(self) -> Self {
        self.max(0.0)
    }
}

/// Optimal flow matrix (row-major) for the given supplies, demands and costs.
/// Total supply and demand must agree; leftovers below the significance
/// threshold are abandoned.
pub(crate) fn min_cost_transport<T: Amount>(supply: &[T], demand: &[T], cost: &[T]) -> Vec<T> {
    let (m, n) = (supply.len(), demand.len());
    debug_assert_eq!(cost.len(), m * n);
    let mut supply = supply.to_vec();
    let mut demand = demand.to_vec();
    let mut flow = vec![T::ZERO; m * n];
    // nodes: rows 0..m, columns m..m+n; the super source keeps potential 0
    let mut potential = vec![T::ZERO; m + n];
    let total = m + n;
    let mut dist = vec![T::INFINITY; total];
    let mut pred = vec![usize::MAX; total];
    let mut done = vec![false; total];

    loop {
        if !supply.iter().any(|s| s.significant()) || !demand.iter().any(|d| d.significant()) {
            break;
        }
        dist.fill(T::INFINITY);
        pred.fill(usize::MAX);
        done.fill(false);
        for i in 0..m {
            if supply[i].significant() {
                dist[i] = (T::ZERO - potential[i]).clamp_reduced();
            }
        }

        let mut target = None;
        loop {
            let mut best = None;
            for v in 0..total {
                if !done[v] && dist[v] < T::INFINITY && best.is_none_or(|b: usize| dist[v] < dist[b]) {
                    best = Some(v);
                }
            }
            let Some(u) = best else { break };
            done[u] = true;
            if u >= m && demand[u - m].significant() {
                target = Some(u);
                break;
            }
            if u < m {
                for j in 0..n {
                    let v = m + j;
                    if done[v] {
                        continue;
                    }
                    let rc = (cost[u * n + j] + potential[u] - potential[v]).clamp_reduced();
                    let nd = dist[u] + rc;
                    if nd < dist[v] {
                        dist[v] = nd;
                        pred[v] = u;
                    }
                }
            } else {
                let j = u - m;
                for i in 0..m {
                    if done[i] || !flow[i * n + j].significant() {
                        continue;
                    }
                    let rc = (potential[u] - cost[i * n + j] - potential[i]).clamp_reduced();
                    let nd = dist[u] + rc;
                    if nd < dist[i] {
                        dist[i] = nd;
                        pred[i] = u;
                    }
                }
            }
        }
        let Some(target) = target else { break };

        let reach = dist[target];
        for v in 0..total {
            potential[v] = potential[v] + dist[v].min(reach);
        }

        // walk back to the row the path starts from
        let mut bottleneck = demand[target - m];
        let mut v = target;
        while pred[v] != usize::MAX {
            let u = pred[v];
            if u >= m {
                // backward arc column u -> row v cancels flow
                bottleneck = bottleneck.min(flow[v * n + (u - m)]);
            }
            v = u;
        }
        bottleneck = bottleneck.min(supply[v]);
        let start = v;

        let mut v = target;
        while pred[v] != usize::MAX {
            let u = pred[v];
            if u < m {
                let cell = &mut flow[u * n + (v - m)];
                *cell = *cell + bottleneck;
            } else {
                let cell = &mut flow[v * n + (u - m)];
                *cell = *cell - bottleneck;
            }
            v = u;
        }
        supply[start] = supply[start] - bottleneck;
        demand[target - m] = demand[target - m] - bottleneck;
    }
    flow
}
