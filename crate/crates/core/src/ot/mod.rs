//! Discrete 1-Wasserstein distance: exact min-cost flow and log-domain
//! Sinkhorn.

mod flow;
mod sinkhorn;

pub use sinkhorn::{sinkhorn, SinkhornOptions, SinkhornResult};

use serde::Serialize;

use crate::error::{Error, Result};

const MASS_TOLERANCE: f64 = 1e-12;

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram(Vec<f64>);

impl Histogram {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("histogram has no bins".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidParameter(format!("histogram weight {w} is not a nonnegative number")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidParameter(format!("histogram sums to {total}, expected 1")));
        }
        Ok(Self(weights))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("histogram has no bins".into()));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Row-major `rows x cols` matrix of finite nonnegative costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::SizeMismatch(format!(
                "cost matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(c) = data.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidParameter(format!("cost {c} is not a finite nonnegative number")));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.rows, self.cols, self.data.iter().map(|c| c * factor).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportPlan {
    pub rows: usize,
    pub cols: usize,
    pub plan: Vec<f64>,
    pub cost: f64,
}

impl TransportPlan {
    fn from_plan(cost: &CostMatrix, plan: Vec<f64>) -> Self {
        let total = plan.iter().zip(cost.data()).map(|(p, c)| p * c).sum();
        Self {
            rows: cost.rows,
            cols: cost.cols,
            plan,
            cost: total,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.plan[i * self.cols + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.plan.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for row in self.plan.chunks(self.cols) {
            for (acc, p) in s.iter_mut().zip(row) {
                *acc += p;
            }
        }
        s
    }

    /// Largest absolute deviation of the plan's marginals from `a` and `b`.
    pub fn marginal_error(&self, a: &[f64], b: &[f64]) -> f64 {
        let rows = self.row_sums().iter().zip(a).map(|(r, x)| (r - x).abs()).fold(0.0, f64::max);
        let cols = self.col_sums().iter().zip(b).map(|(c, y)| (c - y).abs()).fold(0.0, f64::max);
        rows.max(cols)
    }
}

fn check_dims(a: usize, b: usize, c: &CostMatrix) -> Result<()> {
    if c.rows != a || c.cols != b {
        return Err(Error::SizeMismatch(format!(
            "histograms of sizes {a} and {b} against a {}x{} cost matrix",
            c.rows, c.cols
        )));
    }
    Ok(())
}

/// Exact optimal transport between two histograms.
pub fn emd(a: &Histogram, b: &Histogram, c: &CostMatrix) -> Result<TransportPlan> {
    emd_weights(a.weights(), b.weights(), c)
}

/// Exact optimal transport between arbitrary nonnegative weight vectors of
/// equal total mass.
pub fn emd_weights(a: &[f64], b: &[f64], c: &CostMatrix) -> Result<TransportPlan> {
    check_dims(a.len(), b.len(), c)?;
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    if a.iter().chain(b).any(|w| !w.is_finite() || *w < 0.0) || (sa - sb).abs() > 1e-9 * sa.max(sb).max(1.0) {
        return Err(Error::Infeasible {
            source_mass: sa,
            target_mass: sb,
        });
    }
    let plan = flow::min_cost_transport(a, b, c.data());
    Ok(TransportPlan::from_plan(c, plan))
}

/// Exact optimal transport between uniform distributions on `rows` and
/// `cols` points with integer costs.
///
/// Mass is scaled to `cols` per row and `rows` per column so every quantity
/// stays integral. Returns the integer plan in those units and the
/// transport cost in the original normalization.
pub fn emd_uniform_int(rows: usize, cols: usize, costs: &[i64]) -> Result<(Vec<i64>, f64)> {
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyGraph);
    }
    if costs.len() != rows * cols {
        return Err(Error::SizeMismatch(format!(
            "cost matrix {rows}x{cols} needs {} entries, got {}",
            rows * cols,
            costs.len()
        )));
    }
    if let Some(c) = costs.iter().find(|c| **c < 0) {
        return Err(Error::InvalidParameter(format!("negative cost {c}")));
    }
    let supply = vec![cols as i64; rows];
    let demand = vec![rows as i64; cols];
    let plan = flow::min_cost_transport(&supply, &demand, costs);
    let scaled: i128 = plan.iter().zip(costs).map(|(&p, &c)| p as i128 * c as i128).sum();
    Ok((plan, scaled as f64 / (rows * cols) as f64))
}

pub mod oracle {
    //! Vertex enumeration for small transport problems: every basic
    //! feasible solution has a support of `m + n - 1` cells (one equality
    //! is redundant), so enumerate those supports and solve each square
    //! system directly.

    pub fn brute_force_emd(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
        let (m, n) = (a.len(), b.len());
        let cells = m * n;
        let basis = m + n - 1;
        let mut best = f64::INFINITY;
        let mut chosen = Vec::with_capacity(basis);
        subsets(cells, basis, 0, &mut chosen, &mut |support| {
            if let Some(x) = solve_support(a, b, support) {
                let cost: f64 = support.iter().zip(&x).map(|(&cell, v)| c[cell] * v).sum();
                best = best.min(cost);
            }
        });
        best
    }

    fn subsets(n: usize, k: usize, start: usize, chosen: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if chosen.len() == k {
            f(chosen);
            return;
        }
        for i in start..n {
            if n - i < k - chosen.len() {
                break;
            }
            chosen.push(i);
            subsets(n, k, i + 1, chosen, f);
            chosen.pop();
        }
    }

    /// Solves the row/column constraints restricted to `support`, dropping
    /// the last column equation. None when singular or infeasible.
    fn solve_support(a: &[f64], b: &[f64], support: &[usize]) -> Option<Vec<f64>> {
        let (m, n) = (a.len(), b.len());
        let k = support.len();
        let eqs = m + n - 1;
        let mut mat = vec![vec![0.0; k + 1]; eqs];
        for (col, &cell) in support.iter().enumerate() {
            let (i, j) = (cell / n, cell % n);
            mat[i][col] = 1.0;
            if j < n - 1 {
                mat[m + j][col] = 1.0;
            }
        }
        for i in 0..m {
            mat[i][k] = a[i];
        }
        for j in 0..n - 1 {
            mat[m + j][k] = b[j];
        }
        for col in 0..k {
            let pivot = (col..eqs).max_by(|&x, &y| mat[x][col].abs().total_cmp(&mat[y][col].abs()))?;
            if mat[pivot][col].abs() < 1e-12 {
                return None;
            }
            mat.swap(col, pivot);
            for r in 0..eqs {
                if r != col {
                    let f = mat[r][col] / mat[col][col];
                    if f != 0.0 {
                        let pivot_row = mat[col].clone();
                        for (x, p) in mat[r][col..].iter_mut().zip(&pivot_row[col..]) {
                            *x -= f * p;
                        }
                    }
                }
            }
        }
        let x: Vec<f64> = (0..k).map(|i| mat[i][k] / mat[i][i]).collect();
        x.iter().all(|&v| v >= -1e-12).then_some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::oracle::brute_force_emd;
    use super::*;
    use crate::generate::rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_hist(r: &mut impl Rng, n: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| r.random::<f64>() + 0.01).collect();
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / s).collect()
    }

    #[test]
    fn histogram_validation() {
        assert!(Histogram::new(vec![0.5, 0.5]).is_ok());
        assert!(Histogram::new(vec![0.5, 0.6]).is_err());
        assert!(Histogram::new(vec![1.5, -0.5]).is_err());
        assert!(Histogram::new(vec![]).is_err());
        assert!(Histogram::uniform(0).is_err());
        assert!(CostMatrix::new(2, 2, vec![0.0; 3]).is_err());
        assert!(CostMatrix::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn zero_cost_diagonal() {
        let h = Histogram::uniform(2).unwrap();
        let c = CostMatrix::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let p = emd(&h, &h, &c).unwrap();
        assert_eq!(p.cost, 0.0);
        assert_eq!(p.plan, vec![0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn forced_plan() {
        let a = Histogram::new(vec![1.0, 0.0]).unwrap();
        let b = Histogram::new(vec![0.0, 1.0]).unwrap();
        let c = CostMatrix::new(2, 2, vec![0.0, 3.0, 3.0, 0.0]).unwrap();
        assert_eq!(emd(&a, &b, &c).unwrap().cost, 3.0);
    }

    #[test]
    fn dimension_and_mass_errors() {
        let h = Histogram::uniform(2).unwrap();
        let c = CostMatrix::new(3, 2, vec![0.0; 6]).unwrap();
        assert!(matches!(emd(&h, &h, &c), Err(Error::SizeMismatch(_))));
        let c = CostMatrix::new(2, 2, vec![0.0; 4]).unwrap();
        assert!(matches!(emd_weights(&[1.0, 1.0], &[0.5, 0.5], &c), Err(Error::Infeasible { .. })));
        assert!(emd_uniform_int(2, 2, &[0, 1, 2]).is_err());
        assert!(emd_uniform_int(0, 2, &[]).is_err());
    }

    #[test]
    fn matches_vertex_enumeration() {
        let mut r = rng(11);
        for &(m, n) in &[(3, 3), (4, 4), (2, 5), (4, 3)] {
            for _ in 0..40 {
                let a = random_hist(&mut r, m);
                let b = random_hist(&mut r, n);
                let c = CostMatrix::from_fn(m, n, |_, _| r.random::<f64>() * 10.0).unwrap();
                let p = emd_weights(&a, &b, &c).unwrap();
                let oracle = brute_force_emd(&a, &b, c.data());
                assert!((p.cost - oracle).abs() < 1e-9, "{} vs {}", p.cost, oracle);
                assert!(p.marginal_error(&a, &b) < 1e-8);
            }
        }
    }

    #[test]
    fn integer_solver_agrees_with_float() {
        let mut r = rng(3);
        for _ in 0..50 {
            let m = r.random_range(1..7);
            let n = r.random_range(1..7);
            let costs: Vec<i64> = (0..m * n).map(|_| r.random_range(0..20)).collect();
            let (plan, cost) = emd_uniform_int(m, n, &costs).unwrap();
            assert!(plan.chunks(n).all(|row| row.iter().sum::<i64>() == n as i64));
            let c = CostMatrix::new(m, n, costs.iter().map(|&x| x as f64).collect()).unwrap();
            let f = emd(&Histogram::uniform(m).unwrap(), &Histogram::uniform(n).unwrap(), &c).unwrap();
            assert!((cost - f.cost).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn symmetry_and_scaling(seed in any::<u64>(), m in 1usize..6, n in 1usize..6, lambda in 0.1f64..10.0) {
            let mut r = rng(seed);
            let a = random_hist(&mut r, m);
            let b = random_hist(&mut r, n);
            let c = CostMatrix::from_fn(m, n, |_, _| r.random::<f64>()).unwrap();
            let ab = emd_weights(&a, &b, &c).unwrap();
            let ba = emd_weights(&b, &a, &c.transpose()).unwrap();
            prop_assert!((ab.cost - ba.cost).abs() < 1e-9);
            let scaled = emd_weights(&a, &b, &c.scaled(lambda).unwrap()).unwrap();
            prop_assert!((scaled.cost - lambda * ab.cost).abs() < 1e-9 * lambda.max(1.0));
            prop_assert!(ab.marginal_error(&a, &b) < 1e-8);
            prop_assert!(ab.plan.iter().all(|&p| p >= 0.0));
        }

        #[test]
        fn identity_on_metric_costs(seed in any::<u64>(), n in 1usize..7) {
            let mut r = rng(seed);
            let a = random_hist(&mut r, n);
            let pts: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
            let c = CostMatrix::from_fn(n, n, |i, j| (pts[i] - pts[j]).abs()).unwrap();
            prop_assert!(emd_weights(&a, &a, &c).unwrap().cost.abs() < 1e-12);
        }
    }
}
