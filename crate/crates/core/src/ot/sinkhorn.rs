//! Entropic transport with log-domain Sinkhorn iterations.

use serde::Serialize;

use super::{check_dims, CostMatrix, Histogram, TransportPlan};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SinkhornOptions {
    pub epsilon: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// Shrink factor for epsilon annealing, starting from the largest cost.
    pub eps_scaling: Option<f64>,
}

impl Default for SinkhornOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-2,
            max_iter: 10_000,
            tol: 1e-9,
            eps_scaling: None,
        }
    }
}

impl SinkhornOptions {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tol)));
        }
        if let Some(s) = self.eps_scaling {
            if !(s > 0.0 && s < 1.0) {
                return Err(Error::InvalidParameter(format!("epsilon scaling factor must lie in (0, 1), got {s}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinkhornResult {
    pub plan: TransportPlan,
    pub converged: bool,
    pub iterations: usize,
    /// L1 violation of the row marginal at termination.
    pub marginal_error: f64,
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

struct State<'a> {
    a: Vec<(usize, f64)>,
    b: Vec<(usize, f64)>,
    c: &'a CostMatrix,
    f: Vec<f64>,
    g: Vec<f64>,
}

impl State<'_> {
    fn cost(&self, i: usize, j: usize) -> f64 {
        self.c.get(self.a[i].0, self.b[j].0)
    }

    /// One pair of half-steps at temperature `eps`; returns the L1 row
    /// violation after the column update.
    fn sweep(&mut self, eps: f64) -> f64 {
        for i in 0..self.a.len() {
            let lse = log_sum_exp((0..self.b.len()).map(|j| (self.g[j] - self.cost(i, j)) / eps + self.b[j].1.ln()));
            self.f[i] = -eps * lse;
        }
        for j in 0..self.b.len() {
            let lse = log_sum_exp((0..self.a.len()).map(|i| (self.f[i] - self.cost(i, j)) / eps + self.a[i].1.ln()));
            self.g[j] = -eps * lse;
        }
        let mut err = 0.0;
        for i in 0..self.a.len() {
            let row: f64 = (0..self.b.len()).map(|j| self.entry(i, j, eps)).sum();
            err += (row - self.a[i].1).abs();
        }
        err
    }

    fn entry(&self, i: usize, j: usize, eps: f64) -> f64 {
        let (ai, bj) = (self.a[i].1, self.b[j].1);
        ai * bj * ((self.f[i] + self.g[j] - self.cost(i, j)) / eps).exp()
    }
}

/// Entropic-regularized transport plan. The reported cost is the transport
/// cost of the plan, without the entropy term. When `max_iter` is exhausted
/// the last iterate is returned with `converged == false`.
pub fn sinkhorn(a: &Histogram, b: &Histogram, c: &CostMatrix, options: &SinkhornOptions) -> Result<SinkhornResult> {
    options.validate()?;
    check_dims(a.len(), b.len(), c)?;
    let support = |h: &Histogram| -> Vec<(usize, f64)> {
        h.weights().iter().copied().enumerate().filter(|&(_, w)| w > 0.0).collect()
    };
    let mut st = State {
        a: support(a),
        b: support(b),
        c,
        f: Vec::new(),
        g: Vec::new(),
    };
    st.f = vec![0.0; st.a.len()];
    st.g = vec![0.0; st.b.len()];

    let mut schedule = Vec::new();
    if let Some(factor) = options.eps_scaling {
        let mut e = c.data().iter().copied().fold(0.0, f64::max);
        while e > options.epsilon {
            schedule.push(e);
            e *= factor;
        }
    }
    schedule.push(options.epsilon);

    let mut iterations = 0;
    let mut err = f64::INFINITY;
    let last = schedule.len() - 1;
    for (stage, &eps) in schedule.iter().enumerate() {
        // annealing stages only need a rough fit before moving on
        let target = if stage == last { options.tol } else { options.tol.max(1e-3) };
        while iterations < options.max_iter {
            iterations += 1;
            err = st.sweep(eps);
            if err < target {
                break;
            }
        }
    }

    let mut plan = vec![0.0; c.rows() * c.cols()];
    for i in 0..st.a.len() {
        for j in 0..st.b.len() {
            plan[st.a[i].0 * c.cols() + st.b[j].0] = st.entry(i, j, options.epsilon);
        }
    }
    Ok(SinkhornResult {
        plan: TransportPlan::from_plan(c, plan),
        converged: err < options.tol,
        iterations,
        marginal_error: err,
    })
}
