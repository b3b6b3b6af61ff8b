//! Curves of processes sampled on a grid in `[0, 1]`, their metric
//! derivatives and energies, and their representation as flows of adapted
//! processes on one common tree.

mod construct;
mod flow;

use rayon::prelude::*;

use crate::bicausal::{aw_value, BicausalPlan};
use crate::error::{Error, Result};
use crate::process::{check_order, TreeProcess};

pub use construct::{geodesic, represent_curve, skorokhod, FlowOptions, DEFAULT_MAX_LEAVES};
pub use flow::{
    flow_energy, verify_flow_ac, AcReport, CommonSpaceFlow, IntervalCheck, Interpolation,
};

/// Checks `0 = u_0 < u_1 < ... < u_n = 1`.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::input("a grid needs at least two points"));
    }
    if grid[0] != 0.0 || *grid.last().unwrap() != 1.0 {
        return Err(Error::input("grid must start at 0 and end at 1"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::input("grid must be strictly increasing"));
    }
    Ok(())
}

/// The dyadic grid `i / 2^level`, `i = 0..=2^level`.
pub fn dyadic_grid(level: u32) -> Vec<f64> {
    let n = 1u64 << level;
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

/// One process per grid point, optionally with plans between neighbours.
#[derive(Debug, Clone)]
pub struct GridCurve {
    grid: Vec<f64>,
    processes: Vec<TreeProcess>,
    p: f64,
    plans: Option<Vec<BicausalPlan>>,
}

impl GridCurve {
    pub fn new(grid: Vec<f64>, processes: Vec<TreeProcess>, p: f64) -> Result<Self> {
        check_order(p)?;
        validate_grid(&grid)?;
        if processes.len() != grid.len() {
            return Err(Error::input(format!(
                "{} processes for {} grid points",
                processes.len(),
                grid.len()
            )));
        }
        for q in &processes[1..] {
            processes[0].ensure_same_shape(q)?;
        }
        Ok(GridCurve { grid, processes, p, plans: None })
    }

    /// Attaches couplings between consecutive processes.
    pub fn with_plans(mut self, plans: Vec<BicausalPlan>) -> Result<Self> {
        if plans.len() + 1 != self.processes.len() {
            return Err(Error::input("one plan per grid interval is required"));
        }
        for (i, plan) in plans.iter().enumerate() {
            if plan.x() != &self.processes[i] || plan.y() != &self.processes[i + 1] {
                return Err(Error::input(format!("plan {i} does not couple processes {i} and {}", i + 1)));
            }
        }
        self.plans = Some(plans);
        Ok(self)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn processes(&self) -> &[TreeProcess] {
        &self.processes
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn plans(&self) -> Option<&[BicausalPlan]> {
        self.plans.as_deref()
    }

    /// `AW_p` between consecutive grid processes.
    pub fn interval_distances(&self) -> Result<Vec<f64>> {
        self.processes
            .par_windows(2)
            .map(|w| aw_value(&w[0], &w[1], self.p))
            .collect()
    }
}

/// Difference quotient of the curve over one grid interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalQuotient {
    pub start: f64,
    pub end: f64,
    pub quotient: f64,
}

/// Grid surrogate of the metric derivative:
/// `AW_p(X^{u_i}, X^{u_{i+1}}) / (u_{i+1} - u_i)` per interval.
pub fn metric_derivative(curve: &GridCurve) -> Result<Vec<IntervalQuotient>> {
    let d = curve.interval_distances()?;
    Ok(curve
        .grid
        .windows(2)
        .zip(d)
        .map(|(w, d)| IntervalQuotient { start: w[0], end: w[1], quotient: d / (w[1] - w[0]) })
        .collect())
}

/// Riemann sum `sum_i (u_{i+1} - u_i) q_i^p` of the metric derivative.
pub fn p_energy(curve: &GridCurve) -> Result<f64> {
    Ok(metric_derivative(curve)?
        .iter()
        .map(|q| (q.end - q.start) * q.quotient.powf(curve.p))
        .sum())
}

/// `sum_n b_n^{1-p} AW_p^p(X^n, X^{n+1})`, with `0^{1-p} * 0 = 0`.
///
/// Without explicit weights the canonical ones are used: `b_n` proportional
/// to `AW_p(X^n, X^{n+1})`, normalised to sum to one (uniform if every
/// distance vanishes). Returns the sum and the weights used.
pub fn weighted_p_variation(
    seq: &[TreeProcess],
    p: f64,
    weights: Option<&[f64]>,
) -> Result<(f64, Vec<f64>)> {
    check_order(p)?;
    if seq.len() < 2 {
        return Err(Error::input("weighted variation needs at least two processes"));
    }
    let d: Vec<f64> = seq.par_windows(2).map(|w| aw_value(&w[0], &w[1], p)).collect::<Result<_>>()?;
    let b = match weights {
        Some(w) => {
            check_weights(w, d.len())?;
            w.to_vec()
        }
        None => canonical_weights(&d),
    };
    let sum = b
        .iter()
        .zip(&d)
        .map(|(&b, &d)| if d == 0.0 { 0.0 } else { b.powf(1.0 - p) * d.powf(p) })
        .sum();
    Ok((sum, b))
}

/// Distances normalised to sum to one; uniform when they all vanish.
pub fn canonical_weights(distances: &[f64]) -> Vec<f64> {
    let total: f64 = distances.iter().sum();
    if total > 0.0 {
        distances.iter().map(|d| d / total).collect()
    } else {
        vec![1.0 / distances.len() as f64; distances.len()]
    }
}

pub(crate) fn check_weights(w: &[f64], expected: usize) -> Result<()> {
    if w.len() != expected {
        return Err(Error::input(format!("expected {expected} weights, got {}", w.len())));
    }
    if w.iter().any(|&b| !(b > 0.0) || !b.is_finite()) {
        return Err(Error::input("weights must be positive"));
    }
    let total: f64 = w.iter().sum();
    if total > 1.0 + 1e-12 {
        return Err(Error::input(format!("weights sum to {total} > 1")));
    }
    Ok(())
}
