use rayon::prelude::*;

use crate::bicausal::{aw_value, MulticausalCoupling};
use crate::error::{Error, Result};
use crate::process::{check_order, path_cost, TreeProcess};

use super::validate_grid;

/// How labels are read between grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    /// Straight line between neighbouring grid labels.
    #[default]
    Linear,
    /// Hold the label of the last grid point at or below `u`.
    PiecewiseConstant,
}

/// A probability tree carrying one adapted labelling per grid point.
///
/// Labels live on nodes, so the time-`t` value of every process `Y^u` only
/// depends on the time-`t` prefix of the outcome.
#[derive(Debug, Clone)]
pub struct CommonSpaceFlow {
    base: TreeProcess,
    grid: Vec<f64>,
    /// labels[k][node]; the root's entry is empty
    labels: Vec<Vec<Vec<f64>>>,
    interpolation: Interpolation,
    coupling: Option<MulticausalCoupling>,
}

impl CommonSpaceFlow {
    /// `base` provides the tree and probabilities; its own values are ignored.
    pub fn new(
        base: &TreeProcess,
        grid: Vec<f64>,
        labels: Vec<Vec<Vec<f64>>>,
        interpolation: Interpolation,
    ) -> Result<Self> {
        validate_grid(&grid)?;
        if labels.len() != grid.len() {
            return Err(Error::input("one labelling per grid point is required"));
        }
        let base = base.relabel(&labels[0])?;
        for l in &labels[1..] {
            base.relabel(l)?;
        }
        Ok(CommonSpaceFlow { base, grid, labels, interpolation, coupling: None })
    }

    pub(crate) fn with_coupling(mut self, c: MulticausalCoupling) -> Self {
        self.coupling = Some(c);
        self
    }

    /// The tree of the common space, labelled with the first grid point.
    pub fn base(&self) -> &TreeProcess {
        &self.base
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn labels(&self, k: usize) -> &[Vec<f64>] {
        &self.labels[k]
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn set_interpolation(&mut self, rule: Interpolation) {
        self.interpolation = rule;
    }

    /// The multicausal coupling the flow was glued from, if any.
    pub fn coupling(&self) -> Option<&MulticausalCoupling> {
        self.coupling.as_ref()
    }

    /// `Y^{u_k}` as a filtered process on the common tree.
    pub fn process_at(&self, k: usize) -> TreeProcess {
        self.base.relabel(&self.labels[k]).expect("labels were validated")
    }

    /// Label of `node` at an arbitrary `u` in `[0, 1]`.
    pub fn label_at(&self, node: usize, u: f64) -> Vec<f64> {
        let u = u.clamp(0.0, 1.0);
        let k = self.grid.iter().rposition(|&g| g <= u).unwrap_or_default();
        if k + 1 == self.grid.len() || self.grid[k] == u {
            return self.labels[k][node].clone();
        }
        match self.interpolation {
            Interpolation::PiecewiseConstant => self.labels[k][node].clone(),
            Interpolation::Linear => {
                let s = (u - self.grid[k]) / (self.grid[k + 1] - self.grid[k]);
                self.labels[k][node]
                    .iter()
                    .zip(&self.labels[k + 1][node])
                    .map(|(a, b)| (1.0 - s) * a + s * b)
                    .collect()
            }
        }
    }

    /// `Y^u` for an arbitrary `u` in `[0, 1]`.
    pub fn process_at_u(&self, u: f64) -> TreeProcess {
        let labels: Vec<Vec<f64>> = (0..self.base.len())
            .map(|i| if i == 0 { Vec::new() } else { self.label_at(i, u) })
            .collect();
        self.base.relabel(&labels).expect("interpolated labels keep their dimension")
    }

    /// Value path of leaf `leaf` under labelling `k`.
    pub fn particle(&self, leaf: usize, k: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.base.depth());
        let mut at = leaf;
        while let Some(p) = self.base.node(at).parent {
            out.push(self.labels[k][at].clone());
            at = p;
        }
        out.reverse();
        out
    }

    /// `E[d_{X,p}^p(Y^{u_j}, Y^{u_k})]` under the common measure.
    pub fn expected_cost(&self, j: usize, k: usize, p: f64) -> f64 {
        self.base
            .leaves()
            .iter()
            .map(|&l| self.base.mass(l) * path_cost(&self.particle(l, j), &self.particle(l, k), p))
            .sum()
    }
}

/// Particle-level energy
/// `sum_omega P(omega) sum_i (u_{i+1} - u_i)^{1-p} d^p(Y^{u_i}(omega), Y^{u_{i+1}}(omega))`,
/// exact for piecewise-linear particle paths.
pub fn flow_energy(flow: &CommonSpaceFlow, p: f64) -> Result<f64> {
    check_order(p)?;
    Ok(flow
        .grid
        .windows(2)
        .enumerate()
        .map(|(k, w)| (w[1] - w[0]).powf(1.0 - p) * flow.expected_cost(k, k + 1, p))
        .sum())
}

/// One grid interval of [`verify_flow_ac`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalCheck {
    pub start: f64,
    pub end: f64,
    /// `AW_p^p(Y^{u_i}, Y^{u_{i+1}})`
    pub lhs: f64,
    /// `E[d^p(Y^{u_i}, Y^{u_{i+1}})]`
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcReport {
    pub intervals: Vec<IntervalCheck>,
}

impl AcReport {
    pub fn min_slack(&self) -> f64 {
        self.intervals.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.intervals.iter().all(|c| c.slack >= -tol)
    }
}

/// Compares, per interval, the adapted cost of neighbouring processes with
/// the cost of the identity coupling on the common space. The identity
/// coupling is bicausal, so every slack is nonnegative up to round-off.
pub fn verify_flow_ac(flow: &CommonSpaceFlow, p: f64) -> Result<AcReport> {
    check_order(p)?;
    let intervals = (0..flow.grid.len() - 1)
        .into_par_iter()
        .map(|k| {
            let a = aw_value(&flow.process_at(k), &flow.process_at(k + 1), p)?;
            let lhs = a.powf(p);
            let rhs = flow.expected_cost(k, k + 1, p);
            Ok(IntervalCheck {
                start: flow.grid[k],
                end: flow.grid[k + 1],
                lhs,
                rhs,
                slack: rhs - lhs,
            })
        })
        .collect::<Result<_>>()?;
    Ok(AcReport { intervals })
}
