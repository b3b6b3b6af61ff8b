//! Adapted Wasserstein distance and optimal bicausal couplings on trees.
//!
//! On tree filtrations every bicausal coupling factorizes into nodewise
//! couplings of the children distributions, so the optimal value is the root
//! of a backward induction over pairs of same-level nodes:
//!
//! ```text
//! V_T(v, w) = 0
//! V_t(v, w) = min_{k in Cpl(P(.|v), Q(.|w))} sum k(c, d) (|x_c - y_d|^p + V_{t+1}(c, d))
//! AW_p^p    = V_0(root, root)
//! ```

mod check;
mod glue;
mod lp_oracle;

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ot::{transport, TransportPlan};
use crate::process::{check_order, path_cost, step_cost, TreeProcess};

pub use check::{bicausal_violation, check_bicausal, check_bicausal_pairs, CHECK_TOL};
pub use glue::{check_multicausal, glue, multicausal_violation, MulticausalCoupling, ProductNode};
pub use lp_oracle::aw_distance_lp;

/// A coupling of two tree processes given by nodewise kernels.
///
/// `kernels[(v, w)]` is the joint law of the children of `v` and `w` (rows in
/// the order of `x.children(v)`, columns in the order of `y.children(w)`),
/// stored for every same-level pair reached with positive mass.
#[derive(Debug, Clone, PartialEq)]
pub struct BicausalPlan {
    x: TreeProcess,
    y: TreeProcess,
    p: f64,
    value: f64,
    kernels: BTreeMap<(usize, usize), TransportPlan>,
    node_mass: BTreeMap<(usize, usize), f64>,
    pairs: Vec<(usize, usize, f64)>,
}

impl BicausalPlan {
    /// Rebuilds a plan from leaf-pair masses (node indices). Kernels are
    /// recovered by aggregating masses onto node pairs. The stored value is
    /// the plan's own transport cost, `(sum pi d^p)^(1/p)`.
    pub fn from_pairs(
        x: TreeProcess,
        y: TreeProcess,
        pairs: Vec<(usize, usize, f64)>,
        p: f64,
    ) -> Result<Self> {
        check_order(p)?;
        x.ensure_same_shape(&y)?;
        let depth = x.depth();
        let mut node_mass: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(a, b, m) in &pairs {
            if a >= x.len() || b >= y.len() || x.node(a).level != depth || y.node(b).level != depth
            {
                return Err(Error::input(format!("pair ({a}, {b}) is not a pair of leaves")));
            }
            if !(m >= 0.0) || !m.is_finite() {
                return Err(Error::input(format!("pair mass {m} is negative")));
            }
            if m == 0.0 {
                continue;
            }
            for t in 0..=depth {
                *node_mass.entry((x.ancestor(a, t), y.ancestor(b, t))).or_insert(0.0) += m;
            }
        }
        let mut kernels = BTreeMap::new();
        for (&(v, w), &m) in &node_mass {
            if x.node(v).level == depth {
                continue;
            }
            let (cx, cy) = (x.children(v), y.children(w));
            let mut k = vec![0.0; cx.len() * cy.len()];
            for (i, &c) in cx.iter().enumerate() {
                for (j, &d) in cy.iter().enumerate() {
                    if let Some(&q) = node_mass.get(&(c, d)) {
                        k[i * cy.len() + j] = q / m;
                    }
                }
            }
            kernels.insert((v, w), TransportPlan::from_dense(cx.len(), cy.len(), k)?);
        }
        let cost: f64 = pairs
            .iter()
            .map(|&(a, b, m)| m * path_cost(&x.path(a), &y.path(b), p))
            .sum();
        let pairs = pairs.into_iter().filter(|e| e.2 > 0.0).collect();
        Ok(BicausalPlan { x, y, p, value: cost.max(0.0).powf(1.0 / p), kernels, node_mass, pairs })
    }

    pub fn x(&self) -> &TreeProcess {
        &self.x
    }

    pub fn y(&self) -> &TreeProcess {
        &self.y
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// The distance this plan was built for (`AW_p` for solver output).
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn kernel(&self, v: usize, w: usize) -> Option<&TransportPlan> {
        self.kernels.get(&(v, w))
    }

    pub fn kernels(&self) -> &BTreeMap<(usize, usize), TransportPlan> {
        &self.kernels
    }

    /// Mass of the pair of cylinders through nodes `v` and `w`.
    pub fn pair_mass(&self, v: usize, w: usize) -> f64 {
        self.node_mass.get(&(v, w)).copied().unwrap_or(0.0)
    }

    /// Leaf pairs `(leaf_x, leaf_y, mass)` with positive mass.
    pub fn leaf_pairs(&self) -> &[(usize, usize, f64)] {
        &self.pairs
    }

    /// `E[d_{X,p}^p]` under this plan.
    pub fn expected_cost(&self) -> f64 {
        self.pairs
            .iter()
            .map(|&(a, b, m)| m * path_cost(&self.x.path(a), &self.y.path(b), self.p))
            .sum()
    }
}

/// Adapted Wasserstein distance `AW_p(x, y)` with an optimal bicausal plan.
pub fn aw_distance(x: &TreeProcess, y: &TreeProcess, p: f64) -> Result<(f64, BicausalPlan)> {
    check_order(p)?;
    x.ensure_same_shape(y)?;
    let depth = x.depth();

    // plans[t][i * ny + j] for the pair (x.level(t)[i], y.level(t)[j])
    let mut plans: Vec<Vec<TransportPlan>> = vec![Vec::new(); depth];
    let mut next = vec![0.0; x.level(depth).len() * y.level(depth).len()];
    for t in (0..depth).rev() {
        let (xs, ys) = (x.level(t), y.level(t));
        let ny_next = y.level(t + 1).len();
        let solved: Vec<(f64, TransportPlan)> = (0..xs.len() * ys.len())
            .into_par_iter()
            .map(|k| {
                let (v, w) = (xs[k / ys.len()], ys[k % ys.len()]);
                let (cx, cy) = (x.children(v), y.children(w));
                let mut cost = Vec::with_capacity(cx.len() * cy.len());
                for &c in cx {
                    for &d in cy {
                        let cont = next[x.level_pos(c) * ny_next + y.level_pos(d)];
                        cost.push(step_cost(x.value(c), y.value(d), p) + cont);
                    }
                }
                let src: Vec<f64> = cx.iter().map(|&c| x.prob(c)).collect();
                let dst: Vec<f64> = cy.iter().map(|&d| y.prob(d)).collect();
                transport(&src, &dst, &cost)
            })
            .collect::<Result<_>>()?;
        next = solved.iter().map(|s| s.0).collect();
        plans[t] = solved.into_iter().map(|s| s.1).collect();
    }
    let root_cost = next[0].max(0.0);

    let mut node_mass = BTreeMap::new();
    let mut kernels = BTreeMap::new();
    let mut frontier = vec![(x.root(), y.root(), 1.0)];
    node_mass.insert((x.root(), y.root()), 1.0);
    for t in 0..depth {
        let ny = y.level(t).len();
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(v, w, m) in &frontier {
            let plan = &plans[t][x.level_pos(v) * ny + y.level_pos(w)];
            let (cx, cy) = (x.children(v), y.children(w));
            for (i, j, q) in plan.support() {
                *acc.entry((cx[i], cy[j])).or_insert(0.0) += m * q;
            }
            kernels.insert((v, w), plan.clone());
        }
        frontier = acc.iter().map(|(&(c, d), &m)| (c, d, m)).collect();
        node_mass.extend(acc);
    }
    let pairs = frontier;
    let value = root_cost.powf(1.0 / p);
    let plan = BicausalPlan {
        x: x.clone(),
        y: y.clone(),
        p,
        value,
        kernels,
        node_mass,
        pairs,
    };
    Ok((value, plan))
}

/// `AW_p` without retaining the plan.
pub fn aw_value(x: &TreeProcess, y: &TreeProcess, p: f64) -> Result<f64> {
    aw_distance(x, y, p).map(|r| r.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::TreeBuilder;

    fn eps_pair(eps: f64) -> (TreeProcess, TreeProcess) {
        let mut b = TreeBuilder::new(vec![1, 1]).unwrap();
        let n = b.add_child(0, vec![0.0], 1.0).unwrap();
        b.add_child(n, vec![-1.0], 0.5).unwrap();
        b.add_child(n, vec![1.0], 0.5).unwrap();
        let x = b.build().unwrap();
        let mut b = TreeBuilder::new(vec![1, 1]).unwrap();
        for s in [-1.0, 1.0] {
            let n = b.add_child(0, vec![s * eps], 0.5).unwrap();
            b.add_child(n, vec![s], 1.0).unwrap();
        }
        (x, b.build().unwrap())
    }

    #[test]
    fn dirac_paths() {
        let x = TreeProcess::dirac(&[vec![1.0], vec![2.0]]).unwrap();
        let y = TreeProcess::dirac(&[vec![3.0], vec![5.0]]).unwrap();
        let (v, plan) = aw_distance(&x, &y, 2.0).unwrap();
        assert!((v - 13f64.sqrt()).abs() < 1e-12);
        assert_eq!(plan.leaf_pairs(), &[(2, 2, 1.0)]);
        assert!(check_bicausal(&plan));
    }

    #[test]
    fn epsilon_example_values() {
        let (x, y) = eps_pair(0.1);
        let (v1, plan) = aw_distance(&x, &y, 1.0).unwrap();
        assert!((v1 - 1.1).abs() < 1e-12);
        assert!(check_bicausal(&plan));
        let (v2, _) = aw_distance(&x, &y, 2.0).unwrap();
        assert!((v2 - 2.01f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn from_pairs_recovers_kernels() {
        let (x, y) = eps_pair(0.1);
        let (_, plan) = aw_distance(&x, &y, 2.0).unwrap();
        let rebuilt =
            BicausalPlan::from_pairs(x.clone(), y.clone(), plan.leaf_pairs().to_vec(), 2.0).unwrap();
        assert!((rebuilt.value() - plan.value()).abs() < 1e-12);
        for (k, kernel) in plan.kernels() {
            let other = rebuilt.kernel(k.0, k.1).unwrap();
            for (a, b) in kernel.entries().iter().zip(other.entries()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let x = TreeProcess::dirac(&[vec![1.0], vec![2.0]]).unwrap();
        let y = TreeProcess::dirac(&[vec![1.0]]).unwrap();
        assert!(matches!(aw_distance(&x, &y, 1.0), Err(Error::ShapeMismatch(_))));
    }
}
