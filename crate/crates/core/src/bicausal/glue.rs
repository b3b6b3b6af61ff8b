use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::process::TreeProcess;

use super::check::CHECK_TOL;
use super::BicausalPlan;

/// A node of the glued product tree: one node per process, all at `level`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductNode {
    pub tuple: Vec<usize>,
    pub parent: Option<usize>,
    pub level: usize,
    /// Conditional probability given the parent tuple.
    pub prob: f64,
    /// Unconditional probability.
    pub mass: f64,
}

/// Joint law of a chain of processes built by composing bicausal kernels.
///
/// The product tree is stored level by level with the root first; its leaves
/// are the support of the coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticausalCoupling {
    processes: Vec<TreeProcess>,
    nodes: Vec<ProductNode>,
    plans: Vec<BicausalPlan>,
}

impl MulticausalCoupling {
    pub fn processes(&self) -> &[TreeProcess] {
        &self.processes
    }

    pub fn plans(&self) -> &[BicausalPlan] {
        &self.plans
    }

    pub fn nodes(&self) -> &[ProductNode] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        self.processes[0].depth()
    }

    /// Leaf tuples with their masses.
    pub fn leaf_tuples(&self) -> impl Iterator<Item = (&[usize], f64)> + '_ {
        let depth = self.depth();
        self.nodes.iter().filter(move |n| n.level == depth).map(|n| (n.tuple.as_slice(), n.mass))
    }

    pub fn num_leaves(&self) -> usize {
        self.leaf_tuples().count()
    }

    /// Marginal on the leaves of factor `i`, as `(leaf, mass)` in leaf order.
    pub fn marginal(&self, i: usize) -> Vec<(usize, f64)> {
        let proc = &self.processes[i];
        let mut m = vec![0.0; proc.leaves().len()];
        for (tuple, mass) in self.leaf_tuples() {
            m[proc.level_pos(tuple[i])] += mass;
        }
        proc.leaves().iter().copied().zip(m).collect()
    }

    /// Joint law of factors `i` and `j` as leaf pairs with positive mass.
    pub fn pair_marginal(&self, i: usize, j: usize) -> Vec<(usize, usize, f64)> {
        let mut acc: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
        for (tuple, mass) in self.leaf_tuples() {
            *acc.entry((tuple[i], tuple[j])).or_insert(0.0) += mass;
        }
        acc.into_iter().map(|((a, b), m)| (a, b, m)).collect()
    }
}

/// Glues consecutive bicausal plans into one multicausal coupling of the
/// whole chain. Plan `i` must couple process `i` with process `i + 1`.
///
/// Children of a product node `(v_0, .., v_n)` are drawn Markov-style: `c_0`
/// from `P_0(. | v_0)`, then each `c_{i+1}` from the conditional of plan `i`'s
/// kernel at `(v_i, v_{i+1})` given `c_i`. `max_leaves` bounds every level of
/// the product tree.
pub fn glue(plans: &[BicausalPlan], max_leaves: usize) -> Result<MulticausalCoupling> {
    if plans.is_empty() {
        return Err(Error::input("gluing needs at least one plan"));
    }
    for w in plans.windows(2) {
        if w[0].y() != w[1].x() {
            return Err(Error::input("consecutive plans do not share a process"));
        }
    }
    let mut processes: Vec<TreeProcess> = vec![plans[0].x().clone()];
    processes.extend(plans.iter().map(|p| p.y().clone()));
    for p in &processes[1..] {
        processes[0].ensure_same_shape(p)?;
    }
    let n = processes.len();
    let depth = processes[0].depth();

    let mut nodes = vec![ProductNode {
        tuple: vec![0; n],
        parent: None,
        level: 0,
        prob: 1.0,
        mass: 1.0,
    }];
    let mut frontier = vec![0usize];
    for t in 0..depth {
        let mut next = Vec::new();
        for &pi in &frontier {
            let parent = nodes[pi].tuple.clone();
            let parent_mass = nodes[pi].mass;
            // (child tuple, position of last child within its siblings, prob)
            let first = &processes[0];
            let mut partial: Vec<(Vec<usize>, usize, f64)> = first
                .children(parent[0])
                .iter()
                .enumerate()
                .map(|(r, &c)| (vec![c], r, first.prob(c)))
                .collect();
            for i in 0..n - 1 {
                let kernel = plans[i].kernel(parent[i], parent[i + 1]).ok_or_else(|| {
                    Error::input(format!(
                        "plan {i} has no kernel at the pair ({}, {})",
                        parent[i],
                        parent[i + 1]
                    ))
                })?;
                let succ = processes[i + 1].children(parent[i + 1]);
                let mut extended = Vec::new();
                for (tuple, r, q) in partial {
                    let row_sum: f64 = (0..kernel.cols()).map(|j| kernel.get(r, j)).sum();
                    if row_sum <= 0.0 {
                        continue;
                    }
                    for (j, &d) in succ.iter().enumerate() {
                        let k = kernel.get(r, j);
                        if k > 0.0 {
                            let mut tu = tuple.clone();
                            tu.push(d);
                            extended.push((tu, j, q * k / row_sum));
                        }
                    }
                }
                partial = extended;
            }
            for (tuple, _, q) in partial {
                if q <= 0.0 {
                    continue;
                }
                next.push(nodes.len());
                nodes.push(ProductNode {
                    tuple,
                    parent: Some(pi),
                    level: t + 1,
                    prob: q,
                    mass: parent_mass * q,
                });
            }
            if next.len() > max_leaves {
                return Err(Error::SizeLimit { limit: max_leaves });
            }
        }
        frontier = next;
    }
    Ok(MulticausalCoupling { processes, nodes, plans: plans.to_vec() })
}

/// Largest residual among the factor marginals and the multicausal product
/// identities
///
/// ```text
/// gamma(l_i, J_t) mu_i(J_t[i]) = mu_i(l_i) gamma(J_t)
/// ```
///
/// for every factor `i`, `t` in `1..T`, level-`t` tuple `J_t` and leaf `l_i`
/// below `J_t[i]`.
pub fn multicausal_violation(c: &MulticausalCoupling) -> f64 {
    let depth = c.depth();
    let mut worst: f64 = 0.0;
    for (i, proc) in c.processes.iter().enumerate() {
        for (leaf, m) in c.marginal(i) {
            worst = worst.max((m - proc.mass(leaf)).abs());
        }
    }
    let leaves: Vec<(&[usize], f64)> = c.leaf_tuples().collect();
    for t in 1..depth {
        let prefix = |tuple: &[usize]| -> Vec<usize> {
            tuple.iter().zip(&c.processes).map(|(&l, p)| p.ancestor(l, t)).collect()
        };
        let mut joint: HashMap<Vec<usize>, f64> = HashMap::new();
        for &(tuple, m) in &leaves {
            *joint.entry(prefix(tuple)).or_insert(0.0) += m;
        }
        for (i, proc) in c.processes.iter().enumerate() {
            let mut with_leaf: HashMap<(usize, Vec<usize>), f64> = HashMap::new();
            for &(tuple, m) in &leaves {
                *with_leaf.entry((tuple[i], prefix(tuple))).or_insert(0.0) += m;
            }
            for (pre, &g) in &joint {
                let anc = pre[i];
                for &leaf in proc.leaves().iter().filter(|&&l| proc.ancestor(l, t) == anc) {
                    let lhs = with_leaf.get(&(leaf, pre.clone())).copied().unwrap_or(0.0)
                        * proc.mass(anc);
                    let rhs = proc.mass(leaf) * g;
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
    }
    worst
}

pub fn check_multicausal(c: &MulticausalCoupling) -> bool {
    multicausal_violation(c) <= CHECK_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bicausal::aw_distance;

    #[test]
    fn identical_diracs_glue_to_a_point_mass() {
        let x = TreeProcess::dirac(&[vec![1.0], vec![2.0]]).unwrap();
        let (_, p) = aw_distance(&x, &x, 2.0).unwrap();
        let g = glue(&[p.clone(), p], 1000).unwrap();
        let leaves: Vec<_> = g.leaf_tuples().collect();
        assert_eq!(leaves, vec![(&[2usize, 2, 2][..], 1.0)]);
        assert!(check_multicausal(&g));
    }

    #[test]
    fn broken_chain_is_rejected() {
        let x = TreeProcess::dirac(&[vec![1.0]]).unwrap();
        let y = TreeProcess::dirac(&[vec![2.0]]).unwrap();
        let (_, p) = aw_distance(&x, &y, 2.0).unwrap();
        assert!(glue(&[p.clone(), p], 1000).is_err());
        assert!(glue(&[], 1000).is_err());
    }
}
