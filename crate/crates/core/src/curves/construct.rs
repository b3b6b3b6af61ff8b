use rayon::prelude::*;

use crate::bicausal::{aw_distance, aw_value, glue, BicausalPlan, MulticausalCoupling};
use crate::error::{Error, Result};
use crate::process::{check_order, RawNode, RawTree, TreeProcess};

use super::flow::{CommonSpaceFlow, Interpolation};
use super::{canonical_weights, check_weights, validate_grid, GridCurve};

/// Default bound on the number of nodes per level of a product tree.
pub const DEFAULT_MAX_LEAVES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub max_leaves: usize,
    pub interpolation: Interpolation,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { max_leaves: DEFAULT_MAX_LEAVES, interpolation: Interpolation::Linear }
    }
}

/// The product tree of a glued coupling as a process labelled by factor 0.
fn product_tree(c: &MulticausalCoupling) -> Result<TreeProcess> {
    let first = &c.processes()[0];
    let raw = RawTree {
        depth: first.depth(),
        value_dims: first.value_dims().to_vec(),
        nodes: c
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, n)| RawNode {
                id: i as u64,
                parent: n.parent.map(|p| p as u64),
                time: n.level,
                value: (n.level > 0).then(|| first.value(n.tuple[0]).to_vec()),
                prob: n.prob,
            })
            .collect(),
    };
    TreeProcess::from_raw(&raw)
}

fn factor_labels(c: &MulticausalCoupling, i: usize) -> Vec<Vec<f64>> {
    let proc = &c.processes()[i];
    c.nodes().iter().map(|n| proc.value(n.tuple[i]).to_vec()).collect()
}

/// Displacement interpolation along an optimal bicausal plan: on the product
/// tree of the plan, the label at `u` is `(1 - u) x + u y`.
pub fn geodesic(
    x: &TreeProcess,
    y: &TreeProcess,
    p: f64,
    grid: &[f64],
    opts: FlowOptions,
) -> Result<CommonSpaceFlow> {
    check_order(p)?;
    x.ensure_same_shape(y)?;
    validate_grid(grid)?;
    let (_, plan) = aw_distance(x, y, p)?;
    let coupling = glue(&[plan], opts.max_leaves)?;
    let base = product_tree(&coupling)?;
    let (lx, ly) = (factor_labels(&coupling, 0), factor_labels(&coupling, 1));
    let labels = grid
        .iter()
        .map(|&u| {
            lx.iter()
                .zip(&ly)
                .map(|(a, b)| a.iter().zip(b).map(|(a, b)| (1.0 - u) * a + u * b).collect())
                .collect()
        })
        .collect();
    Ok(CommonSpaceFlow::new(&base, grid.to_vec(), labels, opts.interpolation)?.with_coupling(coupling))
}

/// Realises a grid curve on one common tree: optimal (or attached) plans
/// between neighbours are glued into a multicausal coupling whose product
/// tree carries, at grid point `u_i`, the values of the `i`-th factor.
pub fn represent_curve(curve: &GridCurve, opts: FlowOptions) -> Result<CommonSpaceFlow> {
    let plans: Vec<BicausalPlan> = match curve.plans() {
        Some(p) => p.to_vec(),
        None => curve
            .processes()
            .par_windows(2)
            .map(|w| aw_distance(&w[0], &w[1], curve.p()).map(|r| r.1))
            .collect::<Result<_>>()?,
    };
    let coupling = glue(&plans, opts.max_leaves)?;
    let base = product_tree(&coupling)?;
    let labels = (0..curve.processes().len()).map(|i| factor_labels(&coupling, i)).collect();
    Ok(CommonSpaceFlow::new(&base, curve.grid().to_vec(), labels, opts.interpolation)?
        .with_coupling(coupling))
}

/// Common-space representation of `seq[0], seq[1], ..., limit`.
///
/// `weights[n]` is the length of the parameter interval between the `n`-th
/// process and its successor (the last one leads to `limit`); they must be
/// positive with sum at most one, and the final interval is stretched so that
/// `limit` sits at `u = 1`. Without weights the canonical ones are used:
/// distances normalised to sum to one; if some but not all distances vanish
/// they are averaged with uniform weights so every interval has positive
/// length.
pub fn skorokhod(
    seq: &[TreeProcess],
    limit: &TreeProcess,
    p: f64,
    weights: Option<&[f64]>,
    opts: FlowOptions,
) -> Result<CommonSpaceFlow> {
    check_order(p)?;
    if seq.is_empty() {
        return Err(Error::input("the sequence is empty"));
    }
    let mut all = seq.to_vec();
    all.push(limit.clone());
    for q in &all[1..] {
        all[0].ensure_same_shape(q)?;
    }
    let n = seq.len();
    let b = match weights {
        Some(w) => {
            check_weights(w, n)?;
            w.to_vec()
        }
        None => {
            let d: Vec<f64> =
                all.par_windows(2).map(|w| aw_value(&w[0], &w[1], p)).collect::<Result<_>>()?;
            let c = canonical_weights(&d);
            if c.contains(&0.0) {
                c.iter().map(|b| 0.5 * b + 0.5 / n as f64).collect()
            } else {
                c
            }
        }
    };
    let mut grid = Vec::with_capacity(n + 1);
    let mut u = 0.0;
    grid.push(u);
    for &w in &b[..n - 1] {
        u += w;
        grid.push(u);
    }
    if grid.last().is_some_and(|&last| last >= 1.0) {
        return Err(Error::input("partial sums of the weights must stay below 1"));
    }
    grid.push(1.0);
    let curve = GridCurve::new(grid, all, p)?;
    represent_curve(&curve, opts)
}
