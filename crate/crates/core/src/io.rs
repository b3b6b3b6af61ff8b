//! JSON and CSV forms of trees, plans, curves and flows.
//!
//! Floats are written as the shortest decimal that reads back to the same
//! double, so every object re-parses bit-exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bicausal::BicausalPlan;
use crate::curves::{CommonSpaceFlow, GridCurve, Interpolation, IntervalQuotient};
use crate::error::{Error, Result};
use crate::process::{RawTree, TreeProcess};

pub fn tree_from_json(s: &str) -> Result<TreeProcess> {
    let raw: RawTree = serde_json::from_str(s)?;
    TreeProcess::from_raw(&raw)
}

pub fn tree_to_json(t: &TreeProcess) -> String {
    serde_json::to_string_pretty(&t.to_raw()).expect("trees serialize")
}

pub fn read_tree(path: impl AsRef<Path>) -> Result<TreeProcess> {
    tree_from_json(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairJson {
    pub leaf_x: u64,
    pub leaf_y: u64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanJson {
    pub pairs: Vec<PairJson>,
    pub value: f64,
    pub p: f64,
}

impl PlanJson {
    pub fn from_plan(plan: &BicausalPlan) -> Self {
        PlanJson {
            pairs: plan
                .leaf_pairs()
                .iter()
                .map(|&(a, b, mass)| PairJson {
                    leaf_x: plan.x().node(a).id,
                    leaf_y: plan.y().node(b).id,
                    mass,
                })
                .collect(),
            value: plan.value(),
            p: plan.p(),
        }
    }

    /// Leaf pairs as node indices of `x` and `y`.
    pub fn index_pairs(&self, x: &TreeProcess, y: &TreeProcess) -> Result<Vec<(usize, usize, f64)>> {
        self.pairs
            .iter()
            .map(|e| {
                let a = x
                    .index_of(e.leaf_x)
                    .ok_or_else(|| Error::input(format!("unknown leaf_x {}", e.leaf_x)))?;
                let b = y
                    .index_of(e.leaf_y)
                    .ok_or_else(|| Error::input(format!("unknown leaf_y {}", e.leaf_y)))?;
                Ok((a, b, e.mass))
            })
            .collect()
    }

    pub fn into_plan(self, x: TreeProcess, y: TreeProcess) -> Result<BicausalPlan> {
        let pairs = self.index_pairs(&x, &y)?;
        BicausalPlan::from_pairs(x, y, pairs, self.p)
    }
}

pub fn plan_to_json(plan: &BicausalPlan) -> String {
    serde_json::to_string_pretty(&PlanJson::from_plan(plan)).expect("plans serialize")
}

pub fn plan_from_json(s: &str) -> Result<PlanJson> {
    Ok(serde_json::from_str(s)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InterpolationJson {
    #[default]
    Linear,
    PiecewiseConstant,
}

impl From<Interpolation> for InterpolationJson {
    fn from(i: Interpolation) -> Self {
        match i {
            Interpolation::Linear => InterpolationJson::Linear,
            Interpolation::PiecewiseConstant => InterpolationJson::PiecewiseConstant,
        }
    }
}

impl From<InterpolationJson> for Interpolation {
    fn from(i: InterpolationJson) -> Self {
        match i {
            InterpolationJson::Linear => Interpolation::Linear,
            InterpolationJson::PiecewiseConstant => Interpolation::PiecewiseConstant,
        }
    }
}

/// `labels[node_id][grid_index]`; the root has no labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowJson {
    pub base: RawTree,
    pub grid: Vec<f64>,
    pub labels: BTreeMap<u64, BTreeMap<usize, Vec<f64>>>,
    #[serde(default)]
    pub interpolation: InterpolationJson,
}

impl FlowJson {
    pub fn from_flow(flow: &CommonSpaceFlow) -> Self {
        let base = flow.base();
        let mut labels: BTreeMap<u64, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
        for i in 1..base.len() {
            let per = (0..flow.grid().len()).map(|k| (k, flow.labels(k)[i].clone())).collect();
            labels.insert(base.node(i).id, per);
        }
        FlowJson {
            base: base.to_raw(),
            grid: flow.grid().to_vec(),
            labels,
            interpolation: flow.interpolation().into(),
        }
    }

    pub fn into_flow(self) -> Result<CommonSpaceFlow> {
        let base = TreeProcess::from_raw(&self.base)?;
        let mut labels = vec![vec![Vec::new(); base.len()]; self.grid.len()];
        for (i, node) in base.nodes().iter().enumerate().skip(1) {
            let per = self
                .labels
                .get(&node.id)
                .ok_or_else(|| Error::input(format!("no labels for node {}", node.id)))?;
            for (k, row) in labels.iter_mut().enumerate() {
                row[i] = per
                    .get(&k)
                    .ok_or_else(|| Error::input(format!("node {} lacks grid index {k}", node.id)))?
                    .clone();
            }
        }
        CommonSpaceFlow::new(&base, self.grid, labels, self.interpolation.into())
    }
}

pub fn flow_to_json(flow: &CommonSpaceFlow) -> String {
    serde_json::to_string_pretty(&FlowJson::from_flow(flow)).expect("flows serialize")
}

pub fn flow_from_json(s: &str) -> Result<CommonSpaceFlow> {
    serde_json::from_str::<FlowJson>(s)?.into_flow()
}

/// A grid curve file: processes listed in grid order, optional plans between
/// neighbours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub grid: Vec<f64>,
    pub processes: Vec<RawTree>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plans: Option<Vec<PlanJson>>,
}

impl CurveJson {
    pub fn from_curve(c: &GridCurve) -> Self {
        CurveJson {
            p: Some(c.p()),
            grid: c.grid().to_vec(),
            processes: c.processes().iter().map(TreeProcess::to_raw).collect(),
            plans: c.plans().map(|ps| ps.iter().map(PlanJson::from_plan).collect()),
        }
    }

    /// `default_p` applies when the file does not fix `p`.
    pub fn into_curve(self, default_p: f64) -> Result<GridCurve> {
        let p = self.p.unwrap_or(default_p);
        let processes: Vec<TreeProcess> =
            self.processes.iter().map(TreeProcess::from_raw).collect::<Result<_>>()?;
        let curve = GridCurve::new(self.grid, processes.clone(), p)?;
        match self.plans {
            None => Ok(curve),
            Some(plans) => {
                if plans.len() + 1 != processes.len() {
                    return Err(Error::input("one plan per grid interval is required"));
                }
                let plans = plans
                    .into_iter()
                    .enumerate()
                    .map(|(i, pj)| pj.into_plan(processes[i].clone(), processes[i + 1].clone()))
                    .collect::<Result<_>>()?;
                curve.with_plans(plans)
            }
        }
    }
}

pub fn curve_from_json(s: &str, default_p: f64) -> Result<GridCurve> {
    serde_json::from_str::<CurveJson>(s)?.into_curve(default_p)
}

pub fn curve_to_json(c: &GridCurve) -> String {
    serde_json::to_string_pretty(&CurveJson::from_curve(c)).expect("curves serialize")
}

/// Sample paths: a list of paths, each a list of per-time vectors.
pub fn samples_from_json(s: &str) -> Result<Vec<Vec<Vec<f64>>>> {
    Ok(serde_json::from_str(s)?)
}

/// `u_start,u_end,metric_derivative` with a header row.
pub fn metric_derivative_csv(q: &[IntervalQuotient]) -> String {
    let mut out = String::from("u_start,u_end,metric_derivative\n");
    for r in q {
        let _ = writeln!(out, "{},{},{}", r.start, r.end, r.quotient);
    }
    out
}

/// Long-format particle positions: one row per leaf, grid point, time step
/// and coordinate.
pub fn particles_csv(flow: &CommonSpaceFlow) -> String {
    let base = flow.base();
    let mut out = String::from("leaf,mass,u,t,coord,value\n");
    for &leaf in base.leaves() {
        let id = base.node(leaf).id;
        let mass = base.mass(leaf);
        for (k, &u) in flow.grid().iter().enumerate() {
            for (t, v) in flow.particle(leaf, k).iter().enumerate() {
                for (c, x) in v.iter().enumerate() {
                    let _ = writeln!(out, "{id},{mass},{u},{},{c},{x}", t + 1);
                }
            }
        }
    }
    out
}
