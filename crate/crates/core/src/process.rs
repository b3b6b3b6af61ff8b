//! Scenario trees: finitely supported filtered processes whose filtration is
//! the tree itself.
//!
//! A [`TreeProcess`] of depth `T` has a value-less root at level 0 and carries a
//! real vector at every node of levels `1..=T`. Edge probabilities are
//! conditional: the children of a node carry probabilities summing to one.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on probability sums.
pub const PROB_TOL: f64 = 1e-12;

/// One node of the JSON tree schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawNode {
    pub id: u64,
    pub parent: Option<u64>,
    pub time: usize,
    pub value: Option<Vec<f64>>,
    pub prob: f64,
}

/// The JSON tree schema, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTree {
    pub depth: usize,
    pub value_dims: Vec<usize>,
    pub nodes: Vec<RawNode>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    ZeroDepth,
    DimsLength { expected: usize, found: usize },
    ZeroDim { time: usize },
    DuplicateId { id: u64 },
    RootCount { found: usize },
    RootLevel { id: u64, time: usize },
    RootValue { id: u64 },
    RootProb { id: u64, prob: f64 },
    UnknownParent { id: u64, parent: u64 },
    LevelMismatch { id: u64, time: usize, parent_time: usize },
    TooDeep { id: u64, time: usize },
    ValueDim { id: u64, expected: usize, found: usize },
    NonFiniteValue { id: u64 },
    NonPositiveProb { id: u64, prob: f64 },
    LeafDepth { id: u64, time: usize },
    ProbSum { id: u64, sum: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            ZeroDepth => write!(f, "depth must be at least 1"),
            DimsLength { expected, found } => {
                write!(f, "value_dims has {found} entries, expected {expected}")
            }
            ZeroDim { time } => write!(f, "value dimension at time {time} is zero"),
            DuplicateId { id } => write!(f, "node id {id} appears more than once"),
            RootCount { found } => write!(f, "expected exactly one root, found {found}"),
            RootLevel { id, time } => write!(f, "root {id} sits at time {time}, expected 0"),
            RootValue { id } => write!(f, "root {id} carries a value"),
            RootProb { id, prob } => write!(f, "root {id} has prob {prob}, expected 1"),
            UnknownParent { id, parent } => write!(f, "node {id} has unknown parent {parent}"),
            LevelMismatch { id, time, parent_time } => write!(
                f,
                "node {id} at time {time} has parent at time {parent_time}"
            ),
            TooDeep { id, time } => write!(f, "node {id} at time {time} exceeds the depth"),
            ValueDim { id, expected, found } => write!(
                f,
                "node {id} has value of dimension {found}, expected {expected}"
            ),
            NonFiniteValue { id } => write!(f, "node {id} has a non-finite value"),
            NonPositiveProb { id, prob } => {
                write!(f, "node {id} has non-positive probability {prob}")
            }
            LeafDepth { id, time } => write!(f, "leaf {id} at time {time} is above the depth"),
            ProbSum { id, sum } => write!(f, "children of node {id} have probabilities summing to {sum}"),
        }
    }
}

/// Checks every structural invariant of a raw tree and returns the violations.
pub fn validate(raw: &RawTree) -> Vec<Violation> {
    let mut out = Vec::new();
    if raw.depth == 0 {
        out.push(Violation::ZeroDepth);
    }
    if raw.value_dims.len() != raw.depth {
        out.push(Violation::DimsLength { expected: raw.depth, found: raw.value_dims.len() });
    }
    for (i, &d) in raw.value_dims.iter().enumerate() {
        if d == 0 {
            out.push(Violation::ZeroDim { time: i + 1 });
        }
    }

    let mut by_id: HashMap<u64, &RawNode> = HashMap::with_capacity(raw.nodes.len());
    for n in &raw.nodes {
        if by_id.insert(n.id, n).is_some() {
            out.push(Violation::DuplicateId { id: n.id });
        }
    }

    let roots: Vec<&RawNode> = raw.nodes.iter().filter(|n| n.parent.is_none()).collect();
    if roots.len() != 1 {
        out.push(Violation::RootCount { found: roots.len() });
    }
    for r in &roots {
        if r.time != 0 {
            out.push(Violation::RootLevel { id: r.id, time: r.time });
        }
        if r.value.is_some() {
            out.push(Violation::RootValue { id: r.id });
        }
        if (r.prob - 1.0).abs() > PROB_TOL {
            out.push(Violation::RootProb { id: r.id, prob: r.prob });
        }
    }

    let mut child_sum: HashMap<u64, f64> = HashMap::new();
    for n in &raw.nodes {
        let Some(pid) = n.parent else { continue };
        let Some(parent) = by_id.get(&pid) else {
            out.push(Violation::UnknownParent { id: n.id, parent: pid });
            continue;
        };
        *child_sum.entry(pid).or_insert(0.0) += n.prob;
        if n.time != parent.time + 1 {
            out.push(Violation::LevelMismatch { id: n.id, time: n.time, parent_time: parent.time });
        }
        if n.time > raw.depth || n.time == 0 {
            out.push(Violation::TooDeep { id: n.id, time: n.time });
        }
        if !(n.prob > 0.0) || !n.prob.is_finite() {
            out.push(Violation::NonPositiveProb { id: n.id, prob: n.prob });
        }
        let expected = n
            .time
            .checked_sub(1)
            .and_then(|t| raw.value_dims.get(t))
            .copied();
        match (&n.value, expected) {
            (Some(v), Some(d)) => {
                if v.len() != d {
                    out.push(Violation::ValueDim { id: n.id, expected: d, found: v.len() });
                }
                if v.iter().any(|x| !x.is_finite()) {
                    out.push(Violation::NonFiniteValue { id: n.id });
                }
            }
            (None, Some(d)) => out.push(Violation::ValueDim { id: n.id, expected: d, found: 0 }),
            _ => {}
        }
    }

    for n in &raw.nodes {
        match child_sum.get(&n.id) {
            Some(&s) => {
                if (s - 1.0).abs() > PROB_TOL {
                    out.push(Violation::ProbSum { id: n.id, sum: s });
                }
            }
            None => {
                if n.time < raw.depth {
                    out.push(Violation::LeafDepth { id: n.id, time: n.time });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    /// External id, as given in the JSON form.
    pub id: u64,
    pub parent: Option<usize>,
    pub level: usize,
    /// Empty for the root.
    pub value: Vec<f64>,
    /// Conditional probability of this node given its parent.
    pub prob: f64,
}

/// A validated scenario tree.
///
/// Nodes are stored level by level (root at index 0); within a level they keep
/// the order in which they were supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeProcess {
    depth: usize,
    value_dims: Vec<usize>,
    nodes: Vec<Node>,
    children: Vec<Vec<usize>>,
    levels: Vec<Vec<usize>>,
    level_pos: Vec<usize>,
    mass: Vec<f64>,
}

impl TreeProcess {
    pub fn from_raw(raw: &RawTree) -> Result<Self> {
        let violations = validate(raw);
        if !violations.is_empty() {
            return Err(Error::InvalidTree(violations));
        }
        let index_of: HashMap<u64, usize> =
            raw.nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let mut order: Vec<usize> = (0..raw.nodes.len()).collect();
        order.sort_by_key(|&i| raw.nodes[i].time);
        let mut new_index = vec![0usize; raw.nodes.len()];
        for (k, &i) in order.iter().enumerate() {
            new_index[i] = k;
        }
        let nodes = order
            .iter()
            .map(|&i| {
                let n = &raw.nodes[i];
                Node {
                    id: n.id,
                    parent: n.parent.map(|p| new_index[index_of[&p]]),
                    level: n.time,
                    value: n.value.clone().unwrap_or_default(),
                    prob: n.prob,
                }
            })
            .collect();
        Ok(Self::assemble(raw.depth, raw.value_dims.clone(), nodes))
    }

    pub fn to_raw(&self) -> RawTree {
        RawTree {
            depth: self.depth,
            value_dims: self.value_dims.clone(),
            nodes: self
                .nodes
                .iter()
                .map(|n| RawNode {
                    id: n.id,
                    parent: n.parent.map(|p| self.nodes[p].id),
                    time: n.level,
                    value: if n.level == 0 { None } else { Some(n.value.clone()) },
                    prob: n.prob,
                })
                .collect(),
        }
    }

    /// Builds the derived index structures. `nodes` must be sorted by level
    /// with the root first and parents referring to indices.
    fn assemble(depth: usize, value_dims: Vec<usize>, nodes: Vec<Node>) -> Self {
        let n = nodes.len();
        let mut children = vec![Vec::new(); n];
        let mut levels = vec![Vec::new(); depth + 1];
        let mut level_pos = vec![0; n];
        let mut mass = vec![1.0; n];
        for (i, node) in nodes.iter().enumerate() {
            level_pos[i] = levels[node.level].len();
            levels[node.level].push(i);
            if let Some(p) = node.parent {
                children[p].push(i);
                mass[i] = mass[p] * node.prob;
            }
        }
        TreeProcess { depth, value_dims, nodes, children, levels, level_pos, mass }
    }

    /// A deterministic process following a single path.
    pub fn dirac(path: &[Vec<f64>]) -> Result<Self> {
        if path.is_empty() {
            return Err(Error::input("a path needs at least one time step"));
        }
        let dims = path.iter().map(Vec::len).collect();
        let mut b = TreeBuilder::new(dims)?;
        let mut at = b.root();
        for v in path {
            at = b.add_child(at, v.clone(), 1.0)?;
        }
        b.build()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn value_dims(&self) -> &[usize] {
        &self.value_dims
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    /// Node indices at time level `t`.
    pub fn level(&self, t: usize) -> &[usize] {
        &self.levels[t]
    }

    pub fn leaves(&self) -> &[usize] {
        &self.levels[self.depth]
    }

    /// Position of node `i` within its level.
    pub fn level_pos(&self, i: usize) -> usize {
        self.level_pos[i]
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.nodes[i].value
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.nodes[i].prob
    }

    /// Unconditional probability of reaching node `i`.
    pub fn mass(&self, i: usize) -> f64 {
        self.mass[i]
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    /// Ancestor of `i` at level `t` (`t` at most the level of `i`).
    pub fn ancestor(&self, mut i: usize, t: usize) -> usize {
        while self.nodes[i].level > t {
            i = self.nodes[i].parent.expect("non-root node has a parent");
        }
        i
    }

    /// Values along the root-to-node path, excluding the root.
    pub fn path(&self, i: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.nodes[i].level);
        let mut at = i;
        while let Some(p) = self.nodes[at].parent {
            out.push(self.nodes[at].value.clone());
            at = p;
        }
        out.reverse();
        out
    }

    pub fn same_shape(&self, other: &TreeProcess) -> bool {
        self.depth == other.depth && self.value_dims == other.value_dims
    }

    pub fn ensure_same_shape(&self, other: &TreeProcess) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::shape(format!(
                "depth {} dims {:?} vs depth {} dims {:?}",
                self.depth, self.value_dims, other.depth, other.value_dims
            )))
        }
    }

    /// Same tree structure with every node value replaced. `values[i]` is the
    /// new value of node index `i` (ignored for the root).
    pub fn relabel(&self, values: &[Vec<f64>]) -> Result<Self> {
        if values.len() != self.nodes.len() {
            return Err(Error::input("one value per node is required"));
        }
        let mut out = self.clone();
        for (i, v) in values.iter().enumerate().skip(1) {
            let d = self.value_dims[self.nodes[i].level - 1];
            if v.len() != d || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::input(format!("bad label for node {}", self.nodes[i].id)));
            }
            out.nodes[i].value = v.clone();
        }
        Ok(out)
    }
}

/// Incremental construction of a [`TreeProcess`]; ids are assigned in
/// insertion order.
#[derive(Debug, Clone)]
pub struct TreeBuilder {
    value_dims: Vec<usize>,
    nodes: Vec<Node>,
}

impl TreeBuilder {
    pub fn new(value_dims: Vec<usize>) -> Result<Self> {
        if value_dims.is_empty() {
            return Err(Error::input("depth must be at least 1"));
        }
        let root = Node { id: 0, parent: None, level: 0, value: Vec::new(), prob: 1.0 };
        Ok(TreeBuilder { value_dims, nodes: vec![root] })
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn add_child(&mut self, parent: usize, value: Vec<f64>, prob: f64) -> Result<usize> {
        let level = self
            .nodes
            .get(parent)
            .map(|p| p.level + 1)
            .ok_or_else(|| Error::input(format!("unknown parent index {parent}")))?;
        let id = self.nodes.len();
        self.nodes.push(Node { id: id as u64, parent: Some(parent), level, value, prob });
        Ok(id)
    }

    pub fn build(self) -> Result<TreeProcess> {
        let raw = RawTree {
            depth: self.value_dims.len(),
            value_dims: self.value_dims.clone(),
            nodes: self
                .nodes
                .iter()
                .map(|n| RawNode {
                    id: n.id,
                    parent: n.parent.map(|p| p as u64),
                    time: n.level,
                    value: if n.parent.is_none() { None } else { Some(n.value.clone()) },
                    prob: n.prob,
                })
                .collect(),
        };
        TreeProcess::from_raw(&raw)
    }
}

/// Law of the value path, forgetting the filtration.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLaw {
    pub atoms: Vec<PathAtom>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathAtom {
    pub path: Vec<Vec<f64>>,
    pub mass: f64,
}

impl PathLaw {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }
}

/// One atom per leaf, with the product of edge probabilities as its mass.
pub fn path_law(proc: &TreeProcess) -> PathLaw {
    PathLaw {
        atoms: proc
            .leaves()
            .iter()
            .map(|&l| PathAtom { path: proc.path(l), mass: proc.mass(l) })
            .collect(),
    }
}

/// Euclidean distance between two points of equal dimension.
#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// One time step's contribution to `d_p^p`.
#[inline]
pub fn step_cost(a: &[f64], b: &[f64], p: f64) -> f64 {
    let d = euclidean(a, b);
    if p == 1.0 {
        d
    } else if p == 2.0 {
        d * d
    } else {
        d.powf(p)
    }
}

/// `p`-th power of the path metric: the sum over time steps of the `p`-th
/// powers of the per-step Euclidean distances.
pub fn path_cost(x: &[Vec<f64>], y: &[Vec<f64>], p: f64) -> f64 {
    x.iter().zip(y).map(|(a, b)| step_cost(a, b, p)).sum()
}

/// The path metric `(sum_t |x_t - y_t|^p)^(1/p)`.
pub fn path_distance(x: &[Vec<f64>], y: &[Vec<f64>], p: f64) -> Result<f64> {
    check_order(p)?;
    if x.len() != y.len() {
        return Err(Error::shape(format!("paths of length {} and {}", x.len(), y.len())));
    }
    for (t, (a, b)) in x.iter().zip(y).enumerate() {
        if a.len() != b.len() {
            return Err(Error::shape(format!(
                "time {}: dimension {} vs {}",
                t + 1,
                a.len(),
                b.len()
            )));
        }
    }
    Ok(path_cost(x, y, p).powf(1.0 / p))
}

pub(crate) fn check_order(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("order p must lie in [1, inf), got {p}")))
    }
}

/// Parameters for [`random_tree`].
#[derive(Debug, Clone)]
pub struct RandomTreeConfig {
    pub value_dims: Vec<usize>,
    /// Each node draws its branching uniformly from `1..=max_branching`.
    pub max_branching: usize,
    /// Node values are uniform in `[-scale, scale]`.
    pub scale: f64,
}

/// A random tree with uniformly drawn branchings, values and (normalised)
/// edge probabilities bounded away from zero.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomTreeConfig) -> TreeProcess {
    let depth = cfg.value_dims.len();
    let mut b = TreeBuilder::new(cfg.value_dims.clone()).expect("depth >= 1");
    let mut frontier = vec![b.root()];
    for t in 0..depth {
        let mut next = Vec::new();
        for &v in &frontier {
            let k = rng.gen_range(1..=cfg.max_branching.max(1));
            let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..1.0)).collect();
            let total: f64 = weights.iter().sum();
            let mut acc = 0.0;
            for (j, w) in weights.iter().enumerate() {
                // last child absorbs rounding so the sum is 1 to the last bit
                let prob = if j + 1 == k { 1.0 - acc } else { w / total };
                acc += prob;
                let value =
                    (0..cfg.value_dims[t]).map(|_| rng.gen_range(-cfg.scale..=cfg.scale)).collect();
                next.push(b.add_child(v, value, prob).expect("valid parent"));
            }
        }
        frontier = next;
    }
    b.build().expect("random trees are valid")
}
