//! Information process, canonical representatives and equivalence of trees.
//!
//! The information state of a node at level `T` is its value; at level `t < T`
//! it is the value together with the conditional law of the children's states.
//! Two processes are equivalent (adapted distance zero) exactly when the laws
//! of their level-one states agree, which on finite trees is an isomorphism
//! test of the canonical forms.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::Result;
use crate::process::{TreeBuilder, TreeProcess, PROB_TOL};

/// Recursive value-plus-conditional-law state. `law` is empty at the terminal
/// level and otherwise sorted by [`InfoState::canonical_cmp`] with pairwise
/// distinct states.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoState {
    pub value: Vec<f64>,
    pub law: Vec<(InfoState, f64)>,
}

impl InfoState {
    /// Number of levels below and including this state.
    pub fn height(&self) -> usize {
        1 + self.law.first().map_or(0, |(s, _)| s.height())
    }

    /// Total order: values lexicographically, then the laws entry by entry.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        cmp_values(&self.value, &other.value)
            .then_with(|| self.law.len().cmp(&other.law.len()))
            .then_with(|| {
                for ((a, ma), (b, mb)) in self.law.iter().zip(&other.law) {
                    let o = a.canonical_cmp(b).then_with(|| ma.total_cmp(mb));
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                Ordering::Equal
            })
    }

    /// Equality up to `tol` on values and `max(tol, 1e-12)` on masses.
    pub fn close_to(&self, other: &Self, tol: f64) -> bool {
        if self.value.len() != other.value.len()
            || self.law.len() != other.law.len()
            || self.value.iter().zip(&other.value).any(|(a, b)| (a - b).abs() > tol)
        {
            return false;
        }
        let mass_tol = tol.max(PROB_TOL);
        let mut used = vec![false; other.law.len()];
        'outer: for (s, m) in &self.law {
            for (k, (o, mo)) in other.law.iter().enumerate() {
                if !used[k] && (m - mo).abs() <= mass_tol && s.close_to(o, tol) {
                    used[k] = true;
                    continue 'outer;
                }
            }
            return false;
        }
        true
    }
}

fn cmp_values(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.total_cmp(y);
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

/// Merges `(state, mass)` entries given in node-id order: each entry joins the
/// first earlier group within `tol`, then groups are sorted canonically.
fn merge_law(entries: Vec<(InfoState, f64)>, tol: f64) -> Vec<(InfoState, f64)> {
    let mut groups: Vec<(InfoState, f64)> = Vec::with_capacity(entries.len());
    for (s, m) in entries {
        match groups.iter_mut().find(|(g, _)| g.close_to(&s, tol)) {
            Some(g) => g.1 += m,
            None => groups.push((s, m)),
        }
    }
    groups.sort_by(|a, b| a.0.canonical_cmp(&b.0));
    groups
}

/// States of every node, computed bottom-up. Index = node index; the root's
/// state has an empty value and carries the law of the level-one states.
fn all_states(proc: &TreeProcess, tol: f64) -> Vec<InfoState> {
    let mut states: Vec<Option<InfoState>> = vec![None; proc.len()];
    for t in (0..=proc.depth()).rev() {
        for &v in proc.level(t) {
            let mut kids: Vec<usize> = proc.children(v).to_vec();
            kids.sort_by_key(|&c| proc.node(c).id);
            let entries = kids
                .iter()
                .map(|&c| (states[c].clone().expect("children are computed first"), proc.prob(c)))
                .collect();
            states[v] = Some(InfoState { value: proc.value(v).to_vec(), law: merge_law(entries, tol) });
        }
    }
    states.into_iter().map(|s| s.expect("every node has a state")).collect()
}

/// The information state of every node at levels `1..=T`, keyed by node id.
pub fn information_process(proc: &TreeProcess) -> BTreeMap<u64, InfoState> {
    all_states(proc, 0.0)
        .into_iter()
        .enumerate()
        .skip(1)
        .map(|(i, s)| (proc.node(i).id, s))
        .collect()
}

/// Law of the level-one information state.
pub fn ip1_law(proc: &TreeProcess) -> Vec<(InfoState, f64)> {
    all_states(proc, 0.0).swap_remove(0).law
}

/// Canonical representative: siblings with equal states are merged (exactly
/// at `tol = 0`, greedily within `tol` otherwise, lowest node id wins), children
/// are sorted canonically and node ids are reassigned breadth first.
pub fn canonicalize(proc: &TreeProcess, tol: f64) -> TreeProcess {
    let root = all_states(proc, tol).swap_remove(0);
    let mut b = TreeBuilder::new(proc.value_dims().to_vec()).expect("depth >= 1");
    let mut frontier: Vec<(&InfoState, usize)> = vec![(&root, b.root())];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (state, at) in frontier {
            for (child, m) in &state.law {
                let id = b.add_child(at, child.value.clone(), *m).expect("valid parent");
                next.push((child, id));
            }
        }
        frontier = next;
    }
    b.build().expect("canonical trees are valid")
}

/// Whether two processes have the same canonical form, i.e. adapted distance
/// zero. Values are compared within `tol`.
pub fn equivalent(a: &TreeProcess, b: &TreeProcess, tol: f64) -> Result<bool> {
    a.ensure_same_shape(b)?;
    let sa = all_states(a, tol).swap_remove(0);
    let sb = all_states(b, tol).swap_remove(0);
    Ok(sa.close_to(&sb, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn duplicated_branch() -> TreeProcess {
        let mut b = TreeBuilder::new(vec![1, 1]).unwrap();
        for _ in 0..2 {
            let n = b.add_child(0, vec![0.0], 0.5).unwrap();
            b.add_child(n, vec![1.0], 0.5).unwrap();
            b.add_child(n, vec![-1.0], 0.5).unwrap();
        }
        b.build().unwrap()
    }

    #[test]
    fn chain_states() {
        let d = TreeProcess::dirac(&[vec![1.0], vec![2.0]]).unwrap();
        let ip = information_process(&d);
        let leaf = InfoState { value: vec![2.0], law: vec![] };
        assert_eq!(ip[&2], leaf);
        assert_eq!(ip[&1], InfoState { value: vec![1.0], law: vec![(leaf, 1.0)] });
        assert_eq!(ip[&1].height(), 2);
    }

    #[test]
    fn one_step_states_are_values() {
        let mut b = TreeBuilder::new(vec![1]).unwrap();
        b.add_child(0, vec![0.0], 0.5).unwrap();
        b.add_child(0, vec![1.0], 0.5).unwrap();
        let ip = information_process(&b.build().unwrap());
        assert_eq!(ip[&1].value, vec![0.0]);
        assert_eq!(ip[&2].value, vec![1.0]);
        assert!(ip.values().all(|s| s.law.is_empty()));
    }

    #[test]
    fn duplicated_branch_merges() {
        let t = duplicated_branch();
        let ip = information_process(&t);
        assert_eq!(ip[&1], ip[&4]);
        let c = canonicalize(&t, 0.0);
        assert_eq!(c.len(), 4);
        assert_eq!(c.prob(c.level(1)[0]), 1.0);
        assert!(equivalent(&t, &c, 0.0).unwrap());
        // children sorted by value
        assert_eq!(c.value(c.level(2)[0]), &[-1.0]);
    }

    #[test]
    fn canonical_form_is_idempotent_and_fixed() {
        let c = canonicalize(&duplicated_branch(), 0.0);
        assert_eq!(canonicalize(&c, 0.0), c);
    }

    #[test]
    fn tolerance_merges_near_duplicates() {
        let mut b = TreeBuilder::new(vec![1]).unwrap();
        b.add_child(0, vec![0.0], 0.5).unwrap();
        b.add_child(0, vec![1e-6], 0.5).unwrap();
        let t = b.build().unwrap();
        assert_eq!(canonicalize(&t, 0.0).len(), 3);
        let c = canonicalize(&t, 1e-5);
        assert_eq!(c.len(), 2);
        // lowest id is the representative
        assert_eq!(c.value(1), &[0.0]);
        assert!(!equivalent(&t, &c, 0.0).unwrap());
        assert!(equivalent(&t, &c, 1e-5).unwrap());
    }

    #[test]
    fn equivalence_needs_matching_shapes() {
        let a = TreeProcess::dirac(&[vec![1.0]]).unwrap();
        let b = TreeProcess::dirac(&[vec![1.0], vec![1.0]]).unwrap();
        assert!(equivalent(&a, &b, 0.0).is_err());
        assert!(equivalent(&a, &a, 0.0).unwrap());
    }
}
