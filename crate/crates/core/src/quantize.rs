//! Empirical scenario trees from sample paths.
//!
//! Samples are clustered level by level: the time-1 values of all samples
//! are split into at most `branching[0]` clusters, then within each cluster
//! the time-2 values into at most `branching[1]` clusters, and so on. Node
//! values are cluster means, edge probabilities are empirical frequencies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::process::{euclidean, TreeBuilder, TreeProcess};

const RESTARTS: usize = 8;
const MAX_ITERS: usize = 200;

/// Builds an empirical tree from sample paths; deterministic for a fixed seed.
pub fn quantize_paths(samples: &[Vec<Vec<f64>>], branching: &[usize], seed: u64) -> Result<TreeProcess> {
    let first = samples.first().ok_or_else(|| Error::input("no samples"))?;
    let depth = first.len();
    if depth == 0 {
        return Err(Error::input("sample paths are empty"));
    }
    if branching.len() != depth {
        return Err(Error::shape(format!(
            "{} branching factors for paths of length {depth}",
            branching.len()
        )));
    }
    if branching.iter().any(|&b| b < 1) {
        return Err(Error::input("branching factors must be at least 1"));
    }
    let dims: Vec<usize> = first.iter().map(Vec::len).collect();
    for s in samples {
        if s.len() != depth || s.iter().zip(&dims).any(|(v, &d)| v.len() != d) {
            return Err(Error::shape("samples differ in length or dimension"));
        }
        if s.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::input("non-finite sample value"));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = TreeBuilder::new(dims)?;
    let all: Vec<usize> = (0..samples.len()).collect();
    let mut stack = vec![(b.root(), 0usize, all)];
    // depth-first; children are pushed in reverse so they are built in order
    while let Some((node, t, members)) = stack.pop() {
        if t == depth {
            continue;
        }
        let points: Vec<&[f64]> = members.iter().map(|&i| samples[i][t].as_slice()).collect();
        let groups = cluster(&points, branching[t], &mut rng);
        let mut created = Vec::with_capacity(groups.len());
        for g in &groups {
            let value = centroid(g.iter().map(|&k| points[k]));
            let prob = g.len() as f64 / members.len() as f64;
            let child = b.add_child(node, value, prob)?;
            created.push((child, g.iter().map(|&k| members[k]).collect::<Vec<_>>()));
        }
        for (child, m) in created.into_iter().rev() {
            stack.push((child, t + 1, m));
        }
    }
    b.build()
}

fn centroid<'a>(mut pts: impl Iterator<Item = &'a [f64]> + Clone) -> Vec<f64> {
    let first = pts.clone().next().expect("clusters are nonempty").to_vec();
    if pts.clone().all(|p| p == first.as_slice()) {
        return first;
    }
    let mut sum = vec![0.0; first.len()];
    let mut n = 0usize;
    for p in pts.by_ref() {
        sum.iter_mut().zip(p).for_each(|(s, v)| *s += v);
        n += 1;
    }
    sum.iter().map(|s| s / n as f64).collect()
}

fn lex(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Partitions `points` (by index) into at most `k` nonempty groups, sorted by
/// their means. Uses k-means with k-means++ seeding and a few restarts; if
/// there are at most `k` distinct points each becomes its own group.
fn cluster<R: Rng>(points: &[&[f64]], k: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut distinct: Vec<&[f64]> = points.to_vec();
    distinct.sort_by(|a, b| lex(a, b));
    distinct.dedup();
    if distinct.len() <= k {
        return distinct
            .iter()
            .map(|d| (0..points.len()).filter(|&i| points[i] == *d).collect())
            .collect();
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..RESTARTS {
        let (sse, assign) = lloyd(points, k, rng);
        if best.as_ref().map_or(true, |b| sse < b.0) {
            best = Some((sse, assign));
        }
    }
    let assign = best.expect("at least one restart").1;
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &a) in assign.iter().enumerate() {
        groups[a].push(i);
    }
    groups.retain(|g| !g.is_empty());
    let mut keyed: Vec<(Vec<f64>, Vec<usize>)> = groups
        .into_iter()
        .map(|g| (centroid(g.iter().map(|&i| points[i])), g))
        .collect();
    keyed.sort_by(|a, b| lex(&a.0, &b.0));
    keyed.into_iter().map(|(_, g)| g).collect()
}

fn lloyd<R: Rng>(points: &[&[f64]], k: usize, rng: &mut R) -> (f64, Vec<usize>) {
    let sq = |a: &[f64], b: &[f64]| {
        let d = euclidean(a, b);
        d * d
    };
    // k-means++ seeding
    let mut centers: Vec<Vec<f64>> = vec![points[rng.gen_range(0..points.len())].to_vec()];
    while centers.len() < k {
        let d2: Vec<f64> = points
            .iter()
            .map(|p| centers.iter().map(|c| sq(p, c)).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = d2.iter().sum();
        let mut r = rng.gen::<f64>() * total;
        let mut pick = d2.len() - 1;
        for (i, &w) in d2.iter().enumerate() {
            if r < w {
                pick = i;
                break;
            }
            r -= w;
        }
        centers.push(points[pick].to_vec());
    }

    let nearest = |p: &[f64], centers: &[Vec<f64>]| -> usize {
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (j, c) in centers.iter().enumerate() {
            let d = sq(p, c);
            if d < bd {
                bd = d;
                best = j;
            }
        }
        best
    };
    let mut assign: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
    for _ in 0..MAX_ITERS {
        for (j, c) in centers.iter_mut().enumerate() {
            let members: Vec<&[f64]> =
                points.iter().zip(&assign).filter(|(_, &a)| a == j).map(|(p, _)| *p).collect();
            if !members.is_empty() {
                *c = centroid(members.iter().copied());
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
        if next == assign {
            break;
        }
        assign = next;
    }
    let sse = points.iter().zip(&assign).map(|(p, &a)| sq(p, &centers[a])).sum();
    (sse, assign)
}
