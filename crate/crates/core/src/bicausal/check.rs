use crate::process::TreeProcess;

use super::BicausalPlan;

/// Default tolerance for the product identities.
pub const CHECK_TOL: f64 = 1e-9;

/// Largest residual among the marginal, causal and anticausal identities of a
/// leaf-pair coupling. Pairs refer to leaf node indices.
pub fn bicausal_violation(x: &TreeProcess, y: &TreeProcess, pairs: &[(usize, usize, f64)]) -> f64 {
    if !x.same_shape(y) {
        return f64::INFINITY;
    }
    let (lx, ly) = (x.leaves(), y.leaves());
    let mut pi = vec![0.0; lx.len() * ly.len()];
    for &(a, b, m) in pairs {
        if a >= x.len() || b >= y.len() || x.node(a).level != x.depth() || y.node(b).level != y.depth()
        {
            return f64::INFINITY;
        }
        if m < 0.0 || !m.is_finite() {
            return f64::INFINITY;
        }
        pi[x.level_pos(a) * ly.len() + y.level_pos(b)] += m;
    }

    let mut worst: f64 = 0.0;
    for (a, &l) in lx.iter().enumerate() {
        let s: f64 = (0..ly.len()).map(|b| pi[a * ly.len() + b]).sum();
        worst = worst.max((s - x.mass(l)).abs());
    }
    for (b, &l) in ly.iter().enumerate() {
        let s: f64 = (0..lx.len()).map(|a| pi[a * ly.len() + b]).sum();
        worst = worst.max((s - y.mass(l)).abs());
    }
    for t in 1..x.depth() {
        worst = worst.max(causal_residual(x, y, &pi, t, false));
        worst = worst.max(causal_residual(y, x, &pi, t, true));
    }
    worst
}

/// Residual of `pi(a, C(w)) mu(anc_t(a)) = pi(C(anc_t(a)), C(w)) mu(a)` over
/// leaves `a` of `src` and level-`t` nodes `w` of `dst`. With `transposed`
/// the matrix `pi` is indexed `[dst leaf][src leaf]`.
fn causal_residual(
    src: &TreeProcess,
    dst: &TreeProcess,
    pi: &[f64],
    t: usize,
    transposed: bool,
) -> f64 {
    let (ls, ld) = (src.leaves(), dst.leaves());
    let (ns, nt) = (src.level(t).len(), dst.level(t).len());
    let at = |s: usize, d: usize| if transposed { pi[d * ls.len() + s] } else { pi[s * ld.len() + d] };

    // leaf_cyl[a][w] = pi(a, C(w)); node_cyl[v][w] = pi(C(v), C(w))
    let mut leaf_cyl = vec![0.0; ls.len() * nt];
    let mut node_cyl = vec![0.0; ns * nt];
    let dst_anc: Vec<usize> = ld.iter().map(|&l| dst.level_pos(dst.ancestor(l, t))).collect();
    for (a, &la) in ls.iter().enumerate() {
        let v = src.level_pos(src.ancestor(la, t));
        for (d, &w) in dst_anc.iter().enumerate() {
            let m = at(a, d);
            leaf_cyl[a * nt + w] += m;
            node_cyl[v * nt + w] += m;
        }
    }
    let mut worst: f64 = 0.0;
    for (a, &la) in ls.iter().enumerate() {
        let anc = src.ancestor(la, t);
        let v = src.level_pos(anc);
        for w in 0..nt {
            let lhs = leaf_cyl[a * nt + w] * src.mass(anc);
            let rhs = node_cyl[v * nt + w] * src.mass(la);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

pub fn check_bicausal_pairs(
    x: &TreeProcess,
    y: &TreeProcess,
    pairs: &[(usize, usize, f64)],
    tol: f64,
) -> bool {
    bicausal_violation(x, y, pairs) <= tol
}

/// Whether a plan is a bicausal coupling of its two processes.
pub fn check_bicausal(plan: &BicausalPlan) -> bool {
    check_bicausal_pairs(plan.x(), plan.y(), plan.leaf_pairs(), CHECK_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::TreeBuilder;

    fn binary_two_step(values: [f64; 2]) -> TreeProcess {
        let mut b = TreeBuilder::new(vec![1, 1]).unwrap();
        for v in values {
            let n = b.add_child(0, vec![v], 0.5).unwrap();
            b.add_child(n, vec![v - 1.0], 0.5).unwrap();
            b.add_child(n, vec![v + 1.0], 0.5).unwrap();
        }
        b.build().unwrap()
    }

    #[test]
    fn product_coupling_is_bicausal() {
        let x = binary_two_step([0.0, 1.0]);
        let y = binary_two_step([5.0, 7.0]);
        let mut pairs = Vec::new();
        for &a in x.leaves() {
            for &b in y.leaves() {
                pairs.push((a, b, x.mass(a) * y.mass(b)));
            }
        }
        assert!(bicausal_violation(&x, &y, &pairs) < 1e-15);
    }

    #[test]
    fn anticipating_coupling_is_rejected() {
        let x = binary_two_step([0.0, 1.0]);
        let y = binary_two_step([5.0, 7.0]);
        let (lx, ly) = (x.leaves().to_vec(), y.leaves().to_vec());
        // synchronous coupling: pair leaf i with leaf i
        let sync: Vec<_> = (0..4).map(|i| (lx[i], ly[i], 0.25)).collect();
        assert!(bicausal_violation(&x, &y, &sync) < 1e-15);
        // swap the partners of x-leaves 0 and 2: marginals survive, but the
        // time-1 pairing now depends on x's time-2 value
        let mut bad = sync.clone();
        bad[0] = (lx[0], ly[2], 0.25);
        bad[2] = (lx[2], ly[0], 0.25);
        let v = bicausal_violation(&x, &y, &bad);
        // mass of (lx0, first y-branch) is 0; the causal product would give 0.25 * 0.25
        assert!((v - 0.0625).abs() < 1e-15, "violation {v}");
    }

    #[test]
    fn marginal_errors_are_caught() {
        let x = TreeProcess::dirac(&[vec![0.0]]).unwrap();
        let y = TreeProcess::dirac(&[vec![1.0]]).unwrap();
        assert!(!check_bicausal_pairs(&x, &y, &[(1, 1, 0.5)], CHECK_TOL));
        assert!(check_bicausal_pairs(&x, &y, &[(1, 1, 1.0)], CHECK_TOL));
        assert!(!check_bicausal_pairs(&x, &y, &[(0, 1, 1.0)], CHECK_TOL));
    }
}
