use crate::error::Result;
use crate::lp::LinearProgram;
use crate::process::{check_order, path_cost, TreeProcess};

/// `AW_p` as one linear program over leaf-pair masses.
///
/// Besides the marginal rows, causality is imposed for every leaf `a` of `x`,
/// every `t` in `1..T` and every level-`t` node `w` of `y` as
///
/// ```text
/// pi(a, C(w)) * mu(anc_t(a)) = pi(C(anc_t(a)), C(w)) * mu(a)
/// ```
///
/// and symmetrically with the roles of `x` and `y` exchanged. This route
/// shares nothing with the backward induction beyond the simplex itself.
/// Returns the distance and the optimal pairs `(leaf_x, leaf_y, mass)`.
pub fn aw_distance_lp(
    x: &TreeProcess,
    y: &TreeProcess,
    p: f64,
) -> Result<(f64, Vec<(usize, usize, f64)>)> {
    check_order(p)?;
    x.ensure_same_shape(y)?;
    let depth = x.depth();
    let (lx, ly) = (x.leaves(), y.leaves());
    let nvar = lx.len() * ly.len();
    let var = |a: usize, b: usize| a * ly.len() + b;

    let xpaths: Vec<_> = lx.iter().map(|&l| x.path(l)).collect();
    let ypaths: Vec<_> = ly.iter().map(|&l| y.path(l)).collect();
    let mut cost = Vec::with_capacity(nvar);
    for px in &xpaths {
        for py in &ypaths {
            cost.push(path_cost(px, py, p));
        }
    }
    let mut lp = LinearProgram::new(cost);

    for (a, &l) in lx.iter().enumerate() {
        let mut row = vec![0.0; nvar];
        (0..ly.len()).for_each(|b| row[var(a, b)] = 1.0);
        lp.add_eq(row, x.mass(l));
    }
    for (b, &l) in ly.iter().enumerate() {
        let mut row = vec![0.0; nvar];
        (0..lx.len()).for_each(|a| row[var(a, b)] = 1.0);
        lp.add_eq(row, y.mass(l));
    }

    for t in 1..depth {
        let anc_x: Vec<usize> = lx.iter().map(|&l| x.ancestor(l, t)).collect();
        let anc_y: Vec<usize> = ly.iter().map(|&l| y.ancestor(l, t)).collect();
        // causal rows
        for (a, &la) in lx.iter().enumerate() {
            for &w in y.level(t) {
                let mut row = vec![0.0; nvar];
                for (b, _) in anc_y.iter().enumerate().filter(|(_, &g)| g == w) {
                    row[var(a, b)] += x.mass(anc_x[a]);
                    for (a2, _) in anc_x.iter().enumerate().filter(|(_, &g)| g == anc_x[a]) {
                        row[var(a2, b)] -= x.mass(la);
                    }
                }
                lp.add_eq(row, 0.0);
            }
        }
        // anticausal rows
        for (b, &lb) in ly.iter().enumerate() {
            for &v in x.level(t) {
                let mut row = vec![0.0; nvar];
                for (a, _) in anc_x.iter().enumerate().filter(|(_, &g)| g == v) {
                    row[var(a, b)] += y.mass(anc_y[b]);
                    for (b2, _) in anc_y.iter().enumerate().filter(|(_, &g)| g == anc_y[b]) {
                        row[var(a, b2)] -= y.mass(lb);
                    }
                }
                lp.add_eq(row, 0.0);
            }
        }
    }

    let sol = lp.solve()?;
    let mut pairs = Vec::new();
    for (a, &la) in lx.iter().enumerate() {
        for (b, &lb) in ly.iter().enumerate() {
            let m = sol.x[var(a, b)];
            if m > 0.0 {
                pairs.push((la, lb, m));
            }
        }
    }
    Ok((sol.value.max(0.0).powf(1.0 / p), pairs))
}
