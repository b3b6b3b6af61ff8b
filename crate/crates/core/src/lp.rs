//! Dense two-phase primal simplex with Bland's rule.
//!
//! Problems are `min c.x` subject to rows `a_i.x {=,<=,>=} b_i` and `x >= 0`.
//! Pivoting is fully deterministic: the entering column is the lowest-index
//! improving column (Bland), the leaving row comes from a Harris ratio test
//! (largest pivot among near-minimal ratios, then lowest basic index).
//! Rows are scaled and dependent equality rows dropped before phase one.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-9;
const FEAS_EPS: f64 = 1e-9;
/// Rows whose largest structural entry is below this are treated as redundant.
const DROP_EPS: f64 = 1e-9;
const OPT_EPS: f64 = 1e-11;
const HARRIS_DELTA: f64 = 1e-9;
const UNBOUNDED_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub cost: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub relations: Vec<Relation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
}

impl LinearProgram {
    pub fn new(cost: Vec<f64>) -> Self {
        LinearProgram { cost, ..Default::default() }
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn add_row(&mut self, row: Vec<f64>, rel: Relation, rhs: f64) {
        self.rows.push(row);
        self.relations.push(rel);
        self.rhs.push(rhs);
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        self.add_row(row, Relation::Eq, rhs)
    }

    pub fn solve(&self) -> Result<LpSolution> {
        lp_solve(self)
    }
}

struct Tableau {
    /// rows x (cols + 1), last column is the right-hand side
    a: Vec<Vec<f64>>,
    /// reduced costs, last entry is minus the objective
    obj: Vec<f64>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.a[i][self.cols]
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let piv = self.a[r][s];
        {
            let row = &mut self.a[r];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[s] = 1.0;
        }
        let prow = std::mem::take(&mut self.a[r]);
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[s];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&prow) {
                    *v -= f * p;
                }
                row[s] = 0.0;
            }
        }
        let f = self.obj[s];
        if f != 0.0 {
            for (v, p) in self.obj.iter_mut().zip(&prow) {
                *v -= f * p;
            }
            self.obj[s] = 0.0;
        }
        self.a[r] = prow;
        self.basis[r] = s;
    }

    fn set_objective(&mut self, cost: &[f64]) {
        self.obj = vec![0.0; self.cols + 1];
        self.obj[..cost.len()].copy_from_slice(cost);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = self.obj_cost(cost, b);
            if cb != 0.0 {
                for (v, x) in self.obj.iter_mut().zip(&self.a[i]) {
                    *v -= cb * x;
                }
            }
        }
    }

    fn obj_cost(&self, cost: &[f64], j: usize) -> f64 {
        cost.get(j).copied().unwrap_or(0.0)
    }

    /// Runs Bland's rule over columns `< allowed`. Reduced costs above
    /// `-opt_eps` count as optimal. An improving column without a positive
    /// entry is unboundedness unless its reduced cost is round-off sized, in
    /// which case the column is skipped.
    fn optimize(&mut self, allowed: usize, opt_eps: f64) -> Result<()> {
        loop {
            let mut entering = None;
            for j in 0..allowed {
                if self.obj[j] >= -opt_eps {
                    continue;
                }
                if self.a.iter().any(|r| r[j] > PIVOT_EPS) {
                    entering = Some(j);
                    break;
                }
                if self.obj[j] < -UNBOUNDED_EPS * (1.0 + opt_eps / OPT_EPS) {
                    return Err(Error::Unbounded);
                }
            }
            let Some(s) = entering else {
                return Ok(());
            };
            // Harris ratio test: bound the step with a small feasibility
            // allowance, then take the largest pivot among rows within it
            let mut theta = f64::INFINITY;
            for row in &self.a {
                let aij = row[s];
                if aij > PIVOT_EPS {
                    theta = theta.min((row[self.cols].max(0.0) + HARRIS_DELTA) / aij);
                }
            }
            let mut best: Option<usize> = None;
            for i in 0..self.a.len() {
                let aij = self.a[i][s];
                if aij > PIVOT_EPS && self.rhs(i).max(0.0) / aij <= theta {
                    best = match best {
                        Some(bi)
                            if self.a[bi][s] > aij
                                || (self.a[bi][s] == aij && self.basis[bi] < self.basis[i]) =>
                        {
                            Some(bi)
                        }
                        _ => Some(i),
                    };
                }
            }
            let r = best.expect("entering column has a positive entry");
            self.pivot(r, s);
            let c = self.cols;
            self.a.iter_mut().for_each(|row| row[c] = row[c].max(0.0));
        }
    }
}

/// Scales every row to unit max-norm and drops equality rows that are
/// linear combinations of earlier ones. Inconsistent combinations are
/// infeasible.
fn reduce_equalities(lp: &LinearProgram) -> Result<(Vec<Vec<f64>>, Vec<f64>, Vec<Relation>)> {
    let n = lp.cost.len();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut rels = Vec::new();
    // reduced copies of the kept equality rows with their pivot column
    let mut echelon: Vec<(usize, Vec<f64>)> = Vec::new();
    for ((row, &b), &rel) in lp.rows.iter().zip(&lp.rhs).zip(&lp.relations) {
        let scale = row.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if scale == 0.0 {
            let ok = match rel {
                Relation::Eq => b.abs() <= FEAS_EPS,
                Relation::Le => b >= -FEAS_EPS,
                Relation::Ge => b <= FEAS_EPS,
            };
            if !ok {
                return Err(Error::Infeasible);
            }
            continue;
        }
        let mut r: Vec<f64> = row.iter().map(|v| v / scale).collect();
        r.push(b / scale);
        if rel == Relation::Eq {
            let mut red = r.clone();
            for (pc, e) in &echelon {
                let f = red[*pc];
                if f != 0.0 {
                    red.iter_mut().zip(e).for_each(|(v, x)| *v -= f * x);
                }
            }
            let (pc, big) = red[..n]
                .iter()
                .enumerate()
                .fold((0, 0.0f64), |acc, (j, v)| if v.abs() > acc.1 { (j, v.abs()) } else { acc });
            if big <= DROP_EPS {
                if red[n].abs() > FEAS_EPS {
                    return Err(Error::Infeasible);
                }
                continue;
            }
            let piv = red[pc];
            red.iter_mut().for_each(|v| *v /= piv);
            echelon.push((pc, red));
        }
        rhs.push(r.pop().expect("rhs entry"));
        rows.push(r);
        rels.push(rel);
    }
    Ok((rows, rhs, rels))
}

/// Solves a linear program to an optimal basic solution.
pub fn lp_solve(lp: &LinearProgram) -> Result<LpSolution> {
    let n = lp.cost.len();
    let m = lp.rows.len();
    if lp.rhs.len() != m || lp.relations.len() != m || lp.rows.iter().any(|r| r.len() != n) {
        return Err(Error::shape("constraint matrix does not match cost / rhs lengths"));
    }
    if lp.cost.iter().chain(lp.rhs.iter()).chain(lp.rows.iter().flatten()).any(|v| !v.is_finite())
    {
        return Err(Error::input("linear program contains non-finite entries"));
    }

    let (mut rows, mut rhs, mut rels) = reduce_equalities(lp)?;
    let m = rows.len();
    // normalise to b >= 0
    for i in 0..m {
        if rhs[i] < 0.0 {
            rhs[i] = -rhs[i];
            rows[i].iter_mut().for_each(|v| *v = -*v);
            rels[i] = match rels[i] {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let n_slack = rels.iter().filter(|r| **r != Relation::Eq).count();
    let n_art = rels.iter().filter(|r| **r != Relation::Le).count();
    let art_start = n + n_slack;
    let cols = art_start + n_art;

    let mut a = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0; m];
    let (mut next_slack, mut next_art) = (n, art_start);
    for i in 0..m {
        a[i][..n].copy_from_slice(&rows[i]);
        a[i][cols] = rhs[i];
        match rels[i] {
            Relation::Le => {
                a[i][next_slack] = 1.0;
                basis[i] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                a[i][next_slack] = -1.0;
                next_slack += 1;
                a[i][next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                a[i][next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
        }
    }

    let mut tab = Tableau { a, obj: Vec::new(), basis, cols };

    if n_art > 0 {
        let mut phase1 = vec![0.0; cols];
        phase1[art_start..].iter_mut().for_each(|c| *c = 1.0);
        tab.set_objective(&phase1);
        tab.optimize(cols, OPT_EPS)?;
        let infeas = -tab.obj[cols];
        let scale = 1.0 + rhs.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if infeas > FEAS_EPS * scale {
            return Err(Error::Infeasible);
        }
        // drive zero-level artificials out of the basis, drop redundant rows
        let mut i = 0;
        while i < tab.a.len() {
            if tab.basis[i] >= art_start {
                let best = (0..art_start)
                    .map(|j| (j, tab.a[i][j].abs()))
                    .fold(None, |acc: Option<(usize, f64)>, (j, v)| match acc {
                        Some((_, bv)) if bv >= v => acc,
                        _ => Some((j, v)),
                    })
                    .filter(|&(_, v)| v > DROP_EPS);
                match best.map(|b| b.0) {
                    Some(j) => {
                        // the artificial sits at zero up to round-off
                        let c = tab.cols;
                        tab.a[i][c] = 0.0;
                        tab.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        tab.a.remove(i);
                        tab.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    let mut cost = lp.cost.clone();
    cost.resize(art_start, 0.0);
    tab.set_objective(&cost);
    let cscale = 1.0 + lp.cost.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    tab.optimize(art_start, OPT_EPS * cscale)?;

    let mut x = vec![0.0; n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            let v = tab.rhs(i);
            x[b] = if v.abs() < 1e-15 { 0.0 } else { v.max(0.0) };
        }
    }
    let value = lp.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { value, x })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_variable_equality() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_eq(vec![1.0], 1.0);
        let s = lp.solve().unwrap();
        assert_eq!(s.value, 1.0);
        assert_eq!(s.x, vec![1.0]);
    }

    #[test]
    fn infeasible_and_unbounded_are_distinct() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_eq(vec![1.0, 1.0], 1.0);
        lp.add_eq(vec![1.0, 1.0], 2.0);
        assert!(matches!(lp.solve(), Err(Error::Infeasible)));

        let mut lp = LinearProgram::new(vec![-1.0, 0.0]);
        lp.add_row(vec![1.0, -1.0], Relation::Le, 1.0);
        assert!(matches!(lp.solve(), Err(Error::Unbounded)));
    }

    #[test]
    fn inequality_rows_and_negative_rhs() {
        // max x + y s.t. x + 2y <= 4, 3x + y <= 6, -x <= -0.5
        let mut lp = LinearProgram::new(vec![-1.0, -1.0]);
        lp.add_row(vec![1.0, 2.0], Relation::Le, 4.0);
        lp.add_row(vec![3.0, 1.0], Relation::Le, 6.0);
        lp.add_row(vec![-1.0, 0.0], Relation::Le, -0.5);
        let s = lp.solve().unwrap();
        assert!((s.value + 2.8).abs() < 1e-12);
        assert!((s.x[0] - 1.6).abs() < 1e-12 && (s.x[1] - 1.2).abs() < 1e-12);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        // 2x2 transport with all four marginal rows (one is redundant)
        let mut lp = LinearProgram::new(vec![2.0, 3.0, 3.0, 2.0]);
        lp.add_eq(vec![1.0, 1.0, 0.0, 0.0], 0.5);
        lp.add_eq(vec![0.0, 0.0, 1.0, 1.0], 0.5);
        lp.add_eq(vec![1.0, 0.0, 1.0, 0.0], 0.5);
        lp.add_eq(vec![0.0, 1.0, 0.0, 1.0], 0.5);
        lp.add_eq(vec![2.0, 2.0, 2.0, 2.0], 2.0);
        let s = lp.solve().unwrap();
        assert_eq!(s.value, 2.0);
    }

    #[test]
    fn shape_errors() {
        let mut lp = LinearProgram::new(vec![1.0, 2.0]);
        lp.add_eq(vec![1.0], 1.0);
        assert!(matches!(lp.solve(), Err(Error::ShapeMismatch(_))));
    }
}
