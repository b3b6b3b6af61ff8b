//! Exact optimal transport between finitely supported laws.

use crate::error::{Error, Result};
use crate::lp::LinearProgram;
use crate::process::{path_cost, step_cost, PathLaw, PROB_TOL};

/// Smallest atom mass accepted in a marginal.
pub const MIN_MASS: f64 = 1e-14;
/// Marginal totals must agree within this tolerance.
pub const MARGINAL_TOL: f64 = 1e-10;

/// A finitely supported probability law on a Euclidean space.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLaw {
    atoms: Vec<(Vec<f64>, f64)>,
}

impl DiscreteLaw {
    pub fn new(atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::input("a law needs at least one atom"));
        }
        let dim = atoms[0].0.len();
        for (x, m) in &atoms {
            if x.len() != dim {
                return Err(Error::shape("atoms of different dimension"));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::input("non-finite atom location"));
            }
            if !(*m >= MIN_MASS) || !m.is_finite() {
                return Err(Error::input(format!("atom mass {m} is below {MIN_MASS}")));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::input(format!("atom masses sum to {total}")));
        }
        Ok(DiscreteLaw { atoms })
    }

    /// Uniform law on the given points.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let w = 1.0 / points.len().max(1) as f64;
        Self::new(points.into_iter().map(|x| (x, w)).collect())
    }

    pub fn atoms(&self) -> &[(Vec<f64>, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.1).collect()
    }

    /// Ground cost matrix `|x_i - y_j|^p`, row-major.
    pub fn cost_to(&self, other: &DiscreteLaw, p: f64) -> Vec<f64> {
        let mut c = Vec::with_capacity(self.len() * other.len());
        for (x, _) in &self.atoms {
            for (y, _) in &other.atoms {
                c.push(step_cost(x, y, p));
            }
        }
        c
    }
}

/// A coupling matrix between two marginals, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    rows: usize,
    cols: usize,
    mass: Vec<f64>,
}

impl TransportPlan {
    pub fn from_dense(rows: usize, cols: usize, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != rows * cols {
            return Err(Error::shape("plan entries do not match its shape"));
        }
        Ok(TransportPlan { rows, cols, mass })
    }

    /// The independent coupling.
    pub fn product(src: &[f64], dst: &[f64]) -> Self {
        let mass = src.iter().flat_map(|a| dst.iter().map(move |b| a * b)).collect();
        TransportPlan { rows: src.len(), cols: dst.len(), mass }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.cols + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.mass
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.mass.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self.get(i, j)).sum()).collect()
    }

    pub fn cost(&self, cost: &[f64]) -> f64 {
        self.mass.iter().zip(cost).map(|(m, c)| m * c).sum()
    }

    /// Whether the marginals reproduce `src` and `dst` within `tol`.
    pub fn has_marginals(&self, src: &[f64], dst: &[f64], tol: f64) -> bool {
        self.mass.iter().all(|&m| m >= 0.0)
            && src.len() == self.rows
            && dst.len() == self.cols
            && self.row_sums().iter().zip(src).all(|(a, b)| (a - b).abs() <= tol)
            && self.col_sums().iter().zip(dst).all(|(a, b)| (a - b).abs() <= tol)
    }

    /// Nonzero entries as `(row, col, mass)`.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(move |(k, &m)| (k / self.cols, k % self.cols, m))
    }
}

/// Minimal-cost coupling between two mass vectors; `cost` is row-major with
/// `src.len()` rows. Returns the minimal total cost and an optimal vertex.
pub fn transport(src: &[f64], dst: &[f64], cost: &[f64]) -> Result<(f64, TransportPlan)> {
    let (m, n) = (src.len(), dst.len());
    if m == 0 || n == 0 {
        return Err(Error::input("empty marginal"));
    }
    if cost.len() != m * n {
        return Err(Error::shape(format!("cost has {} entries, expected {m}x{n}", cost.len())));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::input("non-finite transport cost"));
    }
    for &w in src.iter().chain(dst) {
        if !(w >= MIN_MASS) || !w.is_finite() {
            return Err(Error::input(format!("marginal atom of mass {w} is below {MIN_MASS}")));
        }
    }
    let (sa, sb): (f64, f64) = (src.iter().sum(), dst.iter().sum());
    if (sa - sb).abs() > MARGINAL_TOL {
        return Err(Error::InfeasibleMarginals { source_mass: sa, target_mass: sb });
    }

    if m == 1 || n == 1 {
        let plan = TransportPlan::product(src, dst);
        let plan = if m == 1 {
            TransportPlan { mass: dst.to_vec(), ..plan }
        } else {
            TransportPlan { mass: src.to_vec(), ..plan }
        };
        return Ok((plan.cost(cost), plan));
    }

    let mut lp = LinearProgram::new(cost.to_vec());
    for (i, &a) in src.iter().enumerate() {
        let mut row = vec![0.0; m * n];
        row[i * n..(i + 1) * n].iter_mut().for_each(|v| *v = 1.0);
        lp.add_eq(row, a);
    }
    for (j, &b) in dst.iter().enumerate() {
        let mut row = vec![0.0; m * n];
        for i in 0..m {
            row[i * n + j] = 1.0;
        }
        lp.add_eq(row, b);
    }
    let sol = lp.solve()?;
    let mass: Vec<f64> = sol.x.into_iter().map(|v| if v < MIN_MASS { 0.0 } else { v }).collect();
    let plan = TransportPlan { rows: m, cols: n, mass };
    Ok((plan.cost(cost), plan))
}

/// Minimal transport cost between two laws under an explicit cost matrix
/// (row-major, `mu.len()` rows). The caller takes the `1/p` root.
pub fn w_distance(
    mu: &DiscreteLaw,
    nu: &DiscreteLaw,
    cost: &[f64],
) -> Result<(f64, TransportPlan)> {
    transport(&mu.masses(), &nu.masses(), cost)
}

/// `W_p` between two laws under the Euclidean ground metric.
pub fn wasserstein(mu: &DiscreteLaw, nu: &DiscreteLaw, p: f64) -> Result<f64> {
    crate::process::check_order(p)?;
    if mu.atoms[0].0.len() != nu.atoms[0].0.len() {
        return Err(Error::shape("laws live in spaces of different dimension"));
    }
    let (v, _) = w_distance(mu, nu, &mu.cost_to(nu, p))?;
    Ok(v.max(0.0).powf(1.0 / p))
}

/// `W_p` between two path laws under the path metric `d_{X,p}`.
pub fn path_law_distance(a: &PathLaw, b: &PathLaw, p: f64) -> Result<f64> {
    crate::process::check_order(p)?;
    let src: Vec<f64> = a.atoms.iter().map(|x| x.mass).collect();
    let dst: Vec<f64> = b.atoms.iter().map(|x| x.mass).collect();
    let mut cost = Vec::with_capacity(src.len() * dst.len());
    for x in &a.atoms {
        for y in &b.atoms {
            if x.path.len() != y.path.len() {
                return Err(Error::shape("paths of different length"));
            }
            cost.push(path_cost(&x.path, &y.path, p));
        }
    }
    let (v, _) = transport(&src, &dst, &cost)?;
    Ok(v.max(0.0).powf(1.0 / p))
}

/// Minimal cost `sum pi_ij |x_i - y_j|^p` for laws on the real line via the
/// monotone (quantile) coupling. Valid for `p >= 1`.
pub fn w_cost_1d(mu: &[(f64, f64)], nu: &[(f64, f64)], p: f64) -> f64 {
    let mut a = mu.to_vec();
    let mut b = nu.to_vec();
    a.sort_by(|x, y| x.0.total_cmp(&y.0));
    b.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0].1, b[0].1);
    let mut total = 0.0;
    loop {
        let m = ra.min(rb);
        total += m * step_cost(&[a[i].0], &[b[j].0], p);
        ra -= m;
        rb -= m;
        let adv_a = ra <= rb;
        if adv_a {
            i += 1;
            if i == a.len() {
                break;
            }
            ra = a[i].1;
        } else {
            j += 1;
            if j == b.len() {
                break;
            }
            rb = b[j].1;
        }
    }
    total
}
