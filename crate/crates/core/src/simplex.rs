//! Bounded-variable primal simplex on a dense tableau.
//!
//! Each row `r` gets a slack `s_r = a_r·x` carrying the row bounds, so the
//! working system is `[A | −I]·z = 0` with simple bounds on every entry of
//! `z`. Phase 1 minimizes the sum of bound infeasibilities of the basic
//! variables, which lets any basis (cold slack basis or a warm basis after
//! cuts or bound changes) serve as a starting point. Dantzig pricing is used
//! until 50 consecutive pivots fail to improve the objective, after which
//! Bland's rule takes over until progress resumes.

use crate::linearize::mccormick;
use crate::model::{Problem, RowSense, VarId};

/// Primal feasibility tolerance for row activities and bounds.
pub const EPS_FEAS: f64 = 1e-9;
/// Tolerance for classifying a value as sitting at a bound.
pub const EPS_BND: f64 = 1e-9;

const PRIMAL_TOL: f64 = 1e-10;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 100;
const STALL_LIMIT: usize = 50;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum LpSense {
    Le,
    Eq,
}

/// `Σ coeffs·x (≤ | =) rhs` over LP columns.
#[derive(Clone, Debug, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: LpSense,
    pub rhs: f64,
}

impl LpRow {
    pub fn le(coeffs: Vec<(usize, f64)>, rhs: f64) -> Self {
        LpRow {
            coeffs,
            sense: LpSense::Le,
            rhs,
        }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, c)| c * x[j]).sum()
    }
}

/// `min obj·x` subject to `rows` and `col_lb ≤ x ≤ col_ub`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LpInstance {
    pub obj: Vec<f64>,
    pub col_lb: Vec<f64>,
    pub col_ub: Vec<f64>,
    pub rows: Vec<LpRow>,
}

impl LpInstance {
    pub fn num_cols(&self) -> usize {
        self.obj.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_well_formed(&self) -> bool {
        let n = self.num_cols();
        self.col_lb.len() == n
            && self.col_ub.len() == n
            && self.obj.iter().all(|c| c.is_finite())
            && self
                .col_lb
                .iter()
                .zip(&self.col_ub)
                .all(|(l, u)| !l.is_nan() && !u.is_nan() && l <= u)
            && self.rows.iter().all(|r| {
                !r.rhs.is_nan()
                    && r.coeffs.iter().all(|&(j, c)| j < n && c.is_finite())
                    && (r.sense == LpSense::Le || r.rhs.is_finite())
            })
    }
}

/// Rows of `problem` (two-sided rows split) plus, optionally, the McCormick
/// rows of every product relation.
pub fn lp_from_problem(problem: &Problem, include_mccormick: bool) -> LpInstance {
    let n = problem.num_vars();
    let mut lp = LpInstance {
        obj: problem.objective.dense(n),
        col_lb: problem.variables.iter().map(|v| v.lb).collect(),
        col_ub: problem.variables.iter().map(|v| v.ub).collect(),
        rows: Vec::new(),
    };
    let to_cols = |c: &[(VarId, f64)]| c.iter().map(|&(v, a)| (v.index(), a)).collect::<Vec<_>>();
    for (r, row) in problem.rows.iter().enumerate() {
        if row.is_equality() {
            lp.rows.push(LpRow {
                coeffs: to_cols(&row.coeffs),
                sense: LpSense::Eq,
                rhs: row.rhs,
            });
            continue;
        }
        for side in row.sides(crate::model::RowId(r)) {
            debug_assert_ne!(side.sense, RowSense::Eq);
            lp.rows.push(LpRow::le(to_cols(&side.coeffs), side.rhs));
        }
    }
    if include_mccormick {
        for (k, rel) in problem.relations.iter().enumerate() {
            let bi = (problem.lb(rel.i), problem.ub(rel.i));
            let bj = (problem.lb(rel.j), problem.ub(rel.j));
            for row in mccormick(rel, bi, bj, &format!("mccormick{k}")).rows {
                for side in row.sides(crate::model::RowId(0)) {
                    lp.rows.push(LpRow::le(to_cols(&side.coeffs), side.rhs));
                }
            }
        }
    }
    lp
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Pivots plus bound flips performed by this solve.
    pub iterations: usize,
    pub at_lower: Vec<bool>,
    pub at_upper: Vec<bool>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Variables strictly between their bounds.
    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.x.len()).filter(|&j| !self.at_lower[j] && !self.at_upper[j])
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// nonbasic free variable held at zero
    Free,
}

/// Basis statuses for the structural columns and the row slacks.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    pub cols: Vec<VarStatus>,
    pub rows: Vec<VarStatus>,
}

#[derive(Copy, Clone, Debug, Default)]
pub struct SimplexOptions {
    /// Defaults to `100·(rows + cols)` when `None`.
    pub max_iterations: Option<usize>,
}

/// Solves `lp` extended by `added_rows`, optionally starting from `warm`
/// (a basis for `lp` before the rows were added; new slacks start basic).
pub fn solve_lp(
    lp: &LpInstance,
    warm: Option<&Basis>,
    added_rows: &[LpRow],
) -> (LpSolution, Basis) {
    let mut solver = LpSolver::new(lp.clone());
    if let Some(b) = warm {
        solver.set_basis(b.clone());
    }
    solver.add_rows(added_rows.iter().cloned());
    let sol = solver.solve();
    (sol, solver.basis().clone())
}

/// Owns an LP and its last basis so repeated solves warm start.
#[derive(Clone, Debug)]
pub struct LpSolver {
    lp: LpInstance,
    basis: Option<Basis>,
    pub options: SimplexOptions,
}

impl LpSolver {
    pub fn new(lp: LpInstance) -> Self {
        LpSolver {
            lp,
            basis: None,
            options: SimplexOptions::default(),
        }
    }

    pub fn lp(&self) -> &LpInstance {
        &self.lp
    }

    pub fn add_rows(&mut self, rows: impl IntoIterator<Item = LpRow>) {
        for row in rows {
            self.lp.rows.push(row);
            if let Some(b) = &mut self.basis {
                b.rows.push(VarStatus::Basic);
            }
        }
    }

    pub fn set_col_bounds(&mut self, j: usize, lb: f64, ub: f64) {
        self.lp.col_lb[j] = lb;
        self.lp.col_ub[j] = ub;
    }

    pub fn set_basis(&mut self, basis: Basis) {
        self.basis = Some(basis);
    }

    pub fn clear_basis(&mut self) {
        self.basis = None;
    }

    /// Last basis, or the slack basis if none has been computed yet.
    pub fn basis(&mut self) -> &Basis {
        let (n, m) = (self.lp.num_cols(), self.lp.num_rows());
        let lp = &self.lp;
        self.basis.get_or_insert_with(|| slack_basis(lp, n, m))
    }

    pub fn solve(&mut self) -> LpSolution {
        let (n, m) = (self.lp.num_cols(), self.lp.num_rows());
        let mut basis = match self.basis.take() {
            Some(b) if b.cols.len() == n && b.rows.len() <= m => b,
            _ => slack_basis(&self.lp, n, m),
        };
        basis.rows.resize(m, VarStatus::Basic);
        let max_iter = self.options.max_iterations.unwrap_or(100 * (n + m).max(1));
        let mut tab = Tableau::new(&self.lp, &basis);
        let status = tab.run(max_iter);
        let sol = tab.solution(&self.lp, status);
        self.basis = Some(tab.basis(n));
        sol
    }
}

fn slack_basis(lp: &LpInstance, n: usize, m: usize) -> Basis {
    Basis {
        cols: (0..n)
            .map(|j| nonbasic_status(lp.col_lb[j], lp.col_ub[j]))
            .collect(),
        rows: vec![VarStatus::Basic; m],
    }
}

fn nonbasic_status(lb: f64, ub: f64) -> VarStatus {
    if lb.is_finite() {
        VarStatus::AtLower
    } else if ub.is_finite() {
        VarStatus::AtUpper
    } else {
        VarStatus::Free
    }
}

/// Dense tableau state for one solve.
struct Tableau {
    m: usize,
    nt: usize,
    /// original `[A | −I]`, row-major
    a: Vec<f64>,
    /// current `B⁻¹·[A | −I]`, row-major
    t: Vec<f64>,
    basic: Vec<usize>,
    status: Vec<VarStatus>,
    x: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    cost: Vec<f64>,
    iterations: usize,
}

impl Tableau {
    fn new(lp: &LpInstance, basis: &Basis) -> Self {
        let n = lp.num_cols();
        let m = lp.num_rows();
        let nt = n + m;
        let mut a = vec![0.0; m * nt];
        let mut lb = lp.col_lb.clone();
        let mut ub = lp.col_ub.clone();
        for (r, row) in lp.rows.iter().enumerate() {
            for &(j, c) in &row.coeffs {
                a[r * nt + j] += c;
            }
            a[r * nt + n + r] = -1.0;
            match row.sense {
                LpSense::Le => {
                    lb.push(f64::NEG_INFINITY);
                    ub.push(row.rhs);
                }
                LpSense::Eq => {
                    lb.push(row.rhs);
                    ub.push(row.rhs);
                }
            }
        }
        let mut cost = lp.obj.clone();
        cost.resize(nt, 0.0);
        let status: Vec<VarStatus> = basis.cols.iter().chain(&basis.rows).copied().collect();
        let mut tab = Tableau {
            m,
            nt,
            t: a.clone(),
            a,
            basic: vec![usize::MAX; m],
            status,
            x: vec![0.0; nt],
            lb,
            ub,
            cost,
            iterations: 0,
        };
        tab.refactor();
        tab
    }

    #[inline]
    fn at(&self, r: usize, j: usize) -> f64 {
        self.t[r * self.nt + j]
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nt = self.nt;
        let p = self.t[r * nt + q];
        for j in 0..nt {
            self.t[r * nt + j] /= p;
        }
        self.t[r * nt + q] = 1.0;
        let (before, rest) = self.t.split_at_mut(r * nt);
        let (prow, after) = rest.split_at_mut(nt);
        for other in before
            .chunks_exact_mut(nt)
            .chain(after.chunks_exact_mut(nt))
        {
            let f = other[q];
            if f != 0.0 {
                for (o, &pv) in other.iter_mut().zip(prow.iter()) {
                    *o -= f * pv;
                }
                other[q] = 0.0;
            }
        }
    }

    fn nonbasic_value(&mut self, j: usize) -> f64 {
        let (l, u) = (self.lb[j], self.ub[j]);
        let st = match self.status[j] {
            VarStatus::AtLower if l.is_finite() => VarStatus::AtLower,
            VarStatus::AtUpper if u.is_finite() => VarStatus::AtUpper,
            VarStatus::Free if !l.is_finite() && !u.is_finite() => VarStatus::Free,
            _ => nonbasic_status(l, u),
        };
        self.status[j] = st;
        match st {
            VarStatus::AtLower => l,
            VarStatus::AtUpper => u,
            _ => 0.0,
        }
    }

    /// Rebuilds `B⁻¹·[A | −I]` from the original matrix for the current
    /// basic set and recomputes basic values from nonbasic ones.
    fn refactor(&mut self) {
        let (m, nt) = (self.m, self.nt);
        self.t.copy_from_slice(&self.a);
        let mut row_used = vec![false; m];
        let mut basic = vec![usize::MAX; m];
        let wanted: Vec<usize> = (0..nt)
            .filter(|&j| self.status[j] == VarStatus::Basic)
            .collect();
        for &b in &wanted {
            let mut best: Option<(usize, f64)> = None;
            for r in (0..m).filter(|&r| !row_used[r]) {
                let v = self.at(r, b).abs();
                if v > PIVOT_TOL && best.is_none_or(|(_, bv)| v > bv) {
                    best = Some((r, v));
                }
            }
            match best {
                Some((r, _)) => {
                    self.pivot(r, b);
                    row_used[r] = true;
                    basic[r] = b;
                }
                None => self.status[b] = VarStatus::AtLower,
            }
        }
        for r in 0..m {
            if row_used[r] {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..nt {
                if self.status[j] == VarStatus::Basic {
                    continue;
                }
                let v = self.at(r, j).abs();
                if v > PIVOT_TOL && best.is_none_or(|(_, bv)| v > bv) {
                    best = Some((j, v));
                }
            }
            let (j, _) = best.expect("[A | -I] has full row rank");
            self.pivot(r, j);
            row_used[r] = true;
            basic[r] = j;
            self.status[j] = VarStatus::Basic;
        }
        self.basic = basic;
        for j in 0..nt {
            if self.status[j] != VarStatus::Basic {
                self.x[j] = self.nonbasic_value(j);
            }
        }
        for r in 0..m {
            let mut v = 0.0;
            for j in 0..nt {
                if self.status[j] != VarStatus::Basic {
                    let tj = self.at(r, j);
                    if tj != 0.0 {
                        v -= tj * self.x[j];
                    }
                }
            }
            self.x[self.basic[r]] = v;
        }
    }

    fn below(&self, j: usize) -> bool {
        self.x[j] < self.lb[j] - PRIMAL_TOL
    }

    fn above(&self, j: usize) -> bool {
        self.x[j] > self.ub[j] + PRIMAL_TOL
    }

    fn run(&mut self, max_iter: usize) -> LpStatus {
        let (m, nt) = (self.m, self.nt);
        let mut fresh = true;
        let mut since_refactor = 0usize;
        let mut stalled = 0usize;
        let mut bland = false;
        let mut rejected: Vec<usize> = Vec::new();
        let mut cb = vec![0.0; m];
        loop {
            if since_refactor >= REFACTOR_EVERY {
                self.refactor();
                since_refactor = 0;
                fresh = true;
            }
            let mut phase1 = false;
            for r in 0..m {
                let b = self.basic[r];
                if self.below(b) || self.above(b) {
                    phase1 = true;
                    break;
                }
            }
            for (r, cbr) in cb.iter_mut().enumerate().take(m) {
                let b = self.basic[r];
                *cbr = if phase1 {
                    if self.below(b) {
                        -1.0
                    } else if self.above(b) {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    self.cost[b]
                };
            }

            // pricing
            let mut entering: Option<(usize, f64, f64)> = None; // (col, dir, |d|)
            for j in 0..nt {
                let st = self.status[j];
                if st == VarStatus::Basic || self.lb[j] == self.ub[j] || rejected.contains(&j) {
                    continue;
                }
                let mut d = if phase1 { 0.0 } else { self.cost[j] };
                for (r, &c) in cb.iter().enumerate() {
                    if c != 0.0 {
                        d -= c * self.at(r, j);
                    }
                }
                let dir = match st {
                    VarStatus::AtLower if d < -DUAL_TOL => 1.0,
                    VarStatus::AtUpper if d > DUAL_TOL => -1.0,
                    VarStatus::Free if d.abs() > DUAL_TOL => -d.signum(),
                    _ => continue,
                };
                if bland {
                    entering = Some((j, dir, d.abs()));
                    break;
                }
                if entering.is_none_or(|(_, _, best)| d.abs() > best) {
                    entering = Some((j, dir, d.abs()));
                }
            }

            let Some((q, dir, dq)) = entering else {
                if !rejected.is_empty() || !fresh {
                    rejected.clear();
                    self.refactor();
                    since_refactor = 0;
                    fresh = true;
                    continue;
                }
                return if phase1 {
                    LpStatus::Infeasible
                } else {
                    LpStatus::Optimal
                };
            };

            if self.iterations >= max_iter {
                return LpStatus::IterationLimit;
            }

            // ratio test
            let mut theta = if self.lb[q].is_finite() && self.ub[q].is_finite() {
                self.ub[q] - self.lb[q]
            } else {
                f64::INFINITY
            };
            let mut leave: Option<(usize, f64, bool)> = None; // (row, |alpha|, leaves at upper)
            for r in 0..m {
                let alpha = -self.at(r, q) * dir;
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let b = self.basic[r];
                let (xb, l, u) = (self.x[b], self.lb[b], self.ub[b]);
                let (below, above) = (phase1 && self.below(b), phase1 && self.above(b));
                let (t, to_upper) = if alpha > 0.0 {
                    if above {
                        continue;
                    } else if below {
                        ((l - xb) / alpha, false)
                    } else if u.is_finite() {
                        ((u - xb) / alpha, true)
                    } else {
                        continue;
                    }
                } else if below {
                    continue;
                } else if above {
                    ((u - xb) / alpha, true)
                } else if l.is_finite() {
                    ((l - xb) / alpha, false)
                } else {
                    continue;
                };
                let t = t.max(0.0);
                let take = if t < theta - 1e-12 {
                    true
                } else if t <= theta + 1e-12 {
                    match leave {
                        None => false, // prefer the bound flip on ties
                        Some((lr, la, _)) => {
                            if bland {
                                b < self.basic[lr]
                            } else {
                                alpha.abs() > la
                            }
                        }
                    }
                } else {
                    false
                };
                if take {
                    theta = t.min(theta);
                    leave = Some((r, alpha.abs(), to_upper));
                }
            }

            if !theta.is_finite() {
                if phase1 {
                    // numerically inconsistent direction; try another column
                    rejected.push(q);
                    continue;
                }
                if !fresh {
                    self.refactor();
                    since_refactor = 0;
                    fresh = true;
                    continue;
                }
                return LpStatus::Unbounded;
            }

            self.iterations += 1;
            let improvement = theta * dq;
            if improvement <= 1e-12 {
                stalled += 1;
                if stalled >= STALL_LIMIT {
                    bland = true;
                }
            } else {
                stalled = 0;
                bland = false;
            }

            self.x[q] += dir * theta;
            for r in 0..m {
                let alpha = -self.at(r, q) * dir;
                if alpha != 0.0 {
                    let b = self.basic[r];
                    self.x[b] += alpha * theta;
                }
            }
            match leave {
                None => {
                    if dir > 0.0 {
                        self.status[q] = VarStatus::AtUpper;
                        self.x[q] = self.ub[q];
                    } else {
                        self.status[q] = VarStatus::AtLower;
                        self.x[q] = self.lb[q];
                    }
                }
                Some((r, _, to_upper)) => {
                    let b = self.basic[r];
                    if to_upper {
                        self.status[b] = VarStatus::AtUpper;
                        self.x[b] = self.ub[b];
                    } else {
                        self.status[b] = VarStatus::AtLower;
                        self.x[b] = self.lb[b];
                    }
                    self.status[q] = VarStatus::Basic;
                    self.basic[r] = q;
                    self.pivot(r, q);
                    since_refactor += 1;
                }
            }
            rejected.clear();
            fresh = false;
        }
    }

    fn solution(&self, lp: &LpInstance, status: LpStatus) -> LpSolution {
        let n = lp.num_cols();
        let x: Vec<f64> = self.x[..n].to_vec();
        let objective = lp.obj.iter().zip(&x).map(|(c, v)| c * v).sum();
        let at_lower = (0..n)
            .map(|j| lp.col_lb[j].is_finite() && (x[j] - lp.col_lb[j]).abs() <= EPS_BND)
            .collect();
        let at_upper = (0..n)
            .map(|j| lp.col_ub[j].is_finite() && (x[j] - lp.col_ub[j]).abs() <= EPS_BND)
            .collect();
        LpSolution {
            status,
            x,
            objective,
            iterations: self.iterations,
            at_lower,
            at_upper,
        }
    }

    fn basis(&self, n: usize) -> Basis {
        Basis {
            cols: self.status[..n].to_vec(),
            rows: self.status[n..].to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinearRow, ProductRelation, RelationSense, Variable};

    fn lp(obj: Vec<f64>, lb: Vec<f64>, ub: Vec<f64>, rows: Vec<LpRow>) -> LpInstance {
        LpInstance {
            obj,
            col_lb: lb,
            col_ub: ub,
            rows,
        }
    }

    #[test]
    fn single_bounded_variable() {
        let (sol, _) = solve_lp(&lp(vec![-1.0], vec![0.0], vec![1.0], vec![]), None, &[]);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.x, vec![1.0]);
        assert_eq!(sol.objective, -1.0);
        assert!(sol.at_upper[0]);
    }

    #[test]
    fn two_variable_knapsack_vertex() {
        let inst = lp(
            vec![-1.0, -1.0],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![LpRow::le(vec![(0, 1.0), (1, 1.0)], 1.0)],
        );
        let (sol, _) = solve_lp(&inst, None, &[]);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective + 1.0).abs() < 1e-12);
        // basic: at most one variable strictly inside its bounds
        assert!(sol.interior().count() <= 1);
    }

    #[test]
    fn empty_row_with_negative_rhs_is_infeasible() {
        let inst = lp(
            vec![1.0],
            vec![0.0],
            vec![1.0],
            vec![LpRow::le(vec![], -1.0)],
        );
        assert_eq!(solve_lp(&inst, None, &[]).0.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let inst = lp(
            vec![-1.0, 0.0],
            vec![0.0, 0.0],
            vec![f64::INFINITY, 1.0],
            vec![LpRow::le(vec![(0, 1.0), (1, -1.0)], 0.5)],
        );
        let inst2 = lp(vec![-1.0], vec![0.0], vec![f64::INFINITY], vec![]);
        assert_eq!(solve_lp(&inst, None, &[]).0.status, LpStatus::Optimal);
        assert_eq!(solve_lp(&inst2, None, &[]).0.status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_rows_and_free_columns() {
        // min x + y  s.t. x − y = 1, x + y ≥ 3 (−x − y ≤ −3), y free
        let inst = lp(
            vec![1.0, 1.0],
            vec![0.0, f64::NEG_INFINITY],
            vec![10.0, f64::INFINITY],
            vec![
                LpRow {
                    coeffs: vec![(0, 1.0), (1, -1.0)],
                    sense: LpSense::Eq,
                    rhs: 1.0,
                },
                LpRow::le(vec![(0, -1.0), (1, -1.0)], -3.0),
            ],
        );
        let (sol, _) = solve_lp(&inst, None, &[]);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 3.0).abs() < 1e-9);
        assert!((sol.x[0] - 2.0).abs() < 1e-9 && (sol.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn warm_start_with_added_row_matches_cold_solve() {
        let inst = lp(
            vec![-1.0, -2.0, 0.5],
            vec![0.0; 3],
            vec![4.0, 3.0, 2.0],
            vec![
                LpRow::le(vec![(0, 1.0), (1, 1.0), (2, 1.0)], 5.0),
                LpRow::le(vec![(0, 2.0), (1, -1.0)], 3.0),
            ],
        );
        let (first, basis) = solve_lp(&inst, None, &[]);
        assert_eq!(first.status, LpStatus::Optimal);
        let cut = LpRow::le(vec![(0, 1.0), (1, 2.0)], 5.0);
        let (warm, _) = solve_lp(&inst, Some(&basis), std::slice::from_ref(&cut));
        let mut extended = inst.clone();
        extended.rows.push(cut);
        let (cold, _) = solve_lp(&extended, None, &[]);
        assert_eq!(warm.status, LpStatus::Optimal);
        assert!((warm.objective - cold.objective).abs() < 1e-9);
        assert!(warm.objective >= first.objective - 1e-12);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let inst = lp(
            vec![-1.0, -1.0],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![LpRow::le(vec![(0, 1.0), (1, 1.0)], 1.5)],
        );
        let mut solver = LpSolver::new(inst);
        solver.options.max_iterations = Some(0);
        assert_eq!(solver.solve().status, LpStatus::IterationLimit);
    }

    #[test]
    fn lp_from_problem_adds_mccormick_rows() {
        let mut p = Problem::default();
        let x1 = p.add_variable(Variable::continuous("x1", 0.0, 1.0));
        let x2 = p.add_variable(Variable::continuous("x2", 0.0, 1.0));
        let w = p.add_variable(Variable::continuous("w", 0.0, 1.0));
        p.add_row(LinearRow::le("r", [(x1, 1.0), (x2, 1.0)], 1.0));
        p.add_relation(ProductRelation::explicit(x1, x2, w, RelationSense::Eq));
        p.set_objective([(w, -1.0)]);
        assert_eq!(lp_from_problem(&p, true).num_rows(), 5);
        assert_eq!(lp_from_problem(&p, false).num_rows(), 1);
        let (sol, _) = solve_lp(&lp_from_problem(&p, true), None, &[]);
        assert!((sol.objective + 0.5).abs() < 1e-12);

        p.variables[1].ub = f64::INFINITY;
        // rows using the upper bound of x2 are dropped
        assert_eq!(lp_from_problem(&p, true).num_rows(), 3);
    }

    #[test]
    fn ranged_row_becomes_two_rows() {
        let mut p = Problem::default();
        let x = p.add_variable(Variable::continuous("x", 0.0, 5.0));
        p.add_row(LinearRow::new("r", [(x, 1.0)], 1.0, 2.0));
        p.add_row(LinearRow::eq("e", [(x, 1.0)], 1.5));
        let lp = lp_from_problem(&p, false);
        assert_eq!(lp.num_rows(), 3);
        assert_eq!(lp.rows.iter().filter(|r| r.sense == LpSense::Eq).count(), 1);
    }
}
