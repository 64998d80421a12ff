//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;

use rlt_core::simplex::{LpInstance, LpRow, LpSense};
use rlt_core::{Problem, ProductRelation, RelationSense, VarId};

/// Gaussian elimination with partial pivoting; `None` when (near) singular.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[piv][col].abs() < 1e-11 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                let pivot_row = a[col].clone();
                for (dst, src) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *dst -= f * src;
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Enumerated {
    Optimal(f64),
    Infeasible,
}

fn lp_feasible(lp: &LpInstance, x: &[f64], tol: f64) -> bool {
    x.iter()
        .zip(lp.col_lb.iter().zip(&lp.col_ub))
        .all(|(&v, (&l, &u))| v >= l - tol && v <= u + tol)
        && lp.rows.iter().all(|r| {
            let act = r.activity(x);
            let scale = tol * (1.0 + r.rhs.abs());
            match r.sense {
                LpSense::Le => act <= r.rhs + scale,
                LpSense::Eq => (act - r.rhs).abs() <= scale,
            }
        })
}

/// Optimum of a bounded LP by enumerating every basic solution: a subset of
/// rows held tight and the remaining columns fixed at one of their bounds.
/// Equations outside the tight set are still checked for feasibility, so
/// redundant equations cannot hide a vertex.
pub fn enumerate_vertices(lp: &LpInstance) -> Enumerated {
    let n = lp.num_cols();
    let m = lp.num_rows();
    let rows: Vec<usize> = (0..m).collect();
    let mut best: Option<f64> = None;
    let mut consider = |x: &[f64]| {
        if lp_feasible(lp, x, 1e-9) {
            let z: f64 = lp.obj.iter().zip(x).map(|(c, v)| c * v).sum();
            best = Some(best.map_or(z, |b: f64| b.min(z)));
        }
    };
    for mask in 0u32..(1 << rows.len()) {
        let tight: Vec<usize> = rows
            .iter()
            .copied()
            .filter(|k| mask >> k & 1 == 1)
            .collect();
        let k = tight.len();
        if k > n {
            continue;
        }
        // choose which n - k columns sit at a bound
        for free in subsets(n, k) {
            let fixed: Vec<usize> = (0..n).filter(|c| !free.contains(c)).collect();
            for pattern in 0u32..(1 << fixed.len()) {
                let mut x = vec![0.0; n];
                for (t, &c) in fixed.iter().enumerate() {
                    x[c] = if pattern >> t & 1 == 1 {
                        lp.col_ub[c]
                    } else {
                        lp.col_lb[c]
                    };
                }
                if k == 0 {
                    consider(&x);
                    continue;
                }
                let mut a = vec![vec![0.0; k]; k];
                let mut b = vec![0.0; k];
                for (ri, &r) in tight.iter().enumerate() {
                    let row: &LpRow = &lp.rows[r];
                    b[ri] = row.rhs;
                    for &(c, v) in &row.coeffs {
                        match free.iter().position(|&f| f == c) {
                            Some(p) => a[ri][p] += v,
                            None => b[ri] -= v * x[c],
                        }
                    }
                }
                if let Some(sol) = solve_dense(a, b) {
                    for (p, &c) in free.iter().enumerate() {
                        x[c] = sol[p];
                    }
                    consider(&x);
                }
            }
        }
    }
    best.map_or(Enumerated::Infeasible, Enumerated::Optimal)
}

/// All `k`-element subsets of `0..n`, in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// A bounded LP with at most 6 columns and 8 rows; some are infeasible.
pub fn random_lp(rng: &mut impl Rng) -> LpInstance {
    let n = rng.gen_range(1..=6usize);
    let m = rng.gen_range(0..=8usize);
    let col_lb: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..1.0)).collect();
    let col_ub: Vec<f64> = col_lb.iter().map(|l| l + rng.gen_range(0.5..5.0)).collect();
    let point: Vec<f64> = (0..n)
        .map(|j| rng.gen_range(col_lb[j]..col_ub[j]))
        .collect();
    let mut rows = Vec::new();
    for _ in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.6) {
                let c: f64 = rng.gen_range(-5.0..5.0);
                coeffs.push((j, (c * 4.0).round() / 4.0));
            }
        }
        coeffs.retain(|c| c.1 != 0.0);
        if coeffs.is_empty() {
            continue;
        }
        let act: f64 = coeffs.iter().map(|&(j, c)| c * point[j]).sum();
        if rng.gen_bool(0.15) {
            rows.push(LpRow {
                coeffs,
                sense: LpSense::Eq,
                rhs: act,
            });
        } else {
            rows.push(LpRow::le(coeffs, act + rng.gen_range(-1.5..3.0)));
        }
    }
    let obj = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
    LpInstance {
        obj,
        col_lb,
        col_ub,
        rows,
    }
}

/// Variables that are not the `w` of any relation.
pub fn base_variables(p: &Problem) -> Vec<VarId> {
    (0..p.num_vars())
        .map(VarId)
        .filter(|v| p.relations.iter().all(|r| r.w != *v))
        .collect()
}

/// Grid points of the base variables (binaries at 0/1, continuous on
/// `steps` equally spaced values) with every `w` set to its exact product,
/// kept when all rows and bounds hold within `1e-9`.
pub fn feasible_grid(p: &Problem, steps: usize) -> Vec<Vec<f64>> {
    let base = base_variables(p);
    let values: Vec<Vec<f64>> = base
        .iter()
        .map(|&v| {
            if p.is_binary(v) {
                vec![0.0, 1.0]
            } else {
                let (l, u) = (p.lb(v), p.ub(v));
                (0..steps)
                    .map(|k| l + (u - l) * k as f64 / (steps - 1) as f64)
                    .collect()
            }
        })
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; base.len()];
    loop {
        let mut x = vec![0.0; p.num_vars()];
        for (t, &v) in base.iter().enumerate() {
            x[v.index()] = values[t][idx[t]];
        }
        for rel in &p.relations {
            x[rel.w.index()] = x[rel.i.index()] * x[rel.j.index()];
        }
        if is_feasible(p, &x, 1e-9) {
            out.push(x);
        }
        let mut t = 0;
        loop {
            if t == base.len() {
                return out;
            }
            idx[t] += 1;
            if idx[t] < values[t].len() {
                break;
            }
            idx[t] = 0;
            t += 1;
        }
    }
}

pub fn is_feasible(p: &Problem, x: &[f64], tol: f64) -> bool {
    let bounds = p
        .variables
        .iter()
        .zip(x)
        .all(|(v, &xv)| xv >= v.lb - tol && xv <= v.ub + tol);
    let rows = p.rows.iter().all(|r| {
        let a = r.activity(x);
        a >= r.lhs - tol * (1.0 + r.lhs.abs()) && a <= r.rhs + tol * (1.0 + r.rhs.abs())
    });
    let ints = p
        .variables
        .iter()
        .zip(x)
        .all(|(v, &xv)| !v.is_binary() || (xv - xv.round()).abs() <= tol);
    let rels = p.relations.iter().all(|r| r.holds(x, tol));
    bounds && rows && ints && rels
}

/// The inequality a relation implies on `(w, x_j)` once `x_i = t`, as
/// `[coef_w, coef_xj, rhs]` of a `≤` row scaled to unit max-norm.
pub fn implied_halfspace(r: &ProductRelation, t: f64) -> [f64; 3] {
    // A·t + B·w + C·x_j + D (≤|≥) t·x_j  ⇔  B·w + (C − t)·x_j (≤|≥) −A·t − D
    let mut h = [r.b, r.c - t, -r.a * t - r.d];
    if r.sense == RelationSense::Ge {
        h.iter_mut().for_each(|v| *v = -*v);
    }
    let scale = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale > 0.0 {
        h.iter_mut().for_each(|v| *v /= scale);
    }
    h
}

/// Whether two relations on the same variables imply the same inequalities
/// on both branches of the binary.
pub fn same_implications(r1: &ProductRelation, r2: &ProductRelation, tol: f64) -> bool {
    if r1.sense == RelationSense::Eq || r2.sense == RelationSense::Eq {
        return r1.sense == r2.sense;
    }
    [0.0, 1.0].iter().all(|&t| {
        let (h1, h2) = (implied_halfspace(r1, t), implied_halfspace(r2, t));
        h1.iter().zip(&h2).all(|(a, b)| (a - b).abs() <= tol)
    })
}
