//! Seeded random instance families for tests and benchmark corpora.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{LinearRow, Problem, ProductRelation, RelationSense, VarId, Variable};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SenseChoice {
    Any,
    EqualityOnly,
}

fn small_coef(rng: &mut impl Rng) -> f64 {
    let c = [-3.0, -2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0, 3.0];
    *c.choose(rng).unwrap()
}

/// At most 5 variables, 6 rows and 2 explicit products, feasible by construction.
pub fn small_instance(rng: &mut impl Rng, senses: SenseChoice) -> Problem {
    let mut p = Problem::default();
    let nb = rng.gen_range(2..=3usize);
    let mut base = Vec::new();
    for k in 0..nb {
        let v = if rng.gen_bool(0.3) {
            Variable::binary(format!("y{k}"))
        } else {
            let lb = [-2.0, -1.0, 0.0, 0.0][rng.gen_range(0..4)];
            let width = [1.0, 2.0, 3.0][rng.gen_range(0..3)];
            Variable::continuous(format!("x{k}"), lb, lb + width)
        };
        base.push(p.add_variable(v));
    }
    let mut pairs: Vec<(VarId, VarId)> = Vec::new();
    for a in 0..nb {
        for b in a + 1..nb {
            pairs.push((base[a], base[b]));
        }
    }
    pairs.shuffle(rng);
    let np = rng.gen_range(1..=pairs.len().min(5 - nb).min(2));
    for (t, &(i, j)) in pairs.iter().take(np).enumerate() {
        let (li, ui, lj, uj) = (p.lb(i), p.ub(i), p.lb(j), p.ub(j));
        let corners = [li * lj, li * uj, ui * lj, ui * uj];
        let lo = corners.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = corners.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w = p.add_variable(Variable::continuous(format!("w{t}"), lo, hi));
        let sense = match senses {
            SenseChoice::EqualityOnly => RelationSense::Eq,
            SenseChoice::Any => [
                RelationSense::Eq,
                RelationSense::Eq,
                RelationSense::Le,
                RelationSense::Ge,
            ][rng.gen_range(0..4)],
        };
        // binary first so swapped orientations stay meaningful
        let (i, j) = if p.is_binary(j) && !p.is_binary(i) {
            (j, i)
        } else {
            (i, j)
        };
        p.add_relation(ProductRelation::explicit(i, j, w, sense));
    }

    let mut point: Vec<f64> = p
        .variables
        .iter()
        .map(|v| {
            if v.is_binary() {
                rng.gen_range(0..=1) as f64
            } else {
                // on the 11-point grid of the box, so equality rows have grid solutions
                v.lb + (v.ub - v.lb) * rng.gen_range(0..=10) as f64 / 10.0
            }
        })
        .collect();
    for rel in &p.relations {
        point[rel.w.index()] = point[rel.i.index()] * point[rel.j.index()];
    }

    let n = p.num_vars();
    let m = rng.gen_range(1..=6usize);
    for r in 0..m {
        let nnz = rng.gen_range(2..=3usize.min(n));
        let mut vars: Vec<usize> = (0..n).collect();
        vars.shuffle(rng);
        let coeffs: Vec<(VarId, f64)> = vars[..nnz]
            .iter()
            .map(|&v| (VarId(v), small_coef(rng)))
            .collect();
        let act: f64 = coeffs.iter().map(|&(v, c)| c * point[v.index()]).sum();
        let slack = rng.gen_range(0.0..1.0);
        let row = match rng.gen_range(0..10) {
            0 => LinearRow::eq(format!("r{r}"), coeffs, act),
            1 => LinearRow::new(
                format!("r{r}"),
                coeffs,
                act - slack,
                act + rng.gen_range(0.0..1.0),
            ),
            2..=4 => LinearRow::ge(format!("r{r}"), coeffs, act - slack),
            _ => LinearRow::le(format!("r{r}"), coeffs, act + slack),
        };
        p.add_row(row);
    }
    p.set_objective((0..n).map(|v| (VarId(v), rng.gen_range(-2.0..2.0))));
    p
}

/// Binaries `y_k`, continuous `x_k`, and `w_k = y_k·x_k` stated only through
/// loose big-M rows, tied together by budget and knapsack rows.
pub fn mixed_instance(rng: &mut impl Rng, pairs: usize) -> Problem {
    let mut p = Problem::default();
    let mut triples = Vec::new();
    for k in 0..pairs {
        let y = p.add_variable(Variable::binary(format!("y{k}")));
        let lb = if rng.gen_bool(0.3) {
            -rng.gen_range(0.5..2.0)
        } else {
            0.0
        };
        let ub = rng.gen_range(1.0..5.0);
        let x = p.add_variable(Variable::continuous(format!("x{k}"), lb, ub));
        let big_m = (ub.max(-lb) * rng.gen_range(1.5..4.0)).ceil();
        let w = p.add_variable(Variable::continuous(format!("w{k}"), -big_m, big_m));
        triples.push((y, x, w, big_m));
    }
    for (k, &(y, x, w, m)) in triples.iter().enumerate() {
        // y = 0 ⇒ w = 0
        p.add_row(LinearRow::le(
            format!("off_up{k}"),
            [(w, 1.0), (y, -m)],
            0.0,
        ));
        p.add_row(LinearRow::le(
            format!("off_lo{k}"),
            [(w, -1.0), (y, -m)],
            0.0,
        ));
        // y = 1 ⇒ w = x
        p.add_row(LinearRow::le(
            format!("on_up{k}"),
            [(w, 1.0), (x, -1.0), (y, m)],
            m,
        ));
        p.add_row(LinearRow::le(
            format!("on_lo{k}"),
            [(w, -1.0), (x, 1.0), (y, m)],
            m,
        ));
    }
    let ub_sum: f64 = triples.iter().map(|t| p.ub(t.1)).sum();
    p.add_row(LinearRow::le(
        "budget",
        triples.iter().map(|t| (t.1, 1.0)),
        (0.6 * ub_sum * 100.0).round() / 100.0,
    ));
    let weights: Vec<f64> = (0..pairs).map(|_| rng.gen_range(1..=5) as f64).collect();
    let cap = (0.5 * weights.iter().sum::<f64>()).floor().max(1.0);
    p.add_row(LinearRow::le(
        "knapsack",
        triples.iter().zip(&weights).map(|(t, &c)| (t.0, c)),
        cap,
    ));
    let mut obj = Vec::new();
    for &(y, x, w, _) in &triples {
        obj.push((w, -(rng.gen_range(1.0..3.0f64) * 100.0).round() / 100.0));
        obj.push((y, (rng.gen_range(0.2..2.0f64) * 100.0).round() / 100.0));
        obj.push((x, (rng.gen_range(-0.5..0.5f64) * 100.0).round() / 100.0));
    }
    p.set_objective(obj);
    p
}

/// Explicit continuous products on a shared budget row, solved by the root
/// loop but generally not closed by binary branching.
pub fn bilinear_instance(rng: &mut impl Rng, vars: usize) -> Problem {
    let mut p = Problem::default();
    let xs: Vec<VarId> = (0..vars)
        .map(|k| {
            p.add_variable(Variable::continuous(
                format!("x{k}"),
                0.0,
                rng.gen_range(1.0..3.0),
            ))
        })
        .collect();
    let mut obj = Vec::new();
    for k in 0..vars.saturating_sub(1) {
        let (i, j) = (xs[k], xs[k + 1]);
        let hi = p.ub(i) * p.ub(j);
        let w = p.add_variable(Variable::continuous(format!("w{k}"), 0.0, hi));
        p.add_relation(ProductRelation::explicit(i, j, w, RelationSense::Eq));
        obj.push((w, -rng.gen_range(0.5..2.0)));
    }
    let total: f64 = xs.iter().map(|&x| p.ub(x)).sum();
    p.add_row(LinearRow::le(
        "budget",
        xs.iter().map(|&x| (x, 1.0)),
        0.5 * total,
    ));
    for &x in &xs {
        obj.push((x, rng.gen_range(-0.3..0.3)));
    }
    p.set_objective(obj);
    p
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CorpusKind {
    Mixed,
    Small,
    Bilinear,
}

impl CorpusKind {
    pub fn parse(s: &str) -> Option<CorpusKind> {
        match s {
            "mixed" => Some(CorpusKind::Mixed),
            "small" => Some(CorpusKind::Small),
            "bilinear" => Some(CorpusKind::Bilinear),
            _ => None,
        }
    }
}

/// `count` named instances of `kind`, seeded per instance from `seed`.
pub fn corpus(kind: CorpusKind, count: usize, seed: u64) -> Vec<(String, Problem)> {
    (0..count)
        .map(|k| {
            let mut r = rng(seed.wrapping_mul(1_000_003).wrapping_add(k as u64));
            let (prefix, p) = match kind {
                CorpusKind::Mixed => {
                    let n = r.gen_range(3..=6);
                    ("mixed", mixed_instance(&mut r, n))
                }
                CorpusKind::Small => ("small", small_instance(&mut r, SenseChoice::Any)),
                CorpusKind::Bilinear => {
                    let n = r.gen_range(3..=5);
                    ("bilinear", bilinear_instance(&mut r, n))
                }
            };
            (format!("{prefix}{k:04}"), p)
        })
        .collect()
}
