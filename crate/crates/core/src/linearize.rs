//! Single-term linearization rules used when building RLT cuts, and the
//! McCormick inequalities that relax a product relation.
//!
//! Every rule produces an affine expression that underestimates
//! `coef · x_k · x_j` over the feasible set, so it can replace that term on
//! the left-hand side of a `≤` inequality without cutting off feasible points.

use std::collections::{BTreeMap, HashMap};

use crate::error::LinearizeError;
use crate::model::{LinearRow, Problem, ProductIndex, ProductRelation, RelId, VarId};

/// `Σ terms·x + constant`, with no zero terms stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AffineExpr {
    terms: BTreeMap<VarId, f64>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn constant(c: f64) -> Self {
        AffineExpr {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(v: VarId, coef: f64) -> Self {
        let mut e = AffineExpr::default();
        e.add_term(v, coef);
        e
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (VarId, f64)>, constant: f64) -> Self {
        let mut e = AffineExpr::constant(constant);
        for (v, c) in terms {
            e.add_term(v, c);
        }
        e
    }

    pub fn add_term(&mut self, v: VarId, coef: f64) {
        if coef == 0.0 {
            return;
        }
        let slot = self.terms.entry(v).or_insert(0.0);
        *slot += coef;
        if *slot == 0.0 {
            self.terms.remove(&v);
        }
    }

    /// `self += scale · other`
    pub fn add_scaled(&mut self, other: &AffineExpr, scale: f64) {
        for (&v, &c) in &other.terms {
            self.add_term(v, scale * c);
        }
        self.constant += scale * other.constant;
    }

    pub fn scaled(&self, scale: f64) -> AffineExpr {
        let mut e = AffineExpr::default();
        e.add_scaled(self, scale);
        e
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(v, c)| c * x[v.index()])
            .sum::<f64>()
            + self.constant
    }

    pub fn coeff(&self, v: VarId) -> f64 {
        self.terms.get(&v).copied().unwrap_or(0.0)
    }

    /// Terms in increasing variable order.
    pub fn terms(&self) -> impl Iterator<Item = (VarId, f64)> + '_ {
        self.terms.iter().map(|(&v, &c)| (v, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn norm(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.constant.is_finite() && self.terms.values().all(|c| c.is_finite())
    }
}

/// Literal of a binary variable inside a clique.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: VarId,
    pub complemented: bool,
}

/// `Σ literals ≤ 1` over binary literals.
#[derive(Clone, Debug, PartialEq)]
pub struct Clique {
    pub members: Vec<Literal>,
}

/// Cliques read off rows of the form `Σ_J x_k + Σ_J̄ (1 − x_k) ≤ 1`.
#[derive(Clone, Debug, Default)]
pub struct CliqueStore {
    cliques: Vec<Clique>,
    /// key `(a, b)` with `a < b`: `(a complemented, b complemented)` per clique containing both.
    pairs: HashMap<(VarId, VarId), Vec<(bool, bool)>>,
}

const CLIQUE_TOL: f64 = 1e-9;

impl CliqueStore {
    /// Mines every row side whose coefficients are all `±1` on binary variables
    /// and whose right-hand side makes it a clique. No propagation or probing.
    pub fn from_problem(problem: &Problem) -> Self {
        let mut store = CliqueStore::default();
        for (r, row) in problem.rows.iter().enumerate() {
            if row.coeffs.len() < 2 {
                continue;
            }
            for side in row.sides(crate::model::RowId(r)) {
                let all_unit_binary = side
                    .coeffs
                    .iter()
                    .all(|&(v, c)| problem.is_binary(v) && (c == 1.0 || c == -1.0));
                if !all_unit_binary {
                    continue;
                }
                let negated = side.coeffs.iter().filter(|&&(_, c)| c < 0.0).count() as f64;
                if (side.rhs + negated - 1.0).abs() <= CLIQUE_TOL {
                    store.add(Clique {
                        members: side
                            .coeffs
                            .iter()
                            .map(|&(var, c)| Literal {
                                var,
                                complemented: c < 0.0,
                            })
                            .collect(),
                    });
                }
            }
        }
        store
    }

    pub fn add(&mut self, clique: Clique) {
        if clique.members.len() < 2 {
            return;
        }
        for (p, a) in clique.members.iter().enumerate() {
            for b in &clique.members[p + 1..] {
                if a.var == b.var {
                    continue;
                }
                let (lo, hi) = if a.var < b.var { (a, b) } else { (b, a) };
                let entry = self.pairs.entry((lo.var, hi.var)).or_default();
                let lits = (lo.complemented, hi.complemented);
                if !entry.contains(&lits) {
                    entry.push(lits);
                }
            }
        }
        self.cliques.push(clique);
    }

    pub fn cliques(&self) -> &[Clique] {
        &self.cliques
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    /// Literal pairs `(k complemented, j complemented)` known to form a clique.
    pub fn pair_literals(&self, k: VarId, j: VarId) -> Vec<(bool, bool)> {
        if k == j {
            return Vec::new();
        }
        let swap = k > j;
        let key = if swap { (j, k) } else { (k, j) };
        self.pairs
            .get(&key)
            .map(|v| {
                v.iter()
                    .map(|&(a, b)| if swap { (b, a) } else { (a, b) })
                    .collect()
            })
            .unwrap_or_default()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinearizationKind {
    SubstitutedW,
    BinarySquare,
    SquareSecant,
    SquareTangent,
    Clique,
    McCormickEnv,
    UnknownMcCormick,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearizationOutcome {
    pub expr: AffineExpr,
    pub kind: LinearizationKind,
    pub uses_unknown_term: bool,
    /// Relation whose linear side replaced the product, for `SubstitutedW`.
    pub relation: Option<RelId>,
}

/// The four McCormick estimators of `x_i · x_j`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Estimator {
    /// `x̲_i x_j + x_i x̲_j − x̲_i x̲_j ≤ x_i x_j`
    UnderLower,
    /// `x̄_i x_j + x_i x̄_j − x̄_i x̄_j ≤ x_i x_j`
    UnderUpper,
    /// `x̲_i x_j + x_i x̄_j − x̲_i x̄_j ≥ x_i x_j`
    OverLowerUpper,
    /// `x̄_i x_j + x_i x̲_j − x̄_i x̲_j ≥ x_i x_j`
    OverUpperLower,
}

impl Estimator {
    pub const UNDER: [Estimator; 2] = [Estimator::UnderLower, Estimator::UnderUpper];
    pub const OVER: [Estimator; 2] = [Estimator::OverLowerUpper, Estimator::OverUpperLower];

    /// The estimator as an affine expression, or `None` if a bound it needs is infinite.
    pub fn expr(self, i: VarId, j: VarId, bi: (f64, f64), bj: (f64, f64)) -> Option<AffineExpr> {
        let (ci, cj) = match self {
            Estimator::UnderLower => (bi.0, bj.0),
            Estimator::UnderUpper => (bi.1, bj.1),
            Estimator::OverLowerUpper => (bi.0, bj.1),
            Estimator::OverUpperLower => (bi.1, bj.0),
        };
        if !ci.is_finite() || !cj.is_finite() {
            return None;
        }
        // ci·x_j + cj·x_i − ci·cj
        let mut e = AffineExpr::constant(-ci * cj);
        e.add_term(j, ci);
        e.add_term(i, cj);
        Some(e)
    }
}

/// McCormick rows for one relation, written on its linear side.
#[derive(Clone, Debug, Default)]
pub struct McCormickRows {
    pub rows: Vec<LinearRow>,
    /// Estimators that could not be emitted for lack of finite bounds.
    pub skipped: Vec<Estimator>,
}

/// McCormick inequalities relaxing `rel`, with the relation's linear side
/// `A x_i + B w + C x_j + D` in place of `w`.
///
/// `L ≥ x_i x_j` gets the underestimator rows, `L ≤ x_i x_j` the
/// overestimator rows, `=` both.
pub fn mccormick(
    rel: &ProductRelation,
    bi: (f64, f64),
    bj: (f64, f64),
    name: &str,
) -> McCormickRows {
    let mut out = McCormickRows::default();
    let (lin_terms, lin_const) = rel.linear_terms();
    let linear = AffineExpr::from_terms(lin_terms, lin_const);
    let emit = |est: Estimator, linear_above: bool, out: &mut McCormickRows| {
        let Some(e) = est.expr(rel.i, rel.j, bi, bj) else {
            out.skipped.push(est);
            return;
        };
        // L − e {≥, ≤} 0
        let mut diff = linear.clone();
        diff.add_scaled(&e, -1.0);
        let bound = -diff.constant;
        let label = format!("{name}_{}", out.rows.len());
        let row = if linear_above {
            LinearRow::ge(label, diff.terms(), bound)
        } else {
            LinearRow::le(label, diff.terms(), bound)
        };
        out.rows.push(row);
    };
    if rel.sense.bounds_product_above() {
        for est in Estimator::UNDER {
            emit(est, true, &mut out);
        }
    }
    if rel.sense.bounds_product_below() {
        for est in Estimator::OVER {
            emit(est, false, &mut out);
        }
    }
    out
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SquareSide {
    /// tangent, below `x²` everywhere
    Under,
    /// secant, above `x²` on `[lb, ub]`
    Over,
}

/// `slope·x + intercept`
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
}

impl Line {
    pub fn at(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Secant (`Over`) or tangent at `x_star` (`Under`) of `x²`.
pub fn square_approximator(
    lb: f64,
    ub: f64,
    x_star: f64,
    side: SquareSide,
) -> Result<Line, LinearizeError> {
    match side {
        SquareSide::Over => {
            if !lb.is_finite() || !ub.is_finite() {
                return Err(LinearizeError::NoApproximator(
                    "secant of x² needs finite bounds",
                ));
            }
            Ok(Line {
                slope: lb + ub,
                intercept: -lb * ub,
            })
        }
        SquareSide::Under => {
            if !x_star.is_finite() {
                return Err(LinearizeError::NoApproximator(
                    "tangent of x² needs a finite point",
                ));
            }
            Ok(Line {
                slope: 2.0 * x_star,
                intercept: -x_star * x_star,
            })
        }
    }
}

/// Read-only data needed to linearize product terms at a separation point.
#[derive(Clone, Copy)]
pub struct LinearizeContext<'a> {
    pub problem: &'a Problem,
    pub index: &'a ProductIndex,
    pub cliques: &'a CliqueStore,
    /// Point being separated; used for tangent points and estimator choice.
    pub x: &'a [f64],
}

impl LinearizeContext<'_> {
    fn bounds(&self, v: VarId) -> (f64, f64) {
        (self.problem.lb(v), self.problem.ub(v))
    }
}

/// Linear underestimator of `coef · x_k · x_j`, trying the rules in order:
/// relation substitution, binary square, continuous square, clique, McCormick.
pub fn linearize_term(
    coef: f64,
    k: VarId,
    j: VarId,
    ctx: &LinearizeContext<'_>,
) -> Result<LinearizationOutcome, LinearizeError> {
    let problem = ctx.problem;

    let relations = if k != j {
        ctx.index.relations_of(k, j)
    } else {
        &[][..]
    };
    for &rid in relations {
        let rel = &problem.relations[rid.index()];
        let allowed = (coef > 0.0 && rel.sense.bounds_product_below())
            || (coef < 0.0 && rel.sense.bounds_product_above());
        if allowed {
            let (terms, constant) = rel.linear_terms();
            return Ok(LinearizationOutcome {
                expr: AffineExpr::from_terms(terms, constant).scaled(coef),
                kind: LinearizationKind::SubstitutedW,
                uses_unknown_term: false,
                relation: Some(rid),
            });
        }
    }

    if k == j {
        if problem.is_binary(j) {
            return Ok(LinearizationOutcome {
                expr: AffineExpr::var(j, coef),
                kind: LinearizationKind::BinarySquare,
                uses_unknown_term: false,
                relation: None,
            });
        }
        let (lb, ub) = ctx.bounds(j);
        let (side, kind, point) = if coef > 0.0 {
            let t = ctx.x[j.index()].max(lb).min(ub);
            (SquareSide::Under, LinearizationKind::SquareTangent, t)
        } else {
            (SquareSide::Over, LinearizationKind::SquareSecant, 0.0)
        };
        let line = square_approximator(lb, ub, point, side)?;
        let mut expr = AffineExpr::constant(coef * line.intercept);
        expr.add_term(j, coef * line.slope);
        return Ok(LinearizationOutcome {
            expr,
            kind,
            uses_unknown_term: false,
            relation: None,
        });
    }

    if problem.is_binary(k) && problem.is_binary(j) {
        if let Some(&(kc, jc)) = ctx.cliques.pair_literals(k, j).first() {
            let identity = match (kc, jc) {
                // x_k + x_j ≤ 1
                (false, false) => AffineExpr::constant(0.0),
                // x_k ≤ x_j
                (false, true) => AffineExpr::var(k, 1.0),
                // x_j ≤ x_k
                (true, false) => AffineExpr::var(j, 1.0),
                // x_k + x_j ≥ 1
                (true, true) => AffineExpr::from_terms([(k, 1.0), (j, 1.0)], -1.0),
            };
            return Ok(LinearizationOutcome {
                expr: identity.scaled(coef),
                kind: LinearizationKind::Clique,
                uses_unknown_term: false,
                relation: None,
            });
        }
    }

    let (bk, bj) = (ctx.bounds(k), ctx.bounds(j));
    let candidates = if coef > 0.0 {
        Estimator::UNDER
    } else {
        Estimator::OVER
    };
    let mut best: Option<(f64, AffineExpr)> = None;
    for est in candidates {
        if let Some(e) = est.expr(k, j, bk, bj) {
            let val = e.value(ctx.x);
            // tightest: largest underestimator / smallest overestimator at x
            let better = match &best {
                None => true,
                Some((b, _)) => {
                    if coef > 0.0 {
                        val > *b
                    } else {
                        val < *b
                    }
                }
            };
            if better {
                best = Some((val, e));
            }
        }
    }
    let Some((_, est)) = best else {
        return Err(LinearizeError::NoApproximator(
            "McCormick estimator needs finite bounds",
        ));
    };
    let unknown = relations.is_empty();
    Ok(LinearizationOutcome {
        expr: est.scaled(coef),
        kind: if unknown {
            LinearizationKind::UnknownMcCormick
        } else {
            LinearizationKind::McCormickEnv
        },
        uses_unknown_term: unknown,
        relation: None,
    })
}
