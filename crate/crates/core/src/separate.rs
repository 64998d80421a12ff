//! RLT cut generation and separation.
//!
//! A row `Σ a_k x_k ≤ b` multiplied by the bound factor `x_j − x̲_j` or
//! `x̄_j − x_j` gives a quadratic inequality whose product terms are then
//! linearized term by term. The baseline separator tries every row with
//! every product variable; the marking separator only tries the factors
//! that can turn a violated product relation into a violated cut.

use std::collections::{BTreeMap, BTreeSet};

use crate::linearize::{
    linearize_term, AffineExpr, CliqueStore, LinearizationKind, LinearizeContext,
};
use crate::model::{
    ColumnMatrix, Problem, ProductIndex, RelId, RowId, RowSense, RowSide, SidedRow, VarId,
};
use crate::simplex::{LpRow, EPS_BND};

/// Minimum violation of a returned cut.
pub const EPS_CUT: f64 = 1e-6;
/// Product relations closer than this to holding with equality mark nothing.
pub const EPS_PROD: f64 = 1e-9;

/// Row mark bitmask.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mark(u8);

impl Mark {
    pub const LT: Mark = Mark(1);
    pub const GT: Mark = Mark(2);
    pub const BOTH: Mark = Mark(3);

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn union(self, other: Mark) -> Mark {
        Mark(self.0 | other.0)
    }

    pub fn has(self, other: Mark) -> bool {
        self.0 & other.0 == other.0
    }
}

/// Marks of the rows for one factor variable, as parallel sorted arrays.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FactorMarks {
    pub row_idcs: Vec<RowId>,
    pub row_marks: Vec<Mark>,
}

impl FactorMarks {
    pub fn mark(&self, row: RowId) -> Option<Mark> {
        self.row_idcs
            .binary_search(&row)
            .ok()
            .map(|k| self.row_marks[k])
    }

    fn set(&mut self, row: RowId, mark: Mark) {
        match self.row_idcs.binary_search(&row) {
            Ok(k) => self.row_marks[k] = self.row_marks[k].union(mark),
            Err(k) => {
                self.row_idcs.insert(k, row);
                self.row_marks.insert(k, mark);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.row_idcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_idcs.is_empty()
    }
}

/// Row marks keyed by the factor variable whose bound factors they select.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MarkTable {
    pub by_factor: BTreeMap<VarId, FactorMarks>,
}

impl MarkTable {
    pub fn mark(&self, factor: VarId, row: RowId) -> Option<Mark> {
        self.by_factor.get(&factor).and_then(|m| m.mark(row))
    }

    pub fn is_empty(&self) -> bool {
        self.by_factor.is_empty()
    }

    /// Number of marked `(factor, row)` entries.
    pub fn len(&self) -> usize {
        self.by_factor.values().map(FactorMarks::len).sum()
    }

    /// `(factor, row, mark)` in factor then row order.
    pub fn entries(&self) -> impl Iterator<Item = (VarId, RowId, Mark)> + '_ {
        self.by_factor.iter().flat_map(|(&f, m)| {
            m.row_idcs
                .iter()
                .zip(&m.row_marks)
                .map(move |(&r, &k)| (f, r, k))
        })
    }

    /// Rows marked for some factor.
    pub fn all_rows(&self) -> BTreeSet<RowId> {
        self.entries().map(|(_, r, _)| r).collect()
    }
}

/// Marks rows by how the current point violates the product relations.
///
/// For a relation on `(x_i, x_j)` with linear side value `v*`, every row with
/// `a_rj ≠ 0` gets `LT` under factor `x_i` if `a_rj·x*_i·x*_j < a_rj·v*` and
/// `GT` if `>`. Both orientations of every pair are visited.
pub fn mark_rows(
    x: &[f64],
    problem: &Problem,
    index: &ProductIndex,
    cols: &ColumnMatrix,
) -> MarkTable {
    let mut table = MarkTable::default();
    for i in index.product_variables() {
        for &(j, rid) in index.partners(i) {
            let rel = &problem.relations[rid.index()];
            let diff = rel.linear_value(x) - x[i.index()] * x[j.index()];
            if diff.abs() <= EPS_PROD {
                continue;
            }
            for &(r, a_rj) in cols.column(j) {
                let s = a_rj * diff;
                let mark = if s > 0.0 { Mark::LT } else { Mark::GT };
                table.by_factor.entry(i).or_default().set(r, mark);
            }
        }
    }
    table
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FactorDirection {
    /// `x_j − x̲_j`
    Lower,
    /// `x̄_j − x_j`
    Upper,
}

/// Bound factors worth trying for a row side of the given original sense.
pub fn factor_choices(mark: Mark, sense: RowSense) -> Vec<FactorDirection> {
    use FactorDirection::*;
    match (mark, sense) {
        (_, RowSense::Eq) => vec![Lower, Upper],
        (m, _) if m == Mark::BOTH => vec![Lower, Upper],
        (m, RowSense::Le) if m == Mark::LT => vec![Lower],
        (m, RowSense::Ge) if m == Mark::LT => vec![Upper],
        (m, RowSense::Le) if m == Mark::GT => vec![Upper],
        (m, RowSense::Ge) if m == Mark::GT => vec![Lower],
        _ => Vec::new(),
    }
}

/// One linearized product term of a cut.
#[derive(Clone, Debug, PartialEq)]
pub struct TermRecord {
    pub k: VarId,
    pub coef: f64,
    pub kind: LinearizationKind,
    pub relation: Option<RelId>,
    /// `linearization(x*) − coef·x*_k·x*_j`; positive values increase the violation.
    pub gain: f64,
    /// For substitutions, `v* − x*_k·x*_j` of the relation used.
    pub gap: f64,
}

/// Identifies a cut within a separation round.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CutId {
    pub row: RowId,
    pub side: RowSide,
    pub factor: VarId,
    pub direction: FactorDirection,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutProvenance {
    pub id: CutId,
    pub terms: Vec<TermRecord>,
    pub unknown_term_count: usize,
}

impl CutProvenance {
    pub fn substitutions(&self) -> impl Iterator<Item = LinearizationKind> + '_ {
        self.terms.iter().map(|t| t.kind)
    }

    /// Whether some relation substitution moved the cut towards violation.
    pub fn has_increasing_substitution(&self) -> bool {
        self.terms.iter().any(|t| {
            t.kind == LinearizationKind::SubstitutedW
                && t.gap.abs() > EPS_PROD
                && t.coef * t.gap > 0.0
        })
    }
}

/// `expr ≤ rhs`, with `expr` carrying no constant.
#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    pub expr: AffineExpr,
    pub rhs: f64,
    /// `expr(x*) − rhs` at the separated point.
    pub violation: f64,
    pub provenance: CutProvenance,
}

impl Cut {
    pub fn id(&self) -> CutId {
        self.provenance.id
    }

    pub fn efficacy(&self) -> f64 {
        let n = self.expr.norm();
        if n > 0.0 {
            self.violation / n
        } else {
            self.violation
        }
    }

    pub fn violation_at(&self, x: &[f64]) -> f64 {
        self.expr.value(x) - self.rhs
    }

    pub fn to_lp_row(&self) -> LpRow {
        LpRow::le(
            self.expr.terms().map(|(v, c)| (v.index(), c)).collect(),
            self.rhs,
        )
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CutFailure {
    InfiniteBound,
    Linearization,
    TooManyUnknownTerms,
    NotFinite,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SeparationSettings {
    pub max_unknown_terms: usize,
    pub eps_cut: f64,
}

impl Default for SeparationSettings {
    fn default() -> Self {
        SeparationSettings {
            max_unknown_terms: 20,
            eps_cut: EPS_CUT,
        }
    }
}

/// Shared read-only data for separating one problem.
pub struct SeparationContext<'a> {
    pub problem: &'a Problem,
    pub index: &'a ProductIndex,
    pub cliques: &'a CliqueStore,
    pub cols: &'a ColumnMatrix,
    pub settings: SeparationSettings,
}

/// Owned version of the structures a [`SeparationContext`] borrows.
pub struct SeparationData {
    pub index: ProductIndex,
    pub cliques: CliqueStore,
    pub cols: ColumnMatrix,
}

impl SeparationData {
    pub fn new(problem: &Problem) -> Self {
        SeparationData {
            index: ProductIndex::build(problem).0,
            cliques: CliqueStore::from_problem(problem),
            cols: ColumnMatrix::from_problem(problem),
        }
    }

    pub fn context<'a>(
        &'a self,
        problem: &'a Problem,
        settings: SeparationSettings,
    ) -> SeparationContext<'a> {
        SeparationContext {
            problem,
            index: &self.index,
            cliques: &self.cliques,
            cols: &self.cols,
            settings,
        }
    }
}

struct Built {
    expr: AffineExpr,
    rhs: f64,
    terms: Vec<TermRecord>,
    unknown: usize,
}

/// Reformulates `Σ coeffs·x ≤ rhs` with the factor of `j` and linearizes it.
fn build(
    coeffs: &[(VarId, f64)],
    rhs: f64,
    j: VarId,
    direction: FactorDirection,
    ctx: &SeparationContext<'_>,
    x: &[f64],
    unknown_limit: Option<usize>,
) -> Result<Built, CutFailure> {
    let (s, beta) = match direction {
        FactorDirection::Lower => (1.0, ctx.problem.lb(j)),
        FactorDirection::Upper => (-1.0, ctx.problem.ub(j)),
    };
    if !beta.is_finite() {
        return Err(CutFailure::InfiniteBound);
    }
    let lctx = LinearizeContext {
        problem: ctx.problem,
        index: ctx.index,
        cliques: ctx.cliques,
        x,
    };
    // s·Σ a_k x_k x_j − s·β·Σ a_k x_k − s·b·x_j + s·b·β ≤ 0
    let mut expr = AffineExpr::constant(s * rhs * beta);
    expr.add_term(j, -s * rhs);
    let mut terms = Vec::with_capacity(coeffs.len());
    let mut unknown = 0;
    for &(k, a) in coeffs {
        let coef = s * a;
        let out = linearize_term(coef, k, j, &lctx).map_err(|_| CutFailure::Linearization)?;
        if out.uses_unknown_term {
            unknown += 1;
            if unknown_limit.is_some_and(|limit| unknown > limit) {
                return Err(CutFailure::TooManyUnknownTerms);
            }
        }
        let exact = coef * x[k.index()] * x[j.index()];
        let gap = match out.relation {
            Some(rid) => {
                let rel = &ctx.problem.relations[rid.index()];
                rel.linear_value(x) - x[k.index()] * x[j.index()]
            }
            None => 0.0,
        };
        terms.push(TermRecord {
            k,
            coef,
            kind: out.kind,
            relation: out.relation,
            gain: out.expr.value(x) - exact,
            gap,
        });
        expr.add_scaled(&out.expr, 1.0);
        if beta != 0.0 {
            expr.add_term(k, -s * beta * a);
        }
    }
    let rhs = -expr.constant;
    expr.constant = 0.0;
    if !expr.is_finite() || !rhs.is_finite() {
        return Err(CutFailure::NotFinite);
    }
    Ok(Built {
        expr,
        rhs,
        terms,
        unknown,
    })
}

/// The RLT cut from `side` and the bound factor of `j` in `direction`.
pub fn generate_rlt_cut(
    side: &SidedRow,
    j: VarId,
    direction: FactorDirection,
    ctx: &SeparationContext<'_>,
    x: &[f64],
) -> Result<Cut, CutFailure> {
    let b = build(
        &side.coeffs,
        side.rhs,
        j,
        direction,
        ctx,
        x,
        Some(ctx.settings.max_unknown_terms),
    )?;
    let violation = b.expr.value(x) - b.rhs;
    Ok(Cut {
        expr: b.expr,
        rhs: b.rhs,
        violation,
        provenance: CutProvenance {
            id: CutId {
                row: side.row,
                side: side.side,
                factor: j,
                direction,
            },
            terms: b.terms,
            unknown_term_count: b.unknown,
        },
    })
}

/// One row side restricted to the variables strictly inside their bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedRow {
    pub row: RowId,
    pub side: RowSide,
    pub coeffs: Vec<(VarId, f64)>,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProjectedSystem {
    /// `interior[v]`: whether `v` is in J1
    pub interior: Vec<bool>,
    pub rows: BTreeMap<(RowId, RowSide), ProjectedRow>,
}

impl ProjectedSystem {
    pub fn j1(&self) -> impl Iterator<Item = VarId> + '_ {
        self.interior
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(k, _)| VarId(k))
    }

    pub fn j2(&self) -> impl Iterator<Item = VarId> + '_ {
        self.interior
            .iter()
            .enumerate()
            .filter(|(_, &b)| !b)
            .map(|(k, _)| VarId(k))
    }

    pub fn row(&self, row: RowId, side: RowSide) -> Option<&ProjectedRow> {
        self.rows.get(&(row, side))
    }
}

/// Whether `x[v]` sits strictly between the problem bounds of `v`.
pub fn is_interior(problem: &Problem, v: VarId, x: f64) -> bool {
    let (lb, ub) = (problem.lb(v), problem.ub(v));
    !(lb.is_finite() && (x - lb).abs() <= EPS_BND) && !(ub.is_finite() && (x - ub).abs() <= EPS_BND)
}

/// Projects every row side onto J1, fixing J2 variables at their values in `x`.
pub fn project_rows(problem: &Problem, x: &[f64]) -> ProjectedSystem {
    let interior: Vec<bool> = (0..problem.num_vars())
        .map(|k| is_interior(problem, VarId(k), x[k]))
        .collect();
    let mut rows = BTreeMap::new();
    for (r, row) in problem.rows.iter().enumerate() {
        for side in row.sides(RowId(r)) {
            let mut coeffs = Vec::new();
            let mut rhs = side.rhs;
            for &(v, a) in &side.coeffs {
                if interior[v.index()] {
                    coeffs.push((v, a));
                } else {
                    rhs -= a * x[v.index()];
                }
            }
            rows.insert(
                (side.row, side.side),
                ProjectedRow {
                    row: side.row,
                    side: side.side,
                    coeffs,
                    rhs,
                },
            );
        }
    }
    ProjectedSystem { interior, rows }
}

/// Violation of the projected cut for a candidate, if it can be built.
pub fn projected_violation(
    proj: &ProjectedRow,
    j: VarId,
    direction: FactorDirection,
    ctx: &SeparationContext<'_>,
    x: &[f64],
) -> Option<f64> {
    build(&proj.coeffs, proj.rhs, j, direction, ctx, x, None)
        .ok()
        .map(|b| b.expr.value(x) - b.rhs)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum SeparationMode {
    Baseline,
    Marking,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct SeparationCounters {
    /// `(row side, factor, direction)` candidates considered
    pub candidates: usize,
    /// candidates discarded by the projected check
    pub projection_rejected: usize,
    /// full cuts constructed
    pub cuts_built: usize,
    /// built cuts that were violated
    pub cuts_kept: usize,
    pub linearization_failures: usize,
    pub unknown_limit_failures: usize,
}

impl std::ops::AddAssign for SeparationCounters {
    fn add_assign(&mut self, o: Self) {
        self.candidates += o.candidates;
        self.projection_rejected += o.projection_rejected;
        self.cuts_built += o.cuts_built;
        self.cuts_kept += o.cuts_kept;
        self.linearization_failures += o.linearization_failures;
        self.unknown_limit_failures += o.unknown_limit_failures;
    }
}

#[derive(Clone, Debug, Default)]
pub struct SeparationResult {
    /// violated cuts in candidate order
    pub cuts: Vec<Cut>,
    pub counters: SeparationCounters,
}

/// Every candidate the separator in `mode` would examine at `x`, in order.
pub fn candidates(
    ctx: &SeparationContext<'_>,
    x: &[f64],
    mode: SeparationMode,
) -> Vec<(SidedRow, VarId, FactorDirection)> {
    let problem = ctx.problem;
    let mut out = Vec::new();
    let finite = |j: VarId, d: FactorDirection| match d {
        FactorDirection::Lower => problem.lb(j).is_finite(),
        FactorDirection::Upper => problem.ub(j).is_finite(),
    };
    match mode {
        SeparationMode::Baseline => {
            let factors = ctx.index.product_variables();
            for (r, row) in problem.rows.iter().enumerate() {
                for side in row.sides(RowId(r)) {
                    for &j in &factors {
                        for d in [FactorDirection::Lower, FactorDirection::Upper] {
                            if finite(j, d) {
                                out.push((side.clone(), j, d));
                            }
                        }
                    }
                }
            }
        }
        SeparationMode::Marking => {
            let marks = mark_rows(x, problem, ctx.index, ctx.cols);
            let mut seen = BTreeSet::new();
            for (j, r, mark) in marks.entries() {
                for side in problem.rows[r.index()].sides(r) {
                    for d in factor_choices(mark, side.sense) {
                        if finite(j, d) && seen.insert((r, side.side, j, d)) {
                            out.push((side.clone(), j, d));
                        }
                    }
                }
            }
            out.sort_by_key(|(s, j, d)| (s.row, s.side, *j, *d));
        }
    }
    out
}

/// Separates RLT cuts violated by `x` by more than `eps_cut`.
pub fn separate_rlt(
    ctx: &SeparationContext<'_>,
    x: &[f64],
    mode: SeparationMode,
    projection: bool,
) -> SeparationResult {
    let mut result = SeparationResult::default();
    let proj = projection.then(|| project_rows(ctx.problem, x));
    let mut seen: BTreeSet<CutId> = BTreeSet::new();
    for (side, j, d) in candidates(ctx, x, mode) {
        let id = CutId {
            row: side.row,
            side: side.side,
            factor: j,
            direction: d,
        };
        if !seen.insert(id) {
            continue;
        }
        result.counters.candidates += 1;
        if let Some(p) = &proj {
            let prow = p.row(side.row, side.side).expect("every side is projected");
            match projected_violation(prow, j, d, ctx, x) {
                Some(v) if v > ctx.settings.eps_cut => {}
                _ => {
                    result.counters.projection_rejected += 1;
                    continue;
                }
            }
        }
        match generate_rlt_cut(&side, j, d, ctx, x) {
            Ok(cut) => {
                result.counters.cuts_built += 1;
                if cut.violation > ctx.settings.eps_cut {
                    result.counters.cuts_kept += 1;
                    result.cuts.push(cut);
                }
            }
            Err(CutFailure::TooManyUnknownTerms) => result.counters.unknown_limit_failures += 1,
            Err(_) => result.counters.linearization_failures += 1,
        }
    }
    result
}
