//! Detection of product relations hidden in pairs of linear constraints.
//!
//! Two relations `a₁x_i + b₁w + c₁x_j ≤ d₁` and `a₂x_i + b₂w + c₂x_j ≤ d₂`
//! with binary `x_i` imply `A x_i + B w + C x_j + D ≶ x_i x_j` when
//! `b₁b₂ > 0` and `γ = c₂b₁ − b₂c₁ ≠ 0`. The first relation supplies the
//! implication for `x_i = 1`, the second the one for `x_i = 0`.
//!
//! Candidates are read only from rows that syntactically contain the
//! variables involved, from global bounds and from clique rows.

use std::collections::{BTreeMap, BTreeSet};

use crate::linearize::CliqueStore;
use crate::model::{Problem, ProductRelation, RelationSense, RowId, VarId};

/// Maximum number of ordered pairs tried per `(x_i, w, x_j)` group.
pub const MAX_PAIRS_PER_GROUP: usize = 16;

const DEDUP_TOL: f64 = 1e-9;
const GAMMA_TOL: f64 = 1e-9;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CandidateSource {
    ThreeVarRow,
    ImpliedBound,
    Clique,
    TwoVarRow,
    GlobalBound,
}

/// `a·x_i + b·w + c·x_j ≤ d`.
///
/// `x_i` is absent only for two-variable rows on `(w, x_j)` and global
/// bounds, which pair with any binary; `x_j` is absent whenever `c = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateRelation {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub source: CandidateSource,
    pub x_i: Option<VarId>,
    pub w: VarId,
    pub x_j: Option<VarId>,
    pub row: Option<RowId>,
}

/// Candidates grouped for pairing.
#[derive(Clone, Debug, Default)]
pub struct CandidateStore {
    /// three-variable readings by `(x_i, w, x_j)`
    pub triples: BTreeMap<(VarId, VarId, VarId), Vec<CandidateRelation>>,
    /// implied bounds and clique rows by `(x_i, w)`
    pub implied: BTreeMap<(VarId, VarId), Vec<CandidateRelation>>,
    /// rows on `(w, x_j)` alone
    pub two_var: BTreeMap<(VarId, VarId), Vec<CandidateRelation>>,
    /// global bounds of `w`
    pub global: BTreeMap<VarId, Vec<CandidateRelation>>,
}

impl CandidateStore {
    pub fn len(&self) -> usize {
        self.triples.values().map(Vec::len).sum::<usize>()
            + self.implied.values().map(Vec::len).sum::<usize>()
            + self.two_var.values().map(Vec::len).sum::<usize>()
            + self.global.values().map(Vec::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &CandidateRelation> {
        self.triples
            .values()
            .chain(self.implied.values())
            .chain(self.two_var.values())
            .chain(self.global.values())
            .flatten()
    }

    /// Every `(x_i, w, x_j)` triple that some pair of candidates could serve.
    pub fn keys(&self) -> BTreeSet<(VarId, VarId, VarId)> {
        let mut keys: BTreeSet<_> = self.triples.keys().copied().collect();
        for &(xi, w) in self.implied.keys() {
            for (&(w2, xj), _) in self.two_var.range((w, VarId(0))..=(w, VarId(usize::MAX))) {
                debug_assert_eq!(w2, w);
                if xj != xi {
                    keys.insert((xi, w, xj));
                }
            }
        }
        keys
    }

    /// All candidates usable for the triple, in a fixed order.
    pub fn group(&self, key: (VarId, VarId, VarId)) -> Vec<&CandidateRelation> {
        let (xi, w, xj) = key;
        let mut out: Vec<&CandidateRelation> = Vec::new();
        out.extend(self.triples.get(&key).into_iter().flatten());
        out.extend(self.implied.get(&(xi, w)).into_iter().flatten());
        out.extend(self.two_var.get(&(w, xj)).into_iter().flatten());
        out.extend(self.global.get(&w).into_iter().flatten());
        out
    }
}

/// Harvests candidate relations from rows, global bounds and cliques.
pub fn collect_candidates(problem: &Problem, cliques: &CliqueStore) -> CandidateStore {
    let mut store = CandidateStore::default();
    if problem.binaries().next().is_none() {
        return store;
    }
    let mut w_vars: BTreeSet<VarId> = BTreeSet::new();
    for (r, row) in problem.rows.iter().enumerate() {
        let n = row.coeffs.len();
        if n == 0 || n > 3 {
            continue;
        }
        for side in row.sides(RowId(r)) {
            let cs = &side.coeffs;
            let mut push_reading =
                |xi: Option<VarId>, a: f64, w: (VarId, f64), xj: Option<(VarId, f64)>, source| {
                    let cand = CandidateRelation {
                        a,
                        b: w.1,
                        c: xj.map_or(0.0, |t| t.1),
                        d: side.rhs,
                        source,
                        x_i: xi,
                        w: w.0,
                        x_j: xj.map(|t| t.0),
                        row: Some(side.row),
                    };
                    w_vars.insert(w.0);
                    match (xi, xj) {
                        (Some(i), Some((j, _))) => {
                            store.triples.entry((i, w.0, j)).or_default().push(cand)
                        }
                        (Some(i), None) => store.implied.entry((i, w.0)).or_default().push(cand),
                        (None, Some((j, _))) => {
                            store.two_var.entry((w.0, j)).or_default().push(cand)
                        }
                        (None, None) => store.global.entry(w.0).or_default().push(cand),
                    }
                };
            match n {
                3 => {
                    for p in 0..3 {
                        let (xi, a) = cs[p];
                        if !problem.is_binary(xi) {
                            continue;
                        }
                        let rest: Vec<(VarId, f64)> =
                            (0..3).filter(|&q| q != p).map(|q| cs[q]).collect();
                        push_reading(
                            Some(xi),
                            a,
                            rest[0],
                            Some(rest[1]),
                            CandidateSource::ThreeVarRow,
                        );
                        push_reading(
                            Some(xi),
                            a,
                            rest[1],
                            Some(rest[0]),
                            CandidateSource::ThreeVarRow,
                        );
                    }
                }
                2 => {
                    for p in 0..2 {
                        let (xi, a) = cs[p];
                        if problem.is_binary(xi) {
                            push_reading(
                                Some(xi),
                                a,
                                cs[1 - p],
                                None,
                                CandidateSource::ImpliedBound,
                            );
                        }
                    }
                    push_reading(None, 0.0, cs[0], Some(cs[1]), CandidateSource::TwoVarRow);
                    push_reading(None, 0.0, cs[1], Some(cs[0]), CandidateSource::TwoVarRow);
                }
                _ => push_reading(None, 0.0, cs[0], None, CandidateSource::GlobalBound),
            }
        }
    }

    for clique in cliques.cliques() {
        for (p, li) in clique.members.iter().enumerate() {
            for (q, lw) in clique.members.iter().enumerate() {
                if p == q || li.var == lw.var {
                    continue;
                }
                // lit_i + lit_w ≤ 1 with (1 − x) for complemented literals
                let a = if li.complemented { -1.0 } else { 1.0 };
                let b = if lw.complemented { -1.0 } else { 1.0 };
                let d = 1.0 - li.complemented as u8 as f64 - lw.complemented as u8 as f64;
                w_vars.insert(lw.var);
                store
                    .implied
                    .entry((li.var, lw.var))
                    .or_default()
                    .push(CandidateRelation {
                        a,
                        b,
                        c: 0.0,
                        d,
                        source: CandidateSource::Clique,
                        x_i: Some(li.var),
                        w: lw.var,
                        x_j: None,
                        row: None,
                    });
            }
        }
    }

    for w in w_vars {
        let (lb, ub) = (problem.lb(w), problem.ub(w));
        let entry = store.global.entry(w).or_default();
        for (b, d, ok) in [(1.0, ub, ub.is_finite()), (-1.0, -lb, lb.is_finite())] {
            if ok {
                entry.push(CandidateRelation {
                    a: 0.0,
                    b,
                    c: 0.0,
                    d,
                    source: CandidateSource::GlobalBound,
                    x_i: None,
                    w,
                    x_j: None,
                    row: None,
                });
            }
        }
    }
    store.global.retain(|_, v| !v.is_empty());
    store
}

/// Why a pair of candidates did not yield a relation.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RejectReason {
    /// `a₁ = a₂ = 0`
    NoBinaryCoefficient,
    /// `a₁` and `a₂` do not have the required opposite signs
    SameSignBinary,
    /// `b₁·b₂ ≤ 0`
    OppositeSignW,
    /// `γ = 0`, relative to the magnitude of its two terms
    DegenerateGamma,
}

/// Combines `(rel1, rel2)` on the triple `(x_i, w, x_j)` into one product relation.
///
/// `rel1` must be the relation tightened by `x_i = 1` (`a₁ ≥ 0`) and `rel2`
/// the one tightened by `x_i = 0` (`a₂ ≤ 0`).
pub fn derive_product(
    rel1: &CandidateRelation,
    rel2: &CandidateRelation,
    key: (VarId, VarId, VarId),
) -> Result<ProductRelation, RejectReason> {
    let (a1, b1, c1, d1) = (rel1.a, rel1.b, rel1.c, rel1.d);
    let (a2, b2, c2, d2) = (rel2.a, rel2.b, rel2.c, rel2.d);
    if a1 == 0.0 && a2 == 0.0 {
        return Err(RejectReason::NoBinaryCoefficient);
    }
    if a1 < 0.0 || a2 > 0.0 {
        return Err(RejectReason::SameSignBinary);
    }
    if b1 * b2 <= 0.0 {
        return Err(RejectReason::OppositeSignW);
    }
    let gamma = c2 * b1 - b2 * c1;
    if gamma == 0.0 || gamma.abs() <= GAMMA_TOL * (c2 * b1).abs().max((b2 * c1).abs()) {
        return Err(RejectReason::DegenerateGamma);
    }
    let (xi, w, xj) = key;
    Ok(ProductRelation {
        i: xi,
        j: xj,
        w,
        a: (b2 * (a1 - d1) + b1 * d2) / gamma,
        b: b1 * b2 / gamma,
        c: b1 * c2 / gamma,
        d: -b1 * d2 / gamma,
        sense: if b1 / gamma > 0.0 {
            RelationSense::Le
        } else {
            RelationSense::Ge
        },
    })
}

/// A derived relation together with the candidates it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectedRelation {
    pub relation: ProductRelation,
    pub first: CandidateRelation,
    pub second: CandidateRelation,
}

fn canonical(rel: &ProductRelation, problem: &Problem) -> (VarId, VarId, VarId, [f64; 4]) {
    if rel.j < rel.i && problem.is_binary(rel.j) {
        (rel.j, rel.i, rel.w, [rel.c, rel.b, rel.a, rel.d])
    } else {
        (rel.i, rel.j, rel.w, [rel.a, rel.b, rel.c, rel.d])
    }
}

fn same_relation(x: &ProductRelation, y: &ProductRelation, problem: &Problem) -> bool {
    let (cx, cy) = (canonical(x, problem), canonical(y, problem));
    cx.0 == cy.0
        && cx.1 == cy.1
        && cx.2 == cy.2
        && cx
            .3
            .iter()
            .zip(&cy.3)
            .all(|(p, q)| (p - q).abs() <= DEDUP_TOL * (1.0 + p.abs().max(q.abs())))
}

/// Whether `new` is already implied by `existing` (identical, or `existing` is `=`).
fn covered_by(new: &ProductRelation, existing: &ProductRelation, problem: &Problem) -> bool {
    (existing.sense == new.sense || existing.sense == RelationSense::Eq)
        && same_relation(new, existing, problem)
}

/// Runs detection and keeps the candidate pair behind every relation.
pub fn detect_with_sources(problem: &Problem) -> Vec<DetectedRelation> {
    let cliques = CliqueStore::from_problem(problem);
    let store = collect_candidates(problem, &cliques);
    let mut found: Vec<DetectedRelation> = Vec::new();
    for key in store.keys() {
        let group = store.group(key);
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for (p, r1) in group.iter().enumerate() {
            for (q, r2) in group.iter().enumerate() {
                let usable = p != q
                    && r1.a >= 0.0
                    && r2.a <= 0.0
                    && (r1.a != 0.0 || r2.a != 0.0)
                    && r1.b * r2.b > 0.0
                    && (r1.x_j.is_some() || r2.x_j.is_some());
                if usable {
                    pairs.push((p, q));
                }
            }
        }
        // stronger implications first; the stable sort keeps the group order on ties
        pairs.sort_by(|&(p1, q1), &(p2, q2)| {
            let s1 = group[p1].a.abs() + group[q1].a.abs();
            let s2 = group[p2].a.abs() + group[q2].a.abs();
            s2.total_cmp(&s1)
        });
        for &(p, q) in pairs.iter().take(MAX_PAIRS_PER_GROUP) {
            let Ok(rel) = derive_product(group[p], group[q], key) else {
                continue;
            };
            if !rel.a.is_finite()
                || !rel.b.is_finite()
                || !rel.c.is_finite()
                || !rel.d.is_finite()
                || rel.b == 0.0
            {
                continue;
            }
            if problem
                .relations
                .iter()
                .any(|e| covered_by(&rel, e, problem))
                || found.iter().any(|f| covered_by(&rel, &f.relation, problem))
            {
                continue;
            }
            found.push(DetectedRelation {
                relation: rel,
                first: group[p].clone(),
                second: group[q].clone(),
            });
        }
    }
    found
}

/// Product relations implied by pairs of linear constraints, deduplicated and
/// excluding relations already present in `problem`.
pub fn detect_implicit_products(problem: &Problem) -> Vec<ProductRelation> {
    detect_with_sources(problem)
        .into_iter()
        .map(|d| d.relation)
        .collect()
}

/// `problem` with the detected relations appended.
pub fn with_detected_products(problem: &Problem) -> (Problem, usize) {
    let found = detect_implicit_products(problem);
    let n = found.len();
    let mut out = problem.clone();
    out.relations.extend(found);
    (out, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinearRow, Variable};

    fn cand(a: f64, b: f64, c: f64, d: f64) -> CandidateRelation {
        CandidateRelation {
            a,
            b,
            c,
            d,
            source: CandidateSource::ThreeVarRow,
            x_i: Some(VarId(0)),
            w: VarId(1),
            x_j: Some(VarId(2)),
            row: None,
        }
    }

    const KEY: (VarId, VarId, VarId) = (VarId(0), VarId(1), VarId(2));

    #[test]
    fn big_m_pair_gives_w_below_product() {
        let rel =
            derive_product(&cand(1.0, 1.0, -1.0, 1.0), &cand(-2.0, 1.0, 0.0, 0.0), KEY).unwrap();
        assert_eq!((rel.a, rel.b, rel.c, rel.d), (0.0, 1.0, 0.0, 0.0));
        assert_eq!(rel.sense, RelationSense::Le);
    }

    #[test]
    fn filters() {
        assert_eq!(
            derive_product(&cand(1.0, 1.0, -1.0, 1.0), &cand(-1.0, -1.0, 0.0, 0.0), KEY),
            Err(RejectReason::OppositeSignW)
        );
        assert_eq!(
            derive_product(&cand(0.0, 1.0, -1.0, 1.0), &cand(0.0, 1.0, 0.0, 0.0), KEY),
            Err(RejectReason::NoBinaryCoefficient)
        );
        assert_eq!(
            derive_product(&cand(1.0, 1.0, -1.0, 1.0), &cand(1.0, 1.0, 0.0, 0.0), KEY),
            Err(RejectReason::SameSignBinary)
        );
        assert_eq!(
            derive_product(&cand(1.0, 1.0, 0.0, 1.0), &cand(-1.0, 2.0, 0.0, 0.0), KEY),
            Err(RejectReason::DegenerateGamma)
        );
    }

    fn big_m_problem(lj: f64, uj: f64) -> (Problem, VarId, VarId, VarId) {
        let mut p = Problem::default();
        let xi = p.add_variable(Variable::binary("xi"));
        let xj = p.add_variable(Variable::continuous("xj", lj, uj));
        let w = p.add_variable(Variable::continuous("w", lj.min(0.0), uj.max(0.0)));
        p.add_row(LinearRow::le("r1", [(w, 1.0), (xi, -uj)], 0.0));
        p.add_row(LinearRow::le("r2", [(w, 1.0), (xj, -1.0), (xi, -lj)], -lj));
        p.add_row(LinearRow::le("r3", [(w, -1.0), (xi, lj)], 0.0));
        p.add_row(LinearRow::le("r4", [(w, -1.0), (xj, 1.0), (xi, uj)], uj));
        (p, xi, xj, w)
    }

    #[test]
    fn big_m_rows_yield_both_product_directions() {
        let (p, xi, xj, w) = big_m_problem(0.0, 1.0);
        let store = collect_candidates(&p, &CliqueStore::from_problem(&p));
        assert!(store.len() >= 8, "{}", store.len());
        let found = detect_implicit_products(&p);
        let on_pair: Vec<_> = found
            .iter()
            .filter(|r| r.i == xi && r.j == xj && r.w == w)
            .collect();
        assert_eq!(on_pair.len(), 2, "{found:#?}");
        for sense in [RelationSense::Le, RelationSense::Ge] {
            let r = on_pair.iter().find(|r| r.sense == sense).unwrap();
            assert!(r.is_explicit(), "{r:?}");
        }
    }

    #[test]
    fn no_binaries_no_candidates() {
        let mut p = Problem::default();
        let x = p.add_variable(Variable::continuous("x", 0.0, 1.0));
        let y = p.add_variable(Variable::continuous("y", 0.0, 1.0));
        p.add_row(LinearRow::le("r", [(x, 1.0), (y, 1.0)], 1.0));
        assert!(collect_candidates(&p, &CliqueStore::default()).is_empty());
        assert!(detect_implicit_products(&p).is_empty());
    }

    #[test]
    fn clique_row_becomes_candidate() {
        let mut p = Problem::default();
        let xi = p.add_variable(Variable::binary("xi"));
        let w = p.add_variable(Variable::binary("w"));
        p.add_row(LinearRow::le("c", [(xi, 1.0), (w, 1.0)], 1.0));
        let store = collect_candidates(&p, &CliqueStore::from_problem(&p));
        let clique: Vec<_> = store
            .iter()
            .filter(|c| c.source == CandidateSource::Clique && c.x_i == Some(xi) && c.w == w)
            .collect();
        assert_eq!(clique.len(), 1);
        assert_eq!(
            (clique[0].a, clique[0].b, clique[0].c, clique[0].d),
            (1.0, 1.0, 0.0, 1.0)
        );
    }

    #[test]
    fn existing_relations_are_not_reported_again() {
        let (mut p, xi, xj, w) = big_m_problem(0.0, 1.0);
        p.add_relation(ProductRelation::explicit(xi, xj, w, RelationSense::Eq));
        let found = detect_implicit_products(&p);
        assert!(found
            .iter()
            .all(|r| !(r.i == xi && r.j == xj && r.w == w && r.is_explicit())));
    }
}
