//! Problem representation: variables, linear rows, bilinear product relations,
//! plus the adjacency structures used during separation.
//!
//! Bounds are plain `f64` values where `f64::INFINITY` / `f64::NEG_INFINITY`
//! stand for missing bounds. Every place that needs a finite bound checks
//! `is_finite()` explicitly.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub usize);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(
    /// Dense index of a variable in [`Problem::variables`].
    VarId
);
id_type!(
    /// Dense index of a row in [`Problem::rows`].
    RowId
);
id_type!(
    /// Dense index of a relation in [`Problem::relations`].
    RelId
);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lb: f64,
    pub ub: f64,
    pub kind: VarKind,
}

impl Variable {
    pub fn continuous(name: impl Into<String>, lb: f64, ub: f64) -> Self {
        Variable {
            name: name.into(),
            lb,
            ub,
            kind: VarKind::Continuous,
        }
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Variable {
            name: name.into(),
            lb: 0.0,
            ub: 1.0,
            kind: VarKind::Binary,
        }
    }

    pub fn is_binary(&self) -> bool {
        self.kind == VarKind::Binary
    }
}

/// Sense of a row after ranged rows have been split into sides.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

/// Which finite side of a two-sided row is meant.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowSide {
    /// `a·x ≤ rhs`
    Upper,
    /// `a·x ≥ lhs`, stored negated as `-a·x ≤ -lhs`
    Lower,
}

/// `lhs ≤ Σ coeffs·x ≤ rhs`. Coefficients are sorted by variable id and never zero.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearRow {
    pub name: String,
    pub coeffs: Vec<(VarId, f64)>,
    pub lhs: f64,
    pub rhs: f64,
}

impl LinearRow {
    /// Builds a row, merging duplicate variables and dropping zero coefficients.
    pub fn new(
        name: impl Into<String>,
        coeffs: impl IntoIterator<Item = (VarId, f64)>,
        lhs: f64,
        rhs: f64,
    ) -> Self {
        let mut merged: BTreeMap<VarId, f64> = BTreeMap::new();
        for (v, c) in coeffs {
            *merged.entry(v).or_insert(0.0) += c;
        }
        LinearRow {
            name: name.into(),
            coeffs: merged.into_iter().filter(|&(_, c)| c != 0.0).collect(),
            lhs,
            rhs,
        }
    }

    pub fn le(
        name: impl Into<String>,
        coeffs: impl IntoIterator<Item = (VarId, f64)>,
        rhs: f64,
    ) -> Self {
        Self::new(name, coeffs, f64::NEG_INFINITY, rhs)
    }

    pub fn ge(
        name: impl Into<String>,
        coeffs: impl IntoIterator<Item = (VarId, f64)>,
        lhs: f64,
    ) -> Self {
        Self::new(name, coeffs, lhs, f64::INFINITY)
    }

    pub fn eq(
        name: impl Into<String>,
        coeffs: impl IntoIterator<Item = (VarId, f64)>,
        rhs: f64,
    ) -> Self {
        Self::new(name, coeffs, rhs, rhs)
    }

    pub fn is_equality(&self) -> bool {
        self.lhs == self.rhs
    }

    pub fn coeff(&self, v: VarId) -> f64 {
        self.coeffs
            .binary_search_by_key(&v, |&(u, _)| u)
            .map(|k| self.coeffs[k].1)
            .unwrap_or(0.0)
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(v, c)| c * x[v.index()]).sum()
    }

    /// The finite one-sided readings of this row, each normalized to `≤`.
    pub fn sides(&self, id: RowId) -> Vec<SidedRow> {
        let mut sides = Vec::with_capacity(2);
        let eq = self.is_equality();
        if self.rhs.is_finite() {
            sides.push(SidedRow {
                row: id,
                side: RowSide::Upper,
                sense: if eq { RowSense::Eq } else { RowSense::Le },
                coeffs: self.coeffs.clone(),
                rhs: self.rhs,
            });
        }
        if self.lhs.is_finite() {
            sides.push(SidedRow {
                row: id,
                side: RowSide::Lower,
                sense: if eq { RowSense::Eq } else { RowSense::Ge },
                coeffs: self.coeffs.iter().map(|&(v, c)| (v, -c)).collect(),
                rhs: -self.lhs,
            });
        }
        sides
    }
}

/// One finite side of a [`LinearRow`], written as `Σ coeffs·x ≤ rhs`.
///
/// `sense` remembers the original sense: `Ge` for the lower side of a ranged
/// or `≥` row, `Eq` for both sides of an equality.
#[derive(Clone, Debug, PartialEq)]
pub struct SidedRow {
    pub row: RowId,
    pub side: RowSide,
    pub sense: RowSense,
    pub coeffs: Vec<(VarId, f64)>,
    pub rhs: f64,
}

/// Sense of `A·x_i + B·w + C·x_j + D ≶ x_i·x_j`, read as "linear side ≶ product".
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationSense {
    /// linear side ≤ x_i·x_j
    Le,
    /// linear side ≥ x_i·x_j
    Ge,
    Eq,
}

impl RelationSense {
    /// Whether `linear side ≤ product` is implied.
    pub fn bounds_product_below(self) -> bool {
        matches!(self, RelationSense::Le | RelationSense::Eq)
    }

    /// Whether `linear side ≥ product` is implied.
    pub fn bounds_product_above(self) -> bool {
        matches!(self, RelationSense::Ge | RelationSense::Eq)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            RelationSense::Le => "<=",
            RelationSense::Ge => ">=",
            RelationSense::Eq => "=",
        }
    }
}

/// `A·x_i + B·w + C·x_j + D ≶ x_i·x_j`.
///
/// An explicit product `w ≶ x_i·x_j` has `A = C = D = 0` and `B = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductRelation {
    pub i: VarId,
    pub j: VarId,
    pub w: VarId,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub sense: RelationSense,
}

impl ProductRelation {
    pub fn explicit(i: VarId, j: VarId, w: VarId, sense: RelationSense) -> Self {
        ProductRelation {
            i,
            j,
            w,
            a: 0.0,
            b: 1.0,
            c: 0.0,
            d: 0.0,
            sense,
        }
    }

    pub fn is_explicit(&self) -> bool {
        self.a == 0.0 && self.b == 1.0 && self.c == 0.0 && self.d == 0.0
    }

    /// Value of the linear side at `x`.
    pub fn linear_value(&self, x: &[f64]) -> f64 {
        self.a * x[self.i.index()]
            + self.b * x[self.w.index()]
            + self.c * x[self.j.index()]
            + self.d
    }

    /// The linear side as sorted `(var, coef)` terms plus a constant.
    pub fn linear_terms(&self) -> (Vec<(VarId, f64)>, f64) {
        let mut m: BTreeMap<VarId, f64> = BTreeMap::new();
        *m.entry(self.i).or_insert(0.0) += self.a;
        *m.entry(self.w).or_insert(0.0) += self.b;
        *m.entry(self.j).or_insert(0.0) += self.c;
        (m.into_iter().filter(|&(_, c)| c != 0.0).collect(), self.d)
    }

    /// `x_i·x_j − linear side` at `x`; positive when the product exceeds the linear side.
    pub fn gap(&self, x: &[f64]) -> f64 {
        x[self.i.index()] * x[self.j.index()] - self.linear_value(x)
    }

    /// Whether the relation holds at `x` within `tol`.
    pub fn holds(&self, x: &[f64], tol: f64) -> bool {
        let g = self.gap(x);
        match self.sense {
            RelationSense::Le => g >= -tol,
            RelationSense::Ge => g <= tol,
            RelationSense::Eq => g.abs() <= tol,
        }
    }

    pub fn partner(&self, v: VarId) -> Option<VarId> {
        if v == self.i {
            Some(self.j)
        } else if v == self.j {
            Some(self.i)
        } else {
            None
        }
    }
}

/// `min Σ coeffs·x`. Coefficients sorted by variable id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Objective {
    pub coeffs: Vec<(VarId, f64)>,
}

impl Objective {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(v, c)| c * x[v.index()]).sum()
    }

    pub fn dense(&self, n: usize) -> Vec<f64> {
        let mut c = vec![0.0; n];
        for &(v, a) in &self.coeffs {
            c[v.index()] += a;
        }
        c
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Problem {
    pub variables: Vec<Variable>,
    pub rows: Vec<LinearRow>,
    pub objective: Objective,
    pub relations: Vec<ProductRelation>,
}

impl Problem {
    pub fn add_variable(&mut self, v: Variable) -> VarId {
        self.variables.push(v);
        VarId(self.variables.len() - 1)
    }

    pub fn add_row(&mut self, row: LinearRow) -> RowId {
        self.rows.push(row);
        RowId(self.rows.len() - 1)
    }

    pub fn add_relation(&mut self, rel: ProductRelation) -> RelId {
        self.relations.push(rel);
        RelId(self.relations.len() - 1)
    }

    pub fn set_objective(&mut self, coeffs: impl IntoIterator<Item = (VarId, f64)>) {
        let mut m: BTreeMap<VarId, f64> = BTreeMap::new();
        for (v, c) in coeffs {
            *m.entry(v).or_insert(0.0) += c;
        }
        self.objective.coeffs = m.into_iter().filter(|&(_, c)| c != 0.0).collect();
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn var(&self, v: VarId) -> &Variable {
        &self.variables[v.index()]
    }

    pub fn lb(&self, v: VarId) -> f64 {
        self.variables[v.index()].lb
    }

    pub fn ub(&self, v: VarId) -> f64 {
        self.variables[v.index()].ub
    }

    pub fn is_binary(&self, v: VarId) -> bool {
        self.variables[v.index()].is_binary()
    }

    pub fn binaries(&self) -> impl Iterator<Item = VarId> + '_ {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_binary())
            .map(|(k, _)| VarId(k))
    }

    /// Variables occurring as `i` or `j` of some relation, sorted.
    pub fn product_variables(&self) -> Vec<VarId> {
        let mut vs: Vec<VarId> = self.relations.iter().flat_map(|r| [r.i, r.j]).collect();
        vs.sort();
        vs.dedup();
        vs
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .map(VarId)
    }
}

/// Where a validation failure was found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Location {
    Variable(VarId),
    Row(RowId),
    Relation(RelId),
    Objective,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Variable(v) => write!(f, "variable {v}"),
            Location::Row(r) => write!(f, "row {r}"),
            Location::Relation(r) => write!(f, "relation {r}"),
            Location::Objective => write!(f, "objective"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub location: Location,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Checks every structural invariant of `problem`. Empty result means valid.
pub fn validate(problem: &Problem) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = problem.num_vars();
    let mut push = |location: Location, message: String| out.push(Violation { location, message });

    let mut names: HashMap<&str, usize> = HashMap::new();
    for (k, v) in problem.variables.iter().enumerate() {
        let loc = || Location::Variable(VarId(k));
        if let Some(prev) = names.insert(v.name.as_str(), k) {
            push(
                loc(),
                format!("name `{}` already used by variable {prev}", v.name),
            );
        }
        if v.lb.is_nan() || v.ub.is_nan() {
            push(loc(), format!("`{}` has a NaN bound", v.name));
            continue;
        }
        if v.lb > v.ub {
            push(loc(), format!("`{}` has lb {} > ub {}", v.name, v.lb, v.ub));
        }
        if v.lb == f64::INFINITY || v.ub == f64::NEG_INFINITY {
            push(loc(), format!("`{}` has an empty domain", v.name));
        }
        if v.is_binary() && !(v.lb >= 0.0 && v.ub <= 1.0 && v.lb.is_finite() && v.ub.is_finite()) {
            push(
                loc(),
                format!(
                    "binary `{}` must have bounds within [0, 1], got [{}, {}]",
                    v.name, v.lb, v.ub
                ),
            );
        }
    }

    let check_terms = |terms: &[(VarId, f64)], loc: Location, out: &mut Vec<Violation>| {
        let mut prev: Option<VarId> = None;
        for &(v, c) in terms {
            if v.index() >= n {
                out.push(Violation {
                    location: loc.clone(),
                    message: format!("unknown variable id {v}"),
                });
            }
            if !c.is_finite() {
                out.push(Violation {
                    location: loc.clone(),
                    message: format!("non-finite coefficient {c} on variable {v}"),
                });
            }
            if c == 0.0 {
                out.push(Violation {
                    location: loc.clone(),
                    message: format!("explicit zero coefficient on variable {v}"),
                });
            }
            if prev.is_some_and(|p| p >= v) {
                out.push(Violation {
                    location: loc.clone(),
                    message: "coefficients not sorted by variable or duplicated".into(),
                });
            }
            prev = Some(v);
        }
    };

    for (k, row) in problem.rows.iter().enumerate() {
        let loc = Location::Row(RowId(k));
        check_terms(&row.coeffs, loc.clone(), &mut out);
        if row.lhs.is_nan() || row.rhs.is_nan() {
            out.push(Violation {
                location: loc,
                message: format!("row `{}` has a NaN side", row.name),
            });
            continue;
        }
        if !row.lhs.is_finite() && !row.rhs.is_finite() {
            out.push(Violation {
                location: loc.clone(),
                message: format!("row `{}` has no finite side", row.name),
            });
        }
        if row.lhs == f64::INFINITY || row.rhs == f64::NEG_INFINITY {
            out.push(Violation {
                location: loc.clone(),
                message: format!(
                    "row `{}` has an infinite side pointing the wrong way",
                    row.name
                ),
            });
        }
        if row.lhs > row.rhs {
            out.push(Violation {
                location: loc,
                message: format!("row `{}` has lhs {} > rhs {}", row.name, row.lhs, row.rhs),
            });
        }
    }

    check_terms(&problem.objective.coeffs, Location::Objective, &mut out);

    for (k, rel) in problem.relations.iter().enumerate() {
        let loc = || Location::Relation(RelId(k));
        let ids = [rel.i, rel.j, rel.w];
        if ids.iter().any(|v| v.index() >= n) {
            out.push(Violation {
                location: loc(),
                message: "references an unknown variable".into(),
            });
            continue;
        }
        if [rel.a, rel.b, rel.c, rel.d].iter().any(|c| !c.is_finite()) {
            out.push(Violation {
                location: loc(),
                message: "non-finite coefficient".into(),
            });
        }
        if rel.b == 0.0 {
            out.push(Violation {
                location: loc(),
                message: "coefficient B of w must be nonzero".into(),
            });
        }
        if rel.i == rel.j {
            out.push(Violation {
                location: loc(),
                message: "product of a variable with itself is not a bilinear relation".into(),
            });
        }
        if rel.w == rel.i || rel.w == rel.j {
            out.push(Violation {
                location: loc(),
                message: "w must differ from both product variables".into(),
            });
        }
        if rel.b != 0.0 && !rel.is_explicit() && !problem.is_binary(rel.i) {
            out.push(Violation {
                location: loc(),
                message: format!(
                    "implicit relation needs a binary x_i, `{}` is continuous",
                    problem.var(rel.i).name
                ),
            });
        }
    }
    out
}

/// Adjacency over product relations: partners of a variable and relations of a pair.
#[derive(Clone, Debug, Default)]
pub struct ProductIndex {
    by_var: BTreeMap<VarId, Vec<(VarId, RelId)>>,
    by_pair: HashMap<(VarId, VarId), Vec<RelId>>,
}

fn pair_key(a: VarId, b: VarId) -> (VarId, VarId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl ProductIndex {
    /// Builds the index over `problem.relations`.
    ///
    /// Returns the ids of relations skipped because an identical explicit
    /// relation (same unordered pair, same `w`, same sense) came earlier.
    pub fn build(problem: &Problem) -> (ProductIndex, Vec<RelId>) {
        let mut index = ProductIndex::default();
        let mut seen_explicit: HashMap<((VarId, VarId), VarId, RelationSense), RelId> =
            HashMap::new();
        let mut duplicates = Vec::new();
        for (k, rel) in problem.relations.iter().enumerate() {
            let id = RelId(k);
            if rel.is_explicit() {
                let key = (pair_key(rel.i, rel.j), rel.w, rel.sense);
                if seen_explicit.contains_key(&key) {
                    duplicates.push(id);
                    continue;
                }
                seen_explicit.insert(key, id);
            }
            index.by_var.entry(rel.i).or_default().push((rel.j, id));
            index.by_var.entry(rel.j).or_default().push((rel.i, id));
            index
                .by_pair
                .entry(pair_key(rel.i, rel.j))
                .or_default()
                .push(id);
        }
        for list in index.by_var.values_mut() {
            list.sort();
        }
        (index, duplicates)
    }

    /// `(partner, relation)` entries for `v`, sorted by partner then relation id.
    pub fn partners(&self, v: VarId) -> &[(VarId, RelId)] {
        self.by_var.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Relations over the unordered pair `{a, b}`, in id order.
    pub fn relations_of(&self, a: VarId, b: VarId) -> &[RelId] {
        self.by_pair
            .get(&pair_key(a, b))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Variables participating in at least one indexed relation, sorted.
    pub fn product_variables(&self) -> Vec<VarId> {
        self.by_var.keys().copied().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.by_var.is_empty()
    }

    pub fn num_pairs(&self) -> usize {
        self.by_pair.len()
    }
}

/// Column-wise view of the problem rows: for each variable, the rows it occurs in.
#[derive(Clone, Debug)]
pub struct ColumnMatrix {
    cols: Vec<Vec<(RowId, f64)>>,
}

impl ColumnMatrix {
    pub fn from_problem(problem: &Problem) -> Self {
        let mut cols = vec![Vec::new(); problem.num_vars()];
        for (r, row) in problem.rows.iter().enumerate() {
            for &(v, c) in &row.coeffs {
                cols[v.index()].push((RowId(r), c));
            }
        }
        ColumnMatrix { cols }
    }

    pub fn column(&self, v: VarId) -> &[(RowId, f64)] {
        &self.cols[v.index()]
    }
}
