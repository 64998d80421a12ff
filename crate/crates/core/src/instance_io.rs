//! The `.rlt.json` instance format and tabular report serialization.
//!
//! Instance documents reference variables by name. Infinite bounds are the
//! strings `"inf"` and `"-inf"` because JSON has no infinity literal.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{ParseError, ReportError};
use crate::model::{
    validate, LinearRow, Problem, ProductRelation, RelationSense, VarId, VarKind, Variable,
};

pub const FORMAT_VERSION: u32 = 1;
pub const INSTANCE_EXTENSION: &str = ".rlt.json";

/// An `f64` that reads and writes infinities as strings.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ExtReal(pub f64);

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtReal;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
                Ok(ExtReal(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtReal, E> {
                match v {
                    "inf" | "+inf" => Ok(ExtReal(f64::INFINITY)),
                    "-inf" => Ok(ExtReal(f64::NEG_INFINITY)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableDoc {
    pub name: String,
    pub lb: ExtReal,
    pub ub: ExtReal,
    pub kind: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveDoc {
    pub sense: String,
    #[serde(default)]
    pub coeffs: BTreeMap<String, f64>,
}

impl Default for ObjectiveDoc {
    fn default() -> Self {
        ObjectiveDoc {
            sense: "min".into(),
            coeffs: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowDoc {
    pub name: String,
    pub lhs: ExtReal,
    pub rhs: ExtReal,
    pub coeffs: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductDoc {
    pub i: String,
    pub j: String,
    pub w: String,
    #[serde(rename = "A", default)]
    pub a: f64,
    #[serde(rename = "B", default = "one")]
    pub b: f64,
    #[serde(rename = "C", default)]
    pub c: f64,
    #[serde(rename = "D", default)]
    pub d: f64,
    pub sense: String,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NativeInstanceDocument {
    pub version: u32,
    #[serde(default)]
    pub variables: Vec<VariableDoc>,
    #[serde(default)]
    pub objective: ObjectiveDoc,
    #[serde(default)]
    pub rows: Vec<RowDoc>,
    #[serde(default)]
    pub products: Vec<ProductDoc>,
}

fn semantic(location: impl Into<String>, message: impl Into<String>) -> ParseError {
    ParseError::Semantic {
        location: location.into(),
        message: message.into(),
    }
}

fn parse_sense(s: &str) -> Option<RelationSense> {
    match s {
        "<=" => Some(RelationSense::Le),
        ">=" => Some(RelationSense::Ge),
        "=" | "==" => Some(RelationSense::Eq),
        _ => None,
    }
}

/// Parses a `.rlt.json` document into a validated [`Problem`].
pub fn parse_instance(text: &str) -> Result<Problem, ParseError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: NativeInstanceDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ParseError::Syntax {
            path,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    problem_from_document(&doc)
}

pub fn problem_from_document(doc: &NativeInstanceDocument) -> Result<Problem, ParseError> {
    if doc.version != FORMAT_VERSION {
        return Err(semantic(
            "version",
            format!(
                "unsupported version {}, expected {FORMAT_VERSION}",
                doc.version
            ),
        ));
    }
    let mut p = Problem::default();
    let mut ids: HashMap<&str, VarId> = HashMap::new();
    for (k, v) in doc.variables.iter().enumerate() {
        let loc = format!("variables[{k}] `{}`", v.name);
        let kind = match v.kind.as_str() {
            "continuous" => VarKind::Continuous,
            "binary" => VarKind::Binary,
            other => return Err(semantic(loc, format!("unknown kind `{other}`"))),
        };
        if v.lb.0 > v.ub.0 {
            return Err(semantic(loc, format!("lb {} > ub {}", v.lb.0, v.ub.0)));
        }
        if ids.contains_key(v.name.as_str()) {
            return Err(semantic(loc, "duplicate variable name"));
        }
        let id = p.add_variable(Variable {
            name: v.name.clone(),
            lb: v.lb.0,
            ub: v.ub.0,
            kind,
        });
        ids.insert(v.name.as_str(), id);
    }
    let lookup = |name: &str, loc: &str| {
        ids.get(name)
            .copied()
            .ok_or_else(|| semantic(loc, format!("unknown variable `{name}`")))
    };

    if doc.objective.sense != "min" {
        return Err(semantic(
            "objective.sense",
            format!("only \"min\" is supported, got `{}`", doc.objective.sense),
        ));
    }
    let mut obj = Vec::new();
    for (name, &c) in &doc.objective.coeffs {
        obj.push((lookup(name, "objective.coeffs")?, c));
    }
    p.set_objective(obj);

    for (k, r) in doc.rows.iter().enumerate() {
        let loc = format!("rows[{k}] `{}`", r.name);
        let mut coeffs = Vec::with_capacity(r.coeffs.len());
        for (name, &c) in &r.coeffs {
            coeffs.push((lookup(name, &loc)?, c));
        }
        p.add_row(LinearRow::new(r.name.clone(), coeffs, r.lhs.0, r.rhs.0));
    }

    for (k, pr) in doc.products.iter().enumerate() {
        let loc = format!("products[{k}]");
        let sense = parse_sense(&pr.sense)
            .ok_or_else(|| semantic(&loc, format!("unknown sense `{}`", pr.sense)))?;
        p.add_relation(ProductRelation {
            i: lookup(&pr.i, &loc)?,
            j: lookup(&pr.j, &loc)?,
            w: lookup(&pr.w, &loc)?,
            a: pr.a,
            b: pr.b,
            c: pr.c,
            d: pr.d,
            sense,
        });
    }

    if let Some(v) = validate(&p).into_iter().next() {
        return Err(semantic(v.location.to_string(), v.message));
    }
    Ok(p)
}

pub fn document_from_problem(p: &Problem) -> NativeInstanceDocument {
    let name = |v: VarId| p.var(v).name.clone();
    NativeInstanceDocument {
        version: FORMAT_VERSION,
        variables: p
            .variables
            .iter()
            .map(|v| VariableDoc {
                name: v.name.clone(),
                lb: ExtReal(v.lb),
                ub: ExtReal(v.ub),
                kind: match v.kind {
                    VarKind::Continuous => "continuous".into(),
                    VarKind::Binary => "binary".into(),
                },
            })
            .collect(),
        objective: ObjectiveDoc {
            sense: "min".into(),
            coeffs: p
                .objective
                .coeffs
                .iter()
                .map(|&(v, c)| (name(v), c))
                .collect(),
        },
        rows: p
            .rows
            .iter()
            .map(|r| RowDoc {
                name: r.name.clone(),
                lhs: ExtReal(r.lhs),
                rhs: ExtReal(r.rhs),
                coeffs: r.coeffs.iter().map(|&(v, c)| (name(v), c)).collect(),
            })
            .collect(),
        products: p
            .relations
            .iter()
            .map(|r| ProductDoc {
                i: name(r.i),
                j: name(r.j),
                w: name(r.w),
                a: r.a,
                b: r.b,
                c: r.c,
                d: r.d,
                sense: r.sense.symbol().into(),
            })
            .collect(),
    }
}

pub fn write_instance(p: &Problem) -> String {
    let mut s = serde_json::to_string_pretty(&document_from_problem(p))
        .expect("instance documents always serialize");
    s.push('\n');
    s
}

pub fn read_instance_file(path: &std::path::Path) -> Result<Problem, ParseError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| semantic(path.display().to_string(), e.to_string()))?;
    parse_instance(&text)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Str,
    Int,
    Real,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Str(String),
    Int(i64),
    Real(f64),
}

impl Value {
    pub fn column_type(&self) -> ColumnType {
        match self {
            Value::Str(_) => ColumnType::Str,
            Value::Int(_) => ColumnType::Int,
            Value::Real(_) => ColumnType::Real,
        }
    }

    /// Text form used in CSV cells.
    pub fn to_cell(&self) -> String {
        match self {
            Value::Str(s) => s.clone(),
            Value::Int(i) => i.to_string(),
            Value::Real(r) => format_real(*r),
        }
    }

    fn same_bits(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Real(a), Value::Real(b)) => {
                a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
            }
            _ => self == other,
        }
    }

    fn key_cmp(&self, other: &Value) -> std::cmp::Ordering {
        match (self, other) {
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Real(a), Value::Real(b)) => a.total_cmp(b),
            _ => self.column_type_rank().cmp(&other.column_type_rank()),
        }
    }

    fn column_type_rank(&self) -> u8 {
        match self {
            Value::Str(_) => 0,
            Value::Int(_) => 1,
            Value::Real(_) => 2,
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Str(s)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<usize> for Value {
    fn from(i: usize) -> Self {
        Value::Int(i as i64)
    }
}

impl From<f64> for Value {
    fn from(r: f64) -> Self {
        Value::Real(r)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_real(r: f64) -> String {
    if r.is_nan() {
        "nan".into()
    } else if r == f64::INFINITY {
        "inf".into()
    } else if r == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{r:.16e}")
    }
}

pub fn parse_real(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: ColumnType,
}

/// A table with a fixed, typed column set. Rows are kept sorted by the first
/// `key_columns` columns so output never depends on insertion order.
#[derive(Clone, Debug)]
pub struct Report {
    pub kind: String,
    columns: Vec<Column>,
    key_columns: usize,
    rows: Vec<Vec<Value>>,
    pub metadata: BTreeMap<String, String>,
}

impl PartialEq for Report {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.columns == other.columns
            && self.key_columns == other.key_columns
            && self.metadata == other.metadata
            && self.rows.len() == other.rows.len()
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_bits(y)))
    }
}

impl Report {
    pub fn new(
        kind: impl Into<String>,
        columns: &[(&str, ColumnType)],
        key_columns: usize,
    ) -> Self {
        assert!(key_columns <= columns.len());
        Report {
            kind: kind.into(),
            columns: columns
                .iter()
                .map(|&(n, ty)| Column {
                    name: n.to_string(),
                    ty,
                })
                .collect(),
            key_columns,
            rows: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn check_row(&self, row: &[Value]) -> Result<(), ReportError> {
        if row.len() != self.columns.len() {
            return Err(ReportError::Malformed(format!(
                "row has {} values, report `{}` has {} columns",
                row.len(),
                self.kind,
                self.columns.len()
            )));
        }
        for (v, c) in row.iter().zip(&self.columns) {
            if v.column_type() != c.ty {
                return Err(ReportError::Malformed(format!(
                    "column `{}` expects {:?}, got {:?}",
                    c.name,
                    c.ty,
                    v.column_type()
                )));
            }
        }
        Ok(())
    }

    /// Inserts `row` at its sorted position (after equal keys).
    pub fn push(&mut self, row: Vec<Value>) -> Result<(), ReportError> {
        self.check_row(&row)?;
        let k = self.key_columns;
        let cmp = |a: &[Value], b: &[Value]| {
            a[..k]
                .iter()
                .zip(&b[..k])
                .map(|(x, y)| x.key_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        };
        let pos = self.rows.partition_point(|r| cmp(r, &row).is_le());
        self.rows.insert(pos, row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))
            .expect("writing to memory");
        for row in &self.rows {
            w.write_record(row.iter().map(Value::to_cell))
                .expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flushing to memory"))
            .expect("CSV of UTF-8 cells is UTF-8")
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<serde_json::Value>> = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| match v {
                        Value::Str(s) => serde_json::Value::String(s.clone()),
                        Value::Int(i) => serde_json::Value::from(*i),
                        Value::Real(r) if r.is_finite() => serde_json::Value::from(*r),
                        Value::Real(r) => serde_json::Value::String(format_real(*r)),
                    })
                    .collect()
            })
            .collect();
        let doc = serde_json::json!({
            "kind": self.kind,
            "columns": self.columns,
            "key_columns": self.key_columns,
            "metadata": self.metadata,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report JSON always serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Report, ReportError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Doc {
            kind: String,
            columns: Vec<Column>,
            key_columns: usize,
            metadata: BTreeMap<String, String>,
            rows: Vec<Vec<serde_json::Value>>,
        }
        let doc: Doc = serde_json::from_str(text)?;
        if doc.key_columns > doc.columns.len() {
            return Err(ReportError::Malformed(
                "key_columns exceeds column count".into(),
            ));
        }
        let mut report = Report {
            kind: doc.kind,
            columns: doc.columns,
            key_columns: doc.key_columns,
            rows: Vec::with_capacity(doc.rows.len()),
            metadata: doc.metadata,
        };
        for raw in doc.rows {
            if raw.len() != report.columns.len() {
                return Err(ReportError::Malformed(
                    "row length differs from column count".into(),
                ));
            }
            let mut row = Vec::with_capacity(raw.len());
            for (v, c) in raw.into_iter().zip(&report.columns) {
                let bad = || ReportError::Malformed(format!("bad value for column `{}`", c.name));
                row.push(match c.ty {
                    ColumnType::Str => Value::Str(v.as_str().ok_or_else(bad)?.to_string()),
                    ColumnType::Int => Value::Int(v.as_i64().ok_or_else(bad)?),
                    ColumnType::Real => match &v {
                        serde_json::Value::String(s) => Value::Real(parse_real(s).ok_or_else(bad)?),
                        _ => Value::Real(v.as_f64().ok_or_else(bad)?),
                    },
                });
            }
            report.check_row(&row)?;
            report.rows.push(row);
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BIGM: &str = r#"{
        "version": 1,
        "variables": [
            {"name": "xi", "lb": 0, "ub": 1, "kind": "binary"},
            {"name": "xj", "lb": 0, "ub": 1, "kind": "continuous"},
            {"name": "w", "lb": "-inf", "ub": "inf", "kind": "continuous"}
        ],
        "objective": {"sense": "min", "coeffs": {"w": -1}},
        "rows": [
            {"name": "r1", "lhs": "-inf", "rhs": 0, "coeffs": {"w": 1, "xi": -1}},
            {"name": "r2", "lhs": "-inf", "rhs": 0, "coeffs": {"w": -1}},
            {"name": "r3", "lhs": "-inf", "rhs": 0, "coeffs": {"w": 1, "xj": -1}},
            {"name": "r4", "lhs": "-inf", "rhs": 1, "coeffs": {"w": -1, "xj": 1, "xi": 1}}
        ],
        "products": []
    }"#;

    #[test]
    fn big_m_document() {
        let p = parse_instance(BIGM).unwrap();
        assert_eq!(p.num_vars(), 3);
        assert_eq!(p.rows.len(), 4);
        assert!(p.relations.is_empty());
        assert_eq!(p.variables[2].lb, f64::NEG_INFINITY);
        let r4 = &p.rows[3];
        assert_eq!(
            r4.coeffs,
            vec![(VarId(0), 1.0), (VarId(1), 1.0), (VarId(2), -1.0)]
        );
    }

    #[test]
    fn empty_document() {
        let p = parse_instance(r#"{"version": 1, "variables": [], "rows": []}"#).unwrap();
        assert_eq!(p, Problem::default());
        assert!(validate(&p).is_empty());
    }

    #[test]
    fn unknown_variable_is_named() {
        let doc = r#"{"version": 1, "variables": [],
            "rows": [{"name": "r", "lhs": "-inf", "rhs": 1, "coeffs": {"x9": 1}}]}"#;
        let err = parse_instance(doc).unwrap_err();
        assert!(matches!(err, ParseError::Semantic { .. }));
        assert!(err.to_string().contains("x9"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_position_and_path() {
        let err = parse_instance("{\"version\": 1,\n \"variables\": [{\"name\": \"x\", \"lb\": 0, \"ub\": 1, \"kind\": \"binary\", \"extra\": 1}]}")
            .unwrap_err();
        let ParseError::Syntax { path, line, .. } = err else {
            panic!("expected a syntax error, got {err:?}");
        };
        assert_eq!(line, 2);
        assert!(path.starts_with("variables[0]"), "{path}");
        assert!(parse_instance(r#"{"version": 1, "variables": [{"name": "x", "lb": "oops", "ub": 1, "kind": "binary"}]}"#).is_err());
    }

    #[test]
    fn semantic_checks() {
        let bad_kind =
            r#"{"version": 1, "variables": [{"name": "x", "lb": 0, "ub": 1, "kind": "integer"}]}"#;
        assert!(parse_instance(bad_kind)
            .unwrap_err()
            .to_string()
            .contains("integer"));
        let crossed = r#"{"version": 1, "variables": [{"name": "x", "lb": 2, "ub": 1, "kind": "continuous"}]}"#;
        assert!(parse_instance(crossed)
            .unwrap_err()
            .to_string()
            .contains("lb"));
        assert!(parse_instance(r#"{"version": 2}"#).is_err());
    }

    #[test]
    fn explicit_products_round_trip() {
        let doc = r#"{"version": 1,
            "variables": [
                {"name": "a", "lb": 0, "ub": 1, "kind": "continuous"},
                {"name": "b", "lb": -1, "ub": 2, "kind": "continuous"},
                {"name": "w", "lb": -2, "ub": 2, "kind": "continuous"}],
            "products": [{"i": "a", "j": "b", "w": "w", "sense": "="}]}"#;
        let p = parse_instance(doc).unwrap();
        assert!(p.relations[0].is_explicit());
        let again = parse_instance(&write_instance(&p)).unwrap();
        assert_eq!(again, p);
    }

    #[test]
    fn write_is_idempotent() {
        let p = parse_instance(BIGM).unwrap();
        let text = write_instance(&p);
        assert_eq!(parse_instance(&text).unwrap(), p);
        assert_eq!(write_instance(&parse_instance(&text).unwrap()), text);
    }

    fn demo_report() -> Report {
        Report::new(
            "demo",
            &[
                ("name", ColumnType::Str),
                ("n", ColumnType::Int),
                ("v", ColumnType::Real),
            ],
            1,
        )
    }

    #[test]
    fn one_row_csv() {
        let mut r = demo_report();
        r.push(vec!["a".into(), 3i64.into(), 0.1.into()]).unwrap();
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "name,n,v");
        let cell = lines[1].rsplit(',').next().unwrap();
        assert_eq!(cell.parse::<f64>().unwrap().to_bits(), 0.1f64.to_bits());
    }

    #[test]
    fn rows_are_sorted_by_key() {
        let mut r1 = demo_report();
        r1.push(vec!["b".into(), 1i64.into(), 1.0.into()]).unwrap();
        r1.push(vec!["a".into(), 2i64.into(), 2.0.into()]).unwrap();
        let mut r2 = demo_report();
        r2.push(vec!["a".into(), 2i64.into(), 2.0.into()]).unwrap();
        r2.push(vec!["b".into(), 1i64.into(), 1.0.into()]).unwrap();
        assert_eq!(r1.to_csv(), r2.to_csv());
        assert_eq!(r1.rows()[0][0], Value::from("a"));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut r = demo_report();
        r.metadata.insert("seed".into(), "7".into());
        for (k, v) in [0.1, 1.0 / 3.0, -2.5e-300, f64::INFINITY, f64::MAX]
            .into_iter()
            .enumerate()
        {
            r.push(vec![format!("row{k}").into(), (k as i64).into(), v.into()])
                .unwrap();
        }
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn type_mismatch_is_rejected() {
        let mut r = demo_report();
        assert!(r.push(vec!["a".into(), 1.0.into(), 1.0.into()]).is_err());
        assert!(r.push(vec!["a".into()]).is_err());
    }
}
