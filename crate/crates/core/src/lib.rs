//! Detection of implicit bilinear products in MILP rows and separation of
//! RLT cuts with row marking and projection filtering, plus a small LP and
//! branch-and-bound driver and a benchmark harness built around them.

pub mod bench;
pub mod cutloop;
pub mod detect;
pub mod error;
pub mod generate;
pub mod instance_io;
pub mod linearize;
pub mod model;
pub mod separate;
pub mod simplex;

pub use error::{BenchError, LinearizeError, MetricError, ParseError, ReportError, SolveError};
pub use model::{
    validate, LinearRow, Problem, ProductIndex, ProductRelation, RelId, RelationSense, RowId,
    VarId, VarKind, Variable,
};
