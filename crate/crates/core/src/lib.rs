//! Dynamic evaluation of matrix formulas.
//!
//! A formula over matrix inputs built from `+`, `-`, `*` and `inv` is
//! compiled into a single square matrix `N` such that the formula's value is
//! a block of `N^-1`. Changes to the inputs become sparse changes to `N`,
//! which a Sherman-Morrison-Woodbury engine absorbs without recomputing the
//! whole inverse.

pub mod apps;
pub mod compiler;
pub mod dynformula;
pub mod dyninv;
pub mod error;
pub mod field;
pub mod formula;
pub mod matrix;
pub mod ops;

pub use compiler::{compile, CompiledFormula};
pub use dynformula::{Change, DynamicFormula, UpdateEvent};
pub use dyninv::{InverseBackend, NaiveInverse, Orientation, ResetMode, ResetPolicy, SmwInverse};
pub use error::{Error, Result};
pub use field::{Field, OrderedField, Rational, Zp};
pub use formula::{Assignment, Formula, FormulaBuilder, NodeId, NodeKind};
pub use matrix::{DenseMatrix, SparseDelta};
pub use ops::OpCount;
