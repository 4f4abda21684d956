//! ROC analysis toolkit built around the ROC convex hull.
//!
//! The crate turns scored predictions into ROC curves ([`roc`]), folds any
//! mix of curves and single-point classifiers into the ROC convex hull
//! ([`hull`]), picks the optimal classifier for a set of operating
//! conditions or performance constraints ([`decision`]), and runs the
//! hull as a randomized hybrid classifier that can be re-targeted at run
//! time ([`hybrid`]). [`eval`] holds experiment helpers and brute-force
//! oracles; [`io`] holds the file formats used by the command-line tool.

pub mod decision;
pub mod error;
pub mod eval;
pub mod hull;
pub mod hybrid;
pub mod io;
pub mod roc;

pub use decision::{
    DominatorRow, DominatorTable, LinearConstraint, OperatingConditions, SlopeRange,
};
pub use error::{Error, Result};
pub use hull::{HullVertex, Provenance, Resolution, RocchHull};
pub use hybrid::{ComponentClassifier, HybridPolicy, Prediction};
pub use roc::{
    ClassLabel, ConfusionCounts, CurvePoint, RocCurve, RocPoint, ScoredExample, Threshold,
};

/// Absolute tolerance used for geometric comparisons in the unit square.
pub const EPS: f64 = 1e-12;
