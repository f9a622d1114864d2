//! Scalar differential invariants of four-dimensional metrics with two
//! commuting Killing vector fields.
//!
//! Metrics are given by closed-form component expressions in the two
//! non-Killing coordinates `(t1, t2)`. All derivatives are exact, obtained
//! from truncated Taylor jets.

#![allow(clippy::needless_range_loop, clippy::type_complexity)]

pub mod catalog;
pub mod cli;
pub mod curvature;
pub mod einstein;
pub mod equivalence;
pub mod error;
pub mod expr;
pub mod invariants;
pub mod jet;
pub mod metric;
pub mod oneill;
pub mod rank;
pub mod report;
pub mod second;
pub mod source;
pub mod transform;

pub use error::{Error, Result};
pub use expr::Expr;
pub use invariants::{First, FrameData, Invariants1};
pub use jet::{Jet, Jet2, Scalar};
pub use metric::{G2Metric, PointJets, Rect, StratumFlags};
