//! Chain recurrence for weighted backward shifts on directed trees.
//!
//! The crate builds truncated windows of three tree families (the line, the
//! comb tree with finite fingers, the grid tree with bi-infinite branches),
//! realizes weighted backward shifts and an explicitly invertible grid
//! operator on them, and works with δ-chains: finite pseudo-orbits whose per
//! step defects stay strictly below δ.
//!
//! On top of the chain arithmetic sit three kinds of results:
//!
//! * construction recipes producing chains between 0 and basis vectors with
//!   exact, pinned defect sizes ([`construct`]);
//! * non-reachability certificates — exact δ thresholds below which no chain
//!   can produce a given branch coordinate — cross-checked by an independent
//!   influence oracle and a seeded random search ([`certify`], [`oracle`]);
//! * a classifier for classical weighted shifts on the line, deciding chain
//!   recurrence from the two weight-product series, including the zero-weight
//!   splitting ([`classical`]).
//!
//! Arithmetic is exact (`BigRational`, including exact complex pairs) unless
//! a computation opts into f64; norms carry exactness through p-th powers so
//! strict comparisons against rational tolerances never round.

pub mod certify;
pub mod chain;
pub mod classical;
pub mod construct;
pub mod error;
pub mod norm;
pub mod operator;
pub mod oracle;
pub mod report;
pub mod runner;
pub mod scalar;
pub mod scenario;
pub mod tree;
pub mod vector;

pub use chain::DeltaChain;
pub use error::{Error, Result};
pub use norm::{Exhaustion, Magnitude, NormSpec};
pub use operator::{LinearOp, WeightAssignment};
pub use scalar::{Mode, Rat, Scalar};
pub use scenario::Scenario;
pub use tree::{DirectedTree, TruncationParams, VertexId};
pub use vector::SeqVector;
