//! Reduced ordered binary decision diagrams, (almost) k-wise independent
//! random Boolean functions represented as OBDDs, and a randomized implicit
//! maximal matching algorithm that runs entirely on characteristic functions.

pub mod builders;
pub mod error;
pub mod graph;
pub mod independence;
pub mod matching;
pub mod mis;
pub mod obdd;
pub mod random;

pub use builders::BitVector;
pub use error::{Error, Result};
pub use obdd::{BoolOp, FuncHandle, ObddError, ObddManager, Quantifier, SizeStats, VarOrder};
