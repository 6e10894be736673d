//! Structural controllability of switched linear ensemble systems.
//!
//! A sparsity pattern fixes which entries of `[A B]` may be nonzero. The
//! crate decides, for a number of switches `k` and an ensemble size `q`,
//! whether some realization of the pattern is controllable, using a
//! max-flow test on a small three-layer network. It also computes the least
//! number of switches `k*` that works for every ensemble size, and carries
//! independent referees: subset enumeration, a unit-capacity lifted network,
//! and exact rank tests on random instances.

pub mod bench;
pub mod decide;
pub mod error;
pub mod flow;
pub mod graph;
pub mod linalg;
pub mod oracle;
pub mod pattern;

pub use decide::{
    check_structural, compute_kstar, crosscheck, verify_certificate, Certificate, KStar,
    KStarResult, KStarWitness, Verdict,
};
pub use error::{Error, Result};
pub use graph::{to_digraph, Digraph, Node};
pub use pattern::{parse_pattern, serialize_pattern, PatternFormat, SparsityPattern};
