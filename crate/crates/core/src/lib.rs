//! Terminal metric structures for doubling metrics.
//!
//! Given a finite metric space `(X, d)` and a set of terminals `K ⊆ X`, this
//! crate builds structures that preserve distances for every pair in `K × X`
//! up to a factor of `1 + O(ε)` while keeping the structure size governed by
//! `|K|` rather than `|X|`:
//!
//! - terminal spanners ([`spanner::build_terminal_spanner`]),
//! - terminal distance oracles and labelings ([`spanner::TerminalLabeling`]),
//! - terminal structures when only `K` is doubling ([`kdoubling`]),
//! - terminal embeddings into `ℓ∞` ([`linf`]) and `ℓ2` ([`jl`]).
//!
//! Every guarantee is auditable against brute-force ground truth via the
//! [`audit`] module, which is implemented on code paths independent of the
//! construction code.

pub mod audit;
pub mod base;
pub mod gen;
pub mod io;
pub mod jl;
pub mod kdoubling;
pub mod linf;
pub mod marking;
pub mod metric;
pub mod net;
pub mod partition;
pub mod spanner;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty ground set")]
    EmptyGroundSet,
    #[error("empty point list")]
    EmptyPointList,
    #[error("need at least two terminals")]
    NeedTwoTerminals,
    #[error("need at least one terminal")]
    NeedOneTerminal,
    #[error("point index {0} out of range (n = {1})")]
    IndexOutOfRange(usize, usize),
    #[error("duplicate terminal index {0}")]
    DuplicateTerminal(usize),
    #[error("epsilon must lie in (0, 1), got {0}")]
    BadEpsilon(f64),
    #[error("net radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("metric invariant violated: {0}")]
    InvalidMetric(String),
    #[error("query point {0} is not a vertex of the structure")]
    UnknownVertex(usize),
    #[error("terminal-side queries only: {0} is not in the base set")]
    NotInBaseSet(usize),
    #[error("euclidean input required")]
    NotEuclidean,
    #[error("invalid generator parameters: {0}")]
    BadGenParams(String),
    #[error("wrong instance kind: {0}")]
    WrongInstanceKind(String),
    #[error("malformed input file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
