//! Stallings graphs for finitely generated subgroups of free groups.
//!
//! The library implements the combinatorial machinery behind a family of
//! isoperimetric and weak-normality arguments on free groups:
//!
//! - [`words`]: freely reduced words over a symmetric alphabet — the element
//!   type of F(S).
//! - [`digraph`]: finite folded S-labeled digraphs with folding, core
//!   extraction, and surgery (disjoint union, path attachment).
//! - [`subgroups`]: finitely generated subgroups of F(S) as rooted core
//!   graphs — membership, rank, index, conjugates, intersections,
//!   malnormality.
//! - [`schreier`]: the lazy 2|S|-regular completion Γ* of a folded graph,
//!   the vertex action of F(S), and exact orbit-finiteness decisions.
//! - [`isoperimetry`]: exact-rational boundary ratios, (S,ε)-invariance,
//!   φ_S bounds by exhaustive-plus-heuristic search, diagonal powers.
//! - [`normality`]: q/wq-normality witness sweeps, the monotone closure
//!   iteration, and n-degree certification.
//! - [`action_builder`]: the staged construction of a transitive amenable
//!   action of F(S) that is strongly almost free, with exact verification.
//! - [`cli`]: the command-line front end shared by the `stallings` binary.
//!
//! All verdict-relevant arithmetic is exact (integers and rationals); no
//! floating point participates in any decision.

pub mod action_builder;
pub mod cli;
pub mod digraph;
pub mod isoperimetry;
pub mod normality;
pub mod schreier;
pub mod subgroups;
pub mod words;

pub use digraph::{GraphBuilder, SDigraph};
pub use isoperimetry::{PhiBound, Ratio};
pub use schreier::{SchreierView, VertexRef};
pub use subgroups::SubgroupHandle;
pub use words::{Alphabet, Letter, Word};

/// Unified error type for the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input text is not a word over the alphabet.
    #[error("malformed word: {0}")]
    MalformedWord(String),
    /// A vertex id was not present in the graph it was used with.
    #[error("invalid vertex id {0}")]
    InvalidVertex(u32),
    /// A graph surgery precondition (free edge slot, positive length…) failed.
    #[error("surgery conflict: {0}")]
    SurgeryConflict(String),
    /// An operation received an argument outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A staged search ran out of its stated budget.
    #[error("stage {stage}: {search} exhausted its budget ({budget})")]
    StageBudget {
        stage: usize,
        search: &'static str,
        budget: String,
    },
    /// An internal consistency assertion failed (a bug, not an input error).
    #[error("internal consistency: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
