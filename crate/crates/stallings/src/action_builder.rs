//! Staged construction of a transitive, amenable, strongly almost free
//! action of the free group, as an increasing sequence of finite graphs.
//!
//! The pipeline has four layers:
//!
//! - [`quotient`]: finite quotients of F(S) that keep a chosen finite set of
//!   words away from the identity — a deterministic cyclic-quotient ladder
//!   plus a canonical permutation construction that works for any set.
//! - [`coset`]: the metabelian coset space of such a quotient — the free
//!   group acting on pairs (coset, integer vector) through exact
//!   Reidemeister–Schreier data. Orbits are infinite (the space is
//!   torsion-free), yet the action is amenable.
//! - [`folner`]: budgeted orbit balls and the exact search for strictly
//!   (S, ε)-invariant subsets, over box-shaped candidates with a greedy
//!   trim.
//! - [`stage`]: the gluing itself — [`stage::GammaSequence`] grows Γ₀ ⊆ Γ₁ ⊆
//!   ⋯ by copying a ball that contains a Følner set and attaching it by an
//!   ever-longer path, then re-verifies every stage invariant from the
//!   stored data alone.

pub mod coset;
pub mod folner;
pub mod quotient;
pub mod stage;

pub use coset::{CosetPoint, CosetSpace};
pub use folner::{find_folner, FolnerCertificate, FolnerSearcher, OrbitBall};
pub use quotient::{FiniteQuotient, QuotientGroup};
pub use stage::{GammaSequence, StageBudgets, StageMeta, StageReport};
