//! Bilateral agreement random graphs.
//!
//! Every vertex ranks the other `n - 1` vertices by i.i.d. edge scores and
//! proposes its `k` favourites. The bilateral graph `G(n, k)` keeps an edge
//! when both endpoints propose it; the unilateral graph `F(n, k)` keeps it
//! when either does. The crate provides streaming generators for both plus an
//! Erdős–Rényi baseline, exact evaluators for the urn, negative multinomial
//! and negative binomial laws that govern their degrees, and a reproducible
//! Monte Carlo harness for the connectivity threshold `k ≈ log n`.
//!
//! Exact evaluators are generic over [`Scalar`], so the same code runs on
//! [`Exact`] big rationals and on `f32`/`f64`. Real-valued bounds and
//! asymptotics are generic over [`num_traits::Float`].

pub mod analysis;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod formulas;
pub mod gen;
pub mod model;
pub mod scalar;
pub mod urn;
pub mod verify;

pub use analysis::{analyze, has_component_in_range, min_degree_at_most, AnalysisReport};
pub use error::{Error, Result};
pub use model::{derive_stream, ModelKind, ModelParams, SeedSpec, TopKSets, UndirectedGraph};
pub use scalar::Scalar;
pub use urn::UrnSpec;

/// Arbitrary-precision rational used by every exact identity.
pub type Exact = num_rational::BigRational;

/// Default real scalar.
pub type Real = f64;

/// Single-precision real scalar.
pub type Real32 = f32;
