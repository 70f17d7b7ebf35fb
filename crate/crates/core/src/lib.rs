//! Geometric diagnostics for learned representations.
//!
//! The crate measures the quantities that enter dimension-dependent generalization
//! bounds for embeddings: intrinsic dimension ([`intrinsic_dim`]), empirical
//! 1-Wasserstein distances ([`transport`]), ℓ1 diameters ([`geometry`]) and
//! spectral-norm Lipschitz products ([`lipschitz`]). [`bound`] assembles them into the
//! layer-wise bound and [`experiments`] checks the `n^(-1/d)` convergence rate on
//! synthetic manifolds. File formats live in [`dataio`]; the `embedgeo` binary is a
//! thin front end in [`cli`].

pub mod bound;
pub mod cli;
pub mod dataio;
pub mod experiments;
pub mod geometry;
pub mod intrinsic_dim;
pub mod lipschitz;
pub mod numeric;
pub mod transport;

pub use dataio::{EmbeddingSet, Matrix, ReportDocument, WeightStack};
