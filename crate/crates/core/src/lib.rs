//! Max filter embeddings of quotient spaces `V/G`.
//!
//! Two action families are supported: weighted circle actions
//! `θ ↦ diag{e^{i k_j θ}}` on `ℂ^d` and explicit finite groups of orthogonal
//! matrices on `ℝ^d`. Complex vectors are always stored as interleaved
//! `(re, im)` pairs, so `ℂ^d` is identified with `ℝ^{2d}` once for the whole
//! crate and the real inner product is `⟨z, x⟩ = Re(z* x)`.
//!
//! Module map:
//! - [`group`]: actions, stabilizers, `χ(G)`, cohomogeneity, fixed subspaces
//! - [`maxfilter`]: the max filtering map, quotient distance, argmax witnesses
//! - [`bank`]: max filter banks, template generation and counts, split banks
//! - [`bispectrum`]: bispectrum baseline and its power-scaled variant
//! - [`stability`]: empirical bilipschitz probes and degenerate directions
//! - [`annbench`]: synthetic coefficient datasets and ANN λ measurement
//! - [`formats`]: JSON / JSON-lines file formats shared with the CLI

pub mod annbench;
pub mod bank;
pub mod bispectrum;
pub mod embedding;
pub mod error;
pub mod exec;
pub mod formats;
pub mod group;
pub mod linalg;
pub mod maxfilter;
pub mod point;
pub mod rng;
pub mod stability;

pub use bank::{MaxFilterBank, SplitBank, TemplateCount};
pub use bispectrum::{BispectrumEmbedding, BispectrumIndex, FrequencyProfile};
pub use embedding::Embedding;
pub use error::{Error, Result};
pub use exec::Execution;
pub use group::{FiniteGroupAction, GroupAction, GroupElement, StabilizerOrder, WeightedCircleAction};
pub use maxfilter::{CircleSolverConfig, MaxFilterResult, RefineMethod, TrigPolynomial, Witness};
pub use point::OrbitPoint;
