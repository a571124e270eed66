//! Exact symbolic computation in truncated skein algebras of compact
//! oriented surfaces with boundary.
//!
//! The scalar ring is Q[ρ][[h]] truncated at a configurable h-order N.
//! Links in Σ×I are reduced to a descending normal form; on top of that sit
//! the Dehn twist logarithms Λ(c), the BCH composition of mapping class
//! words, and the Heegaard-splitting invariant of closed 3-manifolds.

pub mod coeffs;
pub mod surface;
pub mod diagrams;
pub mod skein;
pub mod dehn;
pub mod mcg;
pub mod invariant;

pub use coeffs::{HSeries, Rational, RhoPoly};
pub use surface::SurfacePresentation;
