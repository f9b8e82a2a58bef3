//! Periodic orbits with repetitive pattern for locally constant skew products
//! over the full shift with circle fibers.
//!
//! The skew product is `T(ξ, x) = (σξ, f_{ξ₀}(x))` on `Σ_k × S¹`, where each
//! symbol of the alphabet selects one orientation-preserving circle
//! diffeomorphism. This crate builds the nested sequence of contracting
//! periodic orbits (stage words `ξₙ = ξₙ₋₁^{kₙ} αₙ`), certifies the structural
//! conditions on them, and carries the quantitative machinery around the
//! construction:
//!
//! - [`circle_maps`]: circle points, arcs, the closed-form map families, word
//!   compositions and attracting fixed points.
//! - [`symbolic`]: symbols, hierarchical words, periodic points and the shift
//!   metric.
//! - [`pattern`]: the stage builder, the noise-word search and the certificate.
//! - [`fk_metric`]: alignment matches, gap functions and the Feldman–Katok
//!   pseudometric between periodic base orbits.
//! - [`measure_lab`]: empirical orbit measures, strip sets, occupancy counts,
//!   Lyapunov exponents, fiber spanning sets and disintegration histograms.
//!
//! The crate is `no_std` and only needs `alloc`; every operation is a pure
//! function of its inputs.

#![no_std]
#![forbid(unsafe_code)]
// `!(x < y)` deliberately rejects NaN along with the failing comparison
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod circle_maps;
pub mod error;
pub mod fk_metric;
pub mod measure_lab;
pub mod pattern;
pub mod symbolic;

pub use circle_maps::{Arc, CirclePoint, FiberMap, MapFamily};
pub use error::{Error, Result};
pub use pattern::{BuildOptions, PatternCertificate, Stage};
pub use symbolic::{HierarchicalWord, PeriodicPoint, Symbol};
