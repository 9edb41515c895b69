//! Numerical toolkit for modulus-weighted Hölder analysis on boxes in R^n.
//!
//! The library works with sampled functions `f: box ⊂ R^n → R^m` and a modulus
//! of continuity `ω`. It estimates Hölder seminorms and per-scale oscillation
//! profiles, classifies functions into the vanishing subspaces (small / large /
//! far scales), computes dyadic-cube mean oscillation (BMO/VMO functionals),
//! and implements the constructive approximation operators: radial truncation,
//! mollification, inf-convolution envelopes, bump multiplication, and the
//! sup-norm soft-threshold constructions.
//!
//! Everything is deterministic: pair scans reduce with order-independent max
//! folds, sums run in fixed index order, and sampling is seeded.

pub mod approximators;
pub mod c0ops;
pub mod calibration;
pub mod error;
pub mod fixtures;
pub mod grid;
pub mod meanosc;
pub mod modulus;
pub mod oscillation;

pub use error::HolderError;
pub use grid::{Grid, GridFunction, NormSpec, SourceNorm, VectorNorm};
pub use modulus::{Modulus, ModulusCertificate};
