//! Exact lattice and toric combinatorics for weak del Pezzo surfaces that carry
//! self-maps of degree `d^2`.
//!
//! The surfaces are built as blow-up towers over a triangle of lines, paired
//! with the toric fan obtained by the same sequence of corner blow-ups. On top
//! of that sit the negative-curve checks, the classification of the loops that
//! occur (twelve, with `3 <= K^2 <= 7`), and the multiplication-by-`d`
//! endomorphisms together with their ramification bookkeeping.

pub mod classifier;
pub mod cli_report;
pub mod endo;
pub mod error;
pub mod neg_curves;
pub mod par;
pub mod pic_lattice;
pub mod surface_builder;
pub mod toric_fan;

pub use error::{Error, Result};
pub use par::Execution;
