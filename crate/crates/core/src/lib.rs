//! Numerical toolkit for the mixed (Zaremba) boundary value problem of a
//! non-divergence elliptic operator `Lu = -Σ a_ij D_i D_j u` near the point
//! where the Dirichlet boundary Γ₁ meets the oblique-derivative boundary Γ₂.
//!
//! The crate is `no_std` (it needs `alloc`) and carries only the algorithms:
//!
//! * [`geometry`]: domains with a split boundary, balls, layers, vector fields.
//! * [`coeffs`]: coefficient fields and the ellipticity function.
//! * [`capacity`]: Riesz s-capacity through admissible discrete measures.
//! * [`barrier`]: the radial barrier, its certification and the dilation factor.
//! * [`fd`]: a monotone finite-difference scheme with a discrete comparison
//!   principle, including nested grid ladders.
//! * [`chains`]: admissible ball chains in spherical layers.
//! * [`experiments`]: growth-lemma drivers, the chain iteration and the
//!   dichotomy run.
//!
//! File formats, configuration and the command line live in the companion
//! `zaremba-lab` crate.
#![no_std]

extern crate alloc;

pub mod barrier;
pub mod capacity;
pub mod chains;
pub mod coeffs;
pub mod error;
pub mod experiments;
pub mod fd;
pub mod geometry;
pub mod lp;
pub mod math;

pub use error::{Error, Result};
