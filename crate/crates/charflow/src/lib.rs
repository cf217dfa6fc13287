//! Exact universal-character tau-function grids and the integrable systems they solve.
//!
//! The library builds, in exact rational arithmetic, the (L,L)-periodic grids of
//! universal characters that arise from the similarity reduction of the bilinear
//! tau-function hierarchy, and certifies that they solve three equivalent layers of
//! structure:
//!
//! * the bilinear/Hirota identity layer ([`identity`]): difference and differential
//!   bilinear relations among grid cells and their parameter shifts;
//! * the nonlinear flow layer ([`phase`]): first-order systems in the ratio variables
//!   f, g, U, V and their polynomial canonical Hamiltonian form in (q, p), including
//!   the coupled sixth-Painlevé shape and the Garnier change of variables;
//! * the linear layer ([`lax`]): a Fuchsian system in a spectral variable z with
//!   rank-one residue matrices whose monodromy-preserving deformations reproduce the
//!   Hamiltonian flows.
//!
//! On top sits the birational symmetry layer ([`symmetry`]): two commuting affine Weyl
//! groups of type A^(1)_{L-1} plus outer automorphisms act on parameters and canonical
//! variables, and transformed solutions are re-certified rather than trusted.
//!
//! Everything upstream of numeric integration is exact: partitions and Maya diagrams
//! ([`partition`]), Laurent polynomials and rational functions over big rationals
//! ([`algebra`]), character grids ([`character`]). Floating-point enters only in the
//! adaptive Runge–Kutta integrator and the float-mode spot checks; the scalar domain
//! (exact rational, float, or symbolic rational function) is selected at the type
//! level through the [`algebra::Scalar`] trait.

pub mod algebra;
pub mod character;
pub mod error;
pub mod identity;
pub mod lax;
pub mod partition;
pub mod phase;
pub mod sample;
pub mod symmetry;

pub use error::{Error, Result};

/// Library version string embedded in generated reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
