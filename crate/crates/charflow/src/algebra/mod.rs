//! Exact arithmetic: big rationals, sparse Laurent polynomials, rational functions
//! with factored denominators, a scalar-field abstraction, and small dense matrices.
//!
//! All symbolic computation in the crate happens in the Laurent polynomial ring
//! QQ[x_0^{+-1}, x_1^{+-1}, ...] over arbitrary-precision rationals. Variables are
//! anonymous indices; each context fixes its own naming (t_0..t_N for deformation
//! variables, an extra z for the spectral variable, s/q/p symbols for Hamiltonian
//! identities). Nothing here ever rounds: floating point appears only through the
//! explicit `eval_f64` entry points.

mod laurent;
mod matrix;
mod ratfun;
mod scalar;
mod spoly;

pub use laurent::{det_poly, LaurentPoly, Rat, MAX_VARS};
pub use matrix::Mat;
pub use ratfun::RationalFunction;
pub use scalar::{rat_from_str, rat_to_f64, rat_to_string, Scalar};
pub use spoly::SparsePoly;

/// Convenience constructor for small rationals.
pub fn rat(n: i64, d: i64) -> Rat {
    use num::BigInt;
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Convenience constructor for integer rationals.
pub fn rat_int(n: i64) -> Rat {
    rat(n, 1)
}
