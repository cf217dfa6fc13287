//! Error type shared across the library.

use thiserror::Error;

/// Errors produced by construction, certification, and integration routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A structural precondition on input data failed (lengths, ranges, orderings).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A grid cell that must be nonzero evaluated to the zero polynomial, so the
    /// rational-solution construction breaks down at the given parameters.
    #[error("sigma cell ({m},{n}) vanishes identically at theta = {theta}: {hint}")]
    ZeroSigmaCell {
        /// Row index of the vanishing cell.
        m: usize,
        /// Column index of the vanishing cell.
        n: usize,
        /// Parameter vector at which the cell vanished, rendered as `p/q` entries.
        theta: String,
        /// What to change to avoid the degeneracy.
        hint: String,
    },

    /// Division by an identically-zero polynomial or rational function.
    #[error("division by zero {0}")]
    DivisionByZero(String),

    /// A birational map was evaluated at a point of its indeterminacy locus.
    #[error("indeterminacy of {generator}: denominator {denominator} vanishes at the given point")]
    Indeterminate {
        /// Human-readable name of the transformation being applied.
        generator: String,
        /// Description of the vanishing denominator.
        denominator: String,
    },

    /// Text that should encode a polynomial, rational number, or word failed to parse.
    #[error("parse error: {0}")]
    Parse(String),

    /// The numeric integrator stepped inside the configured margin of the singular
    /// locus and aborted; the last accepted state is preserved by the caller.
    #[error("singular locus within margin {margin:.3e} at path parameter {at:.6}: {detail}")]
    SingularAbort {
        /// Minimum allowed distance to the singular locus.
        margin: f64,
        /// Path parameter at which the abort triggered.
        at: f64,
        /// Which singular-locus component was approached.
        detail: String,
    },

    /// The adaptive integrator could not meet its tolerance with a representable step.
    #[error("step size underflow at path parameter {at:.6}")]
    StepUnderflow {
        /// Path parameter at which the step size collapsed.
        at: f64,
    },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for [`Error::InvalidInput`] from any displayable message.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
