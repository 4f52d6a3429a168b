use thiserror::Error;

/// Errors carried by every fallible numeric routine in this crate.
///
/// Quadrature and series failures keep the best value computed so far so a
/// caller can decide whether the achieved accuracy is still usable.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature ran out of subdivisions before meeting tolerance.
    #[error("quadrature budget exhausted: value {value:.6e}, err estimate {err_estimate:.3e}")]
    QuadratureBudget { value: f64, err_estimate: f64 },

    /// The integrand produced a NaN or infinity at a sample point.
    #[error("non-finite integrand sample at t = {at:.6e}")]
    NonFiniteSample { at: f64 },

    /// Series truncation could not certify the requested tail bound.
    #[error("series tail bound {achieved:.3e} above tolerance {requested:.3e} at order {order}")]
    SeriesTail {
        achieved: f64,
        requested: f64,
        order: usize,
    },

    /// The moment series accelerator failed to converge by `n_max`.
    #[error("moment series not converged after {terms} terms, last increment {last_increment:.3e}")]
    MomentSeries { terms: usize, last_increment: f64 },

    /// beta/(1-beta) = X has no solution with beta < 1 (X <= -1).
    #[error("no finite beta: X = {x:.6e} is at or below -1")]
    NoFiniteBeta { x: f64 },

    /// A denominator vanished during evaluation (non-membership witness).
    #[error("denominator vanished at z = {re:.6e}+{im:.6e}i")]
    VanishingDenominator { re: f64, im: f64 },

    /// Kernel construction failed (parameter range or normalization).
    #[error("kernel error: {0}")]
    Kernel(String),

    /// A grid was too coarse or otherwise unusable for the requested check.
    #[error("grid error: {0}")]
    Grid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
