//! Numerical machinery for weighted integral transforms
//! `V_lambda(f)(z) = int_0^1 lambda(t) f(tz)/t dt` acting on the shifted
//! Carathéodory-type family `W_beta(alpha, gamma)`, and for certifying when
//! the image lands in the Pascu class `M(xi)` of xi-blended starlike/convex
//! functions.
//!
//! The crate computes the sharp shift `beta` for a given kernel, runs the
//! chain of sufficient admissibility conditions (closed-form parameter
//! ranges, pointwise differential inequalities, monotonicity of the duality
//! profile, and the grid certificate for the boundary functional `N_Pi`),
//! and verifies memberships directly on extremal functions.
//!
//! ```
//! use pascu_core::beta::solve_beta;
//! use pascu_core::kernels::Kernel;
//! use pascu_core::{resolve_mu_nu, QuadratureSpec, TruncationPolicy};
//!
//! let quad = QuadratureSpec::default();
//! let kernel = Kernel::bernardi(0.0, &quad)?;
//! let pair = resolve_mu_nu(3.0, 1.0)?;
//! // Sharp starlike threshold for the flat kernel: 1 - pi^2/6 maps to
//! // beta = X / (1 + X) with X = 1 - pi^2/6.
//! let sol = solve_beta(&kernel, &pair, 0.0, &TruncationPolicy::default(), &quad)?;
//! assert!((sol.beta - (-1.816378)).abs() < 1e-4);
//! # Ok::<(), pascu_core::Error>(())
//! ```

pub mod admissibility;
pub mod beta;
pub mod error;
pub mod grids;
pub mod kernels;
pub mod params;
pub mod quad;
pub mod series;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use params::{
    resolve_mu_nu, resolve_mu_nu_with, validate_spec, MuAssignment, MuNuPair, ValidationReport,
    WFamilySpec,
};
pub use quad::{EndpointSignature, QuadOutcome, QuadratureSpec};
pub use series::{PowerSeries, TruncationPolicy};
