//! Parameters of the function family W_beta(alpha, gamma) and the derived
//! root pair (mu, nu).
//!
//! The pair is defined by mu + nu = alpha - gamma and mu * nu = gamma, i.e.
//! mu and nu are the nonnegative roots of x^2 - (alpha - gamma) x + gamma.
//! For gamma = 0 the convention is mu = 0, nu = alpha.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which root of x^2 - (alpha-gamma)x + gamma = 0 is called `mu`.
///
/// `Max` always takes mu as the larger root. `UnitRoot` pins mu = 1 on the
/// alpha = 1 + 2*gamma family (where 1 is always a root), so nu = gamma even
/// when gamma > 1; away from that family it falls back to `Max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuAssignment {
    #[default]
    Max,
    UnitRoot,
}

/// Parameter bundle (alpha, gamma, beta, xi, rho) for one verification run.
///
/// `rho` is the pre-mixing weight of the generalized transform
/// rho*z + (1-rho)*V_lambda(f); `rho = 0` recovers the plain transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WFamilySpec {
    pub alpha: f64,
    pub gamma: f64,
    pub beta: f64,
    pub xi: f64,
    pub rho: f64,
}

impl WFamilySpec {
    pub fn new(alpha: f64, gamma: f64, beta: f64, xi: f64, rho: f64) -> Self {
        Self {
            alpha,
            gamma,
            beta,
            xi,
            rho,
        }
    }

    /// Spec with rho = 0 (the non-generalized transform).
    pub fn plain(alpha: f64, gamma: f64, beta: f64, xi: f64) -> Self {
        Self::new(alpha, gamma, beta, xi, 0.0)
    }
}

/// The resolved root pair. Invariants: mu >= 0, nu >= 0, and for gamma = 0
/// always mu = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuNuPair {
    mu: f64,
    nu: f64,
}

impl MuNuPair {
    /// Build directly from known roots. Rejects negative entries.
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        if !(mu >= 0.0) || !(nu >= 0.0) {
            return Err(Error::Domain(format!(
                "mu and nu must be nonnegative, got ({mu}, {nu})"
            )));
        }
        Ok(Self { mu, nu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// gamma recovered as mu * nu.
    pub fn gamma(&self) -> f64 {
        self.mu * self.nu
    }

    /// alpha - gamma recovered as mu + nu.
    pub fn alpha_minus_gamma(&self) -> f64 {
        self.mu + self.nu
    }

    pub fn is_gamma_zero(&self) -> bool {
        self.mu == 0.0
    }

    /// (1 + mu*n) * (1 + nu*n), the denominator attached to the n-th
    /// coefficient of the auxiliary series.
    pub fn coeff_denom(&self, n: usize) -> f64 {
        let nf = n as f64;
        (1.0 + self.mu * nf) * (1.0 + self.nu * nf)
    }
}

/// Solve for (mu, nu) from (alpha, gamma) with the default `Max` assignment.
pub fn resolve_mu_nu(alpha: f64, gamma: f64) -> Result<MuNuPair> {
    resolve_mu_nu_with(alpha, gamma, MuAssignment::Max)
}

/// Solve for (mu, nu) from (alpha, gamma).
///
/// Errors when gamma > 0 and the discriminant (alpha-gamma)^2 - 4*gamma is
/// negative (complex roots), or when the real roots are negative.
pub fn resolve_mu_nu_with(alpha: f64, gamma: f64, assignment: MuAssignment) -> Result<MuNuPair> {
    if !alpha.is_finite() || !gamma.is_finite() {
        return Err(Error::Domain("alpha and gamma must be finite".into()));
    }
    if alpha < 0.0 || gamma < 0.0 {
        return Err(Error::Domain(format!(
            "alpha and gamma must be nonnegative, got alpha = {alpha}, gamma = {gamma}"
        )));
    }
    if gamma == 0.0 {
        // Convention: mu = 0, nu = alpha. Both assignments agree here.
        return MuNuPair::new(0.0, alpha);
    }
    let s = alpha - gamma;
    let disc = s * s - 4.0 * gamma;
    if disc < 0.0 {
        return Err(Error::Domain(format!(
            "complex roots: (alpha-gamma)^2 - 4*gamma = {disc:.6e} < 0"
        )));
    }
    let sq = disc.sqrt();
    // Stable quadratic roots: avoid cancellation on the smaller one.
    let big = 0.5 * (s + sq);
    let small = if big != 0.0 { gamma / big } else { 0.0 };
    if small < 0.0 || big < 0.0 {
        return Err(Error::Domain(format!(
            "roots ({small:.6e}, {big:.6e}) leave the admissible cone (negative)"
        )));
    }
    match assignment {
        MuAssignment::Max => MuNuPair::new(big, small),
        MuAssignment::UnitRoot => {
            // On the alpha = 1 + 2*gamma family one root is exactly 1; that
            // root is mu, the other (gamma) is nu.
            let tol = 1e-12 * (1.0 + s.abs() + gamma.abs());
            if (1.0 - s + gamma).abs() <= tol {
                MuNuPair::new(1.0, gamma)
            } else {
                MuNuPair::new(big, small)
            }
        }
    }
}

/// One violated constraint found by [`validate_spec`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

/// Outcome of validating a [`WFamilySpec`]: hard violations plus advisory
/// warnings (degenerate but permitted corners).
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the admissible ranges: alpha >= 0, gamma >= 0, beta < 1,
/// 0 <= xi <= 1, rho < 1, and real nonnegative roots when gamma > 0.
pub fn validate_spec(spec: &WFamilySpec) -> ValidationReport {
    fn push(out: &mut Vec<Violation>, field: &'static str, message: String) {
        out.push(Violation { field, message });
    }
    let mut violations: Vec<Violation> = Vec::new();

    for (field, v) in [
        ("alpha", spec.alpha),
        ("gamma", spec.gamma),
        ("beta", spec.beta),
        ("xi", spec.xi),
        ("rho", spec.rho),
    ] {
        if !v.is_finite() {
            push(&mut violations, field, format!("{field} must be finite, got {v}"));
        }
    }
    if !violations.is_empty() {
        return ValidationReport {
            violations,
            warnings: Vec::new(),
        };
    }

    if spec.alpha < 0.0 {
        push(&mut violations, "alpha", format!("alpha must be >= 0, got {}", spec.alpha));
    }
    if spec.gamma < 0.0 {
        push(&mut violations, "gamma", format!("gamma must be >= 0, got {}", spec.gamma));
    }
    if spec.beta >= 1.0 {
        push(&mut violations, "beta", format!("beta must be < 1, got {}", spec.beta));
    }
    if !(0.0..=1.0).contains(&spec.xi) {
        push(&mut violations, "xi", format!("xi must lie in [0, 1], got {}", spec.xi));
    }
    if spec.rho >= 1.0 {
        push(&mut violations, "rho", format!("rho must be < 1, got {}", spec.rho));
    }
    if spec.alpha >= 0.0 && spec.gamma > 0.0 {
        match resolve_mu_nu(spec.alpha, spec.gamma) {
            Ok(_) => {}
            Err(e) => push(
                &mut violations,
                "gamma",
                format!("(alpha, gamma) roots unusable: {e}"),
            ),
        }
    }
    let mut warnings = Vec::new();
    if spec.alpha == 0.0 && spec.gamma == 0.0 && violations.is_empty() {
        warnings.push(
            "alpha = gamma = 0 is degenerate (mu = nu = 0); kernel-weighted tail integrals are unavailable"
                .into(),
        );
    }
    ValidationReport {
        violations,
        warnings,
    }
}
