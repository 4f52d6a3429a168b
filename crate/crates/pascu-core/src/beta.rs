//! The sharp order bound beta for a given kernel, root pair, and blend xi.
//!
//! The transform maps the prestarlike-type class W_beta(alpha, gamma) into
//! the Pascu class M(xi) exactly when
//!
//!   beta/(1 - beta) = -int_0^1 lambda(t) [ (1-xi) g(t) + xi (2 q(t) - 1) ] dt
//!
//! with g and q the kernel-independent auxiliary functions of the root pair
//! (mu, nu). Writing X for the right side, beta = X / (1 + X). The value is
//! computed two independent ways: direct quadrature of the blended
//! integrand, and an accelerated alternating series over the kernel moments
//! tau_n. The generalized transform rho z + (1 - rho) V_lambda(f) shifts the
//! bound to beta = 1 - 1/(2 I (1 - rho)).

use std::cell::Cell;

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::params::MuNuPair;
use crate::quad::{integrate, QuadratureSpec};
use crate::series::{alternating_power_sum, eval_g, eval_q, TruncationPolicy};

/// How a [`BetaResult`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaMethod {
    /// Adaptive quadrature of lambda times the blended g/q integrand.
    Quadrature,
    /// Euler-accelerated alternating series over kernel moments.
    Moments,
    /// Quadrature for the rho-generalized transform.
    RhoQuadrature,
}

/// Sharp bound together with the underlying integral value and an error
/// estimate propagated through the beta map.
#[derive(Debug, Clone, Copy)]
pub struct BetaResult {
    /// X = -int lambda [(1-xi) g + xi (2q - 1)].
    pub x_value: f64,
    /// beta = X / (1 + X), or the rho-shifted analogue.
    pub beta: f64,
    pub err_estimate: f64,
    pub method: BetaMethod,
}

fn check_xi(xi: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::Domain(format!("xi must lie in [0, 1], got {xi}")));
    }
    Ok(())
}

/// Blend (1-xi) g(t) + xi (2 q(t) - 1), capturing series failures so the
/// quadrature loop sees a NaN it can report.
fn blended(
    t: f64,
    munu: &MuNuPair,
    xi: f64,
    policy: &TruncationPolicy,
    slot: &Cell<Option<Error>>,
) -> f64 {
    let g = match eval_g(t, munu, policy) {
        Ok(v) => v,
        Err(e) => {
            slot.set(Some(e));
            return f64::NAN;
        }
    };
    let q = match eval_q(t, munu, policy) {
        Ok(v) => v,
        Err(e) => {
            slot.set(Some(e));
            return f64::NAN;
        }
    };
    (1.0 - xi) * g + xi * (2.0 * q - 1.0)
}

/// Sharp beta by direct quadrature.
pub fn solve_beta(
    kernel: &Kernel,
    munu: &MuNuPair,
    xi: f64,
    policy: &TruncationPolicy,
    quad: &QuadratureSpec,
) -> Result<BetaResult> {
    check_xi(xi)?;
    let slot = Cell::new(None);
    let out = integrate(
        |t| kernel.density(t) * blended(t, munu, xi, policy, &slot),
        kernel.signature(),
        quad,
    );
    if let Some(e) = slot.take() {
        return Err(e);
    }
    let out = out?;
    finish_beta(-out.value, out.err_estimate, BetaMethod::Quadrature)
}

/// Sharp beta through the moment series
/// X = -1 - sum_{n>=1} 2 (n+1) (1-xi+xi(n+1)) (-1)^n tau_n / D_n,
/// accelerated like any other alternating tail.
pub fn beta_from_moments(
    kernel: &Kernel,
    munu: &MuNuPair,
    xi: f64,
    policy: &TruncationPolicy,
    quad: &QuadratureSpec,
) -> Result<BetaResult> {
    check_xi(xi)?;
    let mut taus = Vec::with_capacity(policy.order + 2);
    for n in 0..=policy.order + 1 {
        taus.push(kernel.moment(n, quad)?);
    }
    // Shift to m = n - 1 so the standard alternating accumulator applies:
    // X = -1 + 2 sum_{m>=0} (-1)^m a_{m+1}.
    let coeff = |m: usize| {
        let n = (m + 1) as f64;
        let tau = taus[m + 1];
        2.0 * (n + 1.0) * (1.0 - xi + xi * (n + 1.0)) * tau / munu.coeff_denom(m + 1)
    };
    let sum = alternating_power_sum(&coeff, 1.0, policy)?;
    finish_beta(-1.0 + sum.value, sum.tail_bound, BetaMethod::Moments)
}

/// Sharp beta for the rho-generalized transform
/// rho z + (1 - rho) V_lambda(f): beta = 1 - 1 / (2 I (1 - rho)) with
/// I = int lambda [ (1-xi)(1-g)/2 + xi (1-q) ].
///
/// Since int lambda = 1, the integrand rewrites as (1 - blended)/2, so
/// 2 I = 1 + X with the same X the plain solver integrates. Computing it
/// from that single integral keeps rho = 0 exactly consistent with
/// [`solve_beta`] and avoids amplifying two independent quadrature errors
/// through the small 1 + X denominator.
pub fn solve_beta_rho(
    kernel: &Kernel,
    munu: &MuNuPair,
    xi: f64,
    rho: f64,
    policy: &TruncationPolicy,
    quad: &QuadratureSpec,
) -> Result<BetaResult> {
    check_xi(xi)?;
    if !(rho < 1.0) {
        return Err(Error::Domain(format!("rho must be < 1, got {rho}")));
    }
    let slot = Cell::new(None);
    let out = integrate(
        |t| kernel.density(t) * blended(t, munu, xi, policy, &slot),
        kernel.signature(),
        quad,
    );
    if let Some(e) = slot.take() {
        return Err(e);
    }
    let out = out?;
    let x = -out.value;
    let denom = (1.0 + x) * (1.0 - rho);
    if !(denom > 1e-12) {
        return Err(Error::NoFiniteBeta { x });
    }
    Ok(BetaResult {
        x_value: x,
        beta: 1.0 - 1.0 / denom,
        err_estimate: out.err_estimate / ((1.0 + x) * denom),
        method: BetaMethod::RhoQuadrature,
    })
}

fn finish_beta(x: f64, raw_err: f64, method: BetaMethod) -> Result<BetaResult> {
    let denom = 1.0 + x;
    if !(denom > 1e-12) {
        return Err(Error::NoFiniteBeta { x });
    }
    Ok(BetaResult {
        x_value: x,
        beta: x / denom,
        err_estimate: raw_err / (denom * denom),
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn setup() -> (Kernel, MuNuPair, TruncationPolicy, QuadratureSpec) {
        let quad = QuadratureSpec::default();
        let kernel = Kernel::bernardi(0.0, &quad).unwrap();
        let munu = MuNuPair::new(1.0, 1.0).unwrap();
        (kernel, munu, TruncationPolicy::default(), quad)
    }

    #[test]
    fn flat_kernel_starlike_anchor() {
        // xi = 0, mu = nu = 1: X = 1 - pi^2/6, beta = X/(1+X).
        let (kernel, munu, policy, quad) = setup();
        let r = solve_beta(&kernel, &munu, 0.0, &policy, &quad).unwrap();
        let x = 1.0 - PI * PI / 6.0;
        assert!((r.x_value - x).abs() < 1e-9, "X = {} want {x}", r.x_value);
        let beta = x / (1.0 + x);
        assert!((r.beta - beta).abs() < 1e-8, "beta = {} want {beta}", r.beta);
        assert!((r.beta - -1.816378).abs() < 1e-4);
    }

    #[test]
    fn flat_kernel_convexlike_anchor() {
        // xi = 1, mu = nu = 1: X = 1 - 2 log 2.
        let (kernel, munu, policy, quad) = setup();
        let r = solve_beta(&kernel, &munu, 1.0, &policy, &quad).unwrap();
        let x = 1.0 - 2.0 * 2.0f64.ln();
        assert!((r.x_value - x).abs() < 1e-9);
        assert!((r.beta - -0.629445).abs() < 1e-4);
    }

    #[test]
    fn moment_series_agrees_with_quadrature() {
        let quad = QuadratureSpec::default();
        let policy = TruncationPolicy::default();
        let munu = MuNuPair::new(1.0, 1.0).unwrap();
        let cases = [
            (Kernel::bernardi(0.5, &quad).unwrap(), 0.3),
            (Kernel::bernardi(2.0, &quad).unwrap(), 1.0),
            (Kernel::ab_power(-0.5, 3.0, &quad).unwrap(), 0.7),
            (Kernel::komatu(-0.5, 3.0, &quad).unwrap(), 0.0),
        ];
        for (kernel, xi) in &cases {
            let a = solve_beta(kernel, &munu, *xi, &policy, &quad).unwrap();
            let b = beta_from_moments(kernel, &munu, *xi, &policy, &quad).unwrap();
            assert!(
                (a.beta - b.beta).abs() < 1e-8,
                "{}: quadrature {} vs moments {}",
                kernel.describe(),
                a.beta,
                b.beta
            );
            assert_eq!(b.method, BetaMethod::Moments);
        }
    }

    #[test]
    fn moment_series_handles_unequal_roots() {
        let quad = QuadratureSpec::default();
        let policy = TruncationPolicy::default();
        let munu = MuNuPair::new(0.5, 2.0).unwrap();
        let kernel = Kernel::bernardi(1.0, &quad).unwrap();
        let a = solve_beta(&kernel, &munu, 0.4, &policy, &quad).unwrap();
        let b = beta_from_moments(&kernel, &munu, 0.4, &policy, &quad).unwrap();
        assert!((a.beta - b.beta).abs() < 1e-8);
    }

    #[test]
    fn rho_zero_matches_plain_solver() {
        let (kernel, munu, policy, quad) = setup();
        for xi in [0.0, 0.5, 1.0] {
            let plain = solve_beta(&kernel, &munu, xi, &policy, &quad).unwrap();
            let rho0 = solve_beta_rho(&kernel, &munu, xi, 0.0, &policy, &quad).unwrap();
            assert!(
                (plain.beta - rho0.beta).abs() < 1e-10,
                "xi = {xi}: {} vs {}",
                plain.beta,
                rho0.beta
            );
        }
    }

    #[test]
    fn rho_shift_scales_the_beta_defect() {
        // Mixing with the identity weakens the needed input class:
        // 1 - beta_rho = (1 - beta_0) / (1 - rho), so beta drops as rho grows.
        let (kernel, munu, policy, quad) = setup();
        let b0 = solve_beta_rho(&kernel, &munu, 0.0, 0.0, &policy, &quad).unwrap();
        let b5 = solve_beta_rho(&kernel, &munu, 0.0, 0.5, &policy, &quad).unwrap();
        let want = 1.0 - (1.0 - b0.beta) / 0.5;
        assert!((b5.beta - want).abs() < 1e-10);
        assert!(b5.beta < b0.beta);
        assert!(solve_beta_rho(&kernel, &munu, 0.0, 1.0, &policy, &quad).is_err());
    }

    #[test]
    fn xi_outside_unit_interval_rejected() {
        let (kernel, munu, policy, quad) = setup();
        assert!(solve_beta(&kernel, &munu, -0.1, &policy, &quad).is_err());
        assert!(solve_beta(&kernel, &munu, 1.1, &policy, &quad).is_err());
    }
}
