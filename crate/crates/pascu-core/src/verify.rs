//! Direct verification on functions: builds the extremal members of the
//! weighted half-plane family, pushes them through the integral transform
//! coefficient-wise, and tests Pascu-class membership by sampling the
//! blended starlike/convex quotient on a polar grid of the disk.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::admissibility::Verdict;
use crate::error::{Error, Result};
use crate::grids::DiskGrid;
use crate::kernels::Kernel;
use crate::params::{MuNuPair, WFamilySpec};
use crate::quad::QuadratureSpec;
use crate::series::{psi_series, PowerSeries, TruncationPolicy};

/// Grid certificates treat minima above this (negative) threshold as passes;
/// the sampling cannot resolve tighter sign changes anyway.
pub const MEMBERSHIP_GRID_TOL: f64 = 1e-3;

/// Angular resolution used to discretize the existential rotation in the
/// half-plane membership test.
pub const DEFAULT_PHI_ANGLES: usize = 720;

/// Worst sampled value of a real-part functional over a disk grid.
#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport {
    /// Minimum of the tested real part over the grid (after resolving the
    /// existential rotation, for the half-plane functional).
    pub min_re: f64,
    /// Radius of the minimizing grid point.
    pub argmin_r: f64,
    /// Angle of the minimizing grid point.
    pub argmin_theta: f64,
    /// Which functional was sampled.
    pub functional: &'static str,
    /// Pass iff `min_re > -tol`; a grid certificate, not a proof.
    pub verdict: Verdict,
    /// The tolerance the verdict used.
    pub tol: f64,
    /// Truncation tail bound of the series at the outermost radius.
    pub tail_bound: f64,
    /// True when the minimizer sits on the outermost radius; a higher
    /// order/radius rerun would sharpen the certificate.
    pub boundary_limited: bool,
    /// The maximizing rotation angle (half-plane functional only).
    pub best_phi: Option<f64>,
    pub note: Option<String>,
}

impl MembershipReport {
    pub fn is_pass(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Extremal member of the half-plane family for boundary parameters x, y
/// (both on the unit circle): term-wise integration of the Möbius factor
/// (1 + x w)/(1 + y w), then a coefficient-wise product with the auxiliary
/// series of the pair. Coefficients come out as
///
///   a_1 = 1,  a_{n+1} = (1 - beta)(x - y)(-y)^(n-1) / D_n,
///
/// with D_n = (1 + mu n)(1 + nu n); at x = 1, y = -1 this is the sharp-case
/// series a_{n+1} = 2 (1 - beta)/D_n.
pub fn extremal_function(
    beta: f64,
    munu: &MuNuPair,
    x: Complex64,
    y: Complex64,
    policy: &TruncationPolicy,
) -> Result<PowerSeries> {
    for (name, v) in [("x", x), ("y", y)] {
        if (v.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "boundary parameter {name} must lie on the unit circle, got |{name}| = {}",
                v.norm()
            )));
        }
    }
    let order = policy.order;
    // Coefficients of (1/z) int_0^z [(1-beta)(1+x w)/(1+y w) + beta] dw:
    // constant 1, then (1-beta)(x-y)(-y)^(k-1) / (k+1) at z^k.
    let mut mobius = vec![Complex64::default(); order + 1];
    mobius[0] = Complex64::new(1.0, 0.0);
    let scale = (1.0 - beta) * (x - y);
    let mut ypow = Complex64::new(1.0, 0.0);
    for (k, slot) in mobius.iter_mut().enumerate().skip(1) {
        *slot = scale * ypow / (k as f64 + 1.0);
        ypow *= -y;
    }
    let ratio = PowerSeries::new(mobius).hadamard(&psi_series(munu, policy));
    let mut coeffs = Vec::with_capacity(order + 2);
    coeffs.push(Complex64::default());
    coeffs.extend_from_slice(ratio.coeffs());
    Ok(PowerSeries::new(coeffs))
}

/// The integral transform acts on Taylor coefficients as multiplication by
/// the kernel moments: the coefficient of z^(n+1) picks up tau_n. Requires a
/// normalized input (a_0 = 0, a_1 = 1); a_1 is untouched since tau_0 = 1 by
/// kernel normalization.
pub fn apply_transform(f: &PowerSeries, kernel: &Kernel, quad: &QuadratureSpec) -> Result<PowerSeries> {
    if !f.is_normalized() {
        return Err(Error::Domain(
            "transform expects a normalized series (a_0 = 0, a_1 = 1)".into(),
        ));
    }
    let mut coeffs = f.coeffs().to_vec();
    for (m, slot) in coeffs.iter_mut().enumerate().skip(2) {
        *slot *= kernel.moment(m - 1, quad)?;
    }
    Ok(PowerSeries::new(coeffs))
}

/// The convex combination `rho z + (1 - rho) V(f)`: a_1 stays 1 and every
/// higher coefficient picks up the extra factor (1 - rho). Requires rho < 1.
pub fn apply_transform_rho(
    f: &PowerSeries,
    kernel: &Kernel,
    rho: f64,
    quad: &QuadratureSpec,
) -> Result<PowerSeries> {
    if rho >= 1.0 {
        return Err(Error::Domain(format!(
            "rho must be below 1 (rho = 1 collapses the transform to the identity), got {rho}"
        )));
    }
    let mut out = apply_transform(f, kernel, quad)?;
    let coeffs = out.coeffs_mut();
    coeffs[1] = rho + (1.0 - rho) * coeffs[1];
    for slot in coeffs.iter_mut().skip(2) {
        *slot *= 1.0 - rho;
    }
    Ok(out)
}

/// The blended starlike/convex quotient
///
///   [xi z (z F')' + (1 - xi) z F'] / [xi z F' + (1 - xi) F]
///   = [z F' + xi z^2 F''] / [xi z F' + (1 - xi) F].
///
/// Membership in the Pascu class means the real part stays positive on the
/// disk. z = 0 is excluded: for normalized F the quotient is a 0/0 limit
/// there (value 1), and the sampling grids start at positive radius.
pub fn pascu_quotient(f: &PowerSeries, xi: f64, z: Complex64) -> Result<Complex64> {
    let (v, d1, d2) = f.eval_d2(z);
    let num = z * d1 + xi * z * z * d2;
    let den = xi * z * d1 + (1.0 - xi) * v;
    if den.norm() <= 1e-14 * z.norm() {
        return Err(Error::VanishingDenominator { re: z.re, im: z.im });
    }
    Ok(num / den)
}

/// Minimum of Re(blended quotient) over the grid. A vanishing denominator
/// at any grid point is a non-membership certificate and fails the report
/// with that witness.
pub fn membership_min(f: &PowerSeries, xi: f64, grid: &DiskGrid) -> Result<MembershipReport> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::Domain(format!(
            "blend parameter xi must lie in [0, 1], got {xi}"
        )));
    }
    let max_r = grid.max_radius();
    let tail = f.tail_bound(max_r);
    let mut note = (tail > 1e-8).then(|| {
        format!(
            "truncation tail bound {tail:.3e} at r = {max_r} exceeds 1e-8; \
             raise the series order for a tighter certificate"
        )
    });

    let points: Vec<(f64, f64, Complex64)> = grid.iter_points().collect();
    let evals: Vec<Result<f64>> = points
        .par_iter()
        .map(|&(_, _, z)| pascu_quotient(f, xi, z).map(|q| q.re))
        .collect();

    let mut min_re = f64::INFINITY;
    let mut argmin = (points[0].0, points[0].1);
    for (i, ev) in evals.iter().enumerate() {
        match ev {
            Ok(re) => {
                if *re < min_re {
                    min_re = *re;
                    argmin = (points[i].0, points[i].1);
                }
            }
            Err(_) => {
                // Quotient undefined inside the disk: not even locally
                // admissible at this point.
                return Ok(MembershipReport {
                    min_re: f64::NEG_INFINITY,
                    argmin_r: points[i].0,
                    argmin_theta: points[i].1,
                    functional: "pascu_quotient",
                    verdict: Verdict::Fail,
                    tol: MEMBERSHIP_GRID_TOL,
                    tail_bound: tail,
                    boundary_limited: false,
                    best_phi: None,
                    note: Some(
                        "quotient denominator vanished on the grid: non-membership witness"
                            .into(),
                    ),
                });
            }
        }
    }
    let boundary_limited = argmin.0 >= max_r - 1e-15;
    if boundary_limited {
        let extra = "minimizer on the outermost radius; rerun with a higher order and radius";
        note = Some(match note {
            Some(n) => format!("{n}; {extra}"),
            None => extra.to_string(),
        });
    }
    Ok(MembershipReport {
        min_re,
        argmin_r: argmin.0,
        argmin_theta: argmin.1,
        functional: "pascu_quotient",
        verdict: if min_re > -MEMBERSHIP_GRID_TOL {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        tol: MEMBERSHIP_GRID_TOL,
        tail_bound: tail,
        boundary_limited,
        best_phi: None,
        note,
    })
}

/// The weighted endpoint combination whose shifted values the half-plane
/// family constrains:
///
///   H(z) = (1 - alpha + 2 gamma) f(z)/z + (alpha - 2 gamma) f'(z)
///        + gamma z f''(z).
pub fn w_functional(f: &PowerSeries, spec: &WFamilySpec, z: Complex64) -> Complex64 {
    let (v, d1, d2) = f.eval_d2(z);
    let f_over_z = if z.norm() == 0.0 { f.coeff(1) } else { v / z };
    (1.0 - spec.alpha + 2.0 * spec.gamma) * f_over_z
        + (spec.alpha - 2.0 * spec.gamma) * d1
        + spec.gamma * z * d2
}

/// Half-plane membership: is there a rotation phi such that
/// Re(e^{i phi} (H(z) - beta)) stays positive on the grid? The existential
/// rotation is resolved by maximizing the grid minimum over `n_phi` equally
/// spaced angles. The family also carries the standing hypotheses alpha >= 0,
/// gamma >= 0, beta < 1; violating them fails the report regardless of the
/// sweep (the rotation could otherwise hide a constant sign flip).
pub fn w_membership(
    f: &PowerSeries,
    spec: &WFamilySpec,
    grid: &DiskGrid,
    n_phi: usize,
) -> Result<MembershipReport> {
    if n_phi == 0 {
        return Err(Error::Grid("need at least one rotation angle".into()));
    }
    let max_r = grid.max_radius();
    let tail = f.tail_bound(max_r);

    let points: Vec<(f64, f64, Complex64)> = grid.iter_points().collect();
    let shifted: Vec<Complex64> = points
        .par_iter()
        .map(|&(_, _, z)| w_functional(f, spec, z) - spec.beta)
        .collect();

    let mut best_min = f64::NEG_INFINITY;
    let mut best_phi = 0.0;
    let mut best_arg = 0usize;
    for k in 0..n_phi {
        let phi = 2.0 * std::f64::consts::PI * k as f64 / n_phi as f64;
        let rot = Complex64::from_polar(1.0, phi);
        let mut mn = f64::INFINITY;
        let mut mi = 0usize;
        for (i, &w) in shifted.iter().enumerate() {
            let re = (rot * w).re;
            if re < mn {
                mn = re;
                mi = i;
            }
        }
        if mn > best_min {
            best_min = mn;
            best_phi = phi;
            best_arg = mi;
        }
    }

    let hypothesis_violation = if !(spec.beta < 1.0) {
        Some(format!("family hypothesis beta < 1 fails (beta = {})", spec.beta))
    } else if spec.alpha < 0.0 || spec.gamma < 0.0 {
        Some(format!(
            "family hypotheses alpha >= 0, gamma >= 0 fail (alpha = {}, gamma = {})",
            spec.alpha, spec.gamma
        ))
    } else {
        None
    };

    let boundary_limited = points[best_arg].0 >= max_r - 1e-15;
    let mut notes: Vec<String> = Vec::new();
    if let Some(h) = &hypothesis_violation {
        notes.push(h.clone());
    }
    if tail > 1e-8 {
        notes.push(format!(
            "truncation tail bound {tail:.3e} at r = {max_r} exceeds 1e-8"
        ));
    }
    if boundary_limited {
        notes.push("minimizer on the outermost radius; rerun with a higher order and radius".into());
    }
    let verdict = if hypothesis_violation.is_some() || best_min <= -MEMBERSHIP_GRID_TOL {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    Ok(MembershipReport {
        min_re: best_min,
        argmin_r: points[best_arg].0,
        argmin_theta: points[best_arg].1,
        functional: "w_halfplane",
        verdict,
        tol: MEMBERSHIP_GRID_TOL,
        tail_bound: tail,
        boundary_limited,
        best_phi: Some(best_phi),
        note: if notes.is_empty() {
            None
        } else {
            Some(notes.join("; "))
        },
    })
}

/// Slope of the derivative of the boundary comparison function at z = -1:
///
///   1 - (1 - beta_prime)/(1 - beta_sharp).
///
/// Negative exactly when beta_prime < beta_sharp, in which case the
/// comparison function loses local univalence inside the disk, so shifts
/// below the sharp one break membership. Both arguments must be below 1.
pub fn sharpness_margin(beta_prime: f64, beta_sharp: f64) -> f64 {
    debug_assert!(beta_prime < 1.0 && beta_sharp < 1.0);
    1.0 - (1.0 - beta_prime) / (1.0 - beta_sharp)
}
