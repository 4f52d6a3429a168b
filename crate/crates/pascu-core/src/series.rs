//! Power series plumbing and the auxiliary functions attached to a
//! (mu, nu) pair.
//!
//! The two central series are
//!
//! ```text
//! phi(z) = 1 + sum_{n>=1} (n mu + 1)(n nu + 1)/(n + 1) z^n
//! psi(z) = 1 + sum_{n>=1} (n + 1)/((n mu + 1)(n nu + 1)) z^n
//! ```
//!
//! which are convolution inverses of each other: phi * psi is the geometric
//! series. The scalar helpers g and q are the alternating boundary sums
//!
//! ```text
//! g(t) = 2 sum_{n>=0} (-1)^n (n+1) t^n / ((1+mu n)(1+nu n)) - 1
//! q(t) =   sum_{n>=0} (-1)^n (n+1)^2 t^n / ((1+mu n)(1+nu n))
//! ```
//!
//! linked by the identity 2 q(t) = t g'(t) + g(t) + 1. Direct summation is
//! used away from t = 1; past t = 0.9 the terms are fed through the
//! van Wijngaarden form of Euler's transformation, and exactly at t = 1 the
//! Abel limit is taken by Richardson extrapolation in 1 - t.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::MuNuPair;
use crate::quad::{integrate_complex, EndpointSignature, QuadratureSpec};

/// Truncation order and certified tail tolerance for series evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub order: usize,
    pub tail_tol: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            order: 400,
            tail_tol: 1e-10,
        }
    }
}

/// Truncated Taylor series with complex coefficients, indexed from z^0.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    coeffs: Vec<Complex64>,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least the z^0 term");
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// Highest retained power of z.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of z^n (zero past the truncation order).
    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// True for normalized analytic functions: a_0 = 0, a_1 = 1.
    pub fn is_normalized(&self) -> bool {
        self.coeff(0).norm() == 0.0 && (self.coeff(1) - Complex64::new(1.0, 0.0)).norm() == 0.0
    }

    /// Horner evaluation at z.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::default();
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Value together with first and second derivatives at z, in one pass.
    pub fn eval_d2(&self, z: Complex64) -> (Complex64, Complex64, Complex64) {
        let n = self.coeffs.len();
        let mut b = self.coeffs[n - 1];
        let mut c = Complex64::default();
        let mut d = Complex64::default();
        for k in (0..n - 1).rev() {
            d = d * z + c;
            c = c * z + b;
            b = b * z + self.coeffs[k];
        }
        (b, c, d * 2.0)
    }

    /// Coefficientwise (Hadamard) product, truncated to the shorter order.
    pub fn hadamard(&self, other: &PowerSeries) -> PowerSeries {
        let len = self.coeffs.len().min(other.coeffs.len());
        PowerSeries::new(
            (0..len)
                .map(|n| self.coeffs[n] * other.coeffs[n])
                .collect(),
        )
    }

    /// Geometric series 1 + z + z^2 + ... up to `order`, the Hadamard unit.
    pub fn geometric(order: usize) -> Self {
        Self::new(vec![Complex64::new(1.0, 0.0); order + 1])
    }

    /// Bound on |sum_{n > order} a_n z^n| for |z| <= r, assuming the
    /// coefficient moduli keep decaying at the truncation point.
    pub fn tail_bound(&self, r: f64) -> f64 {
        assert!((0.0..1.0).contains(&r));
        let last = self.coeffs.last().map(|c| c.norm()).unwrap_or(0.0);
        last * r.powi(self.coeffs.len() as i32) / (1.0 - r)
    }
}

/// phi series for the pair (mu, nu), truncated per `policy`.
pub fn phi_series(munu: &MuNuPair, policy: &TruncationPolicy) -> PowerSeries {
    let mut coeffs = Vec::with_capacity(policy.order + 1);
    coeffs.push(1.0);
    for n in 1..=policy.order {
        coeffs.push(munu.coeff_denom(n) / (n as f64 + 1.0));
    }
    PowerSeries::from_real(&coeffs)
}

/// psi series (convolution inverse of phi against the geometric series).
pub fn psi_series(munu: &MuNuPair, policy: &TruncationPolicy) -> PowerSeries {
    let mut coeffs = Vec::with_capacity(policy.order + 1);
    coeffs.push(1.0);
    for n in 1..=policy.order {
        coeffs.push((n as f64 + 1.0) / munu.coeff_denom(n));
    }
    PowerSeries::from_real(&coeffs)
}

/// van Wijngaarden running form of Euler's transformation for alternating
/// series. Terms are pushed with their sign; `push` returns the increment
/// actually added to the accumulated sum.
struct EulerAccum {
    wksp: Vec<f64>,
    nterm: usize,
    pub sum: f64,
}

impl EulerAccum {
    fn new(capacity: usize) -> Self {
        Self {
            wksp: vec![0.0; capacity + 2],
            nterm: 0,
            sum: 0.0,
        }
    }

    fn push(&mut self, term: f64) -> f64 {
        if self.nterm == 0 {
            self.wksp[0] = term;
            self.nterm = 1;
            let inc = 0.5 * term;
            self.sum = inc;
            return inc;
        }
        let mut tmp = self.wksp[0];
        self.wksp[0] = term;
        for j in 0..self.nterm - 1 {
            let dum = self.wksp[j + 1];
            self.wksp[j + 1] = 0.5 * (self.wksp[j] + tmp);
            tmp = dum;
        }
        self.wksp[self.nterm] = 0.5 * (self.wksp[self.nterm - 1] + tmp);
        let inc = if self.wksp[self.nterm].abs() <= self.wksp[self.nterm - 1].abs() {
            self.nterm += 1;
            0.5 * self.wksp[self.nterm - 1]
        } else {
            self.wksp[self.nterm]
        };
        self.sum += inc;
        inc
    }
}

/// Value and certified tail bound of an accelerated alternating sum.
pub struct AltOutcome {
    pub value: f64,
    pub tail_bound: f64,
}

// Beyond this point direct alternating summation converges too slowly for a
// certified 1e-10 tail at order 400; switch to Euler acceleration.
const EULER_THRESHOLD: f64 = 0.9;

/// sum_{n>=0} (-1)^n coeff(n) t^n for nonnegative smooth coeff, with a
/// certified tail bound.
pub fn alternating_power_sum<C: Fn(usize) -> f64>(
    coeff: C,
    t: f64,
    policy: &TruncationPolicy,
) -> Result<AltOutcome> {
    debug_assert!((0.0..=1.0).contains(&t));
    if t == 0.0 {
        return Ok(AltOutcome {
            value: coeff(0),
            tail_bound: 0.0,
        });
    }
    if t <= EULER_THRESHOLD {
        let mut sum = 0.0;
        let mut tn = 1.0;
        let mut sign = 1.0;
        let mut prev_mag = f64::INFINITY;
        for n in 0..=policy.order {
            let mag = coeff(n) * tn;
            sum += sign * mag;
            let next_mag = coeff(n + 1) * tn * t;
            // The first omitted term bounds the tail once magnitudes decay.
            if next_mag <= policy.tail_tol && next_mag <= mag && mag <= prev_mag {
                return Ok(AltOutcome {
                    value: sum,
                    tail_bound: next_mag,
                });
            }
            prev_mag = mag;
            tn *= t;
            sign = -sign;
        }
        let achieved = coeff(policy.order + 1) * tn;
        Err(Error::SeriesTail {
            achieved,
            requested: policy.tail_tol,
            order: policy.order,
        })
    } else {
        let mut acc = EulerAccum::new(policy.order + 1);
        let mut tn = 1.0;
        let mut sign = 1.0;
        let mut small_streak = 0;
        let mut last_inc = f64::INFINITY;
        for n in 0..=policy.order {
            let inc = acc.push(sign * coeff(n) * tn);
            last_inc = inc.abs();
            if n >= 8 && last_inc <= 0.5 * policy.tail_tol {
                small_streak += 1;
                if small_streak >= 2 {
                    return Ok(AltOutcome {
                        value: acc.sum,
                        tail_bound: 2.0 * last_inc,
                    });
                }
            } else {
                small_streak = 0;
            }
            tn *= t;
            sign = -sign;
        }
        Err(Error::SeriesTail {
            achieved: 2.0 * last_inc,
            requested: policy.tail_tol,
            order: policy.order,
        })
    }
}

/// Neville polynomial extrapolation of (x_i, y_i) to x = 0.
fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    let mut tab = ys.to_vec();
    for level in 1..n {
        for i in 0..n - level {
            tab[i] = (xs[i + level] * tab[i] - xs[i] * tab[i + 1]) / (xs[i + level] - xs[i]);
        }
    }
    tab[0]
}

fn abel_limit<F: Fn(f64) -> Result<f64>>(f: F) -> Result<f64> {
    const BASE: f64 = 1e-6;
    let mut xs = [0.0; 4];
    let mut ys = [0.0; 4];
    for k in 0..4 {
        let delta = BASE * 0.5f64.powi(k as i32);
        xs[k] = delta;
        ys[k] = f(1.0 - delta)?;
    }
    Ok(extrapolate_to_zero(&xs, &ys))
}

fn check_t_unit(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t must lie in [0, 1], got {t}")));
    }
    Ok(())
}

/// g(t) for the pair (mu, nu). At t = 1 the Abel limit is returned.
pub fn eval_g(t: f64, munu: &MuNuPair, policy: &TruncationPolicy) -> Result<f64> {
    check_t_unit(t)?;
    let raw = |t: f64| -> Result<f64> {
        let s = alternating_power_sum(|n| (n as f64 + 1.0) / munu.coeff_denom(n), t, policy)?;
        Ok(2.0 * s.value - 1.0)
    };
    if t == 1.0 {
        abel_limit(raw)
    } else {
        raw(t)
    }
}

/// q(t) for the pair (mu, nu). At t = 1 the Abel limit is returned.
pub fn eval_q(t: f64, munu: &MuNuPair, policy: &TruncationPolicy) -> Result<f64> {
    check_t_unit(t)?;
    let raw = |t: f64| -> Result<f64> {
        let s = alternating_power_sum(
            |n| {
                let nf = n as f64 + 1.0;
                nf * nf / munu.coeff_denom(n)
            },
            t,
            policy,
        )?;
        Ok(s.value)
    };
    if t == 1.0 {
        abel_limit(raw)
    } else {
        raw(t)
    }
}

/// g'(t), by termwise differentiation; valid for t in [0, 1).
pub fn eval_g_prime(t: f64, munu: &MuNuPair, policy: &TruncationPolicy) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::Domain(format!("t must lie in [0, 1), got {t}")));
    }
    // g'(t) = -sum_{m>=0} (-1)^m 2 (m+1)(m+2) / D_{m+1} t^m.
    let s = alternating_power_sum(
        |m| {
            let mf = m as f64;
            2.0 * (mf + 1.0) * (mf + 2.0) / munu.coeff_denom(m + 1)
        },
        t,
        policy,
    )?;
    Ok(-s.value)
}

/// Residual |2 q(t) - (t g'(t) + g(t) + 1)| of the coupling identity.
pub fn gq_identity_residual(t: f64, munu: &MuNuPair, policy: &TruncationPolicy) -> Result<f64> {
    let q = eval_q(t, munu, policy)?;
    let g = eval_g(t, munu, policy)?;
    let gp = eval_g_prime(t, munu, policy)?;
    Ok((2.0 * q - (t * gp + g + 1.0)).abs())
}

/// psi evaluated through its integral representation rather than the series:
/// for mu, nu > 0
///
/// ```text
/// psi(z) = 1/(mu nu) int_0^1 int_0^1 u^(1/nu - 1) v^(1/mu - 1) (1 - u v z)^-2 du dv
/// ```
///
/// and for the gamma = 0 pair (mu = 0, nu > 0)
///
/// ```text
/// psi(z) = int_0^1 (1 - t^nu z)^-2 dt   (rewritten as a weighted integral in w = t^nu).
/// ```
///
/// Restricted to |z| <= 0.95 where the quadrature tolerance is dependable.
pub fn psi_integral_eval(z: Complex64, munu: &MuNuPair, quad: &QuadratureSpec) -> Result<Complex64> {
    if z.norm() > 0.95 {
        return Err(Error::Domain(format!(
            "psi integral evaluation requires |z| <= 0.95, got {}",
            z.norm()
        )));
    }
    let one = Complex64::new(1.0, 0.0);
    let mu = munu.mu();
    let nu = munu.nu();
    if mu == 0.0 {
        if nu == 0.0 {
            return Err(Error::Domain(
                "psi integral needs nu > 0; the pair (0, 0) is degenerate".into(),
            ));
        }
        // In w = t^nu: (1/nu) int_0^1 w^(1/nu - 1) (1 - w z)^-2 dw.
        let sig = EndpointSignature::new(1.0 / nu - 1.0, 0.0, 0.0)?;
        let (v, _) = integrate_complex(
            |w| {
                let d = one - w * z;
                w.powf(1.0 / nu - 1.0) / (d * d)
            },
            &sig,
            quad,
        )?;
        return Ok(v / nu);
    }
    if nu == 0.0 {
        return Err(Error::Domain(
            "psi integral needs nu > 0 when mu > 0".into(),
        ));
    }
    let outer_sig = EndpointSignature::new(1.0 / nu - 1.0, 0.0, 0.0)?;
    let inner_sig = EndpointSignature::new(1.0 / mu - 1.0, 0.0, 0.0)?;
    // Inner integrals are buried inside an adaptive pass; tighten them a bit
    // so their error does not dominate the outer estimate.
    let inner_quad = QuadratureSpec {
        rel_tol: quad.rel_tol * 0.1,
        abs_tol: quad.abs_tol * 0.1,
        ..*quad
    };
    let (v, _) = integrate_complex(
        |u| {
            let uz = u.powf(1.0 / nu - 1.0);
            let inner = integrate_complex(
                |v| {
                    let d = one - (u * v) * z;
                    v.powf(1.0 / mu - 1.0) / (d * d)
                },
                &inner_sig,
                &inner_quad,
            );
            match inner {
                Ok((val, _)) => val * uz,
                // Poison the sample; the outer qk15 reports it.
                Err(_) => Complex64::new(f64::NAN, f64::NAN),
            }
        },
        &outer_sig,
        quad,
    )?;
    Ok(v / (mu * nu))
}
