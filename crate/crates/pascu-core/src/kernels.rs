//! Admissible kernel families lambda for the transform
//! V_lambda(f)(z) = int_0^1 lambda(t) f(tz)/t dt.
//!
//! Every kernel is a normalized nonnegative weight on (0, 1):
//! int_0^1 lambda(t) dt = 1, verified by quadrature at construction. The
//! closed families are
//!
//! * `bernardi`:   lambda(t) = (1+c) t^c, c > -1
//! * `ab_power`:   lambda(t) = (a+1)(b+1) t^a (1 - t^(b-a))/(b-a), a, b > -1
//!                 (with the b = a limit (a+1)^2 t^a log(1/t))
//! * `komatu`:     lambda(t) = (1+c)^p / Gamma(p) t^c log(1/t)^(p-1),
//!                 c > -1, p > 1
//! * `hypergeom`:  lambda(t) = k t^(B-1) (1-t)^(C-A-B) phi(1-t), B > 0,
//!                 C - A - B > 0, with a positive profile phi and numeric k
//!
//! plus `tabulated` kernels interpolated linearly from samples (their
//! derivatives are finite-difference quality, good enough for verification
//! scans but not for tight certificates).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::params::MuNuPair;
use crate::quad::{integrate, integrate_interval, integrate_tail, EndpointSignature, QuadratureSpec};
use crate::special::gamma;

/// Shape factor phi(x) for the hypergeometric family, sampled at x = 1 - t.
/// Implementations must be positive with nonnegative first and second
/// derivatives on (0, 1); construction spot-checks this on a grid.
///
/// `xc` is the exact complement 1 - x (that is, t itself). It is passed
/// separately because x rounds to 1.0 once t drops below machine epsilon,
/// and log-type profiles need the unrounded complement.
pub trait KernelProfile: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn value(&self, x: f64, xc: f64) -> f64;
    fn d1(&self, x: f64, xc: f64) -> f64;
    fn d2(&self, x: f64, xc: f64) -> f64;
    /// Exponent of the log(1/t) growth of phi(1 - t) as t -> 0.
    fn log_exponent_at_one(&self) -> f64 {
        0.0
    }
    /// phi(0), used for endpoint limits of the kernel derivative.
    fn value_at_zero(&self) -> f64 {
        1.0
    }
}

/// The trivial profile phi = 1.
#[derive(Debug, Clone, Copy)]
pub struct ConstantProfile;

impl KernelProfile for ConstantProfile {
    fn name(&self) -> String {
        "constant".into()
    }
    fn value(&self, _x: f64, _xc: f64) -> f64 {
        1.0
    }
    fn d1(&self, _x: f64, _xc: f64) -> f64 {
        0.0
    }
    fn d2(&self, _x: f64, _xc: f64) -> f64 {
        0.0
    }
}

/// phi(x) = (-log(1-x)/x)^(p-1). Feeding this into the hypergeometric
/// family with B = c+1 and C-A-B = p-1 reproduces the komatu kernel.
#[derive(Debug, Clone, Copy)]
pub struct KomatuProfile {
    pub p: f64,
}

impl KomatuProfile {
    /// ell(x) = -log(1-x)/x = sum_{k>=0} x^k/(k+1) and derivatives; the
    /// closed branch takes its log from the exact complement xc = 1 - x.
    fn ell(x: f64, xc: f64) -> (f64, f64, f64) {
        debug_assert!(x >= 0.0 && xc > 0.0);
        if x < 0.5 {
            let (mut e0, mut e1, mut e2) = (0.0, 0.0, 0.0);
            // x^k, x^(k-1), x^(k-2); the lagged powers only multiply terms
            // whose combinatorial factor vanishes before they are real.
            let (mut pk, mut pk1, mut pk2) = (1.0, 0.0, 0.0);
            for k in 0..80u32 {
                let kf = f64::from(k);
                let c = 1.0 / (kf + 1.0);
                e0 += c * pk;
                e1 += c * kf * pk1;
                e2 += c * kf * (kf - 1.0) * pk2;
                if k >= 4 && c * pk < 1e-18 {
                    break;
                }
                pk2 = pk1;
                pk1 = pk;
                pk *= x;
            }
            (e0, e1, e2)
        } else {
            let l = -xc.ln();
            let e0 = l / x;
            let e1 = 1.0 / (x * xc) - l / (x * x);
            let e2 = 1.0 / (x * xc * xc) - 2.0 / (x * x * xc) + 2.0 * l / (x * x * x);
            (e0, e1, e2)
        }
    }
}

impl KernelProfile for KomatuProfile {
    fn name(&self) -> String {
        format!("komatu(p={})", self.p)
    }
    fn value(&self, x: f64, xc: f64) -> f64 {
        let (e0, _, _) = Self::ell(x, xc);
        e0.powf(self.p - 1.0)
    }
    fn d1(&self, x: f64, xc: f64) -> f64 {
        let (e0, e1, _) = Self::ell(x, xc);
        (self.p - 1.0) * e0.powf(self.p - 2.0) * e1
    }
    fn d2(&self, x: f64, xc: f64) -> f64 {
        let (e0, e1, e2) = Self::ell(x, xc);
        (self.p - 1.0)
            * ((self.p - 2.0) * e0.powf(self.p - 3.0) * e1 * e1
                + e0.powf(self.p - 2.0) * e2)
    }
    fn log_exponent_at_one(&self) -> f64 {
        self.p - 1.0
    }
}

/// Kernel family with its shape parameters.
#[derive(Debug, Clone)]
pub enum Family {
    Bernardi {
        c: f64,
    },
    AbPower {
        a: f64,
        b: f64,
    },
    Komatu {
        c: f64,
        p: f64,
    },
    Hypergeom {
        a: f64,
        b: f64,
        c: f64,
        profile: Arc<dyn KernelProfile>,
    },
    Tabulated {
        ts: Arc<[f64]>,
        vals: Arc<[f64]>,
    },
}

/// Value of lambda' at t = 1, which may blow up for some parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndpointValue {
    Finite(f64),
    Diverging,
}

/// A normalized kernel with cached normalization constant and endpoint
/// signature.
#[derive(Debug, Clone)]
pub struct Kernel {
    family: Family,
    norm_const: f64,
    signature: EndpointSignature,
}

/// (1 - t^d)/d evaluated stably through expm1; the d -> 0 limit is log(1/t).
fn one_minus_pow_over(d: f64, ln_t: f64) -> f64 {
    if d == 0.0 {
        -ln_t
    } else {
        -f64::exp_m1(d * ln_t) / d
    }
}

/// (y^c - t^c)/c for 0 < t <= y, stable for small c; the c = 0 limit is
/// log(y/t).
fn powdiff(c: f64, y: f64, t: f64) -> f64 {
    let l = (y / t).ln();
    if c == 0.0 {
        return l;
    }
    let x = c * l;
    let phi1 = if x.abs() < 1e-8 {
        1.0 + 0.5 * x + x * x / 6.0
    } else {
        f64::exp_m1(x) / x
    };
    t.powf(c) * l * phi1
}

impl Kernel {
    pub fn bernardi(c: f64, quad: &QuadratureSpec) -> Result<Self> {
        if !(c > -1.0) {
            return Err(Error::Kernel(format!("bernardi needs c > -1, got {c}")));
        }
        let signature = EndpointSignature::new(c, 0.0, 0.0)?;
        Self::finish(Family::Bernardi { c }, 1.0 + c, signature, quad)
    }

    pub fn ab_power(a: f64, b: f64, quad: &QuadratureSpec) -> Result<Self> {
        if !(a > -1.0) || !(b > -1.0) {
            return Err(Error::Kernel(format!(
                "ab_power needs a, b > -1, got ({a}, {b})"
            )));
        }
        let log0 = if a == b { 1.0 } else { 0.0 };
        let signature = EndpointSignature::new(a.min(b), 1.0, log0)?;
        Self::finish(
            Family::AbPower { a, b },
            (a + 1.0) * (b + 1.0),
            signature,
            quad,
        )
    }

    pub fn komatu(c: f64, p: f64, quad: &QuadratureSpec) -> Result<Self> {
        if !(c > -1.0) || !(p > 1.0) {
            return Err(Error::Kernel(format!(
                "komatu needs c > -1 and p > 1, got ({c}, {p})"
            )));
        }
        let signature = EndpointSignature::new(c, p - 1.0, p - 1.0)?;
        Self::finish(
            Family::Komatu { c, p },
            (1.0 + c).powf(p) / gamma(p),
            signature,
            quad,
        )
    }

    pub fn hypergeom(
        a: f64,
        b: f64,
        c: f64,
        profile: Arc<dyn KernelProfile>,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        let e = c - a - b;
        if !(b > 0.0) || !(e > 0.0) {
            return Err(Error::Kernel(format!(
                "hypergeom needs B > 0 and C - A - B > 0, got B = {b}, C - A - B = {e}"
            )));
        }
        // Spot-check the profile contract on an interior grid.
        for k in 1..256 {
            let x = k as f64 / 256.0;
            let xc = 1.0 - x;
            let (v, d1, d2) = (profile.value(x, xc), profile.d1(x, xc), profile.d2(x, xc));
            if !(v > 0.0) || d1 < -1e-12 || d2 < -1e-12 || !v.is_finite() {
                return Err(Error::Kernel(format!(
                    "profile {} violates positivity at x = {x}: ({v}, {d1}, {d2})",
                    profile.name()
                )));
            }
        }
        let signature = EndpointSignature::new(b - 1.0, e, profile.log_exponent_at_one())?;
        let shape = |t: f64| t.powf(b - 1.0) * (1.0 - t).powf(e) * profile.value(1.0 - t, t);
        let mass = integrate(shape, &signature, quad)?;
        if !(mass.value > 0.0) {
            return Err(Error::Kernel("hypergeom shape has no mass".into()));
        }
        Self::finish(
            Family::Hypergeom {
                a,
                b,
                c,
                profile,
            },
            1.0 / mass.value,
            signature,
            quad,
        )
    }

    pub fn hypergeom_constant(a: f64, b: f64, c: f64, quad: &QuadratureSpec) -> Result<Self> {
        Self::hypergeom(a, b, c, Arc::new(ConstantProfile), quad)
    }

    /// Linearly interpolated samples (t_i, lambda_i). Normalization is the
    /// trapezoid mass, which is exact for the interpolant.
    pub fn tabulated(ts: Vec<f64>, vals: Vec<f64>) -> Result<Self> {
        if ts.len() != vals.len() || ts.len() < 4 {
            return Err(Error::Kernel(
                "tabulated kernel needs >= 4 aligned samples".into(),
            ));
        }
        if !ts.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Kernel("sample abscissae must increase".into()));
        }
        if ts[0] < 0.0 || *ts.last().unwrap() > 1.0 {
            return Err(Error::Kernel("samples must lie within [0, 1]".into()));
        }
        if vals.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::Kernel("sample values must be finite and >= 0".into()));
        }
        let mut mass = 0.0;
        for i in 0..ts.len() - 1 {
            mass += 0.5 * (vals[i] + vals[i + 1]) * (ts[i + 1] - ts[i]);
        }
        // Edge extensions (constant value) if the samples do not reach 0/1.
        mass += vals[0] * ts[0];
        mass += vals.last().unwrap() * (1.0 - ts.last().unwrap());
        if !(mass > 0.0) {
            return Err(Error::Kernel("tabulated kernel has no mass".into()));
        }
        Ok(Self {
            family: Family::Tabulated {
                ts: ts.into(),
                vals: vals.into(),
            },
            norm_const: 1.0 / mass,
            signature: EndpointSignature::smooth(),
        })
    }

    fn finish(
        family: Family,
        norm_const: f64,
        signature: EndpointSignature,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        let k = Self {
            family,
            norm_const,
            signature,
        };
        let mass = integrate(|t| k.density(t), &k.signature, quad)?;
        if (mass.value - 1.0).abs() > 1e-9 {
            return Err(Error::Kernel(format!(
                "normalization check failed: integral = {:.12} (expected 1)",
                mass.value
            )));
        }
        Ok(k)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::Bernardi { .. } => "bernardi",
            Family::AbPower { .. } => "ab",
            Family::Komatu { .. } => "komatu",
            Family::Hypergeom { .. } => "hypergeom",
            Family::Tabulated { .. } => "tabulated",
        }
    }

    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    pub fn signature(&self) -> &EndpointSignature {
        &self.signature
    }

    /// lambda(t) on (0, 1).
    pub fn density(&self, t: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&t));
        match &self.family {
            Family::Bernardi { c } => self.norm_const * t.powf(*c),
            Family::AbPower { a, b } => {
                self.norm_const * t.powf(*a) * one_minus_pow_over(b - a, t.ln())
            }
            Family::Komatu { c, p } => {
                let l = -t.ln();
                self.norm_const * t.powf(*c) * l.powf(p - 1.0)
            }
            Family::Hypergeom { b, c, a, profile } => {
                let e = c - a - b;
                self.norm_const * t.powf(b - 1.0) * (1.0 - t).powf(e) * profile.value(1.0 - t, t)
            }
            Family::Tabulated { ts, vals } => self.norm_const * interp_linear(ts, vals, t),
        }
    }

    /// lambda'(t) on (0, 1). For tabulated kernels this is the slope of the
    /// interpolant (verification grade only).
    pub fn density_d1(&self, t: f64) -> f64 {
        match &self.family {
            Family::Bernardi { c } => self.norm_const * c * t.powf(c - 1.0),
            Family::AbPower { a, b } => {
                let d = b - a;
                let ln_t = t.ln();
                let em = if d == 0.0 {
                    ln_t
                } else {
                    f64::exp_m1(d * ln_t) / d
                };
                // K t^(a-1) (a - b t^d) rewritten against expm1 for small d.
                self.norm_const * t.powf(a - 1.0) * (-1.0 - b * em)
            }
            Family::Komatu { c, p } => {
                let l = -t.ln();
                self.norm_const * t.powf(c - 1.0) * l.powf(p - 2.0) * (c * l - (p - 1.0))
            }
            Family::Hypergeom { a, b, c, profile } => {
                let e = c - a - b;
                let x = 1.0 - t;
                let u1 = t.powf(b - 2.0) * x.powf(e - 1.0) * ((b - 1.0) * x - e * t);
                let u = t.powf(b - 1.0) * x.powf(e);
                self.norm_const * (u1 * profile.value(x, t) - u * profile.d1(x, t))
            }
            Family::Tabulated { ts, vals } => self.norm_const * interp_slope(ts, vals, t),
        }
    }

    /// lambda''(t) on (0, 1).
    pub fn density_d2(&self, t: f64) -> f64 {
        match &self.family {
            Family::Bernardi { c } => self.norm_const * c * (c - 1.0) * t.powf(c - 2.0),
            Family::AbPower { a, b } => {
                let d = b - a;
                let ln_t = t.ln();
                let em = if d == 0.0 {
                    ln_t
                } else {
                    f64::exp_m1(d * ln_t) / d
                };
                // K t^(a-2) (a(a-1) - b(b-1) t^d) against expm1.
                self.norm_const
                    * t.powf(a - 2.0)
                    * (-(a + b - 1.0) - b * (b - 1.0) * em)
            }
            Family::Komatu { c, p } => {
                let l = -t.ln();
                self.norm_const
                    * t.powf(c - 2.0)
                    * l.powf(p - 3.0)
                    * (c * (c - 1.0) * l * l - (p - 1.0) * (2.0 * c - 1.0) * l
                        + (p - 1.0) * (p - 2.0))
            }
            Family::Hypergeom { a, b, c, profile } => {
                let e = c - a - b;
                let x = 1.0 - t;
                let u = t.powf(b - 1.0) * x.powf(e);
                let u1 = t.powf(b - 2.0) * x.powf(e - 1.0) * ((b - 1.0) * x - e * t);
                let u2 = t.powf(b - 3.0)
                    * x.powf(e - 2.0)
                    * ((b - 1.0) * (b - 2.0) * x * x - 2.0 * (b - 1.0) * e * t * x
                        + e * (e - 1.0) * t * t);
                self.norm_const
                    * (u2 * profile.value(x, t) - 2.0 * u1 * profile.d1(x, t)
                        + u * profile.d2(x, t))
            }
            Family::Tabulated { .. } => 0.0,
        }
    }

    /// lambda(1), always finite for the shipped families.
    pub fn value_at_one(&self) -> f64 {
        match &self.family {
            Family::Bernardi { c } => 1.0 + c,
            Family::AbPower { .. } | Family::Komatu { .. } | Family::Hypergeom { .. } => 0.0,
            Family::Tabulated { ts, vals } => {
                self.norm_const * interp_linear(ts, vals, 1.0)
            }
        }
    }

    /// Limit of lambda'(t) as t -> 1.
    pub fn d1_at_one(&self) -> EndpointValue {
        match &self.family {
            Family::Bernardi { c } => EndpointValue::Finite(self.norm_const * c),
            Family::AbPower { a, b } => {
                // K(a - b) = -(a+1)(b+1) independent of the branch.
                let _ = (a, b);
                EndpointValue::Finite(-self.norm_const)
            }
            Family::Komatu { c, p } => {
                let _ = c;
                if *p > 2.0 {
                    EndpointValue::Finite(0.0)
                } else if (*p - 2.0).abs() < 1e-14 {
                    EndpointValue::Finite(-self.norm_const)
                } else {
                    EndpointValue::Diverging
                }
            }
            Family::Hypergeom { a, b, c, profile } => {
                let e = c - a - b;
                if e > 1.0 {
                    EndpointValue::Finite(0.0)
                } else if (e - 1.0).abs() < 1e-14 {
                    EndpointValue::Finite(-self.norm_const * profile.value_at_zero())
                } else {
                    EndpointValue::Diverging
                }
            }
            Family::Tabulated { ts, vals } => {
                EndpointValue::Finite(self.norm_const * interp_slope(ts, vals, 1.0 - 1e-9))
            }
        }
    }

    /// Moment tau_n = int_0^1 lambda(t) t^n dt. Closed forms where the
    /// family has them, quadrature otherwise.
    pub fn moment(&self, n: usize, quad: &QuadratureSpec) -> Result<f64> {
        let nf = n as f64;
        match &self.family {
            Family::Bernardi { c } => Ok((1.0 + c) / (nf + c + 1.0)),
            Family::AbPower { a, b } => {
                Ok((a + 1.0) * (b + 1.0) / ((nf + a + 1.0) * (nf + b + 1.0)))
            }
            Family::Komatu { c, p } => Ok(((1.0 + c) / (nf + c + 1.0)).powf(*p)),
            Family::Hypergeom { .. } => {
                let sig = self.signature.shift_pow0(nf)?;
                let out = integrate(|t| t.powf(nf) * self.density(t), &sig, quad)?;
                Ok(out.value)
            }
            Family::Tabulated { ts, vals } => {
                // Trapezoid against the same samples that define the kernel.
                let mut acc = 0.0;
                for i in 0..ts.len() - 1 {
                    let f0 = ts[i].powf(nf) * vals[i];
                    let f1 = ts[i + 1].powf(nf) * vals[i + 1];
                    acc += 0.5 * (f0 + f1) * (ts[i + 1] - ts[i]);
                }
                acc += ts[0].powf(nf) * vals[0] * ts[0];
                acc += 1.0f64.powf(nf) * vals.last().unwrap() * (1.0 - ts.last().unwrap());
                Ok(self.norm_const * acc)
            }
        }
    }

    /// Tail integral Lambda_nu(t) = int_t^1 lambda(x) x^(-1/nu) dx.
    ///
    /// t = 0 is allowed only when pow0 - 1/nu > -1 (the integral converges).
    pub fn lambda_tail(&self, nu: f64, t: f64, quad: &QuadratureSpec) -> Result<f64> {
        if !(nu > 0.0) {
            return Err(Error::Domain(format!("lambda_tail needs nu > 0, got {nu}")));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("t must lie in [0, 1], got {t}")));
        }
        if t == 1.0 {
            return Ok(0.0);
        }
        let w = -1.0 / nu;
        if t == 0.0 {
            let p0 = self.signature.pow0 + w;
            if !(p0 > -1.0) {
                return Err(Error::Domain(format!(
                    "Lambda_nu diverges at t = 0: exponent {p0} <= -1"
                )));
            }
            let sig = EndpointSignature::new(p0, self.signature.pow1, self.signature.log0_power)?;
            return Ok(integrate(|x| self.density(x) * x.powf(w), &sig, quad)?.value);
        }
        Ok(integrate_tail(
            |x| self.density(x) * x.powf(w),
            t,
            self.signature.pow1,
            quad,
        )?
        .value)
    }

    /// Iterated tail integral
    /// Pi(t) = int_t^1 Lambda_nu(x) x^(1/nu - 1 - 1/mu) dx for gamma > 0,
    /// collapsed by Fubini to a single weighted integral of lambda; for
    /// gamma = 0 it degenerates to Lambda_alpha(t).
    pub fn pi_tail(&self, munu: &MuNuPair, t: f64, quad: &QuadratureSpec) -> Result<f64> {
        let (mu, nu) = (munu.mu(), munu.nu());
        if munu.is_gamma_zero() {
            return self.lambda_tail(nu, t, quad);
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("t must lie in [0, 1], got {t}")));
        }
        if t == 1.0 {
            return Ok(0.0);
        }
        let cq = 1.0 / nu - 1.0 / mu;
        let wn = -1.0 / nu;
        if t == 0.0 {
            // Pi(0) = int_0^1 lambda(y) y^(-1/mu) dy / cq, needing cq > 0.
            if !(cq > 0.0) {
                return Err(Error::Domain(
                    "Pi(0) diverges unless 1/nu > 1/mu".into(),
                ));
            }
            let p0 = self.signature.pow0 - 1.0 / mu;
            if !(p0 > -1.0) {
                return Err(Error::Domain(format!(
                    "Pi diverges at t = 0: exponent {p0} <= -1"
                )));
            }
            let sig = EndpointSignature::new(p0, self.signature.pow1, self.signature.log0_power)?;
            let out = integrate(|y| self.density(y) * y.powf(-1.0 / mu), &sig, quad)?;
            return Ok(out.value / cq);
        }
        Ok(integrate_tail(
            |y| self.density(y) * y.powf(wn) * powdiff(cq, y, t),
            t,
            self.signature.pow1,
            quad,
        )?
        .value)
    }

    /// Lambda_nu evaluated on an ascending grid by cumulative panels; far
    /// cheaper than independent tail integrals per point.
    pub fn lambda_tail_grid(&self, nu: f64, ts: &[f64], quad: &QuadratureSpec) -> Result<Vec<f64>> {
        if !(nu > 0.0) {
            return Err(Error::Domain(format!("lambda_tail needs nu > 0, got {nu}")));
        }
        if ts.is_empty() {
            return Ok(Vec::new());
        }
        if !ts.windows(2).all(|w| w[0] < w[1]) || ts[0] <= 0.0 || *ts.last().unwrap() >= 1.0 {
            return Err(Error::Grid(
                "grid must be strictly increasing inside (0, 1)".into(),
            ));
        }
        let w = -1.0 / nu;
        let n = ts.len();
        let mut out = vec![0.0; n];
        out[n - 1] = self.lambda_tail(nu, ts[n - 1], quad)?;
        for i in (0..n - 1).rev() {
            let panel = integrate_interval(
                |x| self.density(x) * x.powf(w),
                ts[i],
                ts[i + 1],
                quad,
            )?;
            out[i] = out[i + 1] + panel.value;
        }
        Ok(out)
    }

    /// Pi evaluated on an ascending grid. Uses the panel identity
    /// Pi(t_i) - Pi(t_{i+1}) = int_{t_i}^{t_{i+1}} lambda(y) y^(-1/nu)
    /// powdiff(y, t_i) dy + powdiff(t_{i+1}, t_i) Lambda(t_{i+1}).
    pub fn pi_tail_grid(
        &self,
        munu: &MuNuPair,
        ts: &[f64],
        quad: &QuadratureSpec,
    ) -> Result<Vec<f64>> {
        let (mu, nu) = (munu.mu(), munu.nu());
        if munu.is_gamma_zero() {
            return self.lambda_tail_grid(nu, ts, quad);
        }
        if ts.is_empty() {
            return Ok(Vec::new());
        }
        if !ts.windows(2).all(|w| w[0] < w[1]) || ts[0] <= 0.0 || *ts.last().unwrap() >= 1.0 {
            return Err(Error::Grid(
                "grid must be strictly increasing inside (0, 1)".into(),
            ));
        }
        let lam = self.lambda_tail_grid(nu, ts, quad)?;
        let cq = 1.0 / nu - 1.0 / mu;
        let wn = -1.0 / nu;
        let n = ts.len();
        let mut out = vec![0.0; n];
        out[n - 1] = self.pi_tail(munu, ts[n - 1], quad)?;
        for i in (0..n - 1).rev() {
            let t_lo = ts[i];
            let panel = integrate_interval(
                |y| self.density(y) * y.powf(wn) * powdiff(cq, y, t_lo),
                ts[i],
                ts[i + 1],
                quad,
            )?;
            out[i] = out[i + 1] + panel.value + powdiff(cq, ts[i + 1], ts[i]) * lam[i + 1];
        }
        Ok(out)
    }

    /// Canonical `family:key=value,...` description; round-trips via
    /// [`Kernel::parse`] for the closed families.
    pub fn describe(&self) -> String {
        match &self.family {
            Family::Bernardi { c } => format!("bernardi:c={c}"),
            Family::AbPower { a, b } => format!("ab:a={a},b={b}"),
            Family::Komatu { c, p } => format!("komatu:c={c},p={p}"),
            Family::Hypergeom { a, b, c, profile } => {
                if let Some(kp) = profile_komatu_p(profile.as_ref()) {
                    format!("hypergeom:A={a},B={b},C={c},profile=komatu,p={kp}")
                } else {
                    format!("hypergeom:A={a},B={b},C={c},profile={}", profile.name())
                }
            }
            Family::Tabulated { ts, .. } => format!("tabulated:samples={}", ts.len()),
        }
    }

    /// Parse a `family:key=value,...` description for the closed families.
    pub fn parse(s: &str, quad: &QuadratureSpec) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut kv = std::collections::BTreeMap::new();
        for part in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| {
                Error::Kernel(format!("kernel parameter `{part}` is not key=value"))
            })?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |key: &str| -> Result<f64> {
            kv.get(key)
                .ok_or_else(|| Error::Kernel(format!("missing kernel parameter `{key}`")))?
                .parse::<f64>()
                .map_err(|_| Error::Kernel(format!("parameter `{key}` is not a number")))
        };
        match name.trim() {
            "bernardi" => Self::bernardi(get("c")?, quad),
            "ab" | "ab_power" => Self::ab_power(get("a")?, get("b")?, quad),
            "komatu" => Self::komatu(get("c")?, get("p")?, quad),
            "hypergeom" => {
                let profile: Arc<dyn KernelProfile> =
                    match kv.get("profile").map(String::as_str).unwrap_or("constant") {
                        "constant" => Arc::new(ConstantProfile),
                        "komatu" => Arc::new(KomatuProfile { p: get("p")? }),
                        other => {
                            return Err(Error::Kernel(format!("unknown profile `{other}`")))
                        }
                    };
                Self::hypergeom(get("A")?, get("B")?, get("C")?, profile, quad)
            }
            other => Err(Error::Kernel(format!("unknown kernel family `{other}`"))),
        }
    }
}

fn profile_komatu_p(profile: &dyn KernelProfile) -> Option<f64> {
    let name = profile.name();
    name.strip_prefix("komatu(p=")
        .and_then(|s| s.strip_suffix(')'))
        .and_then(|s| s.parse().ok())
}

fn interp_linear(ts: &[f64], vals: &[f64], t: f64) -> f64 {
    if t <= ts[0] {
        return vals[0];
    }
    if t >= *ts.last().unwrap() {
        return *vals.last().unwrap();
    }
    let i = ts.partition_point(|&x| x <= t) - 1;
    let w = (t - ts[i]) / (ts[i + 1] - ts[i]);
    vals[i] * (1.0 - w) + vals[i + 1] * w
}

fn interp_slope(ts: &[f64], vals: &[f64], t: f64) -> f64 {
    if t <= ts[0] || t >= *ts.last().unwrap() {
        return 0.0;
    }
    let i = ts.partition_point(|&x| x <= t) - 1;
    (vals[i + 1] - vals[i]) / (ts[i + 1] - ts[i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ln_gamma;

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
        assert!(
            (got - want).abs() <= tol,
            "{what}: got {got}, want {want} (err {:.3e})",
            (got - want).abs()
        );
    }

    #[test]
    fn bernardi_density_and_moments() {
        let k = Kernel::bernardi(0.0, &quad()).unwrap();
        assert_close(k.density(0.3), 1.0, 1e-15, "flat kernel");
        assert_close(k.moment(0, &quad()).unwrap(), 1.0, 1e-15, "tau_0");
        assert_close(k.moment(1, &quad()).unwrap(), 0.5, 1e-15, "tau_1");

        let k1 = Kernel::bernardi(1.0, &quad()).unwrap();
        assert_close(k1.density(0.5), 1.0, 1e-15, "2t at 1/2");
        assert_close(k1.moment(2, &quad()).unwrap(), 0.5, 1e-15, "tau_2 of 2t");
    }

    #[test]
    fn constructors_reject_bad_parameters() {
        assert!(Kernel::bernardi(-1.5, &quad()).is_err());
        assert!(Kernel::komatu(-0.5, 1.0, &quad()).is_err());
        assert!(Kernel::ab_power(-1.0, 0.5, &quad()).is_err());
        assert!(Kernel::hypergeom_constant(0.0, -0.5, 3.0, &quad()).is_err());
        // C - A - B <= 0
        assert!(Kernel::hypergeom_constant(1.0, 0.5, 1.5, &quad()).is_err());
    }

    #[test]
    fn ab_power_log_limit_density() {
        // a = b = 0: lambda = log(1/t), unit value at t = 1/e.
        let k = Kernel::ab_power(0.0, 0.0, &quad()).unwrap();
        assert_close(k.density((-1.0f64).exp()), 1.0, 1e-14, "ab log limit");
        // Near-equal parameters stay continuous through the expm1 path.
        let k2 = Kernel::ab_power(0.0, 1e-13, &quad()).unwrap();
        let t = 0.37;
        assert_close(
            k2.density(t),
            k.density(t) * (1.0 + 1e-13),
            1e-9,
            "continuity in b - a",
        );
    }

    #[test]
    fn ab_power_moments_match_quadrature() {
        let k = Kernel::ab_power(-0.5, 3.0, &quad()).unwrap();
        assert_close(
            k.moment(1, &quad()).unwrap(),
            0.5 * 4.0 / (1.5 * 5.0),
            1e-15,
            "ab tau_1 closed form",
        );
        for n in [0usize, 2, 5] {
            let sig = k.signature().shift_pow0(n as f64).unwrap();
            let num = integrate(|t| t.powi(n as i32) * k.density(t), &sig, &quad())
                .unwrap()
                .value;
            assert_close(
                k.moment(n, &quad()).unwrap(),
                num,
                1e-10,
                &format!("ab tau_{n} vs quadrature"),
            );
        }
    }

    #[test]
    fn komatu_norm_and_moments() {
        let k = Kernel::komatu(-0.5, 3.0, &quad()).unwrap();
        assert_close(k.norm_const(), 0.0625, 1e-14, "komatu norm 0.5^3/Gamma(3)");
        assert_close(
            k.moment(1, &quad()).unwrap(),
            (0.5f64 / 1.5).powi(3),
            1e-14,
            "komatu tau_1",
        );
        let sig = k.signature().shift_pow0(2.0).unwrap();
        let num = integrate(|t| t * t * k.density(t), &sig, &quad()).unwrap().value;
        assert_close(k.moment(2, &quad()).unwrap(), num, 1e-10, "komatu tau_2 vs quad");
    }

    #[test]
    fn hypergeom_constant_profile_moments_match_beta_ratio() {
        // For phi = 1, tau_n = B(B+n, E+1)/B(B, E+1).
        let (a, b, c) = (0.0, 0.5, 3.0);
        let e = c - a - b;
        let k = Kernel::hypergeom_constant(a, b, c, &quad()).unwrap();
        let lbeta = |x: f64, y: f64| ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y);
        for n in [1usize, 2, 4] {
            let want = (lbeta(b + n as f64, e + 1.0) - lbeta(b, e + 1.0)).exp();
            assert_close(
                k.moment(n, &quad()).unwrap(),
                want,
                1e-10,
                &format!("hypergeom tau_{n}"),
            );
        }
    }

    #[test]
    fn komatu_profile_reproduces_komatu_family() {
        let (c, p) = (-0.5, 3.0);
        let k1 = Kernel::komatu(c, p, &quad()).unwrap();
        let k2 = Kernel::hypergeom(
            0.0, // A is free once C - A - B = p - 1 is arranged via C
            c + 1.0,
            c + 1.0 + (p - 1.0),
            Arc::new(KomatuProfile { p }),
            &quad(),
        )
        .unwrap();
        for &t in &[0.05, 0.3, 0.6, 0.9, 0.99] {
            let (d1, d2) = (k1.density(t), k2.density(t));
            assert_close(d2, d1, 1e-9 * (1.0 + d1.abs()), &format!("density at {t}"));
        }
    }

    #[test]
    fn lambda_tail_oracles() {
        let q = quad();
        // c = 0, nu = 1: Lambda(t) = -log t (log branch of the antiderivative).
        let k = Kernel::bernardi(0.0, &q).unwrap();
        assert_close(
            k.lambda_tail(1.0, 0.5, &q).unwrap(),
            2.0f64.ln(),
            1e-10,
            "Lambda log branch",
        );
        assert_eq!(k.lambda_tail(1.0, 1.0, &q).unwrap(), 0.0);
        // c = 1, nu = 1: Lambda(t) = 2(1 - t).
        let k1 = Kernel::bernardi(1.0, &q).unwrap();
        assert_close(k1.lambda_tail(1.0, 0.5, &q).unwrap(), 1.0, 1e-10, "Lambda linear");
        // Divergent at t = 0 when c - 1/nu <= -1 (nu = 2 sits exactly on the
        // boundary for c = -1/2 and must also be rejected).
        let ks = Kernel::bernardi(-0.5, &q).unwrap();
        assert!(ks.lambda_tail(4.0, 0.0, &q).is_ok());
        assert!(ks.lambda_tail(2.0, 0.0, &q).is_err());
        assert!(ks.lambda_tail(0.5, 0.0, &q).is_err());
    }

    #[test]
    fn pi_tail_oracles() {
        let q = quad();
        // c = 0, mu = nu = 1: Pi(t) = (log t)^2 / 2.
        let k = Kernel::bernardi(0.0, &q).unwrap();
        let munu = MuNuPair::new(1.0, 1.0).unwrap();
        assert_close(
            k.pi_tail(&munu, 0.5, &q).unwrap(),
            0.5 * 2.0f64.ln().powi(2),
            1e-10,
            "Pi log^2 branch",
        );
        // c = 1, mu = 1, nu = 2: Pi(t) = 4/3 [2(1/sqrt(t) - 1) - (1 - t)].
        let k1 = Kernel::bernardi(1.0, &q).unwrap();
        let mn12 = MuNuPair::new(1.0, 2.0).unwrap();
        let t: f64 = 0.5;
        let want = 4.0 / 3.0 * (2.0 * (t.powf(-0.5) - 1.0) - (1.0 - t));
        assert_close(k1.pi_tail(&mn12, t, &q).unwrap(), want, 1e-10, "Pi mixed branch");
        // gamma = 0 collapses to Lambda_alpha.
        let g0 = MuNuPair::new(0.0, 2.0).unwrap();
        let a = k.pi_tail(&g0, 0.3, &q).unwrap();
        let b = k.lambda_tail(2.0, 0.3, &q).unwrap();
        assert_close(a, b, 1e-12, "gamma=0 Pi = Lambda");
    }

    #[test]
    fn grid_tails_match_pointwise() {
        let q = quad();
        let k = Kernel::komatu(-0.5, 3.0, &q).unwrap();
        let munu = MuNuPair::new(1.0, 2.0).unwrap();
        let ts: Vec<f64> = (1..40).map(|i| i as f64 / 40.0).collect();
        let lam = k.lambda_tail_grid(2.0, &ts, &q).unwrap();
        let pi = k.pi_tail_grid(&munu, &ts, &q).unwrap();
        for (i, &t) in ts.iter().enumerate().step_by(7) {
            let l = k.lambda_tail(2.0, t, &q).unwrap();
            let p = k.pi_tail(&munu, t, &q).unwrap();
            assert_close(lam[i], l, 1e-9 * (1.0 + l.abs()), &format!("Lambda grid at {t}"));
            assert_close(pi[i], p, 1e-9 * (1.0 + p.abs()), &format!("Pi grid at {t}"));
        }
    }

    #[test]
    fn endpoint_derivative_classification() {
        let q = quad();
        let ab = Kernel::ab_power(-0.5, 3.0, &q).unwrap();
        assert_eq!(ab.value_at_one(), 0.0);
        match ab.d1_at_one() {
            EndpointValue::Finite(v) => assert_close(v, -0.5 * 4.0, 1e-12, "ab d1(1)"),
            other => panic!("unexpected {other:?}"),
        }
        let kom = Kernel::komatu(-0.5, 3.0, &q).unwrap();
        assert_eq!(kom.value_at_one(), 0.0);
        assert_eq!(kom.d1_at_one(), EndpointValue::Finite(0.0));
        let kom_frac = Kernel::komatu(-0.5, 1.5, &q).unwrap();
        assert_eq!(kom_frac.d1_at_one(), EndpointValue::Diverging);
        let bern = Kernel::bernardi(2.0, &q).unwrap();
        assert_close(bern.value_at_one(), 3.0, 1e-15, "bernardi at 1");
        // Finite-difference cross-check of the ab derivative limit.
        let t = 1.0 - 1e-7;
        let fd = (ab.density(1.0 - 1e-7 + 5e-8) - ab.density(t - 5e-8)) / 1e-7;
        match ab.d1_at_one() {
            EndpointValue::Finite(v) => assert_close(fd, v, 1e-4, "ab d1 finite difference"),
            _ => unreachable!(),
        }
    }

    #[test]
    fn tabulated_flat_kernel_tracks_bernardi() {
        let m = 20_000usize;
        let ts: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
        let vals = vec![1.0; m + 1];
        let k = Kernel::tabulated(ts, vals).unwrap();
        let q = quad();
        for n in [0usize, 1, 2, 3] {
            let want = 1.0 / (n as f64 + 1.0);
            assert_close(
                k.moment(n, &q).unwrap(),
                want,
                1e-8,
                &format!("tabulated tau_{n}"),
            );
        }
        assert_close(k.density(0.5), 1.0, 1e-12, "tabulated density");
    }

    #[test]
    fn parse_describe_round_trip() {
        let q = quad();
        for s in [
            "bernardi:c=0.5",
            "ab:a=-0.5,b=3",
            "komatu:c=-0.5,p=3",
            "hypergeom:A=0,B=0.5,C=3",
            "hypergeom:A=0,B=0.5,C=2.5,profile=komatu,p=3",
        ] {
            let k = Kernel::parse(s, &q).unwrap();
            let k2 = Kernel::parse(&k.describe(), &q).unwrap();
            for &t in &[0.1, 0.5, 0.9] {
                assert_close(
                    k.density(t),
                    k2.density(t),
                    1e-12,
                    &format!("round trip of `{s}` at {t}"),
                );
            }
        }
        assert!(Kernel::parse("nosuch:c=1", &q).is_err());
        assert!(Kernel::parse("bernardi:c=oops", &q).is_err());
        assert!(Kernel::parse("bernardi", &q).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let q = quad();
        let kernels: Vec<Kernel> = vec![
            Kernel::bernardi(1.5, &q).unwrap(),
            Kernel::ab_power(-0.5, 3.0, &q).unwrap(),
            Kernel::ab_power(-0.3, -0.3, &q).unwrap(),
            Kernel::komatu(-0.5, 3.0, &q).unwrap(),
            Kernel::hypergeom_constant(0.0, 0.5, 3.0, &q).unwrap(),
            Kernel::hypergeom(0.0, 0.5, 2.5, Arc::new(KomatuProfile { p: 3.0 }), &q).unwrap(),
        ];
        let h = 1e-6;
        for k in &kernels {
            for &t in &[0.2, 0.5, 0.8] {
                let fd1 = (k.density(t + h) - k.density(t - h)) / (2.0 * h);
                let d1 = k.density_d1(t);
                assert_close(
                    d1,
                    fd1,
                    1e-5 * (1.0 + d1.abs()),
                    &format!("{} d1 at {t}", k.describe()),
                );
                let fd2 = (k.density(t + h) - 2.0 * k.density(t) + k.density(t - h)) / (h * h);
                let d2 = k.density_d2(t);
                assert_close(
                    d2,
                    fd2,
                    2e-3 * (1.0 + d2.abs()),
                    &format!("{} d2 at {t}", k.describe()),
                );
            }
        }
    }
}
