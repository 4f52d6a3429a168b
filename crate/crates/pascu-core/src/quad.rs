//! Adaptive quadrature on (0, 1) for integrands with algebraic and
//! logarithmic endpoint behaviour.
//!
//! The workhorse is a 15-point Kronrod rule with the embedded 7-point Gauss
//! rule for error estimation. Algebraic endpoint singularities t^p (p > -1)
//! are removed up front by the substitution t = s^m with m chosen so the
//! transformed integrand vanishes at the endpoint; logarithmic factors are
//! left to adaptive bisection, which converges geometrically for them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and budget for one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

/// Leading endpoint behaviour of an integrand on (0, 1):
/// f(t) ~ t^pow0 * log(1/t)^log0_power near 0 and f(t) ~ (1-t)^pow1 near 1.
///
/// Both exponents must exceed -1 for integrability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointSignature {
    pub pow0: f64,
    pub pow1: f64,
    pub log0_power: f64,
}

impl EndpointSignature {
    pub fn new(pow0: f64, pow1: f64, log0_power: f64) -> Result<Self> {
        if !(pow0 > -1.0) || !(pow1 > -1.0) {
            return Err(Error::Domain(format!(
                "endpoint exponents must exceed -1 for integrability, got ({pow0}, {pow1})"
            )));
        }
        if log0_power < 0.0 {
            return Err(Error::Domain(format!(
                "log0_power must be >= 0, got {log0_power}"
            )));
        }
        Ok(Self {
            pow0,
            pow1,
            log0_power,
        })
    }

    /// A signature for integrands smooth up to both endpoints.
    pub fn smooth() -> Self {
        Self {
            pow0: 0.0,
            pow1: 0.0,
            log0_power: 0.0,
        }
    }

    /// Shift the left exponent, e.g. after multiplying by t^delta.
    pub fn shift_pow0(&self, delta: f64) -> Result<Self> {
        Self::new(self.pow0 + delta, self.pow1, self.log0_power)
    }
}

/// Value and error estimate returned by the adaptive routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOutcome {
    pub value: f64,
    pub err_estimate: f64,
    pub subdivisions: usize,
}

// 15-point Kronrod abscissae (positive half) and weights, with the embedded
// 7-point Gauss weights. Standard double-precision values.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

trait QuadValue: Copy {
    fn zero() -> Self;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn scale(self, s: f64) -> Self;
    fn norm(self) -> f64;
    fn finite(self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn norm(self) -> f64 {
        self.abs()
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn norm(self) -> f64 {
        Complex64::norm(self)
    }
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// One Gauss-Kronrod pass over [a, b]: (K15 value, error estimate).
fn qk15<V: QuadValue, F: Fn(f64) -> V>(f: &F, a: f64, b: f64) -> Result<(V, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let eval = |x: f64| -> Result<V> {
        let v = f(x);
        if !v.finite() {
            return Err(Error::NonFiniteSample { at: x });
        }
        Ok(v)
    };

    let fc = eval(center)?;
    let mut resk = fc.scale(WGK[7]);
    let mut resg = fc.scale(WG[3]);
    let mut resabs = fc.norm() * WGK[7];
    let mut samples = [V::zero(); 15];
    samples[7] = fc;

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        samples[j] = f1;
        samples[14 - j] = f2;
        let sum = f1.add(f2);
        resk = resk.add(sum.scale(WGK[j]));
        resabs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            // XGK[1], XGK[3], XGK[5] coincide with the Gauss-7 abscissae.
            resg = resg.add(sum.scale(WG[j / 2]));
        }
    }

    let reskh = resk.scale(0.5);
    let mut resasc = WGK[7] * fc.sub(reskh).norm();
    for j in 0..7 {
        resasc += WGK[j] * (samples[j].sub(reskh).norm() + samples[14 - j].sub(reskh).norm());
    }

    let value = resk.scale(half);
    resabs *= half.abs();
    resasc *= half.abs();
    let mut err = resk.sub(resg).norm() * half.abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let eps = f64::EPSILON * 50.0;
    if resabs > f64::MIN_POSITIVE / eps {
        err = err.max(resabs * eps);
    }
    Ok((value, err))
}

struct Segment<V> {
    a: f64,
    b: f64,
    value: V,
    err: f64,
}

fn adaptive<V: QuadValue, F: Fn(f64) -> V>(
    f: &F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
    budget: &mut usize,
) -> Result<(V, f64)> {
    if a == b {
        return Ok((V::zero(), 0.0));
    }
    let (v, e) = qk15(f, a, b)?;
    let mut segs = vec![Segment {
        a,
        b,
        value: v,
        err: e,
    }];
    loop {
        let mut total = V::zero();
        let mut total_err = 0.0;
        for s in &segs {
            total = total.add(s.value);
            total_err += s.err;
        }
        let tol = spec.abs_tol.max(spec.rel_tol * total.norm());
        if total_err <= tol {
            return Ok((total, total_err));
        }
        if *budget == 0 {
            return Err(Error::QuadratureBudget {
                value: total.norm(),
                err_estimate: total_err,
            });
        }
        // Bisect the segment with the largest error contribution.
        let worst = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i)
            .unwrap();
        let Segment { a, b, .. } = segs[worst];
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // Interval at floating-point resolution; accept what we have.
            return Ok((total, total_err));
        }
        let (v1, e1) = qk15(f, a, mid)?;
        let (v2, e2) = qk15(f, mid, b)?;
        segs[worst] = Segment {
            a,
            b: mid,
            value: v1,
            err: e1,
        };
        segs.push(Segment {
            a: mid,
            b,
            value: v2,
            err: e2,
        });
        *budget -= 1;
    }
}

/// Integer m such that t = s^m makes s^(m*(1+pow)-1) at least quadratic,
/// i.e. the transformed integrand is C^1 at the endpoint (up to logs).
fn smoothing_exponent(pow: f64) -> u32 {
    if pow >= 0.0 && (pow - pow.round()).abs() < 1e-12 {
        return 1; // already smooth
    }
    let m = (3.0 / (1.0 + pow)).ceil();
    (m as u32).clamp(1, 80)
}

// Below this threshold s^m underflows toward 0; the true contribution of the
// remaining sliver is far below any tolerance we certify, so report 0 there.
const UNDERFLOW_FLOOR: f64 = 1e-290;

fn half_integral<V: QuadValue, F: Fn(f64) -> V>(
    f: &F,
    m: u32,
    left: bool,
    spec: &QuadratureSpec,
    budget: &mut usize,
) -> Result<(V, f64)> {
    if m == 1 {
        let (a, b) = if left { (0.0, 0.5) } else { (0.5, 1.0) };
        return adaptive(f, a, b, spec, budget);
    }
    let mf = f64::from(m);
    let upper = 0.5f64.powf(1.0 / mf);
    let g = |s: f64| -> V {
        let t = s.powi(m as i32);
        if t < UNDERFLOW_FLOOR {
            return V::zero();
        }
        let x = if left { t } else { 1.0 - t };
        f(x).scale(mf * s.powi(m as i32 - 1))
    };
    adaptive(&g, 0.0, upper, spec, budget)
}

/// Integrate f over (0, 1) given its endpoint signature.
///
/// The interval is split at 1/2; each half is mapped by t = s^m (resp.
/// 1 - t = s^m) with m from [`smoothing_exponent`] before adaptive
/// refinement. Exhausting `max_subdivisions` is an error carrying the best
/// estimate so far.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    sig: &EndpointSignature,
    spec: &QuadratureSpec,
) -> Result<QuadOutcome> {
    let mut budget = spec.max_subdivisions;
    let half_spec = QuadratureSpec {
        abs_tol: 0.5 * spec.abs_tol,
        ..*spec
    };
    let m0 = smoothing_exponent(sig.pow0);
    let m1 = smoothing_exponent(sig.pow1);
    let (v0, e0) = half_integral(&f, m0, true, &half_spec, &mut budget)?;
    let (v1, e1) = half_integral(&f, m1, false, &half_spec, &mut budget)?;
    Ok(QuadOutcome {
        value: v0 + v1,
        err_estimate: e0 + e1,
        subdivisions: spec.max_subdivisions - budget,
    })
}

/// Integrate f over an arbitrary finite interval [a, b] with no endpoint
/// treatment (integrand assumed bounded there).
pub fn integrate_interval<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<QuadOutcome> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain("integration endpoints must be finite".into()));
    }
    let mut budget = spec.max_subdivisions;
    let (v, e) = adaptive(&f, a, b, spec, &mut budget)?;
    Ok(QuadOutcome {
        value: v,
        err_estimate: e,
        subdivisions: spec.max_subdivisions - budget,
    })
}

/// Integrate f over [t, 1] where f behaves like (1-x)^pow1 near 1.
///
/// The interval is mapped affinely onto (0, 1) so the right-endpoint
/// substitution machinery applies.
pub fn integrate_tail<F: Fn(f64) -> f64>(
    f: F,
    t: f64,
    pow1: f64,
    spec: &QuadratureSpec,
) -> Result<QuadOutcome> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("tail start must be in [0, 1], got {t}")));
    }
    if t == 1.0 {
        return Ok(QuadOutcome {
            value: 0.0,
            err_estimate: 0.0,
            subdivisions: 0,
        });
    }
    let width = 1.0 - t;
    let sig = EndpointSignature::new(0.0, pow1, 0.0)?;
    let out = integrate(|u| f(t + width * u), &sig, spec)?;
    Ok(QuadOutcome {
        value: width * out.value,
        err_estimate: width * out.err_estimate,
        subdivisions: out.subdivisions,
    })
}

/// Complex-valued variant of [`integrate`] for integrands on (0, 1).
pub fn integrate_complex<F: Fn(f64) -> Complex64>(
    f: F,
    sig: &EndpointSignature,
    spec: &QuadratureSpec,
) -> Result<(Complex64, f64)> {
    let mut budget = spec.max_subdivisions;
    let half_spec = QuadratureSpec {
        abs_tol: 0.5 * spec.abs_tol,
        ..*spec
    };
    let m0 = smoothing_exponent(sig.pow0);
    let m1 = smoothing_exponent(sig.pow1);
    let (v0, e0) = half_integral(&f, m0, true, &half_spec, &mut budget)?;
    let (v1, e1) = half_integral(&f, m1, false, &half_spec, &mut budget)?;
    Ok((v0 + v1, e0 + e1))
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                let jf = j as f64;
                p0 = ((2.0 * jf + 1.0) * z * p1 - jf * p2) / (jf + 1.0);
            }
            let dp = nf * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                x[i] = -z;
                x[n - 1 - i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                w[n - 1 - i] = w[i];
                break;
            }
        }
    }
    (x, w)
}

/// A fixed composite Gauss-Legendre rule on (0, 1) with panels graded
/// geometrically toward t = 1, for integrals evaluated many times against
/// different smooth factors.
#[derive(Debug, Clone)]
pub struct FixedRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl FixedRule {
    /// `gl_points` Gauss-Legendre points per panel; 8 uniform panels on
    /// [0, 1/2], then panels halving in width down to 2^-26 next to 1.
    pub fn graded_toward_one(gl_points: usize) -> Self {
        let (gx, gw) = gauss_legendre(gl_points);
        let mut edges = Vec::new();
        for i in 0..=8 {
            edges.push(0.5 * i as f64 / 8.0);
        }
        let mut width = 0.25;
        let mut pos = 0.5;
        while width > 2.0f64.powi(-26) {
            pos += width;
            edges.push(pos);
            width *= 0.5;
        }
        edges.push(1.0);

        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            for (&xi, &wi) in gx.iter().zip(&gw) {
                nodes.push(c + h * xi);
                weights.push(h * wi);
            }
        }
        Self { nodes, weights }
    }

    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(value: f64, expected: f64, tol: f64, what: &str) {
        assert!(
            (value - expected).abs() <= tol,
            "{what}: got {value}, want {expected} (err {:.3e})",
            (value - expected).abs()
        );
    }

    #[test]
    fn polynomial_is_exact() {
        let spec = QuadratureSpec::default();
        let out = integrate(|t| 3.0 * t * t, &EndpointSignature::smooth(), &spec).unwrap();
        check(out.value, 1.0, 1e-14, "int 3t^2");
    }

    #[test]
    fn inverse_sqrt_singularity() {
        let spec = QuadratureSpec::default();
        let sig = EndpointSignature::new(-0.5, 0.0, 0.0).unwrap();
        let out = integrate(|t| t.powf(-0.5), &sig, &spec).unwrap();
        check(out.value, 2.0, 1e-10, "int t^-1/2");
    }

    #[test]
    fn log_endpoint_factor() {
        let spec = QuadratureSpec::default();
        let sig = EndpointSignature::new(0.0, 0.0, 1.0).unwrap();
        let out = integrate(|t| (1.0 / t).ln(), &sig, &spec).unwrap();
        check(out.value, 1.0, 1e-10, "int log(1/t)");
    }

    #[test]
    fn combined_algebraic_log_singularity() {
        // int_0^1 t^(-1/2) log(1/t) dt = 1/(1/2)^2 = 4.
        let spec = QuadratureSpec::default();
        let sig = EndpointSignature::new(-0.5, 0.0, 1.0).unwrap();
        let out = integrate(|t| t.powf(-0.5) * (1.0 / t).ln(), &sig, &spec).unwrap();
        check(out.value, 4.0, 1e-9, "int t^-1/2 log(1/t)");
    }

    #[test]
    fn right_endpoint_singularity() {
        let spec = QuadratureSpec::default();
        let sig = EndpointSignature::new(0.0, -0.25, 0.0).unwrap();
        let out = integrate(|t| (1.0 - t).powf(-0.25), &sig, &spec).unwrap();
        check(out.value, 4.0 / 3.0, 1e-10, "int (1-t)^-1/4");
    }

    #[test]
    fn steep_exponent_near_minus_one() {
        // int t^(-0.9) = 10.
        let spec = QuadratureSpec::default();
        let sig = EndpointSignature::new(-0.9, 0.0, 0.0).unwrap();
        let out = integrate(|t| t.powf(-0.9), &sig, &spec).unwrap();
        check(out.value, 10.0, 1e-8, "int t^-0.9");
        assert!(out.err_estimate < 1e-8);
    }

    #[test]
    fn tail_integral_matches_antiderivative() {
        let spec = QuadratureSpec::default();
        // int_t^1 x^(-1/2) dx = 2(1 - sqrt(t)).
        let out = integrate_tail(|x| x.powf(-0.5), 0.25, 0.0, &spec).unwrap();
        check(out.value, 1.0, 1e-10, "tail x^-1/2 from 1/4");
        let out = integrate_tail(|x| x.powf(-0.5), 1.0, 0.0, &spec).unwrap();
        assert_eq!(out.value, 0.0);
    }

    #[test]
    fn budget_exhaustion_reports_partial_value() {
        let tight = QuadratureSpec {
            rel_tol: 1e-15,
            abs_tol: 1e-300,
            max_subdivisions: 3,
        };
        let sig = EndpointSignature::new(-0.9, 0.0, 0.0).unwrap();
        // Needs many subdivisions without the budget for it.
        let r = integrate(|t| t.powf(-0.9) * (1.0 + t).sin(), &sig, &tight);
        match r {
            Err(Error::QuadratureBudget { err_estimate, .. }) => assert!(err_estimate > 0.0),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_sample_is_reported() {
        let spec = QuadratureSpec::default();
        let r = integrate_interval(|t| 1.0 / (t - 0.3), 0.0, 1.0, &spec);
        assert!(r.is_err());
    }

    #[test]
    fn complex_integral_splits_into_parts() {
        let spec = QuadratureSpec::default();
        let sig = EndpointSignature::smooth();
        let (v, _) = integrate_complex(
            |t| Complex64::new(t, t * t),
            &sig,
            &spec,
        )
        .unwrap();
        check(v.re, 0.5, 1e-12, "re part");
        check(v.im, 1.0 / 3.0, 1e-12, "im part");
    }

    #[test]
    fn gauss_legendre_integrates_high_degree() {
        let (x, w) = gauss_legendre(16);
        // Degree-31 polynomial integrated exactly: x^30 over [-1,1] = 2/31.
        let s: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(30)).sum();
        check(s, 2.0 / 31.0, 1e-13, "GL16 on x^30");
    }

    #[test]
    fn graded_rule_handles_boundary_layer() {
        let rule = FixedRule::graded_toward_one(16);
        // Sharp feature near t = 1: 1/(1.01 - t)^2 integrates to 100 - 1/1.01.
        let got = rule.apply(|t| (1.01 - t).powi(-2));
        check(got, 100.0 - 1.0 / 1.01, 1e-6, "boundary layer");
        // And a smooth global one.
        let got = rule.apply(|t| t.exp());
        check(got, std::f64::consts::E - 1.0, 1e-12, "exp");
    }
}
