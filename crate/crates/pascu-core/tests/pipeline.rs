//! Chain-level properties of solve -> build extremal -> transform -> verify,
//! checked against closed forms and structural identities rather than against
//! the implementation's own intermediates.

use num_complex::Complex64;
use proptest::prelude::*;

use pascu_core::beta::{solve_beta, solve_beta_rho};
use pascu_core::grids::DiskGrid;
use pascu_core::kernels::Kernel;
use pascu_core::verify::{
    apply_transform, apply_transform_rho, extremal_function, membership_min, sharpness_margin,
    w_functional,
};
use pascu_core::{
    resolve_mu_nu, MuNuPair, QuadratureSpec, TruncationPolicy, WFamilySpec,
};

const TAU: f64 = std::f64::consts::TAU;

fn quad() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn policy() -> TruncationPolicy {
    TruncationPolicy::default()
}

fn pair(mu: f64, nu: f64) -> MuNuPair {
    MuNuPair::new(mu, nu).unwrap()
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

proptest! {
    // Round-trip (mu, nu) -> (alpha, gamma) -> (mu, nu). The gap between the
    // roots is kept off zero: the discriminant cancels catastrophically when
    // they coincide, which is a property of the quadratic, not of the solver.
    #[test]
    fn resolved_pair_recombines(nu in 0.01..3.0f64, gap in 0.05..3.0f64) {
        let mu = nu + gap;
        let alpha = mu + nu + mu * nu;
        let gamma = mu * nu;
        let back = resolve_mu_nu(alpha, gamma).unwrap();
        let tol = 1e-9 * (1.0 + mu);
        prop_assert!((back.mu() - mu).abs() <= tol, "mu {} vs {}", back.mu(), mu);
        prop_assert!((back.nu() - nu).abs() <= tol, "nu {} vs {}", back.nu(), nu);
    }

    // The sharpness margin is an order isomorphism around beta_sharp.
    #[test]
    fn sharpness_margin_sign_tracks_beta_gap(
        bp in -4.0..0.99f64,
        bs in -4.0..0.99f64,
    ) {
        let m = sharpness_margin(bp, bs);
        if bp > bs + 1e-9 {
            prop_assert!(m > 0.0, "margin {m} for gap {}", bp - bs);
        } else if bp < bs - 1e-9 {
            prop_assert!(m < 0.0, "margin {m} for gap {}", bp - bs);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // The harmonic-mean functional of the extremal collapses back to its
    // Moebius generator: with a_{n+1} = (1-beta)(x-y)(-y)^(n-1)/D_n the
    // weight D_n cancels term by term, leaving
    //   H(F)(z) = 1 + (1-beta)(x-y) z / (1 + y z).
    // This exercises extremal_function, the auxiliary series, and
    // w_functional against one another with an external closed form.
    #[test]
    fn w_functional_of_extremal_matches_closed_form(
        mu in 0.0..3.0f64,
        gap in 0.0..2.0f64,
        beta in -3.0..0.9f64,
        th_x in 0.0..TAU,
        th_y in 0.0..TAU,
        r in 0.1..0.75f64,
        th_z in 0.0..TAU,
    ) {
        let nu = mu + gap;
        let munu = pair(mu, nu);
        let x = Complex64::from_polar(1.0, th_x);
        let y = Complex64::from_polar(1.0, th_y);
        let f = extremal_function(beta, &munu, x, y, &policy()).unwrap();
        let spec = WFamilySpec::plain(mu + nu + mu * nu, mu * nu, beta, 0.0);
        let z = Complex64::from_polar(r, th_z);
        let h = w_functional(&f, &spec, z);
        let closed = 1.0 + (1.0 - beta) * (x - y) * z / (1.0 + y * z);
        prop_assert!(
            (h - closed).norm() <= 1e-8 * (1.0 + closed.norm()),
            "H = {h}, closed form = {closed}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // The rho blend rescales the distance to 1: (1 - beta_rho)(1 - rho) must
    // reproduce 1 - beta of the plain solve for every kernel and blend.
    #[test]
    fn beta_defect_scales_with_rho(
        c in -0.9..2.0f64,
        mu in 0.25..2.5f64,
        gap in 0.0..2.0f64,
        xi in 0.0..1.0f64,
        rho in 0.0..0.95f64,
    ) {
        let q = quad();
        let kernel = Kernel::bernardi(c, &q).unwrap();
        let munu = pair(mu, mu + gap);
        let plain = solve_beta(&kernel, &munu, xi, &policy(), &q).unwrap();
        let shifted = solve_beta_rho(&kernel, &munu, xi, rho, &policy(), &q).unwrap();
        let lhs = (1.0 - shifted.beta) * (1.0 - rho);
        let rhs = 1.0 - plain.beta;
        prop_assert!(
            (lhs - rhs).abs() <= 1e-12 * rhs.abs(),
            "(1-beta_rho)(1-rho) = {lhs} vs 1-beta = {rhs}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // The defining integral is affine in xi, so the solved X must satisfy
    // X(xi) = (1-xi) X(0) + xi X(1) without the solver being told so.
    #[test]
    fn x_value_is_affine_in_xi(
        c in -0.9..2.0f64,
        mu in 0.25..2.5f64,
        gap in 0.0..2.0f64,
        xi in 0.05..0.95f64,
    ) {
        let q = quad();
        let kernel = Kernel::bernardi(c, &q).unwrap();
        let munu = pair(mu, mu + gap);
        let x0 = solve_beta(&kernel, &munu, 0.0, &policy(), &q).unwrap().x_value;
        let x1 = solve_beta(&kernel, &munu, 1.0, &policy(), &q).unwrap().x_value;
        let xm = solve_beta(&kernel, &munu, xi, &policy(), &q).unwrap().x_value;
        let lerp = (1.0 - xi) * x0 + xi * x1;
        prop_assert!(
            (xm - lerp).abs() <= 1e-8 * (1.0 + x0.abs() + x1.abs()),
            "X({xi}) = {xm} vs interpolant {lerp}"
        );
    }
}

/// Sweeping xi from starlike to convex drags beta, the extremal, and the
/// membership margin along continuously; the certificate itself must hold at
/// every stop.
#[test]
fn transformed_extremal_membership_moves_continuously_in_xi() {
    let q = quad();
    let kernel = Kernel::bernardi(0.5, &q).unwrap();
    let munu = pair(1.0, 1.0);
    let grid = DiskGrid::new(6, 0.9, 24).unwrap();
    let mut prev: Option<f64> = None;
    for k in 0..=20 {
        let xi = k as f64 / 20.0;
        let beta = solve_beta(&kernel, &munu, xi, &policy(), &q).unwrap().beta;
        let f = extremal_function(beta, &munu, one(), -one(), &policy()).unwrap();
        let v = apply_transform(&f, &kernel, &q).unwrap();
        let rep = membership_min(&v, xi, &grid).unwrap();
        assert!(
            rep.min_re > -1e-3,
            "xi = {xi}: min Re = {} at r = {}",
            rep.min_re,
            rep.argmin_r
        );
        if let Some(p) = prev {
            assert!(
                (rep.min_re - p).abs() < 0.2,
                "jump between xi = {} and {xi}: {p} -> {}",
                xi - 0.05,
                rep.min_re
            );
        }
        prev = Some(rep.min_re);
    }
}

/// End-to-end rho path: solve the blended sharp constant, build its
/// extremal, push it through the rho-blended transform, and certify
/// membership. Dropping beta below the solved value must break the
/// certificate, pinning the sharpness direction.
#[test]
fn rho_blended_chain_certifies_membership_and_direction() {
    let q = quad();
    let kernel = Kernel::bernardi(0.5, &q).unwrap();
    let munu = pair(1.0, 2.0);
    let (xi, rho) = (0.5, 0.3);
    let solved = solve_beta_rho(&kernel, &munu, xi, rho, &policy(), &q).unwrap();
    let grid = DiskGrid::new(8, 0.95, 32).unwrap();

    let f = extremal_function(solved.beta, &munu, one(), -one(), &policy()).unwrap();
    let v = apply_transform_rho(&f, &kernel, rho, &q).unwrap();
    let rep = membership_min(&v, xi, &grid).unwrap();
    assert!(
        rep.is_pass(),
        "sharp-beta image left the class: min Re = {}",
        rep.min_re
    );

    let f_low = extremal_function(solved.beta - 1.0, &munu, one(), -one(), &policy()).unwrap();
    let v_low = apply_transform_rho(&f_low, &kernel, rho, &q).unwrap();
    let rep_low = membership_min(&v_low, xi, &grid).unwrap();
    assert!(
        !rep_low.is_pass(),
        "image for beta below sharp still passed: min Re = {}",
        rep_low.min_re
    );
}

/// A tabulated kernel built from samples of a closed-form family must agree
/// with that family's moments to interpolation accuracy.
#[test]
fn tabulated_kernel_tracks_closed_form_moments() {
    let q = quad();
    let c = 0.5;
    let n = 4001;
    let ts: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let vals: Vec<f64> = ts.iter().map(|&t| (1.0 + c) * t.powf(c)).collect();
    let tab = Kernel::tabulated(ts.clone(), vals.clone()).unwrap();

    // Normalization reuses the trapezoid mass, so the zeroth moment is 1 up
    // to a single rounding.
    let m0 = tab.moment(0, &q).unwrap();
    assert!((m0 - 1.0).abs() < 1e-15, "moment 0 = {m0}");

    for k in 1..=8 {
        let m = tab.moment(k, &q).unwrap();
        let exact = (1.0 + c) / (k as f64 + c + 1.0);
        assert!(
            (m - exact).abs() < 1e-4,
            "moment {k}: trapezoid {m} vs closed form {exact}"
        );
    }
}
