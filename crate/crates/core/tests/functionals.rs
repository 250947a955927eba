use std::f64::consts::PI;

use cnls::functionals::{
    energy, k_critical, k_functional, mass, norms, scaling_derivative_check, scaling_derivative_check_profile,
};
use cnls::ground_state::{make_k_data, threshold_closed_form, Classification};
use cnls::{functional_report, make_grid, sample, AnalyticProfile, RadialGrid};
use proptest::prelude::*;

fn grid() -> RadialGrid {
    make_grid(14.0, 4095).unwrap()
}

#[test]
fn gaussian_mass() {
    let f = sample(&AnalyticProfile::gaussian(1.0, 1.0), &grid()).unwrap();
    let exact = 0.5 * PI.powf(1.5) / (2.0 * 2f64.sqrt());
    assert!((mass(&f) - exact).abs() < 1e-12 * exact);
}

/// `K(A e^{-r²})` from the Gaussian moments `∫e^{-a r²} = (π/a)^{3/2}`.
fn k_gaussian(a: f64) -> f64 {
    let a2 = a * a;
    let g = a2 * 3.0 * PI.powf(1.5) / 8f64.sqrt();
    let l4 = a2 * a2 * (PI / 4.0).powf(1.5);
    let l6 = a2 * a2 * a2 * (PI / 6.0).powf(1.5);
    2.0 * g - 2.0 * l6 + 1.5 * l4
}

#[test]
fn k_changes_sign_along_gaussian_amplitudes() {
    // K is positive for small A and negative for large A, so bisect once
    let (mut lo, mut hi) = (0.1, 10.0);
    assert!(k_gaussian(lo) > 0.0 && k_gaussian(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if k_gaussian(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let g = grid();
    let below = sample(&AnalyticProfile::gaussian(lo * 0.999, 1.0), &g).unwrap();
    let above = sample(&AnalyticProfile::gaussian(lo * 1.001, 1.0), &g).unwrap();
    assert!(k_functional(&below) > 0.0);
    assert!(k_functional(&above) < 0.0);
}

#[test]
fn scaling_derivative_discrepancy_is_second_order() {
    let p = AnalyticProfile::gaussian(1.3, 0.8);
    let a = scaling_derivative_check_profile(&p, 0.02).unwrap();
    let b = scaling_derivative_check_profile(&p, 0.01).unwrap();
    let (da, db) = ((a.k - a.finite_difference).abs(), (b.k - b.finite_difference).abs());
    assert!((da / db - 4.0).abs() < 0.05, "ratio {}", da / db);

    let f = sample(&p, &grid()).unwrap();
    let c = scaling_derivative_check(&f, 1e-3).unwrap();
    assert!((c.k - c.finite_difference).abs() < 1e-6 * c.k.abs());
}

#[test]
fn zero_field_scaling_check_is_zero() {
    let g = grid();
    let c = scaling_derivative_check(&cnls::RadialField::zeros(&g), 1e-3).unwrap();
    assert_eq!((c.k, c.finite_difference), (0.0, 0.0));
}

#[test]
fn truncated_ground_state_below_is_in_k_plus() {
    let g = make_grid(1300.0 * 0.05f64.powi(3), 65535).unwrap();
    let d = make_k_data(-0.05, None, &g).unwrap();
    let r = d.functionals;
    assert!(r.k > 0.0 && r.energy < threshold_closed_form());
    assert_eq!(d.classification, Classification::KPlus);
}

fn two_bump() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    (0.05..3.0f64, 0.3..2.0f64, -2.0..2.0f64, 0.3..2.0f64, 0.0..3.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn report_identities_hold((a, w, b, w2, c) in two_bump()) {
        let g = grid();
        let mut f = sample(&AnalyticProfile::gaussian(a, w), &g).unwrap().into_values();
        let h = sample(&AnalyticProfile::gaussian(b, w2), &g).unwrap();
        for (x, (y, r)) in f.iter_mut().zip(h.values().iter().zip(g.nodes())) {
            *x += y * cnls::Complex64::from_polar(1.0, c * r);
        }
        let field = cnls::RadialField::new(g, f).unwrap();
        let rep = functional_report(&field).unwrap();
        prop_assert!(rep.identity_defect() <= 1e-12);
        prop_assert!(k_critical(&field) <= k_functional(&field));
        prop_assert!((rep.energy - energy(&field)).abs() <= 1e-12 * rep.energy.abs().max(1.0));
    }

    #[test]
    fn h_increases_under_mass_critical_dilation(a in 0.1..4.0f64, w in 0.2..3.0f64, l in -1.0..1.0f64, dl in 0.01..0.5f64) {
        let p = AnalyticProfile::gaussian(a, w);
        let h0 = p.rescaled(l, 3.0).norms().h();
        let h1 = p.rescaled(l + dl, 3.0).norms().h();
        prop_assert!(h0 > 0.0);
        prop_assert!(h1 > h0);
    }

    #[test]
    fn free_energy_brackets_on_k_plus(a in 0.05..2.0f64, w in 0.3..3.0f64) {
        let n = norms(&sample(&AnalyticProfile::gaussian(a, w), &grid()).unwrap());
        prop_assume!(n.k() >= 0.0);
        let e = n.energy();
        prop_assert!(e >= (n.grad_sq + n.l6_6) / 6.0 - 1e-12 * e);
        prop_assert!(e <= 0.5 * n.grad_sq + 0.25 * n.l4_4 + 1e-12 * e);
    }

    #[test]
    fn uniform_bound_below_threshold(a in 0.05..4.0f64, w in 0.3..3.0f64) {
        let m = threshold_closed_form();
        let n = norms(&sample(&AnalyticProfile::gaussian(a, w), &grid()).unwrap());
        let (e, k) = (n.energy(), n.k());
        prop_assume!(e < m);
        if k >= 0.0 {
            prop_assert!(k >= (6.0 * (m - e)).min(2.0 / 3.0 * n.grad_sq + 0.5 * n.l4_4) - 1e-9 * m);
        } else {
            prop_assert!(k <= -6.0 * (m - e) + 1e-9 * m);
        }
    }
}
