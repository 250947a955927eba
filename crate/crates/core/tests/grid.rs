use std::f64::consts::PI;

use cnls::functionals::{gradient_norm_sq, norms, profile_norms_on_grid};
use cnls::grid::{read_snapshot, write_snapshot};
use cnls::{integrate, make_grid, sample, scale_field, AnalyticProfile, Complex64, RadialField};
use proptest::prelude::*;

#[test]
fn spacing_and_bad_sizes() {
    let g = make_grid(100.0, 4095).unwrap();
    assert_eq!(g.dr(), 100.0 / 4096.0);
    assert!(matches!(make_grid(-1.0, 4095), Err(cnls::Error::Config(_))));
    assert!(make_grid(10.0, 8).is_err());
    assert!(g.nodes().windows(2).all(|w| w[1] > w[0]) && g.nodes()[0] > 0.0);
}

#[test]
fn integrate_matches_gaussian_moment() {
    let g = make_grid(12.0, 4095).unwrap();
    let d: Vec<f64> = g.nodes().iter().map(|r| (-2.0 * r * r).exp()).collect();
    let exact = PI.powf(1.5) / (2.0 * 2f64.sqrt());
    assert!((integrate(&d, &g).unwrap() - exact).abs() < 1e-12 * exact);
    assert_eq!(integrate(&vec![0.0; g.n()], &g).unwrap(), 0.0);
    assert!(matches!(integrate(&[1.0; 3], &g), Err(cnls::Error::Shape { .. })));
}

/// `‖W‖⁶` after `r = √3 tan θ`: `12√3 π ∫₀^{π/2} sin²θ cos²θ dθ = 3^{3/2}π²/4`,
/// here by composite Simpson as an independent check.
fn w6_oracle() -> f64 {
    let n = 4000;
    let h = PI / 2.0 / n as f64;
    let f = |t: f64| (t.sin() * t.cos()).powi(2);
    let mut s = f(0.0) + f(PI / 2.0);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    12.0 * PI * 3f64.sqrt() * s * h / 3.0
}

#[test]
fn ground_state_norms_with_tail() {
    let closed = 3f64.powf(1.5) * PI * PI / 4.0;
    assert!((w6_oracle() - closed).abs() < 1e-12);
    let g = make_grid(100.0, 4095).unwrap();
    let n = profile_norms_on_grid(&AnalyticProfile::aubin_talenti(), &g);
    assert!((n.l6_6 - closed).abs() < 1e-8 * closed, "{}", n.l6_6);
    assert!((n.grad_sq - closed).abs() < 1e-8 * closed, "{}", n.grad_sq);
}

#[test]
fn ground_state_solves_the_elliptic_equation() {
    // residual of -ΔW = W⁵ with Δu = (ru)''/r by a sixth-order stencil
    let residual = |n: usize| {
        let g = make_grid(20.0, n).unwrap();
        let w = sample(&AnalyticProfile::aubin_talenti(), &g).unwrap();
        let v: Vec<f64> = w.values().iter().zip(g.nodes()).map(|(u, r)| u.re * r).collect();
        let c = [1.0 / 90.0, -3.0 / 20.0, 3.0 / 2.0, -49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];
        let h2 = g.dr() * g.dr();
        let mut worst: f64 = 0.0;
        for j in 3..g.n() / 2 {
            let d2: f64 = (0..7).map(|i| c[i] * v[j + i - 3]).sum::<f64>() / h2;
            let r = g.nodes()[j];
            worst = worst.max((-d2 / r - w.values()[j].re.powi(5)).abs());
        }
        worst
    };
    let (coarse, fine) = (residual(255), residual(511));
    assert!(fine < 1e-6, "{fine}");
    assert!(coarse / fine > 30.0, "{coarse} / {fine}");
}

#[test]
fn gaussian_gradient_closed_form() {
    let g = make_grid(12.0, 4095).unwrap();
    let f = sample(&AnalyticProfile::gaussian(1.0, 1.0), &g).unwrap();
    let exact = 3.0 * PI.powf(1.5) / (2.0 * 2f64.sqrt());
    assert!((gradient_norm_sq(&f) - exact).abs() < 1e-10 * exact);
    assert_eq!(gradient_norm_sq(&RadialField::zeros(&g)), 0.0);
}

#[test]
fn zero_scaling_is_identity() {
    let g = make_grid(12.0, 1023).unwrap();
    let f = sample(&AnalyticProfile::gaussian(0.7, 1.3), &g).unwrap();
    assert_eq!(scale_field(&f, 0.0, 3.0, &g).unwrap(), f);
}

#[test]
fn sampled_scaling_tracks_analytic_factors() {
    let g = make_grid(16.0, 4095).unwrap();
    let p = AnalyticProfile::gaussian(0.9, 1.0);
    let f = sample(&p, &g).unwrap();
    let s = scale_field(&f, 0.1, 3.0, &g).unwrap();
    let (a, b) = (norms(&f), norms(&s));
    assert!((b.grad_sq / a.grad_sq - 0.4f64.exp()).abs() < 1e-8);
    assert!((b.l6_6 / a.l6_6 - 1.2f64.exp()).abs() < 1e-8);
    assert!((b.l4_4 / a.l4_4 - 0.6f64.exp()).abs() < 1e-8);
    assert!((b.l2_sq / a.l2_sq - 1.0).abs() < 1e-8);
}

#[test]
fn snapshot_text_format() {
    let g = make_grid(4.0, 31).unwrap();
    let f = sample(&AnalyticProfile::gaussian(1.0, 1.0), &g).unwrap();
    let d = tempfile::tempdir().unwrap();
    let p = d.path().join("f.csv");
    write_snapshot(&f, &p).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    assert!(text.starts_with("r,re,im\n"));
    assert_eq!(text.lines().count(), 32);
    assert_eq!(read_snapshot(&p).unwrap(), f);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn volume_of_ball(r_max in 0.5f64..200.0, p in 5u32..14) {
        let g = make_grid(r_max, (1usize << p) - 1).unwrap();
        let v = integrate(&vec![1.0; g.n()], &g).unwrap();
        let exact = 4.0 / 3.0 * PI * r_max.powi(3);
        // the composite rule is second order in Δr/r_max
        let h = 1.0 / (g.n() + 1) as f64;
        prop_assert!((v - exact).abs() <= 2.0 * h * h * exact);
    }

    #[test]
    fn analytic_rescaling_laws(lambda in -0.3f64..0.3, w in 0.5f64..2.0, amp in 0.1f64..3.0) {
        let g = make_grid(40.0, 8191).unwrap();
        let p = AnalyticProfile::gaussian(amp, w);
        let a = norms(&sample(&p, &g).unwrap());
        let b = norms(&sample(&p.rescaled(lambda, 3.0), &g).unwrap());
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-10 * y.abs();
        prop_assert!(close(b.grad_sq, a.grad_sq * (4.0 * lambda).exp()));
        prop_assert!(close(b.l6_6, a.l6_6 * (12.0 * lambda).exp()));
        prop_assert!(close(b.l4_4, a.l4_4 * (6.0 * lambda).exp()));
        prop_assert!(close(b.l2_sq, a.l2_sq));
    }

    #[test]
    fn sampling_commutes_with_rescaling(lambda in -1.0f64..1.0, a in prop::sample::select(vec![1.0, 3.0])) {
        let g = make_grid(10.0, 255).unwrap();
        let p = AnalyticProfile::gaussian(1.2, 0.8);
        let direct = sample(&p.rescaled(lambda, a), &g).unwrap();
        for (u, r) in direct.values().iter().zip(g.nodes()) {
            let v: Complex64 = p.value((2.0 * lambda).exp() * r) * (a * lambda).exp();
            prop_assert!((u - v).norm() <= 1e-12 * v.norm().max(1e-300));
        }
    }

    #[test]
    fn mass_preserving_resampling(lambda in -0.2f64..0.2, w in 0.6f64..1.5) {
        let g = make_grid(20.0, 4095).unwrap();
        let f = sample(&AnalyticProfile::gaussian(1.0, w), &g).unwrap();
        let s = scale_field(&f, lambda, 3.0, &g).unwrap();
        let (m0, m1) = (norms(&f).l2_sq, norms(&s).l2_sq);
        prop_assert!((m0 - m1).abs() <= 1e-9 * m0);
    }
}
