//! Gauss–Legendre panels and the smoothstep ramps shared by cutoffs and
//! frequency multipliers.

use std::f64::consts::PI;

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { z } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (z * pm - pm1) / (z * z - 1.0);
            let dz = pm / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    (x, w)
}

/// Integrate `f` over `[a, b]` with `panels` equal panels of a 20-point rule.
pub fn integrate_panels(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (x, w) = gauss_legendre(20);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * f(mid + 0.5 * h * xi);
        }
        total += 0.5 * h * s;
    }
    total
}

/// Integrate over `[a, b]` with panels whose widths grow geometrically from
/// `first` at `a`. Suited to integrands with structure near `a` and slow decay.
pub fn integrate_geometric(f: impl Fn(f64) -> f64, a: f64, b: f64, first: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (x, w) = gauss_legendre(20);
    let mut total = 0.0;
    let mut lo = a;
    let mut h = first.min(b - a);
    while lo < b {
        let hi = (lo + h).min(b);
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * f(mid + half * xi);
        }
        total += half * s;
        lo = hi;
        h *= 1.5;
    }
    total
}

/// Quintic ramp `6q^5 - 15q^4 + 10q^3` clamped to `[0, 1]`, with derivatives.
pub fn smoothstep5(q: f64) -> [f64; 3] {
    if q <= 0.0 {
        return [0.0; 3];
    }
    if q >= 1.0 {
        return [1.0, 0.0, 0.0];
    }
    let q2 = q * q;
    [q2 * q * (10.0 + q * (-15.0 + 6.0 * q)), 30.0 * q2 * (1.0 - q) * (1.0 - q), 60.0 * q * (1.0 - q) * (1.0 - 2.0 * q)]
}

/// Degree-9 ramp `126q^5 - 420q^6 + 540q^7 - 315q^8 + 70q^9`, C^4 at both
/// ends. Returns the value and the first four derivatives.
pub fn smoothstep9(q: f64) -> [f64; 5] {
    if q <= 0.0 {
        return [0.0; 5];
    }
    if q >= 1.0 {
        return [1.0, 0.0, 0.0, 0.0, 0.0];
    }
    // S'(q) = 630 q^4 (1-q)^4
    let p = q * (1.0 - q);
    let s = q.powi(5) * (126.0 + q * (-420.0 + q * (540.0 + q * (-315.0 + 70.0 * q))));
    let d1 = 630.0 * p.powi(4);
    let dp = 1.0 - 2.0 * q;
    let d2 = 2520.0 * p.powi(3) * dp;
    // d/dq [p^3 (1-2q)] = 3p^2 (1-2q)^2 - 2p^3
    let d3 = 2520.0 * (3.0 * p * p * dp * dp - 2.0 * p.powi(3));
    // d/dq [3p^2 dp^2 - 2p^3] = 6p dp^3 - 12 p^2 dp - 6 p^2 dp
    let d4 = 2520.0 * (6.0 * p * dp.powi(3) - 18.0 * p * p * dp);
    [s, d1, d2, d3, d4]
}
