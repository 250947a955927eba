//! Dyadic frequency blocks for radial fields and a single bubble-extraction
//! step.
//!
//! A radial field is `u = v/r` with `v = Σ b_k sin(k̃ r)`; each term is a
//! spherical wave with `|ξ| = k̃`, so a radial Fourier multiplier `m(|ξ|)`
//! acts as `b_k ↦ m(k̃) b_k`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{make_grid, RadialField, RadialGrid};
use crate::profile::cutoff;
use crate::quadrature::smoothstep5;

/// `Λ̃₀(ξ)`: 1 on `[0, 1]`, 0 on `[2, ∞)`, quintic ramp between.
pub fn low_multiplier(xi: f64) -> f64 {
    1.0 - smoothstep5(xi.abs() - 1.0)[0]
}

/// `Λ̃_k(ξ) = Λ̃₀(2^{-k}ξ) - Λ̃₀(2^{1-k}ξ)` for `k ≥ 1`, `Λ̃₀` for `k = 0`.
pub fn shell_multiplier(k: u32, xi: f64) -> f64 {
    if k == 0 {
        low_multiplier(xi)
    } else {
        low_multiplier(xi / 2f64.powi(k as i32)) - low_multiplier(xi / 2f64.powi(k as i32 - 1))
    }
}

/// Largest `k` whose shell starts below the grid Nyquist wavenumber.
pub fn max_shell(grid: &RadialGrid) -> u32 {
    let nyquist = grid.wavenumbers()[grid.n() - 1];
    let mut k = 0u32;
    while 2f64.powi(k as i32) <= nyquist {
        k += 1;
    }
    k
}

#[derive(Debug, Clone)]
pub struct ShellDecomposition {
    pub k_min: u32,
    pub k_max: u32,
    /// Everything below shell `k_min`: `Λ̃₀(2^{1-k_min} ξ)`.
    pub low: RadialField,
    /// `Λ_k * v` for `k = k_min..=k_max`.
    pub shells: Vec<RadialField>,
}

impl ShellDecomposition {
    pub fn reconstruct(&self) -> RadialField {
        let grid = self.low.grid().clone();
        let mut acc = self.low.values().to_vec();
        for s in &self.shells {
            for (a, b) in acc.iter_mut().zip(s.values()) {
                *a += b;
            }
        }
        RadialField::new(grid, acc).expect("sum of finite fields")
    }
}

fn apply_multiplier(grid: &RadialGrid, b: &[Complex64], m: impl Fn(f64) -> f64) -> RadialField {
    let c: Vec<Complex64> = b.iter().zip(grid.wavenumbers()).map(|(b, k)| b * m(*k)).collect();
    RadialField::from_sine_coefficients(grid, &c)
}

/// Splits `field` into the low block below `k_min` and shells
/// `k_min..=k_max` (`k_min` is raised to 1; shell 0 is the low block).
pub fn dyadic_decompose(field: &RadialField, k_min: u32, k_max: u32) -> Result<ShellDecomposition> {
    let grid = field.grid();
    let top = max_shell(grid);
    if k_max > top {
        return Err(Error::Range(format!("k_max = {k_max} exceeds the grid limit {top}")));
    }
    let k_min = k_min.max(1);
    if k_min > k_max {
        return Err(Error::Range(format!("empty shell range {k_min}..={k_max}")));
    }
    let b = field.sine_coefficients();
    let low_scale = 2f64.powi(k_min as i32 - 1);
    let low = apply_multiplier(grid, &b, |xi| low_multiplier(xi / low_scale));
    let shells = (k_min..=k_max).map(|k| apply_multiplier(grid, &b, |xi| shell_multiplier(k, xi))).collect();
    Ok(ShellDecomposition { k_min, k_max, low, shells })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovNorm {
    pub value: f64,
    pub k_star: Option<u32>,
    pub r_star: Option<f64>,
}

/// Field value at the origin, `lim v/r = Σ b_k k̃`.
fn value_at_origin(grid: &RadialGrid, b: &[Complex64]) -> Complex64 {
    b.iter().zip(grid.wavenumbers()).map(|(b, k)| b * k).sum()
}

/// `sup_{k ≥ 0, r} 2^{-3k/2} |Λ_k * u|(r)` over the nodes and the origin;
/// the low block enters as `k = 0`.
pub fn besov_norm(field: &RadialField) -> BesovNorm {
    let grid = field.grid();
    let b = field.sine_coefficients();
    let mut best = BesovNorm { value: 0.0, k_star: None, r_star: None };
    for k in 0..=max_shell(grid) {
        let c: Vec<Complex64> = b.iter().zip(grid.wavenumbers()).map(|(b, x)| b * shell_multiplier(k, *x)).collect();
        let w = 2f64.powf(-1.5 * k as f64);
        let at0 = w * value_at_origin(grid, &c).norm();
        if at0 > best.value {
            best = BesovNorm { value: at0, k_star: Some(k), r_star: Some(0.0) };
        }
        let s = RadialField::from_sine_coefficients(grid, &c);
        for (u, r) in s.values().iter().zip(grid.nodes()) {
            let v = w * u.norm();
            if v > best.value {
                best = BesovNorm { value: v, k_star: Some(k), r_star: Some(*r) };
            }
        }
    }
    best
}

/// `Σ b_k sin(k π x / r_max) / x` by Clenshaw's recurrence; `x = 0` gives
/// the limit `Σ b_k k̃`.
pub fn evaluate_sine_series(grid: &RadialGrid, b: &[Complex64], x: f64) -> Complex64 {
    if x <= 0.0 {
        return value_at_origin(grid, b);
    }
    if x >= grid.r_max() {
        return Complex64::new(0.0, 0.0);
    }
    let theta = std::f64::consts::PI * x / grid.r_max();
    let c2 = 2.0 * theta.cos();
    let (mut y1, mut y2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for bk in b.iter().rev() {
        let y0 = bk + y1 * c2 - y2;
        y2 = y1;
        y1 = y0;
    }
    y1 * theta.sin() / x
}

pub fn inner_product(a: &RadialField, b: &RadialField) -> Complex64 {
    a.values().iter().zip(b.values()).zip(a.grid().weights()).map(|((x, y), w)| x * y.conj() * w).sum()
}

pub fn l2_norm(a: &RadialField) -> f64 {
    crate::functionals::l2_sq(a).sqrt()
}

/// `|⟨a, b⟩| / (‖a‖ ‖b‖)`, zero if either vanishes.
pub fn correlation(a: &RadialField, b: &RadialField) -> f64 {
    let d = l2_norm(a) * l2_norm(b);
    if d == 0.0 {
        0.0
    } else {
        inner_product(a, b).norm() / d
    }
}

#[derive(Debug, Clone)]
pub struct BubbleReport {
    pub besov: BesovNorm,
    pub h: f64,
    /// Unit-L² profile `ψ(y) = h^{3/2} b(h y)` on the reference grid.
    pub profile: RadialField,
    /// `T_h ψ` on the input grid, unit L².
    pub bubble: RadialField,
    pub remainder: RadialField,
    pub remainder_besov: BesovNorm,
}

/// Shells kept on each side of `k*` when isolating the bubble.
const BAND: u32 = 2;
/// Window radius in units of `h`, beyond the argmax radius.
const WINDOW: f64 = 4.0;

/// One extraction step: locate `(k*, r*)`, keep shells `k* ± 2` inside a
/// smooth window of radius `r* + 4h` about the origin, normalize, and
/// subtract the projection of the field on that direction.
pub fn extract_bubble(field: &RadialField) -> Result<BubbleReport> {
    let besov = besov_norm(field);
    let (k_star, r_star) = match (besov.k_star, besov.r_star) {
        (Some(k), Some(r)) if besov.value > 0.0 => (k, r),
        _ => return Err(Error::Precondition("field has zero Besov norm".into())),
    };
    let grid = field.grid();
    let h = 2f64.powi(-(k_star as i32));
    let b = field.sine_coefficients();
    let hi = 2f64.powi((k_star + BAND) as i32);
    let lo = if k_star > BAND { Some(2f64.powi(k_star as i32 - BAND as i32 - 1)) } else { None };
    let band = apply_multiplier(grid, &b, |xi| low_multiplier(xi / hi) - lo.map_or(0.0, |l| low_multiplier(xi / l)));
    let rho = r_star + WINDOW * h;
    let windowed: Vec<Complex64> = band.values().iter().zip(grid.nodes()).map(|(u, r)| u * cutoff(r / rho).0).collect();
    let mut bubble = RadialField::new(grid.clone(), windowed)?;
    let norm = l2_norm(&bubble);
    if norm == 0.0 {
        return Err(Error::Precondition("isolated bubble vanished".into()));
    }
    bubble = scale_values(&bubble, 1.0 / norm);
    let coeff = inner_product(field, &bubble);
    let remainder_values: Vec<Complex64> =
        field.values().iter().zip(bubble.values()).map(|(f, e)| f - coeff * e).collect();
    let remainder = RadialField::new(grid.clone(), remainder_values)?;
    let remainder_besov = besov_norm(&remainder);
    let profile = reference_profile(&bubble, h)?;
    Ok(BubbleReport { besov, h, profile, bubble, remainder, remainder_besov })
}

fn scale_values(f: &RadialField, s: f64) -> RadialField {
    let v = f.values().iter().map(|u| u * s).collect();
    RadialField::new(f.grid().clone(), v).expect("finite")
}

/// Reference grid for extracted profiles: `y ∈ (0, 16)`.
pub fn reference_grid() -> RadialGrid {
    make_grid(16.0, 1023).expect("valid reference grid")
}

fn reference_profile(bubble: &RadialField, h: f64) -> Result<RadialField> {
    let rg = reference_grid();
    let b = bubble.sine_coefficients();
    let s = h.powf(1.5);
    let vals: Vec<Complex64> = rg.nodes().iter().map(|&y| s * evaluate_sine_series(bubble.grid(), &b, h * y)).collect();
    let f = RadialField::new(rg, vals)?;
    let n = l2_norm(&f);
    Ok(if n > 0.0 { scale_values(&f, 1.0 / n) } else { f })
}
