//! Mass, energy, the scaling derivative `K` and its parts.
//!
//! With `G = ‖∇u‖²`, `L4 = ‖u‖⁴_{L⁴}`, `L6 = ‖u‖⁶_{L⁶}`:
//! `E = G/2 - L6/6 + L4/4`, `K = 2G - 2L6 + 3/2 L4`, `H = (G + L6)/6`.

use std::f64::consts::PI;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::profile::AnalyticProfile;

/// Upper eigenvalue of the scaling generator on the energy.
pub const MU_UPPER: f64 = 6.0;
/// Lower eigenvalue of the scaling generator on the energy.
pub const MU_LOWER: f64 = 0.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l2_sq: f64,
    pub grad_sq: f64,
    pub l4_4: f64,
    pub l6_6: f64,
}

impl Add for Norms {
    type Output = Norms;
    fn add(self, o: Norms) -> Norms {
        Norms {
            l2_sq: self.l2_sq + o.l2_sq,
            grad_sq: self.grad_sq + o.grad_sq,
            l4_4: self.l4_4 + o.l4_4,
            l6_6: self.l6_6 + o.l6_6,
        }
    }
}

impl Norms {
    pub fn mass(&self) -> f64 {
        0.5 * self.l2_sq
    }
    pub fn energy(&self) -> f64 {
        0.5 * self.grad_sq - self.l6_6 / 6.0 + 0.25 * self.l4_4
    }
    pub fn critical_energy(&self) -> f64 {
        0.5 * self.grad_sq - self.l6_6 / 6.0
    }
    pub fn k(&self) -> f64 {
        2.0 * self.grad_sq - 2.0 * self.l6_6 + 1.5 * self.l4_4
    }
    pub fn k_quadratic(&self) -> f64 {
        2.0 * self.grad_sq
    }
    pub fn k_nonlinear(&self) -> f64 {
        -2.0 * self.l6_6 + 1.5 * self.l4_4
    }
    pub fn k_critical(&self) -> f64 {
        2.0 * self.grad_sq - 2.0 * self.l6_6
    }
    pub fn h(&self) -> f64 {
        (self.grad_sq + self.l6_6) / 6.0
    }

    /// Norms of `e^{a λ} φ(e^{2λ} x)`: the gradient picks up `e^{(2a-2)λ}`,
    /// `L^p` powers `e^{(pa-6)λ}`.
    pub fn rescaled(&self, lambda: f64, amplitude_exponent: f64) -> Norms {
        let a = amplitude_exponent;
        Norms {
            l2_sq: self.l2_sq * ((2.0 * a - 6.0) * lambda).exp(),
            grad_sq: self.grad_sq * ((2.0 * a - 2.0) * lambda).exp(),
            l4_4: self.l4_4 * ((4.0 * a - 6.0) * lambda).exp(),
            l6_6: self.l6_6 * ((6.0 * a - 6.0) * lambda).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub mass: f64,
    pub energy: f64,
    pub critical_energy: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "K_Q")]
    pub k_quadratic: f64,
    #[serde(rename = "K_N")]
    pub k_nonlinear: f64,
    #[serde(rename = "K_c")]
    pub k_critical: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub l2_sq: f64,
    pub grad_sq: f64,
    pub l4_4: f64,
    pub l6_6: f64,
    pub boundary_mass_fraction: f64,
}

impl FunctionalReport {
    /// Assembles a report and checks the algebraic identities to `1e-10`.
    pub fn from_norms(n: Norms, boundary_mass_fraction: f64) -> Result<Self> {
        let r = FunctionalReport {
            mass: n.mass(),
            energy: n.energy(),
            critical_energy: n.critical_energy(),
            k: n.k(),
            k_quadratic: n.k_quadratic(),
            k_nonlinear: n.k_nonlinear(),
            k_critical: n.k_critical(),
            h: n.h(),
            l2_sq: n.l2_sq,
            grad_sq: n.grad_sq,
            l4_4: n.l4_4,
            l6_6: n.l6_6,
            boundary_mass_fraction,
        };
        r.check_identities(1e-10)?;
        Ok(r)
    }

    pub fn norms(&self) -> Norms {
        Norms { l2_sq: self.l2_sq, grad_sq: self.grad_sq, l4_4: self.l4_4, l6_6: self.l6_6 }
    }

    /// Largest relative defect among the three identities
    /// `E` by recomputation, `6E - K = G + L6` and `H = E - K/6`.
    pub fn identity_defect(&self) -> f64 {
        let scale = self.grad_sq + self.l6_6 + self.l4_4;
        if scale == 0.0 {
            return 0.0;
        }
        let e = 0.5 * self.grad_sq - self.l6_6 / 6.0 + 0.25 * self.l4_4;
        let d1 = (self.energy - e).abs();
        let d2 = (6.0 * self.energy - self.k - (self.grad_sq + self.l6_6)).abs();
        let d3 = 6.0 * (self.h - (self.energy - self.k / 6.0)).abs();
        let d4 = (self.k - self.k_quadratic - self.k_nonlinear).abs();
        d1.max(d2).max(d3).max(d4) / scale
    }

    pub fn check_identities(&self, tol: f64) -> Result<()> {
        let values = [self.grad_sq, self.l2_sq, self.l4_4, self.l6_6];
        if values.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::InternalConsistency(format!("negative or NaN norm in {self:?}")));
        }
        let d = self.identity_defect();
        if d.is_finite() && d > tol {
            return Err(Error::InternalConsistency(format!(
                "functional identities violated by {d:e} (tolerance {tol:e})"
            )));
        }
        Ok(())
    }
}

pub fn l2_sq(field: &RadialField) -> f64 {
    power_integral(field, 1)
}

pub fn l4_4(field: &RadialField) -> f64 {
    power_integral(field, 2)
}

pub fn l6_6(field: &RadialField) -> f64 {
    power_integral(field, 3)
}

/// `Σ w_j |u_j|^{2p}`; the wall value is zero so no endpoint term enters.
fn power_integral(field: &RadialField, p: i32) -> f64 {
    field.values().iter().zip(field.grid().weights()).map(|(u, w)| w * u.norm_sqr().powi(p)).sum()
}

/// `‖u‖^q_{L^q}` for real `q`.
pub fn lq_q(field: &RadialField, q: f64) -> f64 {
    field.values().iter().zip(field.grid().weights()).map(|(u, w)| w * u.norm().powf(q)).sum()
}

/// `‖∇u‖²` by Parseval on the sine series of `r u`:
/// `4 pi (r_max/2) Σ k² |b_k|²`.
pub fn gradient_norm_sq(field: &RadialField) -> f64 {
    let grid = field.grid();
    let b = field.sine_coefficients();
    let s: f64 = b.iter().zip(grid.wavenumbers()).map(|(b, k)| k * k * b.norm_sqr()).sum();
    4.0 * PI * 0.5 * grid.r_max() * s
}

pub fn norms(field: &RadialField) -> Norms {
    Norms { l2_sq: l2_sq(field), grad_sq: gradient_norm_sq(field), l4_4: l4_4(field), l6_6: l6_6(field) }
}

pub fn mass(field: &RadialField) -> f64 {
    0.5 * l2_sq(field)
}

pub fn energy(field: &RadialField) -> f64 {
    norms(field).energy()
}

pub fn critical_energy(field: &RadialField) -> f64 {
    norms(field).critical_energy()
}

pub fn k_functional(field: &RadialField) -> f64 {
    norms(field).k()
}

pub fn k_quadratic(field: &RadialField) -> f64 {
    2.0 * gradient_norm_sq(field)
}

pub fn k_nonlinear(field: &RadialField) -> f64 {
    -2.0 * l6_6(field) + 1.5 * l4_4(field)
}

pub fn k_critical(field: &RadialField) -> f64 {
    norms(field).k_critical()
}

pub fn h_functional(field: &RadialField) -> f64 {
    norms(field).h()
}

pub fn functional_report(field: &RadialField) -> Result<FunctionalReport> {
    FunctionalReport::from_norms(norms(field), field.boundary_mass_fraction())
}

/// Norms of an analytic profile sampled on `grid`, with the analytic
/// derivative inside the domain, an Euler–Maclaurin endpoint term at the
/// wall, and the exact contribution of `|x| > r_max`.
pub fn profile_norms_on_grid(profile: &AnalyticProfile, grid: &RadialGrid) -> Norms {
    if profile.is_zero() {
        return Norms::default();
    }
    let dr = grid.dr();
    let b = grid.r_max();
    let dens = |r: f64| -> [f64; 4] {
        let u = profile.value(r).norm_sqr();
        let d = profile.derivative(r).norm_sqr();
        let w = 4.0 * PI * r * r;
        [w * u, w * d, w * u * u, w * u * u * u]
    };
    let mut acc = [0.0; 4];
    for &r in grid.nodes() {
        let d = dens(r);
        for i in 0..4 {
            acc[i] += dr * d[i];
        }
    }
    let end = dens(b);
    // f'(b) by a centered difference of the analytic integrand; f'(0) = 0
    // because every integrand is even in r.
    let h = 1e-3 * dr;
    let (p, m) = (dens(b + h), dens(b - h));
    for i in 0..4 {
        let slope = (p[i] - m[i]) / (2.0 * h);
        acc[i] += 0.5 * dr * end[i] - dr * dr / 12.0 * slope;
    }
    let tail = profile.tail_norms(b);
    Norms {
        l2_sq: acc[0] + tail.l2_sq,
        grad_sq: acc[1] + tail.grad_sq,
        l4_4: acc[2] + tail.l4_4,
        l6_6: acc[3] + tail.l6_6,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingCheck {
    pub k: f64,
    pub finite_difference: f64,
}

fn check_step(dl: f64) -> Result<()> {
    if !(dl > 0.0 && dl <= 0.1) {
        return Err(Error::Config(format!("scaling step must lie in (0, 0.1], got {dl}")));
    }
    Ok(())
}

/// `K(φ)` against the centered difference of `λ ↦ E(e^{3λ} φ(e^{2λ}x))`,
/// rescaling the samples onto the same grid.
pub fn scaling_derivative_check(field: &RadialField, dl: f64) -> Result<ScalingCheck> {
    check_step(dl)?;
    let g = field.grid();
    let plus = crate::grid::scale_field(field, dl, 3.0, g)?;
    let minus = crate::grid::scale_field(field, -dl, 3.0, g)?;
    Ok(ScalingCheck { k: k_functional(field), finite_difference: (energy(&plus) - energy(&minus)) / (2.0 * dl) })
}

/// Same check on an analytic profile, where rescaling is exact.
pub fn scaling_derivative_check_profile(profile: &AnalyticProfile, dl: f64) -> Result<ScalingCheck> {
    check_step(dl)?;
    let e = |l: f64| profile.rescaled(l, 3.0).norms().energy();
    Ok(ScalingCheck { k: profile.norms().k(), finite_difference: (e(dl) - e(-dl)) / (2.0 * dl) })
}
