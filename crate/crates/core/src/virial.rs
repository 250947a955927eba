//! Localized virial quantities `V_R = ∫ φ_R |u|²` and the blow-up certificate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::quadrature::smoothstep9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightFamily {
    /// `R² φ(r/R)` with `φ = s²` on `[0, 1]`, constant on `[3, ∞)`.
    Quadratic,
    /// `R² φ(r²/R²)` with `φ = 1` on `[0, 1]`, `0` on `[2, ∞)`.
    Bump,
}

// φ'' = 2 + A p³ + B p⁴ + C p⁵ + D p⁶ on p = s - 1 ∈ [0, 2]: C⁴ joins at
// both ends, ∫φ'' = -2 so that φ' reaches 0 at s = 3.
const A: f64 = -75.0 / 2.0;
const B: f64 = 435.0 / 8.0;
const C: f64 = -213.0 / 8.0;
const D: f64 = 35.0 / 8.0;

/// `[φ, φ', φ'', φ''', φ'''']` of the quadratic-family profile at `s`.
pub fn quadratic_profile(s: f64) -> [f64; 5] {
    if s <= 1.0 {
        return [s * s, 2.0 * s, 2.0, 0.0, 0.0];
    }
    if s >= 3.0 {
        return [27.0 / 7.0, 0.0, 0.0, 0.0, 0.0];
    }
    let p = s - 1.0;
    let p2 = p * p;
    let p4 = p2 * p2;
    [
        1.0 + 2.0 * p + p2 + p4 * p * (A / 20.0 + p * (B / 30.0 + p * (C / 42.0 + p * D / 56.0))),
        2.0 + 2.0 * p + p4 * (A / 4.0 + p * (B / 5.0 + p * (C / 6.0 + p * D / 7.0))),
        2.0 + p2 * p * (A + p * (B + p * (C + p * D))),
        p2 * (3.0 * A + p * (4.0 * B + p * (5.0 * C + p * 6.0 * D))),
        p * (6.0 * A + p * (12.0 * B + p * (20.0 * C + p * 30.0 * D))),
    ]
}

/// Weight samples with the radial derivatives the virial identities need.
#[derive(Debug, Clone)]
pub struct WeightSet {
    pub radius: f64,
    pub family: WeightFamily,
    pub phi: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub laplacian: Vec<f64>,
    pub bilaplacian: Vec<f64>,
}

/// Builds `φ_R` on `grid` with analytic derivatives:
/// `Δφ = φ'' + 2φ'/r`, `Δ²φ = φ'''' + 4φ'''/r`.
pub fn truncated_weight(radius: f64, family: WeightFamily, grid: &RadialGrid) -> Result<WeightSet> {
    let reach = match family {
        WeightFamily::Quadratic => 3.0 * radius,
        WeightFamily::Bump => 2.0 * radius,
    };
    if !(radius > 0.0 && reach < grid.r_max()) {
        return Err(Error::Range(format!("weight radius {radius} needs {reach} < r_max = {}", grid.r_max())));
    }
    let n = grid.n();
    let mut w = WeightSet {
        radius,
        family,
        phi: Vec::with_capacity(n),
        d1: Vec::with_capacity(n),
        d2: Vec::with_capacity(n),
        laplacian: Vec::with_capacity(n),
        bilaplacian: Vec::with_capacity(n),
    };
    let r2 = radius * radius;
    for &r in grid.nodes() {
        let (phi, d1, d2, lap, bilap) = match family {
            WeightFamily::Quadratic => {
                let [f, f1, f2, f3, f4] = quadratic_profile(r / radius);
                let (d1, d3, d4) = (radius * f1, f3 / radius, f4 / r2);
                (r2 * f, d1, f2, f2 + 2.0 * d1 / r, d4 + 4.0 * d3 / r)
            }
            WeightFamily::Bump => {
                let q = r * r / r2;
                let [s, s1, s2, s3, s4] = smoothstep9(q - 1.0);
                let (f, f1, f2, f3, f4) = (1.0 - s, -s1, -s2, -s3, -s4);
                (
                    r2 * f,
                    2.0 * r * f1,
                    2.0 * f1 + 4.0 * q * f2,
                    6.0 * f1 + 4.0 * q * f2,
                    (60.0 * f2 + 80.0 * q * f3 + 16.0 * q * q * f4) / r2,
                )
            }
        };
        w.phi.push(phi);
        w.d1.push(d1);
        w.d2.push(d2);
        w.laplacian.push(lap);
        w.bilaplacian.push(bilap);
    }
    w.verify(grid)?;
    Ok(w)
}

impl WeightSet {
    fn verify(&self, grid: &RadialGrid) -> Result<()> {
        let r = self.radius;
        for (j, &x) in grid.nodes().iter().enumerate() {
            let bad = |what: &str| Err(Error::InternalConsistency(format!("weight R = {r}: {what} fails at r = {x}")));
            match self.family {
                WeightFamily::Quadratic => {
                    if self.d2[j] > 2.0 + 1e-12 {
                        return bad("φ'' <= 2");
                    }
                    if x <= r
                        && ((self.phi[j] - x * x).abs() > 1e-9 * x * x
                            || (self.laplacian[j] - 6.0).abs() > 1e-9
                            || self.bilaplacian[j] != 0.0)
                    {
                        return bad("φ_R = r², Δφ_R = 6, Δ²φ_R = 0 inside R");
                    }
                    if x >= 3.0 * r && (self.d1[j] != 0.0 || self.laplacian[j] != 0.0) {
                        return bad("constant beyond 3R");
                    }
                }
                WeightFamily::Bump => {
                    if self.phi[j] < 0.0 || self.phi[j] > r * r * (1.0 + 1e-15) {
                        return bad("0 <= φ_R <= R²");
                    }
                }
            }
        }
        Ok(())
    }

    /// `sup φ_R`.
    pub fn max_value(&self) -> f64 {
        match self.family {
            WeightFamily::Quadratic => self.radius * self.radius * 27.0 / 7.0,
            WeightFamily::Bump => self.radius * self.radius,
        }
    }
}

pub fn virial_value(field: &RadialField, w: &WeightSet) -> f64 {
    field.values().iter().zip(field.grid().weights()).zip(&w.phi).map(|((u, q), p)| q * p * u.norm_sqr()).sum()
}

/// `-2 Im ∫ φ_R' ∂_r ū u`.
pub fn virial_first_derivative(field: &RadialField, w: &WeightSet) -> f64 {
    first_derivative_with(field, &field.radial_derivative(), w)
}

pub(crate) fn first_derivative_with(field: &RadialField, du: &[Complex64], w: &WeightSet) -> f64 {
    let s: f64 = field
        .values()
        .iter()
        .zip(du)
        .zip(field.grid().weights())
        .zip(&w.d1)
        .map(|(((u, du), q), p)| q * p * (du.conj() * u).im)
        .sum();
    -2.0 * s
}

/// `4∫φ''|∂_r u|² - ∫Δ²φ|u|² - 4/3 ∫Δφ|u|⁶ + ∫Δφ|u|⁴`.
pub fn virial_second_derivative(field: &RadialField, w: &WeightSet) -> f64 {
    second_derivative_with(field, &field.radial_derivative(), w)
}

pub(crate) fn second_derivative_with(field: &RadialField, du: &[Complex64], w: &WeightSet) -> f64 {
    let mut s = 0.0;
    for j in 0..field.grid().n() {
        let q = field.grid().weights()[j];
        let a = field.values()[j].norm_sqr();
        let lap = w.laplacian[j];
        s += q * (4.0 * w.d2[j] * du[j].norm_sqr() - w.bilaplacian[j] * a - 4.0 / 3.0 * lap * a * a * a + lap * a * a);
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub t: f64,
    pub condition: String,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupCertificate {
    pub delta1: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub samples_checked: usize,
    pub violations: Vec<Violation>,
    /// First and last sample time meeting the concavity bound.
    pub window: Option<[f64; 2]>,
    /// Largest ε over the checked samples for which
    /// `∂²V_R ≤ 48E - (16-ε)‖∇u‖² - 6‖u‖⁴ + ε²` holds.
    pub sharpest_eps: f64,
    pub pass: bool,
}

/// Second derivatives of `values(times)` at interior samples by the
/// three-point rule on a possibly uneven mesh; the ends are `None`.
pub fn second_differences(times: &[f64], values: &[f64]) -> Vec<Option<f64>> {
    let n = times.len();
    (0..n)
        .map(|i| {
            if i == 0 || i + 1 >= n {
                return None;
            }
            let (h1, h2) = (times[i] - times[i - 1], times[i + 1] - times[i]);
            Some(2.0 * ((values[i + 1] - values[i]) / h2 - (values[i] - values[i - 1]) / h1) / (h1 + h2))
        })
        .collect()
}

/// First derivatives at interior samples by the three-point rule.
pub fn first_differences(times: &[f64], values: &[f64]) -> Vec<Option<f64>> {
    let n = times.len();
    (0..n)
        .map(|i| {
            if i == 0 || i + 1 >= n {
                return None;
            }
            let (h1, h2) = (times[i] - times[i - 1], times[i + 1] - times[i]);
            Some(
                (h1 * h1 * values[i + 1] - h2 * h2 * values[i - 1] + (h2 * h2 - h1 * h1) * values[i])
                    / (h1 * h2 * (h1 + h2)),
            )
        })
        .collect()
}

/// Number of leading samples treated as start-up transient.
pub fn transient_samples(len: usize, fraction: f64) -> usize {
    ((len as f64) * fraction).ceil() as usize
}

/// Checks, on every sample after the first 5%, that
/// `K ≤ -6(m - E)`, `‖∇u‖² > 3m` and the measured `∂²_t V_R ≤ -24 δ₁ m`
/// with `δ₁ = 1 - E(u₀)/m`. Each recorded `R` is tried in order and the
/// first one that passes is reported; otherwise the last one.
pub fn blowup_certificate(record: &TrajectoryRecord, m: f64) -> Result<BlowupCertificate> {
    let first = record.reports.first().ok_or_else(|| Error::Precondition("empty trajectory".into()))?;
    if !(first.k < 0.0) {
        return Err(Error::Precondition(format!("initial K = {} is not negative", first.k)));
    }
    if !(first.energy < m) {
        return Err(Error::Precondition(format!("initial E = {} is not below m = {m}", first.energy)));
    }
    if record.virial.is_empty() {
        return Err(Error::Precondition("trajectory has no virial series".into()));
    }
    let delta1 = 1.0 - first.energy / m;
    let skip = transient_samples(record.times.len(), 0.05);
    let mut best = None;
    for series in &record.virial {
        let cert = certify_one(record, series, m, delta1, skip);
        let pass = cert.pass;
        best = Some(cert);
        if pass {
            break;
        }
    }
    Ok(best.expect("at least one virial series"))
}

fn certify_one(
    record: &TrajectoryRecord,
    series: &crate::diagnostics::VirialSeries,
    m: f64,
    delta1: f64,
    skip: usize,
) -> BlowupCertificate {
    let fd = second_differences(&record.times, &series.value);
    let mut violations = Vec::new();
    let mut checked = 0;
    let mut window: Option<[f64; 2]> = None;
    let mut sharpest: f64 = 0.0;
    let concavity = -24.0 * delta1 * m;
    for i in skip..record.times.len() {
        let r = &record.reports[i];
        let t = record.times[i];
        checked += 1;
        let kb = -6.0 * (m - r.energy);
        if !(r.k <= kb) {
            violations.push(Violation { t, condition: "K <= -6(m-E)".into(), value: r.k, bound: kb });
        }
        if !(r.grad_sq > 3.0 * m) {
            violations.push(Violation { t, condition: "grad2 > 3m".into(), value: r.grad_sq, bound: 3.0 * m });
        }
        if let Some(d2) = fd[i] {
            if d2 <= concavity {
                window = Some([window.map_or(t, |w| w[0]), t]);
            } else {
                violations.push(Violation { t, condition: "d2VR <= -24 delta1 m".into(), value: d2, bound: concavity });
            }
            let main = 48.0 * r.energy - 16.0 * r.grad_sq - 6.0 * r.l4_4;
            let d = d2 - main;
            if d > 0.0 {
                let g = r.grad_sq;
                sharpest = sharpest.max(0.5 * (-g + (g * g + 4.0 * d).sqrt()));
            }
        }
    }
    let pass = violations.is_empty() && window.is_some();
    BlowupCertificate {
        delta1,
        radius: series.radius,
        samples_checked: checked,
        violations,
        window,
        sharpest_eps: sharpest,
        pass,
    }
}
