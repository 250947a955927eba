//! The Aubin–Talenti ground state, the threshold `m`, cut-off data on either
//! side of the scaling constraint, and the root of `K` along the
//! mass-invariant dilation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{functional_report, profile_norms_on_grid, FunctionalReport, Norms};
use crate::grid::{make_grid, sample, scale_field, RadialField, RadialGrid};
use crate::profile::{cutoff, AnalyticProfile, Shape};

/// `m = sqrt(3) pi^2 / 4`.
pub fn threshold_closed_form() -> f64 {
    3f64.sqrt() * PI * PI / 4.0
}

/// Samples `W(r) = (1 + r^2/3)^{-1/2}`.
pub fn aubin_talenti(grid: &RadialGrid) -> RadialField {
    sample(&AnalyticProfile::aubin_talenti(), grid).expect("W is finite everywhere")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCertificate {
    pub m_closed_form: f64,
    pub m_quadrature: f64,
    pub sobolev_constant: f64,
    pub discrepancy: f64,
}

/// Threshold certificate on the default grid `r_max = 100`, `n = 4095`.
pub fn threshold_m() -> Result<ThresholdCertificate> {
    threshold_m_on(&make_grid(100.0, 4095)?)
}

/// `m` as `E^c(W)` by tail-corrected quadrature of `W` on `grid`, with the
/// Sobolev quotient `‖W‖_6 / ‖∇W‖_2` from the same norms.
pub fn threshold_m_on(grid: &RadialGrid) -> Result<ThresholdCertificate> {
    let n = profile_norms_on_grid(&AnalyticProfile::aubin_talenti(), grid);
    let m_closed_form = threshold_closed_form();
    let m_quadrature = n.critical_energy();
    let sobolev_constant = n.l6_6.powf(1.0 / 6.0) / n.grad_sq.sqrt();
    let cert = ThresholdCertificate {
        m_closed_form,
        m_quadrature,
        sobolev_constant,
        discrepancy: (m_quadrature - m_closed_form).abs(),
    };
    if !(cert.discrepancy <= 1e-8) {
        return Err(Error::Calibration(format!(
            "quadrature threshold {m_quadrature} differs from {m_closed_form} by {:e}",
            cert.discrepancy
        )));
    }
    let from_sobolev = sobolev_constant.powi(-3) / 3.0;
    if !((from_sobolev - m_closed_form).abs() <= 1e-10 * m_closed_form) {
        return Err(Error::Calibration(format!("Sobolev relation gives {from_sobolev}, closed form {m_closed_form}")));
    }
    Ok(cert)
}

/// Radial cutoff `χ_R(x) = χ(|x|/R)`: 1 inside `R`, 0 outside `2R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    #[serde(rename = "R")]
    pub radius: f64,
}

impl CutoffSpec {
    pub fn value(&self, r: f64) -> f64 {
        cutoff(r / self.radius).0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    #[serde(rename = "K_plus")]
    KPlus,
    #[serde(rename = "K_minus")]
    KMinus,
    #[serde(rename = "above_threshold")]
    AboveThreshold,
    #[serde(rename = "zero")]
    Zero,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::KPlus => "K_plus",
            Classification::KMinus => "K_minus",
            Classification::AboveThreshold => "above_threshold",
            Classification::Zero => "zero",
        })
    }
}

pub fn classify_norms(n: &Norms, m: f64) -> Classification {
    if n.l2_sq == 0.0 && n.grad_sq == 0.0 {
        Classification::Zero
    } else if n.energy() >= m {
        Classification::AboveThreshold
    } else if n.k() >= 0.0 {
        Classification::KPlus
    } else {
        Classification::KMinus
    }
}

pub fn classify(field: &RadialField) -> Classification {
    classify_norms(&crate::functionals::norms(field), threshold_closed_form())
}

/// Dilation length `|ε|^3` used for the cut-off data.
pub fn k_data_length(eps: f64) -> f64 {
    eps.abs().powi(3)
}

/// `(1+ε) λ^{-1/2} χ_R(x/λ) W(x/λ)` with `λ = |ε|^3`.
pub fn k_data_profile(eps: f64, radius: f64) -> Result<AnalyticProfile> {
    check_eps(eps)?;
    let lambda = k_data_length(eps);
    AnalyticProfile::new(Shape::TruncatedAubinTalenti { cutoff: radius }, (1.0 + eps) / lambda.sqrt(), lambda)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps != 0.0 && eps.abs() <= 0.25) {
        return Err(Error::Precondition(format!("need 0 < |eps| <= 0.25, got {eps}")));
    }
    Ok(())
}

/// Which sign condition, if any, the norms violate for the side chosen by `eps`.
fn sign_violation(eps: f64, n: &Norms, m: f64) -> Option<String> {
    let (e, k) = (n.energy(), n.k());
    if !(e < m) {
        return Some(format!("E < m fails: E = {e}, m = {m}"));
    }
    if eps < 0.0 && !(k > 0.0) {
        return Some(format!("K > 0 fails: K = {k}"));
    }
    if eps > 0.0 && !(k < 0.0) {
        return Some(format!("K < 0 fails: K = {k}"));
    }
    None
}

/// Candidate cutoff radii searched in order.
pub const CUTOFF_CANDIDATES: [f64; 9] = [16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0, 2048.0, 4096.0];

/// Smallest candidate radius whose exact profile norms meet the sign
/// conditions for `eps`.
pub fn minimal_cutoff(eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let m = threshold_closed_form();
    let mut last = String::new();
    for &r in &CUTOFF_CANDIDATES {
        match sign_violation(eps, &k_data_profile(eps, r)?.norms(), m) {
            None => return Ok(r),
            Some(v) => last = v,
        }
    }
    Err(Error::Construction(format!("no cutoff up to 4096 works for eps = {eps}: {last}")))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KData {
    pub eps: f64,
    #[serde(rename = "R")]
    pub cutoff_radius: f64,
    pub length: f64,
    pub classification: Classification,
    pub functionals: FunctionalReport,
    #[serde(skip)]
    pub field: RadialField,
}

/// Samples the cut-off data on `grid` and verifies the sign conditions on the
/// sampled field. With `radius = None` the candidates are tried upward from
/// the smallest one that works analytically.
pub fn make_k_data(eps: f64, radius: Option<f64>, grid: &RadialGrid) -> Result<KData> {
    check_eps(eps)?;
    let m = threshold_closed_form();
    let candidates: Vec<f64> = match radius {
        Some(r) => vec![r],
        None => {
            let start = minimal_cutoff(eps)?;
            CUTOFF_CANDIDATES.iter().copied().filter(|&r| r >= start).collect()
        }
    };
    let mut last = String::new();
    for r in candidates {
        let profile = k_data_profile(eps, r)?;
        let support = profile.support().unwrap_or(f64::INFINITY);
        if support >= grid.r_max() {
            last = format!("support 2 R |eps|^3 = {support} does not fit inside r_max = {} at R = {r}", grid.r_max());
            break;
        }
        let field = sample(&profile, grid)?;
        let report = functional_report(&field)?;
        match sign_violation(eps, &report.norms(), m) {
            None => {
                return Ok(KData {
                    eps,
                    cutoff_radius: r,
                    length: profile.length,
                    classification: classify_norms(&report.norms(), m),
                    functionals: report,
                    field,
                })
            }
            Some(v) => last = format!("{v} at R = {r}"),
        }
    }
    Err(Error::Construction(format!("eps = {eps}: {last}")))
}

/// `K(e^{3λ}φ(e^{2λ}·)) = 2e^{4λ}G - 2e^{12λ}L6 + 3/2 e^{6λ}L4` and its λ-derivative.
fn k_along_scaling(n: &Norms, l: f64) -> (f64, f64) {
    let (a, b, c) = ((4.0 * l).exp(), (12.0 * l).exp(), (6.0 * l).exp());
    (
        2.0 * a * n.grad_sq - 2.0 * b * n.l6_6 + 1.5 * c * n.l4_4,
        8.0 * a * n.grad_sq - 24.0 * b * n.l6_6 + 9.0 * c * n.l4_4,
    )
}

/// Root `λ₀ ≤ 0` of `K` along the `(3,-2)` dilation, by bisection on
/// `[-5, 0]` to `1e-12` followed by one Newton step.
pub fn zero_k_scaling(n: &Norms) -> Result<f64> {
    let (k0, _) = k_along_scaling(n, 0.0);
    if k0.abs() <= 1e-10 * n.grad_sq {
        return Ok(0.0);
    }
    if k0 > 0.0 {
        return Err(Error::Precondition(format!("K must be negative, got {k0}")));
    }
    let (mut lo, mut hi) = (-5.0, 0.0);
    if k_along_scaling(n, lo).0 <= 0.0 {
        return Err(Error::Bracket("K keeps its sign on [-5, 0]".into()));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if k_along_scaling(n, mid).0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let l = 0.5 * (lo + hi);
    let (k, dk) = k_along_scaling(n, l);
    Ok(if dk != 0.0 { l - k / dk } else { l })
}

/// `(λ₀, φ^{λ₀})` with `K(φ^{λ₀}) = 0`, resampled onto the same grid.
pub fn rescale_to_zero_k(field: &RadialField) -> Result<(f64, RadialField)> {
    let n = crate::functionals::norms(field);
    if n.l2_sq == 0.0 {
        return Err(Error::Precondition("field must be nonzero".into()));
    }
    let l = zero_k_scaling(&n)?;
    let rescaled = scale_field(field, l, 3.0, field.grid())?;
    Ok((l, rescaled))
}
