//! Seeded random-field suite for the variational identities and
//! inequalities around the threshold `m`.
//!
//! Fields are kept as their four norm integrals: every functional in the
//! suite is a combination of them, and both dilation families act on them
//! exactly, so rescalings cost nothing and add no resampling error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{norms, Norms};
use crate::grid::{make_grid, RadialField};
use crate::ground_state::{k_data_profile, threshold_closed_form, zero_k_scaling, CUTOFF_CANDIDATES};
use crate::Complex64;

/// Relative tolerance for the algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Inequality tolerance, in units of `m`.
pub const INEQUALITY_TOL: f64 = 1e-9;
/// Slack for `H ≥ m` on fields with `K ≤ 0`.
pub const MINIMIZATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    TruncatedGroundState,
    ModulatedGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Rescaling {
    None,
    /// `e^{3λ} φ(e^{2λ} x)`, mass preserving.
    MassPreserving {
        lambda: f64,
    },
    /// `e^{λ} φ(e^{2λ} x)`, preserving `‖∇φ‖²` and `‖φ‖⁶`.
    Critical {
        lambda: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestField {
    pub kind: FieldKind,
    pub rescaling: Rescaling,
    pub norms: Norms,
}

fn modulated_gaussian(rng: &mut ChaCha8Rng) -> Result<Norms> {
    let w = (rng.gen_range(0.3f64.ln()..3f64.ln())).exp();
    let amp = rng.gen_range(0.05..1.5);
    let depth = rng.gen_range(-0.5..0.5);
    let freq = rng.gen_range(0.0..6.0);
    let chirp = rng.gen_range(-1.0..1.0);
    let grid = make_grid(10.0 * w, 2047)?;
    let values = grid
        .nodes()
        .iter()
        .map(|&r| {
            let s = r / w;
            Complex64::from_polar(amp * (-s * s).exp() * (1.0 + depth * (freq * s).cos()), chirp * s * s)
        })
        .collect();
    Ok(norms(&RadialField::new(grid, values)?))
}

fn truncated_ground_state(rng: &mut ChaCha8Rng) -> Result<Norms> {
    let mag = rng.gen_range(0.01..0.25);
    let eps = if rng.gen_bool(0.5) { mag } else { -mag };
    let radius = CUTOFF_CANDIDATES[rng.gen_range(0..5)];
    Ok(k_data_profile(eps, radius)?.norms())
}

/// Deterministic stream of nonzero fields with `E < m`.
pub struct FieldFamily {
    rng: ChaCha8Rng,
    m: f64,
}

impl FieldFamily {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), m: threshold_closed_form() }
    }

    fn draw(&mut self) -> Result<TestField> {
        let kind = if self.rng.gen_bool(0.4) { FieldKind::TruncatedGroundState } else { FieldKind::ModulatedGaussian };
        let base = match kind {
            FieldKind::TruncatedGroundState => truncated_ground_state(&mut self.rng)?,
            FieldKind::ModulatedGaussian => modulated_gaussian(&mut self.rng)?,
        };
        let rescaling = match self.rng.gen_range(0..3) {
            0 => Rescaling::None,
            1 => Rescaling::MassPreserving { lambda: self.rng.gen_range(-0.5..0.75) },
            _ => Rescaling::Critical { lambda: self.rng.gen_range(-0.5..0.75) },
        };
        let norms = match rescaling {
            Rescaling::None => base,
            Rescaling::MassPreserving { lambda } => base.rescaled(lambda, 3.0),
            Rescaling::Critical { lambda } => base.rescaled(lambda, 1.0),
        };
        Ok(TestField { kind, rescaling, norms })
    }

    /// Next field below the threshold; gives up after 10 000 rejections.
    pub fn next_field(&mut self) -> Result<TestField> {
        for _ in 0..10_000 {
            let f = self.draw()?;
            if f.norms.grad_sq > 0.0 && f.norms.energy() < self.m {
                return Ok(f);
            }
        }
        Err(Error::Construction("random family produced no field below the threshold".into()))
    }
}

/// Tally for one lemma. `worst_margin` is the smallest
/// `(bound - value)` seen, scaled so that `>= -tolerance` passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaTally {
    pub name: String,
    pub hard: bool,
    pub tolerance: f64,
    pub checked: usize,
    pub passed: usize,
    pub worst_margin: Option<f64>,
}

impl LemmaTally {
    fn new(name: &str, hard: bool, tolerance: f64) -> Self {
        Self { name: name.into(), hard, tolerance, checked: 0, passed: 0, worst_margin: None }
    }

    fn record(&mut self, margin: f64) {
        self.checked += 1;
        if margin >= -self.tolerance {
            self.passed += 1;
        }
        self.worst_margin = Some(self.worst_margin.map_or(margin, |w| w.min(margin)));
    }

    pub fn violations(&self) -> usize {
        self.checked - self.passed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub count: usize,
    pub m: f64,
    pub k_nonnegative: usize,
    pub k_negative: usize,
    pub lemmas: Vec<LemmaTally>,
    /// Smallest `M + E` over the `K = 0` rescalings; recorded, not asserted.
    pub inf_mass_plus_energy_on_nehari: Option<f64>,
    pub all_hard_pass: bool,
}

impl SuiteReport {
    pub fn lemma(&self, name: &str) -> Option<&LemmaTally> {
        self.lemmas.iter().find(|l| l.name == name)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Runs every check over `count` fields from `FieldFamily::new(seed)`.
pub fn verify_variational(seed: u64, count: usize) -> Result<SuiteReport> {
    if count == 0 {
        return Err(Error::Config("count must be at least 1".into()));
    }
    let m = threshold_closed_form();
    let mut identities = LemmaTally::new("structure_identity", true, IDENTITY_TOL);
    let mut h_identity = LemmaTally::new("h_identity", true, IDENTITY_TOL);
    let mut uniform = LemmaTally::new("uniform_bound", true, INEQUALITY_TOL);
    let mut free_energy = LemmaTally::new("free_energy_equivalence", true, INEQUALITY_TOL);
    let mut minimization = LemmaTally::new("minimization_h", true, MINIMIZATION_TOL);
    let mut kc = LemmaTally::new("k_critical_below_k", true, 0.0);
    let mut positivity = LemmaTally::new("positivity_near_zero", true, 0.0);
    let mut critical_limit = LemmaTally::new("critical_scaling_limit", true, IDENTITY_TOL);
    let mut h_monotone = LemmaTally::new("h_monotone_under_dilation", true, 0.0);
    let mut nehari = LemmaTally::new("zero_k_rescaling", true, MINIMIZATION_TOL);
    let mut inf_me: Option<f64> = None;
    let (mut k_pos, mut k_neg) = (0, 0);

    let mut family = FieldFamily::new(seed);
    for _ in 0..count {
        let n = family.next_field()?.norms;
        let (g, l4, l6) = (n.grad_sq, n.l4_4, n.l6_6);
        let (e, k, h) = (n.energy(), n.k(), n.h());

        identities.record(-rel(6.0 * e - k, g + l6));
        h_identity.record(-rel(h, e - k / 6.0));
        kc.record(k - n.k_critical());

        let gap = m - e;
        if k < 0.0 {
            k_neg += 1;
            uniform.record((-6.0 * gap - k) / m);
            minimization.record((h - m) / m);
            match zero_k_scaling(&n) {
                Ok(l0) => {
                    let z = n.rescaled(l0, 3.0);
                    // E = H on K = 0, and that is at least m
                    nehari.record((z.energy() - m).min(z.h() - m) / m);
                    let me = z.mass() + z.energy();
                    inf_me = Some(inf_me.map_or(me, |v: f64| v.min(me)));
                }
                Err(_) => nehari.record(f64::NEG_INFINITY),
            }
        } else {
            k_pos += 1;
            let bound = (6.0 * gap).min(2.0 / 3.0 * g + 0.5 * l4);
            uniform.record((k - bound) / m);
            let lower = (g + l6) / 6.0;
            let upper = 0.5 * g + 0.25 * l4;
            free_energy.record((e - lower).min(upper - e) / m);
        }

        // dilate until ‖∇φ‖² = 0.01 m, far below 3m
        let l_small = 0.25 * (0.01 * m / g).ln();
        positivity.record(n.rescaled(l_small, 3.0).k());

        let far = n.rescaled(20.0, 1.0);
        let drift = (far.k() - n.k_critical()).abs().max((far.h() - h).abs()) / (g + l6);
        critical_limit.record(0.0 - drift);
        let h_steps: Vec<f64> = (-4..=4).map(|i| n.rescaled(0.25 * i as f64, 3.0).h()).collect();
        let worst_step = h_steps.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        h_monotone.record(worst_step);
    }

    let lemmas = vec![
        identities,
        h_identity,
        uniform,
        free_energy,
        minimization,
        kc,
        positivity,
        critical_limit,
        h_monotone,
        nehari,
    ];
    let all_hard_pass = lemmas.iter().filter(|l| l.hard).all(|l| l.violations() == 0);
    Ok(SuiteReport {
        seed,
        count,
        m,
        k_nonnegative: k_pos,
        k_negative: k_neg,
        lemmas,
        inf_mass_plus_energy_on_nehari: inf_me,
        all_hard_pass,
    })
}
