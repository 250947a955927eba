//! Strang-split time integration of `i u_t + Δu = -|u|⁴u + |u|²u` for radial
//! data: exact linear flow in the sine basis of `r u`, exact pointwise phase
//! rotation for the nonlinearity.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    exterior_energy_with, scattering_verdict, strichartz_powers, StopReason, Thresholds, TrajectoryRecord, Verdict,
};
use crate::error::{Error, Result};
use crate::functionals::{FunctionalReport, Norms};
use crate::grid::{make_grid, sample, RadialField, RadialGrid};
use crate::ground_state::{make_k_data, threshold_closed_form};
use crate::profile::AnalyticProfile;
use crate::transform::Workspace;
use crate::virial::{second_derivative_with, truncated_weight, virial_value, WeightFamily, WeightSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonlinearFlags {
    /// Focusing quintic term `-|u|⁴u`.
    pub f1_on: bool,
    /// Defocusing cubic term `|u|²u`.
    pub f2_on: bool,
}

impl NonlinearFlags {
    pub const BOTH: Self = Self { f1_on: true, f2_on: true };
    pub const NONE: Self = Self { f1_on: false, f2_on: false };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adapt {
    #[default]
    None,
    GradientCapped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r_max: f64,
    pub n: usize,
}

/// Smooth damping `exp(-strength · ((r - r_a)/(r_max - r_a))² · dt)` on the
/// outer `width` of the domain, applied once per step. Breaks mass
/// conservation by design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Absorber {
    pub width: f64,
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// Cut-off ground state on the side of the constraint set by `eps`.
    KData {
        eps: f64,
        #[serde(rename = "R", default)]
        radius: Option<f64>,
    },
    Profile {
        profile: AnalyticProfile,
    },
    /// Snapshot CSV on the configured grid.
    Snapshot {
        path: String,
    },
}

fn default_true() -> bool {
    true
}
fn default_one() -> f64 {
    1.0
}
fn default_c_adapt() -> f64 {
    0.1
}
fn default_gradient_factor() -> f64 {
    1e3
}

/// Run configuration. Lengths (`grid.r_max`, the radius lists, the absorber
/// width) are in units of `length_scale`, times (`dt0`, `t_end`,
/// `blowup_dt_floor`) in units of `length_scale²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub schema: u32,
    pub grid: GridSpec,
    #[serde(default = "default_one")]
    pub length_scale: f64,
    pub dt0: f64,
    pub t_end: f64,
    #[serde(default = "default_true")]
    pub f1_on: bool,
    #[serde(default = "default_true")]
    pub f2_on: bool,
    #[serde(default)]
    pub adapt: Adapt,
    #[serde(default = "default_c_adapt")]
    pub c_adapt: f64,
    #[serde(default = "default_gradient_factor")]
    pub blowup_gradient_factor: f64,
    pub blowup_dt_floor: f64,
    pub output_every: usize,
    #[serde(rename = "virial_R_list", default)]
    pub virial_radii: Vec<f64>,
    #[serde(rename = "exterior_R_list", default)]
    pub exterior_radii: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Relative size of a seeded smooth perturbation added to the initial data.
    #[serde(default)]
    pub noise_amplitude: f64,
    #[serde(default)]
    pub absorber: Option<Absorber>,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub initial: Option<InitialData>,
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: SimConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.schema != 1 {
            return bad(format!("unsupported schema {}", self.schema));
        }
        let positive = [
            ("length_scale", self.length_scale),
            ("dt0", self.dt0),
            ("t_end", self.t_end),
            ("c_adapt", self.c_adapt),
            ("blowup_gradient_factor", self.blowup_gradient_factor),
            ("blowup_dt_floor", self.blowup_dt_floor),
            ("thresholds.decay_factor", self.thresholds.decay_factor),
            ("thresholds.rate_floor", self.thresholds.rate_floor),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.output_every == 0 {
            return bad("output_every must be at least 1".into());
        }
        if !(self.thresholds.late_fraction > 0.0 && self.thresholds.late_fraction <= 1.0) {
            return bad("thresholds.late_fraction must lie in (0, 1]".into());
        }
        if !(self.noise_amplitude >= 0.0) {
            return bad("noise_amplitude must be non-negative".into());
        }
        make_grid(self.grid.r_max, self.grid.n)?;
        Ok(())
    }

    pub fn flags(&self) -> NonlinearFlags {
        NonlinearFlags { f1_on: self.f1_on, f2_on: self.f2_on }
    }

    fn time_unit(&self) -> f64 {
        self.length_scale * self.length_scale
    }

    /// The grid in absolute units.
    pub fn physical_grid(&self) -> Result<RadialGrid> {
        make_grid(self.grid.r_max * self.length_scale, self.grid.n)
    }

    /// Builds the configured initial field on [`physical_grid`](Self::physical_grid).
    pub fn initial_field(&self) -> Result<RadialField> {
        let grid = self.physical_grid()?;
        let init = self.initial.as_ref().ok_or_else(|| Error::Config("config has no `initial` section".into()))?;
        let field = match init {
            InitialData::KData { eps, radius } => make_k_data(*eps, *radius, &grid)?.field,
            InitialData::Profile { profile } => sample(profile, &grid)?,
            InitialData::Snapshot { path } => {
                let f = crate::grid::read_snapshot(path)?;
                if f.grid().n() != grid.n() || (f.grid().r_max() - grid.r_max()).abs() > 1e-9 * grid.r_max() {
                    return Err(Error::Config(format!("snapshot {path} is not on the configured grid")));
                }
                RadialField::new(grid.clone(), f.into_values())?
            }
        };
        Ok(perturb(field, self.noise_amplitude, self.seed))
    }
}

/// Adds `amplitude · max|u|` times a seeded sum of four complex Gaussians.
fn perturb(field: RadialField, amplitude: f64, seed: u64) -> RadialField {
    if amplitude == 0.0 {
        return field;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let peak = field.max_modulus();
    let r_max = field.grid().r_max();
    let bumps: Vec<(Complex64, f64)> = (0..4)
        .map(|_| {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (c, r_max * rng.gen_range(0.01..0.1))
        })
        .collect();
    let grid = field.grid().clone();
    let values = field
        .values()
        .iter()
        .zip(grid.nodes())
        .map(|(u, r)| {
            let p: Complex64 = bumps.iter().map(|(c, s)| c * (-(r / s) * (r / s)).exp()).sum();
            u + amplitude * peak * p
        })
        .collect();
    RadialField::from_raw(grid, values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveState {
    pub t: f64,
    pub field: RadialField,
    pub step_count: u64,
    pub dt_current: f64,
}

/// Signals a state that stopped being finite during a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonFinite {
    pub t: f64,
}

/// Linear and nonlinear sub-flows with reusable buffers.
pub struct Stepper {
    grid: RadialGrid,
    flags: NonlinearFlags,
    ws: Workspace,
    phase_dt: f64,
    phases: Vec<Complex64>,
    absorber: Option<Vec<f64>>,
}

impl Stepper {
    pub fn new(grid: &RadialGrid, flags: NonlinearFlags) -> Self {
        Self {
            grid: grid.clone(),
            flags,
            ws: grid.transform().workspace(),
            phase_dt: f64::NAN,
            phases: Vec::new(),
            absorber: None,
        }
    }

    /// Per-node damping rates `σ(r)` for the absorbing layer.
    pub fn with_absorber(mut self, a: Option<Absorber>) -> Self {
        self.absorber = a.map(|a| {
            let r_max = self.grid.r_max();
            let start = r_max - a.width;
            self.grid
                .nodes()
                .iter()
                .map(|&r| if r > start { a.strength * ((r - start) / a.width).powi(2) } else { 0.0 })
                .collect()
        });
        self
    }

    /// `e^{iτΔ}` on `values`.
    pub fn linear(&mut self, values: &mut [Complex64], tau: f64) {
        if tau == 0.0 {
            return;
        }
        if tau != self.phase_dt {
            let norm = 2.0 / (self.grid.n() + 1) as f64;
            self.phases = self.grid.wavenumbers().iter().map(|k| Complex64::from_polar(norm, -k * k * tau)).collect();
            self.phase_dt = tau;
        }
        let nodes = self.grid.nodes();
        for (u, r) in values.iter_mut().zip(nodes) {
            *u *= r;
        }
        let t = self.grid.transform();
        t.dst_in_place(values, &mut self.ws);
        for (b, p) in values.iter_mut().zip(&self.phases) {
            *b *= p;
        }
        t.dst_in_place(values, &mut self.ws);
        for (u, r) in values.iter_mut().zip(nodes) {
            *u /= r;
        }
    }

    /// `u ← u · exp(iτ(|u|⁴[f1] - |u|²[f2]))`; returns `max(|u|⁴ + |u|²)`.
    pub fn nonlinear(&self, values: &mut [Complex64], tau: f64) -> f64 {
        let (c5, c3) = (if self.flags.f1_on { 1.0 } else { 0.0 }, if self.flags.f2_on { 1.0 } else { 0.0 });
        let mut peak: f64 = 0.0;
        for u in values.iter_mut() {
            let a = u.norm_sqr();
            peak = peak.max(a * a + a);
            if c5 != 0.0 || c3 != 0.0 {
                *u *= Complex64::cis(tau * (c5 * a * a - c3 * a));
            }
        }
        peak
    }

    /// One Strang step; returns `max(|u|⁴ + |u|²)` after it, NaN if the state
    /// is no longer finite.
    pub fn step(&mut self, values: &mut [Complex64], dt: f64) -> f64 {
        self.nonlinear(values, 0.5 * dt);
        self.linear(values, dt);
        let peak = self.nonlinear(values, 0.5 * dt);
        if let Some(sigma) = &self.absorber {
            for (u, s) in values.iter_mut().zip(sigma) {
                *u *= (-s * dt).exp();
            }
        }
        if peak.is_finite() {
            peak
        } else {
            f64::NAN
        }
    }
}

/// Exact free Schrödinger flow on the discretized domain.
pub fn linear_propagator(field: &RadialField, tau: f64) -> RadialField {
    let mut v = field.values().to_vec();
    Stepper::new(field.grid(), NonlinearFlags::NONE).linear(&mut v, tau);
    RadialField::from_raw(field.grid().clone(), v)
}

/// Exact solution of `i u_t = -|u|⁴u·[f1] + |u|²u·[f2]` at frozen modulus.
pub fn nonlinear_phase(field: &RadialField, tau: f64, flags: NonlinearFlags) -> RadialField {
    let mut v = field.values().to_vec();
    Stepper::new(field.grid(), flags).nonlinear(&mut v, tau);
    RadialField::from_raw(field.grid().clone(), v)
}

/// Half nonlinear, full linear, half nonlinear.
pub fn step(state: &EvolveState, dt: f64, flags: NonlinearFlags) -> std::result::Result<EvolveState, NonFinite> {
    let mut v = state.field.values().to_vec();
    let peak = Stepper::new(state.field.grid(), flags).step(&mut v, dt);
    let t = state.t + dt;
    if peak.is_nan() {
        return Err(NonFinite { t });
    }
    Ok(EvolveState {
        t,
        field: RadialField::from_raw(state.field.grid().clone(), v),
        step_count: state.step_count + 1,
        dt_current: dt,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSize {
    pub dt: f64,
    pub below_floor: bool,
}

/// `min(dt0, c_adapt / max(|u|⁴ + |u|²))`, flagged when below `floor`.
pub fn adapt_dt_from_peak(peak: f64, dt0: f64, c_adapt: f64, floor: f64) -> StepSize {
    let dt = if peak > 0.0 { dt0.min(c_adapt / peak) } else { dt0 };
    StepSize { dt, below_floor: dt < floor }
}

pub fn adapt_dt(state: &EvolveState, config: &SimConfig) -> StepSize {
    let peak = state
        .field
        .values()
        .iter()
        .map(|u| {
            let a = u.norm_sqr();
            a * a + a
        })
        .fold(0.0, f64::max);
    let unit = config.time_unit();
    adapt_dt_from_peak(peak, config.dt0 * unit, config.c_adapt, config.blowup_dt_floor * unit)
}

struct Sampler {
    weights: Vec<WeightSet>,
    exterior: Vec<f64>,
}

impl Sampler {
    fn sample(&self, rec: &mut TrajectoryRecord, field: &RadialField, t: f64) -> Result<FunctionalReport> {
        let grid = field.grid();
        let b = field.sine_coefficients();
        let mut g = 0.0;
        let mut c = Vec::with_capacity(b.len());
        for (b, k) in b.iter().zip(grid.wavenumbers()) {
            g += k * k * b.norm_sqr();
            c.push(b * k);
        }
        let grad_sq = 4.0 * std::f64::consts::PI * 0.5 * grid.r_max() * g;
        let dv = grid.transform().cosine_synthesize(&c);
        let du: Vec<Complex64> =
            field.values().iter().zip(grid.nodes()).enumerate().map(|(j, (u, r))| (dv[j + 1] - u) / r).collect();
        let norms = Norms {
            l2_sq: crate::functionals::l2_sq(field),
            grad_sq,
            l4_4: crate::functionals::l4_4(field),
            l6_6: crate::functionals::l6_6(field),
        };
        let report = FunctionalReport::from_norms(norms, field.boundary_mass_fraction())?;
        rec.times.push(t);
        rec.reports.push(report);
        for (series, w) in rec.virial.iter_mut().zip(&self.weights) {
            series.value.push(virial_value(field, w));
            series.second_derivative.push(second_derivative_with(field, &du, w));
        }
        let dv_stencil = crate::diagnostics::rv_stencil_derivative(field);
        for (series, &r) in rec.exterior.iter_mut().zip(&self.exterior) {
            series.value.push(exterior_energy_with(field, &dv_stencil, r));
        }
        rec.st5.push(rec.accumulator.st5);
        rec.st10.push(rec.accumulator.st10);
        Ok(report)
    }
}

/// Integrates to `t_end` or a blow-up stop, sampling every `output_every`
/// steps, and applies the verdict rules.
pub fn evolve(field: &RadialField, config: &SimConfig) -> Result<(TrajectoryRecord, Verdict)> {
    config.validate()?;
    let grid = field.grid().clone();
    let expect = config.grid.r_max * config.length_scale;
    if grid.n() != config.grid.n || (grid.r_max() - expect).abs() > 1e-12 * expect {
        return Err(Error::Config(format!(
            "field grid (r_max {}, n {}) does not match the configured grid (r_max {expect}, n {})",
            grid.r_max(),
            grid.n(),
            config.grid.n
        )));
    }
    if !field.is_finite() {
        return Err(Error::Sampling { r: f64::NAN });
    }
    let ls = config.length_scale;
    let unit = config.time_unit();
    let virial_radii: Vec<f64> = config.virial_radii.iter().map(|r| r * ls).collect();
    let exterior_radii: Vec<f64> = config.exterior_radii.iter().map(|r| r * ls).collect();
    let weights = virial_radii
        .iter()
        .map(|&r| truncated_weight(r, WeightFamily::Quadratic, &grid))
        .collect::<Result<Vec<_>>>()?;
    let sampler = Sampler { weights, exterior: exterior_radii.clone() };
    let mut rec = TrajectoryRecord::new(&virial_radii, &exterior_radii);

    let (dt0, t_end, floor) = (config.dt0 * unit, config.t_end * unit, config.blowup_dt_floor * unit);
    let mut stepper = Stepper::new(&grid, config.flags())
        .with_absorber(config.absorber.map(|a| Absorber { width: a.width * ls, strength: a.strength / unit }));
    let mut values = field.values().to_vec();
    let mut t = 0.0;
    let first = sampler.sample(&mut rec, field, t)?;
    let g0 = first.grad_sq;
    let mut peak = values
        .iter()
        .map(|u| {
            let a = u.norm_sqr();
            a * a + a
        })
        .fold(0.0, f64::max);
    let mut steps: u64 = 0;
    let stop;
    loop {
        if t >= t_end * (1.0 - 1e-14) {
            stop = StopReason::Completed { t };
            break;
        }
        let mut dt = dt0;
        if config.adapt == Adapt::GradientCapped {
            let s = adapt_dt_from_peak(peak, dt0, config.c_adapt, floor);
            if s.below_floor {
                stop = StopReason::DtFloor { t, dt: s.dt };
                break;
            }
            dt = s.dt;
        }
        dt = dt.min(t_end - t);
        peak = stepper.step(&mut values, dt);
        t += dt;
        steps += 1;
        if peak.is_nan() {
            stop = StopReason::NonFinite { t };
            break;
        }
        let f = RadialField::from_raw(grid.clone(), std::mem::take(&mut values));
        let (p5, p10) = strichartz_powers(&f);
        rec.accumulator.st5 += dt * p5;
        rec.accumulator.st10 += dt * p10;
        if steps.is_multiple_of(config.output_every as u64) {
            let rep = sampler.sample(&mut rec, &f, t)?;
            if g0 > 0.0 && rep.grad_sq >= config.blowup_gradient_factor.powi(2) * g0 {
                stop = StopReason::GradientFactor { t, ratio: (rep.grad_sq / g0).sqrt() };
                break;
            }
        }
        values = f.into_values();
    }
    // close the record at the stop time unless that sample already exists
    if rec.times.last() != Some(&t) && !matches!(stop, StopReason::NonFinite { .. }) {
        let f = RadialField::from_raw(grid.clone(), values);
        sampler.sample(&mut rec, &f, t)?;
    }
    rec.stop = stop;
    let verdict = scattering_verdict(&rec, &config.thresholds, threshold_closed_form());
    Ok((rec, verdict))
}
