//! The sign-of-K sweep: build cut-off ground-state data on both sides of
//! the constraint, evolve each, and collect verdicts in one summary.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{write_report, StopReason, Thresholds, VerdictKind};
use crate::error::{Error, Result};
use crate::evolve::{evolve, Adapt, GridSpec, InitialData, SimConfig};
use crate::functionals::FunctionalReport;
use crate::ground_state::{k_data_length, threshold_closed_form, Classification};

/// Run geometry in natural units (lengths over `|ε|³`, times over `|ε|⁶`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub r_max: f64,
    pub n: usize,
    pub t_end: f64,
    pub output_every: usize,
    #[serde(rename = "virial_R")]
    pub virial_radius: f64,
    pub c_adapt: f64,
    pub dt_floor: f64,
}

/// Calibrated `(|ε|, collapsing geometry, dispersing geometry)`.
///
/// Collapse concentrates below the cut-off scale and needs a finer step
/// control; dispersion needs room for the outgoing mass and a long horizon.
const CALIBRATED: [(f64, Geometry, Geometry); 3] = [
    (
        0.2,
        Geometry {
            r_max: 160.0,
            n: 16383,
            t_end: 3.0,
            output_every: 20,
            virial_radius: 40.0,
            c_adapt: 0.02,
            dt_floor: 4e-6,
        },
        Geometry {
            r_max: 200.0,
            n: 8191,
            t_end: 60.0,
            output_every: 1000,
            virial_radius: 20.0,
            c_adapt: 0.1,
            dt_floor: 1e-6,
        },
    ),
    (
        0.1,
        Geometry {
            r_max: 320.0,
            n: 32767,
            t_end: 10.0,
            output_every: 50,
            virial_radius: 100.0,
            c_adapt: 0.02,
            dt_floor: 4e-6,
        },
        Geometry {
            r_max: 400.0,
            n: 16383,
            t_end: 40.0,
            output_every: 1000,
            virial_radius: 120.0,
            c_adapt: 0.1,
            dt_floor: 1e-6,
        },
    ),
    (
        0.05,
        Geometry {
            r_max: 1300.0,
            n: 131071,
            t_end: 10.0,
            output_every: 100,
            virial_radius: 400.0,
            c_adapt: 0.02,
            dt_floor: 4e-6,
        },
        Geometry {
            r_max: 1300.0,
            n: 65535,
            t_end: 30.0,
            output_every: 1000,
            virial_radius: 400.0,
            c_adapt: 0.1,
            dt_floor: 1e-6,
        },
    ),
];

/// Geometry of the calibrated `|ε|` nearest in log scale.
pub fn geometry_for(eps: f64) -> Geometry {
    let target = eps.abs().ln();
    let (_, up, down) = CALIBRATED
        .iter()
        .min_by(|a, b| (a.0.ln() - target).abs().total_cmp(&(b.0.ln() - target).abs()))
        .expect("non-empty table");
    if eps > 0.0 {
        *up
    } else {
        *down
    }
}

/// One run of the sweep as a full evolve configuration.
pub fn sweep_config(eps: f64, dt0: f64, thresholds: &Thresholds) -> SimConfig {
    let g = geometry_for(eps);
    SimConfig {
        schema: 1,
        grid: GridSpec { r_max: g.r_max, n: g.n },
        length_scale: k_data_length(eps),
        dt0,
        t_end: g.t_end,
        f1_on: true,
        f2_on: true,
        adapt: Adapt::GradientCapped,
        c_adapt: g.c_adapt,
        blowup_gradient_factor: 1e3,
        blowup_dt_floor: g.dt_floor,
        output_every: g.output_every,
        virial_radii: vec![g.virial_radius],
        exterior_radii: vec![g.virial_radius],
        seed: 0,
        noise_amplitude: 0.0,
        absorber: None,
        thresholds: *thresholds,
        initial: Some(InitialData::KData { eps, radius: None }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DichotomyConfig {
    pub schema: u32,
    #[serde(default = "default_eps")]
    pub eps_list: Vec<f64>,
    #[serde(default = "default_dt0")]
    pub dt0: f64,
    /// Worker threads; 0 means one per available core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub thresholds: Thresholds,
}

fn default_eps() -> Vec<f64> {
    vec![-0.2, -0.1, -0.05, 0.05, 0.1, 0.2]
}
fn default_dt0() -> f64 {
    5e-4
}

impl Default for DichotomyConfig {
    fn default() -> Self {
        Self { schema: 1, eps_list: default_eps(), dt0: default_dt0(), workers: 0, thresholds: Thresholds::default() }
    }
}

impl DichotomyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != 1 {
            return Err(Error::Config(format!("unsupported schema {}", self.schema)));
        }
        if self.eps_list.is_empty() {
            return Err(Error::Config("eps_list is empty".into()));
        }
        if let Some(e) = self.eps_list.iter().find(|e| !(e.abs() > 0.0 && e.abs() <= 0.25)) {
            return Err(Error::Config(format!("eps = {e} outside 0 < |eps| <= 0.25")));
        }
        if !(self.dt0 > 0.0 && self.dt0.is_finite()) {
            return Err(Error::Config("dt0 must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyEntry {
    pub eps: f64,
    #[serde(rename = "R")]
    pub cutoff_radius: f64,
    pub geometry: Geometry,
    pub classification: Classification,
    pub initial: FunctionalReport,
    pub verdict: VerdictKind,
    pub certificate_pass: Option<bool>,
    pub expected: bool,
    /// Largest recorded `‖∇u‖²`.
    pub peak_grad_sq: f64,
    pub stop: StopReason,
    /// Stop time over `|ε|⁶`.
    pub stop_time_natural: f64,
    pub mass_drift: f64,
    pub energy_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomySummary {
    pub schema: u32,
    pub m: f64,
    pub entries: Vec<DichotomyEntry>,
    pub all_expected: bool,
}

fn expected(eps: f64, verdict: VerdictKind, certificate_pass: Option<bool>) -> bool {
    if eps > 0.0 {
        verdict == VerdictKind::BlewUp && certificate_pass == Some(true)
    } else {
        verdict == VerdictKind::ScatteredLike
    }
}

fn run_one(eps: f64, cfg: &DichotomyConfig, out: Option<&Path>) -> Result<DichotomyEntry> {
    let sim = sweep_config(eps, cfg.dt0, &cfg.thresholds);
    let data = {
        let grid = sim.physical_grid()?;
        crate::ground_state::make_k_data(eps, None, &grid)?
    };
    let (record, verdict) = evolve(&data.field, &sim)?;
    if let Some(dir) = out {
        write_report(&record, &verdict, dir.join(entry_dir(eps)))?;
    }
    let first = record.reports.first().copied().unwrap_or_default();
    let last = record.reports.last().copied().unwrap_or_default();
    let drift = |a: f64, b: f64| if a == 0.0 { 0.0 } else { ((b - a) / a).abs() };
    let certificate_pass = verdict.certificate.as_ref().map(|c| c.pass);
    Ok(DichotomyEntry {
        eps,
        cutoff_radius: data.cutoff_radius,
        geometry: geometry_for(eps),
        classification: data.classification,
        initial: first,
        verdict: verdict.kind,
        certificate_pass,
        expected: expected(eps, verdict.kind, certificate_pass),
        peak_grad_sq: record.reports.iter().map(|r| r.grad_sq).fold(0.0, f64::max),
        stop: verdict.stop,
        stop_time_natural: verdict.stop.time() / sim.length_scale.powi(2),
        mass_drift: drift(first.mass, last.mass),
        energy_drift: drift(first.energy, last.energy),
    })
}

/// Subdirectory holding one run's trajectory and verdict.
pub fn entry_dir(eps: f64) -> String {
    format!("eps_{eps:+.4}")
}

/// Runs the sweep, ordered by `ε` whatever the worker count. With `out`,
/// each run writes into [`entry_dir`] and the summary goes to
/// `summary.json`.
pub fn run_dichotomy(cfg: &DichotomyConfig, out: Option<&Path>) -> Result<DichotomySummary> {
    cfg.validate()?;
    let mut eps = cfg.eps_list.clone();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    let workers = match cfg.workers {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        w => w,
    }
    .min(eps.len());

    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut slots: Vec<Option<Result<DichotomyEntry>>> = (0..eps.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        if i >= eps.len() {
                            break done;
                        }
                        done.push((i, run_one(eps[i], cfg, out)));
                    }
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("sweep worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    let entries = slots.into_iter().map(|s| s.expect("every index claimed")).collect::<Result<Vec<_>>>()?;
    let summary = DichotomySummary {
        schema: 1,
        m: threshold_closed_form(),
        all_expected: entries.iter().all(|e| e.expected),
        entries,
    };
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("summary.json");
        let mut text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Parse(e.to_string()))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_picks_nearest_calibration() {
        assert_eq!(geometry_for(0.2).n, 16383);
        assert_eq!(geometry_for(-0.2).n, 8191);
        assert_eq!(geometry_for(0.08).n, 32767);
        assert_eq!(geometry_for(0.065).n, 131071);
        assert_eq!(geometry_for(-0.03).r_max, 1300.0);
        assert_eq!(geometry_for(0.25).r_max, 160.0);
    }

    #[test]
    fn config_validation() {
        assert!(DichotomyConfig::from_json(r#"{"schema":1}"#).is_ok());
        assert!(DichotomyConfig::from_json(r#"{"schema":2}"#).is_err());
        assert!(DichotomyConfig::from_json(r#"{"schema":1,"eps_list":[]}"#).is_err());
        assert!(DichotomyConfig::from_json(r#"{"schema":1,"eps_list":[0.3]}"#).is_err());
        assert!(DichotomyConfig::from_json(r#"{"schema":1,"bogus":1}"#).is_err());
    }
}
