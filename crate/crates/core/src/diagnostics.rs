//! Trajectory records, exterior energy, Strichartz-type accumulators, the
//! verdict rules and report persistence.
//!
//! Verdicts are finite-time proxies: a `ScatteredLike` run has radiated its
//! potential energy away, a `BlewUp` run concentrated while the virial
//! certificate held. Neither is a proof.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{FunctionalReport, Norms};
use crate::grid::RadialField;
use crate::virial::{blowup_certificate, BlowupCertificate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirialSeries {
    #[serde(rename = "R")]
    pub radius: f64,
    pub value: Vec<f64>,
    /// The four-term formula evaluated at each sample.
    pub second_derivative: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExteriorSeries {
    #[serde(rename = "R")]
    pub radius: f64,
    pub value: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StrichartzAccumulator {
    pub st5: f64,
    pub st10: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopReason {
    Completed {
        t: f64,
    },
    /// The adaptive step fell below the floor.
    DtFloor {
        t: f64,
        dt: f64,
    },
    NonFinite {
        t: f64,
    },
    /// `‖∇u‖ ≥ factor · ‖∇u₀‖`.
    GradientFactor {
        t: f64,
        ratio: f64,
    },
}

impl StopReason {
    pub fn is_blowup_signal(&self) -> bool {
        !matches!(self, StopReason::Completed { .. })
    }

    pub fn time(&self) -> f64 {
        match *self {
            StopReason::Completed { t }
            | StopReason::DtFloor { t, .. }
            | StopReason::NonFinite { t }
            | StopReason::GradientFactor { t, .. } => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub reports: Vec<FunctionalReport>,
    pub virial: Vec<VirialSeries>,
    pub exterior: Vec<ExteriorSeries>,
    pub st5: Vec<f64>,
    pub st10: Vec<f64>,
    pub accumulator: StrichartzAccumulator,
    pub stop: StopReason,
}

impl TrajectoryRecord {
    pub fn new(virial_radii: &[f64], exterior_radii: &[f64]) -> Self {
        Self {
            times: Vec::new(),
            reports: Vec::new(),
            virial: virial_radii
                .iter()
                .map(|&radius| VirialSeries { radius, value: Vec::new(), second_derivative: Vec::new() })
                .collect(),
            exterior: exterior_radii.iter().map(|&radius| ExteriorSeries { radius, value: Vec::new() }).collect(),
            st5: Vec::new(),
            st10: Vec::new(),
            accumulator: StrichartzAccumulator::default(),
            stop: StopReason::Completed { t: 0.0 },
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `‖u‖⁶_{L⁶} + ‖u‖⁴_{L⁴}` at each sample.
    pub fn potential(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.l6_6 + r.l4_4).collect()
    }
}

/// `∫_{|x| ≥ R} (|∇u|² + |u|⁴ + |u|⁶) dx` by the trapezoidal rule over the
/// nodes at or beyond `R` (origin and wall included); zero once `R` reaches
/// the wall. The derivative comes from a sixth-order centered stencil on
/// `r u`, so regions where the field vanishes contribute exactly nothing.
pub fn exterior_energy(field: &RadialField, radius: f64) -> f64 {
    exterior_energy_with(field, &rv_stencil_derivative(field), radius)
}

/// `∂_r(r u)` at nodes `0..=n+1` from a sixth-order centered difference,
/// using the odd reflections of `r u` about the origin and the wall.
pub fn rv_stencil_derivative(field: &RadialField) -> Vec<Complex64> {
    let g = field.grid();
    let n = g.n() as isize;
    let big = n + 1;
    let v: Vec<Complex64> = field.values().iter().zip(g.nodes()).map(|(u, r)| u * r).collect();
    let at = |j: isize| -> Complex64 {
        let m = j.rem_euclid(2 * big);
        if m == 0 || m == big {
            Complex64::new(0.0, 0.0)
        } else if m < big {
            v[(m - 1) as usize]
        } else {
            -v[(2 * big - m - 1) as usize]
        }
    };
    const C: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
    let inv = 1.0 / g.dr();
    (0..=big)
        .map(|j| {
            let mut d = Complex64::new(0.0, 0.0);
            for (k, c) in C.iter().enumerate() {
                let k = k as isize + 1;
                d += (at(j + k) - at(j - k)) * *c;
            }
            d * inv
        })
        .collect()
}

/// Same, reusing `∂_r(r u)` on the nodes `0..=n+1`.
pub(crate) fn exterior_energy_with(field: &RadialField, dv: &[Complex64], radius: f64) -> f64 {
    let g = field.grid();
    let n = g.n();
    let dr = g.dr();
    let last = n + 1;
    let start = if radius <= 0.0 { 0 } else { (radius / dr).ceil() as usize };
    if start >= last {
        return 0.0;
    }
    let density = |j: usize| -> f64 {
        if j == 0 {
            return 0.0;
        }
        let r = j as f64 * dr;
        let (u, du) = if j == last {
            (Complex64::new(0.0, 0.0), dv[j] / r)
        } else {
            let u = field.values()[j - 1];
            (u, (dv[j] - u) / r)
        };
        let a = u.norm_sqr();
        4.0 * PI * r * r * (du.norm_sqr() + a * a + a * a * a)
    };
    let mut s = 0.5 * (density(start) + density(last));
    for j in start + 1..last {
        s += density(j);
    }
    s * dr
}

/// `st5 += dt ‖u‖⁵_{L⁵}`, `st10 += dt ‖u‖¹⁰_{L¹⁰}`.
pub fn strichartz_accumulate(record: &mut TrajectoryRecord, field: &RadialField, dt_elapsed: f64) {
    let (p5, p10) = strichartz_powers(field);
    record.accumulator.st5 += dt_elapsed * p5;
    record.accumulator.st10 += dt_elapsed * p10;
}

pub(crate) fn strichartz_powers(field: &RadialField) -> (f64, f64) {
    let mut p5 = 0.0;
    let mut p10 = 0.0;
    for (u, w) in field.values().iter().zip(field.grid().weights()) {
        let a2 = u.norm_sqr();
        let a5 = a2 * a2 * a2.sqrt();
        p5 += w * a5;
        p10 += w * a5 * a5;
    }
    (p5, p10)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Required ratio of initial to final potential `‖u‖⁶ + ‖u‖⁴`.
    pub decay_factor: f64,
    /// Bound on the late `st5` rate relative to its peak rate over the run.
    pub rate_floor: f64,
    /// Trailing fraction of the run over which the late rate is measured.
    pub late_fraction: f64,
    /// Leading fraction of samples excluded from the certificate.
    pub transient_fraction: f64,
    /// Trailing samples that must show strictly growing `‖∇u‖²` for a
    /// step-floor stop to count as blow-up without a certificate.
    pub monotone_window: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { decay_factor: 10.0, rate_floor: 0.25, late_fraction: 0.2, transient_fraction: 0.05, monotone_window: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    ScatteredLike,
    BlewUp,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub reason: String,
    pub stop: StopReason,
    pub evidence: Vec<Criterion>,
    pub certificate: Option<BlowupCertificate>,
    pub note: String,
}

const PROXY_NOTE: &str = "finite-time numerical proxy; thresholds are tunable policy, not proof";

fn criterion(name: &str, value: f64, threshold: f64, pass: bool) -> Criterion {
    Criterion { name: name.into(), value, threshold, pass }
}

fn ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// Mean `st5` rate over samples with `t ≥ from`.
fn st5_rate_since(record: &TrajectoryRecord, from: f64) -> f64 {
    let n = record.len();
    let i = record.times.partition_point(|&t| t < from).min(n - 1);
    let dt = record.times[n - 1] - record.times[i];
    if dt > 0.0 {
        (record.st5[n - 1] - record.st5[i]) / dt
    } else {
        0.0
    }
}

fn gradient_monotone(record: &TrajectoryRecord, window: usize) -> bool {
    let n = record.len();
    if n < window + 1 {
        return false;
    }
    record.reports[n - window - 1..].windows(2).all(|w| w[1].grad_sq > w[0].grad_sq)
}

/// Verdict from a completed record.
///
/// `BlewUp` needs a blow-up stop (step floor, non-finite state or gradient
/// factor) together with a passing certificate, or a step-floor/non-finite
/// stop with strictly growing `‖∇u‖²` over the trailing window.
/// `ScatteredLike` needs a completed run whose potential fell by
/// `decay_factor` and whose late `st5` rate is below `rate_floor` times its
/// peak and still falling.
pub fn scattering_verdict(record: &TrajectoryRecord, th: &Thresholds, m: f64) -> Verdict {
    let mut evidence = Vec::new();
    let stop = record.stop;
    if record.is_empty() {
        return Verdict {
            kind: VerdictKind::Undetermined,
            reason: "empty record".into(),
            stop,
            evidence,
            certificate: None,
            note: PROXY_NOTE.into(),
        };
    }
    let n = record.len();
    if stop.is_blowup_signal() {
        let cert = blowup_certificate(record, m);
        let monotone = gradient_monotone(record, th.monotone_window);
        evidence.push(criterion("gradient_monotone_window", th.monotone_window as f64, 0.0, monotone));
        let (kind, reason, certificate) = match cert {
            Ok(c) if c.pass => {
                (VerdictKind::BlewUp, "blow-up stop with passing virial certificate".to_string(), Some(c))
            }
            other => {
                let floor_like = matches!(stop, StopReason::DtFloor { .. } | StopReason::NonFinite { .. });
                let why = match &other {
                    Ok(c) => format!("certificate failed with {} violations", c.violations.len()),
                    Err(e) => format!("certificate unavailable: {e}"),
                };
                if floor_like && monotone {
                    (VerdictKind::BlewUp, format!("step floor with monotone gradient growth; {why}"), other.ok())
                } else {
                    (
                        VerdictKind::Undetermined,
                        format!("resolution exhausted without blow-up criteria; {why}"),
                        other.ok(),
                    )
                }
            }
        };
        return Verdict { kind, reason, stop, evidence, certificate, note: PROXY_NOTE.into() };
    }

    let pot = record.potential();
    let remaining = ratio(pot[n - 1], pot[0]);
    let decayed = remaining <= 1.0 / th.decay_factor;
    evidence.push(criterion("potential_remaining_fraction", remaining, 1.0 / th.decay_factor, decayed));

    let t_end = record.times[n - 1];
    let t0 = record.times[0];
    let late_start = t_end - th.late_fraction * (t_end - t0);
    let late = st5_rate_since(record, late_start);
    let last_half = st5_rate_since(record, t_end - 0.5 * th.late_fraction * (t_end - t0));
    let mut peak: f64 = 0.0;
    for i in 1..n {
        let dt = record.times[i] - record.times[i - 1];
        if dt > 0.0 {
            peak = peak.max((record.st5[i] - record.st5[i - 1]) / dt);
        }
    }
    let rel = ratio(late, peak);
    let rate_ok = rel <= th.rate_floor;
    let falling = last_half <= late;
    evidence.push(criterion("late_st5_rate_over_peak", rel, th.rate_floor, rate_ok));
    evidence.push(criterion("late_st5_rate_falling", ratio(last_half, late), 1.0, falling));

    let (kind, reason) = if decayed && rate_ok && falling {
        (VerdictKind::ScatteredLike, "potential radiated away and late st5 rate decaying".to_string())
    } else {
        (VerdictKind::Undetermined, "run completed without meeting the decay criteria".to_string())
    };
    Verdict { kind, reason, stop, evidence, certificate: None, note: PROXY_NOTE.into() }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// CSV header: `t,M,E,Ec,K,H,grad2,L4,L6,VR@R…,d2VR@R…,extE@R…,st5,st10,bmf`.
pub fn csv_header(record: &TrajectoryRecord) -> Vec<String> {
    let mut h: Vec<String> =
        ["t", "M", "E", "Ec", "K", "H", "grad2", "L4", "L6"].iter().map(|s| s.to_string()).collect();
    h.extend(record.virial.iter().map(|v| format!("VR@{}", fmt_f64(v.radius))));
    h.extend(record.virial.iter().map(|v| format!("d2VR@{}", fmt_f64(v.radius))));
    h.extend(record.exterior.iter().map(|v| format!("extE@{}", fmt_f64(v.radius))));
    h.extend(["st5", "st10", "bmf"].iter().map(|s| s.to_string()));
    h
}

pub fn trajectory_csv(record: &TrajectoryRecord) -> String {
    let mut out = csv_header(record).join(",");
    out.push('\n');
    for i in 0..record.len() {
        let r = &record.reports[i];
        let mut row = vec![record.times[i], r.mass, r.energy, r.critical_energy, r.k, r.h, r.grad_sq, r.l4_4, r.l6_6];
        row.extend(record.virial.iter().map(|v| v.value[i]));
        row.extend(record.virial.iter().map(|v| v.second_derivative[i]));
        row.extend(record.exterior.iter().map(|v| v.value[i]));
        row.extend([record.st5[i], record.st10[i], r.boundary_mass_fraction]);
        let cells: Vec<String> = row.into_iter().map(fmt_f64).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Writes `trajectory.csv` and `verdict.json` into `out_dir`.
pub fn write_report(record: &TrajectoryRecord, verdict: &Verdict, out_dir: impl AsRef<Path>) -> Result<()> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join("trajectory.csv");
    fs::write(&csv_path, trajectory_csv(record)).map_err(|e| Error::io(&csv_path, e))?;
    let json_path = dir.join("verdict.json");
    let mut json = serde_json::to_string_pretty(verdict).map_err(|e| Error::Parse(e.to_string()))?;
    json.push('\n');
    fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))
}

/// Reads back what [`write_report`] wrote.
pub fn read_report(out_dir: impl AsRef<Path>) -> Result<(TrajectoryRecord, Verdict)> {
    let dir = out_dir.as_ref();
    let json_path = dir.join("verdict.json");
    let text = fs::read_to_string(&json_path).map_err(|e| Error::io(&json_path, e))?;
    let verdict: Verdict =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", json_path.display())))?;
    let csv_path = dir.join("trajectory.csv");
    let text = fs::read_to_string(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let bad = |what: String| Error::Parse(format!("{}: {what}", csv_path.display()));
    let radius_of = |col: &str, prefix: &str| -> Option<f64> { col.strip_prefix(prefix)?.parse().ok() };
    let vr: Vec<f64> = header.iter().filter_map(|c| radius_of(c, "VR@")).collect();
    let ext: Vec<f64> = header.iter().filter_map(|c| radius_of(c, "extE@")).collect();
    let mut record = TrajectoryRecord::new(&vr, &ext);
    if header != csv_header(&record).iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let nv = vr.len();
    let ne = ext.len();
    for (lineno, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(|c| c.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(format!("row {}: {e}", lineno + 2)))?;
        if row.len() != header.len() {
            return Err(bad(format!("row {} has {} cells", lineno + 2, row.len())));
        }
        record.times.push(row[0]);
        let norms = Norms { l2_sq: 2.0 * row[1], grad_sq: row[6], l4_4: row[7], l6_6: row[8] };
        let bmf = row[row.len() - 1];
        record.reports.push(FunctionalReport::from_norms(norms, bmf)?);
        for k in 0..nv {
            record.virial[k].value.push(row[9 + k]);
            record.virial[k].second_derivative.push(row[9 + nv + k]);
        }
        for k in 0..ne {
            record.exterior[k].value.push(row[9 + 2 * nv + k]);
        }
        record.st5.push(row[9 + 2 * nv + ne]);
        record.st10.push(row[10 + 2 * nv + ne]);
    }
    if let (Some(&a), Some(&b)) = (record.st5.last(), record.st10.last()) {
        record.accumulator = StrichartzAccumulator { st5: a, st10: b };
    }
    record.stop = verdict.stop;
    Ok((record, verdict))
}
