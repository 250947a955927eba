//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use cnls::diagnostics::Thresholds;
use cnls::dichotomy::{run_dichotomy, sweep_config, DichotomyConfig};
use cnls::evolve::{evolve, step, EvolveState, NonlinearFlags};
use cnls::ground_state::{k_data_profile, make_k_data, threshold_closed_form, threshold_m};
use cnls::littlewood_paley::{besov_norm, correlation, extract_bubble, l2_norm, reference_grid};
use cnls::variational::verify_variational;
use cnls::virial::{second_differences, transient_samples, truncated_weight, virial_second_derivative, WeightFamily};
use cnls::{functional_report, make_grid, sample, AnalyticProfile, Complex64, RadialField, RadialGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

/// `‖∇W‖²` for `W = (1 + r²/3)^{-1/2}` after `r = √3 tan θ`:
/// `4π √3 ∫₀^{π/2} sin⁴θ dθ`, by composite Simpson.
fn gradient_oracle() -> f64 {
    let n = 20_000;
    let h = (PI / 2.0) / n as f64;
    let f = |t: f64| t.sin().powi(4);
    let mut s = f(0.0) + f(PI / 2.0);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    4.0 * PI * 3f64.sqrt() * s * h / 3.0
}

fn threshold_reproduction() -> Outcome {
    let t = Instant::now();
    let cert = match threshold_m() {
        Ok(c) => c,
        Err(e) => return outcome(false, e.to_string()),
    };
    let elapsed = t.elapsed();
    let oracle = gradient_oracle() / 3.0;
    let sobolev = cert.sobolev_constant.powi(-3) / 3.0;
    let d_oracle = (cert.m_quadrature - oracle).abs();
    let d_closed = (cert.m_quadrature - cert.m_closed_form).abs();
    let d_sob = (sobolev - cert.m_closed_form).abs() / cert.m_closed_form;
    let pass = d_oracle <= 1e-8 && d_closed <= 1e-8 && d_sob <= 1e-10 && within(elapsed, 1.0);
    outcome(
        pass,
        format!(
            "m = {:.15}, |m_q - oracle| = {d_oracle:.1e}, |m_q - closed| = {d_closed:.1e}, Sobolev rel {d_sob:.1e}, {:.2}s",
            cert.m_quadrature,
            elapsed.as_secs_f64()
        ),
    )
}

fn random_field(rng: &mut ChaCha8Rng) -> RadialField {
    let w: f64 = rng.gen_range(0.3..3.0);
    let amp: f64 = rng.gen_range(0.05..2.0);
    let depth: f64 = rng.gen_range(-0.5..0.5);
    let freq: f64 = rng.gen_range(0.0..6.0);
    let chirp: f64 = rng.gen_range(-1.0..1.0);
    let grid = make_grid(10.0 * w, 2047).unwrap();
    let v = grid
        .nodes()
        .iter()
        .map(|&r| {
            let s = r / w;
            Complex64::from_polar(amp * (-s * s).exp() * (1.0 + depth * (freq * s).cos()), chirp * s * s)
        })
        .collect();
    RadialField::new(grid, v).unwrap()
}

fn identity_suite() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let r = match functional_report(&random_field(&mut rng)) {
            Ok(r) => r,
            Err(e) => return outcome(false, e.to_string()),
        };
        let a = 6.0 * r.energy - r.k;
        let b = r.grad_sq + r.l6_6;
        worst = worst.max((a - b).abs() / b.abs());
        let h = r.energy - r.k / 6.0;
        worst = worst.max((r.h - h).abs() / r.h.abs());
    }
    let elapsed = t.elapsed();
    outcome(
        worst <= 1e-12 && within(elapsed, 1.0),
        format!("100 fields, worst relative defect {worst:.1e}, {:.2}s", elapsed.as_secs_f64()),
    )
}

fn variational_report_json() -> Result<String, String> {
    let r = verify_variational(7, 1000).map_err(|e| e.to_string())?;
    serde_json::to_string_pretty(&r).map_err(|e| e.to_string())
}

fn uniform_bound_suite() -> (Outcome, Option<String>) {
    let t = Instant::now();
    let r = match verify_variational(7, 1000) {
        Ok(r) => r,
        Err(e) => return (outcome(false, e.to_string()), None),
    };
    let elapsed = t.elapsed();
    let l = r.lemma("uniform_bound").expect("suite has the uniform bound");
    let pass = l.checked == 1000 && l.violations() == 0 && within(elapsed, 10.0);
    let json = serde_json::to_string_pretty(&r).ok();
    (
        outcome(
            pass,
            format!(
                "{} fields with E < m ({} with K < 0), {} violations, worst margin {:.3e} m, {:.2}s",
                l.checked,
                r.k_negative,
                l.violations(),
                l.worst_margin.unwrap_or(f64::NAN),
                elapsed.as_secs_f64()
            ),
        ),
        json,
    )
}

fn remark_asymptotics() -> Outcome {
    let t = Instant::now();
    let m = threshold_closed_form();
    // large cut-off so the truncation error is far below ε²
    let radius = 2f64.powi(20);
    let mut e_ratios = Vec::new();
    let mut k_ratios = Vec::new();
    for eps in [0.02, 0.04, 0.08] {
        let n = match k_data_profile(eps, radius) {
            Ok(p) => p.norms(),
            Err(e) => return outcome(false, e.to_string()),
        };
        e_ratios.push((m - n.energy()) / (6.0 * eps * eps * m));
        k_ratios.push(-n.k() / (24.0 * eps * m));
    }
    let elapsed = t.elapsed();
    let monotone = |v: &[f64]| v.windows(2).all(|w| (w[0] - 1.0).abs() < (w[1] - 1.0).abs());
    let in_band = |x: f64| (0.8..=1.2).contains(&x);
    let pass = monotone(&e_ratios)
        && monotone(&k_ratios)
        && in_band(e_ratios[0])
        && in_band(k_ratios[0])
        && within(elapsed, 5.0);
    outcome(
        pass,
        format!(
            "(m-E)/(6ε²m) = {:.4?}, -K/(24εm) = {:.4?} for ε = 0.02, 0.04, 0.08, {:.2}s",
            e_ratios,
            k_ratios,
            elapsed.as_secs_f64()
        ),
    )
}

fn free_propagator() -> Outcome {
    let t = Instant::now();
    let grid = make_grid(40.0, 8191).unwrap();
    let u0 = sample(&AnalyticProfile::gaussian(1.0, 1.0), &grid).unwrap();
    let m0 = cnls::functionals::mass(&u0);
    let mut state = EvolveState { t: 0.0, field: u0, step_count: 0, dt_current: 0.01 };
    for _ in 0..100 {
        state = step(&state, 0.01, NonlinearFlags::NONE).expect("linear step stays finite");
    }
    let elapsed = t.elapsed();
    // e^{itΔ} e^{-r²} = (1 + 4it)^{-3/2} exp(-r² / (1 + 4it))
    let z = Complex64::new(1.0, 4.0 * state.t);
    let exact: Vec<Complex64> = grid.nodes().iter().map(|&r| z.powf(-1.5) * (-(r * r) / z).exp()).collect();
    let exact = RadialField::new(grid.clone(), exact).unwrap();
    let diff: Vec<Complex64> = state.field.values().iter().zip(exact.values()).map(|(a, b)| a - b).collect();
    let rel = l2_norm(&RadialField::new(grid, diff).unwrap()) / l2_norm(&exact);
    let dm = (cnls::functionals::mass(&state.field) - m0).abs() / m0;
    outcome(
        rel <= 1e-6 && dm <= 1e-12 && within(elapsed, 30.0),
        format!("t = {:.2}, relative L² error {rel:.1e}, |ΔM|/M {dm:.1e}, {:.2}s", state.t, elapsed.as_secs_f64()),
    )
}

struct ReferenceRun {
    record: cnls::diagnostics::TrajectoryRecord,
    field: RadialField,
    elapsed: Duration,
}

fn reference_run() -> Result<ReferenceRun, String> {
    let mut cfg = sweep_config(-0.2, 5e-4, &Thresholds::default());
    cfg.output_every = 100;
    let grid = cfg.physical_grid().map_err(|e| e.to_string())?;
    let data = make_k_data(-0.2, None, &grid).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let (record, _) = evolve(&data.field, &cfg).map_err(|e| e.to_string())?;
    Ok(ReferenceRun { record, field: data.field, elapsed: t.elapsed() })
}

fn conservation(run: &ReferenceRun) -> Outcome {
    let r = &run.record.reports;
    let (m0, e0) = (r[0].mass, r[0].energy);
    let dm = r.iter().map(|x| (x.mass - m0).abs() / m0).fold(0.0, f64::max);
    let de = r.iter().map(|x| (x.energy - e0).abs() / e0.abs()).fold(0.0, f64::max);
    outcome(
        dm <= 1e-10 && de <= 1e-6 && within(run.elapsed, 300.0),
        format!(
            "ε = -0.2, n = 8191, r_max = 200, {} samples: max |ΔM|/M {dm:.1e}, max |ΔE|/|E| {de:.1e}, {:.1}s",
            r.len(),
            run.elapsed.as_secs_f64()
        ),
    )
}

fn virial_consistency(run: &ReferenceRun) -> Outcome {
    let rec = &run.record;
    let series = &rec.virial[0];
    let fd = second_differences(&rec.times, &series.value);
    let skip = transient_samples(rec.times.len(), 0.05);
    let mut scale: f64 = 0.0;
    let mut err: f64 = 0.0;
    for (d, formula) in fd.iter().zip(&series.second_derivative).skip(skip) {
        if let Some(d) = d {
            scale = scale.max(formula.abs());
            err = err.max((d - formula).abs());
        }
    }
    let fd_rel = err / scale;

    // a weight radius past the support makes the formula 4K exactly
    let grid: &RadialGrid = run.field.grid();
    let support = run
        .field
        .values()
        .iter()
        .zip(grid.nodes())
        .filter(|(u, _)| u.norm() > 0.0)
        .map(|(_, r)| *r)
        .fold(0.0, f64::max);
    let w = match truncated_weight(support * 1.01, WeightFamily::Quadratic, grid) {
        Ok(w) => w,
        Err(e) => return outcome(false, e.to_string()),
    };
    let formula = virial_second_derivative(&run.field, &w);
    let k4 = 4.0 * cnls::functionals::k_functional(&run.field);
    let k_rel = (formula - k4).abs() / k4.abs();
    outcome(
        fd_rel <= 1e-2 && k_rel <= 1e-6,
        format!(
            "R = {:.4}: max |FD - formula| / max |formula| = {fd_rel:.2e}; support inside R: |V'' - 4K| / |4K| = {k_rel:.1e}",
            series.radius
        ),
    )
}

fn dichotomy_sweep(out: &Path) -> Outcome {
    let t = Instant::now();
    let summary = match run_dichotomy(&DichotomyConfig::default(), Some(out)) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let elapsed = t.elapsed();
    let parts: Vec<String> = summary
        .entries
        .iter()
        .map(|e| {
            format!(
                "{:+}: {:?}{}",
                e.eps,
                e.verdict,
                match e.certificate_pass {
                    Some(true) => " (certificate pass)",
                    Some(false) => " (certificate FAIL)",
                    None => "",
                }
            )
        })
        .collect();
    outcome(
        summary.all_expected && summary.entries.len() == 6 && within(elapsed, 1800.0),
        format!("{}; {:.0}s", parts.join(", "), elapsed.as_secs_f64()),
    )
}

fn gaussian_bubble(g: &RadialGrid, w: f64) -> RadialField {
    let a = w.powf(-1.5) * (2.0 / PI).powf(0.75);
    sample(&AnalyticProfile::gaussian(a, w), g).unwrap()
}

fn bubble_extraction() -> Outcome {
    let t = Instant::now();
    let g = make_grid(8.0, 16383).unwrap();
    let rg = reference_grid();
    let mut worst_corr: f64 = 1.0;
    let mut worst_shift = 0;
    for k in 3..=8 {
        let w = 2f64.powi(-k);
        let rep = match extract_bubble(&gaussian_bubble(&g, w)) {
            Ok(r) => r,
            Err(e) => return outcome(false, e.to_string()),
        };
        let shift = (rep.besov.k_star.unwrap_or(0) as i32 - k).abs();
        worst_shift = worst_shift.max(shift);
        worst_corr = worst_corr.min(correlation(&rep.profile, &gaussian_bubble(&rg, w / rep.h)));
    }
    let wide = gaussian_bubble(&g, 0.25);
    let narrow = gaussian_bubble(&g, 2f64.powi(-8));
    let both: Vec<Complex64> = wide.values().iter().zip(narrow.values()).map(|(a, b)| a + b).collect();
    let rep = extract_bubble(&RadialField::new(g.clone(), both).unwrap()).unwrap();
    let k = rep.besov.k_star.unwrap_or(0);
    let other = if k <= 4 { &narrow } else { &wide };
    let ratio = rep.remainder_besov.value / besov_norm(other).value;
    let elapsed = t.elapsed();
    let pass = worst_shift <= 1 && worst_corr >= 0.95 && (0.5..=2.0).contains(&ratio) && within(elapsed, 10.0);
    outcome(
        pass,
        format!(
            "k = 3..8: worst |k* - k| = {worst_shift}, worst correlation {worst_corr:.4}; two bubbles: extracted k* = {k}, remainder/isolated = {ratio:.3}; {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn report_line(n: usize, name: &str, o: &Outcome) {
    println!("criterion {n:>2} [{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
}

fn main() {
    let mut all = true;
    let mut emit = |n: usize, name: &str, o: Outcome| {
        report_line(n, name, &o);
        all &= o.pass;
    };

    emit(1, "threshold reproduction", threshold_reproduction());
    emit(2, "algebraic identities", identity_suite());
    let (c3, variational_first) = uniform_bound_suite();
    emit(3, "uniform-bound inequality", c3);
    emit(4, "cut-off data asymptotics", remark_asymptotics());
    emit(5, "free-propagator fidelity", free_propagator());
    let c8 = match reference_run() {
        Ok(run) => {
            emit(6, "conservation on a K+ run", conservation(&run));
            virial_consistency(&run)
        }
        Err(e) => {
            emit(6, "conservation on a K+ run", outcome(false, e.clone()));
            outcome(false, e)
        }
    };
    let first = tempfile::tempdir().unwrap();
    emit(7, "dichotomy sweep", dichotomy_sweep(first.path()));
    emit(8, "virial consistency", c8);
    emit(9, "bubble extraction", bubble_extraction());

    let second = tempfile::tempdir().unwrap();
    let rerun = run_dichotomy(&DichotomyConfig::default(), Some(second.path()));
    let c10 = match (variational_first, variational_report_json(), rerun) {
        (Some(a), Ok(b), Ok(_)) => {
            let same_suite = a == b;
            let (ta, tb) = (read_tree(first.path()), read_tree(second.path()));
            let same_sweep = !ta.is_empty() && ta == tb;
            outcome(
                same_suite && same_sweep,
                format!(
                    "variational report identical: {same_suite}; dichotomy outputs identical: {same_sweep} ({} files)",
                    ta.len()
                ),
            )
        }
        (_, Err(e), _) => outcome(false, e),
        (_, _, Err(e)) => outcome(false, e.to_string()),
        (None, ..) => outcome(false, "first variational run failed".into()),
    };
    emit(10, "determinism", c10);

    if !all {
        std::process::exit(1);
    }
}
