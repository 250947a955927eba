use cnls::diagnostics::{
    exterior_energy, read_report, scattering_verdict, strichartz_accumulate, trajectory_csv, write_report, StopReason,
    Thresholds, TrajectoryRecord, VerdictKind,
};
use cnls::evolve::{evolve, SimConfig};
use cnls::functionals::norms;
use cnls::{make_grid, sample, AnalyticProfile, FunctionalReport, Norms, RadialField, Shape};
use proptest::prelude::*;

fn compact(amplitude: f64) -> AnalyticProfile {
    // support r ≤ 4
    AnalyticProfile::new(Shape::TruncatedAubinTalenti { cutoff: 2.0 }, amplitude, 1.0).unwrap()
}

#[test]
fn exterior_energy_limits() {
    let g = make_grid(30.0, 8191).unwrap();
    let f = sample(&AnalyticProfile::gaussian(1.0, 1.0), &g).unwrap();
    let n = norms(&f);
    let total = n.grad_sq + n.l4_4 + n.l6_6;
    assert!((exterior_energy(&f, 0.0) - total).abs() <= 1e-8 * total);
    assert_eq!(exterior_energy(&f, 30.0), 0.0);
    let c = sample(&compact(1.0), &g).unwrap();
    assert_eq!(exterior_energy(&c, 4.5), 0.0);
    assert!(exterior_energy(&c, 3.5) > 0.0);
}

#[test]
fn strichartz_of_zero_field_is_zero() {
    let g = make_grid(10.0, 255).unwrap();
    let mut rec = TrajectoryRecord::new(&[], &[]);
    strichartz_accumulate(&mut rec, &RadialField::zeros(&g), 0.5);
    assert_eq!((rec.accumulator.st5, rec.accumulator.st10), (0.0, 0.0));
    let f = sample(&AnalyticProfile::gaussian(1.0, 1.0), &g).unwrap();
    strichartz_accumulate(&mut rec, &f, 0.5);
    assert!(rec.accumulator.st5 > 0.0 && rec.accumulator.st10 > 0.0);
}

#[test]
fn report_round_trip_is_byte_stable() {
    let text = r#"{"schema":1,"grid":{"r_max":30,"n":1023},"dt0":2e-3,"t_end":0.2,
        "blowup_dt_floor":1e-9,"output_every":10,"virial_R_list":[4.0,8.0],"exterior_R_list":[2.0,5.0]}"#;
    let c = SimConfig::from_json(text).unwrap();
    let f = sample(&AnalyticProfile::gaussian(1.0, 1.0), &c.physical_grid().unwrap()).unwrap();
    let (rec, verdict) = evolve(&f, &c).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    write_report(&rec, &verdict, &a).unwrap();
    let (rec2, verdict2) = read_report(&a).unwrap();
    assert_eq!(verdict2, verdict);
    assert_eq!(trajectory_csv(&rec2), trajectory_csv(&rec));
    write_report(&rec2, &verdict2, &b).unwrap();
    for name in ["trajectory.csv", "verdict.json"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap());
    }
}

#[test]
fn step_floor_without_evidence_is_undetermined() {
    let mut rec = TrajectoryRecord::new(&[4.0], &[]);
    let n = Norms { l2_sq: 1.0, grad_sq: 1.0, l4_4: 0.1, l6_6: 0.1 };
    for i in 0..10 {
        rec.times.push(i as f64 * 0.1);
        // K > 0 rules out the certificate; a flat gradient rules out growth
        rec.reports.push(FunctionalReport::from_norms(n, 0.0).unwrap());
        rec.virial[0].value.push(1.0);
        rec.virial[0].second_derivative.push(0.0);
        rec.st5.push(0.0);
        rec.st10.push(0.0);
    }
    rec.stop = StopReason::DtFloor { t: 0.9, dt: 1e-12 };
    let v = scattering_verdict(&rec, &Thresholds::default(), cnls::ground_state::threshold_closed_form());
    assert_eq!(v.kind, VerdictKind::Undetermined);
    assert!(v.certificate.is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exterior_energy_is_monotone_in_r(a in 0.1..2.0f64, w in 0.3..3.0f64, r1 in 0.0..20.0f64, dr in 0.0..10.0f64) {
        let g = make_grid(30.0, 2047).unwrap();
        let f = sample(&AnalyticProfile::gaussian(a, w), &g).unwrap();
        prop_assert!(exterior_energy(&f, r1 + dr) <= exterior_energy(&f, r1));
    }
}
