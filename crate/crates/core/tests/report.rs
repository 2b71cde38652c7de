use telecert::classical::mp_process;
use telecert::io::*;
use telecert::linalg::{c64, ComplexMatrix};
use telecert::process::*;
use telecert::quantum::werner;
use telecert::report::*;
use telecert::sdp::SdpSolver;

fn certifier() -> Certifier {
    Certifier::new(SdpSolver::default()).unwrap()
}

fn experiments() -> String {
    std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/experiments.json")).unwrap()
}

#[test]
fn grid_parsing() {
    let g = Grid::parse("0:1:0.01").unwrap();
    assert_eq!(g, Grid::default());
    let pts = g.points();
    assert_eq!(pts.len(), 101);
    assert_eq!(pts[0], 0.0);
    assert_eq!(pts[37], 0.37);
    assert_eq!(pts[100], 1.0);
    assert_eq!(Grid::parse("0.2:0.2:0.1").unwrap().points(), vec![0.2]);
    assert_eq!(Grid::parse("0:0.3:0.1").unwrap().points(), vec![0.0, 0.1, 0.2, 0.3]);
    for bad in ["0:1", "a:1:0.1", "0.5:0.2:0.1", "0:1.5:0.1", "0:1:0", "0:1:-0.1", "-0.1:1:0.1", "0:1:nan"] {
        assert!(Grid::parse(bad).is_err(), "{bad}");
    }
}

#[test]
fn float_formatting() {
    assert_eq!(format_float(1.0), "1");
    assert_eq!(format_float(0.625), "0.625");
    assert_eq!(format_float(0.1 + 0.2), "0.3");
    assert_eq!(format_float(1.0 / 3.0), "0.333333333");
    assert_eq!(format_float(-0.0), "0");
    assert_eq!(format_float(1.23456789012e-7), "1.23456789e-7");
    assert_eq!(format_float(2.5e12), "2.5e12");
    assert_eq!(format_float(1e-4), "0.0001");
    assert_eq!(round_sig(0.68301270189, 6), 0.683013);
}

#[test]
fn csv_layout() {
    let row = SweepRow {
        p_noise: 0.5,
        f_expt: 0.625,
        f_avg_state: 0.75,
        alpha: 0.0,
        beta: 0.0,
        negativity: 0.125,
        steerable_weight: 0.0,
        gqt: false,
        flags: vec![],
        stats: vec![],
    };
    let csv = to_csv(&[row]);
    assert_eq!(csv, "p_noise,f_expt,f_avg_state,alpha,beta,negativity,steerable_weight,gqt\n0.5,0.625,0.75,0,0,0.125,0,false\n");
    assert_eq!(CSV_HEADER, "p_noise,f_expt,f_avg_state,alpha,beta,negativity,steerable_weight,gqt");
}

#[test]
fn sweep_rows_at_reference_points() {
    let c = certifier();
    let rows = werner_sweep(&c, &Grid::parse("0:0.7:0.1").unwrap(), None).unwrap();
    let row = |p: f64| rows.iter().find(|r| (r.p_noise - p).abs() < 1e-12).unwrap();

    let r0 = row(0.0);
    assert!((r0.f_expt - 1.0).abs() < 1e-10 && (r0.alpha - 1.0).abs() < 1e-6);
    assert!((r0.beta - 0.464).abs() < 1e-3);
    assert!((r0.negativity - 0.5).abs() < 1e-8 && (r0.steerable_weight - 1.0).abs() < 1e-4 && r0.gqt);

    let r5 = row(0.5);
    assert!((r5.f_expt - 0.625).abs() < 1e-10 && r5.alpha <= 1e-6 && r5.beta <= 1e-6);
    assert!((r5.negativity - 0.125).abs() < 1e-8 && r5.steerable_weight <= 1e-6 && !r5.gqt);

    let r7 = row(0.7);
    assert!(r7.negativity <= 1e-12 && r7.alpha <= 1e-6 && r7.beta <= 1e-6 && r7.steerable_weight <= 1e-6);
    assert!(!r7.gqt);

    assert!(rows.windows(2).all(|w| w[0].p_noise < w[1].p_noise));
}

#[test]
fn noisy_sweep_is_reproducible() {
    let c = certifier();
    let g = Grid::parse("0.1:0.3:0.1").unwrap();
    let noise = Some(ShotNoise { shots: 10_000, seed: 7 });
    let a = to_csv(&werner_sweep(&c, &g, noise).unwrap());
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| to_csv(&werner_sweep(&c, &g, noise).unwrap()));
    assert_eq!(a, b);
}

#[test]
fn certify_reference_processes() {
    let c = certifier();
    let ideal = c.certify(&chi_ideal(), &[]).unwrap();
    assert!(ideal.gqt && (ideal.alpha - 1.0).abs() < 1e-6 && (ideal.beta - 0.464).abs() < 1e-3);
    ideal.check_invariants().unwrap();

    let half = c.certify(&resource_to_process(&werner(0.5).unwrap()).unwrap(), &[]).unwrap();
    assert!((half.f_expt - 0.625).abs() < 1e-12 && half.alpha <= 1e-6 && half.beta <= 1e-6 && !half.gqt);
    half.check_invariants().unwrap();

    let mp = c.certify(&mp_process(), &[]).unwrap();
    assert!((mp.f_expt - 0.5).abs() < 1e-10 && !mp.gqt);
    assert!((mp.f_avg_threshold - 0.788675).abs() < 1e-6);
    mp.check_invariants().unwrap();
}

#[test]
fn certify_flags_non_psd_input() {
    let mut m = resource_to_process(&werner(0.05).unwrap()).unwrap().into_matrix();
    m[(1, 1)] -= c64(0.02, 0.0);
    m[(2, 2)] += c64(0.02, 0.0);
    let report = certifier().certify(&ProcessMatrix::new(m).unwrap(), &[FLAG_CLIPPED]).unwrap();
    assert!(report.flags.iter().any(|f| f == FLAG_NON_PSD));
    assert!(report.flags.iter().any(|f| f == FLAG_CLIPPED));
    report.check_invariants().unwrap();
}

#[test]
fn guard_band_is_strict() {
    let c = certifier();
    assert!(!c.is_gqt(c.f_ct()));
    assert!(!c.is_gqt(c.f_ct() + 5e-7));
    assert!(c.is_gqt(c.f_ct() + 2e-6));
}

#[test]
fn reference_experiment_verdicts() {
    let entries = parse_experiments(&experiments()).unwrap();
    let c = certifier();
    let classified = classify(&entries, c.f_ct(), c.guard).unwrap();
    let rows = classify_rows(&classified);
    let verdicts: Vec<bool> = rows.iter().map(|r| r.2).collect();
    assert_eq!(verdicts, vec![true, true, true, true, true, true, true, true, false, false]);
    let by_value = |v: f64| classified.iter().find(|e| e.entry.value == v).unwrap().gqt;
    assert!(by_value(0.75) && by_value(0.87) && !by_value(0.539) && !by_value(0.655));
    let table = format_table(&classified);
    assert!(table.contains("53.9%") && table.lines().count() == 11);
}

#[test]
fn avg_state_entries_are_converted() {
    let json = r#"[{"technology": "t", "kind": "avg_state", "value": 0.75}]"#;
    let c = classify(&parse_experiments(json).unwrap(), 0.683, 1e-6).unwrap();
    assert!((c[0].process_fidelity - 0.625).abs() < 1e-15 && !c[0].gqt);
}

#[test]
fn experiment_parse_errors() {
    assert!(parse_experiments(r#"[{"technology": "t", "kind": "state", "value": 0.75}]"#).is_err());
    assert!(parse_experiments(r#"[{"technology": "t", "kind": "process", "value": 1.5}]"#).is_err());
    assert!(parse_experiments("not json").is_err());
}

#[test]
fn matrix_json_round_trip() {
    let m = ComplexMatrix::from_rows(&[&[c64(0.5, 0.0), c64(0.1, -0.2)], &[c64(0.1, 0.2), c64(0.5, 0.0)]]);
    let s = matrix_to_json(&m);
    assert_eq!(matrix_from_json(&s).unwrap(), m);
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert_eq!(v["rows"], 2);
    assert_eq!(v["data"][1][1], -0.2);
    assert!(matrix_from_json(r#"{"rows": 2, "cols": 2, "data": [[1, 0]]}"#).is_err());
    assert!(matrix_from_json(r#"{"rows": 1}"#).is_err());
}
