use std::sync::OnceLock;

use rccpabe_bench::workload::{
    efficiency_report, export_csv, r_squared, run_workload, MeasurementRow, SimConfig, CSV_HEADER,
};
use rccpabe_bench::BenchError;
use rccpabe_chain::CallKind;

fn default_rows() -> &'static [MeasurementRow] {
    static ROWS: OnceLock<Vec<MeasurementRow>> = OnceLock::new();
    ROWS.get_or_init(|| run_workload(&SimConfig::default()).unwrap())
}

fn csv_bytes(rows: &[MeasurementRow]) -> Vec<u8> {
    let mut out = Vec::new();
    export_csv(rows, &mut out).unwrap();
    out
}

fn small() -> SimConfig {
    let mut sim = SimConfig::default();
    sim.workload.user_counts = vec![5];
    sim
}

#[test]
fn one_row_per_function_and_user_count() {
    let rows = default_rows();
    assert_eq!(rows.len(), 12);
    for r in rows {
        assert_eq!(r.efficiency_ratio, r.latency_ms / (r.gas / 1000.0));
        assert_eq!(r.fee_gwei, r.gas * 20.0);
    }
}

#[test]
fn latency_and_gas_are_monotone_and_gas_is_linear() {
    for s in efficiency_report(default_rows()) {
        assert!(s.latency_monotone, "{:?}", s);
        assert!(s.gas_monotone, "{:?}", s);
        assert!(s.gas_r2 >= 0.95, "{:?}", s);
    }
}

#[test]
fn calibrated_bands_and_degradation_hold() {
    let sim = SimConfig::default();
    let report = efficiency_report(default_rows());
    let [dlo, dhi] = sim.calibration.degradation_pct.unwrap();
    for f in [CallKind::UploadCiphertext, CallKind::RevokeAttribute] {
        let s = report.iter().find(|s| s.function == f).unwrap();
        let [lo, hi] = sim.calibration.functions[f.as_str()].band.unwrap();
        assert!(s.ratio_min >= lo && s.ratio_max <= hi, "{:?}", s);
        assert!(s.degradation_pct >= dlo && s.degradation_pct <= dhi, "{:?}", s);
    }
}

#[test]
fn upload_latency_grows_faster_than_evaluate() {
    let growth = |f: CallKind| {
        let rs: Vec<_> = default_rows().iter().filter(|r| r.function == f).collect();
        rs.last().unwrap().latency_ms - rs[0].latency_ms
    };
    assert!(growth(CallKind::UploadCiphertext) > growth(CallKind::EvaluatePolicy));
}

#[test]
fn fixed_seed_runs_are_identical() {
    let a = run_workload(&small()).unwrap();
    let b = run_workload(&small()).unwrap();
    assert_eq!(a, b);
    assert_eq!(csv_bytes(&a), csv_bytes(&b));
}

#[test]
fn different_seed_changes_latency_draws() {
    let mut other = small();
    other.workload.seed = "another".into();
    assert_ne!(run_workload(&small()).unwrap(), run_workload(&other).unwrap());
}

#[test]
fn unknown_function_is_a_config_error() {
    let mut sim = small();
    sim.workload.mix = vec!["search".into()];
    assert!(matches!(run_workload(&sim), Err(BenchError::Config(_))));
    sim.workload.mix = vec!["mintTokens".into()];
    assert!(matches!(run_workload(&sim), Err(BenchError::Config(_))));
}

#[test]
fn invalid_user_counts_and_iterations_are_rejected() {
    let mut sim = small();
    sim.workload.user_counts = vec![10, 5];
    assert!(run_workload(&sim).is_err());
    sim.workload.user_counts = vec![5, 5];
    assert!(run_workload(&sim).is_err());
    let mut sim = small();
    sim.workload.iterations = 0;
    assert!(run_workload(&sim).is_err());
}

#[test]
fn csv_layout() {
    let text = String::from_utf8(csv_bytes(default_rows())).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 13);
    assert_eq!(lines[0], CSV_HEADER.join(","));
    assert!(lines[1].starts_with("evaluatePolicy,5,"));
    assert_eq!(csv_bytes(default_rows()), csv_bytes(default_rows()));
    assert_eq!(String::from_utf8(csv_bytes(&[])).unwrap().trim_end(), CSV_HEADER.join(","));
}

#[test]
fn r_squared_edge_cases() {
    assert_eq!(r_squared(&[(1.0, 2.0), (2.0, 4.0), (3.0, 6.0)]), 1.0);
    assert_eq!(r_squared(&[(1.0, 5.0), (2.0, 5.0)]), 1.0);
    assert!(r_squared(&[(1.0, 1.0), (2.0, 3.0), (3.0, 1.0)]) < 0.1);
}
