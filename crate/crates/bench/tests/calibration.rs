use rccpabe_bench::calibrate::calibrate;
use rccpabe_bench::workload::SimConfig;

#[test]
fn committed_config_is_calibrated() {
    let sim = SimConfig::default();
    let cal = calibrate(&sim).unwrap();
    println!("{}", cal.to_toml());
    let mut applied = sim.clone();
    cal.apply(&mut applied);
    assert_eq!(applied, sim, "rerun `rccpabe simulate --calibrate` and commit its output");
}
