use gsprep::harness::{
    read_csv, read_json, render, run_experiment, scaling_fit, Axis, ExperimentConfig, Format, LedgerField, Method, Sweep,
    CSV_COLUMNS,
};
use gsprep::spectra::{Model, ModelSpec};

fn config(method: Method) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(method, ModelSpec::new(Model::RandomHermitian { dim: 16, gap: 0.1, ground: Some(0.3) }, 4), 0.6);
    cfg.trials = 3;
    cfg.seed = 12;
    cfg
}

#[test]
fn rows_are_ordered_by_point_then_trial() {
    let mut cfg = config(Method::LcuFourier);
    cfg.sweep = Some(Sweep { axis: Axis::Eps, values: vec![1e-3, 1e-2] });
    let rows = run_experiment(&cfg).unwrap();
    assert_eq!(rows.len(), 6);
    let eps: Vec<f64> = rows.iter().map(|r| r.eps.unwrap()).collect();
    assert_eq!(eps, [1e-3, 1e-3, 1e-3, 1e-2, 1e-2, 1e-2]);
    let seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
    assert_eq!(seeds, [12, 13, 14, 12, 13, 14]);
    assert!(rows.iter().all(|r| r.success && r.fidelity > 0.99 && r.wall_ms == 0.0));
}

#[test]
fn csv_and_json_round_trip() {
    let rows = run_experiment(&config(Method::Grid)).unwrap();
    let csv = render(&rows, Format::Csv).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_COLUMNS.join(","));
    let back = read_csv(&csv).unwrap();
    assert_eq!(render(&back, Format::Csv).unwrap(), csv);
    let json = render(&rows, Format::Json).unwrap();
    assert_eq!(read_json(&json).unwrap().len(), rows.len());
}

#[test]
fn gap_sweep_cost_grows_as_gap_shrinks() {
    let mut cfg = config(Method::LcuFourier);
    cfg.trials = 2;
    cfg.sweep = Some(Sweep { axis: Axis::Delta, values: vec![0.025, 0.05, 0.1, 0.2] });
    let rows = run_experiment(&cfg).unwrap();
    let fit = scaling_fit(&rows, Axis::Delta, LedgerField::HamsimTime).unwrap();
    assert!(fit.slope > 0.5, "{fit:?}");
    for w in fit.points.windows(2) {
        assert!(w[1].1 > w[0].1);
    }
}

#[test]
fn failed_runs_become_rows() {
    let mut cfg = config(Method::PeaEstimate);
    // xi missing: every run reports the configuration problem
    cfg.trials = 2;
    let rows = run_experiment(&cfg).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| !r.success && r.error.as_deref().is_some_and(|e| e.contains("xi"))));
}

#[test]
fn bad_instances_are_rejected_up_front() {
    let cfg = ExperimentConfig::new(Method::Grid, ModelSpec::new(Model::RandomHermitian { dim: 12, gap: 0.1, ground: None }, 0), 0.5);
    assert!(run_experiment(&cfg).is_err());
}

#[test]
fn toml_config_runs() {
    let text = r#"
method = "pea-estimate"
overlap = 0.5
trials = 2
seed = 3
fixed_instance = true

[instance]
seed = 9
[instance.model]
kind = "random-hermitian"
dim = 8
gap = 0.1

[params]
xi = 0.015625
"#;
    let cfg = ExperimentConfig::from_toml(text).unwrap();
    let rows = run_experiment(&cfg).unwrap();
    assert!(rows.iter().all(|r| r.success && r.energy_error.unwrap() <= 0.015625));
}
