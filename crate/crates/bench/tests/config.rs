use std::path::Path;

use rta_bench::config::{
    load_matrix_config, paper_matrix, parse_matrix_config, BenchConfig, ControllerKind,
    PolicySource,
};
use rta_bench::{BenchError, OutputFormat, Suite};
use rta_core::filters::{FilterConfig, FilterKind};

fn parse(text: &str) -> Result<rta_bench::config::MatrixFile, BenchError> {
    parse_matrix_config(text, Path::new("bench.toml"), 42)
}

#[test]
fn scalar_file_gives_one_config() {
    let file = parse(
        r#"
controller = "random"
rta = "dasif"
dt = 10
tol = 1e-3
suite = "unsafe"
cases = 50
format = "json"
out = "results.json"
"#,
    )
    .unwrap();
    assert_eq!(file.configs.len(), 1);
    let c = &file.configs[0];
    assert_eq!(c.cases, 50);
    assert_eq!(c.seed, 42);
    assert_eq!(c.suite, Suite::NotSafe);
    let rta = c.rta.as_ref().unwrap();
    assert_eq!(rta.kind, FilterKind::Discrete);
    assert_eq!((rta.dt, rta.tolerance), (10.0, 1e-3));
    assert_eq!(file.format, Some(OutputFormat::Json));
    assert_eq!(file.out.as_deref(), Some(Path::new("results.json")));
}

#[test]
fn sweeps_expand_and_collapse_duplicates() {
    let file = parse(
        r#"
controller = ["random", "no-sensors"]
rta = ["none", "easif", "iasif", "dasif"]
dt = [1, 10]
tol = [1e-3, 1e-4]
suite = ["safe", "unsafe"]
seed = 3
"#,
    )
    .unwrap();
    // per suite: random → easif 1 + iasif 2 + dasif 4 = 7 (none is skipped);
    // no-sensors → none 1 + 7 = 8
    assert_eq!(file.configs.len(), 2 * 15);
    assert_eq!(file.skipped.len(), 2);
    let mut labels: Vec<_> = file.configs.iter().map(|c| c.label.clone()).collect();
    labels.sort();
    labels.dedup();
    assert_eq!(labels.len(), file.configs.len());
    assert!(file.configs.iter().all(|c| c.seed == 3));
}

#[test]
fn physical_parameters_reach_the_filter() {
    let file =
        parse("rta = \"iasif\"\ndt = 10\nhorizon = 40\nmass = 24\nr_max = 500\ntime_limit = 0.5\n")
            .unwrap();
    let c = &file.configs[0];
    let rta = c.rta.as_ref().unwrap();
    assert_eq!(rta.horizon, 40.0);
    assert_eq!(rta.cw.mass, 24.0);
    assert_eq!(rta.safety.r_max, 500.0);
    assert_eq!(c.safety.r_max, 500.0);
    assert_eq!(rta.trajectory_steps(), 4);
}

#[test]
fn policy_weights_are_assigned_per_variant() {
    let file = parse(
        "controller = [\"no-sensors\", \"all-sensors\"]\nrta = \"none\"\nweights_no_sensors = \"a.bin\"\npolicy_seed = 9\n",
    )
    .unwrap();
    assert_eq!(file.configs[0].policy, PolicySource::File("a.bin".into()));
    assert_eq!(file.configs[1].policy, PolicySource::Seeded(9));
}

#[test]
fn malformed_files_are_rejected() {
    for bad in [
        "bogus = 1",
        "cases = [1, 2]",
        "cases = 0",
        "dt = \"fast\"",
        "controller = \"greedy\"",
        "rta = \"magic\"",
        "format = \"xml\"",
        "seed = -1",
        "time_limit = 0",
        "rta = [",
    ] {
        parse(bad).expect_err(bad);
    }
}

#[test]
fn invalid_filter_parameters_are_rejected() {
    let err = parse("rta = \"iasif\"\ndt = 3\n").unwrap_err();
    assert!(matches!(err, BenchError::Parse { .. }), "{err}");
    assert!(parse("rta = \"dasif\"\ntime_limit = -1\n").is_err());
}

#[test]
fn missing_file_reports_io_error() {
    let err = load_matrix_config(Path::new("/nonexistent/bench.toml"), 0).unwrap_err();
    assert!(matches!(err, BenchError::Io { .. }));
}

#[test]
fn reference_matrix_is_valid() {
    let configs = paper_matrix(10, 1);
    assert!(!configs.is_empty());
    for c in &configs {
        c.validate().unwrap();
    }
    assert!(configs
        .iter()
        .any(|c| c.rta.is_none() && c.controller == ControllerKind::AllSensors));
    assert!(configs.iter().any(
        |c| c.rta.as_ref().map(|r| r.kind) == Some(FilterKind::Discrete)
            && c.suite == Suite::NotSafe
    ));
}

#[test]
fn default_labels_name_the_configuration() {
    let c = BenchConfig::new(
        ControllerKind::Random,
        Some(FilterConfig::discrete(10.0, 1e-4)),
        Suite::Safe,
        5,
        0,
    );
    let label = c.default_label();
    assert!(
        label.contains("random") && label.contains("dasif") && label.contains("safe"),
        "{label}"
    );
}
