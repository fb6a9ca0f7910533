use approx::assert_abs_diff_eq;
use ellsym::estimators::EstimatorChoice;
use ellsym::harness::{
    cmd_rolling, cmd_test, pitfall_alternative, run_simulation, specified_study, Dataset,
    ResultTable, SimulationConfig, TestSpec,
};
use ellsym::radial::RadialFamily;
use ellsym::samplers::{AlternativeSpec, RngStream};
use ellsym::testing::TestKind;
use ellsym::Error;

fn small_config() -> SimulationConfig {
    SimulationConfig::from_json(
        r#"{
            "d": 3, "n": 100, "replications": 40, "seed": 9,
            "tests": ["specified", {"test": "semiparam-t4-raw", "estimators": {"location": "hr"}}, "cassart-pg"],
            "alternatives": [
                {"family": "elliptical", "radial": "gaussian"},
                {"family": "gse", "radial": "t5", "lambda": [4, 0, 0], "label": "skewed"}
            ]
        }"#,
    )
    .unwrap()
}

#[test]
fn config_accepts_plain_and_detailed_test_entries() {
    let cfg = small_config();
    assert_eq!(cfg.level, 0.05);
    assert_eq!(cfg.tests[0], TestSpec::from(TestKind::Specified));
    assert_eq!(cfg.estimators_for(&cfg.tests[1]).to_string(), "hr/tyler");
    assert_eq!(cfg.estimators_for(&cfg.tests[2]).to_string(), "mean/tyler");
}

#[test]
fn config_round_trips_through_json_with_a_stable_hash() {
    let cfg = small_config();
    let back = SimulationConfig::from_json(&cfg.to_json()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.hash(), cfg.hash());
    let mut other = cfg.clone();
    other.seed += 1;
    assert_ne!(other.hash(), cfg.hash());
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = small_config();
    cfg.replications = 0;
    assert!(matches!(cfg.validate(), Err(Error::Config(_))));

    let mut cfg = small_config();
    cfg.alternatives
        .push(AlternativeSpec::gse(RadialFamily::Gaussian, &[1.0, 2.0]));
    assert!(matches!(cfg.validate(), Err(Error::Config(_))));

    assert!(SimulationConfig::from_json(
        r#"{"d": 2, "n": 10, "replications": 5, "tests": ["specified"],
        "alternatives": [{"family": "msgh"}]}"#
    )
    .is_err());
    assert!(SimulationConfig::from_json(
        r#"{"d": 2, "n": 10, "replications": 5, "tests": ["semiparam-gaussian"],
        "alternatives": [{"family": "elliptical", "radial": "t5"}]}"#
    )
    .is_err());
}

#[test]
fn simulation_is_reproducible_and_independent_of_thread_count() {
    let cfg = small_config();
    let a = run_simulation(&cfg).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_simulation(&cfg).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.rows.len(), 6);
    for row in &a.rows {
        let p = row.rejection_frequency.unwrap();
        assert!((0.0..=1.0).contains(&p));
        assert_eq!(row.replications, 40);
    }
    assert!(
        a.frequency("skewed", "semiparam-t4-raw").unwrap()
            > a.frequency("gaussian null", "semiparam-t4-raw")
                .unwrap_or(0.0)
    );
}

#[test]
fn result_table_round_trips_through_csv() {
    let table = run_simulation(&small_config()).unwrap();
    let mut buf = Vec::new();
    table.write_csv(&mut buf).unwrap();
    let back = ResultTable::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, table);
}

#[test]
fn cells_that_fail_too_often_are_reported_not_averaged() {
    // Two observations in three dimensions: no scatter estimate exists.
    let cfg = SimulationConfig {
        d: 3,
        n: 2,
        replications: 10,
        level: 0.05,
        seed: 1,
        alternatives: vec![AlternativeSpec::elliptical(RadialFamily::Gaussian)],
        tests: vec![TestSpec::from(TestKind::CassartPg)],
        estimators: EstimatorChoice::default(),
        output: None,
    };
    let table = run_simulation(&cfg).unwrap();
    let row = &table.rows[0];
    assert_eq!(row.rejection_frequency, None);
    assert_eq!(row.failures, 10);
    assert!(row.error.is_some());
    assert_eq!(table.failed_cells().count(), 1);
}

#[test]
fn preset_specified_study_covers_the_skewness_grid() {
    let cfg = specified_study(RadialFamily::Gaussian, 50, 10, 1);
    assert_eq!(cfg.alternatives.len(), 6);
    assert_eq!(cfg.tests.len(), 3);
    cfg.validate().unwrap();
}

#[test]
fn dataset_detects_headers_and_label_columns() {
    let d =
        Dataset::from_reader("date,a,b\n2020-01-01,1,2\n2020-01-02,3,4.5\n".as_bytes()).unwrap();
    assert_eq!((d.n(), d.dim()), (2, 2));
    assert_eq!(
        d.column_names.as_deref(),
        Some(&["a".to_string(), "b".to_string()][..])
    );
    assert_eq!(d.labels.as_ref().unwrap()[1], "2020-01-02");
    assert_eq!(d.values[(1, 1)], 4.5);

    let plain = Dataset::from_reader("1,2,3\n4,5,6\n\n7,8,9\n".as_bytes()).unwrap();
    assert_eq!((plain.n(), plain.dim()), (3, 3));
    assert!(plain.column_names.is_none() && plain.labels.is_none());

    let single = Dataset::from_reader("1\n2\n3\n".as_bytes()).unwrap();
    assert_eq!((single.n(), single.dim()), (3, 1));
}

#[test]
fn dataset_errors_carry_line_numbers() {
    match Dataset::from_reader("a,b\n1,2\n3\n".as_bytes()) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
    match Dataset::from_reader("1,2\n3,abc\n".as_bytes()) {
        Err(Error::Parse { line, message }) => {
            assert_eq!(line, 2);
            assert!(message.contains("abc"));
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(
        Dataset::from_reader("".as_bytes()),
        Err(Error::Parse { .. })
    ));
}

fn dataset(n: usize, d: usize) -> Dataset {
    let values = AlternativeSpec::elliptical(RadialFamily::student(6.0))
        .with_dim(d)
        .sample(n, RngStream::new(4, 0))
        .unwrap();
    Dataset {
        values,
        column_names: None,
        labels: None,
    }
}

#[test]
fn rolling_window_count_matches_floor_formula() {
    let data = dataset(97, 2);
    let tests = [TestKind::CassartPg];
    for (w, s) in [(30, 10), (40, 7), (97, 5), (20, 100)] {
        let rows = cmd_rolling(&data, w, s, &tests, None, EstimatorChoice::default()).unwrap();
        assert_eq!(rows.len(), (97 - w) / s + 1, "window {w} step {s}");
        assert_eq!(
            rows.last().unwrap().window_end - rows.last().unwrap().window_start,
            w
        );
    }
    assert!(cmd_rolling(&data, 98, 1, &tests, None, EstimatorChoice::default()).is_err());
    assert!(cmd_rolling(&data, 10, 0, &tests, None, EstimatorChoice::default()).is_err());
}

#[test]
fn rolling_windows_match_one_shot_tests() {
    let data = dataset(60, 2);
    let tests = [TestKind::Semiparam(
        RadialFamily::student(4.0),
        Default::default(),
    )];
    let rows = cmd_rolling(&data, 40, 20, &tests, None, EstimatorChoice::default()).unwrap();
    let window = Dataset {
        values: data.values.rows(20, 40).into_owned(),
        column_names: None,
        labels: None,
    };
    let direct = cmd_test(&window, &tests, None, EstimatorChoice::default()).unwrap();
    assert_abs_diff_eq!(rows[1].p_value, direct[0].p_value, epsilon = 1e-14);
}

#[test]
fn test_command_checks_the_location_dimension() {
    let data = dataset(30, 3);
    let err = cmd_test(
        &data,
        &[TestKind::Specified],
        Some(&[0.0, 0.0]),
        EstimatorChoice::default(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    let ok = cmd_test(
        &data,
        &[TestKind::Specified, TestKind::CassartPg],
        Some(&[0.0; 3]),
        EstimatorChoice::default(),
    );
    assert_eq!(ok.unwrap().len(), 2);
}

#[test]
fn pitfall_scenarios_differ_only_by_location() {
    let a = pitfall_alternative(-6.0, "a")
        .sample(20_000, RngStream::new(1, 0))
        .unwrap();
    let b = pitfall_alternative(6.0, "b")
        .sample(20_000, RngStream::new(1, 0))
        .unwrap();
    let mean = |x: &nalgebra::DMatrix<f64>| x.column(0).mean();
    assert_abs_diff_eq!(mean(&a), 0.0, epsilon = 0.15);
    assert_abs_diff_eq!(mean(&b), 12.0, epsilon = 0.15);
    assert_abs_diff_eq!(
        &b - &a,
        nalgebra::DMatrix::from_fn(20_000, 10, |_, j| if j == 0 { 12.0 } else { 0.0 }),
        epsilon = 1e-9
    );
}
