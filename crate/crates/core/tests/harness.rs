use noisy_sysid::estimators::Method;
use noisy_sysid::experiment::{
    builtin_config, emit_csv, emit_summary_csv, emit_svg_plot, read_csv, run_experiment, BuiltinConfig,
    ExperimentConfig, SigmaEtaHat,
};
use noisy_sysid::system::LinearSystem;
use tempfile::TempDir;

fn small(sys: LinearSystem, estimators: Vec<Method>, t_grid: Vec<usize>, trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        system: sys,
        estimators,
        t_grid,
        trials,
        master_seed: 3,
        sigma_eta_hat: SigmaEtaHat::exact(),
        ho_kalman_k: None,
        delta: 0.05,
        description: "harness test".into(),
    }
}

#[test]
fn csv_file_round_trip() {
    let dir = TempDir::new().unwrap();
    let cfg = small(
        LinearSystem::scalar(0.5, 1.0, 1.0, 1.0, 1.0).unwrap(),
        vec![Method::LeastSquares, Method::HoKalman, Method::InstrumentalVariable],
        vec![3, 50, 500],
        4,
    );
    let res = run_experiment(&cfg).unwrap();
    assert!(res.records.iter().any(|r| r.failed));
    let path = dir.path().join("records.csv");
    emit_csv(&res, &path).unwrap();
    assert_eq!(read_csv(&path).unwrap(), res.records);
    emit_summary_csv(&res, dir.path().join("summary.csv")).unwrap();
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(summary.starts_with("estimator,T,n_ok,n_failed,median,q1,q3\n"));
    assert_eq!(summary.lines().count(), 1 + 9);
}

#[test]
fn svg_is_well_formed_xml() {
    let dir = TempDir::new().unwrap();
    let one = small(LinearSystem::scalar(0.5, 1.0, 1.0, 1.0, 1.0).unwrap(), vec![Method::LeastSquares], vec![200], 2);
    let path = dir.path().join("one.svg");
    emit_svg_plot(&run_experiment(&one).unwrap(), &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("polyline")).count(), 1);
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("circle")).count(), 1);

    let two = small(
        LinearSystem::scalar(0.5, 1.0, 1.0, 1.0, 1.0).unwrap(),
        vec![Method::LeastSquares, Method::BiasCompensation],
        vec![100, 1000],
        3,
    );
    emit_svg_plot(&run_experiment(&two).unwrap(), &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("polyline")).count(), 2);
    let legend: Vec<&str> = doc
        .descendants()
        .filter(|n| n.attribute("class") == Some("legend"))
        .filter_map(|g| g.descendants().find(|c| c.has_tag_name("text")).and_then(|t| t.text()))
        .collect();
    assert_eq!(legend, vec!["LS", "BC"]);
    assert!(!text.contains("href"));
}

#[test]
fn noiseless_config_recovers_exactly() {
    let sys = builtin_config(BuiltinConfig::PaperNonautonomous).system;
    let n = sys.state_dim();
    let quiet = sys.with_sigma_eta(noisy_sysid::numerics::Matrix::zeros(n, n)).unwrap();
    let quiet = LinearSystem::new(
        quiet.a().clone(),
        quiet.b().unwrap().clone(),
        noisy_sysid::numerics::Matrix::zeros(n, n),
        quiet.sigma_u().unwrap().clone(),
        quiet.sigma_eta().clone(),
    )
    .unwrap();
    let cfg = small(quiet, vec![Method::LeastSquares, Method::InstrumentalVariable, Method::BiasCompensation], vec![50], 2);
    let res = run_experiment(&cfg).unwrap();
    for r in &res.records {
        assert!(r.err_max.unwrap() <= 1e-8, "{r:?}");
    }
}

#[test]
fn scalar_benchmark_ls_bias_and_slopes() {
    let mut cfg = builtin_config(BuiltinConfig::ScalarBenchmark);
    cfg.system = LinearSystem::scalar_autonomous(0.5, 1.0, 1.0).unwrap();
    let res = run_experiment(&cfg).unwrap();
    let ls = res.median(Method::LeastSquares, 100_000).unwrap();
    assert!((ls - (0.5 - 2.0 / 7.0)).abs() <= 0.05, "LS median {ls}");
    for m in [Method::InstrumentalVariable, Method::BiasCompensation] {
        let e3 = res.median(m, 1_000).unwrap();
        let e5 = res.median(m, 100_000).unwrap();
        let slope = (e5 / e3).log10() / 2.0;
        assert!((-0.65..=-0.35).contains(&slope), "{m} slope {slope}");
    }
}

#[test]
fn autonomous_builtin_curve_shapes() {
    let res = run_experiment(&builtin_config(BuiltinConfig::PaperAutonomous)).unwrap();
    for m in [Method::InstrumentalVariable, Method::BiasCompensation] {
        let curve: Vec<f64> = [500, 2000, 8000].iter().map(|&t| res.median(m, t).unwrap()).collect();
        assert!(curve[0] > curve[1] && curve[1] > curve[2], "{m} {curve:?}");
    }
    // LS converges to its bias, not to zero.
    assert!(res.median(Method::LeastSquares, 8000).unwrap() > 0.2);
}
