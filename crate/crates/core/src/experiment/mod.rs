//! Seeded Monte-Carlo sweeps over the trajectory length, with CSV and SVG
//! output.

mod config;
mod output;
mod plot;
mod run;

pub use config::{builtin_config, BuiltinConfig, ExperimentConfig, SigmaEtaHat};
pub use output::{
    emit_config_echo, emit_csv, emit_summary_csv, format_float, read_csv, read_records, write_records, write_summary,
    RECORDS_HEADER, SUMMARY_HEADER,
};
pub use plot::{emit_svg_plot, render_svg};
pub use run::{run_experiment, run_experiment_with, Execution, ExperimentResult, SummaryRow, TrialRecord};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::Method;
    use crate::system::LinearSystem;

    fn scalar_cfg(var_w: f64, var_eta: f64, estimators: Vec<Method>, t_grid: Vec<usize>, trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            system: LinearSystem::scalar(0.5, 1.0, var_w, 1.0, var_eta).unwrap(),
            estimators,
            t_grid,
            trials,
            master_seed: 7,
            sigma_eta_hat: SigmaEtaHat::exact(),
            ho_kalman_k: None,
            delta: 0.05,
            description: "scalar <test>".into(),
        }
    }

    #[test]
    fn noiseless_runs_recover_exactly() {
        let cfg = scalar_cfg(0.0, 0.0, Method::ALL.to_vec(), vec![50], 3);
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.records.len(), 12);
        for r in &res.records {
            assert!(!r.failed, "{r:?}");
            assert!(r.err_max.unwrap() <= 1e-8, "{r:?}");
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let cfg = scalar_cfg(1.0, 1.0, vec![Method::LeastSquares, Method::BiasCompensation], vec![100, 400], 6);
        let a = run_experiment_with(&cfg, Execution::Sequential).unwrap();
        let b = run_experiment_with(&cfg, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, run_experiment(&cfg).unwrap());
        let order: Vec<_> = a.records.iter().map(|r| (r.estimator, r.horizon, r.trial)).collect();
        assert_eq!(order[0], (Method::LeastSquares, 100, 0));
        assert_eq!(order[6], (Method::LeastSquares, 400, 0));
        assert_eq!(order[12], (Method::BiasCompensation, 100, 0));
    }

    #[test]
    fn bc_with_zero_sigma_reproduces_ls() {
        let mut cfg = scalar_cfg(1.0, 1.0, vec![Method::LeastSquares, Method::BiasCompensation], vec![200], 4);
        cfg.sigma_eta_hat = SigmaEtaHat::Literal(crate::system::MatrixLiteral::Zero { rows: 1, cols: 1 });
        let res = run_experiment(&cfg).unwrap();
        for t in 0..4 {
            let ls = &res.records[t];
            let bc = &res.records[4 + t];
            assert_eq!((ls.err_a, ls.err_b, ls.err_max), (bc.err_a, bc.err_b, bc.err_max));
        }
    }

    #[test]
    fn failures_are_recorded() {
        let cfg = scalar_cfg(1.0, 1.0, vec![Method::HoKalman, Method::LeastSquares], vec![3, 100], 2);
        let res = run_experiment(&cfg).unwrap();
        let hk_small = res.summary_for(Method::HoKalman, 3).unwrap();
        assert_eq!((hk_small.n_ok, hk_small.n_failed, hk_small.median), (0, 2, None));
        assert!(res.records.iter().filter(|r| r.failed).all(|r| r.err_max.is_none()));
        assert_eq!(res.summary_for(Method::LeastSquares, 100).unwrap().n_ok, 2);
    }

    #[test]
    fn autonomous_leaves_err_b_empty() {
        let mut cfg = scalar_cfg(1.0, 1.0, vec![Method::InstrumentalVariable], vec![100], 1);
        cfg.system = LinearSystem::scalar_autonomous(0.5, 1.0, 1.0).unwrap();
        let res = run_experiment(&cfg).unwrap();
        let mut buf = Vec::new();
        write_records(&res.records, &mut buf).unwrap();
        let row = String::from_utf8(buf).unwrap().lines().nth(1).unwrap().to_string();
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[4], "");
        assert!(!fields[3].is_empty());
    }

    #[test]
    fn svg_contains_one_polyline_per_estimator() {
        let cfg = scalar_cfg(1.0, 1.0, vec![Method::LeastSquares, Method::InstrumentalVariable], vec![100, 1000], 3);
        let svg = render_svg(&run_experiment(&cfg).unwrap()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">LS</text>") && svg.contains(">IV</text>"));
        assert!(svg.contains("scalar &lt;test&gt;"));
    }

    #[test]
    fn empty_summary_cannot_be_plotted() {
        let cfg = scalar_cfg(1.0, 1.0, vec![Method::HoKalman], vec![3], 1);
        let res = run_experiment(&cfg).unwrap();
        assert!(matches!(render_svg(&res), Err(crate::Error::EmptyPlot)));
    }
}
