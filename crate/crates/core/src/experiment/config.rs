use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::Method;
use crate::numerics::Matrix;
use crate::system::literal::cyclic_shift;
use crate::system::{LinearSystem, MatrixLiteral};
use crate::theory::DEFAULT_DELTA;

/// How the bias-compensation estimator obtains its `Ση` estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaEtaHat {
    /// The token `"exact"`.
    Token(String),
    /// `Ση + eps · I`, a symmetric perturbation of operator norm `eps`.
    Perturb { perturb: f64 },
    Literal(MatrixLiteral),
}

impl Default for SigmaEtaHat {
    fn default() -> Self {
        SigmaEtaHat::Token("exact".into())
    }
}

impl SigmaEtaHat {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn resolve(&self, sys: &LinearSystem) -> Result<Matrix> {
        let n = sys.state_dim();
        let m = match self {
            SigmaEtaHat::Token(t) if t == "exact" => sys.sigma_eta().clone(),
            SigmaEtaHat::Token(t) => {
                return Err(Error::InvalidConfig(format!("unknown sigma_eta_hat token '{t}' (expected \"exact\")")))
            }
            SigmaEtaHat::Perturb { perturb } => {
                if !(perturb.is_finite() && *perturb >= 0.0) {
                    return Err(Error::InvalidConfig("sigma_eta_hat perturbation must be a non-negative number".into()));
                }
                sys.sigma_eta() + Matrix::identity(n, n) * *perturb
            }
            SigmaEtaHat::Literal(lit) => lit.to_matrix()?,
        };
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::InvalidConfig(format!("sigma_eta_hat must be {n}x{n}, got {}x{}", m.nrows(), m.ncols())));
        }
        Ok(m)
    }
}

fn default_trials() -> usize {
    20
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: LinearSystem,
    pub estimators: Vec<Method>,
    #[serde(rename = "T_grid")]
    pub t_grid: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub sigma_eta_hat: SigmaEtaHat,
    /// Markov-parameter horizon for the Ho-Kalman baseline; `n + 1` if unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ho_kalman_k: Option<usize>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub description: String,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.estimators.is_empty() {
            return bad("at least one estimator is required".into());
        }
        for (i, m) in self.estimators.iter().enumerate() {
            if self.estimators[..i].contains(m) {
                return bad(format!("estimator {m} listed twice"));
            }
        }
        if self.system.is_autonomous() && self.estimators.contains(&Method::HoKalman) {
            return bad("HoKalman needs a system with inputs".into());
        }
        if self.t_grid.is_empty() || self.t_grid[0] == 0 {
            return bad("T_grid must be a non-empty list of positive integers".into());
        }
        if self.t_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("T_grid must be strictly increasing".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.ho_kalman_k.is_some_and(|k| k < 2) {
            return bad("ho_kalman_k must be at least 2".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        self.sigma_eta_hat.resolve(&self.system)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinConfig {
    PaperNonautonomous,
    PaperAutonomous,
    ScalarBenchmark,
}

impl BuiltinConfig {
    pub const ALL: [BuiltinConfig; 3] =
        [BuiltinConfig::PaperNonautonomous, BuiltinConfig::PaperAutonomous, BuiltinConfig::ScalarBenchmark];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinConfig::PaperNonautonomous => "paper-nonautonomous",
            BuiltinConfig::PaperAutonomous => "paper-autonomous",
            BuiltinConfig::ScalarBenchmark => "scalar-benchmark",
        }
    }
}

impl std::str::FromStr for BuiltinConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BuiltinConfig::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown builtin config '{s}'")))
    }
}

/// Ready-made experiments: the 20-state cyclic-shift systems with and
/// without inputs, and a scalar benchmark with known asymptotics.
pub fn builtin_config(which: BuiltinConfig) -> ExperimentConfig {
    use Method::*;
    let a = cyclic_shift(20) * 0.8;
    let i20 = Matrix::identity(20, 20);
    let (system, estimators, t_grid, trials, description) = match which {
        BuiltinConfig::PaperNonautonomous => (
            LinearSystem::new(a, Matrix::identity(20, 10), i20.clone(), Matrix::identity(10, 10), i20)
                .expect("valid builtin system"),
            vec![LeastSquares, HoKalman, InstrumentalVariable, BiasCompensation],
            vec![500, 2000, 8000],
            20,
            "Non-autonomous 20-state system: A = 0.8 x cyclic shift, B = [I_10; 0], Sigma_w = Sigma_eta = I_20. \
             Sigma_u = I_10 (m = 10) so that it matches the 20x10 input matrix; a 5x5 input covariance would be \
             dimensionally inconsistent with B."
                .to_string(),
        ),
        BuiltinConfig::PaperAutonomous => (
            LinearSystem::autonomous(a, i20.clone(), i20).expect("valid builtin system"),
            vec![LeastSquares, InstrumentalVariable, BiasCompensation],
            vec![500, 2000, 8000],
            20,
            "Autonomous 20-state system: A = 0.8 x cyclic shift, Sigma_w = Sigma_eta = I_20.".to_string(),
        ),
        BuiltinConfig::ScalarBenchmark => (
            LinearSystem::scalar(0.5, 1.0, 1.0, 1.0, 1.0).expect("valid builtin system"),
            vec![LeastSquares, InstrumentalVariable, BiasCompensation],
            vec![1_000, 10_000, 100_000],
            50,
            "Scalar benchmark: a = 0.5, b = 1, unit input, process and observation noise variances.".to_string(),
        ),
    };
    ExperimentConfig {
        system,
        estimators,
        t_grid,
        trials,
        master_seed: 1,
        sigma_eta_hat: SigmaEtaHat::exact(),
        ho_kalman_k: None,
        delta: DEFAULT_DELTA,
        description,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_shapes() {
        let non = builtin_config(BuiltinConfig::PaperNonautonomous);
        assert_eq!((non.system.state_dim(), non.system.input_dim()), (20, 10));
        assert_eq!(non.system.sigma_w(), &Matrix::identity(20, 20));
        assert_eq!(non.system.sigma_eta(), &Matrix::identity(20, 20));
        assert_eq!(non.system.sigma_u().unwrap(), &Matrix::identity(10, 10));
        assert_eq!(non.system.a()[(0, 19)], 0.8);
        assert!(non.description.contains("I_10"));

        let auto = builtin_config(BuiltinConfig::PaperAutonomous);
        assert!(auto.system.is_autonomous() && auto.system.sigma_u().is_none());
        assert_eq!(auto.system.a(), non.system.a());

        let scalar = builtin_config(BuiltinConfig::ScalarBenchmark);
        assert_eq!(scalar.t_grid, vec![1_000, 10_000, 100_000]);
        assert_eq!(scalar.trials, 50);

        for c in BuiltinConfig::ALL {
            builtin_config(c).validate().unwrap();
            assert_eq!(c.name().parse::<BuiltinConfig>().unwrap(), c);
        }
        assert!("twenty-state".parse::<BuiltinConfig>().is_err());
    }

    #[test]
    fn validation_rules() {
        let mut cfg = builtin_config(BuiltinConfig::PaperAutonomous);
        cfg.estimators.push(Method::HoKalman);
        assert!(cfg.validate().is_err());

        let mut cfg = builtin_config(BuiltinConfig::ScalarBenchmark);
        cfg.t_grid = vec![100, 100];
        assert!(cfg.validate().is_err());
        cfg.t_grid = vec![100];
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        cfg.trials = 1;
        cfg.sigma_eta_hat = SigmaEtaHat::Token("estimated".into());
        assert!(cfg.validate().is_err());
        cfg.sigma_eta_hat = SigmaEtaHat::Perturb { perturb: -0.1 };
        assert!(cfg.validate().is_err());
        cfg.sigma_eta_hat = SigmaEtaHat::Perturb { perturb: 0.1 };
        cfg.validate().unwrap();
    }

    #[test]
    fn sigma_eta_hat_forms_parse() {
        let sys = LinearSystem::scalar(0.5, 1.0, 1.0, 1.0, 2.0).unwrap();
        let parse = |s: &str| serde_json::from_str::<SigmaEtaHat>(s).unwrap().resolve(&sys).unwrap()[(0, 0)];
        assert_eq!(parse(r#""exact""#), 2.0);
        assert_eq!(parse(r#"{"perturb":0.25}"#), 2.25);
        assert_eq!(parse(r#"{"kind":"identity","dim":1,"scale":3}"#), 3.0);
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = builtin_config(BuiltinConfig::PaperNonautonomous);
        let json = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
        assert!(json.contains("\"T_grid\""));
    }
}
