//! Closed-form estimators of `E = [A B]` from a single noisy trajectory.
//!
//! * [`ls_estimate`]: ordinary least squares on the noisy regressors. Biased,
//!   because the regressor `x̂_t` shares `η_t` with the regression residual.
//! * [`iv_estimate`]: instrumental variables with the lagged observation
//!   `î_t = [x̂_{t-1}; u_t]` as instrument. Needs an invertible `A`.
//! * [`bc_estimate`]: least squares multiplied by the inverse of the
//!   bias-correction factor built from a supplied `Ση` estimate.
//! * [`ho_kalman_estimate`]: Markov-parameter regression followed by a shift
//!   fit, used as a baseline.
//!
//! Every estimator reports the condition number of the matrix it inverted.

mod bc;
mod ho_kalman;
mod iv;
mod ls;

pub use bc::{bc_estimate, bc_estimate_autonomous};
pub use ho_kalman::{default_horizon, ho_kalman_estimate};
pub use iv::{iv_estimate, iv_estimate_autonomous};
pub use ls::{ls_bias_decomposition, ls_estimate, ls_estimate_autonomous, BiasDecomposition};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{operator_norm, Matrix};
use crate::system::literal::{dense_matrix, opt_dense_matrix};
use crate::system::{LinearSystem, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "LS")]
    LeastSquares,
    #[serde(rename = "IV")]
    InstrumentalVariable,
    #[serde(rename = "BC")]
    BiasCompensation,
    #[serde(rename = "HoKalman")]
    HoKalman,
}

impl Method {
    pub const ALL: [Method; 4] =
        [Method::LeastSquares, Method::InstrumentalVariable, Method::BiasCompensation, Method::HoKalman];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::LeastSquares => "LS",
            Method::InstrumentalVariable => "IV",
            Method::BiasCompensation => "BC",
            Method::HoKalman => "HoKalman",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ls" => Ok(Method::LeastSquares),
            "iv" => Ok(Method::InstrumentalVariable),
            "bc" => Ok(Method::BiasCompensation),
            "hokalman" | "ho-kalman" | "ho_kalman" => Ok(Method::HoKalman),
            other => Err(Error::InvalidInput(format!("unknown estimator '{other}'"))),
        }
    }
}

/// Recovered `(Â, B̂)`; `b_hat` is `None` for autonomous data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub method: Method,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "A_hat", with = "dense_matrix")]
    pub a_hat: Matrix,
    #[serde(rename = "B_hat", with = "opt_dense_matrix")]
    pub b_hat: Option<Matrix>,
    pub gram_condition: f64,
    #[serde(rename = "T_used")]
    pub t_used: usize,
}

impl Estimate {
    /// Splits a stacked `[Â B̂]` of width `n + m`.
    pub(crate) fn from_stacked(method: Method, stacked: Matrix, n: usize, gram_condition: f64, t_used: usize) -> Result<Self> {
        crate::numerics::ensure_finite(&stacked)?;
        let m = stacked.ncols() - n;
        let a_hat = stacked.columns(0, n).into_owned();
        let b_hat = (m > 0).then(|| stacked.columns(n, m).into_owned());
        Ok(Self { method, n, m, a_hat, b_hat, gram_condition, t_used })
    }

    /// `[Â B̂]`.
    pub fn stacked(&self) -> Matrix {
        match &self.b_hat {
            None => self.a_hat.clone(),
            Some(b) => {
                let mut e = Matrix::zeros(self.n, self.n + self.m);
                e.columns_mut(0, self.n).copy_from(&self.a_hat);
                e.columns_mut(self.n, self.m).copy_from(b);
                e
            }
        }
    }
}

/// Per-block operator-norm errors of an estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationError {
    pub a: f64,
    /// `None` for autonomous systems.
    pub b: Option<f64>,
}

impl EstimationError {
    pub fn max(&self) -> f64 {
        self.b.map_or(self.a, |b| self.a.max(b))
    }
}

pub fn estimation_errors(est: &Estimate, sys: &LinearSystem) -> Result<EstimationError> {
    if est.a_hat.shape() != sys.a().shape() {
        return Err(Error::DimensionMismatch(format!(
            "estimate has n = {}, system has n = {}",
            est.n,
            sys.state_dim()
        )));
    }
    let a = operator_norm(&(sys.a() - &est.a_hat))?;
    let b = match (&est.b_hat, sys.b()) {
        (None, None) => None,
        (Some(b_hat), Some(b)) if b_hat.shape() == b.shape() => Some(operator_norm(&(b - b_hat))?),
        _ => {
            return Err(Error::DimensionMismatch(format!(
                "estimate has m = {}, system has m = {}",
                est.m,
                sys.input_dim()
            )))
        }
    };
    Ok(EstimationError { a, b })
}

/// `max{‖A − Â‖, ‖B − B̂‖}`, or `‖A − Â‖` when autonomous.
pub fn estimation_error(est: &Estimate, sys: &LinearSystem) -> Result<f64> {
    estimation_errors(est, sys).map(|e| e.max())
}

/// Stacks `observations[obs_from .. obs_from + len]` over
/// `inputs[in_from .. in_from + len]`.
fn stack_regressors(traj: &Trajectory, obs_from: usize, in_from: usize, len: usize) -> Matrix {
    let (n, m) = (traj.state_dim(), traj.input_dim());
    let mut z = Matrix::zeros(n + m, len);
    z.rows_mut(0, n).copy_from(&traj.observations.columns(obs_from, len));
    if m > 0 {
        z.rows_mut(n, m).copy_from(&traj.inputs.columns(in_from, len));
    }
    z
}

/// Wraps autonomous observation sequences (`n × (T+1)`) as a trajectory.
fn observations_only(observations: &Matrix) -> Result<Trajectory> {
    crate::numerics::ensure_finite(observations)?;
    Trajectory::from_parts(observations.clone(), observations.clone(), Matrix::zeros(0, 0))
}

fn require_horizon(traj: &Trajectory, min: usize, what: &str) -> Result<()> {
    if traj.horizon() < min {
        return Err(Error::Precondition(format!("{what} needs T ≥ {min}, got T = {}", traj.horizon())));
    }
    Ok(())
}
