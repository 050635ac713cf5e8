//! Linear time-invariant systems observed through additive Gaussian noise:
//!
//! ```text
//! x_{t+1} = A x_t + B u_t + w_t,   x̂_t = x_t + η_t,   x_0 = 0
//! ```
//!
//! with `u_t ~ N(0, Σu)`, `w_t ~ N(0, Σw)`, `η_t ~ N(0, Ση)` all i.i.d.

mod assumptions;
pub mod literal;

pub use assumptions::{
    check_assumptions, controllability_matrix, stability_constants, stability_constants_with_rate, AssumptionReport,
    StabilityConstants, Verdict, DEFAULT_STABILITY_TOL,
};
pub use literal::MatrixLiteral;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{psd_factor, GaussianSampler, Matrix, RngStream};

/// The model `(A, B, Σw, Σu, Ση)`. `B` and `Σu` are absent for autonomous
/// systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemFile", into = "SystemFile")]
pub struct LinearSystem {
    a: Matrix,
    b: Option<Matrix>,
    sigma_w: Matrix,
    sigma_u: Option<Matrix>,
    sigma_eta: Matrix,
}

impl LinearSystem {
    pub fn new(a: Matrix, b: Matrix, sigma_w: Matrix, sigma_u: Matrix, sigma_eta: Matrix) -> Result<Self> {
        let sys = Self { a, b: Some(b), sigma_w, sigma_u: Some(sigma_u), sigma_eta };
        sys.validate()?;
        Ok(sys)
    }

    pub fn autonomous(a: Matrix, sigma_w: Matrix, sigma_eta: Matrix) -> Result<Self> {
        let sys = Self { a, b: None, sigma_w, sigma_u: None, sigma_eta };
        sys.validate()?;
        Ok(sys)
    }

    /// Scalar system `x_{t+1} = a x_t + b u_t + w_t` with the given variances.
    pub fn scalar(a: f64, b: f64, var_w: f64, var_u: f64, var_eta: f64) -> Result<Self> {
        let s = |v: f64| Matrix::from_element(1, 1, v);
        Self::new(s(a), s(b), s(var_w), s(var_u), s(var_eta))
    }

    pub fn scalar_autonomous(a: f64, var_w: f64, var_eta: f64) -> Result<Self> {
        let s = |v: f64| Matrix::from_element(1, 1, v);
        Self::autonomous(s(a), s(var_w), s(var_eta))
    }

    fn validate(&self) -> Result<()> {
        let n = self.a.nrows();
        if n == 0 || !self.a.is_square() {
            return Err(Error::DimensionMismatch(format!("A must be square and non-empty, got {}x{}", n, self.a.ncols())));
        }
        crate::numerics::ensure_finite(&self.a)?;
        let square = |name: &str, m: &Matrix, dim: usize| {
            if m.nrows() != dim || m.ncols() != dim {
                Err(Error::DimensionMismatch(format!("{name} must be {dim}x{dim}, got {}x{}", m.nrows(), m.ncols())))
            } else {
                psd_factor(m).map(|_| ())
            }
        };
        square("sigma_w", &self.sigma_w, n)?;
        square("sigma_eta", &self.sigma_eta, n)?;
        match (&self.b, &self.sigma_u) {
            (None, None) => Ok(()),
            (Some(b), Some(su)) => {
                if b.nrows() != n || b.ncols() == 0 {
                    return Err(Error::DimensionMismatch(format!("B must be {n}xm with m ≥ 1, got {}x{}", b.nrows(), b.ncols())));
                }
                crate::numerics::ensure_finite(b)?;
                square("sigma_u", su, b.ncols())
            }
            _ => Err(Error::DimensionMismatch("B and sigma_u must be given together".into())),
        }
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    /// Number of inputs; zero for autonomous systems.
    pub fn input_dim(&self) -> usize {
        self.b.as_ref().map_or(0, |b| b.ncols())
    }

    pub fn is_autonomous(&self) -> bool {
        self.b.is_none()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> Option<&Matrix> {
        self.b.as_ref()
    }

    pub fn sigma_w(&self) -> &Matrix {
        &self.sigma_w
    }

    pub fn sigma_u(&self) -> Option<&Matrix> {
        self.sigma_u.as_ref()
    }

    pub fn sigma_eta(&self) -> &Matrix {
        &self.sigma_eta
    }

    /// `E = [A B]`, or `A` for autonomous systems.
    pub fn stacked(&self) -> Matrix {
        match &self.b {
            None => self.a.clone(),
            Some(b) => {
                let n = self.state_dim();
                let mut e = Matrix::zeros(n, n + b.ncols());
                e.columns_mut(0, n).copy_from(&self.a);
                e.columns_mut(n, b.ncols()).copy_from(b);
                e
            }
        }
    }

    /// Same system with a different observation-noise covariance.
    pub fn with_sigma_eta(&self, sigma_eta: Matrix) -> Result<Self> {
        let sys = Self { sigma_eta, ..self.clone() };
        sys.validate()?;
        Ok(sys)
    }
}

/// On-disk form of a [`LinearSystem`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(rename = "A")]
    pub a: MatrixLiteral,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<MatrixLiteral>,
    pub sigma_w: MatrixLiteral,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_u: Option<MatrixLiteral>,
    pub sigma_eta: MatrixLiteral,
}

impl TryFrom<SystemFile> for LinearSystem {
    type Error = Error;

    fn try_from(f: SystemFile) -> Result<Self> {
        let a = f.a.to_matrix()?;
        let sigma_w = f.sigma_w.to_matrix()?;
        let sigma_eta = f.sigma_eta.to_matrix()?;
        match (f.b, f.sigma_u) {
            (None, None) => LinearSystem::autonomous(a, sigma_w, sigma_eta),
            (Some(b), Some(su)) => LinearSystem::new(a, b.to_matrix()?, sigma_w, su.to_matrix()?, sigma_eta),
            _ => Err(Error::InvalidInput("B and sigma_u must be given together".into())),
        }
    }
}

impl From<LinearSystem> for SystemFile {
    fn from(s: LinearSystem) -> Self {
        SystemFile {
            a: MatrixLiteral::dense(&s.a),
            b: s.b.as_ref().map(MatrixLiteral::dense),
            sigma_w: MatrixLiteral::dense(&s.sigma_w),
            sigma_u: s.sigma_u.as_ref().map(MatrixLiteral::dense),
            sigma_eta: MatrixLiteral::dense(&s.sigma_eta),
        }
    }
}

/// Realized process and observation noise, kept only for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealization {
    /// `w_0 .. w_{T-1}`, one per column.
    pub process: Matrix,
    /// `η_0 .. η_T`, one per column.
    pub observation: Matrix,
}

/// One simulated (or loaded) run. Vectors are stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `x_0 .. x_T` (n × (T+1)).
    pub states: Matrix,
    /// `x̂_0 .. x̂_T` (n × (T+1)).
    pub observations: Matrix,
    /// `u_0 .. u_{T-1}` (m × T); zero rows when autonomous.
    pub inputs: Matrix,
    pub noise: Option<NoiseRealization>,
}

impl Trajectory {
    pub fn from_parts(states: Matrix, observations: Matrix, inputs: Matrix) -> Result<Self> {
        let horizon = observations.ncols().checked_sub(1).ok_or_else(|| Error::InvalidInput("trajectory is empty".into()))?;
        if states.shape() != observations.shape() {
            return Err(Error::DimensionMismatch("states and observations differ in shape".into()));
        }
        if inputs.nrows() > 0 && inputs.ncols() != horizon {
            return Err(Error::DimensionMismatch(format!("expected {horizon} inputs, got {}", inputs.ncols())));
        }
        let inputs = if inputs.nrows() == 0 { Matrix::zeros(0, horizon) } else { inputs };
        Ok(Self { states, observations, inputs, noise: None })
    }

    /// `T`, the number of transitions.
    pub fn horizon(&self) -> usize {
        self.observations.ncols() - 1
    }

    pub fn state_dim(&self) -> usize {
        self.observations.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_autonomous(&self) -> bool {
        self.inputs.nrows() == 0
    }

    /// The first `horizon` transitions of this trajectory.
    pub fn truncated(&self, horizon: usize) -> Result<Self> {
        if horizon == 0 || horizon > self.horizon() {
            return Err(Error::InvalidInput(format!("cannot truncate T = {} to {horizon}", self.horizon())));
        }
        Ok(Self {
            states: self.states.columns(0, horizon + 1).into_owned(),
            observations: self.observations.columns(0, horizon + 1).into_owned(),
            inputs: self.inputs.columns(0, horizon).into_owned(),
            noise: self.noise.as_ref().map(|nz| NoiseRealization {
                process: nz.process.columns(0, horizon).into_owned(),
                observation: nz.observation.columns(0, horizon + 1).into_owned(),
            }),
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct SimulationOptions {
    /// Explicit `u_0 .. u_{T-1}` (m × T) replacing the sampled inputs.
    pub inputs: Option<Matrix>,
    /// Keep `w_t` and `η_t` on the trajectory.
    pub record_noise: bool,
}

fn stream_label(base: &RngStream, noise: &str) -> RngStream {
    if base.label.is_empty() {
        base.with_label(noise)
    } else {
        base.with_label(format!("{}.{noise}", base.label))
    }
}

/// Simulates `T` transitions from `x_0 = 0` with sampled inputs and noise.
pub fn simulate(sys: &LinearSystem, horizon: usize, stream: &RngStream) -> Result<Trajectory> {
    simulate_with(sys, horizon, stream, &SimulationOptions::default())
}

/// [`simulate`] with explicit inputs and/or recorded noise.
///
/// Inputs, process noise and observation noise are drawn from the streams
/// labelled `u`, `w` and `eta` (prefixed by the stream's own label when it
/// is non-empty), so each sequence is unaffected by the covariances of the
/// others and a shorter horizon yields a prefix of a longer one.
pub fn simulate_with(sys: &LinearSystem, horizon: usize, stream: &RngStream, opts: &SimulationOptions) -> Result<Trajectory> {
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon T must be at least 1".into()));
    }
    let n = sys.state_dim();
    let m = sys.input_dim();

    let inputs = match (&opts.inputs, sys.sigma_u()) {
        (Some(u), _) => {
            if u.nrows() != m || u.ncols() != horizon {
                return Err(Error::DimensionMismatch(format!(
                    "explicit inputs must be {m}x{horizon}, got {}x{}",
                    u.nrows(),
                    u.ncols()
                )));
            }
            crate::numerics::ensure_finite(u)?;
            u.clone()
        }
        (None, Some(su)) => GaussianSampler::new(stream_label(stream, "u").generator()).draw(&psd_factor(su)?, horizon)?,
        (None, None) => Matrix::zeros(0, horizon),
    };
    let process = stream_label(stream, "w").sampler().draw(&psd_factor(sys.sigma_w())?, horizon)?;
    let observation_noise = stream_label(stream, "eta").sampler().draw(&psd_factor(sys.sigma_eta())?, horizon + 1)?;

    let mut states = Matrix::zeros(n, horizon + 1);
    for t in 0..horizon {
        let mut next = sys.a() * states.column(t) + process.column(t);
        if let Some(b) = sys.b() {
            next += b * inputs.column(t);
        }
        states.set_column(t + 1, &next);
    }
    let observations = &states + &observation_noise;

    Ok(Trajectory {
        states,
        observations,
        inputs,
        noise: opts.record_noise.then_some(NoiseRealization { process, observation: observation_noise }),
    })
}
