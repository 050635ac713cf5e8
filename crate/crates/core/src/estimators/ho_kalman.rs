//! Markov-parameter baseline.
//!
//! With full state observation (`C = I`) the impulse response blocks are
//! `G_i = A^i B`, so no Hankel factorization is needed:
//!
//! 1. regress `x̂_t` on `[u_{t-1}; …; u_{t-k}; x̂_{t-k}]` over `t = k..T-1`,
//!    which gives `Ĝ_0 … Ĝ_{k-1}` (the `x̂_{t-k}` column absorbs the
//!    `A^k x_{t-k}` tail, making the fit exact on noiseless data);
//! 2. `B̂ = Ĝ_0`;
//! 3. `Â` minimizes `‖A [Ĝ_0 … Ĝ_{k-2}] − [Ĝ_1 … Ĝ_{k-1}]‖_F`.

use super::{require_horizon, Estimate, Method};
use crate::error::{Error, Result};
use crate::numerics::{solve_right_with_condition, Matrix};
use crate::system::Trajectory;

/// `n + 1`: the smallest horizon whose shift equation sees all `n` blocks of
/// the controllability matrix.
pub fn default_horizon(n: usize) -> usize {
    n + 1
}

pub fn ho_kalman_estimate(traj: &Trajectory, horizon: usize) -> Result<Estimate> {
    let (n, m) = (traj.state_dim(), traj.input_dim());
    if m == 0 {
        return Err(Error::NotApplicable("Ho-Kalman baseline needs inputs".into()));
    }
    if horizon < 2 {
        return Err(Error::InvalidHorizon(format!("horizon k = {horizon}; the shift equation needs k ≥ 2")));
    }
    let width = horizon * m + n;
    require_horizon(traj, horizon + width, "Ho-Kalman")?;

    let samples = traj.horizon() - horizon;
    let mut regressors = Matrix::zeros(width, samples);
    for lag in 0..horizon {
        // u_{t-1-lag} for t = horizon..T-1
        let first = horizon - 1 - lag;
        regressors.rows_mut(lag * m, m).copy_from(&traj.inputs.columns(first, samples));
    }
    regressors.rows_mut(horizon * m, n).copy_from(&traj.observations.columns(0, samples));
    let targets = traj.observations.columns(horizon, samples);

    let (coefficients, regression_condition) =
        solve_right_with_condition(&(targets * regressors.transpose()), &(&regressors * regressors.transpose()))?;

    let markov = coefficients.columns(0, horizon * m);
    let b_hat = markov.columns(0, m).into_owned();
    let earlier = markov.columns(0, (horizon - 1) * m);
    let later = markov.columns(m, (horizon - 1) * m);
    let (a_hat, shift_condition) =
        solve_right_with_condition(&(later * earlier.transpose()), &(earlier * earlier.transpose()))?;

    let mut stacked = Matrix::zeros(n, n + m);
    stacked.columns_mut(0, n).copy_from(&a_hat);
    stacked.columns_mut(n, m).copy_from(&b_hat);
    Estimate::from_stacked(Method::HoKalman, stacked, n, regression_condition.max(shift_condition), samples)
}
