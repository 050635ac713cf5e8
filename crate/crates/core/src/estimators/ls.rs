use super::{observations_only, require_horizon, stack_regressors, Estimate, Method};
use crate::error::{Error, Result};
use crate::numerics::{solve_right, solve_right_with_condition, Matrix};
use crate::system::{LinearSystem, Trajectory};

/// Normal-equation pieces `(Σ x̂_{t+1} ẑ_tᵀ, Σ ẑ_t ẑ_tᵀ)` over `t = 0..T-1`.
pub(super) fn ls_moments(traj: &Trajectory) -> (Matrix, Matrix) {
    let horizon = traj.horizon();
    let z = stack_regressors(traj, 0, 0, horizon);
    let next = traj.observations.columns(1, horizon);
    (next * z.transpose(), &z * z.transpose())
}

/// `Ê_LS = (Σ x̂_{t+1} ẑ_tᵀ)(Σ ẑ_t ẑ_tᵀ)⁻¹` with `ẑ_t = [x̂_t; u_t]`.
pub fn ls_estimate(traj: &Trajectory) -> Result<Estimate> {
    let n = traj.state_dim();
    require_horizon(traj, n + traj.input_dim(), "least squares")?;
    let (cross, gram) = ls_moments(traj);
    let (stacked, condition) = solve_right_with_condition(&cross, &gram)?;
    Estimate::from_stacked(Method::LeastSquares, stacked, n, condition, traj.horizon())
}

/// Least squares for `x_{t+1} = A x_t + w_t` from observations `x̂_0..x̂_T`
/// (one per column).
pub fn ls_estimate_autonomous(observations: &Matrix) -> Result<Estimate> {
    ls_estimate(&observations_only(observations)?)
}

/// Split of the least-squares error `Ê_LS − E = Δ₁ − Δ₂`.
///
/// `Δ₁` collects the terms that average out as `T` grows; `Δ₂` is the
/// `A η_t η_tᵀ` term behind the persistent bias.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasDecomposition {
    pub delta1: Matrix,
    pub delta2: Matrix,
}

/// Computes `Δ₁` and `Δ₂` for a simulated trajectory. Requires the true
/// system and the recorded noise realizations.
pub fn ls_bias_decomposition(traj: &Trajectory, true_sys: &LinearSystem) -> Result<BiasDecomposition> {
    let noise = traj.noise.as_ref().ok_or(Error::NoiseNotRecorded)?;
    let (n, m, horizon) = (traj.state_dim(), traj.input_dim(), traj.horizon());
    if true_sys.state_dim() != n || true_sys.input_dim() != m {
        return Err(Error::DimensionMismatch("trajectory and system dimensions differ".into()));
    }
    require_horizon(traj, n + m, "least squares")?;

    let a = true_sys.a();
    let z_hat = stack_regressors(traj, 0, 0, horizon);
    let mut z_true = z_hat.clone();
    z_true.rows_mut(0, n).copy_from(&traj.states.columns(0, horizon));
    let eta_now = noise.observation.columns(0, horizon);
    let eta_next = noise.observation.columns(1, horizon);

    let gram = &z_hat * z_hat.transpose();
    let numerator1 = -(a * eta_now) * z_true.transpose() + (&noise.process + eta_next) * z_hat.transpose();
    let mut eta_block = Matrix::zeros(n, n + m);
    eta_block.columns_mut(0, n).copy_from(&(eta_now * eta_now.transpose()));
    let numerator2 = a * eta_block;

    Ok(BiasDecomposition { delta1: solve_right(&numerator1, &gram)?, delta2: solve_right(&numerator2, &gram)? })
}
