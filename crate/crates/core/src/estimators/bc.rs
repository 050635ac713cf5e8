use super::ls::ls_moments;
use super::{observations_only, require_horizon, Estimate, Method};
use crate::error::{Error, Result};
use crate::numerics::{condition_number, solve_right, solve_right_with_condition, Matrix, MAX_CONDITION};
use crate::system::Trajectory;

/// `Ê_BC = Ê_LS · (I − Σ̃ · (Σ ẑ_t ẑ_tᵀ / T)⁻¹)⁻¹`, where `Σ̃` carries
/// `sigma_eta_hat` in its top-left `n × n` block and zeros elsewhere.
///
/// The reported condition number is the larger of the Gram matrix's and the
/// correction factor's.
pub fn bc_estimate(traj: &Trajectory, sigma_eta_hat: &Matrix) -> Result<Estimate> {
    let (n, m) = (traj.state_dim(), traj.input_dim());
    if sigma_eta_hat.nrows() != n || sigma_eta_hat.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "sigma_eta_hat must be {n}x{n}, got {}x{}",
            sigma_eta_hat.nrows(),
            sigma_eta_hat.ncols()
        )));
    }
    crate::numerics::ensure_finite(sigma_eta_hat)?;
    require_horizon(traj, n + m, "bias compensation")?;

    let horizon = traj.horizon();
    let (cross, gram) = ls_moments(traj);
    let (ls_stacked, gram_condition) = solve_right_with_condition(&cross, &gram)?;

    let d = n + m;
    let mut padded = Matrix::zeros(d, d);
    padded.view_mut((0, 0), (n, n)).copy_from(sigma_eta_hat);
    let normalized_gram = gram / horizon as f64;
    let correction = Matrix::identity(d, d) - solve_right(&padded, &normalized_gram)?;

    let correction_condition = condition_number(&correction)?;
    if correction_condition.is_nan() || correction_condition > MAX_CONDITION {
        return Err(Error::CorrectionSingular { condition: correction_condition });
    }
    let stacked = solve_right(&ls_stacked, &correction).map_err(|e| match e {
        Error::SingularGram { condition } => Error::CorrectionSingular { condition },
        other => other,
    })?;
    Estimate::from_stacked(
        Method::BiasCompensation,
        stacked,
        n,
        gram_condition.max(correction_condition),
        horizon,
    )
}

/// Autonomous form: `Â_BC = Â_LS (I − Σ̂η (Σ x̂_t x̂_tᵀ / T)⁻¹)⁻¹`.
pub fn bc_estimate_autonomous(observations: &Matrix, sigma_eta_hat: &Matrix) -> Result<Estimate> {
    bc_estimate(&observations_only(observations)?, sigma_eta_hat)
}
