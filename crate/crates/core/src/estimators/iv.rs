use super::{observations_only, require_horizon, stack_regressors, Estimate, Method};
use crate::error::Result;
use crate::numerics::{solve_right_with_condition, Matrix};
use crate::system::Trajectory;

/// `Ê_IV = (Σ x̂_{t+1} î_tᵀ)(Σ ẑ_t î_tᵀ)⁻¹` with instrument
/// `î_t = [x̂_{t-1}; u_t]`.
///
/// The sums run over `t = 1..T-1` because the instrument needs `x̂_{t-1}`,
/// so `T_used = T - 1`. A (near-)singular cross-moment usually means `A` is
/// (nearly) singular and the lagged observation carries no information
/// about the current one.
pub fn iv_estimate(traj: &Trajectory) -> Result<Estimate> {
    let n = traj.state_dim();
    require_horizon(traj, n + traj.input_dim() + 1, "instrumental variables")?;
    let len = traj.horizon() - 1;
    let regressors = stack_regressors(traj, 1, 1, len);
    let instruments = stack_regressors(traj, 0, 1, len);
    let next = traj.observations.columns(2, len);
    let cross = next * instruments.transpose();
    let moment = regressors * instruments.transpose();
    let (stacked, condition) = solve_right_with_condition(&cross, &moment)?;
    Estimate::from_stacked(Method::InstrumentalVariable, stacked, n, condition, len)
}

/// `Â_IV = (Σ x̂_{t+1} x̂_{t-1}ᵀ)(Σ x̂_t x̂_{t-1}ᵀ)⁻¹` for autonomous data.
pub fn iv_estimate_autonomous(observations: &Matrix) -> Result<Estimate> {
    iv_estimate(&observations_only(observations)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::estimators::estimation_error;
    use crate::numerics::RngStream;
    use crate::system::{simulate, simulate_with, LinearSystem, SimulationOptions};

    #[test]
    fn noiseless_scalar_recovery() {
        let sys = LinearSystem::scalar(0.5, 1.0, 0.0, 0.0, 0.0).unwrap();
        let opts = SimulationOptions { inputs: Some(Matrix::from_row_slice(1, 4, &[1.0, 1.0, 0.0, 0.0])), record_noise: false };
        let traj = simulate_with(&sys, 4, &RngStream::new(0, "", 0), &opts).unwrap();
        assert_eq!(traj.observations.as_slice(), &[0.0, 1.0, 1.5, 0.75, 0.375]);
        let est = iv_estimate(&traj).unwrap();
        assert!((est.a_hat[(0, 0)] - 0.5).abs() < 1e-12);
        assert!((est.b_hat.unwrap()[(0, 0)] - 1.0).abs() < 1e-12);
        assert_eq!(est.t_used, 3);
    }

    #[test]
    fn autonomous_hand_examples() {
        let obs = Matrix::from_row_slice(1, 4, &[1.0, 0.5, 0.25, 0.125]);
        let est = iv_estimate_autonomous(&obs).unwrap();
        assert!((est.a_hat[(0, 0)] - 0.3125 / 0.625).abs() < 1e-14);

        let flat = Matrix::from_element(1, 6, 2.5);
        assert!((iv_estimate_autonomous(&flat).unwrap().a_hat[(0, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_observations_make_instrument_singular() {
        let obs = Matrix::zeros(1, 50);
        assert!(matches!(iv_estimate_autonomous(&obs), Err(Error::SingularGram { .. })));
    }

    #[test]
    fn singular_a_gives_ill_conditioned_cross_moment() {
        // A = diag(0.5, 0): the second state carries no lagged information.
        let a = Matrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.0]);
        let sys = LinearSystem::autonomous(a, Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]), Matrix::zeros(2, 2))
            .unwrap();
        let traj = simulate(&sys, 1000, &RngStream::new(1, "", 0)).unwrap();
        assert!(matches!(iv_estimate(&traj), Err(Error::SingularGram { .. })));
    }

    #[test]
    fn consistent_on_scalar_benchmark() {
        let sys = LinearSystem::scalar(0.5, 1.0, 1.0, 1.0, 1.0).unwrap();
        let traj = simulate(&sys, 100_000, &RngStream::new(21, "", 0)).unwrap();
        let err = estimation_error(&iv_estimate(&traj).unwrap(), &sys).unwrap();
        assert!(err <= 0.05, "error {err}");

        let auto = LinearSystem::scalar_autonomous(0.5, 1.0, 1.0).unwrap();
        let traj = simulate(&auto, 100_000, &RngStream::new(22, "", 0)).unwrap();
        let est = iv_estimate_autonomous(&traj.observations).unwrap();
        assert!((est.a_hat[(0, 0)] - 0.5).abs() <= 0.05);
    }
}
