//! Stability, controllability, invertibility and input-magnitude checks.

use serde::{Deserialize, Serialize};

use super::LinearSystem;
use crate::error::{Error, Result};
use crate::numerics::{min_singular_value, operator_norm, spectral_radius, symmetric_min_eigenvalue, Matrix};

pub const DEFAULT_STABILITY_TOL: f64 = 1e-10;

const MAX_STABILITY_HORIZON: usize = 1_000_000;
const RANK_TOLERANCE: f64 = 1e-8;

/// Certified pair with `‖A^t‖ ≤ psi_a · rho_a^{t-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityConstants {
    pub psi_a: f64,
    pub rho_a: f64,
    pub spectral_radius: f64,
    pub horizon_used: usize,
}

/// `R = [B, AB, …, A^{n-1}B]`.
pub fn controllability_matrix(sys: &LinearSystem) -> Result<Matrix> {
    let b = sys
        .b()
        .ok_or_else(|| Error::NotApplicable("controllability matrix of an autonomous system".into()))?;
    let (n, m) = (sys.state_dim(), sys.input_dim());
    let mut r = Matrix::zeros(n, n * m);
    let mut block = b.clone();
    for i in 0..n {
        r.columns_mut(i * m, m).copy_from(&block);
        block = sys.a() * block;
    }
    Ok(r)
}

/// Stability constants with the decay rate set halfway between the spectral
/// radius and one.
pub fn stability_constants(a: &Matrix, tol: f64) -> Result<StabilityConstants> {
    let radius = spectral_radius(a)?;
    if radius >= 1.0 {
        return Err(Error::Unstable { spectral_radius: radius });
    }
    stability_constants_with_rate(a, (1.0 + radius) / 2.0, tol)
}

/// `psi_a = max(1, max_t ‖A^t‖ / rho_a^{t-1})`, scanning powers until the
/// ratio falls below `tol · psi_a`.
pub fn stability_constants_with_rate(a: &Matrix, rho_a: f64, tol: f64) -> Result<StabilityConstants> {
    let radius = spectral_radius(a)?;
    if radius >= 1.0 {
        return Err(Error::Unstable { spectral_radius: radius });
    }
    if !(rho_a > radius && rho_a < 1.0) {
        return Err(Error::InvalidInput(format!(
            "decay rate {rho_a} must lie in (spectral radius {radius}, 1)"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput("stability tolerance must be positive".into()));
    }
    let mut psi_a: f64 = 1.0;
    let mut power = a.clone();
    // rho_a^{t-1}
    let mut decay = 1.0;
    for t in 1..=MAX_STABILITY_HORIZON {
        let ratio = operator_norm(&power)? / decay;
        psi_a = psi_a.max(ratio);
        if ratio < tol * psi_a {
            return Ok(StabilityConstants { psi_a, rho_a, spectral_radius: radius, horizon_used: t });
        }
        power = a * power;
        decay *= rho_a;
    }
    Err(Error::Precondition(format!(
        "stability certificate did not converge within {MAX_STABILITY_HORIZON} powers"
    )))
}

/// Which estimator's assumption set holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    /// Stability, controllability and invertible `A`.
    pub iv_ok: bool,
    /// Stability, controllability and strong enough inputs.
    pub bc_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub stable: bool,
    pub spectral_radius: f64,
    /// `None` when `A` is not stable.
    #[serde(rename = "psi_A")]
    pub psi_a: Option<f64>,
    #[serde(rename = "rho_A")]
    pub rho_a: Option<f64>,
    pub horizon_used: usize,
    /// `None` for autonomous systems.
    #[serde(rename = "phi_R")]
    pub phi_r: Option<f64>,
    #[serde(rename = "phi_A")]
    pub phi_a: f64,
    pub phi_u: Option<f64>,
    pub psi_eta: f64,
    pub eps_eta: f64,
    /// Right-hand side of the input-magnitude condition.
    pub phi_u_required: Option<f64>,
    pub controllable: bool,
    pub a_invertible: bool,
    pub input_magnitude_ok: bool,
    pub verdict: Verdict,
}

impl AssumptionReport {
    pub fn all_ok(&self) -> bool {
        self.verdict.iv_ok && self.verdict.bc_ok
    }
}

/// Evaluates every assumption the two consistency results rely on.
///
/// For autonomous systems controllability and the input condition do not
/// apply; the verdicts then only require stability (plus invertible `A` for
/// the instrumental-variable route).
pub fn check_assumptions(sys: &LinearSystem, eps_eta: f64) -> Result<AssumptionReport> {
    if !(eps_eta >= 0.0 && eps_eta.is_finite()) {
        return Err(Error::InvalidInput("eps_eta must be a non-negative number".into()));
    }
    let a = sys.a();
    let radius = spectral_radius(a)?;
    let stability = if radius < 1.0 { Some(stability_constants(a, DEFAULT_STABILITY_TOL)?) } else { None };

    let phi_a = min_singular_value(a)?;
    let a_invertible = phi_a > 0.0 && phi_a > RANK_TOLERANCE * operator_norm(a)?;
    let psi_eta = operator_norm(sys.sigma_eta())?.max(1.0);

    let (phi_r, controllable, phi_u, phi_u_required, input_magnitude_ok) = match sys.sigma_u() {
        None => (None, false, None, None, false),
        Some(su) => {
            let r = controllability_matrix(sys)?;
            let phi_r = min_singular_value(&r)?;
            let controllable = phi_r > RANK_TOLERANCE * operator_norm(&r)?;
            let phi_u = symmetric_min_eigenvalue(su)?;
            let required = 32.0 * (psi_eta + eps_eta) / (phi_r * phi_r).min(6.0);
            (Some(phi_r), controllable, Some(phi_u), Some(required), phi_u >= required)
        }
    };

    let stable = stability.is_some();
    let verdict = if sys.is_autonomous() {
        Verdict { iv_ok: stable && a_invertible, bc_ok: stable }
    } else {
        Verdict {
            iv_ok: stable && controllable && a_invertible,
            bc_ok: stable && controllable && input_magnitude_ok,
        }
    };

    Ok(AssumptionReport {
        stable,
        spectral_radius: radius,
        psi_a: stability.map(|s| s.psi_a),
        rho_a: stability.map(|s| s.rho_a),
        horizon_used: stability.map_or(0, |s| s.horizon_used),
        phi_r,
        phi_a,
        phi_u,
        psi_eta,
        eps_eta,
        phi_u_required,
        controllable,
        a_invertible,
        input_magnitude_ok,
        verdict,
    })
}
