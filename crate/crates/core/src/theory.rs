//! Constants, sample-size thresholds and error bounds from the finite-sample
//! analysis of the instrumental-variable and bias-compensation estimators.
//!
//! The bounds hold up to absolute constants `c1`, `c2` whose values are not
//! known; both default to 1, so the absolute level of every curve here is
//! uncalibrated and only its scaling in `T`, `n`, `m` and `δ` is meaningful.
//! `δ` is used verbatim inside the logarithms; the guarantees themselves hold
//! with probability `1 − 11δ` (IV) and `1 − 9δ` (BC).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{min_singular_value, operator_norm, symmetric_min_eigenvalue};
use crate::system::{controllability_matrix, stability_constants, LinearSystem, DEFAULT_STABILITY_TOL};

pub const DEFAULT_DELTA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConstants {
    /// `max{ψ_B² ψ_u + ψ_w, ψ_η}`
    pub psi: f64,
    pub psi_b: f64,
    pub psi_u: f64,
    pub psi_w: f64,
    pub psi_eta: f64,
    /// Smallest eigenvalue of `Σu`.
    pub phi_u: f64,
    pub psi_a: f64,
    pub rho_a: f64,
    pub phi_r: f64,
    pub phi_a: f64,
    pub n: usize,
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConfig {
    pub delta: f64,
    pub c1: f64,
    pub c2: f64,
    /// Replaces the computed `κ₂` in the thresholds (testing hook).
    pub kappa2_override: Option<f64>,
    /// Refuse [`bc_error_bound`] when the input-magnitude condition fails.
    pub check_input_condition: bool,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self { delta: DEFAULT_DELTA, c1: 1.0, c2: 1.0, kappa2_override: None, check_input_condition: true }
    }
}

impl BoundConfig {
    pub fn with_delta(delta: f64) -> Self {
        Self { delta, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidInput(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0 && self.c1.is_finite() && self.c2.is_finite()) {
            return Err(Error::InvalidInput("c1 and c2 must be positive".into()));
        }
        Ok(())
    }
}

pub fn system_constants(sys: &LinearSystem) -> Result<SystemConstants> {
    let (b, sigma_u) = match (sys.b(), sys.sigma_u()) {
        (Some(b), Some(su)) => (b, su),
        _ => return Err(Error::NotApplicable("bound constants need a system with inputs".into())),
    };
    let stability = stability_constants(sys.a(), DEFAULT_STABILITY_TOL)?;
    let psi_b = operator_norm(b)?.max(1.0);
    let psi_u = operator_norm(sigma_u)?.max(1.0);
    let psi_w = operator_norm(sys.sigma_w())?.max(1.0);
    let psi_eta = operator_norm(sys.sigma_eta())?.max(1.0);
    Ok(SystemConstants {
        psi: (psi_b * psi_b * psi_u + psi_w).max(psi_eta),
        psi_b,
        psi_u,
        psi_w,
        psi_eta,
        phi_u: symmetric_min_eigenvalue(sigma_u)?,
        psi_a: stability.psi_a,
        rho_a: stability.rho_a,
        phi_r: min_singular_value(&controllability_matrix(sys)?)?,
        phi_a: min_singular_value(sys.a())?,
        n: sys.state_dim(),
        m: sys.input_dim(),
    })
}

/// `(κ₁, κ₂)`.
pub fn kappa_constants(k: &SystemConstants, cfg: &BoundConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    if !(k.rho_a >= 0.0 && k.rho_a < 1.0) {
        return Err(Error::InvalidInput(format!("rho_A must lie in [0, 1), got {}", k.rho_a)));
    }
    if !(k.phi_u > 0.0 && k.phi_r > 0.0) {
        return Err(Error::Precondition("kappa constants need phi_u > 0 and phi_R > 0".into()));
    }
    let delta = cfg.delta;
    let n = k.n as f64;
    let mn = (k.m + k.n) as f64;
    let gap = 1.0 - k.rho_a * k.rho_a;
    let ratio = k.psi / k.phi_u;
    let phi_r2 = k.phi_r * k.phi_r;

    let kappa1 = k.psi_a
        * ratio.sqrt().max(ratio)
        * ((phi_r2.min(1.0) * k.phi_u + 1.0) / (phi_r2.powi(3).min(1.0) * k.phi_u)).sqrt()
        * (5.0 * k.psi * k.psi_a.powi(2) / (gap * delta) * n * (4.0 / delta).ln()).ln().sqrt();

    let log_9n = (9.0 * n / delta).ln();
    let kappa2 = k.psi.powi(2) * k.psi_a.powi(4) / (phi_r2.powi(2).min(1.0) * k.phi_u.powi(2) * gap)
        * log_9n
        * (9.0 * k.psi * k.psi_a.powi(4) / (gap * delta) * mn * log_9n).ln();

    Ok((kappa1, kappa2))
}

fn kappa2(k: &SystemConstants, cfg: &BoundConfig) -> Result<f64> {
    match cfg.kappa2_override {
        Some(v) => {
            cfg.validate()?;
            Ok(v)
        }
        None => kappa_constants(k, cfg).map(|(_, k2)| k2),
    }
}

fn polynomial_factor(k: &SystemConstants) -> f64 {
    let mn = (k.m + k.n) as f64;
    k.n as f64 * mn * mn
}

/// Minimum `T` for the IV bound: `c2 κ₂ n (m+n)² / min{φ_A², 1}`. Infinite
/// when `A` is singular.
pub fn iv_sample_threshold(k: &SystemConstants, cfg: &BoundConfig) -> Result<f64> {
    let kappa2 = kappa2(k, cfg)?;
    let clamp = (k.phi_a * k.phi_a).min(1.0);
    if clamp <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(cfg.c2 * kappa2 / clamp * polynomial_factor(k))
}

/// Minimum `T` for the BC bound: `c2 κ₂ n (m+n)²`.
pub fn bc_sample_threshold(k: &SystemConstants, cfg: &BoundConfig) -> Result<f64> {
    Ok(cfg.c2 * kappa2(k, cfg)? * polynomial_factor(k))
}

fn check_horizon(horizon: usize, threshold: f64) -> Result<()> {
    if (horizon as f64) < threshold {
        return Err(Error::BelowThreshold { horizon, threshold });
    }
    Ok(())
}

/// `c1 κ₁ / min{φ_A, 1} · √((m+n)/T)`.
pub fn iv_error_bound(k: &SystemConstants, cfg: &BoundConfig, horizon: usize) -> Result<f64> {
    check_horizon(horizon, iv_sample_threshold(k, cfg)?)?;
    let (kappa1, _) = kappa_constants(k, cfg)?;
    let rate = ((k.m + k.n) as f64 / horizon as f64).sqrt();
    Ok(cfg.c1 * kappa1 / k.phi_a.min(1.0) * rate)
}

/// The `T`-independent part of the BC bound: `c1 ε_η / (min{φ_R², 1} φ_u)`.
pub fn bc_bias_floor(k: &SystemConstants, cfg: &BoundConfig, eps_eta: f64) -> Result<f64> {
    cfg.validate()?;
    if !(eps_eta >= 0.0 && eps_eta.is_finite()) {
        return Err(Error::InvalidInput("eps_eta must be a non-negative number".into()));
    }
    Ok(cfg.c1 * eps_eta / ((k.phi_r * k.phi_r).min(1.0) * k.phi_u))
}

/// Whether `φ_u ≥ 32 (ψ_η + ε_η) / min{φ_R², 6}`.
pub fn input_condition_holds(k: &SystemConstants, eps_eta: f64) -> bool {
    k.phi_u >= 32.0 * (k.psi_eta + eps_eta) / (k.phi_r * k.phi_r).min(6.0)
}

/// `c1 ε_η / (min{φ_R², 1} φ_u) + c1 κ₁ √((m+n)/T)`.
pub fn bc_error_bound(k: &SystemConstants, cfg: &BoundConfig, horizon: usize, eps_eta: f64) -> Result<f64> {
    if cfg.check_input_condition && !input_condition_holds(k, eps_eta) {
        return Err(Error::Precondition(format!(
            "input condition fails: phi_u = {} < 32 (psi_eta + eps_eta) / min(phi_R^2, 6)",
            k.phi_u
        )));
    }
    check_horizon(horizon, bc_sample_threshold(k, cfg)?)?;
    let (kappa1, _) = kappa_constants(k, cfg)?;
    let rate = ((k.m + k.n) as f64 / horizon as f64).sqrt();
    Ok(bc_bias_floor(k, cfg, eps_eta)? + cfg.c1 * kappa1 * rate)
}

/// Output of the `bounds` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub psi: f64,
    #[serde(rename = "psi_A")]
    pub psi_a: f64,
    #[serde(rename = "rho_A")]
    pub rho_a: f64,
    #[serde(rename = "phi_R")]
    pub phi_r: f64,
    #[serde(rename = "phi_A")]
    pub phi_a: f64,
    pub phi_u: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// `null` when infinite (singular `A`).
    #[serde(rename = "T_threshold_iv")]
    pub t_threshold_iv: Option<f64>,
    #[serde(rename = "T_threshold_bc")]
    pub t_threshold_bc: f64,
    pub delta: f64,
    pub c1: f64,
    pub c2: f64,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iv_error_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bc_error_bound: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notices: Vec<String>,
}

/// Evaluates every constant, both thresholds and, when `horizon` is given,
/// whichever error bounds apply. Failed preconditions become notices.
pub fn bounds_report(
    sys: &LinearSystem,
    cfg: &BoundConfig,
    horizon: Option<usize>,
    eps_eta: Option<f64>,
) -> Result<BoundsReport> {
    let k = system_constants(sys)?;
    let (kappa1, kappa2) = kappa_constants(&k, cfg)?;
    let iv_threshold = iv_sample_threshold(&k, cfg)?;
    let bc_threshold = bc_sample_threshold(&k, cfg)?;
    let mut report = BoundsReport {
        psi: k.psi,
        psi_a: k.psi_a,
        rho_a: k.rho_a,
        phi_r: k.phi_r,
        phi_a: k.phi_a,
        phi_u: k.phi_u,
        kappa1,
        kappa2,
        t_threshold_iv: iv_threshold.is_finite().then_some(iv_threshold),
        t_threshold_bc: bc_threshold,
        delta: cfg.delta,
        c1: cfg.c1,
        c2: cfg.c2,
        horizon,
        eps_eta,
        iv_error_bound: None,
        bc_error_bound: None,
        notices: Vec::new(),
    };
    if let Some(t) = horizon {
        match iv_error_bound(&k, cfg, t) {
            Ok(v) => report.iv_error_bound = Some(v),
            Err(e) => report.notices.push(format!("iv: {e}")),
        }
        match bc_error_bound(&k, cfg, t, eps_eta.unwrap_or(0.0)) {
            Ok(v) => report.bc_error_bound = Some(v),
            Err(e) => report.notices.push(format!("bc: {e}")),
        }
    }
    Ok(report)
}
