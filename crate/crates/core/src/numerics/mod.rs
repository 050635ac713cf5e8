//! Dense linear-algebra primitives shared by the estimators, the simulator
//! and the bound calculators.
//!
//! Matrices are plain `nalgebra::DMatrix<f64>`. Anything that enters the
//! crate from outside (JSON literals, CSV files) goes through
//! [`matrix_from_row_major`] or [`ensure_finite`] so that downstream code can
//! assume finite entries.

mod rng;

pub use rng::{draw_gaussian, GaussianSampler, RngStream};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Largest condition number accepted for any matrix that gets inverted.
pub const MAX_CONDITION: f64 = 1e12;

/// Eigenvalues in `[-PSD_TOLERANCE, 0)` are clamped to zero by [`psd_factor`].
pub const PSD_TOLERANCE: f64 = 1e-10;

const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Builds a matrix from row-major data, rejecting wrong lengths and
/// non-finite entries.
pub fn matrix_from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Matrix> {
    if data.len() != rows * cols {
        return Err(Error::InvalidInput(format!(
            "expected {} entries for a {rows}x{cols} matrix, got {}",
            rows * cols,
            data.len()
        )));
    }
    let m = Matrix::from_row_slice(rows, cols, data);
    ensure_finite(&m)?;
    Ok(m)
}

/// Row-major copy of the entries.
pub fn row_major(m: &Matrix) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

pub fn ensure_finite(m: &Matrix) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

fn ensure_non_empty(m: &Matrix) -> Result<()> {
    if m.is_empty() {
        Err(Error::InvalidInput("matrix is empty".into()))
    } else {
        Ok(())
    }
}

/// Singular values in non-increasing order.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    ensure_non_empty(m)?;
    ensure_finite(m)?;
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Smallest singular value over the smaller dimension of `m`.
pub fn min_singular_value(m: &Matrix) -> Result<f64> {
    Ok(singular_values(m)?.last().copied().unwrap_or(0.0).max(0.0))
}

/// Largest singular value (spectral norm).
pub fn operator_norm(m: &Matrix) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// 2-norm condition number `σ_max / σ_min` of a square matrix; infinite when
/// singular.
pub fn condition_number(m: &Matrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "condition number needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let sv = singular_values(m)?;
    let (max, min) = (sv[0], sv[sv.len() - 1]);
    if min <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(max / min)
}

/// Solves `X · D = N` for `X` and returns it with the condition estimate of
/// `D`. The solve goes through a partially pivoted LU factorization of `Dᵀ`.
pub fn solve_right_with_condition(n: &Matrix, d: &Matrix) -> Result<(Matrix, f64)> {
    if !d.is_square() || n.ncols() != d.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "solve_right: N is {}x{}, D is {}x{}",
            n.nrows(),
            n.ncols(),
            d.nrows(),
            d.ncols()
        )));
    }
    ensure_finite(n)?;
    let condition = condition_number(d)?;
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::SingularGram { condition });
    }
    let xt = d
        .transpose()
        .lu()
        .solve(&n.transpose())
        .ok_or(Error::SingularGram { condition: f64::INFINITY })?;
    Ok((xt.transpose(), condition))
}

/// Solves `X · D = N` for `X`.
pub fn solve_right(n: &Matrix, d: &Matrix) -> Result<Matrix> {
    solve_right_with_condition(n, d).map(|(x, _)| x)
}

/// Symmetric square-root-type factor `L` with `L·Lᵀ = S` for a positive
/// semidefinite `S`.
///
/// Built from the symmetric eigendecomposition `S = V Λ Vᵀ` as
/// `L = V Λ^{1/2}`, so singular covariances are accepted. Eigenvalues down
/// to `-PSD_TOLERANCE` are clamped to zero.
pub fn psd_factor(s: &Matrix) -> Result<Matrix> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "covariance must be square, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    ensure_finite(s)?;
    if s.is_empty() {
        return Ok(s.clone());
    }
    let asym = (s - s.transpose()).amax();
    if asym > SYMMETRY_TOLERANCE * s.amax().max(1.0) {
        return Err(Error::InvalidInput(format!("covariance is not symmetric (max asymmetry {asym:e})")));
    }
    let sym = (s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let min_eigenvalue = eig.eigenvalues.min();
    if min_eigenvalue < -PSD_TOLERANCE {
        return Err(Error::NotPsd { min_eigenvalue });
    }
    let mut factor = eig.eigenvectors;
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let scale = lambda.max(0.0).sqrt();
        factor.column_mut(j).scale_mut(scale);
    }
    Ok(factor)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn symmetric_min_eigenvalue(s: &Matrix) -> Result<f64> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch("expected a square matrix".into()));
    }
    ensure_non_empty(s)?;
    ensure_finite(s)?;
    let sym = (s + s.transpose()) * 0.5;
    Ok(SymmetricEigen::new(sym).eigenvalues.min())
}

/// Spectral radius via the real Schur form.
///
/// Shifted QR can stall when every eigenvalue has the same modulus (cyclic
/// permutations, for instance). When the plain iteration does not converge,
/// the eigenvalues of `A + μI` are computed instead for a few fixed shifts
/// `μ` and translated back.
pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("spectral radius needs a square matrix".into()));
    }
    ensure_non_empty(a)?;
    ensure_finite(a)?;
    const SHIFTS: [f64; 4] = [0.0, 0.3711, -0.6173, 0.8419];
    let n = a.nrows();
    let scale = a.amax().max(f64::MIN_POSITIVE);
    for shift in SHIFTS.map(|s| s * scale) {
        let shifted = a + Matrix::identity(n, n) * shift;
        if let Some(schur) = shifted.try_schur(f64::EPSILON, 100 * n.max(10)) {
            return Ok(schur.complex_eigenvalues().iter().map(|z| (z - shift).norm()).fold(0.0, f64::max));
        }
    }
    Err(Error::Precondition("eigenvalue iteration did not converge".into()))
}
