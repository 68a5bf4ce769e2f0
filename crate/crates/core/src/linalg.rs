//! Small dense helpers: extreme eigenvalues of symmetric positive semidefinite
//! matrices by power iteration, and the normal-equation solve.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const MAX_POWER_ITERS: usize = 200_000;
const STALL_ROUNDS: usize = 5;

/// Largest eigenvalue of a symmetric matrix with a nonnegative spectrum.
///
/// Power iteration on the Rayleigh quotient; stops once the quotient has
/// stopped moving (relative change at the rounding level) for several rounds.
pub(crate) fn largest_eigenvalue(a: &DMatrix<f64>) -> Result<f64> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::EigenSolve(format!(
            "expected a non-empty square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenSolve("matrix has non-finite entries".into()));
    }
    // Deterministic start with components along every axis.
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.37 * ((i as f64) + 1.0).sin());
    v /= v.norm();
    let mut lambda = 0.0;
    let mut stalled = 0;
    for _ in 0..MAX_POWER_ITERS {
        let w = a * &v;
        let next = v.dot(&w);
        let norm = w.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        if !norm.is_finite() {
            return Err(Error::EigenSolve("power iteration overflowed".into()));
        }
        v = w / norm;
        if (next - lambda).abs() <= 4.0 * f64::EPSILON * next.abs().max(f64::MIN_POSITIVE) {
            stalled += 1;
            if stalled >= STALL_ROUNDS {
                return Ok(next);
            }
        } else {
            stalled = 0;
        }
        lambda = next;
    }
    log::debug!("power iteration hit the iteration cap; returning the last Rayleigh quotient");
    Ok(lambda)
}

/// `(smallest, largest)` eigenvalue of a symmetric positive semidefinite
/// matrix. The smallest comes from power iteration on `λ_max·I − A`; values
/// within rounding of zero are snapped to exactly zero.
pub(crate) fn extreme_eigenvalues(a: &DMatrix<f64>) -> Result<(f64, f64)> {
    let top = largest_eigenvalue(a)?;
    if top == 0.0 {
        return Ok((0.0, 0.0));
    }
    let n = a.nrows();
    let shifted = DMatrix::identity(n, n) * top - a;
    let gap = largest_eigenvalue(&shifted)?;
    let mut bottom = top - gap;
    if bottom.abs() <= 1e-12 * top {
        bottom = 0.0;
    }
    Ok((bottom.max(0.0), top))
}

/// Solves `H θ = b` for symmetric positive semidefinite `H`. A ridge of `ridge`
/// is added when the caller flags the system as singular, which returns the
/// minimum-norm solution up to the ridge bias.
pub(crate) fn solve_normal_equations(
    h: &DMatrix<f64>,
    b: &DVector<f64>,
    ridge: Option<f64>,
) -> Result<DVector<f64>> {
    let n = h.nrows();
    let mut m = h.clone();
    if let Some(r) = ridge {
        for i in 0..n {
            m[(i, i)] += r;
        }
    }
    match m.clone().cholesky() {
        Some(ch) => Ok(ch.solve(b)),
        None => m
            .lu()
            .solve(b)
            .ok_or_else(|| Error::EigenSolve("normal equations are singular".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_spectrum() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 0.5, 1.0]));
        let (lo, hi) = extreme_eigenvalues(&a).unwrap();
        assert!((hi - 3.0).abs() < 1e-12);
        assert!((lo - 0.5).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_has_zero_bottom() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let (lo, hi) = extreme_eigenvalues(&a).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix() {
        let a = DMatrix::<f64>::zeros(3, 3);
        assert_eq!(extreme_eigenvalues(&a).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn rejects_non_finite() {
        let a = DMatrix::from_row_slice(1, 1, &[f64::NAN]);
        assert!(largest_eigenvalue(&a).is_err());
    }
}
