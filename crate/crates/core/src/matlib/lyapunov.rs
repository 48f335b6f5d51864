use super::decomp::Lu;
use super::eigen::{require_hurwitz, symmetric_extremes};
use super::matrix::Matrix;
use crate::error::{dims, Error, Result};
use crate::scalar::{to_f64, Real, Tolerances};

/// Solves `AᵀP + PA = −Q` through the Kronecker form
/// `(I⊗Aᵀ + Aᵀ⊗I) vec(P) = −vec(Q)`. No definiteness checks.
pub fn lyapunov_kron<T: Real>(a: &Matrix<T>, q: &Matrix<T>) -> Result<Matrix<T>> {
    if !a.is_square() || q.shape() != a.shape() {
        return Err(dims("lyapunov", "A and Q must be square and equal size"));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let at = a.transpose();
    let eye = Matrix::identity(n);
    let k = &eye.kron(&at) + &at.kron(&eye);
    let rhs: Vec<T> = q.vec_cols().into_iter().map(|v| -v).collect();
    let lu = Lu::new(&k).map_err(|_| Error::SingularSolve("lyapunov"))?;
    let p = Matrix::from_vec_cols(n, n, &lu.solve_vec(&rhs));
    Ok(p.symmetrize())
}

/// Residual `‖AᵀP + PA + Q‖∞`.
pub fn lyapunov_residual<T: Real>(a: &Matrix<T>, p: &Matrix<T>, q: &Matrix<T>) -> T {
    (&(&(&a.transpose() * p) + &(p * a)) + q).norm_inf()
}

/// Symmetric positive-definite `P` with `AᵀP + PA = −Q` for Hurwitz `A`
/// and symmetric positive-definite `Q`.
pub fn solve_lyapunov<T: Real>(a: &Matrix<T>, q: &Matrix<T>) -> Result<Matrix<T>> {
    if !a.is_finite() || !q.is_finite() {
        return Err(Error::NonFiniteInput("solve_lyapunov"));
    }
    require_hurwitz(a)?;
    let tol = Tolerances::<T>::standard();
    let q = q.symmetrize();
    let (qmin, _) = symmetric_extremes(&q)?;
    if qmin <= T::zero() {
        return Err(Error::NotPositiveDefinite {
            index: 0,
            pivot: to_f64(qmin),
        });
    }
    let p = lyapunov_kron(a, &q)?;
    let res = lyapunov_residual(a, &p, &q);
    if res > tol.solve * q.norm_inf() {
        return Err(Error::SingularSolve("lyapunov residual"));
    }
    let (pmin, _) = symmetric_extremes(&p)?;
    if pmin <= T::zero() {
        return Err(Error::NotPositiveDefinite {
            index: 0,
            pivot: to_f64(pmin),
        });
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_case() {
        let p = solve_lyapunov(&Matrix::<f64>::from_rows(&[[-1.0]]), &Matrix::from_rows(&[[2.0]])).unwrap();
        assert!((p[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_decoupling() {
        let a = Matrix::<f64>::identity(2).scale(-1.0);
        let p = solve_lyapunov(&a, &Matrix::identity(2).scale(2.0)).unwrap();
        assert!((&p - &Matrix::identity(2)).max_abs() < 1e-15);
    }

    #[test]
    fn companion_matches_direct_kronecker_oracle() {
        // Oracle: hand-assembled 4x4 system for P = [[p11, p12], [p12, p22]]
        // written out entrywise from AᵀP + PA = -I with A = [[0,1],[-2,-3]]:
        //   -4 p12            = -1
        //   p11 - 3 p12 - 2 p22 = 0
        //   2 p12 - 6 p22      = -1
        let p12 = 0.25;
        let p22 = (1.0 + 2.0 * p12) / 6.0;
        let p11 = 3.0 * p12 + 2.0 * p22;
        let a = Matrix::<f64>::from_rows(&[[0.0, 1.0], [-2.0, -3.0]]);
        let q = Matrix::identity(2);
        let p = solve_lyapunov(&a, &q).unwrap();
        let expect = Matrix::from_rows(&[[p11, p12], [p12, p22]]);
        assert!((&p - &expect).max_abs() < 1e-12);
        assert!(lyapunov_residual(&a, &p, &q) < 1e-10);
    }

    #[test]
    fn rejects_non_hurwitz() {
        let a = Matrix::<f64>::from_rows(&[[0.5, 0.0], [0.0, -1.0]]);
        assert!(matches!(solve_lyapunov(&a, &Matrix::identity(2)), Err(Error::NotHurwitz { .. })));
    }

    #[test]
    fn rejects_indefinite_q() {
        let a = Matrix::<f64>::identity(2).scale(-1.0);
        let q = Matrix::from_diag(&[1.0, -1.0]);
        assert!(matches!(solve_lyapunov(&a, &q), Err(Error::NotPositiveDefinite { .. })));
    }
}
