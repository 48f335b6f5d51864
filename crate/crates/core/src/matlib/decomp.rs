//! LU, Cholesky, Householder QR and Jacobi SVD.

use super::matrix::Matrix;
use crate::error::{dims, Error, Result};
use crate::scalar::{lit, to_f64, Real, Tolerances};

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    sign: T,
}

impl<T: Real> Lu<T> {
    pub fn new(a: &Matrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(dims("lu", format!("{}x{} is not square", a.rows(), a.cols())));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        let scale = a.max_abs().max(T::min_positive_value());
        let tiny = scale * T::epsilon() * lit(n.max(1) as f64);
        for k in 0..n {
            let (mut piv, mut best) = (k, lu[(k, k)].abs());
            for i in k + 1..n {
                if lu[(i, k)].abs() > best {
                    best = lu[(i, k)].abs();
                    piv = i;
                }
            }
            if best <= tiny {
                return Err(Error::SingularSolve("lu"));
            }
            if piv != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = t;
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= f * u;
                    }
                }
            }
        }
        Ok(Self { lu, perm, sign })
    }

    pub fn solve_vec(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.rows();
        assert_eq!(b.len(), n);
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[(i, k)];
                x[i] = x[i] - l * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[(i, k)];
                x[i] = x[i] - u * x[k];
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    pub fn solve(&self, b: &Matrix<T>) -> Matrix<T> {
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let x = self.solve_vec(&b.col_vec(j));
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    pub fn det(&self) -> T {
        (0..self.lu.rows()).fold(self.sign, |acc, i| acc * self.lu[(i, i)])
    }

    pub fn inverse(&self) -> Matrix<T> {
        self.solve(&Matrix::identity(self.lu.rows()))
    }
}

pub fn solve<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.rows() != b.rows() {
        return Err(dims("solve", "right-hand side row count"));
    }
    Ok(Lu::new(a)?.solve(b))
}

pub fn inverse<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    Ok(Lu::new(a)?.inverse())
}

/// Upper-triangular `R` with `RᵀR = P`. The input is symmetrized first.
pub fn cholesky_upper<T: Real>(p: &Matrix<T>) -> Result<Matrix<T>> {
    if !p.is_square() {
        return Err(dims("cholesky_upper", "matrix is not square"));
    }
    if !p.is_finite() {
        return Err(Error::NonFiniteInput("cholesky_upper"));
    }
    let p = p.symmetrize();
    let n = p.rows();
    let mut r = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = p[(j, j)];
        for k in 0..j {
            d -= r[(k, j)] * r[(k, j)];
        }
        if d <= T::zero() || !d.is_finite() {
            return Err(Error::NotPositiveDefinite {
                index: j,
                pivot: to_f64(d),
            });
        }
        let rjj = d.sqrt();
        r[(j, j)] = rjj;
        for i in j + 1..n {
            let mut s = p[(j, i)];
            for k in 0..j {
                s -= r[(k, j)] * r[(k, i)];
            }
            r[(j, i)] = s / rjj;
        }
    }
    Ok(r)
}

/// Thin Householder QR of a tall matrix.
#[derive(Debug, Clone)]
pub struct Qr<T> {
    qr: Matrix<T>,
    tau: Vec<T>,
}

impl<T: Real> Qr<T> {
    pub fn new(a: &Matrix<T>) -> Result<Self> {
        let (m, n) = a.shape();
        if m < n {
            return Err(dims("qr", format!("{m}x{n} is wide")));
        }
        let mut qr = a.clone();
        let mut tau = vec![T::zero(); n];
        for k in 0..n {
            let mut norm = T::zero();
            for i in k..m {
                norm += qr[(i, k)] * qr[(i, k)];
            }
            let norm = norm.sqrt();
            if norm == T::zero() {
                continue;
            }
            let alpha = if qr[(k, k)] > T::zero() { -norm } else { norm };
            let v0 = qr[(k, k)] - alpha;
            // v = [1, x_{k+1}/v0, ...], beta = -v0/alpha
            for i in k + 1..m {
                qr[(i, k)] /= v0;
            }
            tau[k] = -v0 / alpha;
            qr[(k, k)] = alpha;
            for j in k + 1..n {
                let mut s = qr[(k, j)];
                for i in k + 1..m {
                    s += qr[(i, k)] * qr[(i, j)];
                }
                s *= tau[k];
                qr[(k, j)] -= s;
                for i in k + 1..m {
                    let v = qr[(i, k)];
                    qr[(i, j)] -= s * v;
                }
            }
        }
        Ok(Self { qr, tau })
    }

    /// Applies `Qᵀ` to a vector of length `m`.
    fn apply_qt(&self, b: &mut [T]) {
        let (m, n) = self.qr.shape();
        for k in 0..n {
            if self.tau[k] == T::zero() {
                continue;
            }
            let mut s = b[k];
            for i in k + 1..m {
                s += self.qr[(i, k)] * b[i];
            }
            s *= self.tau[k];
            b[k] -= s;
            for i in k + 1..m {
                b[i] -= s * self.qr[(i, k)];
            }
        }
    }

    fn r_is_regular(&self, rel: T) -> bool {
        let n = self.qr.cols();
        let big = (0..n).fold(T::zero(), |a, i| a.max(self.qr[(i, i)].abs()));
        big > T::zero() && (0..n).all(|i| self.qr[(i, i)].abs() > rel * big)
    }

    /// Least-squares solution of `A x ≈ b` for each column of `b`.
    pub fn solve_least_squares(&self, b: &Matrix<T>, rel: T) -> Result<Matrix<T>> {
        let (m, n) = self.qr.shape();
        if b.rows() != m {
            return Err(dims("least_squares", "right-hand side row count"));
        }
        if !self.r_is_regular(rel) {
            return Err(Error::SingularSolve("least_squares"));
        }
        let mut out = Matrix::zeros(n, b.cols());
        for j in 0..b.cols() {
            let mut col = b.col_vec(j);
            self.apply_qt(&mut col);
            for i in (0..n).rev() {
                let mut s = col[i];
                for k in i + 1..n {
                    s -= self.qr[(i, k)] * out[(k, j)];
                }
                out[(i, j)] = s / self.qr[(i, i)];
            }
        }
        Ok(out)
    }
}

/// Singular values and right singular vectors from one-sided Jacobi.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    /// Singular values, descending.
    pub sigma: Vec<T>,
    /// Right singular vectors as columns, ordered like `sigma`.
    pub v: Matrix<T>,
}

/// One-sided Jacobi SVD. Wide inputs are padded with zero rows so that
/// `v` always spans the full input space.
pub fn svd<T: Real>(a: &Matrix<T>) -> Result<Svd<T>> {
    if !a.is_finite() {
        return Err(Error::NonFiniteInput("svd"));
    }
    let (m0, n) = a.shape();
    let mut u = if m0 >= n {
        a.clone()
    } else {
        let mut padded = Matrix::zeros(n, n);
        padded.set_block(0, 0, a);
        padded
    };
    let m = u.rows();
    let mut v = Matrix::identity(n);
    let eps = T::epsilon();
    // columns below this energy are numerically zero and only stall sweeps
    let floor = (eps * a.norm_fro()).powi(2);
    let mut converged = n < 2;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for i in 0..m {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    alpha += up * up;
                    beta += uq * uq;
                    gamma += up * uq;
                }
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() || alpha.min(beta) <= floor {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (lit::<T>(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    u[(i, p)] = c * up - s * uq;
                    u[(i, q)] = s * up + c * uq;
                }
                for i in 0..n {
                    let (vp, vq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence("jacobi svd"));
    }
    let mut sv: Vec<(T, usize)> = (0..n)
        .map(|j| ((0..m).fold(T::zero(), |a, i| a + u[(i, j)] * u[(i, j)]).sqrt(), j))
        .collect();
    sv.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let sigma = sv.iter().map(|s| s.0).collect();
    let v = Matrix::from_fn(n, n, |i, k| v[(i, sv[k].1)]);
    Ok(Svd { sigma, v })
}

pub fn singular_values<T: Real>(a: &Matrix<T>) -> Result<Vec<T>> {
    let mut s = svd(a)?.sigma;
    s.truncate(a.rows().min(a.cols()));
    Ok(s)
}

/// Numerical rank with a threshold relative to the largest singular value.
pub fn rank<T: Real>(a: &Matrix<T>, rel_tol: T) -> Result<usize> {
    if a.is_empty() {
        return Ok(0);
    }
    let s = singular_values(a)?;
    let top = s.first().copied().unwrap_or_else(T::zero);
    if top == T::zero() {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > rel_tol * top).count())
}

/// Orthonormal basis (columns) of the numerical null space.
pub fn null_space<T: Real>(a: &Matrix<T>, rel_tol: T) -> Result<Matrix<T>> {
    let n = a.cols();
    let dec = svd(a)?;
    let top = dec.sigma.first().copied().unwrap_or_else(T::zero);
    let r = if top == T::zero() {
        0
    } else {
        dec.sigma
            .iter()
            .take(a.rows().min(n))
            .filter(|&&x| x > rel_tol * top)
            .count()
    };
    Ok(dec.v.submatrix(0, r, n, n - r))
}

/// Spectral norm.
pub fn norm2<T: Real>(a: &Matrix<T>) -> Result<T> {
    if a.is_empty() {
        return Ok(T::zero());
    }
    Ok(singular_values(a)?.first().copied().unwrap_or_else(T::zero))
}

/// Left pseudo-inverse `(MᵀM)⁻¹Mᵀ` of a full-column-rank matrix.
pub fn pinv_left<T: Real>(m: &Matrix<T>) -> Result<Matrix<T>> {
    let tol = Tolerances::<T>::standard();
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Ok(Matrix::zeros(0, rows));
    }
    let r = rank(m, tol.rank)?;
    if r < cols {
        return Err(Error::RankDeficient {
            rank: r,
            expected: cols,
        });
    }
    let qr = Qr::new(m)?;
    Ok(qr.solve_least_squares(&Matrix::identity(rows), tol.rank)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Matrix<f64>, b: &Matrix<f64>, tol: f64) -> bool {
        a.shape() == b.shape() && (a - b).max_abs() <= tol
    }

    #[test]
    fn cholesky_identity_and_diagonal() {
        let i3 = Matrix::<f64>::identity(3);
        assert!(close(&cholesky_upper(&i3).unwrap(), &i3, 0.0));
        let p = Matrix::from_rows(&[[4.0, 0.0], [0.0, 9.0]]);
        let r = cholesky_upper(&p).unwrap();
        assert!(close(&r, &Matrix::from_rows(&[[2.0, 0.0], [0.0, 3.0]]), 1e-15));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let p = Matrix::<f64>::from_rows(&[[1.0, 2.0], [2.0, 1.0]]);
        assert!(matches!(cholesky_upper(&p), Err(Error::NotPositiveDefinite { index: 1, .. })));
    }

    #[test]
    fn cholesky_reconstructs_random_spd() {
        let m = Matrix::<f64>::from_rows(&[[1.0, 0.3, -2.0], [0.5, 4.0, 1.0], [-1.2, 0.7, 0.2]]);
        let p = (&m.transpose() * &m).add_diag(1.0);
        let r = cholesky_upper(&p).unwrap();
        for i in 0..3 {
            assert!(r[(i, i)] > 0.0);
            for j in 0..i {
                assert_eq!(r[(i, j)], 0.0);
            }
        }
        assert!(close(&(&r.transpose() * &r), &p, 1e-10));
    }

    #[test]
    fn pinv_left_examples() {
        let m = Matrix::<f64>::from_rows(&[[0.25]]);
        assert!(close(&pinv_left(&m).unwrap(), &Matrix::from_rows(&[[4.0]]), 1e-14));
        let ones = Matrix::<f64>::from_rows(&[[1.0], [1.0]]);
        assert!(close(&pinv_left(&ones).unwrap(), &Matrix::from_rows(&[[0.5, 0.5]]), 1e-14));
        let sq = Matrix::<f64>::from_rows(&[[2.0, 1.0], [1.0, 3.0]]);
        assert!(close(&pinv_left(&sq).unwrap(), &inverse(&sq).unwrap(), 1e-13));
    }

    #[test]
    fn pinv_left_rejects_rank_deficient() {
        let m = Matrix::<f64>::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]);
        assert!(matches!(pinv_left(&m), Err(Error::RankDeficient { rank: 1, expected: 2 })));
    }

    #[test]
    fn svd_null_space_of_wide_matrix() {
        let a = Matrix::<f64>::from_rows(&[[1.0, 0.0, 0.0]]);
        let ns = null_space(&a, 1e-10).unwrap();
        assert_eq!(ns.shape(), (3, 2));
        assert!((&a * &ns).max_abs() < 1e-14);
        assert_eq!(rank(&a, 1e-10).unwrap(), 1);
    }

    #[test]
    fn lu_determinant() {
        let a = Matrix::<f64>::from_rows(&[[0.0, 1.0], [-2.0, -3.0]]);
        assert!((Lu::new(&a).unwrap().det() - 2.0).abs() < 1e-14);
        let s = Matrix::<f64>::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert!(Lu::new(&s).is_err());
    }

    #[test]
    fn least_squares_overdetermined() {
        let a = Matrix::<f64>::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
        let b = Matrix::column(&[1.0, 2.0, 3.0]);
        let x = Qr::new(&a).unwrap().solve_least_squares(&b, 1e-12).unwrap();
        assert!((x[(0, 0)] - 1.0).abs() < 1e-13 && (x[(1, 0)] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn works_in_single_precision() {
        let p = Matrix::<f32>::from_rows(&[[4.0, 1.0], [1.0, 3.0]]);
        let r = cholesky_upper(&p).unwrap();
        assert!((&(&r.transpose() * &r) - &p).max_abs() < 1e-5);
    }
}
