//! PBH structural tests and output-injection gain synthesis.

use num_complex::Complex;

use super::decomp::{inverse, rank, svd};
use super::eigen::{eigenvalues, spectral_abscissa};
use super::lyapunov::lyapunov_kron;
use super::matrix::Matrix;
use crate::error::{dims, Error, Result};
use crate::scalar::{to_f64, Real, Tolerances};

/// Real embedding `[[Re, -Im], [Im, Re]]` of a complex matrix; its rank is
/// twice the complex rank.
pub fn complex_embedding<T: Real>(re: &Matrix<T>, im: &Matrix<T>) -> Matrix<T> {
    Matrix::block2(re, &-im, im, re)
}

/// Complex rank of `[λI − A; C]` (or `[λI − A, B]` when `stack_right`).
fn pbh_rank<T: Real>(a: &Matrix<T>, other: &Matrix<T>, lambda: Complex<T>, stack_right: bool, tol: T) -> Result<usize> {
    let n = a.rows();
    let re_block = (-a).add_diag(lambda.re);
    let im_block = Matrix::identity(n).scale(lambda.im);
    let zero = Matrix::zeros(other.rows(), other.cols());
    let (re, im) = if stack_right {
        (Matrix::hstack(&[&re_block, other]), Matrix::hstack(&[&im_block, &zero]))
    } else {
        (Matrix::vstack(&[&re_block, other]), Matrix::vstack(&[&im_block, &zero]))
    };
    Ok(rank(&complex_embedding(&re, &im), tol)? / 2)
}

/// Eigenvalues of `A` that are unobservable through `C` (PBH test).
pub fn unobservable_modes<T: Real>(a: &Matrix<T>, c: &Matrix<T>) -> Result<Vec<Complex<T>>> {
    if !a.is_square() || c.cols() != a.rows() {
        return Err(dims("pbh", "C must have as many columns as A"));
    }
    let tol = Tolerances::<T>::standard().rank;
    let n = a.rows();
    let mut modes = Vec::new();
    for l in eigenvalues(a)? {
        if pbh_rank(a, c, l, false, tol)? < n {
            modes.push(l);
        }
    }
    Ok(modes)
}

/// Eigenvalues of `A` that are uncontrollable from `B` (PBH test).
pub fn uncontrollable_modes<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Vec<Complex<T>>> {
    if !a.is_square() || b.rows() != a.rows() {
        return Err(dims("pbh", "B must have as many rows as A"));
    }
    let tol = Tolerances::<T>::standard().rank;
    let n = a.rows();
    let mut modes = Vec::new();
    for l in eigenvalues(a)? {
        if pbh_rank(a, b, l, true, tol)? < n {
            modes.push(l);
        }
    }
    Ok(modes)
}

/// Fails with `NotDetectable` if some mode with nonnegative real part is
/// unobservable.
pub fn require_detectable<T: Real>(a: &Matrix<T>, c: &Matrix<T>) -> Result<()> {
    match unobservable_modes(a, c)?.into_iter().find(|l| l.re >= T::zero()) {
        Some(l) => Err(Error::NotDetectable {
            re: to_f64(l.re),
            im: to_f64(l.im),
        }),
        None => Ok(()),
    }
}

/// Output-injection gain `K` (n×p) with `A + K C` Hurwitz.
///
/// Returns zero when `A` already decays at `desired_rate`. Otherwise the
/// state is split into observable and unobservable subspaces (SVD of the
/// observability matrix); the unobservable block must be Hurwitz. On the
/// observable block the dual of the Bass construction is used: with
/// `β = max|Re λ(A_o)| + desired_rate`, `X` solves
/// `(A_oᵀ + βI) X + X (A_o + βI) = C_oᵀ C_o` and `K_o = −X⁻¹ C_oᵀ`, which
/// places every observable mode at `−λ̄ − 2β`.
pub fn place_output_injection<T: Real>(a: &Matrix<T>, c: &Matrix<T>, desired_rate: T) -> Result<Matrix<T>> {
    if !a.is_square() || c.cols() != a.rows() {
        return Err(dims("place_output_injection", "C must have as many columns as A"));
    }
    if desired_rate <= T::zero() {
        return Err(Error::Config("desired_rate must be positive".into()));
    }
    let n = a.rows();
    let p = c.rows();
    if spectral_abscissa(a)? <= -desired_rate {
        return Ok(Matrix::zeros(n, p));
    }
    require_detectable(a, c)?;

    let tol = Tolerances::<T>::standard();
    let mut blocks = Vec::with_capacity(n);
    let mut power = c.clone();
    for _ in 0..n {
        blocks.push(power.clone());
        power = &power * a;
    }
    let obs = Matrix::vstack(&blocks.iter().collect::<Vec<_>>());
    let dec = svd(&obs)?;
    let top = dec.sigma.first().copied().unwrap_or_else(T::zero);
    let r = dec.sigma.iter().filter(|&&s| s > tol.rank * top).count();
    let v_o = dec.v.submatrix(0, 0, n, r);
    let v_u = dec.v.submatrix(0, r, n, n - r);

    if n - r > 0 {
        let a_uu = &(&v_u.transpose() * a) * &v_u;
        let abscissa = spectral_abscissa(&a_uu)?;
        if abscissa >= T::zero() {
            return Err(Error::NotDetectable {
                re: to_f64(abscissa),
                im: 0.0,
            });
        }
    }
    if r == 0 {
        return Ok(Matrix::zeros(n, p));
    }

    let a_oo = &(&v_o.transpose() * a) * &v_o;
    let c_o = c * &v_o;
    let beta = eigenvalues(&a_oo)?
        .iter()
        .fold(T::zero(), |acc, l| acc.max(l.re.abs()))
        + desired_rate;
    let shifted = (-&a_oo).add_diag(-beta);
    let x = lyapunov_kron(&shifted, &(&c_o.transpose() * &c_o))?;
    let k_o = -(&inverse(&x)? * &c_o.transpose());
    let k = &v_o * &k_o;

    let closed = a + &(&k * c);
    let abscissa = spectral_abscissa(&closed)?;
    if abscissa >= T::zero() {
        return Err(Error::NotHurwitz {
            abscissa: to_f64(abscissa),
        });
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlib::eigen::is_hurwitz;

    #[test]
    fn already_hurwitz_gives_zero_gain() {
        let a = Matrix::<f64>::identity(2).scale(-1.0);
        let c = Matrix::identity(2);
        let k = place_output_injection(&a, &c, 0.5).unwrap();
        assert_eq!(k.max_abs(), 0.0);
        assert!(is_hurwitz(&(&a + &(&k * &c))).unwrap());
    }

    #[test]
    fn toy_projected_dynamics() {
        let a = Matrix::<f64>::from_rows(&[[0.0, 0.0], [-2.0, -4.0]]);
        let c = Matrix::from_rows(&[[1.0, 0.0]]);
        let k = place_output_injection(&a, &c, 1.0).unwrap();
        assert!(is_hurwitz(&(&a + &(&k * &c))).unwrap());
    }

    #[test]
    fn detectable_but_unobservable_mode() {
        // mode -4 invisible through C, mode +1 observable
        let a = Matrix::<f64>::from_diag(&[1.0, -4.0]);
        let c = Matrix::from_rows(&[[1.0, 0.0]]);
        let k = place_output_injection(&a, &c, 2.0).unwrap();
        let closed = &a + &(&k * &c);
        assert!(spectral_abscissa(&closed).unwrap() <= -2.0 + 1e-9);
    }

    #[test]
    fn rejects_undetectable_pair() {
        let a = Matrix::<f64>::from_diag(&[1.0, -4.0]);
        let c = Matrix::from_rows(&[[0.0, 1.0]]);
        assert!(matches!(place_output_injection(&a, &c, 1.0), Err(Error::NotDetectable { .. })));
    }

    #[test]
    fn pbh_flags_uncontrollable() {
        let a = Matrix::<f64>::from_diag(&[-1.0, -2.0]);
        let b = Matrix::column(&[1.0, 0.0]);
        let modes = uncontrollable_modes(&a, &b).unwrap();
        assert_eq!(modes.len(), 1);
        assert!((modes[0].re + 2.0).abs() < 1e-12);
    }
}
