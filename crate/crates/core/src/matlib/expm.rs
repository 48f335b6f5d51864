use super::decomp::Lu;
use super::matrix::Matrix;
use crate::scalar::{lit, Real};

const PADE_ORDER: usize = 6;

fn pade_coefficients<T: Real>() -> Vec<T> {
    let q = PADE_ORDER;
    let mut c = vec![T::one()];
    for k in 1..=q {
        let prev = c[k - 1];
        let num = lit::<T>((q - k + 1) as f64);
        let den = lit::<T>((k * (2 * q - k + 1)) as f64);
        c.push(prev * num / den);
    }
    c
}

/// Matrix exponential `e^{A t}` by scaling and squaring with a diagonal
/// [6/6] Padé approximant.
pub fn expm<T: Real>(a: &Matrix<T>, t: T) -> Matrix<T> {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.rows();
    if n == 0 || t == T::zero() {
        return Matrix::identity(n);
    }
    let at = a.scale(t);
    let norm = at.norm_inf();
    let mut squarings = 0i32;
    if norm > lit(0.5) {
        squarings = (norm / lit(0.5)).log2().ceil().to_i32().unwrap_or(0).max(0);
    }
    let x = at.scale(lit::<T>(2.0).powi(-squarings));
    let c = pade_coefficients::<T>();
    let mut num = Matrix::identity(n);
    let mut den = Matrix::identity(n);
    let mut power = Matrix::identity(n);
    for (k, &ck) in c.iter().enumerate().skip(1) {
        power = &power * &x;
        let term = power.scale(ck);
        num = &num + &term;
        den = if k % 2 == 0 { &den + &term } else { &den - &term };
    }
    let mut e = Lu::new(&den)
        .expect("Padé denominator is well conditioned after scaling")
        .solve(&num);
    for _ in 0..squarings {
        e = &e * &e;
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_at_zero_time() {
        let a = Matrix::<f64>::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(expm(&a, 0.0), Matrix::identity(2));
    }

    #[test]
    fn diagonal_closed_form() {
        let a = Matrix::<f64>::from_diag(&[-1.0, -2.0]);
        let e = expm(&a, 1.0);
        assert!((e[(0, 0)] - (-1.0f64).exp()).abs() < 1e-15);
        assert!((e[(1, 1)] - (-2.0f64).exp()).abs() < 1e-15);
        assert!(e[(0, 1)].abs() < 1e-16);
    }

    #[test]
    fn nilpotent_closed_form() {
        let a = Matrix::<f64>::from_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        for &t in &[0.3, 1.0, 7.5] {
            let e = expm(&a, t);
            let expect = Matrix::from_rows(&[[1.0, t], [0.0, 1.0]]);
            assert!((&e - &expect).max_abs() < 1e-13);
        }
    }

    #[test]
    fn matches_taylor_series_on_small_norm() {
        let a = Matrix::<f64>::from_rows(&[[0.1, -0.2, 0.05], [0.3, -0.1, 0.0], [0.0, 0.2, -0.3]]);
        let mut series = Matrix::identity(3);
        let mut term = Matrix::identity(3);
        for k in 1..30 {
            term = (&term * &a).scale(1.0 / k as f64);
            series = &series + &term;
        }
        let e = expm(&a, 1.0);
        assert!((&e - &series).max_abs() <= 1e-9 * series.max_abs());
    }

    #[test]
    fn rotation_generator() {
        let a = Matrix::<f64>::from_rows(&[[0.0, -1.0], [1.0, 0.0]]);
        let t = std::f64::consts::FRAC_PI_2 * 3.0;
        let e = expm(&a, t);
        let expect = Matrix::from_rows(&[[t.cos(), -t.sin()], [t.sin(), t.cos()]]);
        assert!((&e - &expect).max_abs() < 1e-12);
    }
}
