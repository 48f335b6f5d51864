//! Eigenvalues of dense real matrices.
//!
//! General matrices go through Householder reduction to upper Hessenberg
//! form followed by Francis double-shift QR iteration (the EISPACK `hqr`
//! scheme). Symmetric matrices use cyclic Jacobi rotations.

use num_complex::Complex;

use super::matrix::Matrix;
use crate::error::{dims, Error, Result};
use crate::scalar::{lit, Real};

const MAX_QR_ITERS: usize = 60;

fn hessenberg<T: Real>(a: &Matrix<T>) -> Matrix<T> {
    let n = a.rows();
    let mut h = a.clone();
    if n < 3 {
        return h;
    }
    let high = n - 1;
    let mut ort = vec![T::zero(); n];
    for m in 1..high {
        let scale = (m..=high).fold(T::zero(), |s, i| s + h[(i, m - 1)].abs());
        if scale == T::zero() {
            continue;
        }
        let mut hh = T::zero();
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > T::zero() {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;
        for j in m..n {
            let mut f = T::zero();
            for i in (m..=high).rev() {
                f += ort[i] * h[(i, j)];
            }
            f /= hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let mut f = T::zero();
            for j in (m..=high).rev() {
                f += ort[j] * h[(i, j)];
            }
            f /= hh;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[(m, m - 1)] = scale * g;
    }
    h
}

/// Eigenvalues of a square matrix, in no particular order.
pub fn eigenvalues<T: Real>(a: &Matrix<T>) -> Result<Vec<Complex<T>>> {
    if !a.is_square() {
        return Err(dims("eigenvalues", "matrix is not square"));
    }
    if !a.is_finite() {
        return Err(Error::NonFiniteInput("eigenvalues"));
    }
    let nn = a.rows();
    if nn == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg(a);
    let mut d = vec![T::zero(); nn];
    let mut e = vec![T::zero(); nn];
    let eps = T::epsilon();
    let two = lit::<T>(2.0);
    let mut exshift = T::zero();
    let (mut p, mut q, mut r, mut s, mut z): (T, T, T, T, T);
    let (mut w, mut x, mut y);

    let mut norm = T::zero();
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    let mut n = nn as isize - 1;
    let mut iter = 0usize;
    while n >= 0 {
        let nu = n as usize;
        let mut l = nu;
        while l > 0 {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == T::zero() {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            h[(nu, nu)] += exshift;
            d[nu] = h[(nu, nu)];
            e[nu] = T::zero();
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / two;
            q = p * p + w;
            z = q.abs().sqrt();
            h[(nu, nu)] += exshift;
            h[(nu - 1, nu - 1)] += exshift;
            x = h[(nu, nu)];
            if q >= T::zero() {
                z = if p >= T::zero() { p + z } else { p - z };
                d[nu - 1] = x + z;
                d[nu] = d[nu - 1];
                if z != T::zero() {
                    d[nu] = x - w / z;
                }
                e[nu - 1] = T::zero();
                e[nu] = T::zero();
            } else {
                d[nu - 1] = x + p;
                d[nu] = x + p;
                e[nu - 1] = z;
                e[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            x = h[(nu, nu)];
            y = T::zero();
            w = T::zero();
            if l < nu {
                y = h[(nu - 1, nu - 1)];
                w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            }
            if iter == 10 {
                exshift += x;
                for i in 0..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = lit::<T>(0.75) * s;
                y = x;
                w = lit::<T>(-0.4375) * s * s;
            }
            if iter == 30 {
                s = (y - x) / two;
                s = s * s + w;
                if s > T::zero() {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / two + s);
                    for i in 0..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = lit(0.964);
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            if iter > MAX_QR_ITERS {
                return Err(Error::NoConvergence("hessenberg qr"));
            }

            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                h[(i, i - 2)] = T::zero();
                if i > m + 2 {
                    h[(i, i - 3)] = T::zero();
                }
            }

            for k in m..nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { T::zero() };
                    x = p.abs() + q.abs() + r.abs();
                    if x == T::zero() {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < T::zero() {
                    s = -s;
                }
                if s != T::zero() {
                    if k != m {
                        h[(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..nn {
                        p = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            p += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= p * z;
                        }
                        h[(k, j)] -= p * x;
                        h[(k + 1, j)] -= p * y;
                    }
                    for i in 0..=nu.min(k + 3) {
                        p = x * h[(i, k)] + y * h[(i, k + 1)];
                        if notlast {
                            p += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= p * r;
                        }
                        h[(i, k)] -= p;
                        h[(i, k + 1)] -= p * q;
                    }
                }
            }
        }
    }
    Ok(d.into_iter().zip(e).map(|(re, im)| Complex::new(re, im)).collect())
}

/// Largest real part of the spectrum; `-inf` for an empty matrix.
pub fn spectral_abscissa<T: Real>(a: &Matrix<T>) -> Result<T> {
    Ok(eigenvalues(a)?
        .iter()
        .fold(T::neg_infinity(), |acc, l| acc.max(l.re)))
}

pub fn is_hurwitz<T: Real>(a: &Matrix<T>) -> Result<bool> {
    Ok(spectral_abscissa(a)? < T::zero())
}

/// Errors with `NotHurwitz` unless every eigenvalue has negative real part.
pub fn require_hurwitz<T: Real>(a: &Matrix<T>) -> Result<()> {
    let abscissa = spectral_abscissa(a)?;
    if abscissa < T::zero() {
        Ok(())
    } else {
        Err(Error::NotHurwitz {
            abscissa: abscissa.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
pub fn symmetric_eigenvalues<T: Real>(a: &Matrix<T>) -> Result<Vec<T>> {
    if !a.is_square() {
        return Err(dims("symmetric_eigenvalues", "matrix is not square"));
    }
    if !a.is_finite() {
        return Err(Error::NonFiniteInput("symmetric_eigenvalues"));
    }
    let n = a.rows();
    let mut m = a.symmetrize();
    let eps = T::epsilon();
    for _ in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .fold(T::zero(), |acc, (i, j)| acc + m[(i, j)] * m[(i, j)]);
        if off <= eps * eps * m.norm_fro().powi(2) || off == T::zero() {
            let mut d: Vec<T> = (0..n).map(|i| m[(i, i)]).collect();
            d.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
            return Ok(d);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (lit::<T>(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (T::one() + theta * theta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    Err(Error::NoConvergence("jacobi eigenvalues"))
}

/// `(λ_min, λ_max)` of a symmetric matrix.
pub fn symmetric_extremes<T: Real>(a: &Matrix<T>) -> Result<(T, T)> {
    let ev = symmetric_eigenvalues(a)?;
    match (ev.first(), ev.last()) {
        (Some(&lo), Some(&hi)) => Ok((lo, hi)),
        _ => Err(dims("symmetric_extremes", "empty matrix")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_re(mut v: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn diagonal_spectrum() {
        let a = Matrix::<f64>::from_diag(&[-1.0, -5.0]);
        let ev = sorted_re(eigenvalues(&a).unwrap());
        assert!((ev[0].re + 5.0).abs() < 1e-12 && (ev[1].re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn companion_spectrum() {
        let a = Matrix::<f64>::from_rows(&[[0.0, 1.0], [-2.0, -3.0]]);
        let ev = sorted_re(eigenvalues(&a).unwrap());
        assert!((ev[0].re + 2.0).abs() < 1e-12 && (ev[1].re + 1.0).abs() < 1e-12);
        assert!(ev.iter().all(|l| l.im.abs() < 1e-12));
    }

    #[test]
    fn complex_pair() {
        let a = Matrix::<f64>::from_rows(&[[-1.0, 2.0], [-2.0, -1.0]]);
        let ev = eigenvalues(&a).unwrap();
        for l in ev {
            assert!((l.re + 1.0).abs() < 1e-12 && (l.im.abs() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn larger_matrix_trace_and_determinant() {
        let a = Matrix::<f64>::from_rows(&[
            [4.0, -2.0, 1.0, 0.5, 3.0],
            [1.0, 0.0, -1.0, 2.0, 0.0],
            [0.5, 3.0, -2.0, 1.0, 1.0],
            [0.0, -1.0, 2.0, 1.0, -3.0],
            [2.0, 0.0, 0.0, 1.0, -1.0],
        ]);
        let ev = eigenvalues(&a).unwrap();
        let sum: Complex<f64> = ev.iter().sum();
        let prod: Complex<f64> = ev.iter().product();
        assert!((sum.re - a.trace()).abs() < 1e-10 && sum.im.abs() < 1e-10);
        let det = crate::matlib::Lu::new(&a).unwrap().det();
        assert!((prod.re - det).abs() < 1e-8 * det.abs().max(1.0));
    }

    #[test]
    fn symmetric_extremes_of_spd() {
        let a = Matrix::<f64>::from_rows(&[[2.0, 1.0], [1.0, 2.0]]);
        let (lo, hi) = symmetric_extremes(&a).unwrap();
        assert!((lo - 1.0).abs() < 1e-14 && (hi - 3.0).abs() < 1e-14);
    }
}
