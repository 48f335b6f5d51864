//! SISO rational transfer functions with exact polynomial arithmetic,
//! used to build filters whose inverse factors have no proper realization
//! on their own.

use num_complex::Complex;

use super::system::StateSpace;
use crate::error::{Error, Result};
use crate::matlib::Matrix;
use crate::scalar::Real;

/// Polynomial with ascending coefficients `c₀ + c₁s + …`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T> {
    coef: Vec<T>,
}

impl<T: Real> Poly<T> {
    pub fn new(mut coef: Vec<T>) -> Self {
        while coef.len() > 1 && coef.last() == Some(&T::zero()) {
            coef.pop();
        }
        if coef.is_empty() {
            coef.push(T::zero());
        }
        Self { coef }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// `s + a`.
    pub fn linear(a: T) -> Self {
        Self::new(vec![a, T::one()])
    }

    pub fn coef(&self) -> &[T] {
        &self.coef
    }

    pub fn degree(&self) -> usize {
        self.coef.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coef.len() == 1 && self.coef[0] == T::zero()
    }

    pub fn lead(&self) -> T {
        *self.coef.last().unwrap()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![T::zero(); self.coef.len() + other.coef.len() - 1];
        for (i, &a) in self.coef.iter().enumerate() {
            for (j, &b) in other.coef.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coef.len().max(other.coef.len());
        let get = |p: &Self, i: usize| p.coef.get(i).copied().unwrap_or_else(T::zero);
        Self::new((0..len).map(|i| get(self, i) + get(other, i)).collect())
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.coef.iter().map(|&c| c * s).collect())
    }

    pub fn eval(&self, s: Complex<T>) -> Complex<T> {
        self.coef
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * s + c)
    }
}

/// `num(s) / den(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction<T> {
    pub num: Poly<T>,
    pub den: Poly<T>,
}

impl<T: Real> TransferFunction<T> {
    pub fn new(num: Poly<T>, den: Poly<T>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Config("transfer function with zero denominator".into()));
        }
        Ok(Self { num, den })
    }

    pub fn constant(k: T) -> Self {
        Self {
            num: Poly::constant(k),
            den: Poly::constant(T::one()),
        }
    }

    /// `gain / (s^integrators · Π (1 − s/pᵢ))` for real poles `pᵢ < 0`.
    pub fn lowpass(gain: T, poles: &[T], integrators: usize) -> Result<Self> {
        let mut den = Poly::constant(T::one());
        for &p in poles {
            if p >= T::zero() {
                return Err(Error::UnstablePoleRequested { pole: crate::scalar::to_f64(p) });
            }
            den = den.mul(&Poly::new(vec![T::one(), -T::one() / p]));
        }
        let mut s_pow = vec![T::zero(); integrators + 1];
        s_pow[integrators] = T::one();
        den = den.mul(&Poly::new(s_pow));
        Self::new(Poly::constant(gain), den)
    }

    pub fn relative_degree(&self) -> isize {
        self.den.degree() as isize - self.num.degree() as isize
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
    }

    pub fn reciprocal(&self) -> Result<Self> {
        Self::new(self.den.clone(), self.num.clone())
    }

    /// `G / (1 + ωG)`.
    pub fn feedback(&self, omega: T) -> Result<Self> {
        Self::new(self.num.clone(), self.den.add(&self.num.scale(omega)))
    }

    pub fn eval(&self, s: Complex<T>) -> Complex<T> {
        self.num.eval(s) / self.den.eval(s)
    }

    /// Controllable canonical realization. Fails for improper functions.
    pub fn to_state_space(&self) -> Result<StateSpace<T>> {
        if self.relative_degree() < 0 {
            return Err(Error::ImproperRealization(format!(
                "numerator degree {} exceeds denominator degree {}",
                self.num.degree(),
                self.den.degree()
            )));
        }
        let n = self.den.degree();
        let lead = self.den.lead();
        let a_coef: Vec<T> = self.den.coef().iter().map(|&c| c / lead).collect();
        let b_coef: Vec<T> = (0..=n)
            .map(|i| self.num.coef().get(i).copied().unwrap_or_else(T::zero) / lead)
            .collect();
        let d = b_coef[n];
        let mut a = Matrix::zeros(n, n);
        for i in 0..n.saturating_sub(1) {
            a[(i, i + 1)] = T::one();
        }
        for j in 0..n {
            if n > 0 {
                a[(n - 1, j)] = -a_coef[j];
            }
        }
        let mut b = Matrix::zeros(n, 1);
        if n > 0 {
            b[(n - 1, 0)] = T::one();
        }
        let c = Matrix::from_fn(1, n, |_, j| b_coef[j] - d * a_coef[j]);
        StateSpace::new(a, b, c, Matrix::from_rows(&[[d]]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn realization_matches_rational_form() {
        // (s + 2) / ((s + 1)(s + 3))
        let g = TransferFunction::new(Poly::linear(2.0_f64), Poly::linear(1.0).mul(&Poly::linear(3.0))).unwrap();
        let ss = g.to_state_space().unwrap();
        for &w in &[0.01, 0.1, 1.0, 10.0, 100.0] {
            let s = Complex::new(0.0, w);
            let d = ss.freq(w).unwrap().entry(0, 0) - g.eval(s);
            assert!(d.norm() < 1e-12);
        }
    }

    #[test]
    fn biproper_realization() {
        let g = TransferFunction::new(Poly::new(vec![3.0_f64, 2.0]), Poly::linear(1.0)).unwrap();
        let ss = g.to_state_space().unwrap();
        assert_eq!(ss.d[(0, 0)], 2.0);
        assert!((ss.dc_gain().unwrap()[(0, 0)] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn improper_rejected() {
        let g = TransferFunction::new(Poly::linear(1.0_f64), Poly::constant(1.0)).unwrap();
        assert!(matches!(g.to_state_space(), Err(Error::ImproperRealization(_))));
    }

    #[test]
    fn lowpass_factors() {
        // 5 / (s (s/11 + 1)) = 55 / (s² + 11 s)
        let d = TransferFunction::lowpass(5.0_f64, &[-11.0], 1).unwrap();
        let s = Complex::new(0.3, 2.0);
        let expect = Complex::new(55.0, 0.0) / (s * s + s * 11.0);
        assert!((d.eval(s) - expect).norm() < 1e-12);
        assert_eq!(d.relative_degree(), 2);
    }
}
