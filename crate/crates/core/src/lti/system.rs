use crate::error::{dims, Error, Result};
use crate::matlib::{eigenvalues, spectral_abscissa, Lu, Matrix};
use crate::scalar::{to_f64, Real};
use num_complex::Complex;

/// Continuous-time realization `ẋ = Ax + Bu`, `y = Cx + Du`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace<T> {
    pub a: Matrix<T>,
    pub b: Matrix<T>,
    pub c: Matrix<T>,
    pub d: Matrix<T>,
}

/// Complex matrix stored as a real and an imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqResponse<T> {
    pub re: Matrix<T>,
    pub im: Matrix<T>,
}

impl<T: Real> FreqResponse<T> {
    pub fn sub(&self, other: &Self) -> Self {
        Self {
            re: &self.re - &other.re,
            im: &self.im - &other.im,
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.re
            .as_slice()
            .iter()
            .zip(self.im.as_slice())
            .fold(T::zero(), |acc, (&r, &i)| acc.max(r.hypot(i)))
    }

    /// Row-sum norm with complex moduli.
    pub fn norm_inf(&self) -> T {
        (0..self.re.rows())
            .map(|i| {
                self.re
                    .row_slice(i)
                    .iter()
                    .zip(self.im.row_slice(i))
                    .map(|(&r, &im)| r.hypot(im))
                    .sum::<T>()
            })
            .fold(T::zero(), T::max)
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex<T> {
        Complex::new(self.re[(i, j)], self.im[(i, j)])
    }
}

impl<T: Real> StateSpace<T> {
    pub fn new(a: Matrix<T>, b: Matrix<T>, c: Matrix<T>, d: Matrix<T>) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() {
            return Err(dims("state_space", "A must be square"));
        }
        if b.rows() != n || c.cols() != n || d.rows() != c.rows() || d.cols() != b.cols() {
            return Err(dims(
                "state_space",
                format!(
                    "A {}x{}, B {}x{}, C {}x{}, D {}x{}",
                    a.rows(),
                    a.cols(),
                    b.rows(),
                    b.cols(),
                    c.rows(),
                    c.cols(),
                    d.rows(),
                    d.cols()
                ),
            ));
        }
        if !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite()) {
            return Err(Error::NonFiniteInput("state_space"));
        }
        Ok(Self { a, b, c, d })
    }

    /// Memoryless gain `y = Du`.
    pub fn gain(d: Matrix<T>) -> Self {
        let (p, m) = d.shape();
        Self {
            a: Matrix::zeros(0, 0),
            b: Matrix::zeros(0, m),
            c: Matrix::zeros(p, 0),
            d,
        }
    }

    pub fn identity(m: usize) -> Self {
        Self::gain(Matrix::identity(m))
    }

    pub fn order(&self) -> usize {
        self.a.rows()
    }

    pub fn inputs(&self) -> usize {
        self.b.cols()
    }

    pub fn outputs(&self) -> usize {
        self.c.rows()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.d.max_abs() == T::zero()
    }

    pub fn poles(&self) -> Result<Vec<Complex<T>>> {
        eigenvalues(&self.a)
    }

    pub fn is_stable(&self) -> Result<bool> {
        Ok(self.order() == 0 || spectral_abscissa(&self.a)? < T::zero())
    }

    pub fn require_stable(&self) -> Result<()> {
        if self.order() == 0 {
            return Ok(());
        }
        let abscissa = spectral_abscissa(&self.a)?;
        if abscissa >= T::zero() {
            return Err(Error::Unstable {
                abscissa: to_f64(abscissa),
            });
        }
        Ok(())
    }

    /// `G(s)` at `s = σ + jω`, solving the real 2n×2n embedding of
    /// `(sI − A) X = B`.
    pub fn eval(&self, s: Complex<T>) -> Result<FreqResponse<T>> {
        let n = self.order();
        if n == 0 {
            return Ok(FreqResponse {
                re: self.d.clone(),
                im: Matrix::zeros(self.d.rows(), self.d.cols()),
            });
        }
        let shifted = (-&self.a).add_diag(s.re);
        let w = Matrix::identity(n).scale(s.im);
        let big = Matrix::block2(&shifted, &-&w, &w, &shifted);
        let rhs = Matrix::vstack(&[&self.b, &Matrix::zeros(n, self.inputs())]);
        let lu = Lu::new(&big).map_err(|_| Error::SingularSolve("frequency response at a pole"))?;
        let x = lu.solve(&rhs);
        let xr = x.submatrix(0, 0, n, self.inputs());
        let xi = x.submatrix(n, 0, n, self.inputs());
        Ok(FreqResponse {
            re: &(&self.c * &xr) + &self.d,
            im: &self.c * &xi,
        })
    }

    /// `G(jω)`.
    pub fn freq(&self, omega: T) -> Result<FreqResponse<T>> {
        self.eval(Complex::new(T::zero(), omega))
    }

    /// Static gain `G(0) = D − C A⁻¹ B`.
    pub fn dc_gain(&self) -> Result<Matrix<T>> {
        Ok(self.eval(Complex::new(T::zero(), T::zero()))?.re)
    }

    /// Cascade `other · self`: the output of `self` drives `other`.
    pub fn then(&self, other: &Self) -> Result<Self> {
        series(other, self)
    }

    /// `K · G`.
    pub fn premul(&self, k: &Matrix<T>) -> Result<Self> {
        if k.cols() != self.outputs() {
            return Err(dims("premul", "gain columns must equal system outputs"));
        }
        Ok(Self {
            a: self.a.clone(),
            b: self.b.clone(),
            c: k * &self.c,
            d: k * &self.d,
        })
    }

    /// `G · K`.
    pub fn postmul(&self, k: &Matrix<T>) -> Result<Self> {
        if k.rows() != self.inputs() {
            return Err(dims("postmul", "gain rows must equal system inputs"));
        }
        Ok(Self {
            a: self.a.clone(),
            b: &self.b * k,
            c: self.c.clone(),
            d: &self.d * k,
        })
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.scale(s),
            d: self.d.scale(s),
        }
    }

    /// `m` decoupled copies: `G ⊗ I_m` for a SISO `G`, block-diagonal
    /// otherwise.
    pub fn diag_copies(&self, m: usize) -> Self {
        let rep = |x: &Matrix<T>| Matrix::block_diag(&vec![x; m]);
        Self {
            a: rep(&self.a),
            b: rep(&self.b),
            c: rep(&self.c),
            d: rep(&self.d),
        }
    }

    /// `(s + α) G(s)` for strictly proper `G`:
    /// `C(A + αI)(sI − A)⁻¹B + CB`.
    pub fn shift_derivative(&self, alpha: T) -> Result<Self> {
        if !self.is_strictly_proper() {
            return Err(Error::ImproperRealization(
                "(s + α)G(s) needs a strictly proper G".into(),
            ));
        }
        Ok(Self {
            a: self.a.clone(),
            b: self.b.clone(),
            c: &self.c * &self.a.add_diag(alpha),
            d: &self.c * &self.b,
        })
    }

    /// `G⁻¹` for square `G` with invertible feedthrough.
    pub fn inverse(&self) -> Result<Self> {
        if self.inputs() != self.outputs() {
            return Err(dims("inverse", "system must be square"));
        }
        let dinv = Lu::new(&self.d)
            .map_err(|_| Error::ImproperRealization("inverse needs an invertible D".into()))?
            .inverse();
        let bd = &self.b * &dinv;
        Ok(Self {
            a: &self.a - &(&bd * &self.c),
            b: bd,
            c: -(&dinv * &self.c),
            d: dinv,
        })
    }
}

/// Cascade realization of `G2 · G1` (input enters `G1`).
pub fn series<T: Real>(g2: &StateSpace<T>, g1: &StateSpace<T>) -> Result<StateSpace<T>> {
    if g2.inputs() != g1.outputs() {
        return Err(dims(
            "series",
            format!("G2 takes {} inputs, G1 gives {} outputs", g2.inputs(), g1.outputs()),
        ));
    }
    let (n1, n2) = (g1.order(), g2.order());
    let a = Matrix::block2(&g1.a, &Matrix::zeros(n1, n2), &(&g2.b * &g1.c), &g2.a);
    let b = Matrix::vstack(&[&g1.b, &(&g2.b * &g1.d)]);
    let c = Matrix::hstack(&[&(&g2.d * &g1.c), &g2.c]);
    let d = &g2.d * &g1.d;
    Ok(StateSpace { a, b, c, d })
}

/// Parallel sum `G1 + G2`.
pub fn parallel<T: Real>(g1: &StateSpace<T>, g2: &StateSpace<T>) -> Result<StateSpace<T>> {
    if g1.inputs() != g2.inputs() || g1.outputs() != g2.outputs() {
        return Err(dims("parallel", "systems must have equal input and output counts"));
    }
    Ok(StateSpace {
        a: Matrix::block_diag(&[&g1.a, &g2.a]),
        b: Matrix::vstack(&[&g1.b, &g2.b]),
        c: Matrix::hstack(&[&g1.c, &g2.c]),
        d: &g1.d + &g2.d,
    })
}

/// `D(s)(I + ωD(s))⁻¹`, i.e. `D` closed in negative feedback with gain `ω`.
pub fn feedback_unity_gain<T: Real>(dsys: &StateSpace<T>, omega: T) -> Result<StateSpace<T>> {
    let m = dsys.inputs();
    if dsys.outputs() != m {
        return Err(dims("feedback_unity_gain", "D(s) must be square"));
    }
    let loop_mat = dsys.d.scale(omega).add_diag(T::one());
    let f = Lu::new(&loop_mat).map_err(|_| Error::AlgebraicLoop)?.inverse();
    let bf = &dsys.b * &f;
    let df = &dsys.d * &f;
    Ok(StateSpace {
        a: &dsys.a - &(&bf * &dsys.c).scale(omega),
        b: bf,
        c: &dsys.c - &(&df * &dsys.c).scale(omega),
        d: df,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lag(a: f64) -> StateSpace<f64> {
        StateSpace::new(
            Matrix::from_rows(&[[-a]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::zeros(1, 1),
        )
        .unwrap()
    }

    #[test]
    fn dimension_check() {
        let bad = StateSpace::new(
            Matrix::<f64>::zeros(2, 2),
            Matrix::zeros(3, 1),
            Matrix::zeros(1, 2),
            Matrix::zeros(1, 1),
        );
        assert!(matches!(bad, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn identity_gain_leaves_system_unchanged() {
        let g = lag(2.0);
        let s = series(&StateSpace::identity(1), &g).unwrap();
        for &w in &[0.1, 1.0, 10.0] {
            assert!(s.freq(w).unwrap().sub(&g.freq(w).unwrap()).max_abs() < 1e-14);
        }
    }

    #[test]
    fn two_lags_in_series() {
        let s = series(&lag(2.0), &lag(1.0)).unwrap();
        assert!((s.dc_gain().unwrap()[(0, 0)] - 0.5).abs() < 1e-14);
        // 1/((jw+1)(jw+2)) at w = 1 equals (1 - 3j)/10
        let r = s.freq(1.0).unwrap();
        assert!((r.re[(0, 0)] - 0.1).abs() < 1e-14);
        assert!((r.im[(0, 0)] + 0.3).abs() < 1e-14);
    }

    #[test]
    fn integrator_loop() {
        let k = 3.0_f64;
        let integ = StateSpace::new(
            Matrix::zeros(1, 1),
            Matrix::from_rows(&[[k]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::zeros(1, 1),
        )
        .unwrap();
        let c0 = feedback_unity_gain(&integ, 1.0).unwrap();
        assert!((c0.dc_gain().unwrap()[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((c0.a[(0, 0)] + k).abs() < 1e-14);
    }

    #[test]
    fn algebraic_loop_detected() {
        let g = StateSpace::gain(Matrix::<f64>::from_rows(&[[-1.0]]));
        assert!(matches!(feedback_unity_gain(&g, 1.0), Err(Error::AlgebraicLoop)));
    }

    #[test]
    fn inverse_roundtrip() {
        let g = StateSpace::<f64>::new(
            Matrix::from_rows(&[[-1.0]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::from_rows(&[[2.0]]),
            Matrix::from_rows(&[[1.0]]),
        )
        .unwrap();
        let prod = series(&g.inverse().unwrap(), &g).unwrap();
        let r = prod.freq(0.7).unwrap();
        assert!((r.re[(0, 0)] - 1.0).abs() < 1e-12 && r.im[(0, 0)].abs() < 1e-12);
    }

    #[test]
    fn shift_derivative_matches_multiplication() {
        let g = series(&lag(2.0), &lag(1.0)).unwrap();
        let alpha = 5.0;
        let h = g.shift_derivative(alpha).unwrap();
        let w = 1.3;
        let lhs = h.freq(w).unwrap().entry(0, 0);
        let rhs = Complex::new(alpha, w) * g.freq(w).unwrap().entry(0, 0);
        assert!((lhs - rhs).norm() < 1e-13);
    }
}
