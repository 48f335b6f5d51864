use super::system::StateSpace;
use crate::error::{Error, Result};
use crate::matlib::{eigenvalues, expm, Matrix};
use crate::scalar::{lit, Real};

const TAIL_TOL: f64 = 1e-6;
const MAX_STEPS: usize = 5_000_000;

/// Induced L∞→L∞ norm: largest row sum of `∫₀^∞ |g_ij(t)| dt` plus the
/// row sums of `|D|`.
///
/// The impulse response `C e^{At} B` is stepped with an exact transition
/// matrix and integrated by the trapezoid rule. Integration stops once
/// `‖C‖ ‖X(t)‖ κ'/λ'` bounds the remaining area by `1e-6` (relative to the
/// accumulated value when that exceeds one), where `λ'` is half the decay
/// rate of `A` and `κ' = sup ‖e^{Aτ}‖e^{λ'τ}` is sampled.
pub fn l1_norm<T: Real>(g: &StateSpace<T>) -> Result<T> {
    let (p, m) = (g.outputs(), g.inputs());
    let mut rows = vec![T::zero(); p];
    for (i, acc) in rows.iter_mut().enumerate() {
        *acc = g.d.row_slice(i).iter().map(|v| v.abs()).sum();
    }
    let n = g.order();
    if n == 0 || p == 0 || m == 0 {
        return Ok(rows.into_iter().fold(T::zero(), T::max));
    }
    g.require_stable()?;

    let eig = eigenvalues(&g.a)?;
    let abscissa = eig.iter().fold(T::neg_infinity(), |acc, l| acc.max(l.re));
    let fastest = eig.iter().fold(T::zero(), |acc, l| acc.max(l.norm()));
    let h = lit::<T>(1e-3).min(lit::<T>(0.05) / fastest);
    let decay = -abscissa / lit(2.0);

    // κ' by sampling out to where e^{-decay τ} has long since vanished
    let horizon = lit::<T>(40.0) / decay;
    let samples = 2000usize;
    let dt = horizon / lit(samples as f64);
    let step = expm(&g.a, dt);
    let mut phi = Matrix::identity(n);
    let mut kappa = T::one();
    for k in 1..=samples {
        phi = &phi * &step;
        let v = phi.norm_inf() * (decay * dt * lit(k as f64)).exp();
        kappa = kappa.max(v);
    }
    let c_norm = g.c.norm_inf();

    let stepper = expm(&g.a, h);
    let mut x = g.b.clone();
    let row_abs = |x: &Matrix<T>, out: &mut [T]| {
        let cx = &g.c * x;
        for (i, o) in out.iter_mut().enumerate() {
            *o = cx.row_slice(i).iter().map(|v| v.abs()).sum();
        }
    };
    let mut prev = vec![T::zero(); p];
    let mut cur = vec![T::zero(); p];
    let mut area = vec![T::zero(); p];
    row_abs(&x, &mut prev);
    let half = lit::<T>(0.5) * h;
    for _ in 0..MAX_STEPS {
        x = &stepper * &x;
        row_abs(&x, &mut cur);
        for i in 0..p {
            area[i] += half * (prev[i] + cur[i]);
        }
        std::mem::swap(&mut prev, &mut cur);
        let tail = c_norm * x.norm_inf() * kappa / decay;
        let scale = area.iter().copied().fold(T::one(), T::max);
        if tail < lit::<T>(TAIL_TOL) * scale {
            return Ok(rows
                .iter()
                .zip(&area)
                .map(|(&d, &a)| d + a)
                .fold(T::zero(), T::max));
        }
    }
    Err(Error::NoDecay {
        horizon: crate::scalar::to_f64(h) * MAX_STEPS as f64,
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
    fn static_gain() {
        let g = StateSpace::gain(Matrix::<f64>::from_rows(&[[-2.5]]));
        assert_eq!(l1_norm(&g).unwrap(), 2.5);
    }

    #[test]
    fn first_order_lag() {
        for &a in &[0.5, 1.0, 5.0] {
            let v = l1_norm(&lag(a)).unwrap();
            assert!(((v - 1.0 / a) * a).abs() < 1e-4, "a = {a}: {v}");
        }
    }

    #[test]
    fn unstable_rejected() {
        assert!(matches!(l1_norm(&lag(-1.0)), Err(Error::Unstable { .. })));
    }
}
