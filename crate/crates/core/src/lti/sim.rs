use super::system::StateSpace;
use crate::error::{dims, Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Uniformly sampled vector signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTrace<T> {
    pub step: T,
    pub values: Vec<Vec<T>>,
}

impl<T: Real> SignalTrace<T> {
    pub fn new(step: T, values: Vec<Vec<T>>) -> Result<Self> {
        if step <= T::zero() {
            return Err(Error::Config("signal step must be positive".into()));
        }
        if let Some(w) = values.first().map(Vec::len) {
            if values.iter().any(|v| v.len() != w) {
                return Err(dims("signal_trace", "samples must share one width"));
            }
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("signal_trace"));
        }
        Ok(Self { step, values })
    }

    /// Samples `f(t)` at `t = k·step` for `k < len`.
    pub fn from_fn(step: T, len: usize, mut f: impl FnMut(T) -> Vec<T>) -> Result<Self> {
        Self::new(step, (0..len).map(|k| f(step * lit(k as f64))).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn width(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn time(&self, k: usize) -> T {
        self.step * lit(k as f64)
    }
}

/// One classical Runge-Kutta step of `ẋ = f(t, x)`.
pub fn rk4_step<T: Real>(f: &mut impl FnMut(T, &[T], &mut [T]), t: T, x: &mut [T], h: T) {
    let n = x.len();
    let half = h * lit(0.5);
    let mut k1 = vec![T::zero(); n];
    let mut k2 = vec![T::zero(); n];
    let mut k3 = vec![T::zero(); n];
    let mut k4 = vec![T::zero(); n];
    let mut tmp = vec![T::zero(); n];
    f(t, x, &mut k1);
    for i in 0..n {
        tmp[i] = x[i] + half * k1[i];
    }
    f(t + half, &tmp, &mut k2);
    for i in 0..n {
        tmp[i] = x[i] + half * k2[i];
    }
    f(t + half, &tmp, &mut k3);
    for i in 0..n {
        tmp[i] = x[i] + h * k3[i];
    }
    f(t + h, &tmp, &mut k4);
    let sixth = h / lit(6.0);
    for i in 0..n {
        x[i] += sixth * (k1[i] + lit::<T>(2.0) * (k2[i] + k3[i]) + k4[i]);
    }
}

/// Output trace of `G` driven by a zero-order-hold input, by RK4 at the
/// input's sample step. Output sample `k` is taken before step `k`.
pub fn simulate_lti<T: Real>(g: &StateSpace<T>, input: &SignalTrace<T>, x0: &[T]) -> Result<SignalTrace<T>> {
    let n = g.order();
    if x0.len() != n {
        return Err(dims("simulate_lti", format!("x0 has {} entries, system order {}", x0.len(), n)));
    }
    if !input.is_empty() && input.width() != g.inputs() {
        return Err(dims("simulate_lti", "input width must equal system inputs"));
    }
    let h = input.step;
    let mut x = x0.to_vec();
    let mut out = Vec::with_capacity(input.len());
    for (k, u) in input.values.iter().enumerate() {
        let mut y = g.c.mul_vec(&x);
        g.d.mul_vec_acc(u, &mut y);
        out.push(y);
        let mut f = |_t: T, s: &[T], ds: &mut [T]| {
            ds.copy_from_slice(&g.a.mul_vec(s));
            g.b.mul_vec_acc(u, ds);
        };
        rk4_step(&mut f, input.time(k), &mut x, h);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState {
                t: to_f64(input.time(k + 1)),
            });
        }
    }
    Ok(SignalTrace { step: h, values: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlib::Matrix;

    fn lag() -> StateSpace<f64> {
        StateSpace::new(
            Matrix::from_rows(&[[-1.0]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::zeros(1, 1),
        )
        .unwrap()
    }

    #[test]
    fn zero_input_zero_state() {
        let u = SignalTrace::from_fn(1e-3, 100, |_| vec![0.0]).unwrap();
        let y = simulate_lti(&lag(), &u, &[0.0]).unwrap();
        assert!(y.values.iter().all(|v| v[0] == 0.0));
    }

    #[test]
    fn step_response_closed_form() {
        let h = 1e-3;
        let u = SignalTrace::from_fn(h, 3001, |_| vec![1.0]).unwrap();
        let y = simulate_lti(&lag(), &u, &[0.0]).unwrap();
        for (k, v) in y.values.iter().enumerate() {
            let t = k as f64 * h;
            assert!((v[0] - (1.0 - (-t).exp())).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_x0() {
        let u = SignalTrace::from_fn(1e-3, 10, |_| vec![0.0]).unwrap();
        assert!(simulate_lti(&lag(), &u, &[0.0, 1.0]).is_err());
    }
}
