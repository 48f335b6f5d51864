use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::system::StateSpace;
use crate::error::{dims, Error, Result};
use crate::matlib::{complex_embedding, eigenvalues, singular_values, uncontrollable_modes, unobservable_modes, Lu, Matrix};
use crate::scalar::{lit, Real};

const SEEDS: [u64; 2] = [0x5eed_0001, 0x5eed_0002];
const SHIFT: f64 = 0.318_309_886;
const MATCH_TOL: f64 = 1e-5;

/// PBH controllability test.
pub fn is_controllable<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<bool> {
    Ok(uncontrollable_modes(a, b)?.is_empty())
}

/// PBH observability test.
pub fn is_observable<T: Real>(a: &Matrix<T>, c: &Matrix<T>) -> Result<bool> {
    Ok(unobservable_modes(a, c)?.is_empty())
}

/// Smallest singular value of the Rosenbrock matrix `[[A − zI, B], [C, D]]`
/// relative to its largest.
pub fn rosenbrock_rank_gap<T: Real>(g: &StateSpace<T>, z: Complex<T>) -> Result<T> {
    let n = g.order();
    let (p, m) = (g.outputs(), g.inputs());
    let re = Matrix::block2(&g.a.add_diag(-z.re), &g.b, &g.c, &g.d);
    let mut im = Matrix::zeros(n + p, n + m);
    for i in 0..n {
        im[(i, i)] = -z.im;
    }
    let sv = singular_values(&complex_embedding(&re, &im))?;
    let top = sv.first().copied().unwrap_or_else(T::one);
    // 2(n+m) columns; normal rank is 2(n+m), so look at the last one
    let bottom = sv.get(2 * (n + m) - 1).copied().unwrap_or_else(T::zero);
    Ok(if top == T::zero() { T::zero() } else { bottom / top })
}

/// Finite zeros of the square pencil `[[A − sI, B], [WC, WD]]`.
fn squared_down_zeros<T: Real>(g: &StateSpace<T>, w: &Matrix<T>) -> Result<Vec<Complex<T>>> {
    let n = g.order();
    let m = g.inputs();
    let mmat = Matrix::block2(&g.a, &g.b, &(w * &g.c), &(w * &g.d));
    let mut e = Matrix::zeros(n + m, n + m);
    for i in 0..n {
        e[(i, i)] = T::one();
    }
    let sigma = lit::<T>(SHIFT);
    let shifted = &mmat - &e.scale(sigma);
    let lu = Lu::new(&shifted).map_err(|_| Error::RankAmbiguous)?;
    let k = lu.solve(&e);
    let mut out = Vec::new();
    // infinite zeros show up as μ ≈ 0 (perturbed nilpotent blocks give
    // |μ| ~ ε^{1/k}); finite zeros of a sane model are far below this cap
    let cap = lit::<T>(1e3) * (T::one() + mmat.norm_inf());
    for mu in eigenvalues(&k)? {
        if mu.norm() * cap > T::one() {
            out.push(Complex::new(sigma, T::zero()) + Complex::new(T::one(), T::zero()) / mu);
        }
    }
    Ok(out)
}

/// Transmission zeros of a minimal system with at least as many outputs as
/// inputs.
///
/// Candidates come from two random squaring-down combinations `W` (seeded,
/// so results are deterministic); a candidate is kept when the full
/// Rosenbrock matrix drops rank there, and both draws must agree.
pub fn transmission_zeros<T: Real>(g: &StateSpace<T>) -> Result<Vec<Complex<T>>> {
    let (p, m) = (g.outputs(), g.inputs());
    if p < m {
        return Err(dims("transmission_zeros", "needs at least as many outputs as inputs"));
    }
    let controllable = is_controllable(&g.a, &g.b)?;
    let observable = is_observable(&g.a, &g.c)?;
    if !(controllable && observable) {
        return Err(Error::NotMinimal {
            controllable,
            observable,
        });
    }
    let gap_tol = lit::<T>(1e-7);
    let mut draws: Vec<Vec<Complex<T>>> = Vec::new();
    for seed in SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = if p == m {
            Matrix::identity(m)
        } else {
            Matrix::from_fn(m, p, |_, _| lit(rng.gen_range(-1.0..1.0)))
        };
        let mut confirmed = Vec::new();
        for z in squared_down_zeros(g, &w)? {
            if rosenbrock_rank_gap(g, z)? < gap_tol {
                confirmed.push(z);
            }
        }
        draws.push(confirmed);
    }
    let (first, second) = (&draws[0], &draws[1]);
    let matches = |a: &[Complex<T>], b: &[Complex<T>]| {
        a.len() == b.len()
            && a.iter().all(|z| {
                b.iter()
                    .any(|y| (*z - *y).norm() <= lit::<T>(MATCH_TOL) * (T::one() + z.norm()))
            })
    };
    if !matches(first, second) {
        return Err(Error::RankAmbiguous);
    }
    let mut zs = first.clone();
    zs.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    Ok(zs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::tf::{Poly, TransferFunction};

    #[test]
    fn siso_numerator_root() {
        let g = TransferFunction::new(Poly::linear(2.0_f64), Poly::linear(1.0).mul(&Poly::linear(3.0)))
            .unwrap()
            .to_state_space()
            .unwrap();
        let z = transmission_zeros(&g).unwrap();
        assert_eq!(z.len(), 1);
        assert!((z[0].re + 2.0).abs() < 1e-6 && z[0].im.abs() < 1e-6);
    }

    #[test]
    fn no_finite_zeros() {
        // 1/((s+1)(s+2)) in companion form: numerator is constant
        let g = StateSpace::new(
            Matrix::from_rows(&[[0.0, 1.0], [-2.0, -3.0]]),
            Matrix::from_rows(&[[0.0], [1.0]]),
            Matrix::from_rows(&[[1.0, 0.0]]),
            Matrix::zeros(1, 1),
        )
        .unwrap();
        assert!(transmission_zeros(&g).unwrap().is_empty());
    }

    #[test]
    fn non_minimal_rejected() {
        let g = StateSpace::new(
            Matrix::<f64>::from_diag(&[-1.0, -2.0]),
            Matrix::from_rows(&[[1.0], [0.0]]),
            Matrix::from_rows(&[[1.0, 1.0]]),
            Matrix::zeros(1, 1),
        )
        .unwrap();
        assert!(matches!(transmission_zeros(&g), Err(Error::NotMinimal { .. })));
    }

    #[test]
    fn pbh_basic() {
        let a = Matrix::<f64>::from_rows(&[[0.0, 1.0], [-2.0, -3.0]]);
        assert!(is_controllable(&a, &Matrix::from_rows(&[[0.0], [1.0]])).unwrap());
        assert!(!is_controllable(&a, &Matrix::zeros(2, 1)).unwrap());
        assert!(is_observable(&a, &Matrix::from_rows(&[[1.0, 0.0]])).unwrap());
    }
}
