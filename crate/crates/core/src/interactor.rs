//! Right interactors: realization of `Z(s)`, the coupling matrices
//! `(T_z, B̄)` and the cascade form of the plant they induce.

use num_complex::Complex;

use crate::error::{dims, Error, Result};
use crate::lti::{simulate_lti, FreqResponse, SignalTrace, StateSpace, TransferFunction, Poly};
use crate::matlib::{complex_embedding, eigenvalues, inverse, rank, singular_values, Matrix, Qr};
use crate::scalar::{lit, to_f64, Real, Tolerances};

const IDENTITY_TOL: f64 = 1e-8;

/// Linear part `(A_m, B_m, C_m)` of the plant.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel<T> {
    pub am: Matrix<T>,
    pub bm: Matrix<T>,
    pub cm: Matrix<T>,
}

impl<T: Real> PlantModel<T> {
    pub fn new(am: Matrix<T>, bm: Matrix<T>, cm: Matrix<T>) -> Result<Self> {
        let n = am.rows();
        if !am.is_square() || bm.rows() != n || cm.cols() != n {
            return Err(dims("plant", "A_m n×n, B_m n×m, C_m p×n expected"));
        }
        if cm.rows() < bm.cols() {
            return Err(dims("plant", "needs at least as many outputs as inputs"));
        }
        Ok(Self { am, bm, cm })
    }

    pub fn n(&self) -> usize {
        self.am.rows()
    }

    pub fn m(&self) -> usize {
        self.bm.cols()
    }

    pub fn p(&self) -> usize {
        self.cm.rows()
    }

    /// `M(s) = C_m (sI − A_m)⁻¹ B_m`.
    pub fn transfer(&self) -> StateSpace<T> {
        StateSpace {
            a: self.am.clone(),
            b: self.bm.clone(),
            c: self.cm.clone(),
            d: Matrix::zeros(self.p(), self.m()),
        }
    }
}

/// A candidate interactor `Z(s)` before coupling. `scalar` is set when
/// `Z = z(s)·I_m`, which lets filters containing `Z⁻¹` be formed exactly
/// in rational arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractorSpec<T> {
    pub z: StateSpace<T>,
    pub scalar: Option<TransferFunction<T>>,
}

impl<T: Real> InteractorSpec<T> {
    /// User-supplied `(A_z, B_z, C_z, D_z)`.
    pub fn explicit(z: StateSpace<T>) -> Self {
        Self { z, scalar: None }
    }

    pub fn from_scalar(tf: TransferFunction<T>, m: usize) -> Result<Self> {
        let z = tf.to_state_space()?.diag_copies(m);
        Ok(Self { z, scalar: Some(tf) })
    }
}

/// `Z(s) = dc_gain · Π aᵢ/(s + aᵢ)` on each of `m` channels, with poles
/// `−aᵢ`. No poles gives the static interactor `dc_gain·I_m`.
pub fn build_scalar_interactor<T: Real>(poles: &[T], dc_gain: T, m: usize) -> Result<InteractorSpec<T>> {
    if dc_gain == T::zero() {
        return Err(Error::Config("interactor dc gain must be nonzero".into()));
    }
    let mut num = dc_gain;
    let mut den = Poly::constant(T::one());
    for &p in poles {
        if p >= T::zero() {
            return Err(Error::UnstablePoleRequested { pole: to_f64(p) });
        }
        num *= -p;
        den = den.mul(&Poly::linear(-p));
    }
    InteractorSpec::from_scalar(TransferFunction::new(Poly::constant(num), den)?, m)
}

/// Verified interactor with its coupling matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractorRealization<T> {
    pub az: Matrix<T>,
    pub bz: Matrix<T>,
    pub cz: Matrix<T>,
    pub dz: Matrix<T>,
    pub tz: Matrix<T>,
    pub bbar: Matrix<T>,
    pub scalar: Option<TransferFunction<T>>,
}

impl<T: Real> InteractorRealization<T> {
    pub fn nz(&self) -> usize {
        self.az.rows()
    }

    pub fn z_system(&self) -> StateSpace<T> {
        StateSpace {
            a: self.az.clone(),
            b: self.bz.clone(),
            c: self.cz.clone(),
            d: self.dz.clone(),
        }
    }

    /// `T(s) = T_z (sI − A_z)⁻¹ B_z`.
    pub fn t_system(&self) -> StateSpace<T> {
        StateSpace {
            a: self.az.clone(),
            b: self.bz.clone(),
            c: self.tz.clone(),
            d: Matrix::zeros(self.tz.rows(), self.bz.cols()),
        }
    }

    /// `D̄ = C_m B̄`.
    pub fn dbar(&self, plant: &PlantModel<T>) -> Matrix<T> {
        &plant.cm * &self.bbar
    }
}

/// Residuals of the coupling identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingResiduals {
    /// `‖A_m T_z − T_z A_z − B̄ C_z‖`
    pub sylvester: f64,
    /// `‖B_m − T_z B_z − B̄ D_z‖`
    pub input: f64,
    /// `‖C_m A_m T_z − C_m B̄ C_z‖`
    pub output_dynamics: f64,
    /// `‖C_m B_m − C_m B̄ D_z‖`
    pub output_input: f64,
    /// `‖C_m T_z‖`
    pub output_null: f64,
}

impl CouplingResiduals {
    pub fn max(&self) -> f64 {
        [self.sylvester, self.input, self.output_dynamics, self.output_input, self.output_null]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

pub fn coupling_residuals<T: Real>(plant: &PlantModel<T>, r: &InteractorRealization<T>) -> CouplingResiduals {
    let n = |m: Matrix<T>| to_f64(m.norm_inf());
    let cm = &plant.cm;
    CouplingResiduals {
        sylvester: n(&(&(&plant.am * &r.tz) - &(&r.tz * &r.az)) - &(&r.bbar * &r.cz)),
        input: n(&(&plant.bm - &(&r.tz * &r.bz)) - &(&r.bbar * &r.dz)),
        output_dynamics: n(&(&(cm * &plant.am) * &r.tz) - &(&(cm * &r.bbar) * &r.cz)),
        output_input: n(&(cm * &plant.bm) - &(&(cm * &r.bbar) * &r.dz)),
        output_null: n(cm * &r.tz),
    }
}

/// Smallest singular value (relative) of `[[A_z − sI, B_z], [C_z, D_z]]`
/// over sample points; zero means the pencil condition fails somewhere.
fn pencil_margin<T: Real>(z: &StateSpace<T>) -> Result<T> {
    let nz = z.order();
    let m = z.inputs();
    let mut worst = T::infinity();
    // far beyond the spectrum the smallest singular value decays like
    // 1/|s|², so the sweep stays within a few decades of ‖A_z‖; the input
    // and output blocks are normalized so their scale does not matter
    let scale = T::one() + z.a.norm_inf();
    let unit = |v: T| if v > T::zero() { T::one() / v } else { T::one() };
    let bd = Matrix::vstack(&[&z.b, &z.d]);
    let cd = Matrix::hstack(&[&z.c, &z.d]);
    let (kb, kc) = (unit(bd.max_abs()), unit(cd.max_abs()));
    let points: Vec<Complex<T>> = (0..20)
        .map(|k| {
            let mag = scale * lit::<T>(10.0).powf(lit::<T>(-2.0 + 3.0 * k as f64 / 19.0));
            let ang = lit::<T>(0.3 + 2.7 * k as f64 / 19.0);
            Complex::new(mag * ang.cos(), mag * ang.sin())
        })
        .collect();
    for s in points {
        let re = Matrix::block2(&z.a.add_diag(-s.re), &z.b.scale(kb), &z.c.scale(kc), &z.d.scale(kb * kc));
        let mut im = Matrix::zeros(nz + m, nz + m);
        for i in 0..nz {
            im[(i, i)] = -s.im;
        }
        let sv = singular_values(&complex_embedding(&re, &im))?;
        let top = sv[0];
        let bottom = *sv.last().unwrap();
        worst = worst.min(if top > T::zero() { bottom / top } else { T::zero() });
    }
    Ok(worst)
}

/// Solves `A_m T_z − T_z A_z − B̄ C_z = 0`, `T_z B_z + B̄ D_z = B_m` (with
/// `C_m T_z = 0` appended) by least squares, then checks every identity,
/// the rank of `T_z` and `C_m B̄`, and the pencil condition on `Z`.
pub fn solve_coupling<T: Real>(plant: &PlantModel<T>, spec: &InteractorSpec<T>) -> Result<InteractorRealization<T>> {
    let z = &spec.z;
    let (n, m, p) = (plant.n(), plant.m(), plant.p());
    let nz = z.order();
    if z.inputs() != m || z.outputs() != m {
        return Err(dims("solve_coupling", "Z(s) must be m×m"));
    }
    let tol = Tolerances::<T>::standard();
    if nz > 0 {
        z.require_stable()?;
        let eig_z = eigenvalues(&z.a)?;
        if eig_z.iter().any(|l| l.norm() <= tol.rank * (T::one() + z.a.norm_inf())) {
            return Err(Error::SingularCoupling("A_z is singular".into()));
        }
        let eig_m = eigenvalues(&plant.am)?;
        let scale = T::one() + plant.am.norm_inf();
        for a in &eig_z {
            if eig_m.iter().any(|b| (*a - *b).norm() <= lit::<T>(1e-6) * scale) {
                return Err(Error::SingularCoupling(format!(
                    "eig(A_z) and eig(A_m) share {:.6}{:+.6}i",
                    to_f64(a.re),
                    to_f64(a.im)
                )));
            }
        }
    }

    // unknowns: [vec(T_z); vec(B̄)], column-major
    let (ut, ub) = (n * nz, n * m);
    let rows = n * nz + n * m + p * nz;
    let mut big = Matrix::zeros(rows, ut + ub);
    let mut rhs = Matrix::zeros(rows, 1);
    let eye_n = Matrix::identity(n);
    let eye_z = Matrix::identity(nz);
    // (I ⊗ A_m − A_zᵀ ⊗ I) vec(T_z) − (C_zᵀ ⊗ I) vec(B̄) = 0
    big.set_block(0, 0, &(&eye_z.kron(&plant.am) - &z.a.transpose().kron(&eye_n)));
    big.set_block(0, ut, &-(z.c.transpose().kron(&eye_n)));
    // (B_zᵀ ⊗ I) vec(T_z) + (D_zᵀ ⊗ I) vec(B̄) = vec(B_m)
    big.set_block(ut, 0, &z.b.transpose().kron(&eye_n));
    big.set_block(ut, ut, &z.d.transpose().kron(&eye_n));
    for (i, v) in plant.bm.vec_cols().into_iter().enumerate() {
        rhs[(ut + i, 0)] = v;
    }
    // (I ⊗ C_m) vec(T_z) = 0
    big.set_block(ut + ub, 0, &eye_z.kron(&plant.cm));

    let square = big.submatrix(0, 0, ut + ub, ut + ub);
    let r = rank(&square, tol.rank)?;
    if r < ut + ub {
        return Err(Error::SingularCoupling(format!(
            "coupling system has rank {} of {}",
            r,
            ut + ub
        )));
    }
    let sol = Qr::new(&big)?.solve_least_squares(&rhs, tol.rank)?;
    let v = sol.col_vec(0);
    let tz = Matrix::from_vec_cols(n, nz, &v[..ut]);
    let bbar = Matrix::from_vec_cols(n, m, &v[ut..]);
    let real = InteractorRealization {
        az: z.a.clone(),
        bz: z.b.clone(),
        cz: z.c.clone(),
        dz: z.d.clone(),
        tz,
        bbar,
        scalar: spec.scalar.clone(),
    };
    verify_interactor(plant, &real)?;
    Ok(real)
}

/// Post-checks shared by [`solve_coupling`] and externally supplied
/// realizations.
pub fn verify_interactor<T: Real>(plant: &PlantModel<T>, r: &InteractorRealization<T>) -> Result<()> {
    let res = coupling_residuals(plant, r);
    if res.max() > IDENTITY_TOL {
        return Err(Error::InteractorMismatch { residual: res.max() });
    }
    let tol = Tolerances::<T>::standard();
    let m = plant.m();
    let dbar_rank = rank(&r.dbar(plant), tol.rank)?;
    if dbar_rank < m {
        return Err(Error::RankDeficient {
            rank: dbar_rank,
            expected: m,
        });
    }
    if r.nz() > 0 {
        let tz_rank = rank(&r.tz, tol.rank)?;
        if tz_rank < r.nz() {
            return Err(Error::RankDeficient {
                rank: tz_rank,
                expected: r.nz(),
            });
        }
    }
    if pencil_margin(&r.z_system())? < tol.rank {
        return Err(Error::InteractorMismatch { residual: f64::INFINITY });
    }
    Ok(())
}

/// Rank of `C_m B_m` and the first Markov parameter that is nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InteractorNeed {
    pub rank_cb: usize,
    pub needs_interactor: bool,
    /// Smallest `k` with `C_m A_m^k B_m ≠ 0` (diagnostic only).
    pub first_nonzero_markov: Option<usize>,
}

pub fn check_interactor_need<T: Real>(plant: &PlantModel<T>) -> Result<InteractorNeed> {
    let tol = Tolerances::<T>::standard();
    let cb = &plant.cm * &plant.bm;
    let scale = plant.cm.norm_inf() * plant.bm.norm_inf();
    let rank_cb = if cb.max_abs() <= tol.rank * scale { 0 } else { rank(&cb, tol.rank)? };
    let mut first = None;
    let mut ak_b = plant.bm.clone();
    let mut a_pow_norm = T::one();
    for k in 0..plant.n() {
        let markov = &plant.cm * &ak_b;
        if markov.max_abs() > tol.rank * scale * a_pow_norm {
            first = Some(k);
            break;
        }
        ak_b = &plant.am * &ak_b;
        a_pow_norm *= plant.am.norm_inf();
    }
    Ok(InteractorNeed {
        rank_cb,
        needs_interactor: rank_cb < plant.m(),
        first_nonzero_markov: first,
    })
}

/// Sampled traces of the cascade `ẋ_z = A_z x_z + B_z u`, `u_v = C_z x_z +
/// D_z u`, `ẋ_v = A_m x_v + B̄ u_v`, `y_v = C_m x_v`.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeTraces<T> {
    pub xz: SignalTrace<T>,
    pub xv: SignalTrace<T>,
    pub yv: SignalTrace<T>,
}

impl<T: Real> CascadeTraces<T> {
    /// `x_v + T_z x_z` at every sample.
    pub fn reconstruct(&self, r: &InteractorRealization<T>) -> Vec<Vec<T>> {
        self.xv
            .values
            .iter()
            .zip(&self.xz.values)
            .map(|(xv, xz)| {
                let mut x = xv.clone();
                r.tz.mul_vec_acc(xz, &mut x);
                x
            })
            .collect()
    }
}

/// Simulates the cascade with `x_v(0) = x0`, `x_z(0) = 0`.
pub fn cascade_decompose<T: Real>(
    plant: &PlantModel<T>,
    r: &InteractorRealization<T>,
    input: &SignalTrace<T>,
    x0: &[T],
) -> Result<CascadeTraces<T>> {
    let (n, nz) = (plant.n(), r.nz());
    let a = Matrix::block2(&r.az, &Matrix::zeros(nz, n), &(&r.bbar * &r.cz), &plant.am);
    let b = Matrix::vstack(&[&r.bz, &(&r.bbar * &r.dz)]);
    let sys = StateSpace::new(a, b, Matrix::identity(nz + n), Matrix::zeros(nz + n, plant.m()))?;
    let mut init = vec![T::zero(); nz];
    init.extend_from_slice(x0);
    let states = simulate_lti(&sys, input, &init)?;
    let split = |lo: usize, hi: usize| SignalTrace {
        step: input.step,
        values: states.values.iter().map(|s| s[lo..hi].to_vec()).collect(),
    };
    let xz = split(0, nz);
    let xv = split(nz, nz + n);
    let yv = SignalTrace {
        step: input.step,
        values: xv.values.iter().map(|x| plant.cm.mul_vec(x)).collect(),
    };
    Ok(CascadeTraces { xz, xv, yv })
}

/// Complex product of two frequency responses.
fn cmul<T: Real>(a: &FreqResponse<T>, b: &FreqResponse<T>) -> FreqResponse<T> {
    FreqResponse {
        re: &(&a.re * &b.re) - &(&a.im * &b.im),
        im: &(&a.re * &b.im) + &(&a.im * &b.re),
    }
}

/// Complex inverse through the real embedding.
fn cinv<T: Real>(a: &FreqResponse<T>) -> Result<FreqResponse<T>> {
    let m = a.re.rows();
    let inv = inverse(&complex_embedding(&a.re, &a.im))?;
    Ok(FreqResponse {
        re: inv.submatrix(0, 0, m, m),
        im: inv.submatrix(m, 0, m, m),
    })
}

/// `‖M(s) Z⁻¹(s) − C_m (sI − A_m)⁻¹ B̄‖` (largest entry modulus) at `s`.
pub fn transfer_mismatch<T: Real>(plant: &PlantModel<T>, r: &InteractorRealization<T>, s: Complex<T>) -> Result<T> {
    let mz = cmul(&plant.transfer().eval(s)?, &cinv(&r.z_system().eval(s)?)?);
    let mbar = StateSpace {
        a: plant.am.clone(),
        b: r.bbar.clone(),
        c: plant.cm.clone(),
        d: Matrix::zeros(plant.p(), plant.m()),
    };
    Ok(mz.sub(&mbar.eval(s)?).max_abs())
}

/// `s M(s) Z⁻¹(s)` at a real-axis or imaginary-axis point, for the
/// high-frequency check against `C_m B̄`.
pub fn scaled_transfer<T: Real>(plant: &PlantModel<T>, r: &InteractorRealization<T>, s: Complex<T>) -> Result<FreqResponse<T>> {
    let mz = cmul(&plant.transfer().eval(s)?, &cinv(&r.z_system().eval(s)?)?);
    let p = plant.p();
    let sm = FreqResponse {
        re: Matrix::identity(p).scale(s.re),
        im: Matrix::identity(p).scale(s.im),
    };
    Ok(cmul(&sm, &mz))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> PlantModel<f64> {
        PlantModel::new(
            Matrix::from_rows(&[[0.0, 1.0], [-2.0, -3.0]]),
            Matrix::from_rows(&[[0.0], [1.0]]),
            Matrix::from_rows(&[[1.0, 0.0]]),
        )
        .unwrap()
    }

    fn toy_z() -> InteractorSpec<f64> {
        InteractorSpec::explicit(
            StateSpace::new(
                Matrix::from_rows(&[[-4.0]]),
                Matrix::from_rows(&[[4.0]]),
                Matrix::from_rows(&[[1.0]]),
                Matrix::zeros(1, 1),
            )
            .unwrap(),
        )
    }

    #[test]
    fn toy_coupling_matches_hand_solution() {
        // Hand solve: T_z = [t1; t2], B̄ = [b1; b2].
        // T_z B_z = B_m        -> 4 t1 = 0, 4 t2 = 1
        // A_m T_z + 4 T_z = B̄ -> b1 = t2 + 4 t1, b2 = -2 t1 - 3 t2 + 4 t2
        let t = [0.0, 0.25];
        let b = [t[1] + 4.0 * t[0], -2.0 * t[0] + t[1]];
        let r = solve_coupling(&toy(), &toy_z()).unwrap();
        assert!((r.tz[(0, 0)] - t[0]).abs() < 1e-12 && (r.tz[(1, 0)] - t[1]).abs() < 1e-12);
        assert!((r.bbar[(0, 0)] - b[0]).abs() < 1e-12 && (r.bbar[(1, 0)] - b[1]).abs() < 1e-12);
        let cam_tz = &(&toy().cm * &toy().am) * &r.tz;
        assert!((cam_tz[(0, 0)] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn identity_interactor_degenerate_case() {
        let plant = PlantModel::new(
            Matrix::<f64>::from_rows(&[[-1.0, 0.0], [0.0, -2.0]]),
            Matrix::from_rows(&[[1.0], [1.0]]),
            Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]),
        )
        .unwrap();
        let spec = build_scalar_interactor(&[], 1.0, 1).unwrap();
        let r = solve_coupling(&plant, &spec).unwrap();
        assert_eq!(r.nz(), 0);
        assert!((&r.bbar - &plant.bm).max_abs() < 1e-12);
    }

    #[test]
    fn wrong_interactor_rejected() {
        // Z = 1 on a plant with C_m B_m = 0 leaves C_m B̄ = 0
        let spec = build_scalar_interactor(&[], 1.0, 1).unwrap();
        assert!(solve_coupling(&toy(), &spec).is_err());
    }

    #[test]
    fn eigenvalue_overlap_rejected() {
        let spec = build_scalar_interactor(&[-1.0], 1.0, 1).unwrap();
        assert!(matches!(solve_coupling(&toy(), &spec), Err(Error::SingularCoupling(_))));
    }

    #[test]
    fn scalar_builder_realizations() {
        let z = build_scalar_interactor(&[-4.0_f64], 1.0, 1).unwrap();
        assert_eq!((z.z.a[(0, 0)], z.z.b[(0, 0)] * z.z.c[(0, 0)], z.z.d[(0, 0)]), (-4.0, 4.0, 0.0));
        let z = build_scalar_interactor(&[-30.0_f64], 0.47 / 30.0, 1).unwrap();
        assert!((z.z.b[(0, 0)] * z.z.c[(0, 0)] - 0.47).abs() < 1e-14);
        assert!(matches!(build_scalar_interactor(&[1.0_f64], 1.0, 1), Err(Error::UnstablePoleRequested { .. })));
    }

    #[test]
    fn need_check() {
        let n = check_interactor_need(&toy()).unwrap();
        assert!(n.needs_interactor);
        assert_eq!(n.first_nonzero_markov, Some(1));
        let full = PlantModel::new(
            Matrix::<f64>::from_diag(&[-1.0, -2.0]),
            Matrix::from_rows(&[[1.0], [0.5]]),
            Matrix::identity(2),
        )
        .unwrap();
        assert!(!check_interactor_need(&full).unwrap().needs_interactor);
    }

    #[test]
    fn toy_cascade_step() {
        let plant = toy();
        let r = solve_coupling(&plant, &toy_z()).unwrap();
        let u = SignalTrace::from_fn(1e-3, 5000, |_| vec![1.0]).unwrap();
        let c = cascade_decompose(&plant, &r, &u, &[0.0, 0.0]).unwrap();
        let direct = simulate_lti(&plant.transfer(), &u, &[0.0, 0.0]).unwrap();
        for (a, b) in c.yv.values.iter().zip(&direct.values) {
            assert!((a[0] - b[0]).abs() < 1e-6);
        }
    }

    #[test]
    fn toy_transfer_identity() {
        let plant = toy();
        let r = solve_coupling(&plant, &toy_z()).unwrap();
        for k in 0..20 {
            let w = 10f64.powf(-2.0 + 4.0 * k as f64 / 19.0);
            assert!(transfer_mismatch(&plant, &r, Complex::new(0.0, w)).unwrap() < 1e-9);
        }
    }
}
