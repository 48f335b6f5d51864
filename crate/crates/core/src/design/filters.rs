//! Filter realizations: `C_0`, `C`, `C_0 Z⁻¹`, `C_1`, `C_2`, and the
//! composites `H_0`, `H_r`, `H_1`, `H_2`, `G` for one value of ω.

use crate::error::{Error, Result};
use crate::interactor::{InteractorRealization, PlantModel};
use crate::lti::{feedback_unity_gain, l1_norm, parallel, series, Poly, StateSpace, TransferFunction};
use crate::matlib::Matrix;
use crate::scalar::Real;

/// `D(s) = gain / (s^integrators · Π (1 − s/pᵢ))`, applied on every channel.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec<T> {
    pub gain: T,
    pub poles: Vec<T>,
    pub integrators: usize,
}

impl<T: Real> FilterSpec<T> {
    pub fn tf(&self) -> Result<TransferFunction<T>> {
        TransferFunction::lowpass(self.gain, &self.poles, self.integrators)
    }

    /// `D(s)·I_m`.
    pub fn system(&self, m: usize) -> Result<StateSpace<T>> {
        Ok(self.tf()?.to_state_space()?.diag_copies(m))
    }
}

/// `C_0(s) = D(s)(I + ωD(s))⁻¹`.
pub fn c0_system<T: Real>(filter: &FilterSpec<T>, omega: T, m: usize) -> Result<StateSpace<T>> {
    feedback_unity_gain(&filter.system(m)?, omega)
}

/// `(s + shift)^k · C_0(s) Z⁻¹(s)` with `k ∈ {0, 1}` encoded as
/// `shift: Option<T>`. Uses rational arithmetic for scalar interactors and
/// the inverse realization of `Z` otherwise.
fn c0_zinv<T: Real>(
    filter: &FilterSpec<T>,
    omega: T,
    z: &InteractorRealization<T>,
    m: usize,
    shift: Option<T>,
) -> Result<StateSpace<T>> {
    if let Some(ztf) = &z.scalar {
        let mut tf = filter.tf()?.feedback(omega)?.mul(&ztf.reciprocal()?);
        if tf.relative_degree() < 1 {
            return Err(Error::ImproperRealization("C_0(s)Z⁻¹(s) is not strictly proper".into()));
        }
        if let Some(a) = shift {
            tf = tf.mul(&TransferFunction::new(Poly::linear(a), Poly::constant(T::one()))?);
        }
        return Ok(tf.to_state_space()?.diag_copies(m));
    }
    let zinv = z.z_system().inverse()?;
    let g = series(&c0_system(filter, omega, m)?, &zinv)?;
    if !g.is_strictly_proper() {
        return Err(Error::ImproperRealization("C_0(s)Z⁻¹(s) is not strictly proper".into()));
    }
    match shift {
        Some(a) => g.shift_derivative(a),
        None => Ok(g),
    }
}

/// `D(s) Z⁻¹(s)` for the control law; must be strictly proper.
pub fn control_filter<T: Real>(filter: &FilterSpec<T>, z: &InteractorRealization<T>, m: usize) -> Result<StateSpace<T>> {
    let g = if let Some(ztf) = &z.scalar {
        let tf = filter.tf()?.mul(&ztf.reciprocal()?);
        if tf.relative_degree() < 1 {
            return Err(Error::ImproperRealization("D(s)Z⁻¹(s) is not strictly proper".into()));
        }
        tf.to_state_space()?.diag_copies(m)
    } else {
        series(&filter.system(m)?, &z.z_system().inverse()?)?
    };
    if !g.is_strictly_proper() {
        return Err(Error::ImproperRealization("D(s)Z⁻¹(s) is not strictly proper".into()));
    }
    Ok(g)
}

/// `H_0(s) = (sI − A_m)⁻¹ B_m`.
pub fn h0_system<T: Real>(plant: &PlantModel<T>) -> StateSpace<T> {
    StateSpace {
        a: plant.am.clone(),
        b: plant.bm.clone(),
        c: Matrix::identity(plant.n()),
        d: Matrix::zeros(plant.n(), plant.m()),
    }
}

/// All ω-dependent filters with their induced L1 norms.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaFilters<T> {
    pub omega: T,
    pub c0: StateSpace<T>,
    pub c: StateSpace<T>,
    pub c0_zinv: StateSpace<T>,
    pub c1: StateSpace<T>,
    pub c2: StateSpace<T>,
    pub g: StateSpace<T>,
    pub hr: StateSpace<T>,
    pub h1: StateSpace<T>,
    pub h2: StateSpace<T>,
    pub norms: FilterNorms<T>,
}

/// Induced L1 norms of the filters at one ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterNorms<T> {
    pub g: T,
    pub hr: T,
    pub h1: T,
    pub h2: T,
    pub c0: T,
    pub c0_kg: T,
    pub c1: T,
    pub c2: T,
}

impl<T: Real> FilterNorms<T> {
    /// Entrywise maximum.
    pub fn max(&self, o: &Self) -> Self {
        Self {
            g: self.g.max(o.g),
            hr: self.hr.max(o.hr),
            h1: self.h1.max(o.h1),
            h2: self.h2.max(o.h2),
            c0: self.c0.max(o.c0),
            c0_kg: self.c0_kg.max(o.c0_kg),
            c1: self.c1.max(o.c1),
            c2: self.c2.max(o.c2),
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn omega_filters<T: Real>(
    plant: &PlantModel<T>,
    z: &InteractorRealization<T>,
    filter: &FilterSpec<T>,
    omega: T,
    alpha: T,
    kg: &Matrix<T>,
    cmb_pinv: &Matrix<T>,
) -> Result<OmegaFilters<T>> {
    let m = plant.m();
    let c0 = c0_system(filter, omega, m)?;
    let c = c0.scale(omega);
    c.require_stable()?;
    let cz = c0_zinv(filter, omega, z, m, None)?;
    let c1 = c0_zinv(filter, omega, z, m, Some(alpha))?.postmul(cmb_pinv)?;
    let c2 = cz.postmul(&(cmb_pinv * &(&plant.cm * &plant.am)))?;
    let h0 = h0_system(plant);
    let one_minus_c = parallel(&StateSpace::identity(m), &c.scale(-T::one()))?;
    let g = series(&h0, &one_minus_c)?;
    let hr = series(&h0, &c.postmul(kg)?)?;
    let h1 = series(&h0, &c1)?.scale(omega);
    let h2 = series(&h0, &c2)?.scale(omega);
    let norms = FilterNorms {
        g: l1_norm(&g)?,
        hr: l1_norm(&hr)?,
        h1: l1_norm(&h1)?,
        h2: l1_norm(&h2)?,
        c0: l1_norm(&c0)?,
        c0_kg: l1_norm(&c0.postmul(kg)?)?,
        c1: l1_norm(&c1)?,
        c2: l1_norm(&c2)?,
    };
    Ok(OmegaFilters {
        omega,
        c0,
        c,
        c0_zinv: cz,
        c1,
        c2,
        g,
        hr,
        h1,
        h2,
        norms,
    })
}
