//! Material constants for glacial ice and their validation.

use crate::scalar::Real;
use thiserror::Error;

/// Elastic, creep, fracture and friction constants.
///
/// All values in SI base units. The characteristic set for glacial ice
/// (see [`MaterialParams::glacial_ice`]) is used by every shipped scenario
/// unless overridden.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams<T> {
    /// Young's modulus, Pa.
    pub e_young: T,
    /// Poisson's ratio.
    pub nu: T,
    /// Ice density, kg m^-3.
    pub rho_i: T,
    /// Ocean-water density, kg m^-3.
    pub rho_w: T,
    /// Gravitational acceleration, m s^-2.
    pub g: T,
    /// Glen creep exponent.
    pub n_creep: T,
    /// Glen creep coefficient, Pa^-n s^-1.
    pub a_creep: T,
    /// Internal friction coefficient of the Mohr-Coulomb criterion.
    pub mu_int: T,
    /// Cohesive strength, Pa.
    pub tau_c: T,
    /// Basal friction exponent of the sliding law.
    pub m_fric: T,
    /// Reference traction bounding the basal shear stress, Pa.
    pub tau_0: T,
    /// Basal friction coefficient, Pa m^(-1/m) s^(1/m).
    pub c_fric: T,
    /// Phase-field viscosity, s.
    pub eta_pf: T,
    /// Phase-field length scale, m.
    pub ell: T,
    /// Post-failure parameter of the principal-stress driving force.
    pub zeta: T,
    /// Residual stiffness factor keeping fully damaged material nonsingular.
    pub k_res: T,
}

impl<T: Real> MaterialParams<T> {
    /// Characteristic properties of glacial ice.
    ///
    /// The creep coefficient is stored in Pa^-3 s^-1: 7.156e-7 MPa^-3 s^-1
    /// converts by (1e-6)^3 to 7.156e-25 Pa^-3 s^-1.
    pub fn glacial_ice() -> Self {
        Self {
            e_young: T::of(9500e6),
            nu: T::of(0.35),
            rho_i: T::of(917.0),
            rho_w: T::of(1020.0),
            g: T::of(9.81),
            n_creep: T::of(3.0),
            a_creep: T::of(7.156e-25),
            mu_int: T::of(0.8),
            tau_c: T::of(1.0e6),
            m_fric: T::of(3.0),
            tau_0: T::of(0.75e6),
            c_fric: T::of(1.0e7),
            eta_pf: T::of(33.8),
            ell: T::of(10.0),
            zeta: T::of(1.0),
            k_res: T::of(1e-7),
        }
    }

    /// First Lamé parameter.
    pub fn lambda(&self) -> T {
        let one = T::one();
        self.e_young * self.nu / ((one + self.nu) * (one - T::of(2.0) * self.nu))
    }

    /// Shear modulus.
    pub fn shear_modulus(&self) -> T {
        self.e_young / (T::of(2.0) * (T::one() + self.nu))
    }

    /// Checks every parameter invariant, collecting all violations.
    pub fn validate(&self) -> Result<(), Vec<MaterialError>> {
        let mut errors = Vec::new();
        if !(self.e_young > T::zero()) {
            errors.push(MaterialError::NonPositive("E"));
        }
        if !(self.nu > T::zero() && self.nu < T::of(0.5)) {
            errors.push(MaterialError::PoissonOutOfRange);
        }
        if !(self.tau_c > T::zero()) {
            errors.push(MaterialError::NonPositive("tau_c"));
        }
        if !(self.ell > T::zero()) {
            errors.push(MaterialError::NonPositive("ell"));
        }
        if !(self.eta_pf >= T::zero()) {
            errors.push(MaterialError::Negative("eta_pf"));
        }
        if !(self.mu_int >= T::zero()) {
            errors.push(MaterialError::Negative("mu_int"));
        }
        if !(self.n_creep >= T::one()) {
            errors.push(MaterialError::CreepExponentBelowOne);
        }
        if !(self.rho_i > T::zero()) {
            errors.push(MaterialError::NonPositive("rho_i"));
        }
        if !(self.rho_w > T::zero()) {
            errors.push(MaterialError::NonPositive("rho_w"));
        }
        if !(self.a_creep >= T::zero()) {
            errors.push(MaterialError::Negative("A"));
        }
        if !(self.k_res >= T::zero()) {
            errors.push(MaterialError::Negative("k_res"));
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }
}

/// Arrhenius temperature scaling of the creep coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrheniusParams<T> {
    /// Creep coefficient at the reference temperature, Pa^-n s^-1.
    pub a0: T,
    /// Activation energy, J mol^-1.
    pub q_act: T,
    /// Universal gas constant, J mol^-1 K^-1.
    pub r_gas: T,
    /// Reference temperature, K.
    pub t0: T,
    /// Temperature at which the coefficient is evaluated, K.
    pub t: T,
}

/// `A = A0 exp((Q/R)(1/T - 1/T0))`.
pub fn arrhenius_a<T: Real>(p: &ArrheniusParams<T>) -> Result<T, MaterialError> {
    if !(p.t > T::zero()) || !(p.t0 > T::zero()) {
        return Err(MaterialError::NonPositiveTemperature);
    }
    Ok(p.a0 * ((p.q_act / p.r_gas) * (T::one() / p.t - T::one() / p.t0)).exp())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MaterialError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("{0} must be non-negative")]
    Negative(&'static str),
    #[error("Poisson's ratio must satisfy 0 < nu < 0.5")]
    PoissonOutOfRange,
    #[error("creep exponent must be >= 1")]
    CreepExponentBelowOne,
    #[error("temperatures must be positive")]
    NonPositiveTemperature,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn glacial_ice_is_valid() {
        MaterialParams::<f64>::glacial_ice().validate().unwrap();
    }

    #[test]
    fn lame_constants_match_hand_values() {
        // E = 9500 MPa, nu = 0.35.
        let m = MaterialParams::<f64>::glacial_ice();
        assert_relative_eq!(m.lambda(), 8.20988e9, max_relative = 1e-5);
        assert_relative_eq!(m.shear_modulus(), 3.51852e9, max_relative = 1e-5);
    }

    #[test]
    fn validate_lists_all_violations() {
        let mut m = MaterialParams::<f64>::glacial_ice();
        m.nu = 0.6;
        m.tau_c = -1.0;
        m.ell = 0.0;
        let errs = m.validate().unwrap_err();
        assert_eq!(errs.len(), 3);
        assert!(errs.contains(&MaterialError::PoissonOutOfRange));
        assert!(errs.contains(&MaterialError::NonPositive("tau_c")));
        assert!(errs.contains(&MaterialError::NonPositive("ell")));
    }

    #[test]
    fn arrhenius_identity_at_reference() {
        let p = ArrheniusParams {
            a0: 7.156e-25,
            q_act: 6e4,
            r_gas: 8.314,
            t0: 263.15,
            t: 263.15,
        };
        assert_relative_eq!(arrhenius_a(&p).unwrap(), p.a0, max_relative = 1e-14);
    }

    #[test]
    fn arrhenius_no_activation_energy() {
        let p = ArrheniusParams {
            a0: 3.0,
            q_act: 0.0,
            r_gas: 8.314,
            t0: 263.15,
            t: 180.0,
        };
        assert_relative_eq!(arrhenius_a(&p).unwrap(), 3.0, max_relative = 1e-14);
    }

    #[test]
    fn arrhenius_hand_exponent() {
        let p = ArrheniusParams {
            a0: 7.156e-7,
            q_act: 6e4,
            r_gas: 8.314,
            t0: 263.15,
            t: 253.15,
        };
        let expect = 7.156e-7 * ((6e4_f64 / 8.314) * (1.0 / 253.15 - 1.0 / 263.15)).exp();
        assert_relative_eq!(arrhenius_a(&p).unwrap(), expect, max_relative = 1e-14);
    }

    #[test]
    fn arrhenius_rejects_nonpositive_temperature() {
        let p = ArrheniusParams {
            a0: 1.0,
            q_act: 1.0,
            r_gas: 8.314,
            t0: 263.15,
            t: 0.0,
        };
        assert!(arrhenius_a(&p).is_err());
    }
}
