//! Material-point physics: plane-strain elasticity, Glen creep, crack
//! driving forces and the damage history field.
//!
//! The crack driving forces are evaluated on the undamaged ("effective")
//! stress `sigma_0 = C0 (eps - eps_v)`; degradation is applied by the
//! momentum solver, not here. Two driving forces are provided: a
//! Mohr-Coulomb form sensitive to shear and pressure, and the classical
//! principal-stress form for comparison runs. The Mohr-Coulomb form
//! deliberately carries no `-1` damage threshold, which smooths the
//! damage transition and spreads failure over several increments.

use crate::material::MaterialParams;
use crate::scalar::{macaulay, Real};
use crate::tensor::{SymmetricStrain, SymmetricStress};
use thiserror::Error;

/// Per-quadrature-point state carried through the time march.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MaterialPointState<T> {
    /// Viscous (creep) strain; traceless.
    pub eps_v: SymmetricStrain<T>,
    /// History field: running maximum of the crack driving force.
    pub h_d: T,
    /// Phase field interpolated to the point at the last evaluation.
    pub phi: T,
}

/// Crack driving force selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DrivingForceModel<T> {
    /// Mohr-Coulomb form with internal friction `mu` and cohesion `tau_c`.
    MohrCoulomb { mu: T, tau_c: T },
    /// Principal-stress form with material strength `sigma_c` and
    /// post-failure parameter `zeta`.
    Principal { sigma_c: T, zeta: T },
}

impl<T: Real> DrivingForceModel<T> {
    pub fn evaluate(&self, s0: &SymmetricStress<T>) -> T {
        match *self {
            Self::MohrCoulomb { mu, tau_c } => driving_force_mc(s0, mu, tau_c),
            Self::Principal { sigma_c, zeta } => driving_force_principal(s0, sigma_c, zeta),
        }
    }
}

/// Undamaged plane-strain Hooke stress from total and viscous strain.
///
/// The total out-of-plane strain is constrained to zero while the viscous
/// strain's out-of-plane component still enters the elastic strain.
pub fn elastic_stress<T: Real>(
    eps_total: &SymmetricStrain<T>,
    eps_v: &SymmetricStrain<T>,
    p: &MaterialParams<T>,
) -> SymmetricStress<T> {
    let e = eps_total.sub(eps_v);
    let lambda = p.lambda();
    let two_g = T::of(2.0) * p.shear_modulus();
    let tr = e.trace();
    SymmetricStress {
        sxx: lambda * tr + two_g * e.exx,
        szz: lambda * tr + two_g * e.ezz,
        syy: lambda * tr + two_g * e.eyy,
        sxz: two_g * e.exz,
    }
}

/// `x^e`, with the quadratic case (Glen exponent n = 3) special-cased:
/// it dominates the creep update cost.
#[inline]
fn powe<T: Real>(x: T, e: T) -> T {
    if e == T::of(2.0) {
        x * x
    } else {
        x.powf(e)
    }
}

/// Glen-law creep strain rate `A sigma_e^(n-1) s0'`.
///
/// The rate is deviatoric by construction, so creep is volume preserving.
pub fn creep_rate<T: Real>(
    s0: &SymmetricStress<T>,
    p: &MaterialParams<T>,
) -> SymmetricStrain<T> {
    let dev = s0.deviator();
    let se = s0.equivalent();
    let factor = if se > T::zero() {
        p.a_creep * powe(se, p.n_creep - T::one())
    } else {
        T::zero()
    };
    SymmetricStrain {
        exx: factor * dev.sxx,
        ezz: factor * dev.szz,
        eyy: factor * dev.syy,
        exz: factor * dev.sxz,
    }
}

/// Advances the viscous strain one backward-Euler step at fixed total
/// strain.
///
/// Because the deviator direction is shared between the stress and the
/// creep increment, the tensor update reduces to a scalar equation for the
/// end-of-step equivalent stress,
/// `x (1 + 2 G dt A x^(n-1)) = sigma_e_trial`,
/// solved by a damped fixed-point iteration (relative tolerance 1e-10,
/// at most 50 iterations). `s0` is the undamaged stress at the current
/// viscous strain, whose deviator is the trial deviator.
pub fn update_viscous_strain<T: Real>(
    state: &MaterialPointState<T>,
    s0: &SymmetricStress<T>,
    dt: T,
    p: &MaterialParams<T>,
) -> Result<MaterialPointState<T>, ConstitutiveError> {
    let trial_dev = s0.deviator();
    let se_trial = s0.equivalent();
    if se_trial == T::zero() {
        return Ok(*state);
    }

    let two_g = T::of(2.0) * p.shear_modulus();
    let coeff = two_g * dt * p.a_creep;
    let nm1 = p.n_creep - T::one();
    let tol = T::of(1e-10);
    let damping = T::of(0.5);

    // Damping keeps the map contractive even when 2 G dt A x^(n-1) is
    // large (spin-up scale steps).
    let mut x = se_trial;
    let mut converged = false;
    for _ in 0..50 {
        let next = se_trial / (T::one() + coeff * powe(x, nm1));
        let x_new = damping * x + (T::one() - damping) * next;
        let change = (x_new - x).abs();
        x = x_new;
        if change <= tol * se_trial {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(ConstitutiveError::CreepNonConvergence);
    }

    // End-of-step deviator shares the trial direction, shrunk to magnitude x.
    let shrink = x / se_trial;
    let dev_new = trial_dev.scale(shrink);
    let rate_factor = p.a_creep * powe(x, nm1) * dt;
    let delta = SymmetricStrain {
        exx: rate_factor * dev_new.sxx,
        ezz: rate_factor * dev_new.szz,
        eyy: rate_factor * dev_new.syy,
        exz: rate_factor * dev_new.sxz,
    };
    Ok(MaterialPointState {
        eps_v: state.eps_v.add(&delta),
        h_d: state.h_d,
        phi: state.phi,
    })
}

/// Mohr-Coulomb crack driving force,
/// `< (sqrt(mu^2+1) tau_max - mu P) / tau_c >^2`.
pub fn driving_force_mc<T: Real>(s0: &SymmetricStress<T>, mu: T, tau_c: T) -> T {
    let f = ((mu * mu + T::one()).sqrt() * s0.tau_max() - mu * s0.pressure()) / tau_c;
    let m = macaulay(f);
    m * m
}

/// Principal-stress crack driving force,
/// `zeta < sum_a (<sigma_a>/sigma_c)^2 - 1 >` over the three principal
/// stresses.
pub fn driving_force_principal<T: Real>(s0: &SymmetricStress<T>, sigma_c: T, zeta: T) -> T {
    let mut sum = T::zero();
    for s in s0.principal() {
        let r = macaulay(s) / sigma_c;
        sum = sum + r * r;
    }
    zeta * macaulay(sum - T::one())
}

/// History field update: running maximum, enforcing damage irreversibility.
pub fn update_history<T: Real>(h_old: T, d_new: T) -> T {
    h_old.max(d_new)
}

/// Steady uniform phase field for a spatially constant history field with
/// no rate term: `phi = 2 H_d / (1 + 2 H_d)`.
pub fn homogeneous_steady_phi<T: Real>(h_d: T) -> T {
    let two_h = T::of(2.0) * h_d;
    two_h / (T::one() + two_h)
}

/// One sampled point of a yield surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldSample<T> {
    pub sxx: T,
    pub szz: T,
    pub d_d: T,
}

/// Evaluates a driving force on a grid of pure `(sxx, szz)` stress states
/// with `syy = sxz = 0` (no plane-strain coupling).
pub fn sample_yield_surface<T: Real>(
    model: &DrivingForceModel<T>,
    sxx_values: &[T],
    szz_values: &[T],
) -> Vec<YieldSample<T>> {
    let mut out = Vec::with_capacity(sxx_values.len() * szz_values.len());
    for &sxx in sxx_values {
        for &szz in szz_values {
            let s = SymmetricStress::new(sxx, szz, T::zero(), T::zero());
            out.push(YieldSample {
                sxx,
                szz,
                d_d: model.evaluate(&s),
            });
        }
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstitutiveError {
    #[error("creep update did not converge within 50 iterations")]
    CreepNonConvergence,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    type S = SymmetricStress<f64>;
    type E = SymmetricStrain<f64>;

    fn ice() -> MaterialParams<f64> {
        MaterialParams::glacial_ice()
    }

    #[test]
    fn elastic_stress_vanishes_when_fully_relaxed() {
        let eps = E::new(1e-4, -2e-4, 0.0, 3e-5);
        let s = elastic_stress(&eps, &eps, &ice());
        assert_relative_eq!(s.sxx, 0.0, epsilon = 1e-9);
        assert_relative_eq!(s.szz, 0.0, epsilon = 1e-9);
        assert_relative_eq!(s.syy, 0.0, epsilon = 1e-9);
        assert_relative_eq!(s.sxz, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn elastic_stress_uniaxial_strain() {
        // exx = 1e-4 alone: sxx = (lambda + 2G) exx, szz = syy = lambda exx.
        let p = ice();
        let eps = E::new(1e-4, 0.0, 0.0, 0.0);
        let s = elastic_stress(&eps, &E::zero(), &p);
        let lambda = p.lambda();
        let two_g = 2.0 * p.shear_modulus();
        assert_relative_eq!(s.sxx, (lambda + two_g) * 1e-4, max_relative = 1e-12);
        assert_relative_eq!(s.szz, lambda * 1e-4, max_relative = 1e-12);
        assert_relative_eq!(s.syy, lambda * 1e-4, max_relative = 1e-12);
        assert_relative_eq!(s.sxz, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn elastic_stress_pure_shear() {
        let p = ice();
        let eps = E::new(0.0, 0.0, 0.0, 5e-5);
        let s = elastic_stress(&eps, &E::zero(), &p);
        assert_relative_eq!(s.sxz, 2.0 * p.shear_modulus() * 5e-5, max_relative = 1e-12);
        assert_relative_eq!(s.sxx, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn elastic_stress_viscous_out_of_plane_enters() {
        // eps_total = 0 but eps_v has a yy part: syy = -(lambda + 2G) ev_yy
        // plus the lambda-trace contribution.
        let p = ice();
        let ev = E::new(0.0, 0.0, 2e-5, 0.0);
        let s = elastic_stress(&E::zero(), &ev, &p);
        let lambda = p.lambda();
        let two_g = 2.0 * p.shear_modulus();
        assert_relative_eq!(s.syy, -(lambda + two_g) * 2e-5, max_relative = 1e-12);
        assert_relative_eq!(s.sxx, -lambda * 2e-5, max_relative = 1e-12);
    }

    #[test]
    fn creep_rate_zero_for_hydrostatic() {
        let s = S::new(-2e6, -2e6, -2e6, 0.0);
        let r = creep_rate(&s, &ice());
        assert_relative_eq!(r.exx, 0.0, epsilon = 1e-30);
        assert_relative_eq!(r.exz, 0.0, epsilon = 1e-30);
    }

    #[test]
    fn creep_rate_pure_shear_hand_value() {
        // sxz = 0.1 MPa, A = 7.156e-7 MPa^-3 s^-1, n = 3:
        // rate_xz = A sigma_e^2 sxz = 7.156e-10 s^-1.
        let s = S::new(0.0, 0.0, 0.0, 0.1e6);
        let r = creep_rate(&s, &ice());
        assert_relative_eq!(r.exz, 7.156e-10, max_relative = 1e-10);
        assert_relative_eq!(r.exx, 0.0, epsilon = 1e-25);
    }

    #[test]
    fn creep_rate_homogeneous_degree_n() {
        let s = S::new(0.4e6, -0.2e6, 0.1e6, 0.3e6);
        let r1 = creep_rate(&s, &ice());
        let r2 = creep_rate(&s.scale(2.0), &ice());
        assert_relative_eq!(r2.exx, 8.0 * r1.exx, max_relative = 1e-10);
        assert_relative_eq!(r2.exz, 8.0 * r1.exz, max_relative = 1e-10);
    }

    #[test]
    fn viscous_update_no_stress_is_identity() {
        let state = MaterialPointState {
            eps_v: E::new(1e-5, -1e-5, 0.0, 2e-6),
            h_d: 0.3,
            phi: 0.1,
        };
        let next = update_viscous_strain(&state, &S::zero(), 1e6, &ice()).unwrap();
        assert_eq!(next, state);
    }

    #[test]
    fn viscous_update_matches_explicit_euler_for_small_dt() {
        let p = ice();
        let s = S::new(0.0, 0.0, 0.0, 0.1e6);
        let state = MaterialPointState::default();
        // A sigma_e^(n-1) G dt << 1.
        let dt = 10.0;
        let implicit = update_viscous_strain(&state, &s, dt, &p).unwrap();
        let explicit = creep_rate(&s, &p).scale(dt);
        assert_relative_eq!(implicit.eps_v.exz, explicit.exz, max_relative = 1e-2);
    }

    #[test]
    fn viscous_update_relaxes_toward_ode_oracle() {
        // Pure shear at fixed total strain: ds/dt = -2 G A s^3. Reference
        // by fine RK4; the backward-Euler chain must track it within 1%.
        let p = ice();
        let g = p.shear_modulus();
        let a = p.a_creep;
        let exz_total = 0.1e6 / (2.0 * g); // initial stress 0.1 MPa
        let eps_total = E::new(0.0, 0.0, 0.0, exz_total);

        let t_end = 4.0e4;
        let n_ref = 400_000;
        let dt_ref = t_end / n_ref as f64;
        let mut s_ref = 0.1e6_f64;
        let f = |s: f64| -2.0 * g * a * s.powi(3);
        for _ in 0..n_ref {
            let k1 = f(s_ref);
            let k2 = f(s_ref + 0.5 * dt_ref * k1);
            let k3 = f(s_ref + 0.5 * dt_ref * k2);
            let k4 = f(s_ref + dt_ref * k3);
            s_ref += dt_ref / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }

        let dt = 50.0;
        let mut state = MaterialPointState::default();
        let steps = (t_end / dt) as usize;
        for _ in 0..steps {
            let s0 = elastic_stress(&eps_total, &state.eps_v, &p);
            state = update_viscous_strain(&state, &s0, dt, &p).unwrap();
        }
        let s_end = elastic_stress(&eps_total, &state.eps_v, &p).sxz;
        assert_relative_eq!(s_end, s_ref, max_relative = 1e-2);
        // With enough time the deviatoric stress must approach zero.
        assert!(s_end < 0.05e6);
    }

    #[test]
    fn viscous_update_converges_at_large_dt() {
        // Spin-up scale steps must still converge and stay traceless.
        let p = ice();
        let s = S::new(1.2e6, -0.3e6, 0.2e6, 0.4e6);
        let state = MaterialPointState::default();
        let next = update_viscous_strain(&state, &s, 21_600.0, &p).unwrap();
        assert!(next.eps_v.trace().abs() < 1e-12);
    }

    #[test]
    fn driving_force_mc_zero_stress() {
        assert_eq!(driving_force_mc(&S::zero(), 0.8, 1e6), 0.0);
    }

    #[test]
    fn driving_force_mc_tresca_limit() {
        // mu = 0, pure shear at the cohesive strength: exactly 1.
        let s = S::new(0.0, 0.0, 0.0, 1e6);
        assert_relative_eq!(driving_force_mc(&s, 0.0, 1e6), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn driving_force_mc_hand_value() {
        // mu = 0.8, tau_c = 1 MPa, uniaxial 0.5 MPa tension:
        // (sqrt(1.64) * 0.25 + 0.8 / 6)^2.
        let s = S::new(0.5e6, 0.0, 0.0, 0.0);
        let expect = (1.64f64.sqrt() * 0.25 + 0.8 / 6.0).powi(2);
        let got = driving_force_mc(&s, 0.8, 1e6);
        assert_relative_eq!(got, expect, max_relative = 1e-12);
        assert_relative_eq!(got, 0.20565, max_relative = 1e-4);
    }

    #[test]
    fn driving_force_principal_compressive_is_zero() {
        let s = S::new(-2e6, -1e6, -0.5e6, 0.3e6);
        // All principal stresses negative: sigma1 = -1e6 + radius check.
        if s.sigma1() < 0.0 {
            assert_eq!(driving_force_principal(&s, 1e6, 1.0), 0.0);
        }
        let s = S::new(-2e6, -2e6, -0.5e6, 0.0);
        assert_eq!(driving_force_principal(&s, 1e6, 1.0), 0.0);
    }

    #[test]
    fn driving_force_principal_single_tensile() {
        let s = S::new(2e6, 0.0, 0.0, 0.0);
        assert_relative_eq!(driving_force_principal(&s, 1e6, 1.0), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn driving_force_principal_biaxial() {
        let s = S::new(1e6, 1e6, 0.0, 0.0);
        assert_relative_eq!(driving_force_principal(&s, 1e6, 1.0), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn history_running_maximum() {
        assert_eq!(update_history(0.2, 0.5), 0.5);
        assert_eq!(update_history(0.5, 0.3), 0.5);
        let folded: Vec<f64> = [0.2, 0.5, 0.3]
            .iter()
            .scan(0.0, |h, &d| {
                *h = update_history(*h, d);
                Some(*h)
            })
            .collect();
        assert_eq!(folded, vec![0.2, 0.5, 0.5]);
    }

    #[test]
    fn steady_phi_half_at_half() {
        assert_relative_eq!(homogeneous_steady_phi(0.5), 0.5, max_relative = 1e-14);
        assert_relative_eq!(homogeneous_steady_phi(0.0), 0.0, max_relative = 1e-14);
    }

    #[test]
    fn yield_surface_tresca_hydrostatic_invariance() {
        // mu = 0: shifting all three normals leaves D_d unchanged.
        let model = DrivingForceModel::MohrCoulomb { mu: 0.0, tau_c: 1e6 };
        let s = S::new(1.5e6, -0.5e6, 0.2e6, 0.0);
        let shifted = S::new(1.5e6 + 3e6, -0.5e6 + 3e6, 0.2e6 + 3e6, 0.0);
        assert_relative_eq!(model.evaluate(&s), model.evaluate(&shifted), max_relative = 1e-12);
    }

    #[test]
    fn yield_surface_mc_apex_on_hydrostatic_axis() {
        // With sxx = szz = syy = sigma_a, D_d = (mu sigma_a / tau_c)^2, so
        // the criterion reaches 1 exactly at sigma_a = tau_c / mu.
        let mu = 0.8;
        let tau_c = 1e6;
        let apex = tau_c / mu;
        let s = S::new(apex, apex, apex, 0.0);
        assert_relative_eq!(driving_force_mc(&s, mu, tau_c), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn yield_surface_principal_compressive_quadrant() {
        let model = DrivingForceModel::Principal { sigma_c: 1e6, zeta: 1.0 };
        let grid: Vec<f64> = (0..=20).map(|i| -4e6 + 0.19e6 * i as f64).collect();
        for s in sample_yield_surface(&model, &grid, &grid) {
            if s.sxx <= 0.0 && s.szz <= 0.0 {
                assert_eq!(s.d_d, 0.0, "intact at ({}, {})", s.sxx, s.szz);
            }
        }
    }

    fn stress_strategy() -> impl Strategy<Value = S> {
        let c = -4e6..4e6;
        (c.clone(), c.clone(), c.clone(), c).prop_map(|(a, b, c, d)| S::new(a, b, c, d))
    }

    proptest! {
        #[test]
        fn mc_mu0_hydrostatic_invariance(s in stress_strategy(), p in -4e6..4e6f64) {
            let shifted = S::new(s.sxx + p, s.szz + p, s.syy + p, s.sxz);
            let a = driving_force_mc(&s, 0.0, 1e6);
            let b = driving_force_mc(&shifted, 0.0, 1e6);
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
        }

        #[test]
        fn mc_degree_two_homogeneous(s in stress_strategy(), alpha in 0.1..4.0f64) {
            let d = driving_force_mc(&s, 0.8, 1e6);
            if d > 0.0 {
                let d_scaled = driving_force_mc(&s.scale(alpha), 0.8, 1e6);
                prop_assert!((d_scaled - alpha * alpha * d).abs() <= 1e-9 * d_scaled.max(1.0));
            }
        }

        #[test]
        fn creep_rate_always_traceless(s in stress_strategy()) {
            let r = creep_rate(&s, &ice());
            let scale = r.exx.abs().max(r.ezz.abs()).max(r.eyy.abs()).max(1e-30);
            prop_assert!(r.trace().abs() <= 1e-10 * scale.max(1e-12));
        }

        #[test]
        fn viscous_update_preserves_tracelessness(s in stress_strategy(), dt in 1.0..1e5f64) {
            let state = MaterialPointState::default();
            let next = update_viscous_strain(&state, &s, dt, &ice()).unwrap();
            prop_assert!(next.eps_v.trace().abs() <= 1e-10);
        }

        #[test]
        fn history_idempotent_and_noop_insensitive(h in 0.0..10.0f64, d in 0.0..10.0f64) {
            let once = update_history(h, d);
            prop_assert_eq!(update_history(once, d), once);
            prop_assert_eq!(update_history(once, 0.0), once);
        }
    }
}
