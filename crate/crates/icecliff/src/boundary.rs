//! Boundary contributions: basal constraints and friction, terminus ocean
//! pressure and buttressing, and the far-end restraint.
//!
//! The vertical displacement is constrained to zero along the whole base
//! (no interpenetration of the bed). Horizontal motion at the base is free
//! (free slip), fixed (frozen) or resisted by a Weertman-type sliding law.
//! The sliding law enters the momentum system semi-implicitly: a secant
//! coefficient evaluated at the previous staggered pass's velocity
//! multiplies the current velocity, which keeps the system symmetric.

use crate::mesh::{Mesh, QuadratureRule};
use crate::scalar::{macaulay, Real};
use thiserror::Error;

/// Velocity floor inside the sliding-law power term; removes the removable
/// singularity of `|v|^(1/m - 1)` at rest.
pub const WEERTMAN_VELOCITY_FLOOR: f64 = 1e-16;

/// Velocity floor for the secant linearization of the sliding law. Below
/// ~3 mm/yr the bed is treated as this stiff; keeps the Robin coefficient
/// bounded so the momentum system stays well conditioned.
pub const WEERTMAN_SECANT_FLOOR: f64 = 1e-10;

/// Basal boundary variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasalCondition {
    FreeSlip,
    Frozen,
    Weertman {
        /// Friction coefficient, Pa m^(-1/m) s^(1/m).
        c_fric: f64,
        /// Friction exponent.
        m_fric: f64,
        /// Reference traction bounding the basal shear stress, Pa.
        tau_0: f64,
    },
}

impl BasalCondition {
    pub fn validate(&self) -> Result<(), BoundaryError> {
        if let Self::Weertman { c_fric, m_fric, tau_0 } = *self {
            if !(c_fric > 0.0) || !(tau_0 > 0.0) || !(m_fric >= 1.0) {
                return Err(BoundaryError::InvalidWeertman { c_fric, m_fric, tau_0 });
            }
        }
        Ok(())
    }
}

/// Loads acting on the right (terminus) face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminusLoading {
    /// Ocean-water height above the bed, m; 0 for land-terminating.
    pub h_w: f64,
    /// Buttressing traction magnitude, Pa (compressive, horizontal).
    pub buttress_sigma: f64,
    /// Buttressing extent above the waterline, m.
    pub buttress_above: f64,
    /// Buttressing extent below the waterline, m.
    pub buttress_below: f64,
}

impl TerminusLoading {
    /// Land-terminating terminus: no water, no buttressing.
    pub fn land() -> Self {
        Self {
            h_w: 0.0,
            buttress_sigma: 0.0,
            buttress_above: 25.0,
            buttress_below: 55.0,
        }
    }

    pub fn validate(&self) -> Result<(), BoundaryError> {
        if self.h_w < 0.0 || self.buttress_above < 0.0 || self.buttress_below < 0.0 {
            return Err(BoundaryError::NegativeTerminusExtent);
        }
        Ok(())
    }

    /// Total horizontal traction magnitude at height `z` on the terminus.
    pub fn traction(&self, z: f64, rho_w: f64, g: f64) -> f64 {
        ocean_pressure(z, self.h_w, rho_w, g)
            + buttressing_traction(
                z,
                self.h_w,
                self.buttress_sigma,
                self.buttress_above,
                self.buttress_below,
            )
    }
}

/// Weertman sliding traction opposing the tangential velocity `u_t_dot`:
/// `tau_b = -[ 1/(C |v|^(1/m-1)) + |v|/tau_0 ]^(-1) v`.
///
/// Bounded by `C |v|^(1/m)` in the slow regime and by `tau_0` in the fast
/// regime; exactly zero at rest.
pub fn weertman_traction<T: Real>(u_t_dot: T, c_fric: T, m_fric: T, tau_0: T) -> T {
    if u_t_dot == T::zero() {
        return T::zero();
    }
    let speed = u_t_dot.abs().max(T::of(WEERTMAN_VELOCITY_FLOOR));
    let b = speed.powf(T::one() - T::one() / m_fric) / c_fric + speed / tau_0;
    -u_t_dot / b
}

/// Secant coefficient `k` such that the sliding traction is `-k v` at
/// speed `v`; evaluated at the previous pass's speed for the linearized
/// Robin term.
pub fn weertman_secant(speed: f64, c_fric: f64, m_fric: f64, tau_0: f64) -> f64 {
    let s = speed.abs().max(WEERTMAN_SECANT_FLOOR);
    1.0 / (s.powf(1.0 - 1.0 / m_fric) / c_fric + s / tau_0)
}

/// Hydrostatic ocean pressure `rho_w g <h_w - z>`, applied as a compressive
/// normal traction on the terminus.
pub fn ocean_pressure<T: Real>(z: T, h_w: T, rho_w: T, g: T) -> T {
    rho_w * g * macaulay(h_w - z)
}

/// Buttressing traction: `sigma` inside the contact band around the
/// waterline, zero outside.
pub fn buttressing_traction<T: Real>(z: T, h_w: T, sigma: T, above: T, below: T) -> T {
    if z >= h_w - below && z <= h_w + above {
        sigma
    } else {
        T::zero()
    }
}

/// Dirichlet constraints plus the active friction law for one scenario.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    /// `(dof, value)` pairs, sorted and deduplicated.
    pub dirichlet: Vec<(usize, f64)>,
    /// `(C, m, tau_0)` when the basal variant is Weertman.
    pub friction: Option<(f64, f64, f64)>,
}

/// Builds the constraint set: `u_z = 0` on the whole base, `u_x = 0` there
/// as well iff frozen, `u_x = 0` on the left face, traction-free top;
/// terminus loads and sliding friction are Neumann-side and handled by the
/// assembly.
pub fn apply_constraints(
    mesh: &Mesh,
    basal: &BasalCondition,
) -> Result<ConstraintSet, BoundaryError> {
    basal.validate()?;
    check_tags(mesh)?;
    let mut dirichlet = Vec::new();
    for &n in &mesh.boundary.bottom_nodes {
        dirichlet.push((2 * n + 1, 0.0));
        if matches!(basal, BasalCondition::Frozen) {
            dirichlet.push((2 * n, 0.0));
        }
    }
    for &n in &mesh.boundary.left_nodes {
        dirichlet.push((2 * n, 0.0));
    }
    dirichlet.sort_unstable_by_key(|&(d, _)| d);
    dirichlet.dedup();
    let friction = match *basal {
        BasalCondition::Weertman { c_fric, m_fric, tau_0 } => Some((c_fric, m_fric, tau_0)),
        _ => None,
    };
    Ok(ConstraintSet { dirichlet, friction })
}

fn check_tags(mesh: &Mesh) -> Result<(), BoundaryError> {
    let b = &mesh.boundary;
    if b.bottom_nodes.is_empty()
        || b.top_nodes.is_empty()
        || b.left_nodes.is_empty()
        || b.right_nodes.is_empty()
    {
        return Err(BoundaryError::InconsistentTags("empty boundary tag set"));
    }
    let tol = 1e-9 * mesh.length.max(mesh.height);
    for &n in &b.bottom_nodes {
        if mesh.nodes[n][1].abs() > tol {
            return Err(BoundaryError::InconsistentTags("bottom node off the bed"));
        }
    }
    for &n in &b.right_nodes {
        if (mesh.nodes[n][0] - mesh.length).abs() > tol {
            return Err(BoundaryError::InconsistentTags("right node off the terminus"));
        }
    }
    Ok(())
}

/// Nodal force vector from the terminus loads (ocean pressure plus
/// buttressing) on the right face. The traction is compressive, so the
/// force points in `-x`.
///
/// Each edge is split at the waterline and at the buttressing band limits
/// before Gauss integration, which makes the piecewise-linear integrand
/// exact.
pub fn terminus_load_vector(mesh: &Mesh, t: &TerminusLoading, rho_w: f64, g: f64) -> Vec<f64> {
    let mut f = vec![0.0; 2 * mesh.n_nodes()];
    let (gauss_s, gauss_w) = QuadratureRule::edge_gauss3();
    let breakpoints = [t.h_w, t.h_w + t.buttress_above, t.h_w - t.buttress_below];
    for edge in &mesh.boundary.right_edges {
        let z0 = mesh.nodes[edge.nodes[0]][1];
        let z1 = mesh.nodes[edge.nodes[2]][1];
        let mut cuts = vec![z0, z1];
        for &bp in &breakpoints {
            if bp > z0 && bp < z1 {
                cuts.push(bp);
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for pair in cuts.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let len = b - a;
            if len <= 0.0 {
                continue;
            }
            for (sq, wq) in gauss_s.iter().zip(&gauss_w) {
                let z = a + sq * len;
                let s = (z - z0) / (z1 - z0);
                let tx = -t.traction(z, rho_w, g);
                let shapes = [
                    (1.0 - s) * (1.0 - 2.0 * s),
                    4.0 * s * (1.0 - s),
                    s * (2.0 * s - 1.0),
                ];
                for (node, n_val) in edge.nodes.iter().zip(&shapes) {
                    f[2 * node] += wq * len * tx * n_val;
                }
            }
        }
    }
    f
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundaryError {
    #[error("weertman law requires C > 0, tau_0 > 0, m >= 1 (got C={c_fric}, m={m_fric}, tau_0={tau_0})")]
    InvalidWeertman { c_fric: f64, m_fric: f64, tau_0: f64 },
    #[error("terminus extents must be non-negative")]
    NegativeTerminusExtent,
    #[error("inconsistent boundary tags: {0}")]
    InconsistentTags(&'static str),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_rectangle_mesh, DEFAULT_NODE_CAP};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn weertman_zero_velocity_zero_traction() {
        assert_eq!(weertman_traction(0.0f64, 1e6, 3.0, 0.75e6), 0.0);
    }

    #[test]
    fn weertman_hand_value() {
        // C=1e6, m=3, tau_0=0.75e6, v=1e-6:
        // B = (1e-6)^(2/3)/1e6 + 1e-6/0.75e6 = 1e-10 + 1.3333e-12.
        let tau = weertman_traction(1e-6f64, 1e6, 3.0, 0.75e6);
        let expect = -1e-6 / (1e-10 + 1e-6 / 0.75e6);
        assert_relative_eq!(tau, expect, max_relative = 1e-12);
        assert_relative_eq!(tau, -9868.4, max_relative = 1e-4);
    }

    #[test]
    fn weertman_saturates_at_reference_traction() {
        let tau = weertman_traction(1e7f64, 1e6, 3.0, 0.75e6);
        assert!(tau < 0.0);
        assert!(tau.abs() <= 0.75e6);
        assert!(tau.abs() > 0.99 * 0.75e6);
    }

    #[test]
    fn weertman_bounded_by_both_regimes() {
        for &v in &[1e-9f64, 1e-7, 1e-5, 1e-3, 1e-1, 10.0] {
            let tau = weertman_traction(v, 1e7, 3.0, 0.75e6).abs();
            let slow = 1e7 * v.powf(1.0 / 3.0);
            assert!(tau <= slow * (1.0 + 1e-12) && tau <= 0.75e6 * (1.0 + 1e-12));
        }
    }

    proptest! {
        #[test]
        fn weertman_odd_and_monotone(v in 1e-12..1e2f64, factor in 1.0..100.0f64) {
            let c = 1e7;
            let tau_pos = weertman_traction(v, c, 3.0, 0.75e6);
            let tau_neg = weertman_traction(-v, c, 3.0, 0.75e6);
            prop_assert!((tau_pos + tau_neg).abs() <= 1e-12 * tau_pos.abs().max(1e-30));
            let tau_faster = weertman_traction(v * factor, c, 3.0, 0.75e6);
            prop_assert!(tau_faster.abs() >= tau_pos.abs() * (1.0 - 1e-12));
        }
    }

    #[test]
    fn ocean_pressure_values() {
        assert_eq!(ocean_pressure(600.0, 585.0, 1020.0, 9.81), 0.0);
        assert_relative_eq!(
            ocean_pressure(0.0, 585.0, 1020.0, 9.81),
            5.8536e6,
            max_relative = 1e-4
        );
        assert_eq!(ocean_pressure(10.0, 0.0, 1020.0, 9.81), 0.0);
    }

    #[test]
    fn ocean_pressure_kink_at_waterline() {
        let p = |z: f64| ocean_pressure(z, 100.0, 1020.0, 9.81);
        let eps = 1e-9;
        assert!(p(100.0 - eps) > 0.0);
        assert_eq!(p(100.0), 0.0);
        // Linear below the waterline.
        assert_relative_eq!(p(40.0), (p(30.0) + p(50.0)) / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn buttressing_band() {
        let t = TerminusLoading {
            h_w: 585.0,
            buttress_sigma: 25e3,
            buttress_above: 25.0,
            buttress_below: 55.0,
        };
        let b = |z: f64| {
            buttressing_traction(z, t.h_w, t.buttress_sigma, t.buttress_above, t.buttress_below)
        };
        assert_eq!(b(585.0), 25e3);
        assert_eq!(b(585.0 + 26.0), 0.0);
        assert_eq!(b(585.0 - 55.0), 25e3);
        assert_eq!(b(585.0 - 56.0), 0.0);
        let none = TerminusLoading { buttress_sigma: 0.0, ..t };
        assert_eq!(none.traction(585.0, 1020.0, 9.81), 0.0);
    }

    #[test]
    fn constraints_frozen_land() {
        let mesh = build_rectangle_mesh(4.0, 8.0, 1.0, DEFAULT_NODE_CAP).unwrap();
        let set = apply_constraints(&mesh, &BasalCondition::Frozen).unwrap();
        assert!(set.friction.is_none());
        // Every bottom node pinned in both directions, left face in x.
        for &n in &mesh.boundary.bottom_nodes {
            assert!(set.dirichlet.contains(&(2 * n, 0.0)));
            assert!(set.dirichlet.contains(&(2 * n + 1, 0.0)));
        }
        for &n in &mesh.boundary.left_nodes {
            assert!(set.dirichlet.contains(&(2 * n, 0.0)));
        }
        // Top stays unconstrained.
        for &n in &mesh.boundary.top_nodes {
            assert!(!set.dirichlet.iter().any(|&(d, _)| d == 2 * n + 1));
        }
    }

    #[test]
    fn constraints_free_slip() {
        let mesh = build_rectangle_mesh(4.0, 8.0, 1.0, DEFAULT_NODE_CAP).unwrap();
        let set = apply_constraints(&mesh, &BasalCondition::FreeSlip).unwrap();
        for &n in &mesh.boundary.bottom_nodes {
            assert!(set.dirichlet.contains(&(2 * n + 1, 0.0)));
            if mesh.nodes[n][0] > 0.0 {
                assert!(!set.dirichlet.iter().any(|&(d, _)| d == 2 * n));
            }
        }
    }

    #[test]
    fn constraints_reject_bad_tags() {
        let mut mesh = build_rectangle_mesh(4.0, 8.0, 1.0, DEFAULT_NODE_CAP).unwrap();
        mesh.boundary.bottom_nodes.clear();
        let err = apply_constraints(&mesh, &BasalCondition::FreeSlip).unwrap_err();
        assert!(matches!(err, BoundaryError::InconsistentTags(_)));
    }

    #[test]
    fn invalid_weertman_rejected() {
        let bc = BasalCondition::Weertman {
            c_fric: -1.0,
            m_fric: 3.0,
            tau_0: 0.75e6,
        };
        assert!(bc.validate().is_err());
    }

    #[test]
    fn terminus_force_integrates_to_half_rho_g_hw_squared() {
        let mesh = build_rectangle_mesh(200.0, 400.0, 5.0, DEFAULT_NODE_CAP).unwrap();
        let t = TerminusLoading {
            h_w: 117.0, // waterline inside an edge, not on a node
            buttress_sigma: 0.0,
            buttress_above: 25.0,
            buttress_below: 55.0,
        };
        let f = terminus_load_vector(&mesh, &t, 1020.0, 9.81);
        let total: f64 = mesh.boundary.right_nodes.iter().map(|&n| f[2 * n]).sum();
        let expect = -0.5 * 1020.0 * 9.81 * 117.0 * 117.0;
        assert_relative_eq!(total, expect, max_relative = 1e-12);
    }

    #[test]
    fn terminus_force_includes_buttressing_area() {
        let mesh = build_rectangle_mesh(800.0, 1600.0, 20.0, DEFAULT_NODE_CAP).unwrap();
        let t = TerminusLoading {
            h_w: 585.0,
            buttress_sigma: 25e3,
            buttress_above: 25.0,
            buttress_below: 55.0,
        };
        let f = terminus_load_vector(&mesh, &t, 1020.0, 9.81);
        let total: f64 = mesh.boundary.right_nodes.iter().map(|&n| f[2 * n]).sum();
        let expect = -0.5 * 1020.0 * 9.81 * 585.0 * 585.0 - 25e3 * 80.0;
        assert_relative_eq!(total, expect, max_relative = 1e-12);
    }
}
