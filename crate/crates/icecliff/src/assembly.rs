//! Global finite-element assembly for the momentum and phase-field
//! systems.
//!
//! Element contributions are computed in parallel (the per-element work is
//! pure), then scattered sequentially into the banded global matrix in
//! element order, so results are identical for any worker count.

use crate::band::BandMatrix;
use crate::boundary::{weertman_secant, ConstraintSet};
use crate::constitutive::{elastic_stress, MaterialPointState};
use crate::material::MaterialParams;
use crate::mesh::{ElementGeometry, Mesh, QuadratureRule};
use crate::tensor::{SymmetricStrain, SymmetricStress};
use rayon::prelude::*;

pub const N_QP: usize = 6;

/// Precomputed integration data for one mesh: element geometry, quadrature
/// shape values and per-element physical shape gradients.
pub struct FemCache {
    pub rule: QuadratureRule,
    pub geoms: Vec<ElementGeometry>,
    /// Shape values at each quadrature point (same for every element).
    pub shape: [[f64; 6]; N_QP],
    /// Physical shape gradients, indexed `elem * N_QP + qp`.
    pub grads: Vec<[[f64; 2]; 6]>,
    /// Half-bandwidth of the scalar (per-node) system.
    pub hb_scalar: usize,
    /// Half-bandwidth of the vector (two dofs per node) system.
    pub hb_vector: usize,
}

impl FemCache {
    pub fn new(mesh: &Mesh) -> Self {
        let rule = QuadratureRule::degree4();
        assert_eq!(rule.points.len(), N_QP);
        let mut shape = [[0.0; 6]; N_QP];
        for (q, l) in rule.points.iter().enumerate() {
            shape[q] = crate::mesh::shape_functions(l);
        }
        let geoms: Vec<ElementGeometry> = mesh
            .elements
            .iter()
            .map(|e| ElementGeometry::new(mesh, e))
            .collect();
        let mut grads = vec![[[0.0; 2]; 6]; mesh.elements.len() * N_QP];
        for (e, geo) in geoms.iter().enumerate() {
            for (q, l) in rule.points.iter().enumerate() {
                let (_, g) = geo.shape_values(l);
                grads[e * N_QP + q] = g;
            }
        }
        let mut hb_scalar = 0;
        for elem in &mesh.elements {
            let lo = *elem.iter().min().unwrap();
            let hi = *elem.iter().max().unwrap();
            hb_scalar = hb_scalar.max(hi - lo);
        }
        Self {
            rule,
            geoms,
            shape,
            grads,
            hb_scalar,
            hb_vector: 2 * hb_scalar + 1,
        }
    }

    #[inline]
    pub fn grad(&self, elem: usize, qp: usize) -> &[[f64; 2]; 6] {
        &self.grads[elem * N_QP + qp]
    }
}

/// Interpolates a nodal field to a quadrature point.
#[inline]
pub fn interp_nodal(shape: &[f64; 6], elem: &[usize; 6], nodal: &[f64]) -> f64 {
    let mut v = 0.0;
    for (n, s) in elem.iter().zip(shape) {
        v += nodal[*n] * s;
    }
    v
}

/// Total strain at a quadrature point from nodal displacements
/// (plane strain: `eyy = 0`, `exz` tensorial).
#[inline]
pub fn strain_at_qp(grad: &[[f64; 2]; 6], elem: &[usize; 6], u: &[f64]) -> SymmetricStrain<f64> {
    let mut exx = 0.0;
    let mut ezz = 0.0;
    let mut gamma = 0.0;
    for (i, n) in elem.iter().enumerate() {
        let ux = u[2 * n];
        let uz = u[2 * n + 1];
        exx += grad[i][0] * ux;
        ezz += grad[i][1] * uz;
        gamma += grad[i][1] * ux + grad[i][0] * uz;
    }
    SymmetricStrain::new(exx, ezz, 0.0, 0.5 * gamma)
}

/// Undamaged stress at a quadrature point.
#[inline]
pub fn stress_at_qp(
    grad: &[[f64; 2]; 6],
    elem: &[usize; 6],
    u: &[f64],
    eps_v: &SymmetricStrain<f64>,
    material: &MaterialParams<f64>,
) -> SymmetricStress<f64> {
    let eps = strain_at_qp(grad, elem, u);
    elastic_stress(&eps, eps_v, material)
}

/// Degradation factor on the stiffness: `(1 - phi)^2 + k_res`.
#[inline]
fn stiffness_degradation(phi: f64, k_res: f64) -> f64 {
    let d = 1.0 - phi;
    d * d + k_res
}

/// Assembles the momentum system `K u = f` for the current phase field and
/// viscous strain. The stiffness and the gravity load are degraded by the
/// phase field; the creep contribution moves to the right-hand side.
///
/// Passing `k = None` rebuilds only the load vector, for reuse of an
/// existing factorization when the phase field has not changed.
#[allow(clippy::too_many_arguments)]
pub fn assemble_momentum(
    mesh: &Mesh,
    cache: &FemCache,
    material: &MaterialParams<f64>,
    phi: &[f64],
    qp_states: &[MaterialPointState<f64>],
    k: Option<&mut BandMatrix>,
    rhs: &mut [f64],
    buffer: &mut Vec<([[f64; 12]; 12], [f64; 12])>,
) {
    let lambda = material.lambda();
    let g_shear = material.shear_modulus();
    let c11 = lambda + 2.0 * g_shear;
    let c12 = lambda;
    let rho_g = material.rho_i * material.g;
    let k_res = material.k_res;
    let with_matrix = k.is_some();

    mesh.elements
        .par_iter()
        .enumerate()
        .map(|(e, elem)| {
            let det = cache.geoms[e].det_jacobian;
            let mut ke = [[0.0f64; 12]; 12];
            let mut fe = [0.0f64; 12];
            for q in 0..N_QP {
                let w = cache.rule.weights[q] * det;
                let shape = &cache.shape[q];
                let grad = cache.grad(e, q);
                let phi_q = interp_nodal(shape, elem, phi);
                let gfac = stiffness_degradation(phi_q, k_res);
                let grav = (1.0 - phi_q) * (1.0 - phi_q) * rho_g;

                // Creep load: C eps_v = -elastic_stress(0, eps_v).
                let sv = elastic_stress(
                    &SymmetricStrain::zero(),
                    &qp_states[e * N_QP + q].eps_v,
                    material,
                );
                let (cv_xx, cv_zz, cv_xz) = (-sv.sxx, -sv.szz, -sv.sxz);

                for i in 0..6 {
                    let gx = grad[i][0];
                    let gz = grad[i][1];
                    fe[2 * i] += w * gfac * (cv_xx * gx + cv_xz * gz);
                    fe[2 * i + 1] += w * (gfac * (cv_zz * gz + cv_xz * gx) - grav * shape[i]);
                }

                if with_matrix {
                    let wg = w * gfac;
                    for i in 0..6 {
                        let gxi = grad[i][0];
                        let gzi = grad[i][1];
                        for j in 0..6 {
                            let gxj = grad[j][0];
                            let gzj = grad[j][1];
                            ke[2 * i][2 * j] += wg * (c11 * gxi * gxj + g_shear * gzi * gzj);
                            ke[2 * i][2 * j + 1] += wg * (c12 * gxi * gzj + g_shear * gzi * gxj);
                            ke[2 * i + 1][2 * j + 1] +=
                                wg * (c11 * gzi * gzj + g_shear * gxi * gxj);
                        }
                    }
                }
            }
            (ke, fe)
        })
        .collect_into_vec(buffer);

    rhs.fill(0.0);
    if let Some(k) = k {
        k.reset();
        for (e, (ke, fe)) in buffer.iter().enumerate() {
            let elem = &mesh.elements[e];
            for i in 0..6 {
                let gi = [2 * elem[i], 2 * elem[i] + 1];
                rhs[gi[0]] += fe[2 * i];
                rhs[gi[1]] += fe[2 * i + 1];
                for j in 0..6 {
                    let gj = [2 * elem[j], 2 * elem[j] + 1];
                    // Scatter the x-x, z-z upper blocks once per unordered
                    // node pair; the x-z block is unsymmetric per pair and
                    // scattered fully from the row side.
                    if gj[0] >= gi[0] {
                        k.add(gi[0], gj[0], ke[2 * i][2 * j]);
                    }
                    if gj[1] >= gi[1] {
                        k.add(gi[1], gj[1], ke[2 * i + 1][2 * j + 1]);
                    }
                    k.add(gi[0], gj[1], ke[2 * i][2 * j + 1]);
                }
            }
        }
    } else {
        for (e, (_, fe)) in buffer.iter().enumerate() {
            let elem = &mesh.elements[e];
            for i in 0..6 {
                rhs[2 * elem[i]] += fe[2 * i];
                rhs[2 * elem[i] + 1] += fe[2 * i + 1];
            }
        }
    }
}

/// Adds the linearized basal sliding term. The traction `-k v` with
/// `v = (u_x - u_x_prev)/dt` becomes a symmetric `k/dt` boundary mass on
/// the x-dofs plus a load `(k/dt) u_x_prev`; the secant coefficient is
/// evaluated at the previous pass's sliding speed.
pub fn add_basal_friction(
    mesh: &Mesh,
    constraints: &ConstraintSet,
    u_pass: &[f64],
    u_prev_step: &[f64],
    dt: f64,
    k: &mut BandMatrix,
    rhs: &mut [f64],
) {
    let Some((c_fric, m_fric, tau_0)) = constraints.friction else {
        return;
    };
    let (gauss_s, gauss_w) = QuadratureRule::edge_gauss3();
    for edge in &mesh.boundary.bottom_edges {
        let x0 = mesh.nodes[edge.nodes[0]][0];
        let x1 = mesh.nodes[edge.nodes[2]][0];
        let len = x1 - x0;
        for (sq, wq) in gauss_s.iter().zip(&gauss_w) {
            let s = *sq;
            let shapes = [
                (1.0 - s) * (1.0 - 2.0 * s),
                4.0 * s * (1.0 - s),
                s * (2.0 * s - 1.0),
            ];
            let mut ux_pass = 0.0;
            let mut ux_prev = 0.0;
            for (node, n_val) in edge.nodes.iter().zip(&shapes) {
                ux_pass += u_pass[2 * node] * n_val;
                ux_prev += u_prev_step[2 * node] * n_val;
            }
            let speed = ((ux_pass - ux_prev) / dt).abs();
            let k_lin = weertman_secant(speed, c_fric, m_fric, tau_0) / dt;
            let w = wq * len * k_lin;
            for i in 0..3 {
                rhs[2 * edge.nodes[i]] += w * shapes[i] * ux_prev;
                for j in 0..3 {
                    if edge.nodes[j] >= edge.nodes[i] {
                        k.add(
                            2 * edge.nodes[i],
                            2 * edge.nodes[j],
                            w * shapes[i] * shapes[j],
                        );
                    }
                }
            }
        }
    }
}

/// Assembles the phase-field system from the backward-Euler weak form:
/// `(2H + 1 + eta/dt) phi v + ell^2 grad phi . grad v = (2H + (eta/dt) phi_old) v`.
pub fn assemble_phase(
    mesh: &Mesh,
    cache: &FemCache,
    ell: f64,
    eta_over_dt: f64,
    qp_states: &[MaterialPointState<f64>],
    phi_old: &[f64],
    k: &mut BandMatrix,
    rhs: &mut [f64],
    buffer: &mut Vec<([[f64; 6]; 6], [f64; 6])>,
) {
    let ell2 = ell * ell;
    mesh.elements
        .par_iter()
        .enumerate()
        .map(|(e, elem)| {
            let det = cache.geoms[e].det_jacobian;
            let mut ke = [[0.0f64; 6]; 6];
            let mut fe = [0.0f64; 6];
            for q in 0..N_QP {
                let w = cache.rule.weights[q] * det;
                let shape = &cache.shape[q];
                let grad = cache.grad(e, q);
                let h_d = qp_states[e * N_QP + q].h_d;
                let phi_old_q = interp_nodal(shape, elem, phi_old);
                let mass = 2.0 * h_d + 1.0 + eta_over_dt;
                let source = 2.0 * h_d + eta_over_dt * phi_old_q;
                for i in 0..6 {
                    fe[i] += w * source * shape[i];
                    for j in i..6 {
                        ke[i][j] += w
                            * (mass * shape[i] * shape[j]
                                + ell2 * (grad[i][0] * grad[j][0] + grad[i][1] * grad[j][1]));
                    }
                }
            }
            (ke, fe)
        })
        .collect_into_vec(buffer);

    k.reset();
    rhs.fill(0.0);
    for (e, (ke, fe)) in buffer.iter().enumerate() {
        let elem = &mesh.elements[e];
        for i in 0..6 {
            rhs[elem[i]] += fe[i];
            for j in i..6 {
                k.add(elem[i], elem[j], ke[i][j]);
            }
        }
    }
}

/// Integral of the nodal phase field over the mesh.
pub fn integrate_phi(mesh: &Mesh, cache: &FemCache, phi: &[f64]) -> f64 {
    let mut total = 0.0;
    for (e, elem) in mesh.elements.iter().enumerate() {
        let det = cache.geoms[e].det_jacobian;
        for q in 0..N_QP {
            total += cache.rule.weights[q] * det * interp_nodal(&cache.shape[q], elem, phi);
        }
    }
    total
}
