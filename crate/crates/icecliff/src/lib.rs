//! Plane-strain finite-element simulation of crevasse growth and ice-cliff
//! collapse in grounded glaciers.
//!
//! The model couples a Maxwell visco-elastic rheology (linear elasticity plus
//! Glen-law creep) to a phase-field description of fracture whose crack
//! driving force is derived from a Mohr-Coulomb failure criterion, so that
//! both tensile crevassing and shear-driven cliff collapse are captured.
//! A staggered displacement / phase-field solver with adaptive time stepping
//! advances the coupled problem; sweep harnesses locate critical cliff
//! heights and marine stability envelopes.
//!
//! Layering, bottom to top:
//! - [`tensor`], [`material`]: value types and stress-invariant math,
//!   generic over the scalar type.
//! - [`constitutive`]: material-point physics (Hooke, creep, driving forces).
//! - [`mesh`]: structured quadratic-triangle meshes with quadrature.
//! - [`boundary`]: basal, terminus and restraint boundary conditions.
//! - [`band`], [`assembly`], [`solver`]: global FEM assembly and the
//!   staggered time-marching solver.
//! - [`analysis`]: failure detection, damage metrics, parametric sweeps.
//! - [`io`]: scenario configuration, VTK and CSV export.
//!
//! All internal computation uses SI base units (Pa, m, s, kg, K). Inputs
//! denominated in MPa are converted exactly once at configuration load.

pub mod analysis;
pub mod assembly;
pub mod band;
pub mod boundary;
pub mod constitutive;
pub mod io;
pub mod material;
pub mod mesh;
pub mod scalar;
pub mod selfcheck;
pub mod solver;
pub mod tensor;

pub use scalar::Real;

/// Stress tensor with the solver's concrete scalar type.
pub type Stress = tensor::SymmetricStress<f64>;
/// Strain tensor with the solver's concrete scalar type.
pub type Strain = tensor::SymmetricStrain<f64>;
/// Material constants with the solver's concrete scalar type.
pub type Material = material::MaterialParams<f64>;
