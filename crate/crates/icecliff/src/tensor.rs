//! Symmetric stress and strain tensors under plane-strain kinematics.
//!
//! Plane strain leaves four independent components: the two in-plane normal
//! components (`xx`, `zz`), the out-of-plane normal component (`yy`) and the
//! in-plane shear (`xz`). The out-of-plane component is stored explicitly
//! rather than reconstructed because the pressure invariant needs `syy` and
//! the viscous strain carries a nonzero out-of-plane deviatoric part.
//!
//! All invariant computations are pure functions of the four components.

use crate::scalar::Real;

/// Full 3D symmetric stress tensor restricted to plane-strain kinematics.
///
/// Components in Pa. `syy` is the out-of-plane normal stress, `sxz` the
/// tensorial in-plane shear.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymmetricStress<T> {
    pub sxx: T,
    pub szz: T,
    pub syy: T,
    pub sxz: T,
}

/// Symmetric strain tensor companion of [`SymmetricStress`].
///
/// Dimensionless; `exz` is the tensorial shear strain (half the engineering
/// shear).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymmetricStrain<T> {
    pub exx: T,
    pub ezz: T,
    pub eyy: T,
    pub exz: T,
}

impl<T: Real> SymmetricStress<T> {
    pub fn new(sxx: T, szz: T, syy: T, sxz: T) -> Self {
        Self { sxx, szz, syy, sxz }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    /// Maximum in-plane shear stress, the radius of the Mohr circle:
    /// `sqrt(((sxx - szz)/2)^2 + sxz^2)`.
    pub fn tau_max(&self) -> T {
        let half = T::of(0.5);
        let d = (self.sxx - self.szz) * half;
        (d * d + self.sxz * self.sxz).sqrt()
    }

    /// Maximum in-plane principal stress, `(sxx + szz)/2 + tau_max`.
    pub fn sigma1(&self) -> T {
        (self.sxx + self.szz) * T::of(0.5) + self.tau_max()
    }

    /// Minimum in-plane principal stress, `(sxx + szz)/2 - tau_max`.
    pub fn sigma2(&self) -> T {
        (self.sxx + self.szz) * T::of(0.5) - self.tau_max()
    }

    /// Isotropic pressure, positive in compression:
    /// `-(sxx + syy + szz)/3`.
    pub fn pressure(&self) -> T {
        -(self.sxx + self.syy + self.szz) / T::of(3.0)
    }

    /// Mean normal stress `(sxx + syy + szz)/3`.
    pub fn mean(&self) -> T {
        (self.sxx + self.syy + self.szz) / T::of(3.0)
    }

    /// Deviatoric part: the mean normal stress removed from all three
    /// normal components.
    pub fn deviator(&self) -> Self {
        let m = self.mean();
        Self::new(self.sxx - m, self.szz - m, self.syy - m, self.sxz)
    }

    /// Equivalent stress `sqrt(1/2 s':s')` with `s'` the deviator; the
    /// tensor contraction counts the shear component twice.
    pub fn equivalent(&self) -> T {
        let d = self.deviator();
        let two = T::of(2.0);
        let sq =
            d.sxx * d.sxx + d.szz * d.szz + d.syy * d.syy + two * d.sxz * d.sxz;
        (sq * T::of(0.5)).sqrt()
    }

    /// The three principal stresses: both in-plane eigenvalues plus the
    /// out-of-plane component, unsorted.
    pub fn principal(&self) -> [T; 3] {
        [self.sigma1(), self.sigma2(), self.syy]
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.sxx + other.sxx,
            self.szz + other.szz,
            self.syy + other.syy,
            self.sxz + other.sxz,
        )
    }

    pub fn scale(&self, a: T) -> Self {
        Self::new(self.sxx * a, self.szz * a, self.syy * a, self.sxz * a)
    }
}

impl<T: Real> SymmetricStrain<T> {
    pub fn new(exx: T, ezz: T, eyy: T, exz: T) -> Self {
        Self { exx, ezz, eyy, exz }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn trace(&self) -> T {
        self.exx + self.ezz + self.eyy
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.exx + other.exx,
            self.ezz + other.ezz,
            self.eyy + other.eyy,
            self.exz + other.exz,
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(
            self.exx - other.exx,
            self.ezz - other.ezz,
            self.eyy - other.eyy,
            self.exz - other.exz,
        )
    }

    pub fn scale(&self, a: T) -> Self {
        Self::new(self.exx * a, self.ezz * a, self.eyy * a, self.exz * a)
    }
}
