//! Unit propagation directions in the crystal-physical frame {e_i}.
//!
//! Spherical angles follow the anchor-validated convention: `psi` is the
//! azimuth in the (e1, e2) plane measured from e1 toward e2, and `rho` is the
//! elevation out of that plane toward e3, so that
//! `k = (cos rho cos psi, cos rho sin psi, sin rho)`.

use nalgebra::Vector3;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// A unit vector in {e_i}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction(Vec3);

impl Direction {
    /// Normalizes `v`; fails for zero or non-finite vectors.
    pub fn new(v: Vec3) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::InvalidInput(format!("cannot normalize vector {:?}", v.as_slice())));
        }
        Ok(Self(v / norm))
    }

    pub(crate) fn new_unchecked(v: Vec3) -> Self {
        Self(v / v.norm())
    }

    pub fn from_spherical_deg(psi_deg: f64, rho_deg: f64) -> Self {
        let (psi, rho) = (psi_deg.to_radians(), rho_deg.to_radians());
        Self(Vec3::new(rho.cos() * psi.cos(), rho.cos() * psi.sin(), rho.sin()))
    }

    /// Returns `(psi, rho)` in degrees with `psi` in (-180, 180] and `rho` in [-90, 90].
    pub fn to_spherical_deg(&self) -> (f64, f64) {
        let v = self.0;
        let psi = v.y.atan2(v.x).to_degrees();
        let rho = v.z.atan2(v.x.hypot(v.y)).to_degrees();
        (psi, rho)
    }

    pub fn e1() -> Self {
        Self(Vec3::x())
    }

    pub fn e2() -> Self {
        Self(Vec3::y())
    }

    pub fn e3() -> Self {
        Self(Vec3::z())
    }

    pub fn vector(&self) -> Vec3 {
        self.0
    }

    /// Angle to `other` in degrees, accurate for nearly parallel vectors.
    pub fn angle_deg(&self, other: &Direction) -> f64 {
        angle_between(&self.0, &other.0).to_degrees()
    }

    pub fn reversed(&self) -> Self {
        Self(-self.0)
    }

    /// An orthonormal pair spanning the plane perpendicular to this direction.
    pub fn transverse_basis(&self) -> (Vec3, Vec3) {
        let k = self.0;
        let seed = if k.z.abs() < 0.9 { Vec3::z() } else { Vec3::x() };
        let a = seed.cross(&k).normalize();
        let b = k.cross(&a);
        (a, b)
    }

    /// Rotates this direction by `theta` (rad) away from itself toward the
    /// transverse direction at azimuth `phi` (rad) in `transverse_basis`.
    pub fn offset(&self, theta: f64, phi: f64) -> Self {
        let (a, b) = self.transverse_basis();
        let t = a * phi.cos() + b * phi.sin();
        Self::new_unchecked(self.0 * theta.cos() + t * theta.sin())
    }

    /// Azimuth (rad) of `other` around this direction in `transverse_basis`.
    pub fn azimuth_of(&self, other: &Direction) -> f64 {
        let (a, b) = self.transverse_basis();
        other.0.dot(&b).atan2(other.0.dot(&a))
    }
}

impl Serialize for Direction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let (psi, rho) = self.to_spherical_deg();
        let mut st = s.serialize_struct("Direction", 3)?;
        st.serialize_field("psi_deg", &psi)?;
        st.serialize_field("rho_deg", &rho)?;
        st.serialize_field("vector", &[self.0.x, self.0.y, self.0.z])?;
        st.end()
    }
}

/// Angle between two vectors in radians via atan2 of cross and dot products.
pub fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}
