//! Crystal optics for designing non-collinear type-II down-conversion sources
//! in biaxial (BiBO) and uniaxial (BBO) crystals.
//!
//! Directions are unit vectors in the crystal-physical frame {e_i}; wavelengths
//! are in nm, thicknesses in mm, angles in degrees at the API boundary.

pub mod direction;
pub mod dispersion;
pub mod error;
pub mod nonlinearity;
pub mod numeric;
pub mod phasematch;
pub mod spectra;
pub mod waveoptics;

pub use direction::{Direction, Vec3};
pub use dispersion::{load_crystal, CrystalDefinition};
pub use error::{Error, Result};
pub use waveoptics::Mode;
