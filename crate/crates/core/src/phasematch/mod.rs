//! Type-II phase matching: collinear curves, emission cones and their geometry.
//!
//! Photon bookkeeping: the signal is the slow photon and the idler the fast
//! photon. Wave vectors are in rad/µm.

mod cones;
mod geometry;
mod stereo;
mod sweep;

pub use cones::{emission_cones, refract_external, refract_internal, ConeOptions, EmissionCone};
pub use geometry::{cone_geometry, fit_cone_axis, IntersectionPoint, PdcGeometry};
pub use stereo::{fit_circle, stereographic_project, CircleFit, StereoPoint};
pub use sweep::{filter_bandwidth_sweep, pump_bandwidth_sweep, FilterSweep, FilterSweepRow, PumpSweep, PumpSweepRow};

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::direction::{Direction, Vec3};
use crate::dispersion::CrystalDefinition;
use crate::error::{Error, Result};
use crate::numeric::{brent_root, golden_section_min};
use crate::waveoptics::{Medium, Mode};

/// Cone points must satisfy |Δk|/|k_f| below this value.
pub const MISMATCH_THRESHOLD: f64 = 5e-5;
/// Allowed relative violation of 1/λ_f = 1/λ_s + 1/λ_i.
pub const ENERGY_TOLERANCE: f64 = 1e-9;

/// A three-wave down-conversion process with its polarization assignment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PdcProcess {
    pub lambda_pump_nm: f64,
    pub lambda_signal_nm: f64,
    pub lambda_idler_nm: f64,
    pub pump_mode: Mode,
    pub signal_mode: Mode,
    pub idler_mode: Mode,
}

impl PdcProcess {
    pub fn new(lambda_pump_nm: f64, lambda_signal_nm: f64, lambda_idler_nm: f64, modes: (Mode, Mode, Mode)) -> Result<Self> {
        let all = [lambda_pump_nm, lambda_signal_nm, lambda_idler_nm];
        if all.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidInput(format!("wavelengths must be positive, got {all:?}")));
        }
        let residual = (1.0 / lambda_pump_nm - 1.0 / lambda_signal_nm - 1.0 / lambda_idler_nm).abs() * lambda_pump_nm;
        if residual > ENERGY_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "energy not conserved: 1/{lambda_pump_nm} ≠ 1/{lambda_signal_nm} + 1/{lambda_idler_nm} (relative {residual:e})"
            )));
        }
        let (pump_mode, signal_mode, idler_mode) = modes;
        Ok(Self { lambda_pump_nm, lambda_signal_nm, lambda_idler_nm, pump_mode, signal_mode, idler_mode })
    }

    /// fast(λ_f) → slow(λ_slow) + fast(partner).
    pub fn fsf(lambda_pump_nm: f64, lambda_slow_nm: f64) -> Result<Self> {
        let partner = complement_wavelength(lambda_pump_nm, lambda_slow_nm)?;
        Self::new(lambda_pump_nm, lambda_slow_nm, partner, (Mode::Fast, Mode::Slow, Mode::Fast))
    }

    /// fast(λ_f) → slow(partner) + fast(λ_fast).
    pub fn fsf_with_fast(lambda_pump_nm: f64, lambda_fast_nm: f64) -> Result<Self> {
        let partner = complement_wavelength(lambda_pump_nm, lambda_fast_nm)?;
        Self::new(lambda_pump_nm, partner, lambda_fast_nm, (Mode::Fast, Mode::Slow, Mode::Fast))
    }

    /// Frequency-degenerate fast → slow + fast.
    pub fn degenerate_fsf(lambda_pump_nm: f64) -> Result<Self> {
        Self::fsf(lambda_pump_nm, 2.0 * lambda_pump_nm)
    }

    pub fn wavelength_of(&self, mode: Mode) -> f64 {
        if self.signal_mode == mode {
            self.lambda_signal_nm
        } else {
            self.lambda_idler_nm
        }
    }

    /// Per-wave media for repeated wave-vector evaluation.
    pub fn media(&self, crystal: &CrystalDefinition) -> Result<ProcessMedia> {
        Ok(ProcessMedia {
            pump: Medium::new(crystal, self.lambda_pump_nm)?,
            signal: Medium::new(crystal, self.lambda_signal_nm)?,
            idler: Medium::new(crystal, self.lambda_idler_nm)?,
            process: *self,
        })
    }
}

/// Wavelength completing energy conservation with `lambda_pump_nm` and `lambda_nm`.
pub fn complement_wavelength(lambda_pump_nm: f64, lambda_nm: f64) -> Result<f64> {
    let inv = 1.0 / lambda_pump_nm - 1.0 / lambda_nm;
    if !(lambda_pump_nm > 0.0 && inv > 0.0 && inv.is_finite()) {
        return Err(Error::InvalidInput(format!("{lambda_nm} nm cannot be produced from a {lambda_pump_nm} nm pump")));
    }
    Ok(1.0 / inv)
}

/// The three waves of a process, each with its wavelength-specific medium.
#[derive(Debug, Clone, Copy)]
pub struct ProcessMedia {
    pub pump: Medium,
    pub signal: Medium,
    pub idler: Medium,
    pub process: PdcProcess,
}

impl ProcessMedia {
    fn wavevector(medium: &Medium, mode: Mode, lambda_nm: f64, dir: &Vec3) -> Vec3 {
        dir * (2.0 * PI * medium.index(dir, mode) / (lambda_nm * 1e-3))
    }

    pub fn pump_k(&self, dir: &Vec3) -> Vec3 {
        Self::wavevector(&self.pump, self.process.pump_mode, self.process.lambda_pump_nm, dir)
    }

    pub fn signal_k(&self, dir: &Vec3) -> Vec3 {
        Self::wavevector(&self.signal, self.process.signal_mode, self.process.lambda_signal_nm, dir)
    }

    pub fn idler_k(&self, dir: &Vec3) -> Vec3 {
        Self::wavevector(&self.idler, self.process.idler_mode, self.process.lambda_idler_nm, dir)
    }

    /// Scalar collinear mismatch |k_s| + |k_i| − |k_f| along `dir`, rad/µm.
    pub fn collinear_mismatch(&self, dir: &Vec3) -> f64 {
        self.signal_k(dir).norm() + self.idler_k(dir).norm() - self.pump_k(dir).norm()
    }
}

/// Phase-mismatch vector Δk = k_s + k_i − k_f and its size relative to |k_f|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MismatchResult {
    pub delta_k: [f64; 3],
    pub relative_mismatch: f64,
}

pub fn mismatch(
    crystal: &CrystalDefinition,
    process: &PdcProcess,
    pump_dir: &Direction,
    signal_dir: &Direction,
    idler_dir: &Direction,
) -> Result<MismatchResult> {
    let m = process.media(crystal)?;
    let kf = m.pump_k(&pump_dir.vector());
    let dk = m.signal_k(&signal_dir.vector()) + m.idler_k(&idler_dir.vector()) - kf;
    Ok(MismatchResult { delta_k: [dk.x, dk.y, dk.z], relative_mismatch: dk.norm() / kf.norm() })
}

/// Sampling of the collinear-curve scan, degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollinearScan {
    pub psi_step_deg: f64,
    pub rho_step_deg: f64,
}

impl Default for CollinearScan {
    fn default() -> Self {
        Self { psi_step_deg: 0.25, rho_step_deg: 0.5 }
    }
}

/// Collinear phase-matching directions over the symmetry quadrant
/// ψ ∈ [0°, 90°], ρ ∈ [−90°, 90°], ordered by ψ then ρ.
pub fn collinear_curve(crystal: &CrystalDefinition, process: &PdcProcess, scan: CollinearScan) -> Result<Vec<Direction>> {
    if !(scan.psi_step_deg > 0.0 && scan.rho_step_deg > 0.0) {
        return Err(Error::InvalidInput("scan steps must be positive".into()));
    }
    let media = process.media(crystal)?;
    let n_psi = (90.0 / scan.psi_step_deg).round() as usize;
    let n_rho = (180.0 / scan.rho_step_deg).round() as usize;
    let points: Vec<Direction> = (0..=n_psi)
        .into_par_iter()
        .flat_map_iter(|i| {
            let psi = 90.0 * i as f64 / n_psi as f64;
            let g = |rho: f64| media.collinear_mismatch(&Direction::from_spherical_deg(psi, rho).vector());
            let rhos: Vec<f64> = (0..=n_rho).map(|j| -90.0 + 180.0 * j as f64 / n_rho as f64).collect();
            let values: Vec<f64> = rhos.iter().map(|&r| g(r)).collect();
            let mut roots = Vec::new();
            for j in 0..n_rho {
                if values[j] == 0.0 {
                    roots.push(rhos[j]);
                } else if values[j] * values[j + 1] < 0.0 {
                    if let Some(r) = brent_root(g, rhos[j], rhos[j + 1], 1e-12) {
                        roots.push(r);
                    }
                }
            }
            roots.into_iter().map(move |r| Direction::from_spherical_deg(psi, r))
        })
        .collect();
    if points.is_empty() {
        return Err(Error::NoPhaseMatching(format!(
            "no collinear solution for {} → {} + {} nm",
            process.lambda_pump_nm, process.lambda_signal_nm, process.lambda_idler_nm
        )));
    }
    Ok(points)
}

/// The collinear phase-matching direction closest to `near`, searched within `max_offset_deg`.
pub fn nearest_collinear_direction(
    crystal: &CrystalDefinition,
    process: &PdcProcess,
    near: &Direction,
    max_offset_deg: f64,
) -> Result<Direction> {
    let media = process.media(crystal)?;
    let g = |d: &Direction| media.collinear_mismatch(&d.vector());
    if g(near) == 0.0 {
        return Ok(*near);
    }
    let max = max_offset_deg.to_radians();
    let steps = 400;
    // Smallest offset along azimuth phi at which the collinear mismatch changes sign.
    let offset_at = |phi: f64| -> f64 {
        let mut prev = g(near);
        for j in 1..=steps {
            let theta = max * j as f64 / steps as f64;
            let cur = g(&near.offset(theta, phi));
            if prev * cur <= 0.0 {
                let lo = max * (j - 1) as f64 / steps as f64;
                return brent_root(|t| g(&near.offset(t, phi)), lo, theta, 1e-15).unwrap_or(theta);
            }
            prev = cur;
        }
        f64::INFINITY
    };
    let n_phi = 360;
    let coarse: Vec<f64> = (0..n_phi).map(|i| offset_at(2.0 * PI * i as f64 / n_phi as f64)).collect();
    let (best, best_val) = coarse.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, v)| (i, *v)).expect("non-empty");
    if !best_val.is_finite() {
        return Err(Error::NoPhaseMatching(format!("no collinear direction within {max_offset_deg}°")));
    }
    let width = 2.0 * PI / n_phi as f64;
    let phi0 = 2.0 * PI * best as f64 / n_phi as f64;
    let (phi, theta) = golden_section_min(offset_at, phi0 - width, phi0 + width, 1e-10);
    Ok(near.offset(theta, phi))
}
