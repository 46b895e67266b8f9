use serde::Serialize;

use super::{complement_wavelength, emission_cones, ConeOptions, PdcProcess};
use crate::direction::Direction;
use crate::dispersion::CrystalDefinition;
use crate::error::{Error, Result};
use crate::numeric::linear_slope;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PumpSweepRow {
    pub lambda_pump_nm: f64,
    /// Radius of the slow circle at the fixed down-converted wavelength, degrees.
    pub slow_radius_deg: f64,
    /// Radius of the fast circle at the fixed down-converted wavelength, degrees.
    pub fast_radius_deg: f64,
    pub slow_normalized: f64,
    pub fast_normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PumpSweep {
    pub lambda_dc_nm: f64,
    pub reference_slow_radius_deg: f64,
    pub reference_fast_radius_deg: f64,
    pub rows: Vec<PumpSweepRow>,
    /// Least-squares slopes of the normalized radii, nm⁻¹.
    pub slow_slope_per_nm: f64,
    pub fast_slope_per_nm: f64,
    pub slope_ratio: f64,
    /// Radius spread over the swept pump range, degrees.
    pub slow_width_deg: f64,
    pub fast_width_deg: f64,
    pub width_ratio: f64,
}

fn radius(crystal: &CrystalDefinition, process: &PdcProcess, pump: &Direction, options: ConeOptions, slow: bool) -> Result<f64> {
    let (s, f) = emission_cones(crystal, process, pump, options)?;
    Ok(if slow { s.angular_radius_deg } else { f.angular_radius_deg })
}

fn spread(v: impl Iterator<Item = f64> + Clone) -> f64 {
    v.clone().fold(f64::NEG_INFINITY, f64::max) - v.fold(f64::INFINITY, f64::min)
}

/// Radii of the circles at `lambda_dc_nm` for each pump wavelength: the slow
/// circle from fast(λ_f) → slow(λ_dc) + fast(partner) and the fast circle from
/// fast(λ_f) → slow(partner) + fast(λ_dc), normalized by the degenerate radii.
pub fn pump_bandwidth_sweep(
    crystal: &CrystalDefinition,
    pump_dir: &Direction,
    pump_nm: &[f64],
    lambda_dc_nm: f64,
    options: ConeOptions,
) -> Result<PumpSweep> {
    if pump_nm.len() < 2 {
        return Err(Error::InvalidInput("pump sweep needs at least two wavelengths".into()));
    }
    let reference = PdcProcess::degenerate_fsf(lambda_dc_nm / 2.0)?;
    let (ref_s, ref_f) = emission_cones(crystal, &reference, pump_dir, options)?;
    let (r0s, r0f) = (ref_s.angular_radius_deg, ref_f.angular_radius_deg);
    let rows = pump_nm
        .iter()
        .map(|&lp| {
            let slow_radius_deg = radius(crystal, &PdcProcess::fsf(lp, lambda_dc_nm)?, pump_dir, options, true)?;
            let fast_radius_deg = radius(crystal, &PdcProcess::fsf_with_fast(lp, lambda_dc_nm)?, pump_dir, options, false)?;
            Ok(PumpSweepRow {
                lambda_pump_nm: lp,
                slow_radius_deg,
                fast_radius_deg,
                slow_normalized: slow_radius_deg / r0s,
                fast_normalized: fast_radius_deg / r0f,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = rows.iter().map(|r| r.lambda_pump_nm).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.slow_normalized).collect();
    let yf: Vec<f64> = rows.iter().map(|r| r.fast_normalized).collect();
    let (slow_slope, fast_slope) = (linear_slope(&x, &ys), linear_slope(&x, &yf));
    let slow_width = spread(rows.iter().map(|r| r.slow_radius_deg));
    let fast_width = spread(rows.iter().map(|r| r.fast_radius_deg));
    Ok(PumpSweep {
        lambda_dc_nm,
        reference_slow_radius_deg: r0s,
        reference_fast_radius_deg: r0f,
        rows,
        slow_slope_per_nm: slow_slope,
        fast_slope_per_nm: fast_slope,
        slope_ratio: slow_slope / fast_slope,
        slow_width_deg: slow_width,
        fast_width_deg: fast_width,
        width_ratio: slow_width / fast_width,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterSweepRow {
    pub lambda_slow_nm: f64,
    pub lambda_fast_nm: f64,
    pub slow_radius_deg: f64,
    pub fast_radius_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterSweep {
    pub lambda_pump_nm: f64,
    pub rows: Vec<FilterSweepRow>,
    pub slow_spread_deg: f64,
    pub fast_spread_deg: f64,
    pub spread_ratio: f64,
}

/// Circle radii for the filter-edge processes fast(λ_f) → slow(edge) + fast(partner),
/// for each edge wavelength given.
pub fn filter_bandwidth_sweep(
    crystal: &CrystalDefinition,
    pump_dir: &Direction,
    lambda_pump_nm: f64,
    slow_nm: &[f64],
    options: ConeOptions,
) -> Result<FilterSweep> {
    if slow_nm.is_empty() {
        return Err(Error::InvalidInput("filter sweep needs at least one edge wavelength".into()));
    }
    let rows = slow_nm
        .iter()
        .map(|&ls| {
            let process = PdcProcess::fsf(lambda_pump_nm, ls)?;
            let (s, f) = emission_cones(crystal, &process, pump_dir, options)?;
            Ok(FilterSweepRow {
                lambda_slow_nm: ls,
                lambda_fast_nm: complement_wavelength(lambda_pump_nm, ls)?,
                slow_radius_deg: s.angular_radius_deg,
                fast_radius_deg: f.angular_radius_deg,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let slow_spread = spread(rows.iter().map(|r| r.slow_radius_deg));
    let fast_spread = spread(rows.iter().map(|r| r.fast_radius_deg));
    Ok(FilterSweep {
        lambda_pump_nm,
        rows,
        slow_spread_deg: slow_spread,
        fast_spread_deg: fast_spread,
        spread_ratio: slow_spread / fast_spread,
    })
}
