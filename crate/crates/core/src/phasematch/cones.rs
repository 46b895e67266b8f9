use rayon::prelude::*;
use serde::Serialize;

use super::geometry::fit_cone_axis;
use super::{PdcProcess, ProcessMedia, MISMATCH_THRESHOLD};
use crate::direction::{angle_between, Direction, Vec3};
use crate::dispersion::CrystalDefinition;
use crate::error::{Error, Result};
use crate::numeric::golden_section_min;
use crate::waveoptics::Mode;

/// Sampling of the non-collinear search around the pump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeOptions {
    pub azimuth_count: usize,
    pub threshold: f64,
    /// Coarse polar-offset grid, degrees.
    pub coarse_step_deg: f64,
    /// Largest polar offset searched, degrees.
    pub max_offset_deg: f64,
}

impl Default for ConeOptions {
    fn default() -> Self {
        Self { azimuth_count: 720, threshold: MISMATCH_THRESHOLD, coarse_step_deg: 0.01, max_offset_deg: 8.0 }
    }
}

/// One emission cone. Entry `i` of the slow cone and entry `i` of the fast
/// cone are the two photons of the same pair.
#[derive(Debug, Clone, Serialize)]
pub struct EmissionCone {
    pub mode: Mode,
    pub lambda_nm: f64,
    /// Azimuth of each internal direction around the pump, degrees.
    pub azimuth_deg: Vec<f64>,
    pub internal: Vec<Direction>,
    pub external: Vec<Direction>,
    pub relative_mismatch: Vec<f64>,
    /// Best-fit axis of the external directions.
    pub axis: Option<Direction>,
    /// Mean external angle from `axis`, degrees.
    pub angular_radius_deg: f64,
    pub angular_width_deg: Option<f64>,
}

impl EmissionCone {
    fn empty(mode: Mode, lambda_nm: f64) -> Self {
        Self {
            mode,
            lambda_nm,
            azimuth_deg: Vec::new(),
            internal: Vec::new(),
            external: Vec::new(),
            relative_mismatch: Vec::new(),
            axis: None,
            angular_radius_deg: 0.0,
            angular_width_deg: None,
        }
    }

    pub fn len(&self) -> usize {
        self.internal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.internal.is_empty()
    }

    fn finish(&mut self) {
        if let Some((axis, radius)) = fit_cone_axis(&self.external) {
            self.axis = Some(axis);
            self.angular_radius_deg = radius;
        }
    }
}

struct PairPoint {
    signal: Vec3,
    idler: Vec3,
    relative_mismatch: f64,
}

impl ProcessMedia {
    /// Signal at polar offset `theta` and azimuth `phi` about the pump; the idler
    /// takes the momentum-conserving direction. Returns (signed residual, pair).
    fn pair_at(&self, pump: &Direction, k_pump: &Vec3, theta: f64, phi: f64) -> (f64, PairPoint) {
        let signal = pump.offset(theta, phi).vector();
        let q = k_pump - self.signal_k(&signal);
        let idler = q.normalize();
        let residual = q.norm() - self.idler_k(&idler).norm();
        let relative_mismatch = residual.abs() / k_pump.norm();
        (residual, PairPoint { signal, idler, relative_mismatch })
    }
}

/// Traces the slow and fast emission cones for a pump along `pump_dir`.
pub fn emission_cones(
    crystal: &CrystalDefinition,
    process: &PdcProcess,
    pump_dir: &Direction,
    options: ConeOptions,
) -> Result<(EmissionCone, EmissionCone)> {
    if options.azimuth_count < 3 || !(options.coarse_step_deg > 0.0 && options.max_offset_deg > options.coarse_step_deg) {
        return Err(Error::InvalidInput("cone search needs ≥3 azimuths and 0 < coarse step < max offset".into()));
    }
    let media = process.media(crystal)?;
    let k_pump = media.pump_k(&pump_dir.vector());
    let step = options.coarse_step_deg.to_radians();
    let n_theta = (options.max_offset_deg / options.coarse_step_deg).round() as usize;

    let per_azimuth: Vec<Vec<PairPoint>> = (0..options.azimuth_count)
        .into_par_iter()
        .map(|i| {
            let phi = 2.0 * std::f64::consts::PI * i as f64 / options.azimuth_count as f64;
            let residual = |theta: f64| media.pair_at(pump_dir, &k_pump, theta, phi).0;
            let mut found = Vec::new();
            let mut prev = residual(step);
            for j in 2..=n_theta {
                let cur = residual(step * j as f64);
                if prev * cur <= 0.0 {
                    let (lo, hi) = (step * (j - 1) as f64, step * j as f64);
                    let (theta, _) = golden_section_min(|t| residual(t).abs(), lo, hi, 1e-14);
                    let (_, pair) = media.pair_at(pump_dir, &k_pump, theta, phi);
                    if pair.relative_mismatch < options.threshold {
                        found.push(pair);
                    }
                }
                prev = cur;
            }
            found
        })
        .collect();

    // Closed polylines: inner roots in azimuth order, then any outer roots in reverse.
    let max_roots = per_azimuth.iter().map(Vec::len).max().unwrap_or(0);
    let mut ordered: Vec<&PairPoint> = Vec::new();
    for r in 0..max_roots {
        let branch = per_azimuth.iter().filter_map(|v| v.get(r));
        if r % 2 == 0 {
            ordered.extend(branch);
        } else {
            ordered.extend(branch.collect::<Vec<_>>().into_iter().rev());
        }
    }

    let mut slow = EmissionCone::empty(Mode::Slow, process.wavelength_of(Mode::Slow));
    let mut fast = EmissionCone::empty(Mode::Fast, process.wavelength_of(Mode::Fast));
    let normal = pump_dir.vector();
    for p in ordered {
        let signal_ext = refract_external(
            &Direction::new_unchecked(p.signal),
            media.signal.index(&p.signal, process.signal_mode),
            &Direction::new_unchecked(normal),
        )?;
        let idler_ext = refract_external(
            &Direction::new_unchecked(p.idler),
            media.idler.index(&p.idler, process.idler_mode),
            &Direction::new_unchecked(normal),
        )?;
        let entries = [(process.signal_mode, p.signal, signal_ext), (process.idler_mode, p.idler, idler_ext)];
        for (k, (mode, internal, external)) in entries.into_iter().enumerate() {
            // Degenerate-mode processes put the signal on the first cone and the idler on the second.
            let cone = match (mode, process.signal_mode == process.idler_mode, k) {
                (_, true, 0) | (Mode::Slow, false, _) => &mut slow,
                _ => &mut fast,
            };
            cone.azimuth_deg.push(pump_dir.azimuth_of(&Direction::new_unchecked(internal)).to_degrees());
            cone.internal.push(Direction::new_unchecked(internal));
            cone.external.push(external);
            cone.relative_mismatch.push(p.relative_mismatch);
        }
    }
    if slow.is_empty() {
        return Err(Error::NoPhaseMatching(format!(
            "no non-collinear solutions below threshold {:e} around the pump direction",
            options.threshold
        )));
    }
    slow.finish();
    fast.finish();
    Ok((slow, fast))
}

/// Refraction from the crystal into air through a facet with normal `facet_normal`:
/// the tangential wave-vector component is conserved, n·sin θ_in = sin θ_out.
pub fn refract_external(internal: &Direction, mode_index: f64, facet_normal: &Direction) -> Result<Direction> {
    refract(internal, mode_index, facet_normal)
}

/// Inverse of `refract_external` for a known internal mode index.
pub fn refract_internal(external: &Direction, mode_index: f64, facet_normal: &Direction) -> Result<Direction> {
    refract(external, 1.0 / mode_index, facet_normal)
}

fn refract(d: &Direction, ratio: f64, facet_normal: &Direction) -> Result<Direction> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(Error::InvalidInput(format!("index ratio must be positive, got {ratio}")));
    }
    let n = facet_normal.vector();
    let v = d.vector();
    let cos_in = v.dot(&n);
    let tangential = (v - n * cos_in) * ratio;
    let t2 = tangential.norm_squared();
    if t2 > 1.0 {
        return Err(Error::TotalInternalReflection { incidence_deg: angle_between(&v, &(n * cos_in.signum())).to_degrees() });
    }
    let normal_part = n * ((1.0 - t2).sqrt() * if cos_in < 0.0 { -1.0 } else { 1.0 });
    Ok(Direction::new_unchecked(tangential + normal_part))
}
