//! Effective second-order nonlinearity of type-II interactions.
//!
//! d_eff is the full contraction Σ a_f,i d_ijk a_s,j a_i,k of the d tensor with
//! the unit D vectors of pump, signal and idler, evaluated in {e_i}.

use rayon::prelude::*;
use serde::Serialize;

use crate::direction::{Direction, Vec3};
use crate::dispersion::{CrystalDefinition, FrameRotation, TensorFrame};
use crate::error::{Error, Result};
use crate::numeric::golden_section_min;
use crate::phasematch::{collinear_curve, cone_geometry, emission_cones, CollinearScan, ConeOptions, PdcProcess, ProcessMedia};
use crate::waveoptics::{Medium, Mode};

pub type Tensor3 = [[[f64; 3]; 3]; 3];

/// Contracted index of the symmetric pair (j, k).
pub fn voigt(j: usize, k: usize) -> usize {
    match (j.min(k), j.max(k)) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (1, 2) => 3,
        (0, 2) => 4,
        _ => 5,
    }
}

/// A 3×6 contracted d-matrix, pm/V.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonlinearTensor {
    pub contracted: [[f64; 6]; 3],
    #[serde(skip)]
    pub frame: TensorFrame,
    pub kleinman: bool,
}

impl NonlinearTensor {
    /// The crystal's Kleinman set, or its full set when `kleinman` is false.
    pub fn from_crystal(crystal: &CrystalDefinition, kleinman: bool) -> Result<Self> {
        let contracted = if kleinman {
            crystal.d_matrix.kleinman
        } else {
            crystal.d_matrix.full.ok_or(Error::MissingTensor("kleinman=false (full d-matrix absent)"))?
        };
        Ok(Self { contracted, frame: crystal.d_matrix.frame, kleinman })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { contracted: self.contracted.map(|r| r.map(|v| v * s)), ..*self }
    }

    pub fn expand(&self) -> Tensor3 {
        let mut t = [[[0.0; 3]; 3]; 3];
        for (i, plane) in t.iter_mut().enumerate() {
            for (j, row) in plane.iter_mut().enumerate() {
                for (k, v) in row.iter_mut().enumerate() {
                    *v = self.contracted[i][voigt(j, k)];
                }
            }
        }
        t
    }

    /// Full tensor in {e_i}.
    pub fn physical(&self, crystal: &CrystalDefinition) -> Tensor3 {
        let t = self.expand();
        match self.frame {
            TensorFrame::Physical => t,
            TensorFrame::Indicatrix { reference_nm } => {
                let r = FrameRotation::about_e2(crystal.phi.phi_deg(reference_nm), reference_nm);
                rotate_tensor(&t, &r.matrix)
            }
        }
    }
}

/// t'_ijk = M_il M_jm M_kn t_lmn.
pub fn rotate_tensor(t: &Tensor3, m: &nalgebra::Matrix3<f64>) -> Tensor3 {
    let mut out = [[[0.0; 3]; 3]; 3];
    for (i, plane) in out.iter_mut().enumerate() {
        for (j, row) in plane.iter_mut().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                let mut s = 0.0;
                for l in 0..3 {
                    for mm in 0..3 {
                        for n in 0..3 {
                            s += m[(i, l)] * m[(j, mm)] * m[(k, n)] * t[l][mm][n];
                        }
                    }
                }
                *v = s;
            }
        }
    }
    out
}

pub fn contract(t: &Tensor3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let mut s = 0.0;
    for (i, plane) in t.iter().enumerate() {
        for (j, row) in plane.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                s += a[i] * v * b[j] * c[k];
            }
        }
    }
    s
}

fn d_vector(medium: &Medium, k: &Vec3, mode: Mode) -> Result<Vec3> {
    let (f, s) = medium.polarizations(k)?;
    Ok(match mode {
        Mode::Fast => f,
        Mode::Slow => s,
    })
}

fn deff_with(media: &ProcessMedia, tensor: &Tensor3, k: &Vec3) -> Result<f64> {
    let p = media.process;
    let a = d_vector(&media.pump, k, p.pump_mode)?;
    let b = d_vector(&media.signal, k, p.signal_mode)?;
    let c = d_vector(&media.idler, k, p.idler_mode)?;
    Ok(contract(tensor, &a, &b, &c).abs())
}

/// |d_eff| (pm/V) for collinear propagation of all three waves along `direction`.
pub fn deff_collinear(crystal: &CrystalDefinition, direction: &Direction, process: &PdcProcess, kleinman: bool) -> Result<f64> {
    let tensor = NonlinearTensor::from_crystal(crystal, kleinman)?.physical(crystal);
    deff_with(&process.media(crystal)?, &tensor, &direction.vector())
}

/// Rectangular (ψ, ρ) grid, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub psi_min_deg: f64,
    pub psi_max_deg: f64,
    pub rho_min_deg: f64,
    pub rho_max_deg: f64,
    pub step_deg: f64,
}

impl Default for GridSpec {
    /// The symmetry quadrant ψ ∈ [0°, 90°], ρ ∈ [−90°, 90°] at 0.25°.
    fn default() -> Self {
        Self { psi_min_deg: 0.0, psi_max_deg: 90.0, rho_min_deg: -90.0, rho_max_deg: 90.0, step_deg: 0.25 }
    }
}

impl GridSpec {
    fn axis(min: f64, max: f64, step: f64) -> Vec<f64> {
        let n = ((max - min) / step).round() as usize;
        (0..=n).map(|i| min + step * i as f64).collect()
    }

    pub fn psi(&self) -> Vec<f64> {
        Self::axis(self.psi_min_deg, self.psi_max_deg, self.step_deg)
    }

    pub fn rho(&self) -> Vec<f64> {
        Self::axis(self.rho_min_deg, self.rho_max_deg, self.step_deg)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.step_deg > 0.0 && self.psi_max_deg >= self.psi_min_deg && self.rho_max_deg >= self.rho_min_deg;
        if !ok || self.rho_min_deg < -90.0 || self.rho_max_deg > 90.0 {
            return Err(Error::InvalidInput(format!("bad grid {self:?}")));
        }
        Ok(())
    }
}

/// d_eff over a (ψ, ρ) grid; `values[i * rho.len() + j]` belongs to (psi[i], rho[j]).
#[derive(Debug, Clone, Serialize)]
pub struct DeffMap {
    pub psi_deg: Vec<f64>,
    pub rho_deg: Vec<f64>,
    /// `None` where a polarization is undefined (optic axis).
    pub values: Vec<Option<f64>>,
    pub process: PdcProcess,
    pub kleinman: bool,
    pub collinear_curve: Vec<Direction>,
}

impl DeffMap {
    pub fn max(&self) -> Option<(f64, f64, f64)> {
        let nr = self.rho_deg.len();
        self.values
            .iter()
            .enumerate()
            .filter_map(|(idx, v)| v.map(|v| (self.psi_deg[idx / nr], self.rho_deg[idx % nr], v)))
            .max_by(|a, b| a.2.total_cmp(&b.2))
    }
}

pub fn deff_map(crystal: &CrystalDefinition, grid: &GridSpec, process: &PdcProcess, kleinman: bool) -> Result<DeffMap> {
    grid.validate()?;
    let tensor = NonlinearTensor::from_crystal(crystal, kleinman)?.physical(crystal);
    let media = process.media(crystal)?;
    let (psi, rho) = (grid.psi(), grid.rho());
    let values: Vec<Option<f64>> = psi
        .par_iter()
        .flat_map_iter(|&p| {
            let media = &media;
            let tensor = &tensor;
            rho.iter().map(move |&r| deff_with(media, tensor, &Direction::from_spherical_deg(p, r).vector()).ok())
        })
        .collect();
    let collinear_curve = collinear_curve(crystal, process, CollinearScan::default()).unwrap_or_default();
    Ok(DeffMap { psi_deg: psi, rho_deg: rho, values, process: *process, kleinman, collinear_curve })
}

/// Settings of the pump-direction design search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignScanOptions {
    pub target_angle_deg: f64,
    pub window_deg: f64,
    pub kleinman: bool,
    /// ψ spacing of the collinear curve walk, degrees.
    pub psi_step_deg: f64,
    /// Largest pump offset from the curve, degrees.
    pub max_offset_deg: f64,
    /// Resolution of the pump offset, degrees.
    pub offset_resolution_deg: f64,
    /// Curve points are visited in order of decreasing d_eff; the walk stops
    /// after this many candidates or `max_evaluations` visited points.
    pub max_candidates: usize,
    pub max_evaluations: usize,
    pub cones: ConeOptions,
}

impl Default for DesignScanOptions {
    fn default() -> Self {
        Self {
            target_angle_deg: 90.0,
            window_deg: 2.0,
            kleinman: true,
            psi_step_deg: 1.0,
            max_offset_deg: 2.0,
            offset_resolution_deg: 0.02,
            max_candidates: 5,
            max_evaluations: 24,
            cones: ConeOptions { azimuth_count: 240, coarse_step_deg: 0.02, max_offset_deg: 6.0, ..ConeOptions::default() },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DesignCandidate {
    pub pump: Direction,
    pub collinear_point: Direction,
    pub offset_deg: f64,
    pub deff_pm_per_v: f64,
    pub intersection_angle_deg: f64,
}

/// Pump directions next to the collinear curve whose cones cross at the target
/// angle, ranked by d_eff.
pub fn design_scan(
    crystal: &CrystalDefinition,
    process: &PdcProcess,
    options: DesignScanOptions,
) -> Result<Vec<DesignCandidate>> {
    let curve = collinear_curve(crystal, process, CollinearScan { psi_step_deg: options.psi_step_deg, rho_step_deg: 0.5 })?;
    let tensor = NonlinearTensor::from_crystal(crystal, options.kleinman)?.physical(crystal);
    let media = process.media(crystal)?;
    let deff_at = |d: &Direction| deff_with(&media, &tensor, &d.vector());

    let mut visits: Vec<(usize, f64)> = curve.iter().enumerate().filter_map(|(i, d)| deff_at(d).ok().map(|v| (i, v))).collect();
    visits.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let angle_at = |pump: &Direction| -> Option<f64> {
        let (s, f) = emission_cones(crystal, process, pump, options.cones).ok()?;
        cone_geometry(&s, &f, pump).ok().map(|g| g.intersection_angle_deg)
    };

    let mut out = Vec::new();
    for &(i, _) in visits.iter().take(options.max_evaluations) {
        if out.len() >= options.max_candidates {
            break;
        }
        let Some(normal) = curve_normal(&curve, i) else { continue };
        let c = curve[i];
        for sign in [1.0, -1.0] {
            let at = |delta: f64| {
                Direction::new_unchecked(c.vector() * delta.to_radians().cos() + normal * (sign * delta.to_radians().sin()))
            };
            if let Some((delta, angle)) = offset_for_angle(&at, &angle_at, &options) {
                let pump = at(delta);
                if (angle - options.target_angle_deg).abs() <= options.window_deg {
                    if let Ok(d) = deff_at(&pump) {
                        out.push(DesignCandidate {
                            pump,
                            collinear_point: c,
                            offset_deg: delta,
                            deff_pm_per_v: d,
                            intersection_angle_deg: angle,
                        });
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| b.deff_pm_per_v.total_cmp(&a.deff_pm_per_v));
    Ok(out)
}

/// Unit vector normal to the curve at point `i`, tangent to the sphere.
fn curve_normal(curve: &[Direction], i: usize) -> Option<Vec3> {
    let near = |j: usize| curve[j].angle_deg(&curve[i]) < 5.0;
    let prev = (0..i).rev().find(|&j| near(j) && j != i);
    let next = (i + 1..curve.len()).find(|&j| near(j));
    let (a, b) = match (prev, next) {
        (Some(p), Some(n)) => (curve[p].vector(), curve[n].vector()),
        (Some(p), None) => (curve[p].vector(), curve[i].vector()),
        (None, Some(n)) => (curve[i].vector(), curve[n].vector()),
        _ => return None,
    };
    let c = curve[i].vector();
    let tangent = b - a;
    let n = c.cross(&tangent);
    (n.norm() > 1e-12).then(|| n.normalize())
}

/// Offset along the curve normal whose crossing angle is closest to the target:
/// a coarse walk, then golden-section refinement to the offset resolution.
fn offset_for_angle(
    at: &dyn Fn(f64) -> Direction,
    angle_at: &dyn Fn(&Direction) -> Option<f64>,
    options: &DesignScanOptions,
) -> Option<(f64, f64)> {
    let target = options.target_angle_deg;
    let coarse = 0.25;
    let miss = |delta: f64| angle_at(&at(delta)).map_or(f64::INFINITY, |a| (a - target).abs());
    let steps = (options.max_offset_deg / coarse).floor() as usize;
    let (best, best_miss) = (1..=steps).map(|j| coarse * j as f64).map(|d| (d, miss(d))).min_by(|a, b| a.1.total_cmp(&b.1))?;
    if !best_miss.is_finite() {
        return None;
    }
    let lo = (best - coarse).max(0.5 * coarse);
    let hi = (best + coarse).min(options.max_offset_deg);
    let (delta, _) = golden_section_min(miss, lo, hi, options.offset_resolution_deg);
    let (delta, angle) = [(delta, angle_at(&at(delta))), (best, angle_at(&at(best)))]
        .into_iter()
        .filter_map(|(d, a)| a.map(|a| (d, a)))
        .min_by(|x, y| (x.1 - target).abs().total_cmp(&(y.1 - target).abs()))?;
    Some((delta, angle))
}
