//! Plane-wave eigenmodes of an anisotropic crystal for one propagation direction.
//!
//! Mode indices come from the Fresnel equation of wave normals, solved as a
//! quadratic in 1/n² in the indicatrix frame. Energy-flow directions are
//! found numerically as normals to the wave-vector surface.

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::direction::{angle_between, Direction, Vec3};
use crate::dispersion::{indicatrix_rotation, principal_indices, CrystalDefinition, FrameRotation, Symmetry};
use crate::error::{Error, Result};

/// Below this index splitting a direction counts as an optic axis.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;
/// Rotation applied to k when fitting the wave-vector surface plane, rad.
pub const POYNTING_STEP_RAD: f64 = 1e-4;
/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Fast,
    Slow,
}

impl Mode {
    pub fn other(self) -> Self {
        match self {
            Mode::Fast => Mode::Slow,
            Mode::Slow => Mode::Fast,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::Fast => "fast",
            Mode::Slow => "slow",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeIndices {
    pub fast: f64,
    pub slow: f64,
}

impl ModeIndices {
    pub fn get(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Fast => self.fast,
            Mode::Slow => self.slow,
        }
    }
}

/// Crystal optics at one wavelength, ready for repeated direction queries.
#[derive(Debug, Clone, Copy)]
pub struct Medium {
    pub rotation: FrameRotation,
    /// Principal indices along e1⁰, e2⁰, e3⁰.
    pub principal: [f64; 3],
    pub isotropic: bool,
}

impl Medium {
    pub fn new(crystal: &CrystalDefinition, lambda_nm: f64) -> Result<Self> {
        Ok(Self {
            rotation: indicatrix_rotation(crystal, lambda_nm)?,
            principal: principal_indices(crystal, lambda_nm)?.n,
            isotropic: crystal.symmetry == Symmetry::Isotropic,
        })
    }

    fn inverse_squares(&self) -> [f64; 3] {
        self.principal.map(|n| 1.0 / (n * n))
    }

    pub fn indices(&self, k: &Vec3) -> ModeIndices {
        let (u_fast, u_slow) = fresnel_roots(&self.inverse_squares(), &self.rotation.to_indicatrix(k));
        ModeIndices { fast: 1.0 / u_fast.sqrt(), slow: 1.0 / u_slow.sqrt() }
    }

    pub fn index(&self, k: &Vec3, mode: Mode) -> f64 {
        self.indices(k).get(mode)
    }

    /// Unit D vectors (fast, slow) in {e_i}.
    pub fn polarizations(&self, k: &Vec3) -> Result<(Vec3, Vec3)> {
        let idx = self.indices(k);
        let splitting = idx.slow - idx.fast;
        if splitting < DEGENERACY_TOLERANCE {
            return Err(Error::DegenerateDirection { splitting });
        }
        let k0 = self.rotation.to_indicatrix(k);
        let d = |n: f64| canonical_sign(self.rotation.to_physical(&displacement_direction(&self.principal, &k0, n)));
        Ok((d(idx.fast), d(idx.slow)))
    }

    /// Energy-flow direction by a central-difference plane fit of the wave-vector surface.
    pub fn poynting(&self, k: &Vec3, mode: Mode, step_rad: f64) -> Result<PoyntingFit> {
        let kd = Direction::new_unchecked(*k);
        let (a, b) = kd.transverse_basis();
        let c = (a + b).normalize();
        let mut min_split = f64::INFINITY;
        let mut surface = |axis: &Vec3, angle: f64| {
            let kr = rotate_about(k, axis, angle);
            let idx = self.indices(&kr);
            min_split = min_split.min(idx.slow - idx.fast);
            kr * idx.get(mode)
        };
        let chord_a = surface(&a, step_rad) - surface(&a, -step_rad);
        let chord_b = surface(&b, step_rad) - surface(&b, -step_rad);
        let chord_c = surface(&c, step_rad) - surface(&c, -step_rad);
        let mid = self.indices(k);
        min_split = min_split.min(mid.slow - mid.fast);
        if !self.isotropic && min_split < DEGENERACY_TOLERANCE {
            return Err(Error::DegenerateDirection { splitting: min_split });
        }
        let mut normal = chord_a.cross(&chord_b).normalize();
        if normal.dot(k) < 0.0 {
            normal = -normal;
        }
        let planarity_residual = normal.dot(&chord_c.normalize()).abs();
        Ok(PoyntingFit { direction: Direction::new_unchecked(normal), planarity_residual })
    }
}

/// Result of the wave-vector surface plane fit.
#[derive(Debug, Clone, Copy)]
pub struct PoyntingFit {
    pub direction: Direction,
    /// |cos| between the fitted normal and the third (bisector) chord.
    pub planarity_residual: f64,
}

/// Roots (u_fast, u_slow) of the wave-normal equation in u = 1/n², u_fast ≥ u_slow.
fn fresnel_roots(a: &[f64; 3], k0: &Vec3) -> (f64, f64) {
    let norm2 = k0.norm_squared();
    let q = [k0.x * k0.x / norm2, k0.y * k0.y / norm2, k0.z * k0.z / norm2];
    let b = q[0] * (a[1] + a[2]) + q[1] * (a[0] + a[2]) + q[2] * (a[0] + a[1]);
    let c = q[0] * a[1] * a[2] + q[1] * a[0] * a[2] + q[2] * a[0] * a[1];
    // b² − 4c as a sum of non-negative terms, with m the index of the smallest aᵢ
    let m = (0..3).min_by(|&x, &y| a[x].total_cmp(&a[y])).unwrap_or(0);
    let (i, j) = ((m + 1) % 3, (m + 2) % 3);
    let (d_im, d_jm, d_ij) = (a[i] - a[m], a[j] - a[m], a[i] - a[j]);
    let x = q[j] * d_im - q[i] * d_jm + q[m] * d_ij;
    let disc = x * x + 4.0 * q[i] * q[j] * d_im * d_jm;
    let big = 0.5 * (b + disc.sqrt());
    (big, c / big)
}

/// Left side of the wave-normal equation Σ kᵢ² Π_{j≠i} (1/n² − 1/n_j²) in the indicatrix frame.
pub fn fresnel_residual(principal: &[f64; 3], k0: &Vec3, n: f64) -> f64 {
    let a = principal.map(|p| 1.0 / (p * p));
    let u = 1.0 / (n * n);
    let q = [k0.x * k0.x, k0.y * k0.y, k0.z * k0.z];
    q[0] * (u - a[1]) * (u - a[2]) + q[1] * (u - a[0]) * (u - a[2]) + q[2] * (u - a[0]) * (u - a[1])
}

/// D direction in the indicatrix frame from the component ratios
/// Dⱼ ∝ nⱼ² kⱼ / (n² − nⱼ²), falling back to the projected inverse-permittivity
/// eigenvector when a denominator vanishes (principal planes).
fn displacement_direction(principal: &[f64; 3], k0: &Vec3, n: f64) -> Vec3 {
    let n2 = n * n;
    let denoms = principal.map(|p| n2 - p * p);
    if denoms.iter().all(|d| d.abs() > 1e-6 * n2) {
        let v = Vec3::from_fn(|j, _| principal[j] * principal[j] * k0[j] / denoms[j]);
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
    let p = Matrix3::identity() - k0 * k0.transpose();
    let inv_eps = Matrix3::from_diagonal(&Vec3::from_fn(|j, _| 1.0 / (principal[j] * principal[j])));
    let eig = SymmetricEigen::new(p * inv_eps * p);
    let u = 1.0 / n2;
    let best = (0..3)
        .min_by(|&i, &j| (eig.eigenvalues[i] - u).abs().total_cmp(&(eig.eigenvalues[j] - u).abs()))
        .expect("three eigenvalues");
    eig.eigenvectors.column(best).normalize()
}

fn canonical_sign(v: Vec3) -> Vec3 {
    let i = v.iamax();
    if v[i] < 0.0 {
        -v
    } else {
        v
    }
}

/// Rodrigues rotation of `v` about unit `axis` by `angle` rad.
pub fn rotate_about(v: &Vec3, axis: &Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    v * c + axis.cross(v) * s + axis * axis.dot(v) * (1.0 - c)
}

pub fn mode_indices(crystal: &CrystalDefinition, lambda_nm: f64, k_dir: &Direction) -> Result<ModeIndices> {
    Ok(Medium::new(crystal, lambda_nm)?.indices(&k_dir.vector()))
}

/// Unit D vectors (fast, slow) in {e_i}; sign normalized so the largest component is positive.
pub fn mode_polarizations(crystal: &CrystalDefinition, lambda_nm: f64, k_dir: &Direction) -> Result<(Direction, Direction)> {
    let (f, s) = Medium::new(crystal, lambda_nm)?.polarizations(&k_dir.vector())?;
    Ok((Direction::new_unchecked(f), Direction::new_unchecked(s)))
}

pub fn poynting_vector(crystal: &CrystalDefinition, lambda_nm: f64, k_dir: &Direction, mode: Mode) -> Result<Direction> {
    poynting_vector_with_step(crystal, lambda_nm, k_dir, mode, POYNTING_STEP_RAD).map(|f| f.direction)
}

pub fn poynting_vector_with_step(
    crystal: &CrystalDefinition,
    lambda_nm: f64,
    k_dir: &Direction,
    mode: Mode,
    step_rad: f64,
) -> Result<PoyntingFit> {
    Medium::new(crystal, lambda_nm)?.poynting(&k_dir.vector(), mode, step_rad)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WalkoffResult {
    pub theta_swo_deg: f64,
    pub transverse_displacement_um: f64,
    pub thickness_mm: f64,
}

impl WalkoffResult {
    fn new(theta_swo_deg: f64, thickness_mm: f64) -> Self {
        Self { theta_swo_deg, transverse_displacement_um: thickness_mm * 1e3 * theta_swo_deg.to_radians().tan(), thickness_mm }
    }
}

/// Angle between the fast and slow Poynting vectors and the resulting displacement.
pub fn spatial_walkoff(
    crystal: &CrystalDefinition,
    lambda_nm: f64,
    k_dir: &Direction,
    thickness_mm: f64,
) -> Result<WalkoffResult> {
    check_thickness(thickness_mm)?;
    let medium = Medium::new(crystal, lambda_nm)?;
    let k = k_dir.vector();
    let s_fast = medium.poynting(&k, Mode::Fast, POYNTING_STEP_RAD)?.direction;
    let s_slow = medium.poynting(&k, Mode::Slow, POYNTING_STEP_RAD)?.direction;
    Ok(WalkoffResult::new(s_fast.angle_deg(&s_slow), thickness_mm))
}

/// Ray indices n·cos α (fast, slow).
pub fn ray_indices(crystal: &CrystalDefinition, lambda_nm: f64, k_dir: &Direction) -> Result<(f64, f64)> {
    let s = solve_wave(crystal, lambda_nm, k_dir)?;
    Ok((s.n_r_fast, s.n_r_slow))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TemporalWalkoff {
    pub delta_t_fs: f64,
    /// n_r(slow) − n_r(fast).
    pub delta_n_r: f64,
    pub thickness_mm: f64,
}

impl TemporalWalkoff {
    pub fn from_delta_n(delta_n_r: f64, thickness_mm: f64) -> Self {
        let delta_t_fs = thickness_mm * 1e-3 * delta_n_r / SPEED_OF_LIGHT * 1e15;
        Self { delta_t_fs, delta_n_r, thickness_mm }
    }
}

/// Delay between slow and fast photons after a slab, δT = L·Δn_r/c with ray indices.
pub fn temporal_walkoff(
    crystal: &CrystalDefinition,
    lambda_nm: f64,
    k_dir: &Direction,
    thickness_mm: f64,
) -> Result<TemporalWalkoff> {
    check_thickness(thickness_mm)?;
    let (fast, slow) = ray_indices(crystal, lambda_nm, k_dir)?;
    Ok(TemporalWalkoff::from_delta_n(slow - fast, thickness_mm))
}

fn check_thickness(thickness_mm: f64) -> Result<()> {
    if thickness_mm.is_finite() && thickness_mm >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("thickness must be ≥ 0 mm, got {thickness_mm}")))
    }
}

/// All per-direction wave quantities for one wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveSolution {
    pub lambda_nm: f64,
    pub k_dir: Direction,
    pub n_fast: f64,
    pub n_slow: f64,
    pub d_fast: Direction,
    pub d_slow: Direction,
    pub s_fast: Direction,
    pub s_slow: Direction,
    pub alpha_fast_deg: f64,
    pub alpha_slow_deg: f64,
    pub n_r_fast: f64,
    pub n_r_slow: f64,
}

pub fn solve_wave(crystal: &CrystalDefinition, lambda_nm: f64, k_dir: &Direction) -> Result<WaveSolution> {
    let medium = Medium::new(crystal, lambda_nm)?;
    let k = k_dir.vector();
    let idx = medium.indices(&k);
    let (d_fast, d_slow) = medium.polarizations(&k)?;
    let s_fast = medium.poynting(&k, Mode::Fast, POYNTING_STEP_RAD)?.direction;
    let s_slow = medium.poynting(&k, Mode::Slow, POYNTING_STEP_RAD)?.direction;
    let alpha_fast = angle_between(&k, &s_fast.vector());
    let alpha_slow = angle_between(&k, &s_slow.vector());
    Ok(WaveSolution {
        lambda_nm,
        k_dir: *k_dir,
        n_fast: idx.fast,
        n_slow: idx.slow,
        d_fast: Direction::new_unchecked(d_fast),
        d_slow: Direction::new_unchecked(d_slow),
        s_fast,
        s_slow,
        alpha_fast_deg: alpha_fast.to_degrees(),
        alpha_slow_deg: alpha_slow.to_degrees(),
        n_r_fast: idx.fast * alpha_fast.cos(),
        n_r_slow: idx.slow * alpha_slow.cos(),
    })
}

/// Angle (deg, in [0, 90]) between the line of `d` and the reference axis,
/// measured in the plane normal to `k`.
pub fn polarization_angle_deg(d: &Direction, reference: &Direction, k: &Direction) -> f64 {
    let kv = k.vector();
    let project = |v: Vec3| (v - kv * kv.dot(&v)).normalize();
    let (dp, rp) = (project(d.vector()), project(reference.vector()));
    dp.cross(&rp).norm().atan2(dp.dot(&rp).abs()).to_degrees()
}
