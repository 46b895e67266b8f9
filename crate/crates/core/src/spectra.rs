//! Collinear joint spectrum of the down-converted pair and spectral overlap.
//!
//! The two-photon amplitude is f(λ_s, λ_i) = α(λ_f) sinc(Δk L / 2) F(λ_s) F(λ_i)
//! with λ_f fixed by energy conservation and Δk the exact collinear mismatch
//! along the pump direction. The signal is the slow photon.

use std::f64::consts::{LN_2, PI};

use nalgebra::{Matrix2, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::direction::Direction;
use crate::dispersion::CrystalDefinition;
use crate::error::{Error, Result};
use crate::waveoptics::{Medium, Mode, SPEED_OF_LIGHT};

/// Smallest accepted grid size per axis.
pub const MIN_GRID_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterShape {
    Gaussian,
    Rectangular,
}

/// Whether the filter profile multiplies the two-photon intensity or its amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterAction {
    Intensity,
    Amplitude,
}

/// Gaussian pump with intensity FWHM given in wavelength at the center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PumpSpec {
    pub center_nm: f64,
    pub fwhm_nm: f64,
}

impl PumpSpec {
    pub fn new(center_nm: f64, fwhm_nm: f64) -> Result<Self> {
        positive("pump center", center_nm)?;
        positive("pump FWHM", fwhm_nm)?;
        Ok(Self { center_nm, fwhm_nm })
    }

    /// Spectral amplitude at wavenumber `nu` (nm⁻¹).
    fn amplitude(&self, nu: f64) -> f64 {
        let nu0 = 1.0 / self.center_nm;
        let dnu = self.fwhm_nm / (self.center_nm * self.center_nm);
        (-2.0 * LN_2 * ((nu - nu0) / dnu).powi(2)).exp()
    }
}

/// Bandpass filter with intensity-transmission FWHM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterSpec {
    pub center_nm: f64,
    pub fwhm_nm: f64,
    pub shape: FilterShape,
}

impl FilterSpec {
    pub fn new(center_nm: f64, fwhm_nm: f64, shape: FilterShape) -> Result<Self> {
        positive("filter center", center_nm)?;
        positive("filter FWHM", fwhm_nm)?;
        Ok(Self { center_nm, fwhm_nm, shape })
    }

    /// Intensity transmission at `lambda_nm`.
    pub fn transmission(&self, lambda_nm: f64) -> f64 {
        match self.shape {
            FilterShape::Gaussian => {
                let x = (1.0 / lambda_nm - 1.0 / self.center_nm) * self.center_nm * self.center_nm / self.fwhm_nm;
                (-4.0 * LN_2 * x * x).exp()
            }
            FilterShape::Rectangular => {
                if (lambda_nm - self.center_nm).abs() <= 0.5 * self.fwhm_nm {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn amplitude_factor(&self, lambda_nm: f64, action: FilterAction) -> f64 {
        let t = self.transmission(lambda_nm);
        match action {
            FilterAction::Intensity => t.sqrt(),
            FilterAction::Amplitude => t,
        }
    }
}

fn positive(what: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} must be > 0, got {v}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    pub grid_points: usize,
    /// Half-width of each wavelength axis; by default 3 × max(pump-implied width, filter FWHM).
    pub half_span_nm: Option<f64>,
    pub filter_action: FilterAction,
    /// Modes of the (signal, idler) photons; the pump is fast.
    pub modes: (Mode, Mode),
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { grid_points: 512, half_span_nm: None, filter_action: FilterAction::Intensity, modes: (Mode::Slow, Mode::Fast) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JointSpectrum {
    /// Shared wavelength axis for signal and idler, nm.
    pub lambda_nm: Vec<f64>,
    /// Normalized intensity, `intensity[i * n + j]` at (λ_s = lambda[i], λ_i = lambda[j]); Σ I dλ² = 1.
    pub intensity: Vec<f64>,
    #[serde(skip)]
    amplitude: Vec<f64>,
    /// Unit-area marginals.
    pub marginal_signal: Vec<f64>,
    pub marginal_idler: Vec<f64>,
    /// ∫ s_s s_i / √(∫ s_s² ∫ s_i²).
    pub overlap: f64,
    /// ∫ min(s_s, s_i).
    pub min_overlap: f64,
    /// |∬ f(λ_s, λ_i) f(λ_i, λ_s)| / ∬ |f|².
    pub exchange_overlap: f64,
    /// Minor/major principal-axis ratio of the intensity distribution.
    pub aspect_ratio: f64,
}

impl JointSpectrum {
    pub fn len(&self) -> usize {
        self.lambda_nm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda_nm.is_empty()
    }

    pub fn amplitude(&self) -> &[f64] {
        &self.amplitude
    }

    pub fn step_nm(&self) -> f64 {
        self.lambda_nm[1] - self.lambda_nm[0]
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Joint spectral intensity for collinear emission along `pump_dir` through a slab of `thickness_mm`.
pub fn joint_spectrum(
    crystal: &CrystalDefinition,
    pump: &PumpSpec,
    pump_dir: &Direction,
    thickness_mm: f64,
    filter: Option<&FilterSpec>,
    options: &SpectrumOptions,
) -> Result<JointSpectrum> {
    positive("thickness", thickness_mm)?;
    let n = options.grid_points;
    if n < MIN_GRID_POINTS {
        return Err(Error::InvalidInput(format!("grid has {n} points per axis; at least {MIN_GRID_POINTS} required")));
    }
    let center = filter.map_or(2.0 * pump.center_nm, |f| f.center_nm);
    let pump_width = pump.fwhm_nm * center / pump.center_nm;
    let half_span = options.half_span_nm.unwrap_or_else(|| 3.0 * filter.map_or(pump_width, |f| f.fwhm_nm.max(pump_width)));
    positive("spectral half-span", half_span)?;
    let lambda: Vec<f64> = (0..n).map(|i| center - half_span + 2.0 * half_span * i as f64 / (n - 1) as f64).collect();
    let step = lambda[1] - lambda[0];
    for l in [lambda[0], lambda[n - 1], 1.0 / (2.0 / lambda[0]), 1.0 / (2.0 / lambda[n - 1])] {
        crystal.check_wavelength(l)?;
    }

    let k = pump_dir.vector();
    let (signal_mode, idler_mode) = options.modes;
    // Wavenumber-like terms n/λ in µm⁻¹.
    let term = |l: f64, mode: Mode| -> Result<f64> { Ok(Medium::new(crystal, l)?.index(&k, mode) / (l * 1e-3)) };
    let ks: Vec<f64> = lambda.iter().map(|&l| term(l, signal_mode)).collect::<Result<_>>()?;
    let ki: Vec<f64> = lambda.iter().map(|&l| term(l, idler_mode)).collect::<Result<_>>()?;
    let filt: Vec<f64> = lambda.iter().map(|&l| filter.map_or(1.0, |f| f.amplitude_factor(l, options.filter_action))).collect();
    let length_um = thickness_mm * 1e3;

    let amplitude: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let (ks, ki, filt, lambda, term) = (&ks, &ki, &filt, &lambda, &term);
            (0..n).map(move |j| {
                let nu = 1.0 / lambda[i] + 1.0 / lambda[j];
                let alpha = pump.amplitude(nu);
                if alpha < 1e-12 {
                    return 0.0;
                }
                let kp = term(1.0 / nu, Mode::Fast).unwrap_or(f64::NAN);
                let dk = 2.0 * PI * (ks[i] + ki[j] - kp);
                alpha * sinc(0.5 * dk * length_um) * filt[i] * filt[j]
            })
        })
        .collect();
    if amplitude.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("pump wavelength outside transparency on the spectral grid".into()));
    }

    let norm2: f64 = amplitude.iter().map(|a| a * a).sum::<f64>() * step * step;
    if norm2 <= 0.0 {
        return Err(Error::NoPhaseMatching("joint spectrum vanishes on the grid".into()));
    }
    let intensity: Vec<f64> = amplitude.iter().map(|a| a * a / norm2).collect();
    let mut ms = vec![0.0; n];
    let mut mi = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            let v = intensity[i * n + j] * step;
            ms[i] += v;
            mi[j] += v;
        }
    }
    let dot: f64 = ms.iter().zip(&mi).map(|(a, b)| a * b).sum();
    let overlap = dot / (ms.iter().map(|a| a * a).sum::<f64>() * mi.iter().map(|b| b * b).sum::<f64>()).sqrt();
    let min_overlap = ms.iter().zip(&mi).map(|(a, b)| a.min(*b)).sum::<f64>() * step;
    let exchange: f64 =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| amplitude[i * n + j] * amplitude[j * n + i]).sum::<f64>()
            * step
            * step
            / norm2;

    Ok(JointSpectrum {
        aspect_ratio: aspect_ratio(&lambda, &intensity),
        lambda_nm: lambda,
        intensity,
        amplitude,
        marginal_signal: ms,
        marginal_idler: mi,
        overlap,
        min_overlap,
        exchange_overlap: exchange.abs(),
    })
}

fn aspect_ratio(lambda: &[f64], intensity: &[f64]) -> f64 {
    let n = lambda.len();
    let total: f64 = intensity.iter().sum();
    let (mut mx, mut my) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let w = intensity[i * n + j] / total;
            mx += w * lambda[i];
            my += w * lambda[j];
        }
    }
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let w = intensity[i * n + j] / total;
            let (dx, dy) = (lambda[i] - mx, lambda[j] - my);
            sxx += w * dx * dx;
            syy += w * dy * dy;
            sxy += w * dx * dy;
        }
    }
    let eig = SymmetricEigen::new(Matrix2::new(sxx, sxy, sxy, syy));
    let (a, b) = (eig.eigenvalues[0].abs(), eig.eigenvalues[1].abs());
    (a.min(b) / a.max(b)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapRow {
    /// Thickness (mm) or filter FWHM (nm), depending on the sweep.
    pub value: f64,
    pub overlap: f64,
    pub min_overlap: f64,
    pub exchange_overlap: f64,
}

fn row(value: f64, js: &JointSpectrum) -> OverlapRow {
    OverlapRow { value, overlap: js.overlap, min_overlap: js.min_overlap, exchange_overlap: js.exchange_overlap }
}

pub fn overlap_vs_thickness(
    crystal: &CrystalDefinition,
    pump: &PumpSpec,
    pump_dir: &Direction,
    thickness_mm: &[f64],
    filter: Option<&FilterSpec>,
    options: &SpectrumOptions,
) -> Result<Vec<OverlapRow>> {
    thickness_mm.iter().map(|&l| joint_spectrum(crystal, pump, pump_dir, l, filter, options).map(|js| row(l, &js))).collect()
}

pub fn overlap_vs_filter(
    crystal: &CrystalDefinition,
    pump: &PumpSpec,
    pump_dir: &Direction,
    thickness_mm: f64,
    filter: &FilterSpec,
    fwhm_nm: &[f64],
    options: &SpectrumOptions,
) -> Result<Vec<OverlapRow>> {
    fwhm_nm
        .iter()
        .map(|&w| {
            let f = FilterSpec::new(filter.center_nm, w, filter.shape)?;
            joint_spectrum(crystal, pump, pump_dir, thickness_mm, Some(&f), options).map(|js| row(w, &js))
        })
        .collect()
}

/// Transform-limited coherence time of the filtered light, fs.
///
/// Gaussian: 1/e half-width of the intensity envelope, √ln2 / (π Δν).
/// Rectangular: first zero of the field correlation, 1/Δν.
pub fn coherence_time(filter: &FilterSpec) -> f64 {
    let dnu = SPEED_OF_LIGHT * filter.fwhm_nm * 1e-9 / (filter.center_nm * 1e-9).powi(2);
    let tau = match filter.shape {
        FilterShape::Gaussian => LN_2.sqrt() / (PI * dnu),
        FilterShape::Rectangular => 1.0 / dnu,
    };
    tau * 1e15
}

/// Temporal walk-off larger than the coherence time needs compensation.
pub fn compensation_required(delta_t_fs: f64, coherence_time_fs: f64) -> bool {
    delta_t_fs.abs() > coherence_time_fs
}
