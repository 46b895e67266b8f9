//! Command-line grammar.
//!
//! Units at the interface: wavelengths nm, thickness mm, angles degrees,
//! d_eff pm/V, times fs.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Propagation direction as spherical angles in the crystal frame, degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirArg {
    pub psi_deg: f64,
    pub rho_deg: f64,
}

pub fn parse_dir(s: &str) -> Result<DirArg, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [psi, rho] = parts.as_slice() else {
        return Err(format!("expected `psi,rho` in degrees, got `{s}`"));
    };
    let num = |v: &str| v.parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    let (psi_deg, rho_deg) = (num(psi)?, num(rho)?);
    if !(psi_deg.is_finite() && rho_deg.is_finite()) || rho_deg.abs() > 90.0 {
        return Err(format!("direction `{s}` out of range (ρ must lie in [-90, 90])"));
    }
    Ok(DirArg { psi_deg, rho_deg })
}

#[derive(Debug, Parser)]
#[command(
    name = "pdc",
    version,
    about = "Design of non-collinear type-II down-conversion sources in biaxial and uniaxial crystals"
)]
#[command(
    after_help = "Units: wavelengths nm, thickness mm, angles degrees, d_eff pm/V, times fs.\nDirections are `psi,rho`: azimuth ψ from e1 toward e2 and elevation ρ toward e3."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    Gaussian,
    Rectangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ActionArg {
    /// Transmission multiplies the two-photon intensity.
    Intensity,
    /// Transmission multiplies the two-photon amplitude.
    Amplitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FilterSweepKind {
    /// Cone radii for the filter-edge processes.
    Cones,
    /// Spectral overlap versus filter FWHM.
    Overlap,
}

#[derive(Debug, Args)]
pub struct CrystalArg {
    /// Crystal definition file (JSON).
    #[arg(long, value_name = "PATH")]
    pub crystal: PathBuf,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long, short, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct ProcessArgs {
    /// Pump wavelength, nm (fast mode).
    #[arg(long, default_value_t = 390.0, value_name = "NM")]
    pub pump_nm: f64,
    /// Slow down-converted wavelength, nm; the fast photon takes the energy-conserving partner.
    #[arg(long, default_value_t = 780.0, value_name = "NM")]
    pub dc_nm: f64,
}

#[derive(Debug, Args)]
pub struct DirectionArg {
    /// Propagation (pump) direction `psi,rho`, degrees.
    #[arg(long, value_parser = parse_dir, allow_hyphen_values = true, value_name = "PSI,RHO")]
    pub dir: DirArg,
}

#[derive(Debug, Args)]
pub struct ConeArgs {
    /// Pump azimuths traced around the cone.
    #[arg(long, default_value_t = 720)]
    pub azimuths: usize,
    /// Largest accepted |Δk|/|k_f| of a cone point.
    #[arg(long, default_value_t = 5e-5)]
    pub threshold: f64,
    /// Polar scan step of the cone search, degrees.
    #[arg(long, default_value_t = 0.01, value_name = "DEG")]
    pub coarse_step_deg: f64,
    /// Largest internal angle from the pump searched, degrees.
    #[arg(long, default_value_t = 8.0, value_name = "DEG")]
    pub max_offset_deg: f64,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub crystal: CrystalArg,
    #[command(flatten)]
    pub dir: DirectionArg,
    /// Move the direction onto the nearest collinear phase-matching direction first.
    #[arg(long)]
    pub snap_collinear: bool,
    /// Pump center wavelength, nm.
    #[arg(long, default_value_t = 390.0, value_name = "NM")]
    pub pump_nm: f64,
    /// Pump intensity FWHM, nm.
    #[arg(long, default_value_t = 2.0, value_name = "NM")]
    pub pump_fwhm_nm: f64,
    /// Filter intensity FWHM, nm.
    #[arg(long, default_value_t = 3.0, value_name = "NM")]
    pub filter_fwhm_nm: f64,
    /// Filter center, nm; twice the pump wavelength by default.
    #[arg(long, value_name = "NM")]
    pub filter_center_nm: Option<f64>,
    #[arg(long, value_enum, default_value_t = ShapeArg::Gaussian)]
    pub filter_shape: ShapeArg,
    #[arg(long, value_enum, default_value_t = ActionArg::Intensity)]
    pub filter_action: ActionArg,
    /// Omit the filters.
    #[arg(long, conflicts_with_all = ["filter_fwhm_nm", "filter_center_nm"])]
    pub no_filter: bool,
    /// Grid points per wavelength axis.
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    /// Half-width of each wavelength axis, nm; 3 × the widest spectral feature by default.
    #[arg(long, value_name = "NM")]
    pub half_span_nm: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Principal indices and Φ, or mode indices (fast, slow) along a direction.
    Indices {
        #[command(flatten)]
        crystal: CrystalArg,
        /// Wavelength, nm.
        #[arg(long, value_name = "NM")]
        nm: f64,
        /// Direction `psi,rho`, degrees.
        #[arg(long, value_parser = parse_dir, allow_hyphen_values = true, value_name = "PSI,RHO")]
        dir: Option<DirArg>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Eigenmodes along a direction: indices, D vectors, Poynting vectors, walk-off angles (degrees).
    Modes {
        #[command(flatten)]
        crystal: CrystalArg,
        /// Wavelength, nm.
        #[arg(long, value_name = "NM")]
        nm: f64,
        #[command(flatten)]
        dir: DirectionArg,
        /// Reference direction for polarization angles `psi,rho`, degrees.
        #[arg(long, value_parser = parse_dir, allow_hyphen_values = true, value_name = "PSI,RHO")]
        reference: Option<DirArg>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Spatial walk-off angle (degrees) and transverse displacement (µm).
    Walkoff {
        #[command(flatten)]
        crystal: CrystalArg,
        /// Wavelength, nm.
        #[arg(long, value_name = "NM")]
        nm: f64,
        #[command(flatten)]
        dir: DirectionArg,
        /// Crystal thickness, mm.
        #[arg(long, value_name = "MM")]
        thickness_mm: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Temporal walk-off (fs) against the filter coherence time (fs).
    Temporal {
        #[command(flatten)]
        crystal: CrystalArg,
        /// Wavelength, nm.
        #[arg(long, value_name = "NM")]
        nm: f64,
        #[command(flatten)]
        dir: DirectionArg,
        /// Crystal thickness, mm.
        #[arg(long, value_name = "MM")]
        thickness_mm: f64,
        /// Gaussian filter intensity FWHM, nm, centered at `--nm`.
        #[arg(long, default_value_t = 3.0, value_name = "NM")]
        filter_fwhm_nm: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Collinear phase-matching curve (degrees) over ψ ∈ [0, 90], ρ ∈ [-90, 90].
    MatchCollinear {
        #[command(flatten)]
        crystal: CrystalArg,
        #[command(flatten)]
        process: ProcessArgs,
        /// ψ sampling step, degrees.
        #[arg(long, default_value_t = 0.25, value_name = "DEG")]
        psi_step_deg: f64,
        /// ρ bracketing step, degrees.
        #[arg(long, default_value_t = 0.5, value_name = "DEG")]
        rho_step_deg: f64,
        /// Also report the curve point nearest this direction `psi,rho`, degrees.
        #[arg(long, value_parser = parse_dir, allow_hyphen_values = true, value_name = "PSI,RHO")]
        near: Option<DirArg>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Emission cones (CSV, degrees) and their crossing geometry (JSON).
    Cones {
        #[command(flatten)]
        crystal: CrystalArg,
        #[command(flatten)]
        process: ProcessArgs,
        #[command(flatten)]
        dir: DirectionArg,
        #[command(flatten)]
        cones: ConeArgs,
        /// Geometry JSON file.
        #[arg(long, value_name = "PATH")]
        geometry_out: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Crossing points, T/P/R frame and fast-mode polarization angles from P (degrees).
    Geometry {
        #[command(flatten)]
        crystal: CrystalArg,
        #[command(flatten)]
        process: ProcessArgs,
        #[command(flatten)]
        dir: DirectionArg,
        #[command(flatten)]
        cones: ConeArgs,
        /// Crystal thickness for the walk-off at the crossings, mm.
        #[arg(long, default_value_t = 1.5, value_name = "MM")]
        thickness_mm: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Stereographic projection of the external cones with circle fits.
    Project {
        #[command(flatten)]
        crystal: CrystalArg,
        #[command(flatten)]
        process: ProcessArgs,
        #[command(flatten)]
        dir: DirectionArg,
        #[command(flatten)]
        cones: ConeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Collinear d_eff along a direction, pm/V.
    Deff {
        #[command(flatten)]
        crystal: CrystalArg,
        #[command(flatten)]
        process: ProcessArgs,
        #[command(flatten)]
        dir: DirectionArg,
        /// Use the full d-matrix instead of the Kleinman-symmetric one.
        #[arg(long)]
        no_kleinman: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// d_eff (pm/V) over a (ψ, ρ) grid in degrees, with the collinear curve.
    DeffMap {
        #[command(flatten)]
        crystal: CrystalArg,
        #[command(flatten)]
        process: ProcessArgs,
        /// Grid step, degrees.
        #[arg(long, default_value_t = 0.25, value_name = "DEG")]
        step_deg: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true, value_name = "DEG")]
        psi_min_deg: f64,
        #[arg(long, default_value_t = 90.0, allow_hyphen_values = true, value_name = "DEG")]
        psi_max_deg: f64,
        #[arg(long, default_value_t = -90.0, allow_hyphen_values = true, value_name = "DEG")]
        rho_min_deg: f64,
        #[arg(long, default_value_t = 90.0, allow_hyphen_values = true, value_name = "DEG")]
        rho_max_deg: f64,
        #[arg(long)]
        no_kleinman: bool,
        /// Collinear-curve overlay CSV.
        #[arg(long, value_name = "PATH")]
        curve_out: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Pump directions near the collinear curve ranked by d_eff (pm/V) with crossing angle in a window (degrees).
    DesignScan {
        #[command(flatten)]
        crystal: CrystalArg,
        #[command(flatten)]
        process: ProcessArgs,
        /// Target crossing angle, degrees.
        #[arg(long, default_value_t = 90.0, value_name = "DEG")]
        target_deg: f64,
        /// Accepted deviation from the target, degrees.
        #[arg(long, default_value_t = 2.0, value_name = "DEG")]
        window_deg: f64,
        /// Largest offset of the pump from the collinear curve, degrees.
        #[arg(long, default_value_t = 2.0, value_name = "DEG")]
        max_offset_deg: f64,
        #[arg(long, default_value_t = 5)]
        max_candidates: usize,
        #[arg(long)]
        no_kleinman: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Collinear joint spectrum and spectral overlap.
    Spectra {
        #[command(flatten)]
        spectrum: SpectrumArgs,
        /// Crystal thickness, mm.
        #[arg(long, value_name = "MM")]
        thickness_mm: f64,
        /// Marginal spectra CSV.
        #[arg(long, value_name = "PATH")]
        marginals_out: Option<PathBuf>,
        /// Joint intensity grid CSV.
        #[arg(long, value_name = "PATH")]
        grid_out: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cone radii (degrees) versus pump wavelength (nm) at a fixed down-converted wavelength.
    SweepPump {
        #[command(flatten)]
        crystal: CrystalArg,
        #[command(flatten)]
        dir: DirectionArg,
        /// Pump wavelengths, nm.
        #[arg(long, value_delimiter = ',', default_value = "389,390,391", value_name = "NM,...")]
        pump_nm: Vec<f64>,
        /// Fixed down-converted wavelength, nm.
        #[arg(long, default_value_t = 780.0, value_name = "NM")]
        dc_nm: f64,
        #[command(flatten)]
        cones: ConeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Filter-bandwidth sweep: cone radii for the filter edges, or spectral overlap versus FWHM.
    SweepFilter {
        #[arg(long, value_enum, default_value_t = FilterSweepKind::Cones)]
        kind: FilterSweepKind,
        #[command(flatten)]
        spectrum: SpectrumArgs,
        /// Lower filter edge for the cone sweep, nm; the center and the partner edge are added.
        #[arg(long, default_value_t = 778.5, value_name = "NM")]
        edge_nm: f64,
        /// Filter FWHM values for the overlap sweep, nm.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,8,10", value_name = "NM,...")]
        fwhm_nm: Vec<f64>,
        /// Crystal thickness for the overlap sweep, mm.
        #[arg(long, default_value_t = 2.0, value_name = "MM")]
        thickness_mm: f64,
        #[command(flatten)]
        cones: ConeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Spectral overlap versus crystal thickness (mm).
    SweepThickness {
        #[command(flatten)]
        spectrum: SpectrumArgs,
        /// Thicknesses, mm.
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,1.5,2,2.5,3", value_name = "MM,...")]
        thickness_mm: Vec<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Recompute every reference value of the BiBO/BBO design and compare.
    ReproducePaper {
        /// Directory holding bibo.json and bbo.json.
        #[arg(long, default_value = "data", value_name = "DIR")]
        crystal_dir: PathBuf,
        /// Multiplier applied to every tolerance.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        /// JSON report file.
        #[arg(long, short, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}
