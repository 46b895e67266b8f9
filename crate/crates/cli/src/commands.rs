//! Subcommand implementations.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use pdc_core::dispersion::{indicatrix_rotation, principal_indices};
use pdc_core::nonlinearity::{deff_collinear, deff_map, design_scan, DesignScanOptions, GridSpec};
use pdc_core::phasematch::{
    collinear_curve, complement_wavelength, cone_geometry, emission_cones, filter_bandwidth_sweep, fit_circle,
    nearest_collinear_direction, pump_bandwidth_sweep, stereographic_project, CollinearScan, ConeOptions, EmissionCone,
    PdcProcess, StereoPoint,
};
use pdc_core::spectra::{
    coherence_time, compensation_required, joint_spectrum, overlap_vs_filter, overlap_vs_thickness, FilterAction, FilterShape,
    FilterSpec, OverlapRow, PumpSpec, SpectrumOptions,
};
use pdc_core::waveoptics::{mode_indices, polarization_angle_deg, solve_wave, spatial_walkoff, temporal_walkoff};
use pdc_core::{load_crystal, CrystalDefinition, Direction};
use serde_json::{json, Value};

use crate::args::*;
use crate::output::{emit, fmt_num, json_document, Table};
use crate::reference::{self, crossing_walkoffs, polarization_angles};
use crate::CliError;

type CmdResult = Result<(), CliError>;

/// Result of one subcommand before it is written out.
struct Report {
    kind: &'static str,
    data: Value,
    table: Option<Table>,
    default_format: Format,
    summary: String,
}

impl Report {
    fn json(kind: &'static str, data: Value, summary: String) -> Self {
        Self { kind, data, table: None, default_format: Format::Json, summary }
    }

    fn table(kind: &'static str, data: Value, table: Table, summary: String) -> Self {
        Self { kind, data, table: Some(table), default_format: Format::Csv, summary }
    }

    fn write(self, output: &OutputArgs) -> CmdResult {
        let text = match output.format.unwrap_or(self.default_format) {
            Format::Csv => self.table.unwrap_or_else(|| flatten(&self.data)).to_csv()?,
            Format::Json => json_document(self.kind, &self.data)?,
        };
        emit(output.out.as_deref(), &text)?;
        summary_line(output.out.as_deref(), &self.summary);
        Ok(())
    }
}

/// One line on stdout when the data went to a file, otherwise on stderr.
fn summary_line(out: Option<&Path>, text: &str) {
    match out {
        Some(p) => {
            let _ = writeln!(io::stdout(), "{text} -> {}", p.display());
        }
        None => {
            let _ = writeln!(io::stderr(), "{text}");
        }
    }
}

/// `key,value` rows of a JSON document with dotted keys.
fn flatten(v: &Value) -> Table {
    fn walk(prefix: &str, v: &Value, t: &mut Table) {
        let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
        match v {
            Value::Object(o) => o.iter().for_each(|(k, v)| walk(&key(k), v, t)),
            Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| walk(&key(&i.to_string()), v, t)),
            Value::Number(n) => t.push(vec![prefix.to_string(), n.as_f64().map_or_else(|| n.to_string(), fmt_num)]),
            Value::String(s) => t.push(vec![prefix.to_string(), s.clone()]),
            Value::Bool(b) => t.push(vec![prefix.to_string(), b.to_string()]),
            Value::Null => t.push(vec![prefix.to_string(), String::new()]),
        }
    }
    let mut t = Table::new(&["quantity", "value"]);
    walk("", v, &mut t);
    t
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Io(std::io::Error::other(e)))
}

fn load(arg: &CrystalArg) -> Result<CrystalDefinition, CliError> {
    let text = std::fs::read_to_string(&arg.crystal)
        .map_err(|e| CliError::Input(format!("cannot read crystal file {}: {e}", arg.crystal.display())))?;
    Ok(load_crystal(&text)?)
}

fn direction(d: DirArg) -> Direction {
    Direction::from_spherical_deg(d.psi_deg, d.rho_deg)
}

fn process(p: &ProcessArgs) -> Result<PdcProcess, CliError> {
    Ok(PdcProcess::fsf(p.pump_nm, p.dc_nm)?)
}

fn cone_options(c: &ConeArgs) -> Result<ConeOptions, CliError> {
    if !(c.threshold.is_finite() && c.threshold >= 0.0) {
        return Err(CliError::Input(format!("threshold must be ≥ 0, got {}", c.threshold)));
    }
    Ok(ConeOptions {
        azimuth_count: c.azimuths,
        threshold: c.threshold,
        coarse_step_deg: c.coarse_step_deg,
        max_offset_deg: c.max_offset_deg,
    })
}

fn positive(name: &str, v: f64) -> CmdResult {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Input(format!("{name} must be > 0, got {v}")))
    }
}

fn psi_rho(d: &Direction) -> [f64; 2] {
    let (psi, rho) = d.to_spherical_deg();
    [psi, rho]
}

pub fn run(command: Command) -> CmdResult {
    match command {
        Command::Indices { crystal, nm, dir, output } => indices(&load(&crystal)?, nm, dir, &output),
        Command::Modes { crystal, nm, dir, reference, output } => {
            modes(&load(&crystal)?, nm, direction(dir.dir), reference, &output)
        }
        Command::Walkoff { crystal, nm, dir, thickness_mm, output } => {
            positive("thickness", thickness_mm)?;
            let c = load(&crystal)?;
            let d = direction(dir.dir);
            let w = spatial_walkoff(&c, nm, &d, thickness_mm)?;
            let data = json!({ "lambda_nm": nm, "direction": d, "walkoff": w });
            let summary = format!(
                "walk-off {}° ({} µm over {} mm)",
                fmt_num(w.theta_swo_deg),
                fmt_num(w.transverse_displacement_um),
                thickness_mm
            );
            Report::json("walkoff", data, summary).write(&output)
        }
        Command::Temporal { crystal, nm, dir, thickness_mm, filter_fwhm_nm, output } => {
            positive("thickness", thickness_mm)?;
            let c = load(&crystal)?;
            let filter = FilterSpec::new(nm, filter_fwhm_nm, FilterShape::Gaussian)?;
            let d = direction(dir.dir);
            let t = temporal_walkoff(&c, nm, &d, thickness_mm)?;
            let tau = coherence_time(&filter);
            let compensate = compensation_required(t.delta_t_fs, tau);
            let data = json!({
                "lambda_nm": nm, "direction": d, "temporal": t,
                "coherence_time_fs": tau, "compensation_required": compensate,
            });
            let summary = format!(
                "δT {} fs, τ_c {} fs, compensation {}",
                fmt_num(t.delta_t_fs),
                fmt_num(tau),
                if compensate { "required" } else { "not required" }
            );
            Report::json("temporal", data, summary).write(&output)
        }
        Command::MatchCollinear { crystal, process: p, psi_step_deg, rho_step_deg, near, output } => {
            let c = load(&crystal)?;
            let pr = process(&p)?;
            let curve = collinear_curve(&c, &pr, CollinearScan { psi_step_deg, rho_step_deg })?;
            let mut table = Table::new(&["psi_deg", "rho_deg"]);
            curve.iter().for_each(|d| table.push_nums(&psi_rho(d)));
            let nearest = match near {
                Some(n) => {
                    let target = direction(n);
                    let d = nearest_collinear_direction(&c, &pr, &target, 5.0)?;
                    Some(json!({ "target": target, "direction": d, "distance_deg": d.angle_deg(&target) }))
                }
                None => None,
            };
            let mut summary = format!("{} collinear directions", curve.len());
            if let Some(n) = &nearest {
                summary += &format!("; nearest at {}° from the target", fmt_num(n["distance_deg"].as_f64().unwrap_or(f64::NAN)));
            }
            let points: Vec<[f64; 2]> = curve.iter().map(psi_rho).collect();
            let data = json!({ "process": pr, "points_psi_rho_deg": points, "nearest": nearest });
            Report::table("collinear-curve", data, table, summary).write(&output)
        }
        Command::Cones { crystal, process: p, dir, cones, geometry_out, output } => {
            cones_cmd(&load(&crystal)?, &process(&p)?, direction(dir.dir), &cone_options(&cones)?, geometry_out, &output)
        }
        Command::Geometry { crystal, process: p, dir, cones, thickness_mm, output } => {
            positive("thickness", thickness_mm)?;
            let c = load(&crystal)?;
            let pr = process(&p)?;
            let pump = direction(dir.dir);
            let (s, f) = emission_cones(&c, &pr, &pump, cone_options(&cones)?)?;
            let g = cone_geometry(&s, &f, &pump)?;
            let pol = polarization_angles(&c, &pr, &g)?;
            let walk = crossing_walkoffs(&c, &pr, &g, thickness_mm)?;
            let summary = format!(
                "separation {}°, crossing angle {}°, pump polarization {}° from P",
                fmt_num(g.separation_deg),
                fmt_num(g.intersection_angle_deg),
                fmt_num(pol.pump_deg)
            );
            let data = json!({ "process": pr, "geometry": g, "polarization_from_p_deg": pol, "crossing_walkoff": walk });
            Report::json("geometry", data, summary).write(&output)
        }
        Command::Project { crystal, process: p, dir, cones, output } => {
            let c = load(&crystal)?;
            let pump = direction(dir.dir);
            let (s, f) = emission_cones(&c, &process(&p)?, &pump, cone_options(&cones)?)?;
            let mut table = Table::new(&["polarization", "azimuth_deg", "u", "v"]);
            let mut fits = serde_json::Map::new();
            for cone in [&s, &f] {
                let pts = project(cone)?;
                for (az, pt) in cone.azimuth_deg.iter().zip(&pts) {
                    table.push(vec![cone.mode.label().into(), fmt_num(*az), fmt_num(pt.u), fmt_num(pt.v)]);
                }
                fits.insert(cone.mode.label().into(), to_value(&fit_circle(&pts))?);
            }
            let data = json!({ "pump": pump, "pump_projection": stereographic_project(&pump)?, "circle_fits": fits });
            Report::table("projection", data, table, format!("{} projected points", s.len() + f.len())).write(&output)
        }
        Command::Deff { crystal, process: p, dir, no_kleinman, output } => {
            let c = load(&crystal)?;
            let pr = process(&p)?;
            let d = direction(dir.dir);
            let v = deff_collinear(&c, &d, &pr, !no_kleinman)?;
            let data = json!({ "direction": d, "process": pr, "kleinman": !no_kleinman, "deff_pm_per_v": v });
            Report::json("deff", data, format!("d_eff {} pm/V", fmt_num(v))).write(&output)
        }
        Command::DeffMap {
            crystal,
            process: p,
            step_deg,
            psi_min_deg,
            psi_max_deg,
            rho_min_deg,
            rho_max_deg,
            no_kleinman,
            curve_out,
            output,
        } => {
            let c = load(&crystal)?;
            let grid = GridSpec { psi_min_deg, psi_max_deg, rho_min_deg, rho_max_deg, step_deg };
            let map = deff_map(&c, &grid, &process(&p)?, !no_kleinman)?;
            let mut table = Table::new(&["psi_deg", "rho_deg", "deff_pm_per_V"]);
            let n_rho = map.rho_deg.len();
            for (i, psi) in map.psi_deg.iter().enumerate() {
                for (j, rho) in map.rho_deg.iter().enumerate() {
                    let v = map.values[i * n_rho + j].map_or_else(String::new, fmt_num);
                    table.push(vec![fmt_num(*psi), fmt_num(*rho), v]);
                }
            }
            if let Some(path) = &curve_out {
                let mut curve = Table::new(&["psi_deg", "rho_deg"]);
                map.collinear_curve.iter().for_each(|d| curve.push_nums(&psi_rho(d)));
                emit(Some(path), &curve.to_csv()?)?;
            }
            let summary = match map.max() {
                Some((psi, rho, v)) => format!("max d_eff {} pm/V at ({}, {})", fmt_num(v), fmt_num(psi), fmt_num(rho)),
                None => "no valid grid node".into(),
            };
            Report::table("deff-map", to_value(&map)?, table, summary).write(&output)
        }
        Command::DesignScan {
            crystal,
            process: p,
            target_deg,
            window_deg,
            max_offset_deg,
            max_candidates,
            no_kleinman,
            output,
        } => {
            positive("window", window_deg)?;
            positive("max offset", max_offset_deg)?;
            let c = load(&crystal)?;
            let options = DesignScanOptions {
                target_angle_deg: target_deg,
                window_deg,
                max_offset_deg,
                max_candidates,
                kleinman: !no_kleinman,
                ..DesignScanOptions::default()
            };
            let found = design_scan(&c, &process(&p)?, options)?;
            let mut table = Table::new(&[
                "rank",
                "psi_deg",
                "rho_deg",
                "offset_deg",
                "deff_pm_per_V",
                "crossing_angle_deg",
                "collinear_psi_deg",
                "collinear_rho_deg",
            ]);
            for (i, cand) in found.iter().enumerate() {
                let [psi, rho] = psi_rho(&cand.pump);
                let [cpsi, crho] = psi_rho(&cand.collinear_point);
                let mut row = vec![(i + 1).to_string()];
                row.extend([psi, rho, cand.offset_deg, cand.deff_pm_per_v, cand.intersection_angle_deg, cpsi, crho].map(fmt_num));
                table.push(row);
            }
            let summary = match found.first() {
                Some(b) => format!(
                    "{} candidates; best d_eff {} pm/V at crossing angle {}°",
                    found.len(),
                    fmt_num(b.deff_pm_per_v),
                    fmt_num(b.intersection_angle_deg)
                ),
                None => "no candidate within the angle window".into(),
            };
            Report::table("design-scan", json!({ "candidates": found }), table, summary).write(&output)
        }
        Command::Spectra { spectrum, thickness_mm, marginals_out, grid_out, output } => {
            spectra_cmd(&spectrum, thickness_mm, marginals_out.as_deref(), grid_out.as_deref(), &output)
        }
        Command::SweepPump { crystal, dir, pump_nm, dc_nm, cones, output } => {
            let c = load(&crystal)?;
            let sweep = pump_bandwidth_sweep(&c, &direction(dir.dir), &pump_nm, dc_nm, cone_options(&cones)?)?;
            let mut table =
                Table::new(&["lambda_pump_nm", "slow_radius_deg", "fast_radius_deg", "slow_normalized", "fast_normalized"]);
            for r in &sweep.rows {
                table.push_nums(&[r.lambda_pump_nm, r.slow_radius_deg, r.fast_radius_deg, r.slow_normalized, r.fast_normalized]);
            }
            let summary = format!("slope ratio {}, width ratio {}", fmt_num(sweep.slope_ratio), fmt_num(sweep.width_ratio));
            Report::table("pump-sweep", to_value(&sweep)?, table, summary).write(&output)
        }
        Command::SweepFilter { kind, spectrum, edge_nm, fwhm_nm, thickness_mm, cones, output } => match kind {
            FilterSweepKind::Cones => {
                let c = load(&spectrum.crystal)?;
                let pump = spectrum.pump_nm;
                let center = 2.0 * pump;
                let edges = [edge_nm, center, complement_wavelength(pump, edge_nm)?];
                let sweep = filter_bandwidth_sweep(&c, &direction(spectrum.dir.dir), pump, &edges, cone_options(&cones)?)?;
                let mut table = Table::new(&["lambda_slow_nm", "lambda_fast_nm", "slow_radius_deg", "fast_radius_deg"]);
                for r in &sweep.rows {
                    table.push_nums(&[r.lambda_slow_nm, r.lambda_fast_nm, r.slow_radius_deg, r.fast_radius_deg]);
                }
                let summary =
                    format!("radius spread slow {}°, fast {}°", fmt_num(sweep.slow_spread_deg), fmt_num(sweep.fast_spread_deg));
                Report::table("filter-sweep", to_value(&sweep)?, table, summary).write(&output)
            }
            FilterSweepKind::Overlap => {
                positive("thickness", thickness_mm)?;
                let setup = SpectrumSetup::new(&spectrum)?;
                let filter = setup.filter.ok_or_else(|| CliError::Input("overlap sweep needs a filter".into()))?;
                let rows = overlap_vs_filter(
                    &setup.crystal,
                    &setup.pump,
                    &setup.direction,
                    thickness_mm,
                    &filter,
                    &fwhm_nm,
                    &setup.options,
                )?;
                overlap_report("overlap-vs-filter", "fwhm_nm", &rows, &setup, &output)
            }
        },
        Command::SweepThickness { spectrum, thickness_mm, output } => {
            let setup = SpectrumSetup::new(&spectrum)?;
            let rows = overlap_vs_thickness(
                &setup.crystal,
                &setup.pump,
                &setup.direction,
                &thickness_mm,
                setup.filter.as_ref(),
                &setup.options,
            )?;
            overlap_report("overlap-vs-thickness", "thickness_mm", &rows, &setup, &output)
        }
        Command::ReproducePaper { crystal_dir, tolerance_scale, out } => reproduce(&crystal_dir, tolerance_scale, out.as_deref()),
    }
}

fn indices(c: &CrystalDefinition, nm: f64, dir: Option<DirArg>, output: &OutputArgs) -> CmdResult {
    let p = principal_indices(c, nm)?;
    match dir {
        None => {
            let [nx, ny, nz] = p.sorted();
            let phi = indicatrix_rotation(c, nm)?.phi_deg;
            let data = json!({ "lambda_nm": nm, "principal_e0": p.n, "n_x": nx, "n_y": ny, "n_z": nz, "phi_deg": phi });
            let summary = format!("n_x {} n_y {} n_z {} Φ {}°", fmt_num(nx), fmt_num(ny), fmt_num(nz), fmt_num(phi));
            Report::json("indices", data, summary).write(output)
        }
        Some(d) => {
            let d = direction(d);
            let m = mode_indices(c, nm, &d)?;
            let data = json!({ "lambda_nm": nm, "direction": d, "n_fast": m.fast, "n_slow": m.slow });
            Report::json("mode-indices", data, format!("n_fast {} n_slow {}", fmt_num(m.fast), fmt_num(m.slow))).write(output)
        }
    }
}

fn modes(c: &CrystalDefinition, nm: f64, d: Direction, reference: Option<DirArg>, output: &OutputArgs) -> CmdResult {
    let s = solve_wave(c, nm, &d)?;
    let pol = reference.map(|r| {
        let r = direction(r);
        json!({
            "reference": r,
            "fast_deg": polarization_angle_deg(&s.d_fast, &r, &d),
            "slow_deg": polarization_angle_deg(&s.d_slow, &r, &d),
        })
    });
    let summary = format!(
        "n_fast {} n_slow {}; walk-off fast {}° slow {}°",
        fmt_num(s.n_fast),
        fmt_num(s.n_slow),
        fmt_num(s.alpha_fast_deg),
        fmt_num(s.alpha_slow_deg)
    );
    Report::json("modes", json!({ "solution": s, "polarization_angles": pol }), summary).write(output)
}

fn project(cone: &EmissionCone) -> Result<Vec<StereoPoint>, CliError> {
    Ok(cone.external.iter().map(stereographic_project).collect::<pdc_core::Result<_>>()?)
}

fn cones_cmd(
    c: &CrystalDefinition,
    pr: &PdcProcess,
    pump: Direction,
    options: &ConeOptions,
    geometry_out: Option<PathBuf>,
    output: &OutputArgs,
) -> CmdResult {
    let (s, f) = emission_cones(c, pr, &pump, *options)?;
    let geometry = cone_geometry(&s, &f, &pump);
    let mut table = Table::new(&["azimuth_deg", "psi_deg", "rho_deg", "u", "v", "rel_mismatch", "polarization"]);
    for cone in [&s, &f] {
        let pts = project(cone)?;
        for (i, (dir, pt)) in cone.external.iter().zip(&pts).enumerate() {
            let [psi, rho] = psi_rho(dir);
            let mut row: Vec<String> =
                [cone.azimuth_deg[i], psi, rho, pt.u, pt.v, cone.relative_mismatch[i]].map(fmt_num).to_vec();
            row.push(cone.mode.label().into());
            table.push(row);
        }
    }
    let summary = match &geometry {
        Ok(g) => format!(
            "{} pairs; separation {}°, crossing angle {}°",
            s.len(),
            fmt_num(g.separation_deg),
            fmt_num(g.intersection_angle_deg)
        ),
        Err(e) => format!("{} pairs; {e}", s.len()),
    };
    if let Some(path) = &geometry_out {
        let g = geometry.as_ref().map_err(|e| CliError::Core(pdc_core::Error::NoPhaseMatching(e.to_string())))?;
        let pol = polarization_angles(c, pr, g)?;
        let data = json!({
            "process": pr,
            "slow_radius_deg": s.angular_radius_deg,
            "fast_radius_deg": f.angular_radius_deg,
            "geometry": g,
            "polarization_from_p_deg": pol,
        });
        emit(Some(path), &json_document("cone-geometry", &data)?)?;
    }
    let data = json!({ "process": pr, "pump": pump, "slow": s, "fast": f, "geometry": geometry.ok() });
    Report::table("cones", data, table, summary).write(output)
}

struct SpectrumSetup {
    crystal: CrystalDefinition,
    pump: PumpSpec,
    filter: Option<FilterSpec>,
    direction: Direction,
    options: SpectrumOptions,
}

impl SpectrumSetup {
    fn new(a: &SpectrumArgs) -> Result<Self, CliError> {
        let crystal = load(&a.crystal)?;
        let pump = PumpSpec::new(a.pump_nm, a.pump_fwhm_nm)?;
        let shape = match a.filter_shape {
            ShapeArg::Gaussian => FilterShape::Gaussian,
            ShapeArg::Rectangular => FilterShape::Rectangular,
        };
        let filter = if a.no_filter {
            None
        } else {
            Some(FilterSpec::new(a.filter_center_nm.unwrap_or(2.0 * a.pump_nm), a.filter_fwhm_nm, shape)?)
        };
        let options = SpectrumOptions {
            grid_points: a.grid,
            half_span_nm: a.half_span_nm,
            filter_action: match a.filter_action {
                ActionArg::Intensity => FilterAction::Intensity,
                ActionArg::Amplitude => FilterAction::Amplitude,
            },
            ..SpectrumOptions::default()
        };
        let mut direction = direction(a.dir.dir);
        if a.snap_collinear {
            let pr = PdcProcess::degenerate_fsf(a.pump_nm)?;
            direction = nearest_collinear_direction(&crystal, &pr, &direction, 5.0)?;
        }
        Ok(Self { crystal, pump, filter, direction, options })
    }
}

fn spectra_cmd(
    a: &SpectrumArgs,
    thickness_mm: f64,
    marginals_out: Option<&Path>,
    grid_out: Option<&Path>,
    output: &OutputArgs,
) -> CmdResult {
    positive("thickness", thickness_mm)?;
    let setup = SpectrumSetup::new(a)?;
    let js = joint_spectrum(&setup.crystal, &setup.pump, &setup.direction, thickness_mm, setup.filter.as_ref(), &setup.options)?;
    if let Some(path) = marginals_out {
        let mut t = Table::new(&["lambda_nm", "signal", "idler"]);
        for i in 0..js.len() {
            t.push_nums(&[js.lambda_nm[i], js.marginal_signal[i], js.marginal_idler[i]]);
        }
        emit(Some(path), &t.to_csv()?)?;
    }
    if let Some(path) = grid_out {
        let n = js.len();
        let mut t = Table::new(&["lambda_signal_nm", "lambda_idler_nm", "intensity"]);
        for i in 0..n {
            for j in 0..n {
                t.push_nums(&[js.lambda_nm[i], js.lambda_nm[j], js.intensity[i * n + j]]);
            }
        }
        emit(Some(path), &t.to_csv()?)?;
    }
    let data = json!({
        "direction": setup.direction,
        "thickness_mm": thickness_mm,
        "pump": setup.pump,
        "filter": setup.filter,
        "grid_points": js.len(),
        "overlap": js.overlap,
        "min_overlap": js.min_overlap,
        "exchange_overlap": js.exchange_overlap,
        "aspect_ratio": js.aspect_ratio,
    });
    let summary = format!("overlap {}, exchange overlap {}", fmt_num(js.overlap), fmt_num(js.exchange_overlap));
    Report::json("spectra", data, summary).write(output)
}

fn overlap_report(
    kind: &'static str,
    column: &'static str,
    rows: &[OverlapRow],
    setup: &SpectrumSetup,
    output: &OutputArgs,
) -> CmdResult {
    let mut table = Table::new(&[column, "overlap", "min_overlap", "exchange_overlap"]);
    for r in rows {
        table.push_nums(&[r.value, r.overlap, r.min_overlap, r.exchange_overlap]);
    }
    let data = json!({ "direction": setup.direction, "pump": setup.pump, "filter": setup.filter, "rows": rows });
    Report::table(kind, data, table, format!("{} rows", rows.len())).write(output)
}

/// Short table cell: scientific notation for small magnitudes.
fn cell(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-3 {
        format!("{x:.4e}")
    } else {
        fmt_num(x)
    }
}

fn reproduce(dir: &Path, scale: f64, out: Option<&Path>) -> CmdResult {
    positive("tolerance scale", scale)?;
    let rows = reference::anchors(dir, scale);
    let mut text =
        format!("{:<26} {:>3} {:>14} {:>14} {:>12}  {}\n", "anchor", "crit", "reference", "computed", "tolerance", "result");
    for r in &rows {
        let computed = r.computed.map_or_else(|| "-".to_string(), cell);
        let verdict = match (&r.error, r.pass) {
            (Some(e), _) => format!("FAIL ({e})"),
            (None, true) => "pass".into(),
            (None, false) => "FAIL".into(),
        };
        text += &format!(
            "{:<26} {:>3} {:>14} {:>14} {:>12}  {}\n",
            r.id,
            r.criterion,
            cell(r.reference),
            computed,
            cell(r.tolerance),
            verdict
        );
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    text += &format!("{passed}/{} anchors within tolerance\n", rows.len());
    emit(None, &text)?;
    if let Some(path) = out {
        let data = json!({ "tolerance_scale": scale, "passed": passed, "total": rows.len(), "anchors": rows });
        emit(Some(path), &json_document("anchors", &data)?)?;
    }
    Ok(())
}
